#include "eqlab/expcli/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <istream>
#include <ostream>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "eqlab/core/error.hpp"

namespace eqlab {

std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

namespace {

void flatten(const boost::property_tree::ptree& tree, const std::string& prefix,
             std::map<std::string, std::string>& out) {
  for (const auto& [key, child] : tree) {
    const std::string full = prefix.empty() ? key : prefix + "." + key;
    if (child.empty())
      out[full] = child.data();
    else
      flatten(child, full, out);
  }
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace

Config Config::parse(const std::string& text) {
  boost::property_tree::ptree tree;
  std::istringstream in(text);
  try {
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError("config: " + e.message() + " at line " + std::to_string(e.line()));
  }
  Config c;
  flatten(tree, "", c.values_);
  for (auto& [k, v] : c.values_) v = trim(v);
  return c;
}

Config Config::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("config: cannot open " + path);
  std::ostringstream text;
  text << in.rdbuf();
  return parse(text.str());
}

std::string Config::get(const std::string& key, const std::string& fallback) const {
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

int Config::get_int(const std::string& key, int fallback) const {
  const long v = get_long(key, fallback);
  if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max())
    throw ConfigError("config: " + key + " is out of range");
  return static_cast<int>(v);
}

long Config::get_long(const std::string& key, long fallback) const {
  if (!has(key)) return fallback;
  const std::string& s = values_.at(key);
  try {
    size_t pos = 0;
    const long v = std::stol(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config: " + key + " = '" + s + "' is not an integer");
  }
}

double Config::get_double(const std::string& key, double fallback) const {
  if (!has(key)) return fallback;
  const std::string& s = values_.at(key);
  try {
    size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config: " + key + " = '" + s + "' is not a number");
  }
}

bool Config::get_bool(const std::string& key, bool fallback) const {
  if (!has(key)) return fallback;
  const std::string& s = values_.at(key);
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  throw ConfigError("config: " + key + " = '" + s + "' is not a boolean");
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(trim(cur));
  return out;
}

std::vector<int> parse_int_list(const std::string& s) {
  std::vector<int> out;
  try {
    if (s.find(':') != std::string::npos) {
      const auto p = split(s, ':');
      if (p.size() != 3) throw ConfigError("bad range");
      const int a = std::stoi(p[0]), step = std::stoi(p[1]), b = std::stoi(p[2]);
      if (step <= 0) throw ConfigError("bad range");
      for (int v = a; v <= b; v += step) out.push_back(v);
      return out;
    }
    for (const auto& part : split(s, ',')) {
      if (part.empty()) continue;
      size_t pos = 0;
      out.push_back(std::stoi(part, &pos));
      if (pos != part.size()) throw ConfigError("bad integer");
    }
  } catch (const std::exception&) {
    throw ConfigError("cannot parse integer list '" + s + "'");
  }
  return out;
}

std::vector<double> parse_double_list(const std::string& s) {
  std::vector<double> out;
  try {
    for (const auto& part : split(s, ',')) {
      if (part.empty()) continue;
      size_t pos = 0;
      out.push_back(std::stod(part, &pos));
      if (pos != part.size()) throw ConfigError("bad number");
    }
  } catch (const std::exception&) {
    throw ConfigError("cannot parse number list '" + s + "'");
  }
  return out;
}

std::string RunParams::canonical() const {
  std::string out;
  for (const auto& [k, v] : kv_) out += k + "=" + v + "\n";
  return out;
}

void write_header(std::ostream& out, const std::string& command, const RunParams& params, std::uint64_t seed) {
  out << "# eqlab " << kToolVersion << " " << command << "\n";
  out << "# config_hash " << params.hash() << "\n";
  out << "# seed " << seed << "\n";
  for (const auto& [k, v] : params.values()) out << "# param " << k << "=" << v << "\n";
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + "\"";
}

void write_csv_row(std::ostream& out, const std::vector<std::string>& fields) {
  for (size_t i = 0; i < fields.size(); ++i) out << (i ? "," : "") << csv_field(fields[i]);
  out << "\n";
}

std::vector<std::vector<std::string>> read_csv(std::istream& in) {
  std::vector<std::vector<std::string>> rows;
  std::string line;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false, pending = false;
  while (std::getline(in, line)) {
    if (!pending) {
      if (line.empty() || line == "\r" || line[0] == '#') continue;
      row.clear();
      field.clear();
    } else {
      field += '\n';
    }
    for (size_t i = 0; i < line.size(); ++i) {
      const char c = line[i];
      if (quoted) {
        if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
          field += '"';
          ++i;
        } else if (c == '"') {
          quoted = false;
        } else {
          field += c;
        }
      } else if (c == '"') {
        quoted = true;
      } else if (c == ',') {
        row.push_back(field);
        field.clear();
      } else if (c != '\r') {
        field += c;
      }
    }
    pending = quoted;
    if (!pending) {
      row.push_back(field);
      rows.push_back(row);
    }
  }
  if (pending) throw ParseError(0, "csv: unterminated quoted field");
  return rows;
}

std::string format_double(double v, int digits) {
  if (std::isnan(v)) return "";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

namespace {

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

void write_svg_chart(std::ostream& out, const std::string& title, const std::string& xlabel,
                     const std::string& ylabel, const std::vector<Series>& series) {
  const double w = 640, h = 420, left = 70, right = 170, top = 40, bottom = 60;
  double x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  bool first = true;
  for (const auto& s : series)
    for (size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      if (first) {
        x0 = x1 = s.x[i];
        y0 = y1 = s.y[i];
        first = false;
      }
      x0 = std::min(x0, s.x[i]);
      x1 = std::max(x1, s.x[i]);
      y0 = std::min(y0, s.y[i]);
      y1 = std::max(y1, s.y[i]);
    }
  if (x1 <= x0) x1 = x0 + 1;
  y0 = std::min(y0, 0.0);
  if (y1 <= y0) y1 = y0 + 1;
  const double pw = w - left - right, ph = h - top - bottom;
  const auto px = [&](double x) { return left + (x - x0) / (x1 - x0) * pw; };
  const auto py = [&](double y) { return top + ph - (y - y0) / (y1 - y0) * ph; };
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};

  char buf[256];
  std::snprintf(buf, sizeof buf, "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%g\" height=\"%g\">\n", w, h);
  out << buf;
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  std::snprintf(buf, sizeof buf, "<text x=\"%g\" y=\"24\" font-size=\"16\" text-anchor=\"middle\">", left + pw / 2);
  out << buf << xml_escape(title) << "</text>\n";
  std::snprintf(buf, sizeof buf,
                "<line x1=\"%g\" y1=\"%g\" x2=\"%g\" y2=\"%g\" stroke=\"black\"/>\n"
                "<line x1=\"%g\" y1=\"%g\" x2=\"%g\" y2=\"%g\" stroke=\"black\"/>\n",
                left, top + ph, left + pw, top + ph, left, top, left, top + ph);
  out << buf;
  for (int k = 0; k <= 5; ++k) {
    const double xv = x0 + (x1 - x0) * k / 5.0, yv = y0 + (y1 - y0) * k / 5.0;
    std::snprintf(buf, sizeof buf,
                  "<text x=\"%g\" y=\"%g\" font-size=\"11\" text-anchor=\"middle\">%.3g</text>\n"
                  "<text x=\"%g\" y=\"%g\" font-size=\"11\" text-anchor=\"end\">%.3g</text>\n",
                  px(xv), top + ph + 16, xv, left - 6, py(yv) + 4, yv);
    out << buf;
  }
  std::snprintf(buf, sizeof buf, "<text x=\"%g\" y=\"%g\" font-size=\"13\" text-anchor=\"middle\">", left + pw / 2,
                h - 18);
  out << buf << xml_escape(xlabel) << "</text>\n";
  std::snprintf(buf, sizeof buf,
                "<text x=\"18\" y=\"%g\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 18 %g)\">",
                top + ph / 2, top + ph / 2);
  out << buf << xml_escape(ylabel) << "</text>\n";
  for (size_t s = 0; s < series.size(); ++s) {
    const char* color = colors[s % 6];
    out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
    for (size_t i = 0; i < series[s].x.size() && i < series[s].y.size(); ++i) {
      if (!std::isfinite(series[s].y[i])) continue;
      std::snprintf(buf, sizeof buf, "%.2f,%.2f ", px(series[s].x[i]), py(series[s].y[i]));
      out << buf;
    }
    out << "\"/>\n";
    const double ly = top + 14 + 18 * static_cast<double>(s);
    std::snprintf(buf, sizeof buf,
                  "<line x1=\"%g\" y1=\"%g\" x2=\"%g\" y2=\"%g\" stroke=\"%s\" stroke-width=\"2\"/>\n"
                  "<text x=\"%g\" y=\"%g\" font-size=\"12\">",
                  left + pw + 12, ly, left + pw + 32, ly, color, left + pw + 38, ly + 4);
    out << buf << xml_escape(series[s].name) << "</text>\n";
  }
  out << "</svg>\n";
}

}  // namespace eqlab
