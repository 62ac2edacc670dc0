#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace eqlab {

inline constexpr const char* kToolVersion = "0.1.0";

std::uint64_t fnv1a64(const std::string& s);
std::string hex64(std::uint64_t v);

// INI-style configuration (sections become "section.key").
class Config {
 public:
  Config() = default;
  static Config load(const std::string& path);
  static Config parse(const std::string& text);

  bool has(const std::string& key) const { return values_.count(key) != 0; }
  std::string get(const std::string& key, const std::string& fallback) const;
  int get_int(const std::string& key, int fallback) const;
  long get_long(const std::string& key, long fallback) const;
  double get_double(const std::string& key, double fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

// "0,3,6" or "start:step:stop" (inclusive); throws ConfigError.
std::vector<int> parse_int_list(const std::string& s);
std::vector<double> parse_double_list(const std::string& s);
std::vector<std::string> split(const std::string& s, char sep);

// Effective parameters of one run; the hash stamps output headers.
class RunParams {
 public:
  void set(const std::string& key, const std::string& value) { kv_[key] = value; }
  std::string canonical() const;
  std::string hash() const { return hex64(fnv1a64(canonical())); }
  const std::map<std::string, std::string>& values() const { return kv_; }

 private:
  std::map<std::string, std::string> kv_;
};

void write_header(std::ostream& out, const std::string& command, const RunParams& params, std::uint64_t seed);

// RFC 4180 quoting.
std::string csv_field(const std::string& s);
void write_csv_row(std::ostream& out, const std::vector<std::string>& fields);
// Skips blank lines and lines starting with '#'. Returns rows including the header.
std::vector<std::vector<std::string>> read_csv(std::istream& in);

std::string format_double(double v, int digits = 10);

struct Series {
  std::string name;
  std::vector<double> x, y;
};

// Minimal line chart: axes with ticks, one polyline per series, legend.
void write_svg_chart(std::ostream& out, const std::string& title, const std::string& xlabel,
                     const std::string& ylabel, const std::vector<Series>& series);

}  // namespace eqlab
