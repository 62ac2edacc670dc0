#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <vector>

#include "eqlab/core/error.hpp"
#include "eqlab/tasks/task.hpp"

namespace eqlab {

namespace {
constexpr std::size_t kPlane = 1024;
constexpr std::size_t kRecord = 1 + 3 * kPlane;
}  // namespace

LabeledSet cifar_channel_norm_bytes(const std::string& bytes) {
  const std::size_t n = bytes.size() / kRecord;
  if (bytes.size() % kRecord != 0)
    throw ParseError(n * kRecord, "truncated CIFAR record (file length " + std::to_string(bytes.size()) +
                                      " is not a multiple of 3073)");
  Matrix x(3 * kPlane, static_cast<Eigen::Index>(n));
  Vector y(static_cast<Eigen::Index>(n));
  double total = 0.0;
  for (std::size_t r = 0; r < n; ++r) {
    const auto* rec = reinterpret_cast<const unsigned char*>(bytes.data() + r * kRecord + 1);
    long long red = 0, green = 0;
    for (std::size_t i = 0; i < kPlane; ++i) {
      red += static_cast<long long>(rec[i]) * rec[i];
      green += static_cast<long long>(rec[kPlane + i]) * rec[kPlane + i];
    }
    // Strict comparison: equal channel norms get label -1.
    y(static_cast<Eigen::Index>(r)) = red > green ? 1.0 : -1.0;
    for (std::size_t i = 0; i < 3 * kPlane; ++i) {
      const double v = rec[i] / 255.0;
      x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(r)) = v;
      total += v;
    }
  }
  if (n > 0) x.array() -= total / static_cast<double>(x.size());
  return LabeledSet(std::move(x), std::move(y));
}

LabeledSet cifar_channel_norm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open CIFAR file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return cifar_channel_norm_bytes(ss.str());
}

void write_labeled_csv(std::ostream& out, const LabeledSet& s) {
  for (int j = 0; j < s.dim(); ++j) out << "x_" << j << ',';
  out << "y\n";
  char buf[32];
  for (int i = 0; i < s.size(); ++i) {
    for (int j = 0; j < s.dim(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", s.points(j, i));
      out << buf << ',';
    }
    std::snprintf(buf, sizeof buf, "%.17g", s.labels(i));
    out << buf << '\n';
  }
}

LabeledSet read_labeled_csv(std::istream& in) {
  std::string line;
  std::size_t offset = 0;
  if (!std::getline(in, line)) throw ParseError(0, "empty CSV");
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) header.push_back(cell);
  }
  if (header.empty() || header.back() != "y") throw ParseError(0, "CSV header must end with column y");
  const int d = static_cast<int>(header.size()) - 1;
  for (int j = 0; j < d; ++j)
    if (header[static_cast<std::size_t>(j)] != "x_" + std::to_string(j))
      throw ParseError(0, "unexpected CSV header column '" + header[static_cast<std::size_t>(j)] + "'");
  offset += line.size() + 1;
  std::vector<double> values;
  int rows = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) {
      offset += 1;
      continue;
    }
    std::stringstream ss(line);
    std::string cell;
    int count = 0;
    while (std::getline(ss, cell, ',')) {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(cell, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used == 0 || used != cell.size()) throw ParseError(offset, "malformed number '" + cell + "'");
      values.push_back(v);
      ++count;
    }
    if (count != d + 1)
      throw ParseError(offset, "expected " + std::to_string(d + 1) + " columns, found " + std::to_string(count));
    ++rows;
    offset += line.size() + 1;
  }
  Matrix x(d, rows);
  Vector y(rows);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < d; ++j) x(j, i) = values[static_cast<std::size_t>(i * (d + 1) + j)];
    y(i) = values[static_cast<std::size_t>(i * (d + 1) + d)];
  }
  return LabeledSet(std::move(x), std::move(y));
}

}  // namespace eqlab
