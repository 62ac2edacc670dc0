#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>

#include "eqlab/core/error.hpp"
#include "eqlab/models/model.hpp"

namespace eqlab {

namespace {

constexpr char kMagic[4] = {'E', 'Q', 'L', 'W'};
constexpr std::uint32_t kVersion = 1;

template <class U>
U to_little(U v) {
  if constexpr (std::endian::native == std::endian::big) {
    unsigned char b[sizeof(U)];
    std::memcpy(b, &v, sizeof(U));
    for (std::size_t i = 0; i < sizeof(U) / 2; ++i) std::swap(b[i], b[sizeof(U) - 1 - i]);
    std::memcpy(&v, b, sizeof(U));
  }
  return v;
}

void put_u32(std::ostream& out, std::uint32_t v) {
  v = to_little(v);
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

void put_f64(std::ostream& out, double x) {
  std::uint64_t bits;
  std::memcpy(&bits, &x, sizeof bits);
  bits = to_little(bits);
  out.write(reinterpret_cast<const char*>(&bits), sizeof bits);
}

struct Reader {
  std::istream& in;
  std::size_t offset = 0;

  void bytes(char* dst, std::size_t n) {
    in.read(dst, static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in.gcount()) != n) throw ParseError(offset, "truncated weight file");
    offset += n;
  }
  std::uint32_t u32() {
    std::uint32_t v;
    bytes(reinterpret_cast<char*>(&v), sizeof v);
    return to_little(v);
  }
  double f64() {
    std::uint64_t bits;
    bytes(reinterpret_cast<char*>(&bits), sizeof bits);
    bits = to_little(bits);
    double x;
    std::memcpy(&x, &bits, sizeof x);
    return x;
  }
};

}  // namespace

void write_weights(std::ostream& out, const Weights& w) {
  const Architecture arch = architecture_of(w);
  validate(w);
  out.write(kMagic, 4);
  put_u32(out, kVersion);
  if (const auto* fc = std::get_if<FCShape>(&arch)) {
    put_u32(out, 0);
    put_u32(out, static_cast<std::uint32_t>(fc->activation));
    put_u32(out, static_cast<std::uint32_t>(fc->widths.size()));
    for (int v : fc->widths) put_u32(out, static_cast<std::uint32_t>(v));
  } else {
    const auto& g = std::get<CNNGeometry>(arch);
    put_u32(out, 1);
    for (int v : {g.d, g.block, g.blocks, g.k, static_cast<int>(g.pooling)})
      put_u32(out, static_cast<std::uint32_t>(v));
  }
  const Vector theta = flatten(w);
  for (Eigen::Index i = 0; i < theta.size(); ++i) put_f64(out, theta(i));
  if (!out) throw Error("failed to write weights");
}

Weights read_weights(std::istream& in) {
  Reader r{in};
  char magic[4];
  r.bytes(magic, 4);
  if (std::memcmp(magic, kMagic, 4) != 0) throw ParseError(0, "bad weight-file magic");
  const std::uint32_t version = r.u32();
  if (version != kVersion) throw ParseError(4, "unsupported weight-file version " + std::to_string(version));
  const std::size_t kind_at = r.offset;
  const std::uint32_t kind = r.u32();
  Architecture arch;
  if (kind == 0) {
    FCShape s;
    const std::uint32_t act = r.u32();
    if (act > 2) throw ParseError(r.offset - 4, "unknown activation code");
    s.activation = static_cast<Activation>(act);
    const std::uint32_t count = r.u32();
    if (count < 2 || count > 1024) throw ParseError(r.offset - 4, "implausible layer count");
    for (std::uint32_t i = 0; i < count; ++i) s.widths.push_back(static_cast<int>(r.u32()));
    arch = s;
  } else if (kind == 1) {
    CNNGeometry g;
    g.d = static_cast<int>(r.u32());
    g.block = static_cast<int>(r.u32());
    g.blocks = static_cast<int>(r.u32());
    g.k = static_cast<int>(r.u32());
    const std::uint32_t pool = r.u32();
    if (pool > 1) throw ParseError(r.offset - 4, "unknown pooling code");
    g.pooling = static_cast<Pooling>(pool);
    arch = g;
  } else {
    throw ParseError(kind_at, "unknown model kind " + std::to_string(kind));
  }
  try {
    validate(arch);
  } catch (const DimensionError& e) {
    throw ParseError(kind_at, std::string("invalid geometry: ") + e.what());
  }
  Vector theta(num_params(arch));
  for (Eigen::Index i = 0; i < theta.size(); ++i) theta(i) = r.f64();
  return unflatten(arch, theta);
}

}  // namespace eqlab
