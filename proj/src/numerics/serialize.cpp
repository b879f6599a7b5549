#include "ffa/numerics/serialize.hpp"

#include <charconv>
#include <istream>
#include <ostream>

#include "ffa/error.hpp"

namespace ffa::num::io {

namespace {
constexpr const char* kMagic = "ffa-model";
}

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::hex);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& token) {
  double v = 0.0;
  const char* first = token.data();
  const char* last = token.data() + token.size();
  bool neg = false;
  if (first != last && *first == '-') {
    neg = true;
    ++first;
  }
  auto res = std::from_chars(first, last, v, std::chars_format::hex);
  if (res.ec != std::errc() || res.ptr != last) {
    throw FormatError("bad floating-point token '" + token + "'");
  }
  return neg ? -v : v;
}

void write_header(std::ostream& os, const std::string& kind) {
  os << kMagic << ' ' << kFormatVersion << '\n' << "kind " << kind << '\n';
}

std::string read_header(std::istream& is) {
  std::string magic;
  int version = 0;
  if (!(is >> magic >> version) || magic != kMagic) throw FormatError("not an ffa-model file");
  if (version != kFormatVersion) {
    throw FormatError("unsupported model format version " + std::to_string(version));
  }
  return expect_key(is, "kind");
}

std::string expect_key(std::istream& is, const std::string& key) {
  std::string k, v;
  if (!(is >> k) || k != key) throw FormatError("expected key '" + key + "', got '" + k + "'");
  if (!(is >> v)) throw FormatError("missing value for key '" + key + "'");
  return v;
}

void write_tensor(std::ostream& os, const Tensor& t) {
  os << "tensor " << t.rank();
  for (auto e : t.shape()) os << ' ' << e;
  for (double v : t.values()) os << ' ' << format_double(v);
  os << '\n';
}

Tensor read_tensor(std::istream& is) {
  std::size_t rank = 0;
  rank = std::stoul(expect_key(is, "tensor"));
  if (rank == 0 || rank > 2) throw FormatError("bad tensor rank");
  Shape shape(rank);
  std::size_t count = 1;
  for (auto& e : shape) {
    if (!(is >> e) || e == 0) throw FormatError("bad tensor extent");
    count *= e;
  }
  std::vector<double> values(count);
  std::string tok;
  for (auto& v : values) {
    if (!(is >> tok)) throw FormatError("truncated tensor data");
    v = parse_double(tok);
  }
  return Tensor(std::move(shape), std::move(values));
}

}  // namespace ffa::num::io
