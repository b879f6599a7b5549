#pragma once

#include <iosfwd>
#include <string>

#include "ffa/numerics/tensor.hpp"

// Text serialization shared by every model file. Doubles are written as
// hexadecimal floating point so a save/load round trip is exact.
namespace ffa::num::io {

inline constexpr int kFormatVersion = 1;

std::string format_double(double v);
double parse_double(const std::string& token);

void write_header(std::ostream& os, const std::string& kind);
// Reads the magic/version line and returns the kind; throws FormatError.
std::string read_header(std::istream& is);

void write_tensor(std::ostream& os, const Tensor& t);
Tensor read_tensor(std::istream& is);

// Reads `key value...` and checks the key.
std::string expect_key(std::istream& is, const std::string& key);

}  // namespace ffa::num::io
