#include "mvsearch/common/tensor_io.h"

#include <cstdint>
#include <cstring>

#include "mvsearch/common/errors.h"

namespace mvsearch {

void AppendFloat32(std::string& out, const std::vector<double>& values) {
  out.reserve(out.size() + 4 * values.size());
  for (double v : values) {
    const float f = static_cast<float>(v);
    std::uint32_t bits;
    std::memcpy(&bits, &f, sizeof bits);
    for (int i = 0; i < 4; ++i) out += static_cast<char>((bits >> (8 * i)) & 0xff);
  }
}

std::vector<double> ReadFloat32(std::string_view bytes) {
  if (bytes.size() % 4 != 0) throw FormatError("tensor data is not a whole number of floats");
  std::vector<double> out(bytes.size() / 4);
  for (std::size_t k = 0; k < out.size(); ++k) {
    std::uint32_t bits = 0;
    for (int i = 0; i < 4; ++i) {
      bits |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[4 * k + i])) << (8 * i);
    }
    float f;
    std::memcpy(&f, &bits, sizeof f);
    out[k] = f;
  }
  return out;
}

}  // namespace mvsearch
