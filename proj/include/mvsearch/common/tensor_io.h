#ifndef MVSEARCH_COMMON_TENSOR_IO_H_
#define MVSEARCH_COMMON_TENSOR_IO_H_

#include <string>
#include <string_view>
#include <vector>

namespace mvsearch {

// Appends each value as a little-endian IEEE-754 float32.
void AppendFloat32(std::string& out, const std::vector<double>& values);

// Decodes `bytes` (a multiple of 4) as little-endian float32 values.
std::vector<double> ReadFloat32(std::string_view bytes);

}  // namespace mvsearch

#endif  // MVSEARCH_COMMON_TENSOR_IO_H_
