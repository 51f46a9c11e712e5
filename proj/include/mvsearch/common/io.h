#ifndef MVSEARCH_COMMON_IO_H_
#define MVSEARCH_COMMON_IO_H_

#include <filesystem>
#include <string>
#include <string_view>

namespace mvsearch {

std::string ReadFile(const std::filesystem::path& path);

// Writes through a temporary sibling and renames it into place.
void WriteFile(const std::filesystem::path& path, std::string_view contents);

}  // namespace mvsearch

#endif  // MVSEARCH_COMMON_IO_H_
