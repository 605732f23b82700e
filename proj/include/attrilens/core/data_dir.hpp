#pragma once

#include <cstdlib>
#include <filesystem>

#ifndef ATTRILENS_DEFAULT_DATA_DIR
#define ATTRILENS_DEFAULT_DATA_DIR "data"
#endif

namespace attrilens {

/// Root of the bundled data files. ATTRILENS_DATA_DIR overrides the location
/// compiled into the build.
inline std::filesystem::path data_dir() {
  if (const char* env = std::getenv("ATTRILENS_DATA_DIR"); env != nullptr && *env != '\0') {
    return std::filesystem::path(env);
  }
  return std::filesystem::path(ATTRILENS_DEFAULT_DATA_DIR);
}

}  // namespace attrilens
