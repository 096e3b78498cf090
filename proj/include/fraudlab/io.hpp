#pragma once

#include <fstream>
#include <string>

#include "fraudlab/common.hpp"

namespace fraudlab {

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw data_error("cannot open for writing: " + path);
  f.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!f) throw data_error("write failed: " + path);
}

inline std::string read_text(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw data_error("cannot open: " + path);
  std::string out((std::istreambuf_iterator<char>(f)),
                  std::istreambuf_iterator<char>());
  return out;
}

inline bool file_exists(const std::string& path) {
  std::ifstream f(path);
  return f.good();
}

}  // namespace fraudlab
