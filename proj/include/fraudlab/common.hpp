#pragma once

#include <stdexcept>
#include <string>

namespace fraudlab {

// Process exit codes used by the CLI and by errors thrown from library code.
enum class ErrorCode : int {
  Config = 2,
  Data = 3,
  Divergence = 4,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const { return code_; }
  int exit_code() const { return static_cast<int>(code_); }

 private:
  ErrorCode code_;
};

inline Error config_error(const std::string& what) {
  return Error(ErrorCode::Config, what);
}
inline Error data_error(const std::string& what) {
  return Error(ErrorCode::Data, what);
}
inline Error divergence_error(const std::string& what) {
  return Error(ErrorCode::Divergence, what);
}

}  // namespace fraudlab
