#pragma once

#include <stdexcept>
#include <string>

namespace kpforge {

enum class ErrorKind { Usage = 1, Data = 2, Numeric = 3 };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void usage_error(const std::string& msg) { throw Error(ErrorKind::Usage, msg); }
[[noreturn]] inline void data_error(const std::string& msg) { throw Error(ErrorKind::Data, msg); }
[[noreturn]] inline void numeric_error(const std::string& msg) { throw Error(ErrorKind::Numeric, msg); }

}  // namespace kpforge
