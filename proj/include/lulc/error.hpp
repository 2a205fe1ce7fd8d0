#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace lulc {

// Every library error carries a stable machine-parseable category string
// ("shape_mismatch", "bad_header", ...) next to the human-readable message.
// The CLI prints these as "error[<category>]: <message>" and exits 1.
class Error : public std::runtime_error {
 public:
  Error(std::string category, const std::string& message)
      : std::runtime_error(message), category_(std::move(category)) {}

  const std::string& category() const noexcept { return category_; }

 private:
  std::string category_;
};

[[noreturn]] inline void fail(std::string category, const std::string& message) {
  throw Error(std::move(category), message);
}

inline void require(bool condition, const char* category, const std::string& message) {
  if (!condition) throw Error(category, message);
}

}  // namespace lulc
