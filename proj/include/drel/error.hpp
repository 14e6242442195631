#pragma once

#include <stdexcept>
#include <string>

namespace drel {

// All library failures derive from Error; the message is prefixed with the
// module that raised it ("data: line 3: ...").
class Error : public std::runtime_error {
 public:
  Error(const std::string& module, const std::string& what)
      : std::runtime_error(module + ": " + what), module_(module) {}

  const std::string& module() const noexcept { return module_; }

 private:
  std::string module_;
};

// Input file / record does not satisfy the corpus schema.
class ValidationError : public Error {
 public:
  using Error::Error;
};

}  // namespace drel
