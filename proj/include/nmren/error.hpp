#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace nmren {

/// Library failure tagged with the module that raised it.
class Error : public std::runtime_error {
 public:
  Error(std::string module, const std::string& message)
      : std::runtime_error(module + ": " + message), module_(std::move(module)) {}

  const std::string& module() const noexcept { return module_; }

 private:
  std::string module_;
};

/// Non-fatal findings collected along a computation and surfaced in reports.
struct Diagnostics {
  std::vector<std::string> warnings;

  void warn(const std::string& module, const std::string& message) { warnings.push_back(module + ": " + message); }
};

}  // namespace nmren
