#pragma once

#include <stdexcept>
#include <string>

namespace whatsnet {

// Every validation failure in the library surfaces as this type so the CLI
// can report a single-line diagnostic.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace whatsnet
