#pragma once

#include <stdexcept>
#include <string>

namespace fhasel {

// Bad configuration or scenario definition. Maps to exit code 1.
struct validation_error : std::runtime_error {
  explicit validation_error(const std::string& what) : std::runtime_error(what) {}
};

// Model/domain failure at run time (out-of-range state, degenerate input,
// I/O trouble). Maps to exit code 2.
struct model_error : std::runtime_error {
  explicit model_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace fhasel
