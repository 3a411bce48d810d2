#pragma once

#include <optional>

#include "clamp/error.hpp"

namespace testsupport {

// The code of the clamp::Error thrown by `f`, or nothing if it returned.
template <class F>
std::optional<clamp::ErrorCode> code_of(F&& f) {
  try {
    f();
  } catch (const clamp::Error& e) {
    return e.code();
  }
  return std::nullopt;
}

}  // namespace testsupport
