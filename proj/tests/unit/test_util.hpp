#pragma once

#include <gtest/gtest.h>

#include <optional>

#include "ssde/error.hpp"

namespace ssde::test {

template <class F>
std::optional<ErrorKind> error_kind(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  return std::nullopt;
}

}  // namespace ssde::test

#define EXPECT_ERROR(stmt, kind) EXPECT_EQ(::ssde::test::error_kind([&] { (void)(stmt); }), ::ssde::ErrorKind::kind)
