// Copyright (c) 2026 the teemaf-sim authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <variant>

namespace teemaf {

// Error code strings are stable kebab-case identifiers ("duplicate-sid",
// "mre-mismatch", ...). Scenario logs and tests match on them.
struct Error {
  std::string code;
  std::string detail;
};

template <typename T>
class [[nodiscard]] Result {
 public:
  Result(T value) : v_(std::move(value)) {}
  Result(Error err) : v_(std::move(err)) {}

  static Result failure(std::string code, std::string detail = {}) {
    return Result(Error{std::move(code), std::move(detail)});
  }

  bool ok() const { return std::holds_alternative<T>(v_); }
  explicit operator bool() const { return ok(); }

  const T& value() const& {
    if (!ok()) throw std::runtime_error("Result::value on error: " + error().code);
    return std::get<T>(v_);
  }
  T&& value() && {
    if (!ok()) throw std::runtime_error("Result::value on error: " + error().code);
    return std::get<T>(std::move(v_));
  }
  const Error& error() const {
    if (ok()) throw std::runtime_error("Result::error on ok value");
    return std::get<Error>(v_);
  }

 private:
  std::variant<T, Error> v_;
};

template <>
class [[nodiscard]] Result<void> {
 public:
  Result() = default;
  Result(Error err) : err_(std::move(err)), has_err_(true) {}

  static Result failure(std::string code, std::string detail = {}) {
    return Result(Error{std::move(code), std::move(detail)});
  }

  bool ok() const { return !has_err_; }
  explicit operator bool() const { return ok(); }
  const Error& error() const {
    if (!has_err_) throw std::runtime_error("Result::error on ok value");
    return err_;
  }

 private:
  Error err_{};
  bool has_err_ = false;
};

}  // namespace teemaf
