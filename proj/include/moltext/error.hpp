//
// MolText - Copyright 2026 The MolText Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MOLTEXT_ERROR_HPP_
#define MOLTEXT_ERROR_HPP_

#include <stdexcept>
#include <string>
#include <utility>
#include <variant>

namespace moltext {

// Failure class, doubling as the CLI exit code.
enum class Errc : int {
  kConfig = 2,   // bad config or arguments
  kData = 3,     // unreadable or inconsistent input data
  kNumeric = 4,  // non-finite values during training/inference
};

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string &what)
      : std::runtime_error(what), code_(code) {}

  Errc code() const { return code_; }
  int exit_code() const { return static_cast<int>(code_); }

 private:
  Errc code_;
};

// Minimal expected-or-error holder for parse-style APIs where failure is a
// normal outcome and carries a diagnostic rather than an exception.
template <class T, class E>
class Expected {
 public:
  Expected(T value) : store_(std::in_place_index<0>, std::move(value)) {}
  Expected(E error) : store_(std::in_place_index<1>, std::move(error)) {}

  bool ok() const { return store_.index() == 0; }
  explicit operator bool() const { return ok(); }

  T &value() & { return std::get<0>(store_); }
  const T &value() const & { return std::get<0>(store_); }
  T &&value() && { return std::get<0>(std::move(store_)); }
  const E &error() const { return std::get<1>(store_); }

 private:
  std::variant<T, E> store_;
};

}  // namespace moltext

#endif  // MOLTEXT_ERROR_HPP_
