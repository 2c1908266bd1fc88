#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace agghb {

/// Raised when an iterate or momentum buffer stops being finite. Carries the
/// last point that was still finite and the iteration it belongs to.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(const std::string& what, std::vector<double> last_finite_x,
                  std::size_t last_finite_k)
      : std::runtime_error(what),
        last_finite_x_(std::move(last_finite_x)),
        last_finite_k_(last_finite_k) {}

  const std::vector<double>& last_finite_x() const { return last_finite_x_; }
  std::size_t last_finite_k() const { return last_finite_k_; }

 private:
  std::vector<double> last_finite_x_;
  std::size_t last_finite_k_;
};

/// Malformed input text. `line` is 1-based; 0 means "no specific line".
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& message, std::size_t line, std::string token = {})
      : std::runtime_error(format(message, line, token)),
        line_(line),
        token_(std::move(token)) {}

  std::size_t line() const { return line_; }
  const std::string& token() const { return token_; }

 private:
  static std::string format(const std::string& message, std::size_t line,
                            const std::string& token) {
    std::string out = line > 0 ? "line " + std::to_string(line) + ": " : "";
    out += message;
    if (!token.empty()) out += " (token \"" + token + "\")";
    return out;
  }

  std::size_t line_;
  std::string token_;
};

/// Bound verification was asked for on a trace whose stepsize did not come
/// from a theoretical rule, so no guarantee applies.
class VerificationRefused : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace agghb
