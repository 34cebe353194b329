#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace minlor {

enum class ErrorKind {
  syntax,
  unknown_identifier,
  out_of_domain,
  non_finite,
  degenerate_tangent,
  non_lorentzian,
  not_isothermal,
  normal_frame_degenerate,
  not_general_type,
  lightlike_second_form,
  near_superconformal,
  superconformal_locus,
  sign_domain,
  inconsistent_curvatures,
  insufficient_samples,
  empty_grid,
  grid_mismatch,
  blow_up,
  precondition,
  validation_failed,
  config,
  io,
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::syntax: return "syntax";
    case ErrorKind::unknown_identifier: return "unknown_identifier";
    case ErrorKind::out_of_domain: return "out_of_domain";
    case ErrorKind::non_finite: return "non_finite";
    case ErrorKind::degenerate_tangent: return "degenerate_tangent";
    case ErrorKind::non_lorentzian: return "non_lorentzian";
    case ErrorKind::not_isothermal: return "not_isothermal";
    case ErrorKind::normal_frame_degenerate: return "normal_frame_degenerate";
    case ErrorKind::not_general_type: return "not_general_type";
    case ErrorKind::lightlike_second_form: return "lightlike_second_form";
    case ErrorKind::near_superconformal: return "near_superconformal";
    case ErrorKind::superconformal_locus: return "superconformal_locus";
    case ErrorKind::sign_domain: return "sign_domain";
    case ErrorKind::inconsistent_curvatures: return "inconsistent_curvatures";
    case ErrorKind::insufficient_samples: return "insufficient_samples";
    case ErrorKind::empty_grid: return "empty_grid";
    case ErrorKind::grid_mismatch: return "grid_mismatch";
    case ErrorKind::blow_up: return "blow_up";
    case ErrorKind::precondition: return "precondition";
    case ErrorKind::validation_failed: return "validation_failed";
    case ErrorKind::config: return "config";
    case ErrorKind::io: return "io";
  }
  return "unknown";
}

/// Every failure raised by the library. `kind()` is the stable classifier;
/// the message is for humans.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Syntax errors carry the 0-based character offset into the source text.
class SyntaxError : public Error {
 public:
  SyntaxError(std::size_t position, const std::string& message)
      : Error(ErrorKind::syntax, message + " at position " + std::to_string(position)),
        position_(position) {}

  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

class UnknownIdentifierError : public Error {
 public:
  UnknownIdentifierError(std::size_t position, std::string identifier)
      : Error(ErrorKind::unknown_identifier,
              "unknown identifier '" + identifier + "' at position " + std::to_string(position)),
        position_(position),
        identifier_(std::move(identifier)) {}

  std::size_t position() const noexcept { return position_; }
  const std::string& identifier() const noexcept { return identifier_; }

 private:
  std::size_t position_;
  std::string identifier_;
};

}  // namespace minlor
