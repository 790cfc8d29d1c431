#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace liecomp {

enum class ErrorKind {
  Syntax,
  UnknownFunction,
  UnboundName,
  Domain,          // evaluation outside an expression's domain
  Dimension,
  Validation,      // inconsistent algebra / group / action data
  OutsideDomain,   // a point not in M
  InvalidPath,
  Sampling,
  IllConditioned,
  LeavesOrbit,
  Singular,
  UnknownScenario,
  BadParameter,
  MalformedWitness,
  Config,
  Escape,          // an operation that requires a complete lift hit the boundary
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Syntax: return "syntax";
    case ErrorKind::UnknownFunction: return "unknown_function";
    case ErrorKind::UnboundName: return "unbound_name";
    case ErrorKind::Domain: return "domain";
    case ErrorKind::Dimension: return "dimension";
    case ErrorKind::Validation: return "validation";
    case ErrorKind::OutsideDomain: return "outside_domain";
    case ErrorKind::InvalidPath: return "invalid_path";
    case ErrorKind::Sampling: return "sampling";
    case ErrorKind::IllConditioned: return "ill_conditioned";
    case ErrorKind::LeavesOrbit: return "leaves_orbit";
    case ErrorKind::Singular: return "singular";
    case ErrorKind::UnknownScenario: return "unknown_scenario";
    case ErrorKind::BadParameter: return "bad_parameter";
    case ErrorKind::MalformedWitness: return "malformed_witness";
    case ErrorKind::Config: return "config";
    case ErrorKind::Escape: return "escape";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Raised by the expression parser; `position()` is a byte offset into the source.
class ParseError : public Error {
 public:
  ParseError(ErrorKind kind, std::size_t position, const std::string& what)
      : Error(kind, what + " at offset " + std::to_string(position)),
        position_(position) {}

  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

}  // namespace liecomp
