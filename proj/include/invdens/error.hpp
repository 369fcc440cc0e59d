#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace invdens {

enum class ErrorKind
{
  coefficient_evaluation,
  radius_inside_exempt_ball,
  no_analytic_density,
  parameter,
  domain,
  path_divergence,
  schedule_not_synchronous,
  dimension,
  precondition,
  consistency,
  fit,
  configuration
};

inline std::string_view to_string(ErrorKind kind)
{
  switch (kind) {
    case ErrorKind::coefficient_evaluation: return "coefficient evaluation failure";
    case ErrorKind::radius_inside_exempt_ball: return "radius inside exempt ball";
    case ErrorKind::no_analytic_density: return "no analytic invariant density";
    case ErrorKind::parameter: return "parameter error";
    case ErrorKind::domain: return "domain error";
    case ErrorKind::path_divergence: return "path divergence";
    case ErrorKind::schedule_not_synchronous: return "schedule not synchronous";
    case ErrorKind::dimension: return "dimension error";
    case ErrorKind::precondition: return "precondition error";
    case ErrorKind::consistency: return "consistency error";
    case ErrorKind::fit: return "fit error";
    case ErrorKind::configuration: return "configuration error";
  }
  return "error";
}

//! Every failure raised by the library carries a machine-checkable kind.
class Error : public std::runtime_error
{
public:
  Error(ErrorKind kind, const std::string& detail)
    : std::runtime_error(std::string(to_string(kind)) + ": " + detail)
    , kind_(kind)
  {}

  ErrorKind kind() const noexcept { return kind_; }

private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& detail)
{
  throw Error(kind, detail);
}

} // namespace invdens
