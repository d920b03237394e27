#pragma once

// Common scalar types and the error taxonomy shared by the whole library.
//
// Every failure that callers are expected to handle is thrown as a subclass
// of wpi::Error. The `kind` tag groups errors into the two coarse classes
// the command line tool maps to exit codes: configuration problems versus
// numerical guard trips.

#include <complex>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace wpi {

using cplx = std::complex<double>;

inline constexpr double pi = 3.14159265358979323846;

// i with the sign convention used throughout: exp(i S) phases.
inline constexpr cplx iu{0.0, 1.0};

enum class ErrorKind {
  invalid_parameter,
  non_finite,
  degenerate_interval,
  undersampled_kernel,
  boundary_leak,
  grid_too_coarse,
  linear_solve_failure,
  ansatz_breakdown,
  index_out_of_range,
  not_identical_particles,
  resource_limit,
  config_error,
};

struct Error : std::runtime_error {
  ErrorKind kind;
  Error(ErrorKind k, const std::string& msg) : std::runtime_error(msg), kind(k) {}
};

#define WPI_DEFINE_ERROR(Name, Kind)                                        \
  struct Name : Error {                                                     \
    explicit Name(const std::string& msg) : Error(ErrorKind::Kind, msg) {}  \
  }

WPI_DEFINE_ERROR(InvalidParameter, invalid_parameter);
WPI_DEFINE_ERROR(NonFinite, non_finite);
WPI_DEFINE_ERROR(DegenerateInterval, degenerate_interval);
WPI_DEFINE_ERROR(UndersampledKernel, undersampled_kernel);
WPI_DEFINE_ERROR(BoundaryLeak, boundary_leak);
WPI_DEFINE_ERROR(GridTooCoarse, grid_too_coarse);
WPI_DEFINE_ERROR(LinearSolveFailure, linear_solve_failure);
WPI_DEFINE_ERROR(AnsatzBreakdown, ansatz_breakdown);
WPI_DEFINE_ERROR(IndexOutOfRange, index_out_of_range);
WPI_DEFINE_ERROR(NotIdenticalParticles, not_identical_particles);
WPI_DEFINE_ERROR(ResourceLimit, resource_limit);
WPI_DEFINE_ERROR(ConfigError, config_error);

#undef WPI_DEFINE_ERROR

// True for configuration-side mistakes (exit code 2 in the CLI); the rest
// are numerical guard failures (exit code 3).
inline bool is_config_error(const Error& e) {
  return e.kind == ErrorKind::config_error || e.kind == ErrorKind::invalid_parameter;
}

inline const char* error_kind_name(ErrorKind k) {
  switch (k) {
    case ErrorKind::invalid_parameter: return "invalid_parameter";
    case ErrorKind::non_finite: return "non_finite";
    case ErrorKind::degenerate_interval: return "degenerate_interval";
    case ErrorKind::undersampled_kernel: return "undersampled_kernel";
    case ErrorKind::boundary_leak: return "boundary_leak";
    case ErrorKind::grid_too_coarse: return "grid_too_coarse";
    case ErrorKind::linear_solve_failure: return "linear_solve_failure";
    case ErrorKind::ansatz_breakdown: return "ansatz_breakdown";
    case ErrorKind::index_out_of_range: return "index_out_of_range";
    case ErrorKind::not_identical_particles: return "not_identical_particles";
    case ErrorKind::resource_limit: return "resource_limit";
    case ErrorKind::config_error: return "config_error";
  }
  return "unknown";
}

inline double sq(double x) { return x * x; }

inline void require_finite(double v, const char* what) {
  if (!std::isfinite(v)) throw NonFinite(std::string(what) + " is not finite");
}

inline void require_finite(const cplx& v, const char* what) {
  if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
    throw NonFinite(std::string(what) + " is not finite");
}

// Japanese bracket <x> = sqrt(1 + |x|^2).
inline double jbracket(double r2) { return std::sqrt(1.0 + r2); }

}  // namespace wpi
