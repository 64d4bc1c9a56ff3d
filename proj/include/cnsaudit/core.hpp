#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace cnsaudit {

/// Failure categories raised by the toolkit. Every throwing operation reports
/// exactly one of these through `Error::code()`.
enum class ErrorCode {
  InvalidArgument,
  NonSmoothPoint,
  CoverageFailure,
  EmptyRegion,
  BadMagic,
  VersionMismatch,
  ShapeMismatch,
  NonFiniteValue,
  ScaleTooSmall,
  ShiftUnsafe,
  DeltaTooLarge,
  BadWindow,
  NegativeDensity,
  IncompatibleScales,
  Blowup,
  DensityFloorBreach,
  UnknownFamily,
  ConfigError,
  IoError,
};

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::NonSmoothPoint: return "NonSmoothPoint";
    case ErrorCode::CoverageFailure: return "CoverageFailure";
    case ErrorCode::EmptyRegion: return "EmptyRegion";
    case ErrorCode::BadMagic: return "BadMagic";
    case ErrorCode::VersionMismatch: return "VersionMismatch";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::NonFiniteValue: return "NonFiniteValue";
    case ErrorCode::ScaleTooSmall: return "ScaleTooSmall";
    case ErrorCode::ShiftUnsafe: return "ShiftUnsafe";
    case ErrorCode::DeltaTooLarge: return "DeltaTooLarge";
    case ErrorCode::BadWindow: return "BadWindow";
    case ErrorCode::NegativeDensity: return "NegativeDensity";
    case ErrorCode::IncompatibleScales: return "IncompatibleScales";
    case ErrorCode::Blowup: return "Blowup";
    case ErrorCode::DensityFloorBreach: return "DensityFloorBreach";
    case ErrorCode::UnknownFamily: return "UnknownFamily";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Sentinel for an infinite Lebesgue exponent.
inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

inline bool is_infinite_exponent(double p) { return std::isinf(p); }

/// 1/p with the convention 1/inf = 0.
inline double reciprocal_exponent(double p) { return is_infinite_exponent(p) ? 0.0 : 1.0 / p; }

template <std::size_t Dim>
using Point = std::array<double, Dim>;

template <std::size_t Dim>
inline double dot(const Point<Dim>& a, const Point<Dim>& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < Dim; ++k) s += a[k] * b[k];
  return s;
}

template <std::size_t Dim>
inline double norm(const Point<Dim>& a) {
  return std::sqrt(dot(a, a));
}

template <std::size_t Dim>
inline Point<Dim> operator-(const Point<Dim>& a, const Point<Dim>& b) {
  Point<Dim> r{};
  for (std::size_t k = 0; k < Dim; ++k) r[k] = a[k] - b[k];
  return r;
}

template <std::size_t Dim>
inline Point<Dim> operator+(const Point<Dim>& a, const Point<Dim>& b) {
  Point<Dim> r{};
  for (std::size_t k = 0; k < Dim; ++k) r[k] = a[k] + b[k];
  return r;
}

template <std::size_t Dim>
inline Point<Dim> operator*(double s, const Point<Dim>& a) {
  Point<Dim> r{};
  for (std::size_t k = 0; k < Dim; ++k) r[k] = s * a[k];
  return r;
}

/// Pairwise (tree) summation; the result depends only on the input order.
inline double pairwise_sum(std::span<const double> xs) {
  constexpr std::size_t kBlock = 16;
  if (xs.size() <= kBlock) {
    double s = 0.0;
    for (double x : xs) s += x;
    return s;
  }
  const std::size_t half = xs.size() / 2;
  return pairwise_sum(xs.first(half)) + pairwise_sum(xs.subspan(half));
}

inline double pairwise_max(std::span<const double> xs) {
  double m = 0.0;
  for (double x : xs) m = x > m ? x : m;
  return m;
}

/// Least-squares slope of log(err) against log(scale). Entries with a
/// non-positive error are skipped; fewer than two usable points yield NaN.
inline double loglog_slope(std::span<const double> scales, std::span<const double> errors) {
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < scales.size() && i < errors.size(); ++i) {
    if (!(errors[i] > 0.0) || !(scales[i] > 0.0)) continue;
    const double x = std::log(scales[i]);
    const double y = std::log(errors[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++n;
  }
  if (n < 2) return std::numeric_limits<double>::quiet_NaN();
  const double dn = static_cast<double>(n);
  const double denom = dn * sxx - sx * sx;
  if (denom == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return (dn * sxy - sx * sy) / denom;
}

inline bool strictly_decreasing(std::span<const double> xs) {
  for (std::size_t i = 1; i < xs.size(); ++i)
    if (!(xs[i] < xs[i - 1])) return false;
  return true;
}

/// Quintic smoothstep 6s^5 - 15s^4 + 10s^3, clamped to [0, 1].
inline double quintic_step(double s) {
  if (s <= 0.0) return 0.0;
  if (s >= 1.0) return 1.0;
  return s * s * s * (10.0 + s * (-15.0 + 6.0 * s));
}

/// Cubic smoothstep 3s^2 - 2s^3, clamped to [0, 1].
inline double cubic_step(double s) {
  if (s <= 0.0) return 0.0;
  if (s >= 1.0) return 1.0;
  return s * s * (3.0 - 2.0 * s);
}

inline double cubic_step_derivative(double s) {
  if (s <= 0.0 || s >= 1.0) return 0.0;
  return 6.0 * s * (1.0 - s);
}

}  // namespace cnsaudit
