#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace secantlink {

using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;
using Point3 = Eigen::Vector3d;

template <typename T>
using Vec3T = Eigen::Matrix<T, 3, 1>;
template <typename T>
using Vec4T = Eigen::Matrix<T, 4, 1>;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Every failure the library reports. The CLI maps kinds onto exit codes.
enum class ErrorKind {
  DegeneratePoints,
  CollinearPoints,
  AtCenter,
  CurveHitsCenter,
  LiftFailure,
  CoincidentHits,
  InvalidCurve,
  CurvesTooClose,
  QuadratureNotConverged,
  NoGenericDirectionFound,
  PoleOnCurve,
  DegenerateChord,
  NonIsolatedFamily,
  FivePointSecant,
  SeedBudgetExceeded,
  BranchNotClosed,
  DegenerateSecant,
  OrientationInconsistent,
  NoRegularValue,
  TangentFrameDegenerate,
  UnsupportedPattern,
  CollinearAnchors,
  DegenerateFamily,
  SeparationTooSmall,
  InvalidInput,
  Io,
};

inline const char* to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::DegeneratePoints: return "DegeneratePoints";
    case ErrorKind::CollinearPoints: return "CollinearPoints";
    case ErrorKind::AtCenter: return "AtCenter";
    case ErrorKind::CurveHitsCenter: return "CurveHitsCenter";
    case ErrorKind::LiftFailure: return "LiftFailure";
    case ErrorKind::CoincidentHits: return "CoincidentHits";
    case ErrorKind::InvalidCurve: return "InvalidCurve";
    case ErrorKind::CurvesTooClose: return "CurvesTooClose";
    case ErrorKind::QuadratureNotConverged: return "QuadratureNotConverged";
    case ErrorKind::NoGenericDirectionFound: return "NoGenericDirectionFound";
    case ErrorKind::PoleOnCurve: return "PoleOnCurve";
    case ErrorKind::DegenerateChord: return "DegenerateChord";
    case ErrorKind::NonIsolatedFamily: return "NonIsolatedFamily";
    case ErrorKind::FivePointSecant: return "FivePointSecant";
    case ErrorKind::SeedBudgetExceeded: return "SeedBudgetExceeded";
    case ErrorKind::BranchNotClosed: return "BranchNotClosed";
    case ErrorKind::DegenerateSecant: return "DegenerateSecant";
    case ErrorKind::OrientationInconsistent: return "OrientationInconsistent";
    case ErrorKind::NoRegularValue: return "NoRegularValue";
    case ErrorKind::TangentFrameDegenerate: return "TangentFrameDegenerate";
    case ErrorKind::UnsupportedPattern: return "UnsupportedPattern";
    case ErrorKind::CollinearAnchors: return "CollinearAnchors";
    case ErrorKind::DegenerateFamily: return "DegenerateFamily";
    case ErrorKind::SeparationTooSmall: return "SeparationTooSmall";
    case ErrorKind::InvalidInput: return "InvalidInput";
    case ErrorKind::Io: return "Io";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

  /// Violations of the general-position hypotheses, as opposed to bad input
  /// or numerical budget failures.
  bool is_general_position_violation() const noexcept {
    switch (kind_) {
      case ErrorKind::NonIsolatedFamily:
      case ErrorKind::FivePointSecant:
      case ErrorKind::DegenerateSecant:
      case ErrorKind::TangentFrameDegenerate:
      case ErrorKind::DegenerateFamily:
      case ErrorKind::OrientationInconsistent:
        return true;
      default:
        return false;
    }
  }

 private:
  ErrorKind kind_;
};

/// Reduce a curve parameter into [0, 1).
inline double wrap01(double t) {
  double r = t - std::floor(t);
  return r >= 1.0 ? 0.0 : r;
}

/// Distance between two parameters on the unit circle R/Z.
inline double circle_distance(double a, double b) {
  double d = std::abs(wrap01(a) - wrap01(b));
  return std::min(d, 1.0 - d);
}

inline int sign_of(double x) { return x > 0 ? 1 : (x < 0 ? -1 : 0); }

/// Homogeneous coordinates are ordered (w, x, y, z); the affine chart is w = 1.
inline Vec4 to_homogeneous(const Point3& p) { return Vec4(1.0, p.x(), p.y(), p.z()); }
inline Vec4 to_homogeneous_direction(const Vec3& v) { return Vec4(0.0, v.x(), v.y(), v.z()); }

}  // namespace secantlink
