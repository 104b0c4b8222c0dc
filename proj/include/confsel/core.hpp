#pragma once

// Core value types: open intervals with explicit unbounded ends, interval
// unions (targets), geometric response regions, and validated data containers.

#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <stdexcept>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Dense>

namespace confsel::core {

// ===== intervals and targets =====

// Open interval with at most one infinite end. Unboundedness is an explicit
// tag (empty optional), never a sentinel float.
class Interval {
 public:
  static Interval bounded(double lo, double hi) {
    require_finite(lo);
    require_finite(hi);
    if (!(lo < hi)) throw std::invalid_argument("interval requires lower < upper");
    return Interval(lo, hi);
  }

  // (-inf, hi)
  static Interval less_than(double hi) {
    require_finite(hi);
    return Interval(std::nullopt, hi);
  }

  // (lo, +inf)
  static Interval greater_than(double lo) {
    require_finite(lo);
    return Interval(lo, std::nullopt);
  }

  const std::optional<double>& lower() const { return lower_; }
  const std::optional<double>& upper() const { return upper_; }
  bool is_bounded() const { return lower_ && upper_; }

  bool contains(double y) const {
    if (lower_ && !(y > *lower_)) return false;
    if (upper_ && !(y < *upper_)) return false;
    return true;
  }

  double width() const {
    if (!is_bounded()) return std::numeric_limits<double>::infinity();
    return *upper_ - *lower_;
  }

 private:
  Interval(std::optional<double> lo, std::optional<double> hi)
      : lower_(lo), upper_(hi) {}

  static void require_finite(double v) {
    if (!std::isfinite(v)) throw std::invalid_argument("interval endpoint must be finite");
  }

  std::optional<double> lower_;
  std::optional<double> upper_;
};

// Ordered union of K >= 1 intervals; intervals may intersect.
class TargetSpec {
 public:
  explicit TargetSpec(std::vector<Interval> intervals) : intervals_(std::move(intervals)) {
    if (intervals_.empty()) throw std::invalid_argument("target requires at least one interval");
  }

  const std::vector<Interval>& intervals() const { return intervals_; }
  std::size_t size() const { return intervals_.size(); }

 private:
  std::vector<Interval> intervals_;
};

inline bool target_contains(const TargetSpec& target, double y) {
  for (const auto& iv : target.intervals())
    if (iv.contains(y)) return true;
  return false;
}

// ===== response regions =====

struct Shell {
  Eigen::VectorXd center;
  double r_inner = 0.0;
  double r_outer = 0.0;
};

struct BallUnion {
  std::vector<Eigen::VectorXd> centers;
  std::vector<double> radii;
};

struct CentroidBall {
  Eigen::VectorXd center;
  double radius = 0.0;
};

class RegionSpec {
 public:
  using Shape = std::variant<Shell, BallUnion, CentroidBall>;

  static RegionSpec shell(Eigen::VectorXd center, double r_inner, double r_outer) {
    if (center.size() < 1) throw std::invalid_argument("shell center must be nonempty");
    if (!(r_inner > 0.0 && r_outer > r_inner))
      throw std::invalid_argument("shell requires 0 < r_inner < r_outer");
    return RegionSpec(Shell{std::move(center), r_inner, r_outer});
  }

  static RegionSpec ball_union(std::vector<Eigen::VectorXd> centers, std::vector<double> radii) {
    if (centers.empty() || centers.size() != radii.size())
      throw std::invalid_argument("ball union requires matched, nonempty centers and radii");
    const auto d = centers.front().size();
    if (d < 1) throw std::invalid_argument("ball centers must be nonempty");
    for (const auto& c : centers)
      if (c.size() != d) throw std::invalid_argument("ball centers must share one dimension");
    for (double r : radii)
      if (!(r > 0.0)) throw std::invalid_argument("ball radii must be positive");
    return RegionSpec(BallUnion{std::move(centers), std::move(radii)});
  }

  static RegionSpec centroid_ball(Eigen::VectorXd center, double radius) {
    if (center.size() < 1) throw std::invalid_argument("ball center must be nonempty");
    if (!(radius > 0.0)) throw std::invalid_argument("ball radius must be positive");
    return RegionSpec(CentroidBall{std::move(center), radius});
  }

  const Shape& shape() const { return shape_; }

  Eigen::Index dimension() const {
    return std::visit(
        [](const auto& s) -> Eigen::Index {
          using T = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<T, BallUnion>)
            return s.centers.front().size();
          else
            return s.center.size();
        },
        shape_);
  }

  std::size_t ball_count() const {
    if (const auto* bu = std::get_if<BallUnion>(&shape_)) return bu->centers.size();
    return 1;
  }

 private:
  explicit RegionSpec(Shape shape) : shape_(std::move(shape)) {}
  Shape shape_;
};

inline void require_dimension(const RegionSpec& region, const Eigen::VectorXd& y) {
  if (y.size() != region.dimension())
    throw std::invalid_argument("point dimension does not match region dimension");
}

// Open-set membership for every region kind.
inline bool region_contains(const RegionSpec& region, const Eigen::VectorXd& y) {
  require_dimension(region, y);
  return std::visit(
      [&](const auto& s) -> bool {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Shell>) {
          const double r = (y - s.center).norm();
          return r > s.r_inner && r < s.r_outer;
        } else if constexpr (std::is_same_v<T, BallUnion>) {
          for (std::size_t k = 0; k < s.centers.size(); ++k)
            if ((y - s.centers[k]).norm() < s.radii[k]) return true;
          return false;
        } else {
          return (y - s.center).norm() < s.radius;
        }
      },
      region.shape());
}

// ===== boundary references and distances =====

struct BoundaryRef {
  enum class Kind { inner, outer, ball };
  Kind kind = Kind::outer;
  std::size_t ball_index = 0;

  static BoundaryRef inner() { return {Kind::inner, 0}; }
  static BoundaryRef outer() { return {Kind::outer, 0}; }
  static BoundaryRef ball(std::size_t k) { return {Kind::ball, k}; }
};

// Euclidean distance from a point to the referenced boundary sphere.
inline double boundary_distance(const RegionSpec& region, const Eigen::VectorXd& point,
                                const BoundaryRef& which) {
  require_dimension(region, point);
  return std::visit(
      [&](const auto& s) -> double {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Shell>) {
          const double r = (point - s.center).norm();
          if (which.kind == BoundaryRef::Kind::inner) return std::abs(r - s.r_inner);
          if (which.kind == BoundaryRef::Kind::outer) return std::abs(r - s.r_outer);
          throw std::invalid_argument("shell boundaries are inner or outer");
        } else if constexpr (std::is_same_v<T, BallUnion>) {
          if (which.kind != BoundaryRef::Kind::ball)
            throw std::invalid_argument("ball-union boundaries are addressed by ball index");
          if (which.ball_index >= s.centers.size())
            throw std::invalid_argument("ball index out of range");
          const double r = (point - s.centers[which.ball_index]).norm();
          return std::abs(r - s.radii[which.ball_index]);
        } else {
          if (which.kind != BoundaryRef::Kind::outer)
            throw std::invalid_argument("a ball has only an outer boundary");
          return std::abs((point - s.center).norm() - s.radius);
        }
      },
      region.shape());
}

// ===== data containers =====

namespace detail {
inline void require_all_finite(const Eigen::MatrixXd& m, const char* what) {
  if (!m.allFinite()) throw std::invalid_argument(std::string(what) + " must be finite");
}
}  // namespace detail

// Immutable (features, responses) table. Zero rows are allowed so that an
// empty calibration set remains representable.
class LabeledSet {
 public:
  LabeledSet(Eigen::MatrixXd features, Eigen::MatrixXd responses)
      : features_(std::move(features)), responses_(std::move(responses)) {
    if (features_.rows() != responses_.rows())
      throw std::invalid_argument("features and responses must have equal row counts");
    if (features_.cols() < 1) throw std::invalid_argument("feature dimension must be >= 1");
    if (responses_.cols() < 1) throw std::invalid_argument("response dimension must be >= 1");
    detail::require_all_finite(features_, "features");
    detail::require_all_finite(responses_, "responses");
  }

  const Eigen::MatrixXd& features() const { return features_; }
  const Eigen::MatrixXd& responses() const { return responses_; }
  Eigen::Index rows() const { return features_.rows(); }
  Eigen::Index feature_dim() const { return features_.cols(); }
  Eigen::Index response_dim() const { return responses_.cols(); }

  // Univariate convenience view.
  Eigen::VectorXd response_vector() const {
    if (response_dim() != 1) throw std::invalid_argument("response is not univariate");
    return responses_.col(0);
  }

 private:
  Eigen::MatrixXd features_;
  Eigen::MatrixXd responses_;
};

class FeatureSet {
 public:
  explicit FeatureSet(Eigen::MatrixXd features) : features_(std::move(features)) {
    if (features_.rows() < 1) throw std::invalid_argument("feature set must be nonempty");
    if (features_.cols() < 1) throw std::invalid_argument("feature dimension must be >= 1");
    detail::require_all_finite(features_, "features");
  }

  const Eigen::MatrixXd& features() const { return features_; }
  Eigen::Index rows() const { return features_.rows(); }
  Eigen::Index feature_dim() const { return features_.cols(); }

 private:
  Eigen::MatrixXd features_;
};

}  // namespace confsel::core

namespace confsel {
using core::BallUnion;
using core::boundary_distance;
using core::BoundaryRef;
using core::CentroidBall;
using core::FeatureSet;
using core::Interval;
using core::LabeledSet;
using core::region_contains;
using core::RegionSpec;
using core::Shell;
using core::target_contains;
using core::TargetSpec;
}  // namespace confsel
