#pragma once

// Nonconformity scores for interval and region targets. Scores of units
// inside a target strictly dominate scores of units outside it; the margin is
// enforced by a dominance constant computed from the realized predictions.
// Test units are scored through a fixed branch (their response is unknown),
// which keeps the score independent of the unobserved label.

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>

#include <Eigen/Dense>

#include "confsel/core.hpp"

namespace confsel::score {

enum class TestBranch { inside, outside };

struct ScoreParams {
  double dominance = 0.0;            // the constant separating the two branches
  TestBranch test_branch = TestBranch::inside;
  bool drop_pred_term = false;       // keep only the indicator part of the score
};

// ===== dominance constants =====

// Largest |prediction - endpoint| gap over the finite endpoints of `iv`.
inline double max_boundary_gap(std::span<const double> preds, const core::Interval& iv) {
  if (preds.empty()) throw std::invalid_argument("dominance constant needs predictions");
  double s = 0.0;
  for (double p : preds) {
    if (!std::isfinite(p)) throw std::invalid_argument("predictions must be finite");
    if (iv.lower()) s = std::max(s, std::abs(p - *iv.lower()));
    if (iv.upper()) s = std::max(s, std::abs(p - *iv.upper()));
  }
  return s;
}

inline double compute_dominance(std::span<const double> preds, const core::Interval& iv) {
  return 2.0 * max_boundary_gap(preds, iv) + 1.0;
}

namespace detail {
// Boundary references scored for a region column: shells use both spheres,
// single balls only the outer one. Multi-ball unions must be decomposed into
// one column per ball before scoring.
inline void require_single_column(const core::RegionSpec& region) {
  if (std::holds_alternative<core::BallUnion>(region.shape()) && region.ball_count() > 1)
    throw std::invalid_argument("multi-ball unions are scored one ball per column; decompose first");
}

inline bool is_shell(const core::RegionSpec& region) {
  return std::holds_alternative<core::Shell>(region.shape());
}

inline core::BoundaryRef outer_ref(const core::RegionSpec& region) {
  if (std::holds_alternative<core::BallUnion>(region.shape())) return core::BoundaryRef::ball(0);
  return core::BoundaryRef::outer();
}
}  // namespace detail

inline double max_boundary_gap(const Eigen::MatrixXd& preds, const core::RegionSpec& region) {
  if (preds.rows() < 1) throw std::invalid_argument("dominance constant needs predictions");
  detail::require_single_column(region);
  double s = 0.0;
  for (Eigen::Index i = 0; i < preds.rows(); ++i) {
    const Eigen::VectorXd row = preds.row(i).transpose();
    if (detail::is_shell(region)) {
      s = std::max(s, core::boundary_distance(region, row, core::BoundaryRef::inner()));
      s = std::max(s, core::boundary_distance(region, row, core::BoundaryRef::outer()));
    } else {
      s = std::max(s, core::boundary_distance(region, row, detail::outer_ref(region)));
    }
  }
  return s;
}

inline double compute_dominance(const Eigen::MatrixXd& preds, const core::RegionSpec& region) {
  return 2.0 * max_boundary_gap(preds, region) + 1.0;
}

// ===== interval scores =====

// Bounded interval: inside units sit at dominance minus the signed interior
// margin; outside units at the signed exterior gap.
inline double conjunctive_score(double pred, const core::Interval& iv, bool y_inside,
                                const ScoreParams& params) {
  if (!iv.is_bounded()) throw std::invalid_argument("conjunctive score requires a bounded interval");
  const double lo = *iv.lower(), hi = *iv.upper();
  if (params.drop_pred_term) return y_inside ? params.dominance : 0.0;
  if (y_inside) return params.dominance - std::min(pred - lo, hi - pred);
  return std::max(lo - pred, pred - hi);
}

// One-sided interval: the prediction enters with the sign that makes deeper
// in-target predictions rank lower at test time.
inline double one_sided_score(double pred, const core::Interval& iv, bool y_inside,
                              const ScoreParams& params) {
  if (iv.is_bounded()) throw std::invalid_argument("one-sided score requires an unbounded interval");
  const double indicator = y_inside ? params.dominance : 0.0;
  if (params.drop_pred_term) return indicator;
  if (iv.upper()) return indicator + pred;  // (-inf, hi)
  return indicator - pred;                  // (lo, +inf)
}

inline double interval_score(double pred, const core::Interval& iv, bool y_inside,
                             const ScoreParams& params) {
  return iv.is_bounded() ? conjunctive_score(pred, iv, y_inside, params)
                         : one_sided_score(pred, iv, y_inside, params);
}

// Test-time score: the membership indicator is replaced by the configured
// branch. For one-sided intervals both branches coincide with evaluating the
// score at the finite endpoint, which lies outside the open interval.
inline double test_score(double pred, const core::Interval& iv, const ScoreParams& params) {
  if (!iv.is_bounded()) {
    if (params.drop_pred_term) return 0.0;
    return iv.upper() ? pred : -pred;
  }
  return conjunctive_score(pred, iv, params.test_branch == TestBranch::inside, params);
}

// ===== region scores =====

inline double region_score(const Eigen::VectorXd& pred, const core::RegionSpec& region,
                           bool y_inside, const ScoreParams& params) {
  detail::require_single_column(region);
  if (detail::is_shell(region)) {
    if (params.drop_pred_term) return y_inside ? params.dominance : 0.0;
    const double din = core::boundary_distance(region, pred, core::BoundaryRef::inner());
    const double dout = core::boundary_distance(region, pred, core::BoundaryRef::outer());
    if (y_inside) return params.dominance - std::min(din, dout);
    return -std::max(din, dout);
  }
  // Single ball: only an outer boundary exists. Deep in-ball predictions rank
  // low on the inside branch, near-boundary predictions rank low outside.
  if (params.drop_pred_term) return y_inside ? params.dominance : 0.0;
  const double dis = core::boundary_distance(region, pred, detail::outer_ref(region));
  return y_inside ? params.dominance - dis : dis;
}

inline double test_score(const Eigen::VectorXd& pred, const core::RegionSpec& region,
                         const ScoreParams& params) {
  return region_score(pred, region, params.test_branch == TestBranch::inside, params);
}

}  // namespace confsel::score

namespace confsel {
using score::compute_dominance;
using score::ScoreParams;
using score::TestBranch;
}  // namespace confsel
