#pragma once

// Baseline selection procedures: combinations of single-condition conformal
// BH runs (intersection, union, and their Bonferroni-split variants) and the
// indicator-transform approach that regresses a sign-coded response.

#include <algorithm>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "confsel/core.hpp"
#include "confsel/predictor.hpp"
#include "confsel/pvalue.hpp"
#include "confsel/select.hpp"

namespace confsel::baselines {

enum class Side { greater, less };

// Tie-break lanes; branch lanes are shared between a baseline and its
// Bonferroni variant so Int-B at q equals Int at q/2 exactly.
namespace lanes {
constexpr std::uint64_t mccs = 0;
constexpr std::uint64_t branch_c1 = 1;  // the branch thresholded at c1
constexpr std::uint64_t branch_c2 = 2;  // the branch thresholded at c2
constexpr std::uint64_t ind = 3;
constexpr std::uint64_t region_base = 16;  // + ball index, for per-ball selections
}  // namespace lanes

// One-condition conformal BH selection: claims y > c (or y < c) per unit.
inline std::vector<std::size_t> cfbh_single(const Eigen::VectorXd& cal_y,
                                            const Eigen::VectorXd& cal_preds,
                                            const Eigen::VectorXd& test_preds, Side side, double c,
                                            double q, const pvalue::TieBreakStream& ties,
                                            const select::PipelineOptions& options = {}) {
  const core::TargetSpec target({side == Side::greater ? core::Interval::greater_than(c)
                                                       : core::Interval::less_than(c)});
  return select::mccs_from_predictions(cal_y, cal_preds, test_preds, target, q, ties, options)
      .samples;
}

inline std::vector<std::size_t> combine_int(const std::vector<std::size_t>& a,
                                            const std::vector<std::size_t>& b) {
  std::vector<std::size_t> out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

inline std::vector<std::size_t> combine_uni(const std::vector<std::size_t>& a,
                                            const std::vector<std::size_t>& b) {
  std::vector<std::size_t> out;
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

enum class BaselineKind { intersection, union_, intersection_bonf, union_bonf };

// Two-threshold baselines over a pair c1 < c2.
//   intersection: claim y in (c1, c2)   via {y > c1} ∩ {y < c2}
//   union:        claim y outside [c1, c2] via {y < c1} ∪ {y > c2}
// Bonferroni variants run each branch at q/2.
inline std::vector<std::size_t> run_baseline(BaselineKind kind, const Eigen::VectorXd& cal_y,
                                             const Eigen::VectorXd& cal_preds,
                                             const Eigen::VectorXd& test_preds, double c1, double c2,
                                             double q, const pvalue::TieBreakStream& ties_c1,
                                             const pvalue::TieBreakStream& ties_c2,
                                             const select::PipelineOptions& options = {}) {
  if (!(c1 < c2)) throw std::invalid_argument("baseline thresholds require c1 < c2");
  const bool bonf = kind == BaselineKind::intersection_bonf || kind == BaselineKind::union_bonf;
  const double level = bonf ? q / 2.0 : q;
  if (kind == BaselineKind::intersection || kind == BaselineKind::intersection_bonf) {
    const auto s1 = cfbh_single(cal_y, cal_preds, test_preds, Side::greater, c1, level, ties_c1, options);
    const auto s2 = cfbh_single(cal_y, cal_preds, test_preds, Side::less, c2, level, ties_c2, options);
    return combine_int(s1, s2);
  }
  const auto s1 = cfbh_single(cal_y, cal_preds, test_preds, Side::less, c1, level, ties_c1, options);
  const auto s2 = cfbh_single(cal_y, cal_preds, test_preds, Side::greater, c2, level, ties_c2, options);
  return combine_uni(s1, s2);
}

// ===== indicator transform =====

// Signed polynomial whose sign encodes membership: positive strictly inside
// the target, negative strictly outside, zero only on interval endpoints.
// Requires pairwise disjoint intervals (overlapping unions have no such
// polynomial).
inline double indicator_transform(double t, const core::TargetSpec& target) {
  struct Piece {
    bool lo_unbounded;
    double lo;
    bool hi_unbounded;
    double hi;
  };
  std::vector<Piece> pieces;
  pieces.reserve(target.size());
  for (const auto& iv : target.intervals())
    pieces.push_back({!iv.lower().has_value(), iv.lower().value_or(0.0),
                      !iv.upper().has_value(), iv.upper().value_or(0.0)});
  std::sort(pieces.begin(), pieces.end(), [](const Piece& a, const Piece& b) {
    if (a.lo_unbounded != b.lo_unbounded) return a.lo_unbounded;
    return a.lo < b.lo;
  });

  std::vector<double> endpoints;
  bool right_unbounded = false;
  for (std::size_t i = 0; i < pieces.size(); ++i) {
    const auto& pc = pieces[i];
    if (pc.lo_unbounded && i != 0)
      throw std::invalid_argument("target is not transformable: overlapping intervals");
    if (pc.hi_unbounded) {
      if (i + 1 != pieces.size())
        throw std::invalid_argument("target is not transformable: overlapping intervals");
      right_unbounded = true;
    }
    if (!pc.lo_unbounded) endpoints.push_back(pc.lo);
    if (!pc.hi_unbounded) endpoints.push_back(pc.hi);
  }
  for (std::size_t i = 1; i < endpoints.size(); ++i)
    if (!(endpoints[i - 1] < endpoints[i]))
      throw std::invalid_argument("target is not transformable: overlapping intervals");

  double f = right_unbounded ? 1.0 : -1.0;
  for (double e : endpoints) f *= (t - e);
  return f;
}

// Ball-union form: positive inside the union for non-overlapping balls.
inline double indicator_transform(const Eigen::VectorXd& u, const core::RegionSpec& region) {
  std::vector<Eigen::VectorXd> centers;
  std::vector<double> radii;
  if (const auto* bu = std::get_if<core::BallUnion>(&region.shape())) {
    centers = bu->centers;
    radii = bu->radii;
  } else if (const auto* cb = std::get_if<core::CentroidBall>(&region.shape())) {
    centers = {cb->center};
    radii = {cb->radius};
  } else {
    throw std::invalid_argument("indicator transform supports ball-shaped regions only");
  }
  double f = -1.0;
  for (std::size_t i = 0; i < centers.size(); ++i)
    f *= (u - centers[i]).squaredNorm() - radii[i] * radii[i];
  return f;
}

namespace detail {
template <typename TransformFn>
std::vector<std::size_t> run_ind_impl(const core::LabeledSet& train, const core::LabeledSet& cal,
                                      const core::FeatureSet& test, double q,
                                      const predictor::PredictorSpec& spec,
                                      const pvalue::TieBreakStream& ties,
                                      const select::PipelineOptions& options, TransformFn&& f) {
  Eigen::VectorXd z_train(train.rows()), z_cal(cal.rows());
  for (Eigen::Index i = 0; i < train.rows(); ++i) z_train(i) = f(train.responses().row(i));
  for (Eigen::Index i = 0; i < cal.rows(); ++i) z_cal(i) = f(cal.responses().row(i));

  const auto model = predictor::FittedModel::fit(spec, train.features(), z_train);
  return cfbh_single(z_cal, model.predict_scalar(cal.features()),
                     model.predict_scalar(test.features()), Side::greater, 0.0, q, ties, options);
}
}  // namespace detail

// Indicator-transform baseline: refit the same predictor family on the signed
// transform and select units whose transformed response exceeds zero.
inline std::vector<std::size_t> run_ind(const core::LabeledSet& train, const core::LabeledSet& cal,
                                        const core::FeatureSet& test, const core::TargetSpec& target,
                                        double q, const predictor::PredictorSpec& spec,
                                        const pvalue::TieBreakStream& ties,
                                        const select::PipelineOptions& options = {}) {
  if (train.response_dim() != 1 || cal.response_dim() != 1)
    throw std::invalid_argument("interval targets require univariate responses");
  return detail::run_ind_impl(train, cal, test, q, spec, ties, options,
                              [&](const auto& row) { return indicator_transform(row(0), target); });
}

inline std::vector<std::size_t> run_ind(const core::LabeledSet& train, const core::LabeledSet& cal,
                                        const core::FeatureSet& test, const core::RegionSpec& region,
                                        double q, const predictor::PredictorSpec& spec,
                                        const pvalue::TieBreakStream& ties,
                                        const select::PipelineOptions& options = {}) {
  if (train.response_dim() != region.dimension())
    throw std::invalid_argument("region dimension does not match response dimension");
  return detail::run_ind_impl(train, cal, test, q, spec, ties, options, [&](const auto& row) {
    const Eigen::VectorXd y = row.transpose();
    return indicator_transform(y, region);
  });
}

}  // namespace confsel::baselines

namespace confsel {
using baselines::BaselineKind;
using baselines::cfbh_single;
using baselines::combine_int;
using baselines::combine_uni;
using baselines::indicator_transform;
using baselines::run_baseline;
using baselines::run_ind;
using baselines::Side;
}  // namespace confsel
