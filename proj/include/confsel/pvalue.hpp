#pragma once

// Randomized conformal p-values. A test unit's score is ranked against the
// calibration scores; ties are broken by a uniform draw from a keyed,
// counter-based stream so results never depend on worker count or evaluation
// order. The same arithmetic serves the oracle diagnostic, which ranks the
// true test score.

#include <algorithm>
#include <cstdint>
#include <cstring>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "confsel/core.hpp"
#include "confsel/rng.hpp"
#include "confsel/score.hpp"

namespace confsel::pvalue {

// ===== tie-break stream =====

// One uniform per (j, k), derived from (master seed, replication, lane, j, k).
// Lanes separate independent consumers (the main pipeline, baseline branches).
class TieBreakStream {
 public:
  TieBreakStream(std::uint64_t master_seed, std::uint64_t replication, std::uint64_t lane)
      : seed_(master_seed), replication_(replication), lane_(lane) {}

  // Test hook: every draw returns the same value.
  static TieBreakStream fixed(double u) {
    if (!(u >= 0.0 && u < 1.0)) throw std::invalid_argument("u must lie in [0, 1)");
    TieBreakStream s(0, 0, 0);
    s.fixed_value_ = u;
    return s;
  }

  double uniform(std::uint64_t j, std::uint64_t k) const {
    if (fixed_value_ >= 0.0) return fixed_value_;
    return rng::to_unit(rng::derive(seed_, {replication_, lane_, j, k}));
  }

 private:
  std::uint64_t seed_ = 0, replication_ = 0, lane_ = 0;
  double fixed_value_ = -1.0;
};

// ===== scalar p-values =====

inline double conformal_pvalue(std::span<const double> cal_scores, double test_score, double u) {
  if (!(u >= 0.0 && u < 1.0)) throw std::invalid_argument("u must lie in [0, 1)");
  std::size_t below = 0, ties = 0;
  for (double v : cal_scores) {
    if (v < test_score)
      ++below;
    else if (v == test_score)
      ++ties;
  }
  return (static_cast<double>(below) + u * (1.0 + static_cast<double>(ties))) /
         static_cast<double>(cal_scores.size() + 1);
}

// Diagnostic variant: identical arithmetic applied to the true test score.
inline double oracle_pvalue(std::span<const double> cal_scores, double true_test_score, double u) {
  return conformal_pvalue(cal_scores, true_test_score, u);
}

// ===== p-value matrices =====

struct PvalueOptions {
  bool exclude_outside_cal = false;  // drop out-of-target calibration rows per column
  bool shared_u = false;             // one tie-break draw per test unit, shared across columns
};

struct PValueMatrix {
  Eigen::MatrixXd values;            // m x K, entries in (0, 1]
  Eigen::MatrixXd u_draws;           // the tie-break uniforms actually used
  std::vector<score::ScoreParams> params;
  std::uint64_t calibration_digest = 0;

  Eigen::Index tests() const { return values.rows(); }
  Eigen::Index columns() const { return values.cols(); }
};

namespace detail {

inline std::uint64_t fnv1a(std::uint64_t h, const double* data, std::size_t count) {
  const auto* bytes = reinterpret_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < count * sizeof(double); ++i) {
    h ^= bytes[i];
    h *= 1099511628211ULL;
  }
  return h;
}

constexpr std::uint64_t kFnvOffset = 14695981039346656037ULL;

// Rank `test` within sorted calibration scores and finish Eq.-style p-value.
inline double ranked_pvalue(const std::vector<double>& sorted_cal, double test, double u) {
  const auto lo = std::lower_bound(sorted_cal.begin(), sorted_cal.end(), test);
  const auto hi = std::upper_bound(lo, sorted_cal.end(), test);
  const double below = static_cast<double>(lo - sorted_cal.begin());
  const double ties = static_cast<double>(hi - lo);
  const double p = (below + u * (1.0 + ties)) / static_cast<double>(sorted_cal.size() + 1);
  // Keep the matrix inside (0, 1]: a u = 0 draw with empty rank floors at the
  // smallest positive value instead of 0.
  return p > 0.0 ? p : std::numeric_limits<double>::min();
}

}  // namespace detail

// Univariate targets: one column per interval.
inline PValueMatrix pvalue_matrix(const Eigen::VectorXd& cal_y, const Eigen::VectorXd& cal_preds,
                                  const Eigen::VectorXd& test_preds, const core::TargetSpec& target,
                                  std::span<const score::ScoreParams> params,
                                  const TieBreakStream& ties, const PvalueOptions& options = {}) {
  if (cal_y.size() != cal_preds.size())
    throw std::invalid_argument("calibration responses and predictions must align");
  if (test_preds.size() < 1) throw std::invalid_argument("no test predictions");
  if (params.size() != target.size())
    throw std::invalid_argument("one ScoreParams per target interval required");

  const Eigen::Index m = test_preds.size();
  const auto K = static_cast<Eigen::Index>(target.size());
  PValueMatrix out;
  out.values.resize(m, K);
  out.u_draws.resize(m, K);
  out.params.assign(params.begin(), params.end());
  std::uint64_t digest = detail::kFnvOffset;

  std::vector<double> cal_scores;
  for (Eigen::Index k = 0; k < K; ++k) {
    const auto& iv = target.intervals()[k];
    const auto& sp = params[k];
    cal_scores.clear();
    for (Eigen::Index i = 0; i < cal_y.size(); ++i) {
      const bool inside = iv.contains(cal_y(i));
      if (options.exclude_outside_cal && !inside) continue;
      cal_scores.push_back(score::interval_score(cal_preds(i), iv, inside, sp));
    }
    std::sort(cal_scores.begin(), cal_scores.end());
    digest = detail::fnv1a(digest, cal_scores.data(), cal_scores.size());
    for (Eigen::Index j = 0; j < m; ++j) {
      const double u = ties.uniform(static_cast<std::uint64_t>(j),
                                    options.shared_u ? 0 : static_cast<std::uint64_t>(k));
      out.u_draws(j, k) = u;
      out.values(j, k) = detail::ranked_pvalue(cal_scores, score::test_score(test_preds(j), iv, sp), u);
    }
  }
  out.calibration_digest = digest;
  return out;
}

// Region targets: one column per region (multi-ball unions are decomposed by
// the caller into single-ball columns).
inline PValueMatrix pvalue_matrix(const Eigen::MatrixXd& cal_y, const Eigen::MatrixXd& cal_preds,
                                  const Eigen::MatrixXd& test_preds,
                                  std::span<const core::RegionSpec> regions,
                                  std::span<const score::ScoreParams> params,
                                  const TieBreakStream& ties, const PvalueOptions& options = {}) {
  if (cal_y.rows() != cal_preds.rows())
    throw std::invalid_argument("calibration responses and predictions must align");
  if (test_preds.rows() < 1) throw std::invalid_argument("no test predictions");
  if (regions.empty()) throw std::invalid_argument("at least one region required");
  if (params.size() != regions.size())
    throw std::invalid_argument("one ScoreParams per region required");
  for (const auto& r : regions)
    if (r.dimension() != cal_y.cols())
      throw std::invalid_argument("region dimension does not match response dimension");
  if (cal_preds.cols() != cal_y.cols() || test_preds.cols() != cal_y.cols())
    throw std::invalid_argument("prediction dimension does not match response dimension");

  const Eigen::Index m = test_preds.rows();
  const auto K = static_cast<Eigen::Index>(regions.size());
  PValueMatrix out;
  out.values.resize(m, K);
  out.u_draws.resize(m, K);
  out.params.assign(params.begin(), params.end());
  std::uint64_t digest = detail::kFnvOffset;

  std::vector<double> cal_scores;
  for (Eigen::Index k = 0; k < K; ++k) {
    const auto& region = regions[k];
    const auto& sp = params[k];
    cal_scores.clear();
    for (Eigen::Index i = 0; i < cal_y.rows(); ++i) {
      const Eigen::VectorXd y_row = cal_y.row(i).transpose();
      const bool inside = core::region_contains(region, y_row);
      if (options.exclude_outside_cal && !inside) continue;
      const Eigen::VectorXd pred_row = cal_preds.row(i).transpose();
      cal_scores.push_back(score::region_score(pred_row, region, inside, sp));
    }
    std::sort(cal_scores.begin(), cal_scores.end());
    digest = detail::fnv1a(digest, cal_scores.data(), cal_scores.size());
    for (Eigen::Index j = 0; j < m; ++j) {
      const double u = ties.uniform(static_cast<std::uint64_t>(j),
                                    options.shared_u ? 0 : static_cast<std::uint64_t>(k));
      out.u_draws(j, k) = u;
      const Eigen::VectorXd pred_row = test_preds.row(j).transpose();
      out.values(j, k) = detail::ranked_pvalue(cal_scores, score::test_score(pred_row, region, sp), u);
    }
  }
  out.calibration_digest = digest;
  return out;
}

}  // namespace confsel::pvalue

namespace confsel {
using pvalue::conformal_pvalue;
using pvalue::oracle_pvalue;
using pvalue::PValueMatrix;
using pvalue::PvalueOptions;
using pvalue::TieBreakStream;
}  // namespace confsel
