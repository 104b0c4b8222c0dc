#pragma once

// Synthetic data generators and target builders for the Monte Carlo harness.
// Generators are pure functions of their spec (seed included), so replications
// can be produced in any order or on any worker with identical results.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "confsel/core.hpp"
#include "confsel/rng.hpp"

namespace confsel::simgen {

// ===== univariate settings =====

// Settings 1-3 use Gaussian noise, 4-6 Laplace noise at the same scale:
//   1, 4: sum_j beta_j x_j with beta drawn fresh per dataset
//   2, 5: exp(x1) + sin(pi x2)
//   3, 6: exp(x1) + sin(pi x2) + exp(x3) + sin(pi x4) + exp(x5) + sin(pi x6)
// Features are uniform on (-10, 10)^p.
struct SettingSpec {
  int setting = 1;
  int p = 10;
  double noise_level = 0.5;
  std::uint64_t seed = 0;
};

struct UnivariateDraw {
  core::LabeledSet data;
  Eigen::VectorXd beta;  // empty unless the setting is linear
};

inline UnivariateDraw gen_univariate(const SettingSpec& spec, int n,
                                     const std::optional<Eigen::VectorXd>& beta_override = {}) {
  if (spec.setting < 1 || spec.setting > 6) throw std::invalid_argument("setting must be 1..6");
  if (n < 1) throw std::invalid_argument("sample count must be >= 1");
  if (spec.p < 1) throw std::invalid_argument("feature dimension must be >= 1");
  if (!(spec.noise_level > 0.0)) throw std::invalid_argument("noise level must be positive");
  const bool linear = spec.setting == 1 || spec.setting == 4;
  const bool six_terms = spec.setting == 3 || spec.setting == 6;
  const bool gaussian = spec.setting <= 3;
  if (!linear && spec.p < (six_terms ? 6 : 2))
    throw std::invalid_argument("setting needs more features than provided");

  auto feat = rng::make_stream(spec.seed, 0, rng::Purpose::features);
  auto coef = rng::make_stream(spec.seed, 0, rng::Purpose::coefficients);
  auto nois = rng::make_stream(spec.seed, 0, rng::Purpose::noise);

  Eigen::MatrixXd x(n, spec.p);
  for (Eigen::Index i = 0; i < n; ++i)
    for (int j = 0; j < spec.p; ++j) x(i, j) = feat.uniform(-10.0, 10.0);

  Eigen::VectorXd beta;
  if (linear) {
    if (beta_override) {
      if (beta_override->size() != spec.p)
        throw std::invalid_argument("beta override dimension mismatch");
      beta = *beta_override;
    } else {
      beta = Eigen::VectorXd(spec.p);
      for (int j = 0; j < spec.p; ++j) beta(j) = coef.normal();
    }
  }

  Eigen::MatrixXd y(n, 1);
  for (Eigen::Index i = 0; i < n; ++i) {
    double mu;
    if (linear) {
      mu = x.row(i).dot(beta);
    } else {
      mu = std::exp(x(i, 0)) + std::sin(M_PI * x(i, 1));
      if (six_terms) mu += std::exp(x(i, 2)) + std::sin(M_PI * x(i, 3)) +
                           std::exp(x(i, 4)) + std::sin(M_PI * x(i, 5));
    }
    y(i, 0) = mu + (gaussian ? nois.normal(0.0, spec.noise_level) : nois.laplace(spec.noise_level));
  }
  return {core::LabeledSet(std::move(x), std::move(y)), std::move(beta)};
}

// ===== multivariate generator =====

// Features uniform on (-1, 1)^{d_x}; response coordinate i follows
//   2 x_j - 0.5 x_{j+1} + x_{j+2} + 1.5      with j = i mod d_x (wrapping)
// plus a zero-mean equicorrelated Gaussian noise vector.
struct MvSpec {
  int d_x = 5;
  int d_y = 10;
  double sigma = 0.5;
  double rho = 0.5;
  std::uint64_t seed = 0;
};

inline core::LabeledSet gen_multivariate(const MvSpec& spec, int n) {
  if (n < 1) throw std::invalid_argument("sample count must be >= 1");
  if (spec.d_x < 1 || spec.d_y < 1) throw std::invalid_argument("dimensions must be >= 1");

  auto feat = rng::make_stream(spec.seed, 0, rng::Purpose::features);
  auto nois = rng::make_stream(spec.seed, 0, rng::Purpose::noise);

  Eigen::MatrixXd x(n, spec.d_x);
  for (Eigen::Index i = 0; i < n; ++i)
    for (int j = 0; j < spec.d_x; ++j) x(i, j) = feat.uniform(-1.0, 1.0);

  Eigen::MatrixXd y(n, spec.d_y);
  for (Eigen::Index r = 0; r < n; ++r) {
    const Eigen::VectorXd eps = nois.equicorrelated_normal(spec.d_y, spec.sigma, spec.rho);
    for (int i = 0; i < spec.d_y; ++i) {
      const int j = i % spec.d_x;
      y(r, i) = 2.0 * x(r, j) - 0.5 * x(r, (j + 1) % spec.d_x) + x(r, (j + 2) % spec.d_x) + 1.5 +
                eps(i);
    }
  }
  return core::LabeledSet(std::move(x), std::move(y));
}

// ===== quantile targets =====

// Nearest-rank empirical quantile: the ceil(p*n)-th smallest value.
inline double nearest_rank_quantile(const Eigen::VectorXd& values, double p) {
  if (values.size() < 1) throw std::invalid_argument("quantile of empty sample");
  if (!(p > 0.0 && p <= 1.0)) throw std::invalid_argument("quantile level must lie in (0, 1]");
  std::vector<double> sorted(values.data(), values.data() + values.size());
  std::sort(sorted.begin(), sorted.end());
  auto rank = static_cast<std::size_t>(std::ceil(p * static_cast<double>(sorted.size())));
  rank = std::max<std::size_t>(1, std::min(rank, sorted.size()));
  return sorted[rank - 1];
}

// Interval union at quantile knots; an absent knot leaves that end unbounded.
struct QuantilePair {
  std::optional<double> lo;
  std::optional<double> hi;
};

inline core::TargetSpec make_quantile_union(const Eigen::VectorXd& train_responses,
                                            const std::vector<QuantilePair>& pairs) {
  if (pairs.empty()) throw std::invalid_argument("target requires at least one interval");
  std::vector<core::Interval> intervals;
  intervals.reserve(pairs.size());
  for (const auto& pr : pairs) {
    if (pr.lo && pr.hi)
      intervals.push_back(core::Interval::bounded(nearest_rank_quantile(train_responses, *pr.lo),
                                                  nearest_rank_quantile(train_responses, *pr.hi)));
    else if (pr.hi)
      intervals.push_back(core::Interval::less_than(nearest_rank_quantile(train_responses, *pr.hi)));
    else if (pr.lo)
      intervals.push_back(
          core::Interval::greater_than(nearest_rank_quantile(train_responses, *pr.lo)));
    else
      throw std::invalid_argument("an interval needs at least one finite end");
  }
  return core::TargetSpec(std::move(intervals));
}

// Task patterns 1-6. Knots are quantile levels feeding the pattern below;
// defaults give each task its documented shape (tasks 4-6 intersect by
// construction).
inline std::vector<QuantilePair> task_pattern(int task, const std::vector<double>& knots) {
  switch (task) {
    case 1:  // (-inf, a) | (b, c)
      if (knots.size() != 3) throw std::invalid_argument("task 1 takes 3 knots");
      return {{std::nullopt, knots[0]}, {knots[1], knots[2]}};
    case 2:  // (a, b) | (c, +inf)
      if (knots.size() != 3) throw std::invalid_argument("task 2 takes 3 knots");
      return {{knots[0], knots[1]}, {knots[2], std::nullopt}};
    case 3:  // (-inf, a) | (b, c) | (d, e)
      if (knots.size() != 5) throw std::invalid_argument("task 3 takes 5 knots");
      return {{std::nullopt, knots[0]}, {knots[1], knots[2]}, {knots[3], knots[4]}};
    case 4:
    case 5:  // (-inf, a) | (b, c) | (d, +inf)
      if (knots.size() != 4) throw std::invalid_argument("tasks 4 and 5 take 4 knots");
      return {{std::nullopt, knots[0]}, {knots[1], knots[2]}, {knots[3], std::nullopt}};
    case 6:  // (-inf, a) | (b, c) | (d, +inf) | (e, +inf)
      if (knots.size() != 5) throw std::invalid_argument("task 6 takes 5 knots");
      return {{std::nullopt, knots[0]},
              {knots[1], knots[2]},
              {knots[3], std::nullopt},
              {knots[4], std::nullopt}};
    default:
      throw std::invalid_argument("task id must be 1..6");
  }
}

inline const std::vector<double>& default_task_knots(int task) {
  static const std::vector<std::vector<double>> defaults = {
      {0.3, 0.6, 0.8},             // task 1
      {0.1, 0.3, 0.75},            // task 2
      {0.2, 0.4, 0.55, 0.7, 0.85}, // task 3
      {0.25, 0.15, 0.4, 0.8},      // task 4: intervals 1 and 2 overlap
      {0.2, 0.1, 0.35, 0.75},      // task 5: intervals 1 and 2 overlap
      {0.2, 0.1, 0.35, 0.75, 0.85} // task 6: two right tails nest
  };
  if (task < 1 || task > 6) throw std::invalid_argument("task id must be 1..6");
  return defaults[task - 1];
}

inline core::TargetSpec make_task_target(int task, const Eigen::VectorXd& train_responses,
                                         const std::vector<double>& knots = {}) {
  return make_quantile_union(train_responses,
                             task_pattern(task, knots.empty() ? default_task_knots(task) : knots));
}

// ===== regions =====

// Shell around (2, ..., 2): inner radius 0.6x, outer radius 1.0x the base.
inline core::RegionSpec make_shell_region(int d, double base_radius) {
  if (d < 1) throw std::invalid_argument("dimension must be >= 1");
  if (!(base_radius > 0.0)) throw std::invalid_argument("base radius must be positive");
  return core::RegionSpec::shell(Eigen::VectorXd::Constant(d, 2.0), 0.6 * base_radius,
                                 base_radius);
}

// Sphere 0 sits at (2, ..., 2); sphere s is offset by s * Unif(-0.5, 0.5)^d.
// Radii ramp linearly from 0.8x to 1.0x the base across the spheres.
inline core::RegionSpec make_multisphere_region(int d, int num_spheres, double base_radius,
                                                std::uint64_t seed) {
  if (d < 1) throw std::invalid_argument("dimension must be >= 1");
  if (num_spheres < 1) throw std::invalid_argument("need at least one sphere");
  if (!(base_radius > 0.0)) throw std::invalid_argument("base radius must be positive");

  auto stream = rng::make_stream(seed, 0, rng::Purpose::regions);
  const Eigen::VectorXd anchor = Eigen::VectorXd::Constant(d, 2.0);
  std::vector<Eigen::VectorXd> centers;
  std::vector<double> radii;
  for (int s = 0; s < num_spheres; ++s) {
    Eigen::VectorXd c = anchor;
    if (s > 0)
      for (int j = 0; j < d; ++j) c(j) += s * stream.uniform(-0.5, 0.5);
    centers.push_back(std::move(c));
    const double t = num_spheres == 1 ? 0.0 : static_cast<double>(s) / (num_spheres - 1);
    radii.push_back(base_radius * (0.8 + 0.2 * t));
  }
  return core::RegionSpec::ball_union(std::move(centers), std::move(radii));
}

inline core::RegionSpec centroid_ball_region(const Eigen::MatrixXd& points, double radius) {
  if (points.rows() < 1) throw std::invalid_argument("centroid of an empty point set");
  const Eigen::VectorXd center = points.colwise().mean().transpose();
  return core::RegionSpec::centroid_ball(center, radius);
}

// ===== split =====

struct Split {
  core::LabeledSet train;
  core::LabeledSet cal;
  core::LabeledSet test;
};

// Random 8:1:1 partition (train gets floor(0.8 n), calibration floor(0.1 n),
// the remainder is test).
inline Split split_8_1_1(const core::LabeledSet& data, std::uint64_t seed) {
  const Eigen::Index n = data.rows();
  if (n < 10) throw std::invalid_argument("split requires at least 10 rows");

  std::vector<Eigen::Index> order(n);
  for (Eigen::Index i = 0; i < n; ++i) order[i] = i;
  auto stream = rng::make_stream(seed, 0, rng::Purpose::split);
  for (Eigen::Index i = n - 1; i > 0; --i) {
    const auto j = static_cast<Eigen::Index>(stream.unit() * static_cast<double>(i + 1));
    std::swap(order[i], order[std::min(j, i)]);
  }

  const auto n_train = static_cast<Eigen::Index>(0.8 * static_cast<double>(n));
  const auto n_cal = static_cast<Eigen::Index>(0.1 * static_cast<double>(n));
  auto take = [&](Eigen::Index from, Eigen::Index count) {
    Eigen::MatrixXd x(count, data.feature_dim()), y(count, data.response_dim());
    for (Eigen::Index i = 0; i < count; ++i) {
      x.row(i) = data.features().row(order[from + i]);
      y.row(i) = data.responses().row(order[from + i]);
    }
    return core::LabeledSet(std::move(x), std::move(y));
  };
  return {take(0, n_train), take(n_train, n_cal), take(n_train + n_cal, n - n_train - n_cal)};
}

}  // namespace confsel::simgen

namespace confsel {
using simgen::centroid_ball_region;
using simgen::gen_multivariate;
using simgen::gen_univariate;
using simgen::make_multisphere_region;
using simgen::make_quantile_union;
using simgen::make_shell_region;
using simgen::make_task_target;
using simgen::MvSpec;
using simgen::nearest_rank_quantile;
using simgen::QuantilePair;
using simgen::SettingSpec;
using simgen::Split;
using simgen::split_8_1_1;
using simgen::UnivariateDraw;
}  // namespace confsel
