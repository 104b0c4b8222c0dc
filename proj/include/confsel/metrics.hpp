#pragma once

// False discovery proportion, power, and replication aggregation.

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "confsel/core.hpp"

namespace confsel::metrics {

// Membership of each test response in the interval union / region.
inline std::vector<bool> union_membership(const Eigen::MatrixXd& test_y,
                                          const core::TargetSpec& target) {
  if (test_y.cols() != 1) throw std::invalid_argument("interval targets need scalar responses");
  std::vector<bool> in(static_cast<std::size_t>(test_y.rows()));
  for (Eigen::Index i = 0; i < test_y.rows(); ++i) {
    bool hit = false;
    for (const auto& iv : target.intervals()) hit = hit || iv.contains(test_y(i, 0));
    in[static_cast<std::size_t>(i)] = hit;
  }
  return in;
}

inline std::vector<bool> union_membership(const Eigen::MatrixXd& test_y,
                                          const core::RegionSpec& region) {
  std::vector<bool> in(static_cast<std::size_t>(test_y.rows()));
  for (Eigen::Index i = 0; i < test_y.rows(); ++i) {
    const Eigen::VectorXd row = test_y.row(i).transpose();
    in[static_cast<std::size_t>(i)] = core::region_contains(region, row);
  }
  return in;
}

// Per-(sample, column) membership for pair-level accounting: column k of an
// interval target, or the k-th constituent ball of a sphere union (shells and
// centroid balls stay single-column).
inline std::vector<std::vector<bool>> pair_membership(const Eigen::MatrixXd& test_y,
                                                      const core::TargetSpec& target) {
  if (test_y.cols() != 1) throw std::invalid_argument("interval targets need scalar responses");
  std::vector<std::vector<bool>> in(static_cast<std::size_t>(test_y.rows()),
                                    std::vector<bool>(target.size()));
  for (Eigen::Index i = 0; i < test_y.rows(); ++i)
    for (std::size_t k = 0; k < target.size(); ++k)
      in[static_cast<std::size_t>(i)][k] = target.intervals()[k].contains(test_y(i, 0));
  return in;
}

inline std::vector<std::vector<bool>> pair_membership(const Eigen::MatrixXd& test_y,
                                                      const core::RegionSpec& region) {
  const std::size_t cols = std::max<std::size_t>(1, region.ball_count());
  std::vector<std::vector<bool>> in(static_cast<std::size_t>(test_y.rows()),
                                    std::vector<bool>(cols));
  const auto* bu = std::get_if<core::BallUnion>(&region.shape());
  for (Eigen::Index i = 0; i < test_y.rows(); ++i) {
    const Eigen::VectorXd row = test_y.row(i).transpose();
    if (bu != nullptr) {
      for (std::size_t s = 0; s < bu->centers.size(); ++s)
        in[static_cast<std::size_t>(i)][s] = (row - bu->centers[s]).norm() < bu->radii[s];
    } else {
      in[static_cast<std::size_t>(i)][0] = core::region_contains(region, row);
    }
  }
  return in;
}

// Sample-level FDP: selected samples whose response misses the whole union,
// over the number selected (0/0 reads as 0).
inline double fdp_sample(const std::vector<std::size_t>& samples,
                         const std::vector<bool>& in_union) {
  std::size_t false_hits = 0;
  for (const auto j : samples) {
    if (j >= in_union.size()) throw std::out_of_range("selected index outside the test set");
    if (!in_union[j]) ++false_hits;
  }
  return static_cast<double>(false_hits) /
         static_cast<double>(std::max<std::size_t>(1, samples.size()));
}

// Pair-level FDP: selected (sample, column) pairs whose response misses that
// column's interval, over the number of selected pairs.
inline double fdp_pair(const std::vector<std::pair<Eigen::Index, Eigen::Index>>& pairs,
                       const std::vector<std::vector<bool>>& in_column) {
  std::size_t false_pairs = 0;
  for (const auto& [j, k] : pairs) {
    if (j < 0 || static_cast<std::size_t>(j) >= in_column.size())
      throw std::out_of_range("selected index outside the test set");
    const auto& row = in_column[static_cast<std::size_t>(j)];
    if (k < 0 || static_cast<std::size_t>(k) >= row.size())
      throw std::out_of_range("selected column outside the target");
    if (!row[static_cast<std::size_t>(k)]) ++false_pairs;
  }
  return static_cast<double>(false_pairs) /
         static_cast<double>(std::max<std::size_t>(1, pairs.size()));
}

// Pair-level FDP against the union: a pair counts as false only when the
// response misses every column. Never exceeds fdp_pair on the same pairs.
inline double fdp_pair_union(const std::vector<std::pair<Eigen::Index, Eigen::Index>>& pairs,
                             const std::vector<bool>& in_union) {
  std::size_t false_pairs = 0;
  for (const auto& [j, k] : pairs) {
    (void)k;
    if (j < 0 || static_cast<std::size_t>(j) >= in_union.size())
      throw std::out_of_range("selected index outside the test set");
    if (!in_union[static_cast<std::size_t>(j)]) ++false_pairs;
  }
  return static_cast<double>(false_pairs) /
         static_cast<double>(std::max<std::size_t>(1, pairs.size()));
}

// Power: selected in-union samples over 1-or-the-number of in-union samples
// (an empty union therefore reads as power 0).
inline double power(const std::vector<std::size_t>& samples, const std::vector<bool>& in_union) {
  std::size_t total = 0, hit = 0;
  for (const bool b : in_union)
    if (b) ++total;
  for (const auto j : samples) {
    if (j >= in_union.size()) throw std::out_of_range("selected index outside the test set");
    if (in_union[j]) ++hit;
  }
  return static_cast<double>(hit) / static_cast<double>(std::max<std::size_t>(1, total));
}

// Mean and standard error across replications. A single replication has no
// spread estimate; `degenerate` flags it and the SE reads 0.
struct Aggregate {
  double mean = 0.0;
  double se = 0.0;
  std::size_t count = 0;
  bool degenerate = false;
};

inline Aggregate aggregate(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("aggregate of an empty sample");
  Aggregate out;
  out.count = values.size();
  for (const double v : values) out.mean += v;
  out.mean /= static_cast<double>(values.size());
  if (values.size() == 1) {
    out.degenerate = true;
    return out;
  }
  double ss = 0.0;
  for (const double v : values) ss += (v - out.mean) * (v - out.mean);
  const double sd = std::sqrt(ss / static_cast<double>(values.size() - 1));
  out.se = sd / std::sqrt(static_cast<double>(values.size()));
  return out;
}

}  // namespace confsel::metrics

namespace confsel {
using metrics::aggregate;
using metrics::Aggregate;
using metrics::fdp_pair;
using metrics::fdp_pair_union;
using metrics::fdp_sample;
using metrics::pair_membership;
using metrics::power;
using metrics::union_membership;
}  // namespace confsel
