#pragma once

// Selection procedures: plain BH on a p-value list, global BH across the
// flattened (test unit x target component) p-value matrix, and the end-to-end
// pipelines for interval targets (univariate responses) and region targets
// (multivariate responses).

#include <cstddef>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "confsel/core.hpp"
#include "confsel/predictor.hpp"
#include "confsel/pvalue.hpp"
#include "confsel/score.hpp"

namespace confsel::select {

struct SelectionResult {
  std::vector<std::pair<Eigen::Index, Eigen::Index>> pairs;  // selected (j, k), row-major order
  std::vector<std::size_t> samples;                          // sorted distinct j
  std::size_t cut_index = 0;                                 // number of selected pairs
  double cutoff = 0.0;                                       // realized threshold q*cut_index/NUM
};

namespace detail {
inline void check_q(double q) {
  if (!(q > 0.0 && q < 1.0)) throw std::invalid_argument("q must lie in (0, 1)");
}

// Largest l with p_(l) <= q * l / total; 0 when none qualifies.
inline std::size_t bh_cut(std::vector<double> sorted_p, double q, std::size_t total) {
  std::size_t cut = 0;
  for (std::size_t l = 1; l <= sorted_p.size(); ++l)
    if (sorted_p[l - 1] <= q * static_cast<double>(l) / static_cast<double>(total)) cut = l;
  return cut;
}
}  // namespace detail

// BH at level q over a flat list; returns the selected indices.
inline std::vector<std::size_t> bh(std::span<const double> pvalues, double q) {
  detail::check_q(q);
  if (pvalues.empty()) throw std::invalid_argument("bh requires a nonempty p-value list");
  for (double p : pvalues)
    if (!(p > 0.0 && p <= 1.0)) throw std::invalid_argument("p-values must lie in (0, 1]");

  std::vector<double> sorted(pvalues.begin(), pvalues.end());
  std::sort(sorted.begin(), sorted.end());
  const std::size_t cut = detail::bh_cut(std::move(sorted), q, pvalues.size());
  const double cutoff = q * static_cast<double>(cut) / static_cast<double>(pvalues.size());
  std::vector<std::size_t> selected;
  for (std::size_t i = 0; i < pvalues.size(); ++i)
    if (cut > 0 && pvalues[i] <= cutoff) selected.push_back(i);
  return selected;
}

// BH across all m*K entries at once; selected pairs share one realized cutoff.
inline SelectionResult global_bh(const pvalue::PValueMatrix& matrix, double q) {
  detail::check_q(q);
  const Eigen::Index m = matrix.tests(), K = matrix.columns();
  const auto total = static_cast<std::size_t>(m * K);

  std::vector<double> sorted;
  sorted.reserve(total);
  for (Eigen::Index j = 0; j < m; ++j)
    for (Eigen::Index k = 0; k < K; ++k) sorted.push_back(matrix.values(j, k));
  std::sort(sorted.begin(), sorted.end());

  const std::size_t cut = detail::bh_cut(std::move(sorted), q, total);
  SelectionResult out;
  out.cut_index = cut;
  out.cutoff = cut > 0 ? q * static_cast<double>(cut) / static_cast<double>(total) : 0.0;
  if (cut == 0) return out;

  std::vector<bool> seen(static_cast<std::size_t>(m), false);
  for (Eigen::Index j = 0; j < m; ++j)
    for (Eigen::Index k = 0; k < K; ++k)
      if (matrix.values(j, k) <= out.cutoff) {
        out.pairs.emplace_back(j, k);
        seen[static_cast<std::size_t>(j)] = true;
      }
  for (std::size_t j = 0; j < seen.size(); ++j)
    if (seen[j]) out.samples.push_back(j);
  return out;
}

// ===== pipeline options =====

struct PipelineOptions {
  score::TestBranch test_branch = score::TestBranch::inside;
  bool drop_pred_term = false;
  pvalue::PvalueOptions pv = {};
};

namespace detail {
inline std::vector<score::ScoreParams> interval_params(const Eigen::VectorXd& cal_preds,
                                                       const Eigen::VectorXd& test_preds,
                                                       const core::TargetSpec& target,
                                                       const PipelineOptions& options) {
  std::vector<double> all;
  all.reserve(cal_preds.size() + test_preds.size());
  all.insert(all.end(), cal_preds.data(), cal_preds.data() + cal_preds.size());
  all.insert(all.end(), test_preds.data(), test_preds.data() + test_preds.size());
  std::vector<score::ScoreParams> params;
  params.reserve(target.size());
  for (const auto& iv : target.intervals())
    params.push_back({score::compute_dominance(all, iv), options.test_branch, options.drop_pred_term});
  return params;
}

inline std::vector<score::ScoreParams> region_params(const Eigen::MatrixXd& cal_preds,
                                                     const Eigen::MatrixXd& test_preds,
                                                     std::span<const core::RegionSpec> regions,
                                                     const PipelineOptions& options) {
  Eigen::MatrixXd all(cal_preds.rows() + test_preds.rows(), test_preds.cols());
  if (cal_preds.rows() > 0) all.topRows(cal_preds.rows()) = cal_preds;
  all.bottomRows(test_preds.rows()) = test_preds;
  std::vector<score::ScoreParams> params;
  params.reserve(regions.size());
  for (const auto& region : regions)
    params.push_back(
        {score::compute_dominance(all, region), options.test_branch, options.drop_pred_term});
  return params;
}
}  // namespace detail

// ===== interval-target pipeline =====

// Core entry point over precomputed predictions.
inline SelectionResult mccs_from_predictions(const Eigen::VectorXd& cal_y,
                                             const Eigen::VectorXd& cal_preds,
                                             const Eigen::VectorXd& test_preds,
                                             const core::TargetSpec& target, double q,
                                             const pvalue::TieBreakStream& ties,
                                             const PipelineOptions& options = {}) {
  detail::check_q(q);
  const auto params = detail::interval_params(cal_preds, test_preds, target, options);
  const auto matrix =
      pvalue::pvalue_matrix(cal_y, cal_preds, test_preds, target, params, ties, options.pv);
  return global_bh(matrix, q);
}

// Fitting route: trains the predictor, predicts both splits, then selects.
inline SelectionResult mccs(const core::LabeledSet& train, const core::LabeledSet& cal,
                            const core::FeatureSet& test, const core::TargetSpec& target, double q,
                            const predictor::PredictorSpec& spec, const pvalue::TieBreakStream& ties,
                            const PipelineOptions& options = {}) {
  if (train.response_dim() != 1 || cal.response_dim() != 1)
    throw std::invalid_argument("interval targets require univariate responses");
  const auto model = predictor::FittedModel::fit(spec, train);
  return mccs_from_predictions(cal.response_vector(), model.predict_scalar(cal.features()),
                               model.predict_scalar(test.features()), target, q, ties, options);
}

// ===== region-target pipeline =====

// One selection column per region; multi-ball unions expand to one ball each.
inline std::vector<core::RegionSpec> region_columns(const core::RegionSpec& region) {
  if (const auto* bu = std::get_if<core::BallUnion>(&region.shape())) {
    std::vector<core::RegionSpec> columns;
    columns.reserve(bu->centers.size());
    for (std::size_t k = 0; k < bu->centers.size(); ++k)
      columns.push_back(core::RegionSpec::ball_union({bu->centers[k]}, {bu->radii[k]}));
    return columns;
  }
  return {region};
}

inline SelectionResult mrcs_from_predictions(const Eigen::MatrixXd& cal_y,
                                             const Eigen::MatrixXd& cal_preds,
                                             const Eigen::MatrixXd& test_preds,
                                             std::span<const core::RegionSpec> regions, double q,
                                             const pvalue::TieBreakStream& ties,
                                             const PipelineOptions& options = {}) {
  detail::check_q(q);
  if (cal_y.cols() < 2) throw std::invalid_argument("region targets require multivariate responses");
  const auto params = detail::region_params(cal_preds, test_preds, regions, options);
  const auto matrix =
      pvalue::pvalue_matrix(cal_y, cal_preds, test_preds, regions, params, ties, options.pv);
  return global_bh(matrix, q);
}

inline SelectionResult mrcs(const core::LabeledSet& train, const core::LabeledSet& cal,
                            const core::FeatureSet& test, std::span<const core::RegionSpec> regions,
                            double q, const predictor::PredictorSpec& spec,
                            const pvalue::TieBreakStream& ties, const PipelineOptions& options = {}) {
  if (train.response_dim() != cal.response_dim())
    throw std::invalid_argument("train and calibration response dimensions differ");
  const auto model = predictor::FittedModel::fit(spec, train);
  return mrcs_from_predictions(cal.responses(), model.predict(cal.features()),
                               model.predict(test.features()), regions, q, ties, options);
}

}  // namespace confsel::select

namespace confsel {
using select::bh;
using select::global_bh;
using select::mccs;
using select::mccs_from_predictions;
using select::mrcs;
using select::mrcs_from_predictions;
using select::PipelineOptions;
using select::region_columns;
using select::SelectionResult;
}  // namespace confsel
