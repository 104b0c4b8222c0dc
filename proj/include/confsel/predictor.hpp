#pragma once

// Point predictors fitted on the training split: linear ridge regression
// (closed form, unpenalized intercept, native multi-output) and RBF kernel
// ridge regression. Both are deterministic functions of their inputs.

#include <cmath>
#include <stdexcept>
#include <utility>
#include <variant>

#include <Eigen/Dense>

#include "confsel/core.hpp"

namespace confsel::predictor {

// ===== linear ridge =====

// Minimizes ||y - Xb - a||^2 + lambda ||b||^2; the intercept a is never
// penalized. lambda = 0 resolves rank-deficient designs by the minimum-norm
// least-squares solution.
class Ridge {
 public:
  static Ridge fit(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, double lambda) {
    if (x.rows() < 1) throw std::invalid_argument("ridge requires at least one training row");
    if (x.rows() != y.rows()) throw std::invalid_argument("ridge: row count mismatch");
    if (lambda < 0.0) throw std::invalid_argument("ridge: lambda must be >= 0");

    const Eigen::Index n = x.rows(), p = x.cols();
    Eigen::MatrixXd xa(n, p + 1);
    xa.leftCols(p) = x;
    xa.col(p).setOnes();

    Eigen::MatrixXd coef;
    if (lambda == 0.0) {
      coef = Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd>(xa).solve(y);
    } else {
      Eigen::MatrixXd gram = xa.transpose() * xa;
      for (Eigen::Index j = 0; j < p; ++j) gram(j, j) += lambda;
      coef = gram.ldlt().solve(xa.transpose() * y);
    }
    return Ridge(std::move(coef));
  }

  Eigen::MatrixXd predict(const Eigen::MatrixXd& x) const {
    if (x.cols() + 1 != coef_.rows())
      throw std::invalid_argument("ridge: feature dimension mismatch");
    return (x * coef_.topRows(x.cols())).rowwise() + coef_.bottomRows(1).row(0);
  }

  // Rows 0..p-1 hold slopes per output column; the last row is the intercept.
  const Eigen::MatrixXd& coefficients() const { return coef_; }

 private:
  explicit Ridge(Eigen::MatrixXd coef) : coef_(std::move(coef)) {}
  Eigen::MatrixXd coef_;
};

// Multi-output responses reuse the same closed form column by column.
using MultiOutputRidge = Ridge;

// ===== RBF kernel ridge =====

class KernelRidgeRBF {
 public:
  // gamma <= 0 selects the bandwidth heuristic 1 / (p * var(training entries)).
  static KernelRidgeRBF fit(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, double lambda,
                            double gamma = 0.0) {
    if (x.rows() < 1) throw std::invalid_argument("kernel ridge requires training rows");
    if (x.rows() != y.rows()) throw std::invalid_argument("kernel ridge: row count mismatch");
    if (!(lambda > 0.0)) throw std::invalid_argument("kernel ridge: lambda must be > 0");

    double g = gamma;
    if (g <= 0.0) {
      const double mean = x.mean();
      const double var = (x.array() - mean).square().sum() / static_cast<double>(x.size());
      g = var > 0.0 ? 1.0 / (static_cast<double>(x.cols()) * var) : 1.0;
    }

    Eigen::MatrixXd k = gram_matrix(x, x, g);
    k.diagonal().array() += lambda;
    Eigen::MatrixXd alpha = k.llt().solve(y);
    return KernelRidgeRBF(x, std::move(alpha), g);
  }

  Eigen::MatrixXd predict(const Eigen::MatrixXd& x) const {
    if (x.cols() != train_.cols())
      throw std::invalid_argument("kernel ridge: feature dimension mismatch");
    return gram_matrix(x, train_, gamma_) * alpha_;
  }

  double gamma() const { return gamma_; }

 private:
  KernelRidgeRBF(Eigen::MatrixXd train, Eigen::MatrixXd alpha, double gamma)
      : train_(std::move(train)), alpha_(std::move(alpha)), gamma_(gamma) {}

  static Eigen::MatrixXd gram_matrix(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                                     double gamma) {
    Eigen::VectorXd an = a.rowwise().squaredNorm();
    Eigen::VectorXd bn = b.rowwise().squaredNorm();
    Eigen::MatrixXd d2 = (-2.0 * a * b.transpose());
    d2.colwise() += an;
    d2.rowwise() += bn.transpose();
    return (-gamma * d2.array().max(0.0)).exp();
  }

  Eigen::MatrixXd train_;
  Eigen::MatrixXd alpha_;
  double gamma_;
};

// ===== pipeline-facing model wrapper =====

struct PredictorSpec {
  enum class Kind { ridge, kernel_ridge };
  Kind kind = Kind::kernel_ridge;
  double lambda = 1e-3;
  double gamma = 0.0;  // kernel ridge only; <= 0 means the bandwidth heuristic
};

class FittedModel {
 public:
  static FittedModel fit(const PredictorSpec& spec, const Eigen::MatrixXd& x,
                         const Eigen::MatrixXd& y) {
    if (spec.kind == PredictorSpec::Kind::ridge)
      return FittedModel(Ridge::fit(x, y, spec.lambda));
    return FittedModel(KernelRidgeRBF::fit(x, y, spec.lambda, spec.gamma));
  }

  static FittedModel fit(const PredictorSpec& spec, const core::LabeledSet& train) {
    return fit(spec, train.features(), train.responses());
  }

  Eigen::MatrixXd predict(const Eigen::MatrixXd& x) const {
    return std::visit([&](const auto& m) { return m.predict(x); }, model_);
  }

  Eigen::VectorXd predict_scalar(const Eigen::MatrixXd& x) const {
    Eigen::MatrixXd out = predict(x);
    if (out.cols() != 1) throw std::invalid_argument("prediction is not univariate");
    return out.col(0);
  }

 private:
  using Model = std::variant<Ridge, KernelRidgeRBF>;
  explicit FittedModel(Model m) : model_(std::move(m)) {}
  Model model_;
};

}  // namespace confsel::predictor

namespace confsel {
using predictor::FittedModel;
using predictor::KernelRidgeRBF;
using predictor::MultiOutputRidge;
using predictor::PredictorSpec;
using predictor::Ridge;
}  // namespace confsel
