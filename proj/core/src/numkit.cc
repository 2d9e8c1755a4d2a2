/*
* Copyright 2026 The fedcausal Authors.
*
* Licensed under the Apache License, Version 2.0 (the "License");
* you may not use this file except in compliance with the License.
* You may obtain a copy of the License at
*
*     https://www.apache.org/licenses/LICENSE-2.0
*
* Unless required by applicable law or agreed to in writing, software
* distributed under the License is distributed on an "AS IS" BASIS,
* WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
* See the License for the specific language governing permissions and
* limitations under the License.
* ============================================================================
*/

#include "fedcausal/numkit.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

#include "fedcausal/status.h"

namespace fedcausal {

namespace {

void CheckFinite(const Matrix& m, const char* what) {
  if (!m.allFinite()) {
    throw FedError(ErrorCode::kInvalidArgument,
                   std::string(what) + " has non-finite entries");
  }
}

// Ratio of the smallest to the largest |R_ii| of a pivoted QR. Pivoting
// orders the diagonal by decreasing magnitude.
template <typename Qr>
bool NumericallyFullRank(const Qr& qr, Eigen::Index cols, double tolerance) {
  const auto& r = qr.matrixQR();
  const double largest = std::abs(r(0, 0));
  const double smallest = std::abs(r(cols - 1, cols - 1));
  return largest > 0.0 && smallest >= tolerance * largest;
}

}  // namespace

DesignMatrix WithIntercept(const Matrix& features) {
  DesignMatrix out(features.rows(), features.cols() + 1);
  out.col(0).setOnes();
  out.rightCols(features.cols()) = features;
  return out;
}

LinearFit FitOls(const DesignMatrix& x, const Vector& y,
                 const SolverOptions& options) {
  if (x.rows() != y.size()) {
    std::ostringstream msg;
    msg << "design has " << x.rows() << " rows but response has " << y.size();
    throw FedError(ErrorCode::kDimensionMismatch, msg.str());
  }
  if (x.cols() == 0 || x.rows() < x.cols()) {
    throw FedError(ErrorCode::kRankDeficient,
                   "fewer rows than columns in least-squares design");
  }
  CheckFinite(x, "design");
  CheckFinite(y, "response");

  Eigen::ColPivHouseholderQR<Matrix> qr(x);
  if (!NumericallyFullRank(qr, x.cols(), options.rank_tolerance)) {
    throw FedError(ErrorCode::kRankDeficient,
                   "least-squares design is numerically rank deficient");
  }
  LinearFit fit;
  fit.coefficients = qr.solve(y);
  fit.converged = true;
  fit.iterations = 1;
  return fit;
}

double Expit(double eta) {
  if (eta >= 0.0) {
    return 1.0 / (1.0 + std::exp(-eta));
  }
  const double e = std::exp(eta);
  return e / (1.0 + e);
}

double LogisticLogLikelihood(const Vector& eta, const Vector& y) {
  double total = 0.0;
  double compensation = 0.0;
  for (Eigen::Index i = 0; i < eta.size(); ++i) {
    // log(1 + exp(eta)) evaluated without overflow.
    const double softplus = eta[i] > 0.0 ? eta[i] + std::log1p(std::exp(-eta[i]))
                                         : std::log1p(std::exp(eta[i]));
    const double term = y[i] * eta[i] - softplus;
    const double t = total + term;
    compensation += std::abs(total) >= std::abs(term) ? (total - t) + term
                                                      : (term - t) + total;
    total = t;
  }
  return total + compensation;
}

LinearFit FitLogistic(const DesignMatrix& x, const Vector& y,
                      const SolverOptions& options) {
  if (x.rows() != y.size()) {
    throw FedError(ErrorCode::kDimensionMismatch,
                   "design and response lengths differ");
  }
  if (x.cols() == 0 || x.rows() < x.cols()) {
    throw FedError(ErrorCode::kRankDeficient,
                   "fewer rows than columns in logistic design");
  }
  CheckFinite(x, "design");
  Eigen::Index ones = 0;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    if (y[i] != 0.0 && y[i] != 1.0) {
      throw FedError(ErrorCode::kInvalidArgument,
                     "logistic response must be 0/1");
    }
    if (y[i] == 1.0) ++ones;
  }
  if (ones == 0 || ones == y.size()) {
    throw FedError(ErrorCode::kMissingClass,
                   "logistic response has a single class");
  }

  const Eigen::Index n = x.rows();
  LinearFit fit;
  fit.coefficients = Vector::Zero(x.cols());
  Vector eta = Vector::Zero(n);
  double loglik = LogisticLogLikelihood(eta, y);

  for (int iter = 0; iter < options.logistic_max_iterations; ++iter) {
    Vector p(n);
    Vector sqrt_w(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      p[i] = Expit(eta[i]);
      sqrt_w[i] = std::sqrt(p[i] * (1.0 - p[i]));
    }
    const Vector gradient = x.transpose() * (y - p);
    if (gradient.lpNorm<Eigen::Infinity>() <=
        options.logistic_gradient_tolerance) {
      fit.converged = true;
      fit.iterations = iter;
      return fit;
    }
    if ((sqrt_w.array() <= 0.0).any()) {
      throw FedError(ErrorCode::kSeparated,
                     "fitted probabilities reached 0 or 1");
    }
    // Newton direction from the weighted least-squares problem
    // min || W^{1/2} X d - W^{-1/2} (y - p) ||.
    const Matrix weighted = sqrt_w.asDiagonal() * x;
    const Vector working = (y - p).cwiseQuotient(sqrt_w);
    Eigen::ColPivHouseholderQR<Matrix> qr(weighted);
    if (!NumericallyFullRank(qr, x.cols(), options.rank_tolerance)) {
      throw FedError(ErrorCode::kSeparated,
                     "weighted design lost rank during IRLS");
    }
    const Vector direction = qr.solve(working);

    double step = 1.0;
    bool accepted = false;
    for (int h = 0; h <= options.max_step_halvings; ++h) {
      const Vector candidate = fit.coefficients + step * direction;
      const Vector candidate_eta = x * candidate;
      const double candidate_loglik = LogisticLogLikelihood(candidate_eta, y);
      const double slack = 1e-13 * std::max(1.0, std::abs(loglik));
      if (std::isfinite(candidate_loglik) && candidate_loglik >= loglik - slack) {
        fit.coefficients = candidate;
        eta = candidate_eta;
        loglik = candidate_loglik;
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      throw FedError(ErrorCode::kSeparated,
                     "step halving failed to increase the likelihood");
    }
  }
  fit.converged = false;
  fit.iterations = options.logistic_max_iterations;
  return fit;
}

Vector NewtonSolve(const VectorFunction& residual,
                   const JacobianFunction& jacobian, const Vector& x0,
                   double tol, const SolverOptions& options) {
  Vector x = x0;
  Vector f = residual(x);
  if (!f.allFinite()) {
    throw FedError(ErrorCode::kInvalidArgument,
                   "residual is not finite at the starting point");
  }
  for (int iter = 0; iter < options.newton_max_iterations; ++iter) {
    if (f.lpNorm<Eigen::Infinity>() <= tol) return x;

    const Matrix j = jacobian(x);
    if (!j.allFinite()) {
      throw FedError(ErrorCode::kSingularJacobian, "jacobian is not finite");
    }
    Eigen::FullPivLU<Matrix> lu(j);
    if (!lu.isInvertible()) {
      throw FedError(ErrorCode::kSingularJacobian, "jacobian is singular");
    }
    const Vector dx = lu.solve(-f);
    if (!dx.allFinite()) {
      throw FedError(ErrorCode::kSingularJacobian,
                     "newton step is not finite");
    }

    const double norm = f.norm();
    double step = 1.0;
    bool accepted = false;
    for (int h = 0; h <= options.max_step_halvings; ++h) {
      Vector candidate = x + step * dx;
      Vector fc = residual(candidate);
      if (fc.allFinite() && fc.norm() < norm) {
        x = std::move(candidate);
        f = std::move(fc);
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      if (f.lpNorm<Eigen::Infinity>() <= tol) return x;
      throw FedError(ErrorCode::kNoConvergence,
                     "damped newton could not decrease the residual");
    }
  }
  if (f.lpNorm<Eigen::Infinity>() <= tol) return x;
  throw FedError(ErrorCode::kNoConvergence,
                 "newton iteration cap reached");
}

namespace {

// Exact minimizer on the support of eta, accepted only when it is positive
// there and the KKT conditions hold off the support.
bool SolveOnSupport(const Matrix& gram, const Vector& g_dot_r,
                    const Vector& penalties, const Vector& eta,
                    double tolerance, Vector* out) {
  std::vector<Eigen::Index> support;
  for (Eigen::Index k = 0; k < eta.size(); ++k) {
    if (eta[k] > 0.0) support.push_back(k);
  }
  Vector x = Vector::Zero(eta.size());
  if (!support.empty()) {
    const auto s = static_cast<Eigen::Index>(support.size());
    Matrix a(s, s);
    Vector b(s);
    for (Eigen::Index i = 0; i < s; ++i) {
      b[i] = g_dot_r[support[i]] - 0.5 * penalties[support[i]];
      for (Eigen::Index j = 0; j < s; ++j) a(i, j) = gram(support[i], support[j]);
    }
    Eigen::LDLT<Matrix> ldlt(a);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) return false;
    const Vector solved = ldlt.solve(b);
    if (!solved.allFinite() || (solved.array() <= 0.0).any()) return false;
    for (Eigen::Index i = 0; i < s; ++i) x[support[i]] = solved[i];
  }
  const Vector grad = 2.0 * (gram * x - g_dot_r) + penalties;
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    if (x[k] > 0.0 ? std::abs(grad[k]) > tolerance : grad[k] < -tolerance) {
      return false;
    }
  }
  *out = x;
  return true;
}

}  // namespace

Vector NnlsCoordinateDescentGram(const Matrix& gram, const Vector& g_dot_r,
                                 const Vector& penalties,
                                 const SolverOptions& options) {
  const Eigen::Index p = gram.rows();
  if (gram.cols() != p || g_dot_r.size() != p || penalties.size() != p) {
    throw FedError(ErrorCode::kDimensionMismatch,
                   "nnls gram, cross-product and penalties disagree");
  }
  if ((penalties.array() < 0.0).any() || penalties.hasNaN()) {
    throw FedError(ErrorCode::kInvalidArgument,
                   "penalties must be nonnegative");
  }
  Vector eta = Vector::Zero(p);
  const double kkt_scale =
      std::max({1.0, g_dot_r.cwiseAbs().maxCoeff(), gram.diagonal().maxCoeff()});
  for (int sweep = 0; sweep < options.nnls_max_sweeps; ++sweep) {
    double max_change = 0.0;
    for (Eigen::Index k = 0; k < p; ++k) {
      double updated = 0.0;
      if (gram(k, k) > 0.0 && std::isfinite(penalties[k])) {
        const double partial =
            g_dot_r[k] - gram.row(k).dot(eta) + gram(k, k) * eta[k];
        updated = std::max(0.0, (partial - 0.5 * penalties[k]) / gram(k, k));
      }
      max_change = std::max(max_change, std::abs(updated - eta[k]));
      eta[k] = updated;
    }
    if (max_change < options.nnls_coordinate_tolerance) return eta;
    Vector polished;
    if (SolveOnSupport(gram, g_dot_r, penalties, eta, 1e-12 * kkt_scale,
                       &polished)) {
      return polished;
    }
  }
  throw FedError(ErrorCode::kNoConvergence,
                 "nnls coordinate descent sweep cap reached");
}

Vector NnlsCoordinateDescent(const Matrix& g, const Vector& r,
                             const Vector& penalties,
                             const SolverOptions& options) {
  if (g.rows() != r.size()) {
    throw FedError(ErrorCode::kDimensionMismatch,
                   "nnls design and response lengths differ");
  }
  const Matrix gram = g.transpose() * g;
  const Vector g_dot_r = g.transpose() * r;
  return NnlsCoordinateDescentGram(gram, g_dot_r, penalties, options);
}

double NnlsObjective(const Matrix& g, const Vector& r, const Vector& penalties,
                     const Vector& eta) {
  double penalty = 0.0;
  for (Eigen::Index k = 0; k < eta.size(); ++k) {
    if (eta[k] != 0.0) penalty += penalties[k] * eta[k];
  }
  return (r - g * eta).squaredNorm() + penalty;
}

double CompensatedSum(std::span<const double> values) {
  double sum = 0.0;
  double compensation = 0.0;
  for (const double v : values) {
    const double t = sum + v;
    if (std::abs(sum) >= std::abs(v)) {
      compensation += (sum - t) + v;
    } else {
      compensation += (v - t) + sum;
    }
    sum = t;
  }
  return sum + compensation;
}

double CompensatedMean(std::span<const double> values) {
  if (values.empty()) {
    throw FedError(ErrorCode::kEmptySample, "mean of an empty sample");
  }
  return CompensatedSum(values) / static_cast<double>(values.size());
}

}  // namespace fedcausal
