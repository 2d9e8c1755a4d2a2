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
// Numerical primitives shared by the statistical modules: least squares,
// logistic regression by IRLS, damped Newton root finding and nonnegative
// penalized least squares by coordinate descent.
//
// All routines are deterministic pure functions of their inputs.

#ifndef FEDCAUSAL_NUMKIT_H_
#define FEDCAUSAL_NUMKIT_H_

#include <functional>
#include <span>

#include <Eigen/Dense>

namespace fedcausal {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Row-per-unit design. By convention the first column of a fitting design is
// the all-ones intercept; callers that build designs use WithIntercept().
using DesignMatrix = Eigen::MatrixXd;

struct LinearFit {
  Vector coefficients;
  bool converged = false;
  int iterations = 0;
};

// Solver tolerances. The defaults are the contract values; they are surfaced
// here so callers can tighten or relax them explicitly.
struct SolverOptions {
  // Smallest |R_ii| / largest |R_ii| accepted by the pivoted QR.
  double rank_tolerance = 1e-10;

  int logistic_max_iterations = 100;
  double logistic_gradient_tolerance = 1e-8;
  int max_step_halvings = 30;

  int newton_max_iterations = 200;

  int nnls_max_sweeps = 10000;
  double nnls_coordinate_tolerance = 1e-10;
};

// Prepends an all-ones column.
DesignMatrix WithIntercept(const Matrix& features);

// Ordinary least squares through column-pivoted Householder QR.
// Throws FedError(kRankDeficient) when the design is numerically rank
// deficient and FedError(kDimensionMismatch) on shape errors.
LinearFit FitOls(const DesignMatrix& x, const Vector& y,
                 const SolverOptions& options = {});

// Bernoulli maximum likelihood by iteratively reweighted least squares with
// step halving. Returns converged = false if the iteration cap is reached.
// Throws kMissingClass for constant y and kSeparated when step halving fails
// max_step_halvings times in a row.
LinearFit FitLogistic(const DesignMatrix& x, const Vector& y,
                      const SolverOptions& options = {});

double Expit(double eta);

// Bernoulli log-likelihood sum_i y_i eta_i - log(1 + exp(eta_i)).
double LogisticLogLikelihood(const Vector& eta, const Vector& y);

using VectorFunction = std::function<Vector(const Vector&)>;
using JacobianFunction = std::function<Matrix(const Vector&)>;

// Damped Newton iteration for residual(x) = 0. Each step is halved up to
// max_step_halvings times until the Euclidean residual norm decreases.
// Returns once the max-norm of the residual is <= tol.
// Throws kNoConvergence and kSingularJacobian.
Vector NewtonSolve(const VectorFunction& residual,
                   const JacobianFunction& jacobian, const Vector& x0,
                   double tol, const SolverOptions& options = {});

// Minimizes ||r - G eta||^2 + sum_k penalties_k * eta_k over eta >= 0 by
// cyclic coordinate descent with exact coordinate minimization. An infinite
// penalty pins its coordinate at zero. Throws kNoConvergence.
Vector NnlsCoordinateDescent(const Matrix& g, const Vector& r,
                             const Vector& penalties,
                             const SolverOptions& options = {});

// Same problem expressed through the Gram matrix G'G and G'r.
Vector NnlsCoordinateDescentGram(const Matrix& gram, const Vector& g_dot_r,
                                 const Vector& penalties,
                                 const SolverOptions& options = {});

// Objective value of the penalized problem above.
double NnlsObjective(const Matrix& g, const Vector& r, const Vector& penalties,
                     const Vector& eta);

// Neumaier-compensated summation.
double CompensatedSum(std::span<const double> values);
double CompensatedMean(std::span<const double> values);

inline double CompensatedSum(const Vector& values) {
  return CompensatedSum(std::span<const double>(values.data(), values.size()));
}
inline double CompensatedMean(const Vector& values) {
  return CompensatedMean(std::span<const double>(values.data(), values.size()));
}

}  // namespace fedcausal

#endif  // FEDCAUSAL_NUMKIT_H_
