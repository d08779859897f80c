#pragma once

#include <vector>

#include "mjls/model.hpp"

namespace mjls {

// Converged solution of the coupled Riccati equations: per-mode cost
// kernels P_i (symmetric PSD) and gains K_i for u = -K_theta x.
struct RiccatiSolution {
  NMatrixSet P;
  NMatrixSet K;
  int iterations = 0;
  double residual = 0.0;  // max over modes of |P_i^{j+1} - P_i^j|_inf at the last sweep
  // Full iterate sequence, P^0 = 0 first; populated only on request.
  std::vector<NMatrixSet> iterates;
};

// E_i(P) = sum_j phi(i,j) P_j.
Eigen::MatrixXd expectation_operator(const NMatrixSet& P, const TransitionMatrix& phi, int i);

// K_i = (R_i + B_i^T E_i(P) B_i)^{-1} B_i^T E_i(P) A_i. The inner matrix
// is inverted through a Cholesky factorization; failure is reported as
// SingularMatrix, never silently regularized.
Eigen::MatrixXd gain_from_P(const NMatrixSet& P, const MjlsModel& model,
                            const CostWeights& weights, int i);

// Fixed-point iteration on the coupled Riccati map from P^0 = 0 (Jacobi
// sweep; P^{j+1} depends only on P^j). Each update is explicitly
// symmetrized. Stops when the max-over-modes elementwise infinity norm of
// the update drops below tol; throws NoConvergence at max_iter or if the
// iterates blow past the overflow guard (the plant is then most likely not
// mean-square stabilizable).
RiccatiSolution value_iteration(const ValidatedModel& vm, double tol = 1e-10,
                                int max_iter = 10000, bool record_iterates = false);

// Fixed-point defect of the Riccati map: max over modes of the elementwise
// infinity norm of RHS_i(P) - P_i.
double care_residual(const NMatrixSet& P, const MjlsModel& model, const CostWeights& weights);

// J*(x0, theta0) = x0^T P_theta0 x0.
double optimal_cost(const NMatrixSet& P, const Eigen::VectorXd& x0, int theta0);

// Spectral radius of the N n^2 x N n^2 second-moment lifting whose (j, i)
// block is phi(i, j) * kron(Abar_i, Abar_i) with Abar_i = A_i - B_i K_i.
// A value < 1 certifies mean-square stability of the closed loop.
double ms_stability_radius(const MjlsModel& model, const NMatrixSet& K);

}  // namespace mjls
