#include "mjls/riccati.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <string>
#include <unsupported/Eigen/KroneckerProduct>

#include "mjls/simulate.hpp"

namespace mjls {

Eigen::MatrixXd expectation_operator(const NMatrixSet& P, const TransitionMatrix& phi, int i) {
  if (P.count() != phi.mode_count()) {
    throw Error(ErrorCode::kDimensionMismatch, "P must have one matrix per chain mode");
  }
  if (i < 0 || i >= phi.mode_count()) {
    throw Error(ErrorCode::kDimensionMismatch, "mode index out of range");
  }
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(P.rows(), P.cols());
  for (int j = 0; j < P.count(); ++j) acc += phi(i, j) * P[j];
  return acc;
}

namespace {

// Cholesky of R_i + B_i^T E B_i; the matrix is SPD whenever R_i > 0 and the
// P backing E is PSD, so a failure means malformed input.
Eigen::LLT<Eigen::MatrixXd> input_gram_llt(const Eigen::MatrixXd& E, const MjlsModel& model,
                                           const CostWeights& weights, int i) {
  Eigen::MatrixXd G = weights.R[i] + model.B[i].transpose() * E * model.B[i];
  Eigen::LLT<Eigen::MatrixXd> llt(G);
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorCode::kSingularMatrix,
                "R + B^T E(P) B is not positive definite in mode " + std::to_string(i + 1));
  }
  return llt;
}

}  // namespace

Eigen::MatrixXd gain_from_P(const NMatrixSet& P, const MjlsModel& model,
                            const CostWeights& weights, int i) {
  const Eigen::MatrixXd E = expectation_operator(P, model.phi, i);
  auto llt = input_gram_llt(E, model, weights, i);
  return llt.solve(model.B[i].transpose() * E * model.A[i]);
}

RiccatiSolution value_iteration(const ValidatedModel& vm, double tol, int max_iter,
                                bool record_iterates) {
  if (tol <= 0.0) {
    throw Error(ErrorCode::kDimensionMismatch, "tolerance must be positive");
  }
  const MjlsModel& model = vm.model;
  const CostWeights& weights = vm.weights;
  const int n = model.n();
  const int N = model.mode_count();

  RiccatiSolution solution;
  NMatrixSet P = NMatrixSet::Zero(N, n, n);
  if (record_iterates) solution.iterates.push_back(P);

  // iterations counts the sweeps before the final confirming one, so a
  // plant whose fixed point is reached after a single update reports 1.
  for (int sweep = 1; sweep <= max_iter + 1; ++sweep) {
    NMatrixSet P_next = P;
    for (int i = 0; i < N; ++i) {
      const Eigen::MatrixXd E = expectation_operator(P, model.phi, i);
      const Eigen::MatrixXd AtEA = model.A[i].transpose() * E * model.A[i];
      const Eigen::MatrixXd AtEB = model.A[i].transpose() * E * model.B[i];
      auto llt = input_gram_llt(E, model, weights, i);
      Eigen::MatrixXd next = weights.Q[i] + AtEA - AtEB * llt.solve(AtEB.transpose());
      // Symmetrize to keep floating-point drift out of the invariants.
      P_next[i] = 0.5 * (next + next.transpose());
    }
    const double residual = P_next.max_abs_diff(P);
    P = std::move(P_next);
    if (record_iterates) solution.iterates.push_back(P);

    if (P.max_abs() > kStateOverflowGuard) {
      throw Error(ErrorCode::kNoConvergence,
                  "iterates diverged after " + std::to_string(sweep) +
                      " sweeps; the plant is likely not mean-square stabilizable");
    }
    if (residual < tol) {
      solution.iterations = sweep - 1;
      solution.residual = residual;
      std::vector<Eigen::MatrixXd> gains;
      gains.reserve(static_cast<std::size_t>(N));
      for (int i = 0; i < N; ++i) gains.push_back(gain_from_P(P, model, weights, i));
      solution.P = std::move(P);
      solution.K = NMatrixSet(std::move(gains));
      return solution;
    }
  }
  throw Error(ErrorCode::kNoConvergence,
              "no convergence within " + std::to_string(max_iter) + " sweeps (tol " +
                  std::to_string(tol) + ")");
}

double care_residual(const NMatrixSet& P, const MjlsModel& model, const CostWeights& weights) {
  double defect = 0.0;
  for (int i = 0; i < model.mode_count(); ++i) {
    const Eigen::MatrixXd E = expectation_operator(P, model.phi, i);
    const Eigen::MatrixXd AtEB = model.A[i].transpose() * E * model.B[i];
    auto llt = input_gram_llt(E, model, weights, i);
    const Eigen::MatrixXd rhs = weights.Q[i] + model.A[i].transpose() * E * model.A[i] -
                                AtEB * llt.solve(AtEB.transpose());
    defect = std::max(defect, (rhs - P[i]).cwiseAbs().maxCoeff());
  }
  return defect;
}

double optimal_cost(const NMatrixSet& P, const Eigen::VectorXd& x0, int theta0) {
  if (theta0 < 0 || theta0 >= P.count() || x0.size() != P.rows()) {
    throw Error(ErrorCode::kDimensionMismatch, "initial condition does not fit P");
  }
  return x0.dot(P[theta0] * x0);
}

double ms_stability_radius(const MjlsModel& model, const NMatrixSet& K) {
  const int n = model.n();
  const int N = model.mode_count();
  if (K.count() != N || K.rows() != model.m() || K.cols() != n) {
    throw Error(ErrorCode::kDimensionMismatch, "gain set must be N matrices of shape m x n");
  }
  // Second-moment lifting: block (j, i) = p_ij kron(Abar_i, Abar_i).
  const int d = n * n;
  Eigen::MatrixXd lifted = Eigen::MatrixXd::Zero(N * d, N * d);
  for (int i = 0; i < N; ++i) {
    const Eigen::MatrixXd Abar = model.A[i] - model.B[i] * K[i];
    const Eigen::MatrixXd kron = Eigen::kroneckerProduct(Abar, Abar);
    for (int j = 0; j < N; ++j) {
      lifted.block(j * d, i * d, d, d) = model.phi(i, j) * kron;
    }
  }
  Eigen::EigenSolver<Eigen::MatrixXd> eigensolver(lifted, /*computeEigenvectors=*/false);
  return eigensolver.eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace mjls
