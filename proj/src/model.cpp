#include "mjls/model.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <string>

namespace mjls {

namespace {

std::string mode_tag(int i) { return "mode " + std::to_string(i + 1); }

bool is_symmetric(const Eigen::MatrixXd& M, double tol) {
  return (M - M.transpose()).cwiseAbs().maxCoeff() <= tol;
}

}  // namespace

TransitionMatrix::TransitionMatrix(Eigen::MatrixXd phi) : phi_(std::move(phi)) {
  if (phi_.rows() != phi_.cols() || phi_.rows() < 1) {
    throw Error(ErrorCode::kDimensionMismatch, "transition matrix must be square and nonempty");
  }
  for (Eigen::Index i = 0; i < phi_.rows(); ++i) {
    double row_sum = 0.0;
    for (Eigen::Index j = 0; j < phi_.cols(); ++j) {
      const double p = phi_(i, j);
      if (!(p >= 0.0 && p <= 1.0)) {
        throw Error(ErrorCode::kNotStochastic,
                    "entry (" + std::to_string(i + 1) + "," + std::to_string(j + 1) +
                        ") = " + std::to_string(p) + " outside [0,1]");
      }
      row_sum += p;
    }
    if (std::abs(row_sum - 1.0) > kRowSumTolerance) {
      throw Error(ErrorCode::kNotStochastic,
                  "row " + std::to_string(i + 1) + " sums to " + std::to_string(row_sum));
    }
  }
}

MjlsModel::MjlsModel(NMatrixSet A_in, NMatrixSet B_in, TransitionMatrix phi_in,
                     std::optional<NMatrixSet> C_in)
    : A(std::move(A_in)), B(std::move(B_in)), C(std::move(C_in)), phi(std::move(phi_in)) {
  if (A.rows() != A.cols()) {
    throw Error(ErrorCode::kDimensionMismatch, "A matrices must be square");
  }
  if (B.rows() != A.rows()) {
    throw Error(ErrorCode::kDimensionMismatch, "B row count must equal the state dimension");
  }
  if (A.count() != B.count() || A.count() != phi.mode_count()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "A, B and phi must agree on the number of modes");
  }
  if (C && (C->count() != A.count() || C->cols() != A.rows())) {
    throw Error(ErrorCode::kDimensionMismatch, "C must be N matrices with n columns");
  }
}

ValidatedModel validate_model(const MjlsModel& model, const CostWeights& weights) {
  // MjlsModel and TransitionMatrix constructors already hold the structural
  // invariants; re-assert the cross-object ones and check the weights.
  const int n = model.n();
  const int m = model.m();
  const int N = model.mode_count();

  if (weights.Q.count() != N || weights.R.count() != N) {
    throw Error(ErrorCode::kDimensionMismatch, "Q and R must have one matrix per mode");
  }
  if (weights.Q.rows() != n || weights.Q.cols() != n) {
    throw Error(ErrorCode::kDimensionMismatch, "Q matrices must be n x n");
  }
  if (weights.R.rows() != m || weights.R.cols() != m) {
    throw Error(ErrorCode::kDimensionMismatch, "R matrices must be m x m");
  }

  constexpr double kPsdTolerance = 1e-9;
  for (int i = 0; i < N; ++i) {
    if (!is_symmetric(weights.Q[i], kPsdTolerance)) {
      throw Error(ErrorCode::kWeightNotPSD, "Q asymmetric in " + mode_tag(i));
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> esq(weights.Q[i]);
    if (esq.eigenvalues().minCoeff() < -kPsdTolerance) {
      throw Error(ErrorCode::kWeightNotPSD, "Q indefinite in " + mode_tag(i));
    }
    if (!is_symmetric(weights.R[i], kPsdTolerance)) {
      throw Error(ErrorCode::kWeightNotPD, "R asymmetric in " + mode_tag(i));
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> esr(weights.R[i]);
    if (esr.eigenvalues().minCoeff() <= 0.0) {
      throw Error(ErrorCode::kWeightNotPD, "R not positive definite in " + mode_tag(i));
    }
  }
  return ValidatedModel{model, weights};
}

int sample_next_mode(int theta, const TransitionMatrix& phi, RandomSource& rng) {
  const int N = phi.mode_count();
  if (theta < 0 || theta >= N) {
    throw Error(ErrorCode::kDimensionMismatch,
                "mode index " + std::to_string(theta) + " outside 0.." + std::to_string(N - 1));
  }
  const double u = rng.uniform01();
  double cumulative = 0.0;
  for (int j = 0; j < N; ++j) {
    cumulative += phi(theta, j);
    if (u < cumulative) return j;
  }
  return N - 1;  // u landed in the last cell's rounding slack
}

Eigen::VectorXd stationary_distribution(const TransitionMatrix& phi) {
  const int N = phi.mode_count();

  // Ergodicity: some power Phi^K with K <= N^2 must be entrywise positive.
  // Cheaper than eigen-analysis and sufficient for finite chains.
  Eigen::MatrixXd power = phi.matrix();
  bool primitive = (power.array() > 0.0).all();
  for (int k = 2; k <= N * N && !primitive; ++k) {
    power = power * phi.matrix();
    primitive = (power.array() > 0.0).all();
  }
  if (!primitive) {
    throw Error(ErrorCode::kNotErgodic,
                "no power of phi up to N^2 is entrywise positive; the chain cannot mix");
  }

  // Solve pi^T Phi = pi^T with sum(pi) = 1 as an overdetermined system.
  Eigen::MatrixXd lhs(N + 1, N);
  lhs.topRows(N) = phi.matrix().transpose() - Eigen::MatrixXd::Identity(N, N);
  lhs.row(N).setOnes();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(N + 1);
  rhs(N) = 1.0;
  Eigen::VectorXd pi = lhs.colPivHouseholderQr().solve(rhs);

  if (pi.minCoeff() <= 0.0) {
    throw Error(ErrorCode::kNotErgodic, "stationary distribution has a non-positive entry");
  }
  return pi;
}

}  // namespace mjls
