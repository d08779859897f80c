#pragma once

// Shared fixtures for the test suites: the two-mode benchmark plant used
// throughout, plus reference values that were cross-checked against
// independent solvers (policy iteration on the coupled Lyapunov equations
// and an SDP formulation of the coupled Riccati equations).

#include <Eigen/Dense>
#include <vector>

#include "mjls/model.hpp"

namespace mjls::testing {

inline Eigen::MatrixXd mat2(double a, double b, double c, double d) {
  Eigen::MatrixXd M(2, 2);
  M << a, b, c, d;
  return M;
}

inline Eigen::MatrixXd col2(double a, double b) {
  Eigen::MatrixXd M(2, 1);
  M << a, b;
  return M;
}

inline Eigen::MatrixXd scalar_mat(double v) {
  Eigen::MatrixXd M(1, 1);
  M << v;
  return M;
}

// Two-mode plant with an unstable mode-1 dynamics matrix.
inline MjlsModel benchmark_model() {
  NMatrixSet A(std::vector<Eigen::MatrixXd>{mat2(-0.5, 1.0, 0.8, 0.5), mat2(0.6, -0.1, 0.4, -1.0)});
  NMatrixSet B(std::vector<Eigen::MatrixXd>{col2(1.0, 2.0), col2(1.0, 1.0)});
  TransitionMatrix phi(mat2(0.7, 0.3, 0.5, 0.5));
  return MjlsModel(std::move(A), std::move(B), std::move(phi));
}

inline CostWeights benchmark_weights() {
  NMatrixSet Q(std::vector<Eigen::MatrixXd>{5.0 * Eigen::MatrixXd::Identity(2, 2),
                                            5.0 * Eigen::MatrixXd::Identity(2, 2)});
  NMatrixSet R(std::vector<Eigen::MatrixXd>{scalar_mat(1.0), scalar_mat(1.0)});
  return CostWeights{std::move(Q), std::move(R)};
}

// Converged gains and cost kernels of the benchmark plant, frozen from the
// value-iteration fixed point and confirmed by two independent methods.
inline Eigen::MatrixXd benchmark_K1() {
  Eigen::MatrixXd K(1, 2);
  K << 0.35518587, 0.27210619;
  return K;
}

inline Eigen::MatrixXd benchmark_K2() {
  Eigen::MatrixXd K(1, 2);
  K << 0.45985617, -0.55173502;
  return K;
}

inline Eigen::MatrixXd benchmark_P1() {
  return mat2(14.83197296, -7.98611904, -7.98611904, 11.81382781);
}

inline Eigen::MatrixXd benchmark_P2() {
  return mat2(5.51078445, 1.01093276, 1.01093276, 11.09405548);
}

// Scalar single-mode plant whose Riccati equation reduces to a quadratic
// solved in closed form inside the tests that use it.
inline MjlsModel scalar_model(double a = 0.5, double b = 1.0) {
  NMatrixSet A(std::vector<Eigen::MatrixXd>{scalar_mat(a)});
  NMatrixSet B(std::vector<Eigen::MatrixXd>{scalar_mat(b)});
  TransitionMatrix phi(Eigen::MatrixXd::Ones(1, 1));
  return MjlsModel(std::move(A), std::move(B), std::move(phi));
}

inline CostWeights scalar_weights(double q = 1.0, double r = 1.0) {
  NMatrixSet Q(std::vector<Eigen::MatrixXd>{scalar_mat(q)});
  NMatrixSet R(std::vector<Eigen::MatrixXd>{scalar_mat(r)});
  return CostWeights{std::move(Q), std::move(R)};
}

}  // namespace mjls::testing
