#pragma once

#include <optional>
#include <utility>

#include "mjls/matrix_set.hpp"
#include "mjls/random.hpp"

namespace mjls {

// Row-stochastic mode transition matrix. Every row must sum to 1 within
// 1e-9 and all entries must lie in [0, 1].
class TransitionMatrix {
 public:
  // Trivial single-mode chain; lets aggregates default-construct.
  TransitionMatrix() : phi_(Eigen::MatrixXd::Ones(1, 1)) {}

  explicit TransitionMatrix(Eigen::MatrixXd phi);

  int mode_count() const { return static_cast<int>(phi_.rows()); }
  const Eigen::MatrixXd& matrix() const { return phi_; }
  double operator()(int i, int j) const { return phi_(i, j); }

  static constexpr double kRowSumTolerance = 1e-9;

 private:
  Eigen::MatrixXd phi_;
};

// Markov jump linear plant x_{k+1} = A_theta x_k + B_theta u_k.
// C is accepted by the model file format for completeness but never used:
// the controller is full-state feedback.
struct MjlsModel {
  MjlsModel(NMatrixSet A_in, NMatrixSet B_in, TransitionMatrix phi_in,
            std::optional<NMatrixSet> C_in = std::nullopt);

  NMatrixSet A;
  NMatrixSet B;
  std::optional<NMatrixSet> C;
  TransitionMatrix phi;

  int n() const { return A.rows(); }
  int m() const { return B.cols(); }
  int mode_count() const { return A.count(); }
};

// Quadratic stage-cost weights, one pair per mode. Q_i must be symmetric
// PSD and R_i symmetric PD.
struct CostWeights {
  NMatrixSet Q;
  NMatrixSet R;
};

// Proof token that a (model, weights) pair passed validate_model.
struct ValidatedModel {
  MjlsModel model;
  CostWeights weights;
};

// Checks every structural invariant: matching mode counts and shapes,
// stochastic phi (already enforced by TransitionMatrix), Q_i symmetric PSD
// (min eigenvalue >= -1e-9) and R_i symmetric PD (min eigenvalue > 0).
ValidatedModel validate_model(const MjlsModel& model, const CostWeights& weights);

// Draws theta_{k+1} given theta_k (0-based), consuming exactly one uniform
// from rng (inverse-CDF walk over the phi row).
int sample_next_mode(int theta, const TransitionMatrix& phi, RandomSource& rng);

// Limit distribution pi of an ergodic chain: pi^T Phi = pi^T, sum = 1,
// all entries > 0. Ergodicity is checked by requiring some power Phi^K,
// K <= N^2, to have all entries strictly positive.
Eigen::VectorXd stationary_distribution(const TransitionMatrix& phi);

}  // namespace mjls
