#pragma once

#include <utility>
#include <vector>

#include "mjls/model.hpp"
#include "mjls/riccati.hpp"
#include "mjls/trajectory.hpp"

namespace mjls {

// Per-mode Q-function kernels H_i, each (n+m) x (n+m) symmetric.
using KernelSet = NMatrixSet;

// Quadratic monomials of z in row-major upper-triangular order:
// [z1^2, z1 z2, ..., z1 zl, z2^2, ..., zl^2], length l(l+1)/2.
Eigen::VectorXd bar_z(const Eigen::VectorXd& z);

// Half-vectorization of a symmetric H with off-diagonal entries doubled:
// [h11, 2 h12, ..., 2 h1l, h22, ..., hll]. The weighting makes
// z^T H z == bar_z(z) . bar_H_from_H(H) hold for every z. Throws
// NotSymmetric if H is asymmetric beyond 1e-10.
Eigen::VectorXd bar_H_from_H(const Eigen::MatrixXd& H);

// Inverse of bar_H_from_H; exact round trip.
Eigen::MatrixXd H_from_bar_H(const Eigen::VectorXd& v, int l);

// Analytic kernel blkdiag(Q_i, R_i) + [A_i B_i]^T E_i(P) [A_i B_i]; the
// oracle the least-squares estimate is tested against.
Eigen::MatrixXd kernel_from_model(const MjlsModel& model, const CostWeights& weights,
                                  const NMatrixSet& P, int i);

// Greedy gain K_i = (H^{uu})^{-1} H^{ux} for u = -K_i x. The uu block is
// factorized by Cholesky; failure means a bad estimate and is surfaced as
// SingularBlock for the outer loop to handle.
Eigen::MatrixXd gain_from_kernel(const Eigen::MatrixXd& H, int n, int m);

// Closed-loop cost kernel implied by a Q-function kernel and a gain:
// P = [I; -K]^T H [I; -K], i.e. H^{xx} - H^{xu} K - K^T H^{ux} + K^T H^{uu} K,
// symmetrized on return. (Equals the Schur complement H^{xx} -
// H^{xu} (H^{uu})^{-1} H^{ux} when K is the greedy gain.)
Eigen::MatrixXd P_from_kernel(const Eigen::MatrixXd& H, const Eigen::MatrixXd& K);

// Hyperparameters of the learning loop.
struct LearningConfig {
  long L = 0;          // usable samples per mode fed to each regression
  double eps = 1e-3;   // stop threshold on the gain change e_K
  int max_outer_iter = 100;
  long max_collect_steps = 100000;
  NoiseSpec noise;     // excitation; noise.seed is the master seed for the
                       // noise and reset streams (split internally)
  NMatrixSet K0;       // empty = zero gains
  std::vector<Eigen::VectorXd> Hbar0;  // empty = zero; kept for reporting

  // L >= l(l+1)/2 (identifiability floor), eps > 0, noise.std >= 0.
  void validate(int n, int m, int mode_count) const;
};

// Full learning history. Index 0 of the K/H/P histories holds the initial
// values (K^0, H from Hbar^0, P^0 = 0); entry j holds the values after
// outer iteration j. e_K_history[j-1] and condition_numbers[j-1] belong to
// iteration j.
struct LearningReport {
  std::vector<NMatrixSet> K_history;
  std::vector<KernelSet> H_history;
  std::vector<NMatrixSet> P_history;
  int iterations = 0;
  std::vector<double> e_K_history;
  std::vector<std::vector<double>> condition_numbers;  // [iteration][mode]
  std::vector<long> collect_steps;
  std::vector<long> decay_resets;
  std::vector<long> overflow_resets;
  bool converged = false;

  const NMatrixSet& final_K() const { return K_history.back(); }
  double final_e_K() const { return e_K_history.empty() ? 0.0 : e_K_history.back(); }
};

// The learner's view of the plant: current state and mode, and the ability
// to apply an input and to restart the experiment from a chosen state.
// The dynamics matrices live behind this interface and are not readable.
class BlackBoxPlant {
 public:
  virtual ~BlackBoxPlant() = default;
  virtual int state_dim() const = 0;
  virtual int input_dim() const = 0;
  virtual int mode_count() const = 0;
  virtual const Eigen::VectorXd& state() const = 0;
  virtual int mode() const = 0;  // 0-based
  // x <- A_theta x + B_theta u, then theta <- next mode (one chain draw).
  virtual void apply(const Eigen::VectorXd& u) = 0;
  // Experiment restart; leaves the mode untouched.
  virtual void reset_state(const Eigen::VectorXd& x) = 0;
};

// Simulation-backed black box. Owns the plant privately so code written
// against BlackBoxPlant cannot reach the matrices; mode transitions come
// from the chain stream handed in at construction.
class SimulatedPlant final : public BlackBoxPlant {
 public:
  SimulatedPlant(MjlsModel model, Eigen::VectorXd x0, int theta0, RandomSource chain_rng);

  int state_dim() const override { return model_.n(); }
  int input_dim() const override { return model_.m(); }
  int mode_count() const override { return model_.mode_count(); }
  const Eigen::VectorXd& state() const override { return x_; }
  int mode() const override { return theta_; }
  void apply(const Eigen::VectorXd& u) override;
  void reset_state(const Eigen::VectorXd& x) override;

 private:
  MjlsModel model_;
  Eigen::VectorXd x_;
  int theta_;
  RandomSource chain_rng_;
};

// Runs the closed loop u = -K_theta x + noise until every mode has at
// least config.L usable records (successor inside the overflow guard) or
// max_collect_steps is hit, which raises ModeStarvation. The state is
// re-randomized uniform on [-1,1]^n whenever its norm leaves
// [kStateDecayFloor, kStateOverflowGuard]; reset counts are kept on the
// trajectory.
Trajectory collect(BlackBoxPlant& plant, const NMatrixSet& K, const LearningConfig& config,
                   RandomSource& noise_rng, RandomSource& reset_rng);

// Regression data for mode i from the first L usable records of that mode:
// row l of the design matrix is bar_z([x; u]) at record r_{i,l}; target
// entry l is the stage cost x^T Q_i x + u^T R_i u plus the successor term
// x_next^T E_i(P_prev) x_next. Both sides use the applied (noisy) input,
// which is what keeps the excitation from biasing the estimate.
std::pair<Eigen::MatrixXd, Eigen::VectorXd> build_regression(const Trajectory& traj,
                                                             const NMatrixSet& P_prev,
                                                             const TransitionMatrix& phi,
                                                             const CostWeights& weights, int i,
                                                             long L);

struct LsSolution {
  Eigen::VectorXd coeffs;
  double condition_number = 0.0;
};

// Least-squares minimizer of |psi - phi_matrix h| via a column-pivoted QR
// factorization (same minimizer as the normal equations, better
// conditioned; the quadratic monomials are highly correlated). Throws
// RankDeficient when the column rank is below l(l+1)/2 -- the actionable
// fix is more excitation noise or a larger L. The reported condition
// number of the design matrix comes from its singular values.
LsSolution ls_solve(const Eigen::MatrixXd& phi_matrix, const Eigen::VectorXd& psi);

// Condition numbers above this are reported as a persistent-excitation
// warning in the learning report (the solve still proceeds).
inline constexpr double kConditionWarningThreshold = 1e8;

// Outer Q-learning loop: collect -> per-mode regression and LS kernel
// estimate -> greedy gains -> P update, repeated until the largest gain
// change e_K drops to eps. The stop test is active from the second
// iteration on, because with the default zero initialization the first
// iteration's gain update is always a no-op. Needs no initial stabilizing
// policy. Throws NoConvergence at max_outer_iter and annotates collect /
// regression errors with the iteration they occurred in.
LearningReport q_learning(BlackBoxPlant& plant, const CostWeights& weights,
                          const TransitionMatrix& phi, const LearningConfig& config);

// Monte-Carlo estimate of the stopping time Lbar = first step at which
// every mode has been visited L times, the chain started from the
// stationary distribution.
struct DatasetLengthStats {
  double mean = 0.0;
  double stddev = 0.0;
  double ci95_halfwidth = 0.0;
  double q05 = 0.0, q25 = 0.0, q50 = 0.0, q75 = 0.0, q95 = 0.0;
  long trials = 0;
};

DatasetLengthStats estimate_dataset_length(const TransitionMatrix& phi, long L, long trials,
                                           RandomSource& rng);

}  // namespace mjls
