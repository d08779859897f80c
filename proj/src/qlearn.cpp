#include "mjls/qlearn.hpp"

#include <Eigen/Cholesky>
#include <Eigen/QR>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <string>

#include "mjls/simulate.hpp"

namespace mjls {

namespace {

long bar_length(int l) { return static_cast<long>(l) * (l + 1) / 2; }

}  // namespace

Eigen::VectorXd bar_z(const Eigen::VectorXd& z) {
  const int l = static_cast<int>(z.size());
  if (l < 1) {
    throw Error(ErrorCode::kDimensionMismatch, "bar_z needs a nonempty vector");
  }
  Eigen::VectorXd v(bar_length(l));
  Eigen::Index idx = 0;
  for (int a = 0; a < l; ++a) {
    for (int b = a; b < l; ++b) v(idx++) = z(a) * z(b);
  }
  return v;
}

Eigen::VectorXd bar_H_from_H(const Eigen::MatrixXd& H) {
  const int l = static_cast<int>(H.rows());
  if (H.cols() != l || l < 1) {
    throw Error(ErrorCode::kDimensionMismatch, "kernel must be square");
  }
  if ((H - H.transpose()).cwiseAbs().maxCoeff() > 1e-10) {
    throw Error(ErrorCode::kNotSymmetric, "kernel asymmetric beyond 1e-10");
  }
  Eigen::VectorXd v(bar_length(l));
  Eigen::Index idx = 0;
  for (int a = 0; a < l; ++a) {
    for (int b = a; b < l; ++b) v(idx++) = (a == b) ? H(a, a) : 2.0 * H(a, b);
  }
  return v;
}

Eigen::MatrixXd H_from_bar_H(const Eigen::VectorXd& v, int l) {
  if (v.size() != bar_length(l)) {
    throw Error(ErrorCode::kDimensionMismatch,
                "bar vector has length " + std::to_string(v.size()) + ", expected l(l+1)/2 = " +
                    std::to_string(bar_length(l)));
  }
  Eigen::MatrixXd H(l, l);
  Eigen::Index idx = 0;
  for (int a = 0; a < l; ++a) {
    for (int b = a; b < l; ++b) {
      if (a == b) {
        H(a, a) = v(idx);
      } else {
        H(a, b) = 0.5 * v(idx);
        H(b, a) = 0.5 * v(idx);
      }
      ++idx;
    }
  }
  return H;
}

Eigen::MatrixXd kernel_from_model(const MjlsModel& model, const CostWeights& weights,
                                  const NMatrixSet& P, int i) {
  const int n = model.n();
  const int m = model.m();
  const Eigen::MatrixXd E = expectation_operator(P, model.phi, i);
  Eigen::MatrixXd AB(n, n + m);
  AB << model.A[i], model.B[i];
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(n + m, n + m);
  H.topLeftCorner(n, n) = weights.Q[i];
  H.bottomRightCorner(m, m) = weights.R[i];
  H += AB.transpose() * E * AB;
  return 0.5 * (H + H.transpose());
}

Eigen::MatrixXd gain_from_kernel(const Eigen::MatrixXd& H, int n, int m) {
  if (H.rows() != n + m || H.cols() != n + m) {
    throw Error(ErrorCode::kDimensionMismatch, "kernel must be (n+m) x (n+m)");
  }
  const Eigen::MatrixXd Huu = H.bottomRightCorner(m, m);
  Eigen::LLT<Eigen::MatrixXd> llt(Huu);
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorCode::kSingularBlock,
                "uu block of the kernel is not positive definite; the estimate is unusable");
  }
  return llt.solve(H.bottomLeftCorner(m, n));
}

Eigen::MatrixXd P_from_kernel(const Eigen::MatrixXd& H, const Eigen::MatrixXd& K) {
  const int m = static_cast<int>(K.rows());
  const int n = static_cast<int>(K.cols());
  if (H.rows() != n + m || H.cols() != n + m) {
    throw Error(ErrorCode::kDimensionMismatch, "kernel and gain shapes are inconsistent");
  }
  Eigen::MatrixXd closed(n + m, n);
  closed.topRows(n) = Eigen::MatrixXd::Identity(n, n);
  closed.bottomRows(m) = -K;
  Eigen::MatrixXd P = closed.transpose() * H * closed;
  return 0.5 * (P + P.transpose());
}

void LearningConfig::validate(int n, int m, int mode_count) const {
  const int l = n + m;
  if (L < bar_length(l)) {
    throw Error(ErrorCode::kInsufficientSamples,
                "L = " + std::to_string(L) + " is below the identifiability floor l(l+1)/2 = " +
                    std::to_string(bar_length(l)));
  }
  if (eps <= 0.0) {
    throw Error(ErrorCode::kDimensionMismatch, "eps must be positive");
  }
  if (max_outer_iter < 1 || max_collect_steps < 1) {
    throw Error(ErrorCode::kDimensionMismatch, "iteration caps must be positive");
  }
  if (noise.std < 0.0) {
    throw Error(ErrorCode::kDimensionMismatch, "noise std must be nonnegative");
  }
  if (!K0.empty() && (K0.count() != mode_count || K0.rows() != m || K0.cols() != n)) {
    throw Error(ErrorCode::kDimensionMismatch, "K0 must be N matrices of shape m x n");
  }
  if (!Hbar0.empty()) {
    if (static_cast<int>(Hbar0.size()) != mode_count) {
      throw Error(ErrorCode::kDimensionMismatch, "Hbar0 must have one vector per mode");
    }
    for (const auto& v : Hbar0) {
      if (v.size() != bar_length(l)) {
        throw Error(ErrorCode::kDimensionMismatch, "Hbar0 vectors must have length l(l+1)/2");
      }
    }
  }
}

SimulatedPlant::SimulatedPlant(MjlsModel model, Eigen::VectorXd x0, int theta0,
                               RandomSource chain_rng)
    : model_(std::move(model)), x_(std::move(x0)), theta_(theta0), chain_rng_(chain_rng) {
  if (x_.size() != model_.n() || theta_ < 0 || theta_ >= model_.mode_count()) {
    throw Error(ErrorCode::kDimensionMismatch, "initial state or mode does not fit the plant");
  }
}

void SimulatedPlant::apply(const Eigen::VectorXd& u) {
  x_ = step(model_, x_, theta_, u);
  theta_ = sample_next_mode(theta_, model_.phi, chain_rng_);
}

void SimulatedPlant::reset_state(const Eigen::VectorXd& x) {
  if (x.size() != model_.n()) {
    throw Error(ErrorCode::kDimensionMismatch, "reset state has the wrong length");
  }
  x_ = x;
}

Trajectory collect(BlackBoxPlant& plant, const NMatrixSet& K, const LearningConfig& config,
                   RandomSource& noise_rng, RandomSource& reset_rng) {
  const int n = plant.state_dim();
  const int m = plant.input_dim();
  const int N = plant.mode_count();
  if (K.count() != N || K.rows() != m || K.cols() != n) {
    throw Error(ErrorCode::kDimensionMismatch, "gain set must be N matrices of shape m x n");
  }

  Trajectory traj;
  std::vector<long> usable_count(static_cast<std::size_t>(N), 0);
  auto all_modes_filled = [&] {
    return *std::min_element(usable_count.begin(), usable_count.end()) >= config.L;
  };

  for (long steps = 0; steps < config.max_collect_steps && !all_modes_filled(); ++steps) {
    const double norm = plant.state().norm();
    if (norm > kStateOverflowGuard || norm < kStateDecayFloor) {
      Eigen::VectorXd fresh(n);
      for (int c = 0; c < n; ++c) fresh(c) = reset_rng.uniform(-1.0, 1.0);
      plant.reset_state(fresh);
      if (norm > kStateOverflowGuard) {
        ++traj.overflow_resets;
      } else {
        ++traj.decay_resets;
      }
    }

    const Eigen::VectorXd x = plant.state();
    const int theta = plant.mode();
    Eigen::VectorXd u = -K[theta] * x;
    if (config.noise.std > 0.0) {
      for (int c = 0; c < m; ++c) u(c) += config.noise.std * noise_rng.gaussian();
    }
    plant.apply(u);
    const Eigen::VectorXd x_next = plant.state();

    // A diverging successor ends the segment: the record stays in the
    // trajectory but is kept out of the regression.
    const bool usable = x_next.allFinite() && x_next.norm() <= kStateOverflowGuard;
    traj.records.push_back(StepRecord{static_cast<long>(traj.records.size()), x, u, theta,
                                      x_next, usable});
    if (usable) ++usable_count[static_cast<std::size_t>(theta)];
  }

  if (!all_modes_filled()) {
    throw Error(ErrorCode::kModeStarvation,
                "not every mode reached " + std::to_string(config.L) + " usable samples within " +
                    std::to_string(config.max_collect_steps) + " steps");
  }
  traj.rebuild_mode_index(N);
  return traj;
}

std::pair<Eigen::MatrixXd, Eigen::VectorXd> build_regression(const Trajectory& traj,
                                                             const NMatrixSet& P_prev,
                                                             const TransitionMatrix& phi,
                                                             const CostWeights& weights, int i,
                                                             long L) {
  if (i < 0 || i >= static_cast<int>(traj.mode_index.size())) {
    throw Error(ErrorCode::kDimensionMismatch, "mode index out of range");
  }
  const Eigen::MatrixXd E = expectation_operator(P_prev, phi, i);
  const int l = static_cast<int>(weights.Q.rows() + weights.R.rows());

  Eigen::MatrixXd design(L, bar_length(l));
  Eigen::VectorXd target(L);
  long row = 0;
  for (long pos : traj.mode_index[static_cast<std::size_t>(i)]) {
    const StepRecord& rec = traj.records[static_cast<std::size_t>(pos)];
    if (!rec.usable) continue;
    Eigen::VectorXd z(l);
    z << rec.x, rec.u;
    design.row(row) = bar_z(z);
    target(row) = rec.x.dot(weights.Q[i] * rec.x) + rec.u.dot(weights.R[i] * rec.u) +
                  rec.x_next.dot(E * rec.x_next);
    if (++row == L) break;
  }
  if (row < L) {
    throw Error(ErrorCode::kInsufficientSamples,
                "mode " + std::to_string(i + 1) + " has " + std::to_string(row) +
                    " usable records, need " + std::to_string(L));
  }
  return {std::move(design), std::move(target)};
}

LsSolution ls_solve(const Eigen::MatrixXd& phi_matrix, const Eigen::VectorXd& psi) {
  if (phi_matrix.rows() != psi.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "design matrix and target length disagree");
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(phi_matrix);
  if (qr.rank() < phi_matrix.cols()) {
    throw Error(ErrorCode::kRankDeficient,
                "design matrix rank " + std::to_string(qr.rank()) + " < " +
                    std::to_string(phi_matrix.cols()) +
                    "; raise the excitation noise std or collect more samples per mode");
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(phi_matrix);
  const auto& sv = svd.singularValues();
  LsSolution out;
  out.condition_number = sv(0) / sv(sv.size() - 1);
  out.coeffs = qr.solve(psi);
  return out;
}

LearningReport q_learning(BlackBoxPlant& plant, const CostWeights& weights,
                          const TransitionMatrix& phi, const LearningConfig& config) {
  const int n = plant.state_dim();
  const int m = plant.input_dim();
  const int N = plant.mode_count();
  const int l = n + m;
  config.validate(n, m, N);
  if (phi.mode_count() != N || weights.Q.count() != N || weights.Q.rows() != n ||
      weights.R.rows() != m) {
    throw Error(ErrorCode::kDimensionMismatch, "weights or phi do not fit the plant");
  }

  RandomSource noise_rng(split_seed(config.noise.seed, kNoiseStream));
  RandomSource reset_rng(split_seed(config.noise.seed, kResetStream));

  NMatrixSet K = config.K0.empty() ? NMatrixSet::Zero(N, m, n) : config.K0;
  NMatrixSet P = NMatrixSet::Zero(N, n, n);

  LearningReport report;
  report.K_history.push_back(K);
  report.P_history.push_back(P);
  {
    std::vector<Eigen::MatrixXd> H0;
    for (int i = 0; i < N; ++i) {
      H0.push_back(config.Hbar0.empty() ? Eigen::MatrixXd::Zero(l, l)
                                        : H_from_bar_H(config.Hbar0[static_cast<std::size_t>(i)], l));
    }
    report.H_history.push_back(KernelSet(std::move(H0)));
  }

  for (int iteration = 1; iteration <= config.max_outer_iter; ++iteration) {
    try {
      Trajectory traj = collect(plant, K, config, noise_rng, reset_rng);

      std::vector<Eigen::MatrixXd> H_new, K_new, P_new;
      std::vector<double> conds;
      for (int i = 0; i < N; ++i) {
        auto [design, target] = build_regression(traj, P, phi, weights, i, config.L);
        LsSolution ls = ls_solve(design, target);
        Eigen::MatrixXd H = H_from_bar_H(ls.coeffs, l);
        Eigen::MatrixXd Ki = gain_from_kernel(H, n, m);
        P_new.push_back(P_from_kernel(H, Ki));
        H_new.push_back(std::move(H));
        K_new.push_back(std::move(Ki));
        conds.push_back(ls.condition_number);
      }

      NMatrixSet K_next{std::move(K_new)};
      const double e_K = K_next.max_abs_diff(K);
      K = std::move(K_next);
      P = NMatrixSet(std::move(P_new));

      report.K_history.push_back(K);
      report.H_history.push_back(KernelSet(std::move(H_new)));
      report.P_history.push_back(P);
      report.e_K_history.push_back(e_K);
      report.condition_numbers.push_back(std::move(conds));
      report.collect_steps.push_back(static_cast<long>(traj.records.size()));
      report.decay_resets.push_back(traj.decay_resets);
      report.overflow_resets.push_back(traj.overflow_resets);
      report.iterations = iteration;

      // The stop test sleeps through iteration 1: with the zero
      // initialization the first kernel estimate is blkdiag(Q, R), whose
      // greedy gain is again zero, so e_K would stop the loop before any
      // learning happened.
      if (iteration >= 2 && e_K <= config.eps) {
        report.converged = true;
        return report;
      }
    } catch (const Error& e) {
      if (e.code() == ErrorCode::kNoConvergence) throw;
      throw Error(e.code(), "outer iteration " + std::to_string(iteration) + ": " + e.detail());
    }
  }
  throw Error(ErrorCode::kNoConvergence,
              "e_K stayed above " + std::to_string(config.eps) + " for " +
                  std::to_string(config.max_outer_iter) + " outer iterations");
}

DatasetLengthStats estimate_dataset_length(const TransitionMatrix& phi, long L, long trials,
                                           RandomSource& rng) {
  if (L < 1 || trials < 1) {
    throw Error(ErrorCode::kDimensionMismatch, "L and trials must be positive");
  }
  const int N = phi.mode_count();
  const Eigen::VectorXd pi = stationary_distribution(phi);  // throws NotErgodic

  std::vector<long> lengths;
  lengths.reserve(static_cast<std::size_t>(trials));
  std::vector<long> counts(static_cast<std::size_t>(N));
  for (long t = 0; t < trials; ++t) {
    std::fill(counts.begin(), counts.end(), 0L);
    // First sample's mode drawn from the stationary distribution.
    const double u = rng.uniform01();
    int theta = N - 1;
    double cumulative = 0.0;
    for (int j = 0; j < N; ++j) {
      cumulative += pi(j);
      if (u < cumulative) {
        theta = j;
        break;
      }
    }
    long steps = 0;
    while (true) {
      ++counts[static_cast<std::size_t>(theta)];
      ++steps;
      if (*std::min_element(counts.begin(), counts.end()) >= L) break;
      theta = sample_next_mode(theta, phi, rng);
    }
    lengths.push_back(steps);
  }

  DatasetLengthStats stats;
  stats.trials = trials;
  double sum = 0.0;
  for (long v : lengths) sum += static_cast<double>(v);
  stats.mean = sum / static_cast<double>(trials);
  double var = 0.0;
  for (long v : lengths) {
    const double d = static_cast<double>(v) - stats.mean;
    var += d * d;
  }
  stats.stddev = std::sqrt(var / static_cast<double>(trials));
  stats.ci95_halfwidth = 1.96 * stats.stddev / std::sqrt(static_cast<double>(trials));

  std::sort(lengths.begin(), lengths.end());
  auto quantile = [&](double q) {
    const auto idx = static_cast<std::size_t>(q * static_cast<double>(trials - 1) + 0.5);
    return static_cast<double>(lengths[std::min(idx, lengths.size() - 1)]);
  };
  stats.q05 = quantile(0.05);
  stats.q25 = quantile(0.25);
  stats.q50 = quantile(0.50);
  stats.q75 = quantile(0.75);
  stats.q95 = quantile(0.95);
  return stats;
}

}  // namespace mjls
