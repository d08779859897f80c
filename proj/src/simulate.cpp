#include "mjls/simulate.hpp"

#include <string>

namespace mjls {

Policy gain_policy(const NMatrixSet& K) {
  return [K](const Eigen::VectorXd& x, int theta) -> Eigen::VectorXd { return -K[theta] * x; };
}

Eigen::VectorXd step(const MjlsModel& model, const Eigen::VectorXd& x, int theta,
                     const Eigen::VectorXd& u) {
  if (theta < 0 || theta >= model.mode_count()) {
    throw Error(ErrorCode::kDimensionMismatch, "mode index out of range in step");
  }
  if (x.size() != model.n() || u.size() != model.m()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "step expects x of length " + std::to_string(model.n()) + " and u of length " +
                    std::to_string(model.m()));
  }
  return model.A[theta] * x + model.B[theta] * u;
}

Trajectory simulate(const MjlsModel& model, const Policy& policy, const Eigen::VectorXd& x0,
                    int theta0, long T, const NoiseSpec& noise, RandomSource& rng) {
  if (T < 1) {
    throw Error(ErrorCode::kDimensionMismatch, "horizon must be at least 1");
  }
  if (x0.size() != model.n() || theta0 < 0 || theta0 >= model.mode_count()) {
    throw Error(ErrorCode::kDimensionMismatch, "initial state or mode does not fit the model");
  }

  Trajectory traj;
  traj.records.reserve(static_cast<std::size_t>(T));
  Eigen::VectorXd x = x0;
  int theta = theta0;
  for (long k = 0; k < T; ++k) {
    // Fixed draw order per step: mode transition first, then excitation.
    const int theta_next = sample_next_mode(theta, model.phi, rng);
    Eigen::VectorXd u = policy(x, theta);
    if (u.size() != model.m()) {
      throw Error(ErrorCode::kDimensionMismatch, "policy returned an input of the wrong length");
    }
    if (noise.std > 0.0) {
      for (Eigen::Index c = 0; c < u.size(); ++c) u(c) += noise.std * rng.gaussian();
    }
    Eigen::VectorXd x_next = step(model, x, theta, u);
    if (!x_next.allFinite() || x_next.norm() > kStateOverflowGuard) {
      throw Error(ErrorCode::kNonFiniteState,
                  "state norm passed " + std::to_string(kStateOverflowGuard) + " at step " +
                      std::to_string(k) + "; the closed loop is diverging");
    }
    traj.records.push_back(StepRecord{k, x, u, theta, x_next, true});
    x = std::move(x_next);
    theta = theta_next;
  }
  traj.rebuild_mode_index(model.mode_count());
  return traj;
}

Trajectory simulate(const MjlsModel& model, const NMatrixSet& K, const Eigen::VectorXd& x0,
                    int theta0, long T, const NoiseSpec& noise, RandomSource& rng) {
  if (K.count() != model.mode_count() || K.rows() != model.m() || K.cols() != model.n()) {
    throw Error(ErrorCode::kDimensionMismatch, "gain set must be N matrices of shape m x n");
  }
  return simulate(model, gain_policy(K), x0, theta0, T, noise, rng);
}

}  // namespace mjls
