#pragma once

#include <functional>

#include "mjls/model.hpp"
#include "mjls/trajectory.hpp"

namespace mjls {

// Divergence guard: a state 2-norm beyond this raises NonFiniteState in
// simulate() and triggers re-randomization in collect(). Unstable
// exploration phases are expected during learning, so divergence is a
// typed signal rather than NaN propagation.
inline constexpr double kStateOverflowGuard = 1e12;

// collect() re-randomizes the state below this norm to keep regressors
// informative once an intermediate policy is stabilizing.
inline constexpr double kStateDecayFloor = 1e-6;

// Feedback policy u = pi(x, theta); theta 0-based.
using Policy = std::function<Eigen::VectorXd(const Eigen::VectorXd&, int)>;

// Linear policy u = -K_theta x.
Policy gain_policy(const NMatrixSet& K);

// One plant step A_theta x + B_theta u. Throws DimensionMismatch if the
// vectors do not fit the model.
Eigen::VectorXd step(const MjlsModel& model, const Eigen::VectorXd& x, int theta,
                     const Eigen::VectorXd& u);

// Simulates T closed-loop steps from (x0, theta0). The stored u is the
// applied input, excitation included. Per step the rng is consumed in a
// fixed documented order: first one uniform for the mode transition, then
// (if noise.std > 0) two uniforms per input component for the Gaussian
// excitation. Throws NonFiniteState when the state norm passes the
// overflow guard.
Trajectory simulate(const MjlsModel& model, const Policy& policy, const Eigen::VectorXd& x0,
                    int theta0, long T, const NoiseSpec& noise, RandomSource& rng);

Trajectory simulate(const MjlsModel& model, const NMatrixSet& K, const Eigen::VectorXd& x0,
                    int theta0, long T, const NoiseSpec& noise, RandomSource& rng);

}  // namespace mjls
