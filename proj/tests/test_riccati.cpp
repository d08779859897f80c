#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <cmath>

#include "mjls/riccati.hpp"
#include "mjls/simulate.hpp"
#include "support.hpp"

using namespace mjls;
using namespace mjls::testing;

namespace {

// Independent classical discrete Riccati iteration for a single-mode
// plant; deliberately coded without the coupled-operator machinery.
Eigen::MatrixXd classical_dare(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                               const Eigen::MatrixXd& Q, const Eigen::MatrixXd& R, double tol) {
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(A.rows(), A.cols());
  for (int it = 0; it < 100000; ++it) {
    const Eigen::MatrixXd G = R + B.transpose() * P * B;
    const Eigen::MatrixXd next = Q + A.transpose() * P * A -
                                 A.transpose() * P * B * G.inverse() * B.transpose() * P * A;
    if ((next - P).cwiseAbs().maxCoeff() < tol) return next;
    P = next;
  }
  return P;
}

// Random plant small enough that value iteration usually converges; the
// caller excludes the runs that do not.
struct RandomPlant {
  MjlsModel model;
  CostWeights weights;
};

RandomPlant random_plant(RandomSource& rng) {
  const int n = 1 + static_cast<int>(rng.uniform01() * 3.0);       // 1..3
  const int m = 1 + static_cast<int>(rng.uniform01() * 2.0);       // 1..2
  const int N = 1 + static_cast<int>(rng.uniform01() * 3.0);       // 1..3
  std::vector<Eigen::MatrixXd> A, B, Q, R;
  for (int i = 0; i < N; ++i) {
    Eigen::MatrixXd Ai(n, n), Bi(n, m), G(n, n);
    for (int r = 0; r < n; ++r) {
      for (int c = 0; c < n; ++c) {
        Ai(r, c) = rng.uniform(-1, 1);
        G(r, c) = rng.uniform(-1, 1);
      }
      for (int c = 0; c < m; ++c) Bi(r, c) = rng.uniform(-1, 1);
    }
    A.push_back(Ai);
    B.push_back(Bi);
    Q.push_back(G.transpose() * G + 0.1 * Eigen::MatrixXd::Identity(n, n));
    Eigen::VectorXd rdiag(m);
    for (int c = 0; c < m; ++c) rdiag(c) = rng.uniform(0.5, 2.0);
    R.push_back(rdiag.asDiagonal());
  }
  Eigen::MatrixXd phi(N, N);
  for (int r = 0; r < N; ++r) {
    double row_sum = 0.0;
    for (int c = 0; c < N; ++c) {
      phi(r, c) = rng.uniform(0.05, 1.0);
      row_sum += phi(r, c);
    }
    phi.row(r) /= row_sum;
  }
  return RandomPlant{MjlsModel(NMatrixSet(A), NMatrixSet(B), TransitionMatrix(phi)),
                     CostWeights{NMatrixSet(Q), NMatrixSet(R)}};
}

}  // namespace

TEST_CASE("expectation_operator closed forms") {
  NMatrixSet P(std::vector<Eigen::MatrixXd>{mat2(1, 2, 3, 4), mat2(5, 6, 7, 8)});
  TransitionMatrix identity(Eigen::MatrixXd::Identity(2, 2));
  CHECK((expectation_operator(P, identity, 0) - P[0]).norm() == 0.0);
  CHECK((expectation_operator(P, identity, 1) - P[1]).norm() == 0.0);

  NMatrixSet eye(std::vector<Eigen::MatrixXd>{Eigen::MatrixXd::Identity(2, 2),
                                              Eigen::MatrixXd::Identity(2, 2)});
  const auto model = benchmark_model();
  CHECK((expectation_operator(eye, model.phi, 0) - Eigen::MatrixXd::Identity(2, 2)).norm() ==
        doctest::Approx(0.0));

  NMatrixSet scaled(std::vector<Eigen::MatrixXd>{Eigen::MatrixXd::Identity(2, 2),
                                                 2.0 * Eigen::MatrixXd::Identity(2, 2)});
  Eigen::MatrixXd expected = 1.3 * Eigen::MatrixXd::Identity(2, 2);
  CHECK((expectation_operator(scaled, model.phi, 0) - expected).cwiseAbs().maxCoeff() < 1e-15);

  CHECK_THROWS_AS(expectation_operator(NMatrixSet::Zero(3, 2, 2), model.phi, 0), Error);
}

TEST_CASE("gain_from_P degenerate cases") {
  const auto model = benchmark_model();
  const auto weights = benchmark_weights();
  CHECK(gain_from_P(NMatrixSet::Zero(2, 2, 2), model, weights, 0).norm() == 0.0);

  MjlsModel no_input(model.A, NMatrixSet::Zero(2, 2, 1), model.phi);
  NMatrixSet P(std::vector<Eigen::MatrixXd>{benchmark_P1(), benchmark_P2()});
  CHECK(gain_from_P(P, no_input, weights, 0).norm() == 0.0);
  CHECK(gain_from_P(P, no_input, weights, 1).norm() == 0.0);
}

TEST_CASE("value_iteration: zero dynamics converge in one sweep") {
  NMatrixSet A = NMatrixSet::Zero(2, 2, 2);
  NMatrixSet B(std::vector<Eigen::MatrixXd>{col2(1, 0), col2(0, 1)});
  MjlsModel model(A, B, benchmark_model().phi);
  const auto vm = validate_model(model, benchmark_weights());
  const auto solution = value_iteration(vm);
  CHECK(solution.iterations == 1);
  CHECK((solution.P[0] - vm.weights.Q[0]).cwiseAbs().maxCoeff() == 0.0);
  CHECK((solution.P[1] - vm.weights.Q[1]).cwiseAbs().maxCoeff() == 0.0);
  CHECK(solution.K.max_abs() == 0.0);
}

TEST_CASE("value_iteration: scalar plant matches the quadratic-formula solution") {
  // p = q + a^2 p - a^2 b^2 p^2 / (r + b^2 p) with a=0.5, b=1, q=r=1
  // collapses to p^2 - 0.25 p - 1 = 0.
  const double p_expected = (0.25 + std::sqrt(0.0625 + 4.0)) / 2.0;
  const double k_expected = p_expected * 0.5 / (1.0 + p_expected);

  const auto vm = validate_model(scalar_model(), scalar_weights());
  const auto solution = value_iteration(vm);
  CHECK(solution.P[0](0, 0) == doctest::Approx(p_expected).epsilon(1e-9));
  CHECK(solution.K[0](0, 0) == doctest::Approx(k_expected).epsilon(1e-9));
  CHECK(solution.P[0](0, 0) == doctest::Approx(1.1327822185).epsilon(1e-8));
  CHECK(solution.K[0](0, 0) == doctest::Approx(0.2655644371).epsilon(1e-8));
}

TEST_CASE("value_iteration: benchmark plant reaches the cross-checked fixed point") {
  const auto vm = validate_model(benchmark_model(), benchmark_weights());
  const auto solution = value_iteration(vm, 1e-10);

  CHECK((solution.K[0] - benchmark_K1()).cwiseAbs().maxCoeff() < 1e-6);
  CHECK((solution.K[1] - benchmark_K2()).cwiseAbs().maxCoeff() < 1e-6);
  CHECK((solution.P[0] - benchmark_P1()).cwiseAbs().maxCoeff() < 1e-6);
  CHECK((solution.P[1] - benchmark_P2()).cwiseAbs().maxCoeff() < 1e-6);

  // The published gains for this plant are printed to three decimals and
  // carry about 1.2e-3 of rounding/estimation slack against the exact
  // fixed point.
  Eigen::MatrixXd published1(1, 2), published2(1, 2);
  published1 << 0.354, 0.273;
  published2 << 0.460, -0.551;
  CHECK((solution.K[0] - published1).cwiseAbs().maxCoeff() < 1.5e-3);
  CHECK((solution.K[1] - published2).cwiseAbs().maxCoeff() < 1.5e-3);

  CHECK(solution.iterations > 30);
  CHECK(solution.iterations < 80);
  CHECK(solution.residual < 1e-10);

  // gain_from_P at the converged P reproduces the stored gains.
  CHECK((gain_from_P(solution.P, vm.model, vm.weights, 0) - solution.K[0]).norm() < 1e-12);
}

TEST_CASE("value_iteration reports divergence for an unstabilizable plant") {
  NMatrixSet A(std::vector<Eigen::MatrixXd>{scalar_mat(2.0)});
  NMatrixSet B(std::vector<Eigen::MatrixXd>{scalar_mat(0.0)});
  MjlsModel model(A, B, TransitionMatrix(Eigen::MatrixXd::Ones(1, 1)));
  const auto vm = validate_model(model, scalar_weights());
  try {
    value_iteration(vm);
    FAIL("divergence not reported");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kNoConvergence);
  }
}

TEST_CASE("care_residual fixed-point defect") {
  const auto model = benchmark_model();
  const auto weights = benchmark_weights();

  CHECK(care_residual(NMatrixSet::Zero(2, 2, 2), model, weights) == doctest::Approx(5.0));

  const auto vm = validate_model(model, weights);
  const auto solution = value_iteration(vm, 1e-10);
  CHECK(care_residual(solution.P, model, weights) < 1e-8);

  // A = B = 0 makes P = Q an exact fixed point.
  MjlsModel degenerate(NMatrixSet::Zero(2, 2, 2), NMatrixSet::Zero(2, 2, 1), model.phi);
  CHECK(care_residual(weights.Q, degenerate, weights) == 0.0);
}

TEST_CASE("optimal_cost quadratic form and Monte-Carlo cross-check") {
  NMatrixSet eye(std::vector<Eigen::MatrixXd>{Eigen::MatrixXd::Identity(2, 2),
                                              Eigen::MatrixXd::Identity(2, 2)});
  Eigen::VectorXd x(2);
  x << 3.0, 4.0;
  CHECK(optimal_cost(eye, x, 0) == doctest::Approx(25.0));
  CHECK(optimal_cost(eye, Eigen::VectorXd::Zero(2), 1) == 0.0);

  // Average accumulated stage cost under the optimal policy over seeded
  // rollouts must match x0^T P_theta0 x0; the horizon tail is negligible
  // because the closed loop contracts geometrically.
  const auto vm = validate_model(benchmark_model(), benchmark_weights());
  const auto solution = value_iteration(vm);
  Eigen::VectorXd x0(2);
  x0 << 1.0, 0.0;
  const double expected = optimal_cost(solution.P, x0, 0);

  RandomSource rng(314);
  const int rollouts = 10000;
  double total = 0.0;
  for (int r = 0; r < rollouts; ++r) {
    Trajectory traj = simulate(vm.model, solution.K, x0, 0, 200, NoiseSpec{}, rng);
    for (const auto& rec : traj.records) {
      total += rec.x.dot(vm.weights.Q[rec.theta] * rec.x) +
               rec.u.dot(vm.weights.R[rec.theta] * rec.u);
    }
  }
  const double mc_mean = total / rollouts;
  CHECK(std::abs(mc_mean - expected) / expected < 0.02);
}

TEST_CASE("ms_stability_radius: deadbeat, regulated and open loop") {
  // n = m with B = I and K = A zeroes the closed loop exactly.
  NMatrixSet A(std::vector<Eigen::MatrixXd>{mat2(0.3, 0.1, 0.0, 0.2), mat2(0.0, 0.5, 0.5, 0.0)});
  NMatrixSet B(std::vector<Eigen::MatrixXd>{Eigen::MatrixXd::Identity(2, 2),
                                            Eigen::MatrixXd::Identity(2, 2)});
  MjlsModel square(A, B, benchmark_model().phi);
  CHECK(ms_stability_radius(square, A) < 1e-12);

  const auto vm = validate_model(benchmark_model(), benchmark_weights());
  const auto solution = value_iteration(vm);
  const double rho_closed = ms_stability_radius(vm.model, solution.K);
  CHECK(rho_closed < 1.0);
  CHECK(rho_closed == doctest::Approx(0.6060945343).epsilon(1e-6));

  // The open loop of this plant is itself mean-square stable: mode 2 is
  // strongly contractive and visited often enough to dominate the mild
  // mode-1 growth.
  const double rho_open = ms_stability_radius(vm.model, NMatrixSet::Zero(2, 1, 2));
  CHECK(rho_open < 1.0);
  CHECK(rho_open == doctest::Approx(0.9297759495).epsilon(1e-6));
}

TEST_CASE("ms_stability_radius matches the exact second-moment recursion rate") {
  // Independent route: propagate X_j(k+1) = sum_i p_ij Abar_i X_i Abar_i^T
  // and compare the asymptotic decay ratio of trace sums with the lifted
  // spectral radius.
  const auto model = benchmark_model();
  const NMatrixSet K = NMatrixSet::Zero(2, 1, 2);
  const double rho = ms_stability_radius(model, K);

  std::vector<Eigen::MatrixXd> X{mat2(1, 0, 0, 0), Eigen::MatrixXd::Zero(2, 2)};
  double prev = 0.0, ratio = 0.0;
  for (int k = 0; k < 260; ++k) {
    const double trace = X[0].trace() + X[1].trace();
    if (k >= 250) ratio = trace / prev;
    prev = trace;
    std::vector<Eigen::MatrixXd> Xn(2, Eigen::MatrixXd::Zero(2, 2));
    for (int j = 0; j < 2; ++j) {
      for (int i = 0; i < 2; ++i) {
        Xn[j] += model.phi(i, j) * model.A[i] * X[i] * model.A[i].transpose();
      }
    }
    X = Xn;
  }
  CHECK(ratio == doctest::Approx(rho).epsilon(1e-9));

  // A destabilizing gain tips the radius above one.
  NMatrixSet bad(std::vector<Eigen::MatrixXd>{(Eigen::MatrixXd(1, 2) << -3.0, 0.0).finished(),
                                              (Eigen::MatrixXd(1, 2) << -3.0, 0.0).finished()});
  CHECK(ms_stability_radius(model, bad) > 1.0);
}

TEST_CASE("value iteration iterates are monotone and bounded") {
  const auto vm = validate_model(benchmark_model(), benchmark_weights());
  const auto solution = value_iteration(vm, 1e-10, 10000, /*record_iterates=*/true);
  REQUIRE(solution.iterates.size() > 2);

  for (std::size_t j = 0; j + 1 < solution.iterates.size(); ++j) {
    for (int i = 0; i < 2; ++i) {
      const Eigen::MatrixXd diff = solution.iterates[j + 1][i] - solution.iterates[j][i];
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(diff);
      CHECK(es.eigenvalues().minCoeff() >= -1e-9);
      // Bounded by the converged kernel.
      CHECK(solution.iterates[j][i].cwiseAbs().maxCoeff() <=
            solution.P[i].cwiseAbs().maxCoeff() + 1e-10);
    }
  }
}

TEST_CASE("returned kernels are exactly symmetric") {
  const auto vm = validate_model(benchmark_model(), benchmark_weights());
  const auto solution = value_iteration(vm);
  for (int i = 0; i < 2; ++i) {
    CHECK((solution.P[i] - solution.P[i].transpose()).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("single-mode solutions agree with an independent classical iteration") {
  RandomSource rng(17);
  int tested = 0;
  while (tested < 10) {
    RandomPlant plant = [&] {
      // Force N = 1 by resampling until the generator yields one mode.
      for (;;) {
        RandomPlant p = random_plant(rng);
        if (p.model.mode_count() == 1) return p;
      }
    }();
    const auto vm = validate_model(plant.model, plant.weights);
    RiccatiSolution solution;
    try {
      solution = value_iteration(vm, 1e-12, 20000);
    } catch (const Error&) {
      continue;  // not stabilizable; draw another plant
    }
    const Eigen::MatrixXd reference =
        classical_dare(plant.model.A[0], plant.model.B[0], plant.weights.Q[0],
                       plant.weights.R[0], 1e-13);
    CHECK((solution.P[0] - reference).cwiseAbs().maxCoeff() < 1e-9);
    ++tested;
  }
}

TEST_CASE("converged gains certify mean-square stability on random plants") {
  RandomSource rng(23);
  int converged = 0;
  int attempts = 0;
  while (converged < 20 && attempts < 200) {
    ++attempts;
    RandomPlant plant = random_plant(rng);
    try {
      const auto vm = validate_model(plant.model, plant.weights);
      const auto solution = value_iteration(vm);
      CHECK(ms_stability_radius(plant.model, solution.K) < 1.0);
      ++converged;
    } catch (const Error&) {
      continue;
    }
  }
  CHECK(converged == 20);
}
