#include <doctest.h>

#include <cmath>
#include <random>

#include "generators.hpp"
#include "oracles.hpp"
#include "tvfj/certificates.hpp"
#include "tvfj/dynamics.hpp"
#include "tvfj/presets.hpp"

using namespace tvfj;

TEST_CASE("simulate reduces to DeGroot when lambda is the identity") {
  gen::Rng rng(11);
  Eigen::MatrixXd w(3, 3);
  w << 0.2, 0.8, 0.0, 0.5, 0.5, 0.0, 0.1, 0.4, 0.5;
  const Schedule schedule = Schedule::periodic(
      {{SusceptibilityMatrix::identity(3), InfluenceMatrix(w)}});
  const OpinionVector x0(gen::unit_vector(rng, 3));

  const Trajectory with_s = simulate(x0, OpinionVector(Eigen::Vector3d(0.9, 0.1, 0.5)),
                                     schedule, 20);
  const Trajectory without_s = simulate(x0, OpinionVector::zeros(3), schedule, 20);
  Eigen::VectorXd expected = x0.values();
  for (int t = 0; t < 20; ++t) expected = w * expected;
  CHECK((with_s.back().values() - expected).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK((with_s.back().values() - without_s.back().values()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("fully anchored schedule pins the state to s") {
  const Eigen::Index n = 3;
  const Schedule schedule = Schedule::periodic(
      {{SusceptibilityMatrix::uniform(n, 0.0), InfluenceMatrix(Eigen::MatrixXd::Zero(n, n))}});
  const OpinionVector x0(Eigen::Vector3d(0.1, 0.5, 0.9));
  const OpinionVector s(Eigen::Vector3d(0.4, 0.6, 0.2));
  const Trajectory trajectory = simulate(x0, s, schedule, 5);
  for (std::size_t t = 1; t < trajectory.size(); ++t) {
    CHECK((trajectory[t].values() - s.values()).cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("assumption 2 enforcement rejects the same schedule") {
    SimulateOptions strict;
    strict.enforce_assumption2 = true;
    CHECK_THROWS_WITH_AS(simulate(x0, s, schedule, 5, strict),
                         doctest::Contains("Assumption 2 violated at t=0"), ValidationError);
  }
}

TEST_CASE("rule schedule validation errors name the time step") {
  const Schedule schedule = Schedule::from_rule(2, [](int t) {
    if (t == 3) {
      // Assumption 1 violation: zero row against nonzero lambda
      return StepFactors{SusceptibilityMatrix(Eigen::Vector2d(0.5, 1.0)),
                         InfluenceMatrix(Eigen::MatrixXd::Zero(2, 2))};
    }
    return StepFactors{SusceptibilityMatrix::identity(2), InfluenceMatrix::identity(2)};
  });
  const OpinionVector x0(Eigen::Vector2d(0.5, 0.5));
  CHECK_THROWS_WITH_AS(simulate(x0, x0, schedule, 10),
                       doctest::Contains("t=3"), ValidationError);
}

TEST_CASE("simulate agrees with the closed form on random instances") {
  gen::Rng rng(99);
  std::uniform_int_distribution<int> n_dist(1, 6);
  std::uniform_int_distribution<int> h_dist(0, 40);
  for (int rep = 0; rep < 300; ++rep) {
    const Eigen::Index n = n_dist(rng);
    const int horizon = h_dist(rng);
    const auto factors = gen::random_factor_sequence(rng, n, horizon == 0 ? 1 : horizon);
    const Schedule schedule = Schedule::explicit_sequence(factors);
    const OpinionVector x0(gen::unit_vector(rng, n));
    const OpinionVector s(gen::unit_vector(rng, n));
    const Trajectory trajectory = simulate(x0, s, schedule, horizon);
    REQUIRE(trajectory.size() == static_cast<std::size_t>(horizon) + 1);
    const OpinionVector direct = closed_form_solution(
        x0, s, std::span<const StepFactors>(factors).first(static_cast<std::size_t>(horizon)));
    CHECK((trajectory.back().values() - direct.values()).cwiseAbs().maxCoeff() <= 1e-10);
  }
}

TEST_CASE("zero-input trajectories") {
  SUBCASE("zero start stays zero") {
    const Schedule schedule = presets::example3_schedule();
    const Trajectory trajectory = simulate_zero_input(OpinionVector::zeros(5), schedule, 50);
    for (const OpinionVector& x : trajectory) CHECK(x.values().maxCoeff() == 0.0);
  }
  SUBCASE("stable periodic preset decays") {
    const Schedule schedule = presets::example3_schedule();
    const OpinionVector x0(Eigen::VectorXd::Constant(5, 1.0));
    const Trajectory trajectory = simulate_zero_input(x0, schedule, 2000);
    CHECK(trajectory.back().values().maxCoeff() <= 1e-6);
  }
  SUBCASE("example1 norm plateaus above 0.4") {
    const Schedule schedule = presets::example1_schedule();
    const auto trace = transition_norm_trace(schedule, 10000);
    CHECK(trace.back() >= 0.4);
    CHECK(trace.back() <= 0.51);
    for (std::size_t k = 1; k < trace.size(); ++k) CHECK(trace[k] <= trace[k - 1] + 1e-12);
  }
}

TEST_CASE("trust_based_resolve") {
  const TrustConfig config{
      presets::example_trust_matrix(),
      [](int t) {
        return t % 2 == 0 ? presets::example_adjacency_2() : presets::example_adjacency_1();
      },
      SusceptibilityRule::uniform(5, 0.9)};

  SUBCASE("network-2 row of agent v2 renormalizes the surviving trust") {
    const StepFactors f = trust_based_resolve(config, 0);
    Eigen::VectorXd expected(5);
    expected << 0.5, 0.0, 0.5, 0.0, 0.0;
    CHECK((f.weights.entries().row(1).transpose() - expected).cwiseAbs().maxCoeff() <= 1e-15);
    CHECK(f.susceptibility[1] == doctest::Approx(0.9));
  }
  SUBCASE("full adjacency returns the trust row unchanged") {
    const TrustConfig full{
        presets::example_trust_matrix(),
        [](int) { return Eigen::MatrixXi::Ones(5, 5); },
        SusceptibilityRule::uniform(5, 0.8)};
    const StepFactors f = trust_based_resolve(full, 7);
    CHECK((f.weights.entries().row(3) - presets::example_trust_matrix().entries().row(3))
              .cwiseAbs()
              .maxCoeff() <= 1e-15);
  }
  SUBCASE("empty adjacency row yields a zero row and lambda 0") {
    TrustConfig isolated = config;
    isolated.adjacency_schedule = [](int) {
      Eigen::MatrixXi a = Eigen::MatrixXi::Ones(5, 5);
      a.row(2).setZero();
      return a;
    };
    const StepFactors f = trust_based_resolve(isolated, 0);
    CHECK(f.weights.row_is_zero(2));
    CHECK(f.susceptibility[2] == 0.0);
    CHECK_FALSE(f.weights.row_is_zero(3));
  }
  SUBCASE("resolved rows are row-stochastic exactly when lambda is nonzero") {
    gen::Rng rng(4242);
    for (int rep = 0; rep < 50; ++rep) {
      const StepFactors f = trust_based_resolve(config, static_cast<int>(rng() % 100));
      for (Eigen::Index i = 0; i < 5; ++i) {
        if (f.susceptibility[i] == 0.0) {
          CHECK(f.weights.row_is_zero(i));
        } else {
          CHECK(f.weights.entries().row(i).sum() == doctest::Approx(1.0).epsilon(1e-12));
        }
      }
    }
  }
}

TEST_CASE("susceptibility rule table") {
  const SusceptibilityRule rule = SusceptibilityRule::table(
      Eigen::Vector2d(0.5, 0.7), {{{0, {1}}, 0.25}});
  CHECK(rule(0, {1}) == 0.25);
  CHECK(rule(0, {0, 1}) == 0.5);   // fallback
  CHECK(rule(1, {0}) == 0.7);      // fallback
  CHECK(rule(1, {}) == 0.0);       // f(empty) = 0 always
  CHECK_THROWS_AS(SusceptibilityRule::table(Eigen::Vector2d(0.5, 0.7), {{{0, {}}, 0.5}}),
                  ValidationError);
}

TEST_CASE("perturbed system") {
  gen::Rng rng(808);
  const auto phases = gen::psfj_phases(rng, 4, 3);
  const Schedule nominal = Schedule::periodic(phases);
  const OpinionVector x0(gen::unit_vector(rng, 4));
  const OpinionVector s(gen::unit_vector(rng, 4));

  SUBCASE("zero perturbation reproduces the nominal trajectory bitwise") {
    const PerturbedSystem system(nominal,
                                 [](int) { return Eigen::MatrixXd::Zero(4, 4); });
    const PerturbedRun run = simulate_perturbed(x0, s, system, 60);
    const Trajectory reference = simulate(x0, s, nominal, 60);
    for (std::size_t t = 0; t < run.trajectory.size(); ++t) {
      CHECK((run.trajectory[t].values() - reference[t].values()).cwiseAbs().maxCoeff() <= 1e-15);
    }
    for (const double norm : run.perturbation_norms) CHECK(norm == 0.0);
  }
  SUBCASE("row-sum-zero perturbation keeps D = I - Lambda exactly") {
    // Exactly representable shifts keep the row sums at zero in binary.
    const auto perturb = [&phases](int t) {
      const StepFactors& f = phases[static_cast<std::size_t>(t % 3)];
      const Eigen::MatrixXd b = f.susceptibility.diag().asDiagonal() * f.weights.entries();
      Eigen::MatrixXd e = Eigen::MatrixXd::Zero(4, 4);
      const double m = std::min(0.0625, b(1, 0) / 2);
      e(1, 0) = -m;
      e(1, 2) = m;
      return e;
    };
    const PerturbedSystem system(nominal, perturb);
    for (int t = 0; t < 6; ++t) {
      const auto [p, d] = system.resolve(t);
      const StepFactors f = nominal.at(t);
      CHECK((d - (Eigen::VectorXd::Ones(4) - f.susceptibility.diag())).cwiseAbs().maxCoeff() ==
            0.0);
      CHECK(p.minCoeff() >= 0.0);
    }
    const PerturbedRun run = simulate_perturbed(x0, s, system, 40);
    CHECK(run.trajectory.size() == 41);
  }
  SUBCASE("perturbation at half the certified budget still converges") {
    const auto systems = build_phase_systems(phases);
    const auto cert = periodic_cycle_certificate(systems);
    const double budget = robustness_threshold(cert).threshold;
    const double half_each = 0.25 * budget;  // row 1-norm = half the budget
    const PerturbedSystem system(nominal, [half_each](int t) {
      Eigen::MatrixXd e = Eigen::MatrixXd::Zero(4, 4);
      e(1, 0) = -half_each;
      e(1, 2 + t % 2) = half_each;
      return e;
    });
    const PerturbedRun run = simulate_perturbed(x0, s, system, 4000);
    for (const double norm : run.perturbation_norms) {
      CHECK(norm == doctest::Approx(0.5 * budget).epsilon(1e-12));
    }
    // converged: consecutive combined cycles agree (schedule period 3,
    // perturbation period 2, so the joint system repeats every 6 steps)
    const Eigen::VectorXd last = run.trajectory.back().values();
    const Eigen::VectorXd previous_cycle =
        run.trajectory[run.trajectory.size() - 1 - 6].values();
    CHECK((last - previous_cycle).cwiseAbs().maxCoeff() <= 1e-9);
    // and the limit stays near the unperturbed fixed point
    const auto nominal_fp = phase_fixed_points(systems, s);
    double best = 1e9;
    for (const OpinionVector& point : nominal_fp.distinct.points) {
      best = std::min(best, (last - point.values()).cwiseAbs().maxCoeff());
    }
    CHECK(best <= 0.25);
  }
  SUBCASE("nonnegativity violations are caught and name t") {
    // D is derived from the remark formula, so (P+D)1 = 1 holds by
    // construction; what can break is P >= 0 or D >= 0.
    const PerturbedSystem inflate(nominal, [](int t) {
      Eigen::MatrixXd e = Eigen::MatrixXd::Zero(4, 4);
      if (t == 2) e(0, 0) = 1.1;  // pushes d_0 = 1 - lambda_0 - 1.1 below zero
      return e;
    });
    CHECK_THROWS_WITH_AS(simulate_perturbed(x0, s, inflate, 10),
                         doctest::Contains("t=2"), ValidationError);
    const PerturbedSystem negate(nominal, [](int t) {
      Eigen::MatrixXd e = Eigen::MatrixXd::Zero(4, 4);
      if (t == 1) e(2, 0) = -2.0;  // P(2,0) would go negative
      return e;
    });
    CHECK_THROWS_WITH_AS(simulate_perturbed(x0, s, negate, 10),
                         doctest::Contains("t=1"), ValidationError);
  }
}

TEST_CASE("semi-periodic schedules carry their period tag") {
  gen::Rng rng(61);
  const auto factors = gen::spfj_instance(rng, 3, 10, 0.2, 0.4);
  const Schedule schedule = Schedule::semi_periodic(
      2, 3, [factors](int t) { return factors[static_cast<std::size_t>(t % 10)]; });
  CHECK(schedule.kind() == ScheduleKind::semi_periodic);
  CHECK(schedule.semi_period() == 2);
  CHECK_FALSE(schedule.period().has_value());
  CHECK(schedule.at(4).weights.size() == 3);
}

TEST_CASE("example2 switching times") {
  SUBCASE("head of the sequence") {
    const auto times = example2_switching_times(2, 30);
    // oracle: direct recursion t_k = t_{k-1} + floor(ln(t_{k-1}+1)) + d
    std::vector<int> expected{1};
    while (true) {
      const int last = expected.back();
      const int next = last + static_cast<int>(std::floor(std::log(last + 1.0))) + 2;
      if (next > 30) break;
      expected.push_back(next);
    }
    CHECK(times == expected);
    REQUIRE(times.size() >= 2);
    CHECK(times[0] == 1);
    CHECK(times[1] == 3);  // 1 + floor(ln 2) + 2
  }
  SUBCASE("gaps are at least d and grow without bound") {
    const auto times = example2_switching_times(2, 100000);
    int previous_gap = 0;
    for (std::size_t k = 1; k < times.size(); ++k) {
      const int gap = times[k] - times[k - 1];
      CHECK(gap >= 2);
      CHECK(gap >= previous_gap);  // floor(log) is nondecreasing
      previous_gap = gap;
    }
    CHECK(previous_gap >= 13);  // floor(ln 1e5) + 2
  }
}

TEST_CASE("example2 trajectory reproduces the alternating-network behavior") {
  const Schedule schedule = presets::example2_schedule(2);
  const OpinionVector s = presets::example_innate();
  const Trajectory trajectory = simulate(s, s, schedule, 500);
  const Eigen::VectorXd final_state = trajectory.back().values();
  CHECK(final_state(0) == doctest::Approx(0.5).epsilon(1e-12));
  for (Eigen::Index i = 1; i < 5; ++i) {
    CHECK(final_state(i) > 0.5);
    CHECK(final_state(i) < 1.0);
  }
  // consensus-like: the non-anchored agents cluster tightly
  const double spread = final_state.tail(4).maxCoeff() - final_state.tail(4).minCoeff();
  CHECK(spread < 0.05);
}
