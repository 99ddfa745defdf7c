#include <doctest.h>

#include <random>

#include "generators.hpp"
#include "oracles.hpp"
#include "tvfj/stochastic_core.hpp"

using namespace tvfj;

TEST_CASE("max_row_sum_norm on fixed matrices") {
  CHECK(max_row_sum_norm(Eigen::MatrixXd::Identity(3, 3)) == 1.0);
  CHECK(max_row_sum_norm(Eigen::MatrixXd::Zero(2, 2)) == 0.0);
  Eigen::MatrixXd m(2, 2);
  m << 0.2, 0.3, 0.5, 0.6;
  CHECK(max_row_sum_norm(m) == doctest::Approx(1.1).epsilon(1e-15));
  CHECK_THROWS_AS(max_row_sum_norm(Eigen::MatrixXd()), DimensionError);
}

TEST_CASE("opinion vector bounds") {
  CHECK_NOTHROW(OpinionVector(Eigen::Vector3d(0.0, 0.5, 1.0)));
  CHECK_THROWS_AS(OpinionVector(Eigen::Vector3d(0.0, 0.5, 1.1)), ValidationError);
  CHECK_THROWS_AS(OpinionVector(Eigen::Vector3d(-0.2, 0.5, 1.0)), ValidationError);
}

TEST_CASE("influence matrix row stochasticity") {
  Eigen::MatrixXd bad(2, 2);
  bad << 0.5, 0.4, 0.0, 1.0;
  CHECK_THROWS_AS(InfluenceMatrix{bad}, ValidationError);
  Eigen::MatrixXd zero_row(2, 2);
  zero_row << 0.0, 0.0, 0.3, 0.7;
  CHECK_NOTHROW(InfluenceMatrix{zero_row});
  CHECK(InfluenceMatrix(zero_row).row_is_zero(0));
  CHECK_FALSE(InfluenceMatrix(zero_row).row_is_zero(1));
  // normalization only on request
  Eigen::MatrixXd raw(2, 2);
  raw << 2.0, 2.0, 0.0, 5.0;
  const InfluenceMatrix normalized = InfluenceMatrix::normalized(raw);
  CHECK(normalized.entries()(0, 0) == doctest::Approx(0.5));
  CHECK(normalized.entries()(1, 1) == doctest::Approx(1.0));
}

TEST_CASE("step_factor fixed examples and assumption 1") {
  const Eigen::Index n = 2;
  Eigen::MatrixXd w(2, 2);
  w << 0.5, 0.5, 1.0, 0.0;
  const InfluenceMatrix influence(w);

  SUBCASE("identity susceptibility returns W") {
    const Eigen::MatrixXd f = step_factor(SusceptibilityMatrix::identity(n), influence);
    CHECK((f - w).cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("uniform 0.5 against identity W") {
    const Eigen::MatrixXd f =
        step_factor(SusceptibilityMatrix::uniform(n, 0.5), InfluenceMatrix::identity(n));
    CHECK((f - 0.5 * Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("diag(0.9, 1.0) scales rows") {
    const Eigen::MatrixXd f =
        step_factor(SusceptibilityMatrix(Eigen::Vector2d(0.9, 1.0)), influence);
    Eigen::MatrixXd expected(2, 2);
    expected << 0.45, 0.45, 1.0, 0.0;
    CHECK((f - expected).cwiseAbs().maxCoeff() <= 1e-15);
  }
  SUBCASE("lambda zero with nonzero row rejected") {
    CHECK_THROWS_AS(step_factor(SusceptibilityMatrix(Eigen::Vector2d(0.0, 1.0)), influence),
                    ValidationError);
  }
  SUBCASE("nonzero lambda with zero row rejected") {
    Eigen::MatrixXd zero_row(2, 2);
    zero_row << 0.0, 0.0, 0.3, 0.7;
    CHECK_THROWS_AS(
        step_factor(SusceptibilityMatrix(Eigen::Vector2d(0.5, 1.0)), InfluenceMatrix(zero_row)),
        ValidationError);
  }
  SUBCASE("dimension mismatch rejected") {
    CHECK_THROWS_AS(step_factor(SusceptibilityMatrix::identity(3), influence), DimensionError);
  }
}

TEST_CASE("transition_product fixed cases") {
  SUBCASE("empty sequence is the identity") {
    const TransitionProduct phi = transition_product({}, 7, 3);
    CHECK(phi.from_time == 7);
    CHECK(phi.to_time == 7);
    CHECK(phi.norm == 1.0);
    CHECK((phi.matrix - Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("single factor 0.8 I") {
    std::vector<StepFactors> factors{
        {SusceptibilityMatrix::uniform(2, 0.8), InfluenceMatrix::identity(2)}};
    const TransitionProduct phi = transition_product(factors);
    CHECK(phi.norm == doctest::Approx(0.8).epsilon(1e-15));
    CHECK(phi.to_time == 1);
  }
  SUBCASE("two factors match a hand multiplication") {
    gen::Rng rng(12345);
    const auto factors = gen::random_factor_sequence(rng, 2, 2);
    const TransitionProduct phi = transition_product(factors);
    const Eigen::MatrixXd b0 =
        factors[0].susceptibility.diag().asDiagonal() * factors[0].weights.entries();
    const Eigen::MatrixXd b1 =
        factors[1].susceptibility.diag().asDiagonal() * factors[1].weights.entries();
    const Eigen::MatrixXd expected = oracles::naive_matmul(b1, b0);
    CHECK((phi.matrix - expected).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("transition product invariants over random sequences") {
  gen::Rng rng(777);
  for (int rep = 0; rep < 200; ++rep) {
    const Eigen::Index n = 2 + static_cast<Eigen::Index>(rep % 5);
    const int length = 1 + static_cast<int>(rng() % 20);
    const auto factors = gen::random_factor_sequence(rng, n, length);
    const TransitionProduct phi = transition_product(factors);

    CHECK(phi.matrix.minCoeff() >= 0.0);
    CHECK(phi.matrix.rowwise().sum().maxCoeff() <= 1.0 + 1e-12);

    // submultiplicativity across every split point
    for (int m = 0; m <= length; ++m) {
      const TransitionProduct left = transition_product(
          std::span<const StepFactors>(factors).subspan(static_cast<std::size_t>(m)), m, n);
      const TransitionProduct right = transition_product(
          std::span<const StepFactors>(factors).first(static_cast<std::size_t>(m)), 0, n);
      CHECK(phi.norm <= left.norm * right.norm + 1e-12);
    }

    // norm nonincreasing as to_time advances
    double previous = 1.0;
    Eigen::MatrixXd acc = Eigen::MatrixXd::Identity(n, n);
    for (const StepFactors& f : factors) {
      acc = step_factor(f.susceptibility, f.weights) * acc;
      const double norm = max_row_sum_norm(acc);
      CHECK(norm <= previous + 1e-12);
      previous = norm;
    }
  }
}

TEST_CASE("closed_form_solution fixed cases") {
  SUBCASE("empty schedule returns x0") {
    const OpinionVector x0(Eigen::Vector2d(0.3, 0.9));
    const OpinionVector s(Eigen::Vector2d(0.5, 0.5));
    const OpinionVector result = closed_form_solution(x0, s, {});
    CHECK((result.values() - x0.values()).cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("fully anchored step returns s") {
    const Eigen::Index n = 3;
    std::vector<StepFactors> factors{{SusceptibilityMatrix::uniform(n, 0.0),
                                      InfluenceMatrix(Eigen::MatrixXd::Zero(n, n))}};
    const OpinionVector x0(Eigen::Vector3d(0.1, 0.2, 0.3));
    const OpinionVector s(Eigen::Vector3d(0.7, 0.8, 0.9));
    const OpinionVector result = closed_form_solution(x0, s, factors);
    CHECK((result.values() - s.values()).cwiseAbs().maxCoeff() <= 1e-15);
  }
  SUBCASE("random 4-agent 10-step schedule matches iteration") {
    gen::Rng rng(2024);
    const auto factors = gen::random_factor_sequence(rng, 4, 10);
    const Eigen::VectorXd x0 = gen::unit_vector(rng, 4);
    const Eigen::VectorXd s = gen::unit_vector(rng, 4);
    const auto oracle = oracles::iterate_update_law(x0, s, factors);
    const OpinionVector result =
        closed_form_solution(OpinionVector(x0), OpinionVector(s), factors);
    CHECK((result.values() - oracle.back()).cwiseAbs().maxCoeff() <= 1e-10);
  }
}

TEST_CASE("closed form equals iteration on many random instances") {
  gen::Rng rng(31337);
  std::uniform_int_distribution<int> size_dist(1, 6);
  std::uniform_int_distribution<int> horizon_dist(0, 30);
  for (int rep = 0; rep < 300; ++rep) {
    const Eigen::Index n = size_dist(rng);
    const int horizon = horizon_dist(rng);
    const auto factors = gen::random_factor_sequence(rng, n, horizon);
    const Eigen::VectorXd x0 = gen::unit_vector(rng, n);
    const Eigen::VectorXd s = gen::unit_vector(rng, n);
    const auto oracle = oracles::iterate_update_law(x0, s, factors);
    const OpinionVector result =
        closed_form_solution(OpinionVector(x0), OpinionVector(s), factors);
    CHECK((result.values() - oracle.back()).cwiseAbs().maxCoeff() <= 1e-10);
    // convexity: iterated states stay inside [0,1]
    for (const Eigen::VectorXd& x : oracle) {
      CHECK(x.minCoeff() >= -1e-12);
      CHECK(x.maxCoeff() <= 1.0 + 1e-12);
    }
  }
}
