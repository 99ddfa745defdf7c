#include "tvfj/presets.hpp"

#include <cmath>
#include <iostream>
#include <memory>

namespace tvfj {
namespace presets {

namespace {

double clamp_unit(double v, const char* symbol, int t) {
  if (v < 0.0 || v > 1.0) {
    std::cerr << "[tvfj] warning: " << symbol << " = " << v << " at t=" << t
              << " clamped into [0,1]\n";
    return std::min(1.0, std::max(0.0, v));
  }
  return v;
}

// Normalizes trust rows against an adjacency mask and zeroes rows whose
// susceptibility is zero, keeping Assumption 1 intact.
StepFactors resolve_masked(const Eigen::MatrixXi& adjacency, Eigen::VectorXd lambdas) {
  const InfluenceMatrix trust_matrix = example_trust_matrix();
  const Eigen::MatrixXd& trust = trust_matrix.entries();
  const Eigen::Index n = trust.rows();
  Eigen::MatrixXd weights = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (lambdas(i) == 0.0) continue;
    double denom = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (adjacency(i, j) != 0 && trust(i, j) > 0.0) denom += trust(i, j);
    }
    if (denom == 0.0) {
      lambdas(i) = 0.0;  // empty effective neighborhood
      continue;
    }
    for (Eigen::Index j = 0; j < n; ++j) {
      if (adjacency(i, j) != 0 && trust(i, j) > 0.0) weights(i, j) = trust(i, j) / denom;
    }
  }
  return StepFactors{SusceptibilityMatrix(std::move(lambdas)),
                     InfluenceMatrix(std::move(weights))};
}

}  // namespace

Schedule example1_schedule() {
  const Eigen::Index n = 3;
  const InfluenceMatrix w(Eigen::MatrixXd::Constant(n, n, 1.0 / 3.0));
  return Schedule::from_rule(
      n,
      [w](int t) {
        const double lam = 1.0 - 1.0 / std::pow(static_cast<double>(t) + 1.0, 2);
        return StepFactors{SusceptibilityMatrix::uniform(3, lam), w};
      },
      /*start_time=*/1);
}

OpinionVector example_innate() {
  Eigen::VectorXd s(5);
  s << 0.5, 1.0, 1.0, 0.0, 0.0;
  return OpinionVector(s);
}

InfluenceMatrix example_trust_matrix() {
  Eigen::MatrixXd w(5, 5);
  const double th = 1.0 / 3.0;
  // clang-format off
  w << 1.0,  0.0,  0.0,  0.0,  0.0,
       0.25, 0.25, 0.25, 0.25, 0.0,
       0.0,  th,   th,   0.0,  th,
       0.0,  th,   0.0,  th,   th,
       0.0,  0.0,  th,   th,   th;
  // clang-format on
  return InfluenceMatrix(w);
}

Eigen::MatrixXi example_adjacency_1() {
  Eigen::MatrixXi a(5, 5);
  // clang-format off
  a << 1, 0, 0, 0, 0,
       0, 1, 0, 1, 0,
       0, 0, 1, 0, 1,
       0, 1, 0, 1, 0,
       0, 0, 1, 0, 1;
  // clang-format on
  return a;
}

Eigen::MatrixXi example_adjacency_2() {
  Eigen::MatrixXi a(5, 5);
  // clang-format off
  a << 1, 0, 0, 0, 0,
       1, 0, 1, 0, 0,
       0, 1, 1, 0, 0,
       0, 0, 0, 1, 1,
       0, 0, 0, 1, 1;
  // clang-format on
  return a;
}

Schedule example2_schedule(int d) {
  if (d < 1) throw ValidationError("example2_schedule: d must be >= 1");
  return Schedule::from_rule(
      5,
      [d](int t) {
        // Network 2 is active on [t_k, t_k + d); k counts entries into
        // network 2 starting at 1. Recomputed from t_0 = 1 on every call so
        // the rule stays stateless and shareable across threads.
        int tk = 1;
        int k = 1;
        while (tk + d <= t) {
          tk = tk + static_cast<int>(std::floor(std::log(static_cast<double>(tk) + 1.0))) + d;
          ++k;
        }
        if (tk <= t && t < tk + d) {
          Eigen::VectorXd lam(5);
          lam << 0.0, clamp_unit(0.9 - 1.0 / (1.0 + k), "lambda_2", t), 1.0,
              clamp_unit(1.0 - 1.0 / (1.0 + k), "lambda_4", t), 1.0;
          return resolve_masked(example_adjacency_2(), std::move(lam));
        }
        Eigen::VectorXd lam(5);
        lam << 0.0, 1.0, 1.0, 1.0, 1.0;
        return resolve_masked(example_adjacency_1(), std::move(lam));
      },
      /*start_time=*/0);
}

std::vector<StepFactors> example3_phases(bool stubborn_v4) {
  Eigen::VectorXd lam1(5);
  lam1 << 0.0, 1.0, 1.0, 1.0, 1.0;
  Eigen::VectorXd lam2(5);
  lam2 << 0.0, 0.9, 1.0, stubborn_v4 ? 0.9 : 1.0, 1.0;
  const StepFactors net1 = resolve_masked(example_adjacency_1(), lam1);
  const StepFactors net2 = resolve_masked(example_adjacency_2(), lam2);
  // Period 4 with t_0 = 1 and d = 2: network 2 occupies t ≡ 1, 2 (mod 4).
  return {net1, net2, net2, net1};
}

Schedule example3_schedule(bool stubborn_v4) {
  return Schedule::periodic(example3_phases(stubborn_v4));
}

}  // namespace presets
}  // namespace tvfj
