// Shared random-instance generators for tests. Deterministic: every test
// seeds its own engine.
#pragma once

#include <Eigen/Dense>
#include <random>
#include <vector>

#include "tvfj/dynamics.hpp"
#include "tvfj/stochastic_core.hpp"
#include "tvfj/temporal_graph.hpp"

namespace gen {

using Rng = std::mt19937_64;

inline Eigen::VectorXd unit_vector(Rng& rng, Eigen::Index n) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = unit(rng);
  return v;
}

// Row-stochastic row with `support` random nonzero entries.
inline void fill_stochastic_row(Rng& rng, Eigen::MatrixXd& w, Eigen::Index i) {
  const Eigen::Index n = w.cols();
  std::uniform_int_distribution<Eigen::Index> pick(0, n - 1);
  std::uniform_int_distribution<int> support_dist(1, static_cast<int>(n));
  std::uniform_real_distribution<double> mass(0.05, 1.0);
  const int support = support_dist(rng);
  Eigen::VectorXd row = Eigen::VectorXd::Zero(n);
  for (int k = 0; k < support; ++k) row(pick(rng)) += mass(rng);
  w.row(i) = row / row.sum();
}

// Random valid (Lambda, W) pair: each agent is either anchored (lambda = 0,
// zero row), stubborn (lambda <= 1-eps), or free (lambda in (1-eps, 1]).
inline tvfj::StepFactors random_pair(Rng& rng, Eigen::Index n, double stubborn_prob = 0.4,
                                     double zero_row_prob = 0.1, double epsilon = 0.2) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd lam(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double role = unit(rng);
    if (role < zero_row_prob) {
      lam(i) = 0.0;  // anchored: zero row stays
    } else if (role < zero_row_prob + stubborn_prob) {
      lam(i) = std::uniform_real_distribution<double>(0.05, 1.0 - epsilon)(rng);
      fill_stochastic_row(rng, w, i);
    } else {
      lam(i) = std::uniform_real_distribution<double>(std::nextafter(1.0 - epsilon, 2.0), 1.0)(rng);
      fill_stochastic_row(rng, w, i);
    }
  }
  return tvfj::StepFactors{tvfj::SusceptibilityMatrix(lam), tvfj::InfluenceMatrix(w)};
}

inline std::vector<tvfj::StepFactors> random_factor_sequence(Rng& rng, Eigen::Index n, int length,
                                                             double stubborn_prob = 0.4,
                                                             double zero_row_prob = 0.1) {
  std::vector<tvfj::StepFactors> out;
  out.reserve(static_cast<std::size_t>(length));
  for (int k = 0; k < length; ++k) {
    out.push_back(random_pair(rng, n, stubborn_prob, zero_row_prob));
  }
  return out;
}

inline std::vector<tvfj::TemporalLayer> to_layers(std::span<const tvfj::StepFactors> factors,
                                                  int t0 = 0) {
  std::vector<tvfj::TemporalLayer> layers;
  for (std::size_t k = 0; k < factors.size(); ++k) {
    layers.emplace_back(t0 + static_cast<int>(k), factors[k].susceptibility, factors[k].weights);
  }
  return layers;
}

// Window generator biased toward producing DTG instances at (epsilon, w):
// weights are drawn from {0} ∪ [w_floor, 1] so threshold comparisons are
// unambiguous, and stubbornness lands at or below 1-epsilon with decent
// probability.
inline tvfj::TemporalGraphWindow random_threshold_window(Rng& rng, Eigen::Index n, int delta,
                                                         double epsilon, double w_floor) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<tvfj::TemporalLayer> layers;
  for (int t = 0; t < delta; ++t) {
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(n, n);
    Eigen::VectorXd lam(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double role = unit(rng);
      if (role < 0.08) {
        lam(i) = 0.0;
        continue;
      }
      // weight pattern: a few entries at or above the floor, maybe some below
      Eigen::VectorXd row = Eigen::VectorXd::Zero(n);
      std::uniform_int_distribution<Eigen::Index> pick(0, n - 1);
      const int strong = std::uniform_int_distribution<int>(1, 2)(rng);
      for (int k = 0; k < strong; ++k) {
        row(pick(rng)) += std::uniform_real_distribution<double>(w_floor, 1.0)(rng);
      }
      if (unit(rng) < 0.4) {
        row(pick(rng)) += std::uniform_real_distribution<double>(0.01, w_floor * 0.9)(rng);
      }
      w.row(i) = row / row.sum();
      if (unit(rng) < 0.45) {
        lam(i) = std::uniform_real_distribution<double>(0.05, 1.0 - epsilon)(rng);
      } else {
        lam(i) =
            std::uniform_real_distribution<double>(std::nextafter(1.0 - epsilon, 2.0), 1.0)(rng);
      }
    }
    layers.emplace_back(t, tvfj::SusceptibilityMatrix(lam), tvfj::InfluenceMatrix(w));
  }
  return tvfj::TemporalGraphWindow(0, std::move(layers));
}

// Semi-periodic instance: agent 0 stays epsilon-stubborn in every layer and
// every agent keeps an incoming edge from agent 0 with weight >= w, so each
// sliding window of length >= 2 is a DTG at (epsilon, w).
inline std::vector<tvfj::StepFactors> spfj_instance(Rng& rng, Eigen::Index n, int horizon,
                                                    double epsilon, double w) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<tvfj::StepFactors> out;
  for (int t = 0; t < horizon; ++t) {
    Eigen::MatrixXd weights = Eigen::MatrixXd::Zero(n, n);
    Eigen::VectorXd lam(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      Eigen::VectorXd row = Eigen::VectorXd::Zero(n);
      row(0) = std::uniform_real_distribution<double>(w, 1.0)(rng);  // hub edge
      std::uniform_int_distribution<Eigen::Index> pick(0, n - 1);
      const int extra = std::uniform_int_distribution<int>(0, 2)(rng);
      for (int k = 0; k < extra; ++k) {
        row(pick(rng)) += std::uniform_real_distribution<double>(0.05, 0.5)(rng);
      }
      const double total = row.sum();
      // keep the hub entry >= w after normalization
      if (row(0) / total < w) {
        row(0) = w * (total - row(0)) / (1.0 - w) + 1e-9;
      }
      weights.row(i) = row / row.sum();
      lam(i) = i == 0 ? std::uniform_real_distribution<double>(0.1, 1.0 - epsilon)(rng)
                      : std::uniform_real_distribution<double>(0.5, 1.0)(rng);
    }
    out.push_back(tvfj::StepFactors{tvfj::SusceptibilityMatrix(lam),
                                    tvfj::InfluenceMatrix(weights)});
  }
  return out;
}

// Periodic instance with a strongly contracting cycle: agent 0 is a stubborn
// hub (lambda_0 <= lam0_max) every agent listens to with weight >= hub_w, so
// |Phi(p,0)| <= 1 - hub_w * (1 - lam0_max) < 1.
inline std::vector<tvfj::StepFactors> psfj_phases(Rng& rng, Eigen::Index n, int period,
                                                  double hub_w = 0.5, double lam0_max = 0.5) {
  std::vector<tvfj::StepFactors> phases;
  for (int l = 0; l < period; ++l) {
    Eigen::MatrixXd weights = Eigen::MatrixXd::Zero(n, n);
    Eigen::VectorXd lam(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      Eigen::VectorXd row = Eigen::VectorXd::Zero(n);
      row(0) = hub_w;
      Eigen::VectorXd rest = Eigen::VectorXd::Zero(n);
      std::uniform_int_distribution<Eigen::Index> pick(0, n - 1);
      for (int k = 0; k < 2; ++k) {
        rest(pick(rng)) += std::uniform_real_distribution<double>(0.05, 1.0)(rng);
      }
      row += rest * ((1.0 - hub_w) / rest.sum());
      weights.row(i) = row;
      // a one-phase cycle only contracts if every row does, so cap lambda
      const double lam_hi = period == 1 ? 0.95 : 1.0;
      lam(i) = i == 0 ? std::uniform_real_distribution<double>(0.1, lam0_max)(rng)
                      : std::uniform_real_distribution<double>(0.7, lam_hi)(rng);
    }
    phases.push_back(tvfj::StepFactors{tvfj::SusceptibilityMatrix(lam),
                                       tvfj::InfluenceMatrix(weights)});
  }
  return phases;
}

}  // namespace gen
