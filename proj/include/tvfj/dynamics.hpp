#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <vector>

#include "tvfj/stochastic_core.hpp"
#include "tvfj/temporal_graph.hpp"

namespace tvfj {

enum class ScheduleKind { explicit_sequence, periodic, semi_periodic, rule };

/// Time-indexed source of (Λ[t], W[t]) pairs. Resolvers must be pure in t so
/// independent runs over the same schedule are reproducible.
class Schedule {
 public:
  /// Finite explicit sequence; steps[k] acts at time start_time + k.
  static Schedule explicit_sequence(std::vector<StepFactors> steps, int start_time = 0);
  /// Periodic schedule with A[t] = phases[t mod p]; phase ⟨t⟩_p = (t mod p)+1.
  static Schedule periodic(std::vector<StepFactors> phases);
  /// Arbitrary rule, defined for every t ≥ start_time.
  static Schedule from_rule(Eigen::Index agent_count, std::function<StepFactors(int)> rule,
                            int start_time = 0);
  /// A rule schedule carrying the semi-period p_s whose sliding windows are
  /// claimed to be DTGs (the claim is checked by analysis, not assumed).
  static Schedule semi_periodic(int semi_period, Eigen::Index agent_count,
                                std::function<StepFactors(int)> rule, int start_time = 0);

  StepFactors at(int t) const;
  ScheduleKind kind() const { return kind_; }
  Eigen::Index agent_count() const { return agent_count_; }
  int start_time() const { return start_time_; }
  /// Number of defined steps for explicit schedules; nullopt when unbounded.
  std::optional<int> length() const { return length_; }
  std::optional<int> period() const { return period_; }
  std::optional<int> semi_period() const { return semi_period_; }

  /// Materializes layers for times [t0, t0 + count).
  std::vector<TemporalLayer> layers(int t0, int count) const;

 private:
  Schedule() = default;
  ScheduleKind kind_ = ScheduleKind::rule;
  Eigen::Index agent_count_ = 0;
  int start_time_ = 0;
  std::optional<int> length_;
  std::optional<int> period_;
  std::optional<int> semi_period_;
  std::vector<StepFactors> steps_;  // explicit steps or cached periodic phases
  std::function<StepFactors(int)> rule_;
};

using Trajectory = std::vector<OpinionVector>;

struct SimulateOptions {
  /// When set, a time step with Λ[t] ≡ 0 raises a ValidationError naming the
  /// step (Assumption 2). Off by default: the update law itself is well
  /// defined there (x[t+1] = s) and several degenerate fixtures rely on it;
  /// certification paths turn the check on.
  bool enforce_assumption2 = false;
};

/// Iterates x[t+1] = Λ[t]W[t]x[t] + (I−Λ[t])s from the schedule's start time.
/// Returns horizon+1 states with trajectory[0] = x0.
Trajectory simulate(const OpinionVector& x0, const OpinionVector& s, const Schedule& schedule,
                    int horizon, const SimulateOptions& options = {});

/// simulate with s forced to zero; the trajectory is Φ(t, t0)·x0.
Trajectory simulate_zero_input(const OpinionVector& x0, const Schedule& schedule, int horizon,
                               const SimulateOptions& options = {});

/// ‖Φ(t, t0)‖ for t = t0 .. t0+horizon (first entry 1, the empty product).
std::vector<double> transition_norm_trace(const Schedule& schedule, int horizon);

/// Per-agent susceptibility rule λ_i = f_i(N_i[t]) with f_i(∅) = 0.
class SusceptibilityRule {
 public:
  /// λ_i(N) = value_i on nonempty N, 0 on ∅.
  static SusceptibilityRule constant_per_agent(Eigen::VectorXd values);
  static SusceptibilityRule uniform(Eigen::Index n, double value);
  /// Explicit table entries (agent, sorted neighbor set) → λ, falling back to
  /// per-agent constants for unlisted sets.
  static SusceptibilityRule table(Eigen::VectorXd fallback,
                                  std::map<std::pair<int, std::vector<int>>, double> entries);

  double operator()(int agent, const std::vector<int>& neighbors) const;
  Eigen::Index agent_count() const { return fallback_.size(); }

  const Eigen::VectorXd& fallback() const { return fallback_; }
  const std::map<std::pair<int, std::vector<int>>, double>& entries() const { return entries_; }

 private:
  Eigen::VectorXd fallback_;
  std::map<std::pair<int, std::vector<int>>, double> entries_;
};

/// Trust-based configuration: a fixed row-stochastic trust matrix filtered by
/// a time-varying adjacency, with susceptibilities driven by the perceived
/// neighborhood.
struct TrustConfig {
  InfluenceMatrix trust;
  std::function<Eigen::MatrixXi(int)> adjacency_schedule;
  SusceptibilityRule susceptibility_rule;
};

/// Resolves (W[t], Λ[t]) from trust: w_ij[t] = a_ij[t]ŵ_ij / Σ_k a_ik[t]ŵ_ik,
/// λ_i[t] = rule_i(N_i[t]) with N_i[t] the effective (trust-surviving)
/// neighborhood. An empty effective neighborhood yields a zero row and
/// λ_i = 0; a rule returning 0 on a nonempty neighborhood also zeroes the
/// row so the pair always satisfies Assumption 1.
StepFactors trust_based_resolve(const TrustConfig& config, int t);

/// Wraps a TrustConfig as a rule schedule.
Schedule trust_schedule(TrustConfig config, int start_time = 0);

/// Perturbed model x[t+1] = P[t]x[t] + D[t]s with P[t] = Λ̄[t]W̄[t] + E[t] and
/// D[t] = I − Λ̄[t] − diag(E[t]·1). Resolution validates nonnegativity of P
/// and D and the row-stochastic condition (P+D)·1 = 1 at each time.
class PerturbedSystem {
 public:
  PerturbedSystem(Schedule nominal, std::function<Eigen::MatrixXd(int)> perturbation);

  const Schedule& nominal() const { return nominal_; }
  Eigen::MatrixXd perturbation_at(int t) const;
  /// Validated (P[t], diag of D[t]) pair; throws ValidationError naming t.
  std::pair<Eigen::MatrixXd, Eigen::VectorXd> resolve(int t) const;

 private:
  Schedule nominal_;
  std::function<Eigen::MatrixXd(int)> perturbation_;
};

struct PerturbedRun {
  Trajectory trajectory;
  /// ‖E[t]‖ for each step taken, for threshold checking.
  std::vector<double> perturbation_norms;
};

PerturbedRun simulate_perturbed(const OpinionVector& x0, const OpinionVector& s,
                                const PerturbedSystem& system, int horizon);

/// Switching times of the alternating-network scenario:
/// t_0 = 1, t_k = t_{k-1} + ⌊ln(t_{k-1}+1)⌋ + d, collected while ≤ horizon.
/// Natural log; any base ≥ e keeps the gaps growing.
std::vector<int> example2_switching_times(int d, int horizon);

}  // namespace tvfj
