#include "tvfj/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <utility>

namespace tvfj {

namespace {

void require_agents(Eigen::Index expected, Eigen::Index got, const char* who) {
  if (expected != got) {
    std::ostringstream msg;
    msg << who << ": expected " << expected << " agents, got " << got;
    throw DimensionError(msg.str());
  }
}

}  // namespace

Schedule Schedule::explicit_sequence(std::vector<StepFactors> steps, int start_time) {
  if (steps.empty()) throw ValidationError("Schedule::explicit_sequence: no steps");
  Schedule s;
  s.kind_ = ScheduleKind::explicit_sequence;
  s.agent_count_ = steps.front().weights.size();
  s.start_time_ = start_time;
  s.length_ = static_cast<int>(steps.size());
  for (const StepFactors& f : steps) {
    validate_pair(f.susceptibility, f.weights);
    require_agents(s.agent_count_, f.weights.size(), "Schedule::explicit_sequence");
  }
  s.steps_ = std::move(steps);
  return s;
}

Schedule Schedule::periodic(std::vector<StepFactors> phases) {
  if (phases.empty()) throw ValidationError("Schedule::periodic: no phases");
  Schedule s;
  s.kind_ = ScheduleKind::periodic;
  s.agent_count_ = phases.front().weights.size();
  s.start_time_ = 0;
  s.period_ = static_cast<int>(phases.size());
  for (const StepFactors& f : phases) {
    validate_pair(f.susceptibility, f.weights);
    require_agents(s.agent_count_, f.weights.size(), "Schedule::periodic");
  }
  s.steps_ = std::move(phases);
  return s;
}

Schedule Schedule::from_rule(Eigen::Index agent_count, std::function<StepFactors(int)> rule,
                             int start_time) {
  Schedule s;
  s.kind_ = ScheduleKind::rule;
  s.agent_count_ = agent_count;
  s.start_time_ = start_time;
  s.rule_ = std::move(rule);
  return s;
}

Schedule Schedule::semi_periodic(int semi_period, Eigen::Index agent_count,
                                 std::function<StepFactors(int)> rule, int start_time) {
  if (semi_period < 1) throw ValidationError("Schedule::semi_periodic: period must be >= 1");
  Schedule s = from_rule(agent_count, std::move(rule), start_time);
  s.kind_ = ScheduleKind::semi_periodic;
  s.semi_period_ = semi_period;
  return s;
}

StepFactors Schedule::at(int t) const {
  switch (kind_) {
    case ScheduleKind::explicit_sequence: {
      const int idx = t - start_time_;
      if (idx < 0 || idx >= *length_) {
        std::ostringstream msg;
        msg << "Schedule: time " << t << " outside explicit range [" << start_time_ << ","
            << start_time_ + *length_ << ")";
        throw ValidationError(msg.str());
      }
      return steps_[static_cast<std::size_t>(idx)];
    }
    case ScheduleKind::periodic: {
      const int p = *period_;
      const int idx = ((t % p) + p) % p;
      return steps_[static_cast<std::size_t>(idx)];
    }
    case ScheduleKind::semi_periodic:
    case ScheduleKind::rule: {
      if (t < start_time_) {
        std::ostringstream msg;
        msg << "Schedule: time " << t << " precedes start time " << start_time_;
        throw ValidationError(msg.str());
      }
      StepFactors f = rule_(t);
      validate_pair(f.susceptibility, f.weights);
      require_agents(agent_count_, f.weights.size(), "Schedule rule");
      return f;
    }
  }
  throw ValidationError("Schedule: unknown kind");
}

std::vector<TemporalLayer> Schedule::layers(int t0, int count) const {
  std::vector<TemporalLayer> out;
  out.reserve(static_cast<std::size_t>(std::max(count, 0)));
  for (int t = t0; t < t0 + count; ++t) {
    StepFactors f = at(t);
    out.emplace_back(t, std::move(f.susceptibility), std::move(f.weights));
  }
  return out;
}

namespace {

Trajectory run_update_law(const OpinionVector& x0, const Eigen::VectorXd& s,
                          const Schedule& schedule, int horizon, const SimulateOptions& options) {
  if (horizon < 0) throw ValidationError("simulate: horizon must be >= 0");
  const Eigen::Index n = schedule.agent_count();
  require_agents(n, x0.size(), "simulate: x0");
  require_agents(n, s.size(), "simulate: s");

  Trajectory trajectory;
  trajectory.reserve(static_cast<std::size_t>(horizon) + 1);
  trajectory.push_back(x0);
  Eigen::VectorXd x = x0.values();
  const int t0 = schedule.start_time();
  for (int step = 0; step < horizon; ++step) {
    const int t = t0 + step;
    StepFactors f = [&] {
      try {
        return schedule.at(t);
      } catch (const ValidationError& e) {
        std::ostringstream msg;
        msg << "simulate: invalid step at t=" << t << ": " << e.what();
        throw ValidationError(msg.str());
      }
    }();
    if (options.enforce_assumption2 && f.susceptibility.is_zero()) {
      std::ostringstream msg;
      msg << "simulate: Assumption 2 violated at t=" << t
          << " (susceptibility matrix vanishes identically)";
      throw ValidationError(msg.str());
    }
    // Form Λ[t]W[t] explicitly so that the perturbed engine with E = 0
    // retraces the identical floating-point sequence.
    const Eigen::MatrixXd factor = step_factor(f.susceptibility, f.weights);
    const Eigen::VectorXd anchor = Eigen::VectorXd::Ones(n) - f.susceptibility.diag();
    x = factor * x + anchor.cwiseProduct(s);
    trajectory.push_back(OpinionVector(x));
  }
  return trajectory;
}

}  // namespace

Trajectory simulate(const OpinionVector& x0, const OpinionVector& s, const Schedule& schedule,
                    int horizon, const SimulateOptions& options) {
  return run_update_law(x0, s.values(), schedule, horizon, options);
}

Trajectory simulate_zero_input(const OpinionVector& x0, const Schedule& schedule, int horizon,
                               const SimulateOptions& options) {
  return run_update_law(x0, Eigen::VectorXd::Zero(schedule.agent_count()), schedule, horizon,
                        options);
}

std::vector<double> transition_norm_trace(const Schedule& schedule, int horizon) {
  if (horizon < 0) throw ValidationError("transition_norm_trace: horizon must be >= 0");
  const Eigen::Index n = schedule.agent_count();
  std::vector<double> trace;
  trace.reserve(static_cast<std::size_t>(horizon) + 1);
  trace.push_back(1.0);
  Eigen::MatrixXd phi = Eigen::MatrixXd::Identity(n, n);
  const int t0 = schedule.start_time();
  for (int step = 0; step < horizon; ++step) {
    const StepFactors f = schedule.at(t0 + step);
    phi = step_factor(f.susceptibility, f.weights) * phi;
    trace.push_back(max_row_sum_norm(phi));
  }
  return trace;
}

SusceptibilityRule SusceptibilityRule::constant_per_agent(Eigen::VectorXd values) {
  SusceptibilityRule rule;
  rule.fallback_ = std::move(values);
  for (Eigen::Index i = 0; i < rule.fallback_.size(); ++i) {
    if (!(rule.fallback_(i) >= 0.0 && rule.fallback_(i) <= 1.0)) {
      throw ValidationError("SusceptibilityRule: values must lie in [0,1]");
    }
  }
  return rule;
}

SusceptibilityRule SusceptibilityRule::uniform(Eigen::Index n, double value) {
  return constant_per_agent(Eigen::VectorXd::Constant(n, value));
}

SusceptibilityRule SusceptibilityRule::table(
    Eigen::VectorXd fallback, std::map<std::pair<int, std::vector<int>>, double> entries) {
  SusceptibilityRule rule = constant_per_agent(std::move(fallback));
  for (const auto& [key, value] : entries) {
    if (!(value >= 0.0 && value <= 1.0)) {
      throw ValidationError("SusceptibilityRule: table values must lie in [0,1]");
    }
    if (key.second.empty() && value != 0.0) {
      throw ValidationError("SusceptibilityRule: f(empty neighborhood) must be 0");
    }
    if (!std::is_sorted(key.second.begin(), key.second.end())) {
      throw ValidationError("SusceptibilityRule: table neighbor sets must be sorted");
    }
  }
  rule.entries_ = std::move(entries);
  return rule;
}

double SusceptibilityRule::operator()(int agent, const std::vector<int>& neighbors) const {
  if (neighbors.empty()) return 0.0;  // f_i(empty) = 0, always
  if (!entries_.empty()) {
    const auto it = entries_.find({agent, neighbors});
    if (it != entries_.end()) return it->second;
  }
  return fallback_(agent);
}

StepFactors trust_based_resolve(const TrustConfig& config, int t) {
  const Eigen::Index n = config.trust.size();
  const Eigen::MatrixXi adjacency = config.adjacency_schedule(t);
  if (adjacency.rows() != n || adjacency.cols() != n) {
    std::ostringstream msg;
    msg << "trust_based_resolve: adjacency at t=" << t << " is " << adjacency.rows() << "x"
        << adjacency.cols() << ", trust is " << n << "x" << n;
    throw DimensionError(msg.str());
  }
  require_agents(n, config.susceptibility_rule.agent_count(), "trust_based_resolve: rule");

  const Eigen::MatrixXd& trust = config.trust.entries();
  Eigen::MatrixXd weights = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd lambdas = Eigen::VectorXd::Zero(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    std::vector<int> effective;  // neighbors with surviving trust
    double denom = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (adjacency(i, j) != 0 && trust(i, j) > 0.0) {
        effective.push_back(static_cast<int>(j));
        denom += trust(i, j);
      }
    }
    lambdas(i) = config.susceptibility_rule(static_cast<int>(i), effective);
    if (denom > 0.0 && lambdas(i) > 0.0) {
      for (const int j : effective) weights(i, j) = trust(i, j) / denom;
    }
    // denom == 0 (empty effective neighborhood) leaves the row zero with
    // lambda_i = 0; a rule returning 0 on a nonempty neighborhood also zeroes
    // the row, since lambda_i = 0 wipes it out of Λ[t]W[t] anyway and
    // Assumption 1 demands the pairing.
  }
  return StepFactors{SusceptibilityMatrix(std::move(lambdas)),
                     InfluenceMatrix(std::move(weights))};
}

Schedule trust_schedule(TrustConfig config, int start_time) {
  const Eigen::Index n = config.trust.size();
  auto shared = std::make_shared<TrustConfig>(std::move(config));
  return Schedule::from_rule(
      n, [shared](int t) { return trust_based_resolve(*shared, t); }, start_time);
}

PerturbedSystem::PerturbedSystem(Schedule nominal, std::function<Eigen::MatrixXd(int)> perturbation)
    : nominal_(std::move(nominal)), perturbation_(std::move(perturbation)) {}

Eigen::MatrixXd PerturbedSystem::perturbation_at(int t) const {
  Eigen::MatrixXd e = perturbation_(t);
  const Eigen::Index n = nominal_.agent_count();
  if (e.rows() != n || e.cols() != n) {
    std::ostringstream msg;
    msg << "PerturbedSystem: E[" << t << "] is " << e.rows() << "x" << e.cols() << ", expected "
        << n << "x" << n;
    throw DimensionError(msg.str());
  }
  return e;
}

std::pair<Eigen::MatrixXd, Eigen::VectorXd> PerturbedSystem::resolve(int t) const {
  constexpr double kTol = 1e-9;
  const StepFactors f = nominal_.at(t);
  const Eigen::MatrixXd e = perturbation_at(t);
  Eigen::MatrixXd p = step_factor(f.susceptibility, f.weights) + e;
  const Eigen::Index n = p.rows();
  Eigen::VectorXd d = Eigen::VectorXd::Ones(n) - f.susceptibility.diag() - e.rowwise().sum();
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (p(i, j) < -kTol) {
        std::ostringstream msg;
        msg << "PerturbedSystem: P(" << i << "," << j << ") = " << p(i, j)
            << " is negative at t=" << t;
        throw ValidationError(msg.str());
      }
      p(i, j) = std::max(p(i, j), 0.0);
    }
    if (d(i) < -kTol) {
      std::ostringstream msg;
      msg << "PerturbedSystem: D diagonal " << i << " = " << d(i) << " is negative at t=" << t;
      throw ValidationError(msg.str());
    }
    d(i) = std::max(d(i), 0.0);
    const double total = p.row(i).sum() + d(i);
    if (std::abs(total - 1.0) > kTol) {
      std::ostringstream msg;
      msg << "PerturbedSystem: row-stochastic condition violated at t=" << t << ", row " << i
          << ": (P+D)*1 = " << total;
      throw ValidationError(msg.str());
    }
  }
  return {std::move(p), std::move(d)};
}

PerturbedRun simulate_perturbed(const OpinionVector& x0, const OpinionVector& s,
                                const PerturbedSystem& system, int horizon) {
  if (horizon < 0) throw ValidationError("simulate_perturbed: horizon must be >= 0");
  const Eigen::Index n = system.nominal().agent_count();
  require_agents(n, x0.size(), "simulate_perturbed: x0");
  require_agents(n, s.size(), "simulate_perturbed: s");

  PerturbedRun run;
  run.trajectory.reserve(static_cast<std::size_t>(horizon) + 1);
  run.trajectory.push_back(x0);
  run.perturbation_norms.reserve(static_cast<std::size_t>(horizon));
  Eigen::VectorXd x = x0.values();
  const int t0 = system.nominal().start_time();
  for (int step = 0; step < horizon; ++step) {
    const int t = t0 + step;
    const auto [p, d] = system.resolve(t);
    run.perturbation_norms.push_back(max_row_sum_norm(system.perturbation_at(t)));
    x = p * x + d.cwiseProduct(s.values());
    run.trajectory.push_back(OpinionVector(x));
  }
  return run;
}

std::vector<int> example2_switching_times(int d, int horizon) {
  if (d < 1) throw ValidationError("example2_switching_times: d must be >= 1");
  std::vector<int> times;
  int t = 1;
  while (t <= horizon) {
    times.push_back(t);
    t = t + static_cast<int>(std::floor(std::log(static_cast<double>(t) + 1.0))) + d;
  }
  return times;
}

}  // namespace tvfj
