#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "tvfj/certificates.hpp"
#include "tvfj/dynamics.hpp"
#include "tvfj/pslti.hpp"
#include "tvfj/temporal_graph.hpp"

namespace tvfj {

struct ExplicitScheduleSpec {
  int start_time = 0;
  std::vector<StepFactors> steps;
};

struct PeriodicScheduleSpec {
  std::vector<StepFactors> phases;
};

struct TrustScheduleSpec {
  InfluenceMatrix trust;
  /// Adjacency cycle applied periodically: A[t] = layers[t mod layers.size()].
  std::vector<Eigen::MatrixXi> adjacency_cycle;
  SusceptibilityRule rule;
};

struct PresetScheduleSpec {
  std::string name;  // example1 | example2 | example3 | example3_variant
  int d = 2;         // network-2 duration for example2
};

using ScheduleSpec =
    std::variant<ExplicitScheduleSpec, PeriodicScheduleSpec, TrustScheduleSpec, PresetScheduleSpec>;

struct AnalysisParams {
  int horizon = 200;
  double epsilon = 0.1;
  double w_threshold = 0.5;
  int window = 4;
  double decay_tol = 1e-9;
  /// SPFJ claim to check: every sliding window of this length is a DTG.
  std::optional<int> semi_period;
  /// Use example2 switching times as window boundaries instead of fixed
  /// windows (only meaningful for the example2 preset).
  bool switching_windows = false;
  double tail_fraction = 0.25;
  double cluster_tol = 1e-6;
};

struct Scenario {
  std::string name;
  int agents = 0;
  OpinionVector innate;
  std::optional<OpinionVector> initial;
  ScheduleSpec schedule;
  AnalysisParams analysis;
  /// Which artifacts run() should produce; empty means all.
  std::vector<std::string> outputs;

  Schedule build_schedule() const;
  bool operator==(const Scenario& other) const;
};

/// Parses and fully validates a scenario document; errors name the offending
/// field (and time step where applicable).
Scenario load_scenario(const std::filesystem::path& path);
Scenario load_scenario_text(const std::string& text, const std::string& origin = "<memory>");

/// Canonical JSON form; load(serialize(s)) compares equal to s.
std::string serialize_scenario(const Scenario& scenario);

struct ReportBundle {
  std::string scenario_name;
  AnalysisParams params;
  int start_time = 0;
  Trajectory trajectory;
  std::vector<double> norm_trace;
  std::vector<DefectReport> window_reports;
  std::optional<ScanVerdict> verdict;
  std::optional<ExponentialCertificate> spfj_certificate;
  std::optional<RobustnessThreshold> spfj_threshold;
  bool spfj_premise_checked = false;
  bool spfj_premise_holds = false;
  std::optional<ExponentialCertificate> psfj_certificate;
  std::optional<RobustnessThreshold> psfj_threshold;
  std::optional<PhaseFixedPoints> phase_analysis;
  std::optional<OmegaEstimate> omega_tail;
  std::optional<bool> containment;
  std::vector<std::string> warnings;
};

/// Executes the scenario's requested simulations and analyses. Deterministic
/// for a fixed scenario.
ReportBundle run(const Scenario& scenario);

/// Writes trajectory.csv, norm_trace.csv, windows.csv and report.json into
/// out_dir (creating it). Tables carry a header row, time in column 1 and
/// 12-significant-digit decimals; repeated runs produce identical bytes.
void write_report(const ReportBundle& bundle, const std::filesystem::path& out_dir);

}  // namespace tvfj
