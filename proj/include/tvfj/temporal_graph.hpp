#pragma once

#include <optional>
#include <span>
#include <vector>

#include "tvfj/stochastic_core.hpp"

namespace tvfj {

/// One layer of the temporal multiplex graph: the (Λ[t], W[t]) pair at an
/// integer time. Adjacency is derived from the weights (a_ij = 1 ⇔ w_ij > 0),
/// so it cannot drift out of sync with them.
class TemporalLayer {
 public:
  TemporalLayer(int time, SusceptibilityMatrix susceptibility, InfluenceMatrix weights);

  int time() const { return time_; }
  const InfluenceMatrix& weights() const { return weights_; }
  const SusceptibilityMatrix& susceptibility() const { return susceptibility_; }
  Eigen::Index agent_count() const { return weights_.size(); }
  /// a_ij: agent i listens to agent j at this layer.
  bool adjacent(Eigen::Index i, Eigen::Index j) const { return weights_.entries()(i, j) > 0.0; }

 private:
  int time_;
  SusceptibilityMatrix susceptibility_;
  InfluenceMatrix weights_;
};

/// Directed temporal edge (v_j → v_i at time t); weight strictly positive.
struct TemporalEdge {
  int from_agent = 0;
  int to_agent = 0;
  int time = 0;
  double weight = 0.0;
};

/// Consecutive layers covering the half-open interval [start, end).
class TemporalGraphWindow {
 public:
  TemporalGraphWindow(int start, std::vector<TemporalLayer> layers);

  int start() const { return start_; }
  int end() const { return start_ + static_cast<int>(layers_.size()); }
  bool empty() const { return layers_.empty(); }
  Eigen::Index agent_count() const { return layers_.empty() ? 0 : layers_.front().agent_count(); }
  const std::vector<TemporalLayer>& layers() const { return layers_; }
  const TemporalLayer& layer_at(int t) const;

  /// All temporal edges of the window, ordered by (time, to, from).
  std::vector<TemporalEdge> edges() const;

 private:
  int start_;
  std::vector<TemporalLayer> layers_;
};

/// Outcome of DTG/WDTG detection over one window.
struct DefectReport {
  bool is_dtg = false;
  bool is_wdtg = false;
  double epsilon = 0.0;
  double w_threshold = 0.0;
  int window_start = 0;
  int window_end = 0;
  /// Window length δ = window_end − window_start, the conservative value the
  /// contraction bounds use.
  int effective_delta = 0;
  /// Carrier sets C[t] of the forward dynamic program under the (ε, w)
  /// thresholds, for t = window_start .. window_end (so size δ+1, first ∅).
  std::vector<std::vector<int>> carrier_history;
  /// Agents not covered at the window end under the (ε, w) thresholds;
  /// empty exactly when is_dtg.
  std::vector<int> uncovered_agents;
  /// Earliest time at which the carrier set covered every agent.
  std::optional<int> defected_time;
  /// Set when the window was cut short of the requested length by scan_windows.
  bool truncated = false;
};

/// True iff a temporal path from `from` to `to` exists inside the window with
/// strictly increasing edge times, every edge weight ≥ min_weight, and `from`
/// strictly stubborn at the first edge's time. Stubbornness is λ ≤ 1−ε for
/// stubborn_eps = ε > 0; passing stubborn_eps = 0 selects the s-path rule
/// λ < 1. Paths consist of at least one edge.
bool temporal_paths_exist(const TemporalGraphWindow& window, int from, int to, double min_weight,
                          double stubborn_eps);

/// Runs the forward carrier dynamic program
///   C[t0] = ∅,  C[t+1] = {i : λ_i[t] ≤ 1−ε} ∪ {i : ∃ j ∈ C[t], w_ij[t] ≥ w}
/// and reports is_dtg ⇔ C[end] covers every agent. is_wdtg uses the weak
/// thresholds (λ < 1, w > 0). Carriers do not persist on their own: an agent
/// stays in C only through stubbornness or an incoming qualifying edge
/// (self-loops count) at each step, matching how the row-sum deficit travels
/// through the product Λ[t]W[t]Φ(t,t0).
DefectReport detect_certificate(const TemporalGraphWindow& window, double epsilon,
                                double w_threshold);

/// Splits the layer sequence into consecutive disjoint windows of
/// window_length and detects each. A final short window (or a horizon shorter
/// than window_length) yields a report flagged truncated.
std::vector<DefectReport> scan_windows(std::span<const TemporalLayer> layers, int window_length,
                                       double epsilon, double w_threshold);

/// Detects over the consecutive windows [b_0,b_1), [b_1,b_2), ... given by an
/// ascending boundary list; used when window edges follow switching times
/// rather than a fixed length. Boundaries must lie inside the layer range.
std::vector<DefectReport> scan_at_boundaries(std::span<const TemporalLayer> layers,
                                             std::span<const int> boundaries, double epsilon,
                                             double w_threshold);

}  // namespace tvfj
