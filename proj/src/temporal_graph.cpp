#include "tvfj/temporal_graph.hpp"

#include <algorithm>
#include <sstream>
#include <utility>

namespace tvfj {

namespace {

std::vector<int> to_sorted_indices(const std::vector<bool>& members) {
  std::vector<int> out;
  for (int i = 0; i < static_cast<int>(members.size()); ++i) {
    if (members[i]) out.push_back(i);
  }
  return out;
}

struct CarrierResult {
  std::vector<std::vector<int>> history;  // C[t0..td]
  std::vector<int> uncovered;
  std::optional<int> covered_time;
};

// Forward carrier dynamic program, parameterized by the stubbornness and
// edge predicates so the DTG and WDTG variants share one implementation.
template <typename StubbornPred, typename EdgePred>
CarrierResult run_carrier_dp(const TemporalGraphWindow& window, StubbornPred stubborn,
                             EdgePred qualifies) {
  const int n = static_cast<int>(window.agent_count());
  CarrierResult result;
  std::vector<bool> carriers(n, false);
  result.history.push_back({});  // C[t0] = empty
  int all_count = 0;
  for (const TemporalLayer& layer : window.layers()) {
    std::vector<bool> next(n, false);
    for (int i = 0; i < n; ++i) {
      if (stubborn(layer, i)) {
        next[i] = true;
        continue;
      }
      for (int j = 0; j < n && !next[i]; ++j) {
        if (carriers[j] && qualifies(layer, i, j)) next[i] = true;
      }
    }
    carriers = std::move(next);
    result.history.push_back(to_sorted_indices(carriers));
    all_count = static_cast<int>(result.history.back().size());
    if (all_count == n && !result.covered_time.has_value()) {
      result.covered_time = layer.time() + 1;
    }
  }
  for (int i = 0; i < n; ++i) {
    if (!carriers[i]) result.uncovered.push_back(i);
  }
  return result;
}

}  // namespace

TemporalLayer::TemporalLayer(int time, SusceptibilityMatrix susceptibility, InfluenceMatrix weights)
    : time_(time), susceptibility_(std::move(susceptibility)), weights_(std::move(weights)) {
  validate_pair(susceptibility_, weights_);
}

TemporalGraphWindow::TemporalGraphWindow(int start, std::vector<TemporalLayer> layers)
    : start_(start), layers_(std::move(layers)) {
  for (std::size_t k = 0; k < layers_.size(); ++k) {
    if (layers_[k].time() != start_ + static_cast<int>(k)) {
      std::ostringstream msg;
      msg << "TemporalGraphWindow: layer " << k << " has time " << layers_[k].time()
          << ", expected " << start_ + static_cast<int>(k);
      throw ValidationError(msg.str());
    }
    if (layers_[k].agent_count() != layers_.front().agent_count()) {
      throw DimensionError("TemporalGraphWindow: layers disagree on agent count");
    }
  }
}

const TemporalLayer& TemporalGraphWindow::layer_at(int t) const {
  if (t < start_ || t >= end()) {
    std::ostringstream msg;
    msg << "TemporalGraphWindow: time " << t << " outside [" << start_ << "," << end() << ")";
    throw ValidationError(msg.str());
  }
  return layers_[static_cast<std::size_t>(t - start_)];
}

std::vector<TemporalEdge> TemporalGraphWindow::edges() const {
  std::vector<TemporalEdge> out;
  for (const TemporalLayer& layer : layers_) {
    const Eigen::MatrixXd& w = layer.weights().entries();
    for (Eigen::Index i = 0; i < w.rows(); ++i) {
      for (Eigen::Index j = 0; j < w.cols(); ++j) {
        if (w(i, j) > 0.0) {
          out.push_back({static_cast<int>(j), static_cast<int>(i), layer.time(), w(i, j)});
        }
      }
    }
  }
  return out;
}

bool temporal_paths_exist(const TemporalGraphWindow& window, int from, int to, double min_weight,
                          double stubborn_eps) {
  const int n = static_cast<int>(window.agent_count());
  if (window.empty()) return false;
  if (from < 0 || from >= n || to < 0 || to >= n) {
    std::ostringstream msg;
    msg << "temporal_paths_exist: agent index out of range (from=" << from << ", to=" << to
        << ", n=" << n << ")";
    throw ValidationError(msg.str());
  }
  const auto start_ok = [&](const TemporalLayer& layer) {
    const double lam = layer.susceptibility()[from];
    return stubborn_eps > 0.0 ? lam <= 1.0 - stubborn_eps : lam < 1.0;
  };
  // reached[i]: i reachable through >= 1 qualifying edge at some time < current.
  std::vector<bool> reached(n, false);
  for (const TemporalLayer& layer : window.layers()) {
    const Eigen::MatrixXd& w = layer.weights().entries();
    const bool source_active = start_ok(layer);  // path may start here
    std::vector<bool> gained(n, false);
    for (int i = 0; i < n; ++i) {
      if (reached[i]) continue;
      for (int j = 0; j < n; ++j) {
        const bool tail = reached[j] || (source_active && j == from);
        if (tail && w(i, j) >= min_weight && w(i, j) > 0.0) {
          gained[i] = true;
          break;
        }
      }
    }
    for (int i = 0; i < n; ++i) reached[i] = reached[i] || gained[i];
    if (reached[to]) return true;
  }
  return reached[to];
}

DefectReport detect_certificate(const TemporalGraphWindow& window, double epsilon,
                                double w_threshold) {
  if (window.empty()) throw ValidationError("detect_certificate: empty window");
  if (!(epsilon > 0.0 && epsilon <= 1.0)) {
    throw ValidationError("detect_certificate: epsilon must lie in (0,1]");
  }
  if (!(w_threshold > 0.0 && w_threshold <= 1.0)) {
    throw ValidationError("detect_certificate: w_threshold must lie in (0,1]");
  }

  DefectReport report;
  report.epsilon = epsilon;
  report.w_threshold = w_threshold;
  report.window_start = window.start();
  report.window_end = window.end();
  report.effective_delta = window.end() - window.start();

  const auto strict = run_carrier_dp(
      window,
      [epsilon](const TemporalLayer& layer, int i) {
        return layer.susceptibility()[i] <= 1.0 - epsilon;
      },
      [w_threshold](const TemporalLayer& layer, int i, int j) {
        return layer.weights().entries()(i, j) >= w_threshold;
      });
  const auto weak = run_carrier_dp(
      window,
      [](const TemporalLayer& layer, int i) { return layer.susceptibility()[i] < 1.0; },
      [](const TemporalLayer& layer, int i, int j) {
        return layer.weights().entries()(i, j) > 0.0;
      });

  report.carrier_history = strict.history;
  report.uncovered_agents = strict.uncovered;
  report.is_dtg = strict.uncovered.empty();
  report.is_wdtg = weak.uncovered.empty();
  report.defected_time = strict.covered_time;
  return report;
}

std::vector<DefectReport> scan_windows(std::span<const TemporalLayer> layers, int window_length,
                                       double epsilon, double w_threshold) {
  if (window_length < 1) throw ValidationError("scan_windows: window_length must be >= 1");
  if (layers.empty()) return {};
  std::vector<DefectReport> reports;
  std::size_t pos = 0;
  while (pos < layers.size()) {
    const std::size_t take = std::min<std::size_t>(window_length, layers.size() - pos);
    std::vector<TemporalLayer> chunk(layers.begin() + pos, layers.begin() + pos + take);
    const int start = chunk.front().time();
    TemporalGraphWindow window(start, std::move(chunk));
    DefectReport report = detect_certificate(window, epsilon, w_threshold);
    report.truncated = take < static_cast<std::size_t>(window_length);
    reports.push_back(std::move(report));
    pos += take;
  }
  return reports;
}

std::vector<DefectReport> scan_at_boundaries(std::span<const TemporalLayer> layers,
                                             std::span<const int> boundaries, double epsilon,
                                             double w_threshold) {
  if (boundaries.size() < 2) throw ValidationError("scan_at_boundaries: need >= 2 boundaries");
  if (layers.empty()) throw ValidationError("scan_at_boundaries: no layers");
  const int first_time = layers.front().time();
  const int end_time = first_time + static_cast<int>(layers.size());
  std::vector<DefectReport> reports;
  for (std::size_t k = 0; k + 1 < boundaries.size(); ++k) {
    const int a = boundaries[k];
    const int b = boundaries[k + 1];
    if (b <= a) throw ValidationError("scan_at_boundaries: boundaries must be ascending");
    if (a < first_time || b > end_time) {
      std::ostringstream msg;
      msg << "scan_at_boundaries: window [" << a << "," << b << ") outside layer range ["
          << first_time << "," << end_time << ")";
      throw ValidationError(msg.str());
    }
    std::vector<TemporalLayer> chunk(layers.begin() + (a - first_time),
                                     layers.begin() + (b - first_time));
    reports.push_back(detect_certificate(TemporalGraphWindow(a, std::move(chunk)), epsilon,
                                         w_threshold));
  }
  return reports;
}

}  // namespace tvfj
