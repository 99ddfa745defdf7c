#include "tvfj/scenario.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "tvfj/presets.hpp"

namespace tvfj {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& origin, const std::string& path,
                       const std::string& message) {
  std::ostringstream msg;
  msg << origin << ": " << path << ": " << message;
  throw ValidationError(msg.str());
}

const json& require_field(const json& obj, const char* key, const std::string& origin,
                          const std::string& path) {
  if (!obj.is_object() || !obj.contains(key)) {
    fail(origin, path, std::string("missing field '") + key + "'");
  }
  return obj.at(key);
}

double as_double(const json& v, const std::string& origin, const std::string& path) {
  if (!v.is_number()) fail(origin, path, "expected a number");
  return v.get<double>();
}

int as_int(const json& v, const std::string& origin, const std::string& path) {
  if (!v.is_number_integer()) fail(origin, path, "expected an integer");
  return v.get<int>();
}

Eigen::VectorXd parse_vector(const json& v, const std::string& origin, const std::string& path) {
  if (!v.is_array() || v.empty()) fail(origin, path, "expected a nonempty array of numbers");
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) {
    out(static_cast<Eigen::Index>(i)) =
        as_double(v[i], origin, path + "[" + std::to_string(i) + "]");
  }
  return out;
}

Eigen::MatrixXd parse_matrix(const json& v, const std::string& origin, const std::string& path) {
  if (!v.is_array() || v.empty()) fail(origin, path, "expected a nonempty array of rows");
  const std::size_t rows = v.size();
  std::size_t cols = 0;
  Eigen::MatrixXd out;
  for (std::size_t i = 0; i < rows; ++i) {
    const std::string row_path = path + "[" + std::to_string(i) + "]";
    if (!v[i].is_array()) fail(origin, row_path, "expected an array row");
    if (i == 0) {
      cols = v[i].size();
      out.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    } else if (v[i].size() != cols) {
      fail(origin, row_path, "ragged matrix row");
    }
    for (std::size_t j = 0; j < cols; ++j) {
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          as_double(v[i][j], origin, row_path + "[" + std::to_string(j) + "]");
    }
  }
  return out;
}

Eigen::MatrixXi parse_adjacency(const json& v, const std::string& origin,
                                const std::string& path) {
  const Eigen::MatrixXd m = parse_matrix(v, origin, path);
  Eigen::MatrixXi out(m.rows(), m.cols());
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (m(i, j) != 0.0 && m(i, j) != 1.0) {
        fail(origin, path, "adjacency entries must be 0 or 1");
      }
      out(i, j) = m(i, j) != 0.0 ? 1 : 0;
    }
  }
  return out;
}

StepFactors parse_step(const json& v, const std::string& origin, const std::string& path) {
  const Eigen::VectorXd lam =
      parse_vector(require_field(v, "lambda", origin, path), origin, path + ".lambda");
  const Eigen::MatrixXd w =
      parse_matrix(require_field(v, "weights", origin, path), origin, path + ".weights");
  try {
    StepFactors f{SusceptibilityMatrix(lam), InfluenceMatrix(w)};
    validate_pair(f.susceptibility, f.weights);
    return f;
  } catch (const ValidationError& e) {
    fail(origin, path, e.what());
  }
}

json step_to_json(const StepFactors& f) {
  json out;
  out["lambda"] = std::vector<double>(f.susceptibility.diag().begin(),
                                      f.susceptibility.diag().end());
  json rows = json::array();
  const Eigen::MatrixXd& w = f.weights.entries();
  for (Eigen::Index i = 0; i < w.rows(); ++i) {
    rows.push_back(std::vector<double>(w.row(i).begin(), w.row(i).end()));
  }
  out["weights"] = rows;
  return out;
}

json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    rows.push_back(std::vector<double>(m.row(i).begin(), m.row(i).end()));
  }
  return rows;
}

json vector_to_json(const Eigen::VectorXd& v) {
  return json(std::vector<double>(v.begin(), v.end()));
}

std::string format_g12(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

const std::set<std::string>& known_outputs() {
  static const std::set<std::string> outputs = {"trajectory", "norm_trace", "windows",
                                                "verdict",    "phases",     "omega",
                                                "robustness"};
  return outputs;
}

bool wants(const Scenario& scenario, const std::string& what) {
  if (scenario.outputs.empty()) return true;
  return std::find(scenario.outputs.begin(), scenario.outputs.end(), what) !=
         scenario.outputs.end();
}

ScheduleSpec parse_schedule_spec(const json& v, int agents, const std::string& origin) {
  const std::string path = "schedule";
  const std::string kind =
      require_field(v, "kind", origin, path).get<std::string>();
  if (kind == "explicit") {
    ExplicitScheduleSpec spec;
    if (v.contains("start_time")) {
      spec.start_time = as_int(v.at("start_time"), origin, path + ".start_time");
    }
    const json& steps = require_field(v, "steps", origin, path);
    if (!steps.is_array() || steps.empty()) fail(origin, path + ".steps", "expected steps");
    for (std::size_t k = 0; k < steps.size(); ++k) {
      spec.steps.push_back(
          parse_step(steps[k], origin, path + ".steps[" + std::to_string(k) + "]"));
      if (spec.steps.back().weights.size() != agents) {
        fail(origin, path + ".steps[" + std::to_string(k) + "]",
             "step size disagrees with 'agents'");
      }
    }
    return spec;
  }
  if (kind == "periodic") {
    PeriodicScheduleSpec spec;
    const json& phases = require_field(v, "phases", origin, path);
    if (!phases.is_array() || phases.empty()) fail(origin, path + ".phases", "expected phases");
    for (std::size_t k = 0; k < phases.size(); ++k) {
      spec.phases.push_back(
          parse_step(phases[k], origin, path + ".phases[" + std::to_string(k) + "]"));
      if (spec.phases.back().weights.size() != agents) {
        fail(origin, path + ".phases[" + std::to_string(k) + "]",
             "phase size disagrees with 'agents'");
      }
    }
    return spec;
  }
  if (kind == "trust") {
    const Eigen::MatrixXd trust =
        parse_matrix(require_field(v, "trust_matrix", origin, path), origin,
                     path + ".trust_matrix");
    if (trust.rows() != agents) fail(origin, path + ".trust_matrix", "size disagrees with 'agents'");
    InfluenceMatrix trust_matrix = [&] {
      try {
        return InfluenceMatrix(trust);
      } catch (const ValidationError& e) {
        fail(origin, path + ".trust_matrix", e.what());
      }
    }();
    std::vector<Eigen::MatrixXi> cycle;
    const json& adjacency = require_field(v, "adjacency_cycle", origin, path);
    if (!adjacency.is_array() || adjacency.empty()) {
      fail(origin, path + ".adjacency_cycle", "expected at least one adjacency layer");
    }
    for (std::size_t k = 0; k < adjacency.size(); ++k) {
      cycle.push_back(parse_adjacency(adjacency[k], origin,
                                      path + ".adjacency_cycle[" + std::to_string(k) + "]"));
      if (cycle.back().rows() != agents) {
        fail(origin, path + ".adjacency_cycle[" + std::to_string(k) + "]",
             "size disagrees with 'agents'");
      }
    }
    const json& susceptibility = require_field(v, "susceptibility", origin, path);
    const Eigen::VectorXd fallback =
        parse_vector(require_field(susceptibility, "fallback", origin, path + ".susceptibility"),
                     origin, path + ".susceptibility.fallback");
    if (fallback.size() != agents) {
      fail(origin, path + ".susceptibility.fallback", "size disagrees with 'agents'");
    }
    std::map<std::pair<int, std::vector<int>>, double> entries;
    if (susceptibility.contains("table")) {
      const json& table = susceptibility.at("table");
      if (!table.is_array()) fail(origin, path + ".susceptibility.table", "expected an array");
      for (std::size_t k = 0; k < table.size(); ++k) {
        const std::string entry_path =
            path + ".susceptibility.table[" + std::to_string(k) + "]";
        const json& entry = table[k];
        const int agent = as_int(require_field(entry, "agent", origin, entry_path), origin,
                                 entry_path + ".agent");
        if (agent < 0 || agent >= agents) fail(origin, entry_path + ".agent", "out of range");
        std::vector<int> neighbors;
        for (const json& nb : require_field(entry, "neighbors", origin, entry_path)) {
          neighbors.push_back(as_int(nb, origin, entry_path + ".neighbors"));
        }
        std::sort(neighbors.begin(), neighbors.end());
        entries[{agent, neighbors}] = as_double(
            require_field(entry, "lambda", origin, entry_path), origin, entry_path + ".lambda");
      }
    }
    TrustScheduleSpec spec{std::move(trust_matrix), std::move(cycle),
                           SusceptibilityRule::table(fallback, std::move(entries))};
    return spec;
  }
  if (kind == "preset") {
    PresetScheduleSpec spec;
    spec.name = require_field(v, "preset", origin, path).get<std::string>();
    if (v.contains("d")) spec.d = as_int(v.at("d"), origin, path + ".d");
    if (spec.name != "example1" && spec.name != "example2" && spec.name != "example3" &&
        spec.name != "example3_variant") {
      fail(origin, path + ".preset", "unknown preset '" + spec.name + "'");
    }
    if (spec.d < 1) fail(origin, path + ".d", "d must be >= 1");
    return spec;
  }
  fail(origin, path + ".kind", "unknown schedule kind '" + kind + "'");
}

json schedule_spec_to_json(const ScheduleSpec& spec) {
  json out;
  if (const auto* e = std::get_if<ExplicitScheduleSpec>(&spec)) {
    out["kind"] = "explicit";
    out["start_time"] = e->start_time;
    json steps = json::array();
    for (const StepFactors& f : e->steps) steps.push_back(step_to_json(f));
    out["steps"] = steps;
  } else if (const auto* p = std::get_if<PeriodicScheduleSpec>(&spec)) {
    out["kind"] = "periodic";
    json phases = json::array();
    for (const StepFactors& f : p->phases) phases.push_back(step_to_json(f));
    out["phases"] = phases;
  } else if (const auto* t = std::get_if<TrustScheduleSpec>(&spec)) {
    out["kind"] = "trust";
    out["trust_matrix"] = matrix_to_json(t->trust.entries());
    json cycle = json::array();
    for (const Eigen::MatrixXi& a : t->adjacency_cycle) {
      json rows = json::array();
      for (Eigen::Index i = 0; i < a.rows(); ++i) {
        std::vector<int> row(static_cast<std::size_t>(a.cols()));
        for (Eigen::Index j = 0; j < a.cols(); ++j) row[static_cast<std::size_t>(j)] = a(i, j);
        rows.push_back(row);
      }
      cycle.push_back(rows);
    }
    out["adjacency_cycle"] = cycle;
    json susceptibility;
    susceptibility["fallback"] = vector_to_json(t->rule.fallback());
    if (!t->rule.entries().empty()) {
      json table = json::array();
      for (const auto& [key, value] : t->rule.entries()) {
        json entry;
        entry["agent"] = key.first;
        entry["neighbors"] = key.second;
        entry["lambda"] = value;
        table.push_back(entry);
      }
      susceptibility["table"] = table;
    }
    out["susceptibility"] = susceptibility;
  } else if (const auto* pr = std::get_if<PresetScheduleSpec>(&spec)) {
    out["kind"] = "preset";
    out["preset"] = pr->name;
    out["d"] = pr->d;
  }
  return out;
}

bool steps_equal(const std::vector<StepFactors>& a, const std::vector<StepFactors>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (a[k].susceptibility.diag() != b[k].susceptibility.diag()) return false;
    if (a[k].weights.entries() != b[k].weights.entries()) return false;
  }
  return true;
}

bool schedule_spec_equal(const ScheduleSpec& a, const ScheduleSpec& b) {
  if (a.index() != b.index()) return false;
  if (const auto* ea = std::get_if<ExplicitScheduleSpec>(&a)) {
    const auto* eb = std::get_if<ExplicitScheduleSpec>(&b);
    return ea->start_time == eb->start_time && steps_equal(ea->steps, eb->steps);
  }
  if (const auto* pa = std::get_if<PeriodicScheduleSpec>(&a)) {
    const auto* pb = std::get_if<PeriodicScheduleSpec>(&b);
    return steps_equal(pa->phases, pb->phases);
  }
  if (const auto* ta = std::get_if<TrustScheduleSpec>(&a)) {
    const auto* tb = std::get_if<TrustScheduleSpec>(&b);
    if (ta->trust.entries() != tb->trust.entries()) return false;
    if (ta->adjacency_cycle.size() != tb->adjacency_cycle.size()) return false;
    for (std::size_t k = 0; k < ta->adjacency_cycle.size(); ++k) {
      if (ta->adjacency_cycle[k] != tb->adjacency_cycle[k]) return false;
    }
    return ta->rule.fallback() == tb->rule.fallback() &&
           ta->rule.entries() == tb->rule.entries();
  }
  const auto* ra = std::get_if<PresetScheduleSpec>(&a);
  const auto* rb = std::get_if<PresetScheduleSpec>(&b);
  return ra->name == rb->name && ra->d == rb->d;
}

}  // namespace

Schedule Scenario::build_schedule() const {
  if (const auto* e = std::get_if<ExplicitScheduleSpec>(&schedule)) {
    return Schedule::explicit_sequence(e->steps, e->start_time);
  }
  if (const auto* p = std::get_if<PeriodicScheduleSpec>(&schedule)) {
    return Schedule::periodic(p->phases);
  }
  if (const auto* t = std::get_if<TrustScheduleSpec>(&schedule)) {
    // Resolve the adjacency cycle once; the result is an ordinary periodic
    // schedule with per-phase caching.
    const int p = static_cast<int>(t->adjacency_cycle.size());
    TrustConfig config{t->trust,
                       [cycle = t->adjacency_cycle, p](int time) {
                         return cycle[static_cast<std::size_t>(((time % p) + p) % p)];
                       },
                       t->rule};
    std::vector<StepFactors> phases;
    phases.reserve(static_cast<std::size_t>(p));
    for (int l = 0; l < p; ++l) phases.push_back(trust_based_resolve(config, l));
    return Schedule::periodic(std::move(phases));
  }
  const auto& preset = std::get<PresetScheduleSpec>(schedule);
  if (preset.name == "example1") return presets::example1_schedule();
  if (preset.name == "example2") return presets::example2_schedule(preset.d);
  if (preset.name == "example3") return presets::example3_schedule(false);
  return presets::example3_schedule(true);  // example3_variant
}

bool Scenario::operator==(const Scenario& other) const {
  return name == other.name && agents == other.agents &&
         innate.values() == other.innate.values() &&
         initial.has_value() == other.initial.has_value() &&
         (!initial || initial->values() == other.initial->values()) &&
         schedule_spec_equal(schedule, other.schedule) &&
         analysis.horizon == other.analysis.horizon &&
         analysis.epsilon == other.analysis.epsilon &&
         analysis.w_threshold == other.analysis.w_threshold &&
         analysis.window == other.analysis.window &&
         analysis.decay_tol == other.analysis.decay_tol &&
         analysis.semi_period == other.analysis.semi_period &&
         analysis.switching_windows == other.analysis.switching_windows &&
         analysis.tail_fraction == other.analysis.tail_fraction &&
         analysis.cluster_tol == other.analysis.cluster_tol && outputs == other.outputs;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("load_scenario: cannot open '" + path.string() + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return load_scenario_text(text.str(), path.string());
}

namespace {
Scenario load_scenario_json(const json& doc, const std::string& origin);
}  // namespace

Scenario load_scenario_text(const std::string& text, const std::string& origin) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(origin + ": " + e.what());
  }
  if (!doc.is_object()) throw ValidationError(origin + ": scenario must be a JSON object");
  try {
    return load_scenario_json(doc, origin);
  } catch (const json::exception& e) {
    throw ValidationError(origin + ": " + e.what());
  }
}

namespace {

Scenario load_scenario_json(const json& doc, const std::string& origin) {
  const int agents = as_int(require_field(doc, "agents", origin, "scenario"), origin, "agents");
  if (agents < 1) fail(origin, "agents", "must be >= 1");

  const Eigen::VectorXd innate =
      parse_vector(require_field(doc, "innate", origin, "scenario"), origin, "innate");
  if (innate.size() != agents) fail(origin, "innate", "length disagrees with 'agents'");

  Scenario scenario{
      require_field(doc, "name", origin, "scenario").get<std::string>(),
      agents,
      [&] {
        try {
          return OpinionVector(innate);
        } catch (const ValidationError& e) {
          fail(origin, "innate", e.what());
        }
      }(),
      std::nullopt,
      parse_schedule_spec(require_field(doc, "schedule", origin, "scenario"), agents, origin),
      AnalysisParams{},
      {}};

  if (doc.contains("initial")) {
    const Eigen::VectorXd initial = parse_vector(doc.at("initial"), origin, "initial");
    if (initial.size() != agents) fail(origin, "initial", "length disagrees with 'agents'");
    try {
      scenario.initial = OpinionVector(initial);
    } catch (const ValidationError& e) {
      fail(origin, "initial", e.what());
    }
  }

  if (doc.contains("analysis")) {
    const json& a = doc.at("analysis");
    AnalysisParams& params = scenario.analysis;
    if (a.contains("horizon")) params.horizon = as_int(a.at("horizon"), origin, "analysis.horizon");
    if (a.contains("epsilon")) params.epsilon = as_double(a.at("epsilon"), origin, "analysis.epsilon");
    if (a.contains("w_threshold")) {
      params.w_threshold = as_double(a.at("w_threshold"), origin, "analysis.w_threshold");
    }
    if (a.contains("window")) params.window = as_int(a.at("window"), origin, "analysis.window");
    if (a.contains("decay_tol")) {
      params.decay_tol = as_double(a.at("decay_tol"), origin, "analysis.decay_tol");
    }
    if (a.contains("semi_period")) {
      params.semi_period = as_int(a.at("semi_period"), origin, "analysis.semi_period");
    }
    if (a.contains("switching_windows")) {
      if (!a.at("switching_windows").is_boolean()) {
        fail(origin, "analysis.switching_windows", "expected a boolean");
      }
      params.switching_windows = a.at("switching_windows").get<bool>();
    }
    if (a.contains("tail_fraction")) {
      params.tail_fraction = as_double(a.at("tail_fraction"), origin, "analysis.tail_fraction");
    }
    if (a.contains("cluster_tol")) {
      params.cluster_tol = as_double(a.at("cluster_tol"), origin, "analysis.cluster_tol");
    }
    if (params.horizon < 0) fail(origin, "analysis.horizon", "must be >= 0");
    if (!(params.epsilon > 0.0 && params.epsilon <= 1.0)) {
      fail(origin, "analysis.epsilon", "must lie in (0,1]");
    }
    if (!(params.w_threshold > 0.0 && params.w_threshold <= 1.0)) {
      fail(origin, "analysis.w_threshold", "must lie in (0,1]");
    }
    if (params.window < 1) fail(origin, "analysis.window", "must be >= 1");
    if (!(params.decay_tol > 0.0)) fail(origin, "analysis.decay_tol", "must be positive");
    if (params.semi_period && *params.semi_period < 1) {
      fail(origin, "analysis.semi_period", "must be >= 1");
    }
    if (!(params.tail_fraction > 0.0 && params.tail_fraction <= 0.5)) {
      fail(origin, "analysis.tail_fraction", "must lie in (0, 0.5]");
    }
    if (!(params.cluster_tol > 0.0)) fail(origin, "analysis.cluster_tol", "must be positive");
  }

  if (doc.contains("outputs")) {
    for (const json& o : doc.at("outputs")) {
      const std::string value = o.get<std::string>();
      if (known_outputs().count(value) == 0) fail(origin, "outputs", "unknown output '" + value + "'");
      scenario.outputs.push_back(value);
    }
  }

  if (const auto* preset = std::get_if<PresetScheduleSpec>(&scenario.schedule)) {
    const int expected = preset->name == "example1" ? 3 : 5;
    if (agents != expected) {
      fail(origin, "agents",
           "preset '" + preset->name + "' needs " + std::to_string(expected) + " agents");
    }
  }

  // Instantiating the schedule exercises the full module validation stack;
  // rule-based presets are probed at their start time.
  try {
    const Schedule built = scenario.build_schedule();
    (void)built.at(built.start_time());
  } catch (const ValidationError& e) {
    fail(origin, "schedule", e.what());
  }
  return scenario;
}

}  // namespace

std::string serialize_scenario(const Scenario& scenario) {
  json doc;
  doc["name"] = scenario.name;
  doc["agents"] = scenario.agents;
  doc["innate"] = vector_to_json(scenario.innate.values());
  if (scenario.initial) doc["initial"] = vector_to_json(scenario.initial->values());
  doc["schedule"] = schedule_spec_to_json(scenario.schedule);
  json analysis;
  analysis["horizon"] = scenario.analysis.horizon;
  analysis["epsilon"] = scenario.analysis.epsilon;
  analysis["w_threshold"] = scenario.analysis.w_threshold;
  analysis["window"] = scenario.analysis.window;
  analysis["decay_tol"] = scenario.analysis.decay_tol;
  if (scenario.analysis.semi_period) analysis["semi_period"] = *scenario.analysis.semi_period;
  analysis["switching_windows"] = scenario.analysis.switching_windows;
  analysis["tail_fraction"] = scenario.analysis.tail_fraction;
  analysis["cluster_tol"] = scenario.analysis.cluster_tol;
  doc["analysis"] = analysis;
  if (!scenario.outputs.empty()) doc["outputs"] = scenario.outputs;
  return doc.dump(2) + "\n";
}

ReportBundle run(const Scenario& scenario) {
  const Schedule schedule = scenario.build_schedule();
  const AnalysisParams& params = scenario.analysis;
  ReportBundle bundle;
  bundle.scenario_name = scenario.name;
  bundle.params = params;
  bundle.start_time = schedule.start_time();

  const OpinionVector x0 = scenario.initial.value_or(scenario.innate);
  if (wants(scenario, "trajectory")) {
    bundle.trajectory = simulate(x0, scenario.innate, schedule, params.horizon);
  }
  if (wants(scenario, "norm_trace") || wants(scenario, "verdict")) {
    bundle.norm_trace = transition_norm_trace(schedule, params.horizon);
  }

  // the analysis parameter wins; a schedule tagged semi-periodic supplies the
  // period when the scenario does not
  const std::optional<int> semi_period =
      params.semi_period ? params.semi_period : schedule.semi_period();

  const bool needs_windows = wants(scenario, "windows") || wants(scenario, "verdict");
  std::vector<TemporalLayer> layers;
  if (needs_windows || semi_period) {
    layers = schedule.layers(schedule.start_time(), params.horizon);
  }

  if (needs_windows && !layers.empty()) {
    const auto* preset = std::get_if<PresetScheduleSpec>(&scenario.schedule);
    if (params.switching_windows && preset && preset->name == "example2") {
      std::vector<int> boundaries = example2_switching_times(preset->d, params.horizon);
      if (boundaries.size() >= 2) {
        bundle.window_reports = scan_at_boundaries(layers, boundaries, params.epsilon,
                                                   params.w_threshold);
      } else {
        bundle.warnings.push_back("horizon too short for switching windows");
      }
    } else {
      bundle.window_reports =
          scan_windows(layers, params.window, params.epsilon, params.w_threshold);
    }
  }

  if (wants(scenario, "verdict") && !bundle.window_reports.empty()) {
    std::vector<double> measured;
    const int t0 = schedule.start_time();
    for (const DefectReport& report : bundle.window_reports) {
      const std::size_t offset = static_cast<std::size_t>(report.window_end - t0);
      if (offset < bundle.norm_trace.size()) measured.push_back(bundle.norm_trace[offset]);
    }
    bundle.verdict = scan_stability_verdict(bundle.window_reports, measured, params.decay_tol);
  }

  if (wants(scenario, "robustness") && semi_period) {
    const int p_s = *semi_period;
    bundle.spfj_premise_checked = true;
    bundle.spfj_premise_holds = true;
    for (int offset = 0; offset + p_s <= static_cast<int>(layers.size()); ++offset) {
      std::vector<TemporalLayer> chunk(layers.begin() + offset, layers.begin() + offset + p_s);
      const int window_start = chunk.front().time();
      const TemporalGraphWindow window(window_start, std::move(chunk));
      if (!detect_certificate(window, params.epsilon, params.w_threshold).is_dtg) {
        bundle.spfj_premise_holds = false;
        std::ostringstream why;
        why << "SPFJ premise fails: window [" << window.start() << "," << window.end()
            << ") is not a DTG; falling back to per-window union bounds";
        bundle.warnings.push_back(why.str());
        break;
      }
    }
    if (bundle.spfj_premise_holds) {
      bundle.spfj_certificate = semi_periodic_certificate(params.epsilon, params.w_threshold, p_s);
      bundle.spfj_threshold = robustness_threshold(*bundle.spfj_certificate);
    }
  }

  const bool periodic = schedule.kind() == ScheduleKind::periodic;
  if (periodic && (wants(scenario, "phases") || wants(scenario, "omega") ||
                   wants(scenario, "robustness"))) {
    const int p = *schedule.period();
    std::vector<StepFactors> phases;
    phases.reserve(static_cast<std::size_t>(p));
    for (int l = 0; l < p; ++l) phases.push_back(schedule.at(l));
    std::vector<PhaseSystem> systems = build_phase_systems(phases);
    try {
      if (wants(scenario, "robustness")) {
        bundle.psfj_certificate = periodic_cycle_certificate(systems);
        bundle.psfj_threshold = robustness_threshold(*bundle.psfj_certificate);
      }
      if (wants(scenario, "phases") || wants(scenario, "omega")) {
        bundle.phase_analysis = phase_fixed_points(std::move(systems), scenario.innate);
      }
    } catch (const CertificateUnavailable& e) {
      bundle.warnings.push_back(e.what());
    }
  }

  if (wants(scenario, "omega")) {
    if (bundle.trajectory.empty()) {
      bundle.trajectory = simulate(x0, scenario.innate, schedule, params.horizon);
    }
    if (bundle.trajectory.size() >= 10) {
      bundle.omega_tail =
          tail_omega_estimate(bundle.trajectory, params.tail_fraction, params.cluster_tol);
    } else {
      bundle.warnings.push_back("horizon too short for tail omega estimation");
    }
    const OmegaEstimate* estimate = bundle.phase_analysis
                                        ? &bundle.phase_analysis->distinct
                                        : (bundle.omega_tail ? &*bundle.omega_tail : nullptr);
    if (estimate) bundle.containment = containment_check(*estimate, scenario.innate);
  }

  return bundle;
}

namespace {

json report_to_json(const ReportBundle& bundle) {
  json doc;
  doc["scenario"] = bundle.scenario_name;
  json params;
  params["horizon"] = bundle.params.horizon;
  params["epsilon"] = bundle.params.epsilon;
  params["w_threshold"] = bundle.params.w_threshold;
  params["window"] = bundle.params.window;
  params["decay_tol"] = bundle.params.decay_tol;
  if (bundle.params.semi_period) params["semi_period"] = *bundle.params.semi_period;
  params["switching_windows"] = bundle.params.switching_windows;
  doc["params"] = params;

  if (bundle.verdict) {
    const ScanVerdict& v = *bundle.verdict;
    json verdict;
    switch (v.verdict) {
      case StabilityVerdict::certified_decaying: verdict["kind"] = "certified-decaying"; break;
      case StabilityVerdict::certificate_trend: verdict["kind"] = "certificate-trend"; break;
      case StabilityVerdict::inconclusive: verdict["kind"] = "inconclusive"; break;
    }
    verdict["window_count"] = v.window_count;
    verdict["dtg_count"] = v.dtg_count;
    verdict["wdtg_count"] = v.wdtg_count;
    verdict["bound_product"] = v.bound_product;
    verdict["trace_consistent"] = v.trace_consistent;
    verdict["explanation"] = v.explanation;
    doc["verdict"] = verdict;
  }

  const auto certificate_to_json = [](const ExponentialCertificate& cert) {
    json out;
    out["kind"] = cert.kind == CertificateKind::spfj ? "spfj" : "psfj";
    out["growth_factor"] = cert.growth_factor;
    out["decay_rate"] = cert.decay_rate;
    out["period"] = cert.period;
    if (cert.base) out["base"] = *cert.base;
    return out;
  };
  const auto threshold_to_json = [](const RobustnessThreshold& threshold) {
    json out;
    out["threshold"] = threshold.threshold;
    if (threshold.specialized) out["specialized"] = *threshold.specialized;
    return out;
  };
  if (bundle.spfj_premise_checked) {
    doc["spfj_premise_holds"] = bundle.spfj_premise_holds;
  }
  if (bundle.spfj_certificate) {
    doc["spfj_certificate"] = certificate_to_json(*bundle.spfj_certificate);
    doc["spfj_threshold"] = threshold_to_json(*bundle.spfj_threshold);
  }
  if (bundle.psfj_certificate) {
    doc["psfj_certificate"] = certificate_to_json(*bundle.psfj_certificate);
    doc["psfj_threshold"] = threshold_to_json(*bundle.psfj_threshold);
  }

  if (bundle.phase_analysis) {
    json phases = json::array();
    for (const PhaseSystem& system : bundle.phase_analysis->systems) {
      json phase;
      phase["phase"] = system.phase;
      phase["state_map"] = matrix_to_json(system.state_map);
      phase["input_map"] = matrix_to_json(system.input_map);
      if (system.fixed_point) phase["fixed_point"] = vector_to_json(system.fixed_point->values());
      phases.push_back(phase);
    }
    doc["phase_systems"] = phases;
    json points = json::array();
    for (const OpinionVector& point : bundle.phase_analysis->distinct.points) {
      points.push_back(vector_to_json(point.values()));
    }
    doc["omega_closed_form"] = points;
  }
  if (bundle.omega_tail) {
    json points = json::array();
    for (const OpinionVector& point : bundle.omega_tail->points) {
      points.push_back(vector_to_json(point.values()));
    }
    doc["omega_tail"] = points;
  }
  if (bundle.containment) doc["containment"] = *bundle.containment;
  if (!bundle.warnings.empty()) doc["warnings"] = bundle.warnings;
  if (!bundle.norm_trace.empty()) doc["final_norm"] = bundle.norm_trace.back();
  doc["window_count"] = static_cast<int>(bundle.window_reports.size());
  return doc;
}

}  // namespace

void write_report(const ReportBundle& bundle, const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);

  if (!bundle.trajectory.empty()) {
    std::ofstream out(out_dir / "trajectory.csv");
    const Eigen::Index n = bundle.trajectory.front().size();
    out << "t";
    for (Eigen::Index i = 0; i < n; ++i) out << ",x" << i + 1;
    out << "\n";
    for (std::size_t k = 0; k < bundle.trajectory.size(); ++k) {
      out << bundle.start_time + static_cast<int>(k);
      for (Eigen::Index i = 0; i < n; ++i) {
        out << "," << format_g12(bundle.trajectory[k].values()(i));
      }
      out << "\n";
    }
  }

  if (!bundle.norm_trace.empty()) {
    std::ofstream out(out_dir / "norm_trace.csv");
    out << "t,phi_norm\n";
    for (std::size_t k = 0; k < bundle.norm_trace.size(); ++k) {
      out << bundle.start_time + static_cast<int>(k) << "," << format_g12(bundle.norm_trace[k])
          << "\n";
    }
  }

  if (!bundle.window_reports.empty()) {
    std::ofstream out(out_dir / "windows.csv");
    out << "start,end,delta,is_dtg,is_wdtg,defected_time,uncovered,truncated\n";
    for (const DefectReport& report : bundle.window_reports) {
      out << report.window_start << "," << report.window_end << "," << report.effective_delta
          << "," << (report.is_dtg ? 1 : 0) << "," << (report.is_wdtg ? 1 : 0) << ",";
      if (report.defected_time) out << *report.defected_time;
      out << ",";
      for (std::size_t k = 0; k < report.uncovered_agents.size(); ++k) {
        if (k > 0) out << ';';
        out << report.uncovered_agents[k];
      }
      out << "," << (report.truncated ? 1 : 0) << "\n";
    }
  }

  std::ofstream out(out_dir / "report.json");
  out << report_to_json(bundle).dump(2) << "\n";
}

}  // namespace tvfj
