#include <CLI11.hpp>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <iostream>
#include <mutex>
#include <thread>
#include <vector>

#include "tvfj/scenario.hpp"

namespace {

namespace fs = std::filesystem;

struct CommonOptions {
  std::vector<std::string> scenarios;
  std::string out_dir;
  int jobs = 1;
  int horizon = -1;
  double epsilon = -1.0;
  double w_threshold = -1.0;
  int window = -1;
};

void add_common(CLI::App* cmd, CommonOptions& options) {
  cmd->add_option("--scenario", options.scenarios, "Scenario file (repeatable)")
      ->required()
      ->check(CLI::ExistingFile);
  cmd->add_option("--out-dir", options.out_dir, "Output directory (default $TVFJ_OUT_DIR or .)");
  cmd->add_option("--horizon", options.horizon, "Override analysis horizon");
  cmd->add_option("--epsilon", options.epsilon, "Override stubbornness threshold");
  cmd->add_option("--w-threshold", options.w_threshold, "Override edge-weight threshold");
  cmd->add_option("--window", options.window, "Override scan window length");
  cmd->add_option("--jobs", options.jobs, "Concurrent scenario runs")->check(CLI::PositiveNumber);
}

fs::path resolve_out_dir(const CommonOptions& options) {
  if (!options.out_dir.empty()) return options.out_dir;
  if (const char* env = std::getenv("TVFJ_OUT_DIR"); env && *env) return env;
  return ".";
}

std::vector<std::string> outputs_for_verb(const std::string& verb) {
  if (verb == "simulate") return {"trajectory", "norm_trace"};
  if (verb == "certify") return {"windows", "verdict", "norm_trace"};
  if (verb == "decompose") return {"phases"};
  if (verb == "omega") return {"phases", "omega", "trajectory"};
  if (verb == "robustness") return {"robustness"};
  return {};
}

void print_summary(const tvfj::ReportBundle& bundle, const fs::path& where) {
  std::cout << bundle.scenario_name << ": wrote " << where.string() << "\n";
  if (bundle.verdict) {
    std::cout << "  verdict: " << bundle.verdict->explanation << "\n";
    std::cout << "  windows: " << bundle.verdict->dtg_count << " DTG / "
              << bundle.verdict->wdtg_count << " WDTG of " << bundle.verdict->window_count
              << ", bound product " << bundle.verdict->bound_product << "\n";
  }
  if (bundle.spfj_certificate) {
    std::cout << "  SPFJ: c=" << bundle.spfj_certificate->growth_factor
              << " gamma=" << bundle.spfj_certificate->decay_rate
              << " threshold=" << bundle.spfj_threshold->threshold << "\n";
  }
  if (bundle.psfj_certificate) {
    std::cout << "  PSFJ: c=" << bundle.psfj_certificate->growth_factor
              << " gamma=" << bundle.psfj_certificate->decay_rate
              << " threshold=" << bundle.psfj_threshold->threshold << "\n";
  }
  if (bundle.phase_analysis) {
    std::cout << "  omega points (closed form): " << bundle.phase_analysis->distinct.points.size()
              << "\n";
  }
  if (bundle.omega_tail) {
    std::cout << "  omega points (tail): " << bundle.omega_tail->points.size() << "\n";
  }
  if (bundle.containment) {
    std::cout << "  containment: " << (*bundle.containment ? "yes" : "no") << "\n";
  }
  for (const std::string& warning : bundle.warnings) {
    std::cout << "  warning: " << warning << "\n";
  }
}

// A verb whose analysis could not be produced is a failure (exit 3), not a
// silent omission; run() records the reason as a warning.
void require_verb_outputs(const std::string& verb, const tvfj::ReportBundle& bundle) {
  const auto unavailable = [&](const char* what) {
    std::string why = bundle.scenario_name + ": " + what;
    for (const std::string& warning : bundle.warnings) why += "; " + warning;
    throw tvfj::CertificateUnavailable(why);
  };
  if (verb == "decompose" && !bundle.phase_analysis) {
    unavailable("p-LTI decomposition unavailable");
  }
  if (verb == "omega" && !bundle.phase_analysis && !bundle.omega_tail) {
    unavailable("no omega-limit estimate available");
  }
  if (verb == "robustness" && !bundle.spfj_threshold && !bundle.psfj_threshold) {
    unavailable("no exponential certificate available (set analysis.semi_period or use a "
                "periodic schedule, and ensure the contraction premise holds)");
  }
}

int run_verb(const std::string& verb, const CommonOptions& options) {
  const fs::path out_root = resolve_out_dir(options);
  const bool single = options.scenarios.size() == 1;

  struct Job {
    tvfj::Scenario scenario;
    fs::path out_dir;
  };
  std::vector<Job> jobs;
  for (const std::string& path : options.scenarios) {
    tvfj::Scenario scenario = tvfj::load_scenario(path);
    if (options.horizon >= 0) scenario.analysis.horizon = options.horizon;
    if (options.epsilon > 0.0) scenario.analysis.epsilon = options.epsilon;
    if (options.w_threshold > 0.0) scenario.analysis.w_threshold = options.w_threshold;
    if (options.window > 0) {
      scenario.analysis.window = options.window;
      scenario.analysis.switching_windows = false;
    }
    scenario.outputs = outputs_for_verb(verb);
    if (verb == "decompose") {
      const auto* preset = std::get_if<tvfj::PresetScheduleSpec>(&scenario.schedule);
      const bool periodic =
          std::holds_alternative<tvfj::PeriodicScheduleSpec>(scenario.schedule) ||
          std::holds_alternative<tvfj::TrustScheduleSpec>(scenario.schedule) ||
          (preset && (preset->name == "example3" || preset->name == "example3_variant"));
      if (!periodic) {
        throw tvfj::ValidationError("decompose: scenario '" + scenario.name +
                                    "' has no periodic schedule");
      }
    }
    fs::path out_dir = single ? out_root : out_root / scenario.name;
    jobs.push_back({std::move(scenario), std::move(out_dir)});
  }

  std::mutex io_mutex;
  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::atomic<std::size_t> next{0};
  const int worker_count = std::min<int>(options.jobs, static_cast<int>(jobs.size()));

  const auto worker = [&] {
    for (;;) {
      const std::size_t index = next.fetch_add(1);
      if (index >= jobs.size()) return;
      try {
        tvfj::ReportBundle bundle = tvfj::run(jobs[index].scenario);
        require_verb_outputs(verb, bundle);
        tvfj::write_report(bundle, jobs[index].out_dir);
        std::lock_guard<std::mutex> lock(io_mutex);
        print_summary(bundle, jobs[index].out_dir / "report.json");
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };

  if (worker_count <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int k = 0; k < worker_count; ++k) pool.emplace_back(worker);
    for (std::thread& thread : pool) thread.join();
  }
  if (first_error) std::rethrow_exception(first_error);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulation and stability certification of time-varying Friedkin-Johnsen "
               "opinion dynamics over temporal graphs"};
  app.require_subcommand(1);

  CommonOptions options;
  for (const char* verb : {"simulate", "certify", "decompose", "omega", "robustness"}) {
    add_common(app.add_subcommand(verb), options);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  const std::string verb = app.get_subcommands().front()->get_name();
  try {
    return run_verb(verb, options);
  } catch (const tvfj::CertificateUnavailable& e) {
    std::cerr << "certificate unavailable: " << e.what() << "\n";
    return 3;
  } catch (const tvfj::ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
