#include "tvfj/certificates.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace tvfj {

ContractionBound window_contraction_bound(const DefectReport& report) {
  if (!report.is_dtg) {
    std::ostringstream msg;
    msg << "window_contraction_bound: window [" << report.window_start << "," << report.window_end
        << ") is not a DTG";
    throw CertificateUnavailable(msg.str());
  }
  if (!(report.epsilon > 0.0 && report.epsilon < 1.0)) {
    std::ostringstream msg;
    msg << "window_contraction_bound: epsilon = " << report.epsilon
        << " outside (0,1); the bound degenerates at the boundary";
    throw ValidationError(msg.str());
  }
  if (!(report.w_threshold > 0.0 && report.w_threshold <= 1.0)) {
    throw ValidationError("window_contraction_bound: w_threshold must lie in (0,1]");
  }
  if (report.effective_delta < 1) throw ValidationError("window_contraction_bound: delta must be >= 1");

  ContractionBound bound;
  bound.epsilon = report.epsilon;
  bound.w_threshold = report.w_threshold;
  bound.delta = report.effective_delta;
  bound.bound = 1.0 - report.epsilon * std::pow(report.w_threshold, report.effective_delta);
  return bound;
}

double partition_contraction_bound(std::span<const DefectReport> reports) {
  double product = 1.0;
  for (std::size_t k = 0; k < reports.size(); ++k) {
    if (k > 0 && reports[k].window_start != reports[k - 1].window_end) {
      std::ostringstream msg;
      msg << "partition_contraction_bound: window " << k << " starts at " << reports[k].window_start
          << " but the previous window ends at " << reports[k - 1].window_end;
      throw ValidationError(msg.str());
    }
    if (reports[k].is_dtg) product *= window_contraction_bound(reports[k]).bound;
  }
  return product;
}

ScanVerdict scan_stability_verdict(std::span<const DefectReport> reports,
                                 std::span<const double> measured_norm_trace, double decay_tol) {
  ScanVerdict verdict;
  verdict.window_count = static_cast<int>(reports.size());
  double product = 1.0;
  for (std::size_t k = 0; k < reports.size(); ++k) {
    if (k > 0 && reports[k].window_start != reports[k - 1].window_end) {
      throw ValidationError("scan_stability_verdict: reports must cover consecutive windows");
    }
    if (reports[k].is_wdtg) ++verdict.wdtg_count;
    if (reports[k].is_dtg) {
      ++verdict.dtg_count;
      verdict.last_dtg_index = static_cast<int>(k);
      product *= window_contraction_bound(reports[k]).bound;
    }
    verdict.bound_trace.push_back(product);
  }
  verdict.bound_product = product;

  if (!measured_norm_trace.empty()) {
    const std::size_t limit = std::min(measured_norm_trace.size(), verdict.bound_trace.size());
    for (std::size_t k = 0; k < limit; ++k) {
      if (measured_norm_trace[k] > verdict.bound_trace[k] + 1e-9) {
        verdict.trace_consistent = false;
        break;
      }
    }
  }

  std::ostringstream why;
  if (product < decay_tol) {
    verdict.verdict = StabilityVerdict::certified_decaying;
    why << "bound product " << product << " fell below " << decay_tol << " within "
        << verdict.window_count << " windows";
  } else if (verdict.dtg_count > 0 &&
             verdict.last_dtg_index >= verdict.window_count / 2) {
    verdict.verdict = StabilityVerdict::certificate_trend;
    why << verdict.dtg_count << " of " << verdict.window_count
        << " windows are DTGs and they keep recurring; bound product so far " << product;
  } else {
    verdict.verdict = StabilityVerdict::inconclusive;
    if (verdict.dtg_count == 0) {
      why << "no DTG window found";
    } else {
      why << "DTG windows stopped recurring (last at index " << verdict.last_dtg_index << " of "
          << verdict.window_count << ")";
    }
    if (verdict.wdtg_count > 0) {
      why << "; " << verdict.wdtg_count
          << " windows are WDTGs but their contraction factors are not uniformly bounded away"
             " from one";
    }
  }
  verdict.explanation = why.str();
  return verdict;
}

bool stationary_stability_check(const InfluenceMatrix& w, const SusceptibilityMatrix& lambda) {
  validate_pair(lambda, w);
  const int n = static_cast<int>(w.size());
  std::vector<TemporalLayer> layers;
  layers.reserve(static_cast<std::size_t>(n));
  for (int t = 0; t < n; ++t) layers.emplace_back(t, lambda, w);
  return detect_certificate(TemporalGraphWindow(0, std::move(layers)), 1.0, 1.0).is_wdtg;
}

ExponentialCertificate semi_periodic_certificate(double epsilon, double w_threshold, int semi_period) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) {
    throw ValidationError("semi_periodic_certificate: epsilon must lie in (0,1)");
  }
  if (!(w_threshold > 0.0 && w_threshold < 1.0)) {
    throw ValidationError("semi_periodic_certificate: w_threshold must lie in (0,1)");
  }
  if (semi_period < 1) throw ValidationError("semi_periodic_certificate: period must be >= 1");

  const double base = 1.0 - epsilon * std::pow(w_threshold, semi_period);
  ExponentialCertificate cert;
  cert.kind = CertificateKind::spfj;
  cert.period = semi_period;
  cert.base = base;
  cert.growth_factor = 1.0 / std::pow(base, semi_period);
  cert.decay_rate = std::pow(base, 1.0 / semi_period);
  return cert;
}

ExponentialCertificate periodic_cycle_certificate(std::span<const PhaseSystem> systems) {
  if (systems.empty()) throw ValidationError("periodic_cycle_certificate: no phase systems");
  const int p = static_cast<int>(systems.size());
  // M_p is the full-cycle product Φ(p,0).
  const double cycle_norm = max_row_sum_norm(systems.back().state_map);
  if (cycle_norm >= 1.0) {
    std::ostringstream msg;
    msg << "periodic_cycle_certificate: |Phi(p,0)| = " << cycle_norm
        << " >= 1; the cycle window is not weakly defected";
    throw CertificateUnavailable(msg.str());
  }
  ExponentialCertificate cert;
  cert.kind = CertificateKind::psfj;
  cert.period = p;
  cert.base = cycle_norm;
  cert.growth_factor = 1.0 / std::pow(cycle_norm, p);
  cert.decay_rate = std::pow(cycle_norm, 1.0 / p);
  return cert;
}

RobustnessThreshold robustness_threshold(const ExponentialCertificate& certificate) {
  const double gamma = certificate.decay_rate;
  const double c = certificate.growth_factor;
  if (!(gamma > 0.0 && gamma < 1.0)) {
    std::ostringstream msg;
    msg << "robustness_threshold: decay rate " << gamma << " outside (0,1)";
    throw ValidationError(msg.str());
  }
  if (!(c > 0.0)) throw ValidationError("robustness_threshold: growth factor must be positive");

  RobustnessThreshold threshold;
  threshold.derived_from = certificate;
  threshold.threshold = -(gamma / c) * std::log(gamma);
  if (certificate.base.has_value()) {
    const double base = *certificate.base;
    const double p = static_cast<double>(certificate.period);
    threshold.specialized = -(1.0 / p) * std::pow(base, p + 1.0 / p) * std::log(base);
    if (std::abs(*threshold.specialized - threshold.threshold) > 1e-12) {
      std::ostringstream msg;
      msg << "robustness_threshold: specialized form " << *threshold.specialized
          << " disagrees with generic form " << threshold.threshold;
      throw std::logic_error(msg.str());
    }
  }
  return threshold;
}

}  // namespace tvfj
