#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tvfj/pslti.hpp"
#include "tvfj/temporal_graph.hpp"

namespace tvfj {

/// Contraction factor for one certified window: ‖Φ‖ ≤ 1 − ε·w^δ.
struct ContractionBound {
  double bound = 1.0;  // in (0,1)
  double epsilon = 0.0;
  double w_threshold = 0.0;
  int delta = 0;
  std::string source = "dtg-window";
};

/// 1 − ε·w^δ for a DTG window, with δ the full window length. Requires
/// ε ∈ (0,1) and w ∈ (0,1]; the ε = 1 boundary is rejected because the bound
/// degenerates to 0 and Λ would have to vanish. Non-DTG reports raise
/// CertificateUnavailable.
ContractionBound window_contraction_bound(const DefectReport& report);

/// Product of per-window contraction bounds over consecutive disjoint
/// windows; non-DTG windows contribute a factor of 1. Windows must be
/// contiguous (each report's end equals the next report's start).
double partition_contraction_bound(std::span<const DefectReport> reports);

enum class StabilityVerdict { certified_decaying, certificate_trend, inconclusive };

/// Finite-horizon reading of the recurring-DTG stability condition. The
/// artifact never claims infinite-horizon stability from finite data: it
/// certifies decay of the bound product below a tolerance, or reports the
/// DTG recurrence trend, or declares the scan inconclusive.
struct ScanVerdict {
  StabilityVerdict verdict = StabilityVerdict::inconclusive;
  int window_count = 0;
  int dtg_count = 0;
  int wdtg_count = 0;
  int last_dtg_index = -1;
  double bound_product = 1.0;
  /// Cumulative contraction bound after each window.
  std::vector<double> bound_trace;
  /// True when every supplied measured norm stays below the bound trace.
  bool trace_consistent = true;
  std::string explanation;
};

/// Classifies a window scan:
///  - certified_decaying when the bound product falls below decay_tol;
///  - certificate_trend when DTG windows keep recurring (one lands in the
///    trailing half of the scan) without the product reaching decay_tol;
///  - inconclusive otherwise.
/// measured_norm_trace, when given, holds ‖Φ(boundary, start)‖ per window
/// boundary and is cross-checked against the bound trace.
ScanVerdict scan_stability_verdict(std::span<const DefectReport> reports,
                                   std::span<const double> measured_norm_trace = {},
                                   double decay_tol = 1e-9);

/// Stationary stability test: with constant (W, Λ), the system is
/// asymptotically stable iff the layer replicated n times forms a WDTG —
/// every agent is stubborn or reaches a stubborn agent within n−1 listening
/// hops.
bool stationary_stability_check(const InfluenceMatrix& w, const SusceptibilityMatrix& lambda);

enum class CertificateKind { spfj, psfj };

/// Exponential-stability certificate ‖Φ(t,τ)‖ ≤ c·γ^{t−τ}.
struct ExponentialCertificate {
  CertificateKind kind = CertificateKind::spfj;
  double growth_factor = 1.0;  // c ≥ 1
  double decay_rate = 1.0;     // γ in (0,1)
  int period = 1;              // p_s or p
  /// Underlying contraction base: 1 − εw^{p_s} (SPFJ) or ‖Φ(p,0)‖ (PSFJ).
  /// Absent for hand-built certificates.
  std::optional<double> base;
};

/// SPFJ constants c = (1 − εw^{p_s})^{-p_s}, γ = (1 − εw^{p_s})^{1/p_s}.
ExponentialCertificate semi_periodic_certificate(double epsilon, double w_threshold,
                                                 int semi_period);

/// PSFJ constants c = ‖Φ(p,0)‖^{-p}, γ = ‖Φ(p,0)‖^{1/p}, using Φ(p,0) = M_p
/// from the p-LTI decomposition. Raises CertificateUnavailable when
/// ‖Φ(p,0)‖ ≥ 1 (the window [0,p) is not even weakly defected).
ExponentialCertificate periodic_cycle_certificate(std::span<const PhaseSystem> systems);

struct RobustnessThreshold {
  double threshold = 0.0;  // −(γ/c)·ln γ
  /// Specialized closed form evaluated from (kind, period, base); equals the
  /// generic value to 1e-12 whenever base is present.
  std::optional<double> specialized;
  ExponentialCertificate derived_from;
};

/// Perturbation budget −(γ/c)·ln γ under which exponential stability
/// persists. Requires γ ∈ (0,1).
RobustnessThreshold robustness_threshold(const ExponentialCertificate& certificate);

}  // namespace tvfj
