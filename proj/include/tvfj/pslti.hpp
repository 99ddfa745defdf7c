#pragma once

#include <optional>
#include <span>
#include <vector>

#include "tvfj/dynamics.hpp"
#include "tvfj/stochastic_core.hpp"

namespace tvfj {

/// One LTI subsystem of the p-LTI decomposition:
///   x_l[k+1] = M_l x_l[k] + N_l s,
/// with M_l = ∏_{j=0}^{p-1} Λ_{⟨l+j⟩_p} W_{⟨l+j⟩_p} (later factors on the
/// left) and N_l the matching input map, where ⟨x⟩_p = (x mod p) + 1. Along a
/// trajectory started at t = 0 subsystem l propagates the samples x[kp + l];
/// in particular M_p = Φ(p, 0).
struct PhaseSystem {
  int phase = 1;  // l in 1..p
  Eigen::MatrixXd state_map;   // M_l
  Eigen::MatrixXd input_map;   // N_l
  std::optional<OpinionVector> fixed_point;
};

/// Builds the p subsystems from the phase pairs (phases[l-1] is the pair the
/// schedule applies at times t with t mod p = l-1).
std::vector<PhaseSystem> build_phase_systems(std::span<const StepFactors> phases);

/// Maps a time residue t mod p to the subsystem propagating that sample
/// class: the l in 1..p with l ≡ residue (mod p).
int phase_for_residue(int residue, int period);

enum class OmegaMethod { closed_form, tail_clustering };

/// Estimated ω-limit set: distinct accumulation points of a trajectory.
struct OmegaEstimate {
  std::vector<OpinionVector> points;
  OmegaMethod method = OmegaMethod::closed_form;
  double tolerance = 0.0;
};

struct PhaseFixedPoints {
  /// Input systems with fixed_point filled per phase.
  std::vector<PhaseSystem> systems;
  /// Deduplicated fixed points — the closed-form ω-limit set.
  OmegaEstimate distinct;
};

/// Solves (I − M_l)·x = N_l·s per phase with a partial-pivot LU (no explicit
/// inverse) and deduplicates coincident points in max-norm. Requires the
/// exponential-stability premise ‖Φ(p,0)‖ < 1; a reciprocal condition
/// estimate below 1e-12 raises CertificateUnavailable instead of returning
/// garbage.
PhaseFixedPoints phase_fixed_points(std::vector<PhaseSystem> systems, const OpinionVector& s,
                                    double dedup_tol = 1e-8);

/// Σ[t] = Σ_{τ=t0}^{t-1} Φ(t, τ+1)(I − Λ[τ]), computed by the recursion
/// Σ[t+1] = Λ[t]W[t]Σ[t] + (I − Λ[t]); row sums are checked to stay ≤ 1.
Eigen::MatrixXd sigma_accumulator(const Schedule& schedule, int t);

/// Clusters the trailing tail_fraction of a trajectory by greedy first-fit
/// tolerance balls in max-norm; centroids are the estimated ω-limit points.
OmegaEstimate tail_omega_estimate(const Trajectory& trajectory, double tail_fraction,
                                  double cluster_tol);

/// True iff every estimated point lies entrywise within
/// [min_i s_i − 1e-9, max_i s_i + 1e-9] (convex-hull containment).
bool containment_check(const OmegaEstimate& estimate, const OpinionVector& s);

}  // namespace tvfj
