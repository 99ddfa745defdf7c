#pragma once

#include <vector>

#include "tvfj/dynamics.hpp"

namespace tvfj {
namespace presets {

/// Three agents under W = (1/3)·1·1ᵀ with Λ[t] = (1 − 1/(t+1)²)·I. The
/// schedule starts at t = 1: the literal t = 0 factor is zero (λ = 0 against
/// nonzero rows), and starting at 1 gives the product its intended strictly
/// positive limit 1/2. Every layer is a WDTG yet the system is not
/// asymptotically stable — the canonical non-uniform-contraction example.
Schedule example1_schedule();

/// Innate opinions shared by the five-agent alternating-network scenarios.
OpinionVector example_innate();

/// Fixed trust matrix Ŵ of the five-agent scenarios.
InfluenceMatrix example_trust_matrix();

/// Alternating adjacencies: network 1 (local cliques, v1 isolated) and
/// network 2 (v1 feeding v2; v4/v5 paired).
Eigen::MatrixXi example_adjacency_1();
Eigen::MatrixXi example_adjacency_2();

/// Five-agent scenario switching into network 2 at example2_switching_times
/// for d steps at a time; susceptibilities in network 2 depend on the switch
/// count k ≥ 1 (λ_2 = 0.9 − 1/(1+k), λ_4 = 1 − 1/(1+k), clamped into [0,1]
/// with a warning should the formula ever leave the range).
Schedule example2_schedule(int d = 2);

/// Periodic variant with period 4 (two network-2 steps, two network-1 steps)
/// and fixed Λ_2 = diag(0, 0.9, 1, λ4, 1); stubborn_v4 selects λ4 = 0.9
/// (three ω-limit points) instead of 1 (a single point).
std::vector<StepFactors> example3_phases(bool stubborn_v4 = false);
Schedule example3_schedule(bool stubborn_v4 = false);

}  // namespace presets
}  // namespace tvfj
