#include "tvfj/pslti.hpp"

#include <Eigen/LU>
#include <cmath>
#include <sstream>
#include <utility>

namespace tvfj {

std::vector<PhaseSystem> build_phase_systems(std::span<const StepFactors> phases) {
  if (phases.empty()) throw ValidationError("build_phase_systems: need at least one phase");
  const int p = static_cast<int>(phases.size());
  const Eigen::Index n = phases.front().weights.size();
  std::vector<Eigen::MatrixXd> factors;  // B_l = Λ_l W_l, 1-based via index l-1
  factors.reserve(phases.size());
  for (const StepFactors& f : phases) {
    if (f.weights.size() != n) throw DimensionError("build_phase_systems: phase size mismatch");
    factors.push_back(step_factor(f.susceptibility, f.weights));
  }

  std::vector<PhaseSystem> systems;
  systems.reserve(phases.size());
  for (int l = 1; l <= p; ++l) {
    // Steps of subsystem l use pair indices ⟨l+j⟩_p = ((l+j) mod p) + 1 for
    // j = 0..p-1; each step folds its factor onto the left of M and N.
    Eigen::MatrixXd m = Eigen::MatrixXd::Identity(n, n);
    Eigen::MatrixXd nmat = Eigen::MatrixXd::Zero(n, n);
    for (int j = 0; j < p; ++j) {
      const int pair_index = ((l + j) % p) + 1;
      const Eigen::MatrixXd& b = factors[static_cast<std::size_t>(pair_index - 1)];
      const Eigen::VectorXd anchor =
          Eigen::VectorXd::Ones(n) -
          phases[static_cast<std::size_t>(pair_index - 1)].susceptibility.diag();
      m = b * m;
      nmat = b * nmat;
      nmat += Eigen::MatrixXd(anchor.asDiagonal());
    }
    // p factors, each row-stochastic within kRowSumTol, compound to p times
    // the per-factor slack
    const double row_max = m.cwiseAbs().rowwise().sum().maxCoeff();
    if (m.minCoeff() < 0.0 || row_max > 1.0 + (p + 1) * kRowSumTol) {
      throw ValidationError("build_phase_systems: state map left the substochastic cone");
    }
    systems.push_back(PhaseSystem{l, std::move(m), std::move(nmat), std::nullopt});
  }
  return systems;
}

int phase_for_residue(int residue, int period) {
  if (period < 1) throw ValidationError("phase_for_residue: period must be >= 1");
  const int r = ((residue % period) + period) % period;
  return r == 0 ? period : r;
}

PhaseFixedPoints phase_fixed_points(std::vector<PhaseSystem> systems, const OpinionVector& s,
                                    double dedup_tol) {
  if (systems.empty()) throw ValidationError("phase_fixed_points: no phase systems");
  const Eigen::Index n = systems.front().state_map.rows();
  if (s.size() != n) throw DimensionError("phase_fixed_points: s size mismatch");

  // Exponential-stability premise: the cycle product Φ(p,0) = M_p must contract.
  const double cycle_norm = max_row_sum_norm(systems.back().state_map);
  if (cycle_norm >= 1.0) {
    std::ostringstream msg;
    msg << "phase_fixed_points: |Phi(p,0)| = " << cycle_norm
        << " >= 1; the cycle window is not weakly defected";
    throw CertificateUnavailable(msg.str());
  }

  PhaseFixedPoints result;
  result.distinct.method = OmegaMethod::closed_form;
  result.distinct.tolerance = dedup_tol;
  for (PhaseSystem& system : systems) {
    const Eigen::MatrixXd lhs = Eigen::MatrixXd::Identity(n, n) - system.state_map;
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(lhs);
    if (lu.rcond() < 1e-12) {
      std::ostringstream msg;
      msg << "phase_fixed_points: I - M_" << system.phase
          << " is numerically singular (rcond = " << lu.rcond() << ")";
      throw CertificateUnavailable(msg.str());
    }
    const Eigen::VectorXd fp = lu.solve(system.input_map * s.values());
    system.fixed_point = OpinionVector(fp);
    bool duplicate = false;
    for (const OpinionVector& seen : result.distinct.points) {
      if ((seen.values() - fp).cwiseAbs().maxCoeff() <= dedup_tol) {
        duplicate = true;
        break;
      }
    }
    if (!duplicate) result.distinct.points.push_back(OpinionVector(fp));
  }
  result.systems = std::move(systems);
  return result;
}

Eigen::MatrixXd sigma_accumulator(const Schedule& schedule, int t) {
  const int t0 = schedule.start_time();
  if (t < t0 + 1) throw ValidationError("sigma_accumulator: t must exceed the schedule start");
  const Eigen::Index n = schedule.agent_count();
  Eigen::MatrixXd sigma = Eigen::MatrixXd::Zero(n, n);
  for (int tau = t0; tau < t; ++tau) {
    const StepFactors f = schedule.at(tau);
    sigma = step_factor(f.susceptibility, f.weights) * sigma;
    sigma += Eigen::MatrixXd(
        (Eigen::VectorXd::Ones(n) - f.susceptibility.diag()).asDiagonal());
    const double row_max = sigma.rowwise().sum().maxCoeff();
    if (row_max > 1.0 + 1e-12) {
      std::ostringstream msg;
      msg << "sigma_accumulator: row sum " << row_max << " exceeds 1 at t=" << tau + 1;
      throw std::logic_error(msg.str());
    }
  }
  return sigma;
}

OmegaEstimate tail_omega_estimate(const Trajectory& trajectory, double tail_fraction,
                                  double cluster_tol) {
  if (trajectory.size() < 10) {
    throw ValidationError("tail_omega_estimate: trajectory must hold at least 10 states");
  }
  if (!(tail_fraction > 0.0 && tail_fraction <= 0.5)) {
    throw ValidationError("tail_omega_estimate: tail_fraction must lie in (0, 0.5]");
  }
  if (!(cluster_tol > 0.0)) {
    throw ValidationError("tail_omega_estimate: cluster_tol must be positive");
  }
  const std::size_t count =
      std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(
                                   static_cast<double>(trajectory.size()) * tail_fraction)));
  const std::size_t begin = trajectory.size() - count;

  struct Cluster {
    Eigen::VectorXd sum;
    std::size_t members = 0;
  };
  std::vector<Cluster> clusters;
  for (std::size_t k = begin; k < trajectory.size(); ++k) {
    const Eigen::VectorXd& x = trajectory[k].values();
    bool assigned = false;
    for (Cluster& cluster : clusters) {
      const Eigen::VectorXd centroid = cluster.sum / static_cast<double>(cluster.members);
      if ((centroid - x).cwiseAbs().maxCoeff() <= cluster_tol) {
        cluster.sum += x;
        ++cluster.members;
        assigned = true;
        break;
      }
    }
    if (!assigned) clusters.push_back({x, 1});
  }

  OmegaEstimate estimate;
  estimate.method = OmegaMethod::tail_clustering;
  estimate.tolerance = cluster_tol;
  for (const Cluster& cluster : clusters) {
    estimate.points.push_back(OpinionVector(cluster.sum / static_cast<double>(cluster.members)));
  }
  return estimate;
}

bool containment_check(const OmegaEstimate& estimate, const OpinionVector& s) {
  constexpr double kSlack = 1e-9;
  const double lo = s.values().minCoeff() - kSlack;
  const double hi = s.values().maxCoeff() + kSlack;
  for (const OpinionVector& point : estimate.points) {
    if (point.size() != s.size()) throw DimensionError("containment_check: point size mismatch");
    if (point.values().minCoeff() < lo || point.values().maxCoeff() > hi) return false;
  }
  return true;
}

}  // namespace tvfj
