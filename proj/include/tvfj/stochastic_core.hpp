#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "tvfj/errors.hpp"

namespace tvfj {

/// Tolerance used when validating row sums of influence matrices.
inline constexpr double kRowSumTol = 1e-9;

/// Slack allowed on [0,1] bounds before construction fails; values inside the
/// slack are clamped so that long simulations do not trip on rounding dust.
inline constexpr double kUnitTol = 1e-9;

/// Opinion state or innate-opinion vector; every entry lies in [0,1].
class OpinionVector {
 public:
  explicit OpinionVector(Eigen::VectorXd values);
  static OpinionVector zeros(Eigen::Index n) { return OpinionVector(Eigen::VectorXd::Zero(n)); }
  static OpinionVector constant(Eigen::Index n, double value) {
    return OpinionVector(Eigen::VectorXd::Constant(n, value));
  }

  const Eigen::VectorXd& values() const { return values_; }
  Eigen::Index size() const { return values_.size(); }
  double operator[](Eigen::Index i) const { return values_(i); }

 private:
  Eigen::VectorXd values_;
};

/// Nonnegative square matrix whose rows each sum to one (within kRowSumTol)
/// or are identically zero. A zero row is only meaningful when the paired
/// susceptibility entry is zero; that pairing is checked by validate_pair.
class InfluenceMatrix {
 public:
  explicit InfluenceMatrix(Eigen::MatrixXd entries);

  /// Rescales every nonzero row to sum to one. The plain constructor never
  /// normalizes; callers must opt in.
  static InfluenceMatrix normalized(Eigen::MatrixXd entries);
  static InfluenceMatrix identity(Eigen::Index n) {
    return InfluenceMatrix(Eigen::MatrixXd::Identity(n, n));
  }

  const Eigen::MatrixXd& entries() const { return entries_; }
  Eigen::Index size() const { return entries_.rows(); }
  bool row_is_zero(Eigen::Index i) const { return entries_.row(i).maxCoeff() == 0.0; }

 private:
  Eigen::MatrixXd entries_;
};

/// Diagonal susceptibility matrix Λ, entries λ_i ∈ [0,1].
class SusceptibilityMatrix {
 public:
  explicit SusceptibilityMatrix(Eigen::VectorXd diag);
  static SusceptibilityMatrix uniform(Eigen::Index n, double lambda) {
    return SusceptibilityMatrix(Eigen::VectorXd::Constant(n, lambda));
  }
  static SusceptibilityMatrix identity(Eigen::Index n) { return uniform(n, 1.0); }

  const Eigen::VectorXd& diag() const { return diag_; }
  Eigen::Index size() const { return diag_.size(); }
  double operator[](Eigen::Index i) const { return diag_(i); }
  /// True when Λ vanishes identically (the configuration Assumption 2 forbids
  /// inside analysed schedules).
  bool is_zero() const { return diag_.maxCoeff() == 0.0; }

 private:
  Eigen::VectorXd diag_;
};

/// One step of the update law: the pair (Λ[t], W[t]).
struct StepFactors {
  SusceptibilityMatrix susceptibility;
  InfluenceMatrix weights;
};

/// State transition matrix Φ(to_time, from_time) together with its
/// max-row-sum norm.
struct TransitionProduct {
  Eigen::MatrixXd matrix;
  int from_time = 0;
  int to_time = 0;
  double norm = 1.0;
};

/// Max absolute row sum, the induced norm every bound in this library uses.
double max_row_sum_norm(const Eigen::MatrixXd& m);

/// Checks dimensional agreement and Assumption 1: λ_i = 0 exactly when row i
/// of the influence matrix is zero. Throws ValidationError otherwise.
void validate_pair(const SusceptibilityMatrix& lambda, const InfluenceMatrix& w);

/// Λ·W. Every row of the result sums to λ_i.
Eigen::MatrixXd step_factor(const SusceptibilityMatrix& lambda, const InfluenceMatrix& w);

/// Ordered product Φ = Λ[t-1]W[t-1] ··· Λ[τ]W[τ]; later factors multiply on
/// the left. An empty sequence yields the identity (Φ(τ,τ) = I); pass
/// agent_count_hint to size it when no factor is available.
TransitionProduct transition_product(std::span<const StepFactors> factors, int from_time = 0,
                                     Eigen::Index agent_count_hint = 0);

/// Evaluates the closed-form solution
///   x[t] = Φ(t,t0)·x0 + Σ_{τ=t0}^{t-1} Φ(t,τ+1)(I−Λ[τ])·s
/// over the given factor sequence (factors[k] acts at time t0+k). The sum is
/// accumulated through suffix products, not by iterating the update law.
OpinionVector closed_form_solution(const OpinionVector& x0, const OpinionVector& s,
                                   std::span<const StepFactors> factors);

}  // namespace tvfj
