#include "tvfj/stochastic_core.hpp"

#include <cmath>
#include <sstream>
#include <utility>

namespace tvfj {

namespace {

[[noreturn]] void throw_dimension(const std::string& what) { throw DimensionError(what); }

void require_square(const Eigen::MatrixXd& m, const char* who) {
  if (m.rows() == 0 || m.cols() == 0) {
    std::ostringstream msg;
    msg << who << ": empty matrix";
    throw_dimension(msg.str());
  }
  if (m.rows() != m.cols()) {
    std::ostringstream msg;
    msg << who << ": expected square matrix, got " << m.rows() << "x" << m.cols();
    throw_dimension(msg.str());
  }
}

}  // namespace

OpinionVector::OpinionVector(Eigen::VectorXd values) : values_(std::move(values)) {
  if (values_.size() == 0) throw_dimension("OpinionVector: empty vector");
  for (Eigen::Index i = 0; i < values_.size(); ++i) {
    const double v = values_(i);
    if (!(v >= -kUnitTol && v <= 1.0 + kUnitTol)) {
      std::ostringstream msg;
      msg << "OpinionVector: entry " << i << " = " << v << " outside [0,1]";
      throw ValidationError(msg.str());
    }
    values_(i) = std::min(1.0, std::max(0.0, v));
  }
}

InfluenceMatrix::InfluenceMatrix(Eigen::MatrixXd entries) : entries_(std::move(entries)) {
  require_square(entries_, "InfluenceMatrix");
  for (Eigen::Index i = 0; i < entries_.rows(); ++i) {
    double row_sum = 0.0;
    double row_max = 0.0;
    for (Eigen::Index j = 0; j < entries_.cols(); ++j) {
      const double w = entries_(i, j);
      if (w < 0.0) {
        std::ostringstream msg;
        msg << "InfluenceMatrix: negative entry (" << i << "," << j << ") = " << w;
        throw ValidationError(msg.str());
      }
      row_sum += w;
      row_max = std::max(row_max, w);
    }
    if (row_max > 0.0 && std::abs(row_sum - 1.0) > kRowSumTol) {
      std::ostringstream msg;
      msg << "InfluenceMatrix: row " << i << " sums to " << row_sum
          << ", expected 1 within " << kRowSumTol << " (or an all-zero row)";
      throw ValidationError(msg.str());
    }
  }
}

InfluenceMatrix InfluenceMatrix::normalized(Eigen::MatrixXd entries) {
  require_square(entries, "InfluenceMatrix::normalized");
  for (Eigen::Index i = 0; i < entries.rows(); ++i) {
    const double row_sum = entries.row(i).sum();
    if (row_sum > 0.0) entries.row(i) /= row_sum;
  }
  return InfluenceMatrix(std::move(entries));
}

SusceptibilityMatrix::SusceptibilityMatrix(Eigen::VectorXd diag) : diag_(std::move(diag)) {
  if (diag_.size() == 0) throw_dimension("SusceptibilityMatrix: empty diagonal");
  for (Eigen::Index i = 0; i < diag_.size(); ++i) {
    const double v = diag_(i);
    if (!(v >= 0.0 && v <= 1.0)) {
      std::ostringstream msg;
      msg << "SusceptibilityMatrix: lambda_" << i << " = " << v << " outside [0,1]";
      throw ValidationError(msg.str());
    }
  }
}

double max_row_sum_norm(const Eigen::MatrixXd& m) {
  if (m.rows() == 0 || m.cols() == 0) throw_dimension("max_row_sum_norm: empty matrix");
  return m.cwiseAbs().rowwise().sum().maxCoeff();
}

void validate_pair(const SusceptibilityMatrix& lambda, const InfluenceMatrix& w) {
  if (lambda.size() != w.size()) {
    std::ostringstream msg;
    msg << "validate_pair: susceptibility size " << lambda.size() << " vs influence size "
        << w.size();
    throw_dimension(msg.str());
  }
  for (Eigen::Index i = 0; i < lambda.size(); ++i) {
    const bool lambda_zero = lambda[i] == 0.0;
    const bool row_zero = w.row_is_zero(i);
    if (lambda_zero != row_zero) {
      std::ostringstream msg;
      msg << "Assumption 1 violated at agent " << i << ": lambda_" << i << " = " << lambda[i]
          << (row_zero ? " with a zero influence row" : " with a nonzero influence row");
      throw ValidationError(msg.str());
    }
  }
}

Eigen::MatrixXd step_factor(const SusceptibilityMatrix& lambda, const InfluenceMatrix& w) {
  validate_pair(lambda, w);
  return lambda.diag().asDiagonal() * w.entries();
}

TransitionProduct transition_product(std::span<const StepFactors> factors, int from_time,
                                     Eigen::Index agent_count_hint) {
  TransitionProduct result;
  result.from_time = from_time;
  result.to_time = from_time + static_cast<int>(factors.size());
  const Eigen::Index n = factors.empty() ? agent_count_hint : factors.front().weights.size();
  if (factors.empty()) {
    result.matrix = Eigen::MatrixXd::Identity(n, n);
    result.norm = 1.0;
    return result;
  }
  Eigen::MatrixXd acc = Eigen::MatrixXd::Identity(n, n);
  for (const StepFactors& f : factors) {
    if (f.weights.size() != n) {
      std::ostringstream msg;
      msg << "transition_product: factor size " << f.weights.size() << " differs from " << n;
      throw_dimension(msg.str());
    }
    acc = step_factor(f.susceptibility, f.weights) * acc;
  }
  result.matrix = std::move(acc);
  result.norm = max_row_sum_norm(result.matrix);
  return result;
}

OpinionVector closed_form_solution(const OpinionVector& x0, const OpinionVector& s,
                                   std::span<const StepFactors> factors) {
  const Eigen::Index n = x0.size();
  if (s.size() != n) throw_dimension("closed_form_solution: x0 and s sizes differ");
  if (factors.empty()) return x0;

  // Walk tau from t-1 down to t0, keeping suffix = Φ(t, tau+1).
  Eigen::MatrixXd suffix = Eigen::MatrixXd::Identity(n, n);
  Eigen::VectorXd input_sum = Eigen::VectorXd::Zero(n);
  for (auto it = factors.rbegin(); it != factors.rend(); ++it) {
    if (it->weights.size() != n) throw_dimension("closed_form_solution: factor size mismatch");
    const Eigen::VectorXd anchored =
        (Eigen::VectorXd::Ones(n) - it->susceptibility.diag()).asDiagonal() * s.values();
    input_sum += suffix * anchored;
    suffix = suffix * step_factor(it->susceptibility, it->weights);
  }
  return OpinionVector(suffix * x0.values() + input_sum);
}

}  // namespace tvfj
