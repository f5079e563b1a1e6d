#pragma once

#include <optional>
#include <utility>
#include <vector>

namespace mmdlab {

/// Space-time scaling profile. Either a pure power r^beta or a tabulated
/// curve with log-log interpolation between samples (end slopes are used
/// beyond the table).
class ScalingFunction {
 public:
  static ScalingFunction power(double beta);
  static ScalingFunction tabulated(std::vector<double> r, std::vector<double> psi);

  double operator()(double r) const;

  bool is_power() const { return kind_ == Kind::Power; }
  double beta() const { return beta_; }

 private:
  enum class Kind { Power, Tabulated };
  Kind kind_ = Kind::Power;
  double beta_ = 2.0;
  std::vector<double> log_r_, log_psi_;
};

struct ScalingValidationReport {
  bool monotone = true;
  std::optional<std::pair<double, double>> offending_pair;  // (r, R) with psi(R) <= psi(r)
  // tightest exponents over the sampled grid (feasible with C = 1)
  double beta1_fit = 0;
  double beta2_fit = 0;
  // least-squares slope of log psi vs log r and the constant making the
  // single-exponent bound hold over every sampled pair
  double slope = 0;
  double c_for_slope = 1;
  bool feasible = false;
  std::pair<double, double> scale_range{0, 0};
  int samples = 0;
};

/// Checks monotonicity and the two-sided power bound on a geometric grid of
/// sample pairs in [r_min, r_max].
ScalingValidationReport validate_scaling(const ScalingFunction& psi, double r_min,
                                         double r_max, int samples);

/// Exact feasibility of declared exponents over the same grid; returns the
/// worst violation factor (<= 1 means the declared triple holds).
double scaling_violation(const ScalingFunction& psi, double beta1, double beta2,
                         double c_reg, double r_min, double r_max, int samples);

}  // namespace mmdlab
