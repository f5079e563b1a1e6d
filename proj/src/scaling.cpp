#include "mmdlab/scaling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace mmdlab {

ScalingFunction ScalingFunction::power(double beta) {
  if (beta < 0 || !std::isfinite(beta))
    throw std::invalid_argument("scaling: power exponent must be >= 0");
  ScalingFunction s;
  s.kind_ = Kind::Power;
  s.beta_ = beta;
  return s;
}

ScalingFunction ScalingFunction::tabulated(std::vector<double> r,
                                           std::vector<double> psi) {
  if (r.size() != psi.size() || r.size() < 2)
    throw std::invalid_argument("scaling: need at least two table samples");
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (!(r[i] > 0) || !(psi[i] > 0))
      throw std::invalid_argument("scaling: table values must be positive");
    if (i > 0 && !(r[i] > r[i - 1]))
      throw std::invalid_argument("scaling: table radii must be strictly increasing");
  }
  ScalingFunction s;
  s.kind_ = Kind::Tabulated;
  s.log_r_.resize(r.size());
  s.log_psi_.resize(r.size());
  for (std::size_t i = 0; i < r.size(); ++i) {
    s.log_r_[i] = std::log(r[i]);
    s.log_psi_[i] = std::log(psi[i]);
  }
  return s;
}

double ScalingFunction::operator()(double r) const {
  if (!(r > 0)) throw std::invalid_argument("scaling: argument must be positive");
  if (kind_ == Kind::Power) return std::pow(r, beta_);
  const double lr = std::log(r);
  const auto& xs = log_r_;
  std::size_t hi;
  if (lr <= xs.front())
    hi = 1;
  else if (lr >= xs.back())
    hi = xs.size() - 1;
  else
    hi = static_cast<std::size_t>(std::upper_bound(xs.begin(), xs.end(), lr) - xs.begin());
  const std::size_t lo = hi - 1;
  const double t = (lr - xs[lo]) / (xs[hi] - xs[lo]);
  return std::exp(log_psi_[lo] + t * (log_psi_[hi] - log_psi_[lo]));
}

namespace {

std::vector<double> geometric_grid(double r_min, double r_max, int samples) {
  if (!(r_min > 0) || !(r_max > r_min))
    throw std::invalid_argument("scaling: need 0 < r_min < r_max");
  if (samples < 2) throw std::invalid_argument("scaling: need at least 2 samples");
  std::vector<double> grid(samples);
  const double q = std::log(r_max / r_min) / (samples - 1);
  for (int i = 0; i < samples; ++i) grid[i] = r_min * std::exp(q * i);
  grid.back() = r_max;
  return grid;
}

}  // namespace

ScalingValidationReport validate_scaling(const ScalingFunction& psi, double r_min,
                                         double r_max, int samples) {
  const auto grid = geometric_grid(r_min, r_max, samples);
  ScalingValidationReport rep;
  rep.scale_range = {r_min, r_max};
  rep.samples = samples;

  std::vector<double> vals(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) vals[i] = psi(grid[i]);

  for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
    if (!(vals[i + 1] > vals[i])) {
      rep.monotone = false;
      rep.offending_pair = {grid[i], grid[i + 1]};
      return rep;
    }
  }

  constexpr double inf = std::numeric_limits<double>::infinity();
  double rho_min = inf, rho_max = -inf;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    for (std::size_t j = i + 1; j < grid.size(); ++j) {
      const double lt = std::log(grid[j] / grid[i]);
      const double lv = std::log(vals[j] / vals[i]);
      const double rho = lv / lt;
      rho_min = std::min(rho_min, rho);
      rho_max = std::max(rho_max, rho);
      sxx += lt * lt;
      sxy += lt * lv;
    }
  }
  rep.beta1_fit = rho_min;
  rep.beta2_fit = rho_max;
  rep.slope = sxx > 0 ? sxy / sxx : 0;

  double worst = 1.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    for (std::size_t j = i + 1; j < grid.size(); ++j) {
      const double t = grid[j] / grid[i];
      const double ratio = vals[j] / vals[i];
      const double bound = std::pow(t, rep.slope);
      worst = std::max({worst, ratio / bound, bound / ratio});
    }
  }
  rep.c_for_slope = worst;
  rep.feasible = true;
  return rep;
}

double scaling_violation(const ScalingFunction& psi, double beta1, double beta2,
                         double c_reg, double r_min, double r_max, int samples) {
  const auto grid = geometric_grid(r_min, r_max, samples);
  std::vector<double> vals(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) vals[i] = psi(grid[i]);
  double worst = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    for (std::size_t j = i + 1; j < grid.size(); ++j) {
      const double t = grid[j] / grid[i];
      const double ratio = vals[j] / vals[i];
      const double lower = std::pow(t, beta1) / c_reg;
      const double upper = std::pow(t, beta2) * c_reg;
      worst = std::max({worst, lower / ratio, ratio / upper});
    }
  }
  return worst;
}

}  // namespace mmdlab
