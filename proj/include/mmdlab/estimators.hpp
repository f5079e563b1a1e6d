#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mmdlab/linsolve.hpp"
#include "mmdlab/scaling.hpp"
#include "mmdlab/space.hpp"

namespace mmdlab {

struct CapacityResult {
  double value = 0;
  std::vector<double> potential;  // 1 on A, 0 on B, in [0,1] everywhere
  double residual = 0;
  SolveStats method;
};

/// Cap(A,B): minimal energy over potentials fixed to 1 on A and 0 on B.
/// Interior components touching neither set get potential 0 and contribute
/// no energy.
CapacityResult capacity(const MetricMeasureGraph& g, std::span<const VertexId> a,
                        std::span<const VertexId> b, const SolverOptions& opts = {});

struct Witness {
  VertexId x = 0;
  double r = 0;
  std::optional<double> big_r;  // present for two-scale conditions
};

struct ConditionReport {
  std::string condition;  // VD | PI | CAP_UPPER | FVG | RVD
  double constant = 0;    // max of the defining ratio over tested tuples
  std::optional<double> alpha;  // RVD exponent
  std::optional<double> a_enlargement;   // PI: A of the extremal witness
  std::optional<double> a1;              // CAP_UPPER: A1 used
  std::pair<double, double> scale_range{0, 0};
  std::vector<Witness> witnesses;  // tuples achieving the constant
  bool pass = false;
  double cap = 0;
  std::vector<std::string> warnings;
  // per-tuple values for plot export: (x, r[, R], value)
  struct Sample {
    VertexId x;
    double r;
    std::optional<double> big_r;
    double value;
  };
  std::vector<Sample> samples;
};

ConditionReport vd_constant(const MetricMeasureGraph& g,
                            std::span<const VertexId> centers,
                            std::span<const double> radii, double cap = 1e4);

struct PoincareResult {
  double c_p = 0;  // +inf when the enlarged ball is disconnected across B(x,r)
  double a_enlargement = 1;
  std::vector<double> extremal;  // full-length vector, zero off the ball
  std::int64_t iterations = 0;
  std::optional<std::pair<VertexId, VertexId>> component_witness;
};

/// C_P = (1/Psi(r)) * max over nonconstant f of variance on B(x,r) over
/// energy restricted to edges inside B(x,Ar); the maximizer is returned.
PoincareResult poincare_constant(const MetricMeasureGraph& g, VertexId x, double r,
                                 double a_enlargement, const ScalingFunction& psi,
                                 const SolverOptions& opts = {});

/// Sweep over centers x radii; per tuple the best (smallest C_P) enlargement
/// from `a_grid` is kept, and the report carries the worst tuple.
ConditionReport poincare_sweep(const MetricMeasureGraph& g,
                               std::span<const VertexId> centers,
                               std::span<const double> radii,
                               std::span<const double> a_grid,
                               const ScalingFunction& psi, double cap = 1e4,
                               const SolverOptions& opts = {});

ConditionReport cap_upper_constant(const MetricMeasureGraph& g,
                                   const ScalingFunction& psi, double a1,
                                   std::span<const VertexId> centers,
                                   std::span<const double> radii, double cap = 1e4,
                                   const SolverOptions& opts = {});

ConditionReport fvg_check(const MetricMeasureGraph& g, const ScalingFunction& psi,
                          std::span<const VertexId> centers,
                          std::span<const std::pair<double, double>> scale_pairs,
                          double cap = 1e4);

/// Reverse volume doubling: fits the largest exponent alpha with
/// vol(R)/vol(r) >= C^-1 (R/r)^alpha and reports the (C, alpha) pair.
ConditionReport rvd_constant(const MetricMeasureGraph& g,
                             std::span<const VertexId> centers,
                             std::span<const std::pair<double, double>> scale_pairs,
                             double cap = 1e4);

struct ChainingReport {
  double direct = 0;        // Cap(B(x, A1^-k R), B(x,R)^c)
  double series_bound = 0;  // harmonic sum of the ring capacities
  std::vector<double> ring_capacities;
  bool holds = false;  // direct <= series_bound + slack_tolerance
  double slack = 0;    // series_bound - direct
};

/// Nested-ring capacity bound: the direct capacity across the full annulus
/// is at most the series combination of the ring capacities.
ChainingReport capacity_chaining_check(const MetricMeasureGraph& g, VertexId x,
                                       double big_r, double a1, int k,
                                       const SolverOptions& opts = {});

}  // namespace mmdlab
