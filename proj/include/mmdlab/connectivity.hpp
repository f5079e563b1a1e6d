#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mmdlab/scaling.hpp"
#include "mmdlab/space.hpp"

namespace mmdlab {

struct ChainResult {
  bool found = false;
  std::vector<VertexId> chain;  // x ... y when found
  std::int64_t length = -1;     // minimal hop count; -1 when unreachable
  double epsilon = 0;
};

/// Minimal number of steps of size <= epsilon (space metric) joining x and y
/// through vertices of the container. Steps may hop across non-edges.
ChainResult chain_count(const MetricMeasureGraph& g, VertexId x, VertexId y,
                        const RegionSpec& container, double epsilon);

/// Component labels of the epsilon-proximity graph on `container`
/// (edges wherever the space metric distance is <= epsilon), aligned with
/// the container order.
std::vector<int> proximity_components(const MetricMeasureGraph& g,
                                      std::span<const VertexId> container,
                                      double epsilon);

struct ConnectivityReport {
  bool pass = false;
  bool vacuous = false;  // target region empty: recorded, distinct from pass
  std::int64_t pairs_checked = 0;
  std::uint64_t seed = 0;
  int component_count = 0;
  std::vector<std::int64_t> component_sizes;
  std::vector<std::pair<VertexId, VertexId>> violations;  // disconnected pairs
  std::vector<std::string> notes;
};

/// Pairs of ball(x,r) joined by epsilon-chains inside ball(x, A r); checked
/// for each epsilon in the list.
struct BallChainReport {
  bool pass = false;
  std::vector<std::pair<double, ConnectivityReport>> per_epsilon;
};
BallChainReport ball_chain_connected(const MetricMeasureGraph& g, VertexId x,
                                     double r, double a_enlargement,
                                     std::span<const double> epsilons,
                                     std::uint64_t seed = 0);

/// Pairs of annulus(x, r, 2r) joined by epsilon-chains inside
/// annulus(x, r/c, c r).
ConnectivityReport annulus_chain_connected(const MetricMeasureGraph& g, VertexId x,
                                           double r, double c, double epsilon,
                                           std::uint64_t seed = 0);

/// Edge-path connectivity: annulus(x, r, 2r) must lie in one component of
/// the subgraph induced on annulus(x, r/c0, c0 r).
ConnectivityReport annulus_path_connected(const MetricMeasureGraph& g, VertexId x,
                                          double r, double c0);

struct MinimalC0Report {
  bool found = false;
  double c0 = 0;  // smallest grid value passing for every tested (x, r)
  std::vector<std::pair<double, bool>> grid_results;
};
MinimalC0Report minimal_annulus_constant(const MetricMeasureGraph& g,
                                         std::span<const VertexId> centers,
                                         std::span<const double> radii,
                                         std::span<const double> c0_grid);

struct ChainBoundEntry {
  VertexId x, y;
  double epsilon;
  double dist;
  std::int64_t hops;  // -1 when unreachable
  double ratio;       // hops^2 * psi(epsilon) / psi(d(x,y))
};
struct ChainBoundReport {
  double sup_ratio = 0;
  bool all_finite = true;
  double a0 = 0;
  std::vector<ChainBoundEntry> entries;
};

/// Quantitative chain-length bound: for each pair and epsilon, the minimal
/// chain inside ball(x, A0 d(x,y)) and the scale-free ratio it certifies.
ChainBoundReport chain_bound_ratio(const MetricMeasureGraph& g,
                                   std::span<const std::pair<VertexId, VertexId>> pairs,
                                   std::span<const double> epsilons, double a0,
                                   const ScalingFunction& psi);

struct PartitionOfUnity {
  std::vector<VertexId> net;
  double epsilon = 0;
  // one function per net point, sparse (vertex, value), ascending vertex id
  std::vector<std::vector<std::pair<VertexId, double>>> functions;
  std::vector<VertexId> uncovered;     // vertices no bump reaches
  std::vector<double> energies;        // E(psi_z, psi_z) per net point
  double energy_constant = 0;          // max_z E * Psi(eps) / m(ball(z, eps))
};

/// Normalized bump partition over an epsilon-net of the region. Bumps decay
/// linearly from ball(z, eps/4) to zero at distance 5 eps/4 and are cleared
/// on every other net point's inner ball, so each psi_z is exactly one on
/// ball(z, eps/4) and foreign functions vanish there.
PartitionOfUnity build_partition_of_unity(const MetricMeasureGraph& g,
                                          std::span<const VertexId> region,
                                          double epsilon, const ScalingFunction& psi);

/// sup over realized radii r in (0, R) of nu(ball(x,r)) / m(ball(x,r)).
double truncated_maximal(const MetricMeasureGraph& g, std::span<const double> nu,
                         VertexId x, double big_r);

struct TwoPointReport {
  double c_fit = 0;  // smallest feasible constant over the sampled pairs
  bool violation = false;
  std::optional<std::pair<VertexId, VertexId>> violating_pair;
  std::int64_t pairs_checked = 0;
  std::uint64_t seed = 0;
};

/// |u(x)-u(y)|^2 <= C Psi(R) (M_R Gamma(u)(x) + M_R Gamma(u)(y)) over pairs
/// drawn from ball(x0, R / c_p).
TwoPointReport two_point_check(const MetricMeasureGraph& g, std::span<const double> u,
                               VertexId x0, double big_r, std::int64_t max_pairs,
                               const ScalingFunction& psi, double c_p,
                               std::uint64_t seed = 0);

struct RefinedChainLevel {
  std::vector<VertexId> points;
  double scale = 0;           // step bound used at this level
  double max_step = 0;        // largest realized step
  double sup_deviation = 0;   // sup distance to the previous level
  double deviation_bound = 0; // A0 * eps^k * d(x,y)
  double max_from_root = 0;   // farthest chain point from (mapped) x
};
struct RefinedChain {
  bool pass = false;
  double base_distance = 0;   // d(x,y) on the coarsest level
  double containment_radius = 0;  // 2 A0 d(x,y)
  std::vector<RefinedChainLevel> levels;
};

/// Multi-scale chain refinement across a hierarchy of graphs linked by
/// distance-preserving vertex injections. Each hop of the level-k chain is
/// replaced by a chain at scale eps^{k+1} d(x,y) inside the hop ball on the
/// next level; deviations between consecutive levels and containment in
/// ball(x, 2 A0 d(x,y)) are verified.
RefinedChain refine_chain(std::span<const MetricMeasureGraph* const> levels,
                          std::span<const std::vector<VertexId>> maps, VertexId x,
                          VertexId y, double eps_ratio, double a0,
                          double map_tolerance = 0.05);

/// Discrete spheres around o (within half the minimum edge length of r)
/// must be edge-path connected inside annulus(o, r/a, a r), for each r.
struct RcaReport {
  bool pass = false;
  std::vector<std::pair<double, ConnectivityReport>> per_radius;
};
RcaReport rca_check(const MetricMeasureGraph& g, VertexId o, double a,
                    std::span<const double> radii);

}  // namespace mmdlab
