#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

namespace mmdlab {

using VertexId = std::int32_t;

inline constexpr double kInfDist = std::numeric_limits<double>::infinity();

enum class MetricMode { Graph, Embedded };

struct EdgeSpec {
  VertexId u = 0;
  VertexId v = 0;
  double conductance = 1.0;
  double length = 1.0;  // used by the shortest-path metric only
};

/// A finite weighted graph carrying a strictly positive vertex measure,
/// strictly positive edge conductances and a metric (shortest-path over
/// edge lengths, or Euclidean over per-vertex coordinates). Immutable
/// after construction; all queries are pure reads and safe to run
/// concurrently.
class MetricMeasureGraph {
 public:
  struct Arc {
    VertexId to;
    std::int32_t edge;
  };

  MetricMeasureGraph(std::vector<double> measure, std::vector<EdgeSpec> edges,
                     MetricMode mode = MetricMode::Graph,
                     std::vector<double> coords = {}, int coord_dim = 0);

  int vertex_count() const { return static_cast<int>(measure_.size()); }
  std::size_t edge_count() const { return edges_.size(); }
  MetricMode metric_mode() const { return mode_; }

  double vertex_measure(VertexId v) const { return measure_[check(v)]; }
  const std::vector<double>& vertex_measures() const { return measure_; }
  double total_measure() const { return total_measure_; }

  const std::vector<EdgeSpec>& edges() const { return edges_; }
  std::span<const Arc> arcs(VertexId v) const;
  /// Sum of conductances incident to v (Laplacian diagonal).
  double degree_conductance(VertexId v) const { return degree_[check(v)]; }

  int coordinate_dim() const { return coord_dim_; }
  std::span<const double> coordinates(VertexId v) const;
  bool has_explicit_lengths() const { return explicit_lengths_; }

  double distance(VertexId a, VertexId b) const;
  /// Distances from x; entries strictly beyond `bound` are +inf.
  std::vector<double> distances_from(VertexId x, double bound = kInfDist) const;
  double min_edge_length() const { return min_edge_length_; }

  int component_count() const { return component_count_; }
  int component_of(VertexId v) const { return component_[check(v)]; }
  bool connected() const { return component_count_ == 1; }

  VertexId check(VertexId v) const;

 private:
  std::vector<double> measure_;
  std::vector<EdgeSpec> edges_;
  MetricMode mode_;
  std::vector<double> coords_;
  int coord_dim_ = 0;
  bool explicit_lengths_ = false;

  std::vector<std::int64_t> offsets_;
  std::vector<Arc> arcs_;
  std::vector<double> degree_;
  std::vector<int> component_;
  int component_count_ = 0;
  double total_measure_ = 0;
  double min_edge_length_ = 0;
};

struct RegionSpec {
  enum class Kind { Ball, Annulus, Explicit };
  Kind kind = Kind::Ball;
  VertexId center = 0;
  double radius = 0;             // ball
  double r_in = 0, r_out = 0;    // annulus
  std::vector<VertexId> ids;     // explicit

  static RegionSpec ball(VertexId x, double r);
  static RegionSpec annulus(VertexId x, double r_in, double r_out);
  static RegionSpec explicit_set(std::vector<VertexId> ids);
};

/// Open metric ball {y : d(x,y) < r}, ascending vertex ids.
std::vector<VertexId> ball(const MetricMeasureGraph& g, VertexId x, double r);

/// Annulus {y : r_in <= d(x,y) < r_out} (closed removal of the inner ball).
std::vector<VertexId> annulus(const MetricMeasureGraph& g, VertexId x,
                              double r_in, double r_out);

std::vector<VertexId> resolve_region(const MetricMeasureGraph& g,
                                     const RegionSpec& region);

double measure_of(const MetricMeasureGraph& g, std::span<const VertexId> region);
double measure_of(const MetricMeasureGraph& g, const RegionSpec& region);

/// Maximal s-separated subset of `region` (pairwise d >= s), grown greedily
/// in ascending vertex-id order. Every point of the region is then within
/// distance < s of the result.
std::vector<VertexId> epsilon_net(const MetricMeasureGraph& g,
                                  std::span<const VertexId> region, double s);

/// E(f,f) = sum over edges of c * (f(u) - f(v))^2.
double graph_energy(const MetricMeasureGraph& g, std::span<const double> f);

/// Per-vertex energy split: half of each incident edge energy.
std::vector<double> energy_measure_vector(const MetricMeasureGraph& g,
                                          std::span<const double> f);

/// Sum of the per-vertex energy split over a region, ascending id order.
double energy_measure(const MetricMeasureGraph& g, std::span<const double> f,
                      std::span<const VertexId> region);
double energy_measure(const MetricMeasureGraph& g, std::span<const double> f,
                      const RegionSpec& region);

}  // namespace mmdlab
