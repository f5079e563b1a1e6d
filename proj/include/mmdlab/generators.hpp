#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mmdlab/space.hpp"

namespace mmdlab {

enum class Shape {
  Lattice,
  Path,
  Cycle,
  SierpinskiGasket,
  SierpinskiCarpet,
  VicsekTree,
};

Shape shape_from_name(const std::string& name);
std::string shape_name(Shape s);

struct GeneratorSpec {
  Shape shape = Shape::Path;
  int level = 1;  // recursion depth for fractals, edge count for path/cycle
  int side = 0;   // lattice side
  int dim = 2;    // lattice dimension
  double base_measure = 1.0;
  double base_conductance = 1.0;
  double edge_length = 1.0;
};

// Vertex numbering per family (documented, stable):
//   lattice:  id = x + side*(y + side*z), axes ascending
//   path:     0..level along the path
//   cycle:    0..level-1 around the cycle
//   gasket:   triangle-lattice points sorted by (row, column)
//   carpet:   surviving 3^L x 3^L cells sorted by (row, column)
//   vicsek:   surviving cells sorted by (row, column); the graph is a tree
MetricMeasureGraph generate(const GeneratorSpec& spec);

struct FamilyInfo {
  std::optional<VertexId> hub;       // central cut vertex (vicsek), lattice center
  std::vector<VertexId> corners;     // extremal vertices of the family
  double arm_length = 0;             // hub-to-tip distance where meaningful
};
FamilyInfo family_info(const GeneratorSpec& spec);

/// Disjoint union with va and vb identified. The glued vertex keeps a's id,
/// carries the sum of the two measures, and inherits all edges.
MetricMeasureGraph glue_at_point(const MetricMeasureGraph& a,
                                 const MetricMeasureGraph& b, VertexId va,
                                 VertexId vb);

struct WeightSpec {
  enum class Form { Power, Paper };  // (1+d)^alpha or (1+d^2)^(alpha/2)
  VertexId origin = 0;
  double alpha = 0;
  Form form = Form::Power;
};

std::vector<double> weight_values(const MetricMeasureGraph& g, const WeightSpec& w);

/// New space with measure w*m and conductance c*(w(u)+w(v))/2; the metric is
/// untouched. The edge-average rule makes the weighted energy equal the
/// weighted sum of the per-vertex energy split exactly.
MetricMeasureGraph apply_weight(const MetricMeasureGraph& g, const WeightSpec& w);

struct AdmissibilityReport {
  bool ok = false;
  double alpha1 = 0;
  double alpha2 = 0;
  double c = 1;
  double c_cap = 1e3;
  std::optional<std::pair<VertexId, VertexId>> witness;  // violating pair
  int skipped = 0;  // pairs with d(o,x) = 0
  int used = 0;
};

/// Fits the power-law envelope of w against distance ratios over the given
/// sample pairs; fails when no constant below c_cap works.
AdmissibilityReport weight_admissibility_check(
    const MetricMeasureGraph& g, const WeightSpec& w,
    std::span<const std::pair<VertexId, VertexId>> pairs, double c_cap = 1e3);

/// Injection of the coarse family's vertices into the finer one
/// (fine.level > coarse.level, same shape). Supported for gasket and vicsek.
std::vector<VertexId> refinement_map(const GeneratorSpec& coarse,
                                     const GeneratorSpec& fine);

}  // namespace mmdlab
