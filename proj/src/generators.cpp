#include "mmdlab/generators.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <set>
#include <stdexcept>

#include "mmdlab/errors.hpp"

namespace mmdlab {

namespace {

constexpr std::int64_t kMaxVertices = 8'000'000;

void check_budget(std::int64_t vertices) {
  if (vertices > kMaxVertices)
    throw ResourceLimitError("generator: " + std::to_string(vertices) +
                             " vertices exceeds the limit of " +
                             std::to_string(kMaxVertices));
}

std::int64_t ipow(std::int64_t b, int e) {
  std::int64_t r = 1;
  while (e-- > 0) r *= b;
  return r;
}

using Cell = std::pair<std::int64_t, std::int64_t>;  // (row, col)

// Recursion rules on base-3 digit pairs of (row, col).
bool carpet_alive(std::int64_t row, std::int64_t col, int level) {
  for (int k = 0; k < level; ++k) {
    if (row % 3 == 1 && col % 3 == 1) return false;
    row /= 3;
    col /= 3;
  }
  return true;
}

bool vicsek_alive(std::int64_t row, std::int64_t col, int level) {
  // keep the center and the four side cells of each 3x3 block
  for (int k = 0; k < level; ++k) {
    if (row % 3 != 1 && col % 3 != 1) return false;
    row /= 3;
    col /= 3;
  }
  return true;
}

MetricMeasureGraph cells_graph(const std::vector<Cell>& cells,
                               const GeneratorSpec& spec) {
  std::map<Cell, VertexId> id_of;
  for (const Cell& c : cells) id_of.emplace(c, static_cast<VertexId>(id_of.size()));
  std::vector<EdgeSpec> edges;
  for (const auto& [cell, id] : id_of) {
    // right and down neighbors only, so each edge appears once
    for (const Cell nb : {Cell{cell.first + 1, cell.second}, Cell{cell.first, cell.second + 1}}) {
      auto it = id_of.find(nb);
      if (it != id_of.end())
        edges.push_back({id, it->second, spec.base_conductance, spec.edge_length});
    }
  }
  std::vector<double> m(id_of.size(), spec.base_measure);
  return MetricMeasureGraph(std::move(m), std::move(edges));
}

std::vector<Cell> digit_cells(int level, bool (*alive)(std::int64_t, std::int64_t, int)) {
  const std::int64_t side = ipow(3, level);
  std::vector<Cell> cells;
  for (std::int64_t r = 0; r < side; ++r)
    for (std::int64_t c = 0; c < side; ++c)
      if (alive(r, c, level)) cells.emplace_back(r, c);
  return cells;
}

// Triangle-lattice coordinates (a, b): position a*e1 + b*e2 with a,b >= 0,
// a + b <= 2^level. Vertices of the surviving unit triangles.
void gasket_triangles(std::int64_t a, std::int64_t b, std::int64_t size,
                      std::vector<std::array<Cell, 3>>& out) {
  if (size == 1) {
    out.push_back({Cell{b, a}, Cell{b, a + 1}, Cell{b + 1, a}});
    return;
  }
  const std::int64_t h = size / 2;
  gasket_triangles(a, b, h, out);
  gasket_triangles(a + h, b, h, out);
  gasket_triangles(a, b + h, h, out);
}

MetricMeasureGraph gasket_graph(const GeneratorSpec& spec) {
  if (spec.level < 0 || spec.level > 14)
    throw ResourceLimitError("generator: gasket level out of range [0, 14]");
  check_budget(3 * (ipow(3, spec.level) + 1) / 2);
  std::vector<std::array<Cell, 3>> tris;
  gasket_triangles(0, 0, ipow(2, spec.level), tris);
  std::map<Cell, VertexId> id_of;
  for (const auto& t : tris)
    for (const Cell& c : t) id_of.emplace(c, 0);
  VertexId next = 0;
  for (auto& [cell, id] : id_of) id = next++;
  std::set<std::pair<VertexId, VertexId>> seen;
  std::vector<EdgeSpec> edges;
  for (const auto& t : tris) {
    for (int i = 0; i < 3; ++i) {
      for (int j = i + 1; j < 3; ++j) {
        auto p = std::minmax(id_of[t[i]], id_of[t[j]]);
        if (seen.insert(p).second)
          edges.push_back({p.first, p.second, spec.base_conductance, spec.edge_length});
      }
    }
  }
  std::vector<double> m(id_of.size(), spec.base_measure);
  return MetricMeasureGraph(std::move(m), std::move(edges));
}

std::map<Cell, VertexId> gasket_ids(int level) {
  std::vector<std::array<Cell, 3>> tris;
  gasket_triangles(0, 0, ipow(2, level), tris);
  std::map<Cell, VertexId> id_of;
  for (const auto& t : tris)
    for (const Cell& c : t) id_of.emplace(c, 0);
  VertexId next = 0;
  for (auto& [cell, id] : id_of) id = next++;
  return id_of;
}

MetricMeasureGraph lattice_graph(const GeneratorSpec& spec) {
  if (spec.side < 2) throw std::invalid_argument("generator: lattice needs side >= 2");
  if (spec.dim < 1 || spec.dim > 3)
    throw std::invalid_argument("generator: lattice dimension must be 1, 2 or 3");
  std::int64_t n = 1;
  for (int d = 0; d < spec.dim; ++d) n *= spec.side;
  check_budget(n);
  std::vector<EdgeSpec> edges;
  std::int64_t stride = 1;
  for (int d = 0; d < spec.dim; ++d) {
    for (std::int64_t v = 0; v < n; ++v) {
      const std::int64_t coord = (v / stride) % spec.side;
      if (coord + 1 < spec.side)
        edges.push_back({static_cast<VertexId>(v), static_cast<VertexId>(v + stride),
                         spec.base_conductance, spec.edge_length});
    }
    stride *= spec.side;
  }
  std::vector<double> m(n, spec.base_measure);
  return MetricMeasureGraph(std::move(m), std::move(edges));
}

}  // namespace

Shape shape_from_name(const std::string& name) {
  if (name == "lattice") return Shape::Lattice;
  if (name == "path") return Shape::Path;
  if (name == "cycle") return Shape::Cycle;
  if (name == "sierpinski-gasket" || name == "sierpinski_gasket") return Shape::SierpinskiGasket;
  if (name == "sierpinski-carpet" || name == "sierpinski_carpet") return Shape::SierpinskiCarpet;
  if (name == "vicsek-tree" || name == "vicsek_tree") return Shape::VicsekTree;
  throw ConfigError("unknown shape '" + name + "'");
}

std::string shape_name(Shape s) {
  switch (s) {
    case Shape::Lattice: return "lattice";
    case Shape::Path: return "path";
    case Shape::Cycle: return "cycle";
    case Shape::SierpinskiGasket: return "sierpinski-gasket";
    case Shape::SierpinskiCarpet: return "sierpinski-carpet";
    case Shape::VicsekTree: return "vicsek-tree";
  }
  return "?";
}

MetricMeasureGraph generate(const GeneratorSpec& spec) {
  if (!(spec.base_measure > 0) || !(spec.base_conductance > 0) || !(spec.edge_length > 0))
    throw std::invalid_argument("generator: base weights must be positive");
  switch (spec.shape) {
    case Shape::Lattice:
      return lattice_graph(spec);
    case Shape::Path: {
      if (spec.level < 1) throw std::invalid_argument("generator: path needs level >= 1");
      check_budget(static_cast<std::int64_t>(spec.level) + 1);
      std::vector<EdgeSpec> edges;
      for (int i = 0; i < spec.level; ++i)
        edges.push_back({i, i + 1, spec.base_conductance, spec.edge_length});
      std::vector<double> m(spec.level + 1, spec.base_measure);
      return MetricMeasureGraph(std::move(m), std::move(edges));
    }
    case Shape::Cycle: {
      if (spec.level < 3) throw std::invalid_argument("generator: cycle needs level >= 3");
      check_budget(spec.level);
      std::vector<EdgeSpec> edges;
      for (int i = 0; i < spec.level; ++i)
        edges.push_back({i, (i + 1) % spec.level, spec.base_conductance, spec.edge_length});
      std::vector<double> m(spec.level, spec.base_measure);
      return MetricMeasureGraph(std::move(m), std::move(edges));
    }
    case Shape::SierpinskiGasket:
      return gasket_graph(spec);
    case Shape::SierpinskiCarpet: {
      if (spec.level < 1 || spec.level > 7)
        throw ResourceLimitError("generator: carpet level out of range [1, 7]");
      check_budget(ipow(8, spec.level));
      return cells_graph(digit_cells(spec.level, carpet_alive), spec);
    }
    case Shape::VicsekTree: {
      if (spec.level < 1 || spec.level > 9)
        throw ResourceLimitError("generator: vicsek level out of range [1, 9]");
      check_budget(ipow(5, spec.level));
      return cells_graph(digit_cells(spec.level, vicsek_alive), spec);
    }
  }
  throw std::invalid_argument("generator: unknown shape");
}

FamilyInfo family_info(const GeneratorSpec& spec) {
  FamilyInfo info;
  switch (spec.shape) {
    case Shape::Path: {
      info.corners = {0, spec.level};
      info.hub = spec.level / 2;
      info.arm_length = spec.level / 2 * spec.edge_length;
      break;
    }
    case Shape::Cycle: {
      info.corners = {};
      break;
    }
    case Shape::Lattice: {
      std::int64_t n = 1;
      for (int d = 0; d < spec.dim; ++d) n *= spec.side;
      const std::int64_t c = spec.side / 2;
      std::int64_t center = 0, stride = 1;
      for (int d = 0; d < spec.dim; ++d) {
        center += c * stride;
        stride *= spec.side;
      }
      info.hub = static_cast<VertexId>(center);
      info.corners = {0, static_cast<VertexId>(n - 1)};
      break;
    }
    case Shape::SierpinskiGasket: {
      const auto ids = gasket_ids(spec.level);
      const std::int64_t s = ipow(2, spec.level);
      info.corners = {ids.at({0, 0}), ids.at({0, s}), ids.at({s, 0})};
      info.arm_length = static_cast<double>(s) * spec.edge_length;
      break;
    }
    case Shape::SierpinskiCarpet:
    case Shape::VicsekTree: {
      const auto cells = digit_cells(
          spec.level, spec.shape == Shape::VicsekTree ? vicsek_alive : carpet_alive);
      std::map<Cell, VertexId> id_of;
      for (const Cell& c : cells) id_of.emplace(c, static_cast<VertexId>(id_of.size()));
      const std::int64_t side = ipow(3, spec.level);
      const std::int64_t mid = (side - 1) / 2;
      if (spec.shape == Shape::VicsekTree) {
        info.hub = id_of.at({mid, mid});
        info.corners = {id_of.at({0, mid}), id_of.at({mid, 0}),
                        id_of.at({mid, side - 1}), id_of.at({side - 1, mid})};
        info.arm_length = static_cast<double>(mid) * spec.edge_length;
      } else {
        info.corners = {id_of.at({0, 0}), id_of.at({0, side - 1}),
                        id_of.at({side - 1, 0}), id_of.at({side - 1, side - 1})};
      }
      break;
    }
  }
  return info;
}

MetricMeasureGraph glue_at_point(const MetricMeasureGraph& a,
                                 const MetricMeasureGraph& b, VertexId va,
                                 VertexId vb) {
  a.check(va);
  b.check(vb);
  const int na = a.vertex_count();
  const int nb = b.vertex_count();
  check_budget(static_cast<std::int64_t>(na) + nb - 1);
  if (a.metric_mode() != MetricMode::Graph || b.metric_mode() != MetricMode::Graph)
    throw std::invalid_argument("glue: only graph-metric spaces can be glued");

  // b's vertices keep their relative order, skipping vb
  std::vector<VertexId> remap(nb);
  VertexId next = na;
  for (VertexId v = 0; v < nb; ++v) remap[v] = v == vb ? va : next++;

  std::vector<double> m(a.vertex_measures());
  m.resize(na + nb - 1);
  for (VertexId v = 0; v < nb; ++v) {
    if (v == vb)
      m[va] += b.vertex_measure(v);
    else
      m[remap[v]] = b.vertex_measure(v);
  }
  std::vector<EdgeSpec> edges(a.edges());
  for (const auto& e : b.edges())
    edges.push_back({remap[e.u], remap[e.v], e.conductance, e.length});
  return MetricMeasureGraph(std::move(m), std::move(edges));
}

std::vector<double> weight_values(const MetricMeasureGraph& g, const WeightSpec& w) {
  g.check(w.origin);
  const auto dist = g.distances_from(w.origin);
  std::vector<double> out(g.vertex_count());
  for (VertexId v = 0; v < g.vertex_count(); ++v) {
    const double d = dist[v];
    if (!std::isfinite(d))
      throw std::invalid_argument("weight: origin does not reach vertex " + std::to_string(v));
    out[v] = w.form == WeightSpec::Form::Paper
                 ? std::pow(1.0 + d * d, w.alpha / 2.0)
                 : std::pow(1.0 + d, w.alpha);
    if (!(out[v] > 0) || !std::isfinite(out[v]))
      throw std::invalid_argument("weight: nonpositive or overflowing weight value");
  }
  return out;
}

MetricMeasureGraph apply_weight(const MetricMeasureGraph& g, const WeightSpec& w) {
  const auto wv = weight_values(g, w);
  std::vector<double> m(g.vertex_count());
  for (VertexId v = 0; v < g.vertex_count(); ++v) m[v] = g.vertex_measure(v) * wv[v];
  std::vector<EdgeSpec> edges(g.edges());
  for (auto& e : edges) e.conductance *= 0.5 * (wv[e.u] + wv[e.v]);
  std::vector<double> coords;
  if (g.coordinate_dim() > 0) {
    coords.reserve(static_cast<std::size_t>(g.vertex_count()) * g.coordinate_dim());
    for (VertexId v = 0; v < g.vertex_count(); ++v)
      for (double c : g.coordinates(v)) coords.push_back(c);
  }
  return MetricMeasureGraph(std::move(m), std::move(edges), g.metric_mode(),
                            std::move(coords), g.coordinate_dim());
}

AdmissibilityReport weight_admissibility_check(
    const MetricMeasureGraph& g, const WeightSpec& w,
    std::span<const std::pair<VertexId, VertexId>> pairs, double c_cap) {
  const auto wv = weight_values(g, w);
  const auto dist = g.distances_from(w.origin);
  AdmissibilityReport rep;
  rep.c_cap = c_cap;

  double sxx = 0, sxy = 0;
  std::vector<std::pair<VertexId, VertexId>> used;
  for (auto [x, y] : pairs) {
    g.check(x);
    g.check(y);
    if (dist[x] > dist[y]) std::swap(x, y);  // convention: d(o,y) >= d(o,x)
    if (!(dist[x] > 0) || dist[x] == dist[y]) {
      ++rep.skipped;
      continue;
    }
    const double lt = std::log(dist[x] / dist[y]);
    const double lw = std::log(wv[x] / wv[y]);
    sxx += lt * lt;
    sxy += lt * lw;
    used.emplace_back(x, y);
  }
  rep.used = static_cast<int>(used.size());
  if (used.empty()) {
    rep.ok = false;
    return rep;
  }
  const double alpha = sxy / sxx;
  rep.alpha1 = rep.alpha2 = alpha;

  double worst = 1.0;
  std::pair<VertexId, VertexId> worst_pair = used.front();
  for (auto [x, y] : used) {
    const double t = dist[x] / dist[y];
    const double ratio = wv[x] / wv[y];
    const double bound = std::pow(t, alpha);
    const double viol = std::max(ratio / bound, bound / ratio);
    if (viol > worst) {
      worst = viol;
      worst_pair = {x, y};
    }
  }
  rep.c = worst;
  rep.ok = worst <= c_cap;
  if (!rep.ok) rep.witness = worst_pair;
  return rep;
}

std::vector<VertexId> refinement_map(const GeneratorSpec& coarse,
                                     const GeneratorSpec& fine) {
  if (coarse.shape != fine.shape)
    throw std::invalid_argument("refinement_map: shapes differ");
  if (fine.level <= coarse.level)
    throw std::invalid_argument("refinement_map: fine level must exceed coarse level");
  const int gap = fine.level - coarse.level;
  if (coarse.shape == Shape::SierpinskiGasket) {
    const auto cids = gasket_ids(coarse.level);
    const auto fids = gasket_ids(fine.level);
    const std::int64_t f = ipow(2, gap);
    std::vector<VertexId> map(cids.size());
    for (const auto& [cell, id] : cids)
      map[id] = fids.at({cell.first * f, cell.second * f});
    return map;
  }
  if (coarse.shape == Shape::VicsekTree) {
    // a cell maps to the center sub-cell of its refinement
    const auto ccells = digit_cells(coarse.level, vicsek_alive);
    const auto fcells = digit_cells(fine.level, vicsek_alive);
    std::map<Cell, VertexId> fids;
    for (const Cell& c : fcells) fids.emplace(c, static_cast<VertexId>(fids.size()));
    const std::int64_t f = ipow(3, gap);
    const std::int64_t off = (f - 1) / 2;
    std::vector<VertexId> map(ccells.size());
    std::map<Cell, VertexId> cids;
    for (const Cell& c : ccells) cids.emplace(c, static_cast<VertexId>(cids.size()));
    for (const auto& [cell, id] : cids)
      map[id] = fids.at({cell.first * f + off, cell.second * f + off});
    return map;
  }
  throw std::invalid_argument("refinement_map: unsupported shape " + shape_name(coarse.shape));
}

}  // namespace mmdlab
