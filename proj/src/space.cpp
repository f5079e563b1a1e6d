#include "mmdlab/space.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <stdexcept>
#include <string>

namespace mmdlab {

namespace {

double euclid(std::span<const double> a, std::span<const double> b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return std::sqrt(s);
}

}  // namespace

MetricMeasureGraph::MetricMeasureGraph(std::vector<double> measure,
                                       std::vector<EdgeSpec> edges,
                                       MetricMode mode,
                                       std::vector<double> coords,
                                       int coord_dim)
    : measure_(std::move(measure)),
      edges_(std::move(edges)),
      mode_(mode),
      coords_(std::move(coords)),
      coord_dim_(coord_dim) {
  const auto n = static_cast<std::int64_t>(measure_.size());
  if (n == 0) throw std::invalid_argument("space: no vertices");
  for (std::int64_t v = 0; v < n; ++v) {
    if (!(measure_[v] > 0) || !std::isfinite(measure_[v]))
      throw std::invalid_argument("space: vertex measure must be positive (vertex " +
                                  std::to_string(v) + ")");
  }
  if (mode_ == MetricMode::Embedded) {
    if (coord_dim_ < 1 || coords_.size() != static_cast<std::size_t>(n) * coord_dim_)
      throw std::invalid_argument("space: embedded metric requires coordinates for every vertex");
  } else if (coord_dim_ > 0 && coords_.size() != static_cast<std::size_t>(n) * coord_dim_) {
    throw std::invalid_argument("space: coordinate block has wrong size");
  }

  for (const auto& e : edges_) {
    if (e.u < 0 || e.u >= n || e.v < 0 || e.v >= n)
      throw std::invalid_argument("space: edge endpoint out of range");
    if (e.u == e.v) throw std::invalid_argument("space: self loops are not allowed");
    if (!(e.conductance > 0) || !std::isfinite(e.conductance))
      throw std::invalid_argument("space: conductance must be positive");
    if (!(e.length > 0) || !std::isfinite(e.length))
      throw std::invalid_argument("space: edge length must be positive");
    if (e.length != 1.0) explicit_lengths_ = true;
  }

  offsets_.assign(n + 1, 0);
  for (const auto& e : edges_) {
    ++offsets_[e.u + 1];
    ++offsets_[e.v + 1];
  }
  for (std::int64_t v = 0; v < n; ++v) offsets_[v + 1] += offsets_[v];
  arcs_.resize(edges_.size() * 2);
  std::vector<std::int64_t> cursor(offsets_.begin(), offsets_.end() - 1);
  for (std::size_t i = 0; i < edges_.size(); ++i) {
    const auto& e = edges_[i];
    arcs_[cursor[e.u]++] = Arc{e.v, static_cast<std::int32_t>(i)};
    arcs_[cursor[e.v]++] = Arc{e.u, static_cast<std::int32_t>(i)};
  }
  // stable arc order for deterministic traversals
  for (std::int64_t v = 0; v < n; ++v) {
    std::sort(arcs_.begin() + offsets_[v], arcs_.begin() + offsets_[v + 1],
              [](const Arc& a, const Arc& b) {
                return a.to != b.to ? a.to < b.to : a.edge < b.edge;
              });
  }

  degree_.assign(n, 0.0);
  for (const auto& e : edges_) {
    degree_[e.u] += e.conductance;
    degree_[e.v] += e.conductance;
  }

  total_measure_ = 0;
  for (double m : measure_) total_measure_ += m;

  min_edge_length_ = kInfDist;
  for (const auto& e : edges_) {
    const double len = mode_ == MetricMode::Embedded
                           ? euclid(coordinates(e.u), coordinates(e.v))
                           : e.length;
    min_edge_length_ = std::min(min_edge_length_, len);
  }

  component_.assign(n, -1);
  component_count_ = 0;
  std::vector<VertexId> stack;
  for (VertexId s = 0; s < n; ++s) {
    if (component_[s] >= 0) continue;
    component_[s] = component_count_;
    stack.push_back(s);
    while (!stack.empty()) {
      const VertexId u = stack.back();
      stack.pop_back();
      for (const Arc& a : arcs(u)) {
        if (component_[a.to] < 0) {
          component_[a.to] = component_count_;
          stack.push_back(a.to);
        }
      }
    }
    ++component_count_;
  }
}

VertexId MetricMeasureGraph::check(VertexId v) const {
  if (v < 0 || v >= vertex_count())
    throw std::invalid_argument("space: invalid vertex id " + std::to_string(v));
  return v;
}

std::span<const MetricMeasureGraph::Arc> MetricMeasureGraph::arcs(VertexId v) const {
  check(v);
  return {arcs_.data() + offsets_[v], arcs_.data() + offsets_[v + 1]};
}

std::span<const double> MetricMeasureGraph::coordinates(VertexId v) const {
  check(v);
  return {coords_.data() + static_cast<std::size_t>(v) * coord_dim_,
          static_cast<std::size_t>(coord_dim_)};
}

std::vector<double> MetricMeasureGraph::distances_from(VertexId x, double bound) const {
  check(x);
  const int n = vertex_count();
  std::vector<double> dist(n, kInfDist);
  if (mode_ == MetricMode::Embedded) {
    const auto cx = coordinates(x);
    for (VertexId v = 0; v < n; ++v) {
      const double d = euclid(cx, coordinates(v));
      if (d <= bound) dist[v] = d;
    }
    return dist;
  }
  using Item = std::pair<double, VertexId>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
  dist[x] = 0;
  heap.emplace(0.0, x);
  while (!heap.empty()) {
    const auto [d, u] = heap.top();
    heap.pop();
    if (d > dist[u]) continue;
    for (const Arc& a : arcs(u)) {
      const double nd = d + edges_[a.edge].length;
      if (nd < dist[a.to] && nd <= bound) {
        dist[a.to] = nd;
        heap.emplace(nd, a.to);
      }
    }
  }
  return dist;
}

double MetricMeasureGraph::distance(VertexId a, VertexId b) const {
  check(a);
  check(b);
  if (mode_ == MetricMode::Embedded) return euclid(coordinates(a), coordinates(b));
  if (a == b) return 0.0;
  const int n = vertex_count();
  std::vector<double> dist(n, kInfDist);
  using Item = std::pair<double, VertexId>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
  dist[a] = 0;
  heap.emplace(0.0, a);
  while (!heap.empty()) {
    const auto [d, u] = heap.top();
    heap.pop();
    if (d > dist[u]) continue;
    if (u == b) return d;
    for (const Arc& arc : arcs(u)) {
      const double nd = d + edges_[arc.edge].length;
      if (nd < dist[arc.to]) {
        dist[arc.to] = nd;
        heap.emplace(nd, arc.to);
      }
    }
  }
  return kInfDist;
}

RegionSpec RegionSpec::ball(VertexId x, double r) {
  RegionSpec s;
  s.kind = Kind::Ball;
  s.center = x;
  s.radius = r;
  return s;
}

RegionSpec RegionSpec::annulus(VertexId x, double r_in, double r_out) {
  RegionSpec s;
  s.kind = Kind::Annulus;
  s.center = x;
  s.r_in = r_in;
  s.r_out = r_out;
  return s;
}

RegionSpec RegionSpec::explicit_set(std::vector<VertexId> ids) {
  RegionSpec s;
  s.kind = Kind::Explicit;
  s.ids = std::move(ids);
  return s;
}

std::vector<VertexId> ball(const MetricMeasureGraph& g, VertexId x, double r) {
  g.check(x);
  if (!(r > 0)) throw std::invalid_argument("ball: radius must be positive");
  const auto dist = g.distances_from(x, r);
  std::vector<VertexId> out;
  for (VertexId v = 0; v < g.vertex_count(); ++v)
    if (dist[v] < r) out.push_back(v);
  return out;
}

std::vector<VertexId> annulus(const MetricMeasureGraph& g, VertexId x,
                              double r_in, double r_out) {
  g.check(x);
  std::vector<VertexId> out;
  if (!(r_out > r_in)) return out;
  const auto dist = g.distances_from(x, r_out);
  for (VertexId v = 0; v < g.vertex_count(); ++v)
    if (dist[v] >= r_in && dist[v] < r_out) out.push_back(v);
  return out;
}

std::vector<VertexId> resolve_region(const MetricMeasureGraph& g,
                                     const RegionSpec& region) {
  switch (region.kind) {
    case RegionSpec::Kind::Ball:
      return ball(g, region.center, region.radius);
    case RegionSpec::Kind::Annulus:
      return annulus(g, region.center, region.r_in, region.r_out);
    case RegionSpec::Kind::Explicit: {
      std::vector<VertexId> out = region.ids;
      for (VertexId v : out) g.check(v);
      std::sort(out.begin(), out.end());
      out.erase(std::unique(out.begin(), out.end()), out.end());
      return out;
    }
  }
  return {};
}

double measure_of(const MetricMeasureGraph& g, std::span<const VertexId> region) {
  double s = 0;
  for (VertexId v : region) s += g.vertex_measure(v);
  return s;
}

double measure_of(const MetricMeasureGraph& g, const RegionSpec& region) {
  const auto ids = resolve_region(g, region);
  return measure_of(g, std::span<const VertexId>(ids));
}

std::vector<VertexId> epsilon_net(const MetricMeasureGraph& g,
                                  std::span<const VertexId> region, double s) {
  if (region.empty()) throw std::invalid_argument("epsilon_net: empty region");
  if (!(s > 0)) throw std::invalid_argument("epsilon_net: separation must be positive");
  std::vector<VertexId> sorted(region.begin(), region.end());
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  g.check(sorted.back());

  std::vector<char> blocked(g.vertex_count(), 0);
  std::vector<VertexId> net;
  for (VertexId v : sorted) {
    if (blocked[v]) continue;
    net.push_back(v);
    const auto dist = g.distances_from(v, s);
    for (VertexId w : sorted)
      if (dist[w] < s) blocked[w] = 1;
  }
  return net;
}

double graph_energy(const MetricMeasureGraph& g, std::span<const double> f) {
  if (f.size() != static_cast<std::size_t>(g.vertex_count()))
    throw std::invalid_argument("graph_energy: vector size mismatch");
  double e = 0;
  for (const auto& edge : g.edges()) {
    const double d = f[edge.u] - f[edge.v];
    e += edge.conductance * d * d;
  }
  return e;
}

std::vector<double> energy_measure_vector(const MetricMeasureGraph& g,
                                          std::span<const double> f) {
  if (f.size() != static_cast<std::size_t>(g.vertex_count()))
    throw std::invalid_argument("energy_measure: vector size mismatch");
  for (double x : f)
    if (!std::isfinite(x))
      throw std::invalid_argument("energy_measure: non-finite function value");
  std::vector<double> gamma(g.vertex_count(), 0.0);
  const auto& edges = g.edges();
  for (VertexId v = 0; v < g.vertex_count(); ++v) {
    double s = 0;
    for (const auto& a : g.arcs(v)) {
      const auto& e = edges[a.edge];
      const double d = f[e.u] - f[e.v];
      s += 0.5 * e.conductance * d * d;
    }
    gamma[v] = s;
  }
  return gamma;
}

double energy_measure(const MetricMeasureGraph& g, std::span<const double> f,
                      std::span<const VertexId> region) {
  const auto gamma = energy_measure_vector(g, f);
  std::vector<VertexId> sorted(region.begin(), region.end());
  std::sort(sorted.begin(), sorted.end());
  double s = 0;
  for (VertexId v : sorted) s += gamma[g.check(v)];
  return s;
}

double energy_measure(const MetricMeasureGraph& g, std::span<const double> f,
                      const RegionSpec& region) {
  const auto ids = resolve_region(g, region);
  return energy_measure(g, f, std::span<const VertexId>(ids));
}

}  // namespace mmdlab
