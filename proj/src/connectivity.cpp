#include "mmdlab/connectivity.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <queue>

#include "mmdlab/errors.hpp"
#include "mmdlab/parallel.hpp"
#include "mmdlab/rng.hpp"

namespace mmdlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct HeapItem {
  double d;
  VertexId v;
};
struct HeapItemGreater {
  bool operator()(const HeapItem& a, const HeapItem& b) const { return a.d > b.d; }
};

// Bounded single-source distance scan with stamped buffers, so repeated
// scans on the same graph avoid O(V) clears.
class MetricScratch {
 public:
  explicit MetricScratch(const MetricMeasureGraph& g)
      : g_(g), dist_(g.vertex_count(), 0.0), stamp_(g.vertex_count(), 0), cur_(0) {}

  // Collects (v, d(x,v)) with d <= bound, ascending vertex id.
  void neighborhood(VertexId x, double bound,
                    std::vector<std::pair<VertexId, double>>& out) {
    out.clear();
    if (g_.metric_mode() == MetricMode::Embedded) {
      for (VertexId v = 0; v < g_.vertex_count(); ++v) {
        const double d = g_.distance(x, v);
        if (d <= bound) out.emplace_back(v, d);
      }
      return;
    }
    ++cur_;
    heap_.clear();
    touched_.clear();
    const HeapItemGreater cmp;
    set_dist(x, 0.0);
    heap_.push_back({0.0, x});
    while (!heap_.empty()) {
      std::pop_heap(heap_.begin(), heap_.end(), cmp);
      const auto [d, u] = heap_.back();
      heap_.pop_back();
      if (d > get_dist(u)) continue;
      for (const auto& arc : g_.arcs(u)) {
        const double nd = d + g_.edges()[arc.edge].length;
        if (nd <= bound && nd < get_dist(arc.to)) {
          set_dist(arc.to, nd);
          heap_.push_back({nd, arc.to});
          std::push_heap(heap_.begin(), heap_.end(), cmp);
        }
      }
    }
    std::sort(touched_.begin(), touched_.end());
    for (VertexId v : touched_) out.emplace_back(v, dist_[v]);
  }

 private:
  double get_dist(VertexId v) const { return stamp_[v] == cur_ ? dist_[v] : kInf; }
  void set_dist(VertexId v, double d) {
    if (stamp_[v] != cur_) {
      stamp_[v] = cur_;
      touched_.push_back(v);
    }
    dist_[v] = d;
  }

  const MetricMeasureGraph& g_;
  std::vector<double> dist_;
  std::vector<std::uint64_t> stamp_;
  std::uint64_t cur_;
  std::vector<HeapItem> heap_;
  std::vector<VertexId> touched_;
};

std::vector<std::int64_t> label_sizes(const std::vector<int>& labels) {
  int k = 0;
  for (int l : labels) k = std::max(k, l + 1);
  std::vector<std::int64_t> sizes(k, 0);
  for (int l : labels) ++sizes[l];
  return sizes;
}

// Union-find with path compression; used for induced-edge connectivity.
class UnionFind {
 public:
  explicit UnionFind(std::size_t n) : parent_(n) {
    for (std::size_t i = 0; i < n; ++i) parent_[i] = static_cast<int>(i);
  }
  int find(int a) {
    while (parent_[a] != a) {
      parent_[a] = parent_[parent_[a]];
      a = parent_[a];
    }
    return a;
  }
  void merge(int a, int b) { parent_[find(a)] = find(b); }

 private:
  std::vector<int> parent_;
};

// Components of the subgraph induced on `keep`, labels normalized by first
// occurrence in ascending keep order.
std::vector<int> induced_edge_components(const MetricMeasureGraph& g,
                                         std::span<const VertexId> keep) {
  std::vector<int> index(g.vertex_count(), -1);
  for (std::size_t i = 0; i < keep.size(); ++i) index[keep[i]] = static_cast<int>(i);
  UnionFind uf(keep.size());
  for (std::size_t i = 0; i < keep.size(); ++i) {
    for (const auto& arc : g.arcs(keep[i])) {
      const int j = index[arc.to];
      if (j >= 0) uf.merge(static_cast<int>(i), j);
    }
  }
  std::vector<int> label(keep.size(), -1);
  std::vector<int> root_label(keep.size(), -1);
  int next = 0;
  for (std::size_t i = 0; i < keep.size(); ++i) {
    const int r = uf.find(static_cast<int>(i));
    if (root_label[r] < 0) root_label[r] = next++;
    label[i] = root_label[r];
  }
  return label;
}

ConnectivityReport pairs_report_from_labels(std::span<const VertexId> target,
                                            std::span<const VertexId> container,
                                            const std::vector<int>& labels,
                                            std::int64_t max_pairs,
                                            std::uint64_t seed) {
  ConnectivityReport rep;
  rep.seed = seed;
  rep.component_sizes = label_sizes(labels);
  rep.component_count = static_cast<int>(rep.component_sizes.size());
  // container is sorted ascending; target vertices outside it can reach
  // nothing within the container and get unique labels
  std::vector<int> target_label(target.size(), -1);
  for (std::size_t i = 0; i < target.size(); ++i) {
    const auto it = std::lower_bound(container.begin(), container.end(), target[i]);
    if (it != container.end() && *it == target[i])
      target_label[i] = labels[static_cast<std::size_t>(it - container.begin())];
    else
      target_label[i] = -2 - static_cast<int>(i);
  }
  const auto pairs = sample_index_pairs(static_cast<std::int64_t>(target.size()),
                                        max_pairs, seed);
  rep.pairs_checked = static_cast<std::int64_t>(pairs.size());
  for (const auto& [i, j] : pairs) {
    if (target_label[i] != target_label[j]) {
      if (rep.violations.size() < 8)
        rep.violations.emplace_back(target[i], target[j]);
      else
        break;
    }
  }
  rep.pass = rep.violations.empty();
  return rep;
}

constexpr std::int64_t kMaxSampledPairs = 200;
constexpr std::int64_t kAllPairsThreshold = 200;  // region size for all-pairs

std::int64_t pair_budget(std::size_t region_size) {
  return static_cast<std::int64_t>(region_size) <= kAllPairsThreshold
             ? std::numeric_limits<std::int64_t>::max() / 4
             : kMaxSampledPairs;
}

}  // namespace

std::vector<int> proximity_components(const MetricMeasureGraph& g,
                                      std::span<const VertexId> container,
                                      double epsilon) {
  if (!(epsilon > 0)) throw std::invalid_argument("proximity: epsilon must be positive");
  std::vector<int> index(g.vertex_count(), -1);
  for (std::size_t i = 0; i < container.size(); ++i)
    index[g.check(container[i])] = static_cast<int>(i);

  std::vector<int> label(container.size(), -1);
  MetricScratch scratch(g);
  std::vector<std::pair<VertexId, double>> nbhd;
  std::vector<VertexId> queue;
  int comp = 0;
  for (std::size_t s = 0; s < container.size(); ++s) {
    if (label[s] >= 0) continue;
    label[s] = comp;
    queue.assign(1, container[s]);
    while (!queue.empty()) {
      const VertexId u = queue.back();
      queue.pop_back();
      scratch.neighborhood(u, epsilon, nbhd);
      for (const auto& [v, d] : nbhd) {
        const int j = index[v];
        if (j >= 0 && label[j] < 0) {
          label[j] = comp;
          queue.push_back(v);
        }
      }
    }
    ++comp;
  }
  return label;
}

ChainResult chain_count(const MetricMeasureGraph& g, VertexId x, VertexId y,
                        const RegionSpec& container, double epsilon) {
  if (!(epsilon > 0)) throw std::invalid_argument("chain: epsilon must be positive");
  const auto region = resolve_region(g, container);
  std::vector<int> index(g.vertex_count(), -1);
  for (std::size_t i = 0; i < region.size(); ++i) index[region[i]] = static_cast<int>(i);
  g.check(x);
  g.check(y);
  if (index[x] < 0 || index[y] < 0)
    throw std::invalid_argument("chain: endpoints must lie in the container");

  ChainResult res;
  res.epsilon = epsilon;
  if (x == y) {
    res.found = true;
    res.length = 0;
    res.chain = {x};
    return res;
  }

  std::vector<std::int64_t> hops(region.size(), -1);
  std::vector<int> pred(region.size(), -1);
  std::deque<int> queue;
  hops[index[x]] = 0;
  queue.push_back(index[x]);
  MetricScratch scratch(g);
  std::vector<std::pair<VertexId, double>> nbhd;
  while (!queue.empty()) {
    const int ui = queue.front();
    queue.pop_front();
    if (region[ui] == y) break;
    scratch.neighborhood(region[ui], epsilon, nbhd);
    for (const auto& [v, d] : nbhd) {
      const int vi = index[v];
      if (vi >= 0 && hops[vi] < 0) {
        hops[vi] = hops[ui] + 1;
        pred[vi] = ui;
        queue.push_back(vi);
      }
    }
  }

  const int yi = index[y];
  if (hops[yi] < 0) return res;  // unreachable
  res.found = true;
  res.length = hops[yi];
  for (int cur = yi; cur >= 0; cur = pred[cur]) res.chain.push_back(region[cur]);
  std::reverse(res.chain.begin(), res.chain.end());
  return res;
}

BallChainReport ball_chain_connected(const MetricMeasureGraph& g, VertexId x,
                                     double r, double a_enlargement,
                                     std::span<const double> epsilons,
                                     std::uint64_t seed) {
  if (a_enlargement < 1)
    throw std::invalid_argument("ball chain check: enlargement must be >= 1");
  const auto target = ball(g, x, r);
  const auto container = a_enlargement == 1.0 ? target : ball(g, x, a_enlargement * r);

  BallChainReport rep;
  rep.pass = true;
  const auto ne = static_cast<std::int64_t>(epsilons.size());
  std::vector<ConnectivityReport> per_eps(ne);
  parallel_for(ne, [&](std::int64_t i) {
    const auto labels = proximity_components(g, container, epsilons[i]);
    per_eps[i] = pairs_report_from_labels(target, container, labels,
                                          pair_budget(target.size()), seed);
  });
  for (std::int64_t i = 0; i < ne; ++i) {
    rep.pass = rep.pass && per_eps[i].pass;
    rep.per_epsilon.emplace_back(epsilons[i], std::move(per_eps[i]));
  }
  return rep;
}

ConnectivityReport annulus_chain_connected(const MetricMeasureGraph& g, VertexId x,
                                           double r, double c, double epsilon,
                                           std::uint64_t seed) {
  if (!(c >= 2)) throw std::invalid_argument("annulus chain check: dilation must be >= 2");
  const auto target = annulus(g, x, r, 2 * r);
  if (target.empty()) {
    ConnectivityReport rep;
    rep.vacuous = true;
    rep.pass = true;
    rep.notes.push_back("annulus(x, r, 2r) is empty");
    return rep;
  }
  const auto container = annulus(g, x, r / c, c * r);
  const auto labels = proximity_components(g, container, epsilon);
  return pairs_report_from_labels(target, container, labels,
                                  pair_budget(target.size()), seed);
}

ConnectivityReport annulus_path_connected(const MetricMeasureGraph& g, VertexId x,
                                          double r, double c0) {
  if (!(c0 >= 2)) throw std::invalid_argument("annulus path check: C0 must be >= 2");
  const auto target = annulus(g, x, r, 2 * r);
  if (target.empty()) {
    ConnectivityReport rep;
    rep.vacuous = true;
    rep.pass = true;
    rep.notes.push_back("annulus(x, r, 2r) is empty");
    return rep;
  }
  const auto container = annulus(g, x, r / c0, c0 * r);
  const auto labels = induced_edge_components(g, container);
  // with labels computed, membership in one component decides every pair
  return pairs_report_from_labels(target, container, labels,
                                  pair_budget(target.size()), 0);
}

MinimalC0Report minimal_annulus_constant(const MetricMeasureGraph& g,
                                         std::span<const VertexId> centers,
                                         std::span<const double> radii,
                                         std::span<const double> c0_grid) {
  for (std::size_t i = 1; i < c0_grid.size(); ++i)
    if (!(c0_grid[i] > c0_grid[i - 1]))
      throw std::invalid_argument("minimal C0: grid must be ascending");
  MinimalC0Report rep;
  for (double c0 : c0_grid) {
    struct Tuple {
      VertexId x;
      double r;
    };
    std::vector<Tuple> tuples;
    for (VertexId x : centers)
      for (double r : radii) tuples.push_back({x, r});
    std::vector<char> ok(tuples.size(), 0);
    parallel_for(static_cast<std::int64_t>(tuples.size()), [&](std::int64_t i) {
      ok[i] = annulus_path_connected(g, tuples[i].x, tuples[i].r, c0).pass ? 1 : 0;
    });
    const bool all = std::all_of(ok.begin(), ok.end(), [](char c) { return c != 0; });
    rep.grid_results.emplace_back(c0, all);
    if (all && !rep.found) {
      rep.found = true;
      rep.c0 = c0;
      break;
    }
  }
  return rep;
}

ChainBoundReport chain_bound_ratio(const MetricMeasureGraph& g,
                                   std::span<const std::pair<VertexId, VertexId>> pairs,
                                   std::span<const double> epsilons, double a0,
                                   const ScalingFunction& psi) {
  if (!(a0 > 0)) throw std::invalid_argument("chain bound: A0 must be positive");
  ChainBoundReport rep;
  rep.a0 = a0;
  std::vector<double> pair_dist(pairs.size(), 0.0);
  parallel_for(static_cast<std::int64_t>(pairs.size()), [&](std::int64_t i) {
    pair_dist[i] = g.distance(pairs[i].first, pairs[i].second);
  });
  double eps_max = 0;
  for (double eps : epsilons) eps_max = std::max(eps_max, eps);
  for (double d : pair_dist)
    if (!(d >= eps_max))
      throw std::invalid_argument("chain bound: pairs must satisfy d(x,y) >= epsilon");

  struct Job {
    VertexId x, y;
    double eps;
    double dist;
  };
  std::vector<Job> jobs;
  for (std::size_t p = 0; p < pairs.size(); ++p)
    for (double eps : epsilons)
      jobs.push_back({pairs[p].first, pairs[p].second, eps, pair_dist[p]});
  std::vector<ChainBoundEntry> entries(jobs.size());
  parallel_for(static_cast<std::int64_t>(jobs.size()), [&](std::int64_t i) {
    const auto [x, y, eps, d] = jobs[i];
    const auto res = chain_count(g, x, y, RegionSpec::ball(x, a0 * d), eps);
    ChainBoundEntry e;
    e.x = x;
    e.y = y;
    e.epsilon = eps;
    e.dist = d;
    e.hops = res.found ? res.length : -1;
    e.ratio = res.found
                  ? static_cast<double>(res.length) * static_cast<double>(res.length) *
                        psi(eps) / psi(d)
                  : kInf;
    entries[i] = e;
  });
  rep.entries = std::move(entries);
  for (const auto& e : rep.entries) {
    if (e.hops < 0) rep.all_finite = false;
    rep.sup_ratio = std::max(rep.sup_ratio, e.ratio);
  }
  return rep;
}

PartitionOfUnity build_partition_of_unity(const MetricMeasureGraph& g,
                                          std::span<const VertexId> region,
                                          double epsilon, const ScalingFunction& psi) {
  if (region.empty()) throw std::invalid_argument("partition: empty region");
  if (!(epsilon >= 4 * g.min_edge_length()))
    throw std::invalid_argument("partition: epsilon must be >= 4x the minimum edge length");

  PartitionOfUnity pou;
  pou.epsilon = epsilon;
  pou.net = epsilon_net(g, region, epsilon);

  const int n = g.vertex_count();
  const auto nz = static_cast<std::int64_t>(pou.net.size());

  // raw bumps, then clear every bump on foreign inner balls so the
  // normalized functions plateau at exactly one
  std::vector<std::vector<std::pair<VertexId, double>>> bumps(nz);
  std::vector<int> inner_owner(n, -1);
  {
    MetricScratch scratch(g);
    std::vector<std::pair<VertexId, double>> nbhd;
    for (std::int64_t i = 0; i < nz; ++i) {
      scratch.neighborhood(pou.net[i], epsilon / 4, nbhd);
      for (const auto& [v, d] : nbhd)
        if (d < epsilon / 4) inner_owner[v] = static_cast<int>(i);
    }
  }
  parallel_for(nz, [&](std::int64_t i) {
    MetricScratch scratch(g);
    std::vector<std::pair<VertexId, double>> nbhd;
    scratch.neighborhood(pou.net[i], 1.25 * epsilon, nbhd);
    auto& bump = bumps[i];
    for (const auto& [v, d] : nbhd) {
      if (inner_owner[v] >= 0 && inner_owner[v] != static_cast<int>(i)) continue;
      const double raw = (1.25 * epsilon - d) / epsilon;
      const double value = std::clamp(raw, 0.0, 1.0);
      if (value > 0) bump.emplace_back(v, value);
    }
  });

  std::vector<double> total(n, 0.0);
  for (std::int64_t i = 0; i < nz; ++i)
    for (const auto& [v, value] : bumps[i]) total[v] += value;

  pou.functions.resize(nz);
  for (std::int64_t i = 0; i < nz; ++i) {
    auto& f = pou.functions[i];
    f.reserve(bumps[i].size());
    for (const auto& [v, value] : bumps[i]) f.emplace_back(v, value / total[v]);
  }
  for (VertexId v = 0; v < n; ++v)
    if (total[v] == 0) pou.uncovered.push_back(v);

  // measured energy bound constant
  pou.energies.assign(nz, 0.0);
  std::vector<double> constants(nz, 0.0);
  parallel_for(nz, [&](std::int64_t i) {
    std::vector<double> dense(n, 0.0);
    for (const auto& [v, value] : pou.functions[i]) dense[v] = value;
    pou.energies[i] = graph_energy(g, dense);
    const double mass = measure_of(g, RegionSpec::ball(pou.net[i], epsilon));
    constants[i] = pou.energies[i] * psi(epsilon) / mass;
  });
  for (double c : constants) pou.energy_constant = std::max(pou.energy_constant, c);
  return pou;
}

double truncated_maximal(const MetricMeasureGraph& g, std::span<const double> nu,
                         VertexId x, double big_r) {
  if (!(big_r > 0)) throw std::invalid_argument("maximal function: R must be positive");
  if (nu.size() != static_cast<std::size_t>(g.vertex_count()))
    throw std::invalid_argument("maximal function: measure vector size mismatch");
  const auto dist = g.distances_from(x, big_r);
  std::vector<std::pair<double, VertexId>> order;
  for (VertexId v = 0; v < g.vertex_count(); ++v)
    if (dist[v] < big_r) order.emplace_back(dist[v], v);
  std::sort(order.begin(), order.end());

  // sweep realized radii: after absorbing all vertices at distance t, the
  // ball {d <= t} is realized by radii just above t
  double best = 0;
  double nu_sum = 0, m_sum = 0;
  std::size_t i = 0;
  while (i < order.size()) {
    const double t = order[i].first;
    while (i < order.size() && order[i].first == t) {
      nu_sum += nu[order[i].second];
      m_sum += g.vertex_measure(order[i].second);
      ++i;
    }
    best = std::max(best, nu_sum / m_sum);
  }
  return best;
}

TwoPointReport two_point_check(const MetricMeasureGraph& g, std::span<const double> u,
                               VertexId x0, double big_r, std::int64_t max_pairs,
                               const ScalingFunction& psi, double c_p,
                               std::uint64_t seed) {
  if (!(c_p > 0)) throw std::invalid_argument("two point check: C_P must be positive");
  const auto region = ball(g, x0, big_r / c_p);
  const auto gamma = energy_measure_vector(g, u);

  TwoPointReport rep;
  rep.seed = seed;
  const auto pairs = sample_index_pairs(static_cast<std::int64_t>(region.size()),
                                        std::min(max_pairs, pair_budget(region.size())),
                                        seed);
  rep.pairs_checked = static_cast<std::int64_t>(pairs.size());

  std::vector<double> maximal(region.size(), 0.0);
  parallel_for(static_cast<std::int64_t>(region.size()), [&](std::int64_t i) {
    maximal[i] = truncated_maximal(g, gamma, region[i], big_r);
  });

  const double psi_r = psi(big_r);
  for (const auto& [i, j] : pairs) {
    const double du = u[region[i]] - u[region[j]];
    const double lhs = du * du;
    const double denom = psi_r * (maximal[i] + maximal[j]);
    if (denom == 0) {
      if (lhs > 0) {
        rep.violation = true;
        if (!rep.violating_pair) rep.violating_pair = {region[i], region[j]};
      }
      continue;
    }
    rep.c_fit = std::max(rep.c_fit, lhs / denom);
  }
  return rep;
}

RefinedChain refine_chain(std::span<const MetricMeasureGraph* const> levels,
                          std::span<const std::vector<VertexId>> maps, VertexId x,
                          VertexId y, double eps_ratio, double a0,
                          double map_tolerance) {
  if (levels.size() < 1) throw std::invalid_argument("refine: need at least one level");
  if (maps.size() + 1 != levels.size())
    throw std::invalid_argument("refine: need one map per level transition");
  if (!(eps_ratio > 0 && eps_ratio < 0.5))
    throw std::invalid_argument("refine: epsilon ratio must lie in (0, 1/2)");
  if (!(a0 > 1)) throw std::invalid_argument("refine: A0 must exceed 1");

  // validate the injections: sizes, injectivity, sampled distance ratios
  for (std::size_t k = 0; k < maps.size(); ++k) {
    const auto& coarse = *levels[k];
    const auto& fine = *levels[k + 1];
    if (maps[k].size() != static_cast<std::size_t>(coarse.vertex_count()))
      throw std::invalid_argument("refine: map " + std::to_string(k + 1) +
                                  " does not cover the coarse level");
    std::vector<char> hit(fine.vertex_count(), 0);
    for (VertexId v : maps[k]) {
      fine.check(v);
      if (hit[v]) throw std::invalid_argument("refine: map " + std::to_string(k + 1) +
                                              " is not injective");
      hit[v] = 1;
    }
    const auto pairs =
        sample_index_pairs(coarse.vertex_count(), 32, 0x5eedULL + k);
    for (const auto& [i, j] : pairs) {
      const double dc = coarse.distance(i, j);
      const double df = fine.distance(maps[k][i], maps[k][j]);
      if (!(dc > 0)) continue;
      const double ratio = df / dc;
      if (ratio < 1 - map_tolerance || ratio > 1 + map_tolerance)
        throw std::invalid_argument(
            "refine: map " + std::to_string(k + 1) + " distorts d(" +
            std::to_string(i) + "," + std::to_string(j) + ") by factor " +
            std::to_string(ratio));
    }
  }

  RefinedChain out;
  const auto& base = *levels[0];
  base.check(x);
  base.check(y);
  const double d0 = base.distance(x, y);
  out.base_distance = d0;
  out.containment_radius = 2 * a0 * d0;

  if (x == y) {
    out.pass = true;
    RefinedChainLevel lvl;
    lvl.points = {x};
    out.levels.push_back(lvl);
    return out;
  }

  struct LevelChain {
    std::vector<VertexId> points;
    std::vector<int> parent_hop;  // index of the previous level's hop
  };

  LevelChain current;
  {
    const double scale = eps_ratio * d0;
    const auto res = chain_count(base, x, y, RegionSpec::ball(x, a0 * d0), scale);
    if (!res.found)
      throw RefinementError("refine: no chain at level 1 at scale " +
                            std::to_string(scale));
    current.points = res.chain;
    current.parent_hop.assign(res.chain.size(), -1);

    RefinedChainLevel lvl;
    lvl.points = res.chain;
    lvl.scale = scale;
    for (std::size_t i = 0; i + 1 < res.chain.size(); ++i)
      lvl.max_step = std::max(lvl.max_step, base.distance(res.chain[i], res.chain[i + 1]));
    for (VertexId p : res.chain)
      lvl.max_from_root = std::max(lvl.max_from_root, base.distance(x, p));
    out.levels.push_back(std::move(lvl));
  }

  bool all_ok = true;
  VertexId root = x;
  for (std::size_t k = 0; k < maps.size(); ++k) {
    const auto& fine = *levels[k + 1];
    const auto& map = maps[k];
    const double scale = std::pow(eps_ratio, static_cast<double>(k) + 2) * d0;
    const double deviation_bound = a0 * std::pow(eps_ratio, static_cast<double>(k) + 1) * d0;
    root = map[root];

    LevelChain next;
    RefinedChainLevel lvl;
    lvl.scale = scale;
    lvl.deviation_bound = deviation_bound;

    const auto& pts = current.points;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
      const VertexId a = map[pts[i]];
      const VertexId b = map[pts[i + 1]];
      std::vector<VertexId> seg;
      if (a == b) {
        seg = {a, b};
      } else {
        const double hop = fine.distance(a, b);
        const auto res = chain_count(fine, a, b, RegionSpec::ball(a, a0 * hop), scale);
        if (!res.found)
          throw RefinementError("refine: level " + std::to_string(k + 2) + " hop " +
                                std::to_string(i) + " admits no chain at scale " +
                                std::to_string(scale));
        seg = res.chain;
      }
      // the full sub-chain occupies the parent hop's parameter interval;
      // joints repeat a vertex, a zero-length step
      for (VertexId q : seg) {
        next.points.push_back(q);
        next.parent_hop.push_back(static_cast<int>(i));
        lvl.sup_deviation = std::max(lvl.sup_deviation, fine.distance(a, q));
      }
    }

    for (std::size_t q = 0; q + 1 < next.points.size(); ++q)
      lvl.max_step = std::max(lvl.max_step,
                              fine.distance(next.points[q], next.points[q + 1]));
    for (VertexId p : next.points)
      lvl.max_from_root = std::max(lvl.max_from_root, fine.distance(root, p));

    lvl.points = next.points;
    all_ok = all_ok && lvl.sup_deviation < deviation_bound &&
             lvl.max_from_root <= out.containment_radius && lvl.max_step <= scale;
    out.levels.push_back(std::move(lvl));
    current = std::move(next);
  }

  // the base level must also stay inside the containment ball
  all_ok = all_ok && out.levels.front().max_from_root <= out.containment_radius &&
           out.levels.front().max_step <= out.levels.front().scale;
  out.pass = all_ok;
  return out;
}

RcaReport rca_check(const MetricMeasureGraph& g, VertexId o, double a,
                    std::span<const double> radii) {
  if (!(a > 1)) throw std::invalid_argument("rca: A must exceed 1");
  g.check(o);
  RcaReport rep;
  rep.pass = true;
  const double half_edge = g.min_edge_length() / 2;
  double max_r = 0;
  for (double r : radii) max_r = std::max(max_r, r);
  const auto dist = g.distances_from(o, a * max_r + half_edge);
  for (double r : radii) {
    if (!(r > a)) throw std::invalid_argument("rca: radii must exceed A");
    std::vector<VertexId> sphere;
    for (VertexId v = 0; v < g.vertex_count(); ++v)
      if (std::abs(dist[v] - r) < half_edge) sphere.push_back(v);
    ConnectivityReport entry;
    if (sphere.empty()) {
      entry.vacuous = true;
      entry.pass = true;
      entry.notes.push_back("empty sphere");
    } else {
      const auto container = annulus(g, o, r / a, a * r);
      const auto labels = induced_edge_components(g, container);
      entry = pairs_report_from_labels(sphere, container, labels,
                                       pair_budget(sphere.size()), 0);
    }
    rep.pass = rep.pass && entry.pass;
    rep.per_radius.emplace_back(r, std::move(entry));
  }
  return rep;
}

}  // namespace mmdlab
