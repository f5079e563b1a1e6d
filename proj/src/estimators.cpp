#include "mmdlab/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mmdlab/errors.hpp"
#include "mmdlab/parallel.hpp"

namespace mmdlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Ball volumes for one center at many radii: sorted distances with prefix
// measure sums; volume(r) sums m over d < r.
class BallVolumeTable {
 public:
  BallVolumeTable(const MetricMeasureGraph& g, VertexId x, double bound = kInf) {
    const auto dist = g.distances_from(x, bound);
    std::vector<std::pair<double, double>> dm;
    dm.reserve(dist.size());
    for (VertexId v = 0; v < g.vertex_count(); ++v)
      if (std::isfinite(dist[v])) dm.emplace_back(dist[v], g.vertex_measure(v));
    std::sort(dm.begin(), dm.end());
    dist_.reserve(dm.size());
    prefix_.reserve(dm.size() + 1);
    prefix_.push_back(0);
    for (const auto& [d, m] : dm) {
      dist_.push_back(d);
      prefix_.push_back(prefix_.back() + m);
    }
  }

  double volume(double r) const {
    const auto it = std::lower_bound(dist_.begin(), dist_.end(), r);
    return prefix_[static_cast<std::size_t>(it - dist_.begin())];
  }

 private:
  std::vector<double> dist_;
  std::vector<double> prefix_;
};

std::pair<double, double> range_of(std::span<const double> radii) {
  double lo = kInf, hi = -kInf;
  for (double r : radii) {
    lo = std::min(lo, r);
    hi = std::max(hi, r);
  }
  return {lo, hi};
}

void finalize_max_report(ConditionReport& rep) {
  rep.constant = -kInf;
  for (const auto& s : rep.samples) rep.constant = std::max(rep.constant, s.value);
  for (const auto& s : rep.samples) {
    if (s.value == rep.constant) {
      Witness w;
      w.x = s.x;
      w.r = s.r;
      w.big_r = s.big_r;
      rep.witnesses.push_back(w);
    }
  }
  rep.pass = rep.constant <= rep.cap;
}

}  // namespace

CapacityResult capacity(const MetricMeasureGraph& g, std::span<const VertexId> a,
                        std::span<const VertexId> b, const SolverOptions& opts) {
  if (a.empty() || b.empty())
    throw std::invalid_argument("capacity: A and B must be nonempty");
  const int n = g.vertex_count();
  std::vector<std::int8_t> role(n, 0);  // 1 = A, 2 = B
  for (VertexId v : a) role[g.check(v)] = 1;
  for (VertexId v : b) {
    if (role[g.check(v)] == 1)
      throw std::invalid_argument("capacity: A and B intersect at vertex " + std::to_string(v));
    role[v] = 2;
  }

  CapacityResult res;
  res.potential.assign(n, 0.0);
  for (VertexId v = 0; v < n; ++v)
    if (role[v] == 1) res.potential[v] = 1.0;

  // interior vertices reachable from A or B through the interior get solved;
  // interior components touching neither stay at potential 0
  std::vector<VertexId> interior;
  for (VertexId v = 0; v < n; ++v)
    if (role[v] == 0) interior.push_back(v);

  std::vector<char> active(n, 0);
  {
    std::vector<VertexId> stack;
    for (VertexId v : interior) {
      for (const auto& arc : g.arcs(v)) {
        if (role[arc.to] != 0) {
          if (!active[v]) {
            active[v] = 1;
            stack.push_back(v);
          }
          break;
        }
      }
    }
    while (!stack.empty()) {
      const VertexId u = stack.back();
      stack.pop_back();
      for (const auto& arc : g.arcs(u)) {
        if (role[arc.to] == 0 && !active[arc.to]) {
          active[arc.to] = 1;
          stack.push_back(arc.to);
        }
      }
    }
  }

  std::vector<VertexId> unknown;
  std::vector<Eigen::Index> index(n, -1);
  for (VertexId v : interior) {
    if (active[v]) {
      index[v] = static_cast<Eigen::Index>(unknown.size());
      unknown.push_back(v);
    }
  }

  if (!unknown.empty()) {
    const auto m = static_cast<Eigen::Index>(unknown.size());
    std::vector<Eigen::Triplet<double>> trip;
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m);
    for (Eigen::Index i = 0; i < m; ++i) {
      const VertexId v = unknown[i];
      double diag = 0;
      for (const auto& arc : g.arcs(v)) {
        const double c = g.edges()[arc.edge].conductance;
        diag += c;
        if (index[arc.to] >= 0)
          trip.emplace_back(i, index[arc.to], -c);
        else if (role[arc.to] == 1)
          rhs[i] += c;
      }
      trip.emplace_back(i, i, diag);
    }
    Eigen::SparseMatrix<double> lap(m, m);
    lap.setFromTriplets(trip.begin(), trip.end());
    SpdSolver solver(std::move(lap), g.vertex_count(), opts);
    SolveStats stats;
    const Eigen::VectorXd x = solver.solve(rhs, &stats);
    res.method = stats;
    res.residual = stats.residual;
    for (Eigen::Index i = 0; i < m; ++i)
      res.potential[unknown[i]] = std::clamp(x[i], 0.0, 1.0);
  } else {
    res.method.method = "direct";
  }

  res.value = graph_energy(g, res.potential);
  return res;
}

ConditionReport vd_constant(const MetricMeasureGraph& g,
                            std::span<const VertexId> centers,
                            std::span<const double> radii, double cap) {
  for (VertexId x : centers) g.check(x);
  for (double r : radii)
    if (!(r > 0)) throw std::invalid_argument("vd: radii must be positive");
  ConditionReport rep;
  rep.condition = "VD";
  rep.cap = cap;
  rep.scale_range = range_of(radii);

  const double r_max = 2 * rep.scale_range.second;
  const auto nc = static_cast<std::int64_t>(centers.size());
  std::vector<std::vector<double>> per_center(nc);
  parallel_for(nc, [&](std::int64_t i) {
    BallVolumeTable table(g, centers[i], r_max);
    std::vector<double> vals;
    vals.reserve(radii.size());
    for (double r : radii) vals.push_back(table.volume(2 * r) / table.volume(r));
    per_center[i] = std::move(vals);
  });
  for (std::int64_t i = 0; i < nc; ++i)
    for (std::size_t j = 0; j < radii.size(); ++j)
      rep.samples.push_back({centers[i], radii[j], std::nullopt, per_center[i][j]});
  finalize_max_report(rep);
  return rep;
}

namespace {

// Connected components of the subgraph induced on `keep` (edges with both
// endpoints inside). Returns labels aligned with `keep`.
std::vector<int> induced_components(const MetricMeasureGraph& g,
                                    std::span<const VertexId> keep) {
  std::vector<Eigen::Index> index(g.vertex_count(), -1);
  for (std::size_t i = 0; i < keep.size(); ++i) index[keep[i]] = static_cast<Eigen::Index>(i);
  std::vector<int> label(keep.size(), -1);
  int comp = 0;
  std::vector<VertexId> stack;
  for (std::size_t s = 0; s < keep.size(); ++s) {
    if (label[s] >= 0) continue;
    label[s] = comp;
    stack.push_back(keep[s]);
    while (!stack.empty()) {
      const VertexId u = stack.back();
      stack.pop_back();
      for (const auto& arc : g.arcs(u)) {
        const auto j = index[arc.to];
        if (j >= 0 && label[j] < 0) {
          label[j] = comp;
          stack.push_back(arc.to);
        }
      }
    }
    ++comp;
  }
  return label;
}

}  // namespace

PoincareResult poincare_constant(const MetricMeasureGraph& g, VertexId x, double r,
                                 double a_enlargement, const ScalingFunction& psi,
                                 const SolverOptions& opts) {
  if (a_enlargement < 1) throw std::invalid_argument("poincare: enlargement must be >= 1");
  const auto ball_r = ball(g, x, r);
  if (ball_r.size() < 2)
    throw std::invalid_argument("poincare: ball(x,r) needs at least 2 vertices");
  const auto ball_a = a_enlargement == 1.0 ? ball_r : ball(g, x, a_enlargement * r);

  PoincareResult res;
  res.a_enlargement = a_enlargement;

  const auto label = induced_components(g, ball_a);
  std::vector<Eigen::Index> pos(g.vertex_count(), -1);
  for (std::size_t i = 0; i < ball_a.size(); ++i) pos[ball_a[i]] = static_cast<Eigen::Index>(i);

  int comp_of_ball_r = label[pos[ball_r.front()]];
  for (VertexId v : ball_r) {
    if (label[pos[v]] != comp_of_ball_r) {
      res.c_p = kInf;
      res.component_witness = {ball_r.front(), v};
      return res;
    }
  }

  // restrict to the component carrying B(x,r)
  std::vector<VertexId> k_set;
  for (std::size_t i = 0; i < ball_a.size(); ++i)
    if (label[i] == comp_of_ball_r) k_set.push_back(ball_a[i]);
  const auto nk = static_cast<Eigen::Index>(k_set.size());
  std::vector<Eigen::Index> kpos(g.vertex_count(), -1);
  for (Eigen::Index i = 0; i < nk; ++i) kpos[k_set[i]] = i;

  // energy form on K, one vertex grounded; right-hand sides have zero sum,
  // so the grounded solve inverts the Laplacian exactly on that subspace
  std::vector<Eigen::Triplet<double>> trip;
  for (Eigen::Index i = 1; i < nk; ++i) {
    const VertexId v = k_set[i];
    double diag = 0;
    for (const auto& arc : g.arcs(v)) {
      const auto j = kpos[arc.to];
      if (j < 0) continue;
      const double c = g.edges()[arc.edge].conductance;
      diag += c;
      if (j >= 1) trip.emplace_back(i - 1, j - 1, -c);
    }
    trip.emplace_back(i - 1, i - 1, diag);
  }
  Eigen::SparseMatrix<double> lap(nk - 1, nk - 1);
  lap.setFromTriplets(trip.begin(), trip.end());
  SpdSolver solver(std::move(lap), g.vertex_count(), opts);

  std::vector<char> in_ball_r(g.vertex_count(), 0);
  for (VertexId v : ball_r) in_ball_r[v] = 1;
  Eigen::VectorXd mass = Eigen::VectorXd::Zero(nk);  // measure on B(x,r) within K
  double mass_total = 0;
  for (Eigen::Index i = 0; i < nk; ++i) {
    if (in_ball_r[k_set[i]]) {
      mass[i] = g.vertex_measure(k_set[i]);
      mass_total += mass[i];
    }
  }

  auto variance_apply = [&](const Eigen::VectorXd& f) {
    double mean = 0;
    for (Eigen::Index i = 0; i < nk; ++i) mean += mass[i] * f[i];
    mean /= mass_total;
    Eigen::VectorXd y = Eigen::VectorXd::Zero(nk);
    for (Eigen::Index i = 0; i < nk; ++i)
      if (mass[i] > 0) y[i] = mass[i] * (f[i] - mean);
    return y;
  };
  auto variance_value = [&](const Eigen::VectorXd& f) {
    double mean = 0;
    for (Eigen::Index i = 0; i < nk; ++i) mean += mass[i] * f[i];
    mean /= mass_total;
    double s = 0;
    for (Eigen::Index i = 0; i < nk; ++i)
      if (mass[i] > 0) s += mass[i] * (f[i] - mean) * (f[i] - mean);
    return s;
  };
  auto energy_value = [&](const Eigen::VectorXd& f) {
    double e = 0;
    for (Eigen::Index i = 0; i < nk; ++i) {
      const VertexId v = k_set[i];
      for (const auto& arc : g.arcs(v)) {
        const auto j = kpos[arc.to];
        if (j < 0 || arc.to < v) continue;
        const double d = f[i] - f[j];
        e += g.edges()[arc.edge].conductance * d * d;
      }
    }
    return e;
  };

  // inverse iteration on the (energy, variance) pencil, constants deflated
  const auto dist = g.distances_from(x, a_enlargement * r);
  Eigen::VectorXd f(nk);
  for (Eigen::Index i = 0; i < nk; ++i) {
    std::uint64_t h = static_cast<std::uint64_t>(k_set[i]) * 0x9e3779b97f4a7c15ULL;
    h ^= h >> 29;
    f[i] = dist[k_set[i]] + 1e-6 * static_cast<double>(h % 1024) / 1024.0;
  }

  double mu_prev = -1;
  const std::int64_t max_iter = 100000;
  std::int64_t it = 0;
  double mu = 0;
  while (it < max_iter) {
    const Eigen::VectorXd y = variance_apply(f);
    if (y.norm() == 0) break;
    Eigen::VectorXd z = Eigen::VectorXd::Zero(nk);
    z.tail(nk - 1) = solver.solve(y.tail(nk - 1));
    // remove the constant component for stability
    double zmean = 0, msum = 0;
    for (Eigen::Index i = 0; i < nk; ++i) {
      zmean += g.vertex_measure(k_set[i]) * z[i];
      msum += g.vertex_measure(k_set[i]);
    }
    z.array() -= zmean / msum;
    const double nz = z.norm();
    if (nz == 0) break;
    f = z / nz;
    mu = variance_value(f) / energy_value(f);
    ++it;
    if (mu_prev > 0 && std::abs(mu - mu_prev) <= 1e-10 * std::max(mu, 1e-300)) break;
    mu_prev = mu;
  }

  res.c_p = mu / psi(r);
  res.iterations = it;
  res.extremal.assign(g.vertex_count(), 0.0);
  for (Eigen::Index i = 0; i < nk; ++i) res.extremal[k_set[i]] = f[i];
  return res;
}

ConditionReport poincare_sweep(const MetricMeasureGraph& g,
                               std::span<const VertexId> centers,
                               std::span<const double> radii,
                               std::span<const double> a_grid,
                               const ScalingFunction& psi, double cap,
                               const SolverOptions& opts) {
  if (a_grid.empty()) throw std::invalid_argument("poincare: empty enlargement grid");
  ConditionReport rep;
  rep.condition = "PI";
  rep.cap = cap;
  rep.scale_range = range_of(radii);

  struct Tuple {
    VertexId x;
    double r;
  };
  std::vector<Tuple> tuples;
  for (VertexId x : centers)
    for (double r : radii) tuples.push_back({x, r});
  std::vector<double> best_cp(tuples.size(), kInf);
  std::vector<double> best_a(tuples.size(), a_grid[0]);
  parallel_for(static_cast<std::int64_t>(tuples.size()), [&](std::int64_t i) {
    for (double a : a_grid) {
      const auto res = poincare_constant(g, tuples[i].x, tuples[i].r, a, psi, opts);
      if (res.c_p < best_cp[i]) {
        best_cp[i] = res.c_p;
        best_a[i] = a;
      }
    }
  });

  for (std::size_t i = 0; i < tuples.size(); ++i)
    rep.samples.push_back({tuples[i].x, tuples[i].r, std::nullopt, best_cp[i]});
  finalize_max_report(rep);
  for (std::size_t i = 0; i < tuples.size(); ++i) {
    if (best_cp[i] == rep.constant) {
      rep.a_enlargement = best_a[i];
      break;
    }
  }
  if (std::isinf(rep.constant)) rep.pass = false;
  return rep;
}

ConditionReport cap_upper_constant(const MetricMeasureGraph& g,
                                   const ScalingFunction& psi, double a1,
                                   std::span<const VertexId> centers,
                                   std::span<const double> radii, double cap,
                                   const SolverOptions& opts) {
  if (!(a1 > 1)) throw std::invalid_argument("cap estimate: A1 must exceed 1");
  ConditionReport rep;
  rep.condition = "CAP_UPPER";
  rep.cap = cap;
  rep.a1 = a1;
  rep.scale_range = range_of(radii);

  struct Tuple {
    VertexId x;
    double r;
  };
  std::vector<Tuple> tuples;
  for (VertexId x : centers)
    for (double r : radii) tuples.push_back({x, r});
  std::vector<double> vals(tuples.size(), -kInf);
  std::vector<char> skipped(tuples.size(), 0);
  parallel_for(static_cast<std::int64_t>(tuples.size()), [&](std::int64_t i) {
    const auto [x, r] = tuples[i];
    const auto inner = ball(g, x, r);
    const auto outer = ball(g, x, a1 * r);
    if (static_cast<int>(outer.size()) == g.vertex_count()) {
      skipped[i] = 1;
      return;
    }
    std::vector<char> in_outer(g.vertex_count(), 0);
    for (VertexId v : outer) in_outer[v] = 1;
    std::vector<VertexId> complement;
    for (VertexId v = 0; v < g.vertex_count(); ++v)
      if (!in_outer[v]) complement.push_back(v);
    const auto res = capacity(g, inner, complement, opts);
    vals[i] = res.value * psi(r) / measure_of(g, std::span<const VertexId>(inner));
  });

  for (std::size_t i = 0; i < tuples.size(); ++i) {
    if (skipped[i]) {
      rep.warnings.push_back("skipped x=" + std::to_string(tuples[i].x) + " r=" +
                             std::to_string(tuples[i].r) +
                             ": enlarged ball covers the space");
      continue;
    }
    rep.samples.push_back({tuples[i].x, tuples[i].r, std::nullopt, vals[i]});
  }
  if (rep.samples.empty()) {
    rep.constant = 0;
    rep.pass = false;
    rep.warnings.push_back("no admissible (x,r) sample");
    return rep;
  }
  finalize_max_report(rep);
  return rep;
}

ConditionReport fvg_check(const MetricMeasureGraph& g, const ScalingFunction& psi,
                          std::span<const VertexId> centers,
                          std::span<const std::pair<double, double>> scale_pairs,
                          double cap) {
  for (const auto& [r, R] : scale_pairs)
    if (!(r > 0) || !(R >= r))
      throw std::invalid_argument("fvg: scale pairs need 0 < r <= R");
  ConditionReport rep;
  rep.condition = "FVG";
  rep.cap = cap;
  double lo = kInf, hi = -kInf;
  for (const auto& [r, R] : scale_pairs) {
    lo = std::min(lo, r);
    hi = std::max(hi, R);
  }
  rep.scale_range = {lo, hi};

  const auto nc = static_cast<std::int64_t>(centers.size());
  std::vector<std::vector<double>> per_center(nc);
  parallel_for(nc, [&](std::int64_t i) {
    BallVolumeTable table(g, centers[i], hi);
    std::vector<double> vals;
    vals.reserve(scale_pairs.size());
    for (const auto& [r, R] : scale_pairs)
      vals.push_back((psi(R) / psi(r)) * (table.volume(r) / table.volume(R)));
    per_center[i] = std::move(vals);
  });
  for (std::int64_t i = 0; i < nc; ++i)
    for (std::size_t j = 0; j < scale_pairs.size(); ++j)
      rep.samples.push_back(
          {centers[i], scale_pairs[j].first, scale_pairs[j].second, per_center[i][j]});
  finalize_max_report(rep);
  return rep;
}

ConditionReport rvd_constant(const MetricMeasureGraph& g,
                             std::span<const VertexId> centers,
                             std::span<const std::pair<double, double>> scale_pairs,
                             double cap) {
  ConditionReport rep;
  rep.condition = "RVD";
  rep.cap = cap;
  double lo = kInf, hi = -kInf;
  for (const auto& [r, R] : scale_pairs) {
    if (!(r > 0) || !(R >= r))
      throw std::invalid_argument("rvd: scale pairs need 0 < r <= R");
    lo = std::min(lo, r);
    hi = std::max(hi, R);
  }
  rep.scale_range = {lo, hi};

  const auto nc = static_cast<std::int64_t>(centers.size());
  std::vector<std::vector<std::pair<double, double>>> ratios(nc);  // (R/r, volR/volr)
  parallel_for(nc, [&](std::int64_t i) {
    BallVolumeTable table(g, centers[i], hi);
    std::vector<std::pair<double, double>> out;
    for (const auto& [r, R] : scale_pairs)
      out.emplace_back(R / r, table.volume(R) / table.volume(r));
    ratios[i] = std::move(out);
  });

  double sxx = 0, sxy = 0;
  for (const auto& row : ratios) {
    for (const auto& [t, v] : row) {
      if (t <= 1) continue;
      const double lt = std::log(t), lv = std::log(v);
      sxx += lt * lt;
      sxy += lt * lv;
    }
  }
  const double alpha = sxx > 0 ? sxy / sxx : 0;
  rep.alpha = alpha;

  for (std::int64_t i = 0; i < nc; ++i) {
    for (std::size_t j = 0; j < scale_pairs.size(); ++j) {
      const auto [t, v] = ratios[i][j];
      rep.samples.push_back({centers[i], scale_pairs[j].first, scale_pairs[j].second,
                             std::pow(t, alpha) / v});
    }
  }
  finalize_max_report(rep);
  rep.constant = std::max(rep.constant, 1.0);
  rep.pass = rep.constant <= cap && alpha > 0;
  return rep;
}

ChainingReport capacity_chaining_check(const MetricMeasureGraph& g, VertexId x,
                                       double big_r, double a1, int k,
                                       const SolverOptions& opts) {
  if (!(a1 > 1)) throw std::invalid_argument("chaining: A1 must exceed 1");
  if (k < 1) throw std::invalid_argument("chaining: k must be >= 1");
  std::vector<std::vector<VertexId>> balls(k + 1);
  for (int i = 0; i <= k; ++i)
    balls[i] = ball(g, x, big_r * std::pow(a1, -i));
  for (int i = 0; i < k; ++i) {
    if (balls[i].size() == balls[i + 1].size())
      throw std::invalid_argument(
          "chaining: degenerate ring " + std::to_string(i) +
          " (inner and outer balls coincide at radius " +
          std::to_string(big_r * std::pow(a1, -i)) + ")");
  }
  std::vector<char> in_outer(g.vertex_count(), 0);
  for (VertexId v : balls[0]) in_outer[v] = 1;
  std::vector<VertexId> outer_complement;
  for (VertexId v = 0; v < g.vertex_count(); ++v)
    if (!in_outer[v]) outer_complement.push_back(v);

  ChainingReport rep;
  rep.ring_capacities.assign(k, 0.0);
  std::vector<double> jobs(k + 1, 0.0);
  parallel_for(k + 1, [&](std::int64_t i) {
    if (i == k) {
      jobs[k] = capacity(g, balls[k], outer_complement, opts).value;
      return;
    }
    std::vector<char> inside(g.vertex_count(), 0);
    for (VertexId v : balls[i]) inside[v] = 1;
    std::vector<VertexId> complement;
    for (VertexId v = 0; v < g.vertex_count(); ++v)
      if (!inside[v]) complement.push_back(v);
    jobs[i] = capacity(g, balls[i + 1], complement, opts).value;
  });
  rep.direct = jobs[k];
  double inv_sum = 0;
  for (int i = 0; i < k; ++i) {
    rep.ring_capacities[i] = jobs[i];
    inv_sum += 1.0 / jobs[i];
  }
  rep.series_bound = 1.0 / inv_sum;
  rep.slack = rep.series_bound - rep.direct;
  rep.holds = rep.direct <= rep.series_bound + 1e-9 * std::max(rep.direct, rep.series_bound);
  return rep;
}

}  // namespace mmdlab
