#include "mmdlab/harmonic.hpp"

#include <algorithm>
#include <atomic>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>

#include "mmdlab/errors.hpp"
#include "mmdlab/mmg_io.hpp"
#include "mmdlab/parallel.hpp"

namespace mmdlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<VertexId> sorted_unique(std::span<const VertexId> ids,
                                    const MetricMeasureGraph& g) {
  std::vector<VertexId> out(ids.begin(), ids.end());
  for (VertexId v : out) g.check(v);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

struct DirichletSystem {
  std::vector<VertexId> domain;    // ascending
  std::vector<VertexId> boundary;  // ascending
  std::vector<Eigen::Index> domain_index;  // full-length, -1 outside
  std::vector<Eigen::Index> boundary_index;
  Eigen::SparseMatrix<double> lap;
};

DirichletSystem build_dirichlet(const MetricMeasureGraph& g,
                                std::span<const VertexId> domain_in) {
  DirichletSystem sys;
  sys.domain = sorted_unique(domain_in, g);
  if (sys.domain.empty()) throw std::invalid_argument("harmonic: empty domain");
  if (static_cast<int>(sys.domain.size()) == g.vertex_count())
    throw std::invalid_argument("harmonic: domain must be a proper subset");

  sys.domain_index.assign(g.vertex_count(), -1);
  for (std::size_t i = 0; i < sys.domain.size(); ++i)
    sys.domain_index[sys.domain[i]] = static_cast<Eigen::Index>(i);

  std::vector<char> is_boundary(g.vertex_count(), 0);
  for (VertexId v : sys.domain)
    for (const auto& arc : g.arcs(v))
      if (sys.domain_index[arc.to] < 0) is_boundary[arc.to] = 1;
  for (VertexId v = 0; v < g.vertex_count(); ++v)
    if (is_boundary[v]) sys.boundary.push_back(v);

  sys.boundary_index.assign(g.vertex_count(), -1);
  for (std::size_t i = 0; i < sys.boundary.size(); ++i)
    sys.boundary_index[sys.boundary[i]] = static_cast<Eigen::Index>(i);

  // every component of the induced domain subgraph must see the boundary
  {
    std::vector<char> seen(sys.domain.size(), 0);
    std::vector<VertexId> stack;
    for (std::size_t i = 0; i < sys.domain.size(); ++i) {
      bool touches = false;
      for (const auto& arc : g.arcs(sys.domain[i]))
        if (sys.domain_index[arc.to] < 0) touches = true;
      if (!touches) continue;
      if (seen[i]) continue;
      seen[i] = 1;
      stack.push_back(sys.domain[i]);
      while (!stack.empty()) {
        const VertexId u = stack.back();
        stack.pop_back();
        for (const auto& arc : g.arcs(u)) {
          const auto j = sys.domain_index[arc.to];
          if (j >= 0 && !seen[j]) {
            seen[j] = 1;
            stack.push_back(arc.to);
          }
        }
      }
    }
    for (std::size_t i = 0; i < sys.domain.size(); ++i)
      if (!seen[i])
        throw std::invalid_argument(
            "harmonic: domain component without boundary (vertex " +
            std::to_string(sys.domain[i]) + ")");
  }

  const auto m = static_cast<Eigen::Index>(sys.domain.size());
  std::vector<Eigen::Triplet<double>> trip;
  for (Eigen::Index i = 0; i < m; ++i) {
    const VertexId v = sys.domain[i];
    double diag = 0;
    for (const auto& arc : g.arcs(v)) {
      const double c = g.edges()[arc.edge].conductance;
      diag += c;
      const auto j = sys.domain_index[arc.to];
      if (j >= 0) trip.emplace_back(i, j, -c);
    }
    trip.emplace_back(i, i, diag);
  }
  sys.lap.resize(m, m);
  sys.lap.setFromTriplets(trip.begin(), trip.end());
  return sys;
}

Eigen::VectorXd boundary_rhs(const MetricMeasureGraph& g, const DirichletSystem& sys,
                             std::span<const double> boundary_values) {
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(sys.domain.size()));
  for (std::size_t i = 0; i < sys.domain.size(); ++i) {
    for (const auto& arc : g.arcs(sys.domain[i])) {
      const auto bj = sys.boundary_index[arc.to];
      if (bj >= 0)
        rhs[static_cast<Eigen::Index>(i)] +=
            g.edges()[arc.edge].conductance * boundary_values[bj];
    }
  }
  return rhs;
}

const char* cache_dir() { return std::getenv("MMDLAB_CACHE_DIR"); }

std::string cache_path(const MetricMeasureGraph& g, std::span<const VertexId> domain) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (VertexId v : domain) {
    for (int b = 0; b < 4; ++b) {
      h ^= static_cast<unsigned char>(v >> (8 * b));
      h *= 0x100000001b3ULL;
    }
  }
  char buf[64];
  std::snprintf(buf, sizeof buf, "/hmm_%016" PRIx64 "_%016" PRIx64 ".bin",
                content_hash(g), h);
  return std::string(cache_dir()) + buf;
}

bool load_cached(const std::string& path, Eigen::MatrixXd& k) {
  std::ifstream f(path, std::ios::binary);
  if (!f) return false;
  char magic[4];
  std::uint64_t rows = 0, cols = 0;
  f.read(magic, 4);
  f.read(reinterpret_cast<char*>(&rows), 8);
  f.read(reinterpret_cast<char*>(&cols), 8);
  if (!f || std::string(magic, 4) != "HMM1") return false;
  if (rows != static_cast<std::uint64_t>(k.rows()) ||
      cols != static_cast<std::uint64_t>(k.cols()))
    return false;
  std::vector<double> data(rows * cols);
  f.read(reinterpret_cast<char*>(data.data()),
         static_cast<std::streamsize>(data.size() * sizeof(double)));
  if (!f) return false;
  for (std::uint64_t i = 0; i < rows; ++i)
    for (std::uint64_t j = 0; j < cols; ++j)
      k(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = data[i * cols + j];
  return true;
}

void store_cached(const std::string& path, const Eigen::MatrixXd& k) {
  // unique temp then rename, so concurrent writers cannot corrupt the entry
  static std::atomic<std::uint64_t> counter{0};
  const std::string tmp = path + ".tmp" + std::to_string(counter.fetch_add(1));
  {
    std::ofstream f(tmp, std::ios::binary);
    if (!f) return;
    const std::uint64_t rows = static_cast<std::uint64_t>(k.rows());
    const std::uint64_t cols = static_cast<std::uint64_t>(k.cols());
    f.write("HMM1", 4);
    f.write(reinterpret_cast<const char*>(&rows), 8);
    f.write(reinterpret_cast<const char*>(&cols), 8);
    std::vector<double> data(rows * cols);
    for (std::uint64_t i = 0; i < rows; ++i)
      for (std::uint64_t j = 0; j < cols; ++j)
        data[i * cols + j] = k(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    f.write(reinterpret_cast<const char*>(data.data()),
            static_cast<std::streamsize>(data.size() * sizeof(double)));
    if (!f) return;
  }
  std::rename(tmp.c_str(), path.c_str());
}

}  // namespace

std::vector<VertexId> vertex_boundary(const MetricMeasureGraph& g,
                                      std::span<const VertexId> domain) {
  const auto sorted = sorted_unique(domain, g);
  std::vector<char> inside(g.vertex_count(), 0);
  for (VertexId v : sorted) inside[v] = 1;
  std::vector<char> is_boundary(g.vertex_count(), 0);
  for (VertexId v : sorted)
    for (const auto& arc : g.arcs(v))
      if (!inside[arc.to]) is_boundary[arc.to] = 1;
  std::vector<VertexId> out;
  for (VertexId v = 0; v < g.vertex_count(); ++v)
    if (is_boundary[v]) out.push_back(v);
  return out;
}

std::vector<double> harmonic_extension(const MetricMeasureGraph& g,
                                       std::span<const VertexId> domain,
                                       std::span<const double> boundary_values,
                                       const SolverOptions& opts) {
  const auto sys = build_dirichlet(g, domain);
  if (boundary_values.size() != sys.boundary.size())
    throw std::invalid_argument("harmonic: boundary data size mismatch (expected " +
                                std::to_string(sys.boundary.size()) + ")");
  for (double v : boundary_values)
    if (!std::isfinite(v))
      throw std::invalid_argument("harmonic: non-finite boundary value");

  SpdSolver solver(sys.lap, g.vertex_count(), opts);
  const Eigen::VectorXd rhs = boundary_rhs(g, sys, boundary_values);
  const Eigen::VectorXd x = solver.solve(rhs);

  std::vector<double> h(g.vertex_count(), 0.0);
  for (std::size_t i = 0; i < sys.boundary.size(); ++i)
    h[sys.boundary[i]] = boundary_values[i];
  for (std::size_t i = 0; i < sys.domain.size(); ++i)
    h[sys.domain[i]] = x[static_cast<Eigen::Index>(i)];
  return h;
}

HarmonicMeasureMatrix harmonic_measure(const MetricMeasureGraph& g,
                                       std::span<const VertexId> domain,
                                       const SolverOptions& opts) {
  const auto sys = build_dirichlet(g, domain);
  HarmonicMeasureMatrix out;
  out.domain = sys.domain;
  out.boundary = sys.boundary;
  const auto rows = static_cast<Eigen::Index>(sys.domain.size());
  const auto cols = static_cast<Eigen::Index>(sys.boundary.size());
  out.k.resize(rows, cols);

  std::string path;
  if (cache_dir() != nullptr) {
    path = cache_path(g, sys.domain);
    if (load_cached(path, out.k)) return out;
  }

  SpdSolver solver(sys.lap, g.vertex_count(), opts);
  // column z: harmonic extension of the indicator of boundary vertex z
  parallel_for(cols, [&](std::int64_t j) {
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(rows);
    const VertexId z = sys.boundary[static_cast<std::size_t>(j)];
    for (const auto& arc : g.arcs(z)) {
      const auto i = sys.domain_index[arc.to];
      if (i >= 0) rhs[i] += g.edges()[arc.edge].conductance;
    }
    Eigen::VectorXd col = solver.solve(rhs);
    for (Eigen::Index i = 0; i < rows; ++i)
      out.k(i, j) = std::clamp(col[i], 0.0, 1.0);
  });

  if (!path.empty()) store_cached(path, out.k);
  return out;
}

HarnackReport harnack_constant(const MetricMeasureGraph& g, VertexId x, double r,
                               double delta, const SolverOptions& opts) {
  if (!(delta > 0 && delta < 1))
    throw std::invalid_argument("harnack: delta must lie in (0,1)");
  const auto domain = ball(g, x, r);
  const auto hm = harmonic_measure(g, domain, opts);

  HarnackReport rep;
  rep.x = x;
  rep.r = r;
  rep.delta = delta;

  // evaluation set: the closed ball of radius delta r inside the domain
  const auto dist = g.distances_from(x, delta * r);
  std::vector<Eigen::Index> eval;
  for (std::size_t i = 0; i < hm.domain.size(); ++i)
    if (dist[hm.domain[i]] <= delta * r) eval.push_back(static_cast<Eigen::Index>(i));
  if (eval.empty()) throw std::invalid_argument("harnack: empty evaluation set");

  double best = 1;
  for (Eigen::Index j = 0; j < hm.k.cols(); ++j) {
    Eigen::Index arg_hi = eval.front(), arg_lo = eval.front();
    double hi = -kInf, lo = kInf;
    for (Eigen::Index i : eval) {
      const double v = hm.k(i, j);
      if (v > hi) {
        hi = v;
        arg_hi = i;
      }
      if (v < lo) {
        lo = v;
        arg_lo = i;
      }
    }
    if (lo <= 0 && hi > 0) {
      rep.finite = false;
      rep.constant = kInf;
      rep.attain_high = hm.domain[arg_hi];
      rep.attain_low = hm.domain[arg_lo];
      rep.attain_boundary = hm.boundary[j];
      return rep;
    }
    if (hi <= 0) continue;  // column vanishes on the whole core
    const double ratio = hi / lo;
    if (ratio > best) {
      best = ratio;
      rep.attain_high = hm.domain[arg_hi];
      rep.attain_low = hm.domain[arg_lo];
      rep.attain_boundary = hm.boundary[j];
    }
  }
  rep.constant = best;
  return rep;
}

EhiSweepReport ehi_sweep(const MetricMeasureGraph& g,
                         std::span<const VertexId> centers,
                         std::span<const double> radii, double delta, double cap,
                         const SolverOptions& opts) {
  EhiSweepReport rep;
  rep.cap = cap;
  struct Tuple {
    VertexId x;
    double r;
  };
  std::vector<Tuple> tuples;
  for (VertexId x : centers)
    for (double r : radii) tuples.push_back({x, r});
  std::vector<EhiEntry> entries(tuples.size());
  parallel_for(static_cast<std::int64_t>(tuples.size()), [&](std::int64_t i) {
    EhiEntry e;
    e.x = tuples[i].x;
    e.r = tuples[i].r;
    try {
      e.report = harnack_constant(g, e.x, e.r, delta, opts);
    } catch (const std::exception& ex) {
      e.error = ex.what();
    }
    entries[i] = std::move(e);
  });
  rep.entries = std::move(entries);

  bool any_error = false;
  for (const auto& e : rep.entries) {
    if (!e.report) {
      any_error = true;
      continue;
    }
    if (!e.report->finite) rep.all_finite = false;
    rep.max_constant = std::max(rep.max_constant, e.report->constant);
  }
  rep.pass = !any_error && rep.all_finite && rep.max_constant <= cap;
  return rep;
}

RemoteEhiReport remote_ehi_sweep(const MetricMeasureGraph& g, VertexId origin,
                                 double remoteness,
                                 std::span<const VertexId> centers,
                                 std::span<const double> radii, double delta,
                                 double cap, const SolverOptions& opts) {
  if (!(remoteness > 0 && remoteness <= 1))
    throw std::invalid_argument("remote sweep: remoteness must lie in (0,1]");
  g.check(origin);
  RemoteEhiReport rep;
  rep.all = ehi_sweep(g, centers, radii, delta, cap, opts);
  const auto dist = g.distances_from(origin);
  bool remote_ok = true;
  for (auto& e : rep.all.entries) {
    e.remote = e.r >= 0.5 * remoteness * dist[e.x];
    if (!e.report) continue;
    if (e.remote) {
      ++rep.remote_count;
      rep.remote_max = std::max(rep.remote_max, e.report->constant);
      remote_ok = remote_ok && e.report->finite && e.report->constant <= cap;
    } else {
      ++rep.non_remote_count;
      rep.non_remote_max = std::max(rep.non_remote_max, e.report->constant);
    }
  }
  rep.remote_pass = remote_ok;
  return rep;
}

StabilityReport ehi_stability_experiment(const MetricMeasureGraph& g,
                                         const WeightSpec& weight,
                                         std::span<const VertexId> centers,
                                         std::span<const double> radii,
                                         double delta, double cap,
                                         bool counterexample,
                                         const SolverOptions& opts) {
  StabilityReport rep;
  rep.counterexample_asserted = counterexample;
  rep.base = ehi_sweep(g, centers, radii, delta, cap, opts);
  const auto weighted_space = apply_weight(g, weight);
  rep.weighted = ehi_sweep(weighted_space, centers, radii, delta, cap, opts);

  std::vector<double> sorted_radii(radii.begin(), radii.end());
  std::sort(sorted_radii.begin(), sorted_radii.end());
  for (double r : sorted_radii) {
    double best = 0;
    for (const auto& e : rep.weighted.entries)
      if (e.r == r && e.report) best = std::max(best, e.report->constant);
    rep.weighted_by_radius.emplace_back(r, best);
  }
  rep.growth_monotone = rep.weighted_by_radius.size() >= 2;
  for (std::size_t i = 1; i < rep.weighted_by_radius.size(); ++i)
    if (!(rep.weighted_by_radius[i].second > rep.weighted_by_radius[i - 1].second))
      rep.growth_monotone = false;
  rep.growth_doubles =
      rep.weighted_by_radius.size() >= 2 &&
      rep.weighted_by_radius.back().second > 2 * rep.weighted_by_radius.front().second;

  const bool base_bounded = rep.base.pass;
  const bool weighted_bounded = rep.weighted.pass;
  const bool weighted_growing = rep.growth_monotone && rep.growth_doubles;
  if (base_bounded && weighted_bounded && !weighted_growing)
    rep.verdict = "stable";
  else if (base_bounded && (!weighted_bounded || weighted_growing))
    rep.verdict = "destabilized";
  else
    rep.verdict = "other";
  return rep;
}

}  // namespace mmdlab
