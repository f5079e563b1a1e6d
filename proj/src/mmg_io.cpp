#include "mmdlab/mmg_io.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <istream>
#include <set>
#include <sstream>
#include <vector>

#include "mmdlab/errors.hpp"

namespace mmdlab {

std::string format_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string write_mmg(const MetricMeasureGraph& g) {
  std::string out;
  out += "# mmg v1 metric=";
  out += g.metric_mode() == MetricMode::Embedded ? "euclid" : "graph";
  out += '\n';
  const int dim = g.coordinate_dim();
  for (VertexId v = 0; v < g.vertex_count(); ++v) {
    out += "v ";
    out += std::to_string(v);
    out += ' ';
    out += format_double(g.vertex_measure(v));
    if (dim > 0) {
      for (double c : g.coordinates(v)) {
        out += ' ';
        out += format_double(c);
      }
    }
    out += '\n';
  }
  const bool lengths = g.has_explicit_lengths();
  for (const auto& e : g.edges()) {
    out += "e ";
    out += std::to_string(e.u);
    out += ' ';
    out += std::to_string(e.v);
    out += ' ';
    out += format_double(e.conductance);
    if (lengths) {
      out += ' ';
      out += format_double(e.length);
    }
    out += '\n';
  }
  return out;
}

void write_mmg_file(const MetricMeasureGraph& g, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot open for writing: " + path);
  f << write_mmg(g);
  if (!f) throw ConfigError("write failed: " + path);
}

MetricMeasureGraph read_mmg(std::istream& in, const std::string& origin) {
  auto fail = [&](int line, const std::string& what) -> void {
    throw ConfigError(origin + ":" + std::to_string(line) + ": " + what);
  };

  std::string line;
  int lineno = 0;
  if (!std::getline(in, line)) fail(1, "empty file");
  ++lineno;
  if (!line.empty() && line.back() == '\r') line.pop_back();

  MetricMode mode;
  if (line == "# mmg v1 metric=graph")
    mode = MetricMode::Graph;
  else if (line == "# mmg v1 metric=euclid")
    mode = MetricMode::Embedded;
  else
    fail(lineno, "expected header '# mmg v1 metric=<graph|euclid>'");

  struct VRec {
    double m;
    std::vector<double> coords;
  };
  std::vector<std::pair<long long, VRec>> vrecs;
  std::vector<EdgeSpec> edges;
  std::set<std::pair<VertexId, VertexId>> seen_edges;
  int coord_dim = -1;

  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    std::string tag;
    ss >> tag;
    if (tag == "v") {
      long long id;
      VRec rec;
      if (!(ss >> id >> rec.m)) fail(lineno, "malformed vertex line");
      double c;
      while (ss >> c) rec.coords.push_back(c);
      if (coord_dim < 0)
        coord_dim = static_cast<int>(rec.coords.size());
      else if (coord_dim != static_cast<int>(rec.coords.size()))
        fail(lineno, "inconsistent coordinate count");
      if (!(rec.m > 0)) fail(lineno, "vertex measure must be positive");
      vrecs.emplace_back(id, std::move(rec));
    } else if (tag == "e") {
      long long u, v;
      double c;
      if (!(ss >> u >> v >> c)) fail(lineno, "malformed edge line");
      double len = 1.0;
      if (ss >> len) {
        if (!(len > 0)) fail(lineno, "edge length must be positive");
      }
      if (!(c > 0)) fail(lineno, "conductance must be positive");
      if (u == v) fail(lineno, "self loop");
      EdgeSpec e;
      e.u = static_cast<VertexId>(u);
      e.v = static_cast<VertexId>(v);
      e.conductance = c;
      e.length = len;
      auto key = std::minmax(e.u, e.v);
      if (!seen_edges.insert({key.first, key.second}).second)
        fail(lineno, "duplicate edge " + std::to_string(u) + "-" + std::to_string(v));
      edges.push_back(e);
    } else {
      fail(lineno, "unknown record '" + tag + "'");
    }
  }

  const auto n = static_cast<long long>(vrecs.size());
  if (n == 0) throw ConfigError(origin + ": no vertices");
  std::vector<double> measure(n, -1.0);
  std::vector<double> coords;
  if (coord_dim > 0) coords.assign(static_cast<std::size_t>(n) * coord_dim, 0.0);
  for (auto& [id, rec] : vrecs) {
    if (id < 0 || id >= n) throw ConfigError(origin + ": vertex ids must be dense from 0");
    if (measure[id] >= 0) throw ConfigError(origin + ": duplicate vertex id " + std::to_string(id));
    measure[id] = rec.m;
    for (int k = 0; k < coord_dim; ++k)
      coords[static_cast<std::size_t>(id) * coord_dim + k] = rec.coords[k];
  }
  for (const auto& e : edges)
    if (e.u >= n || e.v >= n) throw ConfigError(origin + ": edge endpoint out of range");
  if (mode == MetricMode::Embedded && coord_dim < 1)
    throw ConfigError(origin + ": euclid metric requires vertex coordinates");

  try {
    return MetricMeasureGraph(std::move(measure), std::move(edges), mode,
                              std::move(coords), coord_dim > 0 ? coord_dim : 0);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(origin + ": " + e.what());
  }
}

MetricMeasureGraph read_mmg_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot open: " + path);
  return read_mmg(f, path);
}

std::uint64_t content_hash(const MetricMeasureGraph& g) {
  const std::string s = write_mmg(g);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace mmdlab
