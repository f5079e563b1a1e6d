#pragma once

#include <iosfwd>
#include <string>

#include "mmdlab/space.hpp"

namespace mmdlab {

// Text graph format, one record per line:
//   # mmg v1 metric=<graph|euclid>
//   v <id> <m> [<x> <y> ...]
//   e <u> <v> <c> [<length>]
// Ids are dense from 0; duplicate edges and nonpositive weights are rejected.

std::string write_mmg(const MetricMeasureGraph& g);
void write_mmg_file(const MetricMeasureGraph& g, const std::string& path);

MetricMeasureGraph read_mmg(std::istream& in, const std::string& origin = "<stream>");
MetricMeasureGraph read_mmg_file(const std::string& path);

// FNV-1a over the canonical serialization; used as the cache key.
std::uint64_t content_hash(const MetricMeasureGraph& g);

std::string format_double(double x);  // 17 significant digits

}  // namespace mmdlab
