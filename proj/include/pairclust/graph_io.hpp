#pragma once

#include "pairclust/graph.hpp"
#include "pairclust/model.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>

namespace pairclust {

// Graph files: header "n m k", then m lines "i j s" (0-based ids). Values are
// written in shortest round-trip form so parsing restores identical bits.
// Label files: one 1-based label per line.

struct GraphFile
{
  MeasurementGraph graph;
  int k = 2;
};

//! Shortest decimal text that parses back to the same double.
std::string format_double(double x);
double parse_double(std::string_view text);

void write_graph(std::ostream& out, const MeasurementGraph& graph, int k);
GraphFile read_graph(std::istream& in);

void write_labels(std::ostream& out, const Labels& labels);
Labels read_labels(std::istream& in);

void save_graph(const std::filesystem::path& path, const MeasurementGraph& graph, int k);
GraphFile load_graph(const std::filesystem::path& path);
void save_labels(const std::filesystem::path& path, const Labels& labels);
Labels load_labels(const std::filesystem::path& path);

} // namespace pairclust
