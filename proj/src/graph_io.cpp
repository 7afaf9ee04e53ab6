#include "pairclust/graph_io.hpp"

#include "pairclust/error.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace pairclust {

namespace {

std::string_view trim(std::string_view s)
{
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r'))
    s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

template<class Int>
Int parse_int(std::string_view text, const char* what)
{
  Int value{};
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size())
    throw Error(ErrorCode::parse_error,
                std::string("invalid ") + what + ": '" + std::string(text) + "'");
  return value;
}

std::vector<std::string_view> split_ws(std::string_view line)
{
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (pos < line.size()) {
    while (pos < line.size() && (line[pos] == ' ' || line[pos] == '\t'))
      ++pos;
    std::size_t start = pos;
    while (pos < line.size() && line[pos] != ' ' && line[pos] != '\t')
      ++pos;
    if (pos > start)
      out.push_back(line.substr(start, pos - start));
  }
  return out;
}

bool next_content_line(std::istream& in, std::string& line, std::size_t& lineno)
{
  while (std::getline(in, line)) {
    ++lineno;
    auto t = trim(line);
    if (!t.empty() && t.front() != '#') {
      line = std::string(t);
      return true;
    }
  }
  return false;
}

} // namespace

std::string format_double(double x)
{
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  if (ec != std::errc())
    throw Error(ErrorCode::io_error, "cannot format value");
  return std::string(buf, ptr);
}

double parse_double(std::string_view text)
{
  text = trim(text);
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size())
    throw Error(ErrorCode::parse_error, "invalid number: '" + std::string(text) + "'");
  return value;
}

void write_graph(std::ostream& out, const MeasurementGraph& graph, int k)
{
  out << graph.num_nodes() << ' ' << graph.num_edges() << ' ' << k << '\n';
  for (const auto& e : graph.edges())
    out << e.i << ' ' << e.j << ' ' << format_double(e.s) << '\n';
}

GraphFile read_graph(std::istream& in)
{
  std::string line;
  std::size_t lineno = 0;
  if (!next_content_line(in, line, lineno))
    throw Error(ErrorCode::parse_error, "graph file: missing header");
  auto head = split_ws(line);
  if (head.size() != 3)
    throw Error(ErrorCode::parse_error, "graph file: header must be 'n m k'");
  auto n = parse_int<std::size_t>(head[0], "node count");
  auto m = parse_int<std::size_t>(head[1], "edge count");
  int k = parse_int<int>(head[2], "cluster count");

  std::vector<Edge> edges;
  edges.reserve(m);
  for (std::size_t e = 0; e < m; ++e) {
    if (!next_content_line(in, line, lineno))
      throw Error(ErrorCode::parse_error,
                  "graph file: expected " + std::to_string(m) + " edges, found " +
                    std::to_string(e));
    auto tok = split_ws(line);
    if (tok.size() != 3)
      throw Error(ErrorCode::parse_error,
                  "graph file line " + std::to_string(lineno) + ": expected 'i j s'");
    edges.push_back({ parse_int<NodeId>(tok[0], "node id"),
                      parse_int<NodeId>(tok[1], "node id"),
                      parse_double(tok[2]) });
  }
  if (next_content_line(in, line, lineno))
    throw Error(ErrorCode::parse_error, "graph file: trailing content after edges");

  try {
    return { MeasurementGraph(n, std::move(edges)), k };
  } catch (const Error& err) {
    throw Error(ErrorCode::parse_error, std::string("graph file: ") + err.what());
  }
}

void write_labels(std::ostream& out, const Labels& labels)
{
  for (int c : labels)
    out << (c + 1) << '\n';
}

Labels read_labels(std::istream& in)
{
  Labels labels;
  std::string line;
  std::size_t lineno = 0;
  while (next_content_line(in, line, lineno)) {
    int c = parse_int<int>(line, "label");
    if (c < 1)
      throw Error(ErrorCode::parse_error,
                  "label file line " + std::to_string(lineno) + ": labels start at 1");
    labels.push_back(c - 1);
  }
  return labels;
}

void save_graph(const std::filesystem::path& path, const MeasurementGraph& graph, int k)
{
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw Error(ErrorCode::io_error, "cannot open " + path.string() + " for writing");
  write_graph(out, graph, k);
  if (!out)
    throw Error(ErrorCode::io_error, "write failed: " + path.string());
}

GraphFile load_graph(const std::filesystem::path& path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw Error(ErrorCode::io_error, "cannot open " + path.string());
  return read_graph(in);
}

void save_labels(const std::filesystem::path& path, const Labels& labels)
{
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw Error(ErrorCode::io_error, "cannot open " + path.string() + " for writing");
  write_labels(out, labels);
  if (!out)
    throw Error(ErrorCode::io_error, "write failed: " + path.string());
}

Labels load_labels(const std::filesystem::path& path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw Error(ErrorCode::io_error, "cannot open " + path.string());
  return read_labels(in);
}

} // namespace pairclust
