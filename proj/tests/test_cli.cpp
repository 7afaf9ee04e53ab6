#include "pairclust/graph_io.hpp"
#include "pairclust/ingest.hpp"
#include "pairclust/model.hpp"

#include <doctest.h>

#include <sys/wait.h>

#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

using namespace pairclust;
namespace fs = std::filesystem;

namespace {

struct Run
{
  int status;
  std::string out;
};

Run cli(const std::string& args)
{
  std::string cmd = std::string(PAIRCLUST_CLI) + " " + args + " 2>/dev/null";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe);
  std::string out;
  std::array<char, 4096> buf;
  std::size_t got;
  while ((got = std::fread(buf.data(), 1, buf.size(), pipe)) > 0)
    out.append(buf.data(), got);
  int raw = pclose(pipe);
  return { WIFEXITED(raw) ? WEXITSTATUS(raw) : -1, out };
}

std::string slurp(const fs::path& p)
{
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<std::vector<std::string>> csv_rows(const std::string& text)
{
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty())
      break;
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ','))
      cells.push_back(cell);
    if (!line.empty() && line.back() == ',')
      cells.emplace_back();
    rows.push_back(cells);
  }
  return rows;
}

struct TempDir
{
  fs::path path;
  TempDir()
  {
    path = fs::temp_directory_path() / ("pairclust_cli_" + std::to_string(::getpid()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& name) const { return (path / name).string(); }
};

} // namespace

TEST_CASE("generate")
{
  TempDir dir;
  auto a = dir / "a.graph", b = dir / "b.graph";
  CHECK(cli("generate --n 1000 --alpha 3 --epsilon 0.1 --seed 7 --out " + a).status == 0);
  CHECK(cli("generate --n 1000 --alpha 3 --epsilon 0.1 --seed 7 --out " + b).status == 0);
  CHECK(slurp(a) == slurp(b));
  CHECK(slurp(a + ".labels") == slurp(b + ".labels"));

  auto file = load_graph(a);
  auto inst = sample_instance(ModelParams::censored(2, 3.0, 0.1), 1000, 7);
  REQUIRE(file.graph.num_edges() == inst.graph.num_edges());
  for (EdgeId e = 0; e < file.graph.num_edges(); ++e) {
    CHECK(file.graph.edge(e).i == inst.graph.edge(e).i);
    CHECK(file.graph.edge(e).j == inst.graph.edge(e).j);
    CHECK(file.graph.edge(e).s == inst.graph.edge(e).s);
  }
  CHECK(load_labels(a + ".labels") == inst.truth);

  auto z = dir / "z.graph";
  CHECK(cli("generate --n 50 --alpha 0 --out " + z).status == 0);
  CHECK(load_graph(z).graph.num_edges() == 0);

  CHECK(cli("generate --n 50 --alpha 80 --out " + z).status != 0);
}

TEST_CASE("run")
{
  TempDir dir;
  auto z = dir / "z.graph";
  REQUIRE(cli("generate --n 400 --alpha 0 --seed 1 --out " + z).status == 0);
  auto r = cli("run --graph " + z + " --labels " + z + ".labels --alpha 0 --methods bp");
  CHECK(r.status == 0);
  auto rows = csv_rows(r.out);
  REQUIRE(rows.size() == 2);
  CHECK(r.out.rfind("method,n,alpha,seed,overlap,converged_or_r,wallclock_ms\n", 0) == 0);
  CHECK(rows[1][0] == "bp");
  CHECK(std::abs(std::stod(rows[1][4])) < 0.15);

  // below threshold the spectral method reports instead of failing
  r = cli("run --n 4000 --alpha 0.8 --seed 3 --methods nb");
  CHECK(r.status == 0);
  rows = csv_rows(r.out);
  REQUIRE(rows.size() == 2);
  CHECK(rows[1][4] == "nan");
  CHECK(rows[1][5] == "no-informative-eigenvalue");

  int bh_ok = 0;
  for (int seed = 5; seed < 9; ++seed) {
    std::string args = "run --n 3000 --alpha 6 --epsilon 0.1 --seed " + std::to_string(seed) +
                       " --methods bp,nb,bh --no-timing";
    r = cli(args);
    CHECK(r.status == 0);
    rows = csv_rows(r.out);
    REQUIRE(rows.size() == 4);
    for (std::size_t i = 1; i < 4; ++i) {
      INFO(rows[i][0] << " " << rows[i][5]);
      CHECK(rows[i][6] == "0");
      if (rows[i][0] == "bh" && rows[i][5] == "no-informative-eigenvalue")
        continue;
      CHECK(std::stod(rows[i][4]) > 0.0);
      bh_ok += rows[i][0] == "bh";
    }
    if (seed == 5)
      CHECK(cli(args).out == r.out);
  }
  CHECK(bh_ok >= 3);

  auto bad = dir / "bad.graph";
  std::ofstream(bad) << "3 1 2\n0 7 1.0\n";
  CHECK(cli("run --graph " + bad + " --alpha 1 --methods bp").status != 0);
  CHECK(cli("run --n 100 --alpha 1 --methods sdp").status != 0);
}

TEST_CASE("sweep")
{
  auto r = cli("sweep --n 300 --alpha-grid 1,2 --alpha-relative --trials 3 --methods bp,nb --seed 2 --no-timing");
  CHECK(r.status == 0);
  auto rows = csv_rows(r.out);
  REQUIRE(rows.size() == 1 + 2 * 2 * 3 + 2 * 2);
  int raw = 0, mean = 0;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    raw += rows[i][0] == "raw";
    mean += rows[i][0] == "mean";
  }
  CHECK(raw == 12);
  CHECK(mean == 4);

  r = cli("sweep --n 300 --alpha-grid 3 --trials 2 --methods bp,nb,bh --no-timing");
  rows = csv_rows(r.out);
  int aggregates = 0;
  for (const auto& row : rows)
    aggregates += row[0] == "mean";
  CHECK(aggregates == 3);

  CHECK(cli("sweep --n 300 --alpha-grid 2,1 --trials 2 --methods bp").status != 0);
  CHECK(cli("sweep --n 300 --alpha-grid 1 --trials 0 --methods bp").status != 0);
}

TEST_CASE("spectrum")
{
  TempDir dir;
  auto z = dir / "z.graph";
  REQUIRE(cli("generate --n 30 --alpha 0 --out " + z).status == 0);
  auto r = cli("spectrum --graph " + z + " --alpha 0 --methods nb,bh");
  CHECK(r.status == 0);
  CHECK(r.out == "re,im,is_real,residual,converged\n\nvalue,residual,converged\n");

  auto out = dir / "s.csv";
  r = cli("spectrum --n 2000 --alpha 3.125 --epsilon 0.1 --seed 2 --methods nb,bh --out " + out);
  CHECK(r.status == 0);
  CHECK(r.out.find("alpha_over_alpha_c=2") != std::string::npos);
  auto nb = csv_rows(slurp(out));
  REQUIRE(nb.size() >= 2);
  CHECK(std::abs(std::stod(nb[1][0]) - 2.0) < 0.2);
  CHECK(csv_rows(slurp(out + ".bh.csv")).size() >= 2);
}

TEST_CASE("cluster-points")
{
  TempDir dir;
  auto blobs = make_blobs(2000, 2, 20.0, 1.0, 4);
  PointDataset full{ blobs.points, blobs.truth, {} };
  {
    std::ofstream f(dir / "pts.csv");
    write_points_csv(f, full);
  }
  std::string base = "cluster-points --points " + (dir / "pts.csv") + " --train-fraction 0.02 --alpha 10 --seed 3";
  auto r1 = cli(base + " --out " + (dir / "r1.txt"));
  auto r2 = cli(base + " --out " + (dir / "r2.txt"));
  CHECK(r1.status == 0);
  CHECK(r2.status == 0);
  CHECK(slurp(dir / "r1.txt.labels") == slurp(dir / "r2.txt.labels"));
  CHECK(slurp(dir / "r1.txt") == slurp(dir / "r2.txt"));
  auto report = slurp(dir / "r1.txt");
  auto at = report.find("accuracy=");
  REQUIRE(at != std::string::npos);
  CHECK(std::stod(report.substr(at + 9)) > 0.9);
  CHECK(load_labels(dir / "r1.txt.labels").size() == 2000);

  CHECK(cli("cluster-points --points " + (dir / "pts.csv") + " --no-label-column --truth " + (dir / "r1.txt.labels") +
            " --alpha 10")
          .status != 0);
}

TEST_CASE("config file with flag precedence")
{
  TempDir dir;
  auto cfg = dir / "exp.ini";
  std::ofstream(cfg) << "n = 300\nalpha = 4\nmethods = bp\nseed = 9\n";
  auto r = cli("run --config " + cfg + " --no-timing");
  CHECK(r.status == 0);
  auto rows = csv_rows(r.out);
  REQUIRE(rows.size() == 2);
  CHECK(rows[1][1] == "300");
  CHECK(rows[1][3] == "9");
  rows = csv_rows(cli("run --config " + cfg + " --n 500 --no-timing").out);
  REQUIRE(rows.size() == 2);
  CHECK(rows[1][1] == "500");
  CHECK(rows[1][2] == "4");
}
