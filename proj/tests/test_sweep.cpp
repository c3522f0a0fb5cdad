#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "oat/sweep.hpp"

using namespace oat;
using namespace oat::sweep;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Grid tiny_grid() {
  Grid g;
  g.mode = SweepMode::GAIN;
  g.scheme = Scheme::SCF;
  g.engine = Engine::MFT;
  g.N_values = {20, 50};
  g.eta_values = log_grid(0.05, 1.0, 3);
  g.controls.lambda_points = 12;  // keep the unit test quick
  g.controls.samples_per_stage = 160;
  g.controls.linearity_check = false;
  return g;
}

struct TmpDir {
  std::filesystem::path p;
  TmpDir() {
    p = std::filesystem::temp_directory_path() /
        ("oat_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::create_directories(p);
  }
  ~TmpDir() { std::filesystem::remove_all(p); }
  std::string file(const std::string& name) const { return (p / name).string(); }
  static inline int counter = 0;
};

}  // namespace

TEST_CASE("records round-trip through the CSV codec") {
  Record r;
  r.scheme = Scheme::ACF;
  r.engine = Engine::DICKE;
  r.N = 123;
  r.eta = 0.12345678901234567;
  r.lambda_opt = 3.0000000000000004;
  r.t_opt = 1e-17;
  r.G = -0.5;
  r.G_sub = std::numeric_limits<double>::quiet_NaN();
  r.sigma_diss_sq = 2.0 / 3.0;
  r.xi_R_sq = 1e300;
  r.gmet = 0.0;
  r.flags = "a;b";
  const std::string line = record_to_csv(r);
  const Record q = record_from_csv(line);
  CHECK(record_to_csv(q) == line);  // write -> read -> write is idempotent
  CHECK(q.N == r.N);
  CHECK(q.eta == r.eta);           // bit-exact through 17 significant digits
  CHECK(q.lambda_opt == r.lambda_opt);
  CHECK(std::isnan(q.G_sub));
  CHECK(q.flags == "a;b");
}

TEST_CASE("grid order, hash, and log grid") {
  Grid g = tiny_grid();
  CHECK(g.points() == 6);
  CHECK(g.point(0).first == 20);
  CHECK(g.point(2).second == doctest::Approx(1.0));
  CHECK(g.point(3).first == 50);

  const std::string h = g.hash();
  Grid g2 = tiny_grid();
  CHECK(g2.hash() == h);
  g2.eta_values[1] *= 1.0000001;
  CHECK(g2.hash() != h);

  const auto lg = log_grid(0.1, 10.0, 3);
  CHECK(lg[1] == doctest::Approx(1.0));
  CHECK_THROWS_AS(log_grid(-1.0, 1.0, 3), std::invalid_argument);
}

TEST_CASE("sweep output is deterministic across worker counts") {
  TmpDir dir;
  Grid g = tiny_grid();
  RunOptions one;
  one.workers = 1;
  run_to_csv(g, dir.file("w1.csv"), one);
  RunOptions four;
  four.workers = 4;
  run_to_csv(g, dir.file("w4.csv"), four);
  CHECK(slurp(dir.file("w1.csv")) == slurp(dir.file("w4.csv")));
  const auto rows = read_csv(dir.file("w1.csv"));
  REQUIRE(rows.size() == 6);
  CHECK(rows[0].N == 20);
  CHECK(rows[5].N == 50);
  for (const auto& r : rows) CHECK(std::isfinite(r.G));
}

TEST_CASE("interrupted sweeps resume to a byte-identical file") {
  TmpDir dir;
  Grid g = tiny_grid();
  RunOptions full;
  full.workers = 2;
  run_to_csv(g, dir.file("full.csv"), full);

  RunOptions half;
  half.workers = 2;
  half.halt_after = 3;
  run_to_csv(g, dir.file("part.csv"), half);
  const auto partial = read_csv(dir.file("part.csv"));
  CHECK(partial.size() == 3);

  RunOptions resume;
  resume.workers = 2;
  resume.resume = true;
  run_to_csv(g, dir.file("part.csv"), resume);
  CHECK(slurp(dir.file("part.csv")) == slurp(dir.file("full.csv")));
}

TEST_CASE("resume truncates a partial trailing row") {
  // simulate a kill mid-write: garbage after the last completed row
  TmpDir dir;
  Grid g = tiny_grid();
  RunOptions full;
  full.workers = 1;
  run_to_csv(g, dir.file("ref.csv"), full);

  RunOptions half;
  half.workers = 1;
  half.halt_after = 4;
  run_to_csv(g, dir.file("cut.csv"), half);
  {
    std::ofstream app(dir.file("cut.csv"), std::ios::app);
    app << "scf,mft,50,0.22360679";  // torn row, no newline
  }
  RunOptions resume;
  resume.workers = 1;
  resume.resume = true;
  run_to_csv(g, dir.file("cut.csv"), resume);
  CHECK(slurp(dir.file("cut.csv")) == slurp(dir.file("ref.csv")));
}

TEST_CASE("resume rejects a mismatched grid") {
  TmpDir dir;
  Grid g = tiny_grid();
  RunOptions half;
  half.halt_after = 2;
  half.workers = 1;
  run_to_csv(g, dir.file("x.csv"), half);
  Grid other = tiny_grid();
  other.eta_values.push_back(2.0);
  RunOptions resume;
  resume.resume = true;
  CHECK_THROWS_AS(run_to_csv(other, dir.file("x.csv"), resume), std::runtime_error);
}

TEST_CASE("worker count env override") {
  ::setenv("OAT_DISSIM_WORKERS", "3", 1);
  CHECK(worker_count_from_env(0) == 3);
  CHECK(worker_count_from_env(8) == 3);
  ::unsetenv("OAT_DISSIM_WORKERS");
  CHECK(worker_count_from_env(8) == 8);
}
