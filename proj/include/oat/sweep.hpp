#ifndef OAT_SWEEP_HPP
#define OAT_SWEEP_HPP

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "oat/analysis.hpp"
#include "oat/protocol.hpp"
#include "oat/rates.hpp"

namespace oat {
namespace sweep {

enum class SweepMode { GAIN, GAIN_TU, GMET, SQUEEZE };

std::string sweep_mode_name(SweepMode m);
SweepMode sweep_mode_from_string(const std::string& s);

// One optimized grid point; the unit of CSV output.
struct Record {
  Scheme scheme = Scheme::SCF;
  Engine engine = Engine::MFT;
  long N = 0;
  double eta = 0.0;
  double lambda_opt = std::numeric_limits<double>::quiet_NaN();
  double t_opt = std::numeric_limits<double>::quiet_NaN();
  double G = std::numeric_limits<double>::quiet_NaN();
  double G_sub = std::numeric_limits<double>::quiet_NaN();
  double sigma_diss_sq = std::numeric_limits<double>::quiet_NaN();
  double xi_R_sq = std::numeric_limits<double>::quiet_NaN();
  double gmet = std::numeric_limits<double>::quiet_NaN();
  std::string flags;  // semicolon-separated
};

inline constexpr const char* kCsvHeader =
    "scheme,engine,N,eta,lambda_opt,t_opt,G,G_sub,sigma_diss_sq,xi_R_sq,gmet,flags";

std::string record_to_csv(const Record& r);  // 17 significant digits
Record record_from_csv(const std::string& line);

struct Grid {
  SweepMode mode = SweepMode::GAIN;
  Scheme scheme = Scheme::SCF;
  Engine engine = Engine::MFT;
  std::vector<long> N_values;
  std::vector<double> eta_values;  // ascending
  double xi_det_sq = 1.0;
  analysis::OptControls controls;

  std::size_t points() const { return N_values.size() * eta_values.size(); }
  // deterministic point order: outer loop N, inner loop eta
  std::pair<long, double> point(std::size_t idx) const;
  // stable content hash of the full grid definition (FNV-1a over the
  // canonical text form)
  std::string hash() const;
  std::string canonical_text() const;
};

std::vector<double> log_grid(double lo, double hi, int n);

Record evaluate_point(const Grid& grid, std::size_t idx);

struct RunOptions {
  int workers = 0;  // 0 = hardware concurrency (OAT_DISSIM_WORKERS overrides)
  bool resume = false;
  std::optional<std::size_t> halt_after;  // stop early after k points (testing interrupts)
  std::function<void(std::size_t done, std::size_t total)> progress;
};

// Execute the sweep into csv_path, maintaining a JSON manifest next to it
// (csv_path + ".manifest.json").  Points are computed by a worker pool but
// written strictly in grid order, so outputs are byte-identical for any
// worker count.  Resume verifies the grid hash, truncates any partial
// trailing row, and never recomputes completed points.
void run_to_csv(const Grid& grid, const std::string& csv_path, const RunOptions& opt = {});

std::vector<Record> read_csv(const std::string& csv_path);

int worker_count_from_env(int requested);

}  // namespace sweep
}  // namespace oat

#endif
