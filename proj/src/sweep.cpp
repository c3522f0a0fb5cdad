#include "oat/sweep.hpp"

#include <atomic>
#include <cmath>
#include <condition_variable>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

namespace oat {
namespace sweep {

namespace {

using nlohmann::json;

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_double(const std::string& s) {
  if (s.empty()) return std::numeric_limits<double>::quiet_NaN();
  return std::strtod(s.c_str(), nullptr);
}

uint64_t fnv1a(const std::string& s) {
  uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string manifest_path(const std::string& csv_path) { return csv_path + ".manifest.json"; }

}  // namespace

std::string sweep_mode_name(SweepMode m) {
  switch (m) {
    case SweepMode::GAIN:
      return "gain";
    case SweepMode::GAIN_TU:
      return "gain-tu";
    case SweepMode::GMET:
      return "gmet";
    case SweepMode::SQUEEZE:
      return "squeeze";
  }
  return "?";
}

SweepMode sweep_mode_from_string(const std::string& s) {
  if (s == "gain") return SweepMode::GAIN;
  if (s == "gain-tu") return SweepMode::GAIN_TU;
  if (s == "gmet") return SweepMode::GMET;
  if (s == "squeeze") return SweepMode::SQUEEZE;
  throw std::invalid_argument("unknown sweep mode '" + s + "'");
}

std::string record_to_csv(const Record& r) {
  std::ostringstream os;
  os << scheme_name(r.scheme) << ',' << engine_name(r.engine) << ',' << r.N << ',' << fmt17(r.eta)
     << ',' << fmt17(r.lambda_opt) << ',' << fmt17(r.t_opt) << ',' << fmt17(r.G) << ','
     << fmt17(r.G_sub) << ',' << fmt17(r.sigma_diss_sq) << ',' << fmt17(r.xi_R_sq) << ','
     << fmt17(r.gmet) << ',' << r.flags;
  return os.str();
}

Record record_from_csv(const std::string& line) {
  std::vector<std::string> cells;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      cells.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  cells.push_back(cur);
  if (cells.size() != 12) throw std::invalid_argument("record_from_csv: expected 12 cells");
  Record r;
  r.scheme = scheme_from_string(cells[0]);
  r.engine = engine_from_string(cells[1]);
  r.N = std::stol(cells[2]);
  r.eta = parse_double(cells[3]);
  r.lambda_opt = parse_double(cells[4]);
  r.t_opt = parse_double(cells[5]);
  r.G = parse_double(cells[6]);
  r.G_sub = parse_double(cells[7]);
  r.sigma_diss_sq = parse_double(cells[8]);
  r.xi_R_sq = parse_double(cells[9]);
  r.gmet = parse_double(cells[10]);
  r.flags = cells[11];
  return r;
}

std::pair<long, double> Grid::point(std::size_t idx) const {
  const std::size_t ne = eta_values.size();
  return {N_values[idx / ne], eta_values[idx % ne]};
}

std::string Grid::canonical_text() const {
  std::ostringstream os;
  os << sweep_mode_name(mode) << '|' << scheme_name(scheme) << '|' << engine_name(engine) << "|N:";
  for (long n : N_values) os << n << ';';
  os << "|eta:";
  for (double e : eta_values) os << fmt17(e) << ';';
  os << "|xi:" << fmt17(xi_det_sq) << "|lam:" << fmt17(controls.lambda_lo) << ','
     << fmt17(controls.lambda_hi) << ',' << controls.lambda_points << ','
     << fmt17(controls.lambda_rel_tol) << "|t:" << controls.t_points << ','
     << fmt17(controls.t_window_factor) << "|s:" << controls.samples_per_stage
     << "|phi:" << fmt17(controls.phi) << "|rtol:" << fmt17(controls.rtol)
     << "|chi:" << fmt17(controls.chi) << "|lin:" << (controls.linearity_check ? 1 : 0);
  return os.str();
}

std::string Grid::hash() const {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a(canonical_text())));
  return buf;
}

std::vector<double> log_grid(double lo, double hi, int n) {
  if (!(lo > 0.0) || !(hi > lo) || n < 2) throw std::invalid_argument("log_grid: bad range");
  std::vector<double> v(n);
  const double llo = std::log(lo), lhi = std::log(hi);
  for (int i = 0; i < n; ++i) v[i] = std::exp(llo + (lhi - llo) * i / (n - 1.0));
  return v;
}

Record evaluate_point(const Grid& grid, std::size_t idx) {
  const auto [N, eta] = grid.point(idx);
  Record rec;
  rec.scheme = grid.scheme;
  rec.engine = grid.engine;
  rec.N = N;
  rec.eta = eta;

  analysis::OptResult opt;
  switch (grid.mode) {
    case SweepMode::GAIN:
      opt = analysis::maximize_gain(grid.scheme, grid.engine, N, eta, grid.controls);
      rec.G = opt.G;
      rec.G_sub = opt.G_sub;
      break;
    case SweepMode::GAIN_TU:
      opt = analysis::maximize_gain_twist_untwist(grid.scheme, grid.engine, N, eta, grid.controls);
      rec.G = opt.G;
      rec.G_sub = opt.G_sub;
      rec.sigma_diss_sq = opt.sigma_diss_sq;
      break;
    case SweepMode::GMET:
      opt = analysis::maximize_gmet(grid.scheme, grid.engine, N, eta, grid.xi_det_sq,
                                    grid.controls);
      rec.G = opt.G;
      rec.G_sub = opt.G_sub;
      rec.sigma_diss_sq = opt.sigma_diss_sq;
      if (opt.xi_R_sq) rec.xi_R_sq = *opt.xi_R_sq;
      rec.gmet = opt.gmet;
      break;
    case SweepMode::SQUEEZE:
      opt = analysis::minimize_wineland(grid.scheme, grid.engine, N, eta, grid.controls);
      rec.xi_R_sq = opt.value;
      break;
  }
  rec.lambda_opt = opt.lambda_opt;
  rec.t_opt = opt.t_opt;
  std::string fl;
  for (const auto& f : opt.flags) {
    if (!fl.empty()) fl += ';';
    fl += f;
  }
  rec.flags = fl;
  return rec;
}

int worker_count_from_env(int requested) {
  if (const char* env = std::getenv("OAT_DISSIM_WORKERS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

void run_to_csv(const Grid& grid, const std::string& csv_path, const RunOptions& opt) {
  namespace fs = std::filesystem;
  const std::size_t total = grid.points();
  const std::string mpath = manifest_path(csv_path);

  std::size_t done = 0;
  std::vector<long long> offsets;  // byte offset after the header and each row

  if (opt.resume && fs::exists(mpath) && fs::exists(csv_path)) {
    std::ifstream mf(mpath);
    json m = json::parse(mf);
    if (m.at("grid_hash").get<std::string>() != grid.hash())
      throw std::runtime_error("resume: manifest grid hash does not match this grid");
    done = m.at("points_done").get<std::size_t>();
    offsets = m.at("offsets").get<std::vector<long long>>();
    if (offsets.size() != done + 1) throw std::runtime_error("resume: corrupt manifest offsets");
    fs::resize_file(csv_path, static_cast<std::uintmax_t>(offsets.back()));
  } else {
    std::ofstream out(csv_path, std::ios::trunc);
    out << kCsvHeader << '\n';
    out.flush();
    offsets = {static_cast<long long>(out.tellp())};
  }

  auto write_manifest = [&](std::size_t ndone) {
    json m;
    m["grid_hash"] = grid.hash();
    m["grid"] = grid.canonical_text();
    m["points_total"] = total;
    m["points_done"] = ndone;
    m["offsets"] = offsets;
    std::ofstream mf(mpath, std::ios::trunc);
    mf << m.dump(1) << '\n';
  };
  write_manifest(done);
  if (done >= total) return;

  const std::size_t stop_after = opt.halt_after ? std::min(total, *opt.halt_after) : total;
  if (done >= stop_after) return;

  // worker pool with an ordered writer: rows land in grid order regardless
  // of completion order
  const int workers =
      std::max(1, std::min<int>(worker_count_from_env(opt.workers),
                                static_cast<int>(stop_after - done)));
  std::mutex mu;
  std::condition_variable cv;
  std::atomic<std::size_t> next_idx{done};
  std::atomic<bool> failed{false};
  std::vector<std::optional<Record>> pending(total);
  std::exception_ptr failure;

  auto work = [&]() {
    for (;;) {
      if (failed.load()) return;
      const std::size_t idx = next_idx.fetch_add(1);
      if (idx >= stop_after) return;
      try {
        Record rec = evaluate_point(grid, idx);
        {
          std::lock_guard<std::mutex> lk(mu);
          pending[idx] = std::move(rec);
        }
        cv.notify_all();
      } catch (...) {
        failed.store(true);
        std::lock_guard<std::mutex> lk(mu);
        if (!failure) failure = std::current_exception();
        cv.notify_all();
        return;
      }
    }
  };

  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int i = 0; i < workers; ++i) pool.emplace_back(work);

  std::ofstream out(csv_path, std::ios::app);
  std::size_t written = done;
  {
    std::unique_lock<std::mutex> lk(mu);
    while (written < stop_after) {
      cv.wait(lk, [&] { return failure || pending[written].has_value(); });
      if (failure) break;
      while (written < stop_after && pending[written].has_value()) {
        out << record_to_csv(*pending[written]) << '\n';
        out.flush();
        pending[written].reset();
        ++written;
        offsets.push_back(static_cast<long long>(out.tellp()));
        write_manifest(written);
        if (opt.progress) opt.progress(written, total);
      }
    }
  }
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

std::vector<Record> read_csv(const std::string& csv_path) {
  std::ifstream in(csv_path);
  if (!in) throw std::runtime_error("read_csv: cannot open " + csv_path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("read_csv: empty file");
  if (line != kCsvHeader) throw std::runtime_error("read_csv: unexpected header");
  std::vector<Record> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    out.push_back(record_from_csv(line));
  }
  return out;
}

}  // namespace sweep
}  // namespace oat
