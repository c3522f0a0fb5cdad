#ifndef OAT_DICKE_HPP
#define OAT_DICKE_HPP

#include <Eigen/Dense>
#include <complex>
#include <vector>

#include "oat/moments.hpp"
#include "oat/rates.hpp"

namespace oat {
namespace dicke {

constexpr int kDefaultMaxSpins = 120;

// Total-spin sector structure of N spin-1/2s.  Sectors are stored with
// doubled quantum numbers (J2 = 2j) to keep all indexing integral; blocks are
// ordered by descending j, and within a block row r corresponds to
// m = j - r.
struct Layout {
  int N = 0;
  std::vector<int> J2;                  // per block
  std::vector<int> dim;                 // 2j+1
  std::vector<std::ptrdiff_t> offset;   // into the stacked complex vector
  std::ptrdiff_t total = 0;             // sum of dim^2

  explicit Layout(int N);
  int blocks() const { return static_cast<int>(J2.size()); }
};

// multiplicity of the spin-j sector, d_N(j) = C(N, N/2-j) - C(N, N/2-j-1)
double sector_degeneracy(int N, int J2);

// Permutation-invariant density matrix as one complex matrix per total-spin
// sector.  The sector degeneracy is absorbed into the stored blocks, so the
// physical trace is the plain sum of all block diagonals and observables are
// plain block-wise traces.
class Density {
 public:
  explicit Density(int N);

  int N() const { return layout_.N; }
  const Layout& layout() const { return layout_; }
  Eigen::VectorXcd& data() { return data_; }
  const Eigen::VectorXcd& data() const { return data_; }

  Eigen::Map<Eigen::MatrixXcd> block(int b);
  Eigen::Map<const Eigen::MatrixXcd> block(int b) const;

  double trace_real() const;
  double hermiticity_defect() const;
  double purity() const;
  double min_block_eigenvalue() const;
  std::vector<double> sector_populations() const;

  SpinMoments observables() const;

  // coherent-spin state along +x (lives entirely in the j = N/2 sector)
  static Density css_x(int N);

  // per-sector conjugation by exp(i phi J_y); sectors do not mix
  Density rotated_about_y(double phi) const;

 private:
  Layout layout_;
  Eigen::VectorXcd data_;
};

// Generator of the effective master equation in the sector representation.
// Collective terms act within each sector; the local dissipators couple
// sectors j -> j, j+-1 with branching weights obtained by coupling the last
// spin via Clebsch-Gordan coefficients (validated against the brute-force
// solver in the tests).
class Generator {
 public:
  Generator(int N, EffectiveRates rates, int max_spins = kDefaultMaxSpins);

  int N() const { return layout_.N; }
  const EffectiveRates& rates() const { return rates_; }
  const Layout& layout() const { return layout_; }
  bool couples_sectors() const { return couples_sectors_; }

  // out = L(in), both stacked block vectors of the full layout
  void apply(const std::complex<double>* in, std::complex<double>* out) const;

  // restricted variant used when the generator is sector-diagonal: only the
  // listed blocks are present in the compact vectors
  void apply_blocks(const std::complex<double>* in, std::complex<double>* out,
                    const std::vector<int>& blocks,
                    const std::vector<std::ptrdiff_t>& offsets) const;

 private:
  struct Transfer {
    int src = 0, dst = 0;
    int shift = 0;      // dst row = src row + shift
    int lo = 0, hi = 0; // inclusive source row range
    Eigen::MatrixXd K;  // (hi-lo+1)^2 coefficients, rate included
  };

  void apply_block_local(const std::complex<double>* in, std::complex<double>* out, int b,
                         std::ptrdiff_t in_off, std::ptrdiff_t out_off) const;

  Layout layout_;
  EffectiveRates rates_;
  bool couples_sectors_ = false;
  std::vector<Eigen::MatrixXcd> diag_;  // per block: Hamiltonian + all diagonal rates
  std::vector<Eigen::VectorXd> arel_;   // per block: S_- matrix elements (row r -> r+1)
  std::vector<Transfer> transfers_;
};

struct EvolveOptions {
  double rtol = 1e-8;
  double atol_scale = 1e-12;  // atol = atol_scale (trace-normalized states)
};

Density evolve(const Density& state, const Generator& gen, double t,
               const EvolveOptions& opt = {});

// single integration pass emitting observables at the requested times
std::vector<SpinMoments> evolve_observables(const Density& state, const Generator& gen,
                                            const std::vector<double>& ts,
                                            const EvolveOptions& opt = {},
                                            Density* final_state = nullptr);

}  // namespace dicke
}  // namespace oat

#endif
