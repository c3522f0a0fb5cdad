#ifndef OAT_EXACT_HPP
#define OAT_EXACT_HPP

#include <Eigen/Dense>
#include <complex>

#include "oat/moments.hpp"
#include "oat/ode.hpp"
#include "oat/rates.hpp"

namespace oat {

// Brute-force Lindblad evolution on the full 2^N-dimensional Hilbert space.
// Ground truth for the Dicke solver and for small-N protocol results; capped
// at N = 8 (the superoperator acts on 4^N amplitudes).
namespace exact {

constexpr int kMaxSpins = 8;

struct DenseState {
  int N = 0;
  Eigen::MatrixXcd rho;

  double trace_real() const { return rho.trace().real(); }
  double hermiticity_defect() const { return (rho - rho.adjoint()).cwiseAbs().maxCoeff(); }
  double min_eigenvalue() const;
};

// Coherent-spin state along +x (every spin in (|up>+|down>)/sqrt2).
DenseState css_x(int N);

// rho -> e^{i phi S_y} rho e^{-i phi S_y}
DenseState rotate_about_y(const DenseState& s, double phi);

// Matrix-free action of the effective Liouvillian: OAT Hamiltonian chi S_z^2
// plus collective dephasing/relaxation and the three local dissipators.  The
// rotating-frame term omega_s_tilde S_z is dropped.
class Liouvillian {
 public:
  Liouvillian(int N, EffectiveRates rates);

  int N() const { return N_; }
  const EffectiveRates& rates() const { return rates_; }
  void apply(const Eigen::MatrixXcd& rho, Eigen::MatrixXcd& out) const;

 private:
  int N_;
  int dim_;
  EffectiveRates rates_;
  Eigen::VectorXd sz_;  // S_z eigenvalue per basis state
};

DenseState evolve(const DenseState& state, const Liouvillian& lv, double t, double rtol = 1e-8);

// Exact traces of the collective spin operators against rho.
SpinMoments expectations(const DenseState& state);

// max_ij || [rho, SWAP_ij] ||_max — exactly zero for permutation-symmetric
// states evolved under the (permutation-invariant) effective Liouvillian.
double permutation_symmetry_defect(const DenseState& state);

}  // namespace exact
}  // namespace oat

#endif
