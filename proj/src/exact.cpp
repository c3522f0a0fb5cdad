#include "oat/exact.hpp"

#include <bit>
#include <cmath>
#include <stdexcept>

namespace oat {
namespace exact {

namespace {

using Mat = Eigen::MatrixXcd;
using cplx = std::complex<double>;

// bit k set in a basis index = spin k up

// B = S_- A: row r accumulates rows r|k for every spin k down in r
void sm_left(int N, const Mat& a, Mat& b) {
  const int dim = 1 << N;
  b.setZero();
  for (int k = 0; k < N; ++k) {
    const int bk = 1 << k;
    for (int r = 0; r < dim; ++r)
      if (!(r & bk)) b.row(r) += a.row(r | bk);
  }
}

// B = S_+ A
void sp_left(int N, const Mat& a, Mat& b) {
  const int dim = 1 << N;
  b.setZero();
  for (int k = 0; k < N; ++k) {
    const int bk = 1 << k;
    for (int r = 0; r < dim; ++r)
      if (r & bk) b.row(r) += a.row(r & ~bk);
  }
}

// B = A S_+: column c accumulates columns c|k
void sp_right(int N, const Mat& a, Mat& b) {
  const int dim = 1 << N;
  b.setZero();
  for (int k = 0; k < N; ++k) {
    const int bk = 1 << k;
    for (int c = 0; c < dim; ++c)
      if (!(c & bk)) b.col(c) += a.col(c | bk);
  }
}

// B = A S_-
void sm_right(int N, const Mat& a, Mat& b) {
  const int dim = 1 << N;
  b.setZero();
  for (int k = 0; k < N; ++k) {
    const int bk = 1 << k;
    for (int c = 0; c < dim; ++c)
      if (c & bk) b.col(c) += a.col(c & ~bk);
  }
}

Eigen::MatrixXd build_sy(int N) {
  // S_y = (S_+ - S_-)/2i is purely imaginary in this basis; return Im(S_y)
  const int dim = 1 << N;
  Eigen::MatrixXd im = Eigen::MatrixXd::Zero(dim, dim);
  for (int k = 0; k < N; ++k) {
    const int bk = 1 << k;
    for (int b = 0; b < dim; ++b) {
      if (b & bk) {
        // S_+ contribution <b|S_+|b&~bk> = 1 -> element (b, b&~bk) of S_y is 1/(2i) = -i/2
        im(b, b & ~bk) += -0.5;
        im(b & ~bk, b) += 0.5;
      }
    }
  }
  return im;
}

}  // namespace

double DenseState::min_eigenvalue() const {
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (rho + rho.adjoint()));
  return es.eigenvalues().minCoeff();
}

DenseState css_x(int N) {
  if (N < 1 || N > kMaxSpins) throw std::invalid_argument("css_x: N out of range");
  const int dim = 1 << N;
  Eigen::VectorXcd v = Eigen::VectorXcd::Constant(dim, std::pow(2.0, -0.5 * N));
  DenseState s;
  s.N = N;
  s.rho = v * v.adjoint();
  return s;
}

DenseState rotate_about_y(const DenseState& s, double phi) {
  if (!std::isfinite(phi)) throw std::invalid_argument("rotate_about_y: phi must be finite");
  const int dim = 1 << s.N;
  const Mat sy = cplx(0, 1) * build_sy(s.N);  // S_y is purely imaginary in this basis
  Eigen::SelfAdjointEigenSolver<Mat> es(sy);
  Eigen::VectorXcd ph(dim);
  for (int i = 0; i < dim; ++i) ph[i] = std::exp(cplx(0, phi * es.eigenvalues()[i]));
  const Mat u = es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint();
  DenseState out;
  out.N = s.N;
  out.rho = u * s.rho * u.adjoint();
  return out;
}

Liouvillian::Liouvillian(int N, EffectiveRates rates) : N_(N), rates_(rates) {
  if (N < 1) throw std::invalid_argument("Liouvillian: N must be >= 1");
  if (N > kMaxSpins)
    throw std::invalid_argument(
        "Liouvillian: N exceeds the brute-force cap; use the Dicke solver for larger ensembles");
  dim_ = 1 << N;
  sz_.resize(dim_);
  for (int b = 0; b < dim_; ++b) sz_[b] = std::popcount(static_cast<unsigned>(b)) - 0.5 * N;
}

void Liouvillian::apply(const Mat& rho, Mat& out) const {
  const int dim = dim_;
  out.resize(dim, dim);
  const double chi = rates_.chi;
  const double gp = rates_.Gamma_phi;

  // unitary part and the diagonal (in S_z eigenbasis) dissipators
  for (int c = 0; c < dim; ++c) {
    const double szc = sz_[c];
    for (int r = 0; r < dim; ++r) {
      const double szr = sz_[r];
      double re = -0.5 * gp * (szr - szc) * (szr - szc);
      const double im = -chi * (szr * szr - szc * szc);
      out(r, c) = cplx(re, im) * rho(r, c);
    }
  }

  // local dephasing: sum_k sigma_z rho sigma_z - N rho, elementwise
  if (rates_.gamma_z != 0.0) {
    const double gz = rates_.gamma_z;
    for (int c = 0; c < dim; ++c)
      for (int r = 0; r < dim; ++r) {
        const int flips = std::popcount(static_cast<unsigned>(r ^ c));
        out(r, c) += -2.0 * gz * flips * rho(r, c);
      }
  }

  // local relaxation / excitation
  if (rates_.gamma_minus != 0.0) {
    const double g = rates_.gamma_minus;
    for (int k = 0; k < N_; ++k) {
      const int bk = 1 << k;
      for (int c = 0; c < dim; ++c)
        for (int r = 0; r < dim; ++r)
          if (!(r & bk) && !(c & bk)) out(r, c) += g * rho(r | bk, c | bk);
    }
    for (int c = 0; c < dim; ++c)
      for (int r = 0; r < dim; ++r) {
        const double nup = (sz_[r] + sz_[c]) + N_;  // ups(r)+ups(c)
        out(r, c) += -0.5 * g * nup * rho(r, c);
      }
  }
  if (rates_.gamma_plus != 0.0) {
    const double g = rates_.gamma_plus;
    for (int k = 0; k < N_; ++k) {
      const int bk = 1 << k;
      for (int c = 0; c < dim; ++c)
        for (int r = 0; r < dim; ++r)
          if ((r & bk) && (c & bk)) out(r, c) += g * rho(r & ~bk, c & ~bk);
    }
    for (int c = 0; c < dim; ++c)
      for (int r = 0; r < dim; ++r) {
        const double ndown = 2.0 * N_ - ((sz_[r] + sz_[c]) + N_);
        out(r, c) += -0.5 * g * ndown * rho(r, c);
      }
  }

  // collective relaxation Gamma_rel D[S_-]
  if (rates_.Gamma_rel != 0.0) {
    const double g = rates_.Gamma_rel;
    Mat tmp1(dim, dim), tmp2(dim, dim);
    sm_left(N_, rho, tmp1);   // S_- rho
    sp_right(N_, tmp1, tmp2); // S_- rho S_+
    out += g * tmp2;
    // -g/2 {S_+ S_-, rho}
    sp_left(N_, tmp1, tmp2);  // S_+ S_- rho
    out -= 0.5 * g * tmp2;
    sp_right(N_, rho, tmp1);  // rho S_+
    sm_right(N_, tmp1, tmp2); // rho S_+ S_-
    out -= 0.5 * g * tmp2;
  }
}

DenseState evolve(const DenseState& state, const Liouvillian& lv, double t, double rtol) {
  if (state.N != lv.N()) throw std::invalid_argument("evolve: state/Liouvillian size mismatch");
  if (!(t >= 0.0)) throw std::invalid_argument("evolve: t must be >= 0");
  const int dim = 1 << state.N;
  Eigen::VectorXd y0(2 * dim * dim);
  Eigen::Map<Mat>(reinterpret_cast<cplx*>(y0.data()), dim, dim) = state.rho;

  Mat work(dim, dim);
  OdeRhs f = [&lv, dim, &work](double, const Eigen::VectorXd& y, Eigen::VectorXd& dy) {
    dy.resize(y.size());
    Eigen::Map<const Mat> rho(reinterpret_cast<const cplx*>(y.data()), dim, dim);
    lv.apply(rho, work);
    Eigen::Map<Mat>(reinterpret_cast<cplx*>(dy.data()), dim, dim) = work;
  };

  OdeOptions opt;
  opt.rtol = rtol;
  opt.atol = 1e-12;
  Eigen::VectorXd y1 = integrate_to(f, y0, 0.0, t, opt);
  DenseState out;
  out.N = state.N;
  out.rho = Eigen::Map<Mat>(reinterpret_cast<cplx*>(y1.data()), dim, dim);
  return out;
}

SpinMoments expectations(const DenseState& state) {
  const int N = state.N;
  const int dim = 1 << N;
  const Mat& rho = state.rho;

  Eigen::VectorXd sz(dim);
  for (int b = 0; b < dim; ++b) sz[b] = std::popcount(static_cast<unsigned>(b)) - 0.5 * N;

  const Mat syi = build_sy(N).cast<cplx>();  // Im part of S_y
  const Mat sy = cplx(0, 1) * syi;
  Mat sx = Mat::Zero(dim, dim);
  for (int k = 0; k < N; ++k) {
    const int bk = 1 << k;
    for (int b = 0; b < dim; ++b)
      if (b & bk) {
        sx(b, b & ~bk) += 0.5;
        sx(b & ~bk, b) += 0.5;
      }
  }
  const Mat szm = sz.cast<cplx>().asDiagonal();

  auto tr = [&](const Mat& a) { return (a * rho).trace().real(); };
  auto sym = [&](const Mat& a, const Mat& b) { return 0.5 * ((a * b + b * a) * rho).trace().real(); };

  SpinMoments m;
  m.sx = tr(sx);
  m.sy = tr(sy);
  m.sz = tr(szm);
  m.cxx = sym(sx, sx) - m.sx * m.sx;
  m.cxy = sym(sx, sy) - m.sx * m.sy;
  m.cxz = sym(sx, szm) - m.sx * m.sz;
  m.cyy = sym(sy, sy) - m.sy * m.sy;
  m.cyz = sym(sy, szm) - m.sy * m.sz;
  m.czz = sym(szm, szm) - m.sz * m.sz;
  return m;
}

double permutation_symmetry_defect(const DenseState& state) {
  const int N = state.N;
  const int dim = 1 << N;
  double worst = 0.0;
  for (int i = 0; i < N; ++i) {
    for (int j = i + 1; j < N; ++j) {
      const int bi = 1 << i, bj = 1 << j;
      auto swapped = [&](int b) {
        const int vi = (b >> i) & 1, vj = (b >> j) & 1;
        int s = b & ~(bi | bj);
        if (vi) s |= bj;
        if (vj) s |= bi;
        return s;
      };
      for (int c = 0; c < dim; ++c)
        for (int r = 0; r < dim; ++r) {
          const double d = std::abs(state.rho(r, c) - state.rho(swapped(r), swapped(c)));
          worst = std::max(worst, d);
        }
    }
  }
  return worst;
}

}  // namespace exact
}  // namespace oat
