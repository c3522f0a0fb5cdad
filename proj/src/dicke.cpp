#include "oat/dicke.hpp"

#include <cmath>
#include <stdexcept>

#include "oat/ode.hpp"

namespace oat {
namespace dicke {

namespace {

using cplx = std::complex<double>;

double mval(int J2, int r) { return 0.5 * J2 - r; }

// S_- matrix element sqrt(j(j+1) - m(m-1)) taking |j,m> to |j,m-1>
double lower_elem(int J2, double m) {
  const double j = 0.5 * J2;
  const double a = j * (j + 1.0) - m * (m - 1.0);
  return (a > 0.0) ? std::sqrt(a) : 0.0;
}

// Clebsch-Gordan coefficients for coupling a sector p of N-1 spins with one
// extra spin-1/2 to total spin j = p +- 1/2:
//   |j,m> = cup |p, m-1/2>|up> + cdn |p, m+1/2>|down>
struct CG {
  double up, dn;
};

CG cg_child(int P2, int J2child, int M2) {
  if (J2child != P2 + 1 && J2child != P2 - 1) return {0.0, 0.0};
  if (std::abs(M2) > J2child) return {0.0, 0.0};
  const double denom = P2 + 1.0;
  const double plus = 0.5 * (P2 + M2 + 1.0);   // p + m + 1/2
  const double minus = 0.5 * (P2 - M2 + 1.0);  // p - m + 1/2
  const double sp = std::sqrt(std::max(0.0, plus) / denom);
  const double sm = std::sqrt(std::max(0.0, minus) / denom);
  if (J2child == P2 + 1) return {sp, sm};
  return {-sm, sp};
}

// overlap <j',m+mu; same parent| sigma^(N)_mu |j,m; parent p> for one spin
// operator acting on the last spin (mu = -1, 0, +1 for sigma_-, sigma_z,
// sigma_+)
double g_factor(int P2, int J2src, int J2dst, int M2, int mu) {
  const CG s = cg_child(P2, J2src, M2);
  if (mu == 0) {
    const CG d = cg_child(P2, J2dst, M2);
    return s.up * d.up - s.dn * d.dn;
  }
  if (mu == -1) {
    const CG d = cg_child(P2, J2dst, M2 - 2);
    return s.up * d.dn;
  }
  const CG d = cg_child(P2, J2dst, M2 + 2);
  return s.dn * d.up;
}

}  // namespace

Layout::Layout(int n) : N(n) {
  if (n < 1) throw std::invalid_argument("Layout: N must be >= 1");
  std::ptrdiff_t off = 0;
  for (int j2 = n; j2 >= 0; j2 -= 2) {
    J2.push_back(j2);
    dim.push_back(j2 + 1);
    offset.push_back(off);
    off += static_cast<std::ptrdiff_t>(j2 + 1) * (j2 + 1);
  }
  total = off;
}

double sector_degeneracy(int N, int J2) {
  const int k = (N - J2) / 2;
  auto lbinom = [N](int kk) {
    return std::lgamma(N + 1.0) - std::lgamma(kk + 1.0) - std::lgamma(N - kk + 1.0);
  };
  double d = std::exp(lbinom(k));
  if (k >= 1) d -= std::exp(lbinom(k - 1));
  return d;
}

Density::Density(int n) : layout_(n), data_(Eigen::VectorXcd::Zero(layout_.total)) {}

Eigen::Map<Eigen::MatrixXcd> Density::block(int b) {
  return {data_.data() + layout_.offset[b], layout_.dim[b], layout_.dim[b]};
}

Eigen::Map<const Eigen::MatrixXcd> Density::block(int b) const {
  return {data_.data() + layout_.offset[b], layout_.dim[b], layout_.dim[b]};
}

double Density::trace_real() const {
  double tr = 0.0;
  for (int b = 0; b < layout_.blocks(); ++b) tr += block(b).trace().real();
  return tr;
}

double Density::hermiticity_defect() const {
  double worst = 0.0;
  for (int b = 0; b < layout_.blocks(); ++b) {
    const auto blk = block(b);
    worst = std::max(worst, (blk - blk.adjoint()).cwiseAbs().maxCoeff());
  }
  return worst;
}

double Density::purity() const {
  double p = 0.0;
  for (int b = 0; b < layout_.blocks(); ++b) {
    const double d = sector_degeneracy(layout_.N, layout_.J2[b]);
    p += (block(b) * block(b)).trace().real() / d;
  }
  return p;
}

double Density::min_block_eigenvalue() const {
  double worst = 0.0;
  for (int b = 0; b < layout_.blocks(); ++b) {
    const auto blk = block(b);
    Eigen::MatrixXcd h = 0.5 * (blk + blk.adjoint());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
    worst = std::min(worst, es.eigenvalues().minCoeff());
  }
  return worst;
}

std::vector<double> Density::sector_populations() const {
  std::vector<double> pops;
  for (int b = 0; b < layout_.blocks(); ++b) pops.push_back(block(b).trace().real());
  return pops;
}

Density Density::css_x(int n) {
  Density rho(n);
  const int dim = n + 1;
  Eigen::VectorXcd c(dim);
  const double ln2 = std::log(2.0);
  for (int r = 0; r < dim; ++r) {
    const double lb =
        std::lgamma(n + 1.0) - std::lgamma(r + 1.0) - std::lgamma(n - r + 1.0);
    c[r] = std::exp(0.5 * lb - 0.5 * n * ln2);
  }
  rho.block(0) = c * c.adjoint();
  return rho;
}

Density Density::rotated_about_y(double phi) const {
  if (!std::isfinite(phi)) throw std::invalid_argument("rotated_about_y: phi must be finite");
  Density out(layout_.N);
  for (int b = 0; b < layout_.blocks(); ++b) {
    const int d = layout_.dim[b];
    const int J2 = layout_.J2[b];
    Eigen::MatrixXcd jy = Eigen::MatrixXcd::Zero(d, d);
    for (int r = 1; r < d; ++r) {
      const double a = lower_elem(J2, mval(J2, r - 1));  // couples rows r-1 (m+1) and r (m)
      jy(r - 1, r) = cplx(0, -0.5) * a;
      jy(r, r - 1) = cplx(0, 0.5) * a;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(jy);
    Eigen::VectorXcd ph(d);
    for (int i = 0; i < d; ++i) ph[i] = std::exp(cplx(0, phi * es.eigenvalues()[i]));
    const Eigen::MatrixXcd u = es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint();
    out.block(b) = u * block(b) * u.adjoint();
  }
  return out;
}

SpinMoments Density::observables() const {
  double sz = 0.0, szz = 0.0, spm = 0.0, smp = 0.0;
  cplx pm(0, 0), q(0, 0), c1(0, 0), c2(0, 0);
  for (int b = 0; b < layout_.blocks(); ++b) {
    const int d = layout_.dim[b];
    const int J2 = layout_.J2[b];
    const auto blk = block(b);
    Eigen::VectorXd a(d);  // a[r] = <j,m(r)-1| S_- |j,m(r)>
    for (int r = 0; r < d; ++r) a[r] = lower_elem(J2, mval(J2, r));
    for (int r = 0; r < d; ++r) {
      const double m = mval(J2, r);
      const double pop = blk(r, r).real();
      sz += m * pop;
      szz += m * m * pop;
      spm += a[r] * a[r] * pop;
      if (r >= 1) smp += a[r - 1] * a[r - 1] * pop;
      if (r >= 1) {
        pm += a[r - 1] * blk(r - 1, r);
        c1 += mval(J2, r - 1) * a[r - 1] * blk(r - 1, r);  // <S_z S_->
        c2 += m * a[r - 1] * blk(r - 1, r);                // <S_- S_z>
      }
      if (r >= 2) q += a[r - 1] * a[r - 2] * blk(r - 2, r);
    }
  }
  SpinMoments mo;
  mo.sx = pm.real();
  mo.sy = -pm.imag();
  mo.sz = sz;
  const double sxx = 0.25 * (2.0 * q.real() + spm + smp);
  const double syy = 0.25 * (spm + smp - 2.0 * q.real());
  const double sxy = -0.5 * q.imag();
  const double sxz = 0.5 * (c1 + c2).real();
  const double syz = -0.5 * (c1 + c2).imag();
  mo.cxx = sxx - mo.sx * mo.sx;
  mo.cyy = syy - mo.sy * mo.sy;
  mo.czz = szz - mo.sz * mo.sz;
  mo.cxy = sxy - mo.sx * mo.sy;
  mo.cxz = sxz - mo.sx * mo.sz;
  mo.cyz = syz - mo.sy * mo.sz;
  return mo;
}

Generator::Generator(int n, EffectiveRates rates, int max_spins)
    : layout_(n), rates_(rates) {
  if (n > max_spins)
    throw std::invalid_argument("Generator: N exceeds the sector-solver cap");
  const double N = n;
  const double gz = rates_.gamma_z, gp = rates_.gamma_plus, gm = rates_.gamma_minus;
  couples_sectors_ = (gz != 0.0) || (gp != 0.0) || (gm != 0.0);

  diag_.resize(layout_.blocks());
  arel_.resize(layout_.blocks());
  for (int b = 0; b < layout_.blocks(); ++b) {
    const int d = layout_.dim[b];
    const int J2 = layout_.J2[b];
    Eigen::MatrixXcd dg(d, d);
    Eigen::VectorXd a(d);
    for (int r = 0; r < d; ++r) a[r] = lower_elem(J2, mval(J2, r));
    for (int c = 0; c < d; ++c) {
      const double m1 = mval(J2, c);
      for (int r = 0; r < d; ++r) {
        const double m = mval(J2, r);
        double re = -0.5 * rates_.Gamma_phi * (m - m1) * (m - m1);
        re -= 0.5 * rates_.Gamma_rel * (a[r] * a[r] + a[c] * a[c]);
        re -= 0.5 * gm * (N + m + m1);
        re -= 0.5 * gp * (N - m - m1);
        re -= gz * N;
        const double im = -rates_.chi * (m * m - m1 * m1);
        dg(r, c) = cplx(re, im);
      }
    }
    diag_[b] = std::move(dg);
    arel_[b] = std::move(a);
  }

  if (!couples_sectors_) return;

  // Local-dissipator sector transfer.  Each sector j of N spins branches to
  // parents p = j -+ 1/2 of N-1 spins with multiplicity weights
  //   w(p = j-1/2) = 2j (N/2 + j + 1)/(2j+1)
  //   w(p = j+1/2) = (2j+2)(N/2 - j)/(2j+1)
  // (the factor N for the N equivalent spins is already included); the
  // per-parent amplitudes are products of Clebsch-Gordan coefficients.
  struct Channel {
    int mu;
    double rate;
  };
  const Channel channels[] = {{-1, gm}, {0, gz}, {+1, gp}};
  for (int b = 0; b < layout_.blocks(); ++b) {
    const int J2 = layout_.J2[b];
    const double j = 0.5 * J2;
    const double w_dn = 2.0 * j * (0.5 * N + j + 1.0) / (2.0 * j + 1.0);
    const double w_up = (2.0 * j + 2.0) * (0.5 * N - j) / (2.0 * j + 1.0);
    for (int db = -1; db <= 1; ++db) {
      const int bd = b + db;
      if (bd < 0 || bd >= layout_.blocks()) continue;
      const int J2d = layout_.J2[bd];  // blocks ordered by descending j, so J2d = J2 - 2 db
      for (const Channel& ch : channels) {
        if (ch.rate == 0.0) continue;
        // target row: r' = (J2d - M2d)/2 with M2d = M2 + 2 mu and M2 = J2 - 2r,
        // so r' = r + (J2d - J2)/2 - mu
        const int sh = (J2d - J2) / 2 - ch.mu;
        const int lo = std::max(0, -sh);
        const int hi = std::min(layout_.dim[b] - 1, layout_.dim[bd] - 1 - sh);
        if (lo > hi) continue;
        const int nrows = hi - lo + 1;
        Eigen::MatrixXd K = Eigen::MatrixXd::Zero(nrows, nrows);
        bool any = false;
        for (int c = lo; c <= hi; ++c) {
          const int M2c = J2 - 2 * c;
          for (int r = lo; r <= hi; ++r) {
            const int M2r = J2 - 2 * r;
            double k = 0.0;
            if (w_dn > 0.0)
              k += w_dn * g_factor(J2 - 1, J2, J2d, M2r, ch.mu) *
                   g_factor(J2 - 1, J2, J2d, M2c, ch.mu);
            if (w_up > 0.0)
              k += w_up * g_factor(J2 + 1, J2, J2d, M2r, ch.mu) *
                   g_factor(J2 + 1, J2, J2d, M2c, ch.mu);
            k *= ch.rate;
            if (k != 0.0) any = true;
            K(r - lo, c - lo) = k;
          }
        }
        if (!any) continue;
        Transfer tr;
        tr.src = b;
        tr.dst = bd;
        tr.shift = sh;
        tr.lo = lo;
        tr.hi = hi;
        tr.K = std::move(K);
        transfers_.push_back(std::move(tr));
      }
    }
  }
}

void Generator::apply_block_local(const cplx* in, cplx* out, int b,
                                  std::ptrdiff_t in_off, std::ptrdiff_t out_off) const {
  const int d = layout_.dim[b];
  Eigen::Map<const Eigen::MatrixXcd> src(in + in_off, d, d);
  Eigen::Map<Eigen::MatrixXcd> dst(out + out_off, d, d);
  dst = diag_[b].cwiseProduct(src);
  if (rates_.Gamma_rel != 0.0) {
    const Eigen::VectorXd& a = arel_[b];
    for (int c = 0; c + 1 < d; ++c)
      for (int r = 0; r + 1 < d; ++r)
        dst(r + 1, c + 1) += rates_.Gamma_rel * a[r] * a[c] * src(r, c);
  }
}

void Generator::apply(const cplx* in, cplx* out) const {
  for (int b = 0; b < layout_.blocks(); ++b)
    apply_block_local(in, out, b, layout_.offset[b], layout_.offset[b]);
  for (const Transfer& tr : transfers_) {
    const int ds = layout_.dim[tr.src], dd = layout_.dim[tr.dst];
    Eigen::Map<const Eigen::MatrixXcd> src(in + layout_.offset[tr.src], ds, ds);
    Eigen::Map<Eigen::MatrixXcd> dst(out + layout_.offset[tr.dst], dd, dd);
    for (int c = tr.lo; c <= tr.hi; ++c)
      for (int r = tr.lo; r <= tr.hi; ++r)
        dst(r + tr.shift, c + tr.shift) += tr.K(r - tr.lo, c - tr.lo) * src(r, c);
  }
}

void Generator::apply_blocks(const cplx* in, cplx* out, const std::vector<int>& blocks,
                             const std::vector<std::ptrdiff_t>& offsets) const {
  for (std::size_t i = 0; i < blocks.size(); ++i)
    apply_block_local(in, out, blocks[i], offsets[i], offsets[i]);
}

namespace {

struct CompactView {
  std::vector<int> blocks;
  std::vector<std::ptrdiff_t> offsets;
  std::ptrdiff_t total = 0;
};

CompactView active_view(const Density& state, const Generator& gen) {
  CompactView v;
  const Layout& lay = state.layout();
  for (int b = 0; b < lay.blocks(); ++b) {
    const bool keep = gen.couples_sectors() || state.block(b).cwiseAbs().maxCoeff() > 0.0;
    if (keep) {
      v.blocks.push_back(b);
      v.offsets.push_back(v.total);
      v.total += static_cast<std::ptrdiff_t>(lay.dim[b]) * lay.dim[b];
    }
  }
  return v;
}

Eigen::VectorXd gather(const Density& state, const CompactView& v) {
  const Layout& lay = state.layout();
  Eigen::VectorXcd compact(v.total);
  for (std::size_t i = 0; i < v.blocks.size(); ++i) {
    const int b = v.blocks[i];
    const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(lay.dim[b]) * lay.dim[b];
    compact.segment(v.offsets[i], n) = state.data().segment(lay.offset[b], n);
  }
  return Eigen::Map<const Eigen::VectorXd>(reinterpret_cast<const double*>(compact.data()),
                                           2 * v.total);
}

void scatter(const Eigen::VectorXd& y, const CompactView& v, Density& state) {
  Eigen::Map<const Eigen::VectorXcd> compact(reinterpret_cast<const cplx*>(y.data()), v.total);
  const Layout& lay = state.layout();
  state.data().setZero();
  for (std::size_t i = 0; i < v.blocks.size(); ++i) {
    const int b = v.blocks[i];
    const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(lay.dim[b]) * lay.dim[b];
    state.data().segment(lay.offset[b], n) = compact.segment(v.offsets[i], n);
  }
}

OdeRhs make_rhs(const Generator& gen, const CompactView& v, bool full) {
  if (full) {
    return [&gen](double, const Eigen::VectorXd& y, Eigen::VectorXd& dy) {
      dy.resize(y.size());
      gen.apply(reinterpret_cast<const cplx*>(y.data()), reinterpret_cast<cplx*>(dy.data()));
    };
  }
  return [&gen, &v](double, const Eigen::VectorXd& y, Eigen::VectorXd& dy) {
    dy.resize(y.size());
    gen.apply_blocks(reinterpret_cast<const cplx*>(y.data()), reinterpret_cast<cplx*>(dy.data()),
                     v.blocks, v.offsets);
  };
}

}  // namespace

Density evolve(const Density& state, const Generator& gen, double t, const EvolveOptions& opt) {
  if (state.N() != gen.N()) throw std::invalid_argument("evolve: size mismatch");
  if (!(t >= 0.0)) throw std::invalid_argument("evolve: t must be >= 0");
  const CompactView v = active_view(state, gen);
  const bool full = static_cast<int>(v.blocks.size()) == state.layout().blocks();
  Eigen::VectorXd y0 = gather(state, v);
  OdeOptions oopt;
  oopt.rtol = opt.rtol;
  oopt.atol = opt.atol_scale;
  Eigen::VectorXd y1 = integrate_to(make_rhs(gen, v, full), y0, 0.0, t, oopt);
  Density out(state.N());
  scatter(y1, v, out);
  return out;
}

std::vector<SpinMoments> evolve_observables(const Density& state, const Generator& gen,
                                            const std::vector<double>& ts,
                                            const EvolveOptions& opt, Density* final_state) {
  if (state.N() != gen.N()) throw std::invalid_argument("evolve: size mismatch");
  if (ts.empty()) return {};
  const double t_end = ts.back();
  const CompactView v = active_view(state, gen);
  const bool full = static_cast<int>(v.blocks.size()) == state.layout().blocks();
  Eigen::VectorXd y0 = gather(state, v);
  OdeOptions oopt;
  oopt.rtol = opt.rtol;
  oopt.atol = opt.atol_scale;

  std::vector<SpinMoments> out(ts.size());
  Density work(state.N());
  integrate_sampled(make_rhs(gen, v, full), y0, 0.0, t_end, ts,
                    [&](std::size_t idx, double, const Eigen::VectorXd& y) {
                      scatter(y, v, work);
                      out[idx] = work.observables();
                      if (final_state && idx + 1 == ts.size()) *final_state = work;
                    },
                    oopt);
  return out;
}

}  // namespace dicke
}  // namespace oat
