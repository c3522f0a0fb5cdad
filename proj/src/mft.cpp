#include "oat/mft.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace oat {

double ChiSchedule::chi_at(double t) const {
  if (segments.empty()) throw std::invalid_argument("ChiSchedule: empty");
  double chi = segments.front().chi;
  for (const auto& s : segments) {
    if (s.t_start <= t) chi = s.chi;
  }
  return chi;
}

Eigen::VectorXd pack_moments(const SpinMoments& m) {
  Eigen::VectorXd y(9);
  y << m.sx, m.sy, m.sz, m.cxx, m.cxy, m.cxz, m.cyy, m.cyz, m.czz;
  return y;
}

SpinMoments unpack_moments(const Eigen::VectorXd& y) {
  SpinMoments m;
  m.sx = y[0];
  m.sy = y[1];
  m.sz = y[2];
  m.cxx = y[3];
  m.cxy = y[4];
  m.cxz = y[5];
  m.cyy = y[6];
  m.cyz = y[7];
  m.czz = y[8];
  return m;
}

SpinMoments MftEngine::rhs(const SpinMoments& m, double chi) const {
  const double N = N_;
  const double gp = rates_.gamma_plus, gm = rates_.gamma_minus, gz = rates_.gamma_z;
  const double Gp = rates_.Gamma_phi, Gr = rates_.Gamma_rel;
  const double deph = Gp + gm + gp + 4.0 * gz;  // total transverse decay rate
  const double sx = m.sx, sy = m.sy, sz = m.sz;
  const double cxx = m.cxx, cxy = m.cxy, cxz = m.cxz, cyy = m.cyy, cyz = m.cyz, czz = m.czz;

  SpinMoments d;
  d.sx = -2.0 * chi * (cyz + sy * sz) - 0.5 * deph * sx + Gr * (cxz + (sz - 0.5) * sx);
  d.sy = 2.0 * chi * (cxz + sx * sz) - 0.5 * deph * sy + Gr * (cyz + (sz - 0.5) * sy);
  d.sz = -gm * (sz + 0.5 * N) - gp * (sz - 0.5 * N) - Gr * (cxx + cyy + sx * sx + sy * sy + sz);

  d.cxx = -4.0 * chi * (cxz * sy + cxy * sz) - (gp + gm + 4.0 * gz) * (cxx - 0.25 * N) +
          Gp * (cyy - cxx + sy * sy) +
          Gr * (czz - cxx + sz * sz - 0.5 * sz + 2.0 * (cxz * sx + cxx * sz));
  d.cxy = 2.0 * chi * (cxz * sx - cyz * sy + cxx * sz - cyy * sz) - (gm + gp + 4.0 * gz) * cxy -
          Gp * (2.0 * cxy + sx * sy) + Gr * (cyz * sx + cxz * sy + cxy * sz - cxy);
  d.cxz = -2.0 * chi * (czz * sy + cyz * sz - 0.25 * sy) - gp * (1.5 * cxz + 0.5 * sx) -
          gm * (1.5 * cxz - 0.5 * sx) - 2.0 * gz * cxz - 0.5 * Gp * cxz -
          Gr * (2.0 * cxx * sx + 2.0 * cxy * sy - czz * sx - cxz * sz + 2.5 * cxz - 0.25 * sx +
                sx * sz);
  d.cyy = 4.0 * chi * (cyz * sx + cxy * sz) - (gm + gp + 4.0 * gz) * (cyy - 0.25 * N) +
          Gp * (cxx - cyy + sx * sx) +
          Gr * (czz - cyy + sz * sz - 0.5 * sz + 2.0 * (cyz * sy + cyy * sz));
  d.cyz = 2.0 * chi * (czz * sx + cxz * sz - 0.25 * sx) - gp * (1.5 * cyz + 0.5 * sy) -
          gm * (1.5 * cyz - 0.5 * sy) - 2.0 * gz * cyz - 0.5 * Gp * cyz -
          Gr * (2.0 * cyy * sy + 2.0 * cxy * sx - czz * sy - cyz * sz + 2.5 * cyz - 0.25 * sy +
                sy * sz);
  d.czz = -gp * (2.0 * czz + sz - 0.5 * N) - gm * (2.0 * czz - sz - 0.5 * N) -
          Gr * (2.0 * czz - cxx - cyy - sx * sx - sy * sy - sz -
                4.0 * (cxz * sx + cyz * sy));
  return d;
}

MftTrajectory MftEngine::integrate(const SpinMoments& initial, const ChiSchedule& schedule,
                                   double t_end, double rtol) const {
  if (schedule.segments.empty()) throw std::invalid_argument("integrate: empty chi schedule");
  if (!(t_end >= 0.0)) throw std::invalid_argument("integrate: t_end must be >= 0");

  OdeOptions opt;
  opt.rtol = rtol;
  opt.atol = 1e-10 * std::max(N_, 1.0);

  // split [0, t_end] at schedule switch points
  std::vector<double> cuts{0.0};
  for (const auto& s : schedule.segments)
    if (s.t_start > 0.0 && s.t_start < t_end) cuts.push_back(s.t_start);
  cuts.push_back(t_end);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  MftTrajectory traj;
  traj.t_end_ = t_end;
  Eigen::VectorXd y = pack_moments(initial);
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double ta = cuts[i], tb = cuts[i + 1];
    const double chi = schedule.chi_at(0.5 * (ta + tb));
    OdeRhs f = [this, chi](double, const Eigen::VectorXd& yv, Eigen::VectorXd& dy) {
      dy = pack_moments(rhs(unpack_moments(yv), chi));
    };
    DenseSolution seg = integrate_dense(f, y, ta, tb, opt);
    y = seg.eval(tb);
    traj.seg_start_.push_back(ta);
    traj.segs_.push_back(std::move(seg));
  }
  if (traj.segs_.empty()) {  // t_end == 0
    OdeRhs f = [this, &schedule](double, const Eigen::VectorXd& yv, Eigen::VectorXd& dy) {
      dy = pack_moments(rhs(unpack_moments(yv), schedule.chi_at(0.0)));
    };
    traj.seg_start_.push_back(0.0);
    traj.segs_.push_back(integrate_dense(f, y, 0.0, 0.0, opt));
  }
  return traj;
}

SpinMoments MftTrajectory::at(double t) const {
  std::size_t i = 0;
  while (i + 1 < segs_.size() && seg_start_[i + 1] <= t) ++i;
  return unpack_moments(segs_[i].eval(t));
}

std::vector<SpinMoments> MftTrajectory::sample(const std::vector<double>& ts) const {
  std::vector<SpinMoments> out;
  out.reserve(ts.size());
  for (double t : ts) out.push_back(at(t));
  return out;
}

double MftEngine::min_cov_eigenvalue(const SpinMoments& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(m.cov());
  return es.eigenvalues().minCoeff();
}

}  // namespace oat
