#include "oat/moments.hpp"

#include <cmath>
#include <stdexcept>

namespace oat {

std::optional<double> SpinMoments::min_transverse_variance() const {
  const Eigen::Vector3d s = spin();
  const double norm = s.norm();
  if (norm == 0.0) return std::nullopt;
  const Eigen::Vector3d n = s / norm;
  // orthonormal transverse pair
  Eigen::Vector3d seed = (std::abs(n.x()) < 0.9) ? Eigen::Vector3d::UnitX() : Eigen::Vector3d::UnitY();
  const Eigen::Vector3d e1 = n.cross(seed).normalized();
  const Eigen::Vector3d e2 = n.cross(e1);
  const Eigen::Matrix3d c = cov();
  const double v11 = e1.dot(c * e1);
  const double v22 = e2.dot(c * e2);
  const double v12 = e1.dot(c * e2);
  const double mean = 0.5 * (v11 + v22);
  const double rad = std::sqrt(0.25 * (v11 - v22) * (v11 - v22) + v12 * v12);
  return mean - rad;
}

SpinMoments SpinMoments::coherent(double N, const Eigen::Vector3d& axis) {
  if (!(N >= 1)) throw std::invalid_argument("coherent: N must be >= 1");
  if (axis.norm() == 0.0) throw std::invalid_argument("coherent: axis must be nonzero");
  const Eigen::Vector3d n = axis.normalized();
  const Eigen::Quaterniond q = Eigen::Quaterniond::FromTwoVectors(Eigen::Vector3d::UnitX(), n);
  const Eigen::Matrix3d rot = q.toRotationMatrix();
  Eigen::Matrix3d c = Eigen::Matrix3d::Zero();
  c(1, 1) = c(2, 2) = N / 4.0;
  const Eigen::Vector3d s = rot * Eigen::Vector3d(N / 2.0, 0, 0);
  const Eigen::Matrix3d cr = rot * c * rot.transpose();
  SpinMoments m;
  m.sx = s.x();
  m.sy = s.y();
  m.sz = s.z();
  m.cxx = cr(0, 0);
  m.cxy = cr(0, 1);
  m.cxz = cr(0, 2);
  m.cyy = cr(1, 1);
  m.cyz = cr(1, 2);
  m.czz = cr(2, 2);
  return m;
}

SpinMoments SpinMoments::rotated_about_y(double phi) const {
  if (!std::isfinite(phi)) throw std::invalid_argument("rotated_about_y: phi must be finite");
  const double c = std::cos(phi), s = std::sin(phi);
  Eigen::Matrix3d r;
  r << c, 0, -s, 0, 1, 0, s, 0, c;
  const Eigen::Vector3d sv = r * spin();
  const Eigen::Matrix3d cv = r * cov() * r.transpose();
  SpinMoments m;
  m.sx = sv.x();
  m.sy = sv.y();
  m.sz = sv.z();
  m.cxx = cv(0, 0);
  m.cxy = cv(0, 1);
  m.cxz = cv(0, 2);
  m.cyy = cv(1, 1);
  m.cyz = cv(1, 2);
  m.czz = cv(2, 2);
  return m;
}

std::optional<double> wineland_parameter(const SpinMoments& m, double N) {
  const auto vmin = m.min_transverse_variance();
  if (!vmin) return std::nullopt;
  const double pol = m.polarization();
  return N * (*vmin) / (pol * pol);
}

}  // namespace oat
