#include "tetopt/quality.hpp"

#include <cmath>

#include <Eigen/Dense>

#include "tetopt/errors.hpp"
#include "tetopt/predicates.hpp"

namespace tetopt {
namespace {

constexpr double kSqrt24 = 4.898979485566356196394568149411782783932;
constexpr double kRadToDeg = 57.29577951308232087679815481410517033241;

// Inverse of the regular reference edge matrix with unit first edge:
//   W = [ 1  1/2      1/2     ]
//       [ 0  sqrt3/2  sqrt3/6 ]
//       [ 0  0        sqrt6/3 ]
const Eigen::Matrix3d& reference_inverse() {
  static const Eigen::Matrix3d winv = [] {
    Eigen::Matrix3d w;
    w << 1.0, 0.5, 0.5,
         0.0, std::sqrt(3.0) / 2.0, std::sqrt(3.0) / 6.0,
         0.0, 0.0, std::sqrt(6.0) / 3.0;
    return Eigen::Matrix3d(w.inverse());
  }();
  return winv;
}

}  // namespace

double tet_gamma(const Eigen::Vector3d& a, const Eigen::Vector3d& b,
                 const Eigen::Vector3d& c, const Eigen::Vector3d& d) {
  const int sign = orient3d_sign(a, b, c, d);
  if (sign == 0) return 0.0;

  const Eigen::Vector3d ab = b - a;
  const Eigen::Vector3d ac = c - a;
  const Eigen::Vector3d ad = d - a;
  const Eigen::Vector3d bc = c - b;
  const Eigen::Vector3d bd = d - b;
  const Eigen::Vector3d cd = d - c;

  const double three_v = 0.5 * std::fabs(ab.cross(ac).dot(ad));

  const double area_sum = 0.5 * (bc.cross(bd).norm() +    // opposite a
                                 ac.cross(ad).norm() +    // opposite b
                                 ab.cross(ad).norm() +    // opposite c
                                 ab.cross(ac).norm());    // opposite d

  double emax2 = ab.squaredNorm();
  emax2 = std::max(emax2, ac.squaredNorm());
  emax2 = std::max(emax2, ad.squaredNorm());
  emax2 = std::max(emax2, bc.squaredNorm());
  emax2 = std::max(emax2, bd.squaredNorm());
  emax2 = std::max(emax2, cd.squaredNorm());

  const double denom = std::sqrt(emax2) * area_sum;
  if (!(denom > 0.0)) return 0.0;
  return sign * kSqrt24 * three_v / denom;
}

double tet_sicn(const Eigen::Vector3d& a, const Eigen::Vector3d& b,
                const Eigen::Vector3d& c, const Eigen::Vector3d& d) {
  const int sign = orient3d_sign(a, b, c, d);
  if (sign == 0) return 0.0;

  Eigen::Matrix3d edges;
  edges.col(0) = b - a;
  edges.col(1) = c - a;
  edges.col(2) = d - a;
  const Eigen::Matrix3d s = edges * reference_inverse();

  // |S^-1|_F = |adj S|_F / |det S|; written this way the flat limit goes
  // to zero instead of dividing by a vanishing determinant.
  Eigen::Matrix3d adj;
  adj.row(0) = s.col(1).cross(s.col(2));
  adj.row(1) = s.col(2).cross(s.col(0));
  adj.row(2) = s.col(0).cross(s.col(1));

  const double denom = s.norm() * adj.norm();
  if (!(denom > 0.0)) return 0.0;
  return sign * 3.0 * std::fabs(s.determinant()) / denom;
}

std::array<double, 6> tet_dihedral_angles(const Eigen::Vector3d& a,
                                          const Eigen::Vector3d& b,
                                          const Eigen::Vector3d& c,
                                          const Eigen::Vector3d& d) {
  if (orient3d_sign(a, b, c, d) <= 0)
    throw DegenerateTet("dihedral angles require a positive-volume tetrahedron");

  const Eigen::Vector3d* p[4] = {&a, &b, &c, &d};
  constexpr int edge[6][4] = {
      // edge endpoints, then the two opposite vertices
      {0, 1, 2, 3}, {0, 2, 1, 3}, {0, 3, 1, 2},
      {1, 2, 0, 3}, {1, 3, 0, 2}, {2, 3, 0, 1},
  };

  std::array<double, 6> angles;
  for (int e = 0; e < 6; e++) {
    const Eigen::Vector3d& pi = *p[edge[e][0]];
    const Eigen::Vector3d axis = (*p[edge[e][1]] - pi).normalized();
    const Eigen::Vector3d r = *p[edge[e][2]] - pi;
    const Eigen::Vector3d s = *p[edge[e][3]] - pi;
    const Eigen::Vector3d u = r - r.dot(axis) * axis;
    const Eigen::Vector3d v = s - s.dot(axis) * axis;
    angles[e] = std::atan2(u.cross(v).norm(), u.dot(v)) * kRadToDeg;
  }
  return angles;
}

QualityVector tet_quality_vector(const Eigen::Vector3d& a, const Eigen::Vector3d& b,
                                 const Eigen::Vector3d& c, const Eigen::Vector3d& d) {
  return {tet_gamma(a, b, c, d), tet_sicn(a, b, c, d), tet_dihedral_angles(a, b, c, d)};
}

}  // namespace tetopt
