#pragma once

#include <array>

#include <Eigen/Core>

namespace tetopt {

/// Inradius-to-longest-edge quality, scaled so the regular tetrahedron
/// scores exactly 1:
///
///   gamma = sqrt(24) * 3V / (|e_max| * (A1 + A2 + A3 + A4))
///
/// The volume carries the orientation sign, so flat and inverted
/// tetrahedra score <= 0. The sign itself comes from the exact predicate,
/// never from rounded arithmetic.
double tet_gamma(const Eigen::Vector3d& a, const Eigen::Vector3d& b,
                 const Eigen::Vector3d& c, const Eigen::Vector3d& d);

/// Signed inverse Frobenius condition number of the map S taking the
/// regular reference tetrahedron's edge matrix to this tetrahedron's:
/// sign(det S) * 3 / (|S|_F * |S^-1|_F). 1 for regular, -1 for its mirror
/// image, 0 in the flat limit.
double tet_sicn(const Eigen::Vector3d& a, const Eigen::Vector3d& b,
                const Eigen::Vector3d& c, const Eigen::Vector3d& d);

/// Interior dihedral angles in degrees at the six edges, edge order
/// (01, 02, 03, 12, 13, 23). Throws DegenerateTet unless the volume is
/// strictly positive.
std::array<double, 6> tet_dihedral_angles(const Eigen::Vector3d& a,
                                          const Eigen::Vector3d& b,
                                          const Eigen::Vector3d& c,
                                          const Eigen::Vector3d& d);

struct QualityVector {
  double gamma;
  double sicn;
  std::array<double, 6> dihedral_deg;
};

QualityVector tet_quality_vector(const Eigen::Vector3d& a, const Eigen::Vector3d& b,
                                 const Eigen::Vector3d& c, const Eigen::Vector3d& d);

}  // namespace tetopt
