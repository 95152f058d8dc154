#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace tetopt {

/// Exact sign of det[b-a, c-a, d-a].
///
/// Positive when d lies on the side of plane (a,b,c) that makes the
/// tetrahedron (a,b,c,d) positively oriented, negative on the other side,
/// zero iff the four points are exactly coplanar. A floating-point filter
/// decides the generic cases; near-degenerate inputs fall back to exact
/// expansion arithmetic, so the returned sign is always correct.
int orient3d_sign(const Eigen::Vector3d& a, const Eigen::Vector3d& b,
                  const Eigen::Vector3d& c, const Eigen::Vector3d& d);

/// Exact sign of the 2D cross product (b-a) x (c-a): + for counterclockwise.
int orient2d_sign(const Eigen::Vector2d& a, const Eigen::Vector2d& b,
                  const Eigen::Vector2d& c);

/// Six times the signed tetrahedron volume, plain double arithmetic.
inline double signed_volume6(const Eigen::Vector3d& a, const Eigen::Vector3d& b,
                             const Eigen::Vector3d& c, const Eigen::Vector3d& d) {
  return (b - a).cross(c - a).dot(d - a);
}

}  // namespace tetopt
