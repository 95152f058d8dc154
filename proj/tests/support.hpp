// Shared fixtures and independent oracles for the test suites. Everything
// here is deliberately written against the plain geometric definitions,
// not by calling into the code paths under test.
#pragma once

#include <array>
#include <cmath>
#include <random>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "tetopt/mesh.hpp"
#include "tetopt/predicates.hpp"
#include "tetopt/quality.hpp"

namespace tetsupport {

using Eigen::Vector3d;
using tetopt::Mesh;
using tetopt::TetId;
using tetopt::Tetrahedron;
using tetopt::VertexId;

// --- fixtures -------------------------------------------------------------

// Two tets glued on facet (1,2,3); apex 0 below, apex 4 above. With
// |height| small the pair is sliver-like and the 3-tet retiling wins.
inline Mesh two_tet_mesh(double height = 1.0, double radius = 1.0) {
  Mesh mesh;
  mesh.vertices.resize(5);
  mesh.vertices[0].position = {0.3 * radius, 0.3 * radius, -height};
  mesh.vertices[1].position = {0.0, 0.0, 0.0};
  mesh.vertices[2].position = {radius, 0.0, 0.0};
  mesh.vertices[3].position = {0.0, radius, 0.0};
  mesh.vertices[4].position = {0.3 * radius, 0.3 * radius, height};
  Tetrahedron t0, t1;
  t0.v = {1, 3, 2, 0};
  t0.deleted = false;
  t1.v = {1, 2, 3, 4};
  t1.deleted = false;
  mesh.tets = {t0, t1};
  tetopt::build_adjacency(mesh);
  mesh.refresh_all_qualities();
  return mesh;
}

// N tets around the interior edge (0,1); ring vertices 2..N+1 at jittered
// angles, radii and heights. All tets positively oriented by construction.
inline Mesh ring_mesh(int n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int attempt = 0; attempt < 200; attempt++) {
    Mesh mesh;
    mesh.vertices.resize(n + 2);
    const double ha = 0.5 + u(rng);
    const double hb = 0.5 + u(rng);
    mesh.vertices[0].position = {0.2 * (u(rng) - 0.5), 0.2 * (u(rng) - 0.5), ha};
    mesh.vertices[1].position = {0.2 * (u(rng) - 0.5), 0.2 * (u(rng) - 0.5), -hb};

    std::vector<double> theta(n);
    for (int i = 0; i < n; i++) theta[i] = 2.0 * M_PI * (i + 0.1 + 0.8 * u(rng)) / n;
    for (int i = 0; i < n; i++) {
      const double r = 0.6 + 0.8 * u(rng);
      mesh.vertices[2 + i].position = {r * std::cos(theta[i]), r * std::sin(theta[i]),
                                       0.6 * (u(rng) - 0.5)};
    }

    bool valid = true;
    for (int i = 0; i < n && valid; i++) {
      Tetrahedron tet;
      tet.v = {1, 0, VertexId(2 + i), VertexId(2 + (i + 1) % n)};
      tet.deleted = false;
      const double v6 = tetopt::signed_volume6(
          mesh.point(tet.v[0]), mesh.point(tet.v[1]), mesh.point(tet.v[2]),
          mesh.point(tet.v[3]));
      if (!(v6 > 1e-9)) valid = false;
      mesh.tets.push_back(tet);
    }
    if (!valid) continue;
    tetopt::build_adjacency(mesh);
    mesh.refresh_all_qualities();
    return mesh;
  }
  throw std::runtime_error("ring_mesh: could not sample a valid ring");
}

// --- independent polygon-triangulation enumeration ------------------------

// Enumerates by choosing the triangle that covers the polygon's first edge
// and recursing on the worklist of leftover sub-polygons; a different scheme
// than the library's closing-edge chain recursion.
inline void enum_by_first_edge(std::vector<std::vector<int>> worklist,
                               std::vector<std::array<int, 3>>& current,
                               std::vector<std::vector<std::array<int, 3>>>& out) {
  while (!worklist.empty() && worklist.back().size() < 3) worklist.pop_back();
  if (worklist.empty()) {
    out.push_back(current);
    return;
  }
  const std::vector<int> poly = std::move(worklist.back());
  worklist.pop_back();
  const int m = static_cast<int>(poly.size());
  for (int k = 2; k < m; k++) {
    std::array<int, 3> tri = {poly[0], poly[1], poly[k]};
    std::sort(tri.begin(), tri.end());
    current.push_back(tri);
    auto next = worklist;
    next.emplace_back(poly.begin() + 1, poly.begin() + k + 1);  // chain 1..k
    std::vector<int> rest(poly.begin() + k, poly.end());        // chain k..m-1, 0
    rest.push_back(poly[0]);
    next.push_back(std::move(rest));
    enum_by_first_edge(std::move(next), current, out);
    current.pop_back();
  }
}

inline std::vector<std::vector<std::array<int, 3>>> all_polygon_triangulations(int n) {
  std::vector<int> poly(n);
  for (int i = 0; i < n; i++) poly[i] = i;
  std::vector<std::vector<std::array<int, 3>>> out;
  std::vector<std::array<int, 3>> current;
  enum_by_first_edge({poly}, current, out);
  return out;
}

// --- Moller triangle-triangle intersection (double arithmetic) ------------

namespace moller {

inline bool coplanar_tri_tri(const Vector3d& n, const Vector3d& v0, const Vector3d& v1,
                             const Vector3d& v2, const Vector3d& u0, const Vector3d& u1,
                             const Vector3d& u2) {
  // project onto the dominant plane and run 2D interval tests
  int i0, i1;
  const Vector3d a = n.cwiseAbs();
  if (a[0] > a[1] && a[0] > a[2]) {
    i0 = 1;
    i1 = 2;
  } else if (a[1] > a[2]) {
    i0 = 0;
    i1 = 2;
  } else {
    i0 = 0;
    i1 = 1;
  }
  auto edge_edge = [&](const Vector3d& p0, const Vector3d& p1, const Vector3d& q0,
                       const Vector3d& q1) {
    const double ax = p1[i0] - p0[i0], ay = p1[i1] - p0[i1];
    const double bx = q0[i0] - q1[i0], by = q0[i1] - q1[i1];
    const double cx = p0[i0] - q0[i0], cy = p0[i1] - q0[i1];
    const double f = ay * bx - ax * by;
    const double d = by * cx - bx * cy;
    if ((f > 0 && d >= 0 && d <= f) || (f < 0 && d <= 0 && d >= f)) {
      const double e = ax * cy - ay * cx;
      if (f > 0) return e >= 0 && e <= f;
      return e <= 0 && e >= f;
    }
    return false;
  };
  auto point_in = [&](const Vector3d& p, const Vector3d& t0, const Vector3d& t1,
                      const Vector3d& t2) {
    const double s0 = (t1[i0] - t0[i0]) * (p[i1] - t0[i1]) - (t1[i1] - t0[i1]) * (p[i0] - t0[i0]);
    const double s1 = (t2[i0] - t1[i0]) * (p[i1] - t1[i1]) - (t2[i1] - t1[i1]) * (p[i0] - t1[i0]);
    const double s2 = (t0[i0] - t2[i0]) * (p[i1] - t2[i1]) - (t0[i1] - t2[i1]) * (p[i0] - t2[i0]);
    return (s0 >= 0 && s1 >= 0 && s2 >= 0) || (s0 <= 0 && s1 <= 0 && s2 <= 0);
  };
  const Vector3d* v[3] = {&v0, &v1, &v2};
  const Vector3d* w[3] = {&u0, &u1, &u2};
  for (int i = 0; i < 3; i++)
    for (int j = 0; j < 3; j++)
      if (edge_edge(*v[i], *v[(i + 1) % 3], *w[j], *w[(j + 1) % 3])) return true;
  return point_in(v0, u0, u1, u2) || point_in(u0, v0, v1, v2);
}

// Interval test on the line of intersection of the two triangle planes;
// closed triangles, plain double arithmetic.
inline bool tri_tri_overlap(const Vector3d& v0, const Vector3d& v1, const Vector3d& v2,
                            const Vector3d& u0, const Vector3d& u1, const Vector3d& u2) {
  const Vector3d n1 = (v1 - v0).cross(v2 - v0);
  const double d1 = -n1.dot(v0);
  const double du[3] = {n1.dot(u0) + d1, n1.dot(u1) + d1, n1.dot(u2) + d1};
  if ((du[0] > 0 && du[1] > 0 && du[2] > 0) || (du[0] < 0 && du[1] < 0 && du[2] < 0))
    return false;

  const Vector3d n2 = (u1 - u0).cross(u2 - u0);
  const double d2 = -n2.dot(u0);
  const double dv[3] = {n2.dot(v0) + d2, n2.dot(v1) + d2, n2.dot(v2) + d2};
  if ((dv[0] > 0 && dv[1] > 0 && dv[2] > 0) || (dv[0] < 0 && dv[1] < 0 && dv[2] < 0))
    return false;

  if (du[0] == 0 && du[1] == 0 && du[2] == 0)
    return coplanar_tri_tri(n1, v0, v1, v2, u0, u1, u2);

  const Vector3d dir = n1.cross(n2);
  int axis = 0;
  const Vector3d ad = dir.cwiseAbs();
  if (ad[1] > ad[axis]) axis = 1;
  if (ad[2] > ad[axis]) axis = 2;

  // where the triangle meets the other plane, as a parameter range on the line
  auto interval = [&](const Vector3d* p[3], const double d[3], double& lo, double& hi) {
    bool any = false;
    lo = hi = 0.0;
    auto push = [&](double t) {
      if (!any) {
        lo = hi = t;
        any = true;
      } else {
        lo = std::min(lo, t);
        hi = std::max(hi, t);
      }
    };
    for (int e = 0; e < 3; e++) {
      const int q = (e + 1) % 3;
      if (d[e] == 0.0) push((*p[e])[axis]);
      if (d[e] * d[q] < 0.0)
        push((*p[e])[axis] + ((*p[q])[axis] - (*p[e])[axis]) * d[e] / (d[e] - d[q]));
    }
    return any;
  };
  const Vector3d* pv[3] = {&v0, &v1, &v2};
  const Vector3d* pu[3] = {&u0, &u1, &u2};
  double lo1, hi1, lo2, hi2;
  if (!interval(pv, dv, lo1, hi1)) return false;
  if (!interval(pu, du, lo2, hi2)) return false;
  return std::max(lo1, lo2) <= std::min(hi1, hi2);
}

}  // namespace moller

// Shrink a triangle toward its centroid so contacts confined to shared
// simplices stop registering as intersections.
inline std::array<Vector3d, 3> shrink_tri(const Vector3d& a, const Vector3d& b,
                                          const Vector3d& c, double factor = 1e-9) {
  const Vector3d g = (a + b + c) / 3.0;
  return {a + factor * (g - a), b + factor * (g - b), c + factor * (g - c)};
}

// --- exhaustive cavity-tiling oracle (double arithmetic) ------------------

struct TilingOracle {
  std::vector<Vector3d> points;
  double floor = 0.0;
  bool found = false;
  double best = 0.0;
  std::vector<std::array<int, 4>> best_tets;
  double cavity_v6 = 0.0;

  bool tet_valid(const std::array<int, 4>& tet,
                 const std::vector<std::array<int, 3>>& shell) const {
    const Vector3d& a = points[tet[0]];
    const Vector3d& b = points[tet[1]];
    const Vector3d& c = points[tet[2]];
    const Vector3d& d = points[tet[3]];
    if (tetopt::signed_volume6(a, b, c, d) <= 0) return false;

    // no other point strictly inside (barycentric via sub-volumes)
    for (int q = 0; q < static_cast<int>(points.size()); q++) {
      if (q == tet[0] || q == tet[1] || q == tet[2] || q == tet[3]) continue;
      const Vector3d& p = points[q];
      if (tetopt::signed_volume6(p, b, c, d) > 0 && tetopt::signed_volume6(a, p, c, d) > 0 &&
          tetopt::signed_volume6(a, b, p, d) > 0 && tetopt::signed_volume6(a, b, c, p) > 0)
        return false;
    }

    // shrunken facets of the tet against shrunken shell facets
    for (int f = 0; f < 4; f++) {
      const auto ft = shrink_tri(points[tet[tetopt::kFacetCorner[f][0]]],
                                 points[tet[tetopt::kFacetCorner[f][1]]],
                                 points[tet[tetopt::kFacetCorner[f][2]]]);
      for (const auto& g : shell) {
        const auto gt = shrink_tri(points[g[0]], points[g[1]], points[g[2]]);
        if (moller::tri_tri_overlap(ft[0], ft[1], ft[2], gt[0], gt[1], gt[2]))
          return false;
      }
    }
    return true;
  }

  // shell facets oriented inward (unfilled region on the positive side)
  void run(std::vector<std::array<int, 3>> shell, std::vector<std::array<int, 4>>& placed,
           double current_min) {
    if (shell.empty()) {
      double v6 = 0.0;
      for (const auto& t : placed)
        v6 += tetopt::signed_volume6(points[t[0]], points[t[1]], points[t[2]],
                                     points[t[3]]);
      if (std::fabs(v6 - cavity_v6) > 1e-6 * std::fabs(cavity_v6)) return;
      if (current_min > floor && (!found || current_min > best)) {
        found = true;
        best = current_min;
        best_tets = placed;
      }
      return;
    }
    const std::array<int, 3> base = shell.front();
    for (int apex = 0; apex < static_cast<int>(points.size()); apex++) {
      if (apex == base[0] || apex == base[1] || apex == base[2]) continue;
      const std::array<int, 4> tet = {base[0], base[1], base[2], apex};
      if (!tet_valid(tet, shell)) continue;
      const double q = std::fabs(tetopt::tet_gamma(points[tet[0]], points[tet[1]],
                                                   points[tet[2]], points[tet[3]]));

      // update the front
      std::vector<std::array<int, 3>> next;
      next.reserve(shell.size() + 2);
      std::vector<std::array<int, 3>> fresh = {{base[1], base[2], apex},
                                               {base[0], apex, base[2]},
                                               {base[0], base[1], apex}};
      for (std::size_t i = 1; i < shell.size(); i++) next.push_back(shell[i]);
      for (const auto& f : fresh) {
        std::array<int, 3> sf = f;
        std::sort(sf.begin(), sf.end());
        bool cancelled = false;
        for (std::size_t i = 0; i < next.size(); i++) {
          std::array<int, 3> sn = next[i];
          std::sort(sn.begin(), sn.end());
          if (sn == sf) {
            next.erase(next.begin() + i);
            cancelled = true;
            break;
          }
        }
        if (!cancelled) next.push_back(f);
      }

      placed.push_back(tet);
      run(next, placed, std::min(current_min, q));
      placed.pop_back();
    }
  }

  void search(const std::vector<std::array<int, 3>>& shell) {
    cavity_v6 = 0.0;
    for (const auto& f : shell)  // inward oriented
      cavity_v6 -= points[f[0]].cross(points[f[1]]).dot(points[f[2]]);
    std::vector<std::array<int, 4>> placed;
    run(shell, placed, 2.0);
  }
};

}  // namespace tetsupport
