#include "tetopt/spr.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>

#include "tetopt/errors.hpp"
#include "tetopt/predicates.hpp"
#include "tetopt/quality.hpp"

namespace tetopt {
namespace {

using Eigen::Vector2d;
using Eigen::Vector3d;

int o3(std::span<const Vector3d> p, int a, int b, int c, int d) {
  return orient3d_sign(p[a], p[b], p[c], p[d]);
}

// Project coplanar points onto the coordinate plane where the triangle has
// the largest footprint; sign tests stay exact under the affine bijection.
int dominant_axis(std::span<const Vector3d> p, const std::array<int, 3>& tri) {
  const Vector3d n =
      (p[tri[1]] - p[tri[0]]).cross(p[tri[2]] - p[tri[0]]).cwiseAbs();
  if (n[0] >= n[1] && n[0] >= n[2]) return 0;
  return n[1] >= n[2] ? 1 : 2;
}

Vector2d project(const Vector3d& x, int drop) {
  switch (drop) {
    case 0: return {x[1], x[2]};
    case 1: return {x[2], x[0]};
    default: return {x[0], x[1]};
  }
}

bool point_in_closed_tri_2d(std::span<const Vector3d> p, int q,
                            const std::array<int, 3>& tri, int drop) {
  const Vector2d a = project(p[tri[0]], drop);
  const Vector2d b = project(p[tri[1]], drop);
  const Vector2d c = project(p[tri[2]], drop);
  const Vector2d x = project(p[q], drop);
  const int s0 = orient2d_sign(a, b, x);
  const int s1 = orient2d_sign(b, c, x);
  const int s2 = orient2d_sign(c, a, x);
  return (s0 >= 0 && s1 >= 0 && s2 >= 0) || (s0 <= 0 && s1 <= 0 && s2 <= 0);
}

// p strictly between a and b, all three collinear; exact via coordinate
// comparison on the widest axis.
bool between_strict(std::span<const Vector3d> pts, int a, int b, int p) {
  const Vector3d d = (pts[b] - pts[a]).cwiseAbs();
  int axis = 0;
  if (d[1] > d[axis]) axis = 1;
  if (d[2] > d[axis]) axis = 2;
  const double lo = std::min(pts[a][axis], pts[b][axis]);
  const double hi = std::max(pts[a][axis], pts[b][axis]);
  return lo < pts[p][axis] && pts[p][axis] < hi;
}

// Positive-length overlap of collinear segments sharing endpoint `shared`;
// the other endpoints are u_far and g_far.
bool collinear_overlap_beyond(std::span<const Vector3d> pts, int shared, int u_far,
                              int g_far) {
  const Vector3d d = (pts[u_far] - pts[shared]).cwiseAbs();
  int axis = 0;
  if (d[1] > d[axis]) axis = 1;
  if (d[2] > d[axis]) axis = 2;
  const double su = pts[u_far][axis] - pts[shared][axis];
  const double sg = pts[g_far][axis] - pts[shared][axis];
  return su * sg > 0.0;  // both run to the same side of the shared point
}

// Improper contact between coplanar segment (u,v) and triangle tri: any
// intersection beyond vertices the simplices share by index.
bool coplanar_seg_tri_improper(std::span<const Vector3d> p, int u, int v,
                               const std::array<int, 3>& tri) {
  const int drop = dominant_axis(p, tri);
  auto is_vert = [&](int x) { return x == tri[0] || x == tri[1] || x == tri[2]; };
  if (is_vert(u) && is_vert(v)) return false;  // the shared edge itself

  if (!is_vert(u) && point_in_closed_tri_2d(p, u, tri, drop)) return true;
  if (!is_vert(v) && point_in_closed_tri_2d(p, v, tri, drop)) return true;

  const Vector2d pu = project(p[u], drop);
  const Vector2d pv = project(p[v], drop);
  for (int e = 0; e < 3; e++) {
    const int g0 = tri[e];
    const int g1 = tri[(e + 1) % 3];
    if (u == g0 || u == g1 || v == g0 || v == g1) {
      // shares one endpoint; improper only through collinear overlap
      const int shared = (u == g0 || u == g1) ? u : v;
      const int u_far = (shared == u) ? v : u;
      const int g_far = (shared == g0) ? g1 : g0;
      const Vector2d ps = project(p[shared], drop);
      if (orient2d_sign(ps, project(p[u_far], drop), project(p[g_far], drop)) == 0 &&
          collinear_overlap_beyond(p, shared, u_far, g_far))
        return true;
      continue;
    }
    const Vector2d q0 = project(p[g0], drop);
    const Vector2d q1 = project(p[g1], drop);
    const int d0 = orient2d_sign(pu, pv, q0);
    const int d1 = orient2d_sign(pu, pv, q1);
    const int e0 = orient2d_sign(q0, q1, pu);
    const int e1 = orient2d_sign(q0, q1, pv);
    if (d0 * d1 < 0 && e0 * e1 < 0) return true;  // proper crossing
    if (d0 == 0 && between_strict(p, u, v, g0)) return true;
    if (d1 == 0 && between_strict(p, u, v, g1)) return true;
  }
  return false;
}

// Improper contact between segment (u,v) and triangle tri in 3D. Contact at
// an endpoint that is a triangle vertex (same index) is proper.
bool seg_tri_improper(std::span<const Vector3d> p, int u, int v,
                      const std::array<int, 3>& tri) {
  const int su = o3(p, tri[0], tri[1], tri[2], u);
  const int sv = o3(p, tri[0], tri[1], tri[2], v);

  if (su != 0 && sv != 0) {
    if (su == sv) return false;
    const int w0 = o3(p, u, v, tri[0], tri[1]);
    const int w1 = o3(p, u, v, tri[1], tri[2]);
    const int w2 = o3(p, u, v, tri[2], tri[0]);
    // crossing point inside the closed triangle (boundary contact with an
    // interior segment point is never a shared simplex)
    return (w0 >= 0 && w1 >= 0 && w2 >= 0) || (w0 <= 0 && w1 <= 0 && w2 <= 0);
  }
  if (su == 0 && sv == 0) return coplanar_seg_tri_improper(p, u, v, tri);

  const int w = (su == 0) ? u : v;
  if (w == tri[0] || w == tri[1] || w == tri[2]) return false;
  return point_in_closed_tri_2d(p, w, tri, dominant_axis(p, tri));
}

bool point_strictly_in_tet(std::span<const Vector3d> p, int q,
                           const std::array<int, 4>& tet) {
  return o3(p, q, tet[1], tet[2], tet[3]) > 0 && o3(p, tet[0], q, tet[2], tet[3]) > 0 &&
         o3(p, tet[0], tet[1], q, tet[3]) > 0 && o3(p, tet[0], tet[1], tet[2], q) > 0;
}

constexpr int kTetEdge[6][2] = {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}};

bool improper_intersection(std::span<const Vector3d> p, const std::array<int, 4>& tet,
                           const std::array<int, 3>& g) {
  int shared = 0;
  for (int tv : tet)
    if (tv == g[0] || tv == g[1] || tv == g[2]) shared++;
  if (shared == 3) return false;  // coincides with a facet of the tet

  for (const auto& e : kTetEdge)
    if (seg_tri_improper(p, tet[e[0]], tet[e[1]], g)) return true;

  for (int f = 0; f < 4; f++) {
    const std::array<int, 3> facet = {tet[kFacetCorner[f][0]], tet[kFacetCorner[f][1]],
                                      tet[kFacetCorner[f][2]]};
    for (int e = 0; e < 3; e++)
      if (seg_tri_improper(p, g[e], g[(e + 1) % 3], facet)) return true;
  }
  return false;
}

int sorted_tuple_parity(std::array<int, 4> t) {
  int swaps = 0;
  for (int i = 0; i < 3; i++)
    for (int j = 0; j < 3 - i; j++)
      if (t[j] > t[j + 1]) {
        std::swap(t[j], t[j + 1]);
        swaps++;
      }
  return swaps & 1;
}

}  // namespace

bool candidate_tet_valid(std::span<const Vector3d> points,
                         std::span<const std::array<int, 3>> shell,
                         const std::array<int, 3>& facet, int apex) {
  const std::array<int, 4> tet = {facet[0], facet[1], facet[2], apex};
  if (o3(points, tet[0], tet[1], tet[2], tet[3]) <= 0) return false;
  for (int q = 0; q < static_cast<int>(points.size()); q++) {
    if (q == tet[0] || q == tet[1] || q == tet[2] || q == tet[3]) continue;
    if (point_strictly_in_tet(points, q, tet)) return false;
  }
  for (const auto& g : shell)
    if (improper_intersection(points, tet, g)) return false;
  return true;
}

SprEngine::SprEngine()
    : memo_(std::size_t(kMaxPoints) * kMaxPoints * kMaxPoints * kMaxPoints,
            std::numeric_limits<double>::quiet_NaN()),
      shell_map_(33 * 33 * 33, 0) {}

void SprEngine::reset_memo() {
  std::fill(memo_.begin(), memo_.end(), std::numeric_limits<double>::quiet_NaN());
}

double SprEngine::lookup(std::span<const Vector3d> points, int a, int b, int c, int d) {
  std::array<int, 4> s = {a, b, c, d};
  std::sort(s.begin(), s.end());
  const std::size_t idx =
      ((std::size_t(s[0]) * kMaxPoints + s[1]) * kMaxPoints + s[2]) * kMaxPoints + s[3];
  double& slot = memo_[idx];
  if (std::isnan(slot))
    slot = tet_gamma(points[s[0]], points[s[1]], points[s[2]], points[s[3]]);
  return slot;
}

double SprEngine::memo_quality(std::span<const Vector3d> points, int i, int j, int k,
                               int l) {
  return lookup(points, i, j, k, l);
}

bool SprEngine::tet_is_positive(std::span<const Vector3d> points,
                                const std::array<int, 4>& tet) {
  const double q = lookup(points, tet[0], tet[1], tet[2], tet[3]);
  if (q == 0.0) return false;
  const bool odd = sorted_tuple_parity(tet) != 0;
  return odd ? q < 0.0 : q > 0.0;
}

void SprEngine::place(const std::array<int, 3>& base, int apex,
                      std::vector<int>& journal) {
  auto key_of = [](std::array<int, 3> t) {
    std::sort(t.begin(), t.end());
    return (t[0] * 33 + t[1]) * 33 + t[2];
  };

  const int base_key = key_of(base);
  const int base_idx = shell_map_[base_key] - 1;
  shell_[base_idx].alive = false;
  shell_map_[base_key] = 0;
  journal.push_back(base_idx);

  const std::array<std::array<int, 3>, 3> fresh = {{
      {base[1], base[2], apex}, {base[0], apex, base[2]}, {base[0], base[1], apex}}};
  for (const auto& f : fresh) {
    const int key = key_of(f);
    const int existing = shell_map_[key] - 1;
    if (existing >= 0) {
      // twin with opposite winding closes this face of the front
      shell_[existing].alive = false;
      shell_map_[key] = 0;
      journal.push_back(existing);
    } else {
      shell_.push_back({f, true});
      shell_map_[key] = static_cast<int>(shell_.size());
      journal.push_back(-1);
    }
  }
}

void SprEngine::unplace(const std::vector<int>& journal) {
  auto key_of = [](std::array<int, 3> t) {
    std::sort(t.begin(), t.end());
    return (t[0] * 33 + t[1]) * 33 + t[2];
  };
  for (auto it = journal.rbegin(); it != journal.rend(); ++it) {
    if (*it < 0) {
      const int key = key_of(shell_.back().tri);
      shell_map_[key] = 0;
      shell_.pop_back();
    } else {
      shell_[*it].alive = true;
      shell_map_[key_of(shell_[*it].tri)] = *it + 1;
    }
  }
}

void SprEngine::dfs(std::span<const Vector3d> points, double cavity_volume6) {
  if (out_of_budget_) return;
  if (++nodes_ > budget_) {
    out_of_budget_ = true;
    return;
  }
  const int n = static_cast<int>(points.size());

  double bound = has_incumbent_ ? std::max(floor_, incumbent_quality_) : floor_;
  if (!(current_min_ > bound)) return;

  // pick the alive front facet with the fewest viable apexes (fail-first);
  // viability gate = memoized quality above the bound plus exact orientation
  int best_facet = -1;
  int best_count = std::numeric_limits<int>::max();
  bool any_alive = false;
  for (int idx = 0; idx < static_cast<int>(shell_.size()); idx++) {
    if (!shell_[idx].alive) continue;
    any_alive = true;
    const auto& tri = shell_[idx].tri;
    int count = 0;
    for (int apex = 0; apex < n; apex++) {
      if (apex == tri[0] || apex == tri[1] || apex == tri[2]) continue;
      const double q = std::fabs(lookup(points, tri[0], tri[1], tri[2], apex));
      if (!(q > bound)) continue;
      if (!tet_is_positive(points, {tri[0], tri[1], tri[2], apex})) continue;
      count++;
    }
    if (count == 0) return;  // this facet can never be filled: dead branch
    if (count < best_count) {
      best_count = count;
      best_facet = idx;
    }
  }

  if (!any_alive) {
    // complete tiling; defend with the volume identity before accepting
    double v6 = 0.0;
    for (const auto& t : placed_)
      v6 += signed_volume6(points[t[0]], points[t[1]], points[t[2]], points[t[3]]);
    if (std::fabs(v6 - cavity_volume6) > 1e-9 * std::fabs(cavity_volume6)) {
      assert(false && "closed front with mismatched volume");
      return;
    }
    incumbent_ = placed_;
    incumbent_quality_ = current_min_;
    has_incumbent_ = true;
    return;
  }

  const std::array<int, 3> tri = shell_[best_facet].tri;
  struct Candidate {
    int apex;
    double quality;
  };
  std::vector<Candidate> candidates;
  candidates.reserve(best_count);
  for (int apex = 0; apex < n; apex++) {
    if (apex == tri[0] || apex == tri[1] || apex == tri[2]) continue;
    const double q = std::fabs(lookup(points, tri[0], tri[1], tri[2], apex));
    if (!(q > bound)) continue;
    if (!tet_is_positive(points, {tri[0], tri[1], tri[2], apex})) continue;
    candidates.push_back({apex, q});
  }
  std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
    if (a.quality != b.quality) return a.quality > b.quality;
    return a.apex < b.apex;
  });

  std::vector<int> journal;
  for (const Candidate& cand : candidates) {
    bound = has_incumbent_ ? std::max(floor_, incumbent_quality_) : floor_;
    if (!(cand.quality > bound)) break;  // sorted descending

    bool valid = true;
    const std::array<int, 4> tet = {tri[0], tri[1], tri[2], cand.apex};
    for (int q = 0; q < n && valid; q++) {
      if (q == tet[0] || q == tet[1] || q == tet[2] || q == tet[3]) continue;
      if (point_strictly_in_tet(points, q, tet)) valid = false;
    }
    for (const auto& entry : shell_) {
      if (!valid) break;
      if (entry.alive && improper_intersection(points, tet, entry.tri)) valid = false;
    }
    if (!valid) continue;

    journal.clear();
    place(tri, cand.apex, journal);
    placed_.push_back(tet);
    const double saved_min = current_min_;
    current_min_ = std::min(current_min_, cand.quality);

    dfs(points, cavity_volume6);

    current_min_ = saved_min;
    placed_.pop_back();
    unplace(journal);
    if (out_of_budget_) return;
  }
}

SprResult SprEngine::search(std::span<const Vector3d> points,
                            std::span<const std::array<int, 3>> shell, double floor,
                            std::uint64_t node_budget) {
  if (points.size() > kMaxPoints)
    throw TooManyPoints("spr: cavity has more than 32 points");

  shell_.clear();
  std::fill(shell_map_.begin(), shell_map_.end(), 0);
  for (const auto& f : shell) {
    shell_.push_back({f, true});
    std::array<int, 3> s = f;
    std::sort(s.begin(), s.end());
    shell_map_[(s[0] * 33 + s[1]) * 33 + s[2]] = static_cast<int>(shell_.size());
  }

  double v6 = 0.0;
  for (const auto& f : shell)
    v6 -= points[f[0]].cross(points[f[1]]).dot(points[f[2]]);  // inward oriented

  placed_.clear();
  incumbent_.clear();
  has_incumbent_ = false;
  incumbent_quality_ = 0.0;
  floor_ = floor;
  current_min_ = 2.0;
  nodes_ = 0;
  budget_ = node_budget;
  out_of_budget_ = false;

  dfs(points, v6);

  SprResult result;
  result.nodes = nodes_;
  if (has_incumbent_) {
    result.status = SprStatus::Improved;
    result.tets = incumbent_;
    result.quality = incumbent_quality_;
  } else {
    result.status = out_of_budget_ ? SprStatus::BudgetExhausted : SprStatus::NoImprovement;
  }
  return result;
}

SprPatch spr_search(const Mesh& mesh, const Cavity& cavity, double floor,
                    std::uint64_t node_budget) {
  const std::vector<VertexId>& locals = cavity.all_points;
  std::vector<Vector3d> points(locals.size());
  for (std::size_t i = 0; i < locals.size(); i++) points[i] = mesh.point(locals[i]);

  auto local_of = [&](VertexId v) {
    return static_cast<int>(std::lower_bound(locals.begin(), locals.end(), v) -
                            locals.begin());
  };
  std::vector<std::array<int, 3>> shell;
  shell.reserve(cavity.boundary_facets.size());
  for (const auto& f : cavity.boundary_facets)
    shell.push_back({local_of(f[0]), local_of(f[2]), local_of(f[1])});  // flip inward

  SprEngine engine;
  const SprResult local = engine.search(points, shell, floor, node_budget);

  SprPatch patch;
  patch.status = local.status;
  patch.quality = local.quality;
  patch.tets.reserve(local.tets.size());
  for (const auto& t : local.tets)
    patch.tets.push_back({locals[t[0]], locals[t[1]], locals[t[2]], locals[t[3]]});
  return patch;
}

}  // namespace tetopt
