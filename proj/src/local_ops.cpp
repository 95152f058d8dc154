#include "tetopt/local_ops.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

#include "tetopt/errors.hpp"
#include "tetopt/predicates.hpp"
#include "tetopt/quality.hpp"

namespace tetopt {
namespace {

bool owned(const OpContext* ctx, TetId t) {
  return ctx == nullptr || ctx->owner.owned(t);
}

// The relink footprint of a cavity replacement: every facet neighbor of the
// member tets. Member tets must already be owned (their fields are read).
bool neighbors_owned(const Mesh& mesh, const OpContext* ctx,
                     std::span<const TetId> members) {
  if (ctx == nullptr || !ctx->owner.restricted()) return true;
  for (TetId t : members)
    for (TetId n : mesh.tets[t].neighbor)
      if (n != kNoTet && !ctx->owner.owned(n)) return false;
  return true;
}

enum class WalkResult { Closed, Open, Unowned };

// Walk tet-to-tet around edge (a,b). Ownership is checked before any tet's
// fields are read, so a sweep worker never looks into a foreign partition.
WalkResult walk_ring(const Mesh& mesh, VertexId a, VertexId b, TetId seed,
                     const OpContext* ctx, EdgeRing& out) {
  if (!owned(ctx, seed)) return WalkResult::Unowned;
  const Tetrahedron& s = mesh.tets[seed];

  out.a = a;
  out.b = b;
  out.ring.clear();
  out.ring_tets.clear();
  for (VertexId v : s.v)
    if (v != a && v != b) out.ring.push_back(v);
  out.ring_tets.push_back(seed);

  TetId cur = seed;
  VertexId last = out.ring[1];
  const VertexId first = out.ring[0];
  for (int guard = 0; guard < 512; guard++) {
    const int slot = mesh.facet_slot(cur, TriKey(a, b, last));
    const TetId next = mesh.tets[cur].neighbor[slot];
    if (next == kNoTet) return WalkResult::Open;
    if (next == seed) return WalkResult::Closed;
    if (!owned(ctx, next)) return WalkResult::Unowned;

    VertexId next_v = kNoTet;
    for (VertexId v : mesh.tets[next].v)
      if (v != a && v != b && v != last) next_v = v;
    if (next_v == first) {
      out.ring_tets.push_back(next);
      return WalkResult::Closed;
    }
    out.ring.push_back(next_v);
    out.ring_tets.push_back(next);
    cur = next;
    last = next_v;
  }
  return WalkResult::Open;  // defensive: corrupt adjacency would loop
}

void orient_ring(const Mesh& mesh, EdgeRing& ring) {
  if (orient3d_sign(mesh.point(ring.b), mesh.point(ring.a), mesh.point(ring.ring[0]),
                    mesh.point(ring.ring[1])) < 0)
    std::reverse(ring.ring.begin(), ring.ring.end());
}

struct RingPatchChoice {
  bool found = false;
  std::uint64_t triangulation = 0;  // index into the table
  double quality = 0.0;
};

}  // namespace

std::optional<EdgeRing> build_edge_ring(const Mesh& mesh, VertexId a, VertexId b,
                                        TetId seed) {
  if (seed == kNoTet || mesh.tets[seed].deleted || !mesh.tets[seed].has_vertex(a) ||
      !mesh.tets[seed].has_vertex(b))
    throw Error("build_edge_ring: seed does not contain the edge");
  EdgeRing ring;
  if (walk_ring(mesh, a, b, seed, nullptr, ring) != WalkResult::Closed)
    return std::nullopt;
  orient_ring(mesh, ring);
  return ring;
}

OpStatus flip_2_3(Mesh& mesh, TetId ta, TetId tb, OpContext* ctx) {
  if (ta >= mesh.tets.size() || tb >= mesh.tets.size() || mesh.tets[ta].deleted ||
      mesh.tets[tb].deleted)
    throw NotAdjacent("flip_2_3: dead tet");
  if (!owned(ctx, ta) || !owned(ctx, tb)) return OpStatus::Suspended;

  int slot = -1;
  for (int i = 0; i < 4; i++)
    if (mesh.tets[ta].neighbor[i] == tb) slot = i;
  if (slot < 0) throw NotAdjacent("flip_2_3: tets do not share a facet");

  const std::array<VertexId, 3> f = {mesh.tets[ta].v[kFacetCorner[slot][0]],
                                     mesh.tets[ta].v[kFacetCorner[slot][1]],
                                     mesh.tets[ta].v[kFacetCorner[slot][2]]};
  if (mesh.is_constrained(f[0], f[1], f[2]))
    throw ConstrainedFacet("flip_2_3: shared facet is constrained");

  const VertexId p = mesh.tets[ta].v[slot];
  int back = -1;
  for (int i = 0; i < 4; i++)
    if (mesh.tets[tb].neighbor[i] == ta) back = i;
  const VertexId q = mesh.tets[tb].v[back];

  const std::array<TetId, 2> pair = {ta, tb};
  if (!neighbors_owned(mesh, ctx, pair)) return OpStatus::Suspended;

  // the three tets around the new edge pq
  const std::array<std::array<VertexId, 4>, 3> patch = {{
      {f[0], f[1], p, q}, {f[1], f[2], p, q}, {f[2], f[0], p, q}}};
  for (const auto& nt : patch)
    if (orient3d_sign(mesh.point(nt[0]), mesh.point(nt[1]), mesh.point(nt[2]),
                      mesh.point(nt[3])) <= 0)
      return OpStatus::Rejected;  // apex line does not pierce the facet

  const double before = std::min(mesh.tets[ta].quality, mesh.tets[tb].quality);
  double after = 1.0;
  for (const auto& nt : patch)
    after = std::min(after, tet_gamma(mesh.point(nt[0]), mesh.point(nt[1]),
                                      mesh.point(nt[2]), mesh.point(nt[3])));
  if (!(after > before)) return OpStatus::Rejected;

  const Cavity cav = extract_cavity(mesh, pair);
  replace_cavity(mesh, cav, patch, ctx);
  return OpStatus::Applied;
}

OpStatus flip_3_2(Mesh& mesh, const EdgeRing& ring, OpContext* ctx) {
  if (ring.ring.size() != 3) throw Error("flip_3_2: ring size must be 3");
  for (TetId t : ring.ring_tets)
    if (!owned(ctx, t)) return OpStatus::Suspended;
  for (VertexId w : ring.ring)
    if (mesh.is_constrained(ring.a, ring.b, w)) return OpStatus::Rejected;
  if (!neighbors_owned(mesh, ctx, ring.ring_tets)) return OpStatus::Suspended;

  const VertexId r0 = ring.ring[0], r1 = ring.ring[1], r2 = ring.ring[2];
  const std::array<std::array<VertexId, 4>, 2> patch = {{
      {r0, r1, r2, ring.a}, {r0, r2, r1, ring.b}}};
  for (const auto& nt : patch)
    if (orient3d_sign(mesh.point(nt[0]), mesh.point(nt[1]), mesh.point(nt[2]),
                      mesh.point(nt[3])) <= 0)
      return OpStatus::Rejected;

  const double before = cavity_quality(mesh, ring.ring_tets);
  double after = 1.0;
  for (const auto& nt : patch)
    after = std::min(after, tet_gamma(mesh.point(nt[0]), mesh.point(nt[1]),
                                      mesh.point(nt[2]), mesh.point(nt[3])));
  if (!(after > before)) return OpStatus::Rejected;

  const Cavity cav = extract_cavity(mesh, ring.ring_tets);
  replace_cavity(mesh, cav, patch, ctx);
  return OpStatus::Applied;
}

OpStatus edge_removal(Mesh& mesh, VertexId a, VertexId b, TetId seed, OpContext* ctx) {
  EdgeRing ring;
  switch (walk_ring(mesh, a, b, seed, ctx, ring)) {
    case WalkResult::Open:
      return OpStatus::Rejected;  // boundary edge
    case WalkResult::Unowned:
      return OpStatus::Suspended;
    case WalkResult::Closed:
      break;
  }
  const int n = static_cast<int>(ring.ring.size());
  if (n > 7) return OpStatus::Rejected;
  for (VertexId w : ring.ring)
    if (mesh.is_constrained(a, b, w)) return OpStatus::Rejected;
  if (!neighbors_owned(mesh, ctx, ring.ring_tets)) return OpStatus::Suspended;

  orient_ring(mesh, ring);
  const double ring_quality = cavity_quality(mesh, ring.ring_tets);

  // Every sandwich triangle scores min(upper, lower); triangles at or below
  // the ring quality are bad and veto the triangulations containing them.
  const PolygonTriangulations& table = triangulation_tables().ring(n);
  std::uint64_t survivors = (n == 3) ? 1ull : (1ull << table.triangulations.size()) - 1;
  std::array<double, 512> tri_quality{};
  for (int i = 0; i < n && survivors; i++)
    for (int j = i + 1; j < n; j++)
      for (int k = j + 1; k < n; k++) {
        const std::uint64_t mask = table.mask_of(i, j, k);
        if (mask == 0) continue;
        const double upper =
            tet_gamma(mesh.point(ring.ring[i]), mesh.point(ring.ring[j]),
                      mesh.point(ring.ring[k]), mesh.point(a));
        const double lower =
            tet_gamma(mesh.point(ring.ring[i]), mesh.point(ring.ring[k]),
                      mesh.point(ring.ring[j]), mesh.point(b));
        const double q = std::min(upper, lower);
        tri_quality[(i << 6) | (j << 3) | k] = q;
        if (q <= ring_quality) survivors &= ~mask;
      }

  RingPatchChoice choice;
  for (std::uint64_t s = survivors; s != 0; s &= s - 1) {
    const int t = std::countr_zero(s);
    double q = 1.0;
    for (const auto& tri : table.triangulations[t])
      q = std::min(q, tri_quality[(tri[0] << 6) | (tri[1] << 3) | tri[2]]);
    if (!choice.found || q > choice.quality) {
      choice.found = true;
      choice.triangulation = t;
      choice.quality = q;
    }
  }
  if (!choice.found || !(choice.quality > ring_quality)) return OpStatus::Rejected;

  std::vector<std::array<VertexId, 4>> patch;
  patch.reserve(2 * (n - 2));
  for (const auto& tri : table.triangulations[choice.triangulation]) {
    patch.push_back({ring.ring[tri[0]], ring.ring[tri[1]], ring.ring[tri[2]], a});
    patch.push_back({ring.ring[tri[0]], ring.ring[tri[2]], ring.ring[tri[1]], b});
  }

  const Cavity cav = extract_cavity(mesh, ring.ring_tets);
  replace_cavity(mesh, cav, patch, ctx);
  return OpStatus::Applied;
}

OpStatus edge_removal(Mesh& mesh, VertexId a, VertexId b, OpContext* ctx) {
  for (TetId t = 0; t < mesh.tets.size(); t++)
    if (!mesh.tets[t].deleted && mesh.tets[t].has_vertex(a) && mesh.tets[t].has_vertex(b))
      return edge_removal(mesh, a, b, t, ctx);
  throw Error("edge_removal: edge not found in mesh");
}

OpStatus smooth_vertex(Mesh& mesh, VertexId v, TetId seed, OpContext* ctx) {
  if (mesh.vertices[v].on_boundary)
    throw BoundaryVertex("smooth_vertex: vertex lies on the constrained surface");
  if (!owned(ctx, seed)) return OpStatus::Suspended;

  // star walk with the same ownership discipline as the ring walk
  std::vector<TetId> star = {seed};
  std::vector<TetId> stack = {seed};
  while (!stack.empty()) {
    const TetId t = stack.back();
    stack.pop_back();
    const int vslot = mesh.tets[t].vertex_slot(v);
    for (int i = 0; i < 4; i++) {
      if (i == vslot) continue;
      const TetId nb = mesh.tets[t].neighbor[i];
      if (nb == kNoTet) continue;
      if (std::find(star.begin(), star.end(), nb) != star.end()) continue;
      if (!owned(ctx, nb)) return OpStatus::Suspended;
      star.push_back(nb);
      stack.push_back(nb);
    }
  }

  std::vector<VertexId> neighbors;
  for (TetId t : star)
    for (VertexId w : mesh.tets[t].v)
      if (w != v) neighbors.push_back(w);
  std::sort(neighbors.begin(), neighbors.end());
  neighbors.erase(std::unique(neighbors.begin(), neighbors.end()), neighbors.end());

  Eigen::Vector3d centroid = Eigen::Vector3d::Zero();
  for (VertexId w : neighbors) centroid += mesh.point(w);
  centroid /= double(neighbors.size());

  const Eigen::Vector3d origin = mesh.vertices[v].position;
  auto evaluate = [&](double t) {
    mesh.vertices[v].position = origin + t * (centroid - origin);
    double q = 1.0;
    for (TetId tt : star)
      q = std::min(q, tet_gamma(mesh.tet_point(tt, 0), mesh.tet_point(tt, 1),
                                mesh.tet_point(tt, 2), mesh.tet_point(tt, 3)));
    return q;
  };

  const double f0 = evaluate(0.0);
  double best_t = 0.0;
  double best_q = f0;
  auto consider = [&](double t, double q) {
    if (q > best_q) {
      best_q = q;
      best_t = t;
    }
  };
  consider(1.0, evaluate(1.0));  // the centroid itself

  // golden-section bracket on [0,1]; f may not be unimodal, this is a
  // best-effort line search
  constexpr double kInvPhi = 0.6180339887498949;
  double lo = 0.0, hi = 1.0;
  double t1 = hi - kInvPhi * (hi - lo);
  double t2 = lo + kInvPhi * (hi - lo);
  double f1 = evaluate(t1);
  double f2 = evaluate(t2);
  consider(t1, f1);
  consider(t2, f2);
  for (int it = 0; it < 20 && (hi - lo) > 1e-3; it++) {
    if (f1 < f2) {
      lo = t1;
      t1 = t2;
      f1 = f2;
      t2 = lo + kInvPhi * (hi - lo);
      f2 = evaluate(t2);
      consider(t2, f2);
    } else {
      hi = t2;
      t2 = t1;
      f2 = f1;
      t1 = hi - kInvPhi * (hi - lo);
      f1 = evaluate(t1);
      consider(t1, f1);
    }
  }

  if (best_q > f0 + 1e-12 && best_q > 0.0) {
    mesh.vertices[v].position = origin + best_t * (centroid - origin);
    for (TetId t : star) mesh.refresh_quality(t);
    if (ctx != nullptr && ctx->touched != nullptr)
      ctx->touched->insert(ctx->touched->end(), star.begin(), star.end());
    return OpStatus::Applied;
  }
  mesh.vertices[v].position = origin;
  return OpStatus::Rejected;
}

OpStatus smooth_vertex(Mesh& mesh, VertexId v, OpContext* ctx) {
  for (TetId t = 0; t < mesh.tets.size(); t++)
    if (!mesh.tets[t].deleted && mesh.tets[t].has_vertex(v))
      return smooth_vertex(mesh, v, t, ctx);
  throw Error("smooth_vertex: vertex has no live tet");
}

}  // namespace tetopt
