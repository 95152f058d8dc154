#include "tetopt/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <unordered_map>

#include "tetopt/errors.hpp"
#include "tetopt/predicates.hpp"
#include "tetopt/quality.hpp"

namespace tetopt {

std::size_t Mesh::live_tets() const {
  std::size_t n = 0;
  for (const auto& t : tets)
    if (!t.deleted) n++;
  return n;
}

double Mesh::total_volume() const {
  double v6 = 0.0;
  for (TetId t = 0; t < tets.size(); t++)
    if (!tets[t].deleted) v6 += signed_volume6(t);
  return v6 / 6.0;
}

double Mesh::signed_volume6(TetId t) const {
  return tetopt::signed_volume6(tet_point(t, 0), tet_point(t, 1), tet_point(t, 2),
                                tet_point(t, 3));
}

void Mesh::refresh_quality(TetId t) {
  tets[t].quality = tet_gamma(tet_point(t, 0), tet_point(t, 1), tet_point(t, 2),
                              tet_point(t, 3));
}

void Mesh::refresh_all_qualities() {
  for (TetId t = 0; t < tets.size(); t++)
    if (!tets[t].deleted) refresh_quality(t);
}

int Mesh::facet_slot(TetId t, const TriKey& key) const {
  const Tetrahedron& tet = tets[t];
  for (int i = 0; i < 4; i++) {
    if (TriKey(tet.v[kFacetCorner[i][0]], tet.v[kFacetCorner[i][1]],
               tet.v[kFacetCorner[i][2]]) == key)
      return i;
  }
  return -1;
}

void build_adjacency(Mesh& mesh) {
  std::unordered_map<TriKey, std::pair<TetId, int>, TriKeyHash> open;
  open.reserve(mesh.tets.size() * 2);

  for (TetId t = 0; t < mesh.tets.size(); t++) {
    Tetrahedron& tet = mesh.tets[t];
    if (tet.deleted) continue;
    tet.neighbor = {kNoTet, kNoTet, kNoTet, kNoTet};
    for (int i = 0; i < 4; i++) {
      const TriKey key(tet.v[kFacetCorner[i][0]], tet.v[kFacetCorner[i][1]],
                       tet.v[kFacetCorner[i][2]]);
      auto it = open.find(key);
      if (it == open.end()) {
        open.emplace(key, std::make_pair(t, i));
      } else if (it->second.first == kNoTet) {
        throw NonManifoldFacet("facet (" + std::to_string(key.v[0]) + "," +
                               std::to_string(key.v[1]) + "," + std::to_string(key.v[2]) +
                               ") claimed by three tetrahedra");
      } else {
        const auto [other, slot] = it->second;
        mesh.tets[other].neighbor[slot] = t;
        tet.neighbor[i] = other;
        it->second.first = kNoTet;  // paired; a third claim is non-manifold
      }
    }
  }
}

namespace {

struct EdgeKey {
  VertexId a, b;
  EdgeKey(VertexId x, VertexId y) : a(std::min(x, y)), b(std::max(x, y)) {}
  bool operator==(const EdgeKey& o) const { return a == o.a && b == o.b; }
};
struct EdgeKeyHash {
  std::size_t operator()(const EdgeKey& k) const {
    return std::hash<std::uint64_t>()((std::uint64_t(k.a) << 32) | k.b);
  }
};

}  // namespace

Cavity extract_cavity(const Mesh& mesh, std::span<const TetId> tet_set) {
  if (tet_set.empty()) throw EmptySet("extract_cavity: empty tet set");

  std::vector<TetId> members(tet_set.begin(), tet_set.end());
  std::sort(members.begin(), members.end());
  members.erase(std::unique(members.begin(), members.end()), members.end());

  auto in_set = [&](TetId t) {
    return std::binary_search(members.begin(), members.end(), t);
  };
  for (TetId t : members)
    if (t >= mesh.tets.size() || mesh.tets[t].deleted)
      throw DisconnectedSeed("extract_cavity: dead tet in seed set");

  // Face-connectivity by BFS inside the set.
  std::vector<TetId> stack = {members[0]};
  std::unordered_set<TetId> seen = {members[0]};
  while (!stack.empty()) {
    const TetId t = stack.back();
    stack.pop_back();
    for (TetId n : mesh.tets[t].neighbor) {
      if (n != kNoTet && in_set(n) && seen.insert(n).second) stack.push_back(n);
    }
  }
  if (seen.size() != members.size())
    throw DisconnectedSeed("extract_cavity: tet set is not face-connected");

  Cavity cav;
  cav.tets = members;

  std::unordered_map<EdgeKey, int, EdgeKeyHash> edge_use;
  for (TetId t : members) {
    const Tetrahedron& tet = mesh.tets[t];
    for (int i = 0; i < 4; i++) {
      const TetId n = tet.neighbor[i];
      if (n != kNoTet && in_set(n)) continue;
      const std::array<VertexId, 3> f = {tet.v[kFacetCorner[i][0]],
                                         tet.v[kFacetCorner[i][1]],
                                         tet.v[kFacetCorner[i][2]]};
      cav.boundary_facets.push_back(f);
      cav.boundary_outside.push_back(n);
      int back = -1;
      if (n != kNoTet) {
        for (int j = 0; j < 4; j++)
          if (mesh.tets[n].neighbor[j] == t) back = j;
      }
      cav.boundary_outside_slot.push_back(back);
      for (int e = 0; e < 3; e++) edge_use[EdgeKey(f[e], f[(e + 1) % 3])] += 1;
    }
    for (VertexId p : tet.v) cav.all_points.push_back(p);
  }

  for (const auto& [edge, count] : edge_use) {
    if (count != 2)
      throw OpenShell("extract_cavity: shell edge shared by " + std::to_string(count) +
                      " facets");
  }

  std::sort(cav.all_points.begin(), cav.all_points.end());
  cav.all_points.erase(std::unique(cav.all_points.begin(), cav.all_points.end()),
                       cav.all_points.end());

  std::unordered_set<VertexId> on_shell;
  for (const auto& f : cav.boundary_facets) on_shell.insert(f.begin(), f.end());
  for (VertexId p : cav.all_points)
    if (!on_shell.count(p)) cav.interior_points.push_back(p);

  return cav;
}

std::vector<TetId> replace_cavity(Mesh& mesh, const Cavity& cavity,
                                  std::span<const std::array<VertexId, 4>> new_tets,
                                  OpContext* ctx) {
  if (new_tets.empty()) throw ShellMismatch("replace_cavity: empty patch");

  for (const auto& nt : new_tets) {
    for (VertexId p : nt)
      if (!std::binary_search(cavity.all_points.begin(), cavity.all_points.end(), p))
        throw ShellMismatch("replace_cavity: patch uses a point outside the cavity");
    if (orient3d_sign(mesh.point(nt[0]), mesh.point(nt[1]), mesh.point(nt[2]),
                      mesh.point(nt[3])) <= 0)
      throw OrientationViolation("replace_cavity: non-positive tet in patch");
  }

  double old_v6 = 0.0;
  for (TetId t : cavity.tets) old_v6 += mesh.signed_volume6(t);
  double new_v6 = 0.0;
  for (const auto& nt : new_tets)
    new_v6 += tetopt::signed_volume6(mesh.point(nt[0]), mesh.point(nt[1]),
                                     mesh.point(nt[2]), mesh.point(nt[3]));
  if (std::fabs(new_v6 - old_v6) > 1e-9 * std::fabs(old_v6))
    throw VolumeMismatch("replace_cavity: patch volume differs from cavity volume");

  // Match patch facets: internal pairs link to each other, single facets
  // must cover the shell exactly.
  struct Claim {
    int patch_tet;
    int slot;
  };
  std::unordered_map<TriKey, std::vector<Claim>, TriKeyHash> facets;
  for (int i = 0; i < static_cast<int>(new_tets.size()); i++) {
    for (int f = 0; f < 4; f++) {
      const TriKey key(new_tets[i][kFacetCorner[f][0]], new_tets[i][kFacetCorner[f][1]],
                       new_tets[i][kFacetCorner[f][2]]);
      auto& claims = facets[key];
      claims.push_back({i, f});
      if (claims.size() > 2)
        throw ShellMismatch("replace_cavity: facet claimed three times in patch");
    }
  }

  std::unordered_map<TriKey, int, TriKeyHash> shell;
  for (int s = 0; s < static_cast<int>(cavity.boundary_facets.size()); s++) {
    const auto& f = cavity.boundary_facets[s];
    shell.emplace(TriKey(f[0], f[1], f[2]), s);
  }

  std::size_t boundary_count = 0;
  for (const auto& [key, claims] : facets) {
    if (claims.size() == 1) {
      boundary_count++;
      if (!shell.count(key))
        throw ShellMismatch("replace_cavity: patch boundary differs from cavity shell");
    }
  }
  if (boundary_count != shell.size())
    throw ShellMismatch("replace_cavity: patch boundary misses shell facets");

  // All checks passed; mutate.
  std::vector<TetId> slots(new_tets.size());
  for (std::size_t i = 0; i < new_tets.size(); i++) {
    TetId id;
    if (ctx != nullptr && ctx->arena != nullptr) {
      if (ctx->arena->next >= ctx->arena->end)
        throw Error("replace_cavity: worker slot arena exhausted");
      id = ctx->arena->next++;
    } else {
      id = static_cast<TetId>(mesh.tets.size());
      mesh.tets.emplace_back();
    }
    Tetrahedron& tet = mesh.tets[id];
    tet.v = new_tets[i];
    tet.neighbor = {kNoTet, kNoTet, kNoTet, kNoTet};
    tet.deleted = false;
    mesh.refresh_quality(id);
    slots[i] = id;
  }

  for (const auto& [key, claims] : facets) {
    if (claims.size() == 2) {
      mesh.tets[slots[claims[0].patch_tet]].neighbor[claims[0].slot] =
          slots[claims[1].patch_tet];
      mesh.tets[slots[claims[1].patch_tet]].neighbor[claims[1].slot] =
          slots[claims[0].patch_tet];
    } else {
      const int s = shell.at(key);
      const TetId outside = cavity.boundary_outside[s];
      mesh.tets[slots[claims[0].patch_tet]].neighbor[claims[0].slot] = outside;
      if (outside != kNoTet)
        mesh.tets[outside].neighbor[cavity.boundary_outside_slot[s]] =
            slots[claims[0].patch_tet];
    }
  }

  for (TetId t : cavity.tets) {
    mesh.tets[t].deleted = true;
    mesh.tets[t].neighbor = {kNoTet, kNoTet, kNoTet, kNoTet};
  }

  if (ctx != nullptr && ctx->touched != nullptr) {
    auto& log = *ctx->touched;
    log.insert(log.end(), cavity.tets.begin(), cavity.tets.end());
    log.insert(log.end(), slots.begin(), slots.end());
    for (TetId t : cavity.boundary_outside)
      if (t != kNoTet) log.push_back(t);
  }

  return slots;
}

std::vector<TetId> get_bad_tetrahedra(const Mesh& mesh, double q_min) {
  std::vector<TetId> bad;
  for (TetId t = 0; t < mesh.tets.size(); t++)
    if (!mesh.tets[t].deleted && mesh.tets[t].quality < q_min) bad.push_back(t);
  return bad;
}

double cavity_quality(const Mesh& mesh, std::span<const TetId> tet_set) {
  if (tet_set.empty()) throw EmptySet("cavity_quality: empty set");
  double q = mesh.tets[tet_set[0]].quality;
  for (TetId t : tet_set) q = std::min(q, mesh.tets[t].quality);
  return q;
}

std::vector<TetId> tets_around_vertex(const Mesh& mesh, VertexId v, TetId seed) {
  if (seed == kNoTet || mesh.tets[seed].deleted || !mesh.tets[seed].has_vertex(v))
    throw Error("tets_around_vertex: seed does not contain the vertex");
  std::vector<TetId> ball = {seed};
  std::vector<TetId> stack = {seed};
  while (!stack.empty()) {
    const TetId t = stack.back();
    stack.pop_back();
    const Tetrahedron& tet = mesh.tets[t];
    const int vslot = tet.vertex_slot(v);
    for (int i = 0; i < 4; i++) {
      if (i == vslot) continue;  // that facet does not contain v
      const TetId n = tet.neighbor[i];
      if (n == kNoTet) continue;
      if (std::find(ball.begin(), ball.end(), n) == ball.end()) {
        ball.push_back(n);
        stack.push_back(n);
      }
    }
  }
  return ball;
}

void compact(Mesh& mesh) {
  std::vector<TetId> remap(mesh.tets.size(), kNoTet);
  TetId next = 0;
  for (TetId t = 0; t < mesh.tets.size(); t++)
    if (!mesh.tets[t].deleted) remap[t] = next++;

  std::vector<Tetrahedron> packed(next);
  for (TetId t = 0; t < mesh.tets.size(); t++) {
    if (mesh.tets[t].deleted) continue;
    Tetrahedron tet = mesh.tets[t];
    for (auto& n : tet.neighbor)
      if (n != kNoTet) n = remap[n];
    packed[remap[t]] = tet;
  }
  mesh.tets = std::move(packed);
}

void audit_adjacency(const Mesh& mesh) {
  std::unordered_map<TriKey, int, TriKeyHash> claims;
  for (TetId t = 0; t < mesh.tets.size(); t++) {
    const Tetrahedron& tet = mesh.tets[t];
    if (tet.deleted) continue;
    for (int i = 0; i < 4; i++) {
      const TriKey key(tet.v[kFacetCorner[i][0]], tet.v[kFacetCorner[i][1]],
                       tet.v[kFacetCorner[i][2]]);
      claims[key] += 1;
      const TetId n = tet.neighbor[i];
      if (n == kNoTet) continue;
      if (n >= mesh.tets.size() || mesh.tets[n].deleted)
        throw Error("adjacency audit: link to dead tet");
      const int back = mesh.facet_slot(n, key);
      if (back < 0 || mesh.tets[n].neighbor[back] != t)
        throw Error("adjacency audit: asymmetric neighbor link");
    }
  }
  for (const auto& [key, count] : claims) {
    if (count > 2) throw Error("adjacency audit: facet with more than two owners");
  }
  for (const auto& key : mesh.surface) {
    auto it = claims.find(key);
    if (it == claims.end())
      throw Error("adjacency audit: constrained triangle is not a mesh facet");
  }
}

void audit_positive(const Mesh& mesh) {
  for (TetId t = 0; t < mesh.tets.size(); t++) {
    const Tetrahedron& tet = mesh.tets[t];
    if (tet.deleted) continue;
    if (orient3d_sign(mesh.point(tet.v[0]), mesh.point(tet.v[1]), mesh.point(tet.v[2]),
                      mesh.point(tet.v[3])) <= 0)
      throw OrientationViolation("audit: non-positive live tet " + std::to_string(t));
  }
}

}  // namespace tetopt
