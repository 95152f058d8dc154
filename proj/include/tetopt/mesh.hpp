#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <unordered_set>
#include <vector>

#include <Eigen/Core>

namespace tetopt {

using VertexId = std::uint32_t;
using TetId = std::uint32_t;
inline constexpr TetId kNoTet = 0xFFFFFFFFu;

struct Vertex {
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  std::uint64_t moore_index = 0;
  bool on_boundary = false;
};

/// Corner indices of facet i (the facet opposite vertex i), wound so the
/// facet normal points out of a positively oriented tetrahedron.
inline constexpr int kFacetCorner[4][3] = {{1, 2, 3}, {0, 3, 2}, {0, 1, 3}, {0, 2, 1}};

struct Tetrahedron {
  std::array<VertexId, 4> v = {0, 0, 0, 0};
  std::array<TetId, 4> neighbor = {kNoTet, kNoTet, kNoTet, kNoTet};  // neighbor[i] across facet opposite v[i]
  double quality = 0.0;  // cached gamma
  bool deleted = true;

  bool has_vertex(VertexId p) const {
    return v[0] == p || v[1] == p || v[2] == p || v[3] == p;
  }
  int vertex_slot(VertexId p) const {
    for (int i = 0; i < 4; i++)
      if (v[i] == p) return i;
    return -1;
  }
};

/// Sorted vertex triple; facets are matched by this key, orientation is
/// carried by the winding of the tetrahedron that owns them.
struct TriKey {
  std::array<VertexId, 3> v;

  TriKey(VertexId a, VertexId b, VertexId c) : v{a, b, c} {
    if (v[0] > v[1]) std::swap(v[0], v[1]);
    if (v[1] > v[2]) std::swap(v[1], v[2]);
    if (v[0] > v[1]) std::swap(v[0], v[1]);
  }
  bool operator==(const TriKey& o) const { return v == o.v; }
};

struct TriKeyHash {
  std::size_t operator()(const TriKey& k) const {
    std::uint64_t h = 0x9e3779b97f4a7c15ull;
    for (VertexId x : k.v) {
      h ^= x + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
      h *= 0xff51afd7ed558ccdull;
    }
    return static_cast<std::size_t>(h);
  }
};

using SurfaceSet = std::unordered_set<TriKey, TriKeyHash>;

class Mesh {
 public:
  std::vector<Vertex> vertices;
  std::vector<Tetrahedron> tets;
  SurfaceSet surface;  // constrained triangles; never modified by improvement

  const Eigen::Vector3d& point(VertexId p) const { return vertices[p].position; }
  const Eigen::Vector3d& tet_point(TetId t, int corner) const {
    return vertices[tets[t].v[corner]].position;
  }

  bool is_constrained(VertexId a, VertexId b, VertexId c) const {
    return surface.count(TriKey(a, b, c)) != 0;
  }

  std::size_t live_tets() const;
  double total_volume() const;

  double signed_volume6(TetId t) const;
  /// Recompute and cache gamma for one tet.
  void refresh_quality(TetId t);
  void refresh_all_qualities();

  /// Facet slot of tet t whose vertex triple matches key, or -1.
  int facet_slot(TetId t, const TriKey& key) const;
};

/// Preallocated tet-slot range; replace_cavity draws new slots from it when
/// given one, so concurrent workers never touch the vector itself.
struct SlotRange {
  TetId next = 0;
  TetId end = 0;
};

struct OwnershipView {
  const std::vector<std::int32_t>* owner_of = nullptr;  // partition id per tet, -1 = none
  std::int32_t self = -1;
  TetId arena_begin = 0;  // slots this worker created during the sweep
  TetId arena_end = 0;

  bool owned(TetId t) const {
    if (owner_of == nullptr) return true;
    if (t < owner_of->size()) return (*owner_of)[t] == self;
    return t >= arena_begin && t < arena_end;
  }
  bool restricted() const { return owner_of != nullptr; }
};

struct OpContext {
  SlotRange* arena = nullptr;            // null: allocate with push_back
  OwnershipView owner;                   // default: unrestricted
  std::vector<TetId>* touched = nullptr; // mutated tet slots, for diagnostics
};

struct Cavity {
  std::vector<TetId> tets;
  std::vector<std::array<VertexId, 3>> boundary_facets;  // outward winding
  std::vector<TetId> boundary_outside;                   // tet beyond each facet, kNoTet on mesh boundary
  std::vector<int> boundary_outside_slot;                // facet slot in that tet, -1 on boundary
  std::vector<VertexId> interior_points;
  std::vector<VertexId> all_points;
};

/// Populate neighbor links by matching facets on sorted vertex triples.
/// Throws NonManifoldFacet if a facet is claimed by three tetrahedra.
void build_adjacency(Mesh& mesh);

/// Gather a face-connected set of live tets into a Cavity with its closed
/// outward shell, interior points, and full point set. The mesh is not
/// modified. Throws DisconnectedSeed / OpenShell.
Cavity extract_cavity(const Mesh& mesh, std::span<const TetId> tet_set);

/// Atomically replace the cavity's tets with new_tets. The patch must tile
/// exactly the cavity volume with positively oriented tets on cavity points;
/// adjacency is relinked inside the patch and across the shell. Returns the
/// slots of the inserted tets.
std::vector<TetId> replace_cavity(Mesh& mesh, const Cavity& cavity,
                                  std::span<const std::array<VertexId, 4>> new_tets,
                                  OpContext* ctx = nullptr);

/// Live tets with cached quality < q_min, ascending slot order.
std::vector<TetId> get_bad_tetrahedra(const Mesh& mesh, double q_min);

/// Min cached gamma over a tet set; throws EmptySet.
double cavity_quality(const Mesh& mesh, std::span<const TetId> tet_set);

/// All live tets incident to vertex v, found by walking facet adjacency
/// from a seed tet that contains v.
std::vector<TetId> tets_around_vertex(const Mesh& mesh, VertexId v, TetId seed);

/// Drop tombstoned slots and remap neighbor links. Slot order of survivors
/// is preserved.
void compact(Mesh& mesh);

/// Full adjacency audit: symmetry, two live owners per interior facet,
/// matching vertex triples. Throws on violation.
void audit_adjacency(const Mesh& mesh);

/// Throws if any live tet is not positively oriented.
void audit_positive(const Mesh& mesh);

}  // namespace tetopt
