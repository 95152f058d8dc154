#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "tetopt/mesh.hpp"

namespace tetopt {

/// Outcome of a local improvement attempt. Rejected means the operation ran
/// but would not strictly improve quality; Suspended means its footprint
/// crossed the caller's partition and nothing was touched.
enum class OpStatus { Applied, Rejected, Suspended };

/// All triangulations of the convex N-gon for one ring size.
struct PolygonTriangulations {
  int n = 0;
  /// Each triangulation is n-2 index triples (i<j<k) into the ring.
  std::vector<std::vector<std::array<int, 3>>> triangulations;
  /// Bit t set: triangulation t contains the triple keyed by (i<<6)|(j<<3)|k.
  std::array<std::uint64_t, 512> triangle_mask{};

  std::uint64_t mask_of(int i, int j, int k) const {
    return triangle_mask[(i << 6) | (j << 3) | k];
  }
};

struct TriangulationTable {
  std::array<PolygonTriangulations, 5> by_ring_size;  // N = 3..7
  const PolygonTriangulations& ring(int n) const { return by_ring_size[n - 3]; }
};

/// Enumerate all polygon triangulations for N = 3..7 and their membership
/// bitmasks. Table sizes are the Catalan numbers 1, 2, 5, 14, 42.
TriangulationTable build_triangulation_tables();

/// Shared immutable instance.
const TriangulationTable& triangulation_tables();

/// The N tetrahedra around an interior edge and the ring of opposite
/// vertices in cyclic order, oriented so that tets (b, a, ring[i],
/// ring[i+1]) are positive.
struct EdgeRing {
  VertexId a = 0;
  VertexId b = 0;
  std::vector<VertexId> ring;
  std::vector<TetId> ring_tets;
};

/// Walk around edge (a,b) starting from a tet that contains it. Returns
/// nothing when the edge is on the mesh boundary (the ring does not close).
std::optional<EdgeRing> build_edge_ring(const Mesh& mesh, VertexId a, VertexId b,
                                        TetId seed);

/// 2-3 flip across the facet shared by ta and tb; applied only when the
/// three-tet retiling is valid and strictly raises the pair's min quality.
/// Throws NotAdjacent / ConstrainedFacet.
OpStatus flip_2_3(Mesh& mesh, TetId ta, TetId tb, OpContext* ctx = nullptr);

/// 3-2 flip of an N=3 ring, built directly (no tables); decision-equivalent
/// to edge_removal on the same ring.
OpStatus flip_3_2(Mesh& mesh, const EdgeRing& ring, OpContext* ctx = nullptr);

/// Table-driven edge removal for interior edges with 3 <= N <= 7 ring tets.
/// Sandwich triangles at or below the current ring quality are marked bad,
/// triangulations containing them are discarded through the bitmask, and the
/// best survivor is applied. seed must be a live tet containing the edge.
OpStatus edge_removal(Mesh& mesh, VertexId a, VertexId b, TetId seed,
                      OpContext* ctx = nullptr);

/// Convenience overload that scans for a tet containing the edge.
OpStatus edge_removal(Mesh& mesh, VertexId a, VertexId b, OpContext* ctx = nullptr);

/// Optimized Laplacian smoothing: golden-section line search toward the
/// centroid of the edge-connected neighbors, maximizing the min quality of
/// the incident tets. Throws BoundaryVertex for constrained vertices.
OpStatus smooth_vertex(Mesh& mesh, VertexId v, TetId seed, OpContext* ctx = nullptr);
OpStatus smooth_vertex(Mesh& mesh, VertexId v, OpContext* ctx = nullptr);

}  // namespace tetopt
