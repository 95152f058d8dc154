#pragma once

#include <cstdint>
#include <vector>

#include "tetopt/mesh.hpp"
#include "tetopt/moore.hpp"

namespace tetopt {

/// One worker's share of a sweep: a contiguous Moore-index interval. A tet
/// belongs to the partition iff at least 3 of its 4 vertices' Moore indices
/// fall inside the interval.
struct Partition {
  std::uint64_t moore_begin = 0;
  std::uint64_t moore_end = 0;  // half-open
  std::size_t owned_bad_tets = 0;
  int worker_id = 0;
};

enum class SweepPhase { Ser, Gsc };

struct SweepStats {
  SweepPhase phase = SweepPhase::Ser;
  int workers = 1;
  std::size_t attempted = 0;
  std::size_t applied = 0;
  std::size_t suspended = 0;
  double rho = 0.0;  // suspended / attempted
};

struct ImproveOptions {
  double q_min = 0.35;
  int max_workers = 1;
  bool reproducible = false;
  std::uint64_t spr_node_budget = 100000;
  int moore_order = kMooreOrder;
};

struct ImproveResult {
  std::vector<SweepStats> sweeps;
  std::size_t bad_before = 0;
  std::size_t bad_after = 0;
  std::size_t applied_total = 0;
};

struct PartitionAssignment {
  std::vector<Partition> partitions;
  std::vector<std::int32_t> owner_of;          // partition id per tet slot, -1 = none
  std::vector<std::vector<TetId>> owned_bad;   // bad tets per partition, ascending
  std::vector<TetId> suspended_pool;           // bad tets no partition owns
};

/// Cut the Moore index range into k contiguous intervals so the bad tets
/// are split evenly, then assign every live tet by the 3-of-4 vertex rule.
/// Vertex Moore indices are refreshed from the current positions.
PartitionAssignment make_partitions(Mesh& mesh, std::span<const TetId> bad_tets, int k,
                                    int order = kMooreOrder);

/// Run the full improvement schedule: repeated smoothing/edge-removal
/// sweeps until quiescent, then a growing-cavity sweep, repeated until the
/// growing-cavity sweep makes no modification. Sweeps run on up to
/// max_workers partition-owned workers with suspension and retry.
ImproveResult improve(Mesh& mesh, const ImproveOptions& options);

inline ImproveResult improve(Mesh& mesh, double q_min, int max_workers = 1,
                             bool reproducible = false) {
  ImproveOptions opt;
  opt.q_min = q_min;
  opt.max_workers = max_workers;
  opt.reproducible = reproducible;
  return improve(mesh, opt);
}

/// Canonical tetrahedron order: sort live tets by the lexicographic order
/// of their sorted vertex tuples, drop tombstones, relink adjacency.
void reproducible_reorder(Mesh& mesh);

}  // namespace tetopt
