#pragma once

#include <cstdint>
#include <vector>

#include "tetopt/local_ops.hpp"
#include "tetopt/mesh.hpp"
#include "tetopt/spr.hpp"

namespace tetopt {

/// Tets sharing at least one facet with the cavity, and the growth tallies
/// of every point of those tets that is not yet in the cavity: m = how many
/// front tets touch the point, quality_sum = the sum of their gammas.
struct GrowthFront {
  std::vector<TetId> adjacent_tets;
  struct Candidate {
    VertexId point;
    int m = 0;
    double quality_sum = 0.0;
  };
  std::vector<Candidate> candidates;  // ordered by the growth tiebreak ladder
};

/// Cavity under growth; `points` keeps arrival order so the SPR memo stays
/// valid across extensions.
struct GrowingCavity {
  std::vector<TetId> tets;
  std::vector<VertexId> points;
};

/// Front of the given cavity with candidates sorted by (max m, min
/// quality_sum, min vertex id).
GrowthFront compute_growth_front(const Mesh& mesh, const GrowingCavity& cavity);

/// Add the best admissible candidate point and the closure of tets whose
/// four vertices all lie in the grown point set. Candidates that would trap
/// a constrained triangle inside the cavity, or break face-connectivity,
/// are skipped. Throws NoCandidate when nothing is admissible.
VertexId extend_cavity(const Mesh& mesh, GrowingCavity& cavity, const GrowthFront& front);

struct GscOptions {
  std::uint64_t spr_node_budget = 100000;
  int max_points = SprEngine::kMaxPoints;
};

struct GscStats {
  int points_reached = 0;
  int spr_calls = 0;
  bool improved = false;
};

/// Algorithm: grow the cavity from the seed one point at a time, running the
/// cavity-retiling search after each extension with the cavity's current min
/// quality as the floor; apply the first strictly better tiling. Gives up
/// once the cavity reaches max_points.
OpStatus gsc(Mesh& mesh, TetId seed, SprEngine& engine, const GscOptions& options = {},
             OpContext* ctx = nullptr, GscStats* stats = nullptr);

}  // namespace tetopt
