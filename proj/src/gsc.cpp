#include "tetopt/gsc.hpp"

#include <algorithm>
#include <unordered_set>

#include "tetopt/errors.hpp"

namespace tetopt {
namespace {

bool contains(const std::vector<VertexId>& small, VertexId v) {
  return std::find(small.begin(), small.end(), v) != small.end();
}

// Live tets around p whose remaining vertices are all cavity points. The
// ball walk checks ownership before reading any tet, so partitioned workers
// never look into foreign territory.
bool closure_tets_of_point(const Mesh& mesh, VertexId p, TetId seed_tet,
                           const std::vector<VertexId>& cavity_points,
                           const OpContext* ctx, std::vector<TetId>& closure) {
  closure.clear();
  std::vector<TetId> ball = {seed_tet};
  std::vector<TetId> stack = {seed_tet};
  while (!stack.empty()) {
    const TetId t = stack.back();
    stack.pop_back();

    bool all_in = true;
    for (VertexId v : mesh.tets[t].v)
      if (v != p && !contains(cavity_points, v)) all_in = false;
    if (all_in) closure.push_back(t);

    const int pslot = mesh.tets[t].vertex_slot(p);
    for (int i = 0; i < 4; i++) {
      if (i == pslot) continue;
      const TetId n = mesh.tets[t].neighbor[i];
      if (n == kNoTet) continue;
      if (std::find(ball.begin(), ball.end(), n) != ball.end()) continue;
      if (ctx != nullptr && !ctx->owner.owned(n)) return false;
      ball.push_back(n);
      stack.push_back(n);
    }
  }
  std::sort(closure.begin(), closure.end());
  return true;
}

// Would growing by `added` strictly enclose a constrained triangle?
bool traps_constrained_facet(const Mesh& mesh, const std::vector<TetId>& cavity_tets,
                             const std::vector<TetId>& added) {
  auto in_new_cavity = [&](TetId t) {
    return std::binary_search(cavity_tets.begin(), cavity_tets.end(), t) ||
           std::binary_search(added.begin(), added.end(), t);
  };
  for (TetId t : added) {
    const Tetrahedron& tet = mesh.tets[t];
    for (int f = 0; f < 4; f++) {
      const TetId n = tet.neighbor[f];
      if (n == kNoTet || !in_new_cavity(n)) continue;
      if (mesh.is_constrained(tet.v[kFacetCorner[f][0]], tet.v[kFacetCorner[f][1]],
                              tet.v[kFacetCorner[f][2]]))
        return true;
    }
  }
  return false;
}

bool face_connected(const Mesh& mesh, const std::vector<TetId>& members) {
  std::unordered_set<TetId> in(members.begin(), members.end());
  std::vector<TetId> stack = {members[0]};
  std::unordered_set<TetId> seen = {members[0]};
  while (!stack.empty()) {
    const TetId t = stack.back();
    stack.pop_back();
    for (TetId n : mesh.tets[t].neighbor)
      if (n != kNoTet && in.count(n) && seen.insert(n).second) stack.push_back(n);
  }
  return seen.size() == members.size();
}

enum class ExtendOutcome { Extended, NoAdmissible, Suspended };

ExtendOutcome try_extend(const Mesh& mesh, GrowingCavity& cavity,
                         const GrowthFront& front, const OpContext* ctx,
                         VertexId& added) {
  std::vector<TetId> closure;
  for (const auto& candidate : front.candidates) {
    TetId seed_tet = kNoTet;
    for (TetId t : front.adjacent_tets)
      if (mesh.tets[t].has_vertex(candidate.point)) {
        seed_tet = t;
        break;
      }
    if (seed_tet == kNoTet) continue;

    if (!closure_tets_of_point(mesh, candidate.point, seed_tet, cavity.points, ctx,
                               closure))
      return ExtendOutcome::Suspended;
    if (closure.empty()) continue;
    if (traps_constrained_facet(mesh, cavity.tets, closure)) continue;

    std::vector<TetId> grown = cavity.tets;
    grown.insert(grown.end(), closure.begin(), closure.end());
    std::sort(grown.begin(), grown.end());
    if (!face_connected(mesh, grown)) continue;

    cavity.tets = std::move(grown);
    cavity.points.push_back(candidate.point);
    added = candidate.point;
    return ExtendOutcome::Extended;
  }
  return ExtendOutcome::NoAdmissible;
}

}  // namespace

GrowthFront compute_growth_front(const Mesh& mesh, const GrowingCavity& cavity) {
  GrowthFront front;
  for (TetId t : cavity.tets)
    for (TetId n : mesh.tets[t].neighbor) {
      if (n == kNoTet) continue;
      if (std::binary_search(cavity.tets.begin(), cavity.tets.end(), n)) continue;
      if (std::find(front.adjacent_tets.begin(), front.adjacent_tets.end(), n) ==
          front.adjacent_tets.end())
        front.adjacent_tets.push_back(n);
    }
  std::sort(front.adjacent_tets.begin(), front.adjacent_tets.end());

  for (TetId t : front.adjacent_tets)
    for (VertexId v : mesh.tets[t].v) {
      if (contains(cavity.points, v)) continue;
      auto it = std::find_if(front.candidates.begin(), front.candidates.end(),
                             [&](const GrowthFront::Candidate& c) { return c.point == v; });
      if (it == front.candidates.end()) {
        front.candidates.push_back({v, 1, mesh.tets[t].quality});
      } else {
        it->m += 1;
        it->quality_sum += mesh.tets[t].quality;
      }
    }

  // most connected point first; lowest quality sum, then lowest id, breaks ties
  std::sort(front.candidates.begin(), front.candidates.end(),
            [](const GrowthFront::Candidate& a, const GrowthFront::Candidate& b) {
              if (a.m != b.m) return a.m > b.m;
              if (a.quality_sum != b.quality_sum) return a.quality_sum < b.quality_sum;
              return a.point < b.point;
            });
  return front;
}

VertexId extend_cavity(const Mesh& mesh, GrowingCavity& cavity, const GrowthFront& front) {
  VertexId added = kNoTet;
  if (try_extend(mesh, cavity, front, nullptr, added) != ExtendOutcome::Extended)
    throw NoCandidate("extend_cavity: no admissible growth point");
  return added;
}

OpStatus gsc(Mesh& mesh, TetId seed, SprEngine& engine, const GscOptions& options,
             OpContext* ctx, GscStats* stats) {
  if (seed >= mesh.tets.size() || mesh.tets[seed].deleted)
    throw Error("gsc: dead seed tet");
  if (ctx != nullptr && !ctx->owner.owned(seed)) return OpStatus::Suspended;

  GrowingCavity cavity;
  cavity.tets = {seed};
  cavity.points.assign(mesh.tets[seed].v.begin(), mesh.tets[seed].v.end());
  std::sort(cavity.points.begin(), cavity.points.end());

  engine.reset_memo();
  std::vector<Eigen::Vector3d> positions;
  positions.reserve(options.max_points);
  for (VertexId v : cavity.points) positions.push_back(mesh.point(v));

  if (stats != nullptr) *stats = {};

  for (;;) {
    const int n = static_cast<int>(cavity.points.size());
    if (stats != nullptr) stats->points_reached = n;

    const Cavity cav = extract_cavity(mesh, cavity.tets);
    if (ctx != nullptr)
      for (TetId outside : cav.boundary_outside)
        if (outside != kNoTet && !ctx->owner.owned(outside)) return OpStatus::Suspended;

    if (n > 4) {
      // local indexing by arrival order keeps the memo valid across growth
      std::vector<std::array<int, 3>> shell;
      shell.reserve(cav.boundary_facets.size());
      auto local_of = [&](VertexId v) {
        return static_cast<int>(std::find(cavity.points.begin(), cavity.points.end(), v) -
                                cavity.points.begin());
      };
      for (const auto& f : cav.boundary_facets)
        shell.push_back({local_of(f[0]), local_of(f[2]), local_of(f[1])});

      const double floor = cavity_quality(mesh, cavity.tets);
      const SprResult found =
          engine.search(positions, shell, floor, options.spr_node_budget);
      if (stats != nullptr) stats->spr_calls++;

      if (found.status == SprStatus::Improved) {
        std::vector<std::array<VertexId, 4>> patch;
        patch.reserve(found.tets.size());
        for (const auto& t : found.tets)
          patch.push_back({cavity.points[t[0]], cavity.points[t[1]], cavity.points[t[2]],
                           cavity.points[t[3]]});
        replace_cavity(mesh, cav, patch, ctx);
        if (stats != nullptr) stats->improved = true;
        return OpStatus::Applied;
      }
      // budget exhaustion counts as no improvement at this size; keep growing
    }

    if (n >= options.max_points) return OpStatus::Rejected;

    const GrowthFront front = compute_growth_front(mesh, cavity);
    VertexId added = kNoTet;
    switch (try_extend(mesh, cavity, front, ctx, added)) {
      case ExtendOutcome::Suspended:
        return OpStatus::Suspended;
      case ExtendOutcome::NoAdmissible:
        return OpStatus::Rejected;
      case ExtendOutcome::Extended:
        break;
    }
    positions.push_back(mesh.point(added));
  }
}

}  // namespace tetopt
