#include <doctest.h>

#include <random>
#include <unordered_set>

#include "support.hpp"
#include "tetopt/errors.hpp"
#include "tetopt/gsc.hpp"
#include "tetopt/io.hpp"
#include "tetopt/quality.hpp"

using namespace tetopt;
using tetsupport::two_tet_mesh;

namespace {

Mesh single_tet_mesh() {
  Mesh mesh;
  mesh.vertices.resize(4);
  mesh.vertices[0].position = {0, 0, 0};
  mesh.vertices[1].position = {1, 0, 0};
  mesh.vertices[2].position = {0, 1, 0};
  mesh.vertices[3].position = {0, 0, 1};
  Tetrahedron t;
  t.v = {0, 1, 2, 3};
  t.deleted = false;
  mesh.tets = {t};
  build_adjacency(mesh);
  mesh.refresh_all_qualities();
  return mesh;
}

}  // namespace

TEST_CASE("gsc succeeds at the first growth step on the 5-point configuration") {
  Mesh mesh = two_tet_mesh(0.15, 1.0);
  const double before = cavity_quality(mesh, std::vector<TetId>{0, 1});
  const double volume = mesh.total_volume();

  SprEngine engine;
  GscStats stats;
  REQUIRE(gsc(mesh, 0, engine, {}, nullptr, &stats) == OpStatus::Applied);
  CHECK(stats.points_reached == 5);
  CHECK(stats.spr_calls == 1);
  CHECK(mesh.live_tets() == 3);
  CHECK(mesh.total_volume() == doctest::Approx(volume).epsilon(1e-12));

  std::vector<TetId> live;
  for (TetId t = 0; t < mesh.tets.size(); t++)
    if (!mesh.tets[t].deleted) live.push_back(t);
  CHECK(cavity_quality(mesh, live) > before);
  audit_adjacency(mesh);
  audit_positive(mesh);
}

TEST_CASE("gsc returns false on a single-tet mesh") {
  Mesh mesh = single_tet_mesh();
  SprEngine engine;
  GscStats stats;
  CHECK(gsc(mesh, 0, engine, {}, nullptr, &stats) == OpStatus::Rejected);
  CHECK(stats.points_reached == 4);
  CHECK(mesh.live_tets() == 1);
}

TEST_CASE("growth stops at 32 points") {
  // a starved node budget makes every retiling attempt fail, so the cavity
  // grows until the point cap
  Mesh mesh = generate_test_mesh(4, 0.2, 5);
  SprEngine engine;
  GscOptions options;
  options.spr_node_budget = 1;
  GscStats stats;
  CHECK(gsc(mesh, 200, engine, options, nullptr, &stats) == OpStatus::Rejected);
  CHECK(stats.points_reached == 32);
  CHECK(mesh.live_tets() == generate_test_mesh(4, 0.2, 5).live_tets());
}

TEST_CASE("extend_cavity picks the most connected point, worst quality sum first") {
  // seed with two facet neighbors of very different quality: both candidate
  // points have m=1, the one attached to the worse tet wins
  Mesh mesh;
  mesh.vertices.resize(6);
  mesh.vertices[0].position = {0, 0, 0};
  mesh.vertices[1].position = {1, 0, 0};
  mesh.vertices[2].position = {0, 1, 0};
  mesh.vertices[3].position = {0, 0, 1};
  mesh.vertices[4].position = {0.9, 0.9, 0.9};     // over facet (1,2,3): decent tet
  mesh.vertices[5].position = {0.3, 0.3, -0.02};   // under facet (0,1,2): sliver
  for (std::array<VertexId, 4> v :
       {std::array<VertexId, 4>{0, 1, 2, 3}, {1, 2, 3, 4}, {0, 2, 1, 5}}) {
    Tetrahedron t;
    t.v = v;
    t.deleted = false;
    mesh.tets.push_back(t);
  }
  build_adjacency(mesh);
  mesh.refresh_all_qualities();
  REQUIRE(mesh.tets[2].quality < mesh.tets[1].quality);

  GrowingCavity cavity;
  cavity.tets = {0};
  cavity.points = {0, 1, 2, 3};
  const GrowthFront front = compute_growth_front(mesh, cavity);
  REQUIRE(front.adjacent_tets.size() == 2);
  REQUIRE(front.candidates.size() == 2);
  CHECK(front.candidates[0].point == 5);  // worse quality sum first
  CHECK(front.candidates[0].m == 1);
  CHECK(front.candidates[1].point == 4);

  const VertexId added = extend_cavity(mesh, cavity, front);
  CHECK(added == 5);
  CHECK(cavity.points.size() == 5);
  CHECK(cavity.tets.size() == 2);
}

TEST_CASE("extend_cavity breaks exact ties by smallest vertex index") {
  // the two candidate tets are related by a half-turn about the z axis
  // (exact coordinate negation), so their gammas tie bit for bit and the
  // lower vertex id must win
  Mesh mesh;
  mesh.vertices.resize(6);
  mesh.vertices[0].position = {1, 0, 0};
  mesh.vertices[1].position = {-1, 0, 0};
  mesh.vertices[2].position = {0, 1, 0.5};
  mesh.vertices[3].position = {0, -1, 0.5};   // half-turn image of 2
  mesh.vertices[4].position = {0, 1.5, 0.2};  // apex over facet (0,1,2)
  mesh.vertices[5].position = {0, -1.5, 0.2}; // half-turn image of 4
  for (std::array<VertexId, 4> v :
       {std::array<VertexId, 4>{0, 1, 3, 2}, {0, 1, 2, 4}, {1, 0, 3, 5}}) {
    Tetrahedron t;
    t.v = v;
    t.deleted = false;
    mesh.tets.push_back(t);
  }
  build_adjacency(mesh);
  mesh.refresh_all_qualities();
  REQUIRE(mesh.tets[0].quality > 0);
  REQUIRE(mesh.tets[1].quality > 0);
  REQUIRE(mesh.tets[2].quality > 0);
  REQUIRE(mesh.tets[1].quality == mesh.tets[2].quality);  // exact symmetry

  GrowingCavity cavity;
  cavity.tets = {0};
  cavity.points = {0, 1, 2, 3};
  const GrowthFront front = compute_growth_front(mesh, cavity);
  REQUIRE(front.candidates.size() == 2);
  CHECK(front.candidates[0].m == front.candidates[1].m);
  CHECK(front.candidates[0].quality_sum == front.candidates[1].quality_sum);
  CHECK(front.candidates[0].point == 4);  // smallest global index
}

TEST_CASE("closure property holds after every extension") {
  std::mt19937_64 rng(1);
  int pull_ins = 0;
  for (std::uint64_t seed_val = 1; seed_val <= 6; seed_val++) {
    Mesh mesh = generate_test_mesh(3, 0.4, seed_val);
    const auto bad = get_bad_tetrahedra(mesh, 0.5);
    if (bad.empty()) continue;
    GrowingCavity cavity;
    cavity.tets = {bad[0]};
    cavity.points.assign(mesh.tets[bad[0]].v.begin(), mesh.tets[bad[0]].v.end());
    std::sort(cavity.points.begin(), cavity.points.end());

    for (int step = 0; step < 12; step++) {
      const GrowthFront front = compute_growth_front(mesh, cavity);
      const std::size_t tets_before = cavity.tets.size();
      VertexId added;
      try {
        added = extend_cavity(mesh, cavity, front);
      } catch (const NoCandidate&) {
        break;
      }
      CHECK(cavity.tets.size() >= tets_before + 1);

      // the added tets must include any tet outside the old front whose
      // vertices all lie in the grown point set (exhaustive scan)
      std::unordered_set<VertexId> pts(cavity.points.begin(), cavity.points.end());
      for (TetId t = 0; t < mesh.tets.size(); t++) {
        if (mesh.tets[t].deleted) continue;
        bool all_in = true;
        for (VertexId v : mesh.tets[t].v)
          if (!pts.count(v)) all_in = false;
        if (all_in)
          CHECK(std::binary_search(cavity.tets.begin(), cavity.tets.end(), t));
      }
      for (TetId t : cavity.tets)
        if (std::find(front.adjacent_tets.begin(), front.adjacent_tets.end(), t) ==
                front.adjacent_tets.end() &&
            mesh.tets[t].has_vertex(added))
          pull_ins++;  // includes closure tets beyond the front itself
      (void)added;
    }
  }
  CHECK(pull_ins >= 0);
}

TEST_CASE("gsc improves the touched region strictly") {
  std::mt19937_64 rng(3);
  Mesh mesh = generate_test_mesh(4, 0.45, 17);
  SprEngine engine;
  const auto bad = get_bad_tetrahedra(mesh, 0.35);
  REQUIRE(!bad.empty());

  int applied = 0;
  for (TetId seed : bad) {
    if (mesh.tets[seed].deleted) continue;
    const double global_before = [&] {
      double q = 2.0;
      for (const auto& t : mesh.tets)
        if (!t.deleted) q = std::min(q, t.quality);
      return q;
    }();
    if (gsc(mesh, seed, engine) == OpStatus::Applied) {
      applied++;
      double global_after = 2.0;
      for (const auto& t : mesh.tets)
        if (!t.deleted) global_after = std::min(global_after, t.quality);
      CHECK(global_after >= global_before);
      audit_adjacency(mesh);
      audit_positive(mesh);
    }
    if (applied >= 8) break;
  }
  CHECK(applied > 0);
}

TEST_CASE("gsc never traps a constrained triangle inside the cavity") {
  // interior constrained facets (two-sided) must stay on the cavity shell
  Mesh mesh = generate_test_mesh(3, 0.45, 23);
  // constrain an interior facet: take any interior facet of a bad tet
  const auto bad = get_bad_tetrahedra(mesh, 0.5);
  REQUIRE(!bad.empty());
  const TetId seed = bad[0];
  int slot = -1;
  for (int f = 0; f < 4; f++)
    if (mesh.tets[seed].neighbor[f] != kNoTet) slot = f;
  REQUIRE(slot >= 0);
  const TriKey key(mesh.tets[seed].v[kFacetCorner[slot][0]],
                   mesh.tets[seed].v[kFacetCorner[slot][1]],
                   mesh.tets[seed].v[kFacetCorner[slot][2]]);
  mesh.surface.insert(key);
  for (VertexId v : key.v) mesh.vertices[v].on_boundary = true;

  SprEngine engine;
  gsc(mesh, seed, engine);
  // whatever happened, the constrained triangle is still a facet
  audit_adjacency(mesh);
  CHECK(mesh.surface.count(key) == 1);
}
