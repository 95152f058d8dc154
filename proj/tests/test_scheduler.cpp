#include <doctest.h>

#include <random>
#include <set>

#include "tetopt/io.hpp"
#include "tetopt/quality.hpp"
#include "tetopt/scheduler.hpp"

using namespace tetopt;

namespace {

std::set<std::array<VertexId, 4>> tet_key_set(const Mesh& mesh) {
  std::set<std::array<VertexId, 4>> s;
  for (const auto& t : mesh.tets) {
    if (t.deleted) continue;
    auto v = t.v;
    std::sort(v.begin(), v.end());
    s.insert(v);
  }
  return s;
}

double min_gamma(const Mesh& mesh) {
  double q = 2.0;
  for (const auto& t : mesh.tets)
    if (!t.deleted) q = std::min(q, t.quality);
  return q;
}

bool tables_identical(const Mesh& a, const Mesh& b) {
  if (a.tets.size() != b.tets.size()) return false;
  for (std::size_t t = 0; t < a.tets.size(); t++) {
    if (a.tets[t].deleted != b.tets[t].deleted) return false;
    if (a.tets[t].deleted) continue;
    if (a.tets[t].v != b.tets[t].v) return false;
    if (a.tets[t].neighbor != b.tets[t].neighbor) return false;
  }
  if (a.vertices.size() != b.vertices.size()) return false;
  for (std::size_t v = 0; v < a.vertices.size(); v++)
    if (a.vertices[v].position != b.vertices[v].position) return false;
  return true;
}

}  // namespace

TEST_CASE("make_partitions: single worker owns everything") {
  Mesh mesh = generate_test_mesh(6, 0.45, 12);
  const auto bad = get_bad_tetrahedra(mesh, 0.35);
  REQUIRE(!bad.empty());
  const auto assign = make_partitions(mesh, bad, 1);
  REQUIRE(assign.partitions.size() == 1);
  CHECK(assign.partitions[0].moore_begin == 0);
  CHECK(assign.partitions[0].moore_end == (1ull << 30));
  CHECK(assign.owned_bad[0].size() == bad.size());
  CHECK(assign.suspended_pool.empty());
}

TEST_CASE("make_partitions: contiguous disjoint cover with balanced bad counts") {
  Mesh mesh = generate_test_mesh(10, 0.45, 5);
  const auto bad = get_bad_tetrahedra(mesh, 0.35);
  REQUIRE(bad.size() > 50);

  for (int k : {2, 4, 8}) {
    const auto assign = make_partitions(mesh, bad, k);
    REQUIRE(assign.partitions.size() == std::size_t(k));

    // disjoint, contiguous, covering
    CHECK(assign.partitions.front().moore_begin == 0);
    CHECK(assign.partitions.back().moore_end == (1ull << 30));
    for (int p = 0; p + 1 < k; p++)
      CHECK(assign.partitions[p].moore_end == assign.partitions[p + 1].moore_begin);

    // every partition nonempty on this mesh and counts near the ideal
    const double ideal = double(bad.size()) / k;
    const double slack = std::ceil(ideal);
    std::size_t owned_total = 0;
    for (int p = 0; p < k; p++) {
      const auto& part = assign.partitions[p];
      CHECK(part.owned_bad_tets > 0);
      CHECK(double(part.owned_bad_tets) >= ideal - slack);
      CHECK(double(part.owned_bad_tets) <= ideal + slack);
      owned_total += part.owned_bad_tets;
    }
    CHECK(owned_total + assign.suspended_pool.size() == bad.size());

    // ownership rule: at least 3 of 4 vertex indices inside the interval
    for (TetId t : bad) {
      const auto owner = assign.owner_of[t];
      if (owner < 0) continue;
      const auto& part = assign.partitions[owner];
      int inside = 0;
      for (VertexId v : mesh.tets[t].v)
        if (mesh.vertices[v].moore_index >= part.moore_begin &&
            mesh.vertices[v].moore_index < part.moore_end)
          inside++;
      CHECK(inside >= 3);
    }
  }
}

TEST_CASE("improve returns immediately on an already-good mesh") {
  Mesh mesh = generate_test_mesh(3, 0.0, 1);
  REQUIRE(get_bad_tetrahedra(mesh, 0.35).empty());
  const auto before = tet_key_set(mesh);
  const ImproveResult result = improve(mesh, 0.35);
  CHECK(result.applied_total == 0);
  CHECK(result.bad_before == 0);
  CHECK(result.bad_after == 0);
  CHECK(tet_key_set(mesh) == before);
}

TEST_CASE("improve raises quality and preserves every mesh invariant") {
  Mesh mesh = generate_test_mesh(8, 0.45, 41);
  const double volume = mesh.total_volume();
  const SurfaceSet surface = mesh.surface;
  const double q_before = min_gamma(mesh);
  const std::size_t bad_before = get_bad_tetrahedra(mesh, 0.35).size();
  REQUIRE(bad_before > 0);

  const ImproveResult result = improve(mesh, 0.35);

  CHECK(result.bad_before == bad_before);
  CHECK(result.bad_after < bad_before);
  CHECK(min_gamma(mesh) >= q_before);
  CHECK(mesh.total_volume() == doctest::Approx(volume).epsilon(1e-9));
  CHECK(mesh.surface == surface);
  audit_adjacency(mesh);
  audit_positive(mesh);

  // quality cache stayed coherent
  for (TetId t = 0; t < mesh.tets.size(); t++) {
    if (mesh.tets[t].deleted) continue;
    CHECK(mesh.tets[t].quality ==
          tet_gamma(mesh.tet_point(t, 0), mesh.tet_point(t, 1), mesh.tet_point(t, 2),
                    mesh.tet_point(t, 3)));
  }
}

TEST_CASE("single-worker improvement is bit-exactly repeatable") {
  Mesh a = generate_test_mesh(6, 0.45, 77);
  Mesh b = generate_test_mesh(6, 0.45, 77);
  improve(a, 0.35, 1);
  improve(b, 0.35, 1);
  CHECK(tables_identical(a, b));
}

TEST_CASE("multi-worker improvement preserves invariants and reduces bad tets") {
  Mesh mesh = generate_test_mesh(8, 0.45, 29);
  const double volume = mesh.total_volume();
  const SurfaceSet surface = mesh.surface;
  const std::size_t bad_before = get_bad_tetrahedra(mesh, 0.35).size();
  REQUIRE(bad_before > 20);

  const ImproveResult result = improve(mesh, 0.35, 4);
  CHECK(result.bad_after < bad_before / 4);
  CHECK(mesh.total_volume() == doctest::Approx(volume).epsilon(1e-9));
  CHECK(mesh.surface == surface);
  audit_adjacency(mesh);
  audit_positive(mesh);

  // sweep bookkeeping is sane
  REQUIRE(!result.sweeps.empty());
  for (const auto& s : result.sweeps) {
    CHECK(s.rho >= 0.0);
    CHECK(s.rho <= 1.0);
    CHECK(s.applied + s.suspended <= s.attempted);
  }
}

TEST_CASE("reproducible_reorder is idempotent and canonical") {
  Mesh mesh = generate_test_mesh(5, 0.4, 9);
  improve(mesh, 0.35, 1);

  Mesh once = mesh;
  reproducible_reorder(once);
  Mesh twice = once;
  reproducible_reorder(twice);
  CHECK(tables_identical(once, twice));
  audit_adjacency(once);

  // shuffle then reorder equals reorder of the original
  Mesh shuffled = mesh;
  std::mt19937_64 rng(4);
  compact(shuffled);
  for (std::size_t i = shuffled.tets.size(); i > 1; i--)
    std::swap(shuffled.tets[i - 1], shuffled.tets[rng() % i]);
  build_adjacency(shuffled);  // links are positional, rebuild after the shuffle
  reproducible_reorder(shuffled);
  CHECK(tables_identical(shuffled, once));

  // lexicographic order of sorted vertex tuples
  for (std::size_t t = 0; t + 1 < once.tets.size(); t++) {
    auto key = [&](std::size_t i) {
      auto v = once.tets[i].v;
      std::sort(v.begin(), v.end());
      return v;
    };
    CHECK(key(t) < key(t + 1));
  }
}

TEST_CASE("serial and 4-worker runs both reach a valid improved state") {
  Mesh serial = generate_test_mesh(7, 0.45, 123);
  Mesh parallel = generate_test_mesh(7, 0.45, 123);
  const std::size_t bad_before = get_bad_tetrahedra(serial, 0.35).size();
  REQUIRE(bad_before > 0);

  improve(serial, 0.35, 1);
  improve(parallel, 0.35, 4);

  for (Mesh* m : {&serial, &parallel}) {
    audit_adjacency(*m);
    audit_positive(*m);
    CHECK(get_bad_tetrahedra(*m, 0.35).size() <= bad_before / 10);
  }
}
