#include "tetopt/io.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>
#include <unordered_map>

#include "tetopt/errors.hpp"
#include "tetopt/predicates.hpp"
#include "tetopt/quality.hpp"

namespace tetopt {
namespace {

[[noreturn]] void parse_fail(const std::string& path, int line, const std::string& what) {
  throw ParseError(path + ":" + std::to_string(line) + ": " + what);
}

// Flag constrained vertices, then validate tet volumes.
void finalize_loaded_mesh(Mesh& mesh, const std::string& path) {
  build_adjacency(mesh);
  for (const TriKey& key : mesh.surface)
    for (VertexId v : key.v) mesh.vertices[v].on_boundary = true;
  for (TetId t = 0; t < mesh.tets.size(); t++) {
    if (mesh.tets[t].deleted) continue;
    if (orient3d_sign(mesh.tet_point(t, 0), mesh.tet_point(t, 1), mesh.tet_point(t, 2),
                      mesh.tet_point(t, 3)) <= 0)
      throw InvalidMesh(path + ": tet " + std::to_string(t) +
                        " has non-positive volume");
  }
  mesh.refresh_all_qualities();
}

Mesh read_msh(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path + ": cannot open");

  Mesh mesh;
  std::vector<std::uint64_t> node_ids;
  std::unordered_map<std::uint64_t, VertexId> id_map;
  std::string line;
  int lineno = 0;

  auto next_line = [&]() -> bool {
    if (!std::getline(in, line)) return false;
    lineno++;
    return true;
  };

  while (next_line()) {
    if (line.rfind("$MeshFormat", 0) == 0) {
      if (!next_line()) parse_fail(path, lineno, "truncated $MeshFormat");
      double version;
      int file_type;
      if (std::sscanf(line.c_str(), "%lf %d", &version, &file_type) != 2)
        parse_fail(path, lineno, "bad $MeshFormat header");
      if (version < 2.0 || version >= 3.0 || file_type != 0)
        parse_fail(path, lineno, "only ASCII MSH v2.x is supported");
      if (!next_line() || line.rfind("$EndMeshFormat", 0) != 0)
        parse_fail(path, lineno, "missing $EndMeshFormat");
    } else if (line.rfind("$Nodes", 0) == 0) {
      if (!next_line()) parse_fail(path, lineno, "truncated $Nodes");
      const std::size_t count = std::strtoull(line.c_str(), nullptr, 10);
      mesh.vertices.reserve(count);
      for (std::size_t i = 0; i < count; i++) {
        if (!next_line()) parse_fail(path, lineno, "truncated node list");
        std::uint64_t id;
        double x, y, z;
        if (std::sscanf(line.c_str(), "%" SCNu64 " %lf %lf %lf", &id, &x, &y, &z) != 4)
          parse_fail(path, lineno, "bad node line");
        if (!std::isfinite(x) || !std::isfinite(y) || !std::isfinite(z))
          parse_fail(path, lineno, "non-finite coordinate");
        id_map[id] = static_cast<VertexId>(mesh.vertices.size());
        mesh.vertices.push_back({{x, y, z}, 0, false});
      }
      if (!next_line() || line.rfind("$EndNodes", 0) != 0)
        parse_fail(path, lineno, "missing $EndNodes");
    } else if (line.rfind("$Elements", 0) == 0) {
      if (!next_line()) parse_fail(path, lineno, "truncated $Elements");
      const std::size_t count = std::strtoull(line.c_str(), nullptr, 10);
      for (std::size_t i = 0; i < count; i++) {
        if (!next_line()) parse_fail(path, lineno, "truncated element list");
        std::istringstream ss(line);
        std::uint64_t id;
        int type, ntags;
        if (!(ss >> id >> type >> ntags)) parse_fail(path, lineno, "bad element line");
        for (int t = 0; t < ntags; t++) {
          int tag;
          if (!(ss >> tag)) parse_fail(path, lineno, "bad element tags");
        }
        const int nodes_needed = (type == 2) ? 3 : (type == 4) ? 4 : -1;
        if (nodes_needed < 0)
          throw UnsupportedElement(path + ":" + std::to_string(lineno) +
                                   ": element type " + std::to_string(type));
        std::array<VertexId, 4> nv{};
        for (int k = 0; k < nodes_needed; k++) {
          std::uint64_t node;
          if (!(ss >> node)) parse_fail(path, lineno, "bad element nodes");
          auto it = id_map.find(node);
          if (it == id_map.end()) parse_fail(path, lineno, "unknown node reference");
          nv[k] = it->second;
        }
        if (type == 2) {
          mesh.surface.insert(TriKey(nv[0], nv[1], nv[2]));
        } else {
          Tetrahedron tet;
          tet.v = nv;
          tet.deleted = false;
          mesh.tets.push_back(tet);
        }
      }
      if (!next_line() || line.rfind("$EndElements", 0) != 0)
        parse_fail(path, lineno, "missing $EndElements");
    }
    // unknown sections are skipped line by line
  }

  finalize_loaded_mesh(mesh, path);
  return mesh;
}

Mesh read_node_ele(const std::string& stem) {
  Mesh mesh;
  std::uint64_t first_index = 0;

  {
    const std::string path = stem + ".node";
    std::ifstream in(path);
    if (!in) throw ParseError(path + ": cannot open");
    std::size_t count;
    int dim, nattr, nmark;
    if (!(in >> count >> dim >> nattr >> nmark))
      parse_fail(path, 1, "bad node header");
    if (dim != 3) parse_fail(path, 1, "expected 3D nodes");
    mesh.vertices.reserve(count);
    for (std::size_t i = 0; i < count; i++) {
      std::uint64_t id;
      double x, y, z;
      if (!(in >> id >> x >> y >> z)) parse_fail(path, int(i) + 2, "bad node line");
      double skip;
      for (int k = 0; k < nattr + nmark; k++) in >> skip;
      if (i == 0) first_index = id;
      mesh.vertices.push_back({{x, y, z}, 0, false});
    }
  }

  {
    const std::string path = stem + ".ele";
    std::ifstream in(path);
    if (!in) throw ParseError(path + ": cannot open");
    std::size_t count;
    int nper, nattr;
    if (!(in >> count >> nper >> nattr)) parse_fail(path, 1, "bad ele header");
    if (nper != 4) throw UnsupportedElement(path + ": only 4-node tetrahedra");
    mesh.tets.reserve(count);
    for (std::size_t i = 0; i < count; i++) {
      std::uint64_t id, a, b, c, d;
      if (!(in >> id >> a >> b >> c >> d)) parse_fail(path, int(i) + 2, "bad ele line");
      double skip;
      for (int k = 0; k < nattr; k++) in >> skip;
      Tetrahedron tet;
      tet.v = {static_cast<VertexId>(a - first_index), static_cast<VertexId>(b - first_index),
               static_cast<VertexId>(c - first_index), static_cast<VertexId>(d - first_index)};
      for (VertexId v : tet.v)
        if (v >= mesh.vertices.size()) parse_fail(path, int(i) + 2, "node index out of range");
      tet.deleted = false;
      mesh.tets.push_back(tet);
    }
  }

  {
    const std::string path = stem + ".face";
    std::ifstream in(path);
    if (in) {
      std::size_t count;
      int nmark;
      if (!(in >> count >> nmark)) parse_fail(path, 1, "bad face header");
      for (std::size_t i = 0; i < count; i++) {
        std::uint64_t id, a, b, c;
        if (!(in >> id >> a >> b >> c)) parse_fail(path, int(i) + 2, "bad face line");
        long skip;
        for (int k = 0; k < nmark; k++) in >> skip;
        mesh.surface.insert(TriKey(static_cast<VertexId>(a - first_index),
                                   static_cast<VertexId>(b - first_index),
                                   static_cast<VertexId>(c - first_index)));
      }
    }
  }

  finalize_loaded_mesh(mesh, stem);
  return mesh;
}

void write_msh(const Mesh& mesh, const std::string& path) {
  std::FILE* out = std::fopen(path.c_str(), "w");
  if (!out) throw Error(path + ": cannot open for writing");

  std::fprintf(out, "$MeshFormat\n2.2 0 8\n$EndMeshFormat\n");
  std::fprintf(out, "$Nodes\n%zu\n", mesh.vertices.size());
  for (std::size_t i = 0; i < mesh.vertices.size(); i++) {
    const auto& p = mesh.vertices[i].position;
    std::fprintf(out, "%zu %.17g %.17g %.17g\n", i + 1, p.x(), p.y(), p.z());
  }
  std::fprintf(out, "$EndNodes\n");

  std::vector<TriKey> surface(mesh.surface.begin(), mesh.surface.end());
  std::sort(surface.begin(), surface.end(),
            [](const TriKey& a, const TriKey& b) { return a.v < b.v; });

  const std::size_t live = mesh.live_tets();
  std::fprintf(out, "$Elements\n%zu\n", live + surface.size());
  std::size_t eid = 1;
  for (const TriKey& key : surface)
    std::fprintf(out, "%zu 2 2 0 0 %u %u %u\n", eid++, key.v[0] + 1, key.v[1] + 1,
                 key.v[2] + 1);
  for (TetId t = 0; t < mesh.tets.size(); t++) {
    if (mesh.tets[t].deleted) continue;
    const auto& v = mesh.tets[t].v;
    std::fprintf(out, "%zu 4 2 0 0 %u %u %u %u\n", eid++, v[0] + 1, v[1] + 1, v[2] + 1,
                 v[3] + 1);
  }
  std::fprintf(out, "$EndElements\n");
  std::fclose(out);
}

void write_node_ele(const Mesh& mesh, const std::string& stem) {
  {
    std::FILE* out = std::fopen((stem + ".node").c_str(), "w");
    if (!out) throw Error(stem + ".node: cannot open for writing");
    std::fprintf(out, "%zu 3 0 0\n", mesh.vertices.size());
    for (std::size_t i = 0; i < mesh.vertices.size(); i++) {
      const auto& p = mesh.vertices[i].position;
      std::fprintf(out, "%zu %.17g %.17g %.17g\n", i, p.x(), p.y(), p.z());
    }
    std::fclose(out);
  }
  {
    std::FILE* out = std::fopen((stem + ".ele").c_str(), "w");
    if (!out) throw Error(stem + ".ele: cannot open for writing");
    std::fprintf(out, "%zu 4 0\n", mesh.live_tets());
    std::size_t id = 0;
    for (TetId t = 0; t < mesh.tets.size(); t++) {
      if (mesh.tets[t].deleted) continue;
      const auto& v = mesh.tets[t].v;
      std::fprintf(out, "%zu %u %u %u %u\n", id++, v[0], v[1], v[2], v[3]);
    }
    std::fclose(out);
  }
  {
    std::FILE* out = std::fopen((stem + ".face").c_str(), "w");
    if (!out) throw Error(stem + ".face: cannot open for writing");
    std::vector<TriKey> surface(mesh.surface.begin(), mesh.surface.end());
    std::sort(surface.begin(), surface.end(),
              [](const TriKey& a, const TriKey& b) { return a.v < b.v; });
    std::fprintf(out, "%zu 0\n", surface.size());
    std::size_t id = 0;
    for (const TriKey& key : surface)
      std::fprintf(out, "%zu %u %u %u\n", id++, key.v[0], key.v[1], key.v[2]);
    std::fclose(out);
  }
}

}  // namespace

Mesh read_mesh(const std::string& path, MeshFormat format) {
  return format == MeshFormat::Msh ? read_msh(path) : read_node_ele(path);
}

void write_mesh(const Mesh& mesh, const std::string& path, MeshFormat format) {
  if (format == MeshFormat::Msh)
    write_msh(mesh, path);
  else
    write_node_ele(mesh, path);
}

Mesh generate_test_mesh(int n, double perturbation, std::uint64_t seed) {
  Mesh mesh;
  const int nv = n + 1;
  const double h = 1.0 / n;
  auto vid = [&](int i, int j, int k) {
    return static_cast<VertexId>((k * nv + j) * nv + i);
  };

  mesh.vertices.resize(std::size_t(nv) * nv * nv);
  for (int k = 0; k < nv; k++)
    for (int j = 0; j < nv; j++)
      for (int i = 0; i < nv; i++)
        mesh.vertices[vid(i, j, k)].position = {i * h, j * h, k * h};

  // Six tets per cell, all sharing the cell's main diagonal; the face
  // diagonals are translation invariant, so neighboring cells match.
  constexpr int kAxisPerm[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2},
                                   {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
  for (int k = 0; k < n; k++)
    for (int j = 0; j < n; j++)
      for (int i = 0; i < n; i++) {
        const int base[3] = {i, j, k};
        for (const auto& perm : kAxisPerm) {
          int c[3] = {base[0], base[1], base[2]};
          std::array<VertexId, 4> v;
          v[0] = vid(c[0], c[1], c[2]);
          c[perm[0]]++;
          v[1] = vid(c[0], c[1], c[2]);
          c[perm[1]]++;
          v[2] = vid(c[0], c[1], c[2]);
          c[perm[2]]++;
          v[3] = vid(c[0], c[1], c[2]);
          Tetrahedron tet;
          tet.v = v;
          if (signed_volume6(mesh.vertices[v[0]].position, mesh.vertices[v[1]].position,
                             mesh.vertices[v[2]].position,
                             mesh.vertices[v[3]].position) < 0)
            std::swap(tet.v[1], tet.v[2]);
          tet.deleted = false;
          mesh.tets.push_back(tet);
        }
      }

  build_adjacency(mesh);

  // Boundary facets of the cube become the constrained surface.
  for (TetId t = 0; t < mesh.tets.size(); t++) {
    const Tetrahedron& tet = mesh.tets[t];
    for (int f = 0; f < 4; f++)
      if (tet.neighbor[f] == kNoTet)
        mesh.surface.insert(TriKey(tet.v[kFacetCorner[f][0]], tet.v[kFacetCorner[f][1]],
                                   tet.v[kFacetCorner[f][2]]));
  }
  for (const TriKey& key : mesh.surface)
    for (VertexId v : key.v) mesh.vertices[v].on_boundary = true;

  if (perturbation > 0.0) {
    // vertex -> incident tets, needed to keep displaced stars valid
    std::vector<std::vector<TetId>> star(mesh.vertices.size());
    for (TetId t = 0; t < mesh.tets.size(); t++)
      for (VertexId v : mesh.tets[t].v) star[v].push_back(t);

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> offset(-perturbation * h, perturbation * h);
    for (VertexId v = 0; v < mesh.vertices.size(); v++) {
      if (mesh.vertices[v].on_boundary) continue;
      const Eigen::Vector3d original = mesh.vertices[v].position;
      bool placed = false;
      for (int attempt = 0; attempt < 100 && !placed; attempt++) {
        mesh.vertices[v].position =
            original + Eigen::Vector3d(offset(rng), offset(rng), offset(rng));
        placed = true;
        for (TetId t : star[v]) {
          if (orient3d_sign(mesh.tet_point(t, 0), mesh.tet_point(t, 1),
                            mesh.tet_point(t, 2), mesh.tet_point(t, 3)) <= 0) {
            placed = false;
            break;
          }
        }
      }
      if (!placed) mesh.vertices[v].position = original;
    }
  }

  mesh.refresh_all_qualities();
  return mesh;
}

QualityReport make_quality_report(const Mesh& mesh, double threshold) {
  QualityReport r;
  r.threshold = threshold;
  bool first = true;
  double gamma_sum = 0, sicn_sum = 0, dihedral_sum = 0;
  for (TetId t = 0; t < mesh.tets.size(); t++) {
    if (mesh.tets[t].deleted) continue;
    const QualityVector q = tet_quality_vector(mesh.tet_point(t, 0), mesh.tet_point(t, 1),
                                               mesh.tet_point(t, 2), mesh.tet_point(t, 3));
    r.tet_count++;
    gamma_sum += q.gamma;
    sicn_sum += q.sicn;
    if (first) {
      r.gamma_min = r.gamma_max = q.gamma;
      r.sicn_min = r.sicn_max = q.sicn;
      r.dihedral_min = r.dihedral_max = q.dihedral_deg[0];
      first = false;
    }
    r.gamma_min = std::min(r.gamma_min, q.gamma);
    r.gamma_max = std::max(r.gamma_max, q.gamma);
    r.sicn_min = std::min(r.sicn_min, q.sicn);
    r.sicn_max = std::max(r.sicn_max, q.sicn);
    if (q.gamma < threshold) r.bad_after++;

    auto bin100 = [](double x) {
      return std::size_t(std::clamp(int(x * 100.0), 0, 99));
    };
    r.gamma_hist[bin100(q.gamma)]++;
    r.sicn_hist[bin100(q.sicn)]++;
    for (double a : q.dihedral_deg) {
      dihedral_sum += a;
      r.dihedral_min = std::min(r.dihedral_min, a);
      r.dihedral_max = std::max(r.dihedral_max, a);
      r.dihedral_hist[std::size_t(std::clamp(int(a), 0, 179))]++;
    }
  }
  if (r.tet_count > 0) {
    r.gamma_mean = gamma_sum / double(r.tet_count);
    r.sicn_mean = sicn_sum / double(r.tet_count);
    r.dihedral_mean = dihedral_sum / double(6 * r.tet_count);
  }
  r.bad_before = r.bad_after;
  return r;
}

void emit_report(const QualityReport& r, const std::string& path) {
  std::FILE* out = std::fopen(path.c_str(), "w");
  if (!out) throw Error(path + ": cannot open for writing");

  std::fprintf(out, "# measure\tbin_lo\tbin_hi\tcount\n");
  for (int i = 0; i < 100; i++)
    std::fprintf(out, "gamma\t%.2f\t%.2f\t%" PRIu64 "\n", i / 100.0, (i + 1) / 100.0,
                 r.gamma_hist[i]);
  for (int i = 0; i < 100; i++)
    std::fprintf(out, "sicn\t%.2f\t%.2f\t%" PRIu64 "\n", i / 100.0, (i + 1) / 100.0,
                 r.sicn_hist[i]);
  for (int i = 0; i < 180; i++)
    std::fprintf(out, "dihedral\t%d\t%d\t%" PRIu64 "\n", i, i + 1, r.dihedral_hist[i]);

  std::fprintf(out, "# summary\n");
  std::fprintf(out, "tetrahedra\t%zu\n", r.tet_count);
  std::fprintf(out, "gamma_min\t%.17g\ngamma_max\t%.17g\ngamma_mean\t%.17g\n", r.gamma_min,
               r.gamma_max, r.gamma_mean);
  std::fprintf(out, "sicn_min\t%.17g\nsicn_max\t%.17g\nsicn_mean\t%.17g\n", r.sicn_min,
               r.sicn_max, r.sicn_mean);
  std::fprintf(out, "dihedral_min\t%.17g\ndihedral_max\t%.17g\ndihedral_mean\t%.17g\n",
               r.dihedral_min, r.dihedral_max, r.dihedral_mean);
  std::fprintf(out, "threshold\t%.17g\n", r.threshold);
  std::fprintf(out, "bad_before\t%zu\nbad_after\t%zu\n", r.bad_before, r.bad_after);

  if (!r.sweeps.empty()) {
    std::fprintf(out, "# sweeps\n");
    std::fprintf(out, "sweep\tphase\tworkers\tattempted\tapplied\tsuspended\trho\n");
    for (std::size_t i = 0; i < r.sweeps.size(); i++) {
      const SweepStats& s = r.sweeps[i];
      std::fprintf(out, "%zu\t%s\t%d\t%zu\t%zu\t%zu\t%.6f\n", i,
                   s.phase == SweepPhase::Ser ? "ser" : "gsc", s.workers, s.attempted,
                   s.applied, s.suspended, s.rho);
    }
  }
  std::fclose(out);
}

}  // namespace tetopt
