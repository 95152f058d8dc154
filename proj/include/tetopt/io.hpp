#pragma once

#include <array>
#include <cstdint>
#include <string>

#include "tetopt/mesh.hpp"
#include "tetopt/scheduler.hpp"

namespace tetopt {

enum class MeshFormat { Msh, NodeEle };

/// Read a mesh from disk.
///
/// Msh: ASCII MSH v2.2 subset with nodes, 4-node tetrahedra and 3-node
/// triangles; triangles become the constrained surface.
/// NodeEle: `path.node` + `path.ele` index pair, plus `path.face` for the
/// surface when present (pass the common stem as path).
///
/// Adjacency is built, constrained vertices flagged, qualities cached.
/// Throws ParseError / UnsupportedElement / InvalidMesh.
Mesh read_mesh(const std::string& path, MeshFormat format);

/// Write the mesh in the same subset formats, coordinates with 17
/// significant digits so doubles round-trip exactly.
void write_mesh(const Mesh& mesh, const std::string& path, MeshFormat format);

/// Structured cube test mesh: n^3 cells, six tets per cell, interior
/// vertices displaced by up to perturbation * cell size (each retried until
/// the incident tets stay valid). Cube surface triangles are constrained.
Mesh generate_test_mesh(int n, double perturbation, std::uint64_t seed);

struct QualityReport {
  std::array<std::uint64_t, 100> gamma_hist{};
  std::array<std::uint64_t, 100> sicn_hist{};
  std::array<std::uint64_t, 180> dihedral_hist{};
  std::size_t tet_count = 0;
  double gamma_min = 0, gamma_max = 0, gamma_mean = 0;
  double sicn_min = 0, sicn_max = 0, sicn_mean = 0;
  double dihedral_min = 0, dihedral_max = 0, dihedral_mean = 0;
  double threshold = 0.35;
  std::size_t bad_before = 0;
  std::size_t bad_after = 0;
  std::vector<SweepStats> sweeps;
};

/// Histograms and summary statistics of the current mesh. bad_before and
/// bad_after are both set to the current bad count; improvement drivers
/// overwrite bad_before and attach their sweep stats.
QualityReport make_quality_report(const Mesh& mesh, double threshold);

/// Delimited text table: one row per bin per measure, then a summary block,
/// then per-sweep statistics when present. Byte-identical for equal meshes.
void emit_report(const QualityReport& report, const std::string& path);

}  // namespace tetopt
