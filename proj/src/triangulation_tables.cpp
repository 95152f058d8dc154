#include "tetopt/local_ops.hpp"

namespace tetopt {
namespace {

using Triangulation = std::vector<std::array<int, 3>>;

// All triangulations of the vertex chain i..j of a convex polygon, where
// (i,j) is the closing edge. Every triangle (i,k,j) splits the chain.
std::vector<Triangulation> enumerate_chain(int i, int j) {
  if (j - i < 2) return {Triangulation{}};
  std::vector<Triangulation> out;
  for (int k = i + 1; k < j; k++) {
    const auto left = enumerate_chain(i, k);
    const auto right = enumerate_chain(k, j);
    for (const auto& l : left)
      for (const auto& r : right) {
        Triangulation t = l;
        t.push_back({i, k, j});
        t.insert(t.end(), r.begin(), r.end());
        out.push_back(std::move(t));
      }
  }
  return out;
}

}  // namespace

TriangulationTable build_triangulation_tables() {
  TriangulationTable table;
  for (int n = 3; n <= 7; n++) {
    PolygonTriangulations& poly = table.by_ring_size[n - 3];
    poly.n = n;
    poly.triangulations = enumerate_chain(0, n - 1);
    for (std::size_t t = 0; t < poly.triangulations.size(); t++)
      for (const auto& tri : poly.triangulations[t])
        poly.triangle_mask[(tri[0] << 6) | (tri[1] << 3) | tri[2]] |= 1ull << t;
  }
  return table;
}

const TriangulationTable& triangulation_tables() {
  static const TriangulationTable table = build_triangulation_tables();
  return table;
}

}  // namespace tetopt
