// Closed 3D Moore curve, built from eight Hilbert sub-curves arranged
// along a Gray-code cycle of the octants. The per-octant Hilbert curves
// use the entry-corner/direction parametrization ("Compact Hilbert
// Indices", Hamilton, TR CS-2006-07): a curve in state (e,d) starts at
// the corner cell e and exits at the corner cell e ^ (1 << d).

#include "tetopt/moore.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace tetopt {
namespace {

constexpr std::uint32_t rotl3(std::uint32_t x, std::uint32_t s) {
  s %= 3;
  return ((x << s) | (x >> (3 - s))) & 7u;
}

constexpr std::uint32_t gray(std::uint32_t i) { return i ^ (i >> 1); }

// Octant visited at step w of a Hilbert curve in state (e,d).
constexpr std::uint32_t step_octant(std::uint32_t e, std::uint32_t d, std::uint32_t w) {
  return rotl3(gray(w), d + 1) ^ e;
}

constexpr std::uint32_t trailing_ones(std::uint32_t i) {
  std::uint32_t c = 0;
  while (i & 1u) {
    c++;
    i >>= 1;
  }
  return c;
}

// Child state of step w under parent state (e,d).
constexpr void child_state(std::uint32_t e, std::uint32_t d, std::uint32_t w,
                           std::uint32_t& e_out, std::uint32_t& d_out) {
  const std::uint32_t ew = (w == 0) ? 0 : gray(2 * ((w - 1) / 2));
  const std::uint32_t dw = (w == 0) ? 0 : ((w % 2 == 0) ? trailing_ones(w - 1) % 3
                                                        : trailing_ones(w) % 3);
  e_out = e ^ rotl3(ew, d + 1);
  d_out = (d + dw + 1) % 3;
}

struct MooreTables {
  // cycle[j]: octant code at cycle position j (bit0 = x, bit1 = y, bit2 = z)
  std::array<std::uint32_t, 8> cycle;
  std::array<std::uint32_t, 8> cycle_pos;  // inverse of cycle
  std::array<std::uint32_t, 8> entry;      // Hilbert entry corner per position
  std::array<std::uint32_t, 8> dir;        // Hilbert direction per position
  // inv_step[e][d][octant] = step index w
  std::uint8_t inv_step[8][3][8];

  MooreTables() {
    for (std::uint32_t j = 0; j < 8; j++) cycle[j] = gray(j);
    // gray(0..7) = 0,1,3,2,6,7,5,4 is a closed single-bit cycle
    for (std::uint32_t j = 0; j < 8; j++) cycle_pos[cycle[j]] = j;

    for (std::uint32_t e = 0; e < 8; e++)
      for (std::uint32_t d = 0; d < 3; d++)
        for (std::uint32_t w = 0; w < 8; w++) inv_step[e][d][step_octant(e, d, w)] = w;

    solve_orientations();
  }

  // Choose (entry, dir) for every cycle position so each sub-curve's exit
  // cell is face-adjacent to the next sub-curve's entry cell, with closure.
  void solve_orientations() {
    std::array<std::uint32_t, 8> axis;  // axis crossed between positions j and j+1
    for (std::uint32_t j = 0; j < 8; j++) {
      const std::uint32_t diff = cycle[j] ^ cycle[(j + 1) % 8];
      axis[j] = (diff == 1) ? 0 : (diff == 2) ? 1 : 2;
    }
    for (std::uint32_t e0 = 0; e0 < 8; e0++) {
      if (try_orientation(e0, axis)) return;
    }
    // A solution always exists for the Gray cycle; reaching here is a bug.
    std::abort();
  }

  bool try_orientation(std::uint32_t e0, const std::array<std::uint32_t, 8>& axis) {
    return dfs(0, e0, e0, axis);
  }

  bool dfs(std::uint32_t j, std::uint32_t e_j, std::uint32_t e0,
           const std::array<std::uint32_t, 8>& axis) {
    if (j == 8) return e_j == e0;  // closure: propagated entry returns to start
    const std::uint32_t t = axis[j];
    const std::uint32_t want = (cycle[(j + 1) % 8] >> t) & 1u;  // exit-face side
    for (std::uint32_t d = 0; d < 3; d++) {
      const std::uint32_t f = e_j ^ (1u << d);
      if (((f >> t) & 1u) != want) continue;
      entry[j] = e_j;
      dir[j] = d;
      if (dfs(j + 1, f ^ (1u << t), e0, axis)) return true;
    }
    return false;
  }
};

const MooreTables& tables() {
  static const MooreTables t;
  return t;
}

}  // namespace

std::uint64_t moore_index(const Eigen::Vector3d& position, const Eigen::AlignedBox3d& bbox,
                          int order) {
  const std::uint64_t cells = 1ull << order;
  std::uint64_t coord[3];
  for (int a = 0; a < 3; a++) {
    const double extent = bbox.max()[a] - bbox.min()[a];
    double s = extent > 0.0 ? (position[a] - bbox.min()[a]) / extent : 0.0;
    s = std::clamp(s, 0.0, 1.0);
    coord[a] = std::min<std::uint64_t>(static_cast<std::uint64_t>(s * double(cells)),
                                       cells - 1);
  }

  const MooreTables& tbl = tables();
  const int top = order - 1;
  const std::uint32_t octant = static_cast<std::uint32_t>((((coord[2] >> top) & 1u) << 2) |
                                                          (((coord[1] >> top) & 1u) << 1) |
                                                          ((coord[0] >> top) & 1u));
  const std::uint32_t pos = tbl.cycle_pos[octant];

  std::uint32_t e = tbl.entry[pos];
  std::uint32_t d = tbl.dir[pos];
  std::uint64_t index = pos;
  for (int level = top - 1; level >= 0; level--) {
    const std::uint32_t l = static_cast<std::uint32_t>((((coord[2] >> level) & 1u) << 2) |
                                                       (((coord[1] >> level) & 1u) << 1) |
                                                       ((coord[0] >> level) & 1u));
    const std::uint32_t w = tbl.inv_step[e][d][l];
    index = (index << 3) | w;
    std::uint32_t en, dn;
    child_state(e, d, w, en, dn);
    e = en;
    d = dn;
  }
  return index;
}

}  // namespace tetopt
