#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "tetopt/mesh.hpp"

namespace tetopt {

enum class SprStatus {
  Improved,         // a tiling strictly better than the floor was found
  NoImprovement,    // the whole search tree was exhausted without one
  BudgetExhausted,  // the node budget ran out before the tree was covered
};

/// Search result over local point indices.
struct SprResult {
  SprStatus status = SprStatus::NoImprovement;
  std::vector<std::array<int, 4>> tets;  // positively oriented, local indices
  double quality = 0.0;                  // min gamma over tets
  std::uint64_t nodes = 0;               // search-tree nodes expanded
};

/// A candidate tet built on shell facet (f0,f1,f2) with the given apex is
/// usable iff it is positively oriented, contains no other cavity point
/// strictly inside, and does not intersect any shell facet except along
/// simplices they share. Shell facets are oriented with the unfilled region
/// on their positive side.
bool candidate_tet_valid(std::span<const Eigen::Vector3d> points,
                         std::span<const std::array<int, 3>> shell,
                         const std::array<int, 3>& facet, int apex);

/// Branch-and-bound search for the best tetrahedralization of a small
/// cavity. The n^4 quality memo is allocated once per engine and is reused
/// across searches as long as the point indexing is unchanged; call
/// reset_memo() when it is not.
class SprEngine {
 public:
  static constexpr int kMaxPoints = 32;

  SprEngine();

  void reset_memo();

  /// Points are cavity positions with stable local indices; shell facets are
  /// inward oriented (unfilled region on the positive side). Returns the
  /// best tiling with min quality strictly above `floor` reachable within
  /// `node_budget` nodes. Throws TooManyPoints beyond kMaxPoints.
  SprResult search(std::span<const Eigen::Vector3d> points,
                   std::span<const std::array<int, 3>> shell, double floor,
                   std::uint64_t node_budget);

  /// Cached quality of the sorted local 4-tuple; fills the entry on first
  /// use. Exposed so cache coherence is testable.
  double memo_quality(std::span<const Eigen::Vector3d> points, int i, int j, int k,
                      int l);

 private:
  struct ShellEntry {
    std::array<int, 3> tri;
    bool alive = true;
  };

  double lookup(std::span<const Eigen::Vector3d> points, int a, int b, int c, int d);
  bool tet_is_positive(std::span<const Eigen::Vector3d> points,
                       const std::array<int, 4>& tet);
  void place(const std::array<int, 3>& base, int apex, std::vector<int>& journal);
  void unplace(const std::vector<int>& journal);
  void dfs(std::span<const Eigen::Vector3d> points, double cavity_volume6);

  std::vector<double> memo_;
  std::vector<ShellEntry> shell_;
  std::vector<int> shell_map_;  // sorted-triple key -> shell index + 1, 0 = absent
  std::vector<std::array<int, 4>> placed_;
  std::vector<std::array<int, 4>> incumbent_;
  double incumbent_quality_ = 0.0;
  bool has_incumbent_ = false;
  double floor_ = 0.0;
  double current_min_ = 0.0;
  std::uint64_t nodes_ = 0;
  std::uint64_t budget_ = 0;
  bool out_of_budget_ = false;
};

/// Convenience wrapper over a Cavity: local indexing is the cavity's sorted
/// point list, results are mapped back to global vertex ids.
struct SprPatch {
  SprStatus status = SprStatus::NoImprovement;
  std::vector<std::array<VertexId, 4>> tets;
  double quality = 0.0;
};

SprPatch spr_search(const Mesh& mesh, const Cavity& cavity, double floor,
                    std::uint64_t node_budget = 100000);

}  // namespace tetopt
