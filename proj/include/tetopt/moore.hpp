#pragma once

#include <cstdint>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace tetopt {

/// Default space-filling-curve resolution: 2^30 cells.
inline constexpr int kMooreOrder = 10;

/// Index of the grid cell containing `position` along a closed 3D Moore
/// curve over `bbox`, with 2^order cells per axis. Positions outside the
/// box are clamped. Cyclically consecutive indices always map to
/// face-adjacent cells, including the wrap from the last index back to 0.
std::uint64_t moore_index(const Eigen::Vector3d& position, const Eigen::AlignedBox3d& bbox,
                          int order = kMooreOrder);

}  // namespace tetopt
