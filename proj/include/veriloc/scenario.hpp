#pragma once

#include "veriloc/common.hpp"

#include <array>
#include <map>
#include <string>

namespace veriloc::scenario {

/// Hexagonal-cell layout: cells of side isd/sqrt(3) with base stations on
/// alternate vertices, so every cell has exactly 3 vertex BSs. Randomized by a
/// seeded global offset and rotation.
struct Topology {
    double isd_m = 500.0;
    double cell_side_m = 0.0;
    double extent_m = 0.0;
    std::uint64_t seed = 0;
    double rotation_rad = 0.0;
    Point2 offset_m{};
    std::vector<Point2> bs_positions;  // index = bs id
    std::map<std::array<long long, 2>, int> bs_lookup;  // mm-rounded lattice coords -> id

    /// World -> canonical lattice frame.
    Point2 to_lattice(const Point2& p) const;
    Point2 to_world(const Point2& p) const;
};

Topology build_topology(double extent_m, std::uint64_t seed, double isd_m = 500.0);

/// Ids of the 3 vertex BSs of the cell containing `position` (ties at exact
/// boundaries go to the candidate cell with lexicographically smallest
/// centroid). Throws if outside the generated extent.
std::array<int, 3> serving_bs(const Topology& topo, const Point2& position);

/// Centroid (in world coordinates) of the cell containing `position`.
Point2 cell_centroid(const Topology& topo, const Point2& position);

struct TrajectoryPoint {
    double t_s = 0.0;
    Point2 xy_m{};
    Point2 velocity_mps{};
};

using Trajectory = std::vector<TrajectoryPoint>;

/// CSV with header t_s,x_m,y_m[,vx_mps,vy_mps]. Missing velocities are filled
/// by central differences.
Trajectory load_trajectory(const std::string& path);

struct SyntheticLeg {
    Point2 waypoint{};  // leg end point
    double speed_mps = 10.0;
};

/// Piecewise-constant-speed waypoint path sampled at 1 s, n_points samples.
/// If the path is exhausted the UE holds the final waypoint.
Trajectory synthetic_trajectory(const Point2& start, const std::vector<SyntheticLeg>& legs,
                                int n_points);

}  // namespace veriloc::scenario
