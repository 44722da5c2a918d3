#include "veriloc/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>

namespace veriloc::scenario {

namespace {

constexpr double kSqrt3 = 1.7320508075688772;

std::array<long long, 2> round_key(const Point2& p) {
    return {std::llround(p.x * 1000.0), std::llround(p.y * 1000.0)};
}

Point2 lattice_center(int i, int j, double isd) {
    return {i * isd + j * isd / 2.0, j * isd * kSqrt3 / 2.0};
}

/// The 3 BS vertices of the cell centered at c: alternate hexagon vertices at
/// 30, 150, 270 degrees, radius isd/sqrt(3). This classification is consistent
/// across neighboring cells (each shared vertex keeps its parity).
std::array<Point2, 3> cell_bs_vertices(const Point2& c, double isd) {
    const double s = isd / kSqrt3;
    std::array<Point2, 3> out;
    for (int k = 0; k < 3; ++k) {
        const double ang = deg_to_rad(30.0 + 120.0 * k);
        out[k] = {c.x + s * std::cos(ang), c.y + s * std::sin(ang)};
    }
    return out;
}

/// Center of the cell containing p (canonical frame), boundary ties to the
/// lexicographically smallest centroid.
Point2 containing_center(const Point2& p, double isd) {
    const int j0 = static_cast<int>(std::lround(p.y / (isd * kSqrt3 / 2.0)));
    const int i0 = static_cast<int>(std::lround(p.x / isd - j0 / 2.0));
    Point2 best{};
    double best_d = std::numeric_limits<double>::infinity();
    for (int dj = -2; dj <= 2; ++dj)
        for (int di = -2; di <= 2; ++di) {
            const Point2 c = lattice_center(i0 + di, j0 + dj, isd);
            const double d = dist(c, p);
            if (d < best_d - 1e-9 ||
                (d < best_d + 1e-9 && (c.x < best.x - 1e-9 ||
                                       (std::abs(c.x - best.x) < 1e-9 && c.y < best.y - 1e-9)))) {
                best = c;
                best_d = d;
            }
        }
    return best;
}

void fill_velocities(Trajectory& traj) {
    const std::size_t n = traj.size();
    if (n < 2) return;
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t lo = (i == 0) ? 0 : i - 1;
        const std::size_t hi = (i == n - 1) ? n - 1 : i + 1;
        const double dt = traj[hi].t_s - traj[lo].t_s;
        if (dt <= 0.0) continue;
        traj[i].velocity_mps = (1.0 / dt) * (traj[hi].xy_m - traj[lo].xy_m);
    }
}

}  // namespace

Point2 Topology::to_lattice(const Point2& p) const {
    const Point2 d = p - offset_m;
    const double c = std::cos(-rotation_rad), s = std::sin(-rotation_rad);
    return {c * d.x - s * d.y, s * d.x + c * d.y};
}

Point2 Topology::to_world(const Point2& p) const {
    const double c = std::cos(rotation_rad), s = std::sin(rotation_rad);
    return Point2{c * p.x - s * p.y, s * p.x + c * p.y} + offset_m;
}

Topology build_topology(double extent_m, std::uint64_t seed, double isd_m) {
    if (extent_m <= 0.0 || isd_m <= 0.0) throw ParamError("topology: extent and ISD must be positive");
    Topology topo;
    topo.isd_m = isd_m;
    topo.cell_side_m = isd_m / kSqrt3;
    topo.extent_m = extent_m;
    topo.seed = seed;

    Rng rng(mix_seed(seed, 0x70b0u));
    topo.rotation_rad = std::uniform_real_distribution<double>(0.0, 2.0 * M_PI)(rng);
    topo.offset_m = {std::uniform_real_distribution<double>(0.0, isd_m)(rng),
                     std::uniform_real_distribution<double>(0.0, isd_m)(rng)};

    const double radius = extent_m + 3.0 * isd_m;
    const int jmax = static_cast<int>(std::ceil(radius / (isd_m * kSqrt3 / 2.0))) + 1;
    std::vector<Point2> verts;
    for (int j = -jmax; j <= jmax; ++j)
        for (int i = -2 * jmax; i <= 2 * jmax; ++i) {
            const Point2 c = lattice_center(i, j, isd_m);
            if (norm(c) > radius) continue;
            for (const Point2& v : cell_bs_vertices(c, isd_m)) verts.push_back(v);
        }
    std::sort(verts.begin(), verts.end(), [](const Point2& a, const Point2& b) {
        const auto ka = round_key(a), kb = round_key(b);
        return ka < kb;
    });
    for (const Point2& v : verts) {
        const auto key = round_key(v);
        if (topo.bs_lookup.count(key)) continue;
        topo.bs_lookup[key] = static_cast<int>(topo.bs_positions.size());
        topo.bs_positions.push_back(topo.to_world(v));
    }
    return topo;
}

std::array<int, 3> serving_bs(const Topology& topo, const Point2& position) {
    const Point2 p = topo.to_lattice(position);
    if (norm(p) > topo.extent_m + topo.isd_m)
        throw ParamError("serving_bs: position outside generated lattice extent");
    const Point2 c = containing_center(p, topo.isd_m);
    std::array<int, 3> ids{};
    int k = 0;
    for (const Point2& v : cell_bs_vertices(c, topo.isd_m)) {
        const auto it = topo.bs_lookup.find(round_key(v));
        if (it == topo.bs_lookup.end())
            throw ParamError("serving_bs: position outside generated lattice extent");
        ids[k++] = it->second;
    }
    return ids;
}

Point2 cell_centroid(const Topology& topo, const Point2& position) {
    return topo.to_world(containing_center(topo.to_lattice(position), topo.isd_m));
}

Trajectory load_trajectory(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParamError("trajectory: cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw ParamError("trajectory: empty file " + path);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const bool with_vel = (line == "t_s,x_m,y_m,vx_mps,vy_mps");
    if (!with_vel && line != "t_s,x_m,y_m")
        throw ParamError("trajectory: unrecognized header '" + line + "'");

    Trajectory traj;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::vector<double> fields;
        std::string tok;
        while (std::getline(ss, tok, ',')) {
            try {
                std::size_t used = 0;
                fields.push_back(std::stod(tok, &used));
                if (used != tok.size()) throw std::invalid_argument(tok);
            } catch (const std::exception&) {
                throw ParamError("trajectory: parse error at line " + std::to_string(line_no));
            }
        }
        if (fields.size() != (with_vel ? 5u : 3u))
            throw ParamError("trajectory: wrong field count at line " + std::to_string(line_no));
        TrajectoryPoint pt;
        pt.t_s = fields[0];
        pt.xy_m = {fields[1], fields[2]};
        if (with_vel) pt.velocity_mps = {fields[3], fields[4]};
        if (!traj.empty() && pt.t_s <= traj.back().t_s)
            throw ParamError("trajectory: non-monotonic timestamp at line " +
                             std::to_string(line_no));
        traj.push_back(pt);
    }
    if (traj.empty()) throw ParamError("trajectory: no data rows in " + path);
    if (!with_vel) fill_velocities(traj);
    return traj;
}

Trajectory synthetic_trajectory(const Point2& start, const std::vector<SyntheticLeg>& legs,
                                int n_points) {
    if (n_points < 1) throw ParamError("trajectory: n_points must be >= 1");
    if (legs.empty()) throw ParamError("trajectory: no legs");
    Trajectory traj;
    traj.reserve(n_points);
    Point2 pos = start;
    std::size_t leg = 0;
    for (int k = 0; k < n_points; ++k) {
        traj.push_back({static_cast<double>(k), pos, {}});
        double remaining_t = 1.0;
        while (remaining_t > 0.0 && leg < legs.size()) {
            if (legs[leg].speed_mps <= 0.0) throw ParamError("trajectory: leg speed must be > 0");
            const Point2 to_wp = legs[leg].waypoint - pos;
            const double d = norm(to_wp);
            const double step = legs[leg].speed_mps * remaining_t;
            if (step < d) {
                pos = pos + (step / d) * to_wp;
                remaining_t = 0.0;
            } else {
                pos = legs[leg].waypoint;
                remaining_t -= (legs[leg].speed_mps > 0.0) ? d / legs[leg].speed_mps : 0.0;
                ++leg;
            }
        }
    }
    fill_velocities(traj);
    return traj;
}

}  // namespace veriloc::scenario
