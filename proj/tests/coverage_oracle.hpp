#pragma once

// Brute-force coverage oracle shared by the unit and acceptance suites.
// Region clouds are generated from a 720x720 angular grid of (eta, sigma)
// pairs; a raster cell counts as oracle-covered when some cloud point lies
// within one cell size of its center. Comparisons against the analytic masks
// exclude a 2-cell band around analytic region boundaries, where the point
// cloud's granularity and the cell-center sampling both alias.

#include <cmath>
#include <cstdint>
#include <vector>

#include "rdt/geometry.hpp"

namespace coverage_oracle {

struct OracleMask {
    int n = 0;
    double k0 = 1.0;
    std::vector<uint8_t> covered;
    bool at(int i, int j) const {
        if (i < 0 || j < 0 || i >= n || j >= n) return false;
        return covered[static_cast<size_t>(j) * n + i] != 0;
    }
};

/// Marks every raster cell near a point of {eta - sigma : eta in eta_arc,
/// sigma in sigma_arc} sampled on n_ang-point angular grids.
inline void splat_cloud(OracleMask& m, const rdt::Arc& eta_arc, const rdt::Arc& sigma_arc,
                        double k0, int n_ang = 720) {
    if (eta_arc.empty || sigma_arc.empty) return;
    const double cell = 4.0 * k0 / m.n;
    const double tol2 = cell * cell;
    for (int ie = 0; ie < n_ang; ++ie) {
        const double te = 2.0 * rdt::pi * (ie + 0.5) / n_ang;
        if (!eta_arc.contains(te)) continue;
        const double ex = k0 * std::cos(te), ey = k0 * std::sin(te);
        for (int is = 0; is < n_ang; ++is) {
            const double ts = 2.0 * rdt::pi * (is + 0.5) / n_ang;
            if (!sigma_arc.contains(ts)) continue;
            const double yx = ex - k0 * std::cos(ts);
            const double yy = ey - k0 * std::sin(ts);
            const double fi = (yx + 2.0 * k0) / cell - 0.5;
            const double fj = (yy + 2.0 * k0) / cell - 0.5;
            const int i0 = static_cast<int>(std::lround(fi));
            const int j0 = static_cast<int>(std::lround(fj));
            for (int dj = -1; dj <= 1; ++dj)
                for (int di = -1; di <= 1; ++di) {
                    const int i = i0 + di, j = j0 + dj;
                    if (i < 0 || j < 0 || i >= m.n || j >= m.n) continue;
                    const double cx = -2.0 * k0 + (i + 0.5) * cell;
                    const double cy = -2.0 * k0 + (j + 0.5) * cell;
                    if ((cx - yx) * (cx - yx) + (cy - yy) * (cy - yy) <= tol2)
                        m.covered[static_cast<size_t>(j) * m.n + i] = 1;
                }
        }
    }
}

enum class Level { NaiveCovered, AdvancedCovered, Reachable };

/// Oracle raster for one of the nested coverage levels.
inline OracleMask oracle_mask(const rdt::ScanGeometry& g, Level level, int n, int n_ang = 720) {
    OracleMask m;
    m.n = n;
    m.k0 = g.k0;
    m.covered.assign(static_cast<size_t>(n) * n, 0);
    const rdt::SigmaArcs arcs = rdt::sigma_arcs_2d(g);
    const rdt::Arc s_ed = rdt::Arc::half_plane(g.e_d());
    splat_cloud(m, s_ed, arcs.sigma1, g.k0, n_ang);
    if (level == Level::NaiveCovered) return m;
    splat_cloud(m, intersect(arcs.sigma1.negated(), s_ed), arcs.sigma_tilde, g.k0, n_ang);
    if (level == Level::AdvancedCovered) return m;
    splat_cloud(m, s_ed, arcs.sigma2, g.k0, n_ang);
    return m;
}

/// Cells where an analytic-mask region boundary passes within Chebyshev
/// distance `band`.
inline std::vector<uint8_t> boundary_band(const std::vector<uint8_t>& covered, int n, int band) {
    std::vector<uint8_t> out(covered.size(), 0);
    auto at = [&](int i, int j) -> int {
        if (i < 0 || j < 0 || i >= n || j >= n) return 0;
        return covered[static_cast<size_t>(j) * n + i];
    };
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            const int c = at(i, j);
            bool edge = false;
            for (int dj = -band; dj <= band && !edge; ++dj)
                for (int di = -band; di <= band && !edge; ++di)
                    if (at(i + di, j + dj) != c) edge = true;
            if (edge) out[static_cast<size_t>(j) * n + i] = 1;
        }
    return out;
}

/// Interior disagreement count between an analytic covered-mask and the
/// oracle, excluding cells within 2 cells of a region boundary in either
/// raster. Where the true region is thinner than a cell (the cusps of the
/// reflection coverage) every cell is boundary, and only one of the two
/// rasters can see it.
inline int interior_mismatches(const std::vector<uint8_t>& analytic, const OracleMask& oracle,
                               int n) {
    const auto band_a = boundary_band(analytic, n, 2);
    const auto band_o = boundary_band(oracle.covered, n, 2);
    int bad = 0;
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            const size_t idx = static_cast<size_t>(j) * n + i;
            if (band_a[idx] || band_o[idx]) continue;
            if ((analytic[idx] != 0) != oracle.at(i, j)) ++bad;
        }
    return bad;
}

/// Covered-mask (0/1) of an analytic CoverageMask at a nesting level.
inline std::vector<uint8_t> analytic_level_mask(const rdt::CoverageMask& mask, Level level) {
    std::vector<uint8_t> out(mask.tags.size(), 0);
    for (int j = 0; j < mask.n; ++j)
        for (int i = 0; i < mask.n; ++i) {
            const rdt::RegionTag t = mask.at(i, j);
            bool c = false;
            switch (level) {
                case Level::NaiveCovered: c = t == rdt::RegionTag::Y1; break;
                case Level::AdvancedCovered:
                    c = t == rdt::RegionTag::Y1 || t == rdt::RegionTag::YTilde;
                    break;
                case Level::Reachable: c = t != rdt::RegionTag::Outside; break;
            }
            out[static_cast<size_t>(j) * mask.n + i] = c ? 1 : 0;
        }
    return out;
}

}  // namespace coverage_oracle
