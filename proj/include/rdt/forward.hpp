#pragma once

#include <cmath>
#include <cstdio>
#include <random>
#include <stdexcept>
#include <vector>

#include "rdt/beam.hpp"
#include "rdt/fft.hpp"
#include "rdt/parallel.hpp"
#include "rdt/phantom.hpp"
#include "rdt/special_functions.hpp"
#include "rdt/types.hpp"

namespace rdt {

// Forward model: outgoing Green's functions, single-scattering (Born) fields
// for plane-wave and beam illumination, and synthesis of full raster-scan
// measurement records m(x, y) = u_y(x). Detectors always sit outside the
// object support (L > r), so the Green's function singularity is never
// quadratured.

/// Outgoing fundamental solution of the Helmholtz equation.
/// d=2: (i/4) H0^(1)(k0 |x|); d=3: exp(i k0 |x|)/(4 pi |x|).
inline cdouble greens(const Vec& x, double k0, int d) {
    const double n = x.norm();
    if (!(n > 0)) throw std::domain_error("greens: evaluation at the singularity");
    if (d == 2) return cdouble(0.0, 0.25) * hankel1_0(k0 * n);
    if (d == 3) {
        const double ph = k0 * n;
        return cdouble(std::cos(ph), std::sin(ph)) * (1.0 / (4.0 * pi * n));
    }
    throw std::invalid_argument("greens: unsupported dimension");
}

/// Midpoint voxel grid over the phantom bounding box [-half, half]^d.
struct VoxelGrid {
    int n = 128;
    double half = 1.0;
    double cell() const { return 2.0 * half / n; }
    double coord(int i) const { return -half + (i + 0.5) * cell(); }
    double diag(int d) const { return cell() * std::sqrt(static_cast<double>(d)); }
    double volume_element(int d) const { return d == 2 ? cell() * cell() : cell() * cell() * cell(); }
};

inline VoxelGrid voxel_grid_for(const Phantom& p, int n) { return VoxelGrid{n, p.support_radius}; }

namespace forward_detail {

inline void require_outside(const Vec& x, const Phantom& p, const VoxelGrid& vg) {
    if (x.norm() < p.support_radius + vg.diag(p.d))
        throw std::domain_error("observation inside scatterer unsupported");
}

}  // namespace forward_detail

/// Born-scattered field of the unit plane wave exp(i<x', s>) with |s| = k0:
/// w(x, s) = integral G(x - x') f(x') exp(i<x', s>) dx', midpoint rule.
inline cdouble plane_wave_field(const Phantom& p, double k0, const Vec& s, const Vec& x,
                                const VoxelGrid& vg) {
    forward_detail::require_outside(x, p, vg);
    const double vol = vg.volume_element(p.d);
    cdouble acc(0.0, 0.0);
    auto cell_term = [&](const Vec& xp) {
        const cdouble f = eval_potential(p, xp);
        if (f == cdouble(0.0, 0.0)) return;
        const double ph = dot(xp, s);
        acc += greens(x - xp, k0, p.d) * f * cdouble(std::cos(ph), std::sin(ph));
    };
    if (p.d == 2) {
        for (int a = 0; a < vg.n; ++a)
            for (int b = 0; b < vg.n; ++b) cell_term(Vec(vg.coord(a), vg.coord(b)));
    } else {
        for (int a = 0; a < vg.n; ++a)
            for (int b = 0; b < vg.n; ++b)
                for (int c = 0; c < vg.n; ++c) cell_term(Vec(vg.coord(a), vg.coord(b), vg.coord(c)));
    }
    return acc * vol;
}

/// Born field of the shifted beam: sphere quadrature of
/// a(s) w(x, s) exp(-i<y_shift, s>) over the density's support. Precomputes
/// G(x - x') f(x') once and contracts it per node.
inline cdouble born_field(const Phantom& p, const HerglotzDensity& a, double k0, const Vec& nu,
                          const Vec& y_shift, const Vec& x, const VoxelGrid& vg, int order) {
    forward_detail::require_outside(x, p, vg);
    if (std::fabs(dot(y_shift, nu)) > 1e-10)
        throw std::invalid_argument("born_field: shift must lie in the scan plane");
    const SphereRule rule = make_sphere_rule(p.d, k0, order);
    const double vol = vg.volume_element(p.d);

    std::vector<Vec> pts;
    std::vector<cdouble> gf;
    auto collect = [&](const Vec& xp) {
        const cdouble f = eval_potential(p, xp);
        if (f == cdouble(0.0, 0.0)) return;
        pts.push_back(xp);
        gf.push_back(greens(x - xp, k0, p.d) * f * vol);
    };
    if (p.d == 2) {
        for (int ia = 0; ia < vg.n; ++ia)
            for (int ib = 0; ib < vg.n; ++ib) collect(Vec(vg.coord(ia), vg.coord(ib)));
    } else {
        for (int ia = 0; ia < vg.n; ++ia)
            for (int ib = 0; ib < vg.n; ++ib)
                for (int ic = 0; ic < vg.n; ++ic) collect(Vec(vg.coord(ia), vg.coord(ib), vg.coord(ic)));
    }

    cdouble acc(0.0, 0.0);
    for (size_t q = 0; q < rule.nodes.size(); ++q) {
        const cdouble av = eval_density(a, rule.nodes[q], k0);
        if (av == cdouble(0.0, 0.0)) continue;
        cdouble w(0.0, 0.0);
        for (size_t j = 0; j < pts.size(); ++j) {
            const double ph = dot(pts[j], rule.nodes[q]);
            w += gf[j] * cdouble(std::cos(ph), std::sin(ph));
        }
        const double shift_ph = -dot(y_shift, rule.nodes[q]);
        acc += rule.weights[q] * av * w * cdouble(std::cos(shift_ph), std::sin(shift_ph));
    }
    return acc;
}

struct DetectorGrid {
    double spacing = 0.5;
    int count = 64;  ///< points per tangential axis
    bool nyquist_override = false;
    double half_width() const { return spacing * count / 2.0; }
};

struct ScanGrid {
    double spacing = 0.5;
    int count = 64;  ///< shifts per in-plane axis of nu^perp
    std::vector<Vec> basis;
};

inline ScanGrid make_scan_grid(const ScanGeometry& g, double spacing, int count) {
    ScanGrid s;
    s.spacing = spacing;
    s.count = count;
    s.basis = g.scan_basis();
    return s;
}

struct AccuracyKnobs {
    int sphere_order = 512;  ///< angular quadrature order (Ns)
    int voxels = 128;        ///< volume cells per axis (Nv)
    double gamma = 0.95;     ///< rim-clip factor for spectral work
    double taper_flat = 0.6; ///< Tukey flat fraction
    double noise_snr_db = 0; ///< 0 disables the additive-noise plumbing
    uint64_t seed = 0;
    double runtime_budget_s = 600.0;
};

struct MeasurementRecord {
    ScanGeometry geometry;
    DetectorGrid detector;
    ScanGrid scan;
    HerglotzDensity density;
    AccuracyKnobs knobs;
    Array2C samples;  ///< rows: scan index, cols: detector index

    int detector_points() const { return geometry.d == 2 ? detector.count : detector.count * detector.count; }
    int scan_points() const { return geometry.d == 2 ? scan.count : scan.count * scan.count; }

    /// Detector point for a linear index (row-major over tangential axes).
    Vec detector_point(int ix) const {
        const double dx = detector.spacing;
        if (geometry.d == 2) return Vec((ix - detector.count / 2) * dx, geometry.L);
        const int i1 = ix % detector.count, i2 = ix / detector.count;
        return Vec((i1 - detector.count / 2) * dx, (i2 - detector.count / 2) * dx, geometry.L);
    }
    /// Scan shift for a linear index.
    Vec scan_point(int jy) const {
        const double dy = scan.spacing;
        if (geometry.d == 2) return ((jy - scan.count / 2) * dy) * scan.basis[0];
        const int j1 = jy % scan.count, j2 = jy / scan.count;
        return ((j1 - scan.count / 2) * dy) * scan.basis[0] + ((j2 - scan.count / 2) * dy) * scan.basis[1];
    }
};

namespace forward_detail {

/// d=2 fast path for the plane-wave field table w(x_i, s_q): per detector
/// point, FFT the voxel columns along the first axis and Lagrange-interpolate
/// the spectrum at the node frequencies s_q1, then contract the second axis
/// with precomputed phase tables. Matches the direct midpoint sum to ~1e-12.
inline void plane_wave_table_2d(const Phantom& p, double k0, const SphereRule& rule,
                                const std::vector<Vec>& det_points, const VoxelGrid& vg,
                                const std::vector<char>& node_active, Array2C& w_table) {
    const int nv = vg.n;
    const int ns = static_cast<int>(rule.nodes.size());
    const int nx = static_cast<int>(det_points.size());
    const double vol = vg.volume_element(2);
    const double u0 = vg.coord(0);
    const double du = vg.cell();

    // f on the voxel grid (row a = first axis)
    std::vector<cdouble> f(static_cast<size_t>(nv) * nv);
    bool any = false;
    for (int a = 0; a < nv; ++a)
        for (int b = 0; b < nv; ++b) {
            const cdouble v = eval_potential(p, Vec(vg.coord(a), vg.coord(b)));
            f[static_cast<size_t>(a) * nv + b] = v;
            any = any || v != cdouble(0.0, 0.0);
        }
    if (!any) {
        w_table = Array2C(nx, ns);
        return;
    }

    // second-axis phase tables e^{i u_b s2}, shared across detector points
    std::vector<cdouble> e2(static_cast<size_t>(ns) * nv);
    for (int q = 0; q < ns; ++q) {
        if (!node_active[static_cast<size_t>(q)]) continue;
        const double s2 = rule.nodes[static_cast<size_t>(q)][1];
        for (int b = 0; b < nv; ++b) {
            const double ph = vg.coord(b) * s2;
            e2[static_cast<size_t>(q) * nv + b] = cdouble(std::cos(ph), std::sin(ph));
        }
    }

    const int pad = next_pow2(detail::kOversample * nv);
    const double domega = 2.0 * pi / (pad * du);

    w_table = Array2C(nx, ns);
    parallel_for(0, nx, [&](int ix) {
        const Vec x = det_points[static_cast<size_t>(ix)];
        // bins[b][m]: padded FFT along the first voxel axis of G*f
        std::vector<cdouble> bins(static_cast<size_t>(nv) * pad, cdouble(0));
        std::vector<cdouble> col(static_cast<size_t>(pad));
        for (int b = 0; b < nv; ++b) {
            std::fill(col.begin(), col.end(), cdouble(0));
            for (int a = 0; a < nv; ++a) {
                const cdouble fv = f[static_cast<size_t>(a) * nv + b];
                if (fv == cdouble(0.0, 0.0)) continue;
                const Vec xp(vg.coord(a), vg.coord(b));
                col[static_cast<size_t>(a)] = greens(x - xp, k0, 2) * fv * vol;
            }
            fft_pow2(col, +1);
            std::copy(col.begin(), col.end(), bins.begin() + static_cast<size_t>(b) * pad);
        }
        constexpr int W = detail::kLagrangeWidth;
        double lw[W];
        for (int q = 0; q < ns; ++q) {
            if (!node_active[static_cast<size_t>(q)]) continue;
            const double s1 = rule.nodes[static_cast<size_t>(q)][0];
            const double mu = s1 / domega;
            const int base = static_cast<int>(std::floor(mu)) - (W / 2 - 1);
            detail::lagrange_weights<W>(mu - base, lw);
            int idx[W];
            for (int l = 0; l < W; ++l) idx[l] = ((base + l) % pad + pad) % pad;
            cdouble acc(0.0, 0.0);
            const cdouble* e2q = &e2[static_cast<size_t>(q) * nv];
            for (int b = 0; b < nv; ++b) {
                const cdouble* row = &bins[static_cast<size_t>(b) * pad];
                cdouble t(0.0, 0.0);
                for (int l = 0; l < W; ++l) t += lw[l] * row[idx[l]];
                acc += t * e2q[b];
            }
            const double ph0 = s1 * u0;  // FFT assumed the first sample at u = 0
            w_table.at(ix, q) = acc * cdouble(std::cos(ph0), std::sin(ph0));
        }
    });
}

/// Direct (no FFT) plane-wave table for d = 3; intended for small grids.
inline void plane_wave_table_3d(const Phantom& p, double k0, const SphereRule& rule,
                                const std::vector<Vec>& det_points, const VoxelGrid& vg,
                                const std::vector<char>& node_active, Array2C& w_table) {
    const int nv = vg.n;
    const int ns = static_cast<int>(rule.nodes.size());
    const int nx = static_cast<int>(det_points.size());
    const double vol = vg.volume_element(3);

    std::vector<Vec> pts;
    std::vector<cdouble> fv;
    for (int a = 0; a < nv; ++a)
        for (int b = 0; b < nv; ++b)
            for (int c = 0; c < nv; ++c) {
                const Vec xp(vg.coord(a), vg.coord(b), vg.coord(c));
                const cdouble v = eval_potential(p, xp);
                if (v == cdouble(0.0, 0.0)) continue;
                pts.push_back(xp);
                fv.push_back(v * vol);
            }

    w_table = Array2C(nx, ns);
    parallel_for(0, nx, [&](int ix) {
        const Vec x = det_points[static_cast<size_t>(ix)];
        std::vector<cdouble> gf(pts.size());
        for (size_t j = 0; j < pts.size(); ++j) gf[j] = greens(x - pts[j], k0, 3) * fv[j];
        for (int q = 0; q < ns; ++q) {
            if (!node_active[static_cast<size_t>(q)]) continue;
            const Vec& s = rule.nodes[static_cast<size_t>(q)];
            cdouble acc(0.0, 0.0);
            for (size_t j = 0; j < pts.size(); ++j) {
                const double ph = dot(pts[j], s);
                acc += gf[j] * cdouble(std::cos(ph), std::sin(ph));
            }
            w_table.at(ix, q) = acc;
        }
    });
}

}  // namespace forward_detail

/// Synthesizes the full raster-scan record samples[j, i] = u_{y_j}(x_i).
/// Factorized: the plane-wave table w(x_i, s_q) is computed once, then every
/// scan position is a weighted contraction over the quadrature nodes (done
/// with an oversampled spreading FFT along the scan axis for d = 2).
inline MeasurementRecord simulate_scan(const Phantom& p, const HerglotzDensity& a,
                                       const ScanGeometry& g, const DetectorGrid& det,
                                       const ScanGrid& scan, const AccuracyKnobs& knobs) {
    g.validate();
    if (p.support_radius >= g.L) throw config_error("simulate: support radius must satisfy L > r");
    const double nyquist = pi / g.k0;
    if (!det.nyquist_override && det.spacing > nyquist + 1e-12)
        throw precondition_error("simulate: detector spacing violates half-wavelength sampling");
    if (!det.nyquist_override && scan.spacing > nyquist + 1e-12)
        throw precondition_error("simulate: scan spacing violates half-wavelength sampling");

    MeasurementRecord rec;
    rec.geometry = g;
    rec.detector = det;
    rec.scan = scan;
    rec.density = a;
    rec.knobs = knobs;

    const VoxelGrid vg = voxel_grid_for(p, knobs.voxels);
    const SphereRule rule = make_sphere_rule(g.d, g.k0, knobs.sphere_order);

    // coarse cost model (flops at ~1e9/s/core); a blown budget warns, never aborts
    {
        const double nx = g.d == 2 ? det.count : double(det.count) * det.count;
        const double nodes = static_cast<double>(rule.nodes.size());
        const double vox = std::pow(double(knobs.voxels), g.d);
        const double flops = g.d == 2 ? nx * (vox * 60.0 + nodes * knobs.voxels * 110.0) + nx * nodes * 120.0
                                      : nx * nodes * vox * 8.0 + double(scan.count) * scan.count * nx * nodes * 8.0;
        const double projected_s = flops / (1e9 * effective_threads());
        if (knobs.runtime_budget_s > 0 && projected_s > knobs.runtime_budget_s)
            std::fprintf(stderr,
                         "warning: projected simulation time %.0fs exceeds the %.0fs budget\n",
                         projected_s, knobs.runtime_budget_s);
    }
    const int ns = static_cast<int>(rule.nodes.size());

    std::vector<char> active(static_cast<size_t>(ns));
    std::vector<cdouble> a_at_node(static_cast<size_t>(ns));
    for (int q = 0; q < ns; ++q) {
        a_at_node[static_cast<size_t>(q)] = eval_density(a, rule.nodes[static_cast<size_t>(q)], g.k0);
        active[static_cast<size_t>(q)] = a_at_node[static_cast<size_t>(q)] != cdouble(0.0, 0.0);
    }

    const int nx = rec.detector_points();
    std::vector<Vec> det_points(static_cast<size_t>(nx));
    for (int ix = 0; ix < nx; ++ix) det_points[static_cast<size_t>(ix)] = rec.detector_point(ix);

    Array2C w_table;
    if (g.d == 2)
        forward_detail::plane_wave_table_2d(p, g.k0, rule, det_points, vg, active, w_table);
    else
        forward_detail::plane_wave_table_3d(p, g.k0, rule, det_points, vg, active, w_table);

    const int ny = rec.scan_points();
    rec.samples = Array2C(ny, nx);

    if (g.d == 2) {
        // m[j, ix] = sum_q (wt_q a_q w[ix, q]) e^{-i (j dy) <t, s_q>}
        const Vec t = scan.basis[0];
        std::vector<double> gfreq(static_cast<size_t>(ns));
        for (int q = 0; q < ns; ++q) gfreq[static_cast<size_t>(q)] = dot(t, rule.nodes[static_cast<size_t>(q)]);
        parallel_for(0, nx, [&](int ix) {
            NonuniformToneSum tone(ny, scan.spacing, -1);
            for (int q = 0; q < ns; ++q) {
                if (!active[static_cast<size_t>(q)]) continue;
                const cdouble c = rule.weights[static_cast<size_t>(q)] * a_at_node[static_cast<size_t>(q)] *
                                  w_table.at(ix, q);
                tone.add(c, gfreq[static_cast<size_t>(q)]);
            }
            const std::vector<cdouble> col = tone.resolve();
            for (int j = 0; j < ny; ++j) rec.samples.at(j, ix) = col[static_cast<size_t>(j)];
        });
    } else {
        parallel_for(0, ny, [&](int jy) {
            const Vec y = rec.scan_point(jy);
            std::vector<cdouble> coef(static_cast<size_t>(ns));
            for (int q = 0; q < ns; ++q) {
                if (!active[static_cast<size_t>(q)]) {
                    coef[static_cast<size_t>(q)] = cdouble(0);
                    continue;
                }
                const double ph = -dot(y, rule.nodes[static_cast<size_t>(q)]);
                coef[static_cast<size_t>(q)] = rule.weights[static_cast<size_t>(q)] *
                                               a_at_node[static_cast<size_t>(q)] *
                                               cdouble(std::cos(ph), std::sin(ph));
            }
            for (int ix = 0; ix < nx; ++ix) {
                cdouble acc(0.0, 0.0);
                for (int q = 0; q < ns; ++q)
                    if (active[static_cast<size_t>(q)]) acc += w_table.at(ix, q) * coef[static_cast<size_t>(q)];
                rec.samples.at(jy, ix) = acc;
            }
        });
    }

    if (knobs.noise_snr_db > 0) {
        double rms = 0;
        for (const auto& z : rec.samples.v) rms += std::norm(z);
        rms = std::sqrt(rms / static_cast<double>(rec.samples.size()));
        const double sigma = rms * std::pow(10.0, -knobs.noise_snr_db / 20.0) / std::sqrt(2.0);
        std::mt19937_64 rng(knobs.seed);
        std::normal_distribution<double> gauss(0.0, sigma);
        for (auto& z : rec.samples.v) z += cdouble(gauss(rng), gauss(rng));
    }
    return rec;
}

/// Reference sample for cross-checks: the same quadrature evaluated the naive
/// way, one (scan, detector) pair at a time.
inline cdouble simulate_reference_sample(const Phantom& p, const HerglotzDensity& a,
                                         const ScanGeometry& g, const MeasurementRecord& rec,
                                         int jy, int ix) {
    const VoxelGrid vg = voxel_grid_for(p, rec.knobs.voxels);
    return born_field(p, a, g.k0, g.nu, rec.scan_point(jy), rec.detector_point(ix), vg,
                      rec.knobs.sphere_order);
}

}  // namespace rdt
