#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "rdt/beam.hpp"
#include "rdt/fft.hpp"
#include "rdt/geometry.hpp"
#include "rdt/spectral.hpp"
#include "rdt/types.hpp"

namespace rdt {

// Recovery of Fourier samples of the scattering potential from reduced
// measurements: direct division on the uncoupled pairs, elimination of the
// coupled pairs where one partner is already known, then gridding and masked
// Fourier inversion (naive or advanced backpropagation).

enum class Provenance : uint8_t { Direct, Eliminated };

struct SpectralSample {
    Vec y;
    cdouble value{0.0, 0.0};
    Provenance prov = Provenance::Direct;
    int src_xi = -1, src_k = -1;
};

/// Exact-point rendezvous for sample lookups. Lattice points produced by
/// different (eta, sigma) pairs coincide only up to roundoff, so keys are
/// quantized at 1e-7 k0 and neighbors are distance-checked; genuine lattice
/// spacings are orders of magnitude above the quantum.
class SampleStore {
public:
    explicit SampleStore(double k0) : quantum_(1e-7 * k0) {}

    int find(const Vec& y) const {
        const int64_t qx = quant(y[0]), qy = quant(y[1]);
        for (int dx = -1; dx <= 1; ++dx)
            for (int dy = -1; dy <= 1; ++dy) {
                auto it = map_.find(key(qx + dx, qy + dy));
                if (it == map_.end()) continue;
                const Vec& p = points_[static_cast<size_t>(it->second)];
                if (std::fabs(p[0] - y[0]) <= quantum_ && std::fabs(p[1] - y[1]) <= quantum_)
                    return it->second;
            }
        return -1;
    }

    void add(const Vec& y, int entry_index) {
        points_.push_back(y);
        map_.emplace(key(quant(y[0]), quant(y[1])), entry_index);
    }

private:
    int64_t quant(double v) const { return static_cast<int64_t>(std::llround(v / quantum_)); }
    static uint64_t key(int64_t a, int64_t b) {
        return static_cast<uint64_t>(a) * 0x9e3779b97f4a7c15ull ^ static_cast<uint64_t>(b);
    }
    double quantum_;
    std::unordered_map<uint64_t, int> map_;
    std::vector<Vec> points_;
};

/// Cartesian accumulation lattice over [-2k0, 2k0]^2 with FFT-aligned nodes
/// y_i = (i - n/2) dk, dk = 4 k0/n. Samples are spread with a tent kernel;
/// a node is resolvable once its accumulated weight passes w_min.
struct AccumGrid {
    int n = 256;
    double k0 = 1.0;
    double w_min = 0.05;
    std::vector<cdouble> sum;
    std::vector<double> w;

    AccumGrid(int n_, double k0_, double w_min_ = 0.05) : n(n_), k0(k0_), w_min(w_min_) {
        sum.assign(static_cast<size_t>(n) * n, cdouble(0));
        w.assign(static_cast<size_t>(n) * n, 0.0);
    }
    double dk() const { return 4.0 * k0 / n; }
    double node(int i) const { return (i - n / 2) * dk(); }

    void scatter(const Vec& y, cdouble v) {
        const double fx = y[0] / dk() + n / 2, fy = y[1] / dk() + n / 2;
        const int i0 = static_cast<int>(std::floor(fx)), j0 = static_cast<int>(std::floor(fy));
        const double tx = fx - i0, ty = fy - j0;
        const double wt[2][2] = {{(1 - tx) * (1 - ty), (1 - tx) * ty}, {tx * (1 - ty), tx * ty}};
        for (int a = 0; a < 2; ++a)
            for (int b = 0; b < 2; ++b) {
                const int i = i0 + a, j = j0 + b;
                if (i < 0 || i >= n || j < 0 || j >= n) continue;
                const size_t idx = static_cast<size_t>(j) * n + i;
                sum[idx] += wt[a][b] * v;
                w[idx] += wt[a][b];
            }
    }

    bool node_covered(int i, int j) const {
        if (i < 0 || i >= n || j < 0 || j >= n) return false;
        return w[static_cast<size_t>(j) * n + i] > w_min;
    }

    /// All four nodes of the bilinear footprint are covered.
    bool resolvable(const Vec& y) const {
        const double fx = y[0] / dk() + n / 2, fy = y[1] / dk() + n / 2;
        const int i0 = static_cast<int>(std::floor(fx)), j0 = static_cast<int>(std::floor(fy));
        for (int a = 0; a < 2; ++a)
            for (int b = 0; b < 2; ++b)
                if (!node_covered(i0 + a, j0 + b)) return false;
        return true;
    }

    cdouble interp(const Vec& y) const {
        const double fx = y[0] / dk() + n / 2, fy = y[1] / dk() + n / 2;
        const int i0 = static_cast<int>(std::floor(fx)), j0 = static_cast<int>(std::floor(fy));
        const double tx = fx - i0, ty = fy - j0;
        cdouble v(0.0, 0.0);
        for (int a = 0; a < 2; ++a)
            for (int b = 0; b < 2; ++b) {
                const size_t idx = static_cast<size_t>(j0 + b) * n + (i0 + a);
                const double wt = (a ? tx : 1 - tx) * (b ? ty : 1 - ty);
                if (w[idx] > 0) v += wt * sum[idx] / w[idx];
            }
        return v;
    }
};

struct SpectralSampleSet {
    std::vector<SpectralSample> entries;
    int skipped_small_density = 0;
};

/// Direct recovery F f(eta - sigma) = m^(eta, sigma)/a(sigma) on the
/// uncoupled directions. Each scan bin carries two hemisphere points, the
/// lift h_nu(xi) and its reflection h_-nu(xi); the stored value serves both
/// through the symmetric extension of the reduced measurements, so whichever
/// of the two lands in Sigma_1 yields a direct entry. Pairs whose density
/// value is below the noise floor are skipped and counted, not amplified.
inline SpectralSampleSet direct_fill(const ReducedMeasurements& red, const HerglotzDensity& a,
                                     const ScanGeometry& g) {
    SpectralSampleSet out;
    double a_max = 0.0;
    for (size_t n = 0; n < red.sigma.size(); ++n) {
        a_max = std::max(a_max, std::abs(eval_density(a, red.sigma[n], g.k0)));
        a_max = std::max(a_max, std::abs(eval_density(a, red.sigma_reflected[n], g.k0)));
    }
    const double floor_a = 1e-8 * a_max;
    auto fill_branch = [&](size_t n, const Vec& sigma) {
        if (classify_sigma(sigma, g) != SigmaClass::Sigma1) return;
        const cdouble av = eval_density(a, sigma, g.k0);
        if (std::abs(av) < floor_a) {
            out.skipped_small_density += static_cast<int>(red.eta.size());
            return;
        }
        for (size_t m = 0; m < red.eta.size(); ++m) {
            SpectralSample s;
            s.y = red.eta[m] - sigma;
            s.value = red.values.at(static_cast<int>(n), static_cast<int>(m)) / av;
            s.prov = Provenance::Direct;
            s.src_xi = static_cast<int>(n);
            s.src_k = static_cast<int>(m);
            out.entries.push_back(s);
        }
    };
    for (size_t n = 0; n < red.sigma.size(); ++n) {
        fill_branch(n, red.sigma[n]);
        fill_branch(n, red.sigma_reflected[n]);
    }
    return out;
}

struct ElimOptions {
    int max_sweeps = 10;
    double growth_fraction = 1e-3;   ///< stop when a sweep adds fewer new cells
    double conflict_rel_tol = 1e-3;  ///< residual tolerance before logging a conflict
    bool grid_assist = false;        ///< resolve partners from the bilinear grid too
    int grid_n = 256;
    double w_min = 0.05;
};

struct ElimReport {
    int sweeps = 0;
    int added = 0;
    int conflicts = 0;
    double max_conflict_rel = 0.0;
};

/// Iterative elimination on the coupled pairs: for sigma in Sigma_2 the
/// measurement couples phi(eta - sigma) and phi(eta - H_nu sigma); whenever
/// exactly one of the two is already known the other follows. Known values
/// come from the exact rendezvous store (lattice chains), optionally assisted
/// by bilinear grid interpolation for incommensurate lattices.
inline SpectralSampleSet elimination_solve(const ReducedMeasurements& red, const HerglotzDensity& a,
                                           const ScanGeometry& g, const SpectralSampleSet& seed,
                                           const ElimOptions& opt = {}, ElimReport* report = nullptr) {
    SpectralSampleSet out = seed;
    SampleStore store(g.k0);
    AccumGrid grid(opt.grid_n, g.k0, opt.w_min);
    for (size_t e = 0; e < out.entries.size(); ++e) {
        store.add(out.entries[e].y, static_cast<int>(e));
        grid.scatter(out.entries[e].y, out.entries[e].value);
    }

    std::vector<cdouble> a_sig(red.sigma.size()), a_ref(red.sigma.size());
    std::vector<bool> coupled(red.sigma.size(), false);
    for (size_t n = 0; n < red.sigma.size(); ++n) {
        const SigmaClass c = classify_sigma(red.sigma[n], g);
        if (c != SigmaClass::Sigma2 && c != SigmaClass::Sigma2Tilde) continue;
        a_sig[n] = eval_density(a, red.sigma[n], g.k0);
        a_ref[n] = eval_density(a, red.sigma_reflected[n], g.k0);
        coupled[n] = std::abs(a_sig[n]) > 0 && std::abs(a_ref[n]) > 0;
    }

    ElimReport rep;
    size_t covered_cells = 0;
    for (double wv : grid.w) covered_cells += wv > grid.w_min;

    for (int sweep = 0; sweep < opt.max_sweeps; ++sweep) {
        int added_entries = 0;
        size_t covered_before = covered_cells;
        for (size_t n = 0; n < red.sigma.size(); ++n) {
            if (!coupled[n]) continue;
            for (size_t m = 0; m < red.eta.size(); ++m) {
                const Vec y = red.eta[m] - red.sigma[n];
                const Vec pf = red.eta[m] - red.sigma_reflected[n];
                const int iy = store.find(y);
                const int ip = store.find(pf);
                const bool ky = iy >= 0 || (opt.grid_assist && grid.resolvable(y));
                const bool kp = ip >= 0 || (opt.grid_assist && grid.resolvable(pf));
                const cdouble v = red.values.at(static_cast<int>(n), static_cast<int>(m));
                if (ky && kp) {
                    const cdouble vy = iy >= 0 ? out.entries[static_cast<size_t>(iy)].value : grid.interp(y);
                    const cdouble vp = ip >= 0 ? out.entries[static_cast<size_t>(ip)].value : grid.interp(pf);
                    const double res = std::abs(a_sig[n] * vy + a_ref[n] * vp - v);
                    const double rel = res / std::max(std::abs(v), 1e-300);
                    if (rel > opt.conflict_rel_tol) {
                        ++rep.conflicts;
                        rep.max_conflict_rel = std::max(rep.max_conflict_rel, rel);
                    }
                    continue;  // first derivation kept
                }
                if (!ky && !kp) continue;
                SpectralSample s;
                s.prov = Provenance::Eliminated;
                s.src_xi = static_cast<int>(n);
                s.src_k = static_cast<int>(m);
                if (ky) {
                    const cdouble vy = iy >= 0 ? out.entries[static_cast<size_t>(iy)].value : grid.interp(y);
                    s.y = pf;
                    s.value = (v - a_sig[n] * vy) / a_ref[n];
                } else {
                    const cdouble vp = ip >= 0 ? out.entries[static_cast<size_t>(ip)].value : grid.interp(pf);
                    s.y = y;
                    s.value = (v - a_ref[n] * vp) / a_sig[n];
                }
                out.entries.push_back(s);
                store.add(s.y, static_cast<int>(out.entries.size()) - 1);
                grid.scatter(s.y, s.value);
                ++added_entries;
            }
        }
        size_t covered_now = 0;
        for (double wv : grid.w) covered_now += wv > grid.w_min;
        const size_t new_cells = covered_now - covered_before;
        covered_cells = covered_now;
        rep.added += added_entries;
        rep.sweeps = sweep + 1;
        if (added_entries == 0) break;
        if (new_cells < std::max<size_t>(1, static_cast<size_t>(opt.growth_fraction *
                                                                static_cast<double>(covered_before))))
            break;
    }
    if (report) *report = rep;
    return out;
}

/// Gridded spectrum with a coverage mask: tent-kernel scatter, weighted mean
/// per node, mask = (weight > w_min) intersected with the analytic coverage
/// region of the requested mode.
struct GriddedSpectrum {
    int n = 0;
    double k0 = 1.0;
    CoverageMode mode = CoverageMode::Naive;
    std::vector<cdouble> values;   ///< node means, row-major [j*n+i]
    std::vector<double> weights;
    std::vector<uint8_t> mask;

    double dk() const { return 4.0 * k0 / n; }
    double node(int i) const { return (i - n / 2) * dk(); }
    size_t idx(int i, int j) const { return static_cast<size_t>(j) * n + i; }
};

inline GriddedSpectrum grid_samples(const SpectralSampleSet& set, int n, CoverageMode mode,
                                    const ScanGeometry& g, double w_min = 0.05) {
    if (n < 32) throw std::invalid_argument("grid_samples: resolution must be >= 32");
    GriddedSpectrum out;
    out.n = n;
    out.k0 = g.k0;
    out.mode = mode;
    AccumGrid acc(n, g.k0, w_min);
    for (const auto& e : set.entries) acc.scatter(e.y, e.value);
    out.values.assign(static_cast<size_t>(n) * n, cdouble(0));
    out.weights = acc.w;
    out.mask.assign(static_cast<size_t>(n) * n, 0);
    parallel_for(0, n, [&](int j) {
        for (int i = 0; i < n; ++i) {
            const size_t id = out.idx(i, j);
            if (acc.w[id] > 0) out.values[id] = acc.sum[id] / acc.w[id];
            if (acc.w[id] > w_min) {
                const Vec y(out.node(i), out.node(j));
                out.mask[id] = region_covered(coverage_membership(y, g, mode), mode, g.d) ? 1 : 0;
            }
        }
    });
    return out;
}

/// Masked inverse Fourier transform of a gridded spectrum onto the FFT-dual
/// spatial lattice x_j = (j - n/2) dx, dx = 2 pi/(n dk).
struct ReconImage {
    int n = 0;
    double dx = 1.0;
    CoverageMode mode = CoverageMode::Naive;
    Array2C values;

    double coord(int i) const { return (i - n / 2) * dx; }
};

inline ReconImage backpropagate(const GriddedSpectrum& spec, CoverageMode mode,
                                const ScanGeometry& g) {
    if (mode != spec.mode) throw std::invalid_argument("backpropagate: mode does not match the mask");
    const int n = spec.n;
    ReconImage img;
    img.n = n;
    img.mode = mode;
    img.dx = 2.0 * pi / (n * spec.dk());
    if (img.dx * n / 2.0 < g.r)
        throw std::invalid_argument("backpropagate: image grid does not cover the support ball");
    Array2C work(n, n);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            const size_t id = spec.idx(i, j);
            work.at(j, i) = spec.mask[id] ? spec.values[id] : cdouble(0);
        }
    // separable centered transforms with e^{+i y x}, weight dk/sqrt(2 pi) per axis
    const double scale = spec.dk() / std::sqrt(2.0 * pi);
    std::vector<cdouble> line(static_cast<size_t>(n));
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) line[static_cast<size_t>(i)] = work.at(j, i);
        const auto t = centered_dft(line, +1, scale);
        for (int i = 0; i < n; ++i) work.at(j, i) = t[static_cast<size_t>(i)];
    }
    img.values = Array2C(n, n);
    std::vector<cdouble> col(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) col[static_cast<size_t>(j)] = work.at(j, i);
        const auto t = centered_dft(col, +1, scale);
        for (int j = 0; j < n; ++j) img.values.at(j, i) = t[static_cast<size_t>(j)];
    }
    return img;
}

}  // namespace rdt
