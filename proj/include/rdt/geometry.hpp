#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

#include "rdt/parallel.hpp"
#include "rdt/types.hpp"

namespace rdt {

// Scan geometry and the Fourier-coverage machinery: hemisphere lifts,
// Householder reflections, the beam-direction splitting Sigma_1/Sigma_2 and
// its 2D refinement Sigma~, and exact membership tests for the coverage sets
// Y, Y_1, Y~ and Y_2 reachable from raster-scan measurements.

/// Relative half-space tolerance; all open/closed tests treat |ip| < tau_geo(k0)
/// as "on the boundary". Boundary sets have measure zero and never contribute
/// to the reconstruction integrals.
inline double tau_geo(double k0) { return 1e-9 * k0; }

struct ScanGeometry {
    int d = 2;        ///< ambient dimension, >= 2
    double k0 = 1.0;  ///< wavenumber (rad/length)
    Vec omega;        ///< beam propagation direction, unit
    Vec nu;           ///< scan-plane normal, unit
    double L = 2.0;   ///< detector plane offset along e_d
    double r = 1.0;   ///< object support radius

    Vec e_d() const { return Vec::axis(d, d - 1); }

    /// In-plane unit basis of the scan plane nu^perp (1 vector for d=2,
    /// 2 for d=3), chosen deterministically.
    std::vector<Vec> scan_basis() const {
        if (d == 2) return {perp2(nu)};
        Vec t1 = cross(nu, Vec::axis(3, 2));
        if (t1.norm() < 1e-8) t1 = cross(nu, Vec::axis(3, 0));
        t1 = t1.normalized();
        Vec t2 = cross(nu, t1);
        return {t1, t2.normalized()};
    }

    /// In-plane basis of the detector plane e_d^perp: the first d-1 axes.
    std::vector<Vec> detector_basis() const {
        std::vector<Vec> b;
        for (int i = 0; i + 1 < d; ++i) b.push_back(Vec::axis(d, i));
        return b;
    }

    void validate() const {
        if (d < 2 || d > 3) throw config_error("geometry: dimension must be 2 or 3");
        if (!(k0 > 0)) throw config_error("geometry: k0 must be positive");
        if (!(r > 0)) throw config_error("geometry: r must be positive");
        if (!(L > r)) throw config_error("geometry: detector offset must satisfy L > r");
        if (std::fabs(omega.norm() - 1.0) > 1e-12) throw config_error("geometry: omega must be unit");
        if (std::fabs(nu.norm() - 1.0) > 1e-12) throw config_error("geometry: nu must be unit");
        if (omega.dim != d || nu.dim != d) throw config_error("geometry: vector dimension mismatch");
    }
};

/// Axial wavenumber kappa(xi) = sqrt(k0^2 - |xi|^2) of a propagating component.
inline double kappa(double xi_norm, double k0) {
    if (xi_norm > k0 + 1e-12) throw std::domain_error("kappa: evanescent frequency");
    const double rad = k0 * k0 - xi_norm * xi_norm;
    if (rad <= 1e-12) return 0.0;  // clamp the rim band to the propagating limit
    return std::sqrt(rad);
}

inline double kappa(const Vec& xi, double k0) { return kappa(xi.norm(), k0); }

/// Lift h_v(xi) = xi + kappa(xi) v of an in-plane frequency onto the
/// hemisphere S_v of radius k0 oriented along v.
inline Vec hemisphere_lift(const Vec& xi, const Vec& v, double k0) {
    if (std::fabs(dot(xi, v)) > 1e-10) throw std::invalid_argument("hemisphere_lift: xi not in v^perp");
    const double n = xi.norm();
    if (n >= k0) throw std::domain_error("hemisphere_lift: |xi| must be < k0");
    return xi + kappa(n, k0) * v;
}

/// Reflection across the hyperplane orthogonal to the unit vector v.
inline Vec householder_reflect(const Vec& x, const Vec& v) {
    if (std::fabs(v.norm() - 1.0) > 1e-12) throw std::invalid_argument("householder_reflect: v must be unit");
    return x - (2.0 * dot(x, v)) * v;
}

enum class SigmaClass { Sigma1, Sigma2, Sigma2Tilde, OutsideSupport, Boundary };

/// Classifies a beam direction sigma (|sigma| = k0) against the scan geometry:
///   Sigma1      sigma in S_omega, reflection leaves S_omega (direct data)
///   Sigma2      sigma in S_omega, reflection stays inside (coupled data)
///   Sigma2Tilde d=2 subset of Sigma2 whose coupling is still resolvable
///   Boundary    a deciding inner product lies within tau_geo of zero
inline SigmaClass classify_sigma(const Vec& sigma, const ScanGeometry& g) {
    const double tau = tau_geo(g.k0);
    if (std::fabs(sigma.norm() - g.k0) > 1e-10 * std::max(1.0, g.k0))
        throw std::invalid_argument("classify_sigma: |sigma| must equal k0");
    const double so = dot(sigma, g.omega);
    if (std::fabs(so) < tau) return SigmaClass::Boundary;
    if (so < 0) return SigmaClass::OutsideSupport;
    const Vec hs = householder_reflect(sigma, g.nu);
    const double ho = dot(hs, g.omega);
    if (std::fabs(ho) < tau) return SigmaClass::Boundary;
    if (ho < 0) return SigmaClass::Sigma1;
    if (g.d != 2) return SigmaClass::Sigma2;
    const Vec ed = g.e_d();
    const double se = dot(sigma, ed);
    const double he = dot(hs, ed);
    if (std::fabs(se) < tau || std::fabs(he) < tau) return SigmaClass::Boundary;
    if (se > 0 && he < 0) return SigmaClass::Sigma2Tilde;
    return SigmaClass::Sigma2;
}

// ---------------------------------------------------------------------------
// Circular arcs (d = 2). Every Sigma set is an intersection of half-planes
// with the circle, hence a single arc of width <= pi; we represent arcs by
// center angle and half-width.

struct Arc {
    double center = 0.0;  ///< angle of the arc midpoint
    double half = 0.0;    ///< half-width in radians, <= pi/2 after intersections
    bool empty = true;

    static Arc half_plane(const Vec& v) {
        Arc a;
        a.center = std::atan2(v[1], v[0]);
        a.half = pi / 2.0;
        a.empty = false;
        return a;
    }
    static Arc none() { return Arc{}; }

    double lo() const { return center - half; }
    double hi() const { return center + half; }
    double width() const { return empty ? 0.0 : 2.0 * half; }

    static double wrap(double a) {
        while (a > pi) a -= 2.0 * pi;
        while (a <= -pi) a += 2.0 * pi;
        return a;
    }

    bool contains(double theta, double tol = 0.0) const {
        if (empty) return false;
        return std::fabs(wrap(theta - center)) < half - tol;
    }

    /// Arc of the antipodal set -A.
    Arc negated() const {
        Arc a = *this;
        if (!a.empty) a.center = wrap(a.center + pi);
        return a;
    }

    friend Arc intersect(const Arc& a, const Arc& b) {
        if (a.empty || b.empty) return none();
        const double delta = wrap(b.center - a.center);
        const double lo = std::max(-a.half, delta - b.half);
        const double hi = std::min(a.half, delta + b.half);
        // slivers at the angular tolerance are roundoff artifacts of
        // degenerate configurations (nu = +-omega and the like)
        if (hi - lo <= 1e-9) return none();
        Arc r;
        r.center = wrap(a.center + 0.5 * (lo + hi));
        r.half = 0.5 * (hi - lo);
        r.empty = false;
        return r;
    }
};

struct SigmaArcs {
    Arc s_omega;      ///< support semicircle S_omega
    Arc sigma1;       ///< directly readable directions
    Arc sigma2;       ///< coupled directions
    Arc sigma_tilde;  ///< resolvable subset of sigma2
};

/// Angular intervals of S_omega, Sigma_1, Sigma_2 and Sigma~ for d = 2.
/// Sigma_1 = S^1 in Omega_omega with reflection outside S_omega, i.e. the arc
/// cut by the half-planes of omega and -H_nu(omega); Sigma_2 uses +H_nu(omega).
inline SigmaArcs sigma_arcs_2d(const ScanGeometry& g) {
    if (g.d != 2) throw std::invalid_argument("sigma_arcs_2d: requires d = 2");
    const Vec h_omega = householder_reflect(g.omega, g.nu);
    SigmaArcs arcs;
    arcs.s_omega = Arc::half_plane(g.omega);
    arcs.sigma1 = intersect(arcs.s_omega, Arc::half_plane(-1.0 * h_omega));
    arcs.sigma2 = intersect(arcs.s_omega, Arc::half_plane(h_omega));
    const Vec ed = g.e_d();
    const Vec h_ed = householder_reflect(ed, g.nu);
    arcs.sigma_tilde = intersect(intersect(arcs.sigma2, Arc::half_plane(ed)), Arc::half_plane(-1.0 * h_ed));
    return arcs;
}

enum class CoverageMode { Naive, Advanced };
enum class RegionTag : uint8_t { Y1, YTilde, Y2Gray, Outside };

inline bool region_covered(RegionTag t, CoverageMode mode, int d) {
    switch (t) {
        case RegionTag::Y1: return true;
        case RegionTag::YTilde: return mode == CoverageMode::Advanced;
        case RegionTag::Y2Gray: return mode == CoverageMode::Advanced && d >= 3;
        default: return false;
    }
}

namespace coverage_detail {

/// Decides whether y = eta - sigma admits a pair with eta in eta_arc and
/// sigma in sigma_arc, both on the circle of radius k0. Candidates eta are
/// the at-most-two intersections of the circle |eta| = k0 with |eta - y| = k0.
inline bool exists_pair_2d(const Vec& y, const Arc& eta_arc, const Arc& sigma_arc, double k0) {
    if (eta_arc.empty || sigma_arc.empty) return false;
    const double n = y.norm();
    const double tau = tau_geo(k0);
    if (n > 2.0 * k0 + tau) return false;
    if (n < tau) return !intersect(eta_arc, sigma_arc).empty;  // eta = sigma
    const double h2 = k0 * k0 - 0.25 * n * n;
    if (h2 < 0) return false;
    const double h = std::sqrt(h2);
    const Vec mid = 0.5 * y;
    const Vec t = (1.0 / n) * perp2(y);
    for (int s = -1; s <= 1; s += 2) {
        const Vec eta = mid + (s * h) * t;
        const Vec sigma = eta - y;
        if (eta_arc.contains(std::atan2(eta[1], eta[0])) &&
            sigma_arc.contains(std::atan2(sigma[1], sigma[0])))
            return true;
    }
    return false;
}

/// d = 3 fallback: sample sigma over a polar grid of the hemisphere arc set
/// and test whether eta = y + sigma lands on the eta-hemisphere within a band
/// matched to the sampling density.
inline bool exists_pair_sampled_3d(const Vec& y, const Vec& eta_axis,
                                   const std::vector<Vec>& sigma_samples, double k0) {
    const double band = k0 * 2.0 * pi / 256.0;
    for (const Vec& sigma : sigma_samples) {
        const Vec eta = y + sigma;
        if (std::fabs(eta.norm() - k0) <= band && dot(eta, eta_axis) > 0) return true;
    }
    return false;
}

inline std::vector<Vec> sample_sigma_class_3d(const ScanGeometry& g, bool want_sigma1) {
    std::vector<Vec> out;
    const int n = 256;
    out.reserve(4096);
    for (int i = 0; i < n; ++i) {
        const double z = -1.0 + (i + 0.5) * (2.0 / n);
        const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
        for (int j = 0; j < n; ++j) {
            const double phi = 2.0 * pi * (j + 0.5) / n;
            const Vec s = g.k0 * Vec(rho * std::cos(phi), rho * std::sin(phi), z);
            const SigmaClass c = classify_sigma(s, g);
            if (want_sigma1 ? (c == SigmaClass::Sigma1)
                            : (c == SigmaClass::Sigma2 || c == SigmaClass::Sigma2Tilde))
                out.push_back(s);
        }
    }
    return out;
}

}  // namespace coverage_detail

/// Region tag of a frequency point y for the given scan geometry and
/// backpropagation mode. Exact (circle-intersection based) for d = 2;
/// sampled fallback for d = 3.
inline RegionTag coverage_membership(const Vec& y, const ScanGeometry& g, CoverageMode mode) {
    if (g.d == 2) {
        const SigmaArcs arcs = sigma_arcs_2d(g);
        const Arc s_ed = Arc::half_plane(g.e_d());
        if (coverage_detail::exists_pair_2d(y, s_ed, arcs.sigma1, g.k0)) return RegionTag::Y1;
        if (mode == CoverageMode::Advanced) {
            const Arc eta_tilde = intersect(arcs.sigma1.negated(), s_ed);
            if (coverage_detail::exists_pair_2d(y, eta_tilde, arcs.sigma_tilde, g.k0))
                return RegionTag::YTilde;
        }
        if (coverage_detail::exists_pair_2d(y, s_ed, arcs.sigma2, g.k0)) return RegionTag::Y2Gray;
        return RegionTag::Outside;
    }
    if (g.d == 3) {
        static thread_local ScanGeometry cached;
        static thread_local bool have_cache = false;
        static thread_local std::vector<Vec> s1, s2;
        auto same = [&] {
            return have_cache && cached.k0 == g.k0 && (cached.omega - g.omega).norm() == 0 &&
                   (cached.nu - g.nu).norm() == 0;
        };
        if (!same()) {
            s1 = coverage_detail::sample_sigma_class_3d(g, true);
            s2 = coverage_detail::sample_sigma_class_3d(g, false);
            cached = g;
            have_cache = true;
        }
        const Vec ed = g.e_d();
        if (coverage_detail::exists_pair_sampled_3d(y, ed, s1, g.k0)) return RegionTag::Y1;
        if (coverage_detail::exists_pair_sampled_3d(y, ed, s2, g.k0)) return RegionTag::Y2Gray;
        return RegionTag::Outside;
    }
    throw std::invalid_argument("coverage_membership: unsupported dimension");
}

/// Region raster over [-2k0, 2k0]^2 evaluated at cell centers.
struct CoverageMask {
    int n = 0;
    double k0 = 1.0;
    CoverageMode mode = CoverageMode::Naive;
    int dim = 2;
    std::vector<RegionTag> tags;  // row-major, index j*n+i, y1 along i

    double cell() const { return 4.0 * k0 / n; }
    Vec center(int i, int j) const {
        return Vec(-2.0 * k0 + (i + 0.5) * cell(), -2.0 * k0 + (j + 0.5) * cell());
    }
    RegionTag at(int i, int j) const { return tags[static_cast<size_t>(j) * n + i]; }
    bool covered(int i, int j) const { return region_covered(at(i, j), mode, dim); }

    double covered_fraction() const {
        size_t c = 0;
        for (size_t idx = 0; idx < tags.size(); ++idx)
            if (region_covered(tags[idx], mode, dim)) ++c;
        return static_cast<double>(c) / static_cast<double>(tags.size());
    }
    double tag_fraction(RegionTag t) const {
        size_t c = 0;
        for (auto tag : tags)
            if (tag == t) ++c;
        return static_cast<double>(c) / static_cast<double>(tags.size());
    }
};

inline CoverageMask coverage_mask(const ScanGeometry& g, CoverageMode mode, int n) {
    if (n < 16) throw std::invalid_argument("coverage_mask: resolution must be >= 16");
    if (n > 8192) throw std::invalid_argument("coverage_mask: resolution above 8192 refused");
    if (g.d != 2) throw std::invalid_argument("coverage_mask: raster requires d = 2");
    CoverageMask m;
    m.n = n;
    m.k0 = g.k0;
    m.mode = mode;
    m.dim = g.d;
    m.tags.assign(static_cast<size_t>(n) * n, RegionTag::Outside);
    parallel_for(0, n, [&](int j) {
        for (int i = 0; i < n; ++i)
            m.tags[static_cast<size_t>(j) * n + i] = coverage_membership(m.center(i, j), g, mode);
    });
    return m;
}

}  // namespace rdt
