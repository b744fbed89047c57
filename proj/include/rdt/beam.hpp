#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "rdt/geometry.hpp"
#include "rdt/types.hpp"

namespace rdt {

// Herglotz densities on the sphere of radius k0 and the incident beams they
// generate, u_inc(x) = integral over the sphere of a(s) exp(i<x,s>) dS(s).
// The density vanishes on the closed half-sphere opposite the beam direction,
// which encodes the propagation direction omega.

struct HerglotzDensity {
    enum class Variant { Gaussian, UniformHalf, Tabulated };
    Variant variant = Variant::Gaussian;
    Vec omega;             ///< beam direction, unit
    double waist_A = 1.0;  ///< Gaussian waist parameter A > 0
    /// Tabulated variant (d=2): sorted node angles on [0, 2pi) with values,
    /// interpolated periodically-linearly, masked to S_omega.
    std::vector<double> table_angles;
    std::vector<cdouble> table_values;
    /// Optional C^2 taper width (degrees) at the support boundary; 0 = hard mask.
    double taper_deg = 0.0;
};

namespace beam_detail {

/// C^2 smoothstep on [0,1].
inline double smooth5(double u) {
    u = std::clamp(u, 0.0, 1.0);
    return u * u * u * (10.0 + u * (-15.0 + 6.0 * u));
}

/// Support factor: 1 deep inside S_omega, 0 outside, C^2 ramp of the given
/// angular width just inside the boundary (angle measured from the equator).
inline double support_factor(double cos_to_omega, double taper_deg) {
    if (cos_to_omega <= 0.0) return 0.0;
    if (taper_deg <= 0.0) return 1.0;
    const double width = taper_deg * pi / 180.0;
    const double ang_from_boundary = std::asin(std::min(1.0, cos_to_omega));
    return smooth5(ang_from_boundary / width);
}

inline cdouble tabulated_value(const HerglotzDensity& a, double theta) {
    const auto& ang = a.table_angles;
    const auto& val = a.table_values;
    if (ang.size() < 2 || ang.size() != val.size())
        throw std::invalid_argument("tabulated density: need >= 2 matching nodes");
    double t = std::fmod(theta, 2.0 * pi);
    if (t < 0) t += 2.0 * pi;
    auto it = std::upper_bound(ang.begin(), ang.end(), t);
    size_t hi = static_cast<size_t>(it - ang.begin());
    size_t lo = (hi == 0 ? ang.size() : hi) - 1;
    double a0 = ang[lo];
    double a1 = hi == ang.size() ? ang[0] + 2.0 * pi : ang[hi];
    if (hi == ang.size()) hi = 0;
    if (hi == 0 && t < a0) a0 -= 2.0 * pi;  // wrapped segment
    const double span = a1 - a0;
    const double u = span > 0 ? (t - a0) / span : 0.0;
    return val[lo] * (1.0 - u) + val[hi % val.size()] * u;
}

}  // namespace beam_detail

/// Density value at a point s with |s| = k0. Enforces the half-sphere support
/// rule a(s) = 0 for <s, omega> <= 0 for every variant.
inline cdouble eval_density(const HerglotzDensity& a, const Vec& s, double k0) {
    if (std::fabs(s.norm() - k0) > 1e-10 * std::max(1.0, k0))
        throw std::invalid_argument("eval_density: |s| must equal k0");
    const double so = dot(s, a.omega);
    if (so <= 0.0) return {0.0, 0.0};
    const double mask = beam_detail::support_factor(so / k0, a.taper_deg);
    switch (a.variant) {
        case HerglotzDensity::Variant::Gaussian: {
            const Vec s_perp = s - so * a.omega;
            return cdouble(mask * std::exp(-a.waist_A * s_perp.norm2()), 0.0);
        }
        case HerglotzDensity::Variant::UniformHalf:
            return cdouble(mask, 0.0);
        case HerglotzDensity::Variant::Tabulated: {
            if (s.dim != 2)
                throw std::invalid_argument("tabulated density: only available for d = 2");
            return mask * beam_detail::tabulated_value(a, std::atan2(s[1], s[0]));
        }
    }
    return {0.0, 0.0};
}

/// Quadrature rule for integrals over the sphere of radius k0. d=2: midpoint
/// (shifted trapezoid) rule in angle, exact for the half-circle counting and
/// spectrally accurate for smooth periodic integrands. d=3: Gauss-Legendre in
/// the polar cosine times a midpoint azimuth grid.
struct SphereRule {
    std::vector<Vec> nodes;
    std::vector<double> weights;
    int order = 0;
};

namespace beam_detail {

inline void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
    x.resize(static_cast<size_t>(n));
    w.resize(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
        double t = std::cos(pi * (i + 0.75) / (n + 0.5));
        double p0 = 0, p1 = 0;
        for (int iter = 0; iter < 100; ++iter) {
            p0 = 1.0;
            p1 = 0.0;
            for (int j = 0; j < n; ++j) {
                double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j + 1.0) * t * p1 - j * p2) / (j + 1.0);
            }
            const double dp = n * (t * p0 - p1) / (t * t - 1.0);
            const double dt = p0 / dp;
            t -= dt;
            if (std::fabs(dt) < 1e-15) break;
        }
        p1 = 0.0;
        p0 = 1.0;
        for (int j = 0; j < n; ++j) {
            double p2 = p1;
            p1 = p0;
            p0 = ((2.0 * j + 1.0) * t * p1 - j * p2) / (j + 1.0);
        }
        const double dp = n * (t * p0 - p1) / (t * t - 1.0);
        x[static_cast<size_t>(i)] = t;
        w[static_cast<size_t>(i)] = 2.0 / ((1.0 - t * t) * dp * dp);
    }
}

}  // namespace beam_detail

inline SphereRule make_sphere_rule(int d, double k0, int order) {
    if (order < 16) throw std::invalid_argument("sphere rule: quadrature order too low");
    SphereRule rule;
    rule.order = order;
    if (d == 2) {
        rule.nodes.reserve(static_cast<size_t>(order));
        const double w = k0 * 2.0 * pi / order;
        for (int q = 0; q < order; ++q) {
            const double phi = 2.0 * pi * (q + 0.5) / order;
            rule.nodes.emplace_back(k0 * std::cos(phi), k0 * std::sin(phi));
            rule.weights.push_back(w);
        }
    } else if (d == 3) {
        const int n_pol = std::max(8, order / 2), n_az = order;
        std::vector<double> z, wz;
        beam_detail::gauss_legendre(n_pol, z, wz);
        rule.nodes.reserve(static_cast<size_t>(n_pol) * n_az);
        for (int i = 0; i < n_pol; ++i) {
            const double rho = std::sqrt(std::max(0.0, 1.0 - z[static_cast<size_t>(i)] * z[static_cast<size_t>(i)]));
            for (int j = 0; j < n_az; ++j) {
                const double phi = 2.0 * pi * (j + 0.5) / n_az;
                rule.nodes.push_back(k0 * Vec(rho * std::cos(phi), rho * std::sin(phi), z[static_cast<size_t>(i)]));
                rule.weights.push_back(k0 * k0 * wz[static_cast<size_t>(i)] * (2.0 * pi / n_az));
            }
        }
    } else {
        throw std::invalid_argument("sphere rule: unsupported dimension");
    }
    return rule;
}

/// Incident field of the shifted beam, u_inc(x - y_shift), by sphere
/// quadrature. The shift must lie in the scan plane nu^perp.
inline cdouble incident_field(const HerglotzDensity& a, double k0, const Vec& x, const Vec& y_shift,
                              const Vec& nu, int order) {
    if (std::fabs(dot(y_shift, nu)) > 1e-10)
        throw std::invalid_argument("incident_field: shift must lie in the scan plane");
    const SphereRule rule = make_sphere_rule(x.dim, k0, order);
    const Vec z = x - y_shift;
    cdouble sum(0.0, 0.0);
    for (size_t q = 0; q < rule.nodes.size(); ++q) {
        const cdouble av = eval_density(a, rule.nodes[q], k0);
        if (av == cdouble(0.0, 0.0)) continue;
        const double ph = dot(z, rule.nodes[q]);
        sum += rule.weights[q] * av * cdouble(std::cos(ph), std::sin(ph));
    }
    return sum;
}

/// Coupling ratio b(sigma) = a(sigma)/a(H_nu sigma) on Sigma_2.
inline cdouble density_ratio_b(const HerglotzDensity& a, const Vec& sigma, const Vec& nu, double k0) {
    const cdouble num = eval_density(a, sigma, k0);
    const cdouble den = eval_density(a, householder_reflect(sigma, nu), k0);
    if (std::abs(den) < 1e-300)
        throw std::domain_error("density ratio undefined outside Sigma_2");
    return num / den;
}

/// Report of the d=3 Gaussian-beam recoverability condition: the covariant
/// derivative Db(sigma)(nu x sigma) = 4 A b(sigma) <sigma,nu><nu,omega><omega,nu x sigma>
/// must be nonzero off a null set of Sigma_2, which holds iff <nu,omega> != 0.
struct BeamConditionReport {
    bool satisfied = false;
    double nu_dot_omega = 0.0;
    int samples = 0;
    double zero_fraction = 0.0;
    double max_abs_derivative = 0.0;
};

/// Closed-form derivative of the coupling ratio along nu x sigma for the
/// Gaussian density (d = 3, sigma on the k0-sphere).
inline cdouble gaussian_b_derivative(double A, const Vec& omega, const Vec& nu, const Vec& sigma) {
    auto proj = [&](const Vec& v) { return v - dot(v, omega) * omega; };
    const Vec hs = householder_reflect(sigma, nu);
    const double b = std::exp(A * (proj(hs).norm2() - proj(sigma).norm2()));
    return cdouble(4.0 * A * b * dot(sigma, nu) * dot(nu, omega) * dot(omega, cross(nu, sigma)), 0.0);
}

inline BeamConditionReport gaussian_condition_check(double A, const Vec& omega, const Vec& nu,
                                                    double k0, int sample_count) {
    if (omega.dim != 3 || nu.dim != 3)
        throw std::invalid_argument("gaussian_condition_check: requires d = 3");
    BeamConditionReport rep;
    rep.nu_dot_omega = dot(nu, omega);
    ScanGeometry g;
    g.d = 3;
    g.k0 = k0;
    g.omega = omega;
    g.nu = nu;
    g.L = 2.0;
    g.r = 1.0;

    // Fibonacci lattice on the sphere, filtered to Sigma_2.
    const double golden = (1.0 + std::sqrt(5.0)) / 2.0;
    int found = 0;
    double zeros = 0;
    for (int i = 0; i < 64 * sample_count && found < sample_count; ++i) {
        const double z = 1.0 - 2.0 * (i + 0.5) / (64.0 * sample_count);
        const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
        const double phi = 2.0 * pi * i / golden;
        const Vec sigma = k0 * Vec(rho * std::cos(phi), rho * std::sin(phi), z);
        const SigmaClass c = classify_sigma(sigma, g);
        if (c != SigmaClass::Sigma2 && c != SigmaClass::Sigma2Tilde) continue;
        ++found;
        const double dv = std::abs(gaussian_b_derivative(A, omega, nu, sigma));
        rep.max_abs_derivative = std::max(rep.max_abs_derivative, dv);
        if (dv < 1e-12) zeros += 1.0;
    }
    rep.samples = found;
    rep.zero_fraction = found > 0 ? zeros / found : 0.0;
    rep.satisfied = std::fabs(rep.nu_dot_omega) > tau_geo(1.0) && rep.zero_fraction <= 0.05;
    return rep;
}

}  // namespace rdt
