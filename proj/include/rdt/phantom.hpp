#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "rdt/special_functions.hpp"
#include "rdt/types.hpp"

namespace rdt {

// Analytic weakly scattering phantoms. Every primitive has a closed-form
// Fourier transform under the (2pi)^(-d/2) convention, so simulated data can
// be checked against exact spectra and reconstructions against ground truth.

struct Primitive {
    enum class Kind { Ball, GaussianBlob };
    Kind kind = Kind::Ball;
    Vec center;
    double size = 1.0;  ///< ball radius or Gaussian width w (std deviation)
    cdouble contrast{1.0, 0.0};
};

struct PhantomReport {
    double max_abs_potential = 0.0;
    double born_parameter = 0.0;  ///< max|f| * r^2, keep small for the Born regime
    double blob_tail_at_support = 0.0;
    std::vector<std::string> warnings;
};

struct Phantom {
    int d = 2;
    double support_radius = 1.0;
    std::vector<Primitive> primitives;
    PhantomReport report;
};

/// Validating constructor. Balls must lie inside the support ball exactly;
/// Gaussian blobs are truncated there, so only the tail amplitude at the
/// boundary is bounded (hard limit 1e-3, advisory warning past the 6w ball).
inline Phantom make_phantom(int d, double support_radius, std::vector<Primitive> prims) {
    if (d < 2 || d > 3) throw config_error("phantom: dimension must be 2 or 3");
    if (!(support_radius > 0)) throw config_error("phantom: support radius must be positive");
    Phantom p;
    p.d = d;
    p.support_radius = support_radius;
    p.primitives = std::move(prims);
    double max_f = 0.0;
    for (const auto& prim : p.primitives) {
        if (prim.center.dim != d) throw config_error("phantom: primitive center dimension mismatch");
        if (!(prim.size > 0)) throw config_error("phantom: primitive size must be positive");
        const double cn = prim.center.norm();
        max_f += std::abs(prim.contrast);
        if (prim.kind == Primitive::Kind::Ball) {
            if (cn + prim.size > support_radius + 1e-12)
                throw config_error("phantom: ball primitive exceeds the support radius");
        } else {
            const double margin = support_radius - cn;
            if (margin <= 0) throw config_error("phantom: blob center outside the support ball");
            const double tail = std::exp(-0.5 * margin * margin / (prim.size * prim.size));
            p.report.blob_tail_at_support = std::max(p.report.blob_tail_at_support, tail);
            if (tail > 1e-2)
                throw config_error("phantom: Gaussian blob spills over the support radius");
            if (cn + 6.0 * prim.size > support_radius)
                p.report.warnings.push_back("blob 6w ball exceeds support radius; truncation " +
                                            std::to_string(tail));
        }
    }
    p.report.max_abs_potential = max_f;
    p.report.born_parameter = max_f * support_radius * support_radius;
    return p;
}

/// Scattering potential f(x); identically zero outside the support ball.
inline cdouble eval_potential(const Phantom& p, const Vec& x) {
    if (x.norm() >= p.support_radius) return {0.0, 0.0};
    cdouble f(0.0, 0.0);
    for (const auto& prim : p.primitives) {
        const double dist2 = (x - prim.center).norm2();
        if (prim.kind == Primitive::Kind::Ball) {
            if (dist2 < prim.size * prim.size) f += prim.contrast;
        } else {
            f += prim.contrast * std::exp(-0.5 * dist2 / (prim.size * prim.size));
        }
    }
    return f;
}

/// Closed-form F_d f(y) under F phi(k) = (2pi)^(-d/2) integral phi e^(-i<k,x>).
/// Ball d=2: contrast e^(-i<y,c>) R J1(R|y|)/|y|; d=3 the sin-cos form.
/// Gaussian blob: contrast w^d e^(-|y|^2 w^2/2) e^(-i<y,c>) (untruncated tail).
inline cdouble eval_potential_fourier(const Phantom& p, const Vec& y) {
    const double rho = y.norm();
    cdouble sum(0.0, 0.0);
    for (const auto& prim : p.primitives) {
        const double phase = -dot(y, prim.center);
        const cdouble shift(std::cos(phase), std::sin(phase));
        double radial = 0.0;
        if (prim.kind == Primitive::Kind::Ball) {
            const double R = prim.size;
            if (p.d == 2) {
                radial = rho < 1e-14 ? 0.5 * R * R : R * bessel_j1(R * rho) / rho;
            } else {
                if (rho < 1e-7) {
                    radial = std::pow(2.0 * pi, -1.5) * (4.0 * pi / 3.0) * R * R * R;
                } else {
                    const double u = rho * R;
                    radial = std::pow(2.0 * pi, -1.5) * 4.0 * pi * (std::sin(u) - u * std::cos(u)) /
                             (rho * rho * rho);
                }
            }
        } else {
            const double w = prim.size;
            radial = std::pow(w, p.d) * std::exp(-0.5 * rho * rho * w * w);
        }
        sum += prim.contrast * radial * shift;
    }
    return sum;
}

/// Refractive index n = sqrt(1 + f/k0^2), principal branch.
inline cdouble refractive_index_from_potential(cdouble f, double k0) {
    if (!(k0 > 0)) throw std::domain_error("refractive index: k0 must be positive");
    const cdouble arg = 1.0 + f / (k0 * k0);
    if (std::abs(arg.imag()) < 1e-300 && arg.real() < 0)
        throw std::domain_error("refractive index: nonphysical contrast");
    return std::sqrt(arg);
}

}  // namespace rdt
