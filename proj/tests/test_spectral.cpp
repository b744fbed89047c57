#include <doctest.h>

#include <cmath>
#include <random>

#include "rdt/spectral.hpp"

using rdt::cdouble;
using rdt::HerglotzDensity;
using rdt::Phantom;
using rdt::Primitive;
using rdt::ScanGeometry;
using rdt::TaperSpec;
using rdt::Vec;

namespace {

ScanGeometry transmission_2d(double k0, double r, double L) {
    ScanGeometry g;
    g.d = 2;
    g.k0 = k0;
    g.omega = Vec(0.0, 1.0);
    g.nu = Vec(0.0, 1.0);
    g.r = r;
    g.L = L;
    return g;
}

HerglotzDensity gaussian_density(double A, const Vec& omega) {
    HerglotzDensity a;
    a.variant = HerglotzDensity::Variant::Gaussian;
    a.waist_A = A;
    a.omega = omega;
    return a;
}

TaperSpec no_taper() {
    TaperSpec t;
    t.detector_axis = false;
    t.scan_axis = false;
    return t;
}

}  // namespace

TEST_CASE("planar transform: discrete delta, Gaussian pair, round trip, shift") {
    const int n = 512;
    const double dx = 0.1;

    std::vector<cdouble> delta(n, cdouble(0));
    delta[n / 2] = cdouble(1.0 / dx, 0.0);  // unit-mass spike at the origin
    const auto flat = rdt::planar_dft_1d(delta, dx, -1);
    for (const auto& v : flat) CHECK(std::abs(v - cdouble(1.0 / std::sqrt(2.0 * rdt::pi), 0.0)) < 1e-12);

    const int ng = 1024;
    const double dxg = 0.05;
    std::vector<cdouble> gauss(ng);
    for (int j = 0; j < ng; ++j) {
        const double x = (j - ng / 2) * dxg;
        gauss[static_cast<size_t>(j)] = std::exp(-0.5 * x * x);
    }
    const auto spec = rdt::planar_dft_1d(gauss, dxg, -1);
    for (int m = 0; m < ng; ++m) {
        const double k = 2.0 * rdt::pi * (m - ng / 2) / (ng * dxg);
        if (std::fabs(k) > 6.0) continue;
        CHECK(std::abs(spec[static_cast<size_t>(m)] - cdouble(std::exp(-0.5 * k * k), 0.0)) < 1e-8);
    }

    // forward then spectral-inverse is the identity (dk weights)
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1, 1);
    std::vector<cdouble> sig(256);
    for (auto& z : sig) z = cdouble(u(rng), u(rng));
    const auto fwd = rdt::planar_dft_1d(sig, 0.3, -1);
    const double dk = 2.0 * rdt::pi / (256 * 0.3);
    const auto back = rdt::planar_dft_1d(fwd, dk, +1);
    for (size_t j = 0; j < sig.size(); ++j) CHECK(std::abs(back[j] - sig[j]) < 1e-12);

    // shift theorem: translating the samples modulates the spectrum
    std::vector<cdouble> shifted(sig.size());
    const int s = 7;
    for (size_t j = 0; j < sig.size(); ++j) shifted[j] = sig[(j + static_cast<size_t>(s)) % sig.size()];
    const auto fs = rdt::planar_dft_1d(shifted, 0.3, -1);
    for (int m = 0; m < 256; ++m) {
        const double k = 2.0 * rdt::pi * (m - 128) / (256 * 0.3);
        const double ph = k * s * 0.3;
        const cdouble expect = fwd[static_cast<size_t>(m)] * cdouble(std::cos(ph), std::sin(ph));
        CHECK(std::abs(fs[static_cast<size_t>(m)] - expect) < 1e-10 * (1.0 + std::abs(expect)));
    }
}

TEST_CASE("measurement spectrum: zero record and a pure synthetic tone") {
    const double k0 = 2.0 * rdt::pi;
    rdt::MeasurementRecord rec;
    rec.geometry = transmission_2d(k0, 1.0, 2.0);
    rec.detector = rdt::DetectorGrid{0.35, 64, false};
    rec.scan = rdt::make_scan_grid(rec.geometry, 0.35, 64);
    rec.samples = rdt::Array2C(64, 64);
    const auto zero_spec = rdt::measurement_spectrum(rec, no_taper());
    for (const auto& z : zero_spec.data.v) CHECK(z == cdouble(0.0, 0.0));

    // place the tone exactly on FFT bins; the scan transform uses the
    // inverse convention, so e^{-i xi* y} peaks at +xi*
    const double kstar = 2.0 * rdt::pi * 9 / (64 * 0.35);
    const double xistar = 2.0 * rdt::pi * 5 / (64 * 0.35);
    for (int j = 0; j < 64; ++j)
        for (int i = 0; i < 64; ++i) {
            const double x = (i - 32) * 0.35, y = (j - 32) * 0.35;
            const double ph = kstar * x - xistar * y;
            rec.samples.at(j, i) = cdouble(std::cos(ph), std::sin(ph));
        }
    const auto spec = rdt::measurement_spectrum(rec, no_taper());
    double best = 0;
    int bi = -1, bj = -1;
    for (int j = 0; j < 64; ++j)
        for (int i = 0; i < 64; ++i)
            if (std::abs(spec.data.at(j, i)) > best) {
                best = std::abs(spec.data.at(j, i));
                bi = i;
                bj = j;
            }
    CHECK(spec.k[static_cast<size_t>(bi)] == doctest::Approx(kstar));
    CHECK(spec.xi[static_cast<size_t>(bj)] == doctest::Approx(xistar));
}

TEST_CASE("reduction constant: substitution value, unimodular L factor, rim") {
    ScanGeometry g = transmission_2d(1.0, 1.0, 3.0);
    const cdouble c = rdt::reduction_constant(0.0, 0.0, g, 0.95);
    const cdouble expect = rdt::pi * cdouble(0.0, 1.0) * cdouble(std::cos(3.0), std::sin(3.0));
    CHECK(std::abs(c - expect) < 1e-14);

    ScanGeometry g7 = g;
    g7.L = 7.0;
    CHECK(std::abs(std::abs(rdt::reduction_constant(0.4, 0.3, g, 0.95)) -
                   std::abs(rdt::reduction_constant(0.4, 0.3, g7, 0.95))) < 1e-14);

    // |C| grows like 1/kappa(xi) toward the rim
    const double near = std::abs(rdt::reduction_constant(0.0, 0.94, g, 0.95));
    const double mid = std::abs(rdt::reduction_constant(0.0, 0.5, g, 0.95));
    CHECK(near / mid == doctest::Approx(rdt::kappa(0.5, 1.0) / rdt::kappa(0.94, 1.0)).epsilon(1e-12));
    CHECK_THROWS_AS((void)rdt::reduction_constant(0.96, 0.0, g, 0.95), std::domain_error);
}

TEST_CASE("reduced measurements: unit synthetic spectrum and the extension") {
    const double k0 = 2.0;
    ScanGeometry g = transmission_2d(k0, 1.0, 2.0);
    rdt::SpectrumGrid spec;
    spec.k0 = k0;
    const int n = 32;
    const double dfreq = 4.0 * k0 / n;  // generous band so some bins get clipped
    spec.k.resize(n);
    spec.xi.resize(n);
    for (int i = 0; i < n; ++i) spec.k[static_cast<size_t>(i)] = (i - n / 2) * dfreq;
    spec.xi = spec.k;
    spec.data = rdt::Array2C(n, n);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            if (std::fabs(spec.k[static_cast<size_t>(i)]) < 0.95 * k0 &&
                std::fabs(spec.xi[static_cast<size_t>(j)]) < 0.95 * k0)
                spec.data.at(j, i) =
                    rdt::reduction_constant(std::fabs(spec.k[static_cast<size_t>(i)]),
                                            std::fabs(spec.xi[static_cast<size_t>(j)]), g, 0.95);
        }
    const auto red = rdt::reduce_measurements(spec, g, 0.95);
    CHECK(red.clipped_bins > 0);
    for (int j = 0; j < red.values.rows; ++j)
        for (int i = 0; i < red.values.cols; ++i)
            CHECK(std::abs(red.values.at(j, i) - cdouble(1.0, 0.0)) < 1e-12);
    for (size_t j = 0; j < red.sigma.size(); ++j) {
        CHECK(std::fabs(red.sigma[j].norm() - k0) < 1e-10);
        CHECK((red.sigma_reflected[j] - rdt::householder_reflect(red.sigma[j], g.nu)).norm() == 0.0);
        CHECK(red.value_ext(static_cast<int>(j), 0) == red.values.at(static_cast<int>(j), 0));
    }
}

TEST_CASE("relation right-hand side: vanishing cases and the transmission form") {
    const double k0 = 2.0;
    ScanGeometry g = transmission_2d(k0, 1.0, 3.0);
    const Phantom empty = rdt::make_phantom(2, 1.0, {});
    const auto a = gaussian_density(0.5, g.omega);
    CHECK(rdt::fdt_rhs(empty, a, g, 0.3, -0.2, 0.95) == cdouble(0.0, 0.0));

    const Phantom p = rdt::make_phantom(
        2, 1.0, {Primitive{Primitive::Kind::GaussianBlob, Vec(0.0, 0.0), 0.15, cdouble(1.0, 0.0)}});
    // in transmission the second hemisphere never contributes: the relation
    // reduces to C a(h(xi)) F f(h(k) - h(xi))
    const double k = 0.7, xi = -0.4;
    const Vec eta = rdt::hemisphere_lift(Vec(k, 0.0), g.e_d(), k0);
    const Vec sig = rdt::hemisphere_lift(xi * g.scan_basis()[0], g.nu, k0);
    const cdouble manual = rdt::reduction_constant(k, std::fabs(xi), g, 0.95) *
                           rdt::eval_density(a, sig, k0) * rdt::eval_potential_fourier(p, eta - sig);
    CHECK(std::abs(rdt::fdt_rhs(p, a, g, k, xi, 0.95) - manual) < 1e-14 * std::abs(manual));

    // classical single-plane-wave form at k = 0
    const cdouble cls = rdt::classical_fdt_rhs(p, g, k0 * g.e_d(), 0.0, 0.95);
    const cdouble pref = std::sqrt(rdt::pi / 2.0) * cdouble(0.0, 1.0) *
                         cdouble(std::cos(k0 * g.L), std::sin(k0 * g.L)) / k0;
    CHECK(std::abs(cls - pref * rdt::eval_potential_fourier(p, Vec::zero(2))) < 1e-14);
    CHECK(rdt::classical_fdt_rhs(empty, g, k0 * g.e_d(), 0.3, 0.95) == cdouble(0.0, 0.0));
}

TEST_CASE("verification of an empty scene reports zero errors everywhere") {
    const double k0 = 2.0 * rdt::pi;
    ScanGeometry g = transmission_2d(k0, 1.0, 2.0);
    rdt::DetectorGrid det{0.35, 32, false};
    rdt::ScanGrid scan = rdt::make_scan_grid(g, 0.35, 32);
    rdt::AccuracyKnobs knobs;
    knobs.sphere_order = 64;
    knobs.voxels = 32;
    const auto a = gaussian_density(0.5, g.omega);
    const Phantom empty = rdt::make_phantom(2, 1.0, {});
    const auto rec = rdt::simulate_scan(empty, a, g, det, scan, knobs);
    const auto rep = rdt::verify_fdt(rec, empty, a, g, rdt::TaperSpec{});
    CHECK(rep.interior_max_rel == 0.0);
    CHECK(rep.rim_max_rel == 0.0);
}

TEST_CASE("refining the sampling does not worsen the relation residual") {
    const double k0 = 2.0 * rdt::pi;
    const auto a = gaussian_density(0.5, Vec(0.0, 1.0));
    const Phantom p = rdt::make_phantom(
        2, 2.0, {Primitive{Primitive::Kind::GaussianBlob, Vec(0.0, 0.0), 0.5,
                           cdouble(1e-3 * k0 * k0, 0.0)}});
    auto residual = [&](double dx, int count, int ns) {
        ScanGeometry g = transmission_2d(k0, 2.0, 4.0);
        rdt::DetectorGrid det{dx, count, false};
        rdt::ScanGrid scan = rdt::make_scan_grid(g, dx, count);
        rdt::AccuracyKnobs knobs;
        knobs.sphere_order = ns;
        knobs.voxels = 64;
        const auto rec = rdt::simulate_scan(p, a, g, det, scan, knobs);
        return rdt::verify_fdt(rec, p, a, g, rdt::TaperSpec{}).interior_max_rel;
    };
    const double coarse = residual(0.35, 64, 256);
    const double fine = residual(0.175, 256, 512);  // half spacing, twice the aperture
    CHECK(fine <= 1.1 * coarse);  // slack for windowing interplay
}

TEST_CASE("end-to-end: simulated record matches the scanning relation") {
    const double k0 = 2.0 * rdt::pi;
    ScanGeometry g = transmission_2d(k0, 2.0, 4.0);
    rdt::DetectorGrid det{0.35, 128, false};
    rdt::ScanGrid scan = rdt::make_scan_grid(g, 0.35, 128);
    rdt::AccuracyKnobs knobs;
    knobs.sphere_order = 512;
    knobs.voxels = 64;
    const auto a = gaussian_density(0.5, g.omega);
    const Phantom p = rdt::make_phantom(
        2, 2.0, {Primitive{Primitive::Kind::GaussianBlob, Vec(0.0, 0.0), 0.5,
                           cdouble(1e-3 * k0 * k0, 0.0)}});
    const auto rec = rdt::simulate_scan(p, a, g, det, scan, knobs);
    TaperSpec taper;
    const auto rep = rdt::verify_fdt(rec, p, a, g, taper);
    CHECK(rep.interior_bins > 1000);
    CHECK(rep.interior_max_rel < 0.05);

    ScanGeometry other = g;
    other.L = 5.0;
    CHECK_THROWS_AS((void)rdt::verify_fdt(rec, p, a, other, taper), std::invalid_argument);

    // beyond the propagating band the spectrum drops under the noise floor
    const auto spec = rdt::measurement_spectrum(rec, taper);
    double interior_max = 0.0, evan_k = 0.0, evan_xi = 0.0;
    for (size_t j = 0; j < spec.xi.size(); ++j)
        for (size_t i = 0; i < spec.k.size(); ++i) {
            const double mag = std::abs(spec.data.at(static_cast<int>(j), static_cast<int>(i)));
            if (std::fabs(spec.k[i]) < k0 && std::fabs(spec.xi[j]) < k0)
                interior_max = std::max(interior_max, mag);
            if (std::fabs(spec.k[i]) > 1.05 * k0) evan_k = std::max(evan_k, mag);
            if (std::fabs(spec.xi[j]) > 1.05 * k0) evan_xi = std::max(evan_xi, mag);
        }
    CHECK(evan_k < 1e-3 * interior_max);
    CHECK(evan_xi < 1e-2 * interior_max);
}
