// Acceptance suite: end-to-end checks of the scanning diffraction relation,
// the coverage geometry, the elimination solver, backpropagation, the beam
// condition, special functions and persistence. One PASS/FAIL line per
// criterion; the process exit code is the number of failures.

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "coverage_oracle.hpp"
#include "quad_bessel_oracle.hpp"
#include "synthetic_reduced.hpp"

#include "rdt/config.hpp"
#include "rdt/io.hpp"
#include "rdt/recon.hpp"
#include "rdt/spectral.hpp"

using rdt::cdouble;
using rdt::CoverageMode;
using rdt::HerglotzDensity;
using rdt::Phantom;
using rdt::Primitive;
using rdt::RegionTag;
using rdt::ScanGeometry;
using rdt::Vec;

namespace {

int failures = 0;

void report(int id, const std::string& label, bool pass, const std::string& metrics) {
    std::printf("[%s] %02d %s: %s\n", pass ? "PASS" : "FAIL", id, label.c_str(), metrics.c_str());
    std::fflush(stdout);
    if (!pass) ++failures;
}

void guarded(int id, const std::string& label, const std::function<void(int, const std::string&)>& body) {
    try {
        body(id, label);
    } catch (const std::exception& e) {
        report(id, label, false, std::string("exception: ") + e.what());
    }
}

double wall_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, ...) {
    char buf[512];
    va_list ap;
    va_start(ap, f);
    std::vsnprintf(buf, sizeof buf, f, ap);
    va_end(ap);
    return buf;
}

ScanGeometry geo2(double k0, const Vec& omega, const Vec& nu, double r, double L) {
    ScanGeometry g;
    g.d = 2;
    g.k0 = k0;
    g.omega = omega;
    g.nu = nu;
    g.r = r;
    g.L = L;
    return g;
}

const Vec e2{0.0, 1.0};
const double inv_sqrt2 = 1.0 / std::sqrt(2.0);

// reference scenario: transmission scan of a weak Gaussian blob, wavelength 1
struct Scenario {
    double k0 = 2.0 * rdt::pi;
    ScanGeometry g = geo2(2.0 * rdt::pi, e2, e2, 4.0, 8.0);
    Phantom phantom;
    HerglotzDensity density;
    rdt::DetectorGrid det{0.35, 512, false};
    rdt::ScanGrid scan;
    rdt::AccuracyKnobs knobs;

    Scenario() {
        phantom = rdt::make_phantom(
            2, 4.0,
            {Primitive{Primitive::Kind::GaussianBlob, Vec(0.0, 0.0), 0.75,
                       cdouble(1e-3 * k0 * k0, 0.0)}});
        density.variant = HerglotzDensity::Variant::Gaussian;
        density.waist_A = 0.5;
        density.omega = g.omega;
        scan = rdt::make_scan_grid(g, 0.35, 512);
        knobs.sphere_order = 1024;
        knobs.voxels = 128;
    }
};

}  // namespace

int main() {
    std::printf("acceptance: raster-scan diffraction tomography\n");

    Scenario sc;
    rdt::MeasurementRecord record;  // shared between criteria 1 and 8

    guarded(1, "scanning relation end-to-end", [&](int id, const std::string& label) {
        const auto t0 = std::chrono::steady_clock::now();
        record = rdt::simulate_scan(sc.phantom, sc.density, sc.g, sc.det, sc.scan, sc.knobs);
        const rdt::FdtReport rep = rdt::verify_fdt(record, sc.phantom, sc.density, sc.g, rdt::TaperSpec{});
        const double wall = wall_since(t0);
        const bool pass = rep.interior_max_rel <= 0.05 && wall <= 600.0;
        report(id, label,
               pass, fmt("interior max rel %.3e (tol 5e-2), rim max rel %.3e, %d interior bins, wall %.1fs (tol 600s)",
                         rep.interior_max_rel, rep.rim_max_rel, rep.interior_bins, wall));
    });

    guarded(2, "classical single-plane-wave relation", [&](int id, const std::string& label) {
        const Vec s = sc.k0 * e2;
        const rdt::VoxelGrid vg{sc.knobs.voxels, sc.g.r};
        const int nx = sc.det.count;
        std::vector<cdouble> line(static_cast<size_t>(nx));
        for (int i = 0; i < nx; ++i) {
            const Vec x((i - nx / 2) * sc.det.spacing, sc.g.L);
            const double w = rdt::tukey((i - nx / 2) / (nx / 2.0), 0.6);
            line[static_cast<size_t>(i)] = w * rdt::plane_wave_field(sc.phantom, sc.k0, s, x, vg);
        }
        const auto spec = rdt::planar_dft_1d(line, sc.det.spacing, -1);
        double max_rel = 0.0;
        int bins = 0;
        for (int m = 0; m < nx; ++m) {
            const double k = 2.0 * rdt::pi * (m - nx / 2) / (nx * sc.det.spacing);
            if (std::fabs(k) > 0.8 * sc.k0) continue;
            const cdouble rhs = rdt::classical_fdt_rhs(sc.phantom, sc.g, s, k, 0.95);
            max_rel = std::max(max_rel, std::abs(spec[static_cast<size_t>(m)] - rhs) / std::abs(rhs));
            ++bins;
        }
        report(id, label, max_rel <= 0.02,
               fmt("interior max rel %.3e (tol 2e-2) over %d bins", max_rel, bins));
    });

    guarded(3, "coverage membership vs brute-force scan", [&](int id, const std::string& label) {
        using coverage_oracle::Level;
        const int n = 512;
        const double th60 = rdt::pi / 3.0;
        const ScanGeometry configs[6] = {
            geo2(1.0, e2, e2, 1.0, 2.0),
            geo2(1.0, e2, Vec(std::cos(th60), std::sin(th60)), 1.0, 2.0),
            geo2(1.0, -1.0 * e2, -1.0 * e2, 1.0, 2.0),
            geo2(1.0, -1.0 * e2, Vec(std::cos(th60), std::sin(th60)), 1.0, 2.0),
            geo2(1.0, Vec(inv_sqrt2, -inv_sqrt2), Vec(inv_sqrt2, -inv_sqrt2), 1.0, 2.0),
            geo2(1.0, Vec(inv_sqrt2, -inv_sqrt2), e2, 1.0, 2.0),
        };
        int total_bad = 0;
        for (const auto& g : configs) {
            const rdt::CoverageMask mask = rdt::coverage_mask(g, CoverageMode::Advanced, n);
            for (Level level : {Level::NaiveCovered, Level::AdvancedCovered, Level::Reachable}) {
                const auto analytic = coverage_oracle::analytic_level_mask(mask, level);
                const auto oracle = coverage_oracle::oracle_mask(g, level, n);
                total_bad += coverage_oracle::interior_mismatches(analytic, oracle, n);
            }
        }
        report(id, label, total_bad == 0,
               fmt("%d interior mismatches across 6 configurations x 3 nested regions (tol 0)",
                   total_bad));
    });

    guarded(4, "transmission coverage is the two-disk region", [&](int id, const std::string& label) {
        const int n = 512;
        const double k0 = 1.0;
        const ScanGeometry g = geo2(k0, e2, e2, 1.0, 2.0);
        const rdt::CoverageMask mask = rdt::coverage_mask(g, CoverageMode::Naive, n);
        const double cell_area = mask.cell() * mask.cell();
        double sym_diff = 0.0;
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i) {
                const Vec y = mask.center(i, j);
                const bool in_disks = (y - Vec(k0, 0.0)).norm() < k0 || (y + Vec(k0, 0.0)).norm() < k0;
                if (in_disks != mask.covered(i, j)) sym_diff += cell_area;
            }
        const double disk_area = 2.0 * rdt::pi * k0 * k0;
        report(id, label, sym_diff <= 0.01 * disk_area,
               fmt("symmetric difference %.4f of two-disk area (tol 1e-2)", sym_diff / disk_area));
    });

    guarded(5, "reflection coverage matches one analytic candidate", [&](int id, const std::string& label) {
        const int n = 512;
        const double k0 = 1.0;
        const ScanGeometry g = geo2(k0, -1.0 * e2, -1.0 * e2, 1.0, 2.0);
        const rdt::CoverageMask mask = rdt::coverage_mask(g, CoverageMode::Naive, n);
        const double cell_area = mask.cell() * mask.cell();
        auto candidate = [&](const Vec& c1, const Vec& c2) {
            double sym_diff = 0.0;
            for (int j = 0; j < n; ++j)
                for (int i = 0; i < n; ++i) {
                    const Vec y = mask.center(i, j);
                    const bool inside = y.norm() < 2.0 * k0 && y[1] > 0.0 && (y - c1).norm() > k0 &&
                                        (y - c2).norm() > k0;
                    if (inside != mask.covered(i, j)) sym_diff += cell_area;
                }
            return sym_diff / (2.0 * rdt::pi * k0 * k0);
        };
        const double vertical = candidate(Vec(0.0, k0), Vec(0.0, -k0));   // as printed in the text
        const double horizontal = candidate(Vec(k0, 0.0), Vec(-k0, 0.0)); // independent derivation
        const bool pass = (vertical <= 0.01) != (horizontal <= 0.01);
        report(id, label, pass,
               fmt("symmetric difference: removed disks at (0,+-k0) %.4f, at (+-k0,0) %.4f; "
                   "matches the (+-k0,0) derivation",
                   vertical, horizontal));
    });

    guarded(6, "degenerate scan identities", [&](int id, const std::string& label) {
        std::mt19937_64 rng(61);
        std::uniform_real_distribution<double> u(0, 1);
        int bad = 0, tested = 0;
        for (int rep = 0; rep < 6; ++rep) {
            const double ang = 2.0 * rdt::pi * u(rng);
            const Vec omega(std::cos(ang), std::sin(ang));
            // perpendicular (nu = +-omega) and parallel (nu perp omega) scans
            ScanGeometry g = geo2(2.0, omega, omega, 1.0, 2.0);
            if (rep % 3 == 1) g.nu = -1.0 * omega;
            const bool parallel = rep % 3 == 2;
            if (parallel) g.nu = rdt::perp2(omega);
            for (int t = 0; t < 10000; ++t) {
                const double th = 2.0 * rdt::pi * u(rng);
                const Vec sigma(2.0 * std::cos(th), 2.0 * std::sin(th));
                if (dot(sigma, omega) < 1e-6 * 2.0) continue;  // off the support boundary band
                const Vec hs = rdt::householder_reflect(sigma, g.nu);
                if (std::fabs(dot(hs, omega)) < 1e-6 * 2.0) continue;
                ++tested;
                const rdt::SigmaClass c = rdt::classify_sigma(sigma, g);
                if (parallel) {
                    if (c == rdt::SigmaClass::Sigma1) ++bad;
                } else {
                    if (c != rdt::SigmaClass::Sigma1) ++bad;
                }
            }
        }
        report(id, label, bad == 0 && tested > 20000,
               fmt("%d violations over %d sampled directions (tol 0)", bad, tested));
    });

    guarded(7, "elimination soundness on exact synthetic data", [&](int id, const std::string& label) {
        const double k0 = 2.0 * rdt::pi;
        const ScanGeometry g = geo2(k0, Vec(inv_sqrt2, -inv_sqrt2), e2, 2.0, 4.0);
        // narrow blob keeps the coupled system well conditioned; uniform
        // density keeps the coefficients unimodular
        const Phantom p = rdt::make_phantom(
            2, 2.0,
            {Primitive{Primitive::Kind::GaussianBlob, Vec(0.4, -0.2), 0.08, cdouble(1.0, 0.6)}});
        HerglotzDensity a;
        a.variant = HerglotzDensity::Variant::UniformHalf;
        a.omega = g.omega;
        const int n_bins = 256;
        const auto red = synthetic::exact_reduced(g, p, a, n_bins, 2.0 * 0.95 * k0 / n_bins);
        const auto seed = rdt::direct_fill(red, a, g);
        rdt::ElimReport erep;
        rdt::ElimOptions opt;
        opt.grid_n = 256;
        const auto solved = rdt::elimination_solve(red, a, g, seed, opt, &erep);

        double max_rel = 0.0;
        int eliminated = 0, stable = 0, tilde_tagged = 0, gray_interior = 0;
        const double band = 2.0 * 4.0 * k0 / 256.0;
        for (const auto& e : solved.entries) {
            if (e.prov != rdt::Provenance::Eliminated) continue;
            ++eliminated;
            const cdouble truth = rdt::eval_potential_fourier(p, e.y);
            max_rel = std::max(max_rel, std::abs(e.value - truth) / std::abs(truth));
            const RegionTag center = rdt::coverage_membership(e.y, g, CoverageMode::Advanced);
            bool boundary = false;
            for (int dir = 0; dir < 4 && !boundary; ++dir) {
                const double ang = dir * rdt::pi / 2.0;
                const Vec probe = e.y + band * Vec(std::cos(ang), std::sin(ang));
                boundary = rdt::coverage_membership(probe, g, CoverageMode::Advanced) != center;
            }
            if (boundary) continue;
            ++stable;
            if (center == RegionTag::YTilde) ++tilde_tagged;
            if (center == RegionTag::Y2Gray) ++gray_interior;
        }
        const bool pass = eliminated > 500 && max_rel <= 1e-9 && gray_interior == 0 &&
                          tilde_tagged >= static_cast<int>(0.95 * stable);
        report(id, label, pass,
               fmt("%d eliminated, max rel err %.2e (tol 1e-9), %d/%d in the resolvable region "
                   "(tol 95%%), %d interior gray claims (tol 0), %d sweeps",
                   eliminated, max_rel, tilde_tagged, stable, gray_interior, erep.sweeps));
    });

    guarded(8, "backpropagation against the analytic-spectrum oracle", [&](int id, const std::string& label) {
        if (record.samples.size() == 0)
            record = rdt::simulate_scan(sc.phantom, sc.density, sc.g, sc.det, sc.scan, sc.knobs);
        const auto spec = rdt::measurement_spectrum(record, rdt::TaperSpec{});
        const auto red = rdt::reduce_measurements(spec, sc.g, sc.knobs.gamma);
        const auto filled = rdt::direct_fill(red, sc.density, sc.g);
        const int n = 256;
        const auto gridded = rdt::grid_samples(filled, n, CoverageMode::Naive, sc.g);
        const auto img = rdt::backpropagate(gridded, CoverageMode::Naive, sc.g);

        rdt::GriddedSpectrum oracle = gridded;  // same mask, analytic values
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i) {
                const size_t idx = oracle.idx(i, j);
                oracle.values[idx] = oracle.mask[idx] ? rdt::eval_potential_fourier(
                                                            sc.phantom, Vec(oracle.node(i), oracle.node(j)))
                                                      : cdouble(0.0, 0.0);
            }
        const auto img_oracle = rdt::backpropagate(oracle, CoverageMode::Naive, sc.g);

        double num = 0, den = 0;
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i) {
                const Vec x(img.coord(i), img.coord(j));
                if (x.norm() > sc.g.r) continue;
                num += std::norm(img.values.at(j, i) - img_oracle.values.at(j, i));
                den += std::norm(img_oracle.values.at(j, i));
            }
        const double rel = std::sqrt(num / den);
        report(id, label, rel <= 0.10, fmt("relative L2 discrepancy %.3e on the support (tol 1e-1)", rel));
    });

    guarded(9, "Gaussian-beam condition derivative", [&](int id, const std::string& label) {
        std::mt19937_64 rng(71);
        std::uniform_real_distribution<double> u(-1, 1);
        auto b_closed = [](double A, const Vec& omega, const Vec& nu, const Vec& s) {
            auto proj = [&](const Vec& v) { return v - dot(v, omega) * omega; };
            return std::exp(A * (proj(rdt::householder_reflect(s, nu)).norm2() - proj(s).norm2()));
        };
        int tested = 0, bad = 0;
        double max_rel = 0.0;
        const double k0 = 1.0;
        while (tested < 1000) {
            Vec omega(u(rng), u(rng), u(rng)), nu(u(rng), u(rng), u(rng));
            if (omega.norm() < 0.1 || nu.norm() < 0.1) continue;
            omega = omega.normalized();
            nu = nu.normalized();
            if (std::fabs(dot(omega, nu)) < 0.2) continue;  // bounded away from degeneracy
            Vec s(u(rng), u(rng), u(rng));
            if (s.norm() < 0.1) continue;
            s = s.normalized() * k0;
            if (dot(s, omega) <= 1e-2 || dot(rdt::householder_reflect(s, nu), omega) <= 1e-2) continue;
            const Vec v = cross(nu, s);
            if (v.norm() < 1e-2) continue;
            const double A = 0.3 + 0.5 * std::fabs(u(rng));
            ++tested;
            const double alpha = v.norm() / k0;
            const Vec vhat = v.normalized();
            const double h = 1e-5 * k0;
            auto gamma = [&](double t) {
                return std::cos(alpha * t) * s + (k0 * std::sin(alpha * t)) * vhat;
            };
            const double fd =
                (b_closed(A, omega, nu, gamma(h)) - b_closed(A, omega, nu, gamma(-h))) / (2.0 * h);
            const double closed = rdt::gaussian_b_derivative(A, omega, nu, s).real();
            const double rel = std::fabs(fd - closed) / std::max(std::fabs(closed), 1e-12);
            max_rel = std::max(max_rel, rel);
            if (rel > 1e-6) ++bad;
        }
        const rdt::BeamConditionReport degenerate =
            rdt::gaussian_condition_check(1.0, Vec(1.0, 0.0, 0.0), Vec(0.0, 0.0, 1.0), 1.0, 500);
        const bool pass = bad == 0 && !degenerate.satisfied;
        report(id, label, pass,
               fmt("max rel deviation %.2e over %d samples (tol 1e-6); perpendicular case "
                   "reported unsatisfied: %s",
                   max_rel, tested, degenerate.satisfied ? "no" : "yes"));
    });

    guarded(10, "cylinder functions vs independent series", [&](int id, const std::string& label) {
        double max_err = 0.0;
        int n_pts = 0;
        for (int i = 0; i <= 20000; ++i) {
            const double x = 1e-3 * std::pow(50.0 / 1e-3, i / 20000.0);
            const cdouble h = rdt::hankel1_0(x);
            max_err = std::max(max_err, std::fabs(h.real() - oracle::j0_ref(x)));
            max_err = std::max(max_err, std::fabs(h.imag() - oracle::y0_ref(x)));
            ++n_pts;
        }
        for (int i = 0; i <= 5000; ++i) {
            const double x = 1e-3 + (50.0 - 1e-3) * i / 5000.0;
            const cdouble h = rdt::hankel1_0(x);
            max_err = std::max(max_err, std::fabs(h.real() - oracle::j0_ref(x)));
            max_err = std::max(max_err, std::fabs(h.imag() - oracle::y0_ref(x)));
            ++n_pts;
        }
        report(id, label, max_err <= 1e-10,
               fmt("max abs error %.2e over %d points in [1e-3, 50] (tol 1e-10)", max_err, n_pts));
    });

    guarded(11, "persistence determinism", [&](int id, const std::string& label) {
        namespace fs = std::filesystem;
        const fs::path dir = fs::temp_directory_path() / "rdt_acceptance";
        fs::create_directories(dir);
        auto slurp = [](const fs::path& p) {
            std::ifstream f(p, std::ios::binary);
            std::stringstream ss;
            ss << f.rdbuf();
            return ss.str();
        };
        rdt::MeasurementRecord rec;
        rec.geometry = geo2(2.0 * rdt::pi, e2, e2, 1.0, 2.0);
        rec.detector = rdt::DetectorGrid{0.35, 4, false};
        rec.scan = rdt::make_scan_grid(rec.geometry, 0.4, 4);
        rec.density = sc.density;
        rec.samples = rdt::Array2C(4, 4);
        for (int j = 0; j < 4; ++j)
            for (int i = 0; i < 4; ++i) rec.samples.at(j, i) = cdouble(0.1 * i - 0.2 * j, 1.0 / (1 + i + j));

        rdt::rdtm_write(rec, (dir / "r1.rdtm").string());
        const auto back = rdt::rdtm_read_record((dir / "r1.rdtm").string());
        rdt::rdtm_write(back, (dir / "r2.rdtm").string());
        const bool container_ok =
            back.samples.v == rec.samples.v && slurp(dir / "r1.rdtm") == slurp(dir / "r2.rdtm");

        const ScanGeometry g = geo2(1.0, Vec(inv_sqrt2, -inv_sqrt2), e2, 1.0, 2.0);
        const auto mask = rdt::coverage_mask(g, CoverageMode::Advanced, 128);
        rdt::emit_coverage_figure(mask, g, (dir / "c1.svg").string(), "svg");
        rdt::emit_coverage_figure(mask, g, (dir / "c2.svg").string(), "svg");
        rdt::emit_csv(rec.samples, (dir / "m1.csv").string());
        rdt::emit_csv(rec.samples, (dir / "m2.csv").string());
        const bool figures_ok =
            slurp(dir / "c1.svg") == slurp(dir / "c2.svg") && slurp(dir / "m1.csv") == slurp(dir / "m2.csv");
        fs::remove_all(dir);
        report(id, label, container_ok && figures_ok,
               fmt("container round trip bit-exact: %s; SVG/CSV deterministic: %s",
                   container_ok ? "yes" : "no", figures_ok ? "yes" : "no"));
    });

    std::printf("acceptance: %d of 11 criteria failed\n", failures);
    return failures;
}
