// rdt: raster-scan diffraction tomography toolkit.
//
// Subcommands: simulate (synthesize a scan record), coverage (Fourier
// coverage figures and area fractions), reconstruct (naive/advanced
// backpropagation from a record), verify-fdt (simulate and check the scanning
// diffraction relation bin-wise), beam-check (d=3 Gaussian-beam
// recoverability condition).
//
// stdout carries one JSON line per command for scripting; human-readable
// notes go to stderr. Exit codes: 0 ok, 2 bad config/flags, 3 I/O failure,
// 4 violated numerical precondition, 5 empty direct coverage in naive mode,
// 6 relation residual above threshold, 7 degenerate beam/scan alignment.

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "rdt/config.hpp"
#include "rdt/io.hpp"
#include "rdt/recon.hpp"
#include "rdt/spectral.hpp"

using nlohmann::json;

namespace {

double wall_seconds(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

rdt::Vec parse_vec3(const std::string& s) {
    std::stringstream ss(s);
    double v[3];
    char comma;
    if (!(ss >> v[0] >> comma >> v[1] >> comma >> v[2]))
        throw rdt::config_error("expected a comma-separated triple: " + s);
    return rdt::Vec(v[0], v[1], v[2]);
}

int cmd_simulate(const std::string& config_path, const std::string& out_path) {
    const auto t0 = std::chrono::steady_clock::now();
    const rdt::RunConfig cfg = rdt::load_config(config_path);
    for (const auto& w : cfg.phantom.report.warnings) std::cerr << "warning: " << w << "\n";
    const rdt::MeasurementRecord rec =
        rdt::simulate_scan(cfg.phantom, cfg.density, cfg.geometry, cfg.detector, cfg.scan, cfg.accuracy);
    const size_t bytes = rdt::rdtm_write(rec, out_path);
    json line = {{"event", "simulate"},
                 {"out", out_path},
                 {"bytes", bytes},
                 {"scan_points", rec.scan_points()},
                 {"detector_points", rec.detector_points()},
                 {"born_parameter", cfg.phantom.report.born_parameter},
                 {"wall_s", wall_seconds(t0)}};
    std::cout << line.dump() << "\n";
    return 0;
}

int cmd_coverage(double k0, double omega_deg, double nu_deg, const std::string& mode_name, int grid,
                 const std::string& out_path, const std::string& format) {
    rdt::ScanGeometry g;
    g.d = 2;
    g.k0 = k0;
    g.omega = rdt::Vec(std::cos(omega_deg * rdt::pi / 180.0), std::sin(omega_deg * rdt::pi / 180.0));
    g.nu = rdt::Vec(std::cos(nu_deg * rdt::pi / 180.0), std::sin(nu_deg * rdt::pi / 180.0));
    g.r = 1.0;
    g.L = 2.0;
    g.validate();
    const rdt::CoverageMode mode =
        mode_name == "advanced" ? rdt::CoverageMode::Advanced : rdt::CoverageMode::Naive;
    const rdt::CoverageMask mask = rdt::coverage_mask(g, mode, grid);
    if (format == "csv") {
        // region codes as integers, one row per lattice row
        std::ofstream f(out_path, std::ios::binary | std::ios::trunc);
        if (!f) throw rdt::io_error("cannot open for writing: " + out_path);
        for (int j = 0; j < mask.n; ++j) {
            std::string line;
            for (int i = 0; i < mask.n; ++i) {
                if (i) line += ',';
                line += std::to_string(static_cast<int>(mask.at(i, j)));
            }
            f << line << "\r\n";
        }
    } else {
        rdt::emit_coverage_figure(mask, g, out_path, format);
    }
    json line = {{"event", "coverage"},
                 {"out", out_path},
                 {"mode", mode_name},
                 {"grid", grid},
                 {"fraction_y1", mask.tag_fraction(rdt::RegionTag::Y1)},
                 {"fraction_ytilde", mask.tag_fraction(rdt::RegionTag::YTilde)},
                 {"fraction_gray", mask.tag_fraction(rdt::RegionTag::Y2Gray)},
                 {"fraction_covered", mask.covered_fraction()}};
    std::cout << line.dump() << "\n";
    return 0;
}

int cmd_reconstruct(const std::string& meas_path, const std::string& mode_name, int grid,
                    const std::string& out_path, bool grid_assist) {
    const auto t0 = std::chrono::steady_clock::now();
    const rdt::MeasurementRecord rec = rdt::rdtm_read_record(meas_path);
    const rdt::ScanGeometry& g = rec.geometry;
    if (g.d != 2) throw rdt::config_error("reconstruct: only d = 2 records are supported");
    const rdt::CoverageMode mode =
        mode_name == "advanced" ? rdt::CoverageMode::Advanced : rdt::CoverageMode::Naive;

    const rdt::SigmaArcs arcs = rdt::sigma_arcs_2d(g);
    if (mode == rdt::CoverageMode::Naive && arcs.sigma1.width() < 1e-9) {
        std::cerr << "error: no directly readable coverage (Sigma_1 is empty) in naive mode\n";
        return 5;
    }

    rdt::TaperSpec taper;
    taper.flat_fraction = rec.knobs.taper_flat;
    const rdt::SpectrumGrid spec = rdt::measurement_spectrum(rec, taper);
    const rdt::ReducedMeasurements red = rdt::reduce_measurements(spec, g, rec.knobs.gamma);
    rdt::SpectralSampleSet samples = rdt::direct_fill(red, rec.density, g);
    rdt::ElimReport elim_report;
    if (mode == rdt::CoverageMode::Advanced) {
        rdt::ElimOptions opt;
        opt.grid_n = grid;
        opt.grid_assist = grid_assist;
        opt.conflict_rel_tol = 0.10;  // simulated data carries discretization error
        samples = rdt::elimination_solve(red, rec.density, g, samples, opt, &elim_report);
    }
    const rdt::GriddedSpectrum gridded = rdt::grid_samples(samples, grid, mode, g);
    const rdt::ReconImage img = rdt::backpropagate(gridded, mode, g);

    size_t covered = 0;
    for (const auto m : gridded.mask) covered += m;
    if (out_path.size() > 4 && out_path.substr(out_path.size() - 4) == ".csv") {
        rdt::emit_csv(img.values, out_path);
    } else {
        json meta = {{"kind", "image"},
                     {"n", img.n},
                     {"dx", img.dx},
                     {"mode", mode_name},
                     {"k0", g.k0}};
        rdt::rdtm_write_array(img.values, meta, "image", out_path);
    }
    json line = {{"event", "reconstruct"},
                 {"out", out_path},
                 {"mode", mode_name},
                 {"covered_fraction", static_cast<double>(covered) / static_cast<double>(gridded.mask.size())},
                 {"entries", samples.entries.size()},
                 {"conflict_count", elim_report.conflicts},
                 {"sweeps", elim_report.sweeps},
                 {"wall_s", wall_seconds(t0)}};
    std::cout << line.dump() << "\n";
    return 0;
}

int cmd_verify_fdt(const std::string& config_path, const std::string& report_path) {
    const auto t0 = std::chrono::steady_clock::now();
    const rdt::RunConfig cfg = rdt::load_config(config_path);
    const rdt::MeasurementRecord rec =
        rdt::simulate_scan(cfg.phantom, cfg.density, cfg.geometry, cfg.detector, cfg.scan, cfg.accuracy);
    const rdt::FdtReport rep = rdt::verify_fdt(rec, cfg.phantom, cfg.density, cfg.geometry, cfg.taper);
    json out = {{"interior_max_rel", rep.interior_max_rel},
                {"rim_max_rel", rep.rim_max_rel},
                {"clipped_bins", rep.clipped_bins},
                {"interior_bins", rep.interior_bins},
                {"rim_bins", rep.rim_bins},
                {"grid", {{"nk", rep.nk}, {"nxi", rep.nxi}, {"gamma", rep.gamma}}},
                {"threshold", cfg.verify_threshold},
                {"wall_s", wall_seconds(t0)}};
    std::ofstream f(report_path, std::ios::trunc);
    if (!f) throw rdt::io_error("cannot open for writing: " + report_path);
    f << out.dump(2) << "\n";
    std::cout << json({{"event", "verify_fdt"},
                       {"report", report_path},
                       {"interior_max_rel", rep.interior_max_rel}})
                     .dump()
              << "\n";
    if (rep.interior_max_rel > cfg.verify_threshold) {
        std::cerr << "error: interior residual " << rep.interior_max_rel << " exceeds threshold "
                  << cfg.verify_threshold << "\n";
        return 6;
    }
    return 0;
}

int cmd_beam_check(double A, const std::string& omega_s, const std::string& nu_s, double k0,
                   int samples) {
    const rdt::Vec omega = parse_vec3(omega_s).normalized();
    const rdt::Vec nu = parse_vec3(nu_s).normalized();
    if (std::fabs(rdt::dot(omega, nu)) < 1e-12) {
        std::cout << json({{"event", "beam_check"}, {"satisfied", false}, {"nu_dot_omega", 0.0}}).dump()
                  << "\n";
        std::cerr << "error: scan plane parallel to the beam axis (<nu,omega> = 0)\n";
        return 7;
    }
    const rdt::BeamConditionReport rep = rdt::gaussian_condition_check(A, omega, nu, k0, samples);
    json line = {{"event", "beam_check"},
                 {"satisfied", rep.satisfied},
                 {"nu_dot_omega", rep.nu_dot_omega},
                 {"samples", rep.samples},
                 {"zero_fraction", rep.zero_fraction},
                 {"max_abs_derivative", rep.max_abs_derivative}};
    std::cout << line.dump() << "\n";
    return rep.satisfied ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"raster-scan diffraction tomography toolkit"};
    app.require_subcommand(1);

    int threads = 0;
    app.add_option("--threads", threads, "cap worker threads (default: all cores)");

    std::string config_path, out_path, report_path, meas_path;
    std::string mode_name = "naive", format = "svg";
    double k0 = 1.0, omega_deg = 90.0, nu_deg = 90.0, A = 1.0;
    std::string omega_s = "0,0,1", nu_s = "0,0,1";
    int grid = 512, samples = 2000;
    bool grid_assist = false;

    auto* sim = app.add_subcommand("simulate", "synthesize a raster-scan measurement record");
    sim->add_option("--config", config_path, "run configuration (JSON)")->required();
    sim->add_option("--out", out_path, "output RDT1 container")->required();

    auto* cov = app.add_subcommand("coverage", "compute and render Fourier coverage (d = 2)");
    cov->add_option("--k0", k0, "wavenumber")->required();
    cov->add_option("--omega-deg", omega_deg, "beam direction angle in degrees")->required();
    cov->add_option("--nu-deg", nu_deg, "scan normal angle in degrees")->required();
    cov->add_option("--mode", mode_name, "naive|advanced")->check(CLI::IsMember({"naive", "advanced"}));
    cov->add_option("--grid", grid, "raster resolution per axis");
    cov->add_option("--out", out_path, "output file")->required();
    cov->add_option("--format", format, "svg|pgm|csv")->check(CLI::IsMember({"svg", "pgm", "csv"}));

    auto* rec = app.add_subcommand("reconstruct", "backpropagate a measurement record");
    rec->add_option("--meas", meas_path, "input RDT1 measurement record")->required();
    rec->add_option("--mode", mode_name, "naive|advanced")->check(CLI::IsMember({"naive", "advanced"}));
    rec->add_option("--grid", grid, "spectral grid resolution (power of two)");
    rec->add_option("--out", out_path, "output image (.csv or RDT1 container)")->required();
    rec->add_flag("--grid-assist", grid_assist, "also resolve partners by grid interpolation");

    auto* ver = app.add_subcommand("verify-fdt", "simulate and verify the scanning relation");
    ver->add_option("--config", config_path, "run configuration (JSON)")->required();
    ver->add_option("--report", report_path, "output JSON report")->required();

    auto* beam = app.add_subcommand("beam-check", "d = 3 Gaussian-beam recoverability condition");
    beam->add_option("--A", A, "Gaussian waist parameter")->required();
    beam->add_option("--omega", omega_s, "beam direction x,y,z")->required();
    beam->add_option("--nu", nu_s, "scan normal x,y,z")->required();
    beam->add_option("--k0", k0, "wavenumber")->required();
    beam->add_option("--samples", samples, "Sigma_2 sample count");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);  // --help exits 0 without computing
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    if (threads > 0) rdt::thread_cap() = threads;
    if (const char* env = std::getenv("RDT_THREADS"); env && threads == 0)
        rdt::thread_cap() = std::max(0, std::atoi(env));

    try {
        if (sim->parsed()) return cmd_simulate(config_path, out_path);
        if (cov->parsed()) return cmd_coverage(k0, omega_deg, nu_deg, mode_name, grid, out_path, format);
        if (rec->parsed()) return cmd_reconstruct(meas_path, mode_name, grid, out_path, grid_assist);
        if (ver->parsed()) return cmd_verify_fdt(config_path, report_path);
        if (beam->parsed()) return cmd_beam_check(A, omega_s, nu_s, k0, samples);
    } catch (const rdt::config_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const rdt::io_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const rdt::precondition_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
