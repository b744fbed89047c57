#pragma once

#include <fstream>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "rdt/beam.hpp"
#include "rdt/forward.hpp"
#include "rdt/geometry.hpp"
#include "rdt/phantom.hpp"
#include "rdt/spectral.hpp"
#include "rdt/types.hpp"

namespace rdt {

// Run configuration: a strict JSON schema (unknown keys rejected) describing
// geometry, phantom, density, grids and accuracy knobs. Parsed and validated
// before any computation starts.

struct RunConfig {
    ScanGeometry geometry;
    Phantom phantom;
    HerglotzDensity density;
    DetectorGrid detector;
    ScanGrid scan;
    AccuracyKnobs accuracy;
    TaperSpec taper;
    double verify_threshold = 0.05;
    uint64_t seed = 0;
};

namespace config_detail {

inline void require_keys(const nlohmann::json& j, const std::set<std::string>& allowed,
                         const std::set<std::string>& required, const std::string& where) {
    if (!j.is_object()) throw config_error("config: " + where + " must be an object");
    for (const auto& item : j.items())
        if (!allowed.count(item.key()))
            throw config_error("config: unknown key '" + item.key() + "' in " + where);
    for (const auto& key : required)
        if (!j.contains(key)) throw config_error("config: missing key '" + key + "' in " + where);
}

inline Vec parse_vec(const nlohmann::json& a, int d, const std::string& where) {
    if (!a.is_array() || static_cast<int>(a.size()) != d)
        throw config_error("config: " + where + " must be an array of length " + std::to_string(d));
    if (d == 2) return Vec(a[0].get<double>(), a[1].get<double>());
    return Vec(a[0].get<double>(), a[1].get<double>(), a[2].get<double>());
}

}  // namespace config_detail

inline RunConfig parse_config(const nlohmann::json& j) {
    using config_detail::parse_vec;
    using config_detail::require_keys;
    require_keys(j, {"geometry", "phantom", "density", "detector", "scan", "accuracy", "noise",
                     "verify_threshold", "seed"},
                 {"geometry", "phantom", "density", "detector", "scan"}, "top level");

    RunConfig cfg;

    const auto& jg = j.at("geometry");
    require_keys(jg, {"d", "k0", "omega", "nu", "L", "r"}, {"d", "k0", "omega", "nu", "L", "r"},
                 "geometry");
    cfg.geometry.d = jg.at("d").get<int>();
    cfg.geometry.k0 = jg.at("k0").get<double>();
    cfg.geometry.L = jg.at("L").get<double>();
    cfg.geometry.r = jg.at("r").get<double>();
    cfg.geometry.omega = parse_vec(jg.at("omega"), cfg.geometry.d, "geometry.omega");
    cfg.geometry.nu = parse_vec(jg.at("nu"), cfg.geometry.d, "geometry.nu");
    const double on = cfg.geometry.omega.norm(), nn = cfg.geometry.nu.norm();
    if (on > 0) cfg.geometry.omega = cfg.geometry.omega * (1.0 / on);
    if (nn > 0) cfg.geometry.nu = cfg.geometry.nu * (1.0 / nn);
    cfg.geometry.validate();

    const auto& jp = j.at("phantom");
    if (!jp.is_array()) throw config_error("config: phantom must be an array of primitives");
    std::vector<Primitive> prims;
    for (const auto& item : jp) {
        require_keys(item, {"kind", "center", "radius", "width", "contrast_re", "contrast_im"},
                     {"kind", "center"}, "phantom primitive");
        Primitive prim;
        const std::string kind = item.at("kind").get<std::string>();
        if (kind == "ball") {
            prim.kind = Primitive::Kind::Ball;
            if (!item.contains("radius")) throw config_error("config: ball primitive needs 'radius'");
            prim.size = item.at("radius").get<double>();
        } else if (kind == "gaussian") {
            prim.kind = Primitive::Kind::GaussianBlob;
            if (!item.contains("width")) throw config_error("config: gaussian primitive needs 'width'");
            prim.size = item.at("width").get<double>();
        } else {
            throw config_error("config: unknown primitive kind '" + kind + "'");
        }
        prim.center = parse_vec(item.at("center"), cfg.geometry.d, "primitive center");
        prim.contrast = cdouble(item.value("contrast_re", 1.0), item.value("contrast_im", 0.0));
        prims.push_back(prim);
    }
    cfg.phantom = make_phantom(cfg.geometry.d, cfg.geometry.r, std::move(prims));

    const auto& jd = j.at("density");
    require_keys(jd, {"variant", "A", "taper_deg", "table_angles_deg", "table_re", "table_im"},
                 {"variant"}, "density");
    const std::string variant = jd.at("variant").get<std::string>();
    cfg.density.omega = cfg.geometry.omega;
    if (variant == "gaussian") {
        cfg.density.variant = HerglotzDensity::Variant::Gaussian;
        cfg.density.waist_A = jd.value("A", 1.0);
        if (!(cfg.density.waist_A > 0)) throw config_error("config: density A must be positive");
    } else if (variant == "uniform_half") {
        cfg.density.variant = HerglotzDensity::Variant::UniformHalf;
    } else if (variant == "tabulated") {
        cfg.density.variant = HerglotzDensity::Variant::Tabulated;
        if (!jd.contains("table_angles_deg") || !jd.contains("table_re"))
            throw config_error("config: tabulated density needs table_angles_deg and table_re");
        const auto deg = jd.at("table_angles_deg").get<std::vector<double>>();
        const auto re = jd.at("table_re").get<std::vector<double>>();
        std::vector<double> im(deg.size(), 0.0);
        if (jd.contains("table_im")) im = jd.at("table_im").get<std::vector<double>>();
        if (re.size() != deg.size() || im.size() != deg.size())
            throw config_error("config: tabulated density arrays must have matching lengths");
        for (size_t i = 0; i < deg.size(); ++i) {
            cfg.density.table_angles.push_back(deg[i] * pi / 180.0);
            cfg.density.table_values.emplace_back(re[i], im[i]);
        }
    } else {
        throw config_error("config: unknown density variant '" + variant + "'");
    }
    cfg.density.taper_deg = jd.value("taper_deg", 0.0);

    const auto& jdet = j.at("detector");
    require_keys(jdet, {"spacing", "count", "nyquist_override"}, {"spacing", "count"}, "detector");
    cfg.detector.spacing = jdet.at("spacing").get<double>();
    cfg.detector.count = jdet.at("count").get<int>();
    cfg.detector.nyquist_override = jdet.value("nyquist_override", false);
    if (!(cfg.detector.spacing > 0) || cfg.detector.count < 2)
        throw config_error("config: detector grid invalid");

    const auto& jscan = j.at("scan");
    require_keys(jscan, {"spacing", "count"}, {"spacing", "count"}, "scan");
    cfg.scan = make_scan_grid(cfg.geometry, jscan.at("spacing").get<double>(),
                              jscan.at("count").get<int>());
    if (!(cfg.scan.spacing > 0) || cfg.scan.count < 2) throw config_error("config: scan grid invalid");

    if (j.contains("accuracy")) {
        const auto& ja = j.at("accuracy");
        require_keys(ja, {"Ns", "Nv", "gamma", "taper", "runtime_budget_s"}, {}, "accuracy");
        cfg.accuracy.sphere_order = ja.value("Ns", 512);
        cfg.accuracy.voxels = ja.value("Nv", 128);
        cfg.accuracy.gamma = ja.value("gamma", 0.95);
        cfg.accuracy.runtime_budget_s = ja.value("runtime_budget_s", 600.0);
        if (ja.contains("taper")) {
            const auto& jt = ja.at("taper");
            require_keys(jt, {"flat_fraction", "detector_axis", "scan_axis"}, {}, "accuracy.taper");
            cfg.taper.flat_fraction = jt.value("flat_fraction", 0.6);
            cfg.taper.detector_axis = jt.value("detector_axis", true);
            cfg.taper.scan_axis = jt.value("scan_axis", true);
        }
        if (!(cfg.accuracy.gamma > 0 && cfg.accuracy.gamma < 1))
            throw config_error("config: gamma must lie in (0, 1)");
        if (cfg.accuracy.sphere_order < 16) throw config_error("config: Ns must be >= 16");
        if (cfg.accuracy.voxels < 8) throw config_error("config: Nv must be >= 8");
    }
    cfg.accuracy.taper_flat = cfg.taper.flat_fraction;

    if (j.contains("noise")) {
        const auto& jn = j.at("noise");
        require_keys(jn, {"snr_db", "seed"}, {"snr_db"}, "noise");
        cfg.accuracy.noise_snr_db = jn.at("snr_db").get<double>();
        cfg.accuracy.seed = jn.value("seed", 0);
    }
    cfg.verify_threshold = j.value("verify_threshold", 0.05);
    cfg.seed = j.value("seed", 0);
    cfg.accuracy.seed = cfg.accuracy.seed ? cfg.accuracy.seed : cfg.seed;
    return cfg;
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw io_error("cannot open config: " + path);
    nlohmann::json j;
    try {
        f >> j;
    } catch (const std::exception& e) {
        throw config_error(std::string("config: JSON parse error: ") + e.what());
    }
    return parse_config(j);
}

}  // namespace rdt
