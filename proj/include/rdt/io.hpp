#pragma once

#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "rdt/forward.hpp"
#include "rdt/geometry.hpp"
#include "rdt/recon.hpp"
#include "rdt/types.hpp"

namespace rdt {

using json = nlohmann::json;

// Persistence: a self-describing binary container ("RDT1") holding a compact
// JSON header plus a row-major complex128 payload, and deterministic SVG/PGM/
// CSV emitters for coverage figures and image exports.

namespace io_detail {

inline void put_u32_le(std::string& out, uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

inline void put_f64_le(std::string& out, double d) {
    uint64_t bits;
    std::memcpy(&bits, &d, 8);
    if constexpr (std::endian::native == std::endian::big) {
        uint64_t s = 0;
        for (int i = 0; i < 8; ++i) s = (s << 8) | ((bits >> (8 * i)) & 0xff);
        bits = s;
    }
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
}

inline double get_f64_le(const char* p) {
    uint64_t bits = 0;
    for (int i = 7; i >= 0; --i) bits = (bits << 8) | static_cast<uint8_t>(p[i]);
    if constexpr (std::endian::native == std::endian::big) {
        uint64_t s = 0;
        for (int i = 0; i < 8; ++i) s = (s << 8) | ((bits >> (8 * i)) & 0xff);
        bits = s;
    }
    double d;
    std::memcpy(&d, &bits, 8);
    return d;
}

inline json vec_to_json(const Vec& v) {
    json a = json::array();
    for (int i = 0; i < v.dim; ++i) a.push_back(v[i]);
    return a;
}

inline Vec vec_from_json(const json& a) {
    if (a.size() == 2) return Vec(a[0].get<double>(), a[1].get<double>());
    return Vec(a[0].get<double>(), a[1].get<double>(), a[2].get<double>());
}

inline json density_to_json(const HerglotzDensity& d) {
    json j;
    switch (d.variant) {
        case HerglotzDensity::Variant::Gaussian: j["variant"] = "gaussian"; break;
        case HerglotzDensity::Variant::UniformHalf: j["variant"] = "uniform_half"; break;
        case HerglotzDensity::Variant::Tabulated: j["variant"] = "tabulated"; break;
    }
    j["omega"] = vec_to_json(d.omega);
    if (d.variant == HerglotzDensity::Variant::Gaussian) j["A"] = d.waist_A;
    if (d.taper_deg > 0) j["taper_deg"] = d.taper_deg;
    if (d.variant == HerglotzDensity::Variant::Tabulated) {
        j["table_angles"] = d.table_angles;
        json re = json::array(), im = json::array();
        for (const auto& v : d.table_values) {
            re.push_back(v.real());
            im.push_back(v.imag());
        }
        j["table_re"] = re;
        j["table_im"] = im;
    }
    return j;
}

inline HerglotzDensity density_from_json(const json& j) {
    HerglotzDensity d;
    const std::string v = j.at("variant").get<std::string>();
    if (v == "gaussian")
        d.variant = HerglotzDensity::Variant::Gaussian;
    else if (v == "uniform_half")
        d.variant = HerglotzDensity::Variant::UniformHalf;
    else if (v == "tabulated")
        d.variant = HerglotzDensity::Variant::Tabulated;
    else
        throw io_error("unknown density variant: " + v);
    d.omega = vec_from_json(j.at("omega"));
    if (j.contains("A")) d.waist_A = j.at("A").get<double>();
    if (j.contains("taper_deg")) d.taper_deg = j.at("taper_deg").get<double>();
    if (j.contains("table_angles")) {
        d.table_angles = j.at("table_angles").get<std::vector<double>>();
        const auto re = j.at("table_re").get<std::vector<double>>();
        const auto im = j.at("table_im").get<std::vector<double>>();
        for (size_t i = 0; i < re.size(); ++i) d.table_values.emplace_back(re[i], im[i]);
    }
    return d;
}

}  // namespace io_detail

/// Writes an RDT1 container: magic, little-endian header length, compact JSON
/// header (keys sorted by construction), interleaved complex128 payload.
/// Returns the byte count written.
inline size_t rdtm_write_raw(const std::string& path, const json& header,
                             const std::vector<cdouble>& payload) {
    std::string blob;
    const std::string head = header.dump();  // compact, keys in sorted order
    blob.reserve(8 + head.size() + payload.size() * 16);
    blob += "RDT1";
    io_detail::put_u32_le(blob, static_cast<uint32_t>(head.size()));
    blob += head;
    for (const cdouble& z : payload) {
        io_detail::put_f64_le(blob, z.real());
        io_detail::put_f64_le(blob, z.imag());
    }
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw io_error("cannot open for writing: " + path);
    f.write(blob.data(), static_cast<std::streamsize>(blob.size()));
    if (!f) throw io_error("write failed: " + path);
    return blob.size();
}

struct RdtmFile {
    json header;
    std::vector<cdouble> payload;
};

inline RdtmFile rdtm_read(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw io_error("cannot open: " + path);
    std::string blob((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    if (blob.size() < 8 || blob.compare(0, 4, "RDT1") != 0)
        throw io_error("not an RDT1 container: " + path);
    uint32_t hlen = 0;
    for (int i = 3; i >= 0; --i) hlen = (hlen << 8) | static_cast<uint8_t>(blob[4 + static_cast<size_t>(i)]);
    if (blob.size() < 8 + hlen) throw io_error("truncated RDT1 header: " + path);
    RdtmFile out;
    out.header = json::parse(blob.substr(8, hlen));
    const size_t body = blob.size() - 8 - hlen;
    if (body % 16 != 0) throw io_error("payload not a whole number of complex cells: " + path);
    size_t expect = 1;
    for (const auto& s : out.header.at("payload").at("shape")) expect *= s.get<size_t>();
    if (expect * 16 != body) throw io_error("payload length does not match the declared shape: " + path);
    out.payload.resize(body / 16);
    const char* p = blob.data() + 8 + hlen;
    for (size_t i = 0; i < out.payload.size(); ++i) {
        const double re = io_detail::get_f64_le(p + 16 * i);
        const double im = io_detail::get_f64_le(p + 16 * i + 8);
        out.payload[i] = cdouble(re, im);
    }
    return out;
}

inline size_t rdtm_write(const MeasurementRecord& rec, const std::string& path) {
    json h;
    h["version"] = 1;
    h["d"] = rec.geometry.d;
    h["k0"] = rec.geometry.k0;
    h["L"] = rec.geometry.L;
    h["r"] = rec.geometry.r;
    h["omega"] = io_detail::vec_to_json(rec.geometry.omega);
    h["nu"] = io_detail::vec_to_json(rec.geometry.nu);
    h["density"] = io_detail::density_to_json(rec.density);
    h["detector"] = {{"spacing", rec.detector.spacing}, {"count", rec.detector.count}};
    json basis = json::array();
    for (const auto& b : rec.scan.basis) basis.push_back(io_detail::vec_to_json(b));
    h["scan"] = {{"spacing", rec.scan.spacing}, {"count", rec.scan.count}, {"basis", basis}};
    h["accuracy"] = {{"Ns", rec.knobs.sphere_order},
                     {"Nv", rec.knobs.voxels},
                     {"gamma", rec.knobs.gamma},
                     {"taper_flat", rec.knobs.taper_flat}};
    h["payload"] = {{"kind", "measurement"},
                    {"shape", {rec.scan_points(), rec.detector_points()}},
                    {"dtype", "complex128"}};
    return rdtm_write_raw(path, h, rec.samples.v);
}

inline MeasurementRecord rdtm_read_record(const std::string& path) {
    const RdtmFile f = rdtm_read(path);
    if (f.header.at("payload").at("kind") != "measurement")
        throw io_error("container does not hold a measurement record: " + path);
    MeasurementRecord rec;
    rec.geometry.d = f.header.at("d").get<int>();
    rec.geometry.k0 = f.header.at("k0").get<double>();
    rec.geometry.L = f.header.at("L").get<double>();
    rec.geometry.r = f.header.at("r").get<double>();
    rec.geometry.omega = io_detail::vec_from_json(f.header.at("omega"));
    rec.geometry.nu = io_detail::vec_from_json(f.header.at("nu"));
    rec.density = io_detail::density_from_json(f.header.at("density"));
    rec.detector.spacing = f.header.at("detector").at("spacing").get<double>();
    rec.detector.count = f.header.at("detector").at("count").get<int>();
    rec.scan.spacing = f.header.at("scan").at("spacing").get<double>();
    rec.scan.count = f.header.at("scan").at("count").get<int>();
    for (const auto& b : f.header.at("scan").at("basis")) rec.scan.basis.push_back(io_detail::vec_from_json(b));
    if (f.header.contains("accuracy")) {
        rec.knobs.sphere_order = f.header["accuracy"].value("Ns", 512);
        rec.knobs.voxels = f.header["accuracy"].value("Nv", 128);
        rec.knobs.gamma = f.header["accuracy"].value("gamma", 0.95);
        rec.knobs.taper_flat = f.header["accuracy"].value("taper_flat", 0.6);
    }
    const auto shape = f.header.at("payload").at("shape");
    rec.samples = Array2C(shape[0].get<int>(), shape[1].get<int>());
    rec.samples.v = f.payload;
    return rec;
}

/// Image/array container with a small grid descriptor.
inline size_t rdtm_write_array(const Array2C& a, const json& grid_meta, const std::string& kind,
                               const std::string& path) {
    json h;
    h["version"] = 1;
    h["grid"] = grid_meta;
    h["payload"] = {{"kind", kind}, {"shape", {a.rows, a.cols}}, {"dtype", "complex128"}};
    return rdtm_write_raw(path, h, a.v);
}

// ---------------------------------------------------------------------------
// CSV

/// RFC 4180 CSV of a complex matrix; cells rendered as "re+imj" with 17
/// significant digits, rows terminated with CRLF.
inline void emit_csv(const Array2C& a, const std::string& path) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw io_error("cannot open for writing: " + path);
    char buf[96];
    for (int r = 0; r < a.rows; ++r) {
        std::string line;
        for (int c = 0; c < a.cols; ++c) {
            const cdouble& z = a.at(r, c);
            const double im = z.imag();
            std::snprintf(buf, sizeof buf, "%.17g%s%.17gj", z.real(), im < 0 ? "" : "+", im);
            if (c) line += ',';
            line += buf;
        }
        line += "\r\n";
        f << line;
    }
    if (!f) throw io_error("write failed: " + path);
}

// ---------------------------------------------------------------------------
// Coverage figures

namespace io_detail {

struct Segment {
    double x0, y0, x1, y1;
};

/// Marching squares on a binary node lattice (values 0/1, iso level 0.5,
/// edge crossings at midpoints). Returns stitched closed/open polylines.
inline std::vector<std::vector<std::pair<double, double>>> marching_squares(
    const std::vector<uint8_t>& field, int n) {
    std::vector<Segment> segs;
    auto val = [&](int i, int j) -> int {
        if (i < 0 || j < 0 || i >= n || j >= n) return 0;
        return field[static_cast<size_t>(j) * n + i] ? 1 : 0;
    };
    // lattice squares between node (i,j) and (i+1,j+1), virtual zero border
    for (int j = -1; j < n; ++j) {
        for (int i = -1; i < n; ++i) {
            const int c = val(i, j) | (val(i + 1, j) << 1) | (val(i + 1, j + 1) << 2) |
                          (val(i, j + 1) << 3);
            if (c == 0 || c == 15) continue;
            const double x = i, y = j;
            const double ex[4] = {x + 0.5, x + 1.0, x + 0.5, x};      // edge midpoints: S,E,N,W
            const double ey[4] = {y, y + 0.5, y + 1.0, y + 0.5};
            auto add = [&](int e0, int e1) { segs.push_back({ex[e0], ey[e0], ex[e1], ey[e1]}); };
            switch (c) {
                case 1: add(3, 0); break;
                case 2: add(0, 1); break;
                case 3: add(3, 1); break;
                case 4: add(1, 2); break;
                case 5: add(3, 2); add(1, 0); break;  // saddle
                case 6: add(0, 2); break;
                case 7: add(3, 2); break;
                case 8: add(2, 3); break;
                case 9: add(2, 0); break;
                case 10: add(0, 3); add(2, 1); break;  // saddle
                case 11: add(2, 1); break;
                case 12: add(1, 3); break;
                case 13: add(1, 0); break;
                case 14: add(0, 3); break;
                default: break;
            }
        }
    }
    // stitch segments into polylines
    auto key = [](double x, double y) {
        return std::pair<long long, long long>(std::llround(x * 2), std::llround(y * 2));
    };
    std::map<std::pair<long long, long long>, std::vector<size_t>> at;
    for (size_t s = 0; s < segs.size(); ++s) {
        at[key(segs[s].x0, segs[s].y0)].push_back(s);
        at[key(segs[s].x1, segs[s].y1)].push_back(s);
    }
    std::vector<char> used(segs.size(), 0);
    std::vector<std::vector<std::pair<double, double>>> polys;
    for (size_t s0 = 0; s0 < segs.size(); ++s0) {
        if (used[s0]) continue;
        used[s0] = 1;
        std::vector<std::pair<double, double>> poly{{segs[s0].x0, segs[s0].y0},
                                                    {segs[s0].x1, segs[s0].y1}};
        bool grew = true;
        while (grew) {
            grew = false;
            const auto tail = key(poly.back().first, poly.back().second);
            for (size_t cand : at[tail]) {
                if (used[cand]) continue;
                used[cand] = 1;
                if (key(segs[cand].x0, segs[cand].y0) == tail)
                    poly.emplace_back(segs[cand].x1, segs[cand].y1);
                else
                    poly.emplace_back(segs[cand].x0, segs[cand].y0);
                grew = true;
                break;
            }
        }
        polys.push_back(std::move(poly));
    }
    return polys;
}

inline std::string fmt6(double v) {
    char b[48];
    std::snprintf(b, sizeof b, "%.6f", v);
    return b;
}

}  // namespace io_detail

/// Coverage figure. SVG: filled marching-squares layers for the directly
/// readable region, the additionally resolvable region and the remaining
/// coupled (gray) region, plus dashed arcs for -Sigma_1 / -Sigma~ and the
/// axis circles of radius k0 and 2k0. PGM: 8-bit region-coded raster.
inline void emit_coverage_figure(const CoverageMask& mask, const ScanGeometry& g,
                                 const std::string& path, const std::string& format) {
    if (g.d != 2) throw std::invalid_argument("emit_coverage_figure: requires d = 2");
    const int n = mask.n;
    if (format == "pgm") {
        std::ofstream f(path, std::ios::binary | std::ios::trunc);
        if (!f) throw io_error("cannot open for writing: " + path);
        f << "P5\n" << n << " " << n << "\n255\n";
        std::string row(static_cast<size_t>(n), '\0');
        for (int j = n - 1; j >= 0; --j) {  // top row = largest frequency
            for (int i = 0; i < n; ++i) {
                uint8_t code = 255;
                switch (mask.at(i, j)) {
                    case RegionTag::Y1: code = 60; break;
                    case RegionTag::YTilde: code = 120; break;
                    case RegionTag::Y2Gray: code = 200; break;
                    default: code = 255; break;
                }
                row[static_cast<size_t>(i)] = static_cast<char>(code);
            }
            f.write(row.data(), n);
        }
        if (!f) throw io_error("write failed: " + path);
        return;
    }
    if (format != "svg") throw std::invalid_argument("emit_coverage_figure: format must be svg or pgm");

    const double S = 800.0;
    const double cell_px = S / n;
    auto to_px = [&](double xi, double yj) {
        // lattice index -> pixel; node (i,j) sits at cell center
        return std::pair<double, double>((xi + 0.5) * cell_px, S - (yj + 0.5) * cell_px);
    };
    auto freq_to_px = [&](double fx, double fy) {
        const double u = (fx + 2.0 * g.k0) / (4.0 * g.k0) * S;
        const double v = S - (fy + 2.0 * g.k0) / (4.0 * g.k0) * S;
        return std::pair<double, double>(u, v);
    };

    std::string svg;
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"800\" viewBox=\"0 0 800 800\">\n";
    svg += "<rect width=\"800\" height=\"800\" fill=\"white\"/>\n";

    struct Layer {
        RegionTag tag;
        const char* color;
    };
    const Layer layers[3] = {{RegionTag::Y2Gray, "#c8c8c8"},
                             {RegionTag::Y1, "#7aa6d8"},
                             {RegionTag::YTilde, "#7fc97f"}};
    for (const auto& layer : layers) {
        std::vector<uint8_t> field(static_cast<size_t>(n) * n, 0);
        bool any = false;
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i)
                if (mask.at(i, j) == layer.tag) {
                    field[static_cast<size_t>(j) * n + i] = 1;
                    any = true;
                }
        if (!any) continue;
        const auto polys = io_detail::marching_squares(field, n);
        svg += "<path fill=\"";
        svg += layer.color;
        svg += "\" fill-opacity=\"0.85\" stroke=\"none\" fill-rule=\"evenodd\" d=\"";
        for (const auto& poly : polys) {
            for (size_t p = 0; p < poly.size(); ++p) {
                const auto [px, py] = to_px(poly[p].first, poly[p].second);
                svg += (p == 0 ? "M" : "L");
                svg += io_detail::fmt6(px) + " " + io_detail::fmt6(py);
            }
            svg += "Z";
        }
        svg += "\"/>\n";
    }

    // axis circles
    for (double rad : {g.k0, 2.0 * g.k0}) {
        const double rpx = rad / (4.0 * g.k0) * S;
        svg += "<circle cx=\"400\" cy=\"400\" r=\"" + io_detail::fmt6(rpx) +
               "\" fill=\"none\" stroke=\"#404040\" stroke-width=\"1\"/>\n";
    }

    // dashed arcs of -Sigma_1 (orange) and -Sigma~ (green) on the k0 circle
    const SigmaArcs arcs = sigma_arcs_2d(g);
    struct DashSpec {
        Arc arc;
        const char* color;
    };
    const DashSpec dashes[2] = {{arcs.sigma1.negated(), "#e08020"},
                                {arcs.sigma_tilde.negated(), "#2f8f2f"}};
    for (const auto& d : dashes) {
        if (d.arc.empty) continue;
        svg += "<path fill=\"none\" stroke=\"";
        svg += d.color;
        svg += "\" stroke-width=\"2.5\" stroke-dasharray=\"8 6\" d=\"";
        const int steps = std::max(8, static_cast<int>(d.arc.width() * 180.0 / pi));
        for (int s = 0; s <= steps; ++s) {
            const double th = d.arc.lo() + d.arc.width() * s / steps;
            const auto [px, py] = freq_to_px(g.k0 * std::cos(th), g.k0 * std::sin(th));
            svg += (s == 0 ? "M" : "L");
            svg += io_detail::fmt6(px) + " " + io_detail::fmt6(py);
        }
        svg += "\"/>\n";
    }
    svg += "</svg>\n";

    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw io_error("cannot open for writing: " + path);
    f << svg;
    if (!f) throw io_error("write failed: " + path);
}

}  // namespace rdt
