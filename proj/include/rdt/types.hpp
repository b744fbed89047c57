#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace rdt {

using cdouble = std::complex<double>;

inline constexpr double pi = 3.14159265358979323846264338327950288;

/// Thrown when a run configuration fails schema or invariant validation.
struct config_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Thrown on file I/O failures; message carries the offending path.
struct io_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Thrown when a numerical precondition (e.g. Nyquist sampling) is violated
/// and no override was requested.
struct precondition_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Small fixed-capacity vector for points/directions in R^2 or R^3.
/// The runtime dimension is carried alongside the components so geometry
/// code can stay dimension-generic without templates.
struct Vec {
    std::array<double, 3> c{0.0, 0.0, 0.0};
    int dim = 2;

    Vec() = default;
    Vec(double x, double y) : c{x, y, 0.0}, dim(2) {}
    Vec(double x, double y, double z) : c{x, y, z}, dim(3) {}

    static Vec zero(int d) {
        Vec v;
        v.dim = d;
        return v;
    }
    /// Last standard basis vector e_d (detector plane normal).
    static Vec axis(int d, int i) {
        Vec v = zero(d);
        v.c[static_cast<size_t>(i)] = 1.0;
        return v;
    }

    double operator[](int i) const { return c[static_cast<size_t>(i)]; }
    double& operator[](int i) { return c[static_cast<size_t>(i)]; }

    double x() const { return c[0]; }
    double y() const { return c[1]; }
    double z() const { return c[2]; }

    Vec operator+(const Vec& o) const {
        Vec r = *this;
        for (int i = 0; i < dim; ++i) r[i] += o[i];
        return r;
    }
    Vec operator-(const Vec& o) const {
        Vec r = *this;
        for (int i = 0; i < dim; ++i) r[i] -= o[i];
        return r;
    }
    Vec operator-() const {
        Vec r = *this;
        for (int i = 0; i < dim; ++i) r[i] = -r[i];
        return r;
    }
    Vec operator*(double s) const {
        Vec r = *this;
        for (int i = 0; i < dim; ++i) r[i] *= s;
        return r;
    }
    friend Vec operator*(double s, const Vec& v) { return v * s; }

    double dot(const Vec& o) const {
        double s = 0;
        for (int i = 0; i < dim; ++i) s += c[static_cast<size_t>(i)] * o[i];
        return s;
    }
    double norm2() const { return dot(*this); }
    double norm() const { return std::sqrt(norm2()); }

    Vec normalized(double eps = 0.0) const {
        double n = norm();
        if (n <= eps) throw std::domain_error("cannot normalize zero-length vector");
        return *this * (1.0 / n);
    }
};

inline double dot(const Vec& a, const Vec& b) { return a.dot(b); }

/// 3D cross product; inputs must be 3-dimensional.
inline Vec cross(const Vec& a, const Vec& b) {
    return Vec(a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]);
}

/// 90-degree clockwise rotation, used for in-plane bases of 2D scan lines.
inline Vec perp2(const Vec& v) { return Vec(v[1], -v[0]); }

/// Dense row-major complex matrix; the workhorse container for records,
/// spectra and images.
struct Array2C {
    int rows = 0, cols = 0;
    std::vector<cdouble> v;

    Array2C() = default;
    Array2C(int r, int c) : rows(r), cols(c), v(static_cast<size_t>(r) * static_cast<size_t>(c)) {}

    cdouble& at(int r, int c) { return v[static_cast<size_t>(r) * cols + c]; }
    const cdouble& at(int r, int c) const { return v[static_cast<size_t>(r) * cols + c]; }
    size_t size() const { return v.size(); }
};

inline double max_abs(const Array2C& a) {
    double m = 0;
    for (const auto& z : a.v) m = std::max(m, std::abs(z));
    return m;
}

}  // namespace rdt
