#pragma once

#include <cassert>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "rdt/types.hpp"

namespace rdt {

inline bool is_pow2(int n) { return n > 0 && (n & (n - 1)) == 0; }

inline int next_pow2(int n) {
    int p = 1;
    while (p < n) p <<= 1;
    return p;
}

/// In-place iterative radix-2 Cooley-Tukey transform.
/// sign = -1 computes sum a_j e^{-2*pi*i*jk/n}, sign = +1 the conjugate sum.
/// No 1/n normalization is applied; callers own the scaling.
inline void fft_pow2(std::vector<cdouble>& a, int sign) {
    const int n = static_cast<int>(a.size());
    if (n <= 1) return;
    if (!is_pow2(n)) throw std::invalid_argument("fft_pow2: length must be a power of two");

    for (int i = 1, j = 0; i < n; ++i) {
        int bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[static_cast<size_t>(i)], a[static_cast<size_t>(j)]);
    }
    for (int len = 2; len <= n; len <<= 1) {
        const double ang = sign * 2.0 * pi / len;
        const cdouble wl(std::cos(ang), std::sin(ang));
        for (int i = 0; i < n; i += len) {
            cdouble w(1.0, 0.0);
            for (int k = 0; k < len / 2; ++k) {
                cdouble u = a[static_cast<size_t>(i + k)];
                cdouble v = a[static_cast<size_t>(i + k + len / 2)] * w;
                a[static_cast<size_t>(i + k)] = u + v;
                a[static_cast<size_t>(i + k + len / 2)] = u - v;
                w *= wl;
            }
        }
    }
}

/// Centered DFT used by all planar transforms: samples live at
/// u_j = (j - n/2) * spacing and outputs at omega_m = 2*pi*m/(n*spacing),
/// m in [-n/2, n/2), both in array order j, m+n/2.
///
///   out[m] = scale * sum_j in[j] * exp(sign * i * omega_m * u_j)
///
/// Computed with one FFT plus (-1)^(j+m) twiddles from the half-length shifts.
inline std::vector<cdouble> centered_dft(const std::vector<cdouble>& in, int sign, double scale) {
    const int n = static_cast<int>(in.size());
    if (!is_pow2(n)) throw std::invalid_argument("centered_dft: length must be a power of two");
    std::vector<cdouble> a(in);
    fft_pow2(a, sign);
    std::vector<cdouble> out(static_cast<size_t>(n));
    const int h = n / 2;
    for (int idx = 0; idx < n; ++idx) {
        int m = idx - h;                       // signed frequency index
        int bin = (m % n + n) % n;             // FFT bin holding it
        double s = (m % 2 == 0) ? 1.0 : -1.0;  // exp(-sign*i*pi*m), the u_j = (j-n/2) shift
        out[static_cast<size_t>(idx)] = scale * s * a[static_cast<size_t>(bin)];
    }
    return out;
}

namespace detail {

/// Barycentric-style Lagrange weights on a uniform unit-spaced stencil of
/// width W, for an evaluation offset t in [W/2-1, W/2]. Uniform spacing makes
/// the denominators constant, so only the numerator products vary.
template <int W>
inline void lagrange_weights(double t, double* w) {
    static_assert(W >= 2);
    double num[W];
    double left = 1.0;
    for (int l = 0; l < W; ++l) {
        num[l] = left;
        left *= (t - l);
    }
    double right = 1.0;
    for (int l = W - 1; l >= 0; --l) {
        num[l] *= right;
        right *= (t - l);
    }
    // denom[l] = prod_{j!=l} (l - j) = (-1)^(W-1-l) * l! * (W-1-l)!
    static const auto denom_inv = [] {
        std::array<double, W> d{};
        double fact[W + 1];
        fact[0] = 1.0;
        for (int i = 1; i <= W; ++i) fact[i] = fact[i - 1] * i;
        for (int l = 0; l < W; ++l) {
            double v = fact[l] * fact[W - 1 - l];
            if ((W - 1 - l) % 2) v = -v;
            d[static_cast<size_t>(l)] = 1.0 / v;
        }
        return d;
    }();
    for (int l = 0; l < W; ++l) w[l] = num[l] * denom_inv[static_cast<size_t>(l)];
}

constexpr int kLagrangeWidth = 12;
constexpr int kOversample = 16;

}  // namespace detail

/// Evaluates trigonometric sums S(omega) = sum_a c_a exp(sign*i*omega*u_a)
/// with u_a = u0 + a*du at many target frequencies, |omega| <= omega_max.
/// One zero-padded FFT (oversampling 16x) plus 12-point Lagrange interpolation;
/// relative accuracy ~1e-12 against the direct sum.
class UniformSeriesEvaluator {
public:
    UniformSeriesEvaluator(const std::vector<cdouble>& coeffs, double u0, double du, int sign,
                           double omega_max)
        : u0_(u0), du_(du), sign_(sign) {
        const int n = static_cast<int>(coeffs.size());
        p_ = next_pow2(detail::kOversample * n);
        // Keep the needed band plus the interpolation stencil inside [-p/2, p/2).
        domega_ = 2.0 * pi / (p_ * du_);
        int need = static_cast<int>(std::ceil(omega_max / domega_)) + detail::kLagrangeWidth + 2;
        while (need >= p_ / 2) {
            p_ *= 2;
            domega_ = 2.0 * pi / (p_ * du_);
            need = static_cast<int>(std::ceil(omega_max / domega_)) + detail::kLagrangeWidth + 2;
        }
        bins_.assign(static_cast<size_t>(p_), cdouble(0));
        for (int a = 0; a < n; ++a) bins_[static_cast<size_t>(a)] = coeffs[static_cast<size_t>(a)];
        fft_pow2(bins_, sign_);
    }

    cdouble operator()(double omega) const {
        constexpr int W = detail::kLagrangeWidth;
        const double mu = omega / domega_;
        const int base = static_cast<int>(std::floor(mu)) - (W / 2 - 1);
        double w[W];
        detail::lagrange_weights<W>(mu - base, w);
        cdouble s(0);
        for (int l = 0; l < W; ++l) {
            int m = base + l;
            int bin = (m % p_ + p_) % p_;
            s += w[l] * bins_[static_cast<size_t>(bin)];
        }
        // undo the implicit u0=0 origin of the FFT grid
        const double ph = sign_ * omega * u0_;
        return s * cdouble(std::cos(ph), std::sin(ph));
    }

private:
    double u0_, du_, domega_;
    int sign_, p_ = 0;
    std::vector<cdouble> bins_;
};

/// Accumulates sums out_j = sum_q c_q exp(sign*i*(j*h)*g_q) for the centered
/// index range j in [-n/2, n/2), given nonuniform frequencies |h*g_q| < pi.
/// Transpose of the evaluator above: each term is spread onto an oversampled
/// phase grid with the same Lagrange stencil, then one FFT produces all j.
class NonuniformToneSum {
public:
    NonuniformToneSum(int n_out, double h, int sign) : n_(n_out), h_(h), sign_(sign) {
        p_ = next_pow2(detail::kOversample * std::max(2, n_out / 2));
        grid_.assign(static_cast<size_t>(p_), cdouble(0));
    }

    void add(cdouble c, double g) {
        constexpr int W = detail::kLagrangeWidth;
        const double G = h_ * g;  // phase step per output index, must be in (-pi, pi)
        const double mu = G * p_ / (2.0 * pi);
        const int base = static_cast<int>(std::floor(mu)) - (W / 2 - 1);
        double w[W];
        detail::lagrange_weights<W>(mu - base, w);
        for (int l = 0; l < W; ++l) {
            int bin = ((base + l) % p_ + p_) % p_;
            grid_[static_cast<size_t>(bin)] += w[l] * c;
        }
    }

    /// Output indexed j+n/2 for j in [-n/2, n/2).
    std::vector<cdouble> resolve() const {
        std::vector<cdouble> a(grid_);
        fft_pow2(a, sign_);
        std::vector<cdouble> out(static_cast<size_t>(n_));
        for (int idx = 0; idx < n_; ++idx) {
            int j = idx - n_ / 2;
            int bin = (j % p_ + p_) % p_;
            out[static_cast<size_t>(idx)] = a[static_cast<size_t>(bin)];
        }
        return out;
    }

private:
    int n_;
    double h_;
    int sign_, p_;
    std::vector<cdouble> grid_;
};

}  // namespace rdt
