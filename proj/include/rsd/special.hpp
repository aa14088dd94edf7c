#pragma once

/**
 * @file special.hpp
 * @brief Integer-order Bessel J, complex gamma, the Mellin transform
 *        H(nu, mu, s) = int_0^inf J_nu(x) J_mu(x) x^-s dx, and zeta(2), zeta(3).
 */

#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "quadrature.hpp"

namespace rsd {

using cplx = std::complex<double>;

// =============================================================================
// Bessel J_n(x)
// =============================================================================

enum class BesselRegime { series, miller, hankel };

inline constexpr int bessel_max_order = 200;
inline constexpr double bessel_max_x = 1e8;

/// Which evaluation route bessel_j takes at (n, x).
inline BesselRegime bessel_regime(int n, double x) {
    if (x > 50.0 + static_cast<double>(n) * n / 20.0) return BesselRegime::hankel;
    // The alternating series loses about log10(I_n(x) / |J_n(x)|) digits;
    // x^2 < 20 (n + 1) keeps that ratio near e^10.
    if (x < 12.0 || x * x < 20.0 * (n + 1)) return BesselRegime::series;
    return BesselRegime::miller;
}

/// Hankel coefficients a_k(nu) = prod_{j<=k} (4 nu^2 - (2j-1)^2) / (k! 8^k), k = 0..K.
inline std::vector<double> hankel_coefficients(int nu, int K) {
    std::vector<double> a(static_cast<std::size_t>(K + 1));
    a[0] = 1.0;
    const double mu = 4.0 * nu * nu;
    for (int k = 1; k <= K; ++k) {
        const double odd = 2.0 * k - 1.0;
        a[static_cast<std::size_t>(k)] = a[static_cast<std::size_t>(k - 1)] * (mu - odd * odd) / (8.0 * k);
    }
    return a;
}

namespace detail {

inline double bessel_series(int n, double x) {
    const double half = 0.5 * x;
    const double q = half * half;
    double term = std::exp(n * std::log(half) - std::lgamma(n + 1.0));
    double sum = term;
    for (int k = 1; k < 500; ++k) {
        term *= -q / (static_cast<double>(k) * (k + n));
        sum += term;
        if (std::abs(term) < 1e-17 * std::abs(sum)) break;
    }
    return sum;
}

inline double bessel_miller(int n, double x) {
    const double top = std::max(static_cast<double>(n), x) + 15.0 * std::cbrt(std::max(x, 1.0) / 2.0) + 20.0;
    int m = static_cast<int>(top);
    m += m % 2;
    double bjp = 0.0, bj = 1.0, ans = 0.0, norm = 0.0;
    for (int k = m; k >= 1; --k) {
        const double bjm = (2.0 * k / x) * bj - bjp;
        bjp = bj;
        bj = bjm;
        if (std::abs(bj) > 1e250) {
            bj *= 1e-250;
            bjp *= 1e-250;
            ans *= 1e-250;
            norm *= 1e-250;
        }
        const int order = k - 1;  // bj now holds J_order up to scale
        if (order == n) ans = bj;
        if (order == 0)
            norm += bj;
        else if (order % 2 == 0)
            norm += 2.0 * bj;
    }
    return ans / norm;
}

inline double bessel_hankel(int n, double x) {
    const double mu = 4.0 * n * n;
    double p = 0.0, q = 0.0, term = 1.0, prev = INFINITY;
    for (int k = 0; k < 600; ++k) {
        if (k > 0) {
            const double odd = 2.0 * k - 1.0;
            term *= (mu - odd * odd) / (8.0 * k * x);
        }
        const double mag = std::abs(term);
        if (k > n && mag > prev) break;  // asymptotic series turned divergent
        switch (k % 4) {
        case 0: p += term; break;
        case 1: q += term; break;
        case 2: p -= term; break;
        default: q -= term; break;
        }
        if (mag < 1e-17 * (std::abs(p) + std::abs(q))) break;
        prev = mag;
    }
    // omega = x - (2n + 1) pi / 4; expand so that x itself enters cos/sin unrounded
    static constexpr double r = std::numbers::sqrt2 / 2.0;
    static constexpr std::array<double, 8> cs{1, r, 0, -r, -1, -r, 0, r};
    const int j = (2 * n + 1) % 8;
    const double cphi = cs[static_cast<std::size_t>(j)], sphi = cs[static_cast<std::size_t>((j + 6) % 8)];
    const double cx = std::cos(x), sx = std::sin(x);
    const double cw = cx * cphi + sx * sphi, sw = sx * cphi - cx * sphi;
    return std::sqrt(2.0 / (std::numbers::pi * x)) * (p * cw - q * sw);
}

}  // namespace detail

/// J_n(x) for 0 <= n <= 200, 0 <= x <= 1e8.
inline double bessel_j(int n, double x) {
    if (!(x >= 0.0)) throw std::domain_error("bessel_j: x must be non-negative");
    if (n < 0 || n > bessel_max_order) throw std::out_of_range("bessel_j: order outside [0, 200]");
    if (x > bessel_max_x) throw std::out_of_range("bessel_j: x exceeds 1e8");
    if (x == 0.0) return n == 0 ? 1.0 : 0.0;
    switch (bessel_regime(n, x)) {
    case BesselRegime::series: return detail::bessel_series(n, x);
    case BesselRegime::miller: return detail::bessel_miller(n, x);
    case BesselRegime::hankel: return detail::bessel_hankel(n, x);
    }
    return 0.0;
}

// =============================================================================
// Complex gamma
// =============================================================================

namespace detail {

inline constexpr double lanczos_g = 7.0;
inline constexpr std::array<double, 9> lanczos_coef{
    0.99999999999980993,  676.5203681218851,   -1259.1392167224028,
    771.32342877765313,   -176.61502916214059, 12.507343278686905,
    -0.13857109526572012, 9.9843695780195716e-6, 1.5056327351493116e-7};

/// log Gamma(z) for Re z >= 1/2.
inline cplx log_gamma_lanczos(cplx z) {
    z -= 1.0;
    cplx x = lanczos_coef[0];
    for (std::size_t i = 1; i < lanczos_coef.size(); ++i) x += lanczos_coef[i] / (z + static_cast<double>(i));
    const cplx t = z + lanczos_g + 0.5;
    return 0.5 * std::log(2.0 * std::numbers::pi) + (z + 0.5) * std::log(t) - t + std::log(x);
}

inline bool is_gamma_pole(cplx s) {
    return s.imag() == 0.0 && s.real() <= 0.0 && s.real() == std::floor(s.real());
}

}  // namespace detail

inline cplx complex_gamma(cplx s) {
    if (detail::is_gamma_pole(s)) throw std::domain_error("complex_gamma: pole at non-positive integer");
    if (s.real() < 0.5) {
        const double pi = std::numbers::pi;
        return pi / (std::sin(pi * s) * std::exp(detail::log_gamma_lanczos(1.0 - s)));
    }
    return std::exp(detail::log_gamma_lanczos(s));
}

/// 1 / Gamma(s); entire, exactly zero at the poles of Gamma.
inline cplx reciprocal_gamma(cplx s) {
    if (detail::is_gamma_pole(s)) return {0.0, 0.0};
    if (s.real() < 0.5) {
        const double pi = std::numbers::pi;
        return std::sin(pi * s) * std::exp(detail::log_gamma_lanczos(1.0 - s)) / pi;
    }
    return std::exp(-detail::log_gamma_lanczos(s));
}

// =============================================================================
// Mellin transform of a Bessel product
// =============================================================================

struct MellinParams {
    int nu = 0;
    int mu = 0;
    cplx s{};

    bool in_strip() const { return s.real() > 0.0 && s.real() < nu + mu + 1.0; }
};

namespace detail {

inline void require_strip(const MellinParams& p) {
    if (p.nu < 0 || p.mu < 0) throw std::invalid_argument("H: orders must be non-negative");
    if (!p.in_strip())
        throw std::domain_error("H: Re(s) = " + std::to_string(p.s.real()) + " outside (0, nu + mu + 1)");
}

}  // namespace detail

/// 2^-s Gamma(s) Gamma((nu+mu+1-s)/2) / [Gamma((nu-mu+1+s)/2) Gamma((mu-nu+1+s)/2) Gamma((nu+mu+1+s)/2)].
inline cplx h_closed(const MellinParams& p) {
    detail::require_strip(p);
    const double nu = p.nu, mu = p.mu;
    const cplx s = p.s;
    return std::pow(2.0, -s) * complex_gamma(s) * complex_gamma((nu + mu + 1.0 - s) / 2.0) *
           reciprocal_gamma((nu - mu + 1.0 + s) / 2.0) * reciprocal_gamma((mu - nu + 1.0 + s) / 2.0) *
           reciprocal_gamma((nu + mu + 1.0 + s) / 2.0);
}

/// The same transform after Gamma(1/2 + z) Gamma(1/2 - z) = pi / cos(pi z):
/// 2^-s cos(pi (s - nu + mu) / 2) Gamma(s) Gamma((nu+mu+1-s)/2) Gamma((nu-mu+1-s)/2)
///   / [pi Gamma((nu+mu+1+s)/2) Gamma((nu-mu+1+s)/2)].
/// Throws at points where Gamma((nu-mu+1-s)/2) has a pole.
inline cplx h_cosine_form(const MellinParams& p) {
    detail::require_strip(p);
    const double nu = p.nu, mu = p.mu, pi = std::numbers::pi;
    const cplx s = p.s;
    return std::pow(2.0, -s) * std::cos(pi * (s - nu + mu) / 2.0) * complex_gamma(s) *
           complex_gamma((nu + mu + 1.0 - s) / 2.0) * complex_gamma((nu - mu + 1.0 - s) / 2.0) *
           reciprocal_gamma((nu + mu + 1.0 + s) / 2.0) * reciprocal_gamma((nu - mu + 1.0 + s) / 2.0) / pi;
}

/// H(k1 - 1, k2 - 1, s) for even weights, written with i^{k1+k2} cos(pi s / 2).
inline cplx h_even_weight(int k1, int k2, cplx s) {
    if (k1 < 2 || k2 < 2 || k1 % 2 || k2 % 2) throw std::invalid_argument("h_even_weight: weights must be even and >= 2");
    detail::require_strip({k1 - 1, k2 - 1, s});
    const double a = k1, b = k2, pi = std::numbers::pi;
    const double ipow = ((k1 + k2) / 2) % 2 == 0 ? 1.0 : -1.0;
    return std::pow(2.0, -s) * ipow * std::cos(pi * s / 2.0) * complex_gamma(s) *
           complex_gamma((a + b - 1.0 - s) / 2.0) * complex_gamma((a - b + 1.0 - s) / 2.0) *
           reciprocal_gamma((a + b - 1.0 + s) / 2.0) * reciprocal_gamma((a - b + 1.0 + s) / 2.0) / pi;
}

namespace detail {

/// int_X^inf x^-a e^{i beta x} dx by repeated integration by parts.
inline cplx oscillatory_tail(cplx a, double beta, double X) {
    const cplx ib(0.0, beta);
    cplx term = std::pow(X, -a) / ib;
    cplx sum = term;
    double prev = std::abs(term);
    for (int j = 1; j < 60; ++j) {
        term *= (a + static_cast<double>(j - 1)) / (ib * X);
        const double mag = std::abs(term);
        if (mag > prev) break;
        sum += term;
        if (mag < 1e-18 * std::abs(sum)) break;
        prev = mag;
    }
    return -std::exp(ib * X) * sum;
}

}  // namespace detail

/// int_X^inf J_nu J_mu x^-s dx from the Hankel expansions of both factors,
/// keeping powers x^-k for k <= order.  order < 0 returns 0.
inline cplx h_tail(const MellinParams& p, double X, int order) {
    if (order < 0) return {0.0, 0.0};
    const auto an = hankel_coefficients(p.nu, order);
    const auto am = hankel_coefficients(p.mu, order);
    const double pi = std::numbers::pi;
    static constexpr std::array<cplx, 4> ipow{cplx(1, 0), cplx(0, 1), cplx(-1, 0), cplx(0, -1)};
    const cplx rot = ipow[static_cast<std::size_t>(((p.mu - p.nu) % 4 + 4) % 4)];
    const cplx phase = std::exp(cplx(0.0, -(p.nu + p.mu + 1) * pi / 2.0));
    cplx total{};
    for (int k = 0; k <= order; ++k) {
        cplx c{}, d{};
        for (int j = 0; j <= k; ++j) {
            const int l = k - j;
            const double prod = an[static_cast<std::size_t>(j)] * am[static_cast<std::size_t>(l)];
            c += ipow[static_cast<std::size_t>(j % 4)] * ipow[static_cast<std::size_t>((4 - l % 4) % 4)] * prod;
            d += prod;
        }
        c *= rot;
        d *= ipow[static_cast<std::size_t>(k % 4)];
        const cplx a = 1.0 + static_cast<double>(k) + p.s;
        total += c.real() / pi * std::pow(X, -(p.s + static_cast<double>(k))) / (p.s + static_cast<double>(k));
        total += (d * phase * detail::oscillatory_tail(a, 2.0, X) + std::conj(d) * std::conj(phase) * detail::oscillatory_tail(a, -2.0, X)) /
                 (2.0 * pi);
    }
    return total;
}

inline constexpr int h_default_tail_order = 8;

/// Panel quadrature of J_nu J_mu x^-s on [0, X_max] plus the Hankel tail of the given order.
inline cplx h_quadrature(const MellinParams& p, double X_max, int tail_order = h_default_tail_order) {
    detail::require_strip(p);
    if (p.s.real() <= 0.5) throw std::domain_error("h_quadrature: requires Re(s) > 1/2");
    const int top = std::max(p.nu, p.mu);
    if (X_max < 50.0 || X_max < 10.0 * (top + 1)) throw std::domain_error("h_quadrature: X_max too small for the tail expansion");
    auto f = [&](double x) { return bessel_j(p.nu, x) * bessel_j(p.mu, x) * std::pow(x, -p.s); };

    // [0, eps]: leading power x^{nu+mu-s} / (2^{nu+mu} nu! mu!)
    const double eps = std::ldexp(1.0, -40);
    const cplx lead_exp = static_cast<double>(p.nu + p.mu) + 1.0 - p.s;
    cplx total = std::pow(eps, lead_exp) / lead_exp *
                 std::exp(-(p.nu + p.mu) * std::log(2.0) - std::lgamma(p.nu + 1.0) - std::lgamma(p.mu + 1.0));
    // geometric panels up to 1 resolve the algebraic behaviour at the origin
    for (double a = eps; a < 1.0; a *= 2.0) total += gauss_legendre_panel(f, a, 2.0 * a);
    // half-periods of the product's oscillation
    const double width = std::numbers::pi / 2.0;
    const int panels = static_cast<int>(std::ceil((X_max - 1.0) / width));
    total += gauss_legendre_composite(f, 1.0, X_max, panels);
    return total + h_tail(p, X_max, tail_order);
}

// =============================================================================
// Zeta constants
// =============================================================================

struct ZetaConstants {
    double zeta2;
    double zeta3;
};

inline constexpr ZetaConstants zeta_constants() {
    return {std::numbers::pi * std::numbers::pi / 6.0, 1.2020569031595942854};
}

/// zeta(3) from sum_{n<N} n^-3 plus an Euler-Maclaurin tail through B_6.
inline double zeta3_series(int N = 100) {
    double s = 0.0;
    for (int n = N - 1; n >= 1; --n) s += 1.0 / (static_cast<double>(n) * n * n);
    const double x = N;
    return s + 1.0 / (2 * x * x) + 1.0 / (2 * x * x * x) + 1.0 / (4 * std::pow(x, 4)) - 1.0 / (12 * std::pow(x, 6)) +
           1.0 / (12 * std::pow(x, 8));
}

}  // namespace rsd
