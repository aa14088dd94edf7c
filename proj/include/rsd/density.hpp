#pragma once

/**
 * @file density.hpp
 * @brief Symplectic one-level density arithmetic with the Fejer test family.
 *
 *   W(Sp)(x) = 1 - sin(2 pi x) / (2 pi x),   W^(y) = delta(y) - 1/2 [|y| < 1]
 *   phi_s(x) = (sin(pi s x) / (pi s x))^2,   phi^_s(y) = (s - |y|) / s^2 on |y| < s
 *
 * plus analytic conductors, nonvanishing constants, the Euler factors
 * zeta_d, alpha_d, beta_d and the pole-term Euler product summing to 6 / pi^2.
 */

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "arith.hpp"
#include "quadrature.hpp"
#include "special.hpp"

namespace rsd {

// ---------------------------------------------------------------------------
// Test functions
// ---------------------------------------------------------------------------

/// Fejer pair with Fourier support (-sigma, sigma).  Only this family is built in.
class TestFunction {
public:
    static TestFunction fejer(double sigma) { return TestFunction(sigma); }

    double sigma() const { return sigma_; }

    double operator()(double x) const {
        const double u = std::numbers::pi * sigma_ * x;
        if (std::abs(u) < 1e-8) return 1.0 - u * u / 3.0;
        const double s = std::sin(u) / u;
        return s * s;
    }

    /// phi(i t) = (sinh(pi sigma t) / (pi sigma t))^2
    double at_imaginary(double t) const {
        const double u = std::numbers::pi * sigma_ * t;
        if (std::abs(u) < 1e-8) return 1.0 + u * u / 3.0;
        const double s = std::sinh(u) / u;
        return s * s;
    }

    double hat(double y) const {
        const double a = std::abs(y);
        return a < sigma_ ? (sigma_ - a) / (sigma_ * sigma_) : 0.0;
    }

private:
    explicit TestFunction(double sigma) : sigma_(sigma) {
        if (!(sigma > 0.0) || !std::isfinite(sigma)) throw std::invalid_argument("TestFunction: sigma must be positive and finite");
    }
    double sigma_;
};

/// phi at a real or purely imaginary point.
inline double test_function_eval(const TestFunction& phi, cplx z) {
    if (z.imag() == 0.0) return phi(z.real());
    if (z.real() == 0.0) return phi.at_imaginary(z.imag());
    throw std::domain_error("test_function_eval: only real or purely imaginary arguments are supported");
}

// ---------------------------------------------------------------------------
// Symplectic density
// ---------------------------------------------------------------------------

inline double w_sp(double x) {
    const double u = 2.0 * std::numbers::pi * x;
    if (std::abs(u) < 1e-2) {
        const double v = u * u;
        return v / 6.0 * (1.0 - v / 20.0 * (1.0 - v / 42.0 * (1.0 - v / 72.0)));
    }
    return 1.0 - std::sin(u) / u;
}

struct WSpHat {
    double delta_mass;
    double density;
};

/// Distributional Fourier transform; the jump at |y| = 1 takes the midpoint -1/4.
inline WSpHat w_sp_hat(double y) {
    const double a = std::abs(y);
    return {1.0, a < 1.0 ? -0.5 : (a == 1.0 ? -0.25 : 0.0)};
}

struct KsMainTerm {
    double value;             // int phi W(Sp) = phi^(0) - 1/2 int_{|y|<1} phi^
    double density_integral;  // same quantity, reassembled from s_limit
    double s_limit;           // int phi(x) sin(2 pi x) / (2 pi x) dx - phi(0) / 2
};

inline KsMainTerm ks_main_term(const TestFunction& phi) {
    const double s = phi.sigma();
    const double half_inner = s <= 1.0 ? 0.5 : (2.0 * s - 1.0) / (2.0 * s * s);  // 1/2 int_{|y|<1} phi^
    KsMainTerm r;
    r.value = 1.0 / s - half_inner;
    r.s_limit = half_inner - 0.5;
    r.density_integral = phi.hat(0.0) - 0.5 * phi(0.0) - r.s_limit;
    if (std::abs(r.density_integral - r.value) > 1e-14 * std::max(1.0, std::abs(r.value)))
        throw std::logic_error("ks_main_term: decomposition inconsistent");
    return r;
}

namespace detail {

/// Si(z) for z >= 0.
inline double sine_integral(double z) {
    if (z < 0.0) return -sine_integral(-z);
    if (z <= 64.0) {
        if (z == 0.0) return 0.0;
        const auto f = [](double t) { return t == 0.0 ? 1.0 : std::sin(t) / t; };
        return gauss_legendre_composite(f, 0.0, z, static_cast<int>(std::ceil(z)) + 1);
    }
    const double w = 1.0 / (z * z);
    const double f = (1.0 - 2.0 * w * (1.0 - 12.0 * w * (1.0 - 30.0 * w * (1.0 - 56.0 * w)))) / z;
    const double g = w * (1.0 - 6.0 * w * (1.0 - 20.0 * w * (1.0 - 42.0 * w * (1.0 - 72.0 * w))));
    return std::numbers::pi / 2.0 - f * std::cos(z) - g * std::sin(z);
}

/// int_X^inf cos(c x) / x^2 dx for c >= 0, X > 0.
inline double cos_over_square_tail(double c, double X) {
    if (c == 0.0) return 1.0 / X;
    return std::cos(c * X) / X - c * (std::numbers::pi / 2.0 - sine_integral(c * X));
}

inline constexpr double quadrature_cutoff = 2.0e4;
inline constexpr double quadrature_panel = 0.25;

}  // namespace detail

/// Direct x-space quadrature of int phi(x) W(Sp)(x) dx with an exact tail for the phi part.
inline double density_quadrature(const TestFunction& phi) {
    const double X = detail::quadrature_cutoff;
    const auto f = [&](double x) { return phi(x) * w_sp(x); };
    const double body = gauss_legendre_composite(f, 0.0, X, static_cast<int>(X / detail::quadrature_panel));
    const double a = std::numbers::pi * phi.sigma();
    // int_X^inf sin^2(a x) / (a x)^2; the sinc-weighted remainder is O(1 / (a^2 X^2))
    const double tail = (1.0 / X - detail::cos_over_square_tail(2.0 * a, X)) / (2.0 * a * a);
    return 2.0 * (body + tail);
}

/// phi^(y) recomputed as 2 int_0^inf phi(x) cos(2 pi x y) dx.
inline double phi_hat_quadrature(const TestFunction& phi, double y) {
    const double X = detail::quadrature_cutoff;
    const double b = 2.0 * std::numbers::pi * std::abs(y);
    const auto f = [&](double x) { return phi(x) * std::cos(b * x); };
    const double body = gauss_legendre_composite(f, 0.0, X, static_cast<int>(X / detail::quadrature_panel));
    const double a = std::numbers::pi * phi.sigma();
    const double tail = (detail::cos_over_square_tail(b, X) - 0.5 * detail::cos_over_square_tail(b + 2.0 * a, X) -
                         0.5 * detail::cos_over_square_tail(std::abs(b - 2.0 * a), X)) /
                        (2.0 * a * a);
    return 2.0 * (body + tail);
}

// ---------------------------------------------------------------------------
// Nonvanishing constants
// ---------------------------------------------------------------------------

/// 5/4 - 1/(2 sigma) for sigma < 1, 1 - 1/(4 sigma^2) otherwise.
inline Rational nonvanishing_bound(const Rational& sigma) {
    if (!(Rational(0) < sigma)) throw std::invalid_argument("nonvanishing_bound: sigma must be positive");
    if (sigma < Rational(1)) return Rational(5, 4) - Rational(1) / (Rational(2) * sigma);
    return Rational(1) - Rational(1) / (Rational(4) * sigma * sigma);
}

inline double nonvanishing_bound(double sigma) {
    if (!(sigma > 0.0)) throw std::invalid_argument("nonvanishing_bound: sigma must be positive");
    return sigma < 1.0 ? 1.25 - 0.5 / sigma : 1.0 - 0.25 / (sigma * sigma);
}

struct CorollaryRow {
    std::string regime;
    Rational sigma;
    Rational constant;  // nonvanishing proportion
    Rational c0;        // mean-zero proportion constant
};

inline std::vector<CorollaryRow> corollary_constants() {
    const std::vector<std::pair<std::string, Rational>> rows{
        {"N_to_inf_k1_ne_k2", Rational(5, 4)},
        {"N_to_inf_k1_eq_k2", Rational(29, 28)},
        {"k_to_inf_bounded_gap", Rational(1)},
        {"general", Rational(1, 2)},
    };
    std::vector<CorollaryRow> out;
    for (const auto& [label, s] : rows) {
        const Rational c = nonvanishing_bound(s);
        out.push_back({label, s, c, c});
    }
    return out;
}

// ---------------------------------------------------------------------------
// Conductors and the pole term
// ---------------------------------------------------------------------------

struct ConductorSpec {
    int k1 = 2, k2 = 2;
    i64 N1 = 1, N2 = 1;
    i64 R = 0;

    bool has_pole() const { return k1 == k2 && N1 == N2; }
};

inline i64 conductor_value(int k1, int k2, i64 N1, i64 N2) {
    const i64 g = gcd(N1, N2);
    const i64 g2 = checked_mul(g, g);
    if (k1 != k2) {
        const i64 d = k1 - k2, s = k1 + k2;
        return checked_mul(g2, checked_mul(checked_mul(d, d), checked_mul(s, s)));
    }
    return checked_mul(g2, checked_mul(k1, k1));
}

/// Validates fields and fills or re-verifies R.
inline ConductorSpec make_conductor_spec(int k1, int k2, i64 N1, i64 N2, i64 R = 0) {
    if (k1 < 2 || k2 < 2 || k1 % 2 || k2 % 2) throw std::invalid_argument("conductor: weights must be even and >= 2");
    for (i64 N : {N1, N2})
        if (N != 1 && !(N > 1 && is_prime(static_cast<u64>(N)))) throw std::invalid_argument("conductor: levels must be 1 or prime");
    const i64 expected = conductor_value(k1, k2, N1, N2);
    if (R != 0 && R != expected) throw std::invalid_argument("conductor: R inconsistent with (k1, k2, N1, N2)");
    return {k1, k2, N1, N2, expected};
}

inline ConductorSpec verify_conductor(const ConductorSpec& spec) {
    return make_conductor_spec(spec.k1, spec.k2, spec.N1, spec.N2, spec.R);
}

/// Leading-order family size (k - 1) phi(N) / 12.
inline double family_size(int k, i64 N) { return (k - 1.0) * static_cast<double>(euler_phi(N)) / 12.0; }

/// 2 / |H*_k(N)| * phi(log R / (4 pi i)), defined only when f = g is possible.
inline double pole_term(const ConductorSpec& spec, const TestFunction& phi) {
    const auto s = verify_conductor(spec);
    if (!s.has_pole()) throw std::domain_error("pole_term: no pole unless (k1, N1) = (k2, N2)");
    const double t = std::log(static_cast<double>(s.R)) / (4.0 * std::numbers::pi);
    return 2.0 / family_size(s.k1, s.N1) * phi.at_imaginary(t);
}

// ---------------------------------------------------------------------------
// Euler factors
// ---------------------------------------------------------------------------

struct EulerFactors {
    cplx zeta_d;
    cplx alpha_d;
    cplx beta_d;
    double alpha_tail;  // estimate of the omitted primes p > P_max in alpha_d
};

/// zeta_d(s) = prod_{p|d} (1 - p^-s)^-1, beta_d(s) = prod_{p|d} (1 + p^-s),
/// alpha_d(s) = prod_{p !| d, p <= P_max} [1 - (1 - p^-s) / (p phi(p) p^s)].
inline EulerFactors euler_factors(i64 d, cplx s, i64 P_max) {
    if (d < 1) throw std::invalid_argument("euler_factors: d must be positive");
    if (!(s.real() > -0.5)) throw std::domain_error("euler_factors: alpha requires Re(s) > -1/2");
    if (P_max < 2) throw std::invalid_argument("euler_factors: P_max must be >= 2");
    const auto fd = factor(d);
    EulerFactors r{1.0, 1.0, 1.0, 0.0};
    for (const auto& pp : fd.factors()) {
        const cplx ps = std::pow(static_cast<double>(pp.prime), -s);
        r.zeta_d /= 1.0 - ps;
        r.beta_d *= 1.0 + ps;
    }
    for (i64 p : primes_up_to(P_max)) {
        if (fd.divisible_by_prime(p)) continue;
        const double pd = static_cast<double>(p);
        const cplx ps = std::pow(pd, -s);
        r.alpha_d *= 1.0 - (1.0 - ps) * ps / (pd * (pd - 1.0));
    }
    const double a = 2.0 + std::min(s.real(), 2.0 * s.real());
    r.alpha_tail = 2.0 * std::pow(static_cast<double>(P_max), 1.0 - a) / (a - 1.0);
    return r;
}

// ---------------------------------------------------------------------------
// Pole Euler product
// ---------------------------------------------------------------------------

/// f(p) = 1 + (p^3 - p^2)/(p^3 - 1) (p^2 + 1)/p^2 1/(p^2 - 1): the Euler factor of
/// sum_m m^-2 prod_{q|m} (q^3 - q^2)/(q^3 - 1) (q^2 + 1)/q^2.
inline Rational pole_factor_f(i64 p) {
    const i64 p2 = checked_mul(p, p), p3 = checked_mul(p2, p);
    return Rational(1) + Rational(p3 - p2, p3 - 1) * Rational(p2 + 1, p2) * Rational(1, p2 - 1);
}

/// The same factor with (p^3 - p) in place of (p^3 - p^2); it fails the identity below.
inline Rational pole_factor_f_variant(i64 p) {
    const i64 p2 = checked_mul(p, p), p3 = checked_mul(p2, p);
    return Rational(1) + Rational(p3 - p, p3 - 1) * Rational(p2 + 1, p2) * Rational(1, p2 - 1);
}

struct PoleIdentity {
    Rational lhs;  // f(p) - (2/p^2) (p^3 - p^2)/(p^3 - 1) / (1 - p^-2)
    Rational rhs;  // (1 - p^-2) / (1 - p^-3)
};

inline PoleIdentity pole_factor_identity(i64 p, const Rational& f) {
    const i64 p2 = checked_mul(p, p), p3 = checked_mul(p2, p);
    const Rational sub = Rational(2, p2) * Rational(p3 - p2, p3 - 1) * Rational(p2, p2 - 1);
    return {f - sub, Rational(p2 - 1, p2) / Rational(p3 - 1, p3)};
}

struct PoleEulerProduct {
    double target;                  // 6 / pi^2
    double closed_form_truncated;   // zeta(3)^-1 prod_{p <= P} (1 - p^-2)/(1 - p^-3)
    double closed_form;             // the same with the primes p > P restored via the prime number theorem
    double closed_form_tail;        // size of that restoration
    double triple_sum;              // sum over m, d1, d2 <= D with alpha truncated at P
    double triple_sum_budget;       // bound on the omitted terms
};

/// E_1(x) for x > 0.
inline double exponential_integral_e1(double x) { return -std::expint(-x); }

namespace detail {

/// Sum over m, d1, d2 <= D of mu(d1 d2) / (m d1 d2)^2 times the Euler weight with alpha truncated at P.
inline double pole_triple_sum(i64 P_max, i64 D_max) {
    const auto primes = primes_up_to(std::max(P_max, D_max));
    double alpha1 = 1.0;
    for (i64 p : primes) {
        if (p > P_max) break;
        const double pd = static_cast<double>(p);
        alpha1 *= 1.0 - 1.0 / (pd * pd * pd);
    }
    // Per-term weight: alpha1 * prod_{p|d} c_p * prod_{q|m, q !| d} c_q (1 + q^-2), with
    // c_p = (1 - 1/p)/(1 - p^-3).  Sum over d = d1 d2 first, then expand the m-dependence
    // 1 / h((m, d)) = sum_{e | (rad m, d)} g(e) with g(p) = 1/h_p - 1.
    const i64 D = D_max, D2 = D * D;
    std::vector<i64> spf(static_cast<std::size_t>(D2 + 1), 0);
    for (i64 p : primes) {
        if (p > D2) break;
        for (i64 j = p; j <= D2; j += p)
            if (!spf[static_cast<std::size_t>(j)]) spf[static_cast<std::size_t>(j)] = p;
    }
    for (i64 j = 2; j <= D2; ++j)  // primes above the sieve range
        if (!spf[static_cast<std::size_t>(j)]) {
            for (i64 k = j; k <= D2; k += j)
                if (!spf[static_cast<std::size_t>(k)]) spf[static_cast<std::size_t>(k)] = j;
        }
    const auto c_of = [&](i64 p) {
        const double pd = static_cast<double>(p);
        return p <= P_max ? (1.0 - 1.0 / pd) / (1.0 - 1.0 / (pd * pd * pd)) : 1.0 - 1.0 / pd;
    };
    const auto h_of = [&](i64 p) { return c_of(p) * (1.0 + 1.0 / (static_cast<double>(p) * static_cast<double>(p))); };

    // squarefree d <= D: mu and C(d)
    std::vector<int> mu(static_cast<std::size_t>(D2 + 1), 0);
    std::vector<double> C(static_cast<std::size_t>(D2 + 1), 0.0);
    mu[1] = 1;
    C[1] = 1.0;
    for (i64 j = 2; j <= D2; ++j) {
        const i64 p = spf[static_cast<std::size_t>(j)], rest = j / p;
        if (rest % p == 0 || mu[static_cast<std::size_t>(rest)] == 0) continue;
        mu[static_cast<std::size_t>(j)] = -mu[static_cast<std::size_t>(rest)];
        C[static_cast<std::size_t>(j)] = C[static_cast<std::size_t>(rest)] * c_of(p);
    }
    // W[d] = sum over ordered pairs d1 d2 = d, d1, d2 <= D, of mu(d) C(d) / d^2
    std::vector<double> W(static_cast<std::size_t>(D2 + 1), 0.0);
    for (i64 d1 = 1; d1 <= D; ++d1) {
        if (!mu[static_cast<std::size_t>(d1)]) continue;
        for (i64 d2 = 1; d2 <= D; ++d2) {
            const i64 d = d1 * d2;
            if (!mu[static_cast<std::size_t>(d)]) continue;
            const double dd = static_cast<double>(d);
            W[static_cast<std::size_t>(d)] += mu[static_cast<std::size_t>(d)] * C[static_cast<std::size_t>(d)] / (dd * dd);
        }
    }
    // T[e] = sum_{e | d} W[d] for squarefree e <= D
    std::vector<double> T(static_cast<std::size_t>(D + 1), 0.0);
    for (i64 e = 1; e <= D; ++e) {
        if (!mu[static_cast<std::size_t>(e)]) continue;
        double acc = 0.0;
        for (i64 d = e; d <= D2; d += e) acc += W[static_cast<std::size_t>(d)];
        T[static_cast<std::size_t>(e)] = acc;
    }
    double total = 0.0;
    for (i64 m = D; m >= 1; --m) {
        std::vector<i64> rad;
        for (i64 x = m; x > 1;) {
            const i64 p = spf[static_cast<std::size_t>(x)];
            rad.push_back(p);
            while (x % p == 0) x /= p;
        }
        double H = 1.0, inner = 0.0;
        for (i64 p : rad) H *= h_of(p);
        const std::size_t subsets = std::size_t{1} << rad.size();
        for (std::size_t mask = 0; mask < subsets; ++mask) {
            i64 e = 1;
            double g = 1.0;
            for (std::size_t i = 0; i < rad.size(); ++i)
                if (mask >> i & 1) {
                    e *= rad[i];
                    g *= 1.0 / h_of(rad[i]) - 1.0;
                }
            inner += g * T[static_cast<std::size_t>(e)];
        }
        const double md = static_cast<double>(m);
        total += H * inner / (md * md);
    }
    return alpha1 * total;
}

}  // namespace detail

inline PoleEulerProduct pole_euler_product(i64 P_max, i64 D_max) {
    if (P_max < 1000 || D_max < 1000) throw std::invalid_argument("pole_euler_product: caps must be >= 1000");
    if (D_max > 2000) throw std::out_of_range("pole_euler_product: D_max exceeds 2000");
    if (P_max > 100000000) throw std::out_of_range("pole_euler_product: P_max exceeds 1e8");
    const double z3 = zeta_constants().zeta3;

    PoleEulerProduct r{};
    r.target = 6.0 / (std::numbers::pi * std::numbers::pi);
    double prod = 1.0;
    for (i64 p : primes_up_to(P_max)) {
        const double pd = static_cast<double>(p);
        prod *= (1.0 - 1.0 / (pd * pd)) / (1.0 - 1.0 / (pd * pd * pd));
    }
    r.closed_form_truncated = prod / z3;
    // sum_{p > P} p^-k ~ int_P^inf dt / (t^k log t) = E_1((k - 1) log P)
    const double lp = std::log(static_cast<double>(P_max));
    const double log_tail = -exponential_integral_e1(lp) + exponential_integral_e1(2.0 * lp);
    r.closed_form = r.closed_form_truncated * std::exp(log_tail);
    r.closed_form_tail = std::abs(r.closed_form - r.closed_form_truncated);

    r.triple_sum = detail::pole_triple_sum(P_max, D_max);
    // every term is at most 1 / (m d1 d2)^2 and sum_{n > D} n^-2 < 1 / D
    const double z2 = zeta_constants().zeta2;
    r.triple_sum_budget = 3.0 * z2 * z2 / static_cast<double>(D_max) + 1.0 / static_cast<double>(P_max);
    return r;
}

}  // namespace rsd
