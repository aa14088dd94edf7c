#pragma once

/**
 * @file qstar.hpp
 * @brief Prime sums of Kloosterman products and their main terms.
 *
 *   A(x)  = sum_{p <= x} S(m1^2, p; b1 N) S(m2^2, p; b2 N) log p
 *   Q*    = sum_p S(m1^2, p; b1 N) S(m2^2, p; b2 N) J_{k1-1}(4 pi m1 sqrt p / (b1 N)) J_{k2-1}(4 pi m2 sqrt p / (b2 N))
 *             * 2 log p / (sqrt p log R) * phi^(log p / log R)
 *   I     = int_0^inf J_{k1-1}(4 pi m1 y / (b1 N)) J_{k2-1}(4 pi m2 y / (b2 N)) phi^(2 log y / log R) dy / log R
 *
 * with r = (b1, b2), b_i = d_i r, main terms
 *   A ~ c x,  Q* ~ 4 c I,  c = psi(m1^2 d2^2, m2^2 d1^2, N r) / phi(d1 d2 N r) R(m1^2, d1) R(m2^2, d2) mu(d1 d2) chi_0^{d1 d2}(r).
 */

#include <cmath>
#include <complex>
#include <map>
#include <mutex>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "arith.hpp"
#include "density.hpp"
#include "expsums.hpp"
#include "quadrature.hpp"
#include "special.hpp"

namespace rsd {

inline constexpr double qstar_prime_cap = 1e8;

// ---------------------------------------------------------------------------
// Shared prime table
// ---------------------------------------------------------------------------

struct PrimeTable {
    std::vector<i64> primes;
    std::vector<double> logs;
    i64 limit = 1;

    std::size_t count_up_to(i64 x) const {
        return static_cast<std::size_t>(std::upper_bound(primes.begin(), primes.end(), x) - primes.begin());
    }
};

/// Grows on demand; every prime sum reads the same sieve.
inline const PrimeTable& shared_primes(i64 x) {
    static PrimeTable table;
    static std::mutex guard;
    const std::lock_guard<std::mutex> lock(guard);
    if (x > table.limit) {
        const i64 target = std::max(x, std::min<i64>(2 * table.limit, static_cast<i64>(qstar_prime_cap)));
        auto list = primes_up_to(target);
        table.primes = list.primes();
        table.logs.resize(table.primes.size());
        for (std::size_t i = 0; i < table.primes.size(); ++i) table.logs[i] = std::log(static_cast<double>(table.primes[i]));
        table.limit = target;
    }
    return table;
}

/// S(a, t; c) for t = 0, ..., c - 1.
inline std::vector<double> kloosterman_row(i64 a, i64 c) {
    const auto fc = factor(c);
    std::vector<double> row(static_cast<std::size_t>(c));
    for (i64 t = 0; t < c; ++t) row[static_cast<std::size_t>(t)] = kloosterman(a, t, fc).value.real();
    return row;
}

// ---------------------------------------------------------------------------
// Parameters
// ---------------------------------------------------------------------------

struct QStarParams {
    i64 m1 = 1, m2 = 1;
    i64 b1 = 1, b2 = 1;
    i64 N = 5;
    int k1 = 4, k2 = 6;
    double sigma = 1.0;
    i64 R = 0;  // 0 selects the conductor of (k1, k2, N, N)
};

struct QStarShape {
    i64 r, d1, d2;
    i64 R;
    double log_R;
};

inline QStarShape qstar_shape(const QStarParams& p) {
    if (p.m1 < 1 || p.m2 < 1 || p.b1 < 1 || p.b2 < 1) throw std::invalid_argument("qstar: m and b must be positive");
    if (p.N < 2 || !is_prime(static_cast<u64>(p.N))) throw std::invalid_argument("qstar: N must be prime");
    for (i64 v : {p.b1, p.b2, p.m1, p.m2})
        if (v % p.N == 0) throw std::invalid_argument("qstar: m and b must be coprime to N");
    if (!(p.sigma > 0.0)) throw std::invalid_argument("qstar: sigma must be positive");
    const i64 R = p.R ? p.R : make_conductor_spec(p.k1, p.k2, p.N, p.N).R;
    if (R < 2) throw std::invalid_argument("qstar: conductor must exceed 1");
    const i64 r = gcd(p.b1, p.b2);
    return {r, p.b1 / r, p.b2 / r, R, std::log(static_cast<double>(R))};
}

/// Values of a prime sum with and without the primes dividing b1 b2 N.
struct PrimeSumValue {
    double value = 0.0;        // raw definition, every prime included
    double without_level = 0.0;
    double difference() const { return value - without_level; }
};

// ---------------------------------------------------------------------------
// Main-term coefficient
// ---------------------------------------------------------------------------

struct MainTermFactors {
    i64 psi;      // psi(m1^2 d2^2, m2^2 d1^2, N r)
    i64 phi;      // phi(d1 d2 N r)
    i64 ram1;     // R(m1^2, d1)
    i64 ram2;     // R(m2^2, d2)
    int mu;       // mu(d1 d2)
    int chi0;     // chi_0^{d1 d2}(r)
    Rational coefficient() const {
        if (mu == 0 || chi0 == 0 || ram1 == 0 || ram2 == 0) return Rational(0);
        return Rational(checked_mul(checked_mul(psi, ram1), checked_mul(ram2, mu * chi0)), phi);
    }
};

inline MainTermFactors main_term_factors(const QStarParams& p) {
    const auto s = qstar_shape(p);
    MainTermFactors f{};
    const i64 m1sq = checked_mul(p.m1, p.m1), m2sq = checked_mul(p.m2, p.m2);
    f.mu = moebius(checked_mul(s.d1, s.d2));
    f.chi0 = gcd(s.r, checked_mul(s.d1, s.d2)) == 1 ? 1 : 0;
    f.ram1 = ramanujan_int(m1sq, s.d1);
    f.ram2 = ramanujan_int(m2sq, s.d2);
    f.phi = euler_phi(checked_mul(checked_mul(s.d1, s.d2), checked_mul(p.N, s.r)));
    f.psi = psi(checked_mul(m1sq, checked_mul(s.d2, s.d2)), checked_mul(m2sq, checked_mul(s.d1, s.d1)), checked_mul(p.N, s.r));
    return f;
}

// ---------------------------------------------------------------------------
// A-sum
// ---------------------------------------------------------------------------

inline PrimeSumValue a_sum_brute(double x, const QStarParams& p) {
    if (x > qstar_prime_cap) throw std::out_of_range("a_sum_brute: x exceeds 1e8");
    qstar_shape(p);
    PrimeSumValue out;
    if (x < 2.0) return out;
    const i64 c1 = checked_mul(p.b1, p.N), c2 = checked_mul(p.b2, p.N);
    const auto row1 = kloosterman_row(checked_mul(p.m1, p.m1), c1);
    const auto row2 = kloosterman_row(checked_mul(p.m2, p.m2), c2);
    const i64 X = static_cast<i64>(std::floor(x));
    const auto& t = shared_primes(X);
    const i64 level = checked_mul(checked_mul(p.b1, p.b2), p.N);
    const std::size_t n = t.count_up_to(X);
    for (std::size_t i = 0; i < n; ++i) {
        const i64 q = t.primes[i];
        const double term = row1[static_cast<std::size_t>(q % c1)] * row2[static_cast<std::size_t>(q % c2)] * t.logs[i];
        out.value += term;
        if (level % q != 0) out.without_level += term;
    }
    return out;
}

inline double a_main_term(double x, const QStarParams& p) { return main_term_factors(p).coefficient().to_double() * x; }

struct AAgreementRow {
    double x;
    double brute;
    double main;
    double scaled_residual;  // |brute - main| / x
};

struct AAgreement {
    std::vector<AAgreementRow> rows;
    double fitted_exponent;  // least-squares slope of log(scaled_residual) against log x
    int sign_changes;
};

/// Least-squares slope of log y against log x.
inline double fit_log_slope(const std::vector<double>& xs, const std::vector<double>& ys) {
    if (xs.size() != ys.size() || xs.size() < 2) throw std::invalid_argument("fit_log_slope: need two or more points");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double lx = std::log(xs[i]), ly = std::log(std::max(ys[i], 1e-300));
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

/// One pass over the primes, sampled at each grid point.
inline AAgreement a_agreement(std::vector<double> x_grid, const QStarParams& p) {
    if (x_grid.empty()) throw std::invalid_argument("a_agreement: empty grid");
    std::sort(x_grid.begin(), x_grid.end());
    if (x_grid.back() > qstar_prime_cap) throw std::out_of_range("a_agreement: x exceeds 1e8");
    qstar_shape(p);
    const double slope = main_term_factors(p).coefficient().to_double();
    const i64 c1 = checked_mul(p.b1, p.N), c2 = checked_mul(p.b2, p.N);
    const auto row1 = kloosterman_row(checked_mul(p.m1, p.m1), c1);
    const auto row2 = kloosterman_row(checked_mul(p.m2, p.m2), c2);
    const auto& t = shared_primes(static_cast<i64>(x_grid.back()));
    AAgreement out{};
    double acc = 0.0;
    std::size_t i = 0;
    for (double x : x_grid) {
        for (; i < t.primes.size() && static_cast<double>(t.primes[i]) <= x; ++i) {
            const i64 q = t.primes[i];
            acc += row1[static_cast<std::size_t>(q % c1)] * row2[static_cast<std::size_t>(q % c2)] * t.logs[i];
        }
        out.rows.push_back({x, acc, slope * x, std::abs(acc - slope * x) / x});
    }
    std::vector<double> xs, ys;
    for (const auto& r : out.rows) {
        xs.push_back(r.x);
        ys.push_back(r.scaled_residual);
    }
    out.fitted_exponent = xs.size() >= 2 ? fit_log_slope(xs, ys) : 0.0;
    for (std::size_t j = 1; j < out.rows.size(); ++j)
        if ((out.rows[j].brute - out.rows[j].main) * (out.rows[j - 1].brute - out.rows[j - 1].main) < 0) ++out.sign_changes;
    return out;
}

// ---------------------------------------------------------------------------
// Bessel integral
// ---------------------------------------------------------------------------

/// I with explicit panel counts on [1, Y] (uniform) and [1/Y, 1] (geometric), Y = R^{sigma/2}.
inline double i_integral_panels(const QStarParams& p, int upper_panels, int lower_panels) {
    const auto s = qstar_shape(p);
    if (upper_panels < 1 || lower_panels < 1) throw std::invalid_argument("i_integral: panel counts must be positive");
    const double pi = std::numbers::pi;
    const double alpha = 4.0 * pi * static_cast<double>(p.m1) / static_cast<double>(p.b1 * p.N);
    const double beta = 4.0 * pi * static_cast<double>(p.m2) / static_cast<double>(p.b2 * p.N);
    const auto phi = TestFunction::fejer(p.sigma);
    const double L = s.log_R;
    const auto f = [&](double y) { return bessel_j(p.k1 - 1, alpha * y) * bessel_j(p.k2 - 1, beta * y) * phi.hat(2.0 * std::log(y) / L); };
    const double logY = p.sigma * L / 2.0;
    const double Y = std::exp(logY);
    double upper = gauss_legendre_composite(f, 1.0, Y, upper_panels);
    double lower = 0.0;
    for (int j = 0; j < lower_panels; ++j) {
        const double a = std::exp(-logY * (1.0 - static_cast<double>(j) / lower_panels));
        const double b = std::exp(-logY * (1.0 - static_cast<double>(j + 1) / lower_panels));
        lower += gauss_legendre_panel(f, a, b);
    }
    return (upper + lower) / L;
}

/// Default panelling: one oscillation period per upper panel, one panel per unit of log y below 1.
inline double i_integral(const QStarParams& p, int refine = 1) {
    const auto s = qstar_shape(p);
    const double pi = std::numbers::pi;
    const double freq = 4.0 * pi * (static_cast<double>(p.m1) / static_cast<double>(p.b1) + static_cast<double>(p.m2) / static_cast<double>(p.b2)) /
                        static_cast<double>(p.N);
    const double logY = p.sigma * s.log_R / 2.0;
    const int upper = refine * (4 + static_cast<int>(std::ceil(freq * (std::exp(logY) - 1.0) / (2.0 * pi))));
    const int lower = refine * (2 + static_cast<int>(std::ceil(logY)));
    return i_integral_panels(p, upper, lower);
}

// ---------------------------------------------------------------------------
// Q*
// ---------------------------------------------------------------------------

namespace detail {

struct QStarTerms {
    std::vector<double> a;       // S S log p per prime
    std::vector<double> g;       // Bessel-weight per prime
    std::vector<bool> at_level;  // p | b1 b2 N
};

inline QStarTerms qstar_terms(const QStarParams& p) {
    const auto s = qstar_shape(p);
    const double cap = std::exp(p.sigma * s.log_R);
    if (cap > qstar_prime_cap) throw std::out_of_range("q_star: R^sigma exceeds 1e8");
    QStarTerms out;
    const i64 X = static_cast<i64>(std::floor(cap));
    if (X < 2) return out;
    const double pi = std::numbers::pi;
    const i64 c1 = checked_mul(p.b1, p.N), c2 = checked_mul(p.b2, p.N);
    const auto row1 = kloosterman_row(checked_mul(p.m1, p.m1), c1);
    const auto row2 = kloosterman_row(checked_mul(p.m2, p.m2), c2);
    const double alpha = 4.0 * pi * static_cast<double>(p.m1) / static_cast<double>(c1);
    const double beta = 4.0 * pi * static_cast<double>(p.m2) / static_cast<double>(c2);
    const auto phi = TestFunction::fejer(p.sigma);
    const auto& t = shared_primes(X);
    const std::size_t n = t.count_up_to(X);
    const i64 level = checked_mul(checked_mul(p.b1, p.b2), p.N);
    out.a.resize(n);
    out.g.resize(n);
    out.at_level.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const i64 q = t.primes[i];
        const double lp = t.logs[i], rp = std::sqrt(static_cast<double>(q));
        out.a[i] = row1[static_cast<std::size_t>(q % c1)] * row2[static_cast<std::size_t>(q % c2)] * lp;
        out.g[i] = bessel_j(p.k1 - 1, alpha * rp) * bessel_j(p.k2 - 1, beta * rp) * 2.0 / (rp * s.log_R) * phi.hat(lp / s.log_R);
        out.at_level[i] = level % q == 0;
    }
    return out;
}

}  // namespace detail

inline PrimeSumValue q_star_brute(const QStarParams& p) {
    const auto t = detail::qstar_terms(p);
    PrimeSumValue out;
    for (std::size_t i = 0; i < t.a.size(); ++i) {
        const double term = t.a[i] * t.g[i];
        out.value += term;
        if (!t.at_level[i]) out.without_level += term;
    }
    return out;
}

/// Partial summation on the same primes: A_n g_n - sum_{i<n} A_i (g_{i+1} - g_i).
inline double q_star_abel(const QStarParams& p) {
    const auto t = detail::qstar_terms(p);
    if (t.a.empty()) return 0.0;
    std::vector<double> A(t.a.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < t.a.size(); ++i) A[i] = acc += t.a[i];
    double out = A.back() * t.g.back();
    for (std::size_t i = 0; i + 1 < t.a.size(); ++i) out -= A[i] * (t.g[i + 1] - t.g[i]);
    return out;
}

struct QStarMain {
    MainTermFactors factors;
    double integral;
    double value;  // 4 c I
};

inline QStarMain q_star_main(const QStarParams& p) {
    QStarMain out{main_term_factors(p), 0.0, 0.0};
    const double c = out.factors.coefficient().to_double();
    out.integral = c == 0.0 ? 0.0 : i_integral(p);
    out.value = 4.0 * c * out.integral;
    return out;
}

// ---------------------------------------------------------------------------
// Symplectic limit
// ---------------------------------------------------------------------------

struct QuadrupleCaps {
    i64 Y = 20;       // m <= Y, d1, d2 <= Y / m
    i64 r_max = 500;
};

struct SymplecticTarget {
    double target;              // int phi sin(2 pi x)/(2 pi x) dx - phi(0)/2
    double prefactor_ratio;     // N psi(1, 1, N) / phi(N)^3
    bool in_regime;             // sigma < 5/4 when k1 != k2
    double quadruple_sum;       // truncated assembled average
    double r_tail_budget;       // omitted r > r_max, from I << m^2 r^-2 N^{3 sigma - 2} with constant 1
    double asymptotic_scale;    // log log R / log R
    double budget() const { return r_tail_budget + asymptotic_scale; }
};

inline SymplecticTarget symplectic_limit_target(int k1, int k2, i64 N, const TestFunction& phi,
                                                std::optional<QuadrupleCaps> caps = QuadrupleCaps{}) {
    const auto spec = make_conductor_spec(k1, k2, N, N);
    if (N < 2) throw std::invalid_argument("symplectic_limit_target: N must be prime");
    SymplecticTarget out{};
    out.target = ks_main_term(phi).s_limit;
    const double phiN = static_cast<double>(euler_phi(N));
    const double psi11 = static_cast<double>(psi(1, 1, N));
    out.prefactor_ratio = static_cast<double>(N) * psi11 / (phiN * phiN * phiN);
    out.in_regime = k1 == k2 || phi.sigma() < 1.25;
    const double logR = std::log(static_cast<double>(spec.R));
    out.asymptotic_scale = std::log(logR) / logR;
    if (!caps) return out;

    const double pi = std::numbers::pi;
    const double ik = ((k1 + k2) / 2) % 2 == 0 ? 1.0 : -1.0;
    const double pref = 16.0 * pi * pi * ik * psi11 / (phiN * phiN * phiN);
    std::map<std::pair<i64, i64>, double> cache;  // I(m, r, N) depends on m / r only
    const auto I = [&](i64 m, i64 r) {
        const i64 g = gcd(m, r);
        const auto key = std::make_pair(m / g, r / g);
        if (auto it = cache.find(key); it != cache.end()) return it->second;
        const double v = i_integral({key.first, key.first, key.second, key.second, N, k1, k2, phi.sigma(), spec.R});
        cache.emplace(key, v);
        return v;
    };
    std::vector<double> psi_over(static_cast<std::size_t>(caps->r_max + 1));
    double total = 0.0, tail = 0.0;
    const double n_pow = std::pow(static_cast<double>(N), 3.0 * phi.sigma() - 2.0);
    const double r_tail = 2.0 * std::sqrt(2.0) / (3.0 * std::pow(static_cast<double>(caps->r_max), 1.5));  // sum_{r > r_max} sqrt 2 r^{-5/2}
    for (i64 m = 1; m <= caps->Y; ++m) {
        const i64 msq = m * m;
        for (i64 r = 1; r <= caps->r_max; ++r)
            psi_over[static_cast<std::size_t>(r)] = static_cast<double>(psi(msq, msq, r)) / (static_cast<double>(r) * r * static_cast<double>(euler_phi(r)));
        const i64 dmax = caps->Y / m;
        double msum = 0.0, mtail = 0.0;
        for (i64 d1 = 1; d1 <= dmax; ++d1)
            for (i64 d2 = 1; d2 <= dmax; ++d2) {
                const i64 d = d1 * d2;
                const int mu = moebius(d);
                if (!mu) continue;
                double rsum = 0.0;
                for (i64 r = 1; r <= caps->r_max; ++r)
                    if (gcd(r, d) == 1 && r % N != 0) rsum += psi_over[static_cast<std::size_t>(r)] * I(m, r);
                const double dd = static_cast<double>(d);
                msum += mu * rsum / (dd * dd);
                mtail += 1.0 / (dd * dd);
            }
        total += msum / static_cast<double>(msq);
        tail += mtail * static_cast<double>(msq) * n_pow * r_tail / static_cast<double>(msq);
    }
    out.quadruple_sum = pref * total;
    out.r_tail_budget = std::abs(pref) * tail;
    return out;
}

}  // namespace rsd
