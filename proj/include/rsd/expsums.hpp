#pragma once

/**
 * @file expsums.hpp
 * @brief Gauss, Ramanujan and Kloosterman sums, and the character-sum
 *        identities that reduce products of Kloosterman sums to
 *        Ramanujan-sum correlations.
 *
 * Every sum carries its term count.  A sum of T unit-modulus terms is
 * trusted to 1e-10 * max(T, 1); when the result is known to be a rational
 * integer it is rounded and the residual must stay below 1e-6.
 *
 * The `*_brute` evaluators are direct definitions and serve as oracles.
 * They share nothing with the closed forms beyond unit_phase().
 */

#include <cmath>
#include <complex>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "arith.hpp"
#include "characters.hpp"

namespace rsd {

struct ExpSumValue {
    cplx value{};
    std::optional<i64> claimed_integer;
    i64 terms = 0;

    double tolerance() const { return 1e-10 * static_cast<double>(std::max<i64>(terms, 1)); }

    /// Agreement under the float policy.
    bool matches(const ExpSumValue& other) const {
        const double tol = std::max(tolerance(), other.tolerance());
        if (claimed_integer && other.claimed_integer) return *claimed_integer == *other.claimed_integer;
        return std::abs(value - other.value) < tol;
    }
    bool matches(cplx v) const { return std::abs(value - v) < tolerance(); }
    double real() const { return value.real(); }
};

/// Wraps a float sum that theory says is a rational integer.
inline ExpSumValue integer_sum(cplx value, i64 terms) {
    const double rounded = std::round(value.real());
    if (std::abs(value - cplx(rounded, 0.0)) > 1e-6)
        throw std::logic_error("integer-valued sum has residual " + std::to_string(std::abs(value - cplx(rounded, 0.0))));
    return {value, static_cast<i64>(rounded), terms};
}

inline ExpSumValue exact_integer(i64 v) { return {cplx(static_cast<double>(v), 0.0), v, 1}; }

// =============================================================================
// Ramanujan sums
// =============================================================================

enum class RamanujanMode { brute, divisor, von_sterneck };

/// R(n, q) = sum over units a mod q of e(a n / q).
inline ExpSumValue ramanujan(i64 n, const FactoredInteger& q, RamanujanMode mode = RamanujanMode::von_sterneck) {
    const i64 qv = q.value();
    switch (mode) {
    case RamanujanMode::brute: {
        cplx s{};
        const i64 nr = mod(n, qv);
        for (i64 a = 1; a <= qv; ++a)
            if (gcd(a, qv) == 1) s += unit_phase(static_cast<i64>(mulmod(static_cast<u64>(a), static_cast<u64>(nr), static_cast<u64>(qv))), qv);
        return integer_sum(s, qv);
    }
    case RamanujanMode::divisor: {
        const i64 g = gcd(mod(n, qv), qv) == 0 ? qv : gcd(mod(n, qv), qv);
        i64 s = 0;
        for (i64 d : q.divisors())
            if (g % d == 0) s = checked_add(s, checked_mul(moebius(qv / d), d));
        return exact_integer(s);
    }
    case RamanujanMode::von_sterneck: {
        const i64 g = gcd(mod(n, qv), qv) == 0 ? qv : gcd(mod(n, qv), qv);
        const FactoredInteger t = factor(qv / g);
        return exact_integer(moebius(t) * (euler_phi(q) / euler_phi(t)));
    }
    }
    throw std::invalid_argument("ramanujan: unknown mode");
}

inline ExpSumValue ramanujan(i64 n, i64 q, RamanujanMode mode = RamanujanMode::von_sterneck) {
    return ramanujan(n, factor(q), mode);
}

/// Integer value of R(n, q) via von Sterneck.
inline i64 ramanujan_int(i64 n, i64 q) { return *ramanujan(n, q).claimed_integer; }

// =============================================================================
// Gauss sums
// =============================================================================

/// G_chi(n) = sum over a mod q of chi(a) e(a n / q).
inline ExpSumValue gauss_sum(const DirichletCharacter& chi, i64 n) {
    const i64 q = chi.modulus();
    const i64 l = chi.group().exponent();
    const i64 den = lcm(l, q);
    const i64 nr = mod(n, q);
    cplx s{};
    for (i64 a = 1; a <= q; ++a) {
        const auto t = chi.phase(a);
        if (!t) continue;
        const i64 an = static_cast<i64>(mulmod(static_cast<u64>(a), static_cast<u64>(nr), static_cast<u64>(q)));
        s += unit_phase(mod(*t * (den / l) + an * (den / q), den), den);
    }
    ExpSumValue v{s, std::nullopt, q};
    if (chi.is_principal()) return integer_sum(s, q);
    return v;
}

// =============================================================================
// Kloosterman sums
// =============================================================================

/// Direct sum over units d mod q of e((m d + n dbar) / q).
inline ExpSumValue kloosterman_brute(i64 m, i64 n, i64 q) {
    if (q < 1) throw std::invalid_argument("kloosterman: modulus must be positive");
    if (q == 1) return integer_sum(cplx(1.0, 0.0), 1);
    const i64 mr = mod(m, q), nr = mod(n, q);
    cplx s{};
    i64 terms = 0;
    for (i64 d = 1; d < q; ++d) {
        if (gcd(d, q) != 1) continue;
        const i64 dbar = mod_inverse(d, q);
        const i64 t = mod(static_cast<i64>(mulmod(static_cast<u64>(mr), static_cast<u64>(d), static_cast<u64>(q))) +
                              static_cast<i64>(mulmod(static_cast<u64>(nr), static_cast<u64>(dbar), static_cast<u64>(q))),
                          q);
        s += unit_phase(t, q);
        ++terms;
    }
    return {s, std::nullopt, terms};
}

namespace detail {

/// S(m, n; p^e) directly, with inverses from Euler's theorem.
inline cplx kloosterman_prime_power(i64 m, i64 n, i64 p, i64 pe) {
    const u64 q = static_cast<u64>(pe);
    const u64 phi_minus_one = static_cast<u64>(pe / p * (p - 1) - 1);
    const u64 mr = static_cast<u64>(mod(m, pe)), nr = static_cast<u64>(mod(n, pe));
    cplx s{};
    for (u64 d = 1; d < q; ++d) {
        if (d % static_cast<u64>(p) == 0) continue;
        const u64 dbar = powmod(d, phi_minus_one, q);
        s += unit_phase(static_cast<i64>((mulmod(mr, d, q) + mulmod(nr, dbar, q)) % q), pe);
    }
    return s;
}

/// S(m, n; p) for prime p using a linear-time inverse table.
inline cplx kloosterman_prime(i64 m, i64 n, i64 p) {
    if (p >= (i64{1} << 31)) return kloosterman_prime_power(m, n, p, p);
    const i64 mr = mod(m, p), nr = mod(n, p);
    std::vector<i64> inv(static_cast<std::size_t>(p));
    if (p > 1) inv[1] = 1;
    for (i64 i = 2; i < p; ++i) inv[static_cast<std::size_t>(i)] = (p - (p / i) * inv[static_cast<std::size_t>(p % i)] % p) % p;
    cplx s{};
    for (i64 d = 1; d < p; ++d) s += unit_phase((mr * d + nr * inv[static_cast<std::size_t>(d)]) % p, p);
    return s;
}

}  // namespace detail

/// S(m, n; q), evaluated over the prime-power factors of q via the twisted
/// multiplicativity S(m,n;ab) = S(bbar m, bbar n; a) S(abar m, abar n; b).
inline ExpSumValue kloosterman(i64 m, i64 n, const FactoredInteger& q) {
    const i64 qv = q.value();
    cplx prod(1.0, 0.0);
    for (const auto& [p, e] : q.factors()) {
        const i64 pe = checked_pow(p, e);
        const i64 rbar = mod_inverse(qv / pe, pe);
        const i64 mm = static_cast<i64>(mulmod(static_cast<u64>(mod(m, pe)), static_cast<u64>(rbar), static_cast<u64>(pe)));
        const i64 nn = static_cast<i64>(mulmod(static_cast<u64>(mod(n, pe)), static_cast<u64>(rbar), static_cast<u64>(pe)));
        prod *= (e == 1) ? detail::kloosterman_prime(mm, nn, p) : detail::kloosterman_prime_power(mm, nn, p, pe);
    }
    return {prod, std::nullopt, euler_phi(q)};
}

inline ExpSumValue kloosterman(i64 m, i64 n, i64 q) { return kloosterman(m, n, factor(q)); }

/// The two factors of S(m1sq, p; bN) split along the coprime moduli b and N.
inline std::pair<ExpSumValue, ExpSumValue> kloosterman_split(i64 m1sq, i64 p, i64 b, i64 N) {
    if (gcd(b, N) != 1) throw std::invalid_argument("kloosterman_split: b and N must be coprime");
    const i64 nbar = mod_inverse(N, b);
    const i64 bbar = mod_inverse(b, N);
    auto left = kloosterman_brute(checked_mul(nbar, mod(m1sq, b)), checked_mul(nbar, mod(p, b)), b);
    auto right = kloosterman_brute(checked_mul(bbar, mod(m1sq, N)), checked_mul(bbar, mod(p, N)), N);
    return {left, right};
}

/// (1/phi(b)) sum over chi mod b of conj(chi)(p) G_chi(n^2 m) G_chi(1);
/// equals S(n m, n p; b) when (p, b) = (n, b) = 1.
inline ExpSumValue kloosterman_char_decomp(i64 n, i64 m, i64 p, i64 b) {
    if (gcd(p, b) != 1 || gcd(n, b) != 1)
        throw std::invalid_argument("kloosterman_char_decomp: requires (p, b) = (n, b) = 1");
    const auto group = CharacterGroup::create(b);
    const i64 n2m = checked_mul(checked_mul(mod(n, b), mod(n, b)), mod(m, b));
    cplx s{};
    i64 terms = 0;
    for (const auto& chi : group->characters()) {
        const auto g1 = gauss_sum(chi, n2m);
        const auto g2 = gauss_sum(chi, 1);
        s += std::conj(chi(p)) * g1.value * g2.value;
        terms += g1.terms * g2.terms;
    }
    const double phi = static_cast<double>(group->size());
    return {s / phi, std::nullopt, std::max<i64>(1, terms / group->size())};
}

// =============================================================================
// K(n1, n2, chi) for chi mod a prime N
// =============================================================================

namespace detail {

inline void require_k_sum_pre(i64 n1, i64 n2, i64 N) {
    if (!is_prime(static_cast<u64>(N))) throw std::invalid_argument("k_sum: modulus must be prime");
    if (mod(n1, N) == 0 || mod(n2, N) == 0) throw std::invalid_argument("k_sum: N must not divide n1 n2");
}

}  // namespace detail

/// Direct sum over units a mod N of chi(a) S(n1, a; N) S(n2, a; N).
inline ExpSumValue k_sum(i64 n1, i64 n2, const DirichletCharacter& chi) {
    const i64 N = chi.modulus();
    detail::require_k_sum_pre(n1, n2, N);
    cplx s{};
    for (i64 a = 1; a < N; ++a) {
        const cplx s1 = kloosterman_brute(n1, a, N).value;
        const cplx s2 = kloosterman_brute(n2, a, N).value;
        s += chi(a) * s1 * s2;
    }
    const i64 terms = (N - 1) * (N - 1) * (N - 1);
    if (chi.is_principal()) return integer_sum(s, terms);
    return {s, std::nullopt, terms};
}

/// phi(N)^2 + phi(N) - 1 when n1 = n2 mod N, else -phi(N) - 2.
inline i64 k_sum_closed(i64 n1, i64 n2, i64 N) {
    detail::require_k_sum_pre(n1, n2, N);
    const i64 phi = N - 1;
    return mod(n1 - n2, N) == 0 ? phi * phi + phi - 1 : -phi - 2;
}

/// G_chi(1)^2 sum over units u of conj(chi)(u + 1) conj(chi)(n1 ubar + n2) + delta_chi D(n1, n2).
inline ExpSumValue k_sum_intermediate(i64 n1, i64 n2, const DirichletCharacter& chi) {
    const i64 N = chi.modulus();
    detail::require_k_sum_pre(n1, n2, N);
    const cplx g1 = gauss_sum(chi, 1).value;
    cplx inner{};
    for (i64 u = 1; u < N; ++u) {
        const i64 ubar = mod_inverse(u, N);
        inner += std::conj(chi(u + 1)) * std::conj(chi(checked_add(checked_mul(mod(n1, N), ubar), n2)));
    }
    cplx s = g1 * g1 * inner;
    if (chi.is_principal()) {
        const i64 phi = N - 1;
        s += static_cast<double>(mod(n1 - n2, N) == 0 ? phi * phi : -2 * phi);
        return integer_sum(s, N * N);
    }
    return {s, std::nullopt, N * N};
}

// =============================================================================
// psi(n1, n2, r): correlation of shifted Ramanujan sums
// =============================================================================

enum class PsiMode { brute, closed };

namespace detail {

/// Prime-power value of psi.
inline i64 psi_prime_power(i64 n1, i64 n2, i64 p, int alpha) {
    const i64 pa = checked_pow(p, alpha);
    if (alpha == 1) return checked_sub(checked_mul(p, ramanujan_int(n1 - n2, p)), checked_mul(ramanujan_int(n1, p), ramanujan_int(n2, p)));
    if (mod(n1, p) == 0 || mod(n2, p) == 0) return 0;
    return checked_mul(pa, ramanujan_int(n1 - n2, pa));
}

}  // namespace detail

/// psi(n1, n2, r) = sum over units u mod r of R(u + n1, r) R(u + n2, r).
inline i64 psi(i64 n1, i64 n2, const FactoredInteger& r, PsiMode mode = PsiMode::closed) {
    const i64 rv = r.value();
    if (mode == PsiMode::brute) {
        // Ramanujan table by direct exponential sums, one per residue class;
        // grids sweep (n1, n2) at fixed r, so keep the last table.
        thread_local i64 cached_r = 0;
        thread_local std::vector<i64> table;
        if (cached_r != rv) {
            table.assign(static_cast<std::size_t>(rv), 0);
            for (i64 j = 0; j < rv; ++j) table[static_cast<std::size_t>(j)] = *ramanujan(j, r, RamanujanMode::brute).claimed_integer;
            cached_r = rv;
        }
        i64 s = 0;
        for (i64 u = 1; u <= rv; ++u) {
            if (gcd(u, rv) != 1) continue;
            s = checked_add(s, checked_mul(table[static_cast<std::size_t>(mod(u + n1, rv))], table[static_cast<std::size_t>(mod(u + n2, rv))]));
        }
        return s;
    }
    i64 prod = 1;
    for (const auto& [p, e] : r.factors()) prod = checked_mul(prod, detail::psi_prime_power(n1, n2, p, e));
    return prod;
}

inline i64 psi(i64 n1, i64 n2, i64 r, PsiMode mode = PsiMode::closed) { return psi(n1, n2, factor(r), mode); }

// =============================================================================
// Gauss sums of induced characters
// =============================================================================

/// Closed form for G_{chi_1}(m1^2), chi_1 the character mod b1 induced by chi mod r:
/// chi(b1/r1) R(m1^2, b1/r1) (r1/r) G_chi(m1^2 r / r1) if r1 | m1^2 r, else 0,
/// where r1 = (b1, r^inf).
inline ExpSumValue gauss_induction(const DirichletCharacter& chi, i64 b1, i64 m1) {
    const i64 r = chi.modulus();
    if (b1 % r != 0) throw std::invalid_argument("gauss_induction: r must divide b1");
    const i64 r1 = inf_gcd(b1, r);
    const i64 m1sq = checked_mul(m1, m1);
    if (checked_mul(mod(m1sq, r1), r) % r1 != 0) return {cplx{}, std::nullopt, 1};
    // only the class of m1^2 r / r1 mod r matters
    const i64 arg = mod(checked_mul(mod(m1sq, r1), r) / r1, r);
    const ExpSumValue g = gauss_sum(chi, arg);
    const cplx factor_value = chi(b1 / r1) * static_cast<double>(ramanujan_int(m1sq, b1 / r1)) * static_cast<double>(r1 / r);
    return {factor_value * g.value, std::nullopt, b1};
}

/// Both sides of
///   sum_{chi mod r} chi(d1^2 dbar2^2) G_chi(1) G_chi(m1^2) G_cbar(1) G_cbar(m2^2)
///     = phi(r) psi(m1^2 d2^2, m2^2 d1^2, r).
struct CharProductSides {
    ExpSumValue lhs;
    i64 rhs;
};

inline CharProductSides char_product_identity(i64 m1, i64 m2, i64 d1, i64 d2, i64 r) {
    if (gcd(d1, d2) != 1 || gcd(r, checked_mul(d1, d2)) != 1)
        throw std::invalid_argument("char_product_identity: requires (d1, d2) = (r, d1 d2) = 1");
    const auto group = CharacterGroup::create(r);
    const i64 d2bar = mod_inverse(d2, r);
    const i64 twist = mod(checked_mul(checked_mul(d1 % r, d1 % r) % r, checked_mul(d2bar, d2bar) % r), r);
    const i64 m1sq = checked_mul(m1, m1), m2sq = checked_mul(m2, m2);
    cplx s{};
    for (const auto& chi : group->characters()) {
        const auto cb = chi.conjugate();
        s += chi(twist) * gauss_sum(chi, 1).value * gauss_sum(chi, m1sq).value * gauss_sum(cb, 1).value * gauss_sum(cb, m2sq).value;
    }
    const i64 terms = checked_mul(group->size(), checked_mul(r, r));
    const i64 rhs = checked_mul(group->size(), psi(checked_mul(m1sq, checked_mul(d2, d2)), checked_mul(m2sq, checked_mul(d1, d1)), r));
    return {integer_sum(s, terms), rhs};
}

}  // namespace rsd
