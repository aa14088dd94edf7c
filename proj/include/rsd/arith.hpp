#pragma once

/**
 * @file arith.hpp
 * @brief Exact 64-bit integer arithmetic.
 *
 * Factorization, the classical multiplicative functions, gcd variants,
 * modular inverses, primitive roots and a segmented prime sieve.  All
 * arithmetic is checked: an intermediate that does not fit in 64 bits
 * raises std::overflow_error instead of wrapping.
 */

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace rsd {

using i64 = std::int64_t;
using u64 = std::uint64_t;

/// Raised by mod_inverse when gcd(a, q) > 1.
class not_invertible : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// =============================================================================
// Checked arithmetic
// =============================================================================

inline i64 checked_mul(i64 a, i64 b) {
    i64 r;
    if (__builtin_mul_overflow(a, b, &r))
        throw std::overflow_error("64-bit multiplication overflow");
    return r;
}

inline i64 checked_add(i64 a, i64 b) {
    i64 r;
    if (__builtin_add_overflow(a, b, &r))
        throw std::overflow_error("64-bit addition overflow");
    return r;
}

inline i64 checked_sub(i64 a, i64 b) {
    i64 r;
    if (__builtin_sub_overflow(a, b, &r))
        throw std::overflow_error("64-bit subtraction overflow");
    return r;
}

inline i64 checked_pow(i64 base, int exp) {
    i64 r = 1;
    for (int i = 0; i < exp; ++i) r = checked_mul(r, base);
    return r;
}

/// Least non-negative residue of a modulo q (q >= 1).
constexpr i64 mod(i64 a, i64 q) {
    i64 r = a % q;
    return r < 0 ? r + q : r;
}

constexpr u64 mulmod(u64 a, u64 b, u64 m) {
    return static_cast<u64>(static_cast<unsigned __int128>(a) * b % m);
}

constexpr u64 powmod(u64 base, u64 exp, u64 m) {
    if (m == 1) return 0;
    u64 result = 1;
    base %= m;
    while (exp > 0) {
        if (exp & 1) result = mulmod(result, base, m);
        base = mulmod(base, base, m);
        exp >>= 1;
    }
    return result;
}

inline i64 gcd(i64 a, i64 b) { return std::gcd(a, b); }

inline i64 lcm(i64 a, i64 b) {
    if (a == 0 || b == 0) return 0;
    return checked_mul(a / gcd(a, b), b);
}

// =============================================================================
// Primality and factorization
// =============================================================================

namespace detail {

inline bool miller_rabin_witness(u64 n, u64 a, u64 d, int s) {
    u64 x = powmod(a, d, n);
    if (x == 1 || x == n - 1) return true;
    for (int i = 1; i < s; ++i) {
        x = mulmod(x, x, n);
        if (x == n - 1) return true;
    }
    return false;
}

inline u64 pollard_rho(u64 n) {
    if (n % 2 == 0) return 2;
    // Brent's cycle variant; deterministic sequence of constants.
    for (u64 c = 1;; ++c) {
        u64 x = 2, y = 2, d = 1, q = 1, ys = 0;
        u64 r = 1;
        const u64 m = 128;
        auto f = [&](u64 v) { return (mulmod(v, v, n) + c) % n; };
        do {
            x = y;
            for (u64 i = 0; i < r; ++i) y = f(y);
            u64 k = 0;
            do {
                ys = y;
                for (u64 i = 0; i < std::min(m, r - k); ++i) {
                    y = f(y);
                    q = mulmod(q, x > y ? x - y : y - x, n);
                }
                d = std::gcd(q, n);
                k += m;
            } while (k < r && d == 1);
            r *= 2;
        } while (d == 1);
        if (d == n) {
            do {
                ys = f(ys);
                d = std::gcd(x > ys ? x - ys : ys - x, n);
            } while (d == 1);
        }
        if (d != n) return d;
    }
}

}  // namespace detail

/// Deterministic Miller-Rabin, exact for every n < 2^64.
inline bool is_prime(u64 n) {
    if (n < 2) return false;
    for (u64 p : {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37}) {
        if (n % p == 0) return n == p;
    }
    u64 d = n - 1;
    int s = 0;
    while ((d & 1) == 0) {
        d >>= 1;
        ++s;
    }
    for (u64 a : {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37}) {
        if (!detail::miller_rabin_witness(n, a, d, s)) return false;
    }
    return true;
}

/// A positive integer together with its prime factorization.
class FactoredInteger {
public:
    struct PrimePower {
        i64 prime;
        int exponent;
        friend bool operator==(const PrimePower&, const PrimePower&) = default;
    };

    FactoredInteger() = default;

    /// Builds from a factor list; validates ordering and recomputes the value.
    explicit FactoredInteger(std::vector<PrimePower> factors) : factors_(std::move(factors)) {
        value_ = 1;
        i64 last = 1;
        for (const auto& pp : factors_) {
            if (pp.prime <= last || pp.exponent < 1 || !is_prime(static_cast<u64>(pp.prime)))
                throw std::invalid_argument("factor list must hold increasing primes with positive exponents");
            last = pp.prime;
            value_ = checked_mul(value_, checked_pow(pp.prime, pp.exponent));
        }
    }

    i64 value() const { return value_; }
    const std::vector<PrimePower>& factors() const { return factors_; }
    bool is_one() const { return factors_.empty(); }

    bool divisible_by_prime(i64 p) const {
        return std::any_of(factors_.begin(), factors_.end(),
                           [p](const PrimePower& pp) { return pp.prime == p; });
    }

    bool is_squarefree() const {
        return std::all_of(factors_.begin(), factors_.end(),
                           [](const PrimePower& pp) { return pp.exponent == 1; });
    }

    /// All positive divisors, ascending.
    std::vector<i64> divisors() const {
        std::vector<i64> divs{1};
        for (const auto& [p, e] : factors_) {
            const std::size_t n = divs.size();
            i64 pk = 1;
            for (int k = 1; k <= e; ++k) {
                pk *= p;
                for (std::size_t i = 0; i < n; ++i) divs.push_back(divs[i] * pk);
            }
        }
        std::sort(divs.begin(), divs.end());
        return divs;
    }

private:
    i64 value_ = 1;
    std::vector<PrimePower> factors_;
};

namespace detail {

inline void factor_into(u64 n, std::vector<u64>& out) {
    if (n == 1) return;
    if (is_prime(n)) {
        out.push_back(n);
        return;
    }
    u64 d = pollard_rho(n);
    factor_into(d, out);
    factor_into(n / d, out);
}

}  // namespace detail

/// Trial division to 10^6, then Pollard rho on the cofactor.
inline FactoredInteger factor(i64 n) {
    if (n <= 0) throw std::invalid_argument("factor: n must be positive");
    std::vector<FactoredInteger::PrimePower> fs;
    u64 m = static_cast<u64>(n);
    auto strip = [&](u64 p) {
        if (m % p != 0) return;
        int e = 0;
        while (m % p == 0) {
            m /= p;
            ++e;
        }
        fs.push_back({static_cast<i64>(p), e});
    };
    strip(2);
    strip(3);
    constexpr u64 trial_limit = 1000000;
    for (u64 p = 5; p <= trial_limit && p * p <= m; p += 6) {
        strip(p);
        strip(p + 2);
    }
    if (m > 1) {
        std::vector<u64> rest;
        detail::factor_into(m, rest);
        std::sort(rest.begin(), rest.end());
        for (std::size_t i = 0; i < rest.size();) {
            std::size_t j = i;
            while (j < rest.size() && rest[j] == rest[i]) ++j;
            fs.push_back({static_cast<i64>(rest[i]), static_cast<int>(j - i)});
            i = j;
        }
    }
    return FactoredInteger(std::move(fs));
}

// =============================================================================
// Multiplicative functions
// =============================================================================

struct MultiplicativeValues {
    i64 phi;
    int mu;
    i64 tau;
};

inline MultiplicativeValues multiplicative_functions(const FactoredInteger& n) {
    MultiplicativeValues v{1, 1, 1};
    for (const auto& [p, e] : n.factors()) {
        v.phi = checked_mul(v.phi, checked_mul(checked_pow(p, e - 1), p - 1));
        v.mu = (e > 1) ? 0 : -v.mu;
        v.tau *= (e + 1);
    }
    return v;
}

inline i64 euler_phi(const FactoredInteger& n) { return multiplicative_functions(n).phi; }
inline int moebius(const FactoredInteger& n) { return multiplicative_functions(n).mu; }
inline i64 divisor_count(const FactoredInteger& n) { return multiplicative_functions(n).tau; }

inline i64 euler_phi(i64 n) { return euler_phi(factor(n)); }
inline int moebius(i64 n) { return moebius(factor(n)); }
inline i64 divisor_count(i64 n) { return divisor_count(factor(n)); }

/// (x, y^inf): the largest divisor of x supported on the primes of y.
inline i64 inf_gcd(i64 x, i64 y) {
    if (x < 1 || y < 1) throw std::invalid_argument("inf_gcd: arguments must be positive");
    i64 result = 1;
    i64 g = gcd(x, y);
    while (g > 1) {
        result *= g;
        x /= g;
        g = gcd(x, g);
    }
    return result;
}

/// Inverse of a modulo q, normalized to [1, q] (so the inverse mod 1 is 1).
inline i64 mod_inverse(i64 a, i64 q) {
    if (q < 1) throw std::invalid_argument("mod_inverse: modulus must be positive");
    if (q == 1) return 1;
    i64 r0 = q, r1 = mod(a, q);
    i64 s0 = 0, s1 = 1;
    while (r1 != 0) {
        i64 t = r0 / r1;
        std::tie(r0, r1) = std::make_pair(r1, r0 - t * r1);
        std::tie(s0, s1) = std::make_pair(s1, s0 - t * s1);
    }
    if (r0 != 1)
        throw not_invertible("mod_inverse: " + std::to_string(a) + " is not a unit mod " + std::to_string(q));
    i64 inv = mod(s0, q);
    return inv == 0 ? q : inv;
}

// =============================================================================
// Prime sieve
// =============================================================================

/// All primes up to a limit, ascending.
class PrimeList {
public:
    static constexpr i64 max_limit = 1000000000;

    PrimeList() = default;
    PrimeList(i64 limit, std::vector<i64> primes) : limit_(limit), primes_(std::move(primes)) {}

    i64 limit() const { return limit_; }
    const std::vector<i64>& primes() const { return primes_; }
    std::size_t size() const { return primes_.size(); }
    auto begin() const { return primes_.begin(); }
    auto end() const { return primes_.end(); }

    /// Number of primes <= x for x <= limit.
    std::size_t count_up_to(i64 x) const {
        return static_cast<std::size_t>(std::upper_bound(primes_.begin(), primes_.end(), x) - primes_.begin());
    }

private:
    i64 limit_ = 1;
    std::vector<i64> primes_;
};

/// Segmented Eratosthenes with 2^20-entry blocks.
inline PrimeList primes_up_to(i64 x) {
    if (x < 1) throw std::invalid_argument("primes_up_to: limit must be positive");
    if (x > PrimeList::max_limit) throw std::out_of_range("primes_up_to: limit exceeds 10^9");
    std::vector<i64> primes;
    if (x < 2) return PrimeList(x, std::move(primes));

    const i64 root = static_cast<i64>(std::sqrt(static_cast<double>(x))) + 1;
    std::vector<char> small(static_cast<std::size_t>(root + 1), 1);
    std::vector<i64> base;
    for (i64 i = 2; i <= root; ++i) {
        if (!small[i]) continue;
        base.push_back(i);
        for (i64 j = i * i; j <= root; j += i) small[j] = 0;
    }

    const double est = x / std::max(1.0, std::log(static_cast<double>(x)) - 1.1);
    primes.reserve(static_cast<std::size_t>(est * 1.05) + 16);

    constexpr i64 block = i64{1} << 20;
    std::vector<char> seg(block);
    for (i64 lo = 2; lo <= x; lo += block) {
        const i64 hi = std::min(lo + block - 1, x);
        std::fill(seg.begin(), seg.begin() + (hi - lo + 1), 1);
        for (i64 p : base) {
            if (p * p > hi) break;
            i64 start = std::max(p * p, (lo + p - 1) / p * p);
            for (i64 j = start; j <= hi; j += p) seg[j - lo] = 0;
        }
        for (i64 i = lo; i <= hi; ++i)
            if (seg[i - lo]) primes.push_back(i);
    }
    return PrimeList(x, std::move(primes));
}

// =============================================================================
// Primitive roots
// =============================================================================

/// Multiplicative order of a modulo q, given phi(q) factored.
inline i64 multiplicative_order(i64 a, i64 q, const FactoredInteger& phi_q) {
    i64 order = phi_q.value();
    for (const auto& [p, e] : phi_q.factors()) {
        for (int i = 0; i < e; ++i) {
            if (powmod(static_cast<u64>(mod(a, q)), static_cast<u64>(order / p), static_cast<u64>(q)) == 1)
                order /= p;
            else
                break;
        }
    }
    return order;
}

/// Smallest generator of (Z/q)*; q must be 1, 2, 4, p^a or 2p^a with p odd.
inline i64 primitive_root(i64 q) {
    if (q < 1) throw std::invalid_argument("primitive_root: modulus must be positive");
    if (q <= 2) return 1;
    if (q == 4) return 3;
    const FactoredInteger fq = factor(q);
    const auto& fs = fq.factors();
    const bool cyclic = (fs.size() == 1 && fs[0].prime != 2) ||
                        (fs.size() == 2 && fs[0].prime == 2 && fs[0].exponent == 1);
    if (!cyclic) throw std::domain_error("primitive_root: (Z/" + std::to_string(q) + ")* is not cyclic");
    const i64 phi = euler_phi(fq);
    const FactoredInteger fphi = factor(phi);
    for (i64 g = 2; g < q; ++g) {
        if (gcd(g, q) != 1) continue;
        bool generator = true;
        for (const auto& pp : fphi.factors()) {
            if (powmod(static_cast<u64>(g), static_cast<u64>(phi / pp.prime), static_cast<u64>(q)) == 1) {
                generator = false;
                break;
            }
        }
        if (generator) return g;
    }
    throw std::logic_error("primitive_root: no generator found");
}

// =============================================================================
// Exact rationals
// =============================================================================

/// Reduced fraction with 64-bit checked numerator and positive denominator.
class Rational {
public:
    constexpr Rational() = default;
    Rational(i64 num, i64 den = 1) : num_(num), den_(den) {  // NOLINT(google-explicit-constructor)
        if (den == 0) throw std::domain_error("Rational: zero denominator");
        normalize();
    }

    i64 num() const { return num_; }
    i64 den() const { return den_; }
    double to_double() const { return static_cast<double>(num_) / static_cast<double>(den_); }

    friend Rational operator+(const Rational& a, const Rational& b) {
        const i64 g = gcd(a.den_, b.den_);
        return {checked_add(checked_mul(a.num_, b.den_ / g), checked_mul(b.num_, a.den_ / g)),
                checked_mul(a.den_ / g, b.den_)};
    }
    friend Rational operator-(const Rational& a) { return {checked_sub(0, a.num_), a.den_}; }
    friend Rational operator-(const Rational& a, const Rational& b) { return a + (-b); }
    friend Rational operator*(const Rational& a, const Rational& b) {
        const i64 g1 = gcd(a.num_, b.den_), g2 = gcd(b.num_, a.den_);
        return {checked_mul(a.num_ / (g1 ? g1 : 1), b.num_ / (g2 ? g2 : 1)),
                checked_mul(a.den_ / (g2 ? g2 : 1), b.den_ / (g1 ? g1 : 1))};
    }
    friend Rational operator/(const Rational& a, const Rational& b) {
        if (b.num_ == 0) throw std::domain_error("Rational: division by zero");
        return a * Rational(b.den_, b.num_);
    }
    friend bool operator==(const Rational& a, const Rational& b) { return a.num_ == b.num_ && a.den_ == b.den_; }
    friend bool operator<(const Rational& a, const Rational& b) {
        return static_cast<__int128>(a.num_) * b.den_ < static_cast<__int128>(b.num_) * a.den_;
    }

    std::string str() const { return den_ == 1 ? std::to_string(num_) : std::to_string(num_) + "/" + std::to_string(den_); }

private:
    void normalize() {
        if (den_ < 0) {
            num_ = checked_sub(0, num_);
            den_ = checked_sub(0, den_);
        }
        const i64 g = gcd(num_, den_);
        if (g > 1) {
            num_ /= g;
            den_ /= g;
        }
    }

    i64 num_ = 0;
    i64 den_ = 1;
};

}  // namespace rsd
