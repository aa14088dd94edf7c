#pragma once

/**
 * @file petersson.hpp
 * @brief Truncated Petersson series
 *
 *   Delta_{k,N}(m, n) = delta(m, n) + 2 pi i^k sum_{b >= 1} S(m, n; bN) / (bN) J_{k-1}(4 pi sqrt(mn) / (bN))
 *
 * with a certified bound on the omitted terms b > b_max.  The certificate
 * combines
 *   |S(m, n; c)| <= (m, n, c) sqrt(c / (n, c)) tau(c) <= (m, n) sqrt(c) tau(b) tau(N),
 *   |J_{k-1}(x)| <= (x / 2)^{k-1} / Gamma(k),
 * and sum_{b > B} tau(b) b^-a <= a B^{1-a} [(log B + 1) / (a - 1) + 1 / (a - 1)^2],
 * which follows by partial summation from sum_{b <= x} tau(b) <= x (log x + 1).
 */

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <vector>

#include "arith.hpp"
#include "expsums.hpp"
#include "quadrature.hpp"
#include "special.hpp"

namespace rsd {

struct PeterssonQuery {
    int k = 4;
    i64 N = 1;
    i64 m = 1;
    i64 n = 1;
    i64 b_max = 10000;
};

struct PeterssonResult {
    cplx value{};
    double tail_bound = 0.0;  // certified bound on |sum over b > b_max|
    i64 terms = 0;
    /// k = 2 only, both uncertified: Aitken-accelerated value, and the
    /// fluctuation of the raw partial sums over the last half of the range.
    std::optional<double> accelerated;
    std::optional<double> empirical_error;
};

inline constexpr i64 petersson_min_b_max_weight2 = 64;

/// Certified bound on the omitted part of the b-sum.
inline double petersson_tail_bound(int k, i64 N, i64 m, i64 n, i64 b_max) {
    const double pi = std::numbers::pi;
    const double a = k - 0.5;
    const double B = static_cast<double>(b_max);
    const double dirichlet = a * std::pow(B, 1.0 - a) * ((std::log(B) + 1.0) / (a - 1.0) + 1.0 / ((a - 1.0) * (a - 1.0)));
    const double x_scale = 2.0 * pi * std::sqrt(static_cast<double>(m) * static_cast<double>(n)) / static_cast<double>(N);
    const double pref = 2.0 * pi * static_cast<double>(gcd(m, n)) * static_cast<double>(divisor_count(N)) /
                        std::sqrt(static_cast<double>(N)) *
                        std::exp((k - 1) * std::log(x_scale) - std::lgamma(static_cast<double>(k)));
    return pref * dirichlet;
}

/// The Kloosterman coefficients S(m, n; bN) / (bN) for b <= b_max; reusable across weights.
class PeterssonSeries {
public:
    PeterssonSeries(i64 N, i64 m, i64 n, i64 b_max) : N_(N), m_(m), n_(n) {
        if (N < 1 || m < 1 || n < 1) throw std::invalid_argument("petersson: N, m, n must be positive");
        if (b_max < 1) throw std::invalid_argument("petersson: b_max must be >= 1");
        if (static_cast<double>(m) * static_cast<double>(n) > 1e8) throw std::out_of_range("petersson: mn exceeds 1e8");
        coef_.reserve(static_cast<std::size_t>(b_max));
        for (i64 b = 1; b <= b_max; ++b) {
            const i64 c = checked_mul(b, N);
            coef_.push_back(kloosterman(m, n, c).value / static_cast<double>(c));
        }
    }

    i64 b_max() const { return static_cast<i64>(coef_.size()); }

    /// Partial sums of 2 pi i^k sum_{b <= B} for every B (without the diagonal term).
    std::vector<cplx> partial_sums(int k, i64 upto) const {
        const double pi = std::numbers::pi;
        const double ik = (k / 2) % 2 == 0 ? 1.0 : -1.0;
        const double root = 4.0 * pi * std::sqrt(static_cast<double>(m_) * static_cast<double>(n_));
        std::vector<cplx> out;
        out.reserve(static_cast<std::size_t>(upto));
        cplx acc{};
        for (i64 b = 1; b <= upto; ++b) {
            const double x = root / static_cast<double>(b * N_);
            acc += coef_[static_cast<std::size_t>(b - 1)] * bessel_j(k - 1, x);
            out.push_back(2.0 * pi * ik * acc);
        }
        return out;
    }

    PeterssonResult evaluate(int k, std::optional<i64> upto = std::nullopt) const {
        if (k < 2 || k % 2 != 0) throw std::invalid_argument("petersson: weight must be even and >= 2");
        const i64 B = upto.value_or(b_max());
        if (B < 1 || B > b_max()) throw std::out_of_range("petersson: truncation beyond precomputed range");
        if (k == 2 && B < petersson_min_b_max_weight2)
            throw std::domain_error("petersson: weight 2 with b_max < 64 has no usable tail estimate");
        const auto sums = partial_sums(k, B);
        PeterssonResult r;
        const double diag = m_ == n_ ? 1.0 : 0.0;
        r.value = diag + sums.back();
        r.terms = B;
        r.tail_bound = petersson_tail_bound(k, N_, m_, n_, B);
        if (k == 2) {
            // Aitken over the partial sums at b = B / 2^j, oldest first
            std::vector<double> checkpoints;
            for (i64 b = B; b >= 8 && checkpoints.size() < 9; b /= 2) checkpoints.push_back(diag + sums[static_cast<std::size_t>(b - 1)].real());
            std::reverse(checkpoints.begin(), checkpoints.end());
            r.accelerated = aitken_iterated(checkpoints).value;
            // Kloosterman signs are irregular, so the spread of the raw partial
            // sums over (B/2, B] is the more honest (still uncertified) error scale.
            double lo = INFINITY, hi = -INFINITY;
            for (i64 b = B / 2 + 1; b <= B; ++b) {
                lo = std::min(lo, sums[static_cast<std::size_t>(b - 1)].real());
                hi = std::max(hi, sums[static_cast<std::size_t>(b - 1)].real());
            }
            r.empirical_error = hi - lo;
        }
        return r;
    }

private:
    i64 N_, m_, n_;
    std::vector<cplx> coef_;
};

inline PeterssonResult delta_kn(const PeterssonQuery& q) {
    if (q.k < 2 || q.k % 2 != 0) throw std::invalid_argument("petersson: weight must be even and >= 2");
    if (q.k == 2 && q.b_max < petersson_min_b_max_weight2)
        throw std::domain_error("petersson: weight 2 with b_max < 64 has no usable tail estimate");
    return PeterssonSeries(q.N, q.m, q.n, q.b_max).evaluate(q.k);
}

/// |Delta(m, n) - Delta(n, m)| within the sum of both tail bounds plus rounding.
inline bool delta_symmetry_check(int k, i64 N, i64 m, i64 n, i64 b_max = 2000) {
    const auto a = delta_kn({k, N, m, n, b_max});
    const auto b = delta_kn({k, N, n, m, b_max});
    return std::abs(a.value - b.value) <= a.tail_bound + b.tail_bound + 1e-12 * static_cast<double>(a.terms);
}

}  // namespace rsd
