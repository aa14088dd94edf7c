#pragma once

/**
 * @file quadrature.hpp
 * @brief Fixed-order Gauss-Legendre panels and Aitken's delta-squared process.
 */

#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace rsd {

template <std::size_t N>
struct GaussLegendreRule {
    std::array<double, N> nodes{};
    std::array<double, N> weights{};
};

/// Nodes and weights on [-1, 1] via Newton iteration on P_N.
template <std::size_t N>
GaussLegendreRule<N> make_gauss_legendre() {
    GaussLegendreRule<N> rule;
    const std::size_t half = (N + 1) / 2;
    for (std::size_t i = 0; i < half; ++i) {
        double x = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) / (static_cast<double>(N) + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = x;
            for (std::size_t k = 2; k <= N; ++k) {
                const double p2 = ((2.0 * static_cast<double>(k) - 1.0) * x * p1 - (static_cast<double>(k) - 1.0) * p0) / static_cast<double>(k);
                p0 = p1;
                p1 = p2;
            }
            dp = static_cast<double>(N) * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        {
            double p0 = 1.0, p1 = x;
            for (std::size_t k = 2; k <= N; ++k) {
                const double p2 = ((2.0 * static_cast<double>(k) - 1.0) * x * p1 - (static_cast<double>(k) - 1.0) * p0) / static_cast<double>(k);
                p0 = p1;
                p1 = p2;
            }
            dp = static_cast<double>(N) * (x * p1 - p0) / (x * x - 1.0);
        }
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.nodes[i] = -x;
        rule.weights[i] = w;
        rule.nodes[N - 1 - i] = x;
        rule.weights[N - 1 - i] = w;
    }
    return rule;
}

inline const GaussLegendreRule<32>& gauss_legendre_32() {
    static const GaussLegendreRule<32> rule = make_gauss_legendre<32>();
    return rule;
}

/// 32-point Gauss-Legendre on [a, b]; F may return double or complex.
template <class F>
auto gauss_legendre_panel(F&& f, double a, double b) {
    const auto& rule = gauss_legendre_32();
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    decltype(f(c)) acc{};
    for (std::size_t i = 0; i < 32; ++i) acc += rule.weights[i] * f(c + h * rule.nodes[i]);
    return acc * h;
}

/// Sum of `panels` equal Gauss-Legendre panels over [a, b].
template <class F>
auto gauss_legendre_composite(F&& f, double a, double b, int panels) {
    if (panels < 1) throw std::invalid_argument("gauss_legendre_composite: need at least one panel");
    const double h = (b - a) / panels;
    decltype(f(a)) acc{};
    for (int i = 0; i < panels; ++i) acc += gauss_legendre_panel(f, a + h * i, i + 1 == panels ? b : a + h * (i + 1));
    return acc;
}

/// One pass of Aitken's delta-squared over a sequence of partial sums.
inline std::vector<double> aitken_pass(const std::vector<double>& s) {
    std::vector<double> out;
    for (std::size_t i = 0; i + 2 < s.size(); ++i) {
        const double d1 = s[i + 1] - s[i], d2 = s[i + 2] - s[i + 1];
        const double den = d2 - d1;
        out.push_back(std::abs(den) < 1e-300 ? s[i + 2] : s[i + 2] - d2 * d2 / den);
    }
    return out;
}

struct AitkenResult {
    double value;
    double error_estimate;  // spread of the last two iterated estimates (uncertified)
};

/// Iterated Aitken on partial sums; stops when fewer than three terms remain.
inline AitkenResult aitken_iterated(std::vector<double> s) {
    if (s.empty()) throw std::invalid_argument("aitken_iterated: empty sequence");
    double prev = s.back();
    double err = s.size() > 1 ? std::abs(s.back() - s[s.size() - 2]) : INFINITY;
    while (s.size() >= 3) {
        auto next = aitken_pass(s);
        err = std::abs(next.back() - prev);
        prev = next.back();
        s = std::move(next);
    }
    return {prev, err};
}

}  // namespace rsd
