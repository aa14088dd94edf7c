#include <gtest/gtest.h>

#include <cmath>

#include "rsd/qstar.hpp"

using namespace rsd;

namespace {

constexpr double pi = std::numbers::pi;

QStarParams trivial(i64 N) {
    QStarParams p;
    p.N = N;
    return p;
}

// Trial-division primes and brute Kloosterman sums, independent of the library sieve and tables.
double a_sum_oracle(i64 x, const QStarParams& p, bool with_level) {
    double s = 0.0;
    for (i64 q = 2; q <= x; ++q) {
        bool prime = true;
        for (i64 d = 2; d * d <= q; ++d)
            if (q % d == 0) prime = false;
        if (!prime) continue;
        if (!with_level && (p.b1 * p.b2 * p.N) % q == 0) continue;
        s += kloosterman_brute(p.m1 * p.m1, q, p.b1 * p.N).value.real() * kloosterman_brute(p.m2 * p.m2, q, p.b2 * p.N).value.real() *
             std::log(double(q));
    }
    return s;
}

}  // namespace

TEST(ASum, SmallValues) {
    EXPECT_EQ(a_sum_brute(1.0, trivial(5)).value, 0.0);
    const auto a = a_sum_brute(10.0, trivial(5));
    EXPECT_NEAR(a.value, a_sum_oracle(10, trivial(5), true), 1e-10);
    EXPECT_NEAR(a.without_level, a_sum_oracle(10, trivial(5), false), 1e-10);
    // the only level prime is p = 5, where S(1, 5; 5) = R(1, 5) = -1
    EXPECT_NEAR(a.difference(), std::log(5.0), 1e-12);
    QStarParams p;
    p.m1 = 2;
    p.m2 = 3;
    p.b1 = 2;
    p.b2 = 6;
    p.N = 7;
    EXPECT_NEAR(a_sum_brute(500.0, p).value, a_sum_oracle(500, p, true), 1e-8);
    EXPECT_NEAR(a_sum_brute(500.0, p).without_level, a_sum_oracle(500, p, false), 1e-8);
    EXPECT_THROW(a_sum_brute(2e8, p), std::out_of_range);
}

TEST(ASum, MainTermFactors) {
    // trivial parameters: psi(1, 1, N) / phi(N) = (phi^2 + phi - 1) / phi
    for (i64 N : {5, 13, 101}) {
        const i64 ph = N - 1;
        EXPECT_EQ(main_term_factors(trivial(N)).coefficient(), Rational(ph * ph + ph - 1, ph));
    }
    EXPECT_EQ(main_term_factors(trivial(5)).coefficient(), Rational(19, 4));
    QStarParams p = trivial(5);
    p.b1 = 2;
    p.b2 = 3;
    const auto f = main_term_factors(p);
    EXPECT_EQ(f.psi, psi(9, 4, 5));
    EXPECT_EQ(f.phi, euler_phi(30));
    EXPECT_EQ(f.ram1, ramanujan_int(1, 2));
    EXPECT_EQ(f.ram2, ramanujan_int(1, 3));
    EXPECT_EQ(f.mu, moebius(6));
    EXPECT_EQ(f.chi0, 1);
    EXPECT_EQ(f.coefficient(), Rational(psi(9, 4, 5) * ramanujan_int(1, 2) * ramanujan_int(1, 3), 8));
    // d1 d2 not squarefree
    p.b1 = 4;
    p.b2 = 1;
    EXPECT_EQ(main_term_factors(p).mu, 0);
    EXPECT_EQ(a_main_term(1000.0, p), 0.0);
    // invariants
    p.b1 = 5;
    EXPECT_THROW(main_term_factors(p), std::invalid_argument);
}

TEST(ASum, ResidueCaseRatio) {
    // m1^2 d2^2 = m2^2 d1^2 mod N versus not: the psi values differ by a factor about phi(N)
    for (i64 N : {13, 101}) {
        QStarParams same = trivial(N), other = trivial(N);
        other.m2 = 2;
        const double ratio = main_term_factors(same).coefficient().to_double() / main_term_factors(other).coefficient().to_double();
        EXPECT_NEAR(std::abs(ratio) / double(N - 1), 1.0, 3.0 / double(N - 1)) << N;
        EXPECT_LT(ratio, 0.0);
    }
}

TEST(ASum, AgreementDecay) {
    for (i64 N : {5, 13}) {
        const auto a = a_agreement({1e3, 1e4, 1e5, 1e6}, trivial(N));
        RecordProperty("fitted_exponent_N" + std::to_string(N), std::to_string(a.fitted_exponent));
        EXPECT_LE(a.fitted_exponent, -0.3) << N;
        // the residual stays on the square-root scale
        for (const auto& r : a.rows) EXPECT_LT(std::abs(r.brute - r.main), 20.0 * a_main_term(1.0, trivial(N)) * std::sqrt(r.x)) << r.x;
        EXPECT_NEAR(a.rows.back().brute, a_sum_brute(1e6, trivial(N)).value, 1e-6 * a.rows.back().brute);
    }
}

TEST(ASum, FitLogSlope) {
    EXPECT_NEAR(fit_log_slope({1, 10, 100}, {1, 0.1, 0.01}), -1.0, 1e-14);
    EXPECT_NEAR(fit_log_slope({2, 8}, {4, 64}), 2.0, 1e-14);
    EXPECT_THROW(fit_log_slope({1}, {1}), std::invalid_argument);
}

TEST(BesselIntegral, ConvergesUnderRefinement) {
    QStarParams p = trivial(13);
    p.sigma = 1.0;
    const double I = i_integral(p);
    EXPECT_NEAR(i_integral(p, 2), I, 1e-8 * std::abs(I));
    // order of convergence from the first refinement step that is still above rounding
    for (int n = 1; n <= 64; n *= 2) {
        const double a = i_integral_panels(p, n, n), b = i_integral_panels(p, 2 * n, 2 * n), c = i_integral_panels(p, 4 * n, 4 * n);
        const double d1 = std::abs(a - b), d2 = std::abs(b - c);
        if (d1 < 1e-12 * std::abs(I)) break;
        if (d2 > 1e-12 * std::abs(I)) continue;
        EXPECT_GE(std::log2(d1 / std::max(d2, 1e-16 * std::abs(I))), 4.0);
        break;
    }
    // k1 = k2 = 4 at N = 13, sigma = 1 is stable under doubling
    QStarParams q = trivial(13);
    q.k1 = q.k2 = 4;
    EXPECT_NEAR(i_integral(q, 2), i_integral(q), 1e-8 * std::abs(i_integral(q)));
}

TEST(BesselIntegral, ScalingInvariance) {
    QStarParams p = trivial(13), q = trivial(13);
    q.m1 = 2;
    q.b1 = 2;
    q.m2 = 3;
    q.b2 = 3;
    q.R = p.R = make_conductor_spec(4, 6, 13, 13).R;
    EXPECT_NEAR(i_integral(q), i_integral(p), 1e-13 * std::abs(i_integral(p)));
}

TEST(BesselIntegral, SmallSupport) {
    // as sigma -> 0 the support shrinks to y = 1 and I -> J(a) J(a) phi(0) / 2
    QStarParams p = trivial(13);
    const double L = std::log(double(make_conductor_spec(4, 6, 13, 13).R));
    const double a = 4 * pi / 13.0;
    for (double s : {1e-3, 1e-4}) {
        p.sigma = s;
        const double phi0 = TestFunction::fejer(s)(0.0);
        EXPECT_NEAR(i_integral(p) / (bessel_j(3, a) * bessel_j(5, a) * phi0), 0.5, 2.0 * s * L);
    }
}

TEST(QStar, EmptyAndAbel) {
    QStarParams p = trivial(13);
    p.sigma = 0.05;  // R^sigma < 2
    EXPECT_EQ(q_star_brute(p).value, 0.0);
    EXPECT_EQ(q_star_abel(p), 0.0);
    for (double s : {0.5, 1.0}) {
        p.sigma = s;
        const double brute = q_star_brute(p).value;
        EXPECT_NEAR(q_star_abel(p), brute, 1e-11 * std::max(1.0, std::abs(brute)));
    }
    QStarParams q = trivial(7);
    q.m1 = 2;
    q.b2 = 3;
    q.sigma = 0.8;
    EXPECT_NEAR(q_star_abel(q), q_star_brute(q).value, 1e-11 * std::max(1.0, std::abs(q_star_brute(q).value)));
}

TEST(QStar, RegressionPin) {
    QStarParams p = trivial(13);
    p.k1 = p.k2 = 4;
    p.sigma = 1.0;
    const auto b = q_star_brute(p);
    EXPECT_NEAR(b.value, 2.272671976765416, 1e-10);
    EXPECT_NEAR(b.without_level, 2.2546579210361855, 1e-10);
}

TEST(QStar, MainTermAssembly) {
    QStarParams p = trivial(13);
    p.sigma = 0.9;
    const auto m = q_star_main(p);
    EXPECT_EQ(m.factors.coefficient(), Rational(155, 12));
    EXPECT_NEAR(m.integral, i_integral(p), 0.0);
    EXPECT_NEAR(m.value, 4.0 * 155.0 / 12.0 * m.integral, 1e-15);
    // diagonal family point b1 = b2 = r
    QStarParams d = trivial(13);
    d.b1 = d.b2 = 6;
    const auto f = main_term_factors(d);
    EXPECT_EQ(f.psi, psi(1, 1, 78));
    EXPECT_EQ(f.phi, euler_phi(78));
    EXPECT_EQ(f.mu, 1);
    EXPECT_EQ(f.ram1, 1);
    d.b1 = 4;
    d.b2 = 1;
    EXPECT_EQ(q_star_main(d).value, 0.0);
}

TEST(QStar, ResidualShrinksWithLevel) {
    double prev = INFINITY;
    for (i64 N : {13, 101, 1009}) {
        QStarParams p = trivial(N);
        p.sigma = 0.9;
        const double brute = q_star_brute(p).value, main = q_star_main(p).value;
        const double rel = std::abs(brute - main) / std::abs(main);
        RecordProperty("relative_residual_N" + std::to_string(N), std::to_string(rel));
        EXPECT_LT(rel, prev) << N;
        prev = rel;
    }
}

TEST(Symplectic, Target) {
    const auto half = symplectic_limit_target(4, 6, 101, TestFunction::fejer(0.5), std::nullopt);
    const auto phi = TestFunction::fejer(0.5);
    EXPECT_EQ(half.target, ks_main_term(phi).s_limit);
    EXPECT_NEAR(symplectic_limit_target(4, 6, 10007, phi, std::nullopt).prefactor_ratio, 1.0, 1e-3);
    EXPECT_TRUE(symplectic_limit_target(4, 6, 101, TestFunction::fejer(1.2), std::nullopt).in_regime);
    EXPECT_FALSE(symplectic_limit_target(4, 6, 101, TestFunction::fejer(1.3), std::nullopt).in_regime);
    EXPECT_TRUE(symplectic_limit_target(4, 4, 101, TestFunction::fejer(1.3), std::nullopt).in_regime);
}

TEST(Symplectic, QuadrupleSumWithinBudget) {
    const auto s = symplectic_limit_target(4, 6, 1009, TestFunction::fejer(0.9));
    RecordProperty("quadruple_sum", std::to_string(s.quadruple_sum));
    RecordProperty("budget", std::to_string(s.budget()));
    EXPECT_LT(std::abs(s.quadruple_sum - s.target), s.budget());
    // both weight parities assemble to finite values
    const auto odd = symplectic_limit_target(4, 6, 101, TestFunction::fejer(0.5), QuadrupleCaps{4, 50});
    const auto even = symplectic_limit_target(4, 8, 101, TestFunction::fejer(0.5), QuadrupleCaps{4, 50});
    EXPECT_TRUE(std::isfinite(odd.quadruple_sum) && std::isfinite(even.quadruple_sum));
}
