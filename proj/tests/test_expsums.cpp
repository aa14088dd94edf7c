#include <gtest/gtest.h>

#include <numbers>
#include <random>

#include "rsd/expsums.hpp"

using namespace rsd;

TEST(Ramanujan, Examples) {
    for (i64 q : {1, 6, 12, 30, 97}) EXPECT_EQ(*ramanujan(0, q).claimed_integer, euler_phi(q));
    EXPECT_EQ(*ramanujan(4, 6, RamanujanMode::brute).claimed_integer, -1);
    for (i64 q = 1; q <= 60; ++q) EXPECT_EQ(*ramanujan(1, q).claimed_integer, moebius(q));
}

TEST(Ramanujan, ThreeModesAgree) {
    for (i64 q = 1; q <= 120; ++q) {
        const auto fq = factor(q);
        for (i64 n = -5; n <= 50; ++n) {
            const i64 b = *ramanujan(n, fq, RamanujanMode::brute).claimed_integer;
            ASSERT_EQ(b, *ramanujan(n, fq, RamanujanMode::divisor).claimed_integer) << n << " " << q;
            ASSERT_EQ(b, *ramanujan(n, fq, RamanujanMode::von_sterneck).claimed_integer) << n << " " << q;
        }
    }
}

TEST(Gauss, PrincipalIsRamanujan) {
    for (i64 q = 1; q <= 40; ++q) {
        const auto chi0 = CharacterGroup::create(q)->principal();
        for (i64 n = 0; n <= 12; ++n) EXPECT_EQ(*gauss_sum(chi0, n).claimed_integer, ramanujan_int(n, q));
    }
}

TEST(Gauss, PrimeModulusMagnitudeAndZero) {
    for (const auto& chi : character_group(7)) {
        if (chi.is_principal()) continue;
        EXPECT_NEAR(std::abs(gauss_sum(chi, 1).value), std::sqrt(7.0), 1e-9);
        EXPECT_LT(std::abs(gauss_sum(chi, 0).value), 1e-12);
    }
}

TEST(Gauss, Bound) {
    for (i64 q = 1; q <= 80; ++q)
        for (const auto& chi : character_group(q))
            for (i64 n = 1; n <= 12; ++n)
                ASSERT_LE(std::abs(gauss_sum(chi, n).value), static_cast<double>(gcd(n, q)) * std::sqrt(static_cast<double>(q)) + 1e-6);
}

TEST(Kloosterman, Examples) {
    for (i64 q : {1, 5, 12, 49, 60}) EXPECT_NEAR(kloosterman(0, 0, q).real(), static_cast<double>(euler_phi(q)), 1e-9);
    EXPECT_NEAR(kloosterman(1, 1, 5).real(), 2 + 2 * std::cos(4 * std::numbers::pi / 5), 1e-12);
    EXPECT_NEAR(kloosterman(1, 1, 5).real(), 0.381966, 1e-6);
    EXPECT_THROW(kloosterman_brute(1, 1, 0), std::invalid_argument);
}

TEST(Kloosterman, CrtMatchesBruteAndIsRealSymmetric) {
    std::mt19937_64 rng(3);
    std::uniform_int_distribution<i64> md(-200, 200), qd(1, 600);
    for (int t = 0; t < 1000; ++t) {
        const i64 m = md(rng), n = md(rng), q = qd(rng);
        const auto direct = kloosterman_brute(m, n, q);
        const auto fast = kloosterman(m, n, q);
        ASSERT_TRUE(fast.matches(direct)) << m << " " << n << " " << q;
        ASSERT_LT(std::abs(direct.value.imag()), 1e-9);
        ASSERT_TRUE(kloosterman_brute(n, m, q).matches(direct));
    }
}

TEST(Kloosterman, WeilTypeBound) {
    for (i64 q = 1; q <= 300; q += 1)
        for (i64 m = 1; m <= 20; ++m)
            for (i64 n = 1; n <= 20; ++n) {
                const double bound = static_cast<double>(gcd(gcd(m, n), q)) *
                                     std::sqrt(static_cast<double>(q) / static_cast<double>(std::max(gcd(m, q), gcd(n, q)))) *
                                     static_cast<double>(divisor_count(q));
                ASSERT_LE(std::abs(kloosterman(m, n, q).real()), bound + 1e-9) << m << " " << n << " " << q;
            }
}

TEST(KloostermanSplit, Examples) {
    auto [l1, r1] = kloosterman_split(4, 3, 1, 7);
    EXPECT_NEAR(l1.real(), 1.0, 1e-15);
    EXPECT_NEAR(r1.real(), kloosterman_brute(4, 3, 7).real(), 1e-12);
    auto [l, r] = kloosterman_split(1, 2, 3, 5);
    EXPECT_NEAR(l.real() * r.real(), kloosterman_brute(1, 2, 15).real(), 1e-10);
    EXPECT_THROW(kloosterman_split(1, 2, 10, 5), std::invalid_argument);
}

TEST(KloostermanSplit, Grid) {
    for (i64 N : {5, 7, 11, 13})
        for (i64 b = 1; b <= 30; ++b) {
            if (gcd(b, N) != 1) continue;
            for (i64 m1 = 1; m1 <= 20; m1 += 3)
                for (i64 p = 1; p <= 20; p += 2) {
                    const auto [l, r] = kloosterman_split(m1 * m1, p, b, N);
                    const auto full = kloosterman_brute(m1 * m1, p, b * N);
                    ASSERT_TRUE(full.matches(l.value * r.value)) << m1 << " " << p << " " << b << " " << N;
                }
        }
}

TEST(CharDecomp, Examples) {
    EXPECT_NEAR(kloosterman_char_decomp(1, 1, 2, 1).real(), 1.0, 1e-12);
    EXPECT_TRUE(kloosterman_char_decomp(1, 1, 2, 9).matches(kloosterman_brute(1, 2, 9)));
    EXPECT_TRUE(kloosterman_char_decomp(2, 3, 5, 7).matches(kloosterman_brute(6, 10, 7)));
    EXPECT_THROW(kloosterman_char_decomp(1, 1, 3, 9), std::invalid_argument);
}

TEST(CharDecomp, SmallGrid) {
    for (i64 b = 1; b <= 30; ++b)
        for (i64 p : {2, 3, 5, 7, 11, 13})
            for (i64 n = 1; n <= 3; ++n) {
                if (gcd(p, b) != 1 || gcd(n, b) != 1) continue;
                for (i64 m = 0; m <= 4; ++m)
                    ASSERT_TRUE(kloosterman_char_decomp(n, m, p, b).matches(kloosterman_brute(n * m, n * p, b)))
                        << n << " " << m << " " << p << " " << b;
            }
}

TEST(KSum, PrincipalExamples) {
    const auto chi0 = CharacterGroup::create(7)->principal();
    EXPECT_EQ(*k_sum(1, 1, chi0).claimed_integer, 41);
    EXPECT_EQ(*k_sum(1, 2, chi0).claimed_integer, -8);
    EXPECT_EQ(k_sum_closed(1, 1, 7), 41);
    EXPECT_EQ(k_sum_closed(1, 2, 7), -8);
    EXPECT_EQ(k_sum_closed(3, 10, 7), 41);
    EXPECT_THROW(k_sum_closed(7, 1, 7), std::invalid_argument);
    EXPECT_THROW(k_sum(1, 1, CharacterGroup::create(9)->principal()), std::invalid_argument);
}

TEST(KSum, ClosedFormSmallPrimes) {
    for (i64 N : {2, 3, 5, 7, 11, 13, 17}) {
        const auto chi0 = CharacterGroup::create(N)->principal();
        for (i64 n1 = 1; n1 <= 4; ++n1)
            for (i64 n2 = 1; n2 <= 4; ++n2) {
                if (n1 % N == 0 || n2 % N == 0) continue;
                ASSERT_EQ(*k_sum(n1, n2, chi0).claimed_integer, k_sum_closed(n1, n2, N)) << n1 << " " << n2 << " " << N;
            }
    }
}

TEST(KSum, IntermediateIdentityEveryCharacter) {
    for (i64 N : {3, 5, 7, 11, 13}) {
        for (const auto& chi : character_group(N))
            for (auto [n1, n2] : std::vector<std::pair<i64, i64>>{{1, 1}, {1, 3}, {2, 2}, {2, 5}}) {
                if (n1 % N == 0 || n2 % N == 0) continue;
                const auto direct = k_sum(n1, n2, chi);
                const auto inter = k_sum_intermediate(n1, n2, chi);
                ASSERT_LT(std::abs(direct.value - inter.value), 1e-8) << N << " " << n1 << " " << n2;
            }
    }
}

TEST(Psi, Examples) {
    EXPECT_EQ(psi(1, 1, 5), 19);
    EXPECT_EQ(psi(1, 1, 5, PsiMode::brute), 19);
    EXPECT_EQ(psi(1, 2, 4), 0);
    EXPECT_EQ(psi(1, 2, 4, PsiMode::brute), 0);
    EXPECT_EQ(psi(1, 1, 6, PsiMode::brute), psi(1, 1, 2, PsiMode::brute) * psi(1, 1, 3, PsiMode::brute));
    EXPECT_EQ(psi(3, 8, 1), 1);
}

TEST(Psi, BruteEqualsClosed) {
    for (i64 r = 1; r <= 120; ++r) {
        const auto fr = factor(r);
        for (i64 n1 = 1; n1 <= 8; ++n1)
            for (i64 n2 = 1; n2 <= 8; ++n2)
                ASSERT_EQ(psi(n1, n2, fr, PsiMode::brute), psi(n1, n2, fr, PsiMode::closed)) << n1 << " " << n2 << " " << r;
    }
}

TEST(GaussInduction, Examples) {
    for (const auto& chi : character_group(5))
        for (i64 m1 = 1; m1 <= 4; ++m1)
            EXPECT_LT(std::abs(gauss_induction(chi, 5, m1).value - gauss_sum(chi, m1 * m1).value), 1e-10);
    for (const auto& chi : character_group(3))
        EXPECT_LT(std::abs(gauss_induction(chi, 6, 1).value - gauss_sum(induce(chi, 6), 1).value), 1e-10);
    for (const auto& chi : character_group(2)) {
        EXPECT_EQ(gauss_induction(chi, 8, 1).value, cplx(0, 0));
        EXPECT_LT(std::abs(gauss_sum(induce(chi, 8), 1).value), 1e-12);
    }
    EXPECT_THROW(gauss_induction(character_group(3)[0], 10, 1), std::invalid_argument);
}

TEST(GaussInduction, Grid) {
    for (i64 r = 1; r <= 12; ++r)
        for (i64 b1 = r; b1 <= 48; b1 += r) {
            const auto target = CharacterGroup::create(b1);
            for (const auto& chi : character_group(r))
                for (i64 m1 = 1; m1 <= 6; ++m1) {
                    const auto closed = gauss_induction(chi, b1, m1);
                    const auto direct = gauss_sum(induce(chi, target), m1 * m1);
                    ASSERT_TRUE(direct.matches(closed.value)) << r << " " << b1 << " " << m1;
                }
        }
}

TEST(CharProduct, Examples) {
    auto one = char_product_identity(3, 4, 1, 1, 1);
    EXPECT_EQ(*one.lhs.claimed_integer, 1);
    EXPECT_EQ(one.rhs, 1);
    auto five = char_product_identity(1, 1, 1, 1, 5);
    EXPECT_EQ(*five.lhs.claimed_integer, 76);
    EXPECT_EQ(five.rhs, 76);
    auto mixed = char_product_identity(1, 2, 2, 3, 5);
    EXPECT_EQ(*mixed.lhs.claimed_integer, mixed.rhs);
    EXPECT_THROW(char_product_identity(1, 1, 2, 4, 5), std::invalid_argument);
    EXPECT_THROW(char_product_identity(1, 1, 5, 1, 5), std::invalid_argument);
}

TEST(CharProduct, Grid) {
    for (i64 r = 1; r <= 12; ++r)
        for (i64 d1 = 1; d1 <= 3; ++d1)
            for (i64 d2 = 1; d2 <= 3; ++d2) {
                if (gcd(d1, d2) != 1 || gcd(r, d1 * d2) != 1) continue;
                for (i64 m1 = 1; m1 <= 4; ++m1)
                    for (i64 m2 = 1; m2 <= 4; ++m2) {
                        const auto s = char_product_identity(m1, m2, d1, d2, r);
                        ASSERT_EQ(*s.lhs.claimed_integer, s.rhs) << m1 << " " << m2 << " " << d1 << " " << d2 << " " << r;
                    }
            }
}

TEST(ExpSumValue, TolerancePolicy) {
    const ExpSumValue v{cplx(1.0, 0.0), std::nullopt, 1000};
    EXPECT_DOUBLE_EQ(v.tolerance(), 1e-7);
    EXPECT_TRUE(v.matches(cplx(1.0 + 5e-8, 0.0)));
    EXPECT_FALSE(v.matches(cplx(1.0 + 5e-7, 0.0)));
    EXPECT_THROW(integer_sum(cplx(2.5, 0.0), 10), std::logic_error);
}
