// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.
#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>

#include "rsd/ingest.hpp"
#include "rsd/petersson.hpp"
#include "rsd/qstar.hpp"
#include "synthetic.hpp"

using namespace rsd;

namespace {

namespace fs = std::filesystem;

// Collects failures and a short summary of measured quantities.
struct Check {
    std::vector<std::string> failures;
    std::ostringstream notes;

    void require(bool ok, const std::string& what) {
        if (!ok && failures.size() < 5) failures.push_back(what);
        if (!ok) ++failed;
    }
    int failed = 0;
};

std::string str(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

std::string key(std::initializer_list<i64> xs) {
    std::string s;
    for (i64 x : xs) s += (s.empty() ? "" : ",") + std::to_string(x);
    return "(" + s + ")";
}

i64 phi_count(i64 n) {
    i64 c = 0;
    for (i64 a = 1; a <= n; ++a) c += std::gcd(a, n) == 1;
    return c;
}

int mu_trial(i64 n) {
    int s = 1;
    for (i64 d = 2; d * d <= n; ++d)
        if (n % d == 0) {
            n /= d;
            if (n % d == 0) return 0;
            s = -s;
        }
    return n > 1 ? -s : s;
}

// ---------------------------------------------------------------------------

void identity_suite(Check& c) {
    // Ramanujan sums in three modes
    for (i64 q = 1; q <= 200; ++q) {
        const auto fq = factor(q);
        for (i64 n = -10; n <= 100; ++n) {
            const i64 b = *ramanujan(n, fq, RamanujanMode::brute).claimed_integer;
            c.require(b == *ramanujan(n, fq, RamanujanMode::divisor).claimed_integer &&
                          b == *ramanujan(n, fq, RamanujanMode::von_sterneck).claimed_integer,
                      "ramanujan " + key({n, q}));
        }
    }
    // character decomposition of S(nm, np; b)
    i64 decomp = 0;
    for (i64 b = 1; b <= 60; ++b)
        for (i64 p = 1; p <= 30; ++p) {
            if (gcd(p, b) != 1) continue;
            for (i64 n = 1; n <= 3; ++n) {
                if (gcd(n, b) != 1) continue;
                for (i64 m = 0; m <= 4; ++m, ++decomp)
                    c.require(kloosterman_char_decomp(n, m, p, b).matches(kloosterman_brute(n * m, n * p, b)), "decomp " + key({n, m, p, b}));
            }
        }
    // principal K-sum closed form over prime levels
    const auto chi7 = CharacterGroup::create(7)->principal();
    c.require(*k_sum(1, 1, chi7).claimed_integer == 41 && *k_sum(1, 2, chi7).claimed_integer == -8, "K(1,1) = 41, K(1,2) = -8 mod 7");
    for (i64 N = 2; N <= 101; ++N) {
        if (!is_prime(static_cast<u64>(N))) continue;
        const auto chi0 = CharacterGroup::create(N)->principal();
        for (i64 n1 = 1; n1 <= 4; ++n1)
            for (i64 n2 = 1; n2 <= 4; ++n2) {
                if (n1 % N == 0 || n2 % N == 0) continue;
                c.require(*k_sum(n1, n2, chi0).claimed_integer == k_sum_closed(n1, n2, N), "k_sum_closed " + key({n1, n2, N}));
            }
    }
    // intermediate identity, every character
    for (i64 N = 2; N <= 50; ++N) {
        if (!is_prime(static_cast<u64>(N))) continue;
        for (const auto& chi : character_group(N))
            for (auto [n1, n2] : std::vector<std::pair<i64, i64>>{{1, 1}, {1, 2}, {2, 3}, {3, 5}}) {
                if (n1 % N == 0 || n2 % N == 0) continue;
                const auto direct = k_sum(n1, n2, chi), inter = k_sum_intermediate(n1, n2, chi);
                c.require(std::abs(direct.value - inter.value) < std::max(direct.tolerance(), inter.tolerance()), "k_sum_intermediate " + key({n1, n2, N}));
            }
    }
    // Gauss sums of induced characters
    for (i64 r = 1; r <= 20; ++r)
        for (i64 b1 = r; b1 <= 60; b1 += r) {
            const auto target = CharacterGroup::create(b1);
            for (const auto& chi : character_group(r))
                for (i64 m1 = 1; m1 <= 10; ++m1)
                    c.require(gauss_sum(induce(chi, target), m1 * m1).matches(gauss_induction(chi, b1, m1).value), "induction " + key({r, b1, m1}));
        }
    // psi: brute against closed, then multiplicativity of the brute form
    for (i64 r = 1; r <= 400; ++r) {
        const auto fr = factor(r);
        for (i64 n1 = 1; n1 <= 20; ++n1)
            for (i64 n2 = 1; n2 <= 20; ++n2)
                c.require(psi(n1, n2, fr, PsiMode::brute) == psi(n1, n2, fr, PsiMode::closed), "psi " + key({n1, n2, r}));
    }
    std::mt19937_64 rng(61);
    std::uniform_int_distribution<i64> small(1, 40), shift(1, 30);
    for (int made = 0; made < 1000;) {
        const i64 a = small(rng), b = small(rng);
        if (gcd(a, b) != 1) continue;
        const i64 n1 = shift(rng), n2 = shift(rng);
        c.require(psi(n1, n2, a * b, PsiMode::brute) == psi(n1, n2, a, PsiMode::brute) * psi(n1, n2, b, PsiMode::brute),
                  "psi multiplicative " + key({n1, n2, a, b}));
        ++made;
    }
    // character-product identity
    for (i64 r = 1; r <= 20; ++r)
        for (i64 d1 = 1; d1 <= 4; ++d1)
            for (i64 d2 = 1; d2 <= 4; ++d2) {
                if (gcd(d1, d2) != 1 || gcd(r, d1 * d2) != 1) continue;
                for (i64 m1 = 1; m1 <= 6; ++m1)
                    for (i64 m2 = 1; m2 <= 6; ++m2) {
                        const auto s = char_product_identity(m1, m2, d1, d2, r);
                        c.require(*s.lhs.claimed_integer == s.rhs, "char_product " + key({m1, m2, d1, d2, r}));
                    }
            }
    c.notes << decomp << " decompositions";
}

void kloosterman_split_suite(Check& c) {
    std::mt19937_64 rng(500);
    std::uniform_int_distribution<i64> md(1, 50), pd(1, 1000), bd(1, 60);
    const i64 levels[] = {5, 7, 11, 13, 17, 19, 23, 101};
    int made = 0;
    while (made < 500) {
        const i64 m1 = md(rng), p = pd(rng), b = bd(rng), N = levels[rng() % std::size(levels)];
        if (gcd(b, N) != 1) continue;
        const auto [l, r] = kloosterman_split(m1 * m1, p, b, N);
        c.require(kloosterman_brute(m1 * m1, p, b * N).matches(l.value * r.value), "split " + key({m1, p, b, N}));
        ++made;
    }
    c.notes << made << " tuples";
}

void petersson_suite(Check& c) {
    double worst = 0.0;
    for (i64 m = 1; m <= 5; ++m)
        for (i64 n = 1; n <= 5; ++n) {
            PeterssonSeries series(1, m, n, 10000);
            for (int k : {4, 6, 8, 10}) {
                const auto r = series.evaluate(k);
                worst = std::max(worst, std::abs(r.value) - r.tail_bound);
                c.require(std::abs(r.value) <= r.tail_bound + 1e-8, "Delta_" + std::to_string(k) + key({m, n}));
            }
        }
    const auto d12 = delta_kn({12, 1, 1, 1, 10000});
    c.require(d12.value.real() - d12.tail_bound > 0.0, "Delta_12(1,1) not beyond its tail");
    c.notes << "max |Delta| - tail " << str(worst) << ", Delta_12(1,1) " << str(d12.value.real());
}

void mellin_suite(Check& c) {
    double worst = 0.0;
    int points = 0;
    for (auto [nu, mu] : std::vector<std::pair<int, int>>{{3, 3}, {5, 3}, {3, 1}}) {
        const double top = std::min(nu + mu + 1.0, 4.0);
        for (int i = 0; i < 5; ++i)
            for (int j = 0; j < 5; ++j) {
                const MellinParams p{nu, mu, cplx(0.6 + (top - 0.9) * i / 4.0, -6.0 + 3.0 * j)};
                const cplx exact = h_closed(p);
                const double rel = std::abs(h_quadrature(p, 200.0) - exact) / std::abs(exact);
                worst = std::max(worst, rel);
                c.require(rel <= 1e-6, "H" + key({nu, mu}) + " at " + str(p.s.real()) + "+" + str(p.s.imag()) + "i");
                ++points;
            }
    }
    c.notes << points << " points, max rel " << str(worst);
}

void density_suite(Check& c) {
    const std::pair<Rational, Rational> exact[] = {
        {Rational(5, 4), Rational(21, 25)}, {Rational(29, 28), Rational(645, 841)}, {Rational(1), Rational(3, 4)}, {Rational(1, 2), Rational(1, 4)}};
    const double decimal[] = {0.84, 0.7669, 0.75, 0.25};
    for (std::size_t i = 0; i < std::size(exact); ++i) {
        const auto v = nonvanishing_bound(exact[i].first);
        c.require(v == exact[i].second, "nonvanishing_bound(" + exact[i].first.str() + ") = " + v.str());
        c.require(std::abs(v.to_double() - decimal[i]) < 5e-5, "decimal value " + str(decimal[i]));
    }
    const double below = ks_main_term(TestFunction::fejer(1.0 - 1e-12)).value, at = ks_main_term(TestFunction::fejer(1.0)).value,
                 above = ks_main_term(TestFunction::fejer(1.0 + 1e-12)).value;
    c.require(std::abs(below - at) < 1e-11 && std::abs(above - at) < 1e-11, "ks_main_term jumps at sigma = 1");
    double worst = 0.0;
    for (double s : {0.5, 0.8, 1.0, 1.2, 1.6}) {
        const auto phi = TestFunction::fejer(s);
        const double err = std::abs(density_quadrature(phi) - ks_main_term(phi).value);
        worst = std::max(worst, err);
        c.require(err <= 1e-8, "density quadrature at sigma " + str(s));
    }
    c.notes << "max quadrature error " << str(worst);
}

void pole_suite(Check& c) {
    const auto e = pole_euler_product(100000, 1000);
    const double closed = std::abs(e.closed_form - e.target), triple = std::abs(e.triple_sum - e.target);
    c.require(closed <= 1e-7, "closed form off by " + str(closed));
    c.require(triple <= e.triple_sum_budget, "triple sum off by " + str(triple));
    for (i64 p : {2, 3, 5, 101}) {
        const auto id = pole_factor_identity(p, pole_factor_f(p));
        c.require(id.lhs == id.rhs, "per-prime identity at " + std::to_string(p));
    }
    c.notes << "closed form err " << str(closed) << " (truncated " << str(std::abs(e.closed_form_truncated - e.target)) << "), triple err "
            << str(triple) << " <= " << str(e.triple_sum_budget);
}

void a_sum_suite(Check& c) {
    for (i64 N : {5, 13}) {
        QStarParams p;
        p.N = N;
        const auto a = a_agreement({1e3, 1e4, 1e5, 1e6}, p);
        c.require(a.fitted_exponent <= -0.3, "exponent at N = " + std::to_string(N) + " is " + str(a.fitted_exponent));
        c.notes << "N=" << N << " exponent " << str(a.fitted_exponent) << " ";
    }
}

void qstar_suite(Check& c) {
    std::vector<QStarParams> cases;
    for (i64 N : {5, 7, 13}) {
        for (auto [m1, m2, b1, b2] : std::vector<std::array<i64, 4>>{{1, 1, 1, 1}, {2, 1, 1, 3}, {1, 3, 2, 6}, {1, 1, 4, 1}}) {
            QStarParams p;
            p.N = N;
            p.m1 = m1;
            p.m2 = m2;
            p.b1 = b1;
            p.b2 = b2;
            p.sigma = 0.9;
            cases.push_back(p);
        }
    }
    for (const auto& p : cases) {
        const double brute = q_star_brute(p).value, abel = q_star_abel(p);
        c.require(std::abs(brute - abel) <= 1e-11 * std::max(1.0, std::abs(brute)), "abel " + key({p.m1, p.m2, p.b1, p.b2, p.N}));
        // each factor against a trial-division or brute oracle
        const auto s = qstar_shape(p);
        const auto f = q_star_main(p).factors;
        const i64 m1sq = p.m1 * p.m1, m2sq = p.m2 * p.m2;
        c.require(f.psi == psi(m1sq * s.d2 * s.d2, m2sq * s.d1 * s.d1, p.N * s.r, PsiMode::brute), "psi factor");
        c.require(f.phi == phi_count(s.d1 * s.d2 * p.N * s.r), "phi factor");
        c.require(f.ram1 == *ramanujan(m1sq, s.d1, RamanujanMode::brute).claimed_integer, "R(m1^2, d1)");
        c.require(f.ram2 == *ramanujan(m2sq, s.d2, RamanujanMode::brute).claimed_integer, "R(m2^2, d2)");
        c.require(f.mu == mu_trial(s.d1 * s.d2), "mu factor");
        c.require(f.chi0 == (std::gcd(s.r, s.d1 * s.d2) == 1 ? 1 : 0), "principal character factor");
    }
    double prev = INFINITY;
    for (i64 N : {13, 101, 1009}) {
        QStarParams p;
        p.N = N;
        p.k1 = 4;
        p.k2 = 6;
        p.sigma = 0.9;
        const double main = q_star_main(p).value, rel = std::abs(q_star_brute(p).value - main) / std::abs(main);
        c.require(rel < prev, "residual did not shrink at N = " + std::to_string(N));
        c.notes << "N=" << N << " rel " << str(rel) << " ";
        prev = rel;
    }
}

void ingest_suite(Check& c) {
    const auto base = synthetic::delta_table(100);
    std::mt19937_64 rng(20240611);
    std::uniform_int_distribution<i64> pick(1, base.n_max() / 2);
    std::uniform_real_distribution<double> mag(1e-3, 1.0);
    int detected = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        auto f = base;
        f.lambda[static_cast<std::size_t>(pick(rng))] += (rng() & 1 ? 1.0 : -1.0) * mag(rng);
        try {
            validate_hecke(f);
        } catch (const IngestError&) {
            ++detected;
        }
    }
    c.require(detected == 1000, "fuzz detected " + std::to_string(detected) + "/1000");

    const auto f = synthetic::delta_table(200), g = synthetic::weight16_table(200);
    const auto spec = make_conductor_spec(12, 16, 1, 1);
    const auto phi = TestFunction::fejer(0.5);
    const double R = static_cast<double>(spec.R);
    const auto z = synthetic::constructive_zeros(R, phi, phi.hat(0.0) - 0.5 * phi(0.0) - s_fg(f, g, phi, R));
    const auto off = explicit_formula_residual(f, g, z, phi, spec);
    c.require(std::abs(off.residual) < 1e-6, "constructive residual " + str(off.residual));
    const auto on = explicit_formula_residual(f, g, z, phi, spec, true);
    const double expected = 2.0 * phi.at_imaginary(std::log(R) / (4.0 * std::numbers::pi));
    c.require(std::abs((on.residual - off.residual) - expected) <= 1e-14 * expected, "pole toggle shift");
    c.notes << "fuzz " << detected << "/1000, residual " << str(off.residual) << ", pole shift " << str(on.residual - off.residual);
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

void determinism_suite(Check& c) {
    const auto dir = fs::temp_directory_path() / ("rsd_acceptance_" + std::to_string(::getpid()));
    fs::create_directories(dir);
    const auto cfg = dir / "sweep.cfg";
    synthetic::write_file(cfg.string(), "count=200\nseed=42\nm=1..30\np=1..200\nb=1..40\nN=5..23\n");
    const std::vector<std::string> sweeps = {"verify split --config " + cfg.string(), "qstar sweep --N 13,101 --sigma 0.5..0.9:0.2",
                                             "asum sweep --N 5,13 --x 1000..100000:*10"};
    for (std::size_t i = 0; i < sweeps.size(); ++i) {
        std::string outs[2];
        for (int rep = 0; rep < 2; ++rep) {
            const auto out = dir / ("run" + std::to_string(rep) + ".csv");
            const std::string env = rep == 0 ? "RSD_THREADS=1 " : "RSD_THREADS=3 ";
            const int status = std::system((env + RSD_CLI_PATH + " " + sweeps[i] + " > " + out.string()).c_str());
            c.require(WIFEXITED(status) && WEXITSTATUS(status) == 0, "cli failed: " + sweeps[i]);
            outs[rep] = slurp(out);
        }
        c.require(!outs[0].empty() && outs[0] == outs[1], "outputs differ: " + sweeps[i]);
    }
    fs::remove_all(dir);
    c.notes << sweeps.size() << " sweeps byte-identical";
}

}  // namespace

int main() {
    struct Criterion {
        const char* name;
        double budget_s;
        std::function<void(Check&)> run;
    };
    const std::vector<Criterion> criteria = {
        {"identity suite", 300, identity_suite},
        {"Kloosterman splitting", 10, kloosterman_split_suite},
        {"Petersson vanishing", 120, petersson_suite},
        {"Mellin cross-check", 120, mellin_suite},
        {"density constants", 30, density_suite},
        {"pole Euler product", 60, pole_suite},
        {"A-sum agreement", 300, a_sum_suite},
        {"Q* harness", 600, qstar_suite},
        {"ingest", 60, ingest_suite},
        {"determinism", 600, determinism_suite},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Check c;
        const auto t0 = std::chrono::steady_clock::now();
        try {
            criteria[i].run(c);
        } catch (const std::exception& e) {
            c.require(false, std::string("exception: ") + e.what());
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        c.require(secs <= criteria[i].budget_s, "over time budget");
        std::printf("%s %2zu %-22s %7.2fs  %s\n", c.failed ? "FAIL" : "PASS", i + 1, criteria[i].name, secs, c.notes.str().c_str());
        for (const auto& f : c.failures) std::printf("       %s\n", f.c_str());
        if (c.failed > static_cast<int>(c.failures.size())) std::printf("       ... %d failures in total\n", c.failed);
        std::fflush(stdout);
        failed += c.failed != 0;
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed ? 1 : 0;
}
