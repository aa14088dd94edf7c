// Batch front end: every subcommand prints a '#' provenance header, a column row, then data rows.

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <map>
#include <mutex>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "rsd/arith.hpp"
#include "rsd/characters.hpp"
#include "rsd/density.hpp"
#include "rsd/expsums.hpp"
#include "rsd/ingest.hpp"
#include "rsd/petersson.hpp"
#include "rsd/qstar.hpp"

namespace {

using rsd::i64;

constexpr const char* version = "0.1.0";

enum Exit { ok = 0, assertion_failed = 1, usage = 2, range_violation = 3, file_error = 4, data_error = 5 };

struct RangeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct TypeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Ranges: "a", "a..b", "a..b:step", for reals also "a..b:*factor"; commas join several
// ---------------------------------------------------------------------------

struct Parts {
    std::string lo, hi, step;
};

Parts split_range(const std::string& text) {
    Parts p;
    const auto dots = text.find("..");
    if (dots == std::string::npos) {
        p.lo = p.hi = text;
        return p;
    }
    p.lo = text.substr(0, dots);
    auto rest = text.substr(dots + 2);
    const auto colon = rest.find(':');
    p.hi = rest.substr(0, colon);
    if (colon != std::string::npos) p.step = rest.substr(colon + 1);
    return p;
}

i64 to_int(const std::string& s, const std::string& name) {
    std::size_t used = 0;
    i64 v = 0;
    try {
        v = std::stoll(s, &used);
    } catch (const std::exception&) {
        throw TypeError("--" + name + ": '" + s + "' is not an integer");
    }
    if (used != s.size()) throw TypeError("--" + name + ": '" + s + "' is not an integer");
    return v;
}

double to_real(const std::string& s, const std::string& name) {
    std::size_t used = 0;
    double v = 0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        throw TypeError("--" + name + ": '" + s + "' is not a number");
    }
    if (used != s.size() || !std::isfinite(v)) throw TypeError("--" + name + ": '" + s + "' is not a number");
    return v;
}

template <class T, class F>
std::vector<T> comma_list(const std::string& text, F one) {
    std::vector<T> out;
    std::size_t start = 0;
    for (;;) {
        const auto comma = text.find(',', start);
        const auto part = one(text.substr(start, comma == std::string::npos ? std::string::npos : comma - start));
        out.insert(out.end(), part.begin(), part.end());
        if (comma == std::string::npos) return out;
        start = comma + 1;
    }
}

std::vector<i64> int_range_one(const std::string& text, const std::string& name, i64 min_value) {
    const auto p = split_range(text);
    const i64 lo = to_int(p.lo, name), hi = to_int(p.hi, name);
    const i64 step = p.step.empty() ? 1 : to_int(p.step, name);
    if (hi < lo) throw RangeError("--" + name + ": empty range " + text);
    if (step < 1) throw RangeError("--" + name + ": step must be positive");
    if (lo < min_value) throw RangeError("--" + name + ": values must be >= " + std::to_string(min_value));
    if ((hi - lo) / step > 10000000) throw RangeError("--" + name + ": range too long");
    std::vector<i64> out;
    for (i64 v = lo; v <= hi; v += step) out.push_back(v);
    return out;
}

std::vector<double> real_range_one(const std::string& text, const std::string& name) {
    const auto p = split_range(text);
    const double lo = to_real(p.lo, name), hi = to_real(p.hi, name);
    if (hi < lo) throw RangeError("--" + name + ": empty range " + text);
    std::vector<double> out;
    if (p.step.empty()) {
        if (lo != hi) throw RangeError("--" + name + ": real ranges need a step");
        return {lo};
    }
    if (p.step[0] == '*') {
        const double f = to_real(p.step.substr(1), name);
        if (!(f > 1.0) || !(lo > 0.0)) throw RangeError("--" + name + ": geometric ranges need lo > 0 and factor > 1");
        for (int i = 0;; ++i) {
            const double v = lo * std::pow(f, i);
            if (v > hi * (1 + 1e-12)) break;
            out.push_back(v);
        }
        return out;
    }
    const double step = to_real(p.step, name);
    if (!(step > 0.0)) throw RangeError("--" + name + ": step must be positive");
    const double count = std::floor((hi - lo) / step + 1e-9);
    if (count > 1e7) throw RangeError("--" + name + ": range too long");
    for (i64 i = 0; i <= static_cast<i64>(count); ++i) out.push_back(lo + static_cast<double>(i) * step);
    return out;
}

/// Comma-separated ranges, concatenated in order.
std::vector<i64> int_range(const std::string& text, const std::string& name, i64 min_value) {
    return comma_list<i64>(text, [&](const std::string& t) { return int_range_one(t, name, min_value); });
}

std::vector<double> real_range(const std::string& text, const std::string& name) {
    return comma_list<double>(text, [&](const std::string& t) { return real_range_one(t, name); });
}

// ---------------------------------------------------------------------------
// Tables
// ---------------------------------------------------------------------------

std::string real(double v) {
    if (std::isnan(v)) return "nan";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string integer(i64 v) { return std::to_string(v); }

struct Table {
    explicit Table(std::vector<std::string> cols = {}) : columns(std::move(cols)) {}

    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;
    bool all_ok = true;

    void add(std::vector<std::string> row, bool check = true) {
        rows.push_back(std::move(row));
        all_ok = all_ok && check;
    }
};

/// Runs f(i) for i < n on RSD_THREADS workers and returns results in index order.
template <class F>
auto grid_map(std::size_t n, F f) -> std::vector<decltype(f(std::size_t{}))> {
    using R = decltype(f(std::size_t{}));
    std::vector<R> out(n);
    std::size_t threads = 1;
    if (const char* env = std::getenv("RSD_THREADS")) threads = static_cast<std::size_t>(std::max(1, std::atoi(env)));
    threads = std::min(threads, std::max<std::size_t>(n, 1));
    std::vector<std::exception_ptr> errors(n);
    const auto work = [&](std::size_t t) {
        for (std::size_t i = t; i < n; i += threads) try {
                out[i] = f(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
    };
    if (threads == 1) {
        work(0);
    } else {
        std::vector<std::thread> pool;
        for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(work, t);
        for (auto& th : pool) th.join();
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    return out;
}

// ---------------------------------------------------------------------------
// Options
// ---------------------------------------------------------------------------

struct Options {
    std::map<std::string, std::string> values;  // string-valued options by long name
    std::vector<std::string> order;             // registration order for the echo
    std::vector<std::string> eigenvalues;
    bool assert_mode = false, all_chars = false, euler = false;
    CLI::App* app = nullptr;

    bool given(const std::string& name) const { return app->get_option("--" + name)->count() > 0; }
    const std::string& get(const std::string& name) const { return values.at(name); }
    std::vector<i64> ints(const std::string& name, i64 min_value = 1) const { return int_range(get(name), name, min_value); }
    std::vector<double> reals(const std::string& name) const { return real_range(get(name), name); }
    i64 one_int(const std::string& name) const { return to_int(get(name), name); }
    double one_real(const std::string& name) const { return to_real(get(name), name); }
};

struct Spec {
    const char* name;
    const char* fallback;
    const char* help;
};

const std::vector<Spec> option_specs{
    {"m", "1", "m range"},
    {"n", "1", "n range"},
    {"q", "1..10", "modulus range"},
    {"r", "1..20", "r range"},
    {"b", "1..12", "b range"},
    {"p", "1..10", "p range"},
    {"d", "1..4", "d1, d2 range"},
    {"N", "5", "level range (primes)"},
    {"k", "4", "weight range"},
    {"k1", "4", "first weight"},
    {"k2", "6", "second weight"},
    {"m1", "1", "m1 range"},
    {"m2", "1", "m2 range"},
    {"b1", "1", "b1 range"},
    {"b2", "1", "b2 range"},
    {"chi", "", "character index range (default: all)"},
    {"sigma", "1", "sigma range, reals need a step: a..b:s"},
    {"x", "1000..1000000:*10", "x grid for A sweeps"},
    {"count", "0", "random tuples for verify split (0: full grid)"},
    {"seed", "1", "seed for randomized grids"},
    {"b-max", "10000", "Petersson cutoff"},
    {"p-max", "100000", "Euler product prime cap"},
    {"d-max", "1000", "Euler triple-sum cap"},
    {"prime-cap", "100000000", "largest prime any prime sum may reach"},
    {"zeros", "", "zero-list file"},
    {"conductor", "", "conductor R"},
    {"pole", "auto", "pole term: auto, on or off"},
    {"tol", "1e-6", "residual tolerance in assert mode"},
    {"max-exponent", "-0.3", "largest accepted decay exponent for asum sweep"},
    {"format", "csv", "csv or tsv"},
};

// ---------------------------------------------------------------------------
// Subcommands
// ---------------------------------------------------------------------------

void require_prime_cap(const Options& o, double x) {
    const double cap = o.one_real("prime-cap");
    if (cap > rsd::qstar_prime_cap) throw RangeError("--prime-cap exceeds 1e8");
    if (x > cap) throw RangeError("prime sum would reach " + real(x) + " beyond --prime-cap");
}

Table sum_kloosterman(const Options& o) {
    Table t{{"m", "n", "q", "value"}};
    for (i64 m : o.ints("m", 0))
        for (i64 n : o.ints("n", 0))
            for (i64 q : o.ints("q")) t.add({integer(m), integer(n), integer(q), real(rsd::kloosterman(m, n, q).real())});
    return t;
}

Table sum_gauss(const Options& o) {
    Table t{{"q", "chi", "n", "re", "im"}};
    for (i64 q : o.ints("q")) {
        const auto g = rsd::CharacterGroup::create(q);
        const auto idx = o.get("chi").empty() ? int_range("0.." + std::to_string(g->size() - 1), "chi", 0) : o.ints("chi", 0);
        for (i64 c : idx) {
            if (c >= g->size()) throw RangeError("--chi: index " + std::to_string(c) + " beyond the group of order " + std::to_string(g->size()));
            const auto chi = g->character(c);
            for (i64 n : o.ints("n", 0)) {
                const auto v = rsd::gauss_sum(chi, n).value;
                t.add({integer(q), integer(c), integer(n), real(v.real()), real(v.imag())});
            }
        }
    }
    return t;
}

Table sum_ramanujan(const Options& o) {
    Table t{{"n", "q", "value"}};
    for (i64 n : o.ints("n", 0))
        for (i64 q : o.ints("q")) t.add({integer(n), integer(q), integer(rsd::ramanujan_int(n, q))});
    return t;
}

Table verify_vonsterneck(const Options& o) {
    Table t{{"n", "q", "brute", "divisor", "von_sterneck", "match"}};
    for (i64 n : o.ints("n", 0))
        for (i64 q : o.ints("q")) {
            const i64 a = *rsd::ramanujan(n, q, rsd::RamanujanMode::brute).claimed_integer;
            const i64 b = *rsd::ramanujan(n, q, rsd::RamanujanMode::divisor).claimed_integer;
            const i64 c = *rsd::ramanujan(n, q, rsd::RamanujanMode::von_sterneck).claimed_integer;
            const bool m = a == b && b == c;
            t.add({integer(n), integer(q), integer(a), integer(b), integer(c), m ? "1" : "0"}, m);
        }
    return t;
}

Table verify_decomp(const Options& o) {
    Table t{{"b", "p", "n", "m", "decomposition", "direct", "match"}};
    for (i64 b : o.ints("b"))
        for (i64 p : o.ints("p"))
            for (i64 n : o.ints("n"))
                for (i64 m : o.ints("m")) {
                    if (rsd::gcd(p, b) != 1 || rsd::gcd(n, b) != 1) continue;
                    const auto dec = rsd::kloosterman_char_decomp(n, m, p, b);
                    const auto dir = rsd::kloosterman_brute(rsd::checked_mul(n, m), rsd::checked_mul(n, p), b);
                    const bool ok = dec.matches(dir);
                    t.add({integer(b), integer(p), integer(n), integer(m), real(dec.real()), real(dir.real()), ok ? "1" : "0"}, ok);
                }
    return t;
}

Table verify_ksum(const Options& o) {
    Table t;
    if (o.all_chars)
        t.columns = {"N", "n1", "n2", "chi", "direct_re", "direct_im", "intermediate_re", "intermediate_im", "abs_over_N1.5", "match"};
    else
        t.columns = {"N", "n1", "n2", "direct", "closed", "match"};
    for (i64 N : o.ints("N", 2)) {
        if (!rsd::is_prime(static_cast<rsd::u64>(N))) continue;
        const auto g = rsd::CharacterGroup::create(N);
        for (i64 n1 : o.ints("n"))
            for (i64 n2 : o.ints("n")) {
                if (n1 % N == 0 || n2 % N == 0) continue;
                if (!o.all_chars) {
                    const i64 direct = *rsd::k_sum(n1, n2, g->principal()).claimed_integer;
                    const i64 closed = rsd::k_sum_closed(n1, n2, N);
                    t.add({integer(N), integer(n1), integer(n2), integer(direct), integer(closed), direct == closed ? "1" : "0"}, direct == closed);
                    continue;
                }
                for (i64 c = 0; c < g->size(); ++c) {
                    const auto chi = g->character(c);
                    const auto a = rsd::k_sum(n1, n2, chi), b = rsd::k_sum_intermediate(n1, n2, chi);
                    const bool ok = a.matches(b);
                    t.add({integer(N), integer(n1), integer(n2), integer(c), real(a.value.real()), real(a.value.imag()), real(b.value.real()),
                           real(b.value.imag()), real(std::abs(a.value) / std::pow(static_cast<double>(N), 1.5)), ok ? "1" : "0"},
                          ok);
                }
            }
    }
    return t;
}

Table verify_induction(const Options& o) {
    Table t{{"r", "b1", "m1", "chi", "closed_re", "closed_im", "direct_re", "direct_im", "match"}};
    for (i64 r : o.ints("r")) {
        const auto g = rsd::CharacterGroup::create(r);
        for (i64 b1 : o.ints("b")) {
            if (b1 % r != 0) continue;
            const auto target = rsd::CharacterGroup::create(b1);
            for (i64 m1 : o.ints("m"))
                for (i64 c = 0; c < g->size(); ++c) {
                    const auto chi = g->character(c);
                    const auto closed = rsd::gauss_induction(chi, b1, m1);
                    const auto direct = rsd::gauss_sum(rsd::induce(chi, target), rsd::checked_mul(m1, m1));
                    const bool ok = closed.matches(direct);
                    t.add({integer(r), integer(b1), integer(m1), integer(c), real(closed.value.real()), real(closed.value.imag()),
                           real(direct.value.real()), real(direct.value.imag()), ok ? "1" : "0"},
                          ok);
                }
        }
    }
    return t;
}

Table verify_psi(const Options& o) {
    Table t{{"n1", "n2", "r", "brute", "closed", "match"}};
    const auto ns = o.ints("n", 0);
    for (i64 r : o.ints("r"))
        for (i64 n1 : ns)
            for (i64 n2 : ns) {
                const i64 a = rsd::psi(n1, n2, r, rsd::PsiMode::brute), b = rsd::psi(n1, n2, r, rsd::PsiMode::closed);
                t.add({integer(n1), integer(n2), integer(r), integer(a), integer(b), a == b ? "1" : "0"}, a == b);
            }
    return t;
}

Table verify_split(const Options& o) {
    Table t{{"m1", "p", "b", "N", "direct", "product", "match"}};
    const auto ms = o.ints("m"), ps = o.ints("p"), bs = o.ints("b"), Ns = o.ints("N", 2);
    const auto row = [&](i64 m1, i64 p, i64 b, i64 N) {
        const i64 m1sq = rsd::checked_mul(m1, m1);
        const auto direct = rsd::kloosterman_brute(m1sq, p, rsd::checked_mul(b, N));
        const auto [l, r] = rsd::kloosterman_split(m1sq, p, b, N);
        const double prod = (l.value * r.value).real();
        const bool ok = direct.matches(l.value * r.value);
        t.add({integer(m1), integer(p), integer(b), integer(N), real(direct.real()), real(prod), ok ? "1" : "0"}, ok);
    };
    const auto valid = [](i64 b, i64 N) { return rsd::is_prime(static_cast<rsd::u64>(N)) && rsd::gcd(b, N) == 1; };
    const i64 count = o.one_int("count");
    if (count < 0) throw RangeError("--count must be non-negative");
    if (count == 0) {
        for (i64 N : Ns)
            for (i64 b : bs)
                if (valid(b, N))
                    for (i64 m1 : ms)
                        for (i64 p : ps) row(m1, p, b, N);
        return t;
    }
    std::mt19937_64 rng(static_cast<std::uint64_t>(o.one_int("seed")));
    const auto pick = [&](const std::vector<i64>& v) { return v[static_cast<std::size_t>(rng() % v.size())]; };
    i64 made = 0;
    for (i64 attempt = 0; made < count; ++attempt) {
        if (attempt > 1000 * count) throw RangeError("verify split: ranges admit no coprime (b, N)");
        const i64 m1 = pick(ms), p = pick(ps), b = pick(bs), N = pick(Ns);
        if (!valid(b, N)) continue;
        row(m1, p, b, N);
        ++made;
    }
    return t;
}

Table verify_charprod(const Options& o) {
    Table t{{"m1", "m2", "d1", "d2", "r", "lhs", "rhs", "match"}};
    const auto ms = o.ints("m"), ds = o.ints("d");
    for (i64 r : o.ints("r"))
        for (i64 m1 : ms)
            for (i64 m2 : ms)
                for (i64 d1 : ds)
                    for (i64 d2 : ds) {
                        if (rsd::gcd(d1, d2) != 1 || rsd::gcd(r, d1 * d2) != 1) continue;
                        std::string lhs = "nan";
                        bool ok = false;
                        i64 rhs = 0;
                        try {
                            const auto s = rsd::char_product_identity(m1, m2, d1, d2, r);
                            lhs = integer(*s.lhs.claimed_integer);
                            rhs = s.rhs;
                            ok = *s.lhs.claimed_integer == s.rhs;
                        } catch (const std::logic_error&) {
                            rhs = rsd::checked_mul(rsd::euler_phi(r), rsd::psi(m1 * m1 * d2 * d2, m2 * m2 * d1 * d1, r));
                        }
                        t.add({integer(m1), integer(m2), integer(d1), integer(d2), integer(r), lhs, integer(rhs), ok ? "1" : "0"}, ok);
                    }
    return t;
}

Table petersson_delta(const Options& o) {
    Table t{{"k", "N", "m", "n", "b_max", "value_re", "value_im", "tail_bound", "terms", "accelerated", "empirical_error"}};
    std::vector<rsd::PeterssonQuery> qs;
    const i64 b_max = o.one_int("b-max");
    for (i64 k : o.ints("k", 2))
        for (i64 N : o.ints("N"))
            for (i64 m : o.ints("m"))
                for (i64 n : o.ints("n")) qs.push_back({static_cast<int>(k), N, m, n, b_max});
    const auto res = grid_map(qs.size(), [&](std::size_t i) { return rsd::delta_kn(qs[i]); });
    for (std::size_t i = 0; i < qs.size(); ++i) {
        const auto& q = qs[i];
        const auto& r = res[i];
        t.add({integer(q.k), integer(q.N), integer(q.m), integer(q.n), integer(q.b_max), real(r.value.real()), real(r.value.imag()),
               real(r.tail_bound), integer(r.terms), real(r.accelerated.value_or(NAN)), real(r.empirical_error.value_or(NAN))});
    }
    return t;
}

Table density_table(const Options&) {
    Table t{{"regime", "sigma", "constant", "constant_decimal", "c0"}};
    for (const auto& row : rsd::corollary_constants())
        t.add({row.regime, row.sigma.str(), row.constant.str(), real(row.constant.to_double()), row.c0.str()});
    return t;
}

Table density_main_term(const Options& o) {
    Table t{{"sigma", "value", "density_integral", "s_limit", "quadrature", "abs_diff", "match"}};
    for (double s : o.reals("sigma")) {
        const auto phi = rsd::TestFunction::fejer(s);
        const auto km = rsd::ks_main_term(phi);
        const double quad = rsd::density_quadrature(phi);
        const double diff = std::abs(quad - km.value);
        const bool ok = diff <= 1e-8;
        t.add({real(s), real(km.value), real(km.density_integral), real(km.s_limit), real(quad), real(diff), ok ? "1" : "0"}, ok);
    }
    return t;
}

Table density_pole(const Options& o) {
    if (o.euler) {
        Table t{{"p_max", "d_max", "target", "closed_form_truncated", "closed_form", "closed_form_tail", "closed_form_error", "triple_sum",
                 "triple_sum_budget", "match"}};
        const i64 P = o.one_int("p-max"), D = o.one_int("d-max");
        const auto e = rsd::pole_euler_product(P, D);
        const double err = e.closed_form - e.target;
        const bool ok = std::abs(err) <= 1e-7 && std::abs(e.triple_sum - e.target) <= e.triple_sum_budget;
        t.add({integer(P), integer(D), real(e.target), real(e.closed_form_truncated), real(e.closed_form), real(e.closed_form_tail), real(err),
               real(e.triple_sum), real(e.triple_sum_budget), ok ? "1" : "0"},
              ok);
        return t;
    }
    Table t{{"k", "N", "sigma", "R", "family_size", "pole_term"}};
    for (i64 k : o.ints("k", 2))
        for (i64 N : o.ints("N"))
            for (double s : o.reals("sigma")) {
                const auto spec = rsd::make_conductor_spec(static_cast<int>(k), static_cast<int>(k), N, N);
                t.add({integer(k), integer(N), real(s), integer(spec.R), real(rsd::family_size(static_cast<int>(k), N)),
                       real(rsd::pole_term(spec, rsd::TestFunction::fejer(s)))});
            }
    return t;
}

/// Parameter grid for the prime sums; skips N not prime and m, b divisible by N.
std::vector<rsd::QStarParams> qstar_grid(const Options& o, bool with_sigma) {
    std::vector<rsd::QStarParams> out;
    const auto sig = with_sigma ? o.reals("sigma") : std::vector<double>{1.0};
    for (i64 m1 : o.ints("m1"))
        for (i64 m2 : o.ints("m2"))
            for (i64 b1 : o.ints("b1"))
                for (i64 b2 : o.ints("b2"))
                    for (i64 k1 : o.ints("k1", 2))
                        for (i64 k2 : o.ints("k2", 2))
                            for (double s : sig)
                                for (i64 N : o.ints("N", 2)) {
                                    if (!rsd::is_prime(static_cast<rsd::u64>(N))) continue;
                                    if (m1 % N == 0 || m2 % N == 0 || b1 % N == 0 || b2 % N == 0) continue;
                                    out.push_back({m1, m2, b1, b2, N, static_cast<int>(k1), static_cast<int>(k2), s, 0});
                                }
    return out;
}

std::vector<std::string> qstar_columns() { return {"m1", "m2", "b1", "b2", "N", "k1", "k2", "sigma"}; }

std::vector<std::string> qstar_cells(const rsd::QStarParams& p) {
    return {integer(p.m1), integer(p.m2), integer(p.b1), integer(p.b2), integer(p.N), integer(p.k1), integer(p.k2), real(p.sigma)};
}

/// Grows the shared prime table once so worker threads only read it.
void reserve_primes(const Options& o, const std::vector<rsd::QStarParams>& grid) {
    double cap = 2.0;
    for (const auto& p : grid) cap = std::max(cap, std::exp(p.sigma * rsd::qstar_shape(p).log_R));
    require_prime_cap(o, cap);
    rsd::shared_primes(static_cast<i64>(cap));
}

template <class... Extra>
Table with_qstar_columns(Extra... extra) {
    Table t{qstar_columns()};
    (t.columns.push_back(extra), ...);
    return t;
}

Table qstar_brute(const Options& o) {
    auto t = with_qstar_columns("value", "without_level", "abel", "match");
    const auto grid = qstar_grid(o, true);
    reserve_primes(o, grid);
    const auto res = grid_map(grid.size(), [&](std::size_t i) { return std::pair{rsd::q_star_brute(grid[i]), rsd::q_star_abel(grid[i])}; });
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const auto& [b, a] = res[i];
        const bool ok = std::abs(a - b.value) <= 1e-9 * std::max(1.0, std::abs(b.value));
        auto row = qstar_cells(grid[i]);
        for (auto s : {real(b.value), real(b.without_level), real(a), std::string(ok ? "1" : "0")}) row.push_back(s);
        t.add(row, ok);
    }
    return t;
}

Table qstar_main(const Options& o) {
    auto t = with_qstar_columns("psi", "phi", "ram1", "ram2", "mu", "chi0", "coefficient", "integral", "main");
    const auto grid = qstar_grid(o, true);
    const auto res = grid_map(grid.size(), [&](std::size_t i) { return rsd::q_star_main(grid[i]); });
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const auto& m = res[i];
        auto row = qstar_cells(grid[i]);
        for (auto s : {integer(m.factors.psi), integer(m.factors.phi), integer(m.factors.ram1), integer(m.factors.ram2), integer(m.factors.mu),
                       integer(m.factors.chi0), m.factors.coefficient().str(), real(m.integral), real(m.value)})
            row.push_back(s);
        t.add(row);
    }
    return t;
}

/// Rows in grid order; assert mode requires the relative residual to fall as N grows with the rest fixed.
Table qstar_sweep(const Options& o) {
    auto t = with_qstar_columns("brute", "main", "residual", "relative_residual");
    const auto grid = qstar_grid(o, true);
    reserve_primes(o, grid);
    const auto res = grid_map(grid.size(), [&](std::size_t i) { return std::pair{rsd::q_star_brute(grid[i]).value, rsd::q_star_main(grid[i]).value}; });
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const auto [b, m] = res[i];
        const double rel = m == 0.0 ? NAN : std::abs(b - m) / std::abs(m);
        bool ok = true;
        if (i > 0) {
            const auto& p = grid[i - 1];
            const auto& q = grid[i];
            const bool same = p.m1 == q.m1 && p.m2 == q.m2 && p.b1 == q.b1 && p.b2 == q.b2 && p.k1 == q.k1 && p.k2 == q.k2 && p.sigma == q.sigma;
            if (same) {
                const double prev = std::abs(res[i - 1].first - res[i - 1].second) / std::abs(res[i - 1].second);
                ok = rel < prev;
            }
        }
        auto row = qstar_cells(grid[i]);
        for (auto s : {real(b), real(m), real(b - m), real(rel)}) row.push_back(s);
        t.add(row, ok);
    }
    return t;
}

Table asum_sweep(const Options& o) {
    Table t{{"m1", "m2", "b1", "b2", "N", "x", "brute", "main", "scaled_residual", "fitted_exponent", "sign_changes"}};
    const auto grid = qstar_grid(o, false);
    const auto xs = o.reals("x");
    require_prime_cap(o, xs.back());
    rsd::shared_primes(static_cast<i64>(xs.back()));
    const double limit = o.one_real("max-exponent");
    const auto res = grid_map(grid.size(), [&](std::size_t i) { return rsd::a_agreement(xs, grid[i]); });
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const auto& p = grid[i];
        const bool ok = res[i].fitted_exponent <= limit;
        for (const auto& r : res[i].rows)
            t.add({integer(p.m1), integer(p.m2), integer(p.b1), integer(p.b2), integer(p.N), real(r.x), real(r.brute), real(r.main),
                   real(r.scaled_residual), real(res[i].fitted_exponent), integer(res[i].sign_changes)},
                  ok);
    }
    return t;
}

std::pair<rsd::HeckeData, rsd::HeckeData> load_pair(const Options& o) {
    if (o.eigenvalues.empty() || o.eigenvalues.size() > 2) throw RangeError("--eigenvalues takes one or two files");
    auto f = rsd::parse_eigenvalues(o.eigenvalues[0]);
    auto g = o.eigenvalues.size() == 2 ? rsd::parse_eigenvalues(o.eigenvalues[1]) : f;
    return {std::move(f), std::move(g)};
}

Table explicit_s(const Options& o) {
    Table t{{"f", "g", "sigma", "R", "S"}};
    if (o.get("conductor").empty()) throw RangeError("explicit s needs --conductor");
    const double R = o.one_real("conductor");
    const auto [f, g] = load_pair(o);
    for (double s : o.reals("sigma")) t.add({f.label, g.label, real(s), real(R), real(rsd::s_fg(f, g, rsd::TestFunction::fejer(s), R))});
    return t;
}

Table explicit_density(const Options& o) {
    Table t{{"label", "R", "sigma", "zeros", "value", "tail_bound"}};
    if (o.get("zeros").empty()) throw RangeError("explicit density needs --zeros");
    const auto z = rsd::parse_zeros(o.get("zeros"));
    for (double s : o.reals("sigma")) {
        const auto d = rsd::one_level_density(z, rsd::TestFunction::fejer(s));
        t.add({z.label, real(z.R), real(s), integer(static_cast<i64>(z.ordinates.size())), real(d.value), real(d.tail_bound)});
    }
    return t;
}

Table explicit_residual(const Options& o) {
    Table t{{"f", "g", "sigma", "R", "density", "phi_hat0", "half_phi0", "S", "pole", "residual", "scale", "match"}};
    if (o.get("zeros").empty()) throw RangeError("explicit residual needs --zeros");
    const auto [f, g] = load_pair(o);
    const auto z = rsd::parse_zeros(o.get("zeros"));
    const auto spec = rsd::make_conductor_spec(f.k, g.k, f.N, g.N);
    if (!o.get("conductor").empty() && o.one_real("conductor") != static_cast<double>(spec.R))
        throw rsd::IngestError(rsd::IngestErrorKind::inconsistent, "--conductor differs from the pair's conductor " + std::to_string(spec.R));
    std::optional<bool> pole;
    if (o.get("pole") == "on")
        pole = true;
    else if (o.get("pole") == "off")
        pole = false;
    else if (o.get("pole") != "auto")
        throw RangeError("--pole must be auto, on or off");
    const double tol = o.one_real("tol");
    for (double s : o.reals("sigma")) {
        const auto r = rsd::explicit_formula_residual(f, g, z, rsd::TestFunction::fejer(s), spec, pole);
        const bool ok = std::abs(r.residual) <= tol;
        t.add({f.label, g.label, real(s), integer(spec.R), real(r.density), real(r.phi_hat0), real(r.half_phi0), real(r.s), real(r.pole),
               real(r.residual), real(r.scale), ok ? "1" : "0"},
              ok);
    }
    return t;
}

// ---------------------------------------------------------------------------
// Driver
// ---------------------------------------------------------------------------

/// Every supplied range must parse, whether or not the chosen subcommand reads it.
void validate_given(const Options& o) {
    for (const char* name : {"m", "n", "q", "r", "b", "p", "d", "N", "k", "k1", "k2", "m1", "m2", "b1", "b2", "chi", "count", "seed", "b-max",
                             "p-max", "d-max"})
        if (o.given(name)) int_range(o.get(name), name, std::numeric_limits<i64>::min());
    for (const char* name : {"sigma", "x", "prime-cap", "conductor", "tol", "max-exponent"})
        if (o.given(name)) real_range(o.get(name), name);
}

std::string render(const Options& o, const std::string& command, const Table& t, const std::string& config_path) {
    const std::string sep = o.get("format") == "tsv" ? "\t" : ",";
    std::ostringstream out;
    out << "# rsd-cli " << version << "\n";
    out << "# command: " << command << "\n";
    if (!config_path.empty()) out << "# config: " << config_path << "\n";
    for (const auto& name : o.order)
        if (o.given(name)) out << "# " << name << "=" << o.get(name) << "\n";
    for (const auto& e : o.eigenvalues) out << "# eigenvalues=" << e << "\n";
    for (const char* flag : {"assert", "all-chars", "euler"})
        if (o.app->get_option(std::string("--") + flag)->count()) out << "# " << flag << "\n";
    for (std::size_t i = 0; i < t.columns.size(); ++i) out << (i ? sep : "") << t.columns[i];
    out << "\n";
    for (const auto& row : t.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) out << (i ? sep : "") << row[i];
        out << "\n";
    }
    return out.str();
}

const char* exit_help =
    "Exit codes:\n"
    "  0  success (report mode never fails on data)\n"
    "  1  an --assert check failed\n"
    "  2  usage error: unknown subcommand, option or config key, value of the wrong type\n"
    "  3  range violation: bad or empty range, value outside module limits\n"
    "  4  file error: unreadable or malformed input, unwritable output\n"
    "  5  data error: Hecke validation, prime coverage gap, inconsistent conductors\n"
    "Config files hold key=value lines ('#' comments); flags override them.\n"
    "RSD_THREADS sets the worker count for sweeps; output order never depends on it.";

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Exponential sums, Petersson series and one-level density main terms", "rsd-cli"};
    app.footer(exit_help);
    app.allow_config_extras(CLI::config_extras_mode::error);
    app.set_config("--config", "", "key=value file; flags override it");
    app.set_version_flag("--version", std::string("rsd-cli ") + version);
    app.require_subcommand(1);

    Options o;
    o.app = &app;
    for (const auto& s : option_specs) {
        o.values[s.name] = s.fallback;
        o.order.emplace_back(s.name);
        // config files split "a,b" into arrays; joining restores the list syntax
        app.add_option(std::string("--") + s.name, o.values[s.name], s.help)->delimiter(',')->multi_option_policy(CLI::MultiOptionPolicy::Join);
    }
    app.add_option("--eigenvalues", o.eigenvalues, "one or two eigenvalue files (f, then g)")->expected(1, 2);
    std::string output;
    app.add_option("--output", output, "write the table here instead of stdout");
    app.add_flag("--assert", o.assert_mode, "exit 1 when any check fails");
    app.add_flag("--all-chars", o.all_chars, "verify ksum over every character");
    app.add_flag("--euler", o.euler, "density pole: Euler-product check instead of the pole term");

    using Handler = Table (*)(const Options&);
    std::vector<std::tuple<CLI::App*, std::string, Handler>> leaves;
    const auto group = [&](const std::string& name, const std::string& help, std::vector<std::tuple<std::string, std::string, Handler>> subs) {
        auto* g = app.add_subcommand(name, help);
        g->require_subcommand(1);
        g->fallthrough();
        for (auto& [sub, h, fn] : subs) {
            auto* leaf = g->add_subcommand(sub, h);
            leaf->fallthrough();
            leaves.emplace_back(leaf, name + " " + sub, fn);
        }
    };
    group("sum", "exponential sums",
          {{"kloosterman", "S(m, n; q) over --m --n --q", sum_kloosterman},
           {"gauss", "G_chi(n) over --q --chi --n", sum_gauss},
           {"ramanujan", "R(n, q) over --n --q", sum_ramanujan}});
    group("verify", "identity grids; rows carry a match column",
          {{"decomp", "character decomposition of S(nm, np; b) over --b --p --n --m", verify_decomp},
           {"ksum", "K(n1, n2, chi) closed form over --N --n (--all-chars: intermediate form for every chi)", verify_ksum},
           {"induction", "Gauss sums of induced characters over --r --b --m", verify_induction},
           {"psi", "psi brute vs closed over --n (n1, n2) --r", verify_psi},
           {"split", "Kloosterman splitting over --m --p --b --N, or --count random tuples with --seed", verify_split},
           {"charprod", "character-product identity over --m --d --r", verify_charprod},
           {"vonsterneck", "Ramanujan sums in three modes over --n --q", verify_vonsterneck}});
    group("petersson", "Petersson series", {{"delta", "Delta_{k,N}(m, n) over --k --N --m --n with --b-max", petersson_delta}});
    group("density", "density constants and main terms",
          {{"table", "nonvanishing constants", density_table},
           {"main-term", "W(Sp) main term vs quadrature over --sigma", density_main_term},
           {"pole", "pole term over --k --N --sigma, or --euler with --p-max --d-max", density_pole}});
    group("qstar", "Kloosterman prime sums against Bessel weights",
          {{"brute", "direct prime sum and its partial-summation form", qstar_brute},
           {"main", "main-term factors and value", qstar_main},
           {"sweep", "brute vs main residual", qstar_sweep}});
    group("asum", "unweighted prime sums", {{"sweep", "A(x) vs c x over --x", asum_sweep}});
    group("explicit", "explicit formula on ingested data",
          {{"s", "prime sum S over --eigenvalues --sigma --conductor", explicit_s},
           {"density", "one-level density over --zeros --sigma", explicit_density},
           {"residual", "explicit-formula residual over --eigenvalues --zeros --sigma [--pole]", explicit_residual}});

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::FileError& e) {
        std::cerr << "rsd-cli: " << e.what() << "\n";
        return file_error;
    } catch (const CLI::ParseError& e) {
        std::cerr << "rsd-cli: " << e.what() << "\n";
        return usage;
    }

    try {
        if (o.get("format") != "csv" && o.get("format") != "tsv") throw RangeError("--format must be csv or tsv");
        validate_given(o);
        for (const auto& [leaf, command, fn] : leaves) {
            if (!leaf->parsed()) continue;
            const Table t = fn(o);
            const auto text = render(o, command, t, app.get_config_ptr()->count() ? app.get_config_ptr()->as<std::string>() : "");
            if (output.empty()) {
                std::cout << text;
            } else {
                std::ofstream out(output, std::ios::binary);
                if (!(out << text)) {
                    std::cerr << "rsd-cli: cannot write " << output << "\n";
                    return file_error;
                }
            }
            return o.assert_mode && !t.all_ok ? assertion_failed : ok;
        }
        return usage;
    } catch (const TypeError& e) {
        std::cerr << "rsd-cli: " << e.what() << "\n";
        return usage;
    } catch (const RangeError& e) {
        std::cerr << "rsd-cli: " << e.what() << "\n";
        return range_violation;
    } catch (const rsd::IngestError& e) {
        std::cerr << "rsd-cli: " << e.what() << "\n";
        const auto k = e.kind();
        return k == rsd::IngestErrorKind::io || k == rsd::IngestErrorKind::malformed ? file_error : data_error;
    } catch (const std::invalid_argument& e) {
        std::cerr << "rsd-cli: " << e.what() << "\n";
        return range_violation;
    } catch (const std::out_of_range& e) {
        std::cerr << "rsd-cli: " << e.what() << "\n";
        return range_violation;
    } catch (const std::domain_error& e) {
        std::cerr << "rsd-cli: " << e.what() << "\n";
        return range_violation;
    } catch (const std::exception& e) {
        std::cerr << "rsd-cli: " << e.what() << "\n";
        return data_error;
    }
}
