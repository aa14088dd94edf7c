#pragma once

/**
 * @file ingest.hpp
 * @brief Hecke eigenvalue tables and zero lists from text files, and the explicit-formula terms built on them.
 *
 * Only normalized eigenvalues lambda_f(n) = a_f(n) n^{-(k-1)/2} are consumed.  Harmonic weights
 * ||f||^{-1} a_f(n) need Petersson norms and cannot be rebuilt from these files.
 *
 * Formats (comma-separated, '#' header first):
 *   # hecke,<label>,<k>,<N>,<n_max>     then rows  n,<lambda(n)>   for n = 1..n_max
 *   # zeros,<label>,<R>,<symmetric>     then rows  <gamma>         ascending
 * Values are written with 17 significant digits in scientific notation.
 *
 *   S(f x g; phi) = sum_p lambda_f(p) lambda_g(p) phi^(log p / log R) 2 log p / (sqrt p log R)
 *   D(f x g; phi) = sum_gamma phi(gamma log R / (2 pi))
 *   D - [phi^(0) - phi(0)/2 - S - 2 [pole] phi(log R / (4 pi i))]  is the residual.
 */

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <numbers>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "arith.hpp"
#include "density.hpp"

namespace rsd {

enum class IngestErrorKind { malformed, lambda_one, hecke_relation, ramanujan_bound, coverage, inconsistent, io };

class IngestError : public std::runtime_error {
public:
    IngestError(IngestErrorKind kind, const std::string& what, std::optional<std::pair<i64, i64>> pair = std::nullopt)
        : std::runtime_error(what), kind_(kind), pair_(pair) {}
    IngestErrorKind kind() const { return kind_; }
    /// Offending (m, n) for Hecke-relation failures; (p, 0) for coverage and bound failures.
    std::optional<std::pair<i64, i64>> pair() const { return pair_; }

private:
    IngestErrorKind kind_;
    std::optional<std::pair<i64, i64>> pair_;
};

inline constexpr double hecke_tolerance = 1e-9;

struct HeckeData {
    std::string label;
    int k = 2;
    i64 N = 1;
    std::vector<double> lambda;  // lambda[n] for n = 1..n_max; lambda[0] unused

    i64 n_max() const { return static_cast<i64>(lambda.size()) - 1; }
    double operator[](i64 n) const { return lambda.at(static_cast<std::size_t>(n)); }
};

struct ZeroList {
    std::string label;
    double R = 0.0;
    bool symmetric = false;          // stored gamma >= 0, reflected on use
    std::vector<double> ordinates;   // ascending
};

namespace detail {

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, ',')) out.push_back(trim(field));
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

inline double parse_real(const std::string& s, std::size_t line) {
    if (s.empty()) throw IngestError(IngestErrorKind::malformed, "line " + std::to_string(line) + ": empty value");
    char* end = nullptr;
    errno = 0;
    const double v = std::strtod(s.c_str(), &end);
    if (end != s.c_str() + s.size() || errno == ERANGE || !std::isfinite(v))
        throw IngestError(IngestErrorKind::malformed, "line " + std::to_string(line) + ": bad number '" + s + "'");
    return v;
}

inline i64 parse_integer(const std::string& s, std::size_t line) {
    if (s.empty()) throw IngestError(IngestErrorKind::malformed, "line " + std::to_string(line) + ": empty integer");
    char* end = nullptr;
    errno = 0;
    const long long v = std::strtoll(s.c_str(), &end, 10);
    if (end != s.c_str() + s.size() || errno == ERANGE)
        throw IngestError(IngestErrorKind::malformed, "line " + std::to_string(line) + ": bad integer '" + s + "'");
    return v;
}

inline std::string format_real(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.16e", v);
    return buf;
}

/// Non-empty lines with their 1-based numbers.
inline std::vector<std::pair<std::size_t, std::string>> content_lines(const std::string& text) {
    std::vector<std::pair<std::size_t, std::string>> out;
    std::istringstream in(text);
    std::string line;
    for (std::size_t no = 1; std::getline(in, line); ++no) {
        line = trim(line);
        if (!line.empty()) out.emplace_back(no, line);
    }
    return out;
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IngestError(IngestErrorKind::io, "cannot open " + path);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

inline std::vector<std::string> header_fields(const std::string& line, const std::string& tag, std::size_t count) {
    if (line.rfind("#", 0) != 0) throw IngestError(IngestErrorKind::malformed, "missing '# " + tag + "' header");
    auto f = split_fields(trim(line.substr(1)));
    if (f.size() != count || f[0] != tag)
        throw IngestError(IngestErrorKind::malformed, "header must be '# " + tag + "' with " + std::to_string(count - 1) + " fields");
    return f;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

/// Throws on lambda(1) != 1, a broken Hecke relation, or |lambda(p)| > 2 at p not dividing N.
inline void validate_hecke(const HeckeData& f) {
    const i64 n_max = f.n_max();
    if (n_max < 1) throw IngestError(IngestErrorKind::malformed, f.label + ": empty table");
    if (f.k < 2 || f.k % 2) throw IngestError(IngestErrorKind::malformed, f.label + ": weight must be even and >= 2");
    if (f.N < 1) throw IngestError(IngestErrorKind::malformed, f.label + ": level must be positive");
    if (std::abs(f[1] - 1.0) > hecke_tolerance) throw IngestError(IngestErrorKind::lambda_one, f.label + ": lambda(1) != 1", std::pair<i64, i64>{1, 1});
    for (i64 m = 2; m * m <= n_max; ++m)
        for (i64 n = m; m * n <= n_max; ++n) {
            const i64 g = gcd(m, n);
            double rhs = 0.0;
            for (i64 d = 1; d <= g; ++d)
                if (g % d == 0 && gcd(d, f.N) == 1) rhs += f[m * n / (d * d)];
            const double lhs = f[m] * f[n];
            if (std::abs(lhs - rhs) > hecke_tolerance * std::max(1.0, std::abs(lhs)))
                throw IngestError(IngestErrorKind::hecke_relation,
                                  f.label + ": Hecke relation fails at (m, n) = (" + std::to_string(m) + ", " + std::to_string(n) + ")",
                                  std::pair<i64, i64>{m, n});
        }
    const auto primes = primes_up_to(n_max);
    for (i64 p : primes.primes())
        if (f.N % p != 0 && std::abs(f[p]) > 2.0 + hecke_tolerance)
            throw IngestError(IngestErrorKind::ramanujan_bound, f.label + ": |lambda(" + std::to_string(p) + ")| > 2", std::pair<i64, i64>{p, 0});
}

// ---------------------------------------------------------------------------
// Parse / serialize
// ---------------------------------------------------------------------------

inline HeckeData parse_eigenvalues_text(const std::string& text) {
    const auto lines = detail::content_lines(text);
    if (lines.empty()) throw IngestError(IngestErrorKind::malformed, "empty eigenvalue file");
    const auto h = detail::header_fields(lines[0].second, "hecke", 5);
    HeckeData f;
    f.label = h[1];
    f.k = static_cast<int>(detail::parse_integer(h[2], lines[0].first));
    f.N = detail::parse_integer(h[3], lines[0].first);
    const i64 n_max = detail::parse_integer(h[4], lines[0].first);
    if (n_max < 1 || n_max > 100000000) throw IngestError(IngestErrorKind::malformed, "n_max out of range");
    if (static_cast<i64>(lines.size()) - 1 != n_max)
        throw IngestError(IngestErrorKind::malformed, "expected " + std::to_string(n_max) + " rows, found " + std::to_string(lines.size() - 1));
    f.lambda.assign(static_cast<std::size_t>(n_max + 1), 0.0);
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const auto [no, line] = lines[i];
        const auto fields = detail::split_fields(line);
        if (fields.size() != 2) throw IngestError(IngestErrorKind::malformed, "line " + std::to_string(no) + ": expected 'n,value'");
        const i64 n = detail::parse_integer(fields[0], no);
        if (n != static_cast<i64>(i))
            throw IngestError(IngestErrorKind::malformed, "line " + std::to_string(no) + ": expected n = " + std::to_string(i));
        f.lambda[static_cast<std::size_t>(n)] = detail::parse_real(fields[1], no);
    }
    validate_hecke(f);
    return f;
}

inline HeckeData parse_eigenvalues(const std::string& path) { return parse_eigenvalues_text(detail::read_file(path)); }

inline std::string serialize_eigenvalues(const HeckeData& f) {
    std::string out = "# hecke," + f.label + "," + std::to_string(f.k) + "," + std::to_string(f.N) + "," + std::to_string(f.n_max()) + "\n";
    for (i64 n = 1; n <= f.n_max(); ++n) out += std::to_string(n) + "," + detail::format_real(f[n]) + "\n";
    return out;
}

inline ZeroList parse_zeros_text(const std::string& text) {
    const auto lines = detail::content_lines(text);
    if (lines.empty()) throw IngestError(IngestErrorKind::malformed, "empty zero file");
    const auto h = detail::header_fields(lines[0].second, "zeros", 4);
    ZeroList z;
    z.label = h[1];
    z.R = detail::parse_real(h[2], lines[0].first);
    if (!(z.R > 1.0)) throw IngestError(IngestErrorKind::malformed, "conductor must exceed 1");
    if (h[3] == "1" || h[3] == "true")
        z.symmetric = true;
    else if (h[3] == "0" || h[3] == "false")
        z.symmetric = false;
    else
        throw IngestError(IngestErrorKind::malformed, "symmetric flag must be 0 or 1");
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const auto [no, line] = lines[i];
        const double g = detail::parse_real(line, no);
        if (!z.ordinates.empty() && g < z.ordinates.back())
            throw IngestError(IngestErrorKind::malformed, "line " + std::to_string(no) + ": ordinates must be ascending");
        if (z.symmetric && g < 0.0) throw IngestError(IngestErrorKind::malformed, "line " + std::to_string(no) + ": symmetric lists store gamma >= 0");
        z.ordinates.push_back(g);
    }
    return z;
}

inline ZeroList parse_zeros(const std::string& path) { return parse_zeros_text(detail::read_file(path)); }

inline std::string serialize_zeros(const ZeroList& z) {
    char r[40];
    std::snprintf(r, sizeof r, "%.17g", z.R);
    std::string out = "# zeros," + z.label + "," + r + "," + (z.symmetric ? "1" : "0") + "\n";
    for (double g : z.ordinates) out += detail::format_real(g) + "\n";
    return out;
}

/// Sorts and checks the symmetric convention.
inline ZeroList make_zero_list(std::string label, double R, bool symmetric, std::vector<double> ordinates) {
    if (!(R > 1.0)) throw IngestError(IngestErrorKind::malformed, "conductor must exceed 1");
    std::sort(ordinates.begin(), ordinates.end());
    if (symmetric && !ordinates.empty() && ordinates.front() < 0.0)
        throw IngestError(IngestErrorKind::malformed, "symmetric lists store gamma >= 0");
    return {std::move(label), R, symmetric, std::move(ordinates)};
}

// ---------------------------------------------------------------------------
// Explicit-formula terms
// ---------------------------------------------------------------------------

/// Prime sum over p < R^sigma; both tables must hold every such prime.
inline double s_fg(const HeckeData& f, const HeckeData& g, const TestFunction& phi, double R) {
    if (!(R > 1.0)) throw std::invalid_argument("s_fg: R must exceed 1");
    const double L = std::log(R);
    const double cap = std::exp(phi.sigma() * L);
    if (cap > 1e8) throw std::out_of_range("s_fg: R^sigma exceeds 1e8");
    const i64 X = static_cast<i64>(std::ceil(cap)) - 1;
    double s = 0.0;
    if (X < 2) return s;
    const auto primes = primes_up_to(X);
    for (i64 p : primes.primes()) {
        const double lp = std::log(static_cast<double>(p));
        const double w = phi.hat(lp / L);
        if (w == 0.0) continue;
        for (const HeckeData* t : {&f, &g})
            if (p > t->n_max())
                throw IngestError(IngestErrorKind::coverage, t->label + ": missing prime " + std::to_string(p) + " (table ends at " +
                                                                 std::to_string(t->n_max()) + ")",
                                  std::pair<i64, i64>{p, 0});
        s += f[p] * g[p] * w * 2.0 * lp / (std::sqrt(static_cast<double>(p)) * L);
    }
    return s;
}

struct DensityValue {
    double value = 0.0;
    double tail_bound = 0.0;  // zeros beyond the stored range, Fejer tail 1/(pi sigma x)^2
};

/// Sum over the stored zeros, each +-gamma pair counted twice when symmetric.  The tail assumes
/// zero density (log R + 4 log(1 + |t|)) / (2 pi) past the largest stored |gamma|.
inline DensityValue one_level_density(const ZeroList& z, const TestFunction& phi) {
    DensityValue out;
    if (z.ordinates.empty()) return out;
    const double L = std::log(z.R);
    std::vector<double> g = z.ordinates;
    std::sort(g.begin(), g.end());
    double T = 0.0;
    for (double t : g) {
        const double v = phi(t * L / (2.0 * std::numbers::pi));
        out.value += z.symmetric && t > 0.0 ? 2.0 * v : v;
        T = std::max(T, std::abs(t));
    }
    if (T > 0.0) {
        const double s = phi.sigma();
        out.tail_bound = 2.0 / (2.0 * std::numbers::pi) * 4.0 / (s * s * L * L) * (L + 4.0 * std::log1p(T) + 4.0) / T;
    }
    return out;
}

/// 2 phi(log R / (4 pi i)); phi is even so this is phi at i log R / (4 pi).
inline double pole_contribution(const TestFunction& phi, double R) {
    return 2.0 * phi.at_imaginary(std::log(R) / (4.0 * std::numbers::pi));
}

struct ResidualReport {
    double residual = 0.0;
    double density = 0.0;
    double density_tail = 0.0;
    double phi_hat0 = 0.0;
    double half_phi0 = 0.0;
    double s = 0.0;
    double pole = 0.0;   // included pole contribution, 0 when off
    double scale = 0.0;  // log log R / log R
};

/// pole: nullopt switches it on for a self-pair (same label, equal weights and levels).
inline ResidualReport explicit_formula_residual(const HeckeData& f, const HeckeData& g, const ZeroList& z, const TestFunction& phi,
                                                const ConductorSpec& spec, std::optional<bool> pole = std::nullopt) {
    const auto s = verify_conductor(spec);
    if (f.k != s.k1 || f.N != s.N1 || g.k != s.k2 || g.N != s.N2)
        throw IngestError(IngestErrorKind::inconsistent, "eigenvalue tables do not match the conductor's weights and levels");
    const double R = static_cast<double>(s.R);
    if (z.R != R) throw IngestError(IngestErrorKind::inconsistent, "zero list conductor differs from the pair's conductor");
    ResidualReport out;
    const auto d = one_level_density(z, phi);
    out.density = d.value;
    out.density_tail = d.tail_bound;
    out.phi_hat0 = phi.hat(0.0);
    out.half_phi0 = 0.5 * phi(0.0);
    out.s = s_fg(f, g, phi, R);
    const bool on = pole.value_or(s.has_pole() && f.label == g.label);
    out.pole = on ? pole_contribution(phi, R) : 0.0;
    const double L = std::log(R);
    out.scale = std::log(L) / L;
    out.residual = out.density - (out.phi_hat0 - out.half_phi0 - out.s - out.pole);
    return out;
}

}  // namespace rsd
