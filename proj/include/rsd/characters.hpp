#pragma once

/**
 * @file characters.hpp
 * @brief Dirichlet character groups modulo q.
 *
 * A character is an exponent vector on a fixed set of CRT generators.
 * For an odd prime power the generator is the smallest primitive root;
 * 4 uses {-1}; 2^a with a >= 3 uses the pair {-1, 5}.  Values are
 * e(t / L) with t an exact integer and L the group exponent, so each
 * evaluation costs a single transcendental call.
 */

#include <complex>
#include <cstdint>
#include <memory>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "arith.hpp"

namespace rsd {

using cplx = std::complex<double>;

/// e(num / den) = exp(2 pi i num / den), reduced exactly before the trig call.
inline cplx unit_phase(i64 num, i64 den) {
    i64 r = mod(num, den);
    if (2 * r > den) r -= den;
    const double angle = 2.0 * std::numbers::pi * static_cast<double>(r) / static_cast<double>(den);
    return {std::cos(angle), std::sin(angle)};
}

class DirichletCharacter;

class CharacterGroup : public std::enable_shared_from_this<CharacterGroup> {
public:
    struct Component {
        i64 prime_power;     // modulus of the CRT factor this generator lives on
        i64 local_generator; // generator residue mod prime_power
        i64 generator;       // lifted residue mod q (1 on every other factor)
        i64 order;
        std::vector<std::int32_t> dlog;  // discrete log mod prime_power, -1 on non-units
    };

    static std::shared_ptr<const CharacterGroup> create(const FactoredInteger& q) {
        return std::shared_ptr<const CharacterGroup>(new CharacterGroup(q));
    }
    static std::shared_ptr<const CharacterGroup> create(i64 q) { return create(factor(q)); }

    i64 modulus() const { return modulus_.value(); }
    const FactoredInteger& factored_modulus() const { return modulus_; }
    const std::vector<Component>& components() const { return components_; }
    i64 size() const { return size_; }
    /// Exponent of the group; every character value is an L-th root of unity.
    i64 exponent() const { return exponent_; }

    /// Phase numerator t with chi(a) = e(t / exponent()), given exponents; nullopt for non-units.
    std::optional<i64> phase(std::span<const i64> exps, i64 a) const {
        const i64 q = modulus();
        a = mod(a, q);
        if (q == 1) return 0;
        i64 t = 0;
        for (std::size_t j = 0; j < components_.size(); ++j) {
            const auto& c = components_[j];
            const i64 l = c.dlog[static_cast<std::size_t>(a % c.prime_power)];
            if (l < 0) return std::nullopt;
            t = mod(t + mod(exps[j] * l, c.order) * (exponent_ / c.order), exponent_);
        }
        return t;
    }

    /// Character at position `index` of the lexicographic enumeration.
    DirichletCharacter character(i64 index) const;
    DirichletCharacter principal() const;
    std::vector<DirichletCharacter> characters() const;

private:
    explicit CharacterGroup(const FactoredInteger& q) : modulus_(q) {
        const i64 qv = q.value();
        for (const auto& [p, e] : q.factors()) {
            const i64 pe = checked_pow(p, e);
            auto lift = [&](i64 g) {
                // CRT: x = g mod pe, x = 1 mod qv / pe
                if (pe == qv) return g;
                const i64 rest = qv / pe;
                const i64 inv = mod_inverse(rest, pe);
                const i64 t = static_cast<i64>(mulmod(static_cast<u64>(mod(g - 1, pe)), static_cast<u64>(inv), static_cast<u64>(pe)));
                return mod(1 + checked_mul(rest, t), qv);
            };
            if (p == 2 && e == 1) {
                // trivial unit group, kept only so that even residues evaluate to 0
                components_.push_back({2, 1, lift(1), 1, {-1, 0}});
                continue;
            }
            if (p == 2) {
                Component minus_one{pe, pe - 1, lift(pe - 1), 2, std::vector<std::int32_t>(static_cast<std::size_t>(pe), -1)};
                if (e == 2) {
                    minus_one.dlog[1] = 0;
                    minus_one.dlog[3] = 1;
                    components_.push_back(std::move(minus_one));
                    continue;
                }
                const i64 ord5 = pe / 4;
                Component five{pe, 5, lift(5), ord5, std::vector<std::int32_t>(static_cast<std::size_t>(pe), -1)};
                i64 x = 1;
                for (i64 k = 0; k < ord5; ++k) {
                    // +-5^k covers all units; 5^k = 1 mod 4
                    five.dlog[static_cast<std::size_t>(x)] = static_cast<std::int32_t>(k);
                    five.dlog[static_cast<std::size_t>(pe - x)] = static_cast<std::int32_t>(k);
                    minus_one.dlog[static_cast<std::size_t>(x)] = 0;
                    minus_one.dlog[static_cast<std::size_t>(pe - x)] = 1;
                    x = x * 5 % pe;
                }
                components_.push_back(std::move(minus_one));
                components_.push_back(std::move(five));
                continue;
            }
            const i64 g = primitive_root(pe);
            const i64 order = pe / p * (p - 1);
            Component c{pe, g, lift(g), order, std::vector<std::int32_t>(static_cast<std::size_t>(pe), -1)};
            i64 x = 1;
            for (i64 k = 0; k < order; ++k) {
                c.dlog[static_cast<std::size_t>(x)] = static_cast<std::int32_t>(k);
                x = static_cast<i64>(mulmod(static_cast<u64>(x), static_cast<u64>(g), static_cast<u64>(pe)));
            }
            components_.push_back(std::move(c));
        }
        size_ = 1;
        exponent_ = 1;
        for (const auto& c : components_) {
            size_ = checked_mul(size_, c.order);
            exponent_ = lcm(exponent_, c.order);
        }
    }

    FactoredInteger modulus_;
    std::vector<Component> components_;
    i64 size_ = 1;
    i64 exponent_ = 1;
};

class DirichletCharacter {
public:
    DirichletCharacter(std::shared_ptr<const CharacterGroup> group, std::vector<i64> exponents)
        : group_(std::move(group)), exponents_(std::move(exponents)) {
        const auto& cs = group_->components();
        if (exponents_.size() != cs.size()) throw std::invalid_argument("DirichletCharacter: exponent vector has wrong length");
        for (std::size_t j = 0; j < cs.size(); ++j) exponents_[j] = mod(exponents_[j], cs[j].order);
    }

    const CharacterGroup& group() const { return *group_; }
    const std::shared_ptr<const CharacterGroup>& group_ptr() const { return group_; }
    const std::vector<i64>& exponents() const { return exponents_; }
    i64 modulus() const { return group_->modulus(); }

    /// chi(a) = e(t / group().exponent()); nullopt when gcd(a, q) > 1.
    std::optional<i64> phase(i64 a) const { return group_->phase(exponents_, a); }

    cplx operator()(i64 a) const { return evaluate(a); }

    cplx evaluate(i64 a) const {
        const auto t = phase(a);
        if (!t) return {0.0, 0.0};
        return unit_phase(*t, group_->exponent());
    }

    bool is_principal() const {
        return std::all_of(exponents_.begin(), exponents_.end(), [](i64 e) { return e == 0; });
    }

    DirichletCharacter conjugate() const {
        std::vector<i64> neg(exponents_.size());
        std::transform(exponents_.begin(), exponents_.end(), neg.begin(), [](i64 e) { return -e; });
        return {group_, std::move(neg)};
    }

    /// Order of chi as an element of the character group.
    i64 order() const {
        i64 ord = 1;
        const auto& cs = group_->components();
        for (std::size_t j = 0; j < cs.size(); ++j) ord = lcm(ord, cs[j].order / gcd(exponents_[j], cs[j].order));
        return ord;
    }

    friend DirichletCharacter operator*(const DirichletCharacter& a, const DirichletCharacter& b) {
        if (a.group_->modulus() != b.group_->modulus()) throw std::invalid_argument("character product needs a common modulus");
        std::vector<i64> e(a.exponents_.size());
        for (std::size_t j = 0; j < e.size(); ++j) e[j] = a.exponents_[j] + b.exponents_[j];
        return {a.group_, std::move(e)};
    }

    friend bool operator==(const DirichletCharacter& a, const DirichletCharacter& b) {
        return a.modulus() == b.modulus() && a.exponents_ == b.exponents_;
    }

private:
    std::shared_ptr<const CharacterGroup> group_;
    std::vector<i64> exponents_;
};

inline DirichletCharacter CharacterGroup::character(i64 index) const {
    if (index < 0 || index >= size_) throw std::out_of_range("character index outside [0, phi(q))");
    std::vector<i64> e(components_.size());
    for (std::size_t j = components_.size(); j-- > 0;) {
        e[j] = index % components_[j].order;
        index /= components_[j].order;
    }
    return {shared_from_this(), std::move(e)};
}

inline DirichletCharacter CharacterGroup::principal() const {
    return {shared_from_this(), std::vector<i64>(components_.size(), 0)};
}

inline std::vector<DirichletCharacter> CharacterGroup::characters() const {
    std::vector<DirichletCharacter> out;
    out.reserve(static_cast<std::size_t>(size_));
    for (i64 i = 0; i < size_; ++i) out.push_back(character(i));
    return out;
}

inline std::vector<DirichletCharacter> character_group(i64 q) { return CharacterGroup::create(q)->characters(); }

/// The character chi * chi_0 mod q induced from chi mod d, d | q.
inline DirichletCharacter induce(const DirichletCharacter& chi, const std::shared_ptr<const CharacterGroup>& target) {
    const i64 d = chi.modulus();
    const i64 q = target->modulus();
    if (q % d != 0) throw std::invalid_argument("induce: source modulus must divide target modulus");
    const auto& cs = target->components();
    std::vector<i64> e(cs.size());
    const i64 lsrc = chi.group().exponent();
    for (std::size_t j = 0; j < cs.size(); ++j) {
        const auto t = chi.phase(cs[j].generator);
        if (!t) throw std::logic_error("induce: lifted generator is not a unit");
        // chi(g_j) = e(t / lsrc) must be an order_j-th root of unity
        const i64 num = checked_mul(*t, cs[j].order);
        if (num % lsrc != 0) throw std::logic_error("induce: inconsistent character value");
        e[j] = num / lsrc;
    }
    return {target, std::move(e)};
}

inline DirichletCharacter induce(const DirichletCharacter& chi, i64 q) { return induce(chi, CharacterGroup::create(q)); }

}  // namespace rsd
