#pragma once

// Shared helpers for randomized property tests: deterministic RNG, random
// polynomial functionals, and an independent sequential-contraction oracle
// for the deformed products.

#include "paqft/deformation.hpp"
#include "paqft/functional.hpp"

#include <algorithm>
#include <random>
#include <vector>

namespace paqft::testutil {

using Rng = std::mt19937;

inline CoeffElem random_coeff(Rng& rng) {
    std::uniform_int_distribution<int> num(-5, 5), den(1, 4);
    CoeffElem c(GaussRat(Rat(num(rng), den(rng)), Rat(num(rng), den(rng))));
    if (c.is_zero()) c = CoeffElem(1);
    if (rng() % 3 == 0) c = c * CoeffElem::symbol(sym::m2, 1 + static_cast<int>(rng() % 2));
    return c;
}

// Random polynomial functional: sum of a few smeared field powers, optionally
// with derivative decorations on bilinear terms.
inline Functional random_functional(Rng& rng, int max_terms = 3, int max_power = 3,
                                    bool decorated = false) {
    char const* fns[] = {"f", "g", "h"};
    Functional acc = SymExpr::zero();
    int terms = 1 + static_cast<int>(rng() % max_terms);
    for (int t = 0; t < terms; ++t) {
        int k = 1 + static_cast<int>(rng() % max_power);
        Functional base;
        if (decorated && rng() % 2 == 0) {
            std::vector<DIdx> da, db;
            if (rng() % 2) da.push_back({"mu", false});
            if (rng() % 2) db.push_back({"nu", false});
            base = smeared_bilinear(fns[rng() % 3], da, db);
        } else {
            base = smeared_power(fns[rng() % 3], k);
        }
        acc = add(acc, mul_scalar(random_coeff(rng), base));
    }
    return acc;
}

// Independent star-product oracle: applies the single-contraction operator
// sequentially k times to the pair (left, right) and divides by k!, instead
// of enumerating contraction multidegrees in one pass as the engine does.
inline Functional star_oracle(Functional const& f, Functional const& g, KernelKind kind) {
    if (kind == KernelKind::Zero) return mul(f, g);

    struct Pair {
        Monomial a, b;  // kernels produced so far are stored on side a
    };

    std::vector<Pair> pairs;
    for (auto const& ma : f.monomials)
        for (auto const& mb : g.monomials) {
            Monomial b = mb;
            for (auto const& [p, integ] : mb.points) {
                if (!integ || !ma.points.count(p)) continue;
                int n = 0;
                std::string cand;
                do {
                    cand = p + "~" + std::to_string(++n);
                } while (ma.points.count(cand) || b.points.count(cand));
                b.rename_point(p, cand);
            }
            pairs.push_back({ma, b});
        }

    auto contract_once = [kind](std::vector<Pair> const& in) {
        std::vector<Pair> out;
        for (auto const& pr : in) {
            for (size_t i = 0; i < pr.a.factors.size(); ++i) {
                if (pr.a.factors[i].tag != Factor::Tag::Field ||
                    pr.a.factors[i].exponent == 0)
                    continue;
                for (size_t j = 0; j < pr.b.factors.size(); ++j) {
                    if (pr.b.factors[j].tag != Factor::Tag::Field ||
                        pr.b.factors[j].exponent == 0)
                        continue;
                    Pair n = pr;
                    Factor& fa = n.a.factors[i];
                    Factor& fb = n.b.factors[j];
                    long w = static_cast<long>(fa.exponent) * fb.exponent;
                    n.a.coeff = n.a.coeff * CoeffElem(w);
                    Factor ker =
                        Factor::kernel(kind, fa.point, fb.point, 1, fa.derivs, fb.derivs);
                    ker.p0_1 = fa.p0;
                    ker.p0_2 = fb.p0;
                    n.a.hbar += 1;
                    fa.exponent -= 1;
                    fb.exponent -= 1;
                    n.a.factors.push_back(std::move(ker));
                    n.a.points[fb.point] = n.b.points.at(fb.point);
                    out.push_back(std::move(n));
                }
            }
        }
        return out;
    };

    auto merge = [](std::vector<Pair> const& in, Rat weight) {
        SymExpr e;
        for (auto const& pr : in) {
            Monomial m = pr.a;
            m.coeff = m.coeff * pr.b.coeff * CoeffElem(GaussRat(weight));
            m.lam += pr.b.lam;
            m.hbar += pr.b.hbar;
            for (auto const& fct : pr.b.factors) m.factors.push_back(fct);
            m.factors.erase(std::remove_if(m.factors.begin(), m.factors.end(),
                                           [](Factor const& x) {
                                               return x.tag == Factor::Tag::Field &&
                                                      x.exponent == 0;
                                           }),
                            m.factors.end());
            for (auto const& [p, integ] : pr.b.points) m.points[p] = integ;
            e.monomials.push_back(std::move(m));
        }
        return canonicalize(e);
    };

    Functional total = SymExpr::zero();
    Rat kfact(1);
    std::vector<Pair> cur = pairs;
    total = add(total, merge(cur, Rat(1)));
    for (int k = 1; k <= 32; ++k) {
        cur = contract_once(cur);
        if (cur.empty()) break;
        kfact *= k;
        total = add(total, merge(cur, Rat(1) / kfact));
    }
    total.truncation = f.truncation && g.truncation
                           ? std::optional<int>(std::min(*f.truncation, *g.truncation))
                           : (f.truncation ? f.truncation : g.truncation);
    return canonicalize(total);
}

}  // namespace paqft::testutil
