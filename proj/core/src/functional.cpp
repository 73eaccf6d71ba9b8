#include "paqft/functional.hpp"

#include <algorithm>
#include <set>

namespace paqft {

int field_degree(Functional const& f) {
    int deg = 0;
    for (auto const& m : f.monomials) deg = std::max(deg, m.field_degree());
    return deg;
}

Functional functional_derivative(Functional const& f, std::string const& p) {
    for (auto const& m : f.monomials)
        if (m.points.count(p))
            throw StructuralError("derivative point label already bound: " + p);

    return map_monomials(f, [&](Monomial const& m) {
        std::vector<Monomial> out;
        for (size_t i = 0; i < m.factors.size(); ++i) {
            Factor const& f0 = m.factors[i];
            if (f0.tag != Factor::Tag::Field) continue;
            Monomial d = m;
            Factor& slot = d.factors[i];
            d.coeff = d.coeff * CoeffElem(slot.exponent);
            slot.exponent -= 1;
            bool plain = slot.derivs.empty() && !slot.p0;
            bool integrated = m.points.at(f0.point);
            if (plain && integrated) {
                // Collapse the integration variable onto p.
                if (slot.exponent == 0) d.factors.erase(d.factors.begin() + i);
                d.rename_point(f0.point, p);
                d.points[p] = false;
            } else {
                Factor delta = Factor::kernel(KernelKind::DiracDelta, f0.point, p, 1, f0.derivs);
                delta.p0_1 = f0.p0;
                if (slot.exponent == 0)
                    d.factors.erase(d.factors.begin() + i);
                else {
                    // Remaining power is undecorated phi^k at the same point.
                    slot.derivs.clear();
                    slot.p0 = false;
                }
                d.factors.push_back(std::move(delta));
                d.points[p] = false;
            }
            out.push_back(std::move(d));
        }
        return out;
    });
}

Functional pointwise_product(Functional const& a, Functional const& b) { return mul(a, b); }

SymExpr vacuum_eval(Functional const& f) {
    SymExpr out;
    out.truncation = f.truncation;
    for (auto const& m : f.monomials)
        if (!m.has_fields()) out.monomials.push_back(m);
    return canonicalize(out);
}

Functional identity_functional() { return SymExpr::constant(CoeffElem(1)); }

Monomial make_monomial(CoeffElem coeff, std::vector<Factor> factors,
                       std::vector<std::string> const& integrated, int lam, int hbar) {
    Monomial m;
    m.coeff = std::move(coeff);
    m.lam = lam;
    m.hbar = hbar;
    m.factors = std::move(factors);
    std::set<std::string> bound(integrated.begin(), integrated.end());
    for (auto const& f : m.factors) {
        if (f.tag == Factor::Tag::Kernel) {
            m.points[f.pt1] = bound.count(f.pt1) > 0;
            m.points[f.pt2] = bound.count(f.pt2) > 0;
        } else {
            m.points[f.point] = bound.count(f.point) > 0;
        }
    }
    return m;
}

SymExpr single(Monomial m, std::optional<int> trunc) {
    SymExpr e;
    e.truncation = trunc;
    e.monomials.push_back(std::move(m));
    return canonicalize(e);
}

Functional smeared_power(std::string const& testfn, int k, std::string const& point) {
    return single(make_monomial(CoeffElem(1),
                                {Factor::field(point, k), Factor::test_fn(testfn, point)},
                                {point}));
}

Functional smeared_bilinear(std::string const& testfn, std::vector<DIdx> derivs_a,
                            std::vector<DIdx> derivs_b, std::string const& point) {
    return single(make_monomial(
        CoeffElem(1),
        {Factor::field(point, 1, std::move(derivs_a)), Factor::field(point, 1, std::move(derivs_b)),
         Factor::test_fn(testfn, point)},
        {point}));
}

}  // namespace paqft
