#include "paqft/deformation.hpp"

#include <algorithm>

namespace paqft {

namespace {

Rat falling(int e, int r) {
    Rat out(1);
    for (int k = 0; k < r; ++k) out *= (e - k);
    return out;
}

Rat factorial(int n) {
    Rat out(1);
    for (int k = 2; k <= n; ++k) out *= k;
    return out;
}

std::vector<size_t> field_slots(Monomial const& m) {
    std::vector<size_t> out;
    for (size_t i = 0; i < m.factors.size(); ++i)
        if (m.factors[i].tag == Factor::Tag::Field) out.push_back(i);
    return out;
}

// Renames bound points of b that collide with labels of a.
Monomial separate_bound(Monomial const& a, Monomial b) {
    for (auto const& [p, integ] : std::map<std::string, bool>(b.points)) {
        if (!integ || !a.points.count(p)) continue;
        int n = 0;
        std::string cand;
        do {
            cand = p + "'" + std::to_string(++n);
        } while (a.points.count(cand) || b.points.count(cand));
        b.rename_point(p, cand);
    }
    return b;
}

struct ContractionBuilder {
    Monomial const& ma;
    Monomial mb;
    KernelKind kind;
    std::vector<size_t> sa, sb;
    std::vector<std::vector<int>> c;  // contraction multiplicities
    std::vector<Monomial>& out;

    void emit() {
        int k = 0;
        Rat weight(1);
        std::vector<int> ra(sa.size(), 0), rb(sb.size(), 0);
        for (size_t i = 0; i < sa.size(); ++i)
            for (size_t j = 0; j < sb.size(); ++j) {
                k += c[i][j];
                ra[i] += c[i][j];
                rb[j] += c[i][j];
                weight /= factorial(c[i][j]);
            }
        for (size_t i = 0; i < sa.size(); ++i)
            weight *= falling(ma.factors[sa[i]].exponent, ra[i]);
        for (size_t j = 0; j < sb.size(); ++j)
            weight *= falling(mb.factors[sb[j]].exponent, rb[j]);

        Monomial r;
        r.coeff = ma.coeff * mb.coeff * CoeffElem(GaussRat(weight));
        r.lam = ma.lam + mb.lam;
        r.hbar = ma.hbar + mb.hbar + k;
        r.points = ma.points;
        r.points.insert(mb.points.begin(), mb.points.end());

        auto push_side = [&](Monomial const& src, std::vector<size_t> const& slots,
                             std::vector<int> const& used) {
            for (size_t i = 0; i < src.factors.size(); ++i) {
                Factor f = src.factors[i];
                auto it = std::find(slots.begin(), slots.end(), i);
                if (it != slots.end()) {
                    f.exponent -= used[it - slots.begin()];
                    if (f.exponent == 0) continue;
                }
                r.factors.push_back(std::move(f));
            }
        };
        push_side(ma, sa, ra);
        push_side(mb, sb, rb);

        for (size_t i = 0; i < sa.size(); ++i) {
            for (size_t j = 0; j < sb.size(); ++j) {
                if (c[i][j] == 0) continue;
                Factor const& fa = ma.factors[sa[i]];
                Factor const& fb = mb.factors[sb[j]];
                Factor ker =
                    Factor::kernel(kind, fa.point, fb.point, c[i][j], fa.derivs, fb.derivs);
                ker.p0_1 = fa.p0;
                ker.p0_2 = fb.p0;
                r.factors.push_back(std::move(ker));
            }
        }
        out.push_back(std::move(r));
    }

    void recurse(size_t i, size_t j) {
        if (i == sa.size()) {
            emit();
            return;
        }
        size_t ni = j + 1 == sb.size() ? i + 1 : i;
        size_t nj = j + 1 == sb.size() ? 0 : j + 1;
        int cap_a = ma.factors[sa[i]].exponent;
        for (size_t jj = 0; jj < j; ++jj) cap_a -= c[i][jj];
        int cap_b = mb.factors[sb[j]].exponent;
        for (size_t ii = 0; ii < i; ++ii) cap_b -= c[ii][j];
        for (int v = 0; v <= std::min(cap_a, cap_b); ++v) {
            c[i][j] = v;
            recurse(ni, nj);
        }
        c[i][j] = 0;
    }
};

}  // namespace

Functional star(Functional const& f, Functional const& g, KernelKind kind) {
    if (kind == KernelKind::Zero) return mul(f, g);
    SymExpr out;
    out.truncation = f.truncation
                         ? (g.truncation ? std::optional<int>(std::min(*f.truncation, *g.truncation))
                                         : f.truncation)
                         : g.truncation;
    for (auto const& ma : f.monomials) {
        for (auto const& mb0 : g.monomials) {
            Monomial mb = separate_bound(ma, mb0);
            for (auto const& [p, integ] : mb.points) {
                auto it = ma.points.find(p);
                if (it != ma.points.end() && it->second != integ)
                    throw StructuralError("point " + p + " bound on one side, free on the other");
            }
            ContractionBuilder cb{ma, mb, kind, field_slots(ma), field_slots(mb), {}, out.monomials};
            if (cb.sa.empty() || cb.sb.empty()) {
                cb.c.assign(std::max<size_t>(cb.sa.size(), 1),
                            std::vector<int>(std::max<size_t>(cb.sb.size(), 1), 0));
                cb.emit();
            } else {
                cb.c.assign(cb.sa.size(), std::vector<int>(cb.sb.size(), 0));
                cb.recurse(0, 0);
            }
        }
    }
    return canonicalize(out);
}

namespace {

// <K, delta^2/(delta phi delta phi)> applied once.
SymExpr double_derivative(SymExpr const& e, KernelKind kind) {
    return map_monomials(e, [&](Monomial const& m) {
        std::vector<Monomial> out;
        auto slots = field_slots(m);
        for (size_t a = 0; a < slots.size(); ++a) {
            for (size_t b = 0; b < slots.size(); ++b) {
                Factor const& fa = m.factors[slots[a]];
                Factor const& fb = m.factors[slots[b]];
                int ea = fa.exponent, eb = fb.exponent;
                Rat weight = a == b ? Rat(ea) * (ea - 1) : Rat(ea) * eb;
                if (weight == 0) continue;
                Monomial r = m;
                r.coeff = r.coeff * CoeffElem(GaussRat(weight));
                Factor ker =
                    Factor::kernel(kind, fa.point, fb.point, 1, fa.derivs, fb.derivs);
                ker.p0_1 = fa.p0;
                ker.p0_2 = fb.p0;
                r.factors[slots[a]].exponent -= 1;
                r.factors[slots[b]].exponent -= 1;
                r.factors.push_back(std::move(ker));
                r.factors.erase(std::remove_if(r.factors.begin(), r.factors.end(),
                                               [](Factor const& f) {
                                                   return f.tag == Factor::Tag::Field &&
                                                          f.exponent == 0;
                                               }),
                                r.factors.end());
                out.push_back(std::move(r));
            }
        }
        return out;
    });
}

}  // namespace

Functional wick_order(Functional const& f, int sign, KernelKind kind) {
    SymExpr acc = canonicalize(f);
    SymExpr power = acc;
    GaussRat step(Rat(sign, 2));
    GaussRat coeff(1);
    for (int m = 1;; ++m) {
        power = double_derivative(power, kind);
        if (power.is_zero()) break;
        coeff = coeff * step / GaussRat(Rat(m));
        acc = add(acc, mul_scalar(CoeffElem(coeff), power));
    }
    return acc;
}

Functional time_ordered(std::vector<Functional> const& fs) {
    if (fs.empty()) return identity_functional();
    Functional acc = fs.front();
    for (size_t i = 1; i < fs.size(); ++i) acc = star(acc, fs[i], KernelKind::HF);
    return acc;
}

}  // namespace paqft
