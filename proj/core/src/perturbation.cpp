#include "paqft/perturbation.hpp"

namespace paqft {

namespace {

Rat factorial(int n) {
    Rat out(1);
    for (int k = 2; k <= n; ++k) out *= k;
    return out;
}

Functional series(InteractionSpec const& v, int order, GaussRat unit, KernelKind kind) {
    Functional acc = identity_functional();
    acc.truncation = order;
    Functional v1 = interaction_functional(v);
    Functional chain = identity_functional();
    for (int k = 1; k <= order; ++k) {
        chain = k == 1 ? v1 : star(chain, v1, kind);
        GaussRat pref(1);
        for (int j = 0; j < k; ++j) pref = pref * unit;
        pref = pref / GaussRat(factorial(k));
        Functional term = mul_scalar(CoeffElem(pref), chain);
        for (auto& m : term.monomials) {
            m.lam += k;
            m.hbar -= k;
        }
        acc = add(acc, term);
    }
    return acc;
}

}  // namespace

Functional interaction_functional(InteractionSpec const& v) {
    Rat norm(-1);
    norm /= factorial(v.n);
    return mul_scalar(CoeffElem(GaussRat(norm)), smeared_power(v.testfn, v.n));
}

Functional smatrix(InteractionSpec const& v, int order) {
    return series(v, order, GaussRat::i(), KernelKind::HF);
}

Functional smatrix_inverse(InteractionSpec const& v, int order) {
    return series(v, order, -GaussRat::i(), KernelKind::HAF);
}

Functional bogoliubov(Functional const& f, InteractionSpec const& v, int order) {
    Functional ff = f;
    ff.truncation = ff.truncation ? std::min(*ff.truncation, order) : order;
    Functional right = star(smatrix(v, order), ff, KernelKind::HF);
    return star(smatrix_inverse(v, order), right, KernelKind::H);
}

SymExpr interacting_vev(Functional const& f, InteractionSpec const& v, int order) {
    return vacuum_eval(bogoliubov(f, v, order));
}

}  // namespace paqft
