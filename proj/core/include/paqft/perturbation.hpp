#pragma once

// S-matrix, its star-inverse, the Bogoliubov map and interacting vacuum
// expectation values, truncated at a configurable order in the coupling.

#include "paqft/deformation.hpp"

namespace paqft {

struct InteractionSpec {
    int n = 4;               // field power, 3 or 4
    std::string testfn = "h";

    InteractionSpec() = default;
    InteractionSpec(int n_, std::string h = "h") : n(n_), testfn(std::move(h)) {
        if (n != 3 && n != 4) throw StructuralError("interaction power must be 3 or 4");
    }
};

// V = -(1/n!) * integral of phi^n h; carries no explicit lambda power (the
// series prefactors supply lambda^k).
Functional interaction_functional(InteractionSpec const& v);

// sum_{k<=N} (1/k!) (i lambda/hbar)^k V *_F ... *_F V
Functional smatrix(InteractionSpec const& v, int order);
// same with (-i lambda/hbar)^k and the anti-Feynman kernel
Functional smatrix_inverse(InteractionSpec const& v, int order);

// S^{-1}(lambda V) *_H [ S(lambda V) *_F F ], truncated at lambda^order.
Functional bogoliubov(Functional const& f, InteractionSpec const& v, int order);

// vacuum_eval of the Bogoliubov image: only maximally contracted terms remain.
SymExpr interacting_vev(Functional const& f, InteractionSpec const& v, int order);

}  // namespace paqft
