#pragma once

// Deformed products star_K via the exponential contraction operator, Wick
// ordering maps and the time-ordered product.

#include "paqft/functional.hpp"

namespace paqft {

// F star_K G: sum over k-fold contractions of field slots of F against field
// slots of G through the kernel K, weight hbar^k with exact multiset
// combinatorics. K = Zero gives the pointwise product. Contractions pair the
// left factor's point with the kernel's first argument; derivative and P0
// decorations of the contracted slots transfer to the matching kernel slot.
Functional star(Functional const& f, Functional const& g, KernelKind k);

// e^{sign*(1/2) <K, delta^2/delta phi delta phi>}. sign=-1 with K=H is the
// abstract Wick ordering; the inverse map is sign=+1.
Functional wick_order(Functional const& f, int sign, KernelKind k = KernelKind::H);

// Iterated star_{HF}; symmetric under permutations modulo the kernel
// orientation rules of the rewrite module.
Functional time_ordered(std::vector<Functional> const& fs);

}  // namespace paqft
