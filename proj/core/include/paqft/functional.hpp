#pragma once

// Polynomial functionals of the field configuration: functional derivatives,
// pointwise products, vacuum evaluation and generator builders. A Functional
// is a SymExpr whose Field factors stand for the configuration phi.

#include "paqft/expr.hpp"

namespace paqft {

using Functional = SymExpr;

// Maximal total Field degree over the monomials.
int field_degree(Functional const& f);

// Derivative with respect to phi at a fresh point p (p becomes a free point of
// the result). Plain field factors at an integrated point collapse the point
// onto p; decorated or P0-carrying fields keep an explicit decorated Dirac
// delta so that no integration by parts is performed implicitly.
Functional functional_derivative(Functional const& f, std::string const& p);

Functional pointwise_product(Functional const& a, Functional const& b);

// Keeps only monomials free of Field factors (evaluation at phi = 0).
SymExpr vacuum_eval(Functional const& f);

// Generators.
Functional identity_functional();
// smeared field power: integral of testfn * phi^k over one point
Functional smeared_power(std::string const& testfn, int k, std::string const& point = "x");
// smeared product of two decorated field slots at one point
Functional smeared_bilinear(std::string const& testfn, std::vector<DIdx> derivs_a,
                            std::vector<DIdx> derivs_b, std::string const& point = "x");

// Convenience monomial assembly (points inferred from factors; binding given
// by the integrated list).
Monomial make_monomial(CoeffElem coeff, std::vector<Factor> factors,
                       std::vector<std::string> const& integrated, int lam = 0, int hbar = 0);
SymExpr single(Monomial m, std::optional<int> trunc = std::nullopt);

}  // namespace paqft
