#pragma once

// Rule engine for covariant-derivative calculus and kernel identities:
// Leibniz divergence, curvature commutator, equations of motion, Dirac
// collapse, metric traces, kernel relations and background simplifications.
// Rules are one-way and staged; every stage is an exact identity, so the
// engine never discards information silently (boundary terms are split off
// explicitly, not dropped).

#include "paqft/functional.hpp"

#include <set>
#include <utility>

namespace paqft {

enum class Regime { Generic, Minkowski, MaximallySymmetric };

// Normalization of the fundamental-solution property of the Feynman-type
// parametrix: P0 applied to H_F yields delta or i*delta depending on the
// convention in force (the anti-Feynman kernel picks up the conjugate).
enum class P0Convention { Delta, IDelta };

struct BackgroundDescriptor {
    Regime regime = Regime::Generic;
    P0Convention convention = P0Convention::Delta;
};

struct RuleSet {
    BackgroundDescriptor background;
    // Named rules switched off. Kernel-basis expansion is opt-in: most
    // pipelines stay in the {H, H_F, H_AF} basis and only the normal-form
    // entry point turns it on.
    std::set<std::string> disabled = {"kernel-relations", "symmetrize"};
    int iteration_cap = 64;

    bool active(std::string const& name) const { return !disabled.count(name); }
};

std::vector<std::string> const& registered_rules();

// Minimal key=value configuration (regime, convention, enable/disable lines).
RuleSet parse_ruleset(std::string const& text);

// Distributes the raised covariant gradient with the given index label over
// every factor slot located at the point `at`. The index must not occur in e.
SymExpr apply_divergence(SymExpr const& e, std::string const& index, std::string const& at);

// Staged application: derivative normalization -> equations of motion ->
// Dirac collapse -> Bianchi / Einstein expansion / metric contraction ->
// optional kernel relations -> background. Throws on iteration-cap overflow.
SymExpr apply_rules(SymExpr const& e, RuleSet const& rs);

// Contracts the two free indices of every monomial with the inverse metric at
// `at` and runs the rule pipeline (trace relations included).
SymExpr trace_contract(SymExpr const& e, std::string const& at, RuleSet const& rs);

// Classical on-shell reduction: Field factors carrying P0 or an innermost box
// are rewritten through the equation of motion. n = nullopt means the free
// theory (P0 phi = 0).
SymExpr reduce_modulo_eom(SymExpr const& e, std::optional<int> n,
                          RuleSet const& rs = RuleSet{});

// Expands Feynman-type kernels over {H, Delta_R, Delta_A}, orients kernel
// arguments through the exchange relations, applies the disjoint-support rule
// and symmetrizes integration points sharing a test-function label.
SymExpr kernel_normal_form(SymExpr const& e, RuleSet rs = RuleSet{});

// Splits off monomials carrying derivative-decorated test functions (they
// vanish in the adiabatic limit). Returns (kept, boundary).
std::pair<SymExpr, SymExpr> split_boundary_terms(SymExpr const& e);

}  // namespace paqft
