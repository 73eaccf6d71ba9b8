#pragma once

// Steinmann scaling-degree calculus on model diagonal singularities, the
// extension classification, and the evaluation of the Hadamard coefficient
// v1 at coinciding points.

#include "paqft/coeff.hpp"

#include <string>
#include <vector>

namespace paqft {

// Model singularity near a submanifold of codimension c in dimension d.
// Exactly one of the sigma-model (kernel ~ sigma^{-p} log^q sigma) and the
// delta-model (delta^{(j)}) is active.
struct DistDescriptor {
    bool delta_model = false;
    Rat sigma_power{0};  // p in sigma^{-p}
    int log_power = 0;   // q
    int delta_order = 0; // j
    int dim = 4;         // ambient dimension d
    int codim = 4;       // codimension c

    static DistDescriptor sigma(Rat p, int dim, int codim, int log_power = 0);
    static DistDescriptor delta(int order, int dim);
    // Leading diagonal singularity of HF^k in dimension d: sigma^{k(2-d)/2};
    // in d=2 the singularity is purely logarithmic.
    static DistDescriptor feynman_power(int k, int dim);

    void validate() const;
};

// sigma-model: 2p (sigma scales quadratically; logs add nothing).
// delta-model at a point in R^n: n + j.
Rat scaling_degree(DistDescriptor const& d);

// rho = sd - codim. The source text prints floor(codim - sd) but its worked
// value rho_{k,F} = 2k - 4 in d = 4 requires sd - codim; reports carry a
// suspected-sign-typo flag alongside the number.
Rat degree_of_divergence(DistDescriptor const& d);
inline constexpr char const* kDivergenceFormulaNote =
    "degree computed as sd - codim; the printed floor(codim - sd) is a suspected sign typo";

enum class ExtensionClass { Unique, Ambiguous };

struct ExtensionReport {
    ExtensionClass cls;
    // For the ambiguous case: the difference of two extensions is a span of
    // delta^{(j)} on the submanifold, j = 0..family_order.
    int family_order = -1;
    int family_size = 0;
};

ExtensionReport classify_extension(DistDescriptor const& d);

// v1 at coinciding points for xi = 1/6:
// m^4/8 + (1/720)(C^2 + Ric^2 - R^2/3 + Box R); Minkowski collapses to m^4/8.
CoeffElem v1_formula();
CoeffElem v1_minkowski();

struct ScalingRow {
    int k;
    Rat sd;
    Rat rho;
    ExtensionReport ext;
};

std::vector<ScalingRow> scaling_table(int dim, int k_min, int k_max);

}  // namespace paqft
