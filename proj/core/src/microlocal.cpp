#include "paqft/microlocal.hpp"

#include "paqft/expr.hpp"

namespace paqft {

DistDescriptor DistDescriptor::sigma(Rat p, int dim, int codim, int log_power) {
    DistDescriptor d;
    d.sigma_power = std::move(p);
    d.log_power = log_power;
    d.dim = dim;
    d.codim = codim;
    d.validate();
    return d;
}

DistDescriptor DistDescriptor::delta(int order, int dim) {
    DistDescriptor d;
    d.delta_model = true;
    d.delta_order = order;
    d.dim = dim;
    d.codim = dim;  // point singularity
    d.validate();
    return d;
}

DistDescriptor DistDescriptor::feynman_power(int k, int dim) {
    // sigma^{k(2-d)/2}; the diagonal of M x M has codimension d.
    Rat p = Rat(k) * (dim - 2) / 2;
    int logs = dim == 2 ? k : 0;
    return sigma(p, dim, dim, logs);
}

void DistDescriptor::validate() const {
    if (dim < 2 || codim < 1) throw StructuralError("invalid dimension/codimension");
    if (delta_model && (sigma_power != 0 || log_power != 0))
        throw StructuralError("descriptor mixes sigma and delta models");
    if (delta_order < 0 || log_power < 0) throw StructuralError("negative order");
}

Rat scaling_degree(DistDescriptor const& d) {
    d.validate();
    if (d.delta_model) return Rat(d.dim + d.delta_order);
    return 2 * d.sigma_power;  // logs contribute zero
}

Rat degree_of_divergence(DistDescriptor const& d) { return scaling_degree(d) - d.codim; }

ExtensionReport classify_extension(DistDescriptor const& d) {
    Rat sd = scaling_degree(d);
    ExtensionReport r;
    if (sd < d.codim) {
        r.cls = ExtensionClass::Unique;
        return r;
    }
    r.cls = ExtensionClass::Ambiguous;
    Rat rho = degree_of_divergence(d);
    r.family_order = static_cast<int>(rho.convert_to<long>());
    r.family_size = r.family_order + 1;
    return r;
}

CoeffElem v1_formula() {
    CoeffElem out = CoeffElem::frac(1, 8) * CoeffElem::symbol(sym::m2, 2);
    CoeffElem c720 = CoeffElem::frac(1, 720);
    out = out + c720 * CoeffElem::symbol(sym::weyl2);
    out = out + c720 * CoeffElem::symbol(sym::ric2);
    out = out - c720 * CoeffElem::frac(1, 3) * CoeffElem::symbol(sym::rsq);
    out = out + c720 * CoeffElem::symbol(sym::boxR);
    return out;
}

CoeffElem v1_minkowski() { return CoeffElem::frac(1, 8) * CoeffElem::symbol(sym::m2, 2); }

std::vector<ScalingRow> scaling_table(int dim, int k_min, int k_max) {
    std::vector<ScalingRow> rows;
    for (int k = k_min; k <= k_max; ++k) {
        DistDescriptor d = DistDescriptor::feynman_power(k, dim);
        rows.push_back({k, scaling_degree(d), degree_of_divergence(d), classify_extension(d)});
    }
    return rows;
}

}  // namespace paqft
