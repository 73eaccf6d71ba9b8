#include "doctest.h"

#include "paqft/microlocal.hpp"

using namespace paqft;

TEST_CASE("scaling degrees of the model singularities") {
    CHECK(scaling_degree(DistDescriptor::delta(0, 4)) == 4);
    CHECK(scaling_degree(DistDescriptor::delta(0, 7)) == 7);
    CHECK(scaling_degree(DistDescriptor::delta(2, 4)) == 6);
    // constant function
    CHECK(scaling_degree(DistDescriptor::sigma(Rat(0), 4, 4)) == 0);
    // Feynman powers: sd(HF^k) = (d-2)k
    for (int k = 1; k <= 5; ++k) {
        CHECK(scaling_degree(DistDescriptor::feynman_power(k, 4)) == 2 * k);
        CHECK(scaling_degree(DistDescriptor::feynman_power(k, 6)) == 4 * k);
        CHECK(scaling_degree(DistDescriptor::feynman_power(k, 2)) == 0);
    }
}

TEST_CASE("degree of divergence for Feynman powers in four dimensions") {
    CHECK(degree_of_divergence(DistDescriptor::feynman_power(1, 4)) == -2);
    CHECK(degree_of_divergence(DistDescriptor::feynman_power(2, 4)) == 0);
    CHECK(degree_of_divergence(DistDescriptor::feynman_power(3, 4)) == 2);
}

TEST_CASE("extension classification follows the sd/codim threshold") {
    // unique iff sd < codim
    for (int k = 1; k <= 6; ++k) {
        auto d = DistDescriptor::feynman_power(k, 4);
        auto r = classify_extension(d);
        CHECK((r.cls == ExtensionClass::Unique) == (scaling_degree(d) < d.codim));
    }
    auto hf2 = classify_extension(DistDescriptor::feynman_power(2, 4));
    CHECK(hf2.cls == ExtensionClass::Ambiguous);
    CHECK(hf2.family_order == 0);
    CHECK(hf2.family_size == 1);

    auto mild = classify_extension(DistDescriptor::sigma(Rat(1, 2), 4, 4));
    CHECK(mild.cls == ExtensionClass::Unique);

    // two dimensions: only logarithmic singularities, always extendable
    for (int k = 1; k <= 8; ++k)
        CHECK(classify_extension(DistDescriptor::feynman_power(k, 2)).cls ==
              ExtensionClass::Unique);
}

TEST_CASE("divergence degree grows by d-2 per Feynman power") {
    for (int d : {3, 4, 6}) {
        for (int k = 1; k <= 4; ++k) {
            Rat step = degree_of_divergence(DistDescriptor::feynman_power(k + 1, d)) -
                       degree_of_divergence(DistDescriptor::feynman_power(k, d));
            CHECK(step == d - 2);
        }
    }
}

TEST_CASE("scaling table for the report") {
    auto rows = scaling_table(4, 1, 4);
    REQUIRE(rows.size() == 4);
    Rat expect[] = {Rat(-2), Rat(0), Rat(2), Rat(4)};
    for (size_t i = 0; i < rows.size(); ++i) CHECK(rows[i].rho == expect[i]);
}

TEST_CASE("hadamard coefficient at coinciding points") {
    CoeffElem v1 = v1_formula();
    CHECK(v1_minkowski() == CoeffElem::frac(1, 8) * CoeffElem::symbol(sym::m2, 2));
    // all-curvature-zero substitution collapses to the flat value
    CoeffElem flat = v1;
    for (auto const* s : {sym::weyl2, sym::ric2, sym::rsq, sym::boxR})
        flat = flat.substitute(s, CoeffElem(0));
    CHECK(flat == v1_minkowski());
    // four curvature monomials with weights {1,1,-1/3,1}/720
    auto check_coeff = [&](char const* s, Rat expect) {
        CoeffElem c = v1.collect(s)[1];
        CHECK(c == CoeffElem(GaussRat(expect)));
    };
    check_coeff(sym::weyl2, Rat(1, 720));
    check_coeff(sym::ric2, Rat(1, 720));
    check_coeff(sym::rsq, Rat(-1, 2160));
    check_coeff(sym::boxR, Rat(1, 720));
}

TEST_CASE("descriptor validation") {
    CHECK_THROWS(DistDescriptor::sigma(Rat(1), 1, 1));
    DistDescriptor bad = DistDescriptor::delta(0, 4);
    bad.sigma_power = 1;
    CHECK_THROWS(bad.validate());
}
