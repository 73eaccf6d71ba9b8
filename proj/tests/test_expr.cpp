#include "doctest.h"

#include "paqft/emit.hpp"
#include "paqft/expr.hpp"
#include "paqft/functional.hpp"
#include "test_util.hpp"

#include <random>

using namespace paqft;

namespace {

// phi(x) phi(y) H(x,y) f(x) f(y), both points integrated.
SymExpr two_point_sample(std::string const& a, std::string const& b) {
    return single(make_monomial(CoeffElem(1),
                                {Factor::field(a), Factor::field(b),
                                 Factor::kernel(KernelKind::H, a, b),
                                 Factor::test_fn("f", a), Factor::test_fn("f", b)},
                                {a, b}));
}

}  // namespace

TEST_CASE("canonicalize is idempotent on random expressions") {
    testutil::Rng rng(11);
    for (int it = 0; it < 40; ++it) {
        SymExpr e = testutil::random_functional(rng, 4, 3, true);
        SymExpr c1 = canonicalize(e);
        SymExpr c2 = canonicalize(c1);
        CHECK(equal(c1, c2));
        for (size_t i = 0; i < c1.monomials.size(); ++i)
            CHECK(c1.monomials[i].key() == c2.monomials[i].key());
    }
}

TEST_CASE("dummy relabeling yields identical canonical bytes") {
    SymExpr base = two_point_sample("x", "y");
    std::string canon = to_json(base).dump();
    std::mt19937 rng(3);
    char const* labels[] = {"x", "y", "u", "v", "w", "q", "p7", "zz"};
    for (int it = 0; it < 100; ++it) {
        std::string a = labels[rng() % 8], b = labels[rng() % 8];
        if (a == b) continue;
        CHECK(to_json(two_point_sample(a, b)).dump() == canon);
    }
}

TEST_CASE("kernel orientation is not symmetrized by canonicalize alone") {
    // H(x,y) + H(y,x) with an orientation-pinning spectator phi(x): the pure
    // structural canonicalizer must keep two distinct monomials.
    Monomial m1 = make_monomial(CoeffElem(1),
                                {Factor::field("x"), Factor::kernel(KernelKind::H, "x", "y"),
                                 Factor::test_fn("f", "x"), Factor::test_fn("f", "y")},
                                {"x", "y"});
    Monomial m2 = make_monomial(CoeffElem(1),
                                {Factor::field("x"), Factor::kernel(KernelKind::H, "y", "x"),
                                 Factor::test_fn("f", "x"), Factor::test_fn("f", "y")},
                                {"x", "y"});
    SymExpr e;
    e.monomials = {m1, m2};
    CHECK(canonicalize(e).monomials.size() == 2);
}

TEST_CASE("additive inverse and zero elimination") {
    testutil::Rng rng(5);
    SymExpr e = testutil::random_functional(rng);
    CHECK(add(e, negate(e)).is_zero());
    SymExpr z = mul_scalar(CoeffElem(0), e);
    CHECK(z.is_zero());
    CHECK(equal(add(e, z), e));
}

TEST_CASE("equality is blind to bound-point names") {
    SymExpr a = smeared_power("f", 1, "x");
    SymExpr b = smeared_power("f", 1, "xprime");
    CHECK(equal(a, b));
    SymExpr c = smeared_power("g", 1, "x");
    CHECK(!equal(a, c));
}

TEST_CASE("scalar multiplication distributes over addition") {
    testutil::Rng rng(13);
    for (int it = 0; it < 30; ++it) {
        SymExpr e1 = testutil::random_functional(rng);
        SymExpr e2 = testutil::random_functional(rng);
        CoeffElem c = testutil::random_coeff(rng);
        CHECK(equal(mul_scalar(c, add(e1, e2)), add(mul_scalar(c, e1), mul_scalar(c, e2))));
    }
}

TEST_CASE("truncation bounds every operation result") {
    SymExpr e = smeared_power("f", 2);
    e.truncation = 1;
    Monomial high = make_monomial(CoeffElem(1), {Factor::field("x"), Factor::test_fn("f", "x")},
                                  {"x"}, 2);
    e.monomials.push_back(high);
    SymExpr c = canonicalize(e);
    for (auto const& m : c.monomials) CHECK(m.lam <= 1);
}

TEST_CASE("structural validation rejects malformed factors") {
    Monomial m = make_monomial(CoeffElem(1),
                               {Factor::geom(GeomTensor::Metric, {{"mu", false}}, "z")}, {});
    SymExpr e;
    e.monomials.push_back(m);
    CHECK_THROWS_AS(check_well_formed(e), StructuralError);

    Monomial ok = make_monomial(
        CoeffElem(1), {Factor::geom(GeomTensor::Metric, {{"mu", false}, {"nu", false}}, "z")}, {});
    SymExpr e2;
    e2.monomials.push_back(ok);
    CHECK_NOTHROW(check_well_formed(e2));
}

TEST_CASE("pointwise product keeps bound variables apart") {
    SymExpr a = smeared_power("f", 1, "x");
    SymExpr p = mul(a, a);
    REQUIRE(p.monomials.size() == 1);
    CHECK(p.monomials[0].points.size() == 2);
    CHECK(p.monomials[0].field_degree() == 2);
}

TEST_CASE("json and latex emission are deterministic") {
    SymExpr e = two_point_sample("x", "y");
    CHECK(to_json(e).dump() == to_json(canonicalize(e)).dump());
    CHECK(to_latex(e) == to_latex(canonicalize(e)));
    CHECK(latex_document(to_latex(e)).find("\\documentclass") == 0);
}
