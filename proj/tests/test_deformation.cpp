#include "doctest.h"

#include "paqft/deformation.hpp"
#include "test_util.hpp"

using namespace paqft;

TEST_CASE("squared-field star product has the three classic terms") {
    Functional a = smeared_power("f", 2, "x");
    Functional b = smeared_power("fp", 2, "y");
    Functional prod = star(a, b, KernelKind::H);
    REQUIRE(prod.monomials.size() == 3);

    Functional t0 = pointwise_product(a, b);
    Functional t1 = mul_scalar(
        CoeffElem(4),
        single(make_monomial(CoeffElem(1),
                             {Factor::field("x"), Factor::field("y"),
                              Factor::kernel(KernelKind::H, "x", "y"), Factor::test_fn("f", "x"),
                              Factor::test_fn("fp", "y")},
                             {"x", "y"}, 0, 1)));
    Functional t2 = mul_scalar(
        CoeffElem(2),
        single(make_monomial(CoeffElem(1),
                             {Factor::kernel(KernelKind::H, "x", "y", 2),
                              Factor::test_fn("f", "x"), Factor::test_fn("fp", "y")},
                             {"x", "y"}, 0, 2)));
    CHECK(equal(prod, add(add(t0, t1), t2)));
}

TEST_CASE("zero kernel gives the pointwise product") {
    testutil::Rng rng(3);
    for (int it = 0; it < 10; ++it) {
        Functional f = testutil::random_functional(rng);
        Functional g = testutil::random_functional(rng);
        CHECK(equal(star(f, g, KernelKind::Zero), pointwise_product(f, g)));
    }
}

TEST_CASE("star product matches the sequential-contraction oracle") {
    testutil::Rng rng(17);
    for (int it = 0; it < 25; ++it) {
        Functional f = testutil::random_functional(rng, 2, 3, true);
        Functional g = testutil::random_functional(rng, 2, 3, true);
        KernelKind k = it % 2 ? KernelKind::H : KernelKind::HF;
        CHECK(equal(star(f, g, k), testutil::star_oracle(f, g, k)));
    }
}

TEST_CASE("star product is associative for each kernel") {
    testutil::Rng rng(19);
    for (int it = 0; it < 30; ++it) {
        Functional f = testutil::random_functional(rng, 2, 2);
        Functional g = testutil::random_functional(rng, 2, 2);
        Functional e = testutil::random_functional(rng, 2, 2);
        KernelKind k = it % 2 ? KernelKind::H : KernelKind::HAF;
        CHECK(equal(star(star(f, g, k), e, k), star(f, star(g, e, k), k)));
    }
}

TEST_CASE("contractions trade two field powers for one hbar") {
    Functional f = smeared_power("f", 3);
    Functional g = smeared_power("g", 2);
    Functional p = star(f, g, KernelKind::H);
    for (auto const& m : p.monomials) CHECK(m.field_degree() + 2 * m.hbar == 5);
}

TEST_CASE("wick ordering fixes linear functionals") {
    Functional phi = smeared_power("f", 1);
    CHECK(equal(wick_order(phi, -1), phi));
}

TEST_CASE("smooth-kernel ordering map adds the coincidence-point trace") {
    Functional f2 = smeared_power("f", 2);
    Functional mapped = wick_order(f2, +1, KernelKind::W);
    Functional trace = single(make_monomial(
        CoeffElem(1), {Factor::kernel(KernelKind::W, "x", "x"), Factor::test_fn("f", "x")},
        {"x"}));
    CHECK(equal(mapped, add(f2, trace)));
}

TEST_CASE("wick ordering round-trips") {
    testutil::Rng rng(23);
    for (int it = 0; it < 40; ++it) {
        Functional f = testutil::random_functional(rng, 3, 3);
        CHECK(equal(wick_order(wick_order(f, +1), -1), f));
    }
}

TEST_CASE("time-ordered product base cases") {
    testutil::Rng rng(29);
    Functional f = testutil::random_functional(rng);
    Functional g = testutil::random_functional(rng);
    CHECK(equal(time_ordered({f}), f));
    CHECK(equal(time_ordered({f, g}), star(f, g, KernelKind::HF)));
    CHECK(equal(time_ordered({}), identity_functional()));
}

namespace {

// -(1/n!) integral of phi^n h  starred against a derivative-decorated
// quadratic through K, transcribed term by term.
Functional useful_product_target(int n, KernelKind k, std::vector<DIdx> const& da,
                                 std::vector<DIdx> const& db) {
    Rat nfact(1);
    for (int j = 2; j <= n; ++j) nfact *= j;
    Functional v = mul_scalar(CoeffElem(GaussRat(Rat(-1) / nfact)),
                              smeared_power("h", n, "x"));
    Functional f = smeared_bilinear("f", da, db, "z");
    Functional t0 = pointwise_product(v, f);

    auto base = [&](std::vector<Factor> fs, int hb) {
        return single(make_monomial(CoeffElem(1), std::move(fs), {"x", "z"}, 0, hb));
    };
    Rat nm1fact = nfact / n;
    Rat nm2fact = n >= 2 ? nm1fact / (n - 1) : Rat(1);

    Functional t1a = base({Factor::field("x", n - 1), Factor::field("z", 1, db),
                           Factor::kernel(k, "x", "z", 1, {}, da), Factor::test_fn("h", "x"),
                           Factor::test_fn("f", "z")},
                          1);
    Functional t1b = base({Factor::field("x", n - 1), Factor::field("z", 1, da),
                           Factor::kernel(k, "x", "z", 1, {}, db), Factor::test_fn("h", "x"),
                           Factor::test_fn("f", "z")},
                          1);
    Functional t2 = base({Factor::field("x", n - 2), Factor::kernel(k, "x", "z", 1, {}, da),
                          Factor::kernel(k, "x", "z", 1, {}, db), Factor::test_fn("h", "x"),
                          Factor::test_fn("f", "z")},
                         2);
    Functional out = t0;
    out = sub(out, mul_scalar(CoeffElem(GaussRat(Rat(1) / nm1fact)), add(t1a, t1b)));
    out = sub(out, mul_scalar(CoeffElem(GaussRat(Rat(1) / nm2fact)), t2));
    return out;
}

}  // namespace

TEST_CASE("vertex against decorated quadratic: closed form and oracle") {
    testutil::Rng rng(31);
    char const* idx[] = {"mu", "nu", "rho"};
    for (int it = 0; it < 24; ++it) {
        int n = it % 2 ? 3 : 4;
        KernelKind k = it % 3 == 0 ? KernelKind::H : (it % 3 == 1 ? KernelKind::HF
                                                                  : KernelKind::HAF);
        auto rand_derivs = [&]() {
            std::vector<DIdx> d;
            int len = rng() % 3;
            for (int j = 0; j < len; ++j)
                d.push_back({std::string(idx[rng() % 3]) + std::to_string(j), false});
            return d;
        };
        std::vector<DIdx> da = rand_derivs(), db = rand_derivs();
        // Keep index occurrences valid: make labels distinct across slots.
        for (auto& d : da) d.label += "_a";
        for (auto& d : db) d.label += "_b";

        Rat nfact(1);
        for (int j = 2; j <= n; ++j) nfact *= j;
        Functional v = mul_scalar(CoeffElem(GaussRat(Rat(-1) / nfact)),
                                  smeared_power("h", n, "x"));
        Functional f = smeared_bilinear("f", da, db, "z");

        Functional engine = star(v, f, k);
        CHECK(equal(engine, useful_product_target(n, k, da, db)));
        CHECK(equal(engine, testutil::star_oracle(v, f, k)));
    }
}
