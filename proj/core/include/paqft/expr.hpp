#pragma once

// Canonicalized symbolic expressions: sums of monomials built from field,
// kernel, geometric and test-function factors over labelled spacetime points,
// with exact coefficients and formal-order bookkeeping in lambda and hbar.

#include "paqft/coeff.hpp"

#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace paqft {

struct StructuralError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class KernelKind { H, HF, HAF, Delta, DeltaA, DeltaR, DiracDelta, W, Zero };
enum class GeomTensor { Metric, InvMetric, Einstein, Ricci, RicciScalar, Weyl, V1 };

char const* kernel_name(KernelKind k);
char const* geom_name(GeomTensor t);
int geom_rank(GeomTensor t);

// One slot of a derivative multi-index or tensor index. Derivative lists are
// ordered innermost-first (the first entry was applied first).
struct DIdx {
    std::string label;
    bool up = false;

    bool operator==(DIdx const& o) const { return label == o.label && up == o.up; }
    bool operator<(DIdx const& o) const {
        return label != o.label ? label < o.label : up < o.up;
    }
};

struct Factor {
    enum class Tag { Field, Kernel, Geom, TestFn };

    Tag tag = Tag::Field;
    int exponent = 1;  // Field and Kernel powers

    // Field / Geom / TestFn location.
    std::string point;
    // Field / Geom derivative decorations.
    std::vector<DIdx> derivs;
    // Field: wave operator P0 = -box + m^2 + xi R applied (kept opaque).
    bool p0 = false;

    // Kernel data: ordered argument pair with per-slot decorations.
    KernelKind kind = KernelKind::H;
    std::string pt1, pt2;
    std::vector<DIdx> d1, d2;
    bool p0_1 = false, p0_2 = false;

    // Geom tensor and its index slots.
    GeomTensor tensor = GeomTensor::Metric;
    std::vector<DIdx> indices;

    // TestFn label.
    std::string label;

    static Factor field(std::string point, int exponent = 1, std::vector<DIdx> derivs = {},
                        bool p0 = false);
    static Factor kernel(KernelKind kind, std::string pt1, std::string pt2, int exponent = 1,
                         std::vector<DIdx> d1 = {}, std::vector<DIdx> d2 = {});
    static Factor geom(GeomTensor tensor, std::vector<DIdx> indices, std::string point,
                       std::vector<DIdx> derivs = {});
    static Factor test_fn(std::string label, std::string point);

    bool operator==(Factor const& o) const { return key() == o.key(); }

    // Deterministic serialization; doubles as the sort key.
    std::string key() const;
    // Serialization ignoring the exponent, used when merging like factors.
    std::string base_key() const;

    bool references(std::string const& pt) const;
    void rename_point(std::string const& from, std::string const& to);
    void for_each_index(std::function<void(DIdx&)> const& fn);
    void for_each_index(std::function<void(DIdx const&)> const& fn) const;
};

struct Monomial {
    CoeffElem coeff;
    int lam = 0;   // power of the coupling lambda
    int hbar = 0;  // power of hbar, may be negative
    std::vector<Factor> factors;
    // point label -> integrated? (true = bound integration variable)
    std::map<std::string, bool> points;

    std::string key() const;  // canonical-form merge key (everything but coeff)
    void rename_point(std::string const& from, std::string const& to);
    int field_degree() const;
    bool has_fields() const;
};

struct SymExpr {
    std::vector<Monomial> monomials;
    std::optional<int> truncation;  // max retained lambda power

    bool is_zero() const { return monomials.empty(); }

    static SymExpr zero(std::optional<int> trunc = std::nullopt) { return {{}, trunc}; }
    static SymExpr constant(CoeffElem c, std::optional<int> trunc = std::nullopt);
};

// Validates arities, point declarations and index pairing; throws StructuralError.
void check_well_formed(SymExpr const& e);

// Idempotent: merges like factors and like terms, renames dummy points and
// contracted indices to a deterministic scheme, sorts factors and monomials,
// drops zeros and over-truncation terms.
SymExpr canonicalize(SymExpr const& e);
Monomial canonicalize_monomial(Monomial m);

SymExpr add(SymExpr const& a, SymExpr const& b);
SymExpr negate(SymExpr const& e);
SymExpr sub(SymExpr const& a, SymExpr const& b);
SymExpr mul_scalar(CoeffElem const& c, SymExpr const& e);
// Pointwise product: integrated points of b are renamed fresh on collision,
// free points with equal labels are identified.
SymExpr mul(SymExpr const& a, SymExpr const& b);
bool equal(SymExpr const& a, SymExpr const& b);

// Labels appearing in any point of e (used for fresh-name generation).
std::string fresh_point(SymExpr const& e, std::string const& stem);

// Sub-sum of monomials at a fixed power of lambda.
SymExpr lambda_part(SymExpr const& e, int k);

// Map every monomial through fn and re-canonicalize; fn may return several
// monomials (linear rewriting helper shared by the rule engine).
SymExpr map_monomials(SymExpr const& e,
                      std::function<std::vector<Monomial>(Monomial const&)> const& fn);

}  // namespace paqft
