#include "paqft/expr.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <sstream>

namespace paqft {

char const* kernel_name(KernelKind k) {
    switch (k) {
        case KernelKind::H: return "H";
        case KernelKind::HF: return "HF";
        case KernelKind::HAF: return "HAF";
        case KernelKind::Delta: return "D";
        case KernelKind::DeltaA: return "DA";
        case KernelKind::DeltaR: return "DR";
        case KernelKind::DiracDelta: return "dirac";
        case KernelKind::W: return "W";
        case KernelKind::Zero: return "0";
    }
    return "?";
}

char const* geom_name(GeomTensor t) {
    switch (t) {
        case GeomTensor::Metric: return "g";
        case GeomTensor::InvMetric: return "ginv";
        case GeomTensor::Einstein: return "Ein";
        case GeomTensor::Ricci: return "Ric";
        case GeomTensor::RicciScalar: return "Rsc";
        case GeomTensor::Weyl: return "Weyl";
        case GeomTensor::V1: return "v1";
    }
    return "?";
}

int geom_rank(GeomTensor t) {
    switch (t) {
        case GeomTensor::Metric:
        case GeomTensor::InvMetric:
        case GeomTensor::Einstein:
        case GeomTensor::Ricci: return 2;
        case GeomTensor::RicciScalar:
        case GeomTensor::V1: return 0;
        case GeomTensor::Weyl: return 4;
    }
    return 0;
}

Factor Factor::field(std::string point, int exponent, std::vector<DIdx> derivs, bool p0) {
    Factor f;
    f.tag = Tag::Field;
    f.point = std::move(point);
    f.exponent = exponent;
    f.derivs = std::move(derivs);
    f.p0 = p0;
    return f;
}

Factor Factor::kernel(KernelKind kind, std::string pt1, std::string pt2, int exponent,
                      std::vector<DIdx> d1, std::vector<DIdx> d2) {
    Factor f;
    f.tag = Tag::Kernel;
    f.kind = kind;
    f.pt1 = std::move(pt1);
    f.pt2 = std::move(pt2);
    f.exponent = exponent;
    f.d1 = std::move(d1);
    f.d2 = std::move(d2);
    return f;
}

Factor Factor::geom(GeomTensor tensor, std::vector<DIdx> indices, std::string point,
                    std::vector<DIdx> derivs) {
    Factor f;
    f.tag = Tag::Geom;
    f.tensor = tensor;
    f.indices = std::move(indices);
    f.point = std::move(point);
    f.derivs = std::move(derivs);
    return f;
}

Factor Factor::test_fn(std::string label, std::string point) {
    Factor f;
    f.tag = Tag::TestFn;
    f.label = std::move(label);
    f.point = std::move(point);
    return f;
}

static void append_idx_list(std::ostringstream& os, std::vector<DIdx> const& v) {
    for (auto const& d : v) os << (d.up ? '^' : '_') << d.label << '.';
}

std::string Factor::base_key() const {
    std::ostringstream os;
    switch (tag) {
        case Tag::Field:
            os << "F[" << point << '|';
            append_idx_list(os, derivs);
            os << '|' << (p0 ? 'P' : '-') << ']';
            break;
        case Tag::Geom:
            os << "G[" << geom_name(tensor) << '|';
            append_idx_list(os, indices);
            os << '|' << point << '|';
            append_idx_list(os, derivs);
            os << ']';
            break;
        case Tag::Kernel:
            os << "K[" << kernel_name(kind) << '|' << pt1 << '|' << pt2 << '|';
            append_idx_list(os, d1);
            os << '|';
            append_idx_list(os, d2);
            os << '|' << (p0_1 ? 'P' : '-') << (p0_2 ? 'P' : '-') << ']';
            break;
        case Tag::TestFn:
            os << "T[" << label << '|' << point << '|';
            append_idx_list(os, derivs);
            os << ']';
            break;
    }
    return os.str();
}

std::string Factor::key() const {
    std::string k = base_key();
    if ((tag == Tag::Field || tag == Tag::Kernel) && exponent != 1)
        k += "^" + std::to_string(exponent);
    return k;
}

bool Factor::references(std::string const& pt) const {
    switch (tag) {
        case Tag::Field:
        case Tag::Geom:
        case Tag::TestFn: return point == pt;
        case Tag::Kernel: return pt1 == pt || pt2 == pt;
    }
    return false;
}

void Factor::rename_point(std::string const& from, std::string const& to) {
    if (point == from) point = to;
    if (tag == Tag::Kernel) {
        if (pt1 == from) pt1 = to;
        if (pt2 == from) pt2 = to;
    }
}

void Factor::for_each_index(std::function<void(DIdx&)> const& fn) {
    for (auto& d : derivs) fn(d);
    for (auto& d : d1) fn(d);
    for (auto& d : d2) fn(d);
    for (auto& d : indices) fn(d);
}

void Factor::for_each_index(std::function<void(DIdx const&)> const& fn) const {
    for (auto const& d : derivs) fn(d);
    for (auto const& d : d1) fn(d);
    for (auto const& d : d2) fn(d);
    for (auto const& d : indices) fn(d);
}

void Monomial::rename_point(std::string const& from, std::string const& to) {
    auto it = points.find(from);
    if (it != points.end()) {
        bool integrated = it->second;
        points.erase(it);
        points[to] = integrated;
    }
    for (auto& f : factors) f.rename_point(from, to);
}

int Monomial::field_degree() const {
    int deg = 0;
    for (auto const& f : factors)
        if (f.tag == Factor::Tag::Field) deg += f.exponent;
    return deg;
}

bool Monomial::has_fields() const {
    for (auto const& f : factors)
        if (f.tag == Factor::Tag::Field) return true;
    return false;
}

std::string Monomial::key() const {
    std::ostringstream os;
    os << "L" << lam << "|h" << hbar << "|P{";
    for (auto const& [p, integ] : points) os << p << (integ ? ":i" : ":f") << ',';
    os << "}|";
    for (auto const& f : factors) os << f.key();
    return os.str();
}

SymExpr SymExpr::constant(CoeffElem c, std::optional<int> trunc) {
    SymExpr e;
    e.truncation = trunc;
    if (!c.is_zero()) {
        Monomial m;
        m.coeff = std::move(c);
        e.monomials.push_back(std::move(m));
    }
    return e;
}

void check_well_formed(SymExpr const& e) {
    for (auto const& m : e.monomials) {
        std::map<std::string, std::pair<int, int>> idx_count;  // label -> (down, up)
        for (auto const& f : m.factors) {
            if (f.exponent < 1 && (f.tag == Factor::Tag::Field || f.tag == Factor::Tag::Kernel))
                throw StructuralError("factor exponent below 1: " + f.key());
            if (f.tag == Factor::Tag::Geom &&
                static_cast<int>(f.indices.size()) != geom_rank(f.tensor))
                throw StructuralError("geom index arity mismatch: " + f.key());
            if (f.tag == Factor::Tag::Kernel && f.kind == KernelKind::Zero)
                throw StructuralError("zero kernel stored as a factor");
            if (f.tag == Factor::Tag::Kernel) {
                if (!m.points.count(f.pt1) || !m.points.count(f.pt2))
                    throw StructuralError("kernel point undeclared: " + f.key());
            } else if (!m.points.count(f.point)) {
                throw StructuralError("factor point undeclared: " + f.key());
            }
            f.for_each_index([&](DIdx const& d) {
                (d.up ? idx_count[d.label].second : idx_count[d.label].first)++;
            });
        }
        for (auto const& [label, cnt] : idx_count) {
            int total = cnt.first + cnt.second;
            if (total > 2 || (total == 2 && cnt.first != 1))
                throw StructuralError("index pairing violated for " + label);
        }
    }
}

namespace {

// The Dirac kernel is symmetric in its arguments; fix its orientation as part
// of the canonical form (all other kernels keep their ordered arguments).
void orient_dirac(Factor& f) {
    if (f.tag != Factor::Tag::Kernel || f.kind != KernelKind::DiracDelta) return;
    if (f.pt1 <= f.pt2) return;
    std::swap(f.pt1, f.pt2);
    std::swap(f.d1, f.d2);
    std::swap(f.p0_1, f.p0_2);
}

// The two innermost derivatives of a scalar argument commute.
void sort_innermost(std::vector<DIdx>& v) {
    if (v.size() == 2 && v[1] < v[0]) std::swap(v[0], v[1]);
}

// Merges like field/kernel factors into exponents; drops exponent zero.
void merge_like_factors(std::vector<Factor>& factors) {
    std::vector<Factor> merged;
    for (auto& f : factors) {
        bool absorbed = false;
        if (f.tag == Factor::Tag::Field || f.tag == Factor::Tag::Kernel) {
            for (auto& g : merged) {
                if (g.tag == f.tag && g.base_key() == f.base_key()) {
                    g.exponent += f.exponent;
                    absorbed = true;
                    break;
                }
            }
        }
        if (!absorbed) merged.push_back(std::move(f));
    }
    merged.erase(std::remove_if(merged.begin(), merged.end(),
                                [](Factor const& f) {
                                    return (f.tag == Factor::Tag::Field ||
                                            f.tag == Factor::Tag::Kernel) &&
                                           f.exponent == 0;
                                }),
                 merged.end());
    factors = std::move(merged);
}

Monomial renamed_copy(Monomial const& m, std::map<std::string, std::string> const& pt_map,
                      std::map<std::string, std::string> const& idx_map) {
    Monomial out = m;
    out.points.clear();
    for (auto const& [p, integ] : m.points) {
        auto it = pt_map.find(p);
        out.points[it == pt_map.end() ? p : it->second] = integ;
    }
    auto remap = [&pt_map](std::string& p) {
        auto it = pt_map.find(p);
        if (it != pt_map.end()) p = it->second;
    };
    for (auto& f : out.factors) {
        remap(f.point);
        remap(f.pt1);
        remap(f.pt2);
        f.for_each_index([&](DIdx& d) {
            auto it = idx_map.find(d.label);
            if (it != idx_map.end()) d.label = it->second;
        });
    }
    return out;
}

void finalize_candidate(Monomial& m) {
    for (auto& f : m.factors) {
        orient_dirac(f);
        switch (f.tag) {
            case Factor::Tag::Field:
            case Factor::Tag::TestFn:
                sort_innermost(f.derivs);
                break;
            case Factor::Tag::Kernel:
                sort_innermost(f.d1);
                sort_innermost(f.d2);
                break;
            case Factor::Tag::Geom:
                break;
        }
    }
    merge_like_factors(m.factors);
    std::sort(m.factors.begin(), m.factors.end(),
              [](Factor const& a, Factor const& b) { return a.key() < b.key(); });
}

// Labels contracted between two scalar derivative slots at the same point may
// sit in either up/down orientation; such pairs are eligible for orientation
// normalization. Pairs touching tensor index slots, derivative lists of
// tensors, powered factors, or mismatched points are left alone, as are
// same-slot pairs (a trace within one derivative list).
std::vector<std::string> flippable_labels(Monomial const& m) {
    struct Occ {
        std::vector<std::pair<void const*, std::string>> slots;  // (list id, point)
        bool bad = false;
    };
    std::map<std::string, Occ> occ;
    for (auto const& f : m.factors) {
        auto scan = [&](std::vector<DIdx> const& v, std::string const& pt, bool ok) {
            for (auto const& d : v) {
                occ[d.label].slots.push_back({&v, pt});
                if (!ok || f.exponent != 1) occ[d.label].bad = true;
            }
        };
        switch (f.tag) {
            case Factor::Tag::Field:
            case Factor::Tag::TestFn:
                scan(f.derivs, f.point, true);
                break;
            case Factor::Tag::Kernel:
                scan(f.d1, f.pt1, true);
                scan(f.d2, f.pt2, true);
                break;
            case Factor::Tag::Geom:
                scan(f.derivs, f.point, false);
                scan(f.indices, f.point, false);
                break;
        }
    }
    std::vector<std::string> out;
    for (auto const& [label, o] : occ) {
        if (o.bad || o.slots.size() != 2) continue;
        if (o.slots[0].first == o.slots[1].first) continue;
        if (o.slots[0].second != o.slots[1].second) continue;
        out.push_back(label);
    }
    return out;
}

void flip_label(Monomial& m, std::string const& label) {
    for (auto& f : m.factors)
        f.for_each_index([&](DIdx& d) {
            if (d.label == label) d.up = !d.up;
        });
}

}  // namespace

Monomial canonicalize_monomial(Monomial m) {
    merge_like_factors(m.factors);

    // Drop points no factor references.
    for (auto it = m.points.begin(); it != m.points.end();) {
        bool used = false;
        for (auto const& f : m.factors) used = used || f.references(it->first);
        it = used ? std::next(it) : m.points.erase(it);
    }

    // Dummies: integrated points and index labels occurring twice.
    std::vector<std::string> dpts;
    for (auto const& [p, integ] : m.points)
        if (integ) dpts.push_back(p);
    std::map<std::string, int> idx_occ;
    for (auto& f : m.factors)
        f.for_each_index([&](DIdx& d) { idx_occ[d.label]++; });
    std::vector<std::string> didx;
    for (auto const& [label, n] : idx_occ)
        if (n == 2) didx.push_back(label);

    auto assign = [](std::vector<std::string> const& src, std::vector<int> const& perm,
                     char prefix) {
        std::map<std::string, std::string> map;
        for (size_t i = 0; i < src.size(); ++i)
            map[src[perm[i]]] = std::string(1, prefix) + std::to_string(i + 1);
        return map;
    };

    std::vector<std::string> flips = flippable_labels(m);

    auto factorial = [](size_t n) {
        double f = 1;
        for (size_t i = 2; i <= n; ++i) f *= static_cast<double>(i);
        return f;
    };
    bool brute = dpts.size() <= 7 && didx.size() <= 5 &&
                 factorial(dpts.size()) * factorial(didx.size()) *
                         static_cast<double>(1u << std::min<size_t>(flips.size(), 5)) <=
                     250000.0;
    std::string best;
    Monomial best_m = m;
    std::vector<int> pperm(dpts.size()), iperm(didx.size());
    std::iota(pperm.begin(), pperm.end(), 0);
    if (!brute) {
        // Greedy fallback: first-appearance order in the original serialization.
        std::map<std::string, std::string> pm = assign(dpts, pperm, '$');
        std::iota(iperm.begin(), iperm.end(), 0);
        std::map<std::string, std::string> im = assign(didx, iperm, '%');
        best_m = renamed_copy(m, pm, im);
        finalize_candidate(best_m);
    } else {
        size_t nflip = std::min<size_t>(flips.size(), 5);
        do {
            auto pm = assign(dpts, pperm, '$');
            std::iota(iperm.begin(), iperm.end(), 0);
            do {
                auto im = assign(didx, iperm, '%');
                Monomial base = renamed_copy(m, pm, im);
                for (unsigned mask = 0; mask < (1u << nflip); ++mask) {
                    Monomial cand = base;
                    for (size_t b = 0; b < nflip; ++b)
                        if (mask & (1u << b)) flip_label(cand, im.at(flips[b]));
                    finalize_candidate(cand);
                    std::string ser = cand.key();
                    if (best.empty() || ser < best) {
                        best = std::move(ser);
                        best_m = std::move(cand);
                    }
                }
            } while (std::next_permutation(iperm.begin(), iperm.end()));
        } while (std::next_permutation(pperm.begin(), pperm.end()));
    }

    std::sort(best_m.factors.begin(), best_m.factors.end(),
              [](Factor const& a, Factor const& b) { return a.key() < b.key(); });
    return best_m;
}

SymExpr canonicalize(SymExpr const& e) {
    std::map<std::string, Monomial> merged;
    for (auto const& m : e.monomials) {
        if (m.coeff.is_zero()) continue;
        if (e.truncation && m.lam > *e.truncation) continue;
        Monomial c = canonicalize_monomial(m);
        std::string k = c.key();
        auto [it, inserted] = merged.emplace(std::move(k), c);
        if (!inserted) it->second.coeff = it->second.coeff + c.coeff;
    }
    SymExpr out;
    out.truncation = e.truncation;
    for (auto& [k, m] : merged)
        if (!m.coeff.is_zero()) out.monomials.push_back(std::move(m));
    std::sort(out.monomials.begin(), out.monomials.end(), [](Monomial const& a, Monomial const& b) {
        if (a.lam != b.lam) return a.lam < b.lam;
        if (a.hbar != b.hbar) return a.hbar < b.hbar;
        return a.key() < b.key();
    });
    return out;
}

static std::optional<int> merge_trunc(std::optional<int> a, std::optional<int> b) {
    if (!a) return b;
    if (!b) return a;
    return std::min(*a, *b);
}

SymExpr add(SymExpr const& a, SymExpr const& b) {
    SymExpr out = a;
    out.truncation = merge_trunc(a.truncation, b.truncation);
    out.monomials.insert(out.monomials.end(), b.monomials.begin(), b.monomials.end());
    return canonicalize(out);
}

SymExpr negate(SymExpr const& e) {
    SymExpr out = e;
    for (auto& m : out.monomials) m.coeff = -m.coeff;
    return out;
}

SymExpr sub(SymExpr const& a, SymExpr const& b) { return add(a, negate(b)); }

SymExpr mul_scalar(CoeffElem const& c, SymExpr const& e) {
    SymExpr out = e;
    for (auto& m : out.monomials) m.coeff = m.coeff * c;
    return canonicalize(out);
}

SymExpr mul(SymExpr const& a, SymExpr const& b) {
    SymExpr out;
    out.truncation = merge_trunc(a.truncation, b.truncation);
    for (auto const& ma : a.monomials) {
        for (auto const& mb0 : b.monomials) {
            Monomial mb = mb0;
            // Bound variables of b that collide with any label of a get fresh names.
            for (auto const& [p, integ] : mb0.points) {
                if (!integ) continue;
                bool collide = ma.points.count(p) > 0;
                if (collide) {
                    int n = 0;
                    std::string cand;
                    do {
                        cand = p + "'" + std::to_string(++n);
                    } while (ma.points.count(cand) || mb.points.count(cand));
                    mb.rename_point(p, cand);
                }
            }
            for (auto const& [p, integ] : mb.points) {
                auto it = ma.points.find(p);
                if (it != ma.points.end() && it->second != integ)
                    throw StructuralError("point " + p + " bound on one side, free on the other");
            }
            Monomial prod;
            prod.coeff = ma.coeff * mb.coeff;
            prod.lam = ma.lam + mb.lam;
            prod.hbar = ma.hbar + mb.hbar;
            prod.factors = ma.factors;
            prod.factors.insert(prod.factors.end(), mb.factors.begin(), mb.factors.end());
            prod.points = ma.points;
            prod.points.insert(mb.points.begin(), mb.points.end());
            out.monomials.push_back(std::move(prod));
        }
    }
    return canonicalize(out);
}

bool equal(SymExpr const& a, SymExpr const& b) {
    SymExpr ca = canonicalize(a), cb = canonicalize(b);
    if (ca.monomials.size() != cb.monomials.size()) return false;
    for (size_t i = 0; i < ca.monomials.size(); ++i) {
        if (ca.monomials[i].key() != cb.monomials[i].key()) return false;
        if (!(ca.monomials[i].coeff == cb.monomials[i].coeff)) return false;
    }
    return true;
}

std::string fresh_point(SymExpr const& e, std::string const& stem) {
    std::set<std::string> used;
    for (auto const& m : e.monomials)
        for (auto const& [p, integ] : m.points) used.insert(p);
    if (!used.count(stem)) return stem;
    int n = 0;
    std::string cand;
    do {
        cand = stem + std::to_string(++n);
    } while (used.count(cand));
    return cand;
}

SymExpr lambda_part(SymExpr const& e, int k) {
    SymExpr out;
    out.truncation = e.truncation;
    for (auto const& m : e.monomials)
        if (m.lam == k) out.monomials.push_back(m);
    return canonicalize(out);
}

SymExpr map_monomials(SymExpr const& e,
                      std::function<std::vector<Monomial>(Monomial const&)> const& fn) {
    SymExpr out;
    out.truncation = e.truncation;
    for (auto const& m : e.monomials) {
        for (auto& r : fn(m)) out.monomials.push_back(std::move(r));
    }
    return canonicalize(out);
}

}  // namespace paqft
