#include "paqft/rewrite.hpp"

#include <algorithm>

namespace paqft {

namespace {

GaussRat p0_delta_coeff(KernelKind k, P0Convention conv, bool& gives_delta) {
    gives_delta = false;
    switch (k) {
        case KernelKind::H:
        case KernelKind::W:
        case KernelKind::Delta:
            return GaussRat(0);
        case KernelKind::HF:
            gives_delta = true;
            return conv == P0Convention::Delta ? GaussRat(1) : GaussRat::i();
        case KernelKind::HAF:
            gives_delta = true;
            return conv == P0Convention::Delta ? GaussRat(1) : -GaussRat::i();
        case KernelKind::DeltaR:
        case KernelKind::DeltaA:
            gives_delta = true;
            return GaussRat(1);
        default:
            throw StructuralError("wave operator applied to unsupported kernel");
    }
}

std::string fresh_index(Monomial const& m, std::string const& stem) {
    std::set<std::string> used;
    for (auto const& f : m.factors)
        f.for_each_index([&](DIdx const& d) { used.insert(d.label); });
    if (!used.count(stem)) return stem;
    int n = 0;
    std::string cand;
    do {
        cand = stem + std::to_string(++n);
    } while (used.count(cand));
    return cand;
}

bool integrated(Monomial const& m, std::string const& p) {
    auto it = m.points.find(p);
    return it != m.points.end() && it->second;
}

// One outermost derivative applied to the slot(s) of factor i located at
// `at`; powers split off a single differentiated copy. Covariantly constant
// metric factors contribute nothing.
std::vector<Monomial> differentiate_factor(Monomial const& m, size_t i, std::string const& at,
                                           DIdx const& d) {
    std::vector<Monomial> out;
    Factor const& f = m.factors[i];
    auto with_slot = [&](auto mutate) {
        Monomial r = m;
        if ((f.tag == Factor::Tag::Field || f.tag == Factor::Tag::Kernel) && f.exponent > 1) {
            r.coeff = r.coeff * CoeffElem(f.exponent);
            r.factors[i].exponent -= 1;
            Factor clone = f;
            clone.exponent = 1;
            mutate(clone);
            r.factors.push_back(std::move(clone));
        } else {
            mutate(r.factors[i]);
        }
        out.push_back(std::move(r));
    };
    switch (f.tag) {
        case Factor::Tag::Field:
        case Factor::Tag::TestFn:
            if (f.point == at) with_slot([&](Factor& g) { g.derivs.push_back(d); });
            break;
        case Factor::Tag::Geom:
            if (f.point == at && f.tensor != GeomTensor::Metric &&
                f.tensor != GeomTensor::InvMetric)
                with_slot([&](Factor& g) { g.derivs.push_back(d); });
            break;
        case Factor::Tag::Kernel:
            if (f.pt1 == at) with_slot([&](Factor& g) { g.d1.push_back(d); });
            if (f.pt2 == at) with_slot([&](Factor& g) { g.d2.push_back(d); });
            break;
    }
    return out;
}

// ---------------------------------------------------------------- stages ---

// Scalar derivative lists eligible for the commutator normalization: a box
// pair is moved innermost one step at a time, emitting the Ricci correction
// (box grad - grad box = Ric grad on scalars).
struct ListRef {
    std::vector<DIdx>* list;
    std::string point;
};

std::vector<ListRef> scalar_lists(Factor& f) {
    switch (f.tag) {
        case Factor::Tag::Field:
        case Factor::Tag::TestFn:
            return {{&f.derivs, f.point}};
        case Factor::Tag::Kernel:
            return {{&f.d1, f.pt1}, {&f.d2, f.pt2}};
        case Factor::Tag::Geom:
            if (f.tensor == GeomTensor::RicciScalar || f.tensor == GeomTensor::V1)
                return {{&f.derivs, f.point}};
            return {};
    }
    return {};
}

// Applies one commutator step if a non-innermost box pair exists.
bool deriv_normal_step(Monomial const& m, std::vector<Monomial>& out) {
    for (size_t fi = 0; fi < m.factors.size(); ++fi) {
        Monomial probe = m;
        for (auto const& lr : scalar_lists(probe.factors[fi])) {
            auto& v = *lr.list;
            for (size_t i = 1; i + 1 < v.size(); ++i) {
                if (v[i].label != v[i + 1].label) continue;
                if (i + 2 != v.size())
                    throw StructuralError("derivative depth beyond supported commutator form");
                // [.., a, l, l] -> [.., l, l, a] + Ric_{ma} grad^m
                DIdx a = v[i - 1];
                Monomial swapped = m;
                {
                    auto lists = scalar_lists(swapped.factors[fi]);
                    auto& w = *lists[&lr - &scalar_lists(probe.factors[fi])[0]].list;
                    std::swap(w[i - 1], w[i + 1]);
                    std::swap(w[i - 1], w[i]);
                }
                Monomial ricci = m;
                std::string mu = fresh_index(m, "c");
                {
                    auto lists = scalar_lists(ricci.factors[fi]);
                    auto& w = *lists[&lr - &scalar_lists(probe.factors[fi])[0]].list;
                    w.erase(w.begin() + i, w.begin() + i + 2);
                    w[i - 1] = DIdx{mu, true};
                }
                ricci.factors.push_back(
                    Factor::geom(GeomTensor::Ricci, {DIdx{mu, false}, a}, lr.point));
                out.push_back(std::move(swapped));
                out.push_back(std::move(ricci));
                return true;
            }
        }
    }
    return false;
}

// Leibniz over a power for the interaction side of the field equation:
// phi^(k) optionally hit by one outer derivative.
void push_power_with_rest(std::vector<Monomial>& out, Monomial base, size_t slot,
                          std::string const& pt, int k, std::vector<DIdx> const& rest,
                          CoeffElem const& scale) {
    base.coeff = base.coeff * scale;
    base.factors.erase(base.factors.begin() + slot);
    if (rest.empty()) {
        if (k > 0) base.factors.push_back(Factor::field(pt, k));
        out.push_back(std::move(base));
        return;
    }
    if (rest.size() > 1) throw StructuralError("unsupported derivative depth on power");
    if (k == 0) return;  // derivative of a constant power
    base.coeff = base.coeff * CoeffElem(k);
    if (k > 1) base.factors.push_back(Factor::field(pt, k - 1));
    base.factors.push_back(Factor::field(pt, 1, rest));
    out.push_back(std::move(base));
}

// Box / P0 substitution on one kernel slot. slot_derivs is the slot's list
// after removing the consumed box pair (or the full list for a P0 flag).
void kernel_eom_terms(std::vector<Monomial>& out, Monomial const& m, size_t fi, int slot,
                      std::vector<DIdx> const& rest, bool from_box, P0Convention conv) {
    Factor const& f = m.factors[fi];
    if (f.exponent != 1)
        throw StructuralError("wave operator on a kernel power");
    if (rest.size() > 1)
        throw StructuralError("unsupported derivative depth on wave-operator slot");
    std::string pt = slot == 1 ? f.pt1 : f.pt2;

    auto base_with = [&](std::vector<DIdx> slot_derivs, bool clear_p0) {
        Monomial r = m;
        Factor& g = r.factors[fi];
        (slot == 1 ? g.d1 : g.d2) = std::move(slot_derivs);
        if (clear_p0) (slot == 1 ? g.p0_1 : g.p0_2) = false;
        return r;
    };

    bool gives_delta = false;
    GaussRat c = p0_delta_coeff(f.kind, conv, gives_delta);

    if (from_box) {
        // box K = m^2 K + xi R K - P0 K
        Monomial mass = base_with(rest, false);
        mass.coeff = mass.coeff * CoeffElem::symbol(sym::m2);
        out.push_back(std::move(mass));

        if (rest.empty()) {
            Monomial curv = base_with({}, false);
            curv.coeff = curv.coeff * CoeffElem::symbol(sym::xi);
            curv.factors.push_back(Factor::geom(GeomTensor::RicciScalar, {}, pt));
            out.push_back(std::move(curv));
        } else {
            Monomial c1 = base_with({}, false);
            c1.coeff = c1.coeff * CoeffElem::symbol(sym::xi);
            c1.factors.push_back(Factor::geom(GeomTensor::RicciScalar, {}, pt, rest));
            out.push_back(std::move(c1));
            Monomial c2 = base_with(rest, false);
            c2.coeff = c2.coeff * CoeffElem::symbol(sym::xi);
            c2.factors.push_back(Factor::geom(GeomTensor::RicciScalar, {}, pt));
            out.push_back(std::move(c2));
        }
        if (gives_delta) {
            Monomial del = m;
            Factor& g = del.factors[fi];
            g.kind = KernelKind::DiracDelta;
            (slot == 1 ? g.d1 : g.d2) = rest;
            del.coeff = del.coeff * CoeffElem(-c);
            out.push_back(std::move(del));
        }
    } else {
        // P0 K directly
        if (!gives_delta) return;  // bisolution: the monomial dies
        Monomial del = m;
        Factor& g = del.factors[fi];
        g.kind = KernelKind::DiracDelta;
        (slot == 1 ? g.p0_1 : g.p0_2) = false;
        del.coeff = del.coeff * CoeffElem(c);
        out.push_back(std::move(del));
    }
}

bool kernel_eom_step(Monomial const& m, std::vector<Monomial>& out, P0Convention conv) {
    for (size_t fi = 0; fi < m.factors.size(); ++fi) {
        Factor const& f = m.factors[fi];
        if (f.tag != Factor::Tag::Kernel || f.kind == KernelKind::DiracDelta) continue;
        for (int slot : {1, 2}) {
            bool p0 = slot == 1 ? f.p0_1 : f.p0_2;
            auto const& d = slot == 1 ? f.d1 : f.d2;
            if (p0) {
                kernel_eom_terms(out, m, fi, slot, d, false, conv);
                return true;
            }
            if (d.size() >= 2 && d[0].label == d[1].label) {
                std::vector<DIdx> rest(d.begin() + 2, d.end());
                kernel_eom_terms(out, m, fi, slot, rest, true, conv);
                return true;
            }
        }
    }
    return false;
}

bool dirac_collapse_step(Monomial const& m, std::vector<Monomial>& out) {
    for (size_t fi = 0; fi < m.factors.size(); ++fi) {
        Factor const& f = m.factors[fi];
        if (f.tag != Factor::Tag::Kernel || f.kind != KernelKind::DiracDelta) continue;
        if (f.exponent != 1) continue;
        if (f.p0_1 || f.p0_2)
            throw StructuralError("wave operator left on a Dirac kernel");
        std::string a = f.pt1, b = f.pt2;
        if (a == b) continue;

        std::string bound, kept;
        std::vector<DIdx> dbound, dkept;
        if (integrated(m, a)) {
            bound = a, kept = b, dbound = f.d1, dkept = f.d2;
        } else if (integrated(m, b)) {
            bound = b, kept = a, dbound = f.d2, dkept = f.d1;
        } else {
            // Free-free: f(x) delta(x,y) = f(y) delta(x,y); move companions
            // onto the smaller label.
            if (!f.d1.empty() || !f.d2.empty()) continue;
            std::string lo = std::min(a, b), hi = std::max(a, b);
            Monomial r = m;
            bool moved = false;
            for (size_t j = 0; j < r.factors.size(); ++j) {
                if (j == fi) continue;
                if (r.factors[j].references(hi)) {
                    r.factors[j].rename_point(hi, lo);
                    moved = true;
                }
            }
            if (!moved) continue;
            out.push_back(std::move(r));
            return true;
        }

        std::vector<DIdx> derivs = dkept;
        derivs.insert(derivs.end(), dbound.begin(), dbound.end());
        Monomial r = m;
        r.coeff = r.coeff * CoeffElem(dbound.size() % 2 ? GaussRat(-1) : GaussRat(1));
        // Factors that depended on the bound point form the product the
        // delta derivatives act on after the collapse.
        std::set<size_t> targets;
        for (size_t j = 0; j < r.factors.size(); ++j) {
            if (j == fi || !r.factors[j].references(bound)) continue;
            if (!derivs.empty() && r.factors[j].references(kept))
                throw StructuralError("derivative Dirac collapse with mixed-point factor");
            targets.insert(j);
        }
        r.factors.erase(r.factors.begin() + fi);
        std::set<size_t> shifted;
        for (size_t j : targets) shifted.insert(j > fi ? j - 1 : j);
        bool kept_binding = r.points.at(kept);
        r.rename_point(bound, kept);
        r.points[kept] = kept_binding;

        std::vector<std::pair<Monomial, std::set<size_t>>> state{{std::move(r), shifted}};
        for (auto const& dd : derivs) {
            std::vector<std::pair<Monomial, std::set<size_t>>> next;
            for (auto& [mm, ss] : state) {
                for (size_t j : ss) {
                    for (auto& t : differentiate_factor(mm, j, kept, dd)) {
                        std::set<size_t> s2 = ss;
                        if (t.factors.size() > mm.factors.size())
                            s2.insert(t.factors.size() - 1);
                        next.push_back({std::move(t), std::move(s2)});
                    }
                }
            }
            state = std::move(next);
        }
        for (auto& [mm, ss] : state) out.push_back(std::move(mm));
        return true;
    }
    return false;
}

int count_label(Monomial const& m, std::string const& label) {
    int n = 0;
    for (auto const& f : m.factors)
        f.for_each_index([&](DIdx const& d) {
            if (d.label == label) ++n;
        });
    return n;
}

bool geom_stage_step(Monomial const& m, std::vector<Monomial>& out, RuleSet const& rs) {
    // Contracted Bianchi: the divergence of the Einstein tensor vanishes.
    if (rs.active("bianchi")) {
        for (auto const& f : m.factors) {
            if (f.tag != Factor::Tag::Geom || f.tensor != GeomTensor::Einstein) continue;
            for (auto const& d : f.derivs)
                for (auto const& ix : f.indices)
                    if (d.label == ix.label) return true;  // monomial dies
        }
    }
    if (rs.active("einstein-expand")) {
        for (size_t fi = 0; fi < m.factors.size(); ++fi) {
            Factor const& f = m.factors[fi];
            if (f.tag != Factor::Tag::Geom || f.tensor != GeomTensor::Einstein ||
                !f.derivs.empty())
                continue;
            bool contracted = false;
            for (auto const& ix : f.indices) contracted |= count_label(m, ix.label) == 2;
            if (!contracted) continue;
            Monomial ric = m;
            ric.factors[fi].tensor = GeomTensor::Ricci;
            Monomial tr = m;
            tr.coeff = tr.coeff * CoeffElem::frac(-1, 2);
            tr.factors[fi].tensor = GeomTensor::Metric;
            tr.factors.push_back(Factor::geom(GeomTensor::RicciScalar, {}, f.point));
            out.push_back(std::move(ric));
            out.push_back(std::move(tr));
            return true;
        }
    }
    if (!rs.active("metric-contract")) return false;
    for (size_t fi = 0; fi < m.factors.size(); ++fi) {
        Factor const& f = m.factors[fi];
        if (f.tag != Factor::Tag::Geom ||
            (f.tensor != GeomTensor::Metric && f.tensor != GeomTensor::InvMetric))
            continue;
        std::string l1 = f.indices[0].label, l2 = f.indices[1].label;
        // Full double traces with a second rank-2 tensor.
        for (size_t gj = 0; gj < m.factors.size(); ++gj) {
            if (gj == fi) continue;
            Factor const& g = m.factors[gj];
            if (g.tag != Factor::Tag::Geom || geom_rank(g.tensor) != 2 || !g.derivs.empty())
                continue;
            std::string g1 = g.indices[0].label, g2 = g.indices[1].label;
            bool match = (l1 == g1 && l2 == g2) || (l1 == g2 && l2 == g1);
            if (!match) continue;
            Monomial r = m;
            GaussRat scale;
            bool add_ricci_scalar = false;
            if (g.tensor == GeomTensor::Metric || g.tensor == GeomTensor::InvMetric) {
                scale = GaussRat(4);
            } else if (g.tensor == GeomTensor::Einstein) {
                scale = GaussRat(-1);
                add_ricci_scalar = true;
            } else if (g.tensor == GeomTensor::Ricci) {
                scale = GaussRat(1);
                add_ricci_scalar = true;
            } else {
                continue;
            }
            std::string pt = g.point;
            r.factors.erase(r.factors.begin() + std::max(fi, gj));
            r.factors.erase(r.factors.begin() + std::min(fi, gj));
            r.coeff = r.coeff * CoeffElem(scale);
            if (add_ricci_scalar)
                r.factors.push_back(Factor::geom(GeomTensor::RicciScalar, {}, pt));
            out.push_back(std::move(r));
            return true;
        }
        // Raise or lower a contracted derivative index.
        for (int which : {0, 1}) {
            DIdx const& own = f.indices[which];
            DIdx other = f.indices[1 - which];
            if (count_label(m, own.label) != 2) continue;
            for (size_t gj = 0; gj < m.factors.size() && true; ++gj) {
                if (gj == fi) continue;
                Monomial r = m;
                bool done = false;
                auto lists = scalar_lists(r.factors[gj]);
                // Tensor-valued derivative lists participate as well.
                if (r.factors[gj].tag == Factor::Tag::Geom &&
                    r.factors[gj].tensor != GeomTensor::RicciScalar &&
                    r.factors[gj].tensor != GeomTensor::V1)
                    lists.push_back({&r.factors[gj].derivs, r.factors[gj].point});
                for (auto& lr : lists) {
                    if (done) break;
                    if (r.factors[gj].exponent != 1 &&
                        (r.factors[gj].tag == Factor::Tag::Field ||
                         r.factors[gj].tag == Factor::Tag::Kernel)) {
                        bool carries = false;
                        for (auto const& d : *lr.list) carries |= d.label == own.label;
                        if (carries)
                            throw StructuralError("metric contraction into a factor power");
                    }
                    for (auto& d : *lr.list) {
                        if (d.label != own.label || d.up == own.up) continue;
                        if (lr.point != f.point) continue;
                        other.up = !own.up ? !d.up ? true : false : d.up;
                        // g_{ab} X^a = X_b ; g^{ab} X_a = X^b
                        d = DIdx{other.label, f.tensor == GeomTensor::InvMetric};
                        done = true;
                        break;
                    }
                }
                if (done) {
                    r.factors.erase(r.factors.begin() + fi);
                    out.push_back(std::move(r));
                    return true;
                }
            }
        }
    }
    return false;
}

bool background_step(Monomial const& m, std::vector<Monomial>& out, RuleSet const& rs) {
    Regime reg = rs.background.regime;
    if (reg == Regime::Generic) return false;
    for (size_t fi = 0; fi < m.factors.size(); ++fi) {
        Factor const& f = m.factors[fi];
        if (f.tag != Factor::Tag::Geom) continue;
        bool curvature = f.tensor == GeomTensor::Einstein || f.tensor == GeomTensor::Ricci ||
                         f.tensor == GeomTensor::RicciScalar || f.tensor == GeomTensor::Weyl;
        if (reg == Regime::Minkowski) {
            if (curvature) return true;  // flat space: monomial dies
            if (f.tensor == GeomTensor::V1) {
                if (!f.derivs.empty()) return true;
                Monomial r = m;
                r.factors.erase(r.factors.begin() + fi);
                r.coeff = r.coeff * CoeffElem::frac(1, 8) * CoeffElem::symbol(sym::m2, 2);
                out.push_back(std::move(r));
                return true;
            }
        } else {  // maximally symmetric: curvature covariantly constant
            if ((curvature || f.tensor == GeomTensor::V1) && !f.derivs.empty()) return true;
        }
    }
    if (reg == Regime::Minkowski) {
        CoeffElem flat = m.coeff.substitute(
            sym::v1, CoeffElem::frac(1, 8) * CoeffElem::symbol(sym::m2, 2));
        if (!(flat == m.coeff)) {
            Monomial r = m;
            r.coeff = std::move(flat);
            out.push_back(std::move(r));
            return true;
        }
    }
    return false;
}

// --------------------------------------------------- kernel normal form ---

bool kernel_basis_step(Monomial const& m, std::vector<Monomial>& out) {
    for (size_t fi = 0; fi < m.factors.size(); ++fi) {
        Factor const& f = m.factors[fi];
        if (f.tag != Factor::Tag::Kernel) continue;
        bool decorated = !f.d1.empty() || !f.d2.empty() || f.p0_1 || f.p0_2;

        auto emit_pair = [&](KernelKind k1, KernelKind k2, GaussRat c2) {
            // K -> K1 + c2 K2, one power at a time.
            for (auto [kk, cc] : {std::pair{k1, GaussRat(1)}, std::pair{k2, c2}}) {
                Monomial r = m;
                Factor& g = r.factors[fi];
                if (f.exponent > 1) {
                    if (decorated)
                        throw StructuralError("decorated kernel power in basis expansion");
                    g.exponent -= 1;
                    Factor split = f;
                    split.exponent = 1;
                    split.kind = kk;
                    r.factors.push_back(std::move(split));
                } else {
                    g.kind = kk;
                }
                r.coeff = r.coeff * CoeffElem(cc);
                out.push_back(std::move(r));
            }
        };

        switch (f.kind) {
            case KernelKind::HF:
                emit_pair(KernelKind::H, KernelKind::DeltaA, GaussRat::i());
                return true;
            case KernelKind::HAF:
                emit_pair(KernelKind::H, KernelKind::DeltaR, -GaussRat::i());
                return true;
            case KernelKind::Delta:
                emit_pair(KernelKind::DeltaR, KernelKind::DeltaA, GaussRat(-1));
                return true;
            default:
                break;
        }

        if (f.pt1 <= f.pt2) continue;
        auto transposed = [&](KernelKind kk) {
            Monomial r = m;
            Factor& g = r.factors[fi];
            if (f.exponent > 1 && decorated)
                throw StructuralError("decorated kernel power in orientation");
            Factor split = f;
            split.exponent = 1;
            split.kind = kk;
            std::swap(split.pt1, split.pt2);
            std::swap(split.d1, split.d2);
            std::swap(split.p0_1, split.p0_2);
            if (f.exponent > 1) {
                g.exponent -= 1;
                r.factors.push_back(std::move(split));
            } else {
                r.factors[fi] = std::move(split);
            }
            return r;
        };
        switch (f.kind) {
            case KernelKind::W: {
                out.push_back(transposed(KernelKind::W));
                return true;
            }
            case KernelKind::DeltaR: {
                out.push_back(transposed(KernelKind::DeltaA));
                return true;
            }
            case KernelKind::DeltaA: {
                out.push_back(transposed(KernelKind::DeltaR));
                return true;
            }
            case KernelKind::H: {
                // H(y,x) = H(x,y) - i Delta_R(x,y) + i Delta_A(x,y)
                Monomial t1 = transposed(KernelKind::H);
                Monomial t2 = transposed(KernelKind::DeltaR);
                t2.coeff = t2.coeff * CoeffElem(-GaussRat::i());
                Monomial t3 = transposed(KernelKind::DeltaA);
                t3.coeff = t3.coeff * CoeffElem(GaussRat::i());
                out.push_back(std::move(t1));
                out.push_back(std::move(t2));
                out.push_back(std::move(t3));
                return true;
            }
            default:
                break;
        }
    }
    return false;
}

// Advanced and retarded kernels on the same ordered argument pair have
// disjoint supports up to the light cone.
bool support_kills(Monomial const& m) {
    for (size_t i = 0; i < m.factors.size(); ++i) {
        Factor const& a = m.factors[i];
        if (a.tag != Factor::Tag::Kernel || a.kind != KernelKind::DeltaA) continue;
        for (size_t j = 0; j < m.factors.size(); ++j) {
            Factor const& b = m.factors[j];
            if (b.tag != Factor::Tag::Kernel || b.kind != KernelKind::DeltaR) continue;
            if (a.pt1 == b.pt1 && a.pt2 == b.pt2 && a.pt1 != a.pt2) return true;
        }
    }
    return false;
}

std::vector<Monomial> symmetrize_monomial(Monomial const& m) {
    // Integrated points carrying exactly one underived test function, grouped
    // by label.
    std::map<std::string, std::vector<std::string>> groups;
    std::map<std::string, int> testfns;
    std::set<std::string> excluded;
    for (auto const& f : m.factors) {
        if (f.tag != Factor::Tag::TestFn) continue;
        testfns[f.point]++;
        if (!f.derivs.empty() || testfns[f.point] > 1) excluded.insert(f.point);
    }
    for (auto const& f : m.factors) {
        if (f.tag != Factor::Tag::TestFn) continue;
        if (!integrated(m, f.point) || excluded.count(f.point)) continue;
        groups[f.label].push_back(f.point);
    }
    std::vector<std::vector<std::string>> orbits;
    Rat weight(1);
    for (auto& [label, pts] : groups) {
        if (pts.size() < 2 || pts.size() > 4) continue;
        std::sort(pts.begin(), pts.end());
        orbits.push_back(pts);
        Rat f(1);
        for (size_t k = 2; k <= pts.size(); ++k) f *= static_cast<long>(k);
        weight *= f;
    }
    if (orbits.empty()) return {m};

    std::vector<Monomial> out;
    std::vector<std::vector<std::string>> perms = orbits;  // current arrangement
    // Enumerate the product of permutation groups recursively.
    std::function<void(size_t)> rec = [&](size_t k) {
        if (k == orbits.size()) {
            Monomial r = m;
            r.coeff = r.coeff * CoeffElem(GaussRat(Rat(1) / weight));
            // Two-phase rename to realize the permutation simultaneously.
            for (size_t g = 0; g < orbits.size(); ++g)
                for (size_t i = 0; i < orbits[g].size(); ++i)
                    r.rename_point(orbits[g][i], orbits[g][i] + "#tmp");
            for (size_t g = 0; g < orbits.size(); ++g)
                for (size_t i = 0; i < orbits[g].size(); ++i)
                    r.rename_point(orbits[g][i] + "#tmp", perms[g][i]);
            out.push_back(std::move(r));
            return;
        }
        std::sort(perms[k].begin(), perms[k].end());
        do {
            rec(k + 1);
        } while (std::next_permutation(perms[k].begin(), perms[k].end()));
    };
    rec(0);
    return out;
}

using StepFn = std::function<bool(Monomial const&, std::vector<Monomial>&)>;

// Applies a single-rewrite step to a fixed point.
SymExpr fixpoint(SymExpr const& e, StepFn const& step, int cap, char const* what) {
    SymExpr cur = canonicalize(e);
    for (int it = 0; it < cap; ++it) {
        bool any = false;
        SymExpr next = map_monomials(cur, [&](Monomial const& m) {
            std::vector<Monomial> out;
            if (step(m, out)) {
                any = true;
                return out;
            }
            return std::vector<Monomial>{m};
        });
        if (!any) return cur;
        cur = std::move(next);
    }
    throw StructuralError(std::string("iteration cap exceeded in ") + what);
}

}  // namespace

std::vector<std::string> const& registered_rules() {
    static std::vector<std::string> const rules = {
        "deriv-normal", "eom",        "dirac-collapse",   "bianchi",   "einstein-expand",
        "metric-contract", "background", "kernel-relations", "symmetrize"};
    return rules;
}

SymExpr apply_divergence(SymExpr const& e, std::string const& index, std::string const& at) {
    for (auto const& m : e.monomials)
        for (auto const& f : m.factors) {
            bool hit = false;
            f.for_each_index([&](DIdx const& d) { hit = hit || d.label == index; });
            if (hit)
                throw StructuralError("divergence index already contracted: " + index);
        }
    DIdx d{index, true};
    return map_monomials(e, [&](Monomial const& m) {
        std::vector<Monomial> out;
        for (size_t i = 0; i < m.factors.size(); ++i) {
            auto terms = differentiate_factor(m, i, at, d);
            out.insert(out.end(), std::make_move_iterator(terms.begin()),
                       std::make_move_iterator(terms.end()));
        }
        return out;
    });
}

SymExpr apply_rules(SymExpr const& e, RuleSet const& rs) {
    SymExpr cur = canonicalize(e);
    int cap = rs.iteration_cap;
    if (rs.active("deriv-normal"))
        cur = fixpoint(cur, deriv_normal_step, cap, "deriv-normal");
    if (rs.active("eom"))
        cur = fixpoint(
            cur,
            [&](Monomial const& m, std::vector<Monomial>& out) {
                return kernel_eom_step(m, out, rs.background.convention);
            },
            cap, "eom");
    if (rs.active("dirac-collapse"))
        cur = fixpoint(cur, dirac_collapse_step, cap, "dirac-collapse");
    // The collapse can surface new derivative structures.
    if (rs.active("deriv-normal"))
        cur = fixpoint(cur, deriv_normal_step, cap, "deriv-normal");
    cur = fixpoint(
        cur,
        [&](Monomial const& m, std::vector<Monomial>& out) {
            return geom_stage_step(m, out, rs);
        },
        cap, "metric stage");
    if (rs.active("kernel-relations")) cur = kernel_normal_form(cur, rs);
    cur = fixpoint(
        cur,
        [&](Monomial const& m, std::vector<Monomial>& out) {
            return background_step(m, out, rs);
        },
        cap, "background");
    return cur;
}

SymExpr trace_contract(SymExpr const& e, std::string const& at, RuleSet const& rs) {
    SymExpr traced = map_monomials(e, [&](Monomial const& m) {
        std::map<std::string, std::pair<int, bool>> occ;  // label -> (count, up)
        for (auto const& f : m.factors)
            f.for_each_index([&](DIdx const& d) {
                occ[d.label].first++;
                occ[d.label].second = d.up;
            });
        std::vector<std::string> free_idx;
        for (auto const& [label, cu] : occ)
            if (cu.first == 1) {
                if (cu.second)
                    throw StructuralError("trace expects lower free indices");
                free_idx.push_back(label);
            }
        if (free_idx.size() != 2)
            throw StructuralError("trace expects exactly two free indices");
        Monomial r = m;
        r.factors.push_back(Factor::geom(
            GeomTensor::InvMetric, {DIdx{free_idx[0], true}, DIdx{free_idx[1], true}}, at));
        if (!r.points.count(at)) r.points[at] = false;
        return std::vector<Monomial>{r};
    });
    return apply_rules(traced, rs);
}

SymExpr reduce_modulo_eom(SymExpr const& e, std::optional<int> n, RuleSet const& rs) {
    auto field_step = [&](Monomial const& m, std::vector<Monomial>& out) {
        for (size_t fi = 0; fi < m.factors.size(); ++fi) {
            Factor const& f = m.factors[fi];
            if (f.tag != Factor::Tag::Field) continue;
            if (f.p0) {
                if (f.exponent != 1)
                    throw StructuralError("wave operator on a field power");
                if (!n) return true;  // free equation of motion: monomial dies
                Monomial base = m;
                base.lam += 1;
                Rat fact(1);
                for (int k = 2; k <= *n - 1; ++k) fact *= k;
                push_power_with_rest(out, std::move(base), fi, f.point, *n - 1, f.derivs,
                                     CoeffElem(GaussRat(Rat(1) / fact)));
                return true;
            }
            if (f.derivs.size() >= 2 && f.derivs[0].label == f.derivs[1].label) {
                if (f.exponent != 1)
                    throw StructuralError("wave operator on a field power");
                std::vector<DIdx> rest(f.derivs.begin() + 2, f.derivs.end());
                if (rest.size() > 1)
                    throw StructuralError("unsupported derivative depth on boxed field");
                // box phi = m^2 phi + xi R phi - P0 phi
                Monomial mass = m;
                mass.coeff = mass.coeff * CoeffElem::symbol(sym::m2);
                mass.factors[fi].derivs = rest;
                out.push_back(std::move(mass));
                if (rest.empty()) {
                    Monomial curv = m;
                    curv.coeff = curv.coeff * CoeffElem::symbol(sym::xi);
                    curv.factors[fi].derivs = {};
                    curv.factors.push_back(
                        Factor::geom(GeomTensor::RicciScalar, {}, f.point));
                    out.push_back(std::move(curv));
                } else {
                    Monomial c1 = m;
                    c1.coeff = c1.coeff * CoeffElem::symbol(sym::xi);
                    c1.factors[fi].derivs = {};
                    c1.factors.push_back(
                        Factor::geom(GeomTensor::RicciScalar, {}, f.point, rest));
                    out.push_back(std::move(c1));
                    Monomial c2 = m;
                    c2.coeff = c2.coeff * CoeffElem::symbol(sym::xi);
                    c2.factors[fi].derivs = rest;
                    c2.factors.push_back(Factor::geom(GeomTensor::RicciScalar, {}, f.point));
                    out.push_back(std::move(c2));
                }
                if (n) {
                    Monomial pot = m;
                    pot.lam += 1;
                    Rat fact(1);
                    for (int k = 2; k <= *n - 1; ++k) fact *= k;
                    push_power_with_rest(out, std::move(pot), fi, f.point, *n - 1, rest,
                                         CoeffElem(GaussRat(Rat(-1) / fact)));
                }
                return true;
            }
        }
        return false;
    };

    SymExpr cur = canonicalize(e);
    for (int round = 0; round < 8; ++round) {
        SymExpr next = apply_rules(cur, rs);
        next = fixpoint(next, field_step, rs.iteration_cap, "field eom");
        next = apply_rules(next, rs);
        if (equal(next, cur)) return next;
        cur = std::move(next);
    }
    throw StructuralError("iteration cap exceeded in reduce_modulo_eom");
}

SymExpr kernel_normal_form(SymExpr const& e, RuleSet rs) {
    rs.disabled.erase("kernel-relations");
    bool symmetrized = rs.disabled.count("symmetrize") == 0 || true;
    (void)symmetrized;
    int cap = rs.iteration_cap;

    auto drop_support = [](SymExpr const& x) {
        return map_monomials(x, [](Monomial const& m) {
            return support_kills(m) ? std::vector<Monomial>{} : std::vector<Monomial>{m};
        });
    };

    SymExpr cur = fixpoint(e, kernel_basis_step, cap, "kernel relations");
    cur = drop_support(cur);
    cur = map_monomials(cur, symmetrize_monomial);
    cur = fixpoint(cur, kernel_basis_step, cap, "kernel relations");
    cur = drop_support(cur);
    return cur;
}

std::pair<SymExpr, SymExpr> split_boundary_terms(SymExpr const& e) {
    SymExpr kept = SymExpr::zero(e.truncation), boundary = SymExpr::zero(e.truncation);
    for (auto const& m : e.monomials) {
        bool bdry = false;
        for (auto const& f : m.factors)
            bdry |= f.tag == Factor::Tag::TestFn && !f.derivs.empty();
        (bdry ? boundary : kept).monomials.push_back(m);
    }
    return {canonicalize(kept), canonicalize(boundary)};
}

RuleSet parse_ruleset(std::string const& text) {
    RuleSet rs;
    std::string line;
    size_t pos = 0;
    auto known = [](std::string const& name) {
        auto const& reg = registered_rules();
        return std::find(reg.begin(), reg.end(), name) != reg.end();
    };
    while (pos <= text.size()) {
        size_t nl = text.find('\n', pos);
        line = text.substr(pos, nl == std::string::npos ? std::string::npos : nl - pos);
        pos = nl == std::string::npos ? text.size() + 1 : nl + 1;
        size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line.erase(std::remove_if(line.begin(), line.end(), ::isspace), line.end());
        if (line.empty()) continue;
        size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw StructuralError("ruleset line without '=': " + line);
        std::string key = line.substr(0, eq), val = line.substr(eq + 1);
        if (key == "regime") {
            if (val == "generic")
                rs.background.regime = Regime::Generic;
            else if (val == "minkowski")
                rs.background.regime = Regime::Minkowski;
            else if (val == "maximally-symmetric")
                rs.background.regime = Regime::MaximallySymmetric;
            else
                throw StructuralError("unknown regime: " + val);
        } else if (key == "convention") {
            if (val == "delta")
                rs.background.convention = P0Convention::Delta;
            else if (val == "i-delta" || val == "idelta")
                rs.background.convention = P0Convention::IDelta;
            else
                throw StructuralError("unknown convention: " + val);
        } else if (key == "disable") {
            if (!known(val)) throw StructuralError("unknown rule: " + val);
            rs.disabled.insert(val);
        } else if (key == "enable") {
            if (!known(val)) throw StructuralError("unknown rule: " + val);
            rs.disabled.erase(val);
        } else {
            throw StructuralError("unknown ruleset key: " + key);
        }
    }
    return rs;
}

}  // namespace paqft
