#include "paqft/emit.hpp"

#include <sstream>

namespace paqft {

json to_json(CoeffElem const& c) { return c.str(); }

static json idx_json(std::vector<DIdx> const& v) {
    json a = json::array();
    for (auto const& d : v) a.push_back(std::string(d.up ? "^" : "_") + d.label);
    return a;
}

json to_json(Factor const& f) {
    json j;
    switch (f.tag) {
        case Factor::Tag::Field:
            j["type"] = "field";
            j["point"] = f.point;
            j["derivs"] = idx_json(f.derivs);
            j["exponent"] = f.exponent;
            j["p0"] = f.p0;
            break;
        case Factor::Tag::Kernel:
            j["type"] = "kernel";
            j["kind"] = kernel_name(f.kind);
            j["points"] = {f.pt1, f.pt2};
            j["derivs1"] = idx_json(f.d1);
            j["derivs2"] = idx_json(f.d2);
            j["p0_1"] = f.p0_1;
            j["p0_2"] = f.p0_2;
            j["exponent"] = f.exponent;
            break;
        case Factor::Tag::Geom:
            j["type"] = "geom";
            j["tensor"] = geom_name(f.tensor);
            j["indices"] = idx_json(f.indices);
            j["point"] = f.point;
            j["derivs"] = idx_json(f.derivs);
            break;
        case Factor::Tag::TestFn:
            j["type"] = "testfn";
            j["label"] = f.label;
            j["point"] = f.point;
            j["derivs"] = idx_json(f.derivs);
            break;
    }
    return j;
}

json to_json(SymExpr const& e) {
    SymExpr c = canonicalize(e);
    json j;
    j["truncation"] = c.truncation ? json(*c.truncation) : json(nullptr);
    json ms = json::array();
    for (auto const& m : c.monomials) {
        json jm;
        jm["coeff"] = to_json(m.coeff);
        jm["lambda"] = m.lam;
        jm["hbar"] = m.hbar;
        json pts = json::array();
        for (auto const& [p, integ] : m.points)
            pts.push_back({{"integrated", integ}, {"label", p}});
        jm["points"] = pts;
        json fs = json::array();
        for (auto const& f : m.factors) fs.push_back(to_json(f));
        jm["factors"] = fs;
        ms.push_back(jm);
    }
    j["monomials"] = ms;
    return j;
}

namespace {

std::string const greek[] = {"alpha", "beta",  "gamma", "delta", "mu",    "nu",
                             "rho",   "sigma", "tau",   "kappa", "omega", "theta"};

std::string tex_label(std::string const& raw) {
    for (auto const& g : greek)
        if (raw == g) return "\\" + g;
    if (raw.size() >= 2 && (raw[0] == '$' || raw[0] == '%')) {
        char const* stem = raw[0] == '$' ? "x" : "\\iota";
        return std::string(stem) + "_{" + raw.substr(1) + "}";
    }
    return raw;
}

std::string tex_derivs(std::vector<DIdx> const& v) {
    std::string out;
    // Outermost operator prints first.
    for (auto it = v.rbegin(); it != v.rend(); ++it)
        out += std::string("\\partial") + (it->up ? "^{" : "_{") + tex_label(it->label) + "}";
    return out;
}

std::string tex_indices(std::vector<DIdx> const& v) {
    std::string out;
    for (auto const& d : v) out += std::string(d.up ? "^{" : "_{") + tex_label(d.label) + "}";
    return out;
}

std::string tex_kernel_kind(KernelKind k) {
    switch (k) {
        case KernelKind::H: return "H";
        case KernelKind::HF: return "H_{F}";
        case KernelKind::HAF: return "H_{AF}";
        case KernelKind::Delta: return "\\Delta";
        case KernelKind::DeltaA: return "\\Delta_{A}";
        case KernelKind::DeltaR: return "\\Delta_{R}";
        case KernelKind::DiracDelta: return "\\delta";
        case KernelKind::W: return "W";
        case KernelKind::Zero: return "0";
    }
    return "?";
}

std::string tex_geom(GeomTensor t) {
    switch (t) {
        case GeomTensor::Metric: return "g";
        case GeomTensor::InvMetric: return "g";
        case GeomTensor::Einstein: return "G";
        case GeomTensor::Ricci: return "\\mathrm{Ric}";
        case GeomTensor::RicciScalar: return "R";
        case GeomTensor::Weyl: return "C";
        case GeomTensor::V1: return "v_{1}";
    }
    return "?";
}

std::string tex_factor(Factor const& f) {
    std::ostringstream os;
    std::string expo = f.exponent == 1 ? "" : "^{" + std::to_string(f.exponent) + "}";
    switch (f.tag) {
        case Factor::Tag::Field:
            os << tex_derivs(f.derivs);
            if (f.p0) os << "P_{0}";
            os << "\\varphi" << expo << "(" << tex_label(f.point) << ")";
            break;
        case Factor::Tag::Kernel:
            os << "\\big[" << tex_derivs(f.d1);
            if (f.p0_1) os << "P_{0}^{(1)}";
            os << tex_derivs(f.d2);
            if (f.p0_2) os << "P_{0}^{(2)}";
            os << tex_kernel_kind(f.kind) << "\\big]" << expo << "(" << tex_label(f.pt1) << ","
               << tex_label(f.pt2) << ")";
            break;
        case Factor::Tag::Geom:
            os << tex_derivs(f.derivs) << tex_geom(f.tensor) << tex_indices(f.indices) << "("
               << tex_label(f.point) << ")";
            break;
        case Factor::Tag::TestFn:
            os << tex_derivs(f.derivs) << f.label << "(" << tex_label(f.point) << ")";
            break;
    }
    return os.str();
}

}  // namespace

std::string to_latex(CoeffElem const& c) {
    std::string s = c.str();
    std::string out;
    for (char ch : s) {
        if (ch == '*')
            out += " ";
        else
            out += ch;
    }
    return out;
}

std::string to_latex(SymExpr const& e) {
    SymExpr c = canonicalize(e);
    if (c.monomials.empty()) return "0";
    std::ostringstream os;
    bool first = true;
    for (auto const& m : c.monomials) {
        if (!first) os << " + ";
        first = false;
        os << "\\left(" << to_latex(m.coeff) << "\\right)";
        if (m.lam != 0) os << "\\lambda" << (m.lam == 1 ? "" : "^{" + std::to_string(m.lam) + "}");
        if (m.hbar != 0)
            os << "\\hbar" << (m.hbar == 1 ? "" : "^{" + std::to_string(m.hbar) + "}");
        for (auto const& [p, integ] : m.points)
            if (integ) os << "\\int d\\mu(" << tex_label(p) << ")";
        for (auto const& f : m.factors) os << "\\," << tex_factor(f);
    }
    return os.str();
}

std::string latex_document(std::string const& body) {
    return "\\documentclass{article}\n\\usepackage{amsmath}\n"
           "\\begin{document}\n\\begin{align*}\n" +
           body + "\n\\end{align*}\n\\end{document}\n";
}

}  // namespace paqft
