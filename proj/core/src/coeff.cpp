#include "paqft/coeff.hpp"

#include <sstream>

namespace paqft {

std::string GaussRat::str() const {
    std::ostringstream os;
    if (im == 0) {
        os << re;
    } else if (re == 0) {
        os << im << "*I";
    } else {
        os << "(" << re << (im < 0 ? "" : "+") << im << "*I)";
    }
    return os.str();
}

int ScalarMono::degree_of(std::string const& name) const {
    for (auto const& [n, e] : vars)
        if (n == name) return e;
    return 0;
}

ScalarMono ScalarMono::times(ScalarMono const& o) const {
    ScalarMono out;
    auto a = vars.begin(), b = o.vars.begin();
    while (a != vars.end() || b != o.vars.end()) {
        if (b == o.vars.end() || (a != vars.end() && a->first < b->first)) {
            out.vars.push_back(*a++);
        } else if (a == vars.end() || b->first < a->first) {
            out.vars.push_back(*b++);
        } else {
            int e = a->second + b->second;
            if (e != 0) out.vars.emplace_back(a->first, e);
            ++a, ++b;
        }
    }
    return out;
}

std::string ScalarMono::str() const {
    if (vars.empty()) return "1";
    std::ostringstream os;
    bool first = true;
    for (auto const& [n, e] : vars) {
        if (!first) os << "*";
        first = false;
        os << n;
        if (e != 1) os << "^" << e;
    }
    return os.str();
}

CoeffElem CoeffElem::symbol(std::string const& name, int power) {
    CoeffElem c;
    ScalarMono m;
    if (power != 0) m.vars.emplace_back(name, power);
    c.add_term(std::move(m), GaussRat(1));
    return c;
}

bool CoeffElem::is_constant() const {
    return terms_.empty() || (terms_.size() == 1 && terms_.begin()->first.vars.empty());
}

GaussRat CoeffElem::constant_part() const {
    auto it = terms_.find(ScalarMono{});
    return it == terms_.end() ? GaussRat() : it->second;
}

void CoeffElem::add_term(ScalarMono m, GaussRat c) {
    if (c.is_zero()) return;
    auto [it, inserted] = terms_.emplace(std::move(m), c);
    if (!inserted) {
        it->second = it->second + c;
        if (it->second.is_zero()) terms_.erase(it);
    }
}

CoeffElem CoeffElem::operator-() const {
    CoeffElem out;
    for (auto const& [m, c] : terms_) out.terms_.emplace(m, -c);
    return out;
}

CoeffElem CoeffElem::operator+(CoeffElem const& o) const {
    CoeffElem out = *this;
    for (auto const& [m, c] : o.terms_) out.add_term(m, c);
    return out;
}

CoeffElem CoeffElem::operator-(CoeffElem const& o) const { return *this + (-o); }

CoeffElem CoeffElem::operator*(CoeffElem const& o) const {
    CoeffElem out;
    for (auto const& [m1, c1] : terms_)
        for (auto const& [m2, c2] : o.terms_) out.add_term(m1.times(m2), c1 * c2);
    return out;
}

CoeffElem CoeffElem::substitute(std::string const& name, CoeffElem const& value) const {
    CoeffElem out;
    for (auto const& [m, c] : terms_) {
        int deg = m.degree_of(name);
        ScalarMono rest;
        for (auto const& [n, e] : m.vars)
            if (n != name) rest.vars.emplace_back(n, e);
        CoeffElem term;
        term.add_term(std::move(rest), c);
        if (deg != 0) term = term * pow(value, deg);
        out = out + term;
    }
    return out;
}

std::map<int, CoeffElem> CoeffElem::collect(std::string const& name) const {
    std::map<int, CoeffElem> out;
    for (auto const& [m, c] : terms_) {
        int deg = m.degree_of(name);
        ScalarMono rest;
        for (auto const& [n, e] : m.vars)
            if (n != name) rest.vars.emplace_back(n, e);
        out[deg].add_term(std::move(rest), c);
    }
    for (auto it = out.begin(); it != out.end();)
        it = it->second.is_zero() ? out.erase(it) : std::next(it);
    return out;
}

std::string CoeffElem::str() const {
    if (terms_.empty()) return "0";
    std::ostringstream os;
    bool first = true;
    for (auto const& [m, c] : terms_) {
        if (!first) os << " + ";
        first = false;
        os << c.str();
        if (!m.vars.empty()) os << "*" << m.str();
    }
    return os.str();
}

CoeffElem pow(CoeffElem const& base, int exp) {
    CoeffElem out(1);
    for (int k = 0; k < exp; ++k) out = out * base;
    return out;
}

}  // namespace paqft
