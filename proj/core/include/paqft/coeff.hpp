#pragma once

// Exact coefficient ring: multivariate polynomials in declared scalar symbols
// (m^2, xi, eta, 1/pi^2, ...) over Gaussian rationals. No floating point.

#include <boost/multiprecision/cpp_int.hpp>

#include <map>
#include <string>
#include <vector>

namespace paqft {

using Rat = boost::multiprecision::cpp_rational;

// a + b*i with exact rational a, b.
struct GaussRat {
    Rat re{0};
    Rat im{0};

    GaussRat() = default;
    GaussRat(long n) : re(n) {}
    GaussRat(Rat r) : re(std::move(r)) {}
    GaussRat(Rat r, Rat i) : re(std::move(r)), im(std::move(i)) {}

    static GaussRat i() { return GaussRat(Rat(0), Rat(1)); }
    static GaussRat frac(long num, long den) { return GaussRat(Rat(num, den)); }

    bool is_zero() const { return re == 0 && im == 0; }

    GaussRat operator-() const { return {-re, -im}; }
    GaussRat operator+(GaussRat const& o) const { return {re + o.re, im + o.im}; }
    GaussRat operator-(GaussRat const& o) const { return {re - o.re, im - o.im}; }
    GaussRat operator*(GaussRat const& o) const {
        return {re * o.re - im * o.im, re * o.im + im * o.re};
    }
    GaussRat operator/(GaussRat const& o) const {
        Rat n = o.re * o.re + o.im * o.im;
        return {(re * o.re + im * o.im) / n, (im * o.re - re * o.im) / n};
    }
    bool operator==(GaussRat const& o) const { return re == o.re && im == o.im; }
    bool operator!=(GaussRat const& o) const { return !(*this == o); }

    std::string str() const;
};

// Known scalar symbol names used across the engine.
namespace sym {
inline constexpr char const* m2 = "m2";          // mass squared
inline constexpr char const* xi = "xi";          // curvature coupling
inline constexpr char const* eta = "eta";        // improvement-term weight
inline constexpr char const* inv_pi2 = "inv_pi2";  // 1/pi^2
inline constexpr char const* v1 = "v1";          // Hadamard coefficient at coinciding points
inline constexpr char const* weyl2 = "C2";       // Weyl tensor squared
inline constexpr char const* ric2 = "Ric2";      // Ricci tensor squared
inline constexpr char const* rsq = "R2";         // scalar curvature squared
inline constexpr char const* boxR = "BoxR";      // box applied to scalar curvature
}  // namespace sym

// Monomial in scalar symbols: sorted (name, exponent>0) pairs.
struct ScalarMono {
    std::vector<std::pair<std::string, int>> vars;

    bool operator<(ScalarMono const& o) const { return vars < o.vars; }
    bool operator==(ScalarMono const& o) const { return vars == o.vars; }
    int degree_of(std::string const& name) const;
    ScalarMono times(ScalarMono const& o) const;
    std::string str() const;
};

// Polynomial: map scalar-monomial -> Gaussian-rational. Zero coefficients never stored.
class CoeffElem {
  public:
    CoeffElem() = default;
    CoeffElem(GaussRat c) { add_term(ScalarMono{}, std::move(c)); }
    CoeffElem(long n) : CoeffElem(GaussRat(n)) {}

    static CoeffElem symbol(std::string const& name, int power = 1);
    static CoeffElem frac(long num, long den) { return CoeffElem(GaussRat::frac(num, den)); }
    static CoeffElem i() { return CoeffElem(GaussRat::i()); }

    bool is_zero() const { return terms_.empty(); }
    bool is_constant() const;
    // Constant term (the coefficient of the empty monomial).
    GaussRat constant_part() const;

    void add_term(ScalarMono m, GaussRat c);

    CoeffElem operator-() const;
    CoeffElem operator+(CoeffElem const& o) const;
    CoeffElem operator-(CoeffElem const& o) const;
    CoeffElem operator*(CoeffElem const& o) const;
    bool operator==(CoeffElem const& o) const { return terms_ == o.terms_; }
    bool operator!=(CoeffElem const& o) const { return !(*this == o); }

    // Replace every occurrence of a symbol by a polynomial value.
    CoeffElem substitute(std::string const& name, CoeffElem const& value) const;

    // Collect by powers of one symbol: result[k] = coefficient of name^k.
    std::map<int, CoeffElem> collect(std::string const& name) const;

    std::map<ScalarMono, GaussRat> const& terms() const { return terms_; }

    std::string str() const;

  private:
    std::map<ScalarMono, GaussRat> terms_;
};

CoeffElem pow(CoeffElem const& base, int exp);

}  // namespace paqft
