#pragma once
#include <gmpxx.h>

#include <map>
#include <string>
#include <vector>

#include "knotfield/fieldtrace.hpp"
#include "knotfield/trajectory.hpp"

namespace knotfield {

// Integer Laurent polynomial in t.
class LaurentPoly {
public:
    LaurentPoly() = default;
    LaurentPoly(long c);
    static LaurentPoly monomial(long c, int e);

    const std::map<int, mpz_class>& terms() const { return c_; }
    bool is_zero() const { return c_.empty(); }
    int low() const;
    int high() const;
    mpz_class coeff(int e) const;

    LaurentPoly& operator+=(const LaurentPoly& o);
    LaurentPoly& operator-=(const LaurentPoly& o);
    friend LaurentPoly operator+(LaurentPoly a, const LaurentPoly& b) { return a += b; }
    friend LaurentPoly operator-(LaurentPoly a, const LaurentPoly& b) { return a -= b; }
    friend LaurentPoly operator*(const LaurentPoly& a, const LaurentPoly& b);
    LaurentPoly operator-() const;
    friend bool operator==(const LaurentPoly& a, const LaurentPoly& b) { return a.c_ == b.c_; }

    // Exact quotient; throws when b does not divide.
    LaurentPoly divide_exact(const LaurentPoly& b) const;
    // Unit normalization: lowest exponent 0, positive leading coefficient.
    LaurentPoly normalized() const;
    // t -> 1/t
    LaurentPoly inverted() const;
    mpz_class eval(long t) const;

private:
    void trim();
    std::map<int, mpz_class> c_;
};

std::string to_string(const LaurentPoly& p);
LaurentPoly parse_laurent(const std::string& s);  // e.g. "2t^2-3t+2"

using LaurentMatrix = std::vector<std::vector<LaurentPoly>>;
LaurentMatrix burau_matrix(const BraidWord& w);
LaurentMatrix multiply(const LaurentMatrix& a, const LaurentMatrix& b);
LaurentPoly determinant(LaurentMatrix m);

struct AlexanderResult {
    LaurentPoly poly;
    bool is_knot = true;  // false: closure is a link; poly is the collapsed single-variable value
    int components = 1;
};
AlexanderResult alexander_polynomial(const BraidWord& w);
int closure_components(const BraidWord& w);

// Free reduction (cyclic) and lexicographically least rotation.
BraidWord word_normalize(const BraidWord& w);

struct Equivalence {
    bool commute = true;   // far generators commute (also across the cyclic seam)
    bool flip = true;      // k -> s-k (conjugation by the half twist)
    bool reverse = true;   // reading direction reversed
    bool reduce = true;    // cancel adjacent inverse pairs first
};
// Canonical representative of the closure class generated by the allowed moves.
BraidWord canonical_word(const BraidWord& w, const Equivalence& eq = {});
bool words_equivalent(const BraidWord& a, const BraidWord& b, const Equivalence& eq = {});

struct ProjectedCrossing {
    double phi = 0;
    int generator_index = 0;
    int sign = 0;
    int curve_a = 0, curve_b = 0;
};
// Crossings of the (phi, R) projection; sign from the z-ordering of the strands.
std::vector<ProjectedCrossing> projected_crossings(const std::vector<NodalCurve>& curves, double dz_tol = 1e-9);
// Letters ordered in braid time, which runs opposite to phi.
BraidWord braid_word_from_curve(const std::vector<NodalCurve>& curves, double dz_tol = 1e-9);

struct KnotReport {
    int components = 0;
    BraidWord word;
    BraidWord normalized_word;
    BraidWord expected;
    AlexanderResult alexander;
    AlexanderResult expected_alexander;
    mpz_class determinant = 0;
    bool word_match = false;
    bool alexander_match = false;
    bool pass = false;
};
KnotReport verify_knot(const std::vector<NodalCurve>& curves, const BraidWord& expected);
std::string to_string(const KnotReport& r);

}  // namespace knotfield
