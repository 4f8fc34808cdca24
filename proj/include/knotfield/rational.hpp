#pragma once
#include <gmpxx.h>

#include <complex>
#include <string>

namespace knotfield {

using Q = mpq_class;
using cplx = std::complex<double>;

// Parse "p/q", "p" or a finite decimal like "0.25" into an exact rational.
Q parse_rational(const std::string& s);
std::string to_string(const Q& q);

// Exact element of Q(i).
struct GaussQ {
    Q re, im;

    GaussQ() = default;
    GaussQ(Q r) : re(std::move(r)) {}
    GaussQ(Q r, Q i) : re(std::move(r)), im(std::move(i)) {}
    GaussQ(long r) : re(r) {}

    static GaussQ i() { return {Q(0), Q(1)}; }

    bool is_zero() const { return sgn(re) == 0 && sgn(im) == 0; }
    GaussQ conj() const { return {re, -im}; }
    cplx to_complex() const { return {re.get_d(), im.get_d()}; }

    GaussQ& operator+=(const GaussQ& o) { re += o.re; im += o.im; return *this; }
    GaussQ& operator-=(const GaussQ& o) { re -= o.re; im -= o.im; return *this; }
    GaussQ& operator*=(const GaussQ& o) {
        Q r = re * o.re - im * o.im;
        im = re * o.im + im * o.re;
        re = std::move(r);
        return *this;
    }
    GaussQ& operator/=(const GaussQ& o) {
        Q n = o.re * o.re + o.im * o.im;
        *this *= o.conj();
        re /= n;
        im /= n;
        return *this;
    }
    friend GaussQ operator+(GaussQ a, const GaussQ& b) { return a += b; }
    friend GaussQ operator-(GaussQ a, const GaussQ& b) { return a -= b; }
    friend GaussQ operator*(GaussQ a, const GaussQ& b) { return a *= b; }
    friend GaussQ operator/(GaussQ a, const GaussQ& b) { return a /= b; }
    GaussQ operator-() const { return {-re, -im}; }
    friend bool operator==(const GaussQ& a, const GaussQ& b) { return a.re == b.re && a.im == b.im; }
};

std::string to_string(const GaussQ& g);

// Coefficient traits so the Laurent/polynomial machinery runs on either exact
// Gaussian rationals or doubles.
template <class K> struct Field;
template <> struct Field<GaussQ> {
    static GaussQ zero() { return GaussQ(); }
    static GaussQ one() { return GaussQ(1); }
    static bool is_zero(const GaussQ& x) { return x.is_zero(); }
    static GaussQ from_q(const Q& q) { return GaussQ(q); }
    static cplx to_c(const GaussQ& x) { return x.to_complex(); }
};
template <> struct Field<cplx> {
    static cplx zero() { return 0.0; }
    static cplx one() { return 1.0; }
    static bool is_zero(const cplx& x) { return x == 0.0; }
    static cplx from_q(const Q& q) { return q.get_d(); }
    static cplx to_c(const cplx& x) { return x; }
};

}  // namespace knotfield
