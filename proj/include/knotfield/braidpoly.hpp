#pragma once
#include <array>
#include <map>
#include <string>
#include <tuple>
#include <vector>

#include "knotfield/rational.hpp"
#include "knotfield/trajectory.hpp"

namespace knotfield {

struct TrigKey {
    int du = 0;
    int n = 0;  // harmonic, >= 0
    Kind kind = Kind::Cos;
    auto operator<=>(const TrigKey&) const = default;
};

// p(u, t) = sum c * a^grade * u^du * cos|sin(n t); grade = degree - du.
// Over GaussQ for the exact path, cplx for trajectories with irrational phases.
template <class K>
struct TrigPolyT {
    int degree = 0;
    Q scale = 1;  // integer multiplier applied to the monic product
    std::map<TrigKey, K> coeff;

    int grade(int du) const { return degree - du; }
    K get(int du, int n, Kind k) const;
    cplx eval(cplx u, double t, double a) const;
    // first partial derivatives in u and t
    std::array<cplx, 3> eval_jet(cplx u, double t, double a) const;
    // coefficients of u^0..u^degree at (t, a)
    std::vector<cplx> u_coefficients(double t, double a) const;
    std::vector<cplx> u_coefficients_dt(double t, double a) const;
};
using TrigPoly = TrigPolyT<GaussQ>;
using TrigPolyN = TrigPolyT<cplx>;

struct Mono {
    int du = 0, dv = 0, dvb = 0;
    auto operator<=>(const Mono&) const = default;
};

template <class K>
struct SemiholoT {
    int degree = 0;  // u-degree
    std::map<Mono, K> coeff;
    int grade(const Mono& m) const { return degree - m.du; }
};
using SemiholoPoly = SemiholoT<GaussQ>;
using SemiholoN = SemiholoT<cplx>;

struct FieldJet {
    cplx f, fu, fv, fvb;
};

// Fast evaluator with a bound to a number.
class SemiholoEval {
public:
    SemiholoEval() = default;
    SemiholoEval(const SemiholoN& p, double a);
    cplx value(cplx u, cplx v, cplx vb) const;
    FieldJet jet(cplx u, cplx v, cplx vb) const;
    int degree() const { return degree_; }
    double a() const { return a_; }

private:
    struct Term {
        int du, dv, dvb;
        cplx c;
    };
    std::vector<Term> terms_;
    int degree_ = 0, max_du_ = 0, max_dv_ = 0, max_dvb_ = 0;
    double a_ = 0;
};

using Exponent3 = std::array<int, 3>;

// Integer-scaled Cartesian numerator: scale * (r^2+1)^D * f(u(p), v(p), vb(p)).
struct CartesianPoly {
    std::map<Exponent3, GaussQ> coeff;  // all entries Gaussian integers
    mpz_class scale = 1;
    int D = 0;
    int total_degree() const;
    GaussQ get(int dx, int dy, int dz) const;
};

struct CartesianJet {
    cplx f;
    std::array<cplx, 3> grad;
    std::array<std::array<cplx, 3>, 3> hess;
};

class CartesianEval {
public:
    CartesianEval() = default;
    explicit CartesianEval(const CartesianPoly& p);
    cplx value(const std::array<double, 3>& p) const;
    CartesianJet jet(const std::array<double, 3>& p) const;

private:
    struct Term {
        int e[3];
        cplx c;
    };
    std::vector<Term> terms_;
    int maxdeg_ = 0;
};

// Exact construction; throws IrrationalCoefficient when a phase is not a multiple of pi/2.
TrigPoly build_braid_polynomial(const TrajectorySet& ts);
TrigPolyN build_braid_polynomial_numeric(const TrajectorySet& ts);
// Exact where possible, numeric otherwise.
bool has_exact_polynomial(const TrajectorySet& ts);

template <class K>
SemiholoT<K> trig_to_semiholomorphic(const TrigPolyT<K>& p);
template <class K>
SemiholoT<K> substitute_power(const SemiholoT<K>& f, int n);
template <class K>
SemiholoT<K> make_weakly_isolated(const SemiholoT<K>& f, int k);

SemiholoN to_numeric(const SemiholoPoly& f);
TrigPolyN to_numeric(const TrigPoly& p);

// f evaluated on the torus |v| = 1 at braid time t, using v = exp(-i t):
// the azimuth of a point on S^3 runs opposite to t.
template <class K>
cplx restrict_to_torus(const SemiholoT<K>& f, cplx u, double t, double a);
template <class K>
cplx eval_semiholomorphic(const SemiholoT<K>& f, cplx u, cplx v, double a);

CartesianPoly to_cartesian(const SemiholoPoly& f, const Q& a);

// Largest k with (1 + x^2 + y^2 + z^2)^k dividing the real or imaginary part.
int sphere_factor_multiplicity(const CartesianPoly& p, bool imaginary_part);
// Quotient of one part by (1 + x^2 + y^2 + z^2)^k (must divide exactly).
std::map<Exponent3, Q> divide_sphere_factor(const CartesianPoly& p, bool imaginary_part, int k);

// Stereographic coordinates.
struct UV {
    cplx u, v;
};
UV stereo_to_uv(const std::array<double, 3>& p);
std::array<double, 3> uv_to_stereo(cplx u, cplx v);

// Text exports. csv: one record per line with a header; json: array of objects.
std::string export_trig(const TrigPoly& p, const std::string& format);
std::string export_semiholo(const SemiholoPoly& f, const std::string& format);
std::string export_semiholo(const SemiholoN& f, const std::string& format);
std::string export_cartesian(const CartesianPoly& p, const std::string& format);
SemiholoPoly import_semiholo(const std::string& text, const std::string& format);
CartesianPoly import_cartesian(const std::string& text, const std::string& format);

}  // namespace knotfield
