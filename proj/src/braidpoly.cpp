#include "knotfield/braidpoly.hpp"

#include <cmath>
#include "json.hpp"
#include <sstream>

#include "knotfield/errors.hpp"

namespace knotfield {

namespace {

constexpr double kPi = 3.14159265358979323846;

template <class K>
using Laurent = std::map<int, K>;
template <class K>
using UPoly = std::vector<Laurent<K>>;  // index = power of u

GaussQ conjugate(const GaussQ& x) { return x.conj(); }
cplx conjugate(const cplx& x) { return std::conj(x); }
GaussQ imag_unit(GaussQ*) { return GaussQ::i(); }
cplx imag_unit(cplx*) { return {0, 1}; }
template <class K>
K I() {
    return imag_unit(static_cast<K*>(nullptr));
}

template <class K>
K phase_unit(const Q& phi);
template <>
GaussQ phase_unit<GaussQ>(const Q& phi) {
    Q twice = phi * 2;
    twice.canonicalize();
    if (twice.get_den() != 1)
        throw IrrationalCoefficient("phase " + phi.get_str() + "*pi gives irrational coefficients");
    mpz_class m = twice.get_num() % 4;
    if (m < 0) m += 4;
    switch (m.get_si()) {
        case 0: return GaussQ(1);
        case 1: return GaussQ::i();
        case 2: return GaussQ(-1);
        default: return -GaussQ::i();
    }
}
template <>
cplx phase_unit<cplx>(const Q& phi) {
    return std::polar(1.0, phi.get_d() * kPi);
}

template <class K>
void add_to(Laurent<K>& L, int n, const K& c) {
    auto [it, fresh] = L.try_emplace(n, c);
    if (!fresh) it->second += c;
}

template <class K>
Laurent<K> mul(const Laurent<K>& a, const Laurent<K>& b) {
    Laurent<K> r;
    for (const auto& [i, x] : a)
        for (const auto& [j, y] : b) add_to(r, i + j, x * y);
    return r;
}

template <class K>
K from_int(long n) {
    return Field<K>::from_q(Q(n));
}

// Z(tau) = X + iY as a Laurent series in E = exp(i tau / s).
template <class K>
Laurent<K> complex_series(const Trajectory& tr) {
    Laurent<K> Z;
    auto put = [&](const FourierTerm& f, bool is_y) {
        Q ks = f.frequency * tr.strands;
        ks.canonicalize();
        if (ks.get_den() != 1)
            throw NonIntegerHarmonic("frequency " + f.frequency.get_str() + " is not a multiple of 1/" +
                                     std::to_string(tr.strands));
        int k = static_cast<int>(ks.get_num().get_si());
        K ph = phase_unit<K>(f.phase_over_pi);
        K half = Field<K>::from_q(Q(f.amplitude / 2));
        if (is_y) half = half * I<K>();
        K plus, minus;
        if (f.kind == Kind::Cos) {
            plus = half * ph;
            minus = half * conjugate(ph);
        } else {
            plus = -(half * I<K>() * ph);
            minus = half * I<K>() * conjugate(ph);
        }
        add_to(Z, k, plus);
        add_to(Z, -k, minus);
    };
    for (const auto& f : tr.x) put(f, false);
    for (const auto& f : tr.y) put(f, true);
    return Z;
}

// Monic prod_j (u - Z(tau + 2 pi j)) with coefficients as Laurent series in exp(i tau).
template <class K>
UPoly<K> component_polynomial(const Trajectory& tr) {
    const int s = tr.strands;
    Laurent<K> Z = complex_series<K>(tr), Zm = {{0, Field<K>::one()}};
    std::vector<Laurent<K>> P(s + 1);
    for (int m = 1; m <= s; ++m) {
        Zm = mul(Zm, Z);
        for (const auto& [n, c] : Zm) {
            if (n % s != 0 || Field<K>::is_zero(c)) continue;
            add_to(P[m], n / s * tr.repeats, c * from_int<K>(s));
        }
    }
    // Newton identities for the elementary symmetric functions
    std::vector<Laurent<K>> e(s + 1);
    e[0] = {{0, Field<K>::one()}};
    for (int k = 1; k <= s; ++k) {
        Laurent<K> acc;
        for (int i = 1; i <= k; ++i) {
            Laurent<K> term = mul(e[k - i], P[i]);
            K sgn = from_int<K>(i % 2 == 1 ? 1 : -1);
            for (const auto& [n, c] : term) add_to(acc, n, c * sgn);
        }
        K inv = Field<K>::from_q(Q(1, k));
        for (auto& [n, c] : acc) c = c * inv;
        e[k] = acc;
    }
    UPoly<K> poly(s + 1);
    for (int k = 0; k <= s; ++k) {
        K sgn = from_int<K>(k % 2 == 0 ? 1 : -1);
        for (const auto& [n, c] : e[k])
            if (!Field<K>::is_zero(c)) poly[s - k][n] = c * sgn;
    }
    return poly;
}

template <class K>
UPoly<K> upoly_mul(const UPoly<K>& a, const UPoly<K>& b) {
    UPoly<K> r(a.size() + b.size() - 1);
    for (size_t i = 0; i < a.size(); ++i)
        for (size_t j = 0; j < b.size(); ++j)
            for (const auto& [n, c] : mul(a[i], b[j])) add_to(r[i + j], n, c);
    return r;
}

bool negligible(const GaussQ& c, double) { return c.is_zero(); }
bool negligible(const cplx& c, double scale) { return std::abs(c) <= 1e-13 * scale; }

template <class K>
TrigPolyT<K> to_trig(const UPoly<K>& up) {
    TrigPolyT<K> p;
    p.degree = static_cast<int>(up.size()) - 1;
    double big = 1;
    for (const auto& L : up)
        for (const auto& [n, c] : L) big = std::max(big, std::abs(Field<K>::to_c(c)));
    for (int du = 0; du <= p.degree; ++du) {
        const auto& L = up[du];
        int nmax = 0;
        for (const auto& [n, c] : L) nmax = std::max(nmax, std::abs(n));
        auto at = [&](int n) {
            auto it = L.find(n);
            return it == L.end() ? Field<K>::zero() : it->second;
        };
        for (int n = 0; n <= nmax; ++n) {
            if (n == 0) {
                K c = at(0);
                if (!negligible(c, big)) p.coeff[{du, 0, Kind::Cos}] = c;
                continue;
            }
            K c = at(n) + at(-n);
            K s = I<K>() * (at(n) - at(-n));
            if (!negligible(c, big)) p.coeff[{du, n, Kind::Cos}] = c;
            if (!negligible(s, big)) p.coeff[{du, n, Kind::Sin}] = s;
        }
    }
    return p;
}

template <class K>
UPoly<K> braid_product(const TrajectorySet& ts) {
    if (ts.components.empty()) throw Error("empty trajectory set");
    UPoly<K> acc = {{{0, Field<K>::one()}}};
    for (const auto& c : ts.components) acc = upoly_mul(acc, component_polynomial<K>(c));
    return acc;
}

double trig(Kind k, int n, double t) { return k == Kind::Cos ? std::cos(n * t) : std::sin(n * t); }

}  // namespace

template <class K>
K TrigPolyT<K>::get(int du, int n, Kind k) const {
    auto it = coeff.find({du, n, k});
    return it == coeff.end() ? Field<K>::zero() : it->second;
}

template <class K>
std::vector<cplx> TrigPolyT<K>::u_coefficients(double t, double a) const {
    std::vector<cplx> c(degree + 1, 0.0);
    for (const auto& [key, val] : coeff)
        c[key.du] += Field<K>::to_c(val) * std::pow(a, grade(key.du)) * trig(key.kind, key.n, t);
    return c;
}

template <class K>
std::vector<cplx> TrigPolyT<K>::u_coefficients_dt(double t, double a) const {
    std::vector<cplx> c(degree + 1, 0.0);
    for (const auto& [key, val] : coeff) {
        double d = key.kind == Kind::Cos ? -key.n * std::sin(key.n * t) : key.n * std::cos(key.n * t);
        c[key.du] += Field<K>::to_c(val) * std::pow(a, grade(key.du)) * d;
    }
    return c;
}

template <class K>
cplx TrigPolyT<K>::eval(cplx u, double t, double a) const {
    auto c = u_coefficients(t, a);
    cplx acc = 0;
    for (int i = degree; i >= 0; --i) acc = acc * u + c[i];
    return acc;
}

template <class K>
std::array<cplx, 3> TrigPolyT<K>::eval_jet(cplx u, double t, double a) const {
    auto c = u_coefficients(t, a);
    auto ct = u_coefficients_dt(t, a);
    cplx f = 0, fu = 0, ft = 0;
    for (int i = degree; i >= 0; --i) {
        fu = fu * u + f;
        f = f * u + c[i];
        ft = ft * u + ct[i];
    }
    return {f, fu, ft};
}

template struct TrigPolyT<GaussQ>;
template struct TrigPolyT<cplx>;

TrigPoly build_braid_polynomial(const TrajectorySet& ts) {
    TrigPoly p = to_trig(braid_product<GaussQ>(ts));
    mpz_class L = 1;
    for (const auto& [k, c] : p.coeff) {
        mpz_lcm(L.get_mpz_t(), L.get_mpz_t(), c.re.get_den_mpz_t());
        mpz_lcm(L.get_mpz_t(), L.get_mpz_t(), c.im.get_den_mpz_t());
    }
    p.scale = Q(L);
    for (auto& [k, c] : p.coeff) c *= GaussQ(p.scale);
    return p;
}

TrigPolyN build_braid_polynomial_numeric(const TrajectorySet& ts) { return to_trig(braid_product<cplx>(ts)); }

bool has_exact_polynomial(const TrajectorySet& ts) {
    try {
        for (const auto& c : ts.components) complex_series<GaussQ>(c);
        return true;
    } catch (const IrrationalCoefficient&) {
        return false;
    }
}

template <class K>
SemiholoT<K> trig_to_semiholomorphic(const TrigPolyT<K>& p) {
    SemiholoT<K> f;
    f.degree = p.degree;
    K half = Field<K>::from_q(Q(1, 2));
    auto put = [&](const Mono& m, const K& c) {
        auto [it, fresh] = f.coeff.try_emplace(m, c);
        if (!fresh) it->second += c;
    };
    for (const auto& [key, c] : p.coeff) {
        if (key.n == 0) {
            put({key.du, 0, 0}, c);
        } else if (key.kind == Kind::Cos) {
            put({key.du, key.n, 0}, c * half);
            put({key.du, 0, key.n}, c * half);
        } else {
            K h = c * half * I<K>();
            put({key.du, key.n, 0}, h);
            put({key.du, 0, key.n}, -h);
        }
    }
    for (auto it = f.coeff.begin(); it != f.coeff.end();)
        it = Field<K>::is_zero(it->second) ? f.coeff.erase(it) : std::next(it);
    return f;
}

template <class K>
SemiholoT<K> substitute_power(const SemiholoT<K>& f, int n) {
    if (n < 1) throw Error("substitution power must be >= 1");
    SemiholoT<K> r;
    r.degree = f.degree;
    for (const auto& [m, c] : f.coeff) r.coeff[{m.du, m.dv * n, m.dvb * n}] = c;
    return r;
}

template <class K>
SemiholoT<K> make_weakly_isolated(const SemiholoT<K>& f, int k) {
    if (k < 1) throw Error("k must be >= 1");
    SemiholoT<K> r;
    r.degree = f.degree;
    for (const auto& [m, c] : f.coeff) {
        int extra = k * (f.degree - m.du);
        r.coeff[{m.du, m.dv + extra, m.dvb + extra}] = c;
    }
    return r;
}

template SemiholoT<GaussQ> trig_to_semiholomorphic(const TrigPolyT<GaussQ>&);
template SemiholoT<cplx> trig_to_semiholomorphic(const TrigPolyT<cplx>&);
template SemiholoT<GaussQ> substitute_power(const SemiholoT<GaussQ>&, int);
template SemiholoT<cplx> substitute_power(const SemiholoT<cplx>&, int);
template SemiholoT<GaussQ> make_weakly_isolated(const SemiholoT<GaussQ>&, int);
template SemiholoT<cplx> make_weakly_isolated(const SemiholoT<cplx>&, int);

SemiholoN to_numeric(const SemiholoPoly& f) {
    SemiholoN r;
    r.degree = f.degree;
    for (const auto& [m, c] : f.coeff) r.coeff[m] = c.to_complex();
    return r;
}

TrigPolyN to_numeric(const TrigPoly& p) {
    TrigPolyN r;
    r.degree = p.degree;
    r.scale = p.scale;
    for (const auto& [k, c] : p.coeff) r.coeff[k] = c.to_complex();
    return r;
}

SemiholoEval::SemiholoEval(const SemiholoN& p, double a) : degree_(p.degree), a_(a) {
    for (const auto& [m, c] : p.coeff) {
        terms_.push_back({m.du, m.dv, m.dvb, c * std::pow(a, p.grade(m))});
        max_du_ = std::max(max_du_, m.du);
        max_dv_ = std::max(max_dv_, m.dv);
        max_dvb_ = std::max(max_dvb_, m.dvb);
    }
}

namespace {
void powers(cplx x, int n, cplx* out) {
    out[0] = 1;
    for (int i = 1; i <= n; ++i) out[i] = out[i - 1] * x;
}
}  // namespace

cplx SemiholoEval::value(cplx u, cplx v, cplx vb) const {
    cplx pu[64], pv[64], pb[64];
    powers(u, max_du_, pu);
    powers(v, max_dv_, pv);
    powers(vb, max_dvb_, pb);
    cplx acc = 0;
    for (const auto& t : terms_) acc += t.c * pu[t.du] * pv[t.dv] * pb[t.dvb];
    return acc;
}

FieldJet SemiholoEval::jet(cplx u, cplx v, cplx vb) const {
    cplx pu[64], pv[64], pb[64];
    powers(u, max_du_, pu);
    powers(v, max_dv_, pv);
    powers(vb, max_dvb_, pb);
    FieldJet j{0, 0, 0, 0};
    for (const auto& t : terms_) {
        cplx base = t.c * pv[t.dv] * pb[t.dvb];
        j.f += base * pu[t.du];
        if (t.du > 0) j.fu += base * double(t.du) * pu[t.du - 1];
        cplx cu = t.c * pu[t.du];
        if (t.dv > 0) j.fv += cu * double(t.dv) * pv[t.dv - 1] * pb[t.dvb];
        if (t.dvb > 0) j.fvb += cu * double(t.dvb) * pv[t.dv] * pb[t.dvb - 1];
    }
    return j;
}

template <class K>
cplx eval_semiholomorphic(const SemiholoT<K>& f, cplx u, cplx v, double a) {
    cplx acc = 0;
    cplx vb = std::conj(v);
    for (const auto& [m, c] : f.coeff)
        acc += Field<K>::to_c(c) * std::pow(a, f.grade(m)) * std::pow(u, m.du) * std::pow(v, m.dv) *
               std::pow(vb, m.dvb);
    return acc;
}

template <class K>
cplx restrict_to_torus(const SemiholoT<K>& f, cplx u, double t, double a) {
    return eval_semiholomorphic(f, u, std::polar(1.0, -t), a);
}

template cplx eval_semiholomorphic(const SemiholoT<GaussQ>&, cplx, cplx, double);
template cplx eval_semiholomorphic(const SemiholoT<cplx>&, cplx, cplx, double);
template cplx restrict_to_torus(const SemiholoT<GaussQ>&, cplx, double, double);
template cplx restrict_to_torus(const SemiholoT<cplx>&, cplx, double, double);

// ---- Cartesian expansion ----

namespace {

using MPoly = std::map<Exponent3, GaussQ>;

MPoly mp_mul(const MPoly& a, const MPoly& b) {
    MPoly r;
    for (const auto& [ea, ca] : a)
        for (const auto& [eb, cb] : b) {
            Exponent3 e{ea[0] + eb[0], ea[1] + eb[1], ea[2] + eb[2]};
            auto [it, fresh] = r.try_emplace(e, ca * cb);
            if (!fresh) it->second += ca * cb;
        }
    for (auto it = r.begin(); it != r.end();) it = it->second.is_zero() ? r.erase(it) : std::next(it);
    return r;
}

std::vector<MPoly> mp_powers(const MPoly& base, int n) {
    std::vector<MPoly> p(n + 1);
    p[0] = {{{0, 0, 0}, GaussQ(1)}};
    for (int i = 1; i <= n; ++i) p[i] = mp_mul(p[i - 1], base);
    return p;
}

}  // namespace

int CartesianPoly::total_degree() const {
    int d = 0;
    for (const auto& [e, c] : coeff) d = std::max(d, e[0] + e[1] + e[2]);
    return d;
}

GaussQ CartesianPoly::get(int dx, int dy, int dz) const {
    auto it = coeff.find({dx, dy, dz});
    return it == coeff.end() ? GaussQ() : it->second;
}

CartesianPoly to_cartesian(const SemiholoPoly& f, const Q& a) {
    int D = 0, mu = 0, mv = 0, mb = 0;
    for (const auto& [m, c] : f.coeff) {
        D = std::max(D, m.du + m.dv + m.dvb);
        mu = std::max(mu, m.du);
        mv = std::max(mv, m.dv);
        mb = std::max(mb, m.dvb);
    }
    const GaussQ one(1), two(2), I = GaussQ::i();
    MPoly U = {{{2, 0, 0}, one}, {{0, 2, 0}, one}, {{0, 0, 2}, one}, {{0, 0, 0}, GaussQ(-1)}, {{0, 0, 1}, two * I}};
    MPoly V = {{{1, 0, 0}, two}, {{0, 1, 0}, two * I}};
    MPoly W = {{{1, 0, 0}, two}, {{0, 1, 0}, -(two * I)}};
    MPoly N = {{{2, 0, 0}, one}, {{0, 2, 0}, one}, {{0, 0, 2}, one}, {{0, 0, 0}, one}};
    auto Up = mp_powers(U, mu), Vp = mp_powers(V, mv), Wp = mp_powers(W, mb), Np = mp_powers(N, D);

    std::map<std::pair<int, int>, MPoly> vw;
    MPoly sum;
    for (const auto& [m, c] : f.coeff) {
        auto key = std::make_pair(m.dv, m.dvb);
        auto it = vw.find(key);
        if (it == vw.end()) it = vw.emplace(key, mp_mul(Vp[m.dv], Wp[m.dvb])).first;
        Q ag = 1;
        for (int g = 0; g < f.grade(m); ++g) ag *= a;
        MPoly term = mp_mul(mp_mul(Up[m.du], it->second), Np[D - m.du - m.dv - m.dvb]);
        GaussQ cc = c * GaussQ(ag);
        for (const auto& [e, x] : term) {
            auto [jt, fresh] = sum.try_emplace(e, x * cc);
            if (!fresh) jt->second += x * cc;
        }
    }
    CartesianPoly out;
    out.D = D;
    mpz_class L = 1;
    for (const auto& [e, c] : sum) {
        if (c.is_zero()) continue;
        mpz_lcm(L.get_mpz_t(), L.get_mpz_t(), c.re.get_den_mpz_t());
        mpz_lcm(L.get_mpz_t(), L.get_mpz_t(), c.im.get_den_mpz_t());
    }
    out.scale = L;
    for (const auto& [e, c] : sum)
        if (!c.is_zero()) out.coeff[e] = c * GaussQ(Q(L));
    return out;
}

namespace {

// Polynomial in z with coefficients polynomials in (x, y).
using XY = std::map<std::pair<int, int>, Q>;
using ZPoly = std::map<int, XY>;

ZPoly part_as_zpoly(const std::map<Exponent3, Q>& p) {
    ZPoly r;
    for (const auto& [e, c] : p)
        if (sgn(c) != 0) r[e[2]][{e[0], e[1]}] = c;
    return r;
}

// Exact division by z^2 + (1 + x^2 + y^2); nullopt-like flag through the bool.
bool divide_once(const ZPoly& P, ZPoly& quot) {
    ZPoly rem = P;
    quot.clear();
    int top = rem.empty() ? -1 : rem.rbegin()->first;
    for (int k = top; k >= 2; --k) {
        auto it = rem.find(k);
        if (it == rem.end() || it->second.empty()) continue;
        XY q = it->second;
        quot[k - 2] = q;
        XY& low = rem[k - 2];
        for (const auto& [e, c] : q) {
            for (auto [dx, dy] : {std::pair{0, 0}, std::pair{2, 0}, std::pair{0, 2}}) {
                auto& slot = low[{e.first + dx, e.second + dy}];
                slot -= c;
            }
        }
        for (auto jt = low.begin(); jt != low.end();) jt = sgn(jt->second) == 0 ? low.erase(jt) : std::next(jt);
        rem.erase(k);
    }
    for (const auto& [k, xy] : rem)
        for (const auto& [e, c] : xy)
            if (sgn(c) != 0) return false;
    return true;
}

std::map<Exponent3, Q> select_part(const CartesianPoly& p, bool imaginary) {
    std::map<Exponent3, Q> r;
    for (const auto& [e, c] : p.coeff) {
        const Q& v = imaginary ? c.im : c.re;
        if (sgn(v) != 0) r[e] = v;
    }
    return r;
}

std::map<Exponent3, Q> from_zpoly(const ZPoly& z) {
    std::map<Exponent3, Q> r;
    for (const auto& [k, xy] : z)
        for (const auto& [e, c] : xy)
            if (sgn(c) != 0) r[{e.first, e.second, k}] = c;
    return r;
}

}  // namespace

int sphere_factor_multiplicity(const CartesianPoly& p, bool imaginary_part) {
    ZPoly cur = part_as_zpoly(select_part(p, imaginary_part));
    if (cur.empty()) return -1;
    int k = 0;
    ZPoly q;
    while (divide_once(cur, q)) {
        ++k;
        cur = q;
        if (cur.empty()) break;
    }
    return k;
}

std::map<Exponent3, Q> divide_sphere_factor(const CartesianPoly& p, bool imaginary_part, int k) {
    ZPoly cur = part_as_zpoly(select_part(p, imaginary_part)), q;
    for (int i = 0; i < k; ++i) {
        if (!divide_once(cur, q)) throw Error("sphere factor does not divide");
        cur = q;
    }
    return from_zpoly(cur);
}

CartesianEval::CartesianEval(const CartesianPoly& p) {
    for (const auto& [e, c] : p.coeff) {
        terms_.push_back({{e[0], e[1], e[2]}, c.to_complex()});
        maxdeg_ = std::max({maxdeg_, e[0], e[1], e[2]});
    }
}

cplx CartesianEval::value(const std::array<double, 3>& p) const {
    double pw[3][64];
    for (int k = 0; k < 3; ++k) {
        pw[k][0] = 1;
        for (int i = 1; i <= maxdeg_; ++i) pw[k][i] = pw[k][i - 1] * p[k];
    }
    cplx acc = 0;
    for (const auto& t : terms_) acc += t.c * (pw[0][t.e[0]] * pw[1][t.e[1]] * pw[2][t.e[2]]);
    return acc;
}

CartesianJet CartesianEval::jet(const std::array<double, 3>& p) const {
    // pw[k][i] = p_k^i, with zero for negative i
    double pw[3][66];
    for (int k = 0; k < 3; ++k) {
        pw[k][0] = pw[k][1] = 0;
        pw[k][2] = 1;
        for (int i = 1; i <= maxdeg_; ++i) pw[k][i + 2] = pw[k][i + 1] * p[k];
    }
    auto P = [&](int k, int i) { return pw[k][i + 2]; };
    CartesianJet j{};
    for (const auto& t : terms_) {
        const int* e = t.e;
        double v0[3], v1[3], v2[3];
        for (int k = 0; k < 3; ++k) {
            v0[k] = P(k, e[k]);
            v1[k] = e[k] * P(k, e[k] - 1);
            v2[k] = e[k] * (e[k] - 1) * P(k, e[k] - 2);
        }
        j.f += t.c * (v0[0] * v0[1] * v0[2]);
        j.grad[0] += t.c * (v1[0] * v0[1] * v0[2]);
        j.grad[1] += t.c * (v0[0] * v1[1] * v0[2]);
        j.grad[2] += t.c * (v0[0] * v0[1] * v1[2]);
        j.hess[0][0] += t.c * (v2[0] * v0[1] * v0[2]);
        j.hess[1][1] += t.c * (v0[0] * v2[1] * v0[2]);
        j.hess[2][2] += t.c * (v0[0] * v0[1] * v2[2]);
        j.hess[0][1] += t.c * (v1[0] * v1[1] * v0[2]);
        j.hess[0][2] += t.c * (v1[0] * v0[1] * v1[2]);
        j.hess[1][2] += t.c * (v0[0] * v1[1] * v1[2]);
    }
    j.hess[1][0] = j.hess[0][1];
    j.hess[2][0] = j.hess[0][2];
    j.hess[2][1] = j.hess[1][2];
    return j;
}

UV stereo_to_uv(const std::array<double, 3>& p) {
    double r2 = p[0] * p[0] + p[1] * p[1] + p[2] * p[2];
    double d = r2 + 1;
    return {cplx(r2 - 1, 2 * p[2]) / d, cplx(2 * p[0], 2 * p[1]) / d};
}

std::array<double, 3> uv_to_stereo(cplx u, cplx v) {
    double d = 1 - u.real();
    return {v.real() / d, v.imag() / d, u.imag() / d};
}

// ---- exports ----

namespace {

void check_format(const std::string& f) {
    if (f != "csv" && f != "json") throw Error("unsupported polynomial format: " + f);
}

}  // namespace

std::string export_trig(const TrigPoly& p, const std::string& format) {
    check_format(format);
    if (format == "json") {
        nlohmann::json j = {{"degree", p.degree}, {"scale", p.scale.get_str()}, {"terms", nlohmann::json::array()}};
        for (const auto& [k, c] : p.coeff)
            j["terms"].push_back({{"du", k.du},
                                  {"harmonic", k.n},
                                  {"kind", k.kind == Kind::Cos ? "cos" : "sin"},
                                  {"re", c.re.get_str()},
                                  {"im", c.im.get_str()},
                                  {"a_grade", p.grade(k.du)}});
        return j.dump(2) + "\n";
    }
    std::ostringstream os;
    os << "du,harmonic,kind,re_num,re_den,im_num,im_den,a_grade\n";
    for (const auto& [k, c] : p.coeff)
        os << k.du << ',' << k.n << ',' << (k.kind == Kind::Cos ? "cos" : "sin") << ',' << c.re.get_num() << ','
           << c.re.get_den() << ',' << c.im.get_num() << ',' << c.im.get_den() << ',' << p.grade(k.du) << '\n';
    return os.str();
}

std::string export_semiholo(const SemiholoPoly& f, const std::string& format) {
    check_format(format);
    if (format == "json") {
        nlohmann::json j = {{"degree", f.degree}, {"terms", nlohmann::json::array()}};
        for (const auto& [m, c] : f.coeff)
            j["terms"].push_back({{"du", m.du},
                                  {"dv", m.dv},
                                  {"dvb", m.dvb},
                                  {"re_num", c.re.get_num().get_str()},
                                  {"re_den", c.re.get_den().get_str()},
                                  {"im_num", c.im.get_num().get_str()},
                                  {"im_den", c.im.get_den().get_str()},
                                  {"a_grade", f.grade(m)}});
        return j.dump(2) + "\n";
    }
    std::ostringstream os;
    os << "du,dv,dvb,re_num,re_den,im_num,im_den,a_grade\n";
    for (const auto& [m, c] : f.coeff)
        os << m.du << ',' << m.dv << ',' << m.dvb << ',' << c.re.get_num() << ',' << c.re.get_den() << ','
           << c.im.get_num() << ',' << c.im.get_den() << ',' << f.grade(m) << '\n';
    return os.str();
}

std::string export_semiholo(const SemiholoN& f, const std::string& format) {
    check_format(format);
    std::ostringstream os;
    os.precision(17);
    if (format == "json") {
        nlohmann::json j = {{"degree", f.degree}, {"terms", nlohmann::json::array()}};
        for (const auto& [m, c] : f.coeff)
            j["terms"].push_back({{"du", m.du},
                                  {"dv", m.dv},
                                  {"dvb", m.dvb},
                                  {"re", c.real()},
                                  {"im", c.imag()},
                                  {"a_grade", f.grade(m)}});
        return j.dump(2) + "\n";
    }
    os << "du,dv,dvb,re,im,a_grade\n";
    for (const auto& [m, c] : f.coeff)
        os << m.du << ',' << m.dv << ',' << m.dvb << ',' << c.real() << ',' << c.imag() << ',' << f.grade(m) << '\n';
    return os.str();
}

std::string export_cartesian(const CartesianPoly& p, const std::string& format) {
    check_format(format);
    if (format == "json") {
        nlohmann::json j = {{"scale", p.scale.get_str()}, {"D", p.D}, {"terms", nlohmann::json::array()}};
        for (const auto& [e, c] : p.coeff)
            j["terms"].push_back(
                {{"dx", e[0]}, {"dy", e[1]}, {"dz", e[2]}, {"re", c.re.get_str()}, {"im", c.im.get_str()}});
        return j.dump(2) + "\n";
    }
    std::ostringstream os;
    os << "# scale " << p.scale.get_str() << " D " << p.D << "\n";
    os << "dx,dy,dz,re,im\n";
    for (const auto& [e, c] : p.coeff)
        os << e[0] << ',' << e[1] << ',' << e[2] << ',' << c.re.get_str() << ',' << c.im.get_str() << '\n';
    return os.str();
}

namespace {

std::vector<std::vector<std::string>> csv_rows(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream is(text);
    std::string line;
    bool header = true;
    while (std::getline(is, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        if (header) {
            header = false;
            continue;
        }
        std::vector<std::string> cells;
        std::stringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        rows.push_back(cells);
    }
    return rows;
}

Q frac(const std::string& n, const std::string& d) {
    Q q{mpz_class(n), mpz_class(d)};
    q.canonicalize();
    return q;
}

}  // namespace

SemiholoPoly import_semiholo(const std::string& text, const std::string& format) {
    check_format(format);
    SemiholoPoly f;
    try {
        if (format == "json") {
            auto j = nlohmann::json::parse(text);
            f.degree = j.at("degree").get<int>();
            for (const auto& t : j.at("terms"))
                f.coeff[{t.at("du").get<int>(), t.at("dv").get<int>(), t.at("dvb").get<int>()}] =
                    GaussQ(frac(t.at("re_num"), t.at("re_den")), frac(t.at("im_num"), t.at("im_den")));
            return f;
        }
        for (const auto& r : csv_rows(text)) {
            if (r.size() != 8) throw ParseError("expected 8 columns");
            Mono m{std::stoi(r[0]), std::stoi(r[1]), std::stoi(r[2])};
            f.coeff[m] = GaussQ(frac(r[3], r[4]), frac(r[5], r[6]));
            f.degree = std::max(f.degree, m.du + std::stoi(r[7]));
        }
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(e.what());
    } catch (const std::invalid_argument& e) {
        throw ParseError(e.what());
    }
    return f;
}

CartesianPoly import_cartesian(const std::string& text, const std::string& format) {
    check_format(format);
    CartesianPoly p;
    try {
        if (format == "json") {
            auto j = nlohmann::json::parse(text);
            p.scale = mpz_class(j.value("scale", std::string("1")));
            p.D = j.value("D", 0);
            for (const auto& t : j.at("terms"))
                p.coeff[{t.at("dx").get<int>(), t.at("dy").get<int>(), t.at("dz").get<int>()}] =
                    GaussQ(Q(t.at("re").get<std::string>()), Q(t.at("im").get<std::string>()));
            return p;
        }
        if (text.rfind("# scale ", 0) == 0) {
            std::istringstream meta(text.substr(2, text.find('\n') - 2));
            std::string key, scale, dkey;
            meta >> key >> scale >> dkey >> p.D;
            p.scale = mpz_class(scale);
        }
        for (const auto& r : csv_rows(text)) {
            if (r.size() != 5) throw ParseError("expected 5 columns");
            p.coeff[{std::stoi(r[0]), std::stoi(r[1]), std::stoi(r[2])}] = GaussQ(Q(r[3]), Q(r[4]));
        }
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(e.what());
    } catch (const std::invalid_argument& e) {
        throw ParseError(e.what());
    }
    return p;
}

}  // namespace knotfield
