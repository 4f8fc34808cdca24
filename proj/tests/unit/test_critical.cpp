#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "knotfield/braidpoly.hpp"
#include "knotfield/critical.hpp"
#include "knotfield/errors.hpp"
#include "knotfield/fieldtrace.hpp"
#include "knotfield/knotid.hpp"
#include "knotfield/trajectory.hpp"

using namespace knotfield;

namespace {

constexpr double kPi = 3.14159265358979323846;

const SemiholoPoly& f52_exact() {
    static SemiholoPoly f = trig_to_semiholomorphic(build_braid_polynomial(catalog_trajectory("5_2")));
    return f;
}
const SemiholoN& f52() {
    static SemiholoN f = to_numeric(f52_exact());
    return f;
}
const TrigPolyN& p52() {
    static TrigPolyN p = semiholo_to_trig(f52());
    return p;
}

double circ(double a, double b) { return std::abs(std::remainder(a - b, 2 * kPi)); }

cplx horner(const std::vector<cplx>& c, cplx u) {
    cplx s = 0;
    for (size_t i = c.size(); i-- > 0;) s = s * u + c[i];
    return s;
}
std::vector<cplx> deriv(const std::vector<cplx>& c) {
    std::vector<cplx> d;
    for (size_t i = 1; i < c.size(); ++i) d.push_back(c[i] * static_cast<double>(i));
    return d;
}

// the root of p_u(., t) nearest to u0
cplx saddle_near(const TrigPolyN& p, double a, double t, cplx u0) {
    auto r = polynomial_roots(deriv(p.u_coefficients(t, a)));
    return *std::min_element(r.begin(), r.end(), [&](cplx x, cplx y) { return std::abs(x - u0) < std::abs(y - u0); });
}

// u-coefficients of f at fixed v, written out directly from the monomials
std::vector<cplx> cubic_at(const SemiholoN& f, double a, cplx v) {
    std::vector<cplx> c(f.degree + 1, 0.0);
    for (const auto& [m, k] : f.coeff)
        c[m.du] += k * std::pow(a, f.grade(m)) * std::pow(v, m.dv) * std::pow(std::conj(v), m.dvb);
    return c;
}

TraceResult trace(double a) {
    TraceConfig cfg;
    cfg.a = a;
    return trace_nodal_set(f52(), cfg);
}

const ReconnectionResult& thresholds() {
    static ReconnectionResult r = reconnection_thresholds(f52(), 0.3, 0.8);
    return r;
}

}  // namespace

TEST_SUITE("critical") {
TEST_CASE("semiholo_to_trig inverts the torus substitution") {
    std::mt19937 rng(2);
    std::uniform_real_distribution<double> U(-1, 1), T(0, 2 * kPi);
    auto direct = to_numeric(build_braid_polynomial(catalog_trajectory("5_2")));
    for (int i = 0; i < 200; ++i) {
        cplx u(0.3 * U(rng), 0.3 * U(rng));
        double t = T(rng);
        cplx a = p52().eval(u, t, 0.25), b = direct.eval(u, t, 0.25), c = restrict_to_torus(f52(), u, t, 0.25);
        CHECK(std::abs(a - b) < 1e-12);
        CHECK(std::abs(a - c) < 1e-12);
    }
}

TEST_CASE("critical curves: two branches, saddle residual and continuity") {
    const double a = 0.25;
    const int n = 2048;
    auto cc = critical_curves(p52(), a, n);
    REQUIRE(cc.size() == 2 * n);
    std::vector<std::vector<CriticalCurveSample>> br(2);
    for (const auto& s : cc) br.at(s.branch).push_back(s);
    // |du/dt| = |p_ut / p_uu| along a branch
    auto rate = [&](const CriticalCurveSample& s) {
        auto c = p52().u_coefficients(s.t, a), ct = p52().u_coefficients_dt(s.t, a);
        return std::abs(horner(deriv(ct), s.u) / horner(deriv(deriv(c)), s.u));
    };
    const double h = 2 * kPi / n;
    for (int b = 0; b < 2; ++b) {
        REQUIRE(br[b].size() == n);
        for (int k = 0; k < n; ++k) {
            const auto& s = br[b][k];
            CHECK(std::abs(horner(deriv(p52().u_coefficients(s.t, a)), s.u)) < 1e-10);
            if (k + 1 == n) continue;
            double jump = std::abs(br[b][k + 1].u - s.u);
            CHECK(jump < 10 * std::max(rate(s), rate(br[b][k + 1])) * h);
        }
    }
    // after one period the two saddles trade places
    CHECK(std::abs(br[0].back().u - br[1].front().u) < 10 * rate(br[0].back()) * h);
    CHECK(std::abs(br[1].back().u - br[0].front().u) < 10 * rate(br[1].back()) * h);
}

TEST_CASE("u^3 - v has the doubled critical curve u = 0") {
    SemiholoN f;
    f.degree = 3;
    f.coeff[{3, 0, 0}] = 1;
    f.coeff[{0, 1, 0}] = -1;
    auto p = semiholo_to_trig(f);
    std::vector<CriticalCurveSample> cc;
    CHECK_NOTHROW(cc = critical_curves(p, 0.5, 256));
    REQUIRE(cc.size() == 512);
    for (const auto& s : cc) CHECK(std::abs(s.u) < 1e-8);
}

TEST_CASE("branches that touch at isolated t raise BranchCollision") {
    // p = u^3 - 3 (1 - cos t)^2 u: saddles +-(1 - cos t) meet at t = 0
    TrigPolyN p;
    p.degree = 3;
    p.coeff[{3, 0, Kind::Cos}] = 1;
    p.coeff[{1, 0, Kind::Cos}] = -4.5;
    p.coeff[{1, 1, Kind::Cos}] = 6;
    p.coeff[{1, 2, Kind::Cos}] = -1.5;
    CHECK_THROWS_AS(critical_curves(p, 1.0, 256), BranchCollision);
}

TEST_CASE("modulus extrema scale as a^6 at fixed t") {
    auto m1 = modulus_critical_points(p52(), 0.25), m2 = modulus_critical_points(p52(), 0.5);
    REQUIRE(m1.size() == m2.size());
    CHECK(m1.size() == 14);
    for (size_t i = 0; i < m1.size(); ++i) {
        CHECK(circ(m1[i].t, m2[i].t) < 1e-8);
        CHECK(m2[i].value == doctest::Approx(64 * m1[i].value).epsilon(1e-8));
        CHECK(std::abs(m2[i].u - 2.0 * m1[i].u) < 1e-9);
        CHECK(m1[i].count == 14);
    }
}

TEST_CASE("extremum classification matches neighbouring values") {
    const double a = 0.25;
    for (auto kind : {CriticalKind::Modulus, CriticalKind::Argument}) {
        auto pts = kind == CriticalKind::Modulus ? modulus_critical_points(p52(), a) : phase_critical_points(p52(), a);
        REQUIRE(!pts.empty());
        for (const auto& r : pts) {
            if (kind == CriticalKind::Argument) CHECK(r.degenerate == (std::abs(r.second_derivative) < 1e-6));
            if (r.degenerate) continue;
            CHECK(r.is_max == (r.second_derivative < 0));
            cplx p0 = p52().eval(r.u, r.t, a);
            for (double h : {-2e-3, 2e-3}) {
                cplx u = saddle_near(p52(), a, r.t + h, r.u);
                cplx p = p52().eval(u, r.t + h, a);
                double d = kind == CriticalKind::Modulus ? std::norm(p) - std::norm(p0) : std::arg(p / p0);
                CHECK_MESSAGE((r.is_max ? d < 0 : d > 0), "t=" << r.t);
            }
        }
    }
}

TEST_CASE("phase critical points of the braid polynomial") {
    auto ph = phase_critical_points(p52(), 0.25);
    REQUIRE(ph.size() == 6);
    std::vector<double> expect = {1.46, 1.48, 2.52, 3.76, 4.80, 4.82};
    std::vector<double> ts;
    for (const auto& r : ph) {
        ts.push_back(r.t);
        CHECK(r.count == 6);
    }
    std::sort(ts.begin(), ts.end());
    for (int i = 0; i < 6; ++i) CHECK(std::abs(ts[i] - expect[i]) < 0.02);
    auto lowest = *std::min_element(ph.begin(), ph.end(),
                                    [](const auto& x, const auto& y) { return x.point.phi() < y.point.phi(); });
    CHECK(std::abs(lowest.value - 1.499) < 0.005);
}

TEST_CASE("gradients of |f|^2 and arg f match finite differences") {
    CartesianEval E(to_cartesian(f52_exact(), Q(1, 4)));
    std::mt19937 rng(17);
    std::uniform_real_distribution<double> U(-1.5, 1.5);
    const double h = 1e-6;
    int n = 0;
    while (n < 100) {
        std::array<double, 3> p{U(rng), U(rng), U(rng)};
        auto J = E.jet(p);
        if (std::abs(J.f) < 1e-3) continue;
        ++n;
        std::array<double, 3> gm, ga, fm, fa;
        for (int k = 0; k < 3; ++k) {
            gm[k] = 2 * std::real(std::conj(J.f) * J.grad[k]);
            ga[k] = std::imag(std::conj(J.f) * J.grad[k]) / std::norm(J.f);
            auto q = p, r = p;
            q[k] += h, r[k] -= h;
            cplx fq = E.value(q), fr = E.value(r);
            fm[k] = (std::norm(fq) - std::norm(fr)) / (2 * h);
            fa[k] = std::arg(fq / fr) / (2 * h);
        }
        double nm = std::hypot(gm[0], gm[1], gm[2]), na = std::hypot(ga[0], ga[1], ga[2]);
        CHECK(std::hypot(gm[0] - fm[0], gm[1] - fm[1], gm[2] - fm[2]) < 1e-5 * nm);
        CHECK(std::hypot(ga[0] - fa[0], ga[1] - fa[1], ga[2] - fa[2]) < 1e-5 * na);
    }
}

TEST_CASE("reconnection events: residuals and symmetry pairs") {
    const auto& r = thresholds();
    REQUIRE(r.events.size() == 2);
    for (const auto& ev : r.events) {
        REQUIRE(ev.points.size() == 2);
        SemiholoEval F(f52(), ev.a_threshold);
        for (const auto& p : ev.points) {
            CHECK(reconnection_residual(f52(), p, ev.a_threshold) < 1e-9);
            auto uv = stereo_to_uv(p.xyz());
            CHECK(std::abs(F.value(uv.u, uv.v, std::conj(uv.v))) < 1e-9);
        }
        const auto &p = ev.points[0], &q = ev.points[1];
        CHECK(std::hypot(p.x - q.x, p.y + q.y, p.z + q.z) < 1e-6);
    }
}

TEST_CASE("no thresholds below 0.42") {
    auto r = reconnection_thresholds(f52(), 0.05, 0.42);
    CHECK(r.events.empty());
}

TEST_CASE("retracing either side of each threshold changes the topology") {
    const auto& r = thresholds();
    REQUIRE(r.events.size() == 2);
    Equivalence rot{false, false, false, false};
    auto word = [&](double a) {
        auto t = trace(a);
        return std::make_pair(braid_word_from_curve(t.curves), static_cast<int>(t.curves.size()));
    };
    std::vector<double> at;
    for (const auto& ev : r.events) at.push_back(ev.a_threshold);
    std::sort(at.begin(), at.end());
    auto [hi_above, n_hi] = word(at[1] + 0.01);
    CHECK(n_hi == 3);
    CHECK(words_equivalent(hi_above, parse_braid_word("s1^-1 s1", 3), rot));
    auto [hi_below, n_mid] = word(at[1] - 0.01);
    CHECK(words_equivalent(hi_below, parse_braid_word("s1^-1 s1^3", 3), rot));
    auto [lo_above, n_mid2] = word(at[0] + 0.01);
    CHECK(words_equivalent(lo_above, parse_braid_word("s1^-1 s1^3", 3), rot));
    CHECK(n_mid == n_mid2);
    auto [lo_below, n_lo] = word(at[0] - 0.01);
    CHECK(n_lo == 1);
    CHECK(words_equivalent(lo_below, parse_braid_word("s1^-1 s2 s1^3 s2", 3)));
}

TEST_CASE("sphere phase critical points stay near the polynomial predictions") {
    auto seeds = phase_critical_points(p52(), 0.25);
    auto res = sphere_phase_critical_points(to_cartesian(f52_exact(), Q(1, 4)), seeds);
    CHECK(res.failures == 0);
    REQUIRE(res.points.size() == 6);
    for (const auto& p : res.points) {
        CHECK(p.residual < 1e-9);
        double best = 1e9;
        for (const auto& s : seeds) {
            double d = std::hypot(p.point.x - s.point.x, p.point.y - s.point.y, p.point.z - s.point.z);
            best = std::min(best, std::max(d, circ(p.point.phi(), s.point.phi())));
        }
        CHECK(best < 0.05);
    }
    // the transverse saddle locus against the image of c_+-(t)
    auto cc = critical_curves(p52(), 0.25, 4096);
    REQUIRE(!res.saddle_locus.empty());
    double worst = 0;
    for (const auto& s : res.saddle_locus) {
        double best = 1e9;
        for (const auto& c : cc) {
            if (circ(-c.t, s.phi) > 2 * kPi / 4096) continue;
            double rho = std::sqrt(1 - std::norm(c.u));
            auto q = uv_to_stereo(c.u, std::polar(rho, -c.t));
            best = std::min(best, std::hypot(std::hypot(q[0], q[1]) - s.R, q[2] - s.z));
        }
        worst = std::max(worst, best);
    }
    CHECK(worst < 0.05);
}

TEST_CASE("resultant double roots") {
    auto d = resultant_double_roots(f52(), 0.25);
    REQUIRE(d.size() == 4);
    for (const auto& x : d) {
        CHECK(x.r > 0);
        CHECK(x.r <= 1);
        CHECK(x.root_gap < 1e-6);
        auto roots = polynomial_roots(cubic_at(f52(), 0.25, std::polar(x.r, x.t)));
        double gap = 1e9;
        for (size_t i = 0; i < roots.size(); ++i)
            for (size_t j = i + 1; j < roots.size(); ++j) gap = std::min(gap, std::abs(roots[i] - roots[j]));
        CHECK(gap < 1e-6);
    }
    // (r, t) and u / a do not depend on a
    auto e = resultant_double_roots(f52(), 0.5);
    REQUIRE(e.size() == 4);
    for (const auto& x : d) {
        double best = 1e9;
        for (const auto& y : e)
            best = std::min(best, std::abs(std::polar(x.r, x.t) - std::polar(y.r, y.t)) + std::abs(x.u / 0.25 - y.u / 0.5));
        CHECK(best < 1e-6);
    }
}

TEST_CASE("Sylvester determinant equals the product over roots") {
    std::mt19937 rng(23);
    std::uniform_real_distribution<double> U(-1, 1);
    for (int i = 0; i < 50; ++i) {
        cplx v(U(rng), U(rng));
        auto c = cubic_at(f52(), 0.25, v);
        auto roots = polynomial_roots(c);
        auto dc = deriv(c);
        // Res(P, P') = lead^deg(P') * prod P'(r_i)
        cplx prod = std::pow(c.back(), static_cast<double>(dc.size() - 1));
        for (auto r : roots) prod *= horner(dc, r);
        cplx s = resultant_value(f52(), 0.25, v);
        CHECK(std::abs(s - prod) < 1e-8 * std::max(1.0, std::abs(prod)));
    }
}

TEST_CASE("report exports") {
    auto ph = phase_critical_points(p52(), 0.25);
    auto csv = export_critical_csv(ph);
    CHECK(csv.rfind("kind,t,u_re,u_im,branch,R,phi,z,value,second_derivative,is_max,degenerate,residual,count\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 7);
    CHECK(export_reconnection_csv(thresholds()).rfind("a_threshold,R,phi,z,x,y,residual\n", 0) == 0);
    CHECK(export_double_roots_csv({}).rfind("r,t,u_re,u_im,root_gap,residual\n", 0) == 0);
    CHECK(export_saddle_locus_csv({}) == "branch,phi,R,z\n");
}
}
