#include "knotfield/critical.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <optional>
#include <sstream>

#include "knotfield/errors.hpp"
#include "knotfield/parallel.hpp"

namespace knotfield {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

double wrap(double x) {
    x = std::fmod(x, kTwoPi);
    return x < 0 ? x + kTwoPi : x;
}

std::vector<cplx> derivative(const std::vector<cplx>& c) {
    std::vector<cplx> d(c.size() > 1 ? c.size() - 1 : 1, 0.0);
    for (std::size_t j = 1; j < c.size(); ++j) d[j - 1] = static_cast<double>(j) * c[j];
    return d;
}

cplx horner(const std::vector<cplx>& c, cplx u) {
    cplx acc = 0;
    for (std::size_t i = c.size(); i-- > 0;) acc = acc * u + c[i];
    return acc;
}

StereoPoint torus_image(cplx u, double t) {
    double m = std::max(0.0, 1 - std::norm(u));
    auto p = uv_to_stereo(u, std::sqrt(m) * std::polar(1.0, -t));
    return {p[0], p[1], p[2]};
}

// saddle root of p_u near guess at time t
cplx polish_saddle(const TrigPolyN& p, double a, double t, cplx guess) {
    auto c = p.u_coefficients(t, a);
    auto d1 = derivative(c), d2 = derivative(d1);
    cplx u = guess;
    for (int it = 0; it < 40; ++it) {
        cplx g = horner(d1, u), gp = horner(d2, u);
        if (std::abs(gp) < 1e-300) break;
        cplx du = g / gp;
        u -= du;
        if (std::abs(du) < 1e-15 * (1 + std::abs(u))) break;
    }
    return u;
}

double functional_dt(const TrigPolyN& p, double a, double t, cplx u, CriticalKind kind) {
    auto j = p.eval_jet(u, t, a);
    if (kind == CriticalKind::Modulus) return 2 * std::real(std::conj(j[0]) * j[2]);
    return std::imag(j[2] / j[0]);
}

double functional_value(const TrigPolyN& p, double a, double t, cplx u, CriticalKind kind) {
    cplx v = p.eval(u, t, a);
    return kind == CriticalKind::Modulus ? std::norm(v) : wrap(std::arg(v));
}

std::vector<CriticalPointReport> extrema_along_branches(const TrigPolyN& p, double a, int n_t, CriticalKind kind) {
    auto samples = critical_curves(p, a, n_t);
    int nb = std::max(1, p.degree - 1);
    std::vector<std::vector<cplx>> B(nb, std::vector<cplx>(n_t));
    for (const auto& s : samples) B[s.branch][static_cast<int>(std::lround(s.t / kTwoPi * n_t)) % n_t] = s.u;

    double scale = 0;
    if (kind == CriticalKind::Modulus)
        for (int b = 0; b < nb; ++b)
            for (int k = 0; k < n_t; ++k) scale = std::max(scale, functional_value(p, a, k * kTwoPi / n_t, B[b][k], kind));
    else
        scale = 1;

    std::vector<CriticalPointReport> out;
    const double h = kTwoPi / n_t;
    for (int b = 0; b < nb; ++b) {
        // identical branches (multiple saddle) would report duplicates
        bool dup = false;
        for (int b2 = 0; b2 < b; ++b2)
            if (std::abs(B[b][0] - B[b2][0]) < 1e-9) dup = true;
        if (dup) continue;
        std::vector<cplx> ext(n_t + 1);
        for (int k = 0; k < n_t; ++k) ext[k] = B[b][k];
        ext[n_t] = polish_saddle(p, a, kTwoPi, B[b][n_t - 1]);
        std::vector<double> g(n_t + 1);
        for (int k = 0; k <= n_t; ++k) g[k] = functional_dt(p, a, k * h, ext[k], kind);
        for (int k = 0; k < n_t; ++k) {
            if (!(g[k] == 0 || (g[k] < 0) != (g[k + 1] < 0))) continue;
            if (g[k + 1] == 0) continue;  // counted at the next interval
            double lo = k * h, hi = (k + 1) * h, glo = g[k];
            cplx ulo = ext[k], uhi = ext[k + 1];
            double tm = lo;
            cplx um = ulo;
            if (g[k] != 0) {
                for (int it = 0; it < 80 && hi - lo > 1e-15; ++it) {
                    tm = 0.5 * (lo + hi);
                    um = polish_saddle(p, a, tm, 0.5 * (ulo + uhi));
                    double gm = functional_dt(p, a, tm, um, kind);
                    if ((gm < 0) == (glo < 0)) {
                        lo = tm, ulo = um, glo = gm;
                    } else {
                        hi = tm, uhi = um;
                    }
                }
            }
            // a sign flip through a pole of the phase rate is not an extremum
            if (kind == CriticalKind::Argument && std::abs(p.eval(um, tm, a)) < 1e-12) continue;
            CriticalPointReport r;
            r.kind = kind;
            r.t = wrap(tm);
            r.u = um;
            r.branch = b;
            r.point = torus_image(um, tm);
            r.value = functional_value(p, a, tm, um, kind);
            r.residual = std::abs(functional_dt(p, a, tm, um, kind));
            const double fd = 1e-5;
            double gp = functional_dt(p, a, tm + fd, polish_saddle(p, a, tm + fd, um), kind);
            double gm = functional_dt(p, a, tm - fd, polish_saddle(p, a, tm - fd, um), kind);
            r.second_derivative = (gp - gm) / (2 * fd);
            r.is_max = r.second_derivative < 0;
            r.degenerate = std::abs(r.second_derivative) < 1e-6 * scale;
            out.push_back(r);
        }
    }
    std::sort(out.begin(), out.end(), [](const auto& x, const auto& y) {
        return x.t != y.t ? x.t < y.t : x.branch < y.branch;
    });
    // the seam at t = 2pi can produce the same point from both ends
    std::vector<CriticalPointReport> uniq;
    for (const auto& r : out) {
        bool seen = false;
        for (const auto& q : uniq)
            if (std::abs(std::remainder(q.t - r.t, kTwoPi)) < 1e-9 && std::abs(q.u - r.u) < 1e-7) seen = true;
        if (!seen) uniq.push_back(r);
    }
    for (auto& r : uniq) r.count = static_cast<int>(uniq.size());
    return uniq;
}

}  // namespace

std::vector<cplx> polynomial_roots(const std::vector<cplx>& c_in) {
    std::vector<cplx> c = c_in;
    while (c.size() > 1 && std::abs(c.back()) == 0) c.pop_back();
    int n = static_cast<int>(c.size()) - 1;
    if (n < 1) return {};
    Eigen::MatrixXcd M = Eigen::MatrixXcd::Zero(n, n);
    for (int i = 1; i < n; ++i) M(i, i - 1) = 1;
    for (int i = 0; i < n; ++i) M(i, n - 1) = -c[i] / c[n];
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(M, false);
    std::vector<cplx> r(es.eigenvalues().data(), es.eigenvalues().data() + n);
    auto d = derivative(c);
    for (auto& z : r)
        for (int it = 0; it < 3; ++it) {
            cplx dp = horner(d, z);
            if (std::abs(dp) < 1e-12 * std::abs(c[n])) break;  // leave clustered roots alone
            cplx step = horner(c, z) / dp;
            if (!(std::abs(step) < 1e-3 * (1 + std::abs(z)))) break;
            z -= step;
        }
    return r;
}

TrigPolyN semiholo_to_trig(const SemiholoN& f) {
    TrigPolyN p;
    p.degree = f.degree;
    p.scale = 1;
    for (const auto& [m, c] : f.coeff) {
        int n = m.dv - m.dvb;  // v^n with v = exp(-i t)
        int an = std::abs(n);
        p.coeff[{m.du, an, Kind::Cos}] += c;
        if (n != 0) p.coeff[{m.du, an, Kind::Sin}] += cplx(0, n > 0 ? -1 : 1) * c;
    }
    return p;
}

std::vector<CriticalCurveSample> critical_curves(const TrigPolyN& p, double a, int n_t) {
    if (p.degree < 2) throw Error("critical curves need u-degree at least 2");
    if (n_t < 8) throw Error("t-grid too small");
    const int nb = p.degree - 1;
    std::vector<std::vector<cplx>> B(n_t);
    std::vector<double> sep(n_t, 1e300);
    for (int k = 0; k < n_t; ++k) {
        double t = k * kTwoPi / n_t;
        auto roots = polynomial_roots(derivative(p.u_coefficients(t, a)));
        if (static_cast<int>(roots.size()) != nb) throw NumericalError("derivative lost degree at t = " + std::to_string(t));
        for (auto& r : roots) r = polish_saddle(p, a, t, r);
        for (int i = 0; i < nb; ++i)
            for (int j = i + 1; j < nb; ++j) sep[k] = std::min(sep[k], std::abs(roots[i] - roots[j]));
        if (k == 0) {
            std::sort(roots.begin(), roots.end(), [](cplx x, cplx y) { return x.real() != y.real() ? x.real() < y.real() : x.imag() < y.imag(); });
            B[k] = roots;
            continue;
        }
        // match to previous sample by minimal total displacement
        const auto& prev = B[k - 1];
        std::vector<int> perm(nb), best;
        std::iota(perm.begin(), perm.end(), 0);
        double bestc = 1e300;
        if (nb <= 7) {
            do {
                double c = 0;
                for (int i = 0; i < nb; ++i) c += std::abs(roots[perm[i]] - prev[i]);
                if (c < bestc) bestc = c, best = perm;
            } while (std::next_permutation(perm.begin(), perm.end()));
        } else {
            std::vector<bool> used(nb, false);
            best.assign(nb, 0);
            for (int i = 0; i < nb; ++i) {
                int bj = -1;
                for (int j = 0; j < nb; ++j)
                    if (!used[j] && (bj < 0 || std::abs(roots[j] - prev[i]) < std::abs(roots[bj] - prev[i]))) bj = j;
                used[bj] = true, best[i] = bj;
            }
        }
        B[k].resize(nb);
        for (int i = 0; i < nb; ++i) B[k][i] = roots[best[i]];
    }
    if (nb > 1) {
        double mx = *std::max_element(sep.begin(), sep.end());
        double mn = *std::min_element(sep.begin(), sep.end());
        double umag = 0;
        for (const auto& row : B)
            for (auto u : row) umag = std::max(umag, std::abs(u));
        double tol = 1e-8 * std::max(umag, 1e-300);
        if (mn < tol && mx >= tol) {
            int k = static_cast<int>(std::min_element(sep.begin(), sep.end()) - sep.begin());
            throw BranchCollision("saddle branches coincide near t = " + std::to_string(k * kTwoPi / n_t));
        }
    }
    std::vector<CriticalCurveSample> out;
    out.reserve(static_cast<std::size_t>(n_t) * nb);
    for (int b = 0; b < nb; ++b)
        for (int k = 0; k < n_t; ++k) out.push_back({k * kTwoPi / n_t, B[k][b], b});
    return out;
}

std::vector<CriticalPointReport> modulus_critical_points(const TrigPolyN& p, double a, int n_t) {
    return extrema_along_branches(p, a, n_t, CriticalKind::Modulus);
}

std::vector<CriticalPointReport> phase_critical_points(const TrigPolyN& p, double a, int n_t) {
    return extrema_along_branches(p, a, n_t, CriticalKind::Argument);
}

// ---- reconnection ----

namespace {

struct FieldGrad {
    cplx f;
    std::array<cplx, 3> g;
};

FieldGrad field_and_gradient(const SemiholoEval& F, const std::array<double, 3>& p) {
    double x = p[0], y = p[1], z = p[2];
    double r2 = x * x + y * y + z * z, d = r2 + 1;
    auto uv = stereo_to_uv(p);
    auto j = F.jet(uv.u, uv.v, std::conj(uv.v));
    FieldGrad out{j.f, {}};
    cplx w(x, y);
    for (int k = 0; k < 3; ++k) {
        cplx du = 4 * p[k] * cplx(1, -z) / (d * d);
        if (k == 2) du += cplx(0, 2) / d;
        cplx dv = -4.0 * w * p[k] / (d * d);
        if (k == 0) dv += 2 / d;
        if (k == 1) dv += cplx(0, 2) / d;
        out.g[k] = j.fu * du + j.fv * dv + j.fvb * std::conj(dv);
    }
    return out;
}

using Vec5 = Eigen::Matrix<double, 5, 1>;

Vec5 reconnection_system(const SemiholoN& f, const Vec5& X) {
    SemiholoEval F(f, X[3]);
    auto fg = field_and_gradient(F, {X[0], X[1], X[2]});
    cplx e = std::polar(1.0, X[4]);
    Vec5 r;
    r << fg.f.real(), fg.f.imag(), std::real(e * fg.g[0]), std::real(e * fg.g[1]), std::real(e * fg.g[2]);
    return r;
}

double initial_theta(const FieldGrad& fg) {
    Eigen::Matrix<double, 3, 2> M;
    for (int k = 0; k < 3; ++k) M(k, 0) = fg.g[k].real(), M(k, 1) = fg.g[k].imag();
    Eigen::JacobiSVD<Eigen::Matrix<double, 3, 2>> svd(M, Eigen::ComputeFullV);
    Eigen::Vector2d w = svd.matrixV().col(1);  // cos(theta) Re g - sin(theta) Im g = 0
    return std::atan2(-w[1], w[0]);
}

struct NewtonOut {
    bool ok = false;
    Vec5 X;
    double residual = 0;
};

NewtonOut solve_reconnection(const SemiholoN& f, Vec5 X, double a_lo, double a_hi) {
    NewtonOut o;
    Vec5 r = reconnection_system(f, X);
    for (int it = 0; it < 60; ++it) {
        Eigen::Matrix<double, 5, 5> J;
        for (int c = 0; c < 5; ++c) {
            double h = 1e-7 * std::max(1.0, std::abs(X[c]));
            Vec5 Xp = X, Xm = X;
            Xp[c] += h, Xm[c] -= h;
            J.col(c) = (reconnection_system(f, Xp) - reconnection_system(f, Xm)) / (2 * h);
        }
        Vec5 dx = J.fullPivLu().solve(-r);
        if (!dx.allFinite()) return o;
        double lam = 1;
        Vec5 Xn, rn;
        for (int ls = 0; ls < 30; ++ls, lam *= 0.5) {
            Xn = X + lam * dx;
            if (Xn[3] <= 0) continue;
            rn = reconnection_system(f, Xn);
            if (rn.norm() < (1 - 1e-4 * lam) * r.norm() || rn.norm() < 1e-14) break;
        }
        X = Xn, r = rn;
        if (r.norm() < 1e-13 || (lam * dx).norm() < 1e-14) break;
        if (X[3] > 2 * a_hi + 1 || X.head<3>().norm() > 1e3) return o;
    }
    o.X = X;
    o.residual = r.norm();
    o.ok = o.residual < 1e-10 && X[3] >= a_lo && X[3] <= a_hi;
    return o;
}

}  // namespace

double reconnection_residual(const SemiholoN& f, const StereoPoint& p, double a) {
    SemiholoEval F(f, a);
    auto fg = field_and_gradient(F, p.xyz());
    Vec5 X;
    X << p.x, p.y, p.z, a, initial_theta(fg);
    return reconnection_system(f, X).norm();
}

ReconnectionResult reconnection_thresholds(const SemiholoN& f, double a_lo, double a_hi, int workers) {
    if (!(a_lo > 0 && a_hi <= 1 && a_lo < a_hi)) throw Error("a range must lie in (0, 1]");
    // saddle extrema of the braid polynomial move with a only through u = a w
    auto p = semiholo_to_trig(f);
    const double a_ref = 0.25;
    auto mods = modulus_critical_points(p, a_ref, 2048);
    const int na = 12;
    struct Seed {
        double t;
        cplx w;
        double a;
    };
    std::vector<Seed> seeds;
    for (const auto& m : mods)
        for (int i = 0; i < na; ++i) seeds.push_back({m.t, m.u / a_ref, a_lo + (a_hi - a_lo) * (i + 0.5) / na});

    std::vector<NewtonOut> res(seeds.size());
    parallel_for(seeds.size(), workers, [&](std::size_t i) {
        const auto& s = seeds[i];
        cplx u = s.a * s.w;
        if (std::norm(u) >= 1) return;
        auto pt = torus_image(u, s.t);
        SemiholoEval F(f, s.a);
        auto fg = field_and_gradient(F, pt.xyz());
        Vec5 X;
        X << pt.x, pt.y, pt.z, s.a, initial_theta(fg);
        res[i] = solve_reconnection(f, X, a_lo, a_hi);
    });

    ReconnectionResult out;
    out.seeds = static_cast<int>(seeds.size());
    struct Hit {
        double a;
        StereoPoint p;
        double res;
    };
    std::vector<Hit> hits;
    for (const auto& r : res) {
        if (!r.ok) {
            ++out.failures;
            continue;
        }
        StereoPoint q{r.X[0], r.X[1], r.X[2]};
        bool seen = false;
        for (const auto& h : hits)
            if (std::abs(h.a - r.X[3]) < 1e-7 && std::hypot(h.p.x - q.x, h.p.y - q.y, h.p.z - q.z) < 1e-6) seen = true;
        if (!seen) hits.push_back({r.X[3], q, r.residual});
    }
    std::sort(hits.begin(), hits.end(), [](const Hit& x, const Hit& y) {
        if (std::abs(x.a - y.a) > 1e-7) return x.a > y.a;
        return x.p.phi() < y.p.phi();
    });
    for (const auto& h : hits) {
        if (out.events.empty() || std::abs(out.events.back().a_threshold - h.a) > 1e-7)
            out.events.push_back({h.a, {}, {}});
        out.events.back().points.push_back(h.p);
        out.events.back().residuals.push_back(h.res);
    }
    return out;
}

// ---- phase critical points on the sphere ----

namespace {

struct ArgSystem {
    Eigen::Vector3d G;  // Im(conj f grad f)
    Eigen::Matrix3d J;
    double fabs2 = 0;
};

ArgSystem arg_system(const CartesianEval& E, const Eigen::Vector3d& x) {
    auto j = E.jet({x[0], x[1], x[2]});
    ArgSystem s;
    s.fabs2 = std::norm(j.f);
    for (int k = 0; k < 3; ++k) {
        s.G[k] = std::imag(std::conj(j.f) * j.grad[k]);
        for (int l = 0; l < 3; ++l) s.J(k, l) = std::imag(std::conj(j.grad[l]) * j.grad[k] + std::conj(j.f) * j.hess[k][l]);
    }
    return s;
}

}  // namespace

SpherePhaseResult sphere_phase_critical_points(const CartesianPoly& f, const std::vector<CriticalPointReport>& seeds,
                                               int locus_steps) {
    CartesianEval E(f);
    SpherePhaseResult out;
    for (const auto& s : seeds) {
        Eigen::Vector3d x(s.point.x, s.point.y, s.point.z);
        bool ok = false;
        double res = 0;
        for (int it = 0; it < 60; ++it) {
            auto A = arg_system(E, x);
            res = A.G.norm() / A.fabs2;
            if (res < 1e-12) {
                ok = true;
                break;
            }
            Eigen::Vector3d dx = A.J.fullPivLu().solve(-A.G);
            if (!dx.allFinite()) break;
            double lam = 1;
            for (int ls = 0; ls < 30; ++ls, lam *= 0.5) {
                auto B = arg_system(E, x + lam * dx);
                if (B.G.norm() / B.fabs2 < res) break;
            }
            x += lam * dx;
            if (x.norm() > 1e3) break;
        }
        if (!ok) {
            auto A = arg_system(E, x);
            res = A.G.norm() / A.fabs2;
            ok = res < 1e-9;
        }
        if (!ok) {
            ++out.failures;
            continue;
        }
        CriticalPointReport r = s;
        r.point = {x[0], x[1], x[2]};
        auto uv = stereo_to_uv({x[0], x[1], x[2]});
        r.u = uv.u;
        r.t = wrap(-r.point.phi());
        r.value = wrap(std::arg(E.value({x[0], x[1], x[2]})));
        r.residual = res;
        auto A = arg_system(E, x);
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(0.5 * (A.J + A.J.transpose()) / A.fabs2, Eigen::EigenvaluesOnly);
        r.second_derivative = es.eigenvalues().cwiseAbs().minCoeff();
        r.degenerate = r.second_derivative < 1e-6;
        out.points.push_back(r);
    }
    for (auto& r : out.points) r.count = static_cast<int>(out.points.size());

    // transverse saddles: grad_{R,z} arg f = 0 at each azimuth, continued from the saddle-branch images
    std::vector<std::pair<int, StereoPoint>> starts;
    for (const auto& s : seeds) {
        bool have = false;
        for (const auto& q : starts) have |= q.first == s.branch;
        if (!have) starts.push_back({s.branch, s.point});
    }
    for (const auto& [branch, p0] : starts) {
        double R = p0.R(), z = p0.z, phi0 = p0.phi();
        for (int k = 0; k < locus_steps; ++k) {
            double phi = phi0 + k * kTwoPi / locus_steps;
            double c = std::cos(phi), sn = std::sin(phi);
            bool ok = false;
            for (int it = 0; it < 40; ++it) {
                auto A = arg_system(E, Eigen::Vector3d(R * c, R * sn, z));
                Eigen::Vector2d g(c * A.G[0] + sn * A.G[1], A.G[2]);
                if (g.norm() / A.fabs2 < 1e-11) {
                    ok = true;
                    break;
                }
                Eigen::Matrix2d J;
                J(0, 0) = c * (c * A.J(0, 0) + sn * A.J(0, 1)) + sn * (c * A.J(1, 0) + sn * A.J(1, 1));
                J(0, 1) = c * A.J(0, 2) + sn * A.J(1, 2);
                J(1, 0) = c * A.J(2, 0) + sn * A.J(2, 1);
                J(1, 1) = A.J(2, 2);
                Eigen::Vector2d d = J.fullPivLu().solve(-g);
                if (!d.allFinite()) break;
                if (d.norm() > 0.2) d *= 0.2 / d.norm();
                R += d[0], z += d[1];
            }
            if (!ok) {
                ++out.failures;
                continue;
            }
            out.saddle_locus.push_back({wrap(phi), R, z, branch});
        }
    }
    return out;
}

// ---- resultant ----

namespace {

struct UTerm {
    int du, dv, dvb;
    cplx c;
};

std::vector<UTerm> bind_terms(const SemiholoN& f, double a) {
    std::vector<UTerm> t;
    for (const auto& [m, c] : f.coeff) t.push_back({m.du, m.dv, m.dvb, c * std::pow(a, f.grade(m))});
    return t;
}

std::vector<cplx> coeffs_at(const std::vector<UTerm>& terms, int degree, cplx v) {
    std::vector<cplx> c(degree + 1, 0.0);
    cplx vb = std::conj(v);
    for (const auto& t : terms) c[t.du] += t.c * std::pow(v, t.dv) * std::pow(vb, t.dvb);
    return c;
}

cplx sylvester(const std::vector<cplx>& A) {
    auto B = derivative(A);
    int m = static_cast<int>(A.size()) - 1, n = m - 1, N = m + n;
    Eigen::MatrixXcd S = Eigen::MatrixXcd::Zero(N, N);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j <= m; ++j) S(i, i + j) = A[m - j];
    for (int i = 0; i < m; ++i)
        for (int j = 0; j <= n; ++j) S(n + i, i + j) = B[n - j];
    return S.partialPivLu().determinant();
}

double arg_step(cplx from, cplx to) { return std::arg(to / from); }

}  // namespace

cplx resultant_value(const SemiholoN& f, double a, cplx v) { return sylvester(coeffs_at(bind_terms(f, a), f.degree, v)); }

std::vector<DoubleRoot> resultant_double_roots(const SemiholoN& f, double a, int nr, int nt, int workers) {
    if (!(a > 0)) throw Error("a must be positive");
    if (f.degree < 2) return {};
    auto terms = bind_terms(f, a);
    const int deg = f.degree;
    std::vector<cplx> grid(static_cast<std::size_t>(nr + 1) * nt);
    parallel_for(nr + 1, workers, [&](std::size_t i) {
        double r = static_cast<double>(i) / nr;
        for (int j = 0; j < nt; ++j) grid[i * nt + j] = sylvester(coeffs_at(terms, deg, std::polar(r, j * kTwoPi / nt)));
    });
    auto G = [&](int i, int j) { return grid[static_cast<std::size_t>(i) * nt + ((j % nt) + nt) % nt]; };
    std::vector<std::pair<double, double>> cells;
    for (int i = 0; i < nr; ++i)
        for (int j = 0; j < nt; ++j) {
            cplx c0 = G(i, j), c1 = G(i + 1, j), c2 = G(i + 1, j + 1), c3 = G(i, j + 1);
            if (c0 == 0.0 || c1 == 0.0 || c2 == 0.0 || c3 == 0.0) {
                cells.push_back({(i + 0.5) / nr, (j + 0.5) * kTwoPi / nt});
                continue;
            }
            double w = arg_step(c0, c1) + arg_step(c1, c2) + arg_step(c2, c3) + arg_step(c3, c0);
            if (std::lround(w / kTwoPi) != 0) cells.push_back({(i + 0.5) / nr, (j + 0.5) * kTwoPi / nt});
        }

    // refine on f = f_u = 0 in (u, v)
    auto system = [&](const Eigen::Vector4d& X) {
        auto c = coeffs_at(terms, deg, cplx(X[2], X[3]));
        cplx u(X[0], X[1]);
        cplx F = horner(c, u), Fu = horner(derivative(c), u);
        return Eigen::Vector4d(F.real(), F.imag(), Fu.real(), Fu.imag());
    };
    std::vector<std::optional<DoubleRoot>> found(cells.size());
    parallel_for(cells.size(), workers, [&](std::size_t ci) {
        cplx v = std::polar(cells[ci].first, cells[ci].second);
        auto c = coeffs_at(terms, deg, v);
        auto roots = polynomial_roots(c);
        double best = 1e300;
        cplx u0;
        for (std::size_t i = 0; i < roots.size(); ++i)
            for (std::size_t j = i + 1; j < roots.size(); ++j)
                if (std::abs(roots[i] - roots[j]) < best) best = std::abs(roots[i] - roots[j]), u0 = 0.5 * (roots[i] + roots[j]);
        Eigen::Vector4d X(u0.real(), u0.imag(), v.real(), v.imag());
        Eigen::Vector4d r = system(X);
        double sc = 0;
        for (auto& q : c) sc = std::max(sc, std::abs(q));
        for (int it = 0; it < 60 && r.norm() > 1e-14 * sc; ++it) {
            Eigen::Matrix4d J;
            for (int k = 0; k < 4; ++k) {
                Eigen::Vector4d Xp = X, Xm = X;
                Xp[k] += 1e-7, Xm[k] -= 1e-7;
                J.col(k) = (system(Xp) - system(Xm)) / 2e-7;
            }
            Eigen::Vector4d dx = J.fullPivLu().solve(-r);
            if (!dx.allFinite()) break;
            if (dx.norm() > 0.1) dx *= 0.1 / dx.norm();
            X += dx;
            r = system(X);
        }
        cplx vf(X[2], X[3]);
        double rr = std::abs(vf);
        if (!(r.norm() < 1e-10 * std::max(1.0, sc)) || rr <= 0 || rr > 1 + 1e-12) return;
        DoubleRoot d;
        d.r = rr;
        d.t = wrap(std::arg(vf));
        d.u = cplx(X[0], X[1]);
        d.residual = r.norm() / std::max(1.0, sc);
        auto rts = polynomial_roots(coeffs_at(terms, deg, vf));
        d.root_gap = 1e300;
        for (std::size_t i = 0; i < rts.size(); ++i)
            for (std::size_t j = i + 1; j < rts.size(); ++j) d.root_gap = std::min(d.root_gap, std::abs(rts[i] - rts[j]));
        found[ci] = d;
    });
    std::vector<DoubleRoot> out;
    for (const auto& d : found) {
        if (!d) continue;
        bool seen = false;
        for (const auto& q : out)
            if (std::abs(q.r - d->r) < 1e-7 && std::abs(std::remainder(q.t - d->t, kTwoPi)) < 1e-7) seen = true;
        if (!seen) out.push_back(*d);
    }
    std::sort(out.begin(), out.end(), [](const DoubleRoot& x, const DoubleRoot& y) { return x.t < y.t; });
    return out;
}

// ---- exports ----

std::string export_critical_csv(const std::vector<CriticalPointReport>& r) {
    std::ostringstream os;
    os << std::setprecision(12);
    os << "kind,t,u_re,u_im,branch,R,phi,z,value,second_derivative,is_max,degenerate,residual,count\n";
    for (const auto& c : r)
        os << (c.kind == CriticalKind::Modulus ? "modulus" : "argument") << ',' << c.t << ',' << c.u.real() << ','
           << c.u.imag() << ',' << c.branch << ',' << c.point.R() << ',' << c.point.phi() << ',' << c.point.z << ','
           << c.value << ',' << c.second_derivative << ',' << (c.is_max ? 1 : 0) << ',' << (c.degenerate ? 1 : 0) << ','
           << c.residual << ',' << c.count << '\n';
    return os.str();
}

std::string export_reconnection_csv(const ReconnectionResult& r) {
    std::ostringstream os;
    os << std::setprecision(12);
    os << "a_threshold,R,phi,z,x,y,residual\n";
    for (const auto& e : r.events)
        for (std::size_t i = 0; i < e.points.size(); ++i) {
            const auto& p = e.points[i];
            os << e.a_threshold << ',' << p.R() << ',' << p.phi() << ',' << p.z << ',' << p.x << ',' << p.y << ','
               << e.residuals[i] << '\n';
        }
    return os.str();
}

std::string export_double_roots_csv(const std::vector<DoubleRoot>& d) {
    std::ostringstream os;
    os << std::setprecision(12);
    os << "r,t,u_re,u_im,root_gap,residual\n";
    for (const auto& q : d)
        os << q.r << ',' << q.t << ',' << q.u.real() << ',' << q.u.imag() << ',' << q.root_gap << ',' << q.residual << '\n';
    return os.str();
}

std::string export_saddle_locus_csv(const std::vector<SaddleLocusSample>& s) {
    std::ostringstream os;
    os << std::setprecision(12);
    os << "branch,phi,R,z\n";
    for (const auto& q : s) os << q.branch << ',' << q.phi << ',' << q.R << ',' << q.z << '\n';
    return os.str();
}

}  // namespace knotfield
