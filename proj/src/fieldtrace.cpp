#include "knotfield/fieldtrace.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numeric>
#include <random>
#include <sstream>

#include "knotfield/errors.hpp"

namespace knotfield {

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr double kTwoPi = 2 * kPi;

// Point on S^3 above slice phi with first coordinate u.
cplx slice_v(cplx u, double phi) {
    double rho = std::sqrt(std::max(0.0, 1 - std::norm(u)));
    return std::polar(rho, phi);
}

StereoPoint to_point(cplx u, double phi) {
    auto p = uv_to_stereo(u, slice_v(u, phi));
    return {p[0], p[1], p[2]};
}

// Smallest-total-distance matching of b onto a (small s, brute force).
std::vector<int> best_assignment(const std::vector<cplx>& a, const std::vector<cplx>& b) {
    const int n = static_cast<int>(a.size());
    std::vector<int> perm(n), best;
    std::iota(perm.begin(), perm.end(), 0);
    double best_cost = 1e300;
    if (n > 8) {
        // greedy fallback for wide braids
        std::vector<bool> used(n);
        best.assign(n, -1);
        for (int i = 0; i < n; ++i) {
            int k = -1;
            for (int j = 0; j < n; ++j)
                if (!used[j] && (k < 0 || std::abs(a[i] - b[j]) < std::abs(a[i] - b[k]))) k = j;
            used[k] = true;
            best[i] = k;
        }
        return best;
    }
    do {
        double c = 0;
        for (int i = 0; i < n; ++i) c += std::abs(a[i] - b[perm[i]]);
        if (c < best_cost) {
            best_cost = c;
            best = perm;
        }
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

double min_separation(const std::vector<cplx>& r) {
    double m = 1e300;
    for (size_t i = 0; i < r.size(); ++i)
        for (size_t j = i + 1; j < r.size(); ++j) m = std::min(m, std::abs(r[i] - r[j]));
    return m;
}

}  // namespace

double StereoPoint::R() const { return std::hypot(x, y); }
double StereoPoint::phi() const {
    double p = std::atan2(y, x);
    return p < 0 ? p + kTwoPi : p;
}

std::optional<cplx> newton_on_slice(const SemiholoEval& F, double phi, cplx seed, double tol, int max_iter) {
    const cplx e = std::polar(1.0, phi), eb = std::conj(e);
    auto value = [&](cplx u) {
        double rho = std::sqrt(std::max(0.0, 1 - std::norm(u)));
        return F.value(u, rho * e, rho * eb);
    };
    cplx u = seed;
    double last_step = 1e300;
    for (int it = 0; it < max_iter; ++it) {
        if (std::norm(u) >= 1) u *= 0.999 / std::abs(u);
        double rho = std::sqrt(1 - std::norm(u));
        FieldJet J = F.jet(u, rho * e, rho * eb);
        double p = u.real(), q = u.imag();
        cplx gp = J.fu + (J.fv * e + J.fvb * eb) * (-p / rho);
        cplx gq = cplx(0, 1) * J.fu + (J.fv * e + J.fvb * eb) * (-q / rho);
        double a11 = gp.real(), a12 = gq.real(), a21 = gp.imag(), a22 = gq.imag();
        double det = a11 * a22 - a12 * a21;
        if (!std::isfinite(det) || det == 0) return std::nullopt;
        double bx = -J.f.real(), by = -J.f.imag();
        cplx d((a22 * bx - a12 * by) / det, (a11 * by - a21 * bx) / det);
        double g0 = std::abs(J.f);
        double lam = 1;
        cplx un = u + d;
        for (int k = 0; k < 12; ++k) {
            if (std::norm(un) < 1 && std::abs(value(un)) <= g0 * (1 - 1e-4 * lam) + 1e-300) break;
            lam *= 0.5;
            un = u + lam * d;
        }
        if (std::norm(un) >= 1) return std::nullopt;
        last_step = std::abs(un - u);
        u = un;
        if (last_step < tol) return u;
    }
    if (last_step < 1e-9) return u;
    return std::nullopt;
}

std::vector<RootRZ> roots_at_phi(const SemiholoN& f, double a, double phi) {
    if (!(a > 0)) throw Error("a must be positive");
    SemiholoEval F(f, a);
    std::vector<cplx> found;
    auto add = [&](cplx s) {
        auto r = newton_on_slice(F, phi, s, 1e-13, 80);
        if (!r) return;
        for (const auto& g : found)
            if (std::abs(g - *r) < 1e-8) return;
        found.push_back(*r);
    };
    add(0.0);
    for (int k = 1; k <= 16; ++k)
        for (int j = 0; j < 32; ++j) add(std::polar(0.98 * k / 16, kTwoPi * (j + 0.5 * (k % 2)) / 32));
    std::sort(found.begin(), found.end(), [](cplx x, cplx y) {
        return x.real() != y.real() ? x.real() > y.real() : x.imag() > y.imag();
    });
    std::vector<RootRZ> out;
    for (const auto& u : found) {
        StereoPoint p = to_point(u, phi);
        out.push_back({p.R(), p.z, u});
    }
    return out;
}

TraceResult trace_nodal_set(const SemiholoN& f, const TraceConfig& cfg) {
    if (cfg.phi_steps < 360) throw Error("phi_steps must be >= 360");
    if (!(cfg.tol > 0 && cfg.tol <= 1e-6)) throw Error("tolerance must lie in (0, 1e-6]");
    if (!(cfg.a > 0)) throw Error("a must be positive");
    SemiholoEval F(f, cfg.a);
    const int s = f.degree;
    const int N = cfg.phi_steps;
    const double h = kTwoPi / N;
    auto phi_of = [&](int i) { return (i + 0.5) * h; };

    // seeding pass
    std::vector<cplx> roots;
    const double phi0 = phi_of(0);
    if (cfg.seed == SeedStrategy::Braid) {
        if (!cfg.trajectory) throw Error("braid seeding needs a trajectory");
        std::mt19937 rng(cfg.rng_seed);
        std::normal_distribution<double> jitter(0, 0.05 * cfg.a);
        for (const auto& ref : strand_labels(*cfg.trajectory)) {
            cplx s0 = cfg.a * strand_position(*cfg.trajectory, ref, -phi0);
            std::optional<cplx> r;
            for (int attempt = 0; attempt < 20 && !r; ++attempt) {
                cplx seed = attempt == 0 ? s0 : s0 + cplx(jitter(rng), jitter(rng));
                r = newton_on_slice(F, phi0, seed, cfg.tol, cfg.max_iter);
            }
            if (!r) throw SeedFailure("braid seed did not converge");
            roots.push_back(*r);
        }
    } else {
        for (const auto& r : roots_at_phi(f, cfg.a, phi0)) roots.push_back(r.u);
    }
    if (static_cast<int>(roots.size()) != s) {
        std::ostringstream os;
        os << "found " << roots.size() << " roots on the first slice, expected " << s;
        throw SeedFailure(os.str());
    }
    if (min_separation(roots) < cfg.match_tol) throw ReconnectionSuspected("seeds coincide");

    std::vector<std::vector<cplx>> U(N + 1);
    U[0] = roots;
    TraceResult res;

    struct Lost {};
    // Continue strand j from (prev at pa) to pb; slope estimates du/dphi.
    std::function<cplx(int, const std::vector<cplx>&, cplx, double, double, int)> advance =
        [&](int j, const std::vector<cplx>& prev, cplx slope, double pa, double pb, int depth) -> cplx {
        cplx pred = prev[j] + slope * (pb - pa);
        double clearance = 1e300;
        for (int k = 0; k < s; ++k)
            if (k != j) clearance = std::min(clearance, std::abs(prev[k] - pred));
        auto r = newton_on_slice(F, pb, pred, cfg.tol, cfg.max_iter);
        if (r && std::abs(*r - pred) <= 0.25 * clearance && std::abs(*r - prev[j]) <= 0.5 * clearance) return *r;
        if (depth >= 10) throw Lost{};
        double pm = 0.5 * (pa + pb);
        cplx mid = advance(j, prev, slope, pa, pm, depth + 1);
        std::vector<cplx> half = prev;
        half[j] = mid;
        return advance(j, half, (mid - prev[j]) / (pm - pa), pm, pb, depth + 1);
    };

    std::vector<cplx> slope(s, 0.0);
    std::vector<bool> lost(s, false), bridged(s, false);
    int lost_since = -1;
    for (int i = 1; i <= N; ++i) {
        double pa = phi_of(i - 1), pb = phi_of(i);
        U[i].assign(s, 0.0);
        for (int j = 0; j < s; ++j) {
            if (lost[j]) continue;
            try {
                U[i][j] = advance(j, U[i - 1], slope[j], pa, pb, 0);
            } catch (const Lost&) {
                lost[j] = true;
                if (lost_since < 0) lost_since = i;
            }
        }
        int nlost = static_cast<int>(std::count(lost.begin(), lost.end(), true));
        if (nlost > 0) {
            // a strand folded back in phi: wait until the slice has s roots again,
            // then reattach the lost strands to the unclaimed roots
            std::vector<cplx> all;
            for (const auto& r : roots_at_phi(f, cfg.a, pb)) all.push_back(r.u);
            std::vector<cplx> free_roots;
            for (const auto& r : all) {
                bool claimed = false;
                for (int j = 0; j < s; ++j)
                    if (!lost[j] && std::abs(U[i][j] - r) < 1e-7) claimed = true;
                if (!claimed) free_roots.push_back(r);
            }
            if (static_cast<int>(all.size()) == s && static_cast<int>(free_roots.size()) == nlost) {
                std::vector<cplx> last, cand = free_roots;
                for (int j = 0; j < s; ++j)
                    if (lost[j]) last.push_back(U[lost_since - 1][j]);
                auto asg = best_assignment(last, cand);
                int m = 0;
                for (int j = 0; j < s; ++j) {
                    if (!lost[j]) continue;
                    U[i][j] = cand[asg[m++]];
                    // fill skipped slices by straight interpolation across the fold
                    cplx a0 = U[lost_since - 1][j];
                    for (int k = lost_since; k < i; ++k) {
                        double w = double(k - lost_since + 1) / (i - lost_since + 1);
                        U[k][j] = a0 + w * (U[i][j] - a0);
                    }
                    res.max_bridge = std::max(res.max_bridge, std::abs(U[i][j] - a0));
                    lost[j] = false;
                    bridged[j] = true;
                    ++res.fold_bridges;
                }
                lost_since = -1;
            } else if (i - lost_since > N / 50) {
                std::ostringstream os;
                os << "strand lost near phi=" << phi_of(lost_since) << " at a=" << cfg.a
                   << "; move a away from a threshold";
                throw ReconnectionSuspected(os.str());
            }
        }
        bool any_lost = std::count(lost.begin(), lost.end(), true) > 0;
        if (!any_lost) {
            std::vector<cplx> cur = U[i];
            if (min_separation(cur) < cfg.match_tol) {
                std::ostringstream os;
                os << "roots merge near phi=" << pb << " at a=" << cfg.a << "; move a away from a threshold";
                throw ReconnectionSuspected(os.str());
            }
        }
        for (int j = 0; j < s; ++j) {
            if (lost[j]) continue;
            if (bridged[j]) {
                slope[j] = 0;
                bridged[j] = false;
                continue;
            }
            slope[j] = (U[i][j] - U[i - 1][j]) / h;
            res.max_step = std::max(res.max_step, std::abs(U[i][j] - U[i - 1][j]));
        }
    }
    if (lost_since >= 0) throw ReconnectionSuspected("strand lost at the end of the period");

    // closure: the slice at phi0 + 2pi is the first slice again, up to relabeling
    res.permutation.assign(s, -1);
    std::vector<bool> hit(s);
    for (int j = 0; j < s; ++j) {
        int k = 0;
        for (int m = 1; m < s; ++m)
            if (std::abs(U[N][j] - U[0][m]) < std::abs(U[N][j] - U[0][k])) k = m;
        res.permutation[j] = k;
        res.closure_error = std::max(res.closure_error, std::abs(U[N][j] - U[0][k]));
        if (hit[k]) throw ReconnectionSuspected("closure is not a permutation");
        hit[k] = true;
    }
    if (res.closure_error > 10 * std::max(res.max_step, 1e-9))
        throw ReconnectionSuspected("traced strands do not close");

    std::vector<bool> seen(s);
    int comp = 0;
    for (int j0 = 0; j0 < s; ++j0) {
        if (seen[j0]) continue;
        NodalCurve c;
        c.component = comp++;
        c.closed = true;
        int j = j0, pass = 0;
        do {
            seen[j] = true;
            for (int i = 0; i < N; ++i) {
                cplx u = U[i][j];
                double phi = phi_of(i);
                CurveSample smp;
                smp.u = u;
                smp.slice = i;
                smp.phi = phi + kTwoPi * pass;
                smp.p = to_point(u, phi);
                smp.residual = std::abs(F.value(u, slice_v(u, phi), std::conj(slice_v(u, phi))));
                res.max_residual = std::max(res.max_residual, smp.residual);
                c.samples.push_back(smp);
            }
            ++pass;
            j = res.permutation[j];
        } while (j != j0);
        c.passes = pass;
        res.curves.push_back(std::move(c));
    }
    return res;
}

std::vector<ProfileSample> rescaled_profile(const std::vector<NodalCurve>& curves, double a) {
    std::vector<ProfileSample> out;
    for (const auto& c : curves) {
        for (const auto& s : c.samples) {
            UV uv = stereo_to_uv(s.p.xyz());
            out.push_back({c.component, s.phi, uv.u.real() / a, uv.u.imag() / a});
        }
    }
    return out;
}

Mesh argument_level_set(const CartesianPoly& f, double theta, const Box& box, int resolution) {
    if (resolution < 32) throw Error("resolution must be >= 32");
    if (!(theta >= 0 && theta < kTwoPi)) throw Error("theta must lie in [0, 2pi)");
    CartesianEval E(f);
    const int n = resolution;
    const cplx rot = std::polar(1.0, -theta);
    std::array<double, 3> step;
    for (int k = 0; k < 3; ++k) step[k] = (box.hi[k] - box.lo[k]) / n;
    auto node_pos = [&](int i, int j, int k) {
        return std::array<double, 3>{box.lo[0] + i * step[0], box.lo[1] + j * step[1], box.lo[2] + k * step[2]};
    };
    auto idx = [&](int i, int j, int k) { return (static_cast<long>(i) * (n + 1) + j) * (n + 1) + k; };
    std::vector<double> g(static_cast<size_t>(n + 1) * (n + 1) * (n + 1));
    for (int i = 0; i <= n; ++i)
        for (int j = 0; j <= n; ++j)
            for (int k = 0; k <= n; ++k) g[idx(i, j, k)] = (rot * E.value(node_pos(i, j, k))).imag();

    Mesh raw;
    std::map<std::pair<long, long>, int> edge_vertex;
    auto vertex_on_edge = [&](long a, long b, const std::array<double, 3>& pa, const std::array<double, 3>& pb) {
        auto key = a < b ? std::make_pair(a, b) : std::make_pair(b, a);
        auto it = edge_vertex.find(key);
        if (it != edge_vertex.end()) return it->second;
        double ga = g[a], gb = g[b];
        double t = ga / (ga - gb);
        std::array<double, 3> p;
        for (int c = 0; c < 3; ++c) p[c] = pa[c] + t * (pb[c] - pa[c]);
        int id = static_cast<int>(raw.vertices.size());
        raw.vertices.push_back(p);
        edge_vertex.emplace(key, id);
        return id;
    };
    // cube corners and the six tetrahedra around the 0-6 diagonal
    static const int corner[8][3] = {{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0},
                                     {0, 0, 1}, {1, 0, 1}, {1, 1, 1}, {0, 1, 1}};
    static const int tets[6][4] = {{0, 5, 1, 6}, {0, 1, 2, 6}, {0, 2, 3, 6},
                                   {0, 3, 7, 6}, {0, 7, 4, 6}, {0, 4, 5, 6}};
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k) {
                long id[8];
                std::array<double, 3> pos[8];
                for (int c = 0; c < 8; ++c) {
                    id[c] = idx(i + corner[c][0], j + corner[c][1], k + corner[c][2]);
                    pos[c] = node_pos(i + corner[c][0], j + corner[c][1], k + corner[c][2]);
                }
                for (const auto& t : tets) {
                    std::vector<int> in, out;
                    for (int c : t) (g[id[c]] > 0 ? in : out).push_back(c);
                    if (in.empty() || out.empty()) continue;
                    auto V = [&](int a, int b) { return vertex_on_edge(id[a], id[b], pos[a], pos[b]); };
                    if (in.size() == 1 || out.size() == 1) {
                        const auto& lone = in.size() == 1 ? in : out;
                        const auto& rest = in.size() == 1 ? out : in;
                        raw.faces.push_back({V(lone[0], rest[0]), V(lone[0], rest[1]), V(lone[0], rest[2])});
                    } else {
                        int a = V(in[0], out[0]), b = V(in[0], out[1]), c = V(in[1], out[1]), d = V(in[1], out[0]);
                        raw.faces.push_back({a, b, c});
                        raw.faces.push_back({a, c, d});
                    }
                }
            }

    // keep the half where the rotated field is positive
    std::vector<int> remap(raw.vertices.size(), -2);
    std::vector<bool> positive(raw.vertices.size());
    for (size_t v = 0; v < raw.vertices.size(); ++v) positive[v] = (rot * E.value(raw.vertices[v])).real() > 0;
    Mesh out;
    for (const auto& fc : raw.faces) {
        if (!positive[fc[0]] || !positive[fc[1]] || !positive[fc[2]]) continue;
        std::array<int, 3> nf;
        for (int c = 0; c < 3; ++c) {
            int& r = remap[fc[c]];
            if (r < 0) {
                r = static_cast<int>(out.vertices.size());
                out.vertices.push_back(raw.vertices[fc[c]]);
            }
            nf[c] = r;
        }
        if (nf[0] != nf[1] && nf[1] != nf[2] && nf[0] != nf[2]) out.faces.push_back(nf);
    }
    return out;
}

std::string export_curves_csv(const std::vector<NodalCurve>& curves) {
    std::ostringstream os;
    os.precision(12);
    os << "component,phi,R,z,x,y,z_cart,residual\n";
    for (const auto& c : curves)
        for (const auto& s : c.samples)
            os << c.component << ',' << s.phi << ',' << s.p.R() << ',' << s.p.z << ',' << s.p.x << ',' << s.p.y << ','
               << s.p.z << ',' << s.residual << '\n';
    return os.str();
}

std::string export_mesh_obj(const Mesh& m) {
    std::ostringstream os;
    os.precision(9);
    os << "# argument level set\n";
    for (const auto& v : m.vertices) os << "v " << v[0] << ' ' << v[1] << ' ' << v[2] << '\n';
    for (const auto& f : m.faces) os << "f " << f[0] + 1 << ' ' << f[1] + 1 << ' ' << f[2] + 1 << '\n';
    return os.str();
}

}  // namespace knotfield
