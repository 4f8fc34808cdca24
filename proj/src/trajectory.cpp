#include "knotfield/trajectory.hpp"

#include <algorithm>
#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <map>
#include "json.hpp"
#include <numeric>
#include <sstream>

#include "knotfield/errors.hpp"

namespace knotfield {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kTwoPi = 2 * kPi;

double series(const std::vector<FourierTerm>& terms, double t) {
    double acc = 0;
    for (const auto& f : terms) {
        double arg = f.frequency.get_d() * t + f.phase_over_pi.get_d() * kPi;
        acc += f.amplitude.get_d() * (f.kind == Kind::Cos ? std::cos(arg) : std::sin(arg));
    }
    return acc;
}

double series_dt(const std::vector<FourierTerm>& terms, double t) {
    double acc = 0;
    for (const auto& f : terms) {
        double w = f.frequency.get_d();
        double arg = w * t + f.phase_over_pi.get_d() * kPi;
        acc += f.amplitude.get_d() * w * (f.kind == Kind::Cos ? -std::sin(arg) : std::cos(arg));
    }
    return acc;
}

FourierTerm term(Q amp, Q freq, Kind k, Q phase = 0) {
    return FourierTerm{std::move(amp), std::move(freq), std::move(phase), k};
}

int mod(int a, int m) { return ((a % m) + m) % m; }

double strand_x(const TrajectorySet& ts, const StrandRef& s, double t) {
    return strand_position(ts, s, t).real();
}

cplx strand_velocity(const TrajectorySet& ts, const StrandRef& s, double t) {
    const auto& tr = ts.components[s.component];
    double tt = tr.repeats * t + kTwoPi * s.shift;
    auto [dx, dy] = eval_trajectory_derivative(tr, tt);
    return {tr.repeats * dx, tr.repeats * dy};
}

// Refine a bracketed root of g on [lo, hi] (g(lo), g(hi) of opposite sign).
template <class G, class DG>
double refine_root(G g, DG dg, double lo, double hi) {
    double glo = g(lo);
    double x = 0.5 * (lo + hi);
    for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
        double gx = g(x);
        if (gx == 0) return x;
        if ((gx < 0) == (glo < 0)) {
            lo = x;
            glo = gx;
        } else {
            hi = x;
        }
        double d = dg(x);
        double xn = d != 0 ? x - gx / d : 0.5 * (lo + hi);
        if (!(xn > lo && xn < hi)) xn = 0.5 * (lo + hi);
        if (std::abs(xn - x) < 1e-14) return xn;
        x = xn;
    }
    return x;
}

}  // namespace

int TrajectorySet::total_strands() const {
    int n = 0;
    for (const auto& c : components) n += c.strands;
    return n;
}

std::vector<int> BraidWord::permutation() const {
    std::vector<int> p(strands);
    std::iota(p.begin(), p.end(), 0);
    for (const auto& l : letters) std::swap(p[l.k - 1], p[l.k]);
    return p;
}

BraidWord BraidWord::inverse() const {
    BraidWord r{strands, {}};
    for (auto it = letters.rbegin(); it != letters.rend(); ++it) r.letters.push_back({it->k, -it->sign});
    return r;
}

BraidWord BraidWord::mirror() const {
    BraidWord r = *this;
    for (auto& l : r.letters) l.sign = -l.sign;
    return r;
}

BraidWord BraidWord::power(int n) const {
    BraidWord r{strands, {}};
    for (int i = 0; i < n; ++i) r.letters.insert(r.letters.end(), letters.begin(), letters.end());
    return r;
}

std::string to_string(const BraidWord& w) {
    std::ostringstream os;
    size_t i = 0;
    bool first = true;
    while (i < w.letters.size()) {
        size_t j = i;
        while (j < w.letters.size() && w.letters[j] == w.letters[i]) ++j;
        int e = static_cast<int>(j - i) * w.letters[i].sign;
        if (!first) os << ' ';
        first = false;
        os << 's' << w.letters[i].k;
        if (e != 1) os << '^' << e;
        i = j;
    }
    return os.str();
}

BraidWord parse_braid_word(const std::string& s, int strands) {
    BraidWord w{strands, {}};
    std::istringstream is(s);
    std::string tok;
    while (is >> tok) {
        if (tok.size() < 2 || (tok[0] != 's' && tok[0] != 'S')) throw ParseError("bad braid letter: " + tok);
        auto caret = tok.find('^');
        int k = std::stoi(tok.substr(1, caret == std::string::npos ? std::string::npos : caret - 1));
        int e = caret == std::string::npos ? 1 : std::stoi(tok.substr(caret + 1));
        if (k < 1 || k >= strands) throw ParseError("generator out of range: " + tok);
        for (int n = 0; n < std::abs(e); ++n) w.letters.push_back({k, e > 0 ? 1 : -1});
    }
    return w;
}

std::pair<double, double> eval_trajectory(const Trajectory& tr, double t) {
    return {series(tr.x, t), series(tr.y, t)};
}

std::pair<double, double> eval_trajectory_derivative(const Trajectory& tr, double t) {
    return {series_dt(tr.x, t), series_dt(tr.y, t)};
}

MaxRadius max_radius(const Trajectory& tr) {
    const double period = kTwoPi * tr.strands;
    const int n = 4096 * tr.strands;
    auto r2 = [&](double t) {
        auto [x, y] = eval_trajectory(tr, t);
        return x * x + y * y;
    };
    std::vector<double> v(n);
    for (int i = 0; i < n; ++i) v[i] = r2(period * i / n);
    MaxRadius best{-1, 0};
    for (int i = 0; i < n; ++i) {
        double prev = v[(i + n - 1) % n], next = v[(i + 1) % n];
        if (v[i] < prev || v[i] < next) continue;
        double h = period / n;
        double lo = period * i / n - h, hi = lo + 2 * h;
        auto res = boost::math::tools::brent_find_minima([&](double t) { return -r2(t); }, lo, hi, 52);
        double tm = res.first;
        // polish on the radial derivative, which Brent only resolves to sqrt(eps)
        auto radial = [&](double t) {
            auto [x, y] = eval_trajectory(tr, t);
            auto [dx, dy] = eval_trajectory_derivative(tr, t);
            return x * dx + y * dy;
        };
        if (radial(lo) > 0 && radial(hi) < 0) {
            auto br = boost::math::tools::bisect(radial, lo, hi, boost::math::tools::eps_tolerance<double>(50));
            double tb = 0.5 * (br.first + br.second);
            if (r2(tb) >= -res.second) tm = tb;
        }
        double t = std::fmod(tm + period, period);
        double rho = std::sqrt(r2(tm));
        // ties (symmetric trajectories) resolve to the earliest t
        if (rho > best.rho_max + 1e-12 || (std::abs(rho - best.rho_max) <= 1e-12 && t < best.t_at)) {
            best = {rho, t};
        }
    }
    if (best.t_at > period - 1e-9) best.t_at = 0;
    return best;
}

std::vector<StrandRef> strand_labels(const TrajectorySet& ts) {
    std::vector<StrandRef> refs;
    for (int c = 0; c < static_cast<int>(ts.components.size()); ++c)
        for (int j = 0; j < ts.components[c].strands; ++j) refs.push_back({c, j});
    const double t0 = 1e-7;
    std::stable_sort(refs.begin(), refs.end(), [&](const StrandRef& a, const StrandRef& b) {
        return strand_x(ts, a, t0) > strand_x(ts, b, t0);
    });
    return refs;
}

cplx strand_position(const TrajectorySet& ts, const StrandRef& s, double t) {
    const auto& tr = ts.components[s.component];
    auto [x, y] = eval_trajectory(tr, tr.repeats * t + kTwoPi * s.shift);
    return {x, y};
}

std::vector<Crossing> find_crossings(const TrajectorySet& ts) {
    auto labels = strand_labels(ts);
    const int n = static_cast<int>(labels.size());
    auto label_of = [&](const StrandRef& s) {
        for (int i = 0; i < n; ++i)
            if (labels[i].component == s.component && labels[i].shift == s.shift) return i + 1;
        return 0;
    };

    constexpr int kGrid = 4096;
    const double h = kTwoPi / kGrid;
    std::vector<Crossing> out;

    for (int ia = 0; ia < n; ++ia) {
        for (int ib = ia + 1; ib < n; ++ib) {
            StrandRef A = labels[ia], B = labels[ib];
            auto d = [&](double t) { return strand_x(ts, A, t) - strand_x(ts, B, t); };
            auto dd = [&](double t) { return strand_velocity(ts, A, t).real() - strand_velocity(ts, B, t).real(); };
            double tprev = -0.5 * h, dprev = d(tprev);
            for (int k = 1; k <= kGrid; ++k) {
                double tk = (k - 0.5) * h, dk = d(tk);
                if ((dprev < 0) != (dk < 0)) {
                    double t = refine_root(d, dd, tprev, tk);
                    StrandRef a = A, b = B;
                    if (std::abs(t) < 1e-12) {
                        t = 0;
                    } else if (t < 0) {
                        // belongs to the end of the period, where labels have shifted
                        t += kTwoPi;
                        const auto& ca = ts.components[a.component];
                        const auto& cb = ts.components[b.component];
                        a.shift = mod(a.shift - ca.repeats, ca.strands);
                        b.shift = mod(b.shift - cb.repeats, cb.strands);
                    }
                    cplx pa = strand_position(ts, a, t), pb = strand_position(ts, b, t);
                    double dy = pa.imag() - pb.imag();
                    if (std::abs(dy) < 1e-9) {
                        std::ostringstream os;
                        os << "strands meet at t=" << t << " (|dY|=" << std::abs(dy) << ")";
                        throw DegenerateCrossing(os.str());
                    }
                    StrandRef up = dy > 0 ? a : b, lo = dy > 0 ? b : a;
                    double rel = strand_velocity(ts, up, t).real() - strand_velocity(ts, lo, t).real();
                    if (std::abs(rel) < 1e-9) throw DegenerateCrossing("tangential strand contact");
                    double xc = 0.5 * (pa.real() + pb.real());
                    int above = 0;
                    for (const auto& o : labels) {
                        if ((o.component == a.component && o.shift == a.shift) ||
                            (o.component == b.component && o.shift == b.shift))
                            continue;
                        double xo = strand_x(ts, o, t);
                        if (std::abs(xo - xc) < 1e-9) throw DegenerateCrossing("three strands share an X value");
                        if (xo > xc) ++above;
                    }
                    out.push_back({t, above + 1, rel < 0 ? 1 : -1, label_of(up), label_of(lo)});
                }
                tprev = tk;
                dprev = dk;
            }
        }
    }
    std::sort(out.begin(), out.end(), [](const Crossing& x, const Crossing& y) {
        if (std::abs(x.time - y.time) > 1e-9) return x.time < y.time;
        return x.generator_index < y.generator_index;
    });
    for (size_t i = 0; i + 1 < out.size(); ++i) {
        if (std::abs(out[i].time - out[i + 1].time) > 1e-9) continue;
        if (std::abs(out[i].generator_index - out[i + 1].generator_index) < 2)
            throw DegenerateCrossing("simultaneous crossings share a strand");
    }
    return out;
}

BraidWord extract_braid_word(const TrajectorySet& ts) {
    BraidWord w{ts.total_strands(), {}};
    for (const auto& c : find_crossings(ts)) w.letters.push_back({c.generator_index, c.sign});
    return w;
}

std::vector<int> rank_permutation(const TrajectorySet& ts) {
    auto labels = strand_labels(ts);
    const int n = static_cast<int>(labels.size());
    auto ranked = [&](double t) {
        std::vector<int> order(n);
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
            return strand_x(ts, labels[a], t) > strand_x(ts, labels[b], t);
        });
        return order;
    };
    // a crossing may sit at t = 0, so read the start just before it
    auto start = ranked(-1e-7), end = ranked(kTwoPi - 1e-7);
    std::vector<int> slot_of(n), out(n);
    for (int p = 0; p < n; ++p) slot_of[start[p]] = p;
    for (int p = 0; p < n; ++p) out[p] = slot_of[end[p]];
    return out;
}

Trajectory lemniscate_trajectory(int s, int ell, int r) {
    if (s < 1 || ell < 1 || r < 1) throw Error("lemniscate parameters must be positive");
    if (std::gcd(s, ell) != 1) throw NotCoprime("gcd(s, l) != 1");
    Trajectory tr;
    tr.strands = s;
    tr.repeats = r;
    tr.x = {term(1, Q(1, s), Kind::Cos)};
    tr.y = {term(Q(1, ell), Q(ell, s), Kind::Sin)};
    for (auto* v : {&tr.x, &tr.y})
        for (auto& f : *v) f.frequency.canonicalize(), f.amplitude.canonicalize();
    return tr;
}

std::vector<std::string> catalog_names() {
    return {"5_2", "6_2", "6_1", "square", "whitehead", "lemniscate:s,l,r"};
}

TrajectorySet catalog_trajectory(const std::string& name) {
    TrajectorySet ts;
    ts.name = name;
    auto q = [](long a, long b) {
        Q r(a, b);
        r.canonicalize();
        return r;
    };
    if (name == "5_2") {
        Trajectory t;
        t.strands = 3;
        t.x = {term(-1, q(2, 3), Kind::Cos), term(q(-3, 4), q(5, 3), Kind::Cos)};
        t.y = {term(-1, q(4, 3), Kind::Sin), term(q(-1, 2), q(1, 3), Kind::Sin)};
        ts.components = {t};
    } else if (name == "6_2") {
        Trajectory t;
        t.strands = 3;
        t.x = {term(-1, q(2, 3), Kind::Cos), term(q(-3, 4), q(5, 3), Kind::Cos)};
        t.y = {term(-1, q(5, 3), Kind::Sin)};
        ts.components = {t};
    } else if (name == "6_1") {
        Trajectory t;
        t.strands = 4;
        t.x = {term(1, q(1, 2), Kind::Cos), term(q(1, 2), q(3, 4), Kind::Cos)};
        t.y = {term(1, q(1, 4), Kind::Cos, q(1, 4)), term(q(-2, 5), q(1, 2), Kind::Cos, q(1, 8)),
               term(1, q(5, 4), Kind::Cos, q(1, 4))};
        ts.components = {t};
    } else if (name == "square") {
        Trajectory t;
        t.strands = 3;
        t.x = {term(1, q(1, 3), Kind::Sin), term(q(1, 2), q(5, 3), Kind::Sin)};
        t.y = {term(q(1, 2), q(5, 3), Kind::Sin), term(q(3, 4), q(8, 3), Kind::Sin)};
        ts.components = {t};
    } else if (name == "whitehead") {
        Trajectory loop;
        loop.strands = 2;
        loop.x = {term(1, q(1, 2), Kind::Cos), term(q(-1, 2), q(3, 2), Kind::Cos)};
        loop.y = {term(q(1, 4), q(1, 2), Kind::Sin)};
        Trajectory lem;
        lem.strands = 1;
        lem.x = {term(1, 1, Kind::Cos)};
        lem.y = {term(q(1, 2), 2, Kind::Sin)};
        ts.components = {loop, lem};
    } else if (name.rfind("lemniscate", 0) == 0) {
        std::string args = name.substr(10);
        for (char& c : args)
            if (c == ':' || c == '(' || c == ')' || c == ',') c = ' ';
        std::istringstream is(args);
        int s = 0, l = 0, r = 0;
        if (!(is >> s >> l >> r)) throw UnknownCatalogEntry("expected lemniscate:s,l,r, got " + name);
        ts.components = {lemniscate_trajectory(s, l, r)};
    } else {
        throw UnknownCatalogEntry("unknown catalog entry: " + name);
    }
    return ts;
}

TrajectorySet negate_y(const TrajectorySet& ts) {
    TrajectorySet r = ts;
    for (auto& c : r.components)
        for (auto& f : c.y) f.amplitude = -f.amplitude;
    return r;
}

TrajectorySet quarter_turn(const TrajectorySet& ts) {
    TrajectorySet r = ts;
    for (auto& c : r.components) {
        auto newx = c.y;
        for (auto& f : newx) f.amplitude = -f.amplitude;
        c.y = c.x;
        c.x = newx;
    }
    return r;
}

namespace {
nlohmann::json terms_json(const std::vector<FourierTerm>& v) {
    auto arr = nlohmann::json::array();
    for (const auto& f : v) {
        arr.push_back({{"amp", f.amplitude.get_str()},
                       {"freq_num", f.frequency.get_num().get_si()},
                       {"freq_den", f.frequency.get_den().get_si()},
                       {"phase_over_pi", f.phase_over_pi.get_str()},
                       {"kind", f.kind == Kind::Cos ? "cos" : "sin"}});
    }
    return arr;
}

std::vector<FourierTerm> terms_from(const nlohmann::json& arr, int strands) {
    std::vector<FourierTerm> v;
    for (const auto& e : arr) {
        FourierTerm f;
        f.amplitude = parse_rational(e.at("amp").get<std::string>());
        f.frequency = Q(e.at("freq_num").get<long>(), e.at("freq_den").get<long>());
        f.frequency.canonicalize();
        f.phase_over_pi = parse_rational(e.value("phase_over_pi", std::string("0")));
        std::string k = e.value("kind", std::string("cos"));
        if (k != "cos" && k != "sin") throw ParseError("term kind must be cos or sin");
        f.kind = k == "cos" ? Kind::Cos : Kind::Sin;
        if (sgn(f.amplitude) == 0) throw ParseError("zero amplitude");
        if (sgn(f.frequency) <= 0) throw ParseError("frequency must be positive");
        if (strands % f.frequency.get_den().get_si() != 0)
            throw NonIntegerHarmonic("frequency denominator does not divide strand count");
        v.push_back(f);
    }
    return v;
}
}  // namespace

std::string trajectory_to_json(const TrajectorySet& ts) {
    nlohmann::json j;
    j["name"] = ts.name;
    j["components"] = nlohmann::json::array();
    for (const auto& c : ts.components) {
        j["components"].push_back(
            {{"strands", c.strands}, {"repeats", c.repeats}, {"x", terms_json(c.x)}, {"y", terms_json(c.y)}});
    }
    return j.dump(2);
}

TrajectorySet trajectory_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(e.what());
    }
    TrajectorySet ts;
    ts.name = j.value("name", std::string("custom"));
    try {
        for (const auto& c : j.at("components")) {
            Trajectory t;
            t.strands = c.at("strands").get<int>();
            t.repeats = c.value("repeats", 1);
            if (t.strands < 1 || t.repeats < 1) throw ParseError("strands and repeats must be positive");
            t.x = terms_from(c.at("x"), t.strands);
            t.y = terms_from(c.at("y"), t.strands);
            ts.components.push_back(t);
        }
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(e.what());
    }
    if (ts.components.empty()) throw ParseError("no components");
    return ts;
}

}  // namespace knotfield
