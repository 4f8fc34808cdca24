#include "knotfield/knotid.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

#include "knotfield/errors.hpp"

namespace knotfield {

LaurentPoly::LaurentPoly(long c) {
    if (c != 0) c_[0] = c;
}

LaurentPoly LaurentPoly::monomial(long c, int e) {
    LaurentPoly p;
    if (c != 0) p.c_[e] = c;
    return p;
}

void LaurentPoly::trim() {
    for (auto it = c_.begin(); it != c_.end();) it = it->second == 0 ? c_.erase(it) : std::next(it);
}

int LaurentPoly::low() const { return c_.empty() ? 0 : c_.begin()->first; }
int LaurentPoly::high() const { return c_.empty() ? 0 : c_.rbegin()->first; }
mpz_class LaurentPoly::coeff(int e) const {
    auto it = c_.find(e);
    return it == c_.end() ? mpz_class(0) : it->second;
}

LaurentPoly& LaurentPoly::operator+=(const LaurentPoly& o) {
    for (const auto& [e, c] : o.c_) c_[e] += c;
    trim();
    return *this;
}

LaurentPoly& LaurentPoly::operator-=(const LaurentPoly& o) {
    for (const auto& [e, c] : o.c_) c_[e] -= c;
    trim();
    return *this;
}

LaurentPoly operator*(const LaurentPoly& a, const LaurentPoly& b) {
    LaurentPoly r;
    for (const auto& [i, x] : a.c_)
        for (const auto& [j, y] : b.c_) r.c_[i + j] += x * y;
    r.trim();
    return r;
}

LaurentPoly LaurentPoly::operator-() const {
    LaurentPoly r = *this;
    for (auto& [e, c] : r.c_) c = -c;
    return r;
}

LaurentPoly LaurentPoly::divide_exact(const LaurentPoly& b) const {
    if (b.is_zero()) throw Error("division by zero polynomial");
    LaurentPoly rem = *this, q;
    const int bh = b.high();
    const mpz_class& lead = b.c_.rbegin()->second;
    const int qlow = low() - b.low();
    while (!rem.is_zero()) {
        int e = rem.high() - bh;
        if (e < qlow) throw Error("polynomial division is not exact");
        const mpz_class& top = rem.c_.rbegin()->second;
        if (top % lead != 0) throw Error("polynomial division is not exact");
        LaurentPoly m;
        m.c_[e] = top / lead;
        q += m;
        rem -= m * b;
    }
    return q;
}

LaurentPoly LaurentPoly::normalized() const {
    if (is_zero()) return *this;
    LaurentPoly r;
    int s = low();
    bool neg = c_.rbegin()->second < 0;
    for (const auto& [e, c] : c_) r.c_[e - s] = neg ? mpz_class(-c) : c;
    return r;
}

LaurentPoly LaurentPoly::inverted() const {
    LaurentPoly r;
    for (const auto& [e, c] : c_) r.c_[-e] = c;
    return r;
}

mpz_class LaurentPoly::eval(long t) const {
    if (t == 0 && low() < 0) throw Error("evaluation at 0 of a negative power");
    mpz_class acc = 0;
    for (const auto& [e, c] : c_) {
        mpz_class p;
        if (e >= 0) {
            mpz_pow_ui(p.get_mpz_t(), mpz_class(t).get_mpz_t(), e);
            acc += c * p;
        } else {
            // only used for units t = +-1
            mpz_pow_ui(p.get_mpz_t(), mpz_class(t).get_mpz_t(), -e);
            acc += c / p;
        }
    }
    return acc;
}

std::string to_string(const LaurentPoly& p) {
    if (p.is_zero()) return "0";
    std::ostringstream os;
    bool first = true;
    for (auto it = p.terms().rbegin(); it != p.terms().rend(); ++it) {
        auto [e, c] = *it;
        mpz_class a = abs(c);
        if (!first) os << (c < 0 ? "-" : "+");
        else if (c < 0) os << "-";
        first = false;
        if (a != 1 || e == 0) os << a;
        if (e != 0) {
            os << 't';
            if (e != 1) os << '^' << e;
        }
    }
    return os.str();
}

LaurentPoly parse_laurent(const std::string& raw) {
    std::string s;
    for (char c : raw)
        if (c != ' ') s += c;
    LaurentPoly p;
    size_t i = 0;
    while (i < s.size()) {
        long sign = 1;
        if (s[i] == '+' || s[i] == '-') {
            sign = s[i] == '-' ? -1 : 1;
            ++i;
        }
        const size_t start = i;
        size_t j = i;
        while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) ++j;
        long c = j > i ? std::stol(s.substr(i, j - i)) : 1;
        int e = 0;
        i = j;
        if (i < s.size() && s[i] == 't') {
            e = 1;
            ++i;
            if (i < s.size() && s[i] == '^') {
                ++i;
                size_t k = i;
                if (k < s.size() && s[k] == '-') ++k;
                const size_t digits = k;
                while (k < s.size() && std::isdigit(static_cast<unsigned char>(s[k]))) ++k;
                if (k == digits) throw ParseError("bad exponent: " + raw);
                e = std::stoi(s.substr(i, k - i));
                i = k;
            }
        } else if (j == start) {
            throw ParseError("bad polynomial: " + raw);
        }
        if (i < s.size() && s[i] != '+' && s[i] != '-') throw ParseError("bad polynomial: " + raw);
        p += LaurentPoly::monomial(sign * c, e);
    }
    return p;
}

namespace {

LaurentMatrix identity(int n) {
    LaurentMatrix m(n, std::vector<LaurentPoly>(n));
    for (int i = 0; i < n; ++i) m[i][i] = 1;
    return m;
}

LaurentMatrix generator_image(int n, int k, int sign) {
    const int d = n - 1;
    LaurentMatrix m = identity(d);
    const LaurentPoly t = LaurentPoly::monomial(1, 1), ti = LaurentPoly::monomial(1, -1);
    const int i = k - 1;  // block position
    if (d == 1) {
        m[0][0] = sign > 0 ? -t : -ti;
        return m;
    }
    if (sign > 0) {
        if (k > 1) m[i][i - 1] = t;
        m[i][i] = -t;
        if (k < d) m[i][i + 1] = 1;
    } else {
        if (k > 1) m[i][i - 1] = 1;
        m[i][i] = -ti;
        if (k < d) m[i][i + 1] = ti;
    }
    return m;
}

}  // namespace

LaurentMatrix multiply(const LaurentMatrix& a, const LaurentMatrix& b) {
    const size_t n = a.size(), m = b.empty() ? 0 : b[0].size(), k = b.size();
    LaurentMatrix r(n, std::vector<LaurentPoly>(m));
    for (size_t i = 0; i < n; ++i)
        for (size_t j = 0; j < m; ++j)
            for (size_t l = 0; l < k; ++l)
                if (!a[i][l].is_zero() && !b[l][j].is_zero()) r[i][j] += a[i][l] * b[l][j];
    return r;
}

LaurentMatrix burau_matrix(const BraidWord& w) {
    if (w.strands < 2) throw Error("Burau representation needs at least 2 strands");
    LaurentMatrix m = identity(w.strands - 1);
    for (const auto& l : w.letters) {
        if (l.k < 1 || l.k >= w.strands) throw Error("generator out of range");
        m = multiply(m, generator_image(w.strands, l.k, l.sign));
    }
    return m;
}

LaurentPoly determinant(LaurentMatrix m) {
    const int n = static_cast<int>(m.size());
    if (n == 0) return 1;
    int sign = 1;
    LaurentPoly prev = 1;
    for (int k = 0; k < n - 1; ++k) {
        int p = k;
        while (p < n && m[p][k].is_zero()) ++p;
        if (p == n) return LaurentPoly();
        if (p != k) {
            std::swap(m[p], m[k]);
            sign = -sign;
        }
        for (int i = k + 1; i < n; ++i) {
            for (int j = k + 1; j < n; ++j)
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]).divide_exact(prev);
            m[i][k] = LaurentPoly();
        }
        prev = m[k][k];
    }
    return sign > 0 ? m[n - 1][n - 1] : -m[n - 1][n - 1];
}

int closure_components(const BraidWord& w) {
    auto p = w.permutation();
    std::vector<bool> seen(p.size());
    int c = 0;
    for (size_t i = 0; i < p.size(); ++i) {
        if (seen[i]) continue;
        ++c;
        for (size_t j = i; !seen[j]; j = p[j]) seen[j] = true;
    }
    return c;
}

AlexanderResult alexander_polynomial(const BraidWord& w) {
    AlexanderResult r;
    r.components = closure_components(w);
    r.is_knot = r.components == 1;
    const int n = w.strands;
    LaurentMatrix A = burau_matrix(w);
    for (int i = 0; i < n - 1; ++i)
        for (int j = 0; j < n - 1; ++j) A[i][j] = (i == j ? LaurentPoly(1) : LaurentPoly()) - A[i][j];
    LaurentPoly d = determinant(A);
    LaurentPoly cyc;
    for (int e = 0; e < n; ++e) cyc += LaurentPoly::monomial(1, e);
    try {
        r.poly = d.divide_exact(cyc).normalized();
    } catch (const Error&) {
        r.poly = d.normalized();
    }
    return r;
}

namespace {

using Code = std::vector<int>;  // letter -> k * 2 + (sign < 0)

Code encode(const BraidWord& w) {
    Code c;
    for (const auto& l : w.letters) c.push_back(l.k * 2 + (l.sign < 0 ? 1 : 0));
    return c;
}

BraidWord decode(const Code& c, int strands) {
    BraidWord w{strands, {}};
    for (int x : c) w.letters.push_back({x / 2, (x % 2) ? -1 : 1});
    return w;
}

bool inverse_pair(int a, int b) { return a / 2 == b / 2 && a % 2 != b % 2; }

Code cyclic_reduce(Code c) {
    bool changed = true;
    while (changed) {
        changed = false;
        Code out;
        for (int x : c) {
            if (!out.empty() && inverse_pair(out.back(), x)) {
                out.pop_back();
                changed = true;
            } else {
                out.push_back(x);
            }
        }
        while (out.size() >= 2 && inverse_pair(out.front(), out.back())) {
            out.erase(out.begin());
            out.pop_back();
            changed = true;
        }
        c = out;
    }
    return c;
}

Code least_rotation(const Code& c) {
    Code best = c;
    for (size_t r = 1; r < c.size(); ++r) {
        Code x(c.begin() + r, c.end());
        x.insert(x.end(), c.begin(), c.begin() + r);
        best = std::min(best, x);
    }
    return best;
}

Code class_minimum(const Code& start, bool commute) {
    if (start.empty() || !commute) return least_rotation(start);
    std::set<Code> seen{start};
    std::vector<Code> frontier{start};
    const size_t limit = 400000;
    while (!frontier.empty() && seen.size() < limit) {
        Code c = frontier.back();
        frontier.pop_back();
        const size_t L = c.size();
        std::vector<Code> next;
        Code rot(c.begin() + 1, c.end());
        rot.push_back(c.front());
        next.push_back(rot);
        for (size_t i = 0; i < L; ++i) {
            size_t j = (i + 1) % L;
            if (L < 2 || std::abs(c[i] / 2 - c[j] / 2) < 2) continue;
            Code s = c;
            std::swap(s[i], s[j]);
            next.push_back(s);
        }
        for (auto& n : next)
            if (seen.insert(n).second) frontier.push_back(std::move(n));
    }
    return *seen.begin();
}

}  // namespace

BraidWord word_normalize(const BraidWord& w) { return decode(least_rotation(cyclic_reduce(encode(w))), w.strands); }

BraidWord canonical_word(const BraidWord& w, const Equivalence& eq) {
    Code base = eq.reduce ? cyclic_reduce(encode(w)) : encode(w);
    std::vector<Code> variants{base};
    if (eq.flip) {
        Code f = base;
        for (int& x : f) x = (w.strands - x / 2) * 2 + x % 2;
        variants.push_back(f);
    }
    if (eq.reverse) {
        const size_t n = variants.size();
        for (size_t i = 0; i < n; ++i) {
            Code r(variants[i].rbegin(), variants[i].rend());
            variants.push_back(r);
        }
    }
    Code best;
    bool first = true;
    for (const auto& v : variants) {
        Code m = class_minimum(v, eq.commute);
        if (first || m < best) best = m;
        first = false;
    }
    return decode(best, w.strands);
}

bool words_equivalent(const BraidWord& a, const BraidWord& b, const Equivalence& eq) {
    if (a.strands != b.strands) return false;
    return canonical_word(a, eq) == canonical_word(b, eq);
}

std::vector<ProjectedCrossing> projected_crossings(const std::vector<NodalCurve>& curves, double dz_tol) {
    struct Strand {
        int curve, pass;
    };
    int N = 0;
    for (const auto& c : curves)
        for (const auto& s : c.samples) N = std::max(N, s.slice + 1);
    std::vector<Strand> strands;
    for (int c = 0; c < static_cast<int>(curves.size()); ++c) {
        if (curves[c].samples.size() % N != 0) throw Error("curve samples do not cover whole slices");
        int m = static_cast<int>(curves[c].samples.size()) / N;
        for (int p = 0; p < m; ++p) strands.push_back({c, p});
    }
    const int S = static_cast<int>(strands.size());
    auto sample = [&](const Strand& s, int i) -> const CurveSample& {
        const auto& v = curves[s.curve].samples;
        return v[(static_cast<size_t>(s.pass) * N + i) % v.size()];
    };
    constexpr double kTwoPi = 6.283185307179586;
    std::vector<ProjectedCrossing> out;
    for (int i = 0; i < N; ++i) {
        double pa = std::fmod(sample(strands[0], i).phi, kTwoPi);
        double pb = pa + (std::fmod(sample(strands[0], i + 1).phi - sample(strands[0], i).phi + 2 * kTwoPi, kTwoPi));
        std::vector<double> Ra(S), Rb(S), za(S), zb(S);
        for (int k = 0; k < S; ++k) {
            const auto& sa = sample(strands[k], i);
            const auto& sb = sample(strands[k], i + 1);
            Ra[k] = sa.p.R();
            Rb[k] = sb.p.R();
            za[k] = sa.p.z;
            zb[k] = sb.p.z;
        }
        for (int A = 0; A < S; ++A)
            for (int B = A + 1; B < S; ++B) {
                double da = Ra[A] - Ra[B], db = Rb[A] - Rb[B];
                if ((da < 0) == (db < 0)) continue;
                double lam = da / (da - db);
                double phi = pa + lam * (pb - pa);
                double zA = za[A] + lam * (zb[A] - za[A]), zB = za[B] + lam * (zb[B] - za[B]);
                if (std::abs(zA - zB) < dz_tol) {
                    std::ostringstream os;
                    os << "strands nearly touch at phi=" << phi << " (|dz|=" << std::abs(zA - zB) << ")";
                    throw AmbiguousCrossing(os.str());
                }
                bool a_up = zA > zB;
                double grow = a_up ? (db - da) : (da - db);
                double Rc = Ra[A] + lam * (Rb[A] - Ra[A]);
                int above = 0;
                for (int k = 0; k < S; ++k) {
                    if (k == A || k == B) continue;
                    if (Ra[k] + lam * (Rb[k] - Ra[k]) > Rc) ++above;
                }
                out.push_back({std::fmod(phi, kTwoPi), above + 1, grow > 0 ? 1 : -1, A, B});
            }
    }
    std::sort(out.begin(), out.end(), [](const ProjectedCrossing& x, const ProjectedCrossing& y) {
        if (x.phi != y.phi) return x.phi > y.phi;
        return x.generator_index < y.generator_index;
    });
    for (size_t i = 0; i + 1 < out.size(); ++i) {
        const auto &x = out[i], &y = out[i + 1];
        bool share = x.curve_a == y.curve_a || x.curve_a == y.curve_b || x.curve_b == y.curve_a || x.curve_b == y.curve_b;
        if (share && std::abs(x.phi - y.phi) < 1e-9) throw AmbiguousCrossing("overlapping crossings");
    }
    return out;
}

BraidWord braid_word_from_curve(const std::vector<NodalCurve>& curves, double dz_tol) {
    BraidWord w;
    for (const auto& c : curves) w.strands += c.passes;
    for (const auto& x : projected_crossings(curves, dz_tol)) w.letters.push_back({x.generator_index, x.sign});
    return w;
}

KnotReport verify_knot(const std::vector<NodalCurve>& curves, const BraidWord& expected) {
    KnotReport r;
    r.components = static_cast<int>(curves.size());
    r.word = braid_word_from_curve(curves);
    r.normalized_word = word_normalize(r.word);
    r.expected = expected;
    r.alexander = alexander_polynomial(r.word);
    r.expected_alexander = alexander_polynomial(expected);
    r.determinant = abs(r.alexander.poly.eval(-1));
    r.word_match = r.components == closure_components(expected) && words_equivalent(r.word, expected);
    r.alexander_match = r.alexander.poly == r.expected_alexander.poly;
    r.pass = r.word_match && r.alexander_match;
    return r;
}

std::string to_string(const KnotReport& r) {
    std::ostringstream os;
    os << "components: " << r.components << '\n'
       << "word: " << to_string(r.word) << '\n'
       << "normalized_word: " << to_string(r.normalized_word) << '\n'
       << "expected_word: " << to_string(r.expected) << '\n'
       << "word_match: " << (r.word_match ? "true" : "false") << '\n'
       << "alexander: " << to_string(r.alexander.poly) << (r.alexander.is_knot ? "" : " (link, single-variable)")
       << '\n'
       << "expected_alexander: " << to_string(r.expected_alexander.poly) << '\n'
       << "determinant: " << r.determinant << '\n'
       << "verdict: " << (r.pass ? "pass" : "fail") << '\n';
    return os.str();
}

}  // namespace knotfield
