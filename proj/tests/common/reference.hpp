#pragma once
#include <cctype>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>

#include <gmpxx.h>

#include <vector>

#include "knotfield/braidpoly.hpp"
#include "knotfield/knotid.hpp"

namespace reference {

using knotfield::Exponent3;
using knotfield::GaussQ;
using knotfield::Mono;
using knotfield::Q;

// f_a for 5_2 written out by hand: monomial -> coefficient (already scaled by 256)
inline std::map<Mono, GaussQ> hand_f52() {
    std::map<Mono, GaussQ> m;
    m[{3, 0, 0}] = 256;
    // 12 a^2 u (12 v^3 - 12 vb^3 + 22 v^2 - 22 vb^2 + 4 v - 12 vb - 5)
    m[{1, 3, 0}] = 144;
    m[{1, 0, 3}] = -144;
    m[{1, 2, 0}] = 264;
    m[{1, 0, 2}] = -264;
    m[{1, 1, 0}] = 48;
    m[{1, 0, 1}] = -144;
    m[{1, 0, 0}] = -60;
    // (1/2) a^3 (384 + 27 v^5 + 27 vb^5 + 44 v^4 + 172 vb^4 + 102 v^3 + 186 vb^3 + 460 v^2 + 52 vb^2 + 748 v - 4 vb)
    m[{0, 0, 0}] = 192;
    m[{0, 5, 0}] = Q(27, 2);
    m[{0, 0, 5}] = Q(27, 2);
    m[{0, 4, 0}] = 22;
    m[{0, 0, 4}] = 86;
    m[{0, 3, 0}] = 51;
    m[{0, 0, 3}] = 93;
    m[{0, 2, 0}] = 230;
    m[{0, 0, 2}] = 26;
    m[{0, 1, 0}] = 374;
    m[{0, 0, 1}] = -2;
    return m;
}

// Term parser for the published Cartesian polynomial: "2042 x^{10} + ... - 1994".
inline std::map<Exponent3, long> parse_terms(const std::string& s) {
    std::map<Exponent3, long> out;
    std::size_t i = 0;
    auto skip = [&] {
        while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    };
    while (true) {
        skip();
        if (i >= s.size()) break;
        int sign = 1;
        if (s[i] == '+' || s[i] == '-') {
            sign = s[i] == '-' ? -1 : 1;
            ++i;
            skip();
        }
        long c = 1;
        bool digits = false;
        if (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) {
            c = 0;
            while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) c = c * 10 + (s[i++] - '0'), digits = true;
        }
        Exponent3 e{0, 0, 0};
        skip();
        while (i < s.size() && (s[i] == 'x' || s[i] == 'y' || s[i] == 'z')) {
            int var = s[i] - 'x';
            ++i;
            int p = 1;
            if (i < s.size() && s[i] == '^') {
                ++i;
                bool brace = s[i] == '{';
                if (brace) ++i;
                p = 0;
                while (std::isdigit(static_cast<unsigned char>(s[i]))) p = p * 10 + (s[i++] - '0');
                if (brace) ++i;
            }
            e[var] += p;
            skip();
        }
        if (!digits && e == Exponent3{0, 0, 0}) throw std::runtime_error("unparsed term near offset " + std::to_string(i));
        out[e] += sign * c;
    }
    return out;
}

struct Published {
    std::map<Exponent3, long> real_part, bracket;
};

inline Published load_published() {
    std::ifstream is(std::string(KNOTFIELD_TEST_DATA) + "/published_f52_quarter.tex");
    if (!is.good()) throw std::runtime_error("reference data not found");
    std::stringstream ss;
    ss << is.rdbuf();
    std::string t = ss.str();
    t = t.substr(t.find("& = &") + 5);
    for (const std::string junk : {"\\fl", "& &", "\\nonumber", "\\\\", "\\left.", "\\right."}) {
        for (std::size_t p; (p = t.find(junk)) != std::string::npos;) t.replace(p, junk.size(), " ");
    }
    const std::string marker = "2\\rmi";
    auto m = t.find(marker);
    if (m == std::string::npos) throw std::runtime_error("imaginary marker not found");
    Published P;
    std::string re = t.substr(0, m);
    while (!re.empty() && (std::isspace(static_cast<unsigned char>(re.back())) || re.back() == '+')) re.pop_back();
    P.real_part = parse_terms(re);
    std::string im = t.substr(m + marker.size());
    // skip "\left( 1+ x^2 + y^2 + z^2\right)^3\left("
    auto open = im.find("\\left(", im.find("\\right)"));
    im = im.substr(open + 6);
    im = im.substr(0, im.rfind("\\right)"));
    P.bracket = parse_terms(im);
    return P;
}

inline std::map<Exponent3, long> times_sphere(const std::map<Exponent3, long>& p) {
    std::map<Exponent3, long> r;
    for (const auto& [e, c] : p) {
        r[e] += c;
        for (int k = 0; k < 3; ++k) {
            auto f = e;
            f[k] += 2;
            r[f] += c;
        }
    }
    for (auto it = r.begin(); it != r.end();) it = it->second == 0 ? r.erase(it) : std::next(it);
    return r;
}

// Independent oracle: reduced Burau matrices at a rational point t0,
// Delta(t0) = det(I - B) (1 - t0) / (1 - t0^n).
using QMat = std::vector<std::vector<mpq_class>>;

inline QMat q_identity(int m) {
    QMat I(m, std::vector<mpq_class>(m, 0));
    for (int i = 0; i < m; ++i) I[i][i] = 1;
    return I;
}

inline QMat q_mul(const QMat& a, const QMat& b) {
    const size_t m = a.size();
    QMat c(m, std::vector<mpq_class>(m, 0));
    for (size_t r = 0; r < m; ++r)
        for (size_t k = 0; k < m; ++k)
            if (a[r][k] != 0)
                for (size_t s = 0; s < m; ++s) c[r][s] += a[r][k] * b[k][s];
    return c;
}

inline QMat q_inverse(QMat a) {
    const int m = static_cast<int>(a.size());
    QMat inv = q_identity(m);
    for (int c = 0; c < m; ++c) {
        int p = c;
        while (a[p][c] == 0) ++p;
        std::swap(a[p], a[c]);
        std::swap(inv[p], inv[c]);
        mpq_class d = a[c][c];
        for (int s = 0; s < m; ++s) a[c][s] /= d, inv[c][s] /= d;
        for (int r = 0; r < m; ++r) {
            if (r == c || a[r][c] == 0) continue;
            mpq_class f = a[r][c];
            for (int s = 0; s < m; ++s) a[r][s] -= f * a[c][s], inv[r][s] -= f * inv[c][s];
        }
    }
    return inv;
}

inline mpq_class q_det(QMat A) {
    const int m = static_cast<int>(A.size());
    mpq_class det = 1;
    for (int c = 0; c < m; ++c) {
        int p = c;
        while (p < m && A[p][c] == 0) ++p;
        if (p == m) return 0;
        if (p != c) std::swap(A[p], A[c]), det = -det;
        det *= A[c][c];
        for (int r = c + 1; r < m; ++r) {
            mpq_class f = A[r][c] / A[c][c];
            for (int s = c; s < m; ++s) A[r][s] -= f * A[c][s];
        }
    }
    return det;
}

// sigma_k: row k-1 (0-based) becomes (.., t, -t, 1, ..) around the diagonal
inline QMat reduced_burau_generator(int n, int k, const mpq_class& t) {
    const int m = n - 1, r = k - 1;
    QMat g = q_identity(m);
    if (r > 0) g[r][r - 1] = t;
    g[r][r] = -t;
    if (r + 1 < m) g[r][r + 1] = 1;
    return g;
}

inline mpq_class alexander_at(const knotfield::BraidWord& w, long t0) {
    const int n = w.strands;
    const mpq_class t = t0;
    if (n == 1) return 1;
    QMat B = q_identity(n - 1);
    for (const auto& l : w.letters) {
        QMat g = reduced_burau_generator(n, l.k, t);
        B = q_mul(B, l.sign > 0 ? g : q_inverse(g));
    }
    QMat A = q_identity(n - 1);
    for (int r = 0; r < n - 1; ++r)
        for (int s = 0; s < n - 1; ++s) A[r][s] -= B[r][s];
    mpq_class tn = 1;
    for (int k = 0; k < n; ++k) tn *= t;
    return q_det(A) * (1 - t) / (1 - tn);
}

inline mpq_class eval_laurent(const knotfield::LaurentPoly& p, long t0) {
    mpq_class v = 0;
    for (const auto& [e, c] : p.terms()) {
        mpq_class x = 1;
        for (int k = 0; k < std::abs(e); ++k) x *= t0;
        v += e >= 0 ? mpq_class(mpq_class(c) * x) : mpq_class(mpq_class(c) / x);
    }
    return v;
}

// p(t0) = +-t0^k oracle(t0) for some k
inline bool agrees_up_to_unit(const knotfield::LaurentPoly& p, const knotfield::BraidWord& w) {
    for (long t0 : {2L, 3L, 5L}) {
        mpq_class a = eval_laurent(p, t0), b = alexander_at(w, t0);
        if (b == 0) return a == 0;
        mpq_class r = abs(a / b);
        bool ok = false;
        mpq_class x = 1;
        for (int k = 0; k <= 30 && !ok; ++k, x *= t0) ok = (r == x || r == 1 / x);
        if (!ok) return false;
    }
    return true;
}

}  // namespace reference
