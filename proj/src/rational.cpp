#include "knotfield/rational.hpp"

#include "knotfield/errors.hpp"

namespace knotfield {

Q parse_rational(const std::string& raw) {
    std::string s;
    for (char c : raw)
        if (c != ' ') s += c;
    if (s.empty()) throw ParseError("empty rational");
    try {
        auto dot = s.find('.');
        if (dot != std::string::npos) {
            if (s.find_first_of("eE/") != std::string::npos)
                throw NonRationalScale("not an exact rational: " + raw);
            bool neg = s[0] == '-';
            std::string body = (s[0] == '-' || s[0] == '+') ? s.substr(1) : s;
            dot = body.find('.');
            std::string digits = body.substr(0, dot) + body.substr(dot + 1);
            if (digits.empty()) throw ParseError("bad decimal: " + raw);
            mpz_class num(digits, 10), den = 1;
            for (size_t i = dot + 1; i < body.size(); ++i) den *= 10;
            Q q(num, den);
            q.canonicalize();
            return neg ? Q(-q) : q;
        }
        Q q(s, 10);
        if (q.get_den() == 0) throw ParseError("zero denominator: " + raw);
        q.canonicalize();
        return q;
    } catch (const std::invalid_argument&) {
        throw NonRationalScale("not an exact rational: " + raw);
    }
}

std::string to_string(const Q& q) { return q.get_str(); }

std::string to_string(const GaussQ& g) {
    if (sgn(g.im) == 0) return g.re.get_str();
    if (sgn(g.re) == 0) return g.im.get_str() + "i";
    return "(" + g.re.get_str() + (sgn(g.im) > 0 ? "+" : "") + g.im.get_str() + "i)";
}

}  // namespace knotfield
