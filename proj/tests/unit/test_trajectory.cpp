#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "knotfield/errors.hpp"
#include "knotfield/knotid.hpp"
#include "knotfield/trajectory.hpp"

using namespace knotfield;

namespace {

constexpr double kPi = 3.14159265358979323846;

BraidWord W(const std::string& s, int n) { return parse_braid_word(s, n); }

// real roots of 161 z^8 - 1092 z^6 + 798 z^4 - 244 z^2 + 9
std::vector<double> octic_real_roots() {
    std::vector<double> c = {9, 0, -244, 0, 798, 0, -1092, 0, 161};
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(8, 8);
    for (int i = 1; i < 8; ++i) M(i, i - 1) = 1;
    for (int i = 0; i < 8; ++i) M(i, 7) = -c[i] / c[8];
    Eigen::EigenSolver<Eigen::MatrixXd> es(M);
    std::vector<double> r;
    for (int i = 0; i < 8; ++i)
        if (std::abs(es.eigenvalues()[i].imag()) < 1e-9) r.push_back(es.eigenvalues()[i].real());
    return r;
}

double circ_dist(double a, double b) { return std::abs(std::remainder(a - b, 2 * kPi)); }

}  // namespace

TEST_SUITE("trajectory") {
TEST_CASE("5_2 trajectory values") {
    auto tr = catalog_trajectory("5_2").components[0];
    auto [x0, y0] = eval_trajectory(tr, 0);
    CHECK(x0 == doctest::Approx(-1.75).epsilon(1e-15));
    // the Y series is odd, so Y(0) = 0 (see the README on the printed cosine term)
    CHECK(std::abs(y0) < 1e-15);
    CHECK(std::abs(eval_trajectory(tr, 3 * kPi).second) < 1e-12);
    CHECK(eval_trajectory(tr, kPi).first == doctest::Approx(0.125).epsilon(1e-14));
}

TEST_CASE("periodicity over 2 pi s") {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> U(0, 20);
    for (const std::string name : {"5_2", "6_2", "6_1", "square"}) {
        auto ts = catalog_trajectory(name);
        const auto& tr = ts.components[0];
        for (int i = 0; i < 200; ++i) {
            double t = U(rng);
            auto a = eval_trajectory(tr, t);
            auto b = eval_trajectory(tr, t + 2 * kPi * tr.strands);
            CHECK(std::abs(a.first - b.first) < 1e-12);
            CHECK(std::abs(a.second - b.second) < 1e-12);
        }
    }
}

TEST_CASE("derivative matches central differences") {
    auto tr = catalog_trajectory("6_1").components[0];
    for (double t : {0.3, 1.7, 4.2, 9.9}) {
        auto d = eval_trajectory_derivative(tr, t);
        double h = 1e-6;
        auto p = eval_trajectory(tr, t + h), m = eval_trajectory(tr, t - h);
        CHECK(d.first == doctest::Approx((p.first - m.first) / (2 * h)).epsilon(1e-7));
        CHECK(d.second == doctest::Approx((p.second - m.second) / (2 * h)).epsilon(1e-7));
    }
}

TEST_CASE("max_radius agrees with a dense scan") {
    auto tr = catalog_trajectory("5_2").components[0];
    auto m = max_radius(tr);
    double best = 0, tb = 0;
    const int N = 200000;
    for (int i = 0; i < N; ++i) {
        double t = 6 * kPi * i / N;
        auto [x, y] = eval_trajectory(tr, t);
        if (std::hypot(x, y) > best) best = std::hypot(x, y), tb = t;
    }
    CHECK(m.rho_max >= best - 1e-12);
    CHECK(m.rho_max - best < 1e-6);
    // X is even and Y odd, so the argmax comes with its mirror 6 pi - t
    CHECK(std::min(circ_dist(m.t_at, tb), std::abs(m.t_at - (6 * kPi - tb))) < 1e-3);
    // max_radius is a true maximum: radial derivative vanishes
    auto [x, y] = eval_trajectory(tr, m.t_at);
    auto [dx, dy] = eval_trajectory_derivative(tr, m.t_at);
    CHECK(std::abs(x * dx + y * dy) < 1e-8);
}

TEST_CASE("max_radius of simple curves") {
    Trajectory circle;
    circle.strands = 1;
    circle.x = {{Q(1), Q(1), Q(0), Kind::Cos}};
    circle.y = {{Q(1), Q(1), Q(0), Kind::Sin}};
    CHECK(max_radius(circle).rho_max == doctest::Approx(1).epsilon(1e-12));
    auto lem = lemniscate_trajectory(3, 2, 2);
    auto m = max_radius(lem);
    CHECK(m.rho_max == doctest::Approx(1).epsilon(1e-12));
    // peaks at t = 0 and 3 pi; r^2 = 1 + O(t^4) there, so t is only fixed to about eps^(1/4)
    CHECK(std::min(circ_dist(m.t_at, 0), std::abs(m.t_at - 3 * kPi)) < 1e-3);
}

TEST_CASE("5_2 crossings, signs and word") {
    auto ts = catalog_trajectory("5_2");
    auto cr = find_crossings(ts);
    REQUIRE(cr.size() == 6);
    std::vector<double> expect = {0, 0.96, 1.98, kPi, 2 * kPi - 1.98, 2 * kPi - 0.96};
    std::vector<int> signs = {-1, 1, 1, 1, 1, 1};
    for (int i = 0; i < 6; ++i) {
        CHECK(std::abs(cr[i].time - expect[i]) < 1e-2);
        CHECK(cr[i].sign == signs[i]);
    }
    CHECK(std::abs(cr[5].time - (2 * kPi - cr[1].time)) < 1e-10);
    CHECK(std::abs(cr[4].time - (2 * kPi - cr[2].time)) < 1e-10);
    CHECK(extract_braid_word(ts) == W("s1^-1 s2 s1^3 s2", 3));
}

TEST_CASE("5_2 crossing times from the octic oracle") {
    auto cr = find_crossings(catalog_trajectory("5_2"));
    auto roots = octic_real_roots();
    REQUIRE(roots.size() == 4);
    std::vector<double> cand;
    for (double z : roots)
        for (double s : {-1.0, 1.0}) cand.push_back(std::fmod(3 * std::atan(z) + s * kPi / 2 + 4 * kPi, 2 * kPi));
    for (int i : {1, 2, 4, 5}) {
        double best = 1e9;
        for (double c : cand) best = std::min(best, circ_dist(c, cr[i].time));
        CHECK(best < 1e-8);
    }
}

TEST_CASE("crossing completeness: X-rank order constant between crossings") {
    for (const std::string name : {"5_2", "6_2", "square", "whitehead"}) {
        auto ts = catalog_trajectory(name);
        auto cr = find_crossings(ts);
        auto labels = strand_labels(ts);
        auto order = [&](double t) {
            std::vector<int> idx(labels.size());
            for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<int>(i);
            std::sort(idx.begin(), idx.end(), [&](int a, int b) {
                return strand_position(ts, labels[a], t).real() > strand_position(ts, labels[b], t).real();
            });
            return idx;
        };
        const int N = 20000;
        auto prev = order(1e-7);
        for (int i = 1; i <= N; ++i) {
            double t = 2 * kPi * i / N - 1e-7;
            auto cur = order(t);
            if (cur != prev) {
                double best = 1e9;
                for (const auto& c : cr) best = std::min(best, circ_dist(c.time, t));
                CHECK_MESSAGE(best < 2 * kPi / N + 1e-9, name << " rank change at t=" << t);
            }
            prev = cur;
        }
    }
}

TEST_CASE("permutation consistency") {
    for (const std::string name : {"5_2", "6_2", "6_1", "square", "whitehead", "lemniscate:3,2,2", "lemniscate:3,2,3"}) {
        auto ts = catalog_trajectory(name);
        CHECK_MESSAGE(extract_braid_word(ts).permutation() == rank_permutation(ts), name);
    }
}

TEST_CASE("sign flip covariance") {
    for (const std::string name : {"5_2", "6_2", "square", "6_1"}) {
        auto ts = catalog_trajectory(name);
        auto a = find_crossings(ts), b = find_crossings(negate_y(ts));
        REQUIRE(a.size() == b.size());
        for (std::size_t i = 0; i < a.size(); ++i) {
            CHECK(a[i].time == doctest::Approx(b[i].time));
            CHECK(a[i].sign == -b[i].sign);
        }
        CHECK(extract_braid_word(negate_y(ts)) == extract_braid_word(ts).mirror());
    }
}

TEST_CASE("projection in the other transverse axis gives the 8-crossing word") {
    auto w = extract_braid_word(quarter_turn(catalog_trajectory("5_2")));
    CHECK(w.letters.size() == 8);
    CHECK(words_equivalent(w, W("s1 s2^-1 s1 s2 s1 s2 s1^-1 s2", 3)));
}

TEST_CASE("lemniscate words") {
    CHECK(words_equivalent(extract_braid_word(catalog_trajectory("lemniscate:3,2,2")), W("s1 s2^-1 s1 s2^-1", 3)));
    CHECK(extract_braid_word(catalog_trajectory("lemniscate:2,1,3")) == W("s1^3", 2));
    CHECK(words_equivalent(extract_braid_word(catalog_trajectory("lemniscate:3,2,3")), W("s1 s2^-1 s1 s2^-1 s1 s2^-1", 3)));
    for (int q : {1, 2, 4}) {
        auto w = extract_braid_word(TrajectorySet{"t", {lemniscate_trajectory(3, 1, q)}});
        CHECK(words_equivalent(w, W("s1 s2", 3).power(q)));
        for (const auto& l : w.letters) CHECK(l.sign == 1);
    }
    CHECK_THROWS_AS(lemniscate_trajectory(4, 2, 1), NotCoprime);
}

TEST_CASE("catalog words") {
    auto w62 = extract_braid_word(catalog_trajectory("6_2"));
    CHECK(words_equivalent(w62, W("s1^3 s2 s1 s2", 3)));
    auto sq = extract_braid_word(catalog_trajectory("square"));
    CHECK(words_equivalent(sq, W("s1^3 s2^-3", 3)));
    auto wh = catalog_trajectory("whitehead");
    CHECK(wh.components.size() == 2);
    CHECK(closure_components(extract_braid_word(wh)) == 2);
    CHECK(extract_braid_word(wh).letters.size() == 5);
    CHECK_THROWS_AS(catalog_trajectory("7_4"), UnknownCatalogEntry);
}

TEST_CASE("degenerate crossings are rejected") {
    Trajectory t;  // Y identically zero: no crossing has a well-defined sign
    t.strands = 3;
    t.x = {{Q(1), Q(1, 3), Q(0), Kind::Cos}};
    t.y = {{Q(0), Q(1, 3), Q(0), Kind::Sin}};
    CHECK_THROWS_AS(find_crossings(TrajectorySet{"bad", {t}}), DegenerateCrossing);
}

TEST_CASE("braid word text round trip") {
    auto w = W("s1^-1 s2 s1^3 s2", 3);
    CHECK(to_string(w) == "s1^-1 s2 s1^3 s2");
    CHECK(W("", 3).letters.empty());
    CHECK_THROWS_AS(W("s3", 3), ParseError);
    CHECK_THROWS_AS(W("x1", 3), ParseError);
}

TEST_CASE("trajectory JSON round trip") {
    for (const std::string name : {"5_2", "6_1", "whitehead"}) {
        auto ts = catalog_trajectory(name);
        auto back = trajectory_from_json(trajectory_to_json(ts));
        REQUIRE(back.components.size() == ts.components.size());
        CHECK(extract_braid_word(back) == extract_braid_word(ts));
        for (double t : {0.1, 2.0, 5.0}) {
            auto a = eval_trajectory(ts.components[0], t), b = eval_trajectory(back.components[0], t);
            CHECK(a.first == b.first);
            CHECK(a.second == b.second);
        }
    }
}
}
