#pragma once
#include <string>
#include <utility>
#include <vector>

#include "knotfield/rational.hpp"

namespace knotfield {

enum class Kind { Cos, Sin };

// amplitude * cos|sin(frequency * t + phase_over_pi * pi)
struct FourierTerm {
    Q amplitude;
    Q frequency;
    Q phase_over_pi;
    Kind kind = Kind::Cos;
};

// One closed strand family. Strand j at braid time t sits at
// Z(repeats * t + 2*pi*j), j = 0..strands-1, with Z = X + iY of period
// 2*pi*strands. repeats > 1 encodes an r-fold traversal without touching
// the frequencies.
struct Trajectory {
    std::vector<FourierTerm> x, y;
    int strands = 1;
    int repeats = 1;
};

// A braid made of one trajectory per link component (a single entry for knots).
struct TrajectorySet {
    std::string name;
    std::vector<Trajectory> components;

    int total_strands() const;
};

struct Crossing {
    double time = 0;
    int generator_index = 0;
    int sign = 0;
    int strand_over = 0;   // label of the strand with larger Y
    int strand_under = 0;
};

struct Letter {
    int k = 0;
    int sign = 1;
    friend bool operator==(const Letter&, const Letter&) = default;
};

struct BraidWord {
    int strands = 0;
    std::vector<Letter> letters;

    friend bool operator==(const BraidWord&, const BraidWord&) = default;
    // positions after the braid: result[p] = starting position of the strand now at p
    std::vector<int> permutation() const;
    BraidWord inverse() const;
    BraidWord mirror() const;
    BraidWord power(int n) const;
};

// "s1^-1 s2 s1^3 s2", exponents grouped.
std::string to_string(const BraidWord& w);
// Accepts the format above; "" is the empty word.
BraidWord parse_braid_word(const std::string& s, int strands);

std::pair<double, double> eval_trajectory(const Trajectory& tr, double t);
std::pair<double, double> eval_trajectory_derivative(const Trajectory& tr, double t);

struct MaxRadius {
    double rho_max = 0;
    double t_at = 0;
};
MaxRadius max_radius(const Trajectory& tr);

// Strand positions a(X + iY) at braid time t, in label order.
struct StrandRef {
    int component = 0;
    int shift = 0;
};
std::vector<StrandRef> strand_labels(const TrajectorySet& ts);
cplx strand_position(const TrajectorySet& ts, const StrandRef& s, double t);

std::vector<Crossing> find_crossings(const TrajectorySet& ts);
BraidWord extract_braid_word(const TrajectorySet& ts);
// Permutation read from X-ranks at t = 0- versus t = 2pi-.
std::vector<int> rank_permutation(const TrajectorySet& ts);

Trajectory lemniscate_trajectory(int s, int ell, int r);
TrajectorySet catalog_trajectory(const std::string& name);
std::vector<std::string> catalog_names();

TrajectorySet negate_y(const TrajectorySet& ts);
// (X, Y) -> (-Y, X): read the braid in the other transverse projection.
TrajectorySet quarter_turn(const TrajectorySet& ts);

std::string trajectory_to_json(const TrajectorySet& ts);
TrajectorySet trajectory_from_json(const std::string& text);

}  // namespace knotfield
