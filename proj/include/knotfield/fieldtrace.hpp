#pragma once
#include <array>
#include <optional>
#include <string>
#include <vector>

#include "knotfield/braidpoly.hpp"
#include "knotfield/trajectory.hpp"

namespace knotfield {

struct StereoPoint {
    double x = 0, y = 0, z = 0;
    double R() const;
    double phi() const;  // in [0, 2pi)
    std::array<double, 3> xyz() const { return {x, y, z}; }
};

struct RootRZ {
    double R = 0, z = 0;
    cplx u;
};

struct CurveSample {
    StereoPoint p;
    double phi = 0;  // unwrapped azimuth along the component
    int slice = 0;
    cplx u;
    double residual = 0;
};

struct NodalCurve {
    std::vector<CurveSample> samples;
    bool closed = false;
    int component = 0;
    int passes = 0;  // number of braid strands (turns in phi) this loop uses
};

enum class SeedStrategy { Grid, Braid };

struct TraceConfig {
    double a = 0.25;
    int phi_steps = 2048;
    double tol = 1e-12;
    int max_iter = 50;
    SeedStrategy seed = SeedStrategy::Grid;
    std::optional<TrajectorySet> trajectory;  // required for Braid seeding
    double match_tol = 1e-6;                  // roots closer than this are treated as merging
    unsigned rng_seed = 12345;
};

struct TraceResult {
    std::vector<NodalCurve> curves;
    std::vector<int> permutation;  // strand at slot j after 2pi sits at slot permutation[j]
    double max_residual = 0;
    double max_step = 0;  // largest |du| between consecutive slices
    double closure_error = 0;
    int fold_bridges = 0;  // strands carried across a local fold in phi
    double max_bridge = 0;
};

// Newton-solve f(u, sqrt(1-|u|^2) e^{i phi}) = 0 from a seed; nullopt on divergence.
std::optional<cplx> newton_on_slice(const SemiholoEval& F, double phi, cplx seed, double tol, int max_iter);

std::vector<RootRZ> roots_at_phi(const SemiholoN& f, double a, double phi);
TraceResult trace_nodal_set(const SemiholoN& f, const TraceConfig& cfg);

struct ProfileSample {
    int component = 0;
    double phi = 0;
    double re = 0, im = 0;  // u / a
};
std::vector<ProfileSample> rescaled_profile(const std::vector<NodalCurve>& curves, double a);

struct Box {
    std::array<double, 3> lo{-2, -2, -2}, hi{2, 2, 2};
};
struct Mesh {
    std::vector<std::array<double, 3>> vertices;
    std::vector<std::array<int, 3>> faces;
};
Mesh argument_level_set(const CartesianPoly& f, double theta, const Box& box, int resolution);

std::string export_curves_csv(const std::vector<NodalCurve>& curves);
std::string export_mesh_obj(const Mesh& m);

}  // namespace knotfield
