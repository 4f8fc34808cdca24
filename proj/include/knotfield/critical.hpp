#pragma once
#include <string>
#include <vector>

#include "knotfield/braidpoly.hpp"
#include "knotfield/fieldtrace.hpp"

namespace knotfield {

struct CriticalCurveSample {
    double t = 0;
    cplx u;
    int branch = 0;
};

enum class CriticalKind { Modulus, Argument };

struct CriticalPointReport {
    CriticalKind kind = CriticalKind::Argument;
    double t = 0;  // braid time (braid-polynomial reports)
    cplx u;
    int branch = -1;
    StereoPoint point;  // image on S^3 in stereographic coordinates
    double value = 0;   // |p|^2 or arg in [0, 2pi)
    double second_derivative = 0;
    bool is_max = false;
    bool degenerate = false;
    double residual = 0;
    int count = 0;  // size of the report set this entry belongs to
};

// p_{t,a}(u) recovered from f by v = exp(-i t).
TrigPolyN semiholo_to_trig(const SemiholoN& f);

std::vector<CriticalCurveSample> critical_curves(const TrigPolyN& p, double a, int n_t);
std::vector<CriticalPointReport> modulus_critical_points(const TrigPolyN& p, double a, int n_t = 4096);
std::vector<CriticalPointReport> phase_critical_points(const TrigPolyN& p, double a, int n_t = 4096);

struct ReconnectionEvent {
    double a_threshold = 0;
    std::vector<StereoPoint> points;
    std::vector<double> residuals;
};
struct ReconnectionResult {
    std::vector<ReconnectionEvent> events;
    int seeds = 0;
    int failures = 0;  // seeds whose Newton solve did not converge or left the range
};
ReconnectionResult reconnection_thresholds(const SemiholoN& f, double a_lo, double a_hi, int workers = 1);

// f(., v) and its u-derivative lose rank at (point, a): residual of the 5x5 system.
double reconnection_residual(const SemiholoN& f, const StereoPoint& p, double a);

struct SaddleLocusSample {
    double phi = 0, R = 0, z = 0;
    int branch = 0;
};
struct SpherePhaseResult {
    std::vector<CriticalPointReport> points;
    std::vector<SaddleLocusSample> saddle_locus;
    int failures = 0;
};
SpherePhaseResult sphere_phase_critical_points(const CartesianPoly& f, const std::vector<CriticalPointReport>& seeds,
                                               int locus_steps = 512);

struct DoubleRoot {
    double r = 0, t = 0;  // v = r e^{i t}
    cplx u;               // the double root
    double root_gap = 0;  // distance between the two closest companion roots
    double residual = 0;
};
std::vector<DoubleRoot> resultant_double_roots(const SemiholoN& f, double a, int nr = 256, int nt = 1024,
                                               int workers = 1);
cplx resultant_value(const SemiholoN& f, double a, cplx v);

std::vector<cplx> polynomial_roots(const std::vector<cplx>& coeffs_low_to_high);

std::string export_critical_csv(const std::vector<CriticalPointReport>& r);
std::string export_reconnection_csv(const ReconnectionResult& r);
std::string export_double_roots_csv(const std::vector<DoubleRoot>& d);
std::string export_saddle_locus_csv(const std::vector<SaddleLocusSample>& s);

}  // namespace knotfield
