#include <pybind11/complex.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "knotfield/braidpoly.hpp"
#include "knotfield/cli.hpp"
#include "knotfield/critical.hpp"
#include "knotfield/errors.hpp"
#include "knotfield/fieldtrace.hpp"
#include "knotfield/knotid.hpp"
#include "knotfield/trajectory.hpp"

namespace py = pybind11;
using namespace knotfield;

namespace {

TrajectorySet load(const std::string& name_or_json) {
    if (!name_or_json.empty() && name_or_json.front() == '{') return trajectory_from_json(name_or_json);
    return catalog_trajectory(name_or_json);
}

struct Field {
    TrajectorySet ts;
    SemiholoN f;
    std::optional<SemiholoPoly> exact;
};

Field field(const std::string& name, int power) {
    Field fd{load(name), {}, std::nullopt};
    if (has_exact_polynomial(fd.ts)) {
        auto e = trig_to_semiholomorphic(build_braid_polynomial(fd.ts));
        if (power > 1) e = substitute_power(e, power);
        fd.exact = e;
        fd.f = to_numeric(e);
    } else {
        fd.f = trig_to_semiholomorphic(build_braid_polynomial_numeric(fd.ts));
        if (power > 1) fd.f = substitute_power(fd.f, power);
    }
    return fd;
}

py::dict point(const StereoPoint& p) {
    py::dict d;
    d["x"] = p.x, d["y"] = p.y, d["z"] = p.z, d["R"] = p.R(), d["phi"] = p.phi();
    return d;
}

py::list reports(const std::vector<CriticalPointReport>& rs) {
    py::list out;
    for (const auto& r : rs) {
        py::dict d = point(r.point);
        d["kind"] = r.kind == CriticalKind::Modulus ? "modulus" : "argument";
        d["t"] = r.t, d["u"] = r.u, d["branch"] = r.branch, d["value"] = r.value;
        d["second_derivative"] = r.second_derivative, d["is_max"] = r.is_max, d["degenerate"] = r.degenerate;
        d["residual"] = r.residual;
        out.append(d);
    }
    return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Polynomial fields on the 3-sphere whose nodal sets are prescribed knots";

    auto base = py::register_exception<Error>(m, "KnotfieldError", PyExc_RuntimeError);
    py::register_exception<NumericalError>(m, "NumericalError", base.ptr());

    m.def("catalog", &catalog_names);

    m.def("braid_word", [](const std::string& name) { return to_string(extract_braid_word(load(name))); },
          py::arg("name"));

    m.def(
        "crossings",
        [](const std::string& name) {
            py::list out;
            for (const auto& c : find_crossings(load(name))) out.append(py::make_tuple(c.time, c.generator_index, c.sign));
            return out;
        },
        py::arg("name"), "(t, generator, sign) for each crossing over one period");

    m.def(
        "max_radius",
        [](const std::string& name) {
            auto r = max_radius(load(name).components.at(0));
            return py::make_tuple(r.rho_max, r.t_at);
        },
        py::arg("name"));

    m.def(
        "alexander",
        [](const std::string& word, int strands) {
            auto r = alexander_polynomial(parse_braid_word(word, strands));
            py::dict d;
            d["polynomial"] = to_string(r.poly), d["is_knot"] = r.is_knot, d["components"] = r.components;
            return d;
        },
        py::arg("word"), py::arg("strands"));

    m.def("words_equivalent",
          [](const std::string& a, const std::string& b, int strands) {
              return words_equivalent(parse_braid_word(a, strands), parse_braid_word(b, strands));
          },
          py::arg("a"), py::arg("b"), py::arg("strands"));

    m.def(
        "semiholomorphic",
        [](const std::string& name, int power) {
            auto fd = field(name, power);
            py::dict out;
            for (const auto& [mono, c] : fd.f.coeff) out[py::make_tuple(mono.du, mono.dv, mono.dvb)] = c;
            return out;
        },
        py::arg("name"), py::arg("power") = 1, "{(du, dv, dvb): coefficient}, a-graded, integer-scaled");

    m.def(
        "cartesian",
        [](const std::string& name, const std::string& a) {
            auto fd = field(name, 1);
            if (!fd.exact) throw Error("no exact polynomial for " + name);
            auto cp = to_cartesian(*fd.exact, parse_rational(a));
            py::dict terms;
            for (const auto& [e, c] : cp.coeff) terms[py::make_tuple(e[0], e[1], e[2])] = c.to_complex();
            py::dict d;
            d["scale"] = cp.scale.get_str(), d["D"] = cp.D, d["terms"] = terms;
            return d;
        },
        py::arg("name"), py::arg("a") = "1/4");

    m.def(
        "evaluate",
        [](const std::string& name, double a, std::array<double, 3> p) {
            auto fd = field(name, 1);
            auto uv = stereo_to_uv(p);
            return SemiholoEval(fd.f, a).value(uv.u, uv.v, std::conj(uv.v));
        },
        py::arg("name"), py::arg("a"), py::arg("point"), "f_a at a point of R^3 via stereographic projection");

    m.def(
        "trace",
        [](const std::string& name, double a, int phi_steps, int power) {
            auto fd = field(name, power);
            TraceConfig cfg;
            cfg.a = a;
            cfg.phi_steps = phi_steps;
            TraceResult r;
            {
                py::gil_scoped_release nogil;
                r = trace_nodal_set(fd.f, cfg);
            }
            py::list curves;
            for (const auto& c : r.curves) {
                std::vector<std::array<double, 3>> pts;
                pts.reserve(c.samples.size());
                for (const auto& s : c.samples) pts.push_back(s.p.xyz());
                curves.append(pts);
            }
            py::dict d;
            d["curves"] = curves;
            d["components"] = r.curves.size();
            d["word"] = to_string(braid_word_from_curve(r.curves));
            d["max_residual"] = r.max_residual;
            d["closure_error"] = r.closure_error;
            return d;
        },
        py::arg("name"), py::arg("a") = 0.25, py::arg("phi_steps") = 2048, py::arg("power") = 1);

    m.def(
        "verify",
        [](const std::string& name, double a, const std::string& expect) {
            auto fd = field(name, 1);
            TraceConfig cfg;
            cfg.a = a;
            auto r = trace_nodal_set(fd.f, cfg);
            auto want = expect.empty() ? extract_braid_word(fd.ts) : parse_braid_word(expect, fd.ts.total_strands());
            auto rep = verify_knot(r.curves, want);
            py::dict d;
            d["pass"] = rep.pass, d["components"] = rep.components, d["word"] = to_string(rep.word);
            d["alexander"] = to_string(rep.alexander.poly), d["determinant"] = rep.determinant.get_str();
            d["report"] = to_string(rep);
            return d;
        },
        py::arg("name"), py::arg("a") = 0.25, py::arg("expect") = "");

    m.def(
        "phase_critical_points",
        [](const std::string& name, double a) { return reports(phase_critical_points(semiholo_to_trig(field(name, 1).f), a)); },
        py::arg("name"), py::arg("a") = 0.25);

    m.def(
        "modulus_critical_points",
        [](const std::string& name, double a) { return reports(modulus_critical_points(semiholo_to_trig(field(name, 1).f), a)); },
        py::arg("name"), py::arg("a") = 0.25);

    m.def(
        "reconnection_thresholds",
        [](const std::string& name, double a_lo, double a_hi, int workers) {
            auto fd = field(name, 1);
            ReconnectionResult r;
            {
                py::gil_scoped_release nogil;
                r = reconnection_thresholds(fd.f, a_lo, a_hi, workers);
            }
            py::list out;
            for (const auto& e : r.events) {
                py::list pts;
                for (const auto& p : e.points) pts.append(point(p));
                py::dict d;
                d["a"] = e.a_threshold, d["points"] = pts;
                out.append(d);
            }
            return out;
        },
        py::arg("name"), py::arg("a_lo"), py::arg("a_hi"), py::arg("workers") = 1);

    m.def(
        "resultant_double_roots",
        [](const std::string& name, double a) {
            py::list out;
            for (const auto& d : resultant_double_roots(field(name, 1).f, a))
                out.append(py::make_tuple(d.r, d.t, d.u, d.root_gap));
            return out;
        },
        py::arg("name"), py::arg("a") = 0.25, "(r, t, u, root_gap) with v = r e^{it}");

    m.def(
        "run_cli",
        [](const std::vector<std::string>& args) {
            std::ostringstream out, err;
            int code = run_cli(args, out, err);
            return py::make_tuple(code, out.str(), err.str());
        },
        py::arg("args"), "run a CLI subcommand in-process; returns (exit_code, stdout, stderr)");
}
