#include "knotfield/cli.hpp"

#include "CLI11.hpp"
#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include "json.hpp"
#include <map>
#include <optional>
#include <sstream>

#include "knotfield/critical.hpp"
#include "knotfield/errors.hpp"
#include "knotfield/knotid.hpp"

namespace fs = std::filesystem;

namespace knotfield {

namespace {

constexpr double kNearApproach = 0.2;

struct Input {
    TrajectorySet ts;
    int power = 1;
    std::optional<SemiholoPoly> exact;
    SemiholoN f;
    BraidWord word;  // expected word of the closed braid, power applied
};

Input load_input(const std::string& name, const std::string& file, int power) {
    if (name.empty() == file.empty()) throw Error("give exactly one of a catalog name or --file");
    if (power < 1) throw Error("--power must be >= 1");
    Input in;
    if (!file.empty()) {
        std::ifstream is(file);
        if (!is) throw Error("cannot read " + file);
        std::stringstream ss;
        ss << is.rdbuf();
        in.ts = trajectory_from_json(ss.str());
    } else {
        in.ts = catalog_trajectory(name);
    }
    in.power = power;
    if (has_exact_polynomial(in.ts)) {
        auto e = trig_to_semiholomorphic(build_braid_polynomial(in.ts));
        if (power > 1) e = substitute_power(e, power);
        in.exact = e;
        in.f = to_numeric(e);
    } else {
        in.f = trig_to_semiholomorphic(build_braid_polynomial_numeric(in.ts));
        if (power > 1) in.f = substitute_power(in.f, power);
    }
    in.word = extract_braid_word(in.ts).power(power);
    return in;
}

fs::path out_dir(const std::string& flag) {
    std::string d = flag;
    if (d.empty()) {
        const char* env = std::getenv("KNOTFIELD_OUT");
        d = env && *env ? env : ".";
    }
    fs::create_directories(d);
    return fs::path(d);
}

void write_file(const fs::path& p, const std::string& text, std::ostream& out) {
    std::ofstream os(p, std::ios::binary);
    if (!os) throw Error("cannot write " + p.string());
    os << text;
    out << "wrote: " << p.string() << '\n';
}

// csv by default; json converts the same table
void write_table(const fs::path& dir, const std::string& stem, const std::string& csv, const std::string& format,
                 std::ostream& out) {
    if (format == "json")
        write_file(dir / (stem + ".json"), csv_to_json(csv), out);
    else
        write_file(dir / (stem + ".csv"), csv, out);
}

// closest approach between different components in stereographic space
double min_component_distance(const TraceResult& r) {
    double m = 1e300;
    for (std::size_t i = 0; i < r.curves.size(); ++i)
        for (std::size_t j = i + 1; j < r.curves.size(); ++j)
            for (const auto& a : r.curves[i].samples)
                for (const auto& b : r.curves[j].samples)
                    m = std::min(m, std::hypot(a.p.x - b.p.x, a.p.y - b.p.y, a.p.z - b.p.z));
    return m;
}

std::string fmt(double x) {
    std::ostringstream os;
    os << std::setprecision(10) << x;
    return os.str();
}

double suggest_a(const SemiholoN& f, double a) {
    auto rc = reconnection_thresholds(f, 0.02, 1.0);
    double best = a;
    for (const auto& e : rc.events)
        if (std::abs(e.a_threshold - a) < 0.02) best = e.a_threshold + (a < e.a_threshold ? -0.02 : 0.02);
    return best;
}

}  // namespace

std::string csv_to_json(const std::string& csv) {
    std::istringstream is(csv);
    std::string line;
    std::vector<std::string> header;
    auto split = [](const std::string& s) {
        std::vector<std::string> v;
        std::stringstream ss(s);
        std::string cell;
        while (std::getline(ss, cell, ',')) v.push_back(cell);
        return v;
    };
    nlohmann::json arr = nlohmann::json::array();
    if (std::getline(is, line)) header = split(line);
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        auto cells = split(line);
        nlohmann::json o = nlohmann::json::object();
        for (std::size_t i = 0; i < header.size() && i < cells.size(); ++i) {
            char* end = nullptr;
            double d = std::strtod(cells[i].c_str(), &end);
            bool numeric = !cells[i].empty() && end && *end == '\0';
            if (numeric && cells[i].find_first_of(".eEna") == std::string::npos)
                o[header[i]] = std::stoll(cells[i]);
            else if (numeric)
                o[header[i]] = d;
            else
                o[header[i]] = cells[i];
        }
        arr.push_back(o);
    }
    return arr.dump(1) + "\n";
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"knotfield: polynomial fields with knotted nodal sets"};
    app.require_subcommand(1);
    std::string name, file, out_flag, format = "csv", a_str = "1/4", seed = "grid", expect;
    int power = 1, phi_steps = 2048, workers = 1, resolution = 64;
    double tol = 1e-12, a_min = 0, a_max = 0, box = 2.0;
    std::optional<double> levelset;
    bool resultant = false;

    auto common = [&](CLI::App* c, bool named) {
        if (named) c->add_option("name", name, "catalog entry (see `catalog`)");
        c->add_option("--file", file, "trajectory JSON file instead of a catalog name");
        c->add_option("--out", out_flag, "output directory (default $KNOTFIELD_OUT or .)");
        c->add_option("--format", format, "csv | json | mesh")->check(CLI::IsMember({"csv", "json", "mesh"}));
        c->add_option("--power", power, "repeat the braid word n times");
        c->add_option("--workers", workers, "threads for scans and per-seed solves");
    };
    auto* catalog = app.add_subcommand("catalog", "list catalog entries or show one");
    catalog->add_option("name", name);
    auto* build = app.add_subcommand("build", "write the trigonometric, semiholomorphic and Cartesian polynomials");
    common(build, true);
    build->add_option("--a", a_str, "scale a as p/q or decimal");
    auto* trace = app.add_subcommand("trace", "trace the nodal set on S^3 and verify its braid word");
    common(trace, true);
    trace->add_option("--a", a_str);
    trace->add_option("--phi-steps", phi_steps);
    trace->add_option("--tol", tol);
    trace->add_option("--seed", seed)->check(CLI::IsMember({"grid", "braid"}));
    trace->add_option("--expect", expect, "expected braid word, e.g. \"s1^-1 s2 s1^3 s2\"");
    auto* sweep = app.add_subcommand("sweep", "reconnection thresholds and per-interval topology");
    common(sweep, true);
    sweep->add_option("a_min", a_min)->required();
    sweep->add_option("a_max", a_max)->required();
    sweep->add_option("--phi-steps", phi_steps);
    auto* critical = app.add_subcommand("critical", "critical points of modulus and argument");
    common(critical, true);
    critical->add_option("--a", a_str);
    critical->add_option("--levelset", levelset, "argument value of a level-set mesh to export");
    critical->add_option("--resolution", resolution, "level-set grid cells per axis");
    critical->add_option("--box", box, "half-width of the level-set box");
    critical->add_flag("--resultant", resultant, "double roots of f in u via the resultant");

    std::vector<std::string> argv_s{"knotfield"};
    argv_s.insert(argv_s.end(), args.begin(), args.end());
    std::vector<char*> argv;
    for (auto& s : argv_s) argv.push_back(s.data());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (catalog->parsed()) {
            if (name.empty()) {
                for (const auto& n : catalog_names()) out << n << '\n';
                return kExitOk;
            }
            auto ts = catalog_trajectory(name);
            auto w = extract_braid_word(ts);
            out << "name: " << ts.name << '\n'
                << "strands: " << ts.total_strands() << '\n'
                << "word: " << to_string(w) << '\n'
                << "alexander: " << to_string(alexander_polynomial(w).poly) << '\n'
                << "components: " << closure_components(w) << '\n'
                << "exact: " << (has_exact_polynomial(ts) ? "true" : "false") << '\n';
            for (const auto& c : find_crossings(ts)) out << "crossing: t=" << fmt(c.time) << " generator=" << c.generator_index << " sign=" << c.sign << '\n';
            out << trajectory_to_json(ts);
            return kExitOk;
        }

        Input in = load_input(name, file, power);
        Q aq = parse_rational(a_str);
        double a = aq.get_d();
        if (!(a > 0)) throw Error("a must be positive");
        auto dir = out_dir(out_flag);
        std::string tfmt = format == "mesh" ? "csv" : format;

        if (build->parsed()) {
            if (format == "mesh") throw Error("build writes csv or json");
            out << "word: " << to_string(in.word) << '\n' << "u_degree: " << in.f.degree << '\n';
            if (in.exact) {
                if (power == 1) write_file(dir / ("trig." + format), export_trig(build_braid_polynomial(in.ts), format), out);
                write_file(dir / ("semiholo." + format), export_semiholo(*in.exact, format), out);
                auto cp = to_cartesian(*in.exact, aq);
                out << "cartesian_scale: " << cp.scale.get_str() << '\n'
                    << "cartesian_D: " << cp.D << '\n'
                    << "cartesian_terms: " << cp.coeff.size() << '\n'
                    << "x^10: " << to_string(cp.get(10, 0, 0)) << '\n';
                write_file(dir / ("cartesian." + format), export_cartesian(cp, format), out);
            } else {
                out << "exact: false (irrational phases; numeric coefficients only)\n";
                write_file(dir / ("semiholo." + format), export_semiholo(in.f, format), out);
            }
            return kExitOk;
        }

        if (trace->parsed()) {
            TraceConfig cfg;
            cfg.a = a;
            cfg.phi_steps = phi_steps;
            cfg.tol = tol;
            cfg.seed = seed == "braid" ? SeedStrategy::Braid : SeedStrategy::Grid;
            cfg.trajectory = in.ts;
            TraceResult r;
            try {
                r = trace_nodal_set(in.f, cfg);
            } catch (const ReconnectionSuspected& e) {
                err << "error: " << e.what() << '\n' << "suggested a: " << fmt(suggest_a(in.f, a)) << '\n';
                return kExitNumerical;
            }
            BraidWord expected = expect.empty() ? in.word : parse_braid_word(expect, in.ts.total_strands());
            auto rep = verify_knot(r.curves, expected);
            double sep = min_component_distance(r);
            std::ostringstream os;
            os << to_string(rep) << "max_residual: " << r.max_residual << '\n'
               << "closure_error: " << r.closure_error << '\n'
               << "fold_bridges: " << r.fold_bridges << '\n'
               << "min_component_distance: " << (r.curves.size() > 1 ? fmt(sep) : "none") << '\n';
            out << os.str();
            if (r.curves.size() > 1 && sep < kNearApproach)
                err << "warning: components approach within " << fmt(sep) << " (near a reconnection)\n";
            if (format == "json")
                write_table(dir, "curves", export_curves_csv(r.curves), "json", out);
            else
                write_file(dir / "curves.csv", export_curves_csv(r.curves), out);
            write_file(dir / "report.txt", os.str(), out);
            return rep.pass ? kExitOk : kExitVerification;
        }

        if (sweep->parsed()) {
            if (!(a_min > 0 && a_min < a_max && a_max <= 1)) throw Error("need 0 < a_min < a_max <= 1");
            auto rc = reconnection_thresholds(in.f, a_min, a_max, workers);
            out << "thresholds: " << rc.events.size() << '\n';
            for (const auto& e : rc.events) out << "threshold: a=" << fmt(e.a_threshold) << " points=" << e.points.size() << '\n';
            write_table(dir, "thresholds", export_reconnection_csv(rc), tfmt, out);
            std::vector<double> cuts{a_min};
            for (auto it = rc.events.rbegin(); it != rc.events.rend(); ++it) cuts.push_back(it->a_threshold);
            cuts.push_back(a_max);
            std::ostringstream tab;
            tab << "a_lo,a_hi,a_mid,components,word,status\n";
            bool numerical = false;
            for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
                double mid = 0.5 * (cuts[i] + cuts[i + 1]);
                TraceConfig cfg;
                cfg.a = mid;
                cfg.phi_steps = phi_steps;
                std::string line;
                try {
                    auto r = trace_nodal_set(in.f, cfg);
                    auto w = braid_word_from_curve(r.curves);
                    tab << fmt(cuts[i]) << ',' << fmt(cuts[i + 1]) << ',' << fmt(mid) << ',' << r.curves.size() << ','
                        << to_string(w) << ",ok\n";
                    out << "interval: [" << fmt(cuts[i]) << ", " << fmt(cuts[i + 1]) << "] components=" << r.curves.size()
                        << " word=" << to_string(w) << '\n';
                } catch (const NumericalError& e) {
                    numerical = true;
                    tab << fmt(cuts[i]) << ',' << fmt(cuts[i + 1]) << ',' << fmt(mid) << ",0,,failed\n";
                    out << "interval: [" << fmt(cuts[i]) << ", " << fmt(cuts[i + 1]) << "] trace failed: " << e.what() << '\n';
                }
            }
            write_table(dir, "intervals", tab.str(), tfmt, out);
            return numerical ? kExitNumerical : kExitOk;
        }

        if (critical->parsed()) {
            auto p = semiholo_to_trig(in.f);
            auto phase = phase_critical_points(p, a);
            auto mod = modulus_critical_points(p, a);
            out << "phase_critical_points: " << phase.size() << '\n' << "modulus_critical_points: " << mod.size() << '\n';
            for (const auto& c : phase)
                out << "phase: t=" << fmt(c.t) << " arg=" << fmt(c.value) << (c.is_max ? " max" : " min")
                    << (c.degenerate ? " degenerate" : "") << '\n';
            write_table(dir, "phase_critical", export_critical_csv(phase), tfmt, out);
            write_table(dir, "modulus_critical", export_critical_csv(mod), tfmt, out);
            int failures = 0;
            if (in.exact) {
                auto cp = to_cartesian(*in.exact, aq);
                auto sp = sphere_phase_critical_points(cp, phase);
                failures += sp.failures;
                out << "sphere_critical_points: " << sp.points.size() << '\n' << "seed_failures: " << sp.failures << '\n';
                write_table(dir, "sphere_critical", export_critical_csv(sp.points), tfmt, out);
                write_table(dir, "saddle_locus", export_saddle_locus_csv(sp.saddle_locus), tfmt, out);
                if (levelset) {
                    double th = std::fmod(*levelset, 2 * M_PI);
                    if (th < 0) th += 2 * M_PI;
                    Box b;
                    b.lo = {-box, -box, -box};
                    b.hi = {box, box, box};
                    auto mesh = argument_level_set(cp, th, b, resolution);
                    out << "levelset_vertices: " << mesh.vertices.size() << '\n' << "levelset_faces: " << mesh.faces.size() << '\n';
                    write_file(dir / "levelset.obj", export_mesh_obj(mesh), out);
                }
            } else {
                out << "sphere_critical_points: skipped (no exact Cartesian form)\n";
                if (levelset) err << "warning: --levelset needs an exact polynomial\n";
            }
            if (resultant) {
                auto dr = resultant_double_roots(in.f, a, 256, 1024, workers);
                out << "double_roots: " << dr.size() << '\n';
                for (const auto& d : dr) out << "double_root: r=" << fmt(d.r) << " t=" << fmt(d.t) << '\n';
                write_table(dir, "double_roots", export_double_roots_csv(dr), tfmt, out);
            }
            return failures ? kExitNumerical : kExitOk;
        }
    } catch (const NumericalError& e) {
        err << "numerical error: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    }
    return kExitUsage;
}

}  // namespace knotfield
