#include "epsweep/cli.hpp"

#include "epsweep/analyze.hpp"
#include "epsweep/errors.hpp"
#include "epsweep/format.hpp"
#include "epsweep/integrate.hpp"
#include "epsweep/network_io.hpp"
#include "epsweep/reduce.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

namespace epsweep::cli {

namespace fs = std::filesystem;

const char* to_string(Subcommand s) {
    switch (s) {
        case Subcommand::Validate: return "validate";
        case Subcommand::Derive: return "derive";
        case Subcommand::Simulate: return "simulate";
        case Subcommand::Analyze: return "analyze";
        case Subcommand::Sweep: return "sweep";
        case Subcommand::Direct: return "direct";
    }
    return "?";
}

namespace {

constexpr int kStepsPerPeriod = 2160;

std::optional<Subcommand> parse_subcommand(const std::string& name) {
    for (auto s : {Subcommand::Validate, Subcommand::Derive, Subcommand::Simulate,
                   Subcommand::Analyze, Subcommand::Sweep, Subcommand::Direct})
        if (name == to_string(s)) return s;
    return std::nullopt;
}

std::string read_bytes(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

// FNV-1a, 64 bit
std::string digest(const std::string& bytes) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

void check_config(const RunConfig& c) {
    if (c.dt && !(*c.dt > 0.0)) throw InputError("--dt must be positive");
    if (c.periods && *c.periods < 1) throw InputError("--periods must be >= 1");
    if (!(c.tol_converge > 0.0) || !(c.tol_distinct > 0.0))
        throw InputError("tolerances must be positive");
    if (!(c.epsilon >= 0.0)) throw InputError("--epsilon must be >= 0");
    if (c.trials < 1) throw InputError("--trials must be >= 1");
    if (c.decimate < 1) throw InputError("--decimate must be >= 1");
    std::error_code ec;
    fs::create_directories(c.output_dir, ec);
    const fs::path probe = c.output_dir / ".epsweep_write_probe";
    std::ofstream test(probe);
    if (!test) throw InputError("output directory " + c.output_dir.string() + " is not writable");
    test.close();
    fs::remove(probe, ec);
}

class Writer {
public:
    explicit Writer(fs::path dir) : dir_(std::move(dir)) {}

    void json(const std::string& name, const Json& doc) {
        std::ofstream os(dir_ / name, std::ios::binary);
        write_json(os, doc);
        files_.push_back(name);
    }
    std::ofstream table(const std::string& name) {
        files_.push_back(name);
        return std::ofstream(dir_ / name, std::ios::binary);
    }
    const std::vector<std::string>& files() const { return files_; }

private:
    fs::path dir_;
    std::vector<std::string> files_;
};

Json config_to_json(const RunConfig& c) {
    Json j{{"subcommand", to_string(c.subcommand)},
           {"input", c.input_path.string()},
           {"tol_converge", c.tol_converge},
           {"tol_distinct", c.tol_distinct},
           {"seed", c.seed},
           {"epsilon", c.epsilon},
           {"trials", c.trials},
           {"decimate", c.decimate}};
    j["dt"] = c.dt ? Json(*c.dt) : Json(nullptr);
    j["periods"] = c.periods ? Json(*c.periods) : Json(nullptr);
    return j;
}

RunConfig config_from_json(const Json& j) {
    RunConfig c;
    const auto sub = parse_subcommand(j.at("subcommand").get<std::string>());
    if (!sub) throw InputError("manifest: unknown subcommand");
    c.subcommand = *sub;
    c.input_path = j.at("input").get<std::string>();
    if (!j.at("dt").is_null()) c.dt = j.at("dt").get<double>();
    if (!j.at("periods").is_null()) c.periods = j.at("periods").get<int>();
    c.tol_converge = j.at("tol_converge").get<double>();
    c.tol_distinct = j.at("tol_distinct").get<double>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.epsilon = j.at("epsilon").get<double>();
    c.trials = j.at("trials").get<int>();
    c.decimate = j.at("decimate").get<int>();
    return c;
}

void write_row(std::ostream& os, const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) os << (i ? "," : "") << cells[i];
    os << '\n';
}

void append(std::vector<std::string>& cells, const Vector& v) {
    for (Eigen::Index i = 0; i < v.size(); ++i) cells.push_back(format_double(v(i)));
}

void header(std::vector<std::string>& cells, const char* prefix, Eigen::Index n) {
    for (Eigen::Index i = 0; i < n; ++i) cells.push_back(prefix + std::to_string(i + 1));
}

double step_for(const RunConfig& c, double period) {
    return c.dt ? *c.dt : period / kStepsPerPeriod;
}

CensusOptions census_options(const RunConfig& c, double period) {
    CensusOptions o;
    o.dt = step_for(c, period);
    o.max_periods = c.periods.value_or(50);
    o.convergence_tol = c.tol_converge;
    o.distinctness_tol = c.tol_distinct;
    return o;
}

Json validation_json(const ValidationReport& rep) {
    Json v = Json::array();
    for (const auto& x : rep.violations)
        v.push_back({{"category", x.category == ValidationReport::Category::Input ? "input" : "precondition"},
                     {"message", x.message}});
    return Json{{"ok", rep.ok()},
                {"summary", rep.summary()},
                {"rank_DtR", rep.rank_loading},
                {"q", rep.q},
                {"connected", rep.connected},
                {"violations", v}};
}

// Validates and throws the appropriate error category on violations.
void require_valid(const ValidationReport& rep) {
    if (rep.ok()) return;
    std::string msg = "network is invalid:";
    for (const auto& v : rep.violations) msg += "\n  - " + v.message;
    if (rep.has(ValidationReport::Category::Input)) throw InputError(msg);
    throw PreconditionError(msg);
}

Json derived_json(const DerivedSystem& d) {
    Json normals = Json::array();
    for (int i = 0; i < d.m; ++i) normals.push_back(vector_to_json(d.normal(i)));
    return Json{{"m", d.m},
                {"n", d.n},
                {"q", d.q},
                {"dim_U", d.dim_U},
                {"dim_V", d.dim_V},
                {"D", matrix_to_json(d.D)},
                {"R", matrix_to_json(d.R)},
                {"stiffness", vector_to_json(d.stiffness)},
                {"c_minus", vector_to_json(d.c_minus)},
                {"c_plus", vector_to_json(d.c_plus)},
                {"M", matrix_to_json(d.M)},
                {"U_basis", matrix_to_json(d.U_basis)},
                {"V_basis", matrix_to_json(d.V_basis)},
                {"D_perp", matrix_to_json(d.D_perp)},
                {"W", matrix_to_json(d.W)},
                {"L_bar", matrix_to_json(d.L_bar)},
                {"normals", normals},
                {"reduced_rows", matrix_to_json(d.reduced_rows)},
                {"gram", matrix_to_json(d.gram)},
                {"drift", matrix_to_json(d.drift())}};
}

Json census_json(const AttractorReport& rep) {
    Json runs = Json::array();
    for (const auto& r : rep.runs)
        runs.push_back({{"v0", vector_to_json(r.v0)},
                        {"representative", vector_to_json(r.representative)},
                        {"periods", r.periods},
                        {"converged", r.converged},
                        {"path_length", r.path_length}});
    return Json{{"classification", to_string(rep.classification)},
                {"orbit_spread", rep.orbit_spread},
                {"convergence_tol", rep.convergence_tol},
                {"distinctness_tol", rep.distinctness_tol},
                {"runs", runs}};
}

void census_table(std::ostream& os, const AttractorReport& rep, Eigen::Index dim) {
    std::vector<std::string> h{"run"};
    header(h, "v0_", dim);
    header(h, "orbit_", dim);
    for (const char* c : {"periods", "converged", "path_length"}) h.emplace_back(c);
    write_row(os, h);
    for (std::size_t i = 0; i < rep.runs.size(); ++i) {
        const auto& r = rep.runs[i];
        std::vector<std::string> row{std::to_string(i + 1)};
        append(row, r.v0);
        append(row, r.representative);
        row.push_back(std::to_string(r.periods));
        row.push_back(r.converged ? "1" : "0");
        row.push_back(format_double(r.path_length));
        write_row(os, row);
    }
}

const char* side_name(qp::Side s) { return s == qp::Side::Upper ? "upper" : "lower"; }

void cmd_validate(const RunConfig& c, Writer& w, std::ostream& out) {
    const auto net = load_network(c.input_path);
    const auto rep = validate(net);
    w.json("validation.json", validation_json(rep));
    out << rep.summary() << '\n';
    for (const auto& v : rep.violations) out << "violation: " << v.message << '\n';
    require_valid(rep);
}

void cmd_derive(const RunConfig& c, Writer& w, std::ostream& out) {
    const auto net = load_network(c.input_path);
    require_valid(validate(net));
    const auto d = derive(net);
    w.json("derived.json", derived_json(d));
    out << "dim U = " << d.dim_U << ", dim V = " << d.dim_V << '\n';
    for (int i = 0; i < d.m; ++i) {
        out << "n_" << i + 1 << " =";
        for (Eigen::Index j = 0; j < d.m; ++j) out << ' ' << format_double(d.normals(j, i));
        out << '\n';
    }
}

void cmd_simulate(const RunConfig& c, Writer& w, std::ostream& out) {
    const auto net = load_network(c.input_path);
    require_valid(validate(net));
    const auto d = derive(net);
    const auto poly = assemble_polytope(net, d);
    const double period = poly.period();
    const double t1 = period * c.periods.value_or(3);
    const Vector v0 = initial_point(poly, 0.0);
    IntegrateOptions opt;
    opt.decimate = c.decimate;
    const auto traj = integrate(poly, v0, 0.0, t1, step_for(c, period), opt);

    auto os = w.table("trajectory.csv");
    std::vector<std::string> h{"t"};
    header(h, "v", poly.dim());
    header(h, "y", d.m);
    header(h, "s", d.m);
    write_row(os, h);
    for (std::size_t k = 0; k < traj.size(); ++k) {
        std::vector<std::string> row{format_double(traj.times[k])};
        append(row, traj.v[k]);
        append(row, traj.y[k]);
        append(row, traj.stresses[k]);
        write_row(os, row);
    }
    out << "wrote " << traj.size() << " samples over [0, " << format_double(t1) << "]\n";
}

void cmd_analyze(const RunConfig& c, Writer& w, std::ostream& out) {
    const auto net = load_network(c.input_path);
    const auto validation = validate(net);
    require_valid(validation);
    const auto d = derive(net);
    const auto poly = assemble_polytope(net, d);
    const double period = poly.period();

    Json doc{{"validation", validation_json(validation)}};

    Json safe = Json::array();
    for (const auto& s : safe_load_check(poly)) {
        if (!s.feasible)
            throw PreconditionError("safe load condition violated at t = " + format_double(s.t));
        safe.push_back({{"t", s.t}, {"feasible", s.feasible}});
    }
    doc["safe_load"] = safe;

    if (d.q >= 1) {
        const auto sk = shakedown_check(d, net.loading_signal());
        Json j{{"lhs_sq", sk.lhs_sq},
               {"max_drift_sq", sk.max_drift_sq},
               {"holds", sk.holds},
               {"witness", {sk.witness.first, sk.witness.second}}};
        if (sk.drift_norm_sq) j["drift_norm_sq"] = *sk.drift_norm_sq;
        if (sk.threshold_sq) j["threshold_sq"] = *sk.threshold_sq;
        if (sk.max_amplitude_sq) j["max_amplitude_sq"] = *sk.max_amplitude_sq;
        doc["shakedown"] = j;
        out << "shakedown: " << (sk.holds ? "no constant solutions" : "inconclusive") << '\n';
    }

    if (d.q == 1) {
        Json pairs = Json::array();
        for (const auto& p : detect_sweeping_pair(poly.at(0.0), d.L_bar.col(0)))
            pairs.push_back({{"first", {{"constraint", p.first.index + 1}, {"side", side_name(p.first.side)}}},
                             {"second", {{"constraint", p.second.index + 1}, {"side", side_name(p.second.side)}}}});
        out << "sweeping pairs: " << pairs.size() << '\n';
        doc["sweeping_pairs"] = pairs;
    } else {
        doc["sweeping_pairs"] = "unsupported for q != 1";
    }

    const auto starts = census_grid(poly, 0.0, 16);
    const auto census = attractor_census(poly, starts, period, census_options(c, period));
    doc["census"] = census_json(census);
    w.json("analysis.json", doc);
    auto os = w.table("analysis_summary.csv");
    census_table(os, census, poly.dim());
    out << "attractor: " << to_string(census.classification)
        << " (spread " << format_double(census.orbit_spread) << ")\n";
}

void cmd_sweep(const RunConfig& c, Writer& w, std::ostream& out) {
    const auto net = load_network(c.input_path);
    require_valid(validate(net));
    SweepOptions o;
    o.epsilon = c.epsilon;
    o.trials = c.trials;
    o.seed = c.seed;
    const double period = assemble_polytope(net, derive(net)).period();
    o.census = census_options(c, period);
    const auto rep = stability_sweep(net, o);

    Json trials = Json::array();
    auto os = w.table("sweep_summary.csv");
    write_row(os, {"trial", "facet_pair_found", "shakedown_ok", "classification", "orbit_spread",
                   "persistent", "error"});
    for (const auto& t : rep.trials) {
        Json springs = Json::array();
        for (const auto& s : t.network.ordered_springs())
            springs.push_back({{"id", s.id}, {"a", s.stiffness}, {"c_minus", s.c_minus}, {"c_plus", s.c_plus}});
        trials.push_back({{"trial", t.index},
                          {"springs", springs},
                          {"facet_pair_found", t.facet_pair_found},
                          {"shakedown_ok", t.shakedown_ok},
                          {"classification", to_string(t.classification)},
                          {"orbit_spread", t.orbit_spread},
                          {"persistent", t.persistent()},
                          {"error", t.error}});
        write_row(os, {std::to_string(t.index), t.facet_pair_found ? "1" : "0",
                       t.shakedown_ok ? "1" : "0", to_string(t.classification),
                       format_double(t.orbit_spread), t.persistent() ? "1" : "0",
                       t.error.empty() ? "" : "\"" + t.error + "\""});
    }
    w.json("sweep.json", Json{{"epsilon", rep.epsilon},
                              {"seed", rep.seed},
                              {"persistence_fraction", rep.persistence_fraction},
                              {"trials", trials}});
    out << "persistence fraction: " << format_double(rep.persistence_fraction) << '\n';
}

void cmd_direct(const RunConfig& c, Writer& w, std::ostream& out) {
    auto problem = load_direct_problem(c.input_path);
    const auto poly = translated_polytope(problem.shape, problem.translation);
    const double period = poly.period();
    if (problem.initial_points.empty()) problem.initial_points = census_grid(poly, 0.0, 16);

    IntegrateOptions opt;
    opt.decimate = c.decimate;
    const double t1 = period * c.periods.value_or(3);
    auto os = w.table("direct_trajectories.csv");
    std::vector<std::string> h{"run", "t"};
    header(h, "v", poly.dim());
    write_row(os, h);
    for (std::size_t r = 0; r < problem.initial_points.size(); ++r) {
        const Vector v0 = initial_point(poly, 0.0, problem.initial_points[r]);
        const auto traj = integrate(poly, v0, 0.0, t1, step_for(c, period), opt);
        for (std::size_t k = 0; k < traj.size(); ++k) {
            std::vector<std::string> row{std::to_string(r + 1), format_double(traj.times[k])};
            append(row, traj.v[k]);
            write_row(os, row);
        }
    }

    const auto census =
        attractor_census(poly, problem.initial_points, period, census_options(c, period));
    w.json("direct_report.json", census_json(census));
    out << "attractor: " << to_string(census.classification)
        << " (spread " << format_double(census.orbit_spread) << ")\n";
}

}  // namespace

int run(const RunConfig& config, std::ostream& out, std::ostream& err) {
    try {
        check_config(config);
        Writer w(config.output_dir);
        switch (config.subcommand) {
            case Subcommand::Validate: cmd_validate(config, w, out); break;
            case Subcommand::Derive: cmd_derive(config, w, out); break;
            case Subcommand::Simulate: cmd_simulate(config, w, out); break;
            case Subcommand::Analyze: cmd_analyze(config, w, out); break;
            case Subcommand::Sweep: cmd_sweep(config, w, out); break;
            case Subcommand::Direct: cmd_direct(config, w, out); break;
        }
        w.json("manifest.json", Json{{"tool", "epsweep"},
                                     {"version", kToolVersion},
                                     {"config", config_to_json(config)},
                                     {"input_digest", digest(read_bytes(config.input_path))},
                                     {"outputs", w.files()}});
        return 0;
    } catch (const InputError& e) {
        err << "input error: " << e.what() << '\n';
        return 1;
    } catch (const PreconditionError& e) {
        err << "precondition failed: " << e.what() << '\n';
        return 2;
    } catch (const SolverError& e) {
        err << "solver failure: " << e.what() << '\n';
        return 3;
    } catch (const Json::exception& e) {
        err << "input error: " << e.what() << '\n';
        return 1;
    }
}

int replay(const fs::path& manifest, std::ostream& out, std::ostream& err,
           std::optional<fs::path> output_dir) {
    RunConfig config;
    try {
        const Json doc = read_json_file(manifest);
        config = config_from_json(doc.at("config"));
        const std::string recorded = doc.at("input_digest").get<std::string>();
        if (digest(read_bytes(config.input_path)) != recorded)
            err << "warning: input file changed since the manifest was written\n";
    } catch (const InputError& e) {
        err << "input error: " << e.what() << '\n';
        return 1;
    } catch (const Json::exception& e) {
        err << "input error: manifest: " << e.what() << '\n';
        return 1;
    }
    config.output_dir = output_dir ? *output_dir : manifest.parent_path();
    return run(config, out, err);
}

int main(int argc, char** argv) {
    CLI::App app{"Sweeping-process analysis of elastoplastic spring networks"};
    app.set_version_flag("--version", kToolVersion);
    app.require_subcommand(1);

    RunConfig config;
    std::string out_dir = ".";
    double dt = 0.0;
    int periods = 0;

    const auto add_common = [&](CLI::App* sub) {
        sub->add_option("input", config.input_path, "input document")->required();
        sub->add_option("--out", out_dir, "output directory");
        sub->add_option("--dt", dt, "time step (default period/2160)");
        sub->add_option("--periods", periods,
                        "periods to integrate (simulate, direct) or orbit-search cap (analyze, sweep)");
        sub->add_option("--tol-converge", config.tol_converge, "orbit convergence tolerance");
        sub->add_option("--tol-distinct", config.tol_distinct, "orbit distinctness tolerance");
        sub->add_option("--seed", config.seed, "master seed for sweeps");
        sub->add_option("--epsilon", config.epsilon, "relative perturbation size for sweeps");
        sub->add_option("--trials", config.trials, "number of sweep trials");
        sub->add_option("--decimate", config.decimate, "keep every j-th trajectory step");
    };
    std::vector<std::pair<CLI::App*, Subcommand>> subs;
    for (auto [name, kind, help] :
         {std::tuple{"validate", Subcommand::Validate, "check a network description"},
          std::tuple{"derive", Subcommand::Derive, "emit the derived sweeping-process quantities"},
          std::tuple{"simulate", Subcommand::Simulate, "integrate the stress evolution"},
          std::tuple{"analyze", Subcommand::Analyze, "shakedown, facet geometry and attractor census"},
          std::tuple{"sweep", Subcommand::Sweep, "structural-stability parameter sweep"},
          std::tuple{"direct", Subcommand::Direct, "integrate a raw translating polyhedron"}}) {
        auto* sub = app.add_subcommand(name, help);
        add_common(sub);
        subs.emplace_back(sub, kind);
    }
    std::string manifest;
    auto* rep = app.add_subcommand("replay", "re-run the configuration recorded in a manifest");
    rep->add_option("manifest", manifest, "manifest.json")->required();
    rep->add_option("--out", out_dir, "output directory (default: the manifest's directory)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    if (rep->parsed()) {
        std::optional<fs::path> dir;
        if (rep->count("--out")) dir = out_dir;
        return replay(manifest, std::cout, std::cerr, dir);
    }
    for (auto& [sub, kind] : subs) {
        if (!sub->parsed()) continue;
        config.subcommand = kind;
        if (sub->count("--dt")) config.dt = dt;
        if (sub->count("--periods")) config.periods = periods;
    }
    config.output_dir = out_dir;
    return run(config, std::cout, std::cerr);
}

}  // namespace epsweep::cli
