#include "nhssh/cli.hpp"

#include "nhssh/errors.hpp"
#include "nhssh/kernels.hpp"
#include "nhssh/netlist.hpp"
#include "nhssh/spectral.hpp"
#include "nhssh/topology.hpp"
#include "nhssh/transient.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <map>
#include <ostream>

#ifndef NHSSH_SOURCE_PRESET_DIR
#define NHSSH_SOURCE_PRESET_DIR "presets"
#endif

namespace nhssh {

namespace fs = std::filesystem;

namespace {

std::string num(double x) { return fmt::format("{}", x); }

void write_text(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorKind::Io, fmt::format("cannot write {}", path.string()));
    out << content;
    if (!out) throw Error(ErrorKind::Io, fmt::format("write failed for {}", path.string()));
}

void write_json(const fs::path& path, const Json& j) { write_text(path, j.dump(2) + "\n"); }

Json complex_json(Complex z) { return Json::array({z.real(), z.imag()}); }

// A plot-ready curve: CSV, or {"columns": [...], "rows": [[...]]} when json is asked for.
struct Curve {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;

    void write(const fs::path& dir, const std::string& stem, const std::string& format) const {
        if (format == "json") {
            Json j;
            j["columns"] = columns;
            j["rows"] = rows;
            write_text(dir / (stem + ".json"), j.dump() + "\n");
            return;
        }
        std::string text = fmt::format("{}\n", fmt::join(columns, ","));
        for (const auto& r : rows) {
            for (std::size_t i = 0; i < r.size(); ++i) {
                text += num(r[i]);
                text += (i + 1 < r.size()) ? ',' : '\n';
            }
        }
        write_text(dir / (stem + ".csv"), text);
    }
};

BandSet reference_band(const CircuitParams& p, int n_k = 256) { return band_trace(p, n_k, Execution::Parallel); }

// ---- bands --------------------------------------------------------------

void cmd_bands(const ExperimentConfig& c, const fs::path& dir) {
    const auto band = band_trace(c.circuit, c.bands.n_k, Execution::Parallel);
    const auto lambda = lambda_spectrum(c.circuit, band);
    Curve omega{{"k", "branch", "re_omega", "im_omega"}, {}};
    Curve lam{{"k", "branch", "re_lambda", "im_lambda"}, {}};
    Json branches = Json::array();
    for (int b = 0; b < kBranchCount; ++b) {
        for (std::size_t i = 0; i < band.k_grid.size(); ++i) {
            const Complex w = band.branches[b][i];
            const Complex l = lambda[b][i];
            omega.rows.push_back({band.k_grid[i], double(b), w.real(), w.imag()});
            lam.rows.push_back({band.k_grid[i], double(b), l.real(), l.imag()});
        }
        Json jb;
        jb["branch"] = b;
        jb["closed"] = band.closed(b);
        jb["end_permutation"] = band.end_permutation[b];
        jb["continuity_residual"] = band.continuity_residual[b];
        jb["bulk_gap"] = bulk_gap(c.circuit, band.branches[b]).gap();
        branches.push_back(jb);
    }
    omega.write(dir, "bands", c.output.format);
    lam.write(dir, "lambda", c.output.format);

    Json rep;
    rep["circuit"] = to_json(c.circuit);
    rep["n_k"] = c.bands.n_k;
    rep["k_points"] = band.k_grid.size();
    Json poles = Json::array();
    for (double rc : {c.circuit.r1 * c.circuit.c1, c.circuit.r2 * c.circuit.c2}) {
        if (rc > 0.0) poles.push_back(complex_json(Complex(0.0, 1.0 / rc)));
    }
    rep["pole_roots"] = poles;
    rep["mirror_ties"] = band.mirror_ties.size();
    rep["branches"] = branches;
    write_json(dir / "bands_report.json", rep);
}

// ---- winding ------------------------------------------------------------

Json winding_json(const WindingReport& rep, bool oracles) {
    Json branches = Json::array();
    std::vector<int> multiset;
    bool complete = true;
    for (int b = 0; b < kBranchCount; ++b) {
        const auto& bw = rep.branches[b];
        Json jb;
        jb["branch"] = b;
        if (bw.winding) {
            jb["mu"] = bw.winding->mu;
            jb["raw_integral"] = bw.winding->raw_integral;
            jb["residual"] = bw.winding->residual;
            jb["pole_crossings"] = bw.winding->pole_crossings;
            multiset.push_back(bw.winding->mu);
        } else {
            jb["mu"] = nullptr;
            jb["error"] = bw.error;
            complete = false;
        }
        if (oracles) {
            jb["crossing_count"] = bw.crossings;
            jb["quadrature"] = bw.quadrature;
        }
        branches.push_back(jb);
    }
    std::sort(multiset.begin(), multiset.end());
    Json j;
    j["n_k"] = rep.n_k;
    j["branches"] = branches;
    j["multiset"] = complete ? Json(multiset) : Json(nullptr);
    return j;
}

void cmd_winding(const ExperimentConfig& c, const fs::path& dir) {
    const auto rep = winding_report(c.circuit, c.winding.n_k, c.winding.n_k_max, c.winding.oracles);
    Json j = winding_json(rep, c.winding.oracles);
    j["circuit"] = to_json(c.circuit);
    j["n_k_requested"] = c.winding.n_k;
    write_json(dir / "winding.json", j);

    Curve curve{{"k", "branch", "re_yx", "re_yy"}, {}};
    for (int b = 0; b < kBranchCount; ++b) {
        const auto rc = resolved_projection(c.circuit, rep.band, b);
        for (std::size_t i = 0; i < rc.points.size(); ++i) curve.rows.push_back({rc.k[i], double(b), rc.points[i].x, rc.points[i].y});
    }
    curve.write(dir, "projection", c.output.format);
}

// ---- skin ----------------------------------------------------------------

void cmd_skin(const ExperimentConfig& c, const fs::path& dir) {
    const auto band = reference_band(c.circuit);
    Json branches = Json::array();
    Curve traj{{"branch", "k", "re_det", "im_det"}, {}};
    for (int b : c.skin.branches) {
        const Complex omega = branch_frequency_at(c.circuit, band, b, c.skin.k);
        const auto scan = skin_effect_present(c.circuit, omega, c.skin.grid, c.skin.n_k);
        Json jb;
        jb["branch"] = b;
        jb["omega"] = complex_json(omega);
        jb["present"] = scan.present;
        jb["witness"] = scan.witness ? complex_json(*scan.witness) : Json(nullptr);
        jb["witness_winding"] = scan.witness_w ? Json(*scan.witness_w) : Json(nullptr);
        jb["box_min"] = complex_json(scan.box_min);
        jb["box_max"] = complex_json(scan.box_max);
        jb["scanned"] = scan.scanned;
        jb["skipped"] = scan.skipped;
        jb["center_of_mass_shift"] = center_of_mass_shift(c.circuit, omega, c.skin.com_cells);
        // Trajectory about the witness, or about the box centre when there is none.
        const Complex e0 = scan.witness.value_or(0.5 * (scan.box_min + scan.box_max));
        jb["trajectory_e0"] = complex_json(e0);
        try {
            const auto sw = skin_winding(c.circuit, omega, e0, c.skin.n_k);
            for (std::size_t i = 0; i < sw.trajectory.size(); ++i) {
                traj.rows.push_back({double(b), kTwoPi * double(i) / c.skin.n_k, sw.trajectory[i].real(),
                                     sw.trajectory[i].imag()});
            }
        } catch (const Error& e) {
            jb["trajectory_error"] = e.what();
        }
        branches.push_back(jb);
    }
    Json j;
    j["circuit"] = to_json(c.circuit);
    j["k"] = c.skin.k;
    j["grid"] = c.skin.grid;
    j["n_k"] = c.skin.n_k;
    j["branches"] = branches;
    write_json(dir / "skin.json", j);
    traj.write(dir, "det_trajectory", c.output.format);
}

// ---- eigvecs -------------------------------------------------------------

Json spectrum_json(const ChainSpectrum& s) {
    Json states = Json::array();
    for (int i = 0; i < s.size(); ++i) {
        const auto& loc = s.localization[static_cast<std::size_t>(i)];
        states.push_back({{"index", i},
                          {"eigenvalue", complex_json(s.eigenvalues[i])},
                          {"label", std::string(to_string(s.labels[static_cast<std::size_t>(i)]))},
                          {"ipr", loc.ipr},
                          {"left_weight", loc.left_weight},
                          {"right_weight", loc.right_weight}});
    }
    const auto counts = count_labels(s);
    Json j;
    j["counts"] = {{"edge", counts.edge}, {"skin", counts.skin}, {"bulk", counts.bulk}};
    j["max_residual"] = s.max_residual;
    j["states"] = states;
    return j;
}

Curve profiles(const ChainSpectrum& s, int count) {
    Curve curve{{"state", "node", "magnitude"}, {}};
    const int n = std::min(count, s.size());
    for (int i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < s.eigenvectors.rows(); ++j) {
            curve.rows.push_back({double(i), double(j), std::abs(s.eigenvectors(j, i))});
        }
    }
    return curve;
}

void cmd_eigvecs(const ExperimentConfig& c, const fs::path& dir) {
    const auto band = reference_band(c.circuit);
    const Complex omega = branch_frequency_at(c.circuit, band, c.eigvecs.branch, c.eigvecs.k);
    const auto h = hoppings(c.circuit, omega);
    const double gap = chain_gap(h);
    const auto matrix = real_space_matrix(c.circuit, omega);
    const auto spectrum = classify_states(eigendecompose(matrix), gap);

    Json j;
    j["circuit"] = to_json(c.circuit);
    j["branch"] = c.eigvecs.branch;
    j["k"] = c.eigvecs.k;
    j["omega"] = complex_json(omega);
    j["v"] = complex_json(h.v);
    j["w"] = complex_json(h.w);
    j["gap"] = gap;
    j["spectrum"] = spectrum_json(spectrum);
    profiles(spectrum, c.eigvecs.export_states).write(dir, "eigvecs", c.output.format);

    if (c.eigvecs.perturbation > 0.0) {
        const auto cells = center_cells(c.circuit.n_cells, c.eigvecs.perturbed_cells);
        const auto perturbed = classify_states(eigendecompose(perturb_chain(matrix, cells, c.eigvecs.perturbation)), gap);
        const auto rep = compare_perturbation(spectrum, perturbed, gap);
        Json p;
        p["fraction"] = c.eigvecs.perturbation;
        p["cells"] = cells;
        p["edge_state_drift"] = rep.edge_state_drift;
        p["skin_state_drift"] = rep.skin_state_drift;
        p["bulk_state_drift"] = rep.bulk_state_drift;
        p["edge_partners_in_gap"] = rep.edge_partners_in_gap;
        p["matched_pairs"] = rep.matched_pairs.size();
        p["spectrum"] = spectrum_json(perturbed);
        j["perturbation"] = p;
        profiles(perturbed, c.eigvecs.export_states).write(dir, "eigvecs_perturbed", c.output.format);
    }
    write_json(dir / "spectrum.json", j);
}

// ---- transient -------------------------------------------------------------

TransientSetup resolve_transient(ExperimentConfig& c) {
    auto& t = c.transient;
    Complex mode;
    if (t.drive_frequency) {
        mode = Complex(*t.drive_frequency, t.decay.value_or(0.0));
    } else {
        mode = branch_frequency_at(c.circuit, reference_band(c.circuit), t.branch, t.k);
    }
    auto s = make_transient_setup(c.circuit, mode, t.observe_periods);
    if (!t.source_nodes.empty()) s.source_nodes = t.source_nodes;
    s.source_amplitude = t.source_amplitude;
    if (t.switch_open_time) s.switch_open_time = *t.switch_open_time;
    if (t.t_end) {
        s.t_end = *t.t_end;
    } else if (t.switch_open_time) {
        s.t_end = s.switch_open_time + t.observe_periods * s.drive_period();
    }
    if (t.dt) s.dt = *t.dt;
    s.max_samples = t.max_samples;
    s.validate();

    t.drive_frequency = s.drive_frequency;
    t.decay = s.decay;
    t.source_nodes = s.source_nodes;
    t.switch_open_time = s.switch_open_time;
    t.t_end = s.t_end;
    t.dt = s.dt;
    return s;
}

Json setup_json(const TransientSetup& s) {
    Json j;
    j["drive_frequency"] = s.drive_frequency;
    j["decay"] = s.decay;
    j["source_nodes"] = s.source_nodes;
    j["source_amplitude"] = s.source_amplitude;
    j["switch_open_time"] = s.switch_open_time;
    j["t_end"] = s.t_end;
    j["dt"] = s.dt;
    return j;
}

void cmd_transient(ExperimentConfig& c, const fs::path& dir) {
    const auto setup = resolve_transient(c);
    const auto trace = simulate(setup);
    const auto profile = ground_current_profile(trace);
    const auto ends = end_mass(profile.normalized);

    Json j;
    j["circuit"] = to_json(c.circuit);
    j["setup"] = setup_json(setup);
    j["steps"] = trace.steps;
    j["samples"] = trace.times.size();
    j["max_error_estimate"] = trace.max_error_estimate;
    j["window"] = {profile.t_begin, profile.t_end};
    j["rms"] = std::vector<double>(profile.rms.data(), profile.rms.data() + profile.rms.size());
    j["profile"] = std::vector<double>(profile.normalized.data(), profile.normalized.data() + profile.normalized.size());
    j["end_mass"] = {{"left", ends.left}, {"right", ends.right}};
    if (c.transient.fit) {
        try {
            const auto fit = fit_trace(trace);
            j["fit"] = {{"node", fit.node},
                        {"amplitude", fit.amplitude},
                        {"omega_r", fit.omega_r},
                        {"omega_i", fit.omega_i},
                        {"phase", fit.phase},
                        {"rms_residual", fit.rms_residual},
                        {"t_begin", fit.t_begin},
                        {"t_end", fit.t_end}};
        } catch (const Error& e) {
            j["fit"] = {{"error", e.what()}};
        }
    }
    write_json(dir / "transient.json", j);

    Curve prof{{"node", "rms", "normalized"}, {}};
    for (Eigen::Index i = 0; i < profile.rms.size(); ++i) prof.rows.push_back({double(i), profile.rms[i], profile.normalized[i]});
    prof.write(dir, "profile", c.output.format);

    // Long-form trace thinned in time to stay under csv_rows_max rows.
    const auto samples = static_cast<long long>(trace.times.size());
    const auto nodes = static_cast<long long>(trace.ground_currents.cols());
    const long long stride = std::max(1LL, (samples * nodes + c.transient.csv_rows_max - 1) / c.transient.csv_rows_max);
    Curve tr{{"time", "node", "voltage", "current"}, {}};
    for (long long i = 0; i < samples; i += stride) {
        for (long long n = 0; n < nodes; ++n) {
            tr.rows.push_back({trace.times[static_cast<std::size_t>(i)], double(n), trace.node_voltages(i, n),
                               trace.ground_currents(i, n)});
        }
    }
    tr.write(dir, "trace", c.output.format);
}

// ---- netlist -------------------------------------------------------------

void cmd_netlist(ExperimentConfig& c, const fs::path& dir) {
    const auto setup = resolve_transient(c);
    const std::string text = write_netlist(setup);
    write_text(dir / "circuit.cir", text);
    const auto st = netlist_stats(text);
    Json j;
    j["circuit"] = to_json(c.circuit);
    j["setup"] = setup_json(setup);
    j["resistors"] = st.resistors;
    j["capacitors"] = st.capacitors;
    j["inductors"] = st.inductors;
    j["control_sources"] = st.control_sources;
    j["element_cards"] = st.element_cards();
    j["sources"] = st.sources;
    j["switches"] = st.switches;
    j["chain_nodes"] = st.chain_nodes;
    j["nodes"] = st.nodes;
    j["node_count_consistent"] = st.chain_nodes == c.circuit.n_nodes();
    write_json(dir / "netlist.json", j);
}

// ---- sweep -----------------------------------------------------------------

std::vector<CircuitParams> sweep_points(const ExperimentConfig& c) {
    if (!c.sweep.points.empty()) return c.sweep.points;
    std::vector<CircuitParams> pts{c.circuit};
    for (const auto& r : c.sweep.ranges) {
        std::vector<CircuitParams> next;
        for (const auto& base : pts) {
            for (int i = 0; i < r.count; ++i) {
                const double x = r.count == 1 ? r.start : r.start + (r.stop - r.start) * i / (r.count - 1);
                CircuitParams p = base;
                if (r.field == "r1") p.r1 = x;
                if (r.field == "r2") p.r2 = x;
                if (r.field == "c1") p.c1 = x;
                if (r.field == "c2") p.c2 = x;
                if (r.field == "l") p.l = x;
                next.push_back(p);
            }
        }
        pts = std::move(next);
    }
    return pts;
}

struct SweepRow {
    CircuitParams params;
    std::array<std::string, kBranchCount> mu;
    std::string multiset;
    double gap = 0.0;
    std::array<std::string, kBranchCount> skin;
    std::string error;
};

SweepRow sweep_point(const ExperimentConfig& c, const CircuitParams& p) {
    SweepRow row;
    row.params = p;
    row.mu.fill("");
    row.skin.fill("");
    try {
        p.validate(1);
        const auto rep = winding_report(p, c.sweep.n_k, c.sweep.n_k_max, false, Execution::Serial);
        std::vector<int> ms;
        for (int b = 0; b < kBranchCount; ++b) {
            const auto& w = rep.branches[b].winding;
            row.mu[b] = w ? std::to_string(w->mu) : "undefined";
            if (w) ms.push_back(w->mu);
        }
        std::sort(ms.begin(), ms.end());
        row.multiset = ms.size() == kBranchCount ? fmt::format("{{{}}}", fmt::join(ms, ";")) : "undefined";
        double gap = std::numeric_limits<double>::infinity();
        for (int b = 0; b < kBranchCount; ++b) gap = std::min(gap, bulk_gap(p, rep.band.branches[b]).gap());
        row.gap = gap;
        if (c.sweep.skin) {
            for (int b = 0; b < kBranchCount; ++b) {
                const Complex omega = branch_frequency_at(p, rep.band, b, c.sweep.skin_k);
                row.skin[b] = skin_effect_present(p, omega, 50, 512, Execution::Serial).present ? "1" : "0";
            }
        }
    } catch (const Error& e) {
        row.error = std::string(to_string(e.kind()));
    }
    return row;
}

void cmd_sweep(const ExperimentConfig& c, const fs::path& dir) {
    const auto pts = sweep_points(c);
    const auto rows = map_indexed<SweepRow>(
        pts.size(), [&](std::size_t i) { return sweep_point(c, pts[i]); }, Execution::Parallel);
    std::string text = "index,r1,r2,c1,c2,l,mu_0,mu_1,mu_2,mu_3,multiset,gap,skin_0,skin_1,skin_2,skin_3,error\n";
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& r = rows[i];
        text += fmt::format("{},{},{},{},{},{},{},{},{},{}\n", i, num(r.params.r1), num(r.params.r2),
                            num(r.params.c1), num(r.params.c2), num(r.params.l), fmt::join(r.mu, ","), r.multiset,
                            r.error.empty() ? num(r.gap) : "", fmt::format("{},{}", fmt::join(r.skin, ","), r.error));
    }
    write_text(dir / "sweep.csv", text);
}

}  // namespace

fs::path preset_directory() {
    if (const char* env = std::getenv("NHSSH_PRESET_DIR"); env && *env) return env;
    return NHSSH_SOURCE_PRESET_DIR;
}

ExperimentConfig run_command(ExperimentConfig c, const fs::path& dir) {
    const std::string& cmd = c.command;
    if (cmd == "bands") {
        cmd_bands(c, dir);
    } else if (cmd == "winding") {
        cmd_winding(c, dir);
    } else if (cmd == "skin") {
        cmd_skin(c, dir);
    } else if (cmd == "eigvecs") {
        cmd_eigvecs(c, dir);
    } else if (cmd == "transient") {
        cmd_transient(c, dir);
    } else if (cmd == "netlist") {
        cmd_netlist(c, dir);
    } else if (cmd == "sweep") {
        cmd_sweep(c, dir);
    } else {
        throw Error(ErrorKind::ConfigBadValue, fmt::format("command: unknown command '{}'", cmd));
    }
    return c;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Resistive SSH circuit chain: bands, invariants, localisation and transients", "nhssh"};
    std::string config_path;
    std::string preset;
    std::string out_dir;
    std::string format;
    int threads = 0;
    app.add_option("--config", config_path, "JSON experiment configuration");
    app.add_option("--preset", preset, "named configuration from the preset directory");
    app.add_option("--out", out_dir, "output directory");
    app.add_option("--format", format, "curve format")->check(CLI::IsMember({"csv", "json"}));
    app.add_option("--threads", threads, "OpenMP threads (0: runtime default)")->check(CLI::NonNegativeNumber);
    const std::map<std::string_view, std::string> blurbs{
        {"bands", "natural frequencies and admittance eigenvalues over the Brillouin zone"},
        {"winding", "winding number of each band family, with oracle cross-checks"},
        {"skin", "point-gap skin-effect scan per branch"},
        {"eigvecs", "finite-chain eigenstates, classification and perturbation"},
        {"transient", "driven then free time-domain simulation of the chain"},
        {"netlist", "SPICE netlist of the transient circuit"},
        {"sweep", "windings, gap and skin flags over a parameter grid"},
    };
    std::vector<CLI::App*> subs;
    for (auto name : kCommands) {
        subs.push_back(app.add_subcommand(std::string(name), blurbs.at(name))->fallthrough());
    }
    app.require_subcommand(0, 1);

    std::vector<const char*> argv{"nhssh"};
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitConfig;
    }

    std::string command;
    for (auto* s : subs) {
        if (s->parsed()) command = s->get_name();
    }
    const std::string label = command.empty() ? "nhssh" : command;
    try {
        if (config_path.empty() == preset.empty()) {
            throw Error(ErrorKind::ConfigMissingKey, "give exactly one of --config or --preset");
        }
        const std::string source = config_path.empty() ? (preset_directory() / (preset + ".json")).string() : config_path;
        auto config = parse_config(load_json_file(source), command);
        if (!format.empty()) config.output.format = format;
        if (threads > 0) set_thread_count(threads);

        fs::path dir;
        if (!out_dir.empty()) {
            dir = out_dir;
        } else if (!config.output.dir.empty()) {
            dir = config.output.dir;
        } else {
            const char* root = std::getenv("NHSSH_OUT");
            dir = fs::path(root && *root ? root : "nhssh_out") / (preset.empty() ? config.command : preset);
        }
        std::error_code ec;
        fs::create_directories(dir, ec);
        if (ec) throw Error(ErrorKind::Io, fmt::format("cannot create {}: {}", dir.string(), ec.message()));

        const auto resolved = run_command(config, dir);
        write_json(dir / "config.resolved.json", to_json(resolved));
        out << fmt::format("{}: wrote {}\n", resolved.command, dir.string());
        return kExitOk;
    } catch (const Error& e) {
        err << fmt::format("nhssh {}: {}\n", label, e.what());
        switch (e.error_class()) {
            case ErrorClass::Config: return kExitConfig;
            case ErrorClass::Io: return kExitIo;
            case ErrorClass::Numeric: return kExitNumeric;
        }
        return kExitNumeric;
    } catch (const std::exception& e) {
        err << fmt::format("nhssh {}: {}\n", label, e.what());
        return kExitNumeric;
    }
}

}  // namespace nhssh
