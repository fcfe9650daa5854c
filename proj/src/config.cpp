#include "nhssh/config.hpp"

#include "nhssh/errors.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

namespace nhssh {

namespace {

// Walks one JSON object; every key read is ticked off so leftovers can be
// reported as typos.
class Section {
public:
    Section(const Json* node, std::string path) : node_(node), path_(std::move(path)) {
        if (node_ && !node_->is_object()) fail_type("an object");
    }

    [[nodiscard]] bool present() const { return node_ != nullptr; }

    [[nodiscard]] Section child(const std::string& key) {
        return Section(find(key), join(key));
    }

    double number(const std::string& key, std::optional<double> fallback) {
        const Json* v = find(key);
        if (!v) return required(key, fallback);
        if (!v->is_number()) bad(key, "expected a number");
        const double x = v->get<double>();
        if (!std::isfinite(x)) bad(key, "must be finite");
        return x;
    }

    std::optional<double> optional_number(const std::string& key, std::optional<double> fallback) {
        const Json* v = find(key);
        if (!v || v->is_null()) return fallback;
        return number(key, std::nullopt);
    }

    int integer(const std::string& key, std::optional<int> fallback) {
        const Json* v = find(key);
        if (!v) return required(key, fallback);
        if (!v->is_number_integer()) bad(key, "expected an integer");
        const auto x = v->get<long long>();
        if (x < -2147483647LL || x > 2147483647LL) bad(key, "out of range");
        return static_cast<int>(x);
    }

    bool boolean(const std::string& key, bool fallback) {
        const Json* v = find(key);
        if (!v) return fallback;
        if (!v->is_boolean()) bad(key, "expected true or false");
        return v->get<bool>();
    }

    std::string string(const std::string& key, std::optional<std::string> fallback) {
        const Json* v = find(key);
        if (!v) return required(key, std::move(fallback));
        if (!v->is_string()) bad(key, "expected a string");
        return v->get<std::string>();
    }

    std::vector<int> int_list(const std::string& key, std::vector<int> fallback) {
        const Json* v = find(key);
        if (!v) return fallback;
        if (!v->is_array()) bad(key, "expected an array of integers");
        std::vector<int> out;
        for (const auto& e : *v) {
            if (!e.is_number_integer()) bad(key, "expected an array of integers");
            out.push_back(e.get<int>());
        }
        return out;
    }

    const Json* array(const std::string& key) {
        const Json* v = find(key);
        if (v && !v->is_array()) bad(key, "expected an array");
        return v;
    }

    [[nodiscard]] std::string join(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    [[noreturn]] void bad(const std::string& key, const std::string& why) const {
        throw Error(ErrorKind::ConfigBadValue, fmt::format("{}: {}", join(key), why));
    }

    void check_unknown() const {
        if (!node_) return;
        for (const auto& [key, value] : node_->items()) {
            if (!seen_.count(key)) throw Error(ErrorKind::ConfigBadValue, fmt::format("{}: unknown key", join(key)));
        }
    }

private:
    const Json* find(const std::string& key) {
        seen_.insert(key);
        if (!node_) return nullptr;
        auto it = node_->find(key);
        return it == node_->end() ? nullptr : &*it;
    }

    template <class T>
    T required(const std::string& key, std::optional<T> fallback) const {
        if (!fallback) throw Error(ErrorKind::ConfigMissingKey, fmt::format("missing key {}", join(key)));
        return *fallback;
    }

    [[noreturn]] void fail_type(const char* what) const {
        throw Error(ErrorKind::ConfigBadValue, fmt::format("{}: expected {}", path_, what));
    }

    const Json* node_;
    std::string path_;
    std::set<std::string> seen_;
};

void require(bool ok, Section& s, const std::string& key, const std::string& why) {
    if (!ok) s.bad(key, why);
}

CircuitParams read_circuit(Section s, const CircuitParams* base) {
    CircuitParams p;
    const auto fb = [&](double CircuitParams::*field) -> std::optional<double> {
        if (base) return (*base).*field;
        return std::nullopt;
    };
    p.r1 = s.number("r1", fb(&CircuitParams::r1));
    p.r2 = s.number("r2", fb(&CircuitParams::r2));
    p.c1 = s.number("c1", fb(&CircuitParams::c1));
    p.c2 = s.number("c2", fb(&CircuitParams::c2));
    p.l = s.number("l", fb(&CircuitParams::l));
    p.n_cells = s.integer("n_cells", base ? base->n_cells : 100);
    const std::string b = s.string("boundary", std::string(to_string(base ? base->boundary : Boundary::Open)));
    try {
        p.boundary = parse_boundary(b);
    } catch (const Error& e) {
        s.bad("boundary", e.what());
    }
    s.check_unknown();
    try {
        p.validate(1);
    } catch (const Error& e) {
        throw Error(ErrorKind::ConfigBadValue, e.what());
    }
    return p;
}

void check_branch(Section& s, const std::string& key, int b) {
    require(b >= 0 && b < 4, s, key, "must be a branch index 0..3");
}

}  // namespace

ExperimentConfig parse_config(const Json& doc, std::string_view command) {
    Section root(&doc, "");
    ExperimentConfig c;
    const std::string in_doc = root.string("command", std::string(command));
    c.command = command.empty() ? in_doc : std::string(command);
    if (c.command.empty()) throw Error(ErrorKind::ConfigMissingKey, "missing key command");
    if (std::find(std::begin(kCommands), std::end(kCommands), c.command) == std::end(kCommands)) {
        root.bad("command", fmt::format("unknown command '{}'", c.command));
    }

    {
        auto s = root.child("circuit");
        if (!s.present()) throw Error(ErrorKind::ConfigMissingKey, "missing key circuit");
        c.circuit = read_circuit(std::move(s), nullptr);
    }
    {
        auto s = root.child("bands");
        c.bands.n_k = s.integer("n_k", c.bands.n_k);
        require(c.bands.n_k >= 64, s, "n_k", "must be >= 64");
        s.check_unknown();
    }
    {
        auto s = root.child("winding");
        c.winding.n_k = s.integer("n_k", c.winding.n_k);
        c.winding.n_k_max = s.integer("n_k_max", c.winding.n_k_max);
        c.winding.oracles = s.boolean("oracles", c.winding.oracles);
        require(c.winding.n_k >= 64, s, "n_k", "must be >= 64");
        require(c.winding.n_k_max >= c.winding.n_k, s, "n_k_max", "must be >= n_k");
        s.check_unknown();
    }
    {
        auto s = root.child("skin");
        c.skin.k = s.number("k", c.skin.k);
        c.skin.grid = s.integer("grid", c.skin.grid);
        c.skin.n_k = s.integer("n_k", c.skin.n_k);
        c.skin.branches = s.int_list("branches", c.skin.branches);
        c.skin.com_cells = s.integer("com_cells", c.skin.com_cells);
        require(c.skin.grid >= 2, s, "grid", "must be >= 2");
        require(c.skin.n_k >= 16, s, "n_k", "must be >= 16");
        require(c.skin.com_cells >= 2, s, "com_cells", "must be >= 2");
        for (int b : c.skin.branches) check_branch(s, "branches", b);
        s.check_unknown();
    }
    {
        auto s = root.child("eigvecs");
        c.eigvecs.branch = s.integer("branch", c.eigvecs.branch);
        c.eigvecs.k = s.number("k", c.eigvecs.k);
        c.eigvecs.perturbation = s.number("perturbation", c.eigvecs.perturbation);
        c.eigvecs.perturbed_cells = s.integer("perturbed_cells", c.eigvecs.perturbed_cells);
        c.eigvecs.export_states = s.integer("export_states", c.eigvecs.export_states);
        check_branch(s, "branch", c.eigvecs.branch);
        require(c.eigvecs.perturbation >= 0.0 && c.eigvecs.perturbation <= 0.2, s, "perturbation",
                "must lie in [0, 0.2]");
        require(c.eigvecs.perturbed_cells >= 1, s, "perturbed_cells", "must be >= 1");
        require(c.eigvecs.export_states >= 0, s, "export_states", "must be >= 0");
        s.check_unknown();
    }
    {
        auto s = root.child("transient");
        auto& t = c.transient;
        t.branch = s.integer("branch", t.branch);
        t.k = s.number("k", t.k);
        t.drive_frequency = s.optional_number("drive_frequency", t.drive_frequency);
        t.decay = s.optional_number("decay", t.decay);
        t.source_nodes = s.int_list("source_nodes", t.source_nodes);
        t.source_amplitude = s.number("source_amplitude", t.source_amplitude);
        t.switch_open_time = s.optional_number("switch_open_time", t.switch_open_time);
        t.t_end = s.optional_number("t_end", t.t_end);
        t.dt = s.optional_number("dt", t.dt);
        t.observe_periods = s.number("observe_periods", t.observe_periods);
        t.max_samples = s.integer("max_samples", t.max_samples);
        t.csv_rows_max = s.integer("csv_rows_max", t.csv_rows_max);
        t.fit = s.boolean("fit", t.fit);
        check_branch(s, "branch", t.branch);
        require(t.observe_periods > 0.0, s, "observe_periods", "must be positive");
        require(t.csv_rows_max >= 1, s, "csv_rows_max", "must be positive");
        s.check_unknown();
    }
    {
        auto s = root.child("sweep");
        auto& w = c.sweep;
        if (const Json* pts = s.array("points")) {
            for (std::size_t i = 0; i < pts->size(); ++i) {
                w.points.push_back(read_circuit(Section(&(*pts)[i], s.join(fmt::format("points[{}]", i))), &c.circuit));
            }
        }
        if (const Json* rs = s.array("ranges")) {
            for (std::size_t i = 0; i < rs->size(); ++i) {
                Section r(&(*rs)[i], s.join(fmt::format("ranges[{}]", i)));
                SweepRange range;
                range.field = r.string("field", std::nullopt);
                range.start = r.number("start", std::nullopt);
                range.stop = r.number("stop", range.start);
                range.count = r.integer("count", 1);
                static const std::set<std::string> fields{"r1", "r2", "c1", "c2", "l"};
                if (!fields.count(range.field)) r.bad("field", "must be one of r1, r2, c1, c2, l");
                require(range.count >= 1, r, "count", "must be >= 1");
                r.check_unknown();
                w.ranges.push_back(range);
            }
        }
        w.n_k = s.integer("n_k", w.n_k);
        w.n_k_max = s.integer("n_k_max", w.n_k_max);
        w.skin = s.boolean("skin", w.skin);
        w.skin_k = s.number("skin_k", w.skin_k);
        require(w.n_k >= 64, s, "n_k", "must be >= 64");
        require(w.n_k_max >= w.n_k, s, "n_k_max", "must be >= n_k");
        s.check_unknown();
    }
    {
        auto s = root.child("output");
        c.output.dir = s.string("dir", c.output.dir);
        c.output.format = s.string("format", c.output.format);
        require(c.output.format == "csv" || c.output.format == "json", s, "format", "must be csv or json");
        s.check_unknown();
    }
    root.check_unknown();
    return c;
}

Json to_json(const CircuitParams& p) {
    Json j;
    j["r1"] = p.r1;
    j["r2"] = p.r2;
    j["c1"] = p.c1;
    j["c2"] = p.c2;
    j["l"] = p.l;
    j["n_cells"] = p.n_cells;
    j["boundary"] = std::string(to_string(p.boundary));
    return j;
}

namespace {

Json optional_json(const std::optional<double>& v) {
    return v ? Json(*v) : Json(nullptr);
}

}  // namespace

Json to_json(const ExperimentConfig& c) {
    Json j;
    j["command"] = c.command;
    j["circuit"] = to_json(c.circuit);
    j["bands"] = {{"n_k", c.bands.n_k}};
    j["winding"] = {{"n_k", c.winding.n_k}, {"n_k_max", c.winding.n_k_max}, {"oracles", c.winding.oracles}};
    j["skin"] = {{"k", c.skin.k},
                 {"grid", c.skin.grid},
                 {"n_k", c.skin.n_k},
                 {"branches", c.skin.branches},
                 {"com_cells", c.skin.com_cells}};
    j["eigvecs"] = {{"branch", c.eigvecs.branch},
                    {"k", c.eigvecs.k},
                    {"perturbation", c.eigvecs.perturbation},
                    {"perturbed_cells", c.eigvecs.perturbed_cells},
                    {"export_states", c.eigvecs.export_states}};
    const auto& t = c.transient;
    j["transient"] = {{"branch", t.branch},
                      {"k", t.k},
                      {"drive_frequency", optional_json(t.drive_frequency)},
                      {"decay", optional_json(t.decay)},
                      {"source_nodes", t.source_nodes},
                      {"source_amplitude", t.source_amplitude},
                      {"switch_open_time", optional_json(t.switch_open_time)},
                      {"t_end", optional_json(t.t_end)},
                      {"dt", optional_json(t.dt)},
                      {"observe_periods", t.observe_periods},
                      {"max_samples", t.max_samples},
                      {"csv_rows_max", t.csv_rows_max},
                      {"fit", t.fit}};
    Json points = Json::array();
    for (const auto& p : c.sweep.points) points.push_back(to_json(p));
    Json ranges = Json::array();
    for (const auto& r : c.sweep.ranges) {
        ranges.push_back({{"field", r.field}, {"start", r.start}, {"stop", r.stop}, {"count", r.count}});
    }
    j["sweep"] = {{"points", points},
                  {"ranges", ranges},
                  {"n_k", c.sweep.n_k},
                  {"n_k_max", c.sweep.n_k_max},
                  {"skin", c.sweep.skin},
                  {"skin_k", c.sweep.skin_k}};
    j["output"] = {{"dir", c.output.dir}, {"format", c.output.format}};
    return j;
}

Json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::Io, fmt::format("cannot open config {}", path));
    try {
        return Json::parse(in);
    } catch (const Json::parse_error& e) {
        throw Error(ErrorKind::ConfigBadValue, fmt::format("{}: {}", path, e.what()));
    }
}

}  // namespace nhssh
