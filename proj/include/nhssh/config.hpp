#pragma once

// Experiment configuration: strict JSON ingestion (unknown or mistyped keys
// are errors naming the dotted path) and a resolved echo with every default
// spelled out.

#include "nhssh/circuit_model.hpp"

#include <json.hpp>

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace nhssh {

using Json = nlohmann::ordered_json;

inline constexpr std::string_view kCommands[] = {"bands", "winding", "skin", "eigvecs", "transient", "netlist", "sweep"};

struct OutputOptions {
    std::string dir;             // empty: decided by the CLI
    std::string format = "csv";  // curves as csv or json; reports are always json
};

struct BandsOptions {
    int n_k = 256;
};

struct WindingOptions {
    int n_k = 256;
    int n_k_max = 16384;
    bool oracles = true;
};

struct SkinOptions {
    double k = kPi / 2;  // ω of each branch is taken at this k
    int grid = 50;
    int n_k = 512;
    std::vector<int> branches{0, 1, 2, 3};
    int com_cells = 100;  // chain length of the centre-of-mass oracle
};

struct EigvecsOptions {
    int branch = 0;
    double k = kPi / 2;
    double perturbation = 0.0;  // relative change of the hoppings at the centre cells
    int perturbed_cells = 3;
    int export_states = 20;     // lowest-|λ| profiles written to the curve file
};

struct TransientOptions {
    int branch = 0;
    double k = kPi / 2;
    std::optional<double> drive_frequency;  // from the branch when unset
    std::optional<double> decay;
    std::vector<int> source_nodes;  // empty: 1/3 and 2/3 of the chain
    double source_amplitude = 1.0;
    std::optional<double> switch_open_time;
    std::optional<double> t_end;
    std::optional<double> dt;
    double observe_periods = 28.0;
    int max_samples = 4000;
    int csv_rows_max = 400000;
    bool fit = true;
};

struct SweepRange {
    std::string field;  // r1, r2, c1, c2 or l
    double start = 0.0;
    double stop = 0.0;
    int count = 1;
};

struct SweepOptions {
    std::vector<CircuitParams> points;  // explicit points take precedence
    std::vector<SweepRange> ranges;     // otherwise the cartesian product over the base circuit
    int n_k = 256;
    int n_k_max = 16384;
    bool skin = true;
    double skin_k = kPi / 2;
};

struct ExperimentConfig {
    std::string command;
    CircuitParams circuit;
    BandsOptions bands;
    WindingOptions winding;
    SkinOptions skin;
    EigvecsOptions eigvecs;
    TransientOptions transient;
    SweepOptions sweep;
    OutputOptions output;
};

/// `command` is the subcommand named on the command line (may be empty when
/// the document carries one).
[[nodiscard]] ExperimentConfig parse_config(const Json& doc, std::string_view command = {});
[[nodiscard]] Json to_json(const ExperimentConfig& config);
[[nodiscard]] Json to_json(const CircuitParams& params);

[[nodiscard]] Json load_json_file(const std::string& path);

}  // namespace nhssh
