#pragma once

// Time-domain simulation of the chain: capacitor voltages and inductor
// currents as state, node voltages recovered from KCL, two ideal sinusoidal
// sources released by ideal switches, and a damped-cosine fit of the decay.

#include "nhssh/circuit_model.hpp"

#include <Eigen/Dense>

#include <optional>
#include <span>
#include <vector>

namespace nhssh {

/// RC branch e joins nodes a → b; branch 2c is the intracell R₁C₁ pair of
/// cell c, branch 2c+1 the intercell R₂C₂ pair to cell c+1 (the last one
/// wraps to A₁ only for periodic chains).
struct RcBranch {
    int a = 0;
    int b = 0;
    double r = 0.0;
    double c = 0.0;
};

[[nodiscard]] std::vector<RcBranch> rc_branches(const CircuitParams& params);

/// Nodes nearest to 1/3 and 2/3 of the chain.
[[nodiscard]] std::vector<int> default_source_nodes(int n_nodes);

struct TransientSetup {
    CircuitParams params;
    double drive_frequency = 0.0;  // ω_R of the targeted mode, rad/s
    double decay = 0.0;            // ω_I of the targeted mode, 1/s
    std::vector<int> source_nodes;
    double source_amplitude = 1.0;
    double switch_open_time = 0.0;
    double t_end = 0.0;
    double dt = 0.0;
    int max_samples = 4000;     // stored samples per series (≤ 1e5)
    int error_check_stride = 32;  // step-doubling estimate every this many steps
    /// Optional (v_C, I_L) at t = 0; zero otherwise.
    std::optional<Eigen::VectorXd> initial_state;

    [[nodiscard]] double drive_period() const;
    /// Throws InvalidParams / LosslessUnsupported on a violated invariant.
    void validate() const;
};

/// Largest step the setup invariants allow: 1/20 of the shortest of the drive
/// period, RᵢCᵢ and √(LCᵢ).
[[nodiscard]] double max_time_step(const CircuitParams& params, double drive_frequency);

/// Defaults for driving the natural mode ω: drive at |Re ω|, release after
/// max(10 periods, 5/|Im ω|), observe for `observe_periods` more periods. The
/// step is the invariant bound, further capped at period/400 so the
/// step-doubling estimate stays under 1e−6.
[[nodiscard]] TransientSetup make_transient_setup(const CircuitParams& params, Complex mode,
                                                  double observe_periods = 28.0);

struct StateSpace {
    int n_branches = 0;
    int n_nodes = 0;
    Eigen::MatrixXd a;         // released circuit
    Eigen::MatrixXd a_driven;  // source nodes clamped to u(t)
    Eigen::MatrixXd b_driven;  // one column per source
    Eigen::MatrixXd v_map;         // V = v_map·x after release (ΣV = 0 gauge)
    Eigen::MatrixXd v_map_driven;  // V = v_map_driven·x + v_map_source·u before
    Eigen::MatrixXd v_map_source;
    std::vector<int> source_nodes;
    double switch_open_time = 0.0;
    double amplitude = 1.0;
    double drive_frequency = 0.0;

    [[nodiscard]] int dim() const noexcept { return n_branches + n_nodes; }
    /// u(t) per source; zero at and after the switch opening.
    [[nodiscard]] Eigen::VectorXd source(double t) const;
    /// B·u(t) of the driven system, or exactly zero once released.
    [[nodiscard]] Eigen::VectorXd source_term(double t) const;
};

/// Dense state matrices, x = (v_C per branch, I_L per node). Meant for
/// analysis of small chains; simulate() never forms them.
[[nodiscard]] StateSpace assemble_state_space(const TransientSetup& setup);

struct TransientTrace {
    std::vector<double> times;
    Eigen::MatrixXd node_voltages;    // samples × nodes
    Eigen::MatrixXd ground_currents;  // samples × nodes
    std::vector<double> energy;       // ½ΣCv² + ½ΣLI² per sample
    Eigen::VectorXd final_state;
    long long steps = 0;
    double max_error_estimate = 0.0;
    TransientSetup setup;
};

/// Fixed-step trapezoidal integration. Throws StepRejected when a
/// step-doubling estimate exceeds 1e−6 relative and EnergyIncrease if the
/// stored energy grows after release.
[[nodiscard]] TransientTrace simulate(const TransientSetup& setup);

struct CurrentProfile {
    Eigen::VectorXd rms;         // per node
    Eigen::VectorXd normalized;  // sums to 1
    double t_begin = 0.0;
    double t_end = 0.0;
};

/// RMS inductor current of each node over [t_begin, t_end]. The window must
/// start at least three drive periods after the release.
[[nodiscard]] CurrentProfile ground_current_profile(const TransientTrace& trace, double t_begin, double t_end);
[[nodiscard]] CurrentProfile ground_current_profile(const TransientTrace& trace);

struct EndMass {
    double left = 0.0;   // profile mass in the first `cells` cells
    double right = 0.0;  // ... and in the last
    [[nodiscard]] double total() const noexcept { return left + right; }
};
[[nodiscard]] EndMass end_mass(const Eigen::VectorXd& normalized, int cells = 10);

struct DampedFit {
    double amplitude = 0.0;
    double omega_r = 0.0;
    double omega_i = 0.0;
    double phase = 0.0;
    double rms_residual = 0.0;  // relative to the signal RMS
    double t_begin = 0.0;
    double t_end = 0.0;
    int node = -1;
};

/// Fits A e^{−ω_I t} cos(ω_R t + φ) to samples with t ≥ t0. Needs 20 periods
/// above the noise floor (InsufficientSignal); a fit that does not oscillate,
/// grows or fails to converge throws FitDiverged.
[[nodiscard]] DampedFit fit_damped_oscillation(std::span<const double> times, std::span<const double> series,
                                               double t0);

/// Fit of the node with the largest RMS current after release.
[[nodiscard]] DampedFit fit_trace(const TransientTrace& trace);

[[nodiscard]] double stored_energy(const std::vector<RcBranch>& branches, double inductance,
                                   const Eigen::Ref<const Eigen::VectorXd>& state);

}  // namespace nhssh
