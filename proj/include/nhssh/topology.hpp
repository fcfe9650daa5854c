#pragma once

// Winding invariants of the band families, point-gap (skin) winding, state
// classification for open chains and the centre-perturbation experiment.

#include "nhssh/spectral.hpp"

#include <functional>
#include <optional>
#include <string>

namespace nhssh {

struct WindingResult {
    int mu = 0;
    double raw_integral = 0.0;  // accumulated angle / 2π before rounding
    double residual = 0.0;      // |raw_integral − mu|
    int n_k = 0;
    /// Segments where the branch crossed a Λ = ∞ pole and the curve went
    /// through infinity; the winding there follows the chord between samples.
    int pole_crossings = 0;
    double max_turn = 0.0;    // largest |angle| between consecutive points, pole segments excluded
    int inserted_points = 0;  // added by local bisection
};

struct PlanePoint {
    double x = 0.0;
    double y = 0.0;
};

/// (Re 𝒴_x, Re 𝒴_y) along a branch, one point per grid sample.
[[nodiscard]] std::vector<PlanePoint> real_projection(const CircuitParams& params, std::span<const double> ks,
                                                      std::span<const Complex> omegas);

struct ResolvedCurve {
    std::vector<double> k;
    std::vector<Complex> omega;
    std::vector<PlanePoint> points;  // closed: the last point is the first sample of the partner branch
    int inserted = 0;
};

/// Real projection of `branch` on the band grid, with every segment that
/// turns by more than π/4 about the origin bisected (root re-solved at the
/// midpoint) until it does not. The seam across k = 0 is closed by a chord
/// over a symmetric sliver, narrowed until that chord turns by at most π/4;
/// the quadrature closes the seam the same way.
[[nodiscard]] ResolvedCurve resolved_projection(const CircuitParams& params, const BandSet& band, int branch);

/// Signed-angle winding of the resolved real projection of `branch` around the origin.
/// A branch that does not close on itself across k = 0 is refused with
/// ResidualTooLarge.
[[nodiscard]] WindingResult winding_number(const CircuitParams& params, const BandSet& band, int branch);

/// Winding of a closed polygon (last point joins the first).
[[nodiscard]] WindingResult polygon_winding(std::span<const PlanePoint> curve, int n_k);

/// Oracle: signed crossings of the positive x-axis by the closed polygon.
[[nodiscard]] int crossing_count_winding(std::span<const PlanePoint> curve);

/// Oracle: adaptive Simpson quadrature of dφ_r/dk over one period, with
/// ω'(k) from implicit differentiation of the band polynomial.
[[nodiscard]] double quadrature_winding(const CircuitParams& params, const BandSet& band, int branch,
                                        double tol = 1e-9);

struct BranchWinding {
    std::optional<WindingResult> winding;  // empty when the invariant is undefined
    std::string error;                     // why, when empty
    int crossings = 0;                     // axis-crossing oracle on the same polygon
    double quadrature = 0.0;               // ∮ dφ/dk quadrature oracle
};

struct WindingReport {
    BandSet band;
    int n_k = 0;
    std::array<BranchWinding, kBranchCount> branches;
};

/// Windings of all four families. Starts at `n_k` and doubles the grid (up to
/// `n_k_max`) while a branch is under-resolved (OriginCrossing) or tracking
/// is ambiguous; whatever remains undefined is reported, not rounded.
[[nodiscard]] WindingReport winding_report(const CircuitParams& params, int n_k, int n_k_max = 16384,
                                           bool with_oracles = true, Execution exec = Execution::Parallel);

/// Fixed-ω gap of the chain, 2·min_k |v + w e^{ik}| = 2·||v| − |w||.
[[nodiscard]] double chain_gap(const HoppingPair& h);

// ---- point-gap topology -------------------------------------------------

using BlochFunction = std::function<Eigen::Matrix2cd(double)>;

struct SkinWindingResult {
    int w = 0;
    Complex e0;
    double raw_integral = 0.0;
    double residual = 0.0;
    std::vector<Complex> trajectory;  // det[H(k) − E₀] for k_j = 2πj/n_k, j = 0 … n_k
};

[[nodiscard]] SkinWindingResult point_gap_winding(const BlochFunction& bloch, Complex e0, int n_k = 512);
[[nodiscard]] SkinWindingResult skin_winding(const CircuitParams& params, Complex omega, Complex e0,
                                             int n_k = 512);

struct SkinScan {
    bool present = false;
    std::optional<Complex> witness;
    std::optional<int> witness_w;
    Complex box_min;
    Complex box_max;
    int scanned = 0;
    int skipped = 0;  // grid points that hit the trajectory
};

[[nodiscard]] SkinScan skin_scan(const BlochFunction& bloch, int grid = 50, int n_k = 512,
                                 Execution exec = Execution::Parallel);
[[nodiscard]] SkinScan skin_effect_present(const CircuitParams& params, Complex omega, int grid = 50,
                                           int n_k = 512, Execution exec = Execution::Parallel);

/// Oracle: mean signed centre-of-mass displacement (in units of chain length)
/// of all open-chain states minus the same for the periodic chain.
[[nodiscard]] double center_of_mass_shift(const Eigen::MatrixXcd& open_chain, const Eigen::MatrixXcd& periodic_chain);
[[nodiscard]] double center_of_mass_shift(const CircuitParams& params, Complex omega, int n_cells = 100);

// ---- classification ------------------------------------------------------

struct ClassifyThresholds {
    double edge_gap_fraction = 0.5;  // |λ| < fraction·gap
    double edge_ipr_factor = 5.0;    // ipr > factor/(2N)
    double skin_side_weight = 0.5;
    double skin_asymmetry = 3.0;
};

[[nodiscard]] ChainSpectrum classify_states(ChainSpectrum spectrum, double gap, const ClassifyThresholds& t = {});

struct LabelCounts {
    int edge = 0;
    int skin = 0;
    int bulk = 0;
};
[[nodiscard]] LabelCounts count_labels(const ChainSpectrum& spectrum);

// ---- perturbation --------------------------------------------------------

/// Multiplies every hopping touching the listed cells by (1 + fraction).
[[nodiscard]] RealSpaceMatrix perturb_chain(const RealSpaceMatrix& matrix, std::span<const int> cells,
                                            double fraction);
[[nodiscard]] std::vector<int> center_cells(int n_cells, int count = 3);

struct MatchedPair {
    int baseline = 0;
    int perturbed = 0;
    double eigenvalue_shift = 0.0;
    double profile_drift = 0.0;  // ‖|ψ_b| − |ψ_p|‖₂, subspace-averaged for degenerate clusters
};

struct PerturbationReport {
    ChainSpectrum baseline;
    ChainSpectrum perturbed;
    std::vector<MatchedPair> matched_pairs;
    double edge_state_drift = 0.0;
    double skin_state_drift = 0.0;
    double bulk_state_drift = 0.0;
    bool edge_partners_in_gap = true;
};

[[nodiscard]] PerturbationReport compare_perturbation(const ChainSpectrum& baseline, const ChainSpectrum& perturbed,
                                                      double gap);

}  // namespace nhssh
