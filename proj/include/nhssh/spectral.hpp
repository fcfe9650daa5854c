#pragma once

// Natural frequencies of the chain, continuity-tracked band families and
// dense diagonalisation of finite chains.

#include "nhssh/circuit_model.hpp"
#include "nhssh/kernels.hpp"
#include "nhssh/polynomial.hpp"

#include <array>
#include <span>
#include <string_view>
#include <vector>

namespace nhssh {

inline constexpr int kBranchCount = 4;

/// Coefficients (ω⁰ … ω⁶) of ω⁴L²η₁²η₂²·[Λ(ω)² − (v + we^{−ik})(v + we^{ik})].
/// Throws DegenerateLeadingCoefficient when the ω⁶ term vanishes (R → 0 or k → 0).
[[nodiscard]] std::array<Complex, 7> band_polynomial_coefficients(const CircuitParams& params, double k);

/// Same polynomial without the degeneracy check.
[[nodiscard]] poly::Coeffs band_polynomial_unchecked(const CircuitParams& params, double k);

/// The sextic with the pole factor η₁η₂ divided out:
/// η₁η₂ − 2ω²L(C₁η₂ + C₂η₁) + 2ω⁴L²C₁C₂(1 − cos k). Its roots are the physical bands.
[[nodiscard]] poly::Coeffs band_quartic(const CircuitParams& params, double k);

/// ∂/∂k of band_quartic at fixed ω.
[[nodiscard]] Complex band_quartic_dk(const CircuitParams& params, double k, Complex omega);

struct FrequencyRoots {
    double k = 0.0;
    std::vector<Complex> roots;           // all finite roots, with multiplicity
    std::vector<Complex> pole_roots;      // the Λ = ∞ roots i/(RᵢCᵢ), one per Rᵢ > 0
    std::vector<Complex> physical_roots;  // remaining roots, tolerant (Re, Im) order
    int infinite_roots = 0;               // degree lost relative to 6 − #poles (1 at k = 0)
};

[[nodiscard]] FrequencyRoots natural_frequencies(const CircuitParams& params, double k);

/// Tolerant lexicographic (Re, Im) ordering used for every root listing.
[[nodiscard]] bool root_order_less(Complex a, Complex b) noexcept;

/// Open Brillouin-zone grid k_j = 2πj/n_k, j = 1 … n_k − 1. k = 0 ≡ 2π is
/// excluded because one band runs to ω = ∞ there.
[[nodiscard]] std::vector<double> band_k_grid(int n_k);

struct BandSet {
    std::vector<double> k_grid;
    std::array<std::vector<Complex>, kBranchCount> branches;
    std::array<double, kBranchCount> continuity_residual{};
    /// Branch whose first sample continues branch j across the k = 0 seam;
    /// identity for branches that close on themselves.
    std::array<int, kBranchCount> end_permutation{};
    /// Grid points where two candidates were mirror images ω, −ω̄ at equal
    /// distance (imaginary-axis collision); resolved by a fixed convention.
    std::vector<double> mirror_ties;

    [[nodiscard]] bool closed(int branch) const { return end_permutation[branch] == branch; }
};

[[nodiscard]] BandSet band_trace(const CircuitParams& params, int n_k,
                                 Execution exec = Execution::Parallel);

/// Λ(ω(k)) along every branch.
[[nodiscard]] std::array<std::vector<Complex>, kBranchCount> lambda_spectrum(const CircuitParams& params,
                                                                              const BandSet& band);

struct BulkGap {
    double delta = 0.0;  // min_k |Λ(ω(k))|
    [[nodiscard]] double gap() const noexcept { return 2.0 * delta; }
};

[[nodiscard]] BulkGap bulk_gap(const CircuitParams& params, std::span<const Complex> omega_branch);

/// Natural frequency of `branch` at an arbitrary k: the root nearest to the
/// linear interpolation of the tracked samples.
[[nodiscard]] Complex branch_frequency_at(const CircuitParams& params, const BandSet& band, int branch,
                                          double k);

enum class StateLabel { Edge, Skin, Bulk };
[[nodiscard]] std::string_view to_string(StateLabel label) noexcept;

struct Localization {
    double ipr = 0.0;
    double left_weight = 0.0;   // Σ|ψ|² over the first 10 % of sites
    double right_weight = 0.0;  // Σ|ψ|² over the last 10 % of sites
};

struct ChainSpectrum {
    Eigen::VectorXcd eigenvalues;
    Eigen::MatrixXcd eigenvectors;  // unit-norm columns
    std::vector<Localization> localization;
    std::vector<StateLabel> labels;
    double max_residual = 0.0;

    [[nodiscard]] int size() const noexcept { return static_cast<int>(eigenvalues.size()); }
};

/// Dense non-Hermitian eigendecomposition with localisation metrics. States
/// are ordered by |λ| (ties by Re, then Im); every vector is unit-norm with its
/// largest component real and positive.
[[nodiscard]] ChainSpectrum eigendecompose(const Eigen::MatrixXcd& matrix);
[[nodiscard]] ChainSpectrum eigendecompose(const RealSpaceMatrix& matrix);

[[nodiscard]] Localization localization_of(const Eigen::Ref<const Eigen::VectorXcd>& psi);

}  // namespace nhssh
