#pragma once

// Circuit parameterisation of the resistive SSH chain and every
// frequency-dependent matrix derived from it.
//
// Conventions used throughout the library:
//   * Node ordering is interleaved: A1, B1, A2, B2, ... (index 2n is A of
//     cell n, 2n+1 is B of cell n, zero-based).
//   * Admittances use Y_RC = iωC / (1 + iωRC). A passive mode therefore
//     has Im ω > 0 and evolves as e^{iωt}; the state-space eigenvalue of
//     a natural frequency ω is s = iω.

#include <Eigen/Dense>

#include <complex>
#include <string>
#include <string_view>
#include <utility>

namespace nhssh {

using Complex = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

enum class Boundary { Periodic, Open };

[[nodiscard]] std::string_view to_string(Boundary b) noexcept;
[[nodiscard]] Boundary parse_boundary(std::string_view text);

struct CircuitParams {
    double r1 = 0.0;  // Ω, intracell resistor
    double r2 = 0.0;  // Ω, intercell resistor
    double c1 = 1.0;  // F, intracell capacitor
    double c2 = 1.0;  // F, intercell capacitor
    double l = 1.0;   // H, grounded inductor at every node
    int n_cells = 2;
    Boundary boundary = Boundary::Open;

    /// Throws Error(InvalidParams) naming the offending field.
    void validate(int min_cells = 2) const;

    [[nodiscard]] int n_nodes() const noexcept { return 2 * n_cells; }
    [[nodiscard]] bool lossless() const noexcept { return r1 == 0.0 && r2 == 0.0; }
};

/// Intracell (v) and intercell (w) hoppings at a complex frequency.
struct HoppingPair {
    Complex v;
    Complex w;
    Complex eta1;  // iωR₁C₁ + 1
    Complex eta2;  // iωR₂C₂ + 1

    [[nodiscard]] double magnitude_v() const noexcept { return std::abs(v); }
    [[nodiscard]] double magnitude_w() const noexcept { return std::abs(w); }
    // Phase of the hopping amplitude C/η = −v relative to the lossless
    // value; equals −arctan(ωRC) for real ω.
    [[nodiscard]] double phase_v() const noexcept { return std::arg(-v); }
    [[nodiscard]] double phase_w() const noexcept { return std::arg(-w); }
};

[[nodiscard]] HoppingPair hoppings(const CircuitParams& params, Complex omega);

/// Λ(ω) = 1/(ω²L) − C₁/η₁ − C₂/η₂, the uniform node admittance.
[[nodiscard]] Complex lambda_diag(const CircuitParams& params, Complex omega);

/// 2×2 Bloch matrix together with the Pauli decomposition 𝒴 = y_x σ_x + y_y σ_y.
struct BlochMatrix {
    Eigen::Matrix2cd entries;
    Complex omega;
    double k = 0.0;
    Complex y_x;
    Complex y_y;

    /// max |σ_z M σ_z + M| / max|M|  (sublattice form; holds for every ω).
    [[nodiscard]] double sublattice_residual() const;
    /// max |σ_z M† σ_z + M| / max|M|  (dagger form; vanishes only when M is Hermitian).
    [[nodiscard]] double chiral_dagger_residual() const;
};

/// Admittance matrix 𝒴(k): zero diagonal, off-diagonals v + w e^{∓ik}.
[[nodiscard]] BlochMatrix bloch_admittance(const CircuitParams& params, Complex omega, double k);

/// Circuit Laplacian ℒ(k) = −iω[Λ(ω)·I − 𝒴(k)] relating node currents to
/// node voltages, I = ℒV. Its null vectors are the eigenvectors of 𝒴 with
/// eigenvalue Λ.
[[nodiscard]] BlochMatrix bloch_laplacian(const CircuitParams& params, Complex omega, double k);

struct RealSpaceMatrix {
    Eigen::MatrixXcd entries;
    CircuitParams params;
    Complex omega;
};

/// 2N×2N hopping matrix of the finite chain (zero diagonal). Periodic
/// boundaries add the wraparound w bond between B_N and A_1.
[[nodiscard]] RealSpaceMatrix real_space_matrix(const CircuitParams& params, Complex omega);

/// Same assembly from explicit hoppings; used for synthetic chains in tests
/// and for dimerised limits that no finite circuit reaches.
[[nodiscard]] Eigen::MatrixXcd chain_matrix(Complex v, Complex w, int n_cells, Boundary boundary);

/// Normalised bands ω±²/ω₀² = η + η⁻¹ ± √(η² + η⁻² + 2cos k) of the lossless
/// LC chain with η = √(l1/l2). Reference oracle for the R → 0 limit.
struct HermitianBands {
    double upper;  // ω₊²/ω₀²
    double lower;  // ω₋²/ω₀²
    double omega0;  // 1/(c·√(l1·l2))
};
[[nodiscard]] HermitianBands hermitian_reference_bands(double l1, double l2, double c, double k);

}  // namespace nhssh
