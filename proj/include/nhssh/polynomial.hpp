#pragma once

// Dense complex polynomials stored lowest power first.

#include <complex>
#include <span>
#include <vector>

namespace nhssh::poly {

using Complex = std::complex<double>;
using Coeffs = std::vector<Complex>;

[[nodiscard]] Coeffs multiply(std::span<const Complex> a, std::span<const Complex> b);
[[nodiscard]] Coeffs add(std::span<const Complex> a, std::span<const Complex> b);
[[nodiscard]] Coeffs scale(std::span<const Complex> a, Complex s);
[[nodiscard]] Coeffs derivative(std::span<const Complex> a);

/// Horner evaluation.
[[nodiscard]] Complex eval(std::span<const Complex> a, Complex x);

/// Backward-error denominator Σ|a_i||x|^i.
[[nodiscard]] double abs_eval(std::span<const Complex> a, Complex x);

/// Degree after dropping leading coefficients below rel_tol·max|a_i|.
[[nodiscard]] int effective_degree(std::span<const Complex> a, double rel_tol);

/// All roots of the polynomial truncated to `degree`, from the eigenvalues of
/// the companion matrix of its monic form, followed by `polish_steps` Newton
/// steps that are accepted only when they reduce |p|.
[[nodiscard]] std::vector<Complex> roots(std::span<const Complex> a, int degree, int polish_steps = 2);

}  // namespace nhssh::poly
