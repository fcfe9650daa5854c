#include "nhssh/polynomial.hpp"

#include "nhssh/errors.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>

namespace nhssh::poly {

Coeffs multiply(std::span<const Complex> a, std::span<const Complex> b) {
    if (a.empty() || b.empty()) return {};
    Coeffs out(a.size() + b.size() - 1, Complex{});
    for (std::size_t i = 0; i < a.size(); ++i) {
        for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
    }
    return out;
}

Coeffs add(std::span<const Complex> a, std::span<const Complex> b) {
    Coeffs out(std::max(a.size(), b.size()), Complex{});
    for (std::size_t i = 0; i < a.size(); ++i) out[i] += a[i];
    for (std::size_t i = 0; i < b.size(); ++i) out[i] += b[i];
    return out;
}

Coeffs scale(std::span<const Complex> a, Complex s) {
    Coeffs out(a.begin(), a.end());
    for (auto& c : out) c *= s;
    return out;
}

Coeffs derivative(std::span<const Complex> a) {
    if (a.size() <= 1) return {Complex{}};
    Coeffs out(a.size() - 1);
    for (std::size_t i = 1; i < a.size(); ++i) out[i - 1] = a[i] * static_cast<double>(i);
    return out;
}

Complex eval(std::span<const Complex> a, Complex x) {
    Complex acc{};
    for (auto it = a.rbegin(); it != a.rend(); ++it) acc = acc * x + *it;
    return acc;
}

double abs_eval(std::span<const Complex> a, Complex x) {
    const double r = std::abs(x);
    double acc = 0.0;
    for (auto it = a.rbegin(); it != a.rend(); ++it) acc = acc * r + std::abs(*it);
    return acc;
}

int effective_degree(std::span<const Complex> a, double rel_tol) {
    double biggest = 0.0;
    for (const auto& c : a) biggest = std::max(biggest, std::abs(c));
    int deg = static_cast<int>(a.size()) - 1;
    while (deg > 0 && std::abs(a[static_cast<std::size_t>(deg)]) <= rel_tol * biggest) --deg;
    return deg;
}

std::vector<Complex> roots(std::span<const Complex> a, int degree, int polish_steps) {
    if (degree < 1) return {};
    const auto d = static_cast<Eigen::Index>(degree);
    const Complex lead = a[static_cast<std::size_t>(degree)];
    Eigen::MatrixXcd companion = Eigen::MatrixXcd::Zero(d, d);
    for (Eigen::Index i = 1; i < d; ++i) companion(i, i - 1) = 1.0;
    for (Eigen::Index i = 0; i < d; ++i) companion(i, d - 1) = -a[static_cast<std::size_t>(i)] / lead;

    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(companion, /*computeEigenvectors=*/false);
    if (solver.info() != Eigen::Success) {
        throw Error(ErrorKind::ConvergenceFailure, "companion-matrix eigensolver did not converge");
    }
    std::span<const Complex> p = a.first(static_cast<std::size_t>(degree) + 1);
    const Coeffs dp = derivative(p);
    std::vector<Complex> out(static_cast<std::size_t>(d));
    for (Eigen::Index i = 0; i < d; ++i) {
        Complex z = solver.eigenvalues()(i);
        for (int step = 0; step < polish_steps; ++step) {
            const Complex pz = eval(p, z);
            const Complex dz = eval(dp, z);
            if (dz == Complex{}) break;
            const Complex candidate = z - pz / dz;
            if (std::abs(eval(p, candidate)) < std::abs(pz)) z = candidate;
            else break;
        }
        out[static_cast<std::size_t>(i)] = z;
    }
    return out;
}

}  // namespace nhssh::poly
