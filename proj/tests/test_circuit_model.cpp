#include "nhssh/circuit_model.hpp"
#include "nhssh/errors.hpp"

#include <doctest.h>

#include <Eigen/Eigenvalues>

#include <random>

using namespace nhssh;

namespace {

const CircuitParams kRow4{0.05, 1.41, 0.03, 1.34, 1.17, 8, Boundary::Periodic};

}  // namespace

TEST_CASE("lossless hoppings are real and negative") {
    CircuitParams p{0.0, 0.0, 0.7, 0.2, 1.0, 4, Boundary::Open};
    const auto h = hoppings(p, Complex(1.3, 0.0));
    CHECK(h.v == Complex(-0.7, 0.0));
    CHECK(h.w == Complex(-0.2, 0.0));
    CHECK(h.phase_v() == doctest::Approx(0.0));
}

TEST_CASE("hopping magnitude and phase follow the RC factor") {
    const double omega = 2.0;
    const auto h = hoppings(kRow4, omega);
    const double rc1 = kRow4.r1 * kRow4.c1;
    CHECK(h.magnitude_v() == doctest::Approx(kRow4.c1 / std::sqrt(1.0 + rc1 * rc1 * omega * omega)));
    CHECK(h.phase_v() == doctest::Approx(-std::atan(rc1 * omega)));
    CHECK(h.phase_v() <= 0.0);
    CHECK(h.phase_v() > -kPi / 2);
}

TEST_CASE("frequencies on the eta pole or at zero are refused") {
    CHECK_THROWS_AS((void)hoppings(kRow4, Complex(0.0, 0.0)), Error);
    try {
        (void)hoppings(kRow4, Complex(0.0, 1.0 / (kRow4.r1 * kRow4.c1)));
        FAIL("expected DegenerateEta");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::DegenerateEta);
    }
}

TEST_CASE("validate names the offending field") {
    CircuitParams p = kRow4;
    p.l = -1.0;
    try {
        p.validate();
        FAIL("expected InvalidParams");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::InvalidParams);
        CHECK(std::string(e.what()).find("circuit.l") != std::string::npos);
    }
}

TEST_CASE("Bloch admittance has sublattice symmetry for any complex frequency") {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> u(0.1, 3.0);
    for (int i = 0; i < 200; ++i) {
        CircuitParams p{u(rng), u(rng), u(rng), u(rng), u(rng), 4, Boundary::Periodic};
        const auto b = bloch_admittance(p, Complex(u(rng), u(rng) - 1.5), u(rng));
        CHECK(b.sublattice_residual() < 1e-14);
    }
}

TEST_CASE("dagger chiral form holds only in the Hermitian limit") {
    CircuitParams lossless{0.0, 0.0, 0.7, 0.2, 1.0, 4, Boundary::Periodic};
    // The Hermitian admittance is off-diagonal Hermitian, so σ_z 𝒴† σ_z = −𝒴.
    CHECK(bloch_admittance(lossless, 1.1, 0.4).chiral_dagger_residual() < 1e-14);
    CHECK(bloch_admittance(kRow4, Complex(0.5, 0.3), 0.4).chiral_dagger_residual() > 1e-3);
}

TEST_CASE("Pauli components reproduce the matrix") {
    const auto b = bloch_admittance(kRow4, Complex(0.7, 0.2), 1.1);
    const Complex i{0.0, 1.0};
    CHECK(std::abs(b.entries(0, 1) - (b.y_x - i * b.y_y)) < 1e-14);
    CHECK(std::abs(b.entries(1, 0) - (b.y_x + i * b.y_y)) < 1e-14);
}

TEST_CASE("Laplacian is singular exactly when Lambda is an admittance eigenvalue") {
    const Complex omega(0.9, 0.2);
    const double k = 0.8;
    const auto y = bloch_admittance(kRow4, omega, k);
    const auto lap = bloch_laplacian(kRow4, omega, k);
    const Complex lambda = lambda_diag(kRow4, omega);
    const Complex det_y = y.entries.determinant();
    // det ℒ = (−iω)²(Λ² − y_x² − y_y²)
    const Complex expect = std::pow(Complex(0.0, -1.0) * omega, 2) * (lambda * lambda + det_y);
    CHECK(std::abs(lap.entries.determinant() - expect) < 1e-12 * std::abs(expect));
}

TEST_CASE("real-space chain matches the Bloch spectrum under periodic boundaries") {
    const Complex v(-0.4, 0.1);
    const Complex w(-0.9, 0.05);
    const int n = 6;
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(chain_matrix(v, w, n, Boundary::Periodic));
    for (int m = 0; m < n; ++m) {
        const double k = kTwoPi * m / n;
        const Complex e = std::sqrt((v + w * std::exp(Complex(0, -k))) * (v + w * std::exp(Complex(0, k))));
        for (const Complex target : {e, -e}) {
            double best = 1e300;
            for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) best = std::min(best, std::abs(es.eigenvalues()[i] - target));
            CHECK(best < 1e-10);
        }
    }
}

TEST_CASE("open chain has one bond fewer than the periodic ring") {
    const auto open = chain_matrix(-1.0, -2.0, 3, Boundary::Open);
    const auto ring = chain_matrix(-1.0, -2.0, 3, Boundary::Periodic);
    CHECK(open.rows() == 6);
    CHECK((open.array() != 0.0).count() == 10);
    CHECK((ring.array() != 0.0).count() == 12);
}
