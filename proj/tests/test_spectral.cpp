#include "nhssh/errors.hpp"
#include "nhssh/spectral.hpp"

#include <doctest.h>

#include <random>

using namespace nhssh;

namespace {

const CircuitParams kFig3{3.2, 2.6, 3.4, 3.1, 2.7, 8, Boundary::Periodic};
const CircuitParams kRow3{1.45, 0.14, 0.22, 0.54, 1.11, 8, Boundary::Periodic};

double nearest(const std::vector<Complex>& roots, Complex z) {
    double best = 1e300;
    for (const auto& r : roots) best = std::min(best, std::abs(r - z));
    return best;
}

}  // namespace

TEST_CASE("natural frequencies make the Laplacian singular") {
    for (double k : {0.3, 1.7, 3.0, 5.2}) {
        const auto fr = natural_frequencies(kFig3, k);
        REQUIRE(fr.physical_roots.size() == 4);
        for (const auto& w : fr.physical_roots) {
            const auto lap = bloch_laplacian(kFig3, w, k);
            CHECK(std::abs(lap.entries.determinant()) < 1e-8 * std::pow(lap.entries.cwiseAbs().maxCoeff(), 2));
        }
    }
}

TEST_CASE("pole roots sit at i/(R_i C_i) for every k") {
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> u(0.05, 3.0);
    std::uniform_real_distribution<double> kk(0.01, kTwoPi - 0.01);
    for (int t = 0; t < 100; ++t) {
        CircuitParams p{u(rng), u(rng), u(rng), u(rng), u(rng), 4, Boundary::Periodic};
        const auto fr = natural_frequencies(p, kk(rng));
        REQUIRE(fr.pole_roots.size() == 2);
        for (double rc : {p.r1 * p.c1, p.r2 * p.c2}) {
            const Complex pole(0.0, 1.0 / rc);
            CHECK(nearest(fr.pole_roots, pole) < 1e-8 * std::abs(pole));
        }
    }
}

TEST_CASE("passive roots decay under the e^{iwt} convention") {
    for (double k : {0.5, 2.0, 4.0}) {
        for (const auto& w : natural_frequencies(kRow3, k).physical_roots) CHECK(w.imag() > 0.0);
    }
}

TEST_CASE("Hermitian limit reproduces the closed-form LC bands") {
    CircuitParams p{0.0, 0.0, 0.9, 0.35, 1.3, 4, Boundary::Periodic};
    for (const double k : band_k_grid(256)) {
        const auto fr = natural_frequencies(p, k);
        REQUIRE(fr.physical_roots.size() == 4);
        // Capacitive hoppings are the dual of Zhao's inductive chain: ω²L√(C₁C₂) = 1/band.
        const auto ref = hermitian_reference_bands(p.c1, p.c2, p.l, k);
        for (double band : {ref.upper, ref.lower}) {
            const double omega = std::sqrt(ref.omega0 / band);
            CHECK(nearest(fr.physical_roots, omega) < 1e-9 * omega);
            CHECK(nearest(fr.physical_roots, -omega) < 1e-9 * omega);
        }
    }
}

TEST_CASE("the sextic leading coefficient degenerates at k = 0 and R = 0") {
    CHECK_THROWS_AS((void)band_polynomial_coefficients(kFig3, 0.0), Error);
    CircuitParams lossless = kFig3;
    lossless.r1 = lossless.r2 = 0.0;
    CHECK_THROWS_AS((void)band_polynomial_coefficients(lossless, 1.0), Error);
    CHECK_NOTHROW((void)band_polynomial_coefficients(kFig3, 1.0));
    CHECK(natural_frequencies(kFig3, 0.0).infinite_roots == 1);
}

TEST_CASE("quartic times the pole factor is the sextic") {
    const double k = 1.3;
    const auto sextic = band_polynomial_unchecked(kFig3, k);
    const auto quartic = band_quartic(kFig3, k);
    const Complex i{0.0, 1.0};
    const poly::Coeffs eta1{1.0, i * kFig3.r1 * kFig3.c1};
    const poly::Coeffs eta2{1.0, i * kFig3.r2 * kFig3.c2};
    const auto product = poly::multiply(poly::multiply(eta1, eta2), quartic);
    REQUIRE(product.size() == sextic.size());
    for (std::size_t j = 0; j < product.size(); ++j) CHECK(std::abs(product[j] - sextic[j]) < 1e-12 * std::max(1.0, std::abs(sextic[j])));
}

TEST_CASE("band grid is open at k = 0 and nests under doubling") {
    const auto a = band_k_grid(64);
    const auto b = band_k_grid(128);
    CHECK(a.size() == 63);
    CHECK(a.front() > 0.0);
    CHECK(a.back() < kTwoPi);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == doctest::Approx(b[2 * i + 1]).epsilon(1e-15));
}

TEST_CASE("tracked branches are continuous and close on themselves") {
    const auto band = band_trace(kRow3, 256);
    for (int b = 0; b < kBranchCount; ++b) {
        CHECK(band.closed(b));
        CHECK(band.branches[b].size() == 255);
    }
}

TEST_CASE("serial and parallel band traces are identical") {
    const auto s = band_trace(kFig3, 128, Execution::Serial);
    const auto p = band_trace(kFig3, 128, Execution::Parallel);
    for (int b = 0; b < kBranchCount; ++b) CHECK(s.branches[b] == p.branches[b]);
}

TEST_CASE("branch_frequency_at returns a root at the requested k") {
    const auto band = band_trace(kRow3, 256);
    const double k = 1.0;
    const auto roots = natural_frequencies(kRow3, k).physical_roots;
    for (int b = 0; b < kBranchCount; ++b) CHECK(nearest(roots, branch_frequency_at(kRow3, band, b, k)) < 1e-12);
}

TEST_CASE("Lambda vanishes nowhere on a gapped branch") {
    const auto band = band_trace(kRow3, 256);
    const auto lambda = lambda_spectrum(kRow3, band);
    for (int b = 0; b < kBranchCount; ++b) {
        const auto gap = bulk_gap(kRow3, band.branches[b]);
        CHECK(gap.gap() == doctest::Approx(2.0 * gap.delta));
        double min_abs = 1e300;
        for (const auto& l : lambda[b]) min_abs = std::min(min_abs, std::abs(l));
        CHECK(gap.delta == doctest::Approx(min_abs));
    }
}

TEST_CASE("eigendecomposition is ordered, normalised and phase fixed") {
    const auto m = chain_matrix(Complex(-0.4, 0.1), Complex(-1.0, 0.05), 20, Boundary::Open);
    const auto s = eigendecompose(m);
    CHECK(s.size() == 40);
    CHECK(s.max_residual < 1e-10);
    for (int i = 0; i < s.size(); ++i) {
        CHECK(s.eigenvectors.col(i).norm() == doctest::Approx(1.0));
        Eigen::Index at = 0;
        s.eigenvectors.col(i).cwiseAbs().maxCoeff(&at);
        CHECK(std::abs(s.eigenvectors(at, i).imag()) < 1e-12);
        CHECK(s.eigenvectors(at, i).real() > 0.0);
        if (i > 0) CHECK(std::abs(s.eigenvalues[i - 1]) <= std::abs(s.eigenvalues[i]) + 1e-12);
    }
}
