#include "nhssh/errors.hpp"
#include "nhssh/topology.hpp"

#include <doctest.h>

#include <algorithm>

using namespace nhssh;

namespace {

const CircuitParams kRow3{1.45, 0.14, 0.22, 0.54, 1.11, 8, Boundary::Periodic};
const CircuitParams kRow4{0.05, 1.41, 0.03, 1.34, 1.17, 40, Boundary::Open};

std::vector<PlanePoint> circle(double cx, double cy, double r, int n, int turns = 1) {
    std::vector<PlanePoint> pts;
    for (int i = 0; i < n; ++i) {
        const double t = turns * kTwoPi * i / n;
        pts.push_back({cx + r * std::cos(t), cy + r * std::sin(t)});
    }
    return pts;
}

std::vector<int> multiset(const WindingReport& rep) {
    std::vector<int> m;
    for (const auto& b : rep.branches) {
        REQUIRE(b.winding.has_value());
        m.push_back(b.winding->mu);
    }
    std::sort(m.begin(), m.end());
    return m;
}

}  // namespace

TEST_CASE("polygon and crossing windings agree on synthetic loops") {
    CHECK(polygon_winding(circle(0.0, 0.0, 1.0, 64), 64).mu == 1);
    CHECK(polygon_winding(circle(3.0, 0.0, 1.0, 64), 64).mu == 0);
    CHECK(polygon_winding(circle(0.0, 0.0, 1.0, 256, 2), 256).mu == 2);
    auto cw = circle(0.0, 0.0, 1.0, 64);
    std::reverse(cw.begin(), cw.end());
    CHECK(polygon_winding(cw, 64).mu == -1);
    CHECK(crossing_count_winding(cw) == -1);
    CHECK(crossing_count_winding(circle(0.2, 0.1, 1.0, 64, 2)) == 2);
}

TEST_CASE("a curve through the origin is refused") {
    auto pts = circle(1.0, 0.0, 1.0, 64);  // passes through (0, 0)
    CHECK_THROWS_AS((void)polygon_winding(pts, 64), Error);
}

TEST_CASE("table row 3 windings, with both oracles") {
    const auto rep = winding_report(kRow3, 256);
    CHECK(multiset(rep) == std::vector<int>{0, 0, 1, 1});
    for (const auto& b : rep.branches) {
        CHECK(b.winding->residual < 1e-3);
        CHECK(b.crossings == b.winding->mu);
        CHECK(std::abs(b.quadrature - b.winding->mu) < 1e-3);
    }
}

TEST_CASE("lossless chain with C1 > C2 is trivial on every branch") {
    CircuitParams p{0.0, 0.0, 1.2, 0.4, 1.0, 8, Boundary::Periodic};
    CHECK(multiset(winding_report(p, 256)) == std::vector<int>{0, 0, 0, 0});
}

TEST_CASE("lossless chain with C1 < C2 winds once on every branch") {
    CircuitParams p{0.0, 0.0, 0.4, 1.2, 1.0, 8, Boundary::Periodic};
    CHECK(multiset(winding_report(p, 256)) == std::vector<int>{1, 1, 1, 1});
}

TEST_CASE("windings are stable under grid doubling") {
    const auto a = winding_report(kRow4, 256, 256, false);
    const auto b = winding_report(kRow4, 512, 512, false);
    for (int i = 0; i < kBranchCount; ++i) CHECK(a.branches[i].winding->mu == b.branches[i].winding->mu);
}

TEST_CASE("chain gap is twice the hopping mismatch") {
    HoppingPair h{Complex(-0.3, 0.0), Complex(-1.0, 0.0), 1.0, 1.0};
    CHECK(chain_gap(h) == doctest::Approx(1.4));
}

TEST_CASE("nonreciprocal chain shows a point gap, Hermitian one does not") {
    // Hatano–Nelson-like SSH: asymmetric intracell hopping.
    const BlochFunction hn = [](double k) {
        Eigen::Matrix2cd m;
        m << 0.0, 0.8 + std::exp(Complex(0, -k)), 0.2 + std::exp(Complex(0, k)), 0.0;
        return m;
    };
    const auto scan = skin_scan(hn, 40, 256, Execution::Serial);
    CHECK(scan.present);
    REQUIRE(scan.witness.has_value());
    // The witness is re-checkable on its own.
    CHECK(point_gap_winding(hn, *scan.witness, 256).w == *scan.witness_w);

    CircuitParams lossless{0.0, 0.0, 0.5, 1.0, 1.0, 8, Boundary::Open};
    CHECK_FALSE(skin_effect_present(lossless, 1.2, 40, 256).present);
}

TEST_CASE("point-gap winding refuses a base point on the trajectory") {
    const BlochFunction f = [](double k) {
        Eigen::Matrix2cd m;
        m << 0.0, 1.0, std::exp(Complex(0, k)), 0.0;
        return m;
    };
    // det[H − E] = E² − e^{ik}; E = 1 lies on it at k = 0.
    CHECK_THROWS_AS((void)point_gap_winding(f, 1.0, 64), Error);
    CHECK(point_gap_winding(f, 0.0, 64).w == 1);
}

TEST_CASE("reciprocal circuit chains show no skin effect") {
    const auto band = band_trace(kRow4, 256);
    for (int b = 0; b < kBranchCount; ++b) {
        const Complex omega = branch_frequency_at(kRow4, band, b, kPi / 2);
        CHECK_FALSE(skin_effect_present(kRow4, omega, 30, 256).present);
        CHECK(std::abs(center_of_mass_shift(kRow4, omega, 40)) < 1e-2);
    }
}

TEST_CASE("centre-of-mass oracle sees a nonreciprocal chain pile up") {
    const int n = 30;
    Eigen::MatrixXcd open = chain_matrix(-0.5, -1.0, n, Boundary::Open);
    Eigen::MatrixXcd ring = chain_matrix(-0.5, -1.0, n, Boundary::Periodic);
    for (int c = 0; c < n; ++c) {  // intracell hopping is stronger to the right
        open(2 * c + 1, 2 * c) *= 1.6;
        open(2 * c, 2 * c + 1) /= 1.6;
        ring(2 * c + 1, 2 * c) *= 1.6;
        ring(2 * c, 2 * c + 1) /= 1.6;
    }
    CHECK(std::abs(center_of_mass_shift(open, ring)) > 0.05);
}

TEST_CASE("SSH chain in the topological phase has two edge states") {
    const auto spectrum = eigendecompose(chain_matrix(-0.3, -1.0, 40, Boundary::Open));
    const double gap = chain_gap({Complex(-0.3), Complex(-1.0), 1.0, 1.0});
    const auto labelled = classify_states(spectrum, gap);
    CHECK(count_labels(labelled).edge == 2);
    const auto trivial = classify_states(eigendecompose(chain_matrix(-1.0, -0.3, 40, Boundary::Open)), gap);
    CHECK(count_labels(trivial).edge == 0);
    CHECK_THROWS_AS((void)classify_states(spectrum, 0.0), Error);
}

TEST_CASE("zero perturbation leaves every profile unchanged") {
    const auto m = real_space_matrix(kRow4, Complex(5.3, 0.33));
    const auto cells = center_cells(kRow4.n_cells);
    CHECK(cells == std::vector<int>{19, 20, 21});
    const auto same = perturb_chain(m, cells, 0.0);
    CHECK(same.entries == m.entries);
    CHECK_THROWS_AS((void)perturb_chain(m, cells, 0.3), Error);

    const double gap = chain_gap(hoppings(kRow4, Complex(5.3, 0.33)));
    const auto base = classify_states(eigendecompose(m), gap);
    const auto rep = compare_perturbation(base, base, gap);
    CHECK(rep.edge_state_drift < 1e-12);
    CHECK(rep.bulk_state_drift < 1e-12);
}

TEST_CASE("centre perturbation moves bulk states but not edge states") {
    const auto m = real_space_matrix(kRow4, Complex(5.3, 0.33));
    const double gap = chain_gap(hoppings(kRow4, Complex(5.3, 0.33)));
    const auto base = classify_states(eigendecompose(m), gap);
    const auto pert = classify_states(eigendecompose(perturb_chain(m, center_cells(kRow4.n_cells), 0.05)), gap);
    const auto rep = compare_perturbation(base, pert, gap);
    CHECK(rep.edge_partners_in_gap);
    CHECK(rep.edge_state_drift < 1e-6);
    CHECK(rep.bulk_state_drift > 10.0 * rep.edge_state_drift);
}

TEST_CASE("windings agree across grids and with the quadrature") {
    // Branch 1 here grazes a pole and swings across the x axis right next to
    // k = 0; a coarse polygon without local refinement gets both wrong.
    const CircuitParams p{0.614046, 0.311718, 0.913726, 1.93547, 1.70521, 2, Boundary::Periodic};
    const auto coarse = band_trace(p, 256);
    const auto fine = band_trace(p, 4096);
    for (int b = 0; b < kBranchCount; ++b) {
        const auto wc = winding_number(p, coarse, b);
        CHECK(wc.mu == winding_number(p, fine, b).mu);
        CHECK(wc.max_turn <= kPi / 4 + 1e-12);
        CHECK(std::abs(quadrature_winding(p, coarse, b) - wc.mu) < 1e-2);
        CHECK(crossing_count_winding(resolved_projection(p, coarse, b).points) == wc.mu);
    }
}
