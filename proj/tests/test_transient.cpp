#include "nhssh/errors.hpp"
#include "nhssh/spectral.hpp"
#include "nhssh/transient.hpp"

#include <doctest.h>

#include <Eigen/Eigenvalues>

#include <random>

using namespace nhssh;

namespace {

const CircuitParams kSmall{0.4, 0.9, 0.5, 1.1, 1.3, 6, Boundary::Open};

TransientSetup small_setup(double observe = 25.0) {
    const auto band = band_trace(kSmall, 128);
    return make_transient_setup(kSmall, branch_frequency_at(kSmall, band, 2, kPi / 2), observe);
}

}  // namespace

TEST_CASE("single cell state space has dimension 3 and is passive") {
    CircuitParams p{1.0, 1.0, 1.0, 1.0, 1.0, 1, Boundary::Open};
    const auto ss = assemble_state_space(make_transient_setup(p, Complex(1.0, 0.1)));
    CHECK(ss.dim() == 3);
    Eigen::EigenSolver<Eigen::MatrixXd> es(ss.a);
    for (Eigen::Index i = 0; i < 3; ++i) CHECK(es.eigenvalues()[i].real() <= 1e-12);
}

TEST_CASE("state-matrix eigenvalues are i·omega of the periodic natural frequencies") {
    CircuitParams p{0.05, 1.41, 0.03, 1.34, 1.17, 8, Boundary::Periodic};
    const auto ss = assemble_state_space(make_transient_setup(p, Complex(5.3, 0.33)));
    CHECK(ss.dim() == 32);
    std::vector<Complex> expected;
    for (int m = 0; m < 8; ++m) {
        for (const auto& w : natural_frequencies(p, kTwoPi * m / 8).physical_roots) expected.push_back(Complex(0, 1) * w);
    }
    CHECK(expected.size() == 31);  // one band is at infinity for k = 0
    Eigen::EigenSolver<Eigen::MatrixXd> es(ss.a);
    int zero = 0;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
        const Complex s = es.eigenvalues()[i];
        if (std::abs(s) < 1e-9) {
            ++zero;  // common mode fixed by the ΣV = 0 gauge
            continue;
        }
        double best = 1e300;
        for (const auto& e : expected) best = std::min(best, std::abs(e - s) / std::abs(s));
        CHECK(best < 1e-6);
    }
    CHECK(zero == 1);
}

TEST_CASE("sources act only before the switch opens") {
    auto s = small_setup();
    const auto ss = assemble_state_space(s);
    CHECK(ss.b_driven.cols() == 2);
    const double t = 0.25 * s.drive_period();
    const Eigen::VectorXd before = ss.source_term(t);
    CHECK(before.norm() > 0.0);
    for (int j = 0; j < ss.n_nodes; ++j) {
        const bool src = std::find(s.source_nodes.begin(), s.source_nodes.end(), j) != s.source_nodes.end();
        if (src) CHECK(ss.v_map_source.row(j).norm() > 0.0);
    }
    CHECK(ss.source_term(s.switch_open_time).isZero(0.0));
    CHECK(ss.source_term(s.switch_open_time + 1.0).isZero(0.0));
}

TEST_CASE("default source nodes sit at a third and two thirds") {
    CHECK(default_source_nodes(520) == std::vector<int>{173, 346});
    CHECK(default_source_nodes(12) == std::vector<int>{4, 7});
}

TEST_CASE("zero source and zero state give an identically zero trace") {
    auto s = small_setup(5.0);
    s.source_amplitude = 0.0;
    const auto tr = simulate(s);
    CHECK(tr.ground_currents.isZero(0.0));
    CHECK(tr.node_voltages.isZero(0.0));
}

TEST_CASE("RL loop current decays as exp(-R t / 2L)") {
    // A huge capacitor is a short: the two inductors and R₁ form one loop.
    CircuitParams p{0.5, 1.0, 1e9, 1.0, 0.8, 1, Boundary::Open};
    TransientSetup s;
    s.params = p;
    s.t_end = 3.0;
    s.dt = 1e-3;
    s.max_samples = 301;
    s.initial_state = Eigen::Vector3d(0.0, 1.0, -1.0);
    const auto tr = simulate(s);
    for (std::size_t i = 0; i < tr.times.size(); i += 50) {
        const double expect = std::exp(-p.r1 * tr.times[i] / (2.0 * p.l));
        CHECK(tr.ground_currents(static_cast<Eigen::Index>(i), 0) == doctest::Approx(expect).epsilon(1e-6));
    }
}

TEST_CASE("stored energy never grows after release") {
    const auto tr = simulate(small_setup());
    const auto release = std::lower_bound(tr.times.begin(), tr.times.end(), tr.setup.switch_open_time) - tr.times.begin();
    for (std::size_t i = static_cast<std::size_t>(release) + 1; i < tr.energy.size(); ++i) {
        CHECK(tr.energy[i] <= tr.energy[i - 1] * (1.0 + 1e-10));
    }
    CHECK(tr.energy.back() < tr.energy[static_cast<std::size_t>(release)]);
}

TEST_CASE("doubling the amplitude doubles the trace") {
    auto s = small_setup(5.0);
    const auto a = simulate(s);
    s.source_amplitude = 2.0;
    const auto b = simulate(s);
    CHECK((b.ground_currents - 2.0 * a.ground_currents).cwiseAbs().maxCoeff() <=
          1e-12 * a.ground_currents.cwiseAbs().maxCoeff());
}

TEST_CASE("trapezoid converges at second order") {
    auto s = small_setup(5.0);
    s.t_end = s.switch_open_time + 2.0 * s.drive_period();
    const auto run = [&](double dt) {
        auto c = s;
        c.dt = dt;
        return simulate(c).final_state;
    };
    const double h = s.dt;
    const auto x1 = run(h);
    const auto x2 = run(h / 2);
    const auto x4 = run(h / 4);
    const double order = std::log2((x1 - x2).norm() / (x2 - x4).norm());
    CHECK(order >= 1.9);
}

TEST_CASE("a step at the invariant bound is rejected by the error estimate") {
    // A fast drive makes the period the binding limit: h = T/20.
    auto s = small_setup(5.0);
    s.drive_frequency = kTwoPi / 0.2;
    s.dt = max_time_step(s.params, s.drive_frequency);
    try {
        (void)simulate(s);
        FAIL("expected StepRejected");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::StepRejected);
    }
}

TEST_CASE("setup invariants are enforced") {
    auto s = small_setup();
    s.dt = 2.0 * max_time_step(s.params, s.drive_frequency);
    CHECK_THROWS_AS(s.validate(), Error);
    s = small_setup();
    s.switch_open_time = 2.0 * s.drive_period();
    CHECK_THROWS_AS(s.validate(), Error);
    s = small_setup();
    s.params.r1 = 0.0;
    try {
        s.validate();
        FAIL("expected LosslessUnsupported");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::LosslessUnsupported);
    }
}

TEST_CASE("ground-current profile is normalised and windowed") {
    const auto tr = simulate(small_setup());
    const auto p = ground_current_profile(tr);
    CHECK(p.normalized.sum() == doctest::Approx(1.0));
    CHECK((p.rms.array() >= 0.0).all());
    CHECK_THROWS_AS((void)ground_current_profile(tr, tr.setup.switch_open_time, tr.times.back()), Error);
    CHECK_THROWS_AS((void)ground_current_profile(tr, p.t_begin, tr.times.back() + 10.0), Error);
    const auto ends = end_mass(p.normalized, 1);
    CHECK(ends.left == doctest::Approx(p.normalized[0] + p.normalized[1]));
}

TEST_CASE("damped fit recovers a synthetic oscillation") {
    std::mt19937 rng(3);
    std::normal_distribution<double> noise(0.0, 1e-4);
    std::vector<double> t;
    std::vector<double> y;
    for (int i = 0; i <= 7000; ++i) {
        t.push_back(0.01 * i);
        y.push_back(std::exp(-0.1 * t.back()) * std::cos(2.0 * t.back() + 0.3) + noise(rng));
    }
    const auto fit = fit_damped_oscillation(t, y, 0.0);
    CHECK(fit.amplitude == doctest::Approx(1.0).epsilon(1e-3));
    CHECK(fit.omega_r == doctest::Approx(2.0).epsilon(1e-3));
    CHECK(fit.omega_i == doctest::Approx(0.1).epsilon(1e-3));
    CHECK(fit.phase == doctest::Approx(0.3).epsilon(1e-3));
    CHECK(fit.rms_residual < 1e-2);
}

TEST_CASE("pure decay and short signals are flagged") {
    std::vector<double> t;
    std::vector<double> y;
    for (int i = 0; i <= 2000; ++i) {
        t.push_back(0.01 * i);
        y.push_back(std::exp(-0.5 * t.back()));
    }
    try {
        (void)fit_damped_oscillation(t, y, 0.0);
        FAIL("expected FitDiverged");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::FitDiverged);
    }
    for (std::size_t i = 0; i < t.size(); ++i) y[i] = std::exp(-0.1 * t[i]) * std::cos(2.0 * t[i]);
    try {
        (void)fit_damped_oscillation(t, y, 0.0);  // about 6 periods
        FAIL("expected InsufficientSignal");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::InsufficientSignal);
    }
}

TEST_CASE("fit of a free ring-down returns the excited natural frequency") {
    // Start on one eigenvector of the released ring and let it decay.
    CircuitParams p{0.4, 0.9, 0.5, 1.1, 1.3, 4, Boundary::Periodic};
    const Complex target = natural_frequencies(p, kPi).physical_roots.back();
    auto s = make_transient_setup(p, target, 40.0);
    s.source_nodes.clear();
    s.switch_open_time = 0.0;
    const auto ss = assemble_state_space(s);
    Eigen::EigenSolver<Eigen::MatrixXd> es(ss.a);
    const Complex lambda = Complex(0.0, 1.0) * target;
    Eigen::Index best = 0;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
        if (std::abs(es.eigenvalues()[i] - lambda) < std::abs(es.eigenvalues()[best] - lambda)) best = i;
    }
    REQUIRE(std::abs(es.eigenvalues()[best] - lambda) < 1e-8);
    s.initial_state = es.eigenvectors().col(best).real();
    const auto fit = fit_trace(simulate(s));
    CHECK(std::abs(Complex(fit.omega_r, fit.omega_i) - Complex(std::abs(target.real()), target.imag())) <
          1e-3 * std::abs(target));
}
