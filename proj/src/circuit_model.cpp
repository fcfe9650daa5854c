#include "nhssh/circuit_model.hpp"

#include "nhssh/errors.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>

namespace nhssh {

namespace {

constexpr double kPoleGuard = 1e-14;
constexpr Complex kI{0.0, 1.0};

double max_abs(const Eigen::Matrix2cd& m) {
    return m.cwiseAbs().maxCoeff();
}

}  // namespace

std::string_view to_string(Boundary b) noexcept {
    return b == Boundary::Periodic ? "periodic" : "open";
}

Boundary parse_boundary(std::string_view text) {
    if (text == "periodic" || text == "Periodic") return Boundary::Periodic;
    if (text == "open" || text == "Open") return Boundary::Open;
    throw Error(ErrorKind::ConfigBadValue,
                "boundary must be 'open' or 'periodic', got '" + std::string(text) + "'");
}

void CircuitParams::validate(int min_cells) const {
    auto fail = [](const char* field, const std::string& why) {
        throw Error(ErrorKind::InvalidParams, std::string("circuit.") + field + " " + why);
    };
    if (!(std::isfinite(r1) && r1 >= 0.0)) fail("r1", "must be finite and >= 0");
    if (!(std::isfinite(r2) && r2 >= 0.0)) fail("r2", "must be finite and >= 0");
    if (!(std::isfinite(c1) && c1 > 0.0)) fail("c1", "must be finite and > 0");
    if (!(std::isfinite(c2) && c2 > 0.0)) fail("c2", "must be finite and > 0");
    if (!(std::isfinite(l) && l > 0.0)) fail("l", "must be finite and > 0");
    if (n_cells < min_cells) fail("n_cells", "must be >= " + std::to_string(min_cells));
}

HoppingPair hoppings(const CircuitParams& params, Complex omega) {
    if (std::abs(omega) < kPoleGuard) {
        throw Error(ErrorKind::ZeroFrequency, "|omega| below 1e-14");
    }
    HoppingPair h;
    const Complex wrc1 = kI * omega * params.r1 * params.c1;
    const Complex wrc2 = kI * omega * params.r2 * params.c2;
    h.eta1 = wrc1 + 1.0;
    h.eta2 = wrc2 + 1.0;
    if (std::abs(h.eta1) < kPoleGuard * std::max(1.0, std::abs(wrc1)) ||
        std::abs(h.eta2) < kPoleGuard * std::max(1.0, std::abs(wrc2))) {
        throw Error(ErrorKind::DegenerateEta, "frequency sits on a Lambda = infinity pole");
    }
    h.v = -params.c1 / h.eta1;
    h.w = -params.c2 / h.eta2;
    return h;
}

Complex lambda_diag(const CircuitParams& params, Complex omega) {
    const HoppingPair h = hoppings(params, omega);
    return 1.0 / (omega * omega * params.l) + h.v + h.w;
}

double BlochMatrix::sublattice_residual() const {
    Eigen::Matrix2cd sz = Eigen::Matrix2cd::Zero();
    sz(0, 0) = 1.0;
    sz(1, 1) = -1.0;
    const double scale = std::max(max_abs(entries), 1e-300);
    return max_abs(sz * entries * sz + entries) / scale;
}

double BlochMatrix::chiral_dagger_residual() const {
    Eigen::Matrix2cd sz = Eigen::Matrix2cd::Zero();
    sz(0, 0) = 1.0;
    sz(1, 1) = -1.0;
    const double scale = std::max(max_abs(entries), 1e-300);
    return max_abs(sz * entries.adjoint() * sz + entries) / scale;
}

BlochMatrix bloch_admittance(const CircuitParams& params, Complex omega, double k) {
    const HoppingPair h = hoppings(params, omega);
    BlochMatrix b;
    b.omega = omega;
    b.k = k;
    b.y_x = h.v + h.w * std::cos(k);
    b.y_y = h.w * std::sin(k);
    const Complex phase = std::polar(1.0, k);
    b.entries(0, 0) = 0.0;
    b.entries(1, 1) = 0.0;
    b.entries(0, 1) = h.v + h.w * std::conj(phase);
    b.entries(1, 0) = h.v + h.w * phase;
    return b;
}

BlochMatrix bloch_laplacian(const CircuitParams& params, Complex omega, double k) {
    BlochMatrix b = bloch_admittance(params, omega, k);
    const Complex lambda = lambda_diag(params, omega);
    const Eigen::Matrix2cd shifted = lambda * Eigen::Matrix2cd::Identity() - b.entries;
    b.entries = -kI * omega * shifted;
    return b;
}

Eigen::MatrixXcd chain_matrix(Complex v, Complex w, int n_cells, Boundary boundary) {
    const int n = 2 * n_cells;
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(n, n);
    for (int c = 0; c < n_cells; ++c) {
        const int a = 2 * c;
        m(a, a + 1) = v;
        m(a + 1, a) = v;
        if (c + 1 < n_cells) {
            m(a + 1, a + 2) = w;
            m(a + 2, a + 1) = w;
        }
    }
    if (boundary == Boundary::Periodic) {
        m(n - 1, 0) += w;
        m(0, n - 1) += w;
    }
    return m;
}

RealSpaceMatrix real_space_matrix(const CircuitParams& params, Complex omega) {
    params.validate();
    const HoppingPair h = hoppings(params, omega);
    return RealSpaceMatrix{chain_matrix(h.v, h.w, params.n_cells, params.boundary), params, omega};
}

HermitianBands hermitian_reference_bands(double l1, double l2, double c, double k) {
    if (!(l1 > 0.0 && l2 > 0.0 && c > 0.0)) {
        throw Error(ErrorKind::InvalidParams, "hermitian_reference_bands needs l1, l2, c > 0");
    }
    const double eta = std::sqrt(l1 / l2);
    const double base = eta + 1.0 / eta;
    const double radicand = eta * eta + 1.0 / (eta * eta) + 2.0 * std::cos(k);
    // radicand >= (eta - 1/eta)^2 >= 0; clamp round-off at the touching point.
    assert(radicand > -1e-12);
    const double root = std::sqrt(std::max(radicand, 0.0));
    return HermitianBands{base + root, base - root, 1.0 / (c * std::sqrt(l1 * l2))};
}

}  // namespace nhssh
