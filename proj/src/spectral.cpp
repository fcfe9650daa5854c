#include "nhssh/spectral.hpp"

#include "nhssh/errors.hpp"

#include <Eigen/Eigenvalues>
#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace nhssh {

namespace {

constexpr Complex kI{0.0, 1.0};
constexpr double kLeadingTol = 1e-14;
constexpr double kResidualTol = 1e-7;
constexpr double kVietaTol = 1e-8;
constexpr double kPoleMatchTol = 1e-6;  // identification only; accuracy is checked separately
constexpr double kAmbiguityTol = 1e-10;
constexpr double kOrderTol = 1e-9;

// ω-polynomials, lowest power first.
poly::Coeffs eta(double rc) { return {Complex{1.0}, kI * rc}; }

struct Pieces {
    poly::Coeffs p;   // P = η₁η₂ − ω²L(C₁η₂ + C₂η₁)
    poly::Coeffs q0;  // ω⁴L²(C₁²η₂² + C₂²η₁²)
    poly::Coeffs q1;  // ω⁴L²·2C₁C₂η₁η₂, multiplies cos k
};

Pieces pieces(const CircuitParams& params) {
    const poly::Coeffs e1 = eta(params.r1 * params.c1);
    const poly::Coeffs e2 = eta(params.r2 * params.c2);
    const poly::Coeffs e12 = poly::multiply(e1, e2);
    const poly::Coeffs w2l = {Complex{}, Complex{}, Complex{params.l}};
    const poly::Coeffs w4l2 = {Complex{}, Complex{}, Complex{}, Complex{}, Complex{params.l * params.l}};

    const poly::Coeffs mix = poly::add(poly::scale(e2, params.c1), poly::scale(e1, params.c2));
    Pieces out;
    out.p = poly::add(e12, poly::scale(poly::multiply(w2l, mix), -1.0));
    const poly::Coeffs sq = poly::add(poly::scale(poly::multiply(e2, e2), params.c1 * params.c1),
                                      poly::scale(poly::multiply(e1, e1), params.c2 * params.c2));
    out.q0 = poly::multiply(w4l2, sq);
    out.q1 = poly::multiply(w4l2, poly::scale(e12, 2.0 * params.c1 * params.c2));
    return out;
}

double max_abs(std::span<const Complex> a) {
    double m = 0.0;
    for (const auto& c : a) m = std::max(m, std::abs(c));
    return m;
}

void sort_roots(std::vector<Complex>& roots) {
    std::stable_sort(roots.begin(), roots.end(), root_order_less);
}

}  // namespace

poly::Coeffs band_polynomial_unchecked(const CircuitParams& params, double k) {
    const Pieces pc = pieces(params);
    poly::Coeffs out = poly::multiply(pc.p, pc.p);
    out = poly::add(out, poly::scale(pc.q0, -1.0));
    out = poly::add(out, poly::scale(pc.q1, -std::cos(k)));
    out.resize(7, Complex{});
    return out;
}

std::array<Complex, 7> band_polynomial_coefficients(const CircuitParams& params, double k) {
    params.validate(0);
    const poly::Coeffs c = band_polynomial_unchecked(params, k);
    if (std::abs(c[6]) < kLeadingTol * max_abs(c)) {
        throw Error(ErrorKind::DegenerateLeadingCoefficient,
                    fmt::format("omega^6 coefficient vanishes at k={} (R1*R2*(1-cos k) = 0)", k));
    }
    std::array<Complex, 7> out{};
    std::copy(c.begin(), c.end(), out.begin());
    return out;
}

poly::Coeffs band_quartic(const CircuitParams& params, double k) {
    const poly::Coeffs e1 = eta(params.r1 * params.c1);
    const poly::Coeffs e2 = eta(params.r2 * params.c2);
    poly::Coeffs out = poly::multiply(e1, e2);
    const poly::Coeffs mix = poly::add(poly::scale(e2, params.c1), poly::scale(e1, params.c2));
    const poly::Coeffs w2 = {Complex{}, Complex{}, Complex{-2.0 * params.l}};
    out = poly::add(out, poly::multiply(w2, mix));
    out.resize(5, Complex{});
    out[4] += 2.0 * params.l * params.l * params.c1 * params.c2 * (1.0 - std::cos(k));
    return out;
}

Complex band_quartic_dk(const CircuitParams& params, double k, Complex omega) {
    const Complex w2 = omega * omega;
    return 2.0 * params.l * params.l * params.c1 * params.c2 * w2 * w2 * std::sin(k);
}

bool root_order_less(Complex a, Complex b) noexcept {
    const double scale = std::max({1.0, std::abs(a), std::abs(b)});
    if (std::abs(a.real() - b.real()) > kOrderTol * scale) return a.real() < b.real();
    return a.imag() < b.imag();
}

FrequencyRoots natural_frequencies(const CircuitParams& params, double k) {
    params.validate(0);
    const poly::Coeffs c = band_polynomial_unchecked(params, k);
    const int degree = poly::effective_degree(c, kLeadingTol);

    FrequencyRoots fr;
    fr.k = k;
    fr.roots = poly::roots(c, degree);

    const std::span<const Complex> p(c.data(), static_cast<std::size_t>(degree) + 1);
    double magnitude = 0.0;
    for (const auto& z : fr.roots) {
        const double resid = std::abs(poly::eval(p, z)) / std::max(poly::abs_eval(p, z), 1e-300);
        if (resid > kResidualTol) {
            throw Error(ErrorKind::RootResidualTooLarge,
                        fmt::format("root {}{:+}i at k={} has residual {:.3e}", z.real(), z.imag(), k, resid));
        }
        magnitude += std::abs(z);
    }
    if (degree >= 1) {
        const Complex sum = std::accumulate(fr.roots.begin(), fr.roots.end(), Complex{});
        const Complex vieta = -c[static_cast<std::size_t>(degree) - 1] / c[static_cast<std::size_t>(degree)];
        if (std::abs(sum - vieta) > kVietaTol * std::max(1.0, magnitude)) {
            throw Error(ErrorKind::RootResidualTooLarge,
                        fmt::format("root sum violates Vieta at k={} (|diff|={:.3e})", k, std::abs(sum - vieta)));
        }
    }

    std::vector<Complex> remaining = fr.roots;
    for (const double rc : {params.r1 * params.c1, params.r2 * params.c2}) {
        if (rc <= 0.0) continue;
        const Complex target = kI / rc;
        auto best = std::min_element(remaining.begin(), remaining.end(), [&](Complex a, Complex b) {
            return std::abs(a - target) < std::abs(b - target);
        });
        if (best == remaining.end() || std::abs(*best - target) > kPoleMatchTol * std::abs(target)) {
            throw Error(ErrorKind::RootResidualTooLarge,
                        fmt::format("no root near the pole i/({}) at k={}", rc, k));
        }
        fr.pole_roots.push_back(*best);
        remaining.erase(best);
    }
    sort_roots(remaining);
    fr.physical_roots = std::move(remaining);
    fr.infinite_roots = kBranchCount + static_cast<int>(fr.pole_roots.size()) - degree;
    return fr;
}

std::vector<double> band_k_grid(int n_k) {
    if (n_k < 2) throw Error(ErrorKind::OutOfRange, "n_k must be >= 2");
    std::vector<double> ks(static_cast<std::size_t>(n_k) - 1);
    for (int j = 1; j < n_k; ++j) ks[static_cast<std::size_t>(j) - 1] = kTwoPi * j / n_k;
    return ks;
}

BandSet band_trace(const CircuitParams& params, int n_k, Execution exec) {
    params.validate(0);
    if (n_k < 64) throw Error(ErrorKind::OutOfRange, "bands.n_k must be >= 64");
    BandSet band;
    band.k_grid = band_k_grid(n_k);
    const auto grid = map_indexed<FrequencyRoots>(
        band.k_grid.size(), [&](std::size_t i) { return natural_frequencies(params, band.k_grid[i]); }, exec);

    for (const auto& fr : grid) {
        if (fr.physical_roots.size() != kBranchCount) {
            throw Error(ErrorKind::DegenerateLeadingCoefficient,
                        fmt::format("expected 4 physical roots at k={}, found {}", fr.k, fr.physical_roots.size()));
        }
    }

    for (int b = 0; b < kBranchCount; ++b) {
        band.branches[b].reserve(grid.size());
        band.branches[b].push_back(grid.front().physical_roots[b]);
    }

    auto mirrored = [](Complex a, Complex c) {
        return std::abs(a + std::conj(c)) <= 1e-8 * std::max(1.0, std::abs(a));
    };
    const std::size_t n = grid.size();
    std::vector<std::array<int, kBranchCount>> perms;
    std::array<int, kBranchCount> perm{};
    std::iota(perm.begin(), perm.end(), 0);
    do perms.push_back(perm);
    while (std::next_permutation(perm.begin(), perm.end()));

    for (std::size_t j = 1; j < n; ++j) {
        const auto& next = grid[j].physical_roots;
        std::vector<double> cost(perms.size(), 0.0);
        for (std::size_t q = 0; q < perms.size(); ++q) {
            for (int b = 0; b < kBranchCount; ++b) cost[q] += std::abs(next[perms[q][b]] - band.branches[b].back());
        }
        const double best = *std::min_element(cost.begin(), cost.end());
        std::vector<std::size_t> tied;
        for (std::size_t q = 0; q < perms.size(); ++q) {
            if (cost[q] - best < kAmbiguityTol) tied.push_back(q);
        }
        std::array<int, kBranchCount> chosen = perms[tied.front()];

        if (tied.size() > 1) {
            // The polynomial depends on k only through cos k, so analytic
            // continuation makes every branch even about k = π. Past π a tie
            // is settled by that reflection. Before π only a tie between
            // mirror images ω and −ω̄ is accepted (it is forced by the real
            // circuit at an imaginary-axis collision and no refinement
            // removes it); the first permutation in lexicographic order wins.
            const std::size_t mirror = n - 1 - j;
            if (mirror < j) {
                double best_refl = std::numeric_limits<double>::infinity();
                for (const std::size_t q : tied) {
                    double refl = 0.0;
                    for (int b = 0; b < kBranchCount; ++b) refl += std::abs(next[perms[q][b]] - band.branches[b][mirror]);
                    if (refl < best_refl) {
                        best_refl = refl;
                        chosen = perms[q];
                    }
                }
            } else {
                for (std::size_t t = 1; t < tied.size(); ++t) {
                    const auto& other = perms[tied[t]];
                    bool mirror_next = true, mirror_prev = true;
                    for (int b = 0; b < kBranchCount; ++b) {
                        if (chosen[b] == other[b]) continue;
                        mirror_next = mirror_next && mirrored(next[chosen[b]], next[other[b]]);
                        const int partner =
                            static_cast<int>(std::find(chosen.begin(), chosen.end(), other[b]) - chosen.begin());
                        mirror_prev = mirror_prev && mirrored(band.branches[b].back(), band.branches[partner].back());
                    }
                    if (!mirror_next && !mirror_prev) {
                        throw Error(ErrorKind::TrackingAmbiguous,
                                    fmt::format("roots nearly coincide on k in [{}, {}]; refine the grid",
                                                band.k_grid[j - 1], band.k_grid[j]));
                    }
                }
            }
            band.mirror_ties.push_back(band.k_grid[j]);
        }
        for (int b = 0; b < kBranchCount; ++b) {
            const Complex z = next[chosen[b]];
            band.continuity_residual[b] = std::max(band.continuity_residual[b], std::abs(z - band.branches[b].back()));
            band.branches[b].push_back(z);
        }
    }

    for (int b = 0; b < kBranchCount; ++b) {
        const Complex last = band.branches[b].back();
        int match = 0;
        for (int c = 1; c < kBranchCount; ++c) {
            if (std::abs(band.branches[c].front() - last) < std::abs(band.branches[match].front() - last)) match = c;
        }
        band.end_permutation[b] = match;
    }
    return band;
}

std::array<std::vector<Complex>, kBranchCount> lambda_spectrum(const CircuitParams& params, const BandSet& band) {
    std::array<std::vector<Complex>, kBranchCount> out;
    for (int b = 0; b < kBranchCount; ++b) {
        out[b].reserve(band.branches[b].size());
        for (const auto& omega : band.branches[b]) out[b].push_back(lambda_diag(params, omega));
    }
    return out;
}

BulkGap bulk_gap(const CircuitParams& params, std::span<const Complex> omega_branch) {
    if (omega_branch.empty()) throw Error(ErrorKind::OutOfRange, "bulk_gap needs a nonempty branch");
    double delta = std::numeric_limits<double>::infinity();
    for (const auto& omega : omega_branch) delta = std::min(delta, std::abs(lambda_diag(params, omega)));
    return BulkGap{delta};
}

Complex branch_frequency_at(const CircuitParams& params, const BandSet& band, int branch, double k) {
    if (branch < 0 || branch >= kBranchCount) throw Error(ErrorKind::OutOfRange, "branch index must be 0..3");
    const auto& ks = band.k_grid;
    const auto& ws = band.branches[branch];
    Complex guess;
    if (k <= ks.front()) {
        guess = ws.front();
    } else if (k >= ks.back()) {
        guess = ws.back();
    } else {
        const auto hi = static_cast<std::size_t>(std::upper_bound(ks.begin(), ks.end(), k) - ks.begin());
        const double t = (k - ks[hi - 1]) / (ks[hi] - ks[hi - 1]);
        guess = ws[hi - 1] + t * (ws[hi] - ws[hi - 1]);
    }
    const FrequencyRoots fr = natural_frequencies(params, k);
    return *std::min_element(fr.physical_roots.begin(), fr.physical_roots.end(),
                             [&](Complex a, Complex b) { return std::abs(a - guess) < std::abs(b - guess); });
}

std::string_view to_string(StateLabel label) noexcept {
    switch (label) {
        case StateLabel::Edge: return "edge";
        case StateLabel::Skin: return "skin";
        case StateLabel::Bulk: return "bulk";
    }
    return "bulk";
}

Localization localization_of(const Eigen::Ref<const Eigen::VectorXcd>& psi) {
    const Eigen::Index n = psi.size();
    const Eigen::Index edge = std::max<Eigen::Index>(1, static_cast<Eigen::Index>(std::lround(0.1 * n)));
    const Eigen::VectorXd density = psi.cwiseAbs2() / std::max(psi.squaredNorm(), 1e-300);
    Localization loc;
    loc.ipr = density.squaredNorm();
    loc.left_weight = density.head(edge).sum();
    loc.right_weight = density.tail(edge).sum();
    return loc;
}

ChainSpectrum eigendecompose(const Eigen::MatrixXcd& matrix) {
    if (!matrix.allFinite()) throw Error(ErrorKind::OutOfRange, "matrix has non-finite entries");
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(matrix, true);
    if (solver.info() != Eigen::Success) {
        throw Error(ErrorKind::ConvergenceFailure, "dense complex eigensolver did not converge");
    }
    const Eigen::Index n = matrix.rows();
    const Eigen::VectorXcd& values = solver.eigenvalues();

    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
        const Complex x = values(a), y = values(b);
        const double scale = std::max({1.0, std::abs(x), std::abs(y)});
        if (std::abs(std::abs(x) - std::abs(y)) > kOrderTol * scale) return std::abs(x) < std::abs(y);
        return root_order_less(x, y);
    });

    const double norm = std::max(1.0, matrix.cwiseAbs().rowwise().sum().maxCoeff());
    ChainSpectrum out;
    out.eigenvalues.resize(n);
    out.eigenvectors.resize(n, n);
    for (Eigen::Index col = 0; col < n; ++col) {
        const Eigen::Index src = order[static_cast<std::size_t>(col)];
        Eigen::VectorXcd psi = solver.eigenvectors().col(src);
        psi /= psi.norm();
        Eigen::Index peak = 0;
        psi.cwiseAbs().maxCoeff(&peak);
        psi *= std::polar(1.0, -std::arg(psi(peak)));
        out.eigenvalues(col) = values(src);
        out.eigenvectors.col(col) = psi;

        const double resid = (matrix * psi - values(src) * psi).norm();
        out.max_residual = std::max(out.max_residual, resid);
        if (resid > 1e-8 * norm) {
            throw Error(ErrorKind::ConvergenceFailure,
                        fmt::format("eigenpair residual {:.3e} exceeds 1e-8*||M||", resid));
        }
        out.localization.push_back(localization_of(psi));
    }
    out.labels.assign(static_cast<std::size_t>(n), StateLabel::Bulk);
    return out;
}

ChainSpectrum eigendecompose(const RealSpaceMatrix& matrix) { return eigendecompose(matrix.entries); }

}  // namespace nhssh
