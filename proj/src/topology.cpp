#include "nhssh/topology.hpp"

#include "nhssh/errors.hpp"

#include <Eigen/QR>
#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>

namespace nhssh {

namespace {

constexpr Complex kI{0.0, 1.0};
constexpr double kOriginGuard = 1e-10;
constexpr double kMaxTurn = 0.9 * kPi;
constexpr double kIntegerTol = 1e-3;

double turn(const PlanePoint& a, const PlanePoint& b) {
    return std::atan2(a.x * b.y - a.y * b.x, a.x * b.x + a.y * b.y);
}

void check_point(const PlanePoint& p) {
    if (std::hypot(p.x, p.y) < kOriginGuard) {
        throw Error(ErrorKind::OriginCrossing, "real-projected curve passes through the exceptional point");
    }
}

// Angle swept by consecutive samples. A turn close to ±π means the segment
// straddles the origin, unless `through_pole(i)` says the curve left through
// infinity (the branch crossed a Λ = ∞ pole); then the principal value is kept
// and counted.
template <class Pred>
double accumulate_open(std::span<const PlanePoint> curve, Pred through_pole, int& pole_crossings,
                       double& max_turn) {
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < curve.size(); ++i) {
        const double d = turn(curve[i], curve[i + 1]);
        if (std::abs(d) > kMaxTurn) {
            if (!through_pole(i)) {
                throw Error(ErrorKind::OriginCrossing,
                            fmt::format("curve turns by {:.3f} rad between samples {} and {}", d, i, i + 1));
            }
            ++pole_crossings;
        } else {
            max_turn = std::max(max_turn, std::abs(d));
        }
        total += d;
    }
    return total;
}

double accumulate_open(std::span<const PlanePoint> curve) {
    int unused = 0;
    double turn_unused = 0.0;
    return accumulate_open(curve, [](std::size_t) { return false; }, unused, turn_unused);
}

bool crosses_pole(const CircuitParams& params, Complex a, Complex b) {
    for (const double rc : {params.r1 * params.c1, params.r2 * params.c2}) {
        if (rc <= 0.0) continue;
        const Complex ea = 1.0 + kI * a * rc, eb = 1.0 + kI * b * rc;
        if (std::abs(std::arg(eb / ea)) > kMaxTurn) return true;
    }
    return false;
}

WindingResult finish(double total, int n_k) {
    WindingResult r;
    r.raw_integral = total / kTwoPi;
    r.mu = static_cast<int>(std::lround(r.raw_integral));
    r.residual = std::abs(r.raw_integral - r.mu);
    r.n_k = n_k;
    if (r.residual >= kIntegerTol) {
        throw Error(ErrorKind::ResidualTooLarge,
                    fmt::format("accumulated winding {:.6f} is not an integer", r.raw_integral));
    }
    return r;
}

// dφ_r/dk at (k, ω) for ω on the band.
double phase_slope(const CircuitParams& params, double k, Complex omega) {
    // The quartic, not the sextic: the latter has a double root wherever a
    // band crosses a pole and ∂p/∂ω vanishes there.
    const poly::Coeffs q = band_quartic(params, k);
    const Complex domega = -band_quartic_dk(params, k, omega) / poly::eval(poly::derivative(q), omega);

    const HoppingPair h = hoppings(params, omega);
    const Complex dv = params.c1 * (kI * params.r1 * params.c1) / (h.eta1 * h.eta1);
    const Complex dw = params.c2 * (kI * params.r2 * params.c2) / (h.eta2 * h.eta2);
    const double c = std::cos(k), s = std::sin(k);
    const Complex yx = h.v + h.w * c;
    const Complex yy = h.w * s;
    const Complex dyx = (dv + dw * c) * domega - h.w * s;
    const Complex dyy = dw * domega * s + h.w * c;
    const double x = yx.real(), y = yy.real();
    return (x * dyy.real() - y * dyx.real()) / (x * x + y * y);
}

// Root closest to `guess` in log distance |log(z/guess)|, so that the very
// large root near k = 0 is still found from a stale guess.
Complex nearest_root(const CircuitParams& params, double k, Complex guess) {
    const FrequencyRoots fr = natural_frequencies(params, k);
    auto dist = [&](Complex z) { return std::abs(std::log(z / guess)); };
    return *std::min_element(fr.physical_roots.begin(), fr.physical_roots.end(),
                             [&](Complex a, Complex b) { return dist(a) < dist(b); });
}

PlanePoint project(const CircuitParams& params, double k, Complex omega) {
    const HoppingPair h = hoppings(params, omega);
    return {(h.v + h.w * std::cos(k)).real(), (h.w * std::sin(k)).real()};
}

// Sliver ±δ about k = 0 closed by one chord. x is even and y odd in k, so
// the chord sweeps the curve's angle once it no longer turns by much; δ starts
// at k₁/4 and is halved until then.
struct Sliver {
    double delta = 0.0;
    Complex w_lo;  // at 2π − δ
    Complex w_hi;  // at δ
    double turn = 0.0;
};

Sliver seam_sliver(const CircuitParams& params, double k1, Complex w_last, Complex w_first) {
    Sliver s;
    s.delta = 0.25 * k1;
    s.w_lo = nearest_root(params, kTwoPi - s.delta, w_last);
    s.w_hi = nearest_root(params, s.delta, w_first);
    for (int i = 0;; ++i) {
        s.turn = turn(project(params, kTwoPi - s.delta, s.w_lo), project(params, s.delta, s.w_hi));
        if (std::abs(s.turn) <= kPi / 4 || i == 20) return s;
        s.delta *= 0.5;
        s.w_lo = nearest_root(params, kTwoPi - s.delta, s.w_lo);
        s.w_hi = nearest_root(params, s.delta, s.w_hi);
    }
}

double simpson(double a, double b, double fa, double fm, double fb) { return (b - a) / 6.0 * (fa + 4.0 * fm + fb); }

template <class F>
double adaptive(const F& f, double a, double b, double fa, double fm, double fb, double whole, double tol,
                int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = simpson(a, m, fa, flm, fm);
    const double right = simpson(m, b, fm, frm, fb);
    const double diff = left + right - whole;
    if (depth <= 0 || std::abs(diff) <= 15.0 * tol) return left + right + diff / 15.0;
    return adaptive(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           adaptive(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

Eigen::VectorXd cluster_profile(const ChainSpectrum& s, int idx, double tol) {
    std::vector<int> members;
    for (int j = 0; j < s.size(); ++j) {
        if (std::abs(s.eigenvalues(j) - s.eigenvalues(idx)) <= tol) members.push_back(j);
    }
    if (members.size() == 1) return s.eigenvectors.col(idx).cwiseAbs();
    Eigen::MatrixXcd block(s.eigenvectors.rows(), static_cast<Eigen::Index>(members.size()));
    for (std::size_t c = 0; c < members.size(); ++c) block.col(static_cast<Eigen::Index>(c)) = s.eigenvectors.col(members[c]);
    Eigen::HouseholderQR<Eigen::MatrixXcd> qr(block);
    const Eigen::MatrixXcd q = qr.householderQ() * Eigen::MatrixXcd::Identity(block.rows(), block.cols());
    const Eigen::VectorXd density = q.cwiseAbs2().rowwise().sum() / static_cast<double>(members.size());
    return density.cwiseSqrt();
}

}  // namespace

std::vector<PlanePoint> real_projection(const CircuitParams& params, std::span<const double> ks,
                                        std::span<const Complex> omegas) {
    std::vector<PlanePoint> out;
    out.reserve(ks.size());
    for (std::size_t i = 0; i < ks.size(); ++i) {
        const HoppingPair h = hoppings(params, omegas[i]);
        out.push_back({(h.v + h.w * std::cos(ks[i])).real(), (h.w * std::sin(ks[i])).real()});
    }
    return out;
}

WindingResult polygon_winding(std::span<const PlanePoint> curve, int n_k) {
    for (const auto& p : curve) check_point(p);
    double total = accumulate_open(curve);
    const PlanePoint seam[2] = {curve.back(), curve.front()};
    total += accumulate_open(seam);
    return finish(total, n_k);
}

namespace {

constexpr double kResolvedTurn = kPi / 4;
constexpr int kMaxBisections = 20;

// Appends the curve over (ka, kb], halving while a chord turns by more than
// kResolvedTurn. Segments through a pole are left alone.
void bisect_segment(const CircuitParams& params, double ka, double kb, Complex wa, Complex wb, PlanePoint pa,
                    PlanePoint pb, int depth, ResolvedCurve& out) {
    if (depth > 0 && std::abs(turn(pa, pb)) > kResolvedTurn && !crosses_pole(params, wa, wb)) {
        const double km = 0.5 * (ka + kb);
        const Complex wm = nearest_root(params, km, 0.5 * (wa + wb));
        const PlanePoint pm = project(params, km, wm);
        ++out.inserted;
        bisect_segment(params, ka, km, wa, wm, pa, pm, depth - 1, out);
        bisect_segment(params, km, kb, wm, wb, pm, pb, depth - 1, out);
        return;
    }
    out.k.push_back(kb);
    out.omega.push_back(wb);
    out.points.push_back(pb);
}

}  // namespace

ResolvedCurve resolved_projection(const CircuitParams& params, const BandSet& band, int branch) {
    const auto& ks = band.k_grid;
    const auto& ws = band.branches[branch];
    const auto samples = real_projection(params, ks, ws);
    ResolvedCurve out;
    out.k.push_back(ks.front());
    out.omega.push_back(ws.front());
    out.points.push_back(samples.front());
    for (std::size_t j = 0; j + 1 < ks.size(); ++j) {
        bisect_segment(params, ks[j], ks[j + 1], ws[j], ws[j + 1], samples[j], samples[j + 1], kMaxBisections, out);
    }
    // Across k = 0 one band runs off to infinity (and its projection into the
    // origin), so the seam is resolved up to a sliver about k = 0 that is
    // closed by one chord.
    const Complex w_last = ws.back();
    const Complex w_first = band.branches[band.end_permutation[branch]].front();
    const Sliver sl = seam_sliver(params, ks.front(), w_last, w_first);
    const double k_lo = kTwoPi - sl.delta, k_hi = kTwoPi + sl.delta, k_end = kTwoPi + ks.front();
    const Complex w_lo = sl.w_lo, w_hi = sl.w_hi;
    const PlanePoint p_hi = project(params, k_hi, w_hi);
    bisect_segment(params, ks.back(), k_lo, w_last, w_lo, samples.back(), project(params, k_lo, w_lo),
                   kMaxBisections, out);
    out.k.push_back(k_hi);
    out.omega.push_back(w_hi);
    out.points.push_back(p_hi);
    bisect_segment(params, k_hi, k_end, w_hi, w_first, p_hi, project(params, k_end, w_first), kMaxBisections, out);
    return out;
}

WindingResult winding_number(const CircuitParams& params, const BandSet& band, int branch) {
    const int partner = band.end_permutation[branch];
    // The last point repeats the first sample (of the partner branch when the
    // family does not close on itself, which leaves a fractional turn).
    const auto resolved = resolved_projection(params, band, branch);
    const auto& curve = resolved.points;
    const auto& omegas = resolved.omega;
    for (const auto& p : curve) check_point(p);
    int poles = 0;
    double max_turn = 0.0;
    const double total = accumulate_open(
        curve, [&](std::size_t i) { return crosses_pole(params, omegas[i], omegas[i + 1]); }, poles, max_turn);
    const int n_k = static_cast<int>(band.k_grid.size()) + 1;
    if (!band.closed(branch)) {
        throw Error(ErrorKind::ResidualTooLarge,
                    fmt::format("branch {} does not close across k=0 (continues into branch {}); raw winding {:.6f}",
                                branch, partner, total / kTwoPi));
    }
    WindingResult r = finish(total, n_k);
    r.pole_crossings = poles;
    r.max_turn = max_turn;
    r.inserted_points = resolved.inserted;
    return r;
}

int crossing_count_winding(std::span<const PlanePoint> curve) {
    int count = 0;
    const std::size_t n = curve.size();
    for (std::size_t i = 0; i < n; ++i) {
        const PlanePoint& a = curve[i];
        const PlanePoint& b = curve[(i + 1) % n];
        const bool up = a.y <= 0.0 && b.y > 0.0;
        const bool down = a.y > 0.0 && b.y <= 0.0;
        if (!up && !down) continue;
        const double x_cross = a.x + (b.x - a.x) * (-a.y) / (b.y - a.y);
        if (x_cross > 0.0) count += up ? 1 : -1;
    }
    return count;
}

double quadrature_winding(const CircuitParams& params, const BandSet& band, int branch, double tol) {
    const auto& ks = band.k_grid;
    const auto& ws = band.branches[branch];
    const std::size_t n = ks.size();
    const double piece_tol = tol;

    // ∫ dφ_r over [a, b] with ω tracked from the guess function; adds the ±π
    // jump the chord takes when the branch crosses a pole inside. Whatever the
    // curve does, the swept angle equals the chord angle modulo 2π; when it
    // does not, Simpson has stepped over a narrow excursion (the branch
    // grazing a pole), so the interval is halved.
    auto piece = [&](auto&& self, double a, double b, Complex wa, Complex wb, int splits) -> double {
        auto guess = [&](double k) { return wa + (k - a) / (b - a) * (wb - wa); };
        auto f = [&](double k) { return phase_slope(params, k, nearest_root(params, k, guess(k))); };
        const double fa = phase_slope(params, a, wa);
        const double fb = phase_slope(params, b, wb);
        const double fm = f(0.5 * (a + b));
        const double smooth = adaptive(f, a, b, fa, fm, fb, simpson(a, b, fa, fm, fb), piece_tol, 14);
        const double chord = turn(project(params, a, wa), project(params, b, wb));
        if (crosses_pole(params, wa, wb)) return smooth + kPi * std::round((chord - smooth) / kPi);
        const double laps = (smooth - chord) / kTwoPi;
        if (std::abs(laps - std::round(laps)) > 1e-3 && splits > 0) {
            const double m = 0.5 * (a + b);
            const Complex wm = nearest_root(params, m, guess(m));
            return self(self, a, m, wa, wm, splits - 1) + self(self, m, b, wm, wb, splits - 1);
        }
        return smooth;
    };
    constexpr int kMaxSplits = 24;

    double total = 0.0;
    for (std::size_t j = 0; j + 1 < n; ++j) {
        const double a = ks[j], b = ks[j + 1];
        const Complex wa = ws[j], wb = ws[j + 1];
        total += piece(piece, a, b, wa, wb, kMaxSplits);
    }

    // Across k = 0 one band runs off to infinity, so the seam is integrated
    // up to a sliver on either side.
    const int partner = band.end_permutation[branch];
    const Complex w_last = ws.back(), w_first = band.branches[partner].front();
    const Sliver sl = seam_sliver(params, ks.front(), w_last, w_first);
    total += piece(piece, ks.back(), kTwoPi - sl.delta, w_last, sl.w_lo, kMaxSplits);
    total += sl.turn;
    total += piece(piece, sl.delta, ks.front(), sl.w_hi, w_first, kMaxSplits);
    return total / kTwoPi;
}

WindingReport winding_report(const CircuitParams& params, int n_k, int n_k_max, bool with_oracles, Execution exec) {
    WindingReport rep;
    for (int n = n_k;; n *= 2) {
        const bool last_try = 2 * n > n_k_max;
        try {
            rep.band = band_trace(params, n, exec);
        } catch (const Error& e) {
            if (e.kind() == ErrorKind::TrackingAmbiguous && !last_try) continue;
            throw;
        }
        rep.n_k = n;
        bool refine = false;
        for (int b = 0; b < kBranchCount; ++b) {
            BranchWinding& bw = rep.branches[b];
            bw = BranchWinding{};
            try {
                bw.winding = winding_number(params, rep.band, b);
            } catch (const Error& e) {
                bw.error = e.what();
                if (e.kind() == ErrorKind::OriginCrossing) refine = true;
            }
        }
        if (!refine || last_try) break;
    }
    if (with_oracles) {
        for (int b = 0; b < kBranchCount; ++b) {
            auto& bw = rep.branches[b];
            bw.crossings = crossing_count_winding(resolved_projection(params, rep.band, b).points);
            bw.quadrature = quadrature_winding(params, rep.band, b);
        }
    }
    return rep;
}

double chain_gap(const HoppingPair& h) { return 2.0 * std::abs(std::abs(h.v) - std::abs(h.w)); }

SkinWindingResult point_gap_winding(const BlochFunction& bloch, Complex e0, int n_k) {
    if (n_k < 8) throw Error(ErrorKind::OutOfRange, "skin.n_k must be >= 8");
    SkinWindingResult r;
    r.e0 = e0;
    r.trajectory.reserve(static_cast<std::size_t>(n_k) + 1);
    for (int j = 0; j <= n_k; ++j) {
        const double k = kTwoPi * j / n_k;
        const Eigen::Matrix2cd m = bloch(k) - e0 * Eigen::Matrix2cd::Identity();
        const Complex d = m.determinant();
        if (std::abs(d) <= 1e-12) {
            throw Error(ErrorKind::SpectrumHit, fmt::format("E0 lies on the spectrum (|det|={:.3e} at k={})",
                                                            std::abs(d), k));
        }
        r.trajectory.push_back(d);
    }
    double total = 0.0;
    for (std::size_t j = 0; j + 1 < r.trajectory.size(); ++j) {
        const double d = std::arg(r.trajectory[j + 1] / r.trajectory[j]);
        if (std::abs(d) > kMaxTurn) {
            throw Error(ErrorKind::ResidualTooLarge, "determinant trajectory under-resolved near E0");
        }
        total += d;
    }
    r.raw_integral = total / kTwoPi;
    r.w = static_cast<int>(std::lround(r.raw_integral));
    r.residual = std::abs(r.raw_integral - r.w);
    if (r.residual >= kIntegerTol) {
        throw Error(ErrorKind::ResidualTooLarge, fmt::format("point-gap winding {:.6f} not an integer", r.raw_integral));
    }
    return r;
}

SkinWindingResult skin_winding(const CircuitParams& params, Complex omega, Complex e0, int n_k) {
    return point_gap_winding([&](double k) { return bloch_admittance(params, omega, k).entries; }, e0, n_k);
}

SkinScan skin_scan(const BlochFunction& bloch, int grid, int n_k, Execution exec) {
    if (grid < 1) throw Error(ErrorKind::OutOfRange, "skin.grid must be >= 1");
    double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
    double ymin = xmin, ymax = -xmin;
    auto include = [&](Complex z) {
        xmin = std::min(xmin, z.real());
        xmax = std::max(xmax, z.real());
        ymin = std::min(ymin, z.imag());
        ymax = std::max(ymax, z.imag());
    };
    for (int j = 0; j <= n_k; ++j) {
        const Eigen::Matrix2cd m = bloch(kTwoPi * j / n_k);
        const Complex half_trace = 0.5 * m.trace();
        const Complex disc = std::sqrt(half_trace * half_trace - m.determinant());
        include(m.determinant());
        include(half_trace + disc);
        include(half_trace - disc);
    }
    const double pad_x = std::max(0.1 * (xmax - xmin), 1e-6);
    const double pad_y = std::max(0.1 * (ymax - ymin), 1e-6);
    xmin -= pad_x;
    xmax += pad_x;
    ymin -= pad_y;
    ymax += pad_y;

    SkinScan scan;
    scan.box_min = {xmin, ymin};
    scan.box_max = {xmax, ymax};
    const auto total = static_cast<std::size_t>(grid) * static_cast<std::size_t>(grid);
    auto point = [&](std::size_t idx) {
        const auto ix = static_cast<double>(idx % static_cast<std::size_t>(grid));
        const auto iy = static_cast<double>(idx / static_cast<std::size_t>(grid));
        return Complex{xmin + (ix + 0.5) * (xmax - xmin) / grid, ymin + (iy + 0.5) * (ymax - ymin) / grid};
    };
    const auto windings = map_indexed<std::optional<int>>(
        total,
        [&](std::size_t idx) -> std::optional<int> {
            try {
                return point_gap_winding(bloch, point(idx), n_k).w;
            } catch (const Error& e) {
                if (e.kind() == ErrorKind::SpectrumHit || e.kind() == ErrorKind::ResidualTooLarge) return std::nullopt;
                throw;
            }
        },
        exec);
    for (std::size_t idx = 0; idx < total; ++idx) {
        if (!windings[idx]) {
            ++scan.skipped;
            continue;
        }
        ++scan.scanned;
        if (!scan.present && *windings[idx] != 0) {
            scan.present = true;
            scan.witness = point(idx);
            scan.witness_w = *windings[idx];
        }
    }
    return scan;
}

SkinScan skin_effect_present(const CircuitParams& params, Complex omega, int grid, int n_k, Execution exec) {
    return skin_scan([&](double k) { return bloch_admittance(params, omega, k).entries; }, grid, n_k, exec);
}

double center_of_mass_shift(const Eigen::MatrixXcd& open_chain, const Eigen::MatrixXcd& periodic_chain) {
    auto mean_offset = [](const Eigen::MatrixXcd& m) {
        const ChainSpectrum s = eigendecompose(m);
        const Eigen::Index n = m.rows();
        const Eigen::VectorXd position = Eigen::VectorXd::LinSpaced(n, 0.0, 1.0);
        double acc = 0.0;
        for (Eigen::Index c = 0; c < n; ++c) acc += position.dot(s.eigenvectors.col(c).cwiseAbs2()) - 0.5;
        return acc / static_cast<double>(n);
    };
    return mean_offset(open_chain) - mean_offset(periodic_chain);
}

double center_of_mass_shift(const CircuitParams& params, Complex omega, int n_cells) {
    const HoppingPair h = hoppings(params, omega);
    return center_of_mass_shift(chain_matrix(h.v, h.w, n_cells, Boundary::Open),
                                chain_matrix(h.v, h.w, n_cells, Boundary::Periodic));
}

ChainSpectrum classify_states(ChainSpectrum spectrum, double gap, const ClassifyThresholds& t) {
    if (!(gap > 0.0)) throw Error(ErrorKind::GapUnknown, "classification needs a positive bulk gap");
    const int n = spectrum.size();
    spectrum.labels.assign(static_cast<std::size_t>(n), StateLabel::Bulk);
    for (int i = 0; i < n; ++i) {
        const Localization& loc = spectrum.localization[static_cast<std::size_t>(i)];
        const bool edge = std::abs(spectrum.eigenvalues(i)) < t.edge_gap_fraction * gap &&
                          loc.ipr > t.edge_ipr_factor / static_cast<double>(n);
        const double hi = std::max(loc.left_weight, loc.right_weight);
        const double lo = std::min(loc.left_weight, loc.right_weight);
        const bool skin = hi > t.skin_side_weight && hi > t.skin_asymmetry * lo;
        spectrum.labels[static_cast<std::size_t>(i)] = edge ? StateLabel::Edge : skin ? StateLabel::Skin : StateLabel::Bulk;
    }
    return spectrum;
}

LabelCounts count_labels(const ChainSpectrum& spectrum) {
    LabelCounts c;
    for (const auto l : spectrum.labels) {
        if (l == StateLabel::Edge) ++c.edge;
        else if (l == StateLabel::Skin) ++c.skin;
        else ++c.bulk;
    }
    return c;
}

RealSpaceMatrix perturb_chain(const RealSpaceMatrix& matrix, std::span<const int> cells, double fraction) {
    if (!(std::isfinite(fraction) && fraction >= 0.0 && fraction <= 0.2)) {
        throw Error(ErrorKind::OutOfRange, "perturbation.fraction must lie in [0, 0.2]");
    }
    const Eigen::Index n = matrix.entries.rows();
    std::vector<char> touched(static_cast<std::size_t>(n), 0);
    for (const int c : cells) {
        if (c < 0 || 2 * c + 1 >= n) throw Error(ErrorKind::OutOfRange, fmt::format("cell {} outside the chain", c));
        touched[static_cast<std::size_t>(2 * c)] = touched[static_cast<std::size_t>(2 * c + 1)] = 1;
    }
    RealSpaceMatrix out = matrix;
    if (fraction == 0.0) return out;
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            if (touched[static_cast<std::size_t>(i)] || touched[static_cast<std::size_t>(j)]) {
                out.entries(i, j) *= 1.0 + fraction;
            }
        }
    }
    return out;
}

std::vector<int> center_cells(int n_cells, int count) {
    std::vector<int> cells;
    const int start = n_cells / 2 - count / 2;
    for (int i = 0; i < count; ++i) cells.push_back(start + i);
    return cells;
}

PerturbationReport compare_perturbation(const ChainSpectrum& baseline, const ChainSpectrum& perturbed, double gap) {
    if (baseline.size() != perturbed.size()) throw Error(ErrorKind::OutOfRange, "spectra differ in size");
    PerturbationReport rep;
    rep.baseline = baseline;
    rep.perturbed = perturbed;
    const int n = baseline.size();
    const double scale = std::max(1.0, baseline.eigenvalues.cwiseAbs().maxCoeff());
    const double cluster_tol = 1e-8 * scale;

    std::vector<char> used(static_cast<std::size_t>(n), 0);
    for (int i = 0; i < n; ++i) {
        int best = -1;
        double best_d = std::numeric_limits<double>::infinity();
        for (int j = 0; j < n; ++j) {
            if (used[static_cast<std::size_t>(j)]) continue;
            const double d = std::abs(baseline.eigenvalues(i) - perturbed.eigenvalues(j));
            if (d < best_d) {
                best_d = d;
                best = j;
            }
        }
        used[static_cast<std::size_t>(best)] = 1;
        MatchedPair mp;
        mp.baseline = i;
        mp.perturbed = best;
        mp.eigenvalue_shift = best_d;
        mp.profile_drift = (cluster_profile(baseline, i, cluster_tol) - cluster_profile(perturbed, best, cluster_tol)).norm();
        rep.matched_pairs.push_back(mp);

        switch (baseline.labels[static_cast<std::size_t>(i)]) {
            case StateLabel::Edge:
                rep.edge_state_drift = std::max(rep.edge_state_drift, mp.profile_drift);
                if (!(best_d < gap)) rep.edge_partners_in_gap = false;
                break;
            case StateLabel::Skin: rep.skin_state_drift = std::max(rep.skin_state_drift, mp.profile_drift); break;
            case StateLabel::Bulk: rep.bulk_state_drift = std::max(rep.bulk_state_drift, mp.profile_drift); break;
        }
    }
    return rep;
}

}  // namespace nhssh
