#include "nhssh/transient.hpp"

#include "nhssh/errors.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <fmt/format.h>
#include <unsupported/Eigen/NonLinearOptimization>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace nhssh {

namespace {

constexpr double kStepTolerance = 1e-6;
constexpr double kEnergySlack = 1e-10;
constexpr double kNoiseFloor = 1e-9;  // relative to the peak of the fitted series
constexpr int kMinPeriods = 20;

using SparseMatrix = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

// G = Dᵀ·diag(g)·D + diag(shunt) over the kept nodes; `index` maps node → row
// or −1 for nodes held at a prescribed voltage.
SparseMatrix nodal_matrix(const std::vector<RcBranch>& branches, const std::vector<double>& g, double shunt,
                          const std::vector<int>& index, int rows) {
    std::vector<Triplet> t;
    t.reserve(4 * branches.size() + static_cast<std::size_t>(rows));
    for (std::size_t e = 0; e < branches.size(); ++e) {
        const int ia = index[branches[e].a];
        const int ib = index[branches[e].b];
        if (ia >= 0) t.emplace_back(ia, ia, g[e]);
        if (ib >= 0) t.emplace_back(ib, ib, g[e]);
        if (ia >= 0 && ib >= 0) {
            t.emplace_back(ia, ib, -g[e]);
            t.emplace_back(ib, ia, -g[e]);
        }
    }
    for (int i = 0; i < rows; ++i) t.emplace_back(i, i, shunt);
    SparseMatrix m(rows, rows);
    m.setFromTriplets(t.begin(), t.end());
    return m;
}

std::vector<int> keep_index(int n_nodes, const std::vector<int>& fixed, int& rows) {
    std::vector<int> index(static_cast<std::size_t>(n_nodes), 0);
    for (int s : fixed) index[s] = -1;
    rows = 0;
    for (auto& i : index) i = (i < 0) ? -1 : rows++;
    return index;
}

// KCL solve for V given (v_C, I): Σ_e (V_a − V_b − v_C)/R − ... = −I at the
// kept nodes. With no fixed node the network floats; node 0 is pinned and the
// mean removed afterwards, which is exact when ΣI = 0.
class KclSolver {
public:
    KclSolver(const std::vector<RcBranch>& branches, int n_nodes, std::vector<int> fixed)
        : branches_(branches), n_nodes_(n_nodes), fixed_(std::move(fixed)) {
        floating_ = fixed_.empty();
        std::vector<int> pinned = floating_ ? std::vector<int>{0} : fixed_;
        index_ = keep_index(n_nodes, pinned, rows_);
        std::vector<double> g(branches.size());
        for (std::size_t e = 0; e < branches.size(); ++e) g[e] = 1.0 / branches[e].r;
        solver_.compute(nodal_matrix(branches, g, 0.0, index_, rows_));
        if (solver_.info() != Eigen::Success) throw Error(ErrorKind::SingularKCL, "KCL matrix is not invertible");
    }

    // `fixed_values` are the voltages of the fixed nodes (ignored when floating).
    Eigen::VectorXd solve(const Eigen::Ref<const Eigen::VectorXd>& vc, const Eigen::Ref<const Eigen::VectorXd>& il,
                          const Eigen::VectorXd& fixed_values) const {
        Eigen::VectorXd v = Eigen::VectorXd::Zero(n_nodes_);
        if (!floating_) {
            for (std::size_t s = 0; s < fixed_.size(); ++s) v[fixed_[s]] = fixed_values[static_cast<Eigen::Index>(s)];
        }
        Eigen::VectorXd rhs = Eigen::VectorXd::Zero(rows_);
        for (int j = 0; j < n_nodes_; ++j) {
            if (index_[j] >= 0) rhs[index_[j]] -= il[j];
        }
        for (std::size_t e = 0; e < branches_.size(); ++e) {
            const auto& br = branches_[e];
            const double src = vc[static_cast<Eigen::Index>(e)] / br.r;
            const int ia = index_[br.a];
            const int ib = index_[br.b];
            if (ia >= 0) rhs[ia] += src + ((ib < 0) ? v[br.b] / br.r : 0.0);
            if (ib >= 0) rhs[ib] += -src + ((ia < 0) ? v[br.a] / br.r : 0.0);
        }
        const Eigen::VectorXd x = solver_.solve(rhs);
        for (int j = 0; j < n_nodes_; ++j) {
            if (index_[j] >= 0) v[j] = x[index_[j]];
        }
        if (floating_) v.array() -= v.mean();
        return v;
    }

private:
    const std::vector<RcBranch>& branches_;
    int n_nodes_;
    std::vector<int> fixed_;
    bool floating_ = false;
    std::vector<int> index_;
    int rows_ = 0;
    Eigen::SimplicialLDLT<SparseMatrix> solver_;
};

// One trapezoidal step of size h with V eliminated:
//   (Dᵀ W D + h/2L) V⁺ = Dᵀ W q − I − (h/2L) V,  q = v_C + (h/2C) i,
//   W = 1/(R(1 + h/2RC)),  v_C⁺ = (q + α D V⁺)/(1 + α),  I⁺ = I + (h/2L)(V⁺ + V).
class TrapezoidStepper {
public:
    TrapezoidStepper(const std::vector<RcBranch>& branches, int n_nodes, double inductance, double h,
                     std::vector<int> fixed)
        : branches_(branches), n_nodes_(n_nodes), h_(h), beta_(h / (2.0 * inductance)), fixed_(std::move(fixed)) {
        index_ = keep_index(n_nodes, fixed_, rows_);
        const std::size_t nb = branches.size();
        alpha_.resize(nb);
        weight_.resize(nb);
        for (std::size_t e = 0; e < nb; ++e) {
            alpha_[e] = h / (2.0 * branches[e].r * branches[e].c);
            weight_[e] = 1.0 / (branches[e].r * (1.0 + alpha_[e]));
        }
        solver_.compute(nodal_matrix(branches, weight_, beta_, index_, rows_));
        if (solver_.info() != Eigen::Success) throw Error(ErrorKind::SingularKCL, "step matrix is not invertible");
        rhs_.resize(rows_);
        q_.resize(static_cast<Eigen::Index>(nb));
    }

    [[nodiscard]] double h() const noexcept { return h_; }

    // x = (v_C, I); v holds V on entry and V⁺ on exit; `fixed_next` are the
    // prescribed voltages at t + h.
    void step(Eigen::VectorXd& x, Eigen::VectorXd& v, const Eigen::VectorXd& fixed_next) {
        const auto nb = static_cast<Eigen::Index>(branches_.size());
        auto vc = x.head(nb);
        auto il = x.tail(n_nodes_);
        for (Eigen::Index e = 0; e < nb; ++e) {
            const auto& br = branches_[static_cast<std::size_t>(e)];
            const double i = (v[br.a] - v[br.b] - vc[e]) / br.r;
            q_[e] = vc[e] + h_ / (2.0 * br.c) * i;
        }
        rhs_.setZero();
        for (int j = 0; j < n_nodes_; ++j) {
            if (index_[j] >= 0) rhs_[index_[j]] = -il[j] - beta_ * v[j];
        }
        Eigen::VectorXd v_next = v;
        for (std::size_t s = 0; s < fixed_.size(); ++s) v_next[fixed_[s]] = fixed_next[static_cast<Eigen::Index>(s)];
        for (Eigen::Index e = 0; e < nb; ++e) {
            const auto& br = branches_[static_cast<std::size_t>(e)];
            const double wq = weight_[static_cast<std::size_t>(e)] * q_[e];
            const int ia = index_[br.a];
            const int ib = index_[br.b];
            const double g = weight_[static_cast<std::size_t>(e)];
            if (ia >= 0) rhs_[ia] += wq + ((ib < 0) ? g * v_next[br.b] : 0.0);
            if (ib >= 0) rhs_[ib] += -wq + ((ia < 0) ? g * v_next[br.a] : 0.0);
        }
        const Eigen::VectorXd sol = solver_.solve(rhs_);
        for (int j = 0; j < n_nodes_; ++j) {
            if (index_[j] >= 0) v_next[j] = sol[index_[j]];
        }
        for (Eigen::Index e = 0; e < nb; ++e) {
            const auto& br = branches_[static_cast<std::size_t>(e)];
            const double a = alpha_[static_cast<std::size_t>(e)];
            vc[e] = (q_[e] + a * (v_next[br.a] - v_next[br.b])) / (1.0 + a);
        }
        il += beta_ * (v_next + v);
        v = v_next;
    }

private:
    const std::vector<RcBranch>& branches_;
    int n_nodes_;
    double h_;
    double beta_;
    std::vector<int> fixed_;
    std::vector<int> index_;
    int rows_ = 0;
    std::vector<double> alpha_;
    std::vector<double> weight_;
    Eigen::SimplicialLDLT<SparseMatrix> solver_;
    Eigen::VectorXd rhs_;
    Eigen::VectorXd q_;
};

Eigen::VectorXd source_values(const TransientSetup& s, double t) {
    Eigen::VectorXd u = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(s.source_nodes.size()));
    if (t < s.switch_open_time) u.setConstant(s.source_amplitude * std::sin(s.drive_frequency * t));
    return u;
}

// Ideal switch release: the source currents stop instantly, so KCL forces
// ΣI_L = 0. The common-mode voltage impulse that does this shifts every
// inductor current by the same amount and leaves the capacitors untouched.
void release(Eigen::VectorXd& x, int n_nodes) {
    auto il = x.tail(n_nodes);
    il.array() -= il.mean();
}

}  // namespace

std::vector<RcBranch> rc_branches(const CircuitParams& params) {
    const int n = params.n_cells;
    std::vector<RcBranch> out;
    out.reserve(static_cast<std::size_t>(2 * n));
    for (int c = 0; c < n; ++c) {
        out.push_back({2 * c, 2 * c + 1, params.r1, params.c1});
        if (c + 1 < n) {
            out.push_back({2 * c + 1, 2 * c + 2, params.r2, params.c2});
        } else if (params.boundary == Boundary::Periodic) {
            out.push_back({2 * c + 1, 0, params.r2, params.c2});
        }
    }
    return out;
}

std::vector<int> default_source_nodes(int n_nodes) {
    const double last = n_nodes - 1;
    const int a = static_cast<int>(std::lround(last / 3.0));
    const int b = static_cast<int>(std::lround(2.0 * last / 3.0));
    if (a == b) return {a};
    return {a, b};
}

double TransientSetup::drive_period() const {
    return drive_frequency > 0.0 ? kTwoPi / drive_frequency : 0.0;
}

double max_time_step(const CircuitParams& params, double drive_frequency) {
    double shortest = std::sqrt(params.l * std::min(params.c1, params.c2));
    if (drive_frequency > 0.0) shortest = std::min(shortest, kTwoPi / drive_frequency);
    for (double rc : {params.r1 * params.c1, params.r2 * params.c2}) {
        if (rc > 0.0) shortest = std::min(shortest, rc);
    }
    return shortest / 20.0;
}

void TransientSetup::validate() const {
    params.validate(1);
    if (params.r1 <= 0.0 || params.r2 <= 0.0) {
        throw Error(ErrorKind::LosslessUnsupported, "transient simulation needs r1, r2 > 0");
    }
    const auto bad = [](const char* field, const std::string& why) {
        throw Error(ErrorKind::InvalidParams, fmt::format("transient.{} {}", field, why));
    };
    if (!(dt > 0.0)) bad("dt", "must be positive");
    if (!(t_end > 0.0)) bad("t_end", "must be positive");
    if (!(drive_frequency >= 0.0)) bad("drive_frequency", "must be non-negative");
    if (source_nodes.empty() && switch_open_time > 0.0) bad("source_nodes", "is empty");
    for (int s : source_nodes) {
        if (s < 0 || s >= params.n_nodes()) bad("source_nodes", fmt::format("entry {} is outside the chain", s));
    }
    auto sorted = source_nodes;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) bad("source_nodes", "has duplicates");
    if (dt > max_time_step(params, drive_frequency) * (1.0 + 1e-12)) {
        bad("dt", fmt::format("{:.6g} exceeds the bound {:.6g}", dt, max_time_step(params, drive_frequency)));
    }
    if (switch_open_time > 0.0 && drive_frequency > 0.0 && switch_open_time < 10.0 * drive_period() * (1.0 - 1e-12)) {
        bad("switch_open_time", "must cover at least 10 drive periods");
    }
    if (max_samples < 2 || max_samples > 100000) bad("max_samples", "must lie in [2, 100000]");
    if (error_check_stride < 1) bad("error_check_stride", "must be positive");
    if (initial_state) {
        const auto nb = static_cast<Eigen::Index>(rc_branches(params).size());
        if (initial_state->size() != nb + params.n_nodes()) bad("initial_state", "has the wrong dimension");
    }
}

TransientSetup make_transient_setup(const CircuitParams& params, Complex mode, double observe_periods) {
    TransientSetup s;
    s.params = params;
    s.drive_frequency = std::abs(mode.real());
    s.decay = std::abs(mode.imag());
    if (!(s.drive_frequency > 0.0)) {
        throw Error(ErrorKind::InvalidParams, "mode has no oscillating part to drive");
    }
    const double period = kTwoPi / s.drive_frequency;
    s.source_nodes = default_source_nodes(params.n_nodes());
    s.switch_open_time = 10.0 * period;
    if (s.decay > 0.0) s.switch_open_time = std::max(s.switch_open_time, 5.0 / s.decay);
    s.t_end = s.switch_open_time + observe_periods * period;
    s.dt = std::min(max_time_step(params, s.drive_frequency), period / 400.0);
    return s;
}

// ---- state space ----------------------------------------------------------

Eigen::VectorXd StateSpace::source(double t) const {
    Eigen::VectorXd u = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(source_nodes.size()));
    if (t < switch_open_time) u.setConstant(amplitude * std::sin(drive_frequency * t));
    return u;
}

Eigen::VectorXd StateSpace::source_term(double t) const {
    if (t >= switch_open_time || b_driven.cols() == 0) return Eigen::VectorXd::Zero(dim());
    return b_driven * source(t);
}

StateSpace assemble_state_space(const TransientSetup& setup) {
    setup.validate();
    const auto branches = rc_branches(setup.params);
    const int n = setup.params.n_nodes();
    const int nb = static_cast<int>(branches.size());
    const int dim = nb + n;
    const int ns = static_cast<int>(setup.source_nodes.size());

    StateSpace ss;
    ss.n_branches = nb;
    ss.n_nodes = n;
    ss.source_nodes = setup.source_nodes;
    ss.switch_open_time = setup.switch_open_time;
    ss.amplitude = setup.source_amplitude;
    ss.drive_frequency = setup.drive_frequency;

    // Column j of a voltage map is the KCL response to unit state j.
    const auto voltage_map = [&](const KclSolver& kcl, bool project) {
        Eigen::MatrixXd map(n, dim);
        Eigen::VectorXd x = Eigen::VectorXd::Zero(dim);
        const Eigen::VectorXd zero_u = Eigen::VectorXd::Zero(ns);
        for (int j = 0; j < dim; ++j) {
            x.setZero();
            x[j] = 1.0;
            if (project && j >= nb) x.tail(n).array() -= 1.0 / n;  // zero-sum current injection
            map.col(j) = kcl.solve(x.head(nb), x.tail(n), zero_u);
        }
        return map;
    };
    const auto dynamics = [&](const Eigen::MatrixXd& vmap) {
        Eigen::MatrixXd a = Eigen::MatrixXd::Zero(dim, dim);
        for (int e = 0; e < nb; ++e) {
            const auto& br = branches[static_cast<std::size_t>(e)];
            const double rc = br.r * br.c;
            a.row(e) = (vmap.row(br.a) - vmap.row(br.b)) / rc;
            a(e, e) -= 1.0 / rc;
        }
        for (int j = 0; j < n; ++j) a.row(nb + j) = vmap.row(j) / setup.params.l;
        return a;
    };

    const KclSolver free_kcl(branches, n, {});
    ss.v_map = voltage_map(free_kcl, true);
    ss.a = dynamics(ss.v_map);

    if (ns > 0) {
        const KclSolver driven_kcl(branches, n, setup.source_nodes);
        ss.v_map_driven = voltage_map(driven_kcl, false);
        ss.a_driven = dynamics(ss.v_map_driven);
        ss.v_map_source.resize(n, ns);
        const Eigen::VectorXd zero = Eigen::VectorXd::Zero(dim);
        for (int s = 0; s < ns; ++s) {
            Eigen::VectorXd u = Eigen::VectorXd::Zero(ns);
            u[s] = 1.0;
            ss.v_map_source.col(s) = driven_kcl.solve(zero.head(nb), zero.tail(n), u);
        }
        ss.b_driven = Eigen::MatrixXd::Zero(dim, ns);
        for (int e = 0; e < nb; ++e) {
            const auto& br = branches[static_cast<std::size_t>(e)];
            ss.b_driven.row(e) = (ss.v_map_source.row(br.a) - ss.v_map_source.row(br.b)) / (br.r * br.c);
        }
        for (int j = 0; j < n; ++j) ss.b_driven.row(nb + j) = ss.v_map_source.row(j) / setup.params.l;
    } else {
        ss.v_map_driven = ss.v_map;
        ss.a_driven = ss.a;
        ss.b_driven.resize(dim, 0);
        ss.v_map_source.resize(n, 0);
    }
    return ss;
}

// ---- integration ------------------------------------------------------------

double stored_energy(const std::vector<RcBranch>& branches, double inductance,
                     const Eigen::Ref<const Eigen::VectorXd>& state) {
    const auto nb = static_cast<Eigen::Index>(branches.size());
    double e = 0.0;
    for (Eigen::Index i = 0; i < nb; ++i) e += branches[static_cast<std::size_t>(i)].c * state[i] * state[i];
    e += inductance * state.tail(state.size() - nb).squaredNorm();
    return 0.5 * e;
}

TransientTrace simulate(const TransientSetup& setup) {
    setup.validate();
    const auto branches = rc_branches(setup.params);
    const int n = setup.params.n_nodes();
    const auto nb = static_cast<Eigen::Index>(branches.size());
    const double h = setup.dt;
    const double l = setup.params.l;

    const bool driven_phase = setup.switch_open_time > 0.0 && !setup.source_nodes.empty();
    const std::vector<int> none;
    const std::vector<int>& fixed = driven_phase ? setup.source_nodes : none;

    // Steps are counted rather than accumulated so the switch lands on a grid point.
    const auto n_switch = driven_phase ? static_cast<long long>(std::ceil(setup.switch_open_time / h - 1e-9)) : 0LL;
    const auto n_steps = static_cast<long long>(std::ceil(setup.t_end / h - 1e-9));
    const long long stride = std::max(1LL, (n_steps + setup.max_samples - 1) / (setup.max_samples - 1));

    TrapezoidStepper free_full(branches, n, l, h, {});
    TrapezoidStepper free_half(branches, n, l, 0.5 * h, {});
    std::optional<TrapezoidStepper> driven_full;
    std::optional<TrapezoidStepper> driven_half;
    if (driven_phase) {
        driven_full.emplace(branches, n, l, h, fixed);
        driven_half.emplace(branches, n, l, 0.5 * h, fixed);
    }

    Eigen::VectorXd x = setup.initial_state.value_or(Eigen::VectorXd::Zero(nb + n));
    Eigen::VectorXd v;
    if (driven_phase) {
        v = KclSolver(branches, n, fixed).solve(x.head(nb), x.tail(n), source_values(setup, 0.0));
    } else {
        release(x, n);
        v = KclSolver(branches, n, {}).solve(x.head(nb), x.tail(n), Eigen::VectorXd());
    }

    TransientTrace trace;
    trace.setup = setup;
    const auto n_samples = static_cast<Eigen::Index>(n_steps / stride + 1);
    trace.node_voltages.resize(n_samples, n);
    trace.ground_currents.resize(n_samples, n);
    trace.times.reserve(static_cast<std::size_t>(n_samples));
    trace.energy.reserve(static_cast<std::size_t>(n_samples));
    Eigen::Index row = 0;
    const auto record = [&](long long step) {
        trace.times.push_back(static_cast<double>(step) * h);
        trace.node_voltages.row(row) = v.transpose();
        trace.ground_currents.row(row) = x.tail(n).transpose();
        trace.energy.push_back(stored_energy(branches, l, x));
        ++row;
    };
    record(0);

    // Error reference: the running peak of the state, floored by the size the
    // sources impose (volts on capacitors, A/(ωL) in inductors) so the first
    // steps out of a zero state are not measured against nothing.
    double scale = x.lpNorm<Eigen::Infinity>();
    if (driven_phase) {
        scale = std::max(scale, setup.source_amplitude *
                                    std::max(1.0, 1.0 / (std::max(setup.drive_frequency, 1e-300) * l)));
    }
    double energy = stored_energy(branches, l, x);
    Eigen::VectorXd x_half;
    Eigen::VectorXd v_half;
    for (long long step = 0; step < n_steps; ++step) {
        const bool driven = step < n_switch;
        if (driven_phase && step == n_switch) {
            release(x, n);
            v = KclSolver(branches, n, {}).solve(x.head(nb), x.tail(n), Eigen::VectorXd());
            energy = stored_energy(branches, l, x);
        }
        const double t = static_cast<double>(step) * h;
        auto& full = driven ? *driven_full : free_full;
        auto& half = driven ? *driven_half : free_half;

        const bool check = (step % setup.error_check_stride == 0) || (step == n_switch);
        if (check) {
            x_half = x;
            v_half = v;
            half.step(x_half, v_half, driven ? source_values(setup, t + 0.5 * h) : Eigen::VectorXd());
            half.step(x_half, v_half, driven ? source_values(setup, t + h) : Eigen::VectorXd());
        }
        full.step(x, v, driven ? source_values(setup, t + h) : Eigen::VectorXd());
        scale = std::max(scale, x.lpNorm<Eigen::Infinity>());
        if (check && scale > 0.0) {
            // Local error of the full step ≈ (4/3)·(x_h − x_{h/2}) for a second-order method.
            const double err = 4.0 / 3.0 * (x - x_half).lpNorm<Eigen::Infinity>() / scale;
            trace.max_error_estimate = std::max(trace.max_error_estimate, err);
            if (err > kStepTolerance) {
                throw Error(ErrorKind::StepRejected,
                            fmt::format("local error {:.3g} at t = {:.6g} exceeds {:.0e}; reduce dt", err, t + h,
                                        kStepTolerance));
            }
        }
        if (!driven) {
            const double e = stored_energy(branches, l, x);
            if (e > energy * (1.0 + kEnergySlack) + 1e-300) {
                throw Error(ErrorKind::EnergyIncrease,
                            fmt::format("stored energy rose from {:.6g} to {:.6g} at t = {:.6g}", energy, e, t + h));
            }
            energy = e;
        }
        if ((step + 1) % stride == 0) record(step + 1);
    }
    trace.node_voltages.conservativeResize(row, n);
    trace.ground_currents.conservativeResize(row, n);
    trace.final_state = x;
    trace.steps = n_steps;
    return trace;
}

// ---- readout ------------------------------------------------------------------

CurrentProfile ground_current_profile(const TransientTrace& trace, double t_begin, double t_end) {
    const double earliest = trace.setup.switch_open_time + 3.0 * trace.setup.drive_period();
    if (trace.times.empty() || t_begin < earliest * (1.0 - 1e-12) || t_end <= t_begin ||
        t_end > trace.times.back() * (1.0 + 1e-12)) {
        throw Error(ErrorKind::WindowOutOfRange,
                    fmt::format("window [{:.6g}, {:.6g}] must lie in [{:.6g}, {:.6g}]", t_begin, t_end, earliest,
                                trace.times.empty() ? 0.0 : trace.times.back()));
    }
    const Eigen::Index n = trace.ground_currents.cols();
    CurrentProfile p;
    p.t_begin = t_begin;
    p.t_end = t_end;
    p.rms = Eigen::VectorXd::Zero(n);
    int count = 0;
    for (std::size_t i = 0; i < trace.times.size(); ++i) {
        if (trace.times[i] < t_begin || trace.times[i] > t_end) continue;
        p.rms += trace.ground_currents.row(static_cast<Eigen::Index>(i)).transpose().cwiseAbs2();
        ++count;
    }
    if (count == 0) throw Error(ErrorKind::WindowOutOfRange, "window holds no samples");
    p.rms = (p.rms / count).cwiseSqrt();
    const double total = p.rms.sum();
    p.normalized = total > 0.0 ? Eigen::VectorXd(p.rms / total) : Eigen::VectorXd::Constant(n, 1.0 / n);
    return p;
}

CurrentProfile ground_current_profile(const TransientTrace& trace) {
    const double begin = trace.setup.switch_open_time + 3.0 * trace.setup.drive_period();
    return ground_current_profile(trace, begin, trace.times.empty() ? begin : trace.times.back());
}

EndMass end_mass(const Eigen::VectorXd& normalized, int cells) {
    const auto n = normalized.size();
    const auto k = std::min<Eigen::Index>(2 * cells, n / 2);
    return {normalized.head(k).sum(), normalized.tail(k).sum()};
}

namespace {

struct DampedCosine {
    using Scalar = double;
    enum { InputsAtCompileTime = Eigen::Dynamic, ValuesAtCompileTime = Eigen::Dynamic };
    using InputType = Eigen::VectorXd;
    using ValueType = Eigen::VectorXd;
    using JacobianType = Eigen::MatrixXd;

    const std::vector<double>& tau;
    const std::vector<double>& y;

    [[nodiscard]] int inputs() const { return 4; }
    [[nodiscard]] int values() const { return static_cast<int>(tau.size()); }

    // p = (A, ω_R, ω_I, φ) in the shifted time τ = t − t0.
    int operator()(const Eigen::VectorXd& p, Eigen::VectorXd& f) const {
        for (std::size_t i = 0; i < tau.size(); ++i) {
            f[static_cast<Eigen::Index>(i)] = p[0] * std::exp(-p[2] * tau[i]) * std::cos(p[1] * tau[i] + p[3]) - y[i];
        }
        return 0;
    }
    int df(const Eigen::VectorXd& p, Eigen::MatrixXd& j) const {
        for (std::size_t i = 0; i < tau.size(); ++i) {
            const double env = std::exp(-p[2] * tau[i]);
            const double c = std::cos(p[1] * tau[i] + p[3]);
            const double s = std::sin(p[1] * tau[i] + p[3]);
            const auto r = static_cast<Eigen::Index>(i);
            j(r, 0) = env * c;
            j(r, 1) = -p[0] * env * s * tau[i];
            j(r, 2) = -p[0] * env * c * tau[i];
            j(r, 3) = -p[0] * env * s;
        }
        return 0;
    }
};

}  // namespace

DampedFit fit_damped_oscillation(std::span<const double> times, std::span<const double> series, double t0) {
    if (times.size() != series.size()) throw Error(ErrorKind::InvalidParams, "times and series differ in length");
    std::vector<double> tau;
    std::vector<double> y;
    double peak = 0.0;
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (times[i] < t0) continue;
        tau.push_back(times[i] - t0);
        y.push_back(series[i]);
        peak = std::max(peak, std::abs(series[i]));
    }
    if (tau.size() < 8 || peak == 0.0) throw Error(ErrorKind::InsufficientSignal, "no signal after t0");

    // Keep samples up to the last one above the noise floor.
    const double floor = kNoiseFloor * peak;
    std::size_t last = y.size();
    while (last > 0 && std::abs(y[last - 1]) <= floor) --last;
    tau.resize(last);
    y.resize(last);

    std::vector<double> crossings;
    for (std::size_t i = 1; i < y.size(); ++i) {
        if ((y[i - 1] < 0.0) != (y[i] < 0.0) && y[i] != y[i - 1]) {
            crossings.push_back(tau[i - 1] - y[i - 1] * (tau[i] - tau[i - 1]) / (y[i] - y[i - 1]));
        }
    }
    if (crossings.size() < 3) throw Error(ErrorKind::FitDiverged, "series does not oscillate");
    const double half_period = (crossings.back() - crossings.front()) / static_cast<double>(crossings.size() - 1);
    const double omega_r0 = kPi / half_period;
    const double periods = 0.5 * static_cast<double>(crossings.size() - 1);
    if (periods < kMinPeriods) {
        throw Error(ErrorKind::InsufficientSignal,
                    fmt::format("{:.1f} periods above the noise floor, need {}", periods, kMinPeriods));
    }

    // Log-envelope: one peak per half period, regressed against time.
    std::vector<double> pt;
    std::vector<double> pl;
    std::size_t i = 0;
    for (std::size_t c = 0; c + 1 < crossings.size(); ++c) {
        double best = 0.0;
        double at = 0.0;
        while (i < tau.size() && tau[i] < crossings[c]) ++i;
        for (std::size_t j = i; j < tau.size() && tau[j] < crossings[c + 1]; ++j) {
            if (std::abs(y[j]) > best) {
                best = std::abs(y[j]);
                at = tau[j];
            }
        }
        if (best > 0.0) {
            pt.push_back(at);
            pl.push_back(std::log(best));
        }
    }
    const auto m = static_cast<double>(pt.size());
    const double mt = std::accumulate(pt.begin(), pt.end(), 0.0) / m;
    const double ml = std::accumulate(pl.begin(), pl.end(), 0.0) / m;
    double sxy = 0.0;
    double sxx = 0.0;
    for (std::size_t k = 0; k < pt.size(); ++k) {
        sxy += (pt[k] - mt) * (pl[k] - ml);
        sxx += (pt[k] - mt) * (pt[k] - mt);
    }
    const double omega_i0 = sxx > 0.0 ? -sxy / sxx : 0.0;

    // Amplitude and phase by linear least squares with both rates fixed.
    Eigen::MatrixXd basis(static_cast<Eigen::Index>(tau.size()), 2);
    Eigen::VectorXd rhs(static_cast<Eigen::Index>(tau.size()));
    for (std::size_t k = 0; k < tau.size(); ++k) {
        const double env = std::exp(-omega_i0 * tau[k]);
        basis(static_cast<Eigen::Index>(k), 0) = env * std::cos(omega_r0 * tau[k]);
        basis(static_cast<Eigen::Index>(k), 1) = env * std::sin(omega_r0 * tau[k]);
        rhs[static_cast<Eigen::Index>(k)] = y[k];
    }
    const Eigen::Vector2d ab = basis.colPivHouseholderQr().solve(rhs);

    Eigen::VectorXd p(4);
    p << std::hypot(ab[0], ab[1]), omega_r0, omega_i0, std::atan2(-ab[1], ab[0]);
    DampedCosine functor{tau, y};
    Eigen::LevenbergMarquardt<DampedCosine> lm(functor);
    lm.parameters.xtol = 1e-14;
    lm.parameters.ftol = 1e-14;
    lm.parameters.maxfev = 2000;
    const auto status = lm.minimize(p);

    const bool converged = status == Eigen::LevenbergMarquardtSpace::RelativeReductionTooSmall ||
                           status == Eigen::LevenbergMarquardtSpace::RelativeErrorTooSmall ||
                           status == Eigen::LevenbergMarquardtSpace::RelativeErrorAndReductionTooSmall ||
                           status == Eigen::LevenbergMarquardtSpace::CosinusTooSmall ||
                           status == Eigen::LevenbergMarquardtSpace::XtolTooSmall ||
                           status == Eigen::LevenbergMarquardtSpace::FtolTooSmall ||
                           status == Eigen::LevenbergMarquardtSpace::GtolTooSmall;
    if (!converged || !p.allFinite()) {
        throw Error(ErrorKind::FitDiverged, fmt::format("least squares stopped with status {}", static_cast<int>(status)));
    }
    if (p[0] < 0.0) {
        p[0] = -p[0];
        p[3] += kPi;
    }
    if (p[1] < 0.0) {  // cos is even
        p[1] = -p[1];
        p[3] = -p[3];
    }
    if (!(p[2] > 0.0)) {
        throw Error(ErrorKind::FitDiverged, fmt::format("fitted decay rate {:.3g} is not positive", p[2]));
    }
    if (std::abs(p[1] - omega_r0) > 0.5 * omega_r0) {
        throw Error(ErrorKind::FitDiverged, "fitted frequency left the zero-crossing estimate");
    }

    Eigen::VectorXd f(static_cast<Eigen::Index>(tau.size()));
    functor(p, f);
    const double signal_rms = std::sqrt(std::inner_product(y.begin(), y.end(), y.begin(), 0.0) / y.size());

    // Report in absolute time: A e^{−ω_I t} cos(ω_R t + φ).
    DampedFit fit;
    fit.omega_r = p[1];
    fit.omega_i = p[2];
    fit.amplitude = p[0] * std::exp(p[2] * t0);
    fit.phase = std::remainder(p[3] - p[1] * t0, kTwoPi);
    fit.rms_residual = f.norm() / std::sqrt(static_cast<double>(f.size())) / signal_rms;
    fit.t_begin = t0;
    fit.t_end = t0 + tau.back();
    return fit;
}

DampedFit fit_trace(const TransientTrace& trace) {
    const auto profile = ground_current_profile(trace);
    Eigen::Index node = 0;
    profile.rms.maxCoeff(&node);
    const auto& col = trace.ground_currents.col(node);
    std::vector<double> series(col.data(), col.data() + col.size());
    auto fit = fit_damped_oscillation(trace.times, series, profile.t_begin);
    fit.node = static_cast<int>(node);
    return fit;
}

}  // namespace nhssh
