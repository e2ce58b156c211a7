#include "hjreach/hjb.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace hjreach {

// ---------------------------------------------------------------------------
// Models

double VehicleHamiltonian::flux(std::span<const int> idx, std::span<const double> z,
                                std::span<const double> p, std::span<double> alpha) const {
    // The sweep prepares node-indexed trig tables; standalone evaluation
    // (no prepare() call) falls back to the state vector directly.
    const bool cached = !cos_psi_.empty();
    const double c = cached ? cos_psi_[static_cast<std::size_t>(idx[2])] : std::cos(z[2]);
    const double s = cached ? sin_psi_[static_cast<std::size_t>(idx[2])] : std::sin(z[2]);
    const double v = cached ? speed_[static_cast<std::size_t>(idx[3])] : z[3];
    const double a_coef = std::max(std::abs(bounds_.a_min), std::abs(bounds_.a_max));
    alpha[0] = std::abs(v * c);
    alpha[1] = std::abs(v * s);
    alpha[2] = bounds_.w_max;
    alpha[3] = a_coef;
    // The yaw and speed ranges are vehicle envelope constraints: on those grid
    // faces the maximization runs only over controls that keep the state
    // inside the box (state-constrained boundary). Without this, the optimal
    // control at a face points outside, the one-sided stencil has to invent
    // inflow data, and the solved field near the face never grid-converges.
    double w_lo = -bounds_.w_max, w_hi = bounds_.w_max;
    double a_lo = bounds_.a_min, a_hi = bounds_.a_max;
    if (cached) {
        if (idx[2] == 0) w_lo = std::max(w_lo, 0.0);
        if (idx[2] == n_psi_ - 1) w_hi = std::min(w_hi, 0.0);
        if (idx[3] == 0) a_lo = std::max(a_lo, 0.0);
        if (idx[3] == n_speed_ - 1) a_hi = std::min(a_hi, 0.0);
    }
    return -v * c * p[0] - v * s * p[1] + std::max(-w_lo * p[2], -w_hi * p[2]) +
           std::max(-a_lo * p[3], -a_hi * p[3]);
}

std::vector<double> VehicleHamiltonian::sup_norms(const GridSpec& grid) const {
    const auto s = sup_norms_on_domain(grid, bounds_);
    return {s.begin(), s.end()};
}

void VehicleHamiltonian::prepare(const GridSpec& grid) {
    if (grid.dim() != 4) throw std::invalid_argument("VehicleHamiltonian: 4-axis grid required");
    cos_psi_.resize(static_cast<std::size_t>(grid.axis(2).n));
    sin_psi_.resize(static_cast<std::size_t>(grid.axis(2).n));
    for (int i = 0; i < grid.axis(2).n; ++i) {
        cos_psi_[static_cast<std::size_t>(i)] = std::cos(grid.coord(2, i));
        sin_psi_[static_cast<std::size_t>(i)] = std::sin(grid.coord(2, i));
    }
    speed_.resize(static_cast<std::size_t>(grid.axis(3).n));
    for (int i = 0; i < grid.axis(3).n; ++i) speed_[static_cast<std::size_t>(i)] = grid.coord(3, i);
    n_psi_ = grid.axis(2).n;
    n_speed_ = grid.axis(3).n;
}

double AdvectionHamiltonian::flux(std::span<const int> /*idx*/, std::span<const double> /*z*/,
                                  std::span<const double> p, std::span<double> alpha) const {
    double h = 0.0;
    for (std::size_t j = 0; j < velocity_.size(); ++j) {
        h -= velocity_[j] * p[j];
        alpha[j] = std::abs(velocity_[j]);
    }
    return h;
}

std::vector<double> AdvectionHamiltonian::sup_norms(const GridSpec& grid) const {
    (void)grid;
    std::vector<double> s(velocity_.size());
    for (std::size_t j = 0; j < velocity_.size(); ++j) s[j] = std::abs(velocity_[j]);
    return s;
}

// ---------------------------------------------------------------------------

double numerical_hamiltonian(const HamiltonianModel& model, std::span<const int> idx,
                             std::span<const double> z, std::span<const double> p_minus,
                             std::span<const double> p_plus, HJBMode mode) {
    std::array<double, kMaxAxes> pavg{}, alpha{};
    const int d = model.dim();
    for (int j = 0; j < d; ++j)
        pavg[static_cast<std::size_t>(j)] =
            0.5 * (p_minus[static_cast<std::size_t>(j)] + p_plus[static_cast<std::size_t>(j)]);
    double h = model.flux(idx, z, std::span<const double>(pavg.data(), static_cast<std::size_t>(d)),
                          std::span<double>(alpha.data(), static_cast<std::size_t>(d)));
    for (int j = 0; j < d; ++j)
        h -= 0.5 * alpha[static_cast<std::size_t>(j)] *
             (p_plus[static_cast<std::size_t>(j)] - p_minus[static_cast<std::size_t>(j)]);
    // The pause clamp wraps the full discrete flux (dissipation included) so
    // that frozen nodes stay exactly frozen and the update is monotone.
    if (mode == HJBMode::CaptureBasin) h = std::max(0.0, h);
    return h;
}

HJBSolver::HJBSolver(HJBProblem problem) : problem_(std::move(problem)) {
    if (!problem_.model) throw std::invalid_argument("HJBSolver: missing Hamiltonian model");
    if (problem_.model->dim() != problem_.grid.dim())
        throw std::invalid_argument("HJBSolver: model/grid dimension mismatch");
    if (!(problem_.horizon > 0.0)) throw std::invalid_argument("HJBSolver: horizon must be positive");
    if (!problem_.target.valid() || !problem_.constraint.valid())
        throw std::invalid_argument("HJBSolver: target and constraint must be set");
    problem_.model->prepare(problem_.grid);
    sup_norms_ = problem_.model->sup_norms(problem_.grid);
    stable_dt_ = cfl_timestep(problem_.grid, sup_norms_, problem_.cfl);
}

ScalarField HJBSolver::constraint_field(double t) const {
    const GridSpec& g = problem_.grid;
    ScalarField out = ScalarField::zeros(g, t);
    const int d = g.dim();
#pragma omp parallel for schedule(static)
    for (std::int64_t flat = 0; flat < static_cast<std::int64_t>(g.size()); ++flat) {
        std::array<int, kMaxAxes> idx{};
        std::array<double, kMaxAxes> z{};
        g.unflatten(static_cast<std::size_t>(flat), std::span<int>(idx.data(), static_cast<std::size_t>(d)));
        for (int a = 0; a < d; ++a)
            z[static_cast<std::size_t>(a)] = g.coord(a, idx[static_cast<std::size_t>(a)]);
        out.values[static_cast<std::size_t>(flat)] =
            problem_.constraint(std::span<const double>(z.data(), static_cast<std::size_t>(d)), t);
    }
    return out;
}

ScalarField HJBSolver::initialize() const {
    const GridSpec& g = problem_.grid;
    // PDE time is time-to-go; the obstacle clock runs on absolute time
    // horizon - t, so zero budget means arrival at the absolute horizon.
    ScalarField out = constraint_field(problem_.horizon);
    const int d = g.dim();
    std::array<int, kMaxAxes> idx{};
    std::array<double, kMaxAxes> z{};
    for (std::size_t flat = 0; flat < g.size(); ++flat) {
        g.unflatten(flat, std::span<int>(idx.data(), static_cast<std::size_t>(d)));
        for (int a = 0; a < d; ++a)
            z[static_cast<std::size_t>(a)] = g.coord(a, idx[static_cast<std::size_t>(a)]);
        const double phi =
            problem_.target(std::span<const double>(z.data(), static_cast<std::size_t>(d)), 0.0);
        out.values[flat] = std::max(phi, out.values[flat]);
    }
    out.time_stamp = 0.0;
    return out;
}

void HJBSolver::step_into(const ScalarField& v, const ScalarField& g_next, double dt,
                          ScalarField& out) const {
    const GridSpec& grid = problem_.grid;
    const int d = grid.dim();
    // The capture clamp realizes the pause control (scaled dynamics). With a
    // time-dependent constraint the pause would have to stop the obstacle
    // clock as well, which a 4-state grid cannot represent: clamping there
    // would let values survive by waiting for obstacles to pass. For moving
    // constraints the sweep therefore runs unclamped (arrival at the
    // horizon), which coincides with the capture basin for absorbing targets.
    const bool capture =
        problem_.mode == HJBMode::CaptureBasin && !problem_.constraint.time_dependent();
    const HamiltonianModel& model = *problem_.model;

    std::array<double, kMaxAxes> h{}, inv_h{};
    std::array<std::size_t, kMaxAxes> stride{};
    std::array<int, kMaxAxes> count{};
    std::array<const double*, kMaxAxes> coords{};
    std::array<std::vector<double>, kMaxAxes> coord_store;
    for (int a = 0; a < d; ++a) {
        h[static_cast<std::size_t>(a)] = grid.axis(a).step();
        inv_h[static_cast<std::size_t>(a)] = 1.0 / h[static_cast<std::size_t>(a)];
        stride[static_cast<std::size_t>(a)] = grid.stride(a);
        count[static_cast<std::size_t>(a)] = grid.axis(a).n;
        auto& store = coord_store[static_cast<std::size_t>(a)];
        store.resize(static_cast<std::size_t>(grid.axis(a).n));
        for (int i = 0; i < grid.axis(a).n; ++i) store[static_cast<std::size_t>(i)] = grid.coord(a, i);
        coords[static_cast<std::size_t>(a)] = store.data();
    }

    const double* vin = v.values.data();
    const double* gin = g_next.values.data();
    double* vout = out.values.data();
    const std::int64_t total = static_cast<std::int64_t>(grid.size());

#pragma omp parallel for schedule(static)
    for (std::int64_t flat = 0; flat < total; ++flat) {
        std::array<int, kMaxAxes> idx{};
        std::array<double, kMaxAxes> z{}, pm{}, pp{}, pavg{}, alpha{};
        std::size_t rem = static_cast<std::size_t>(flat);
        for (int a = 0; a < d; ++a) {
            idx[static_cast<std::size_t>(a)] = static_cast<int>(rem / stride[static_cast<std::size_t>(a)]);
            rem %= stride[static_cast<std::size_t>(a)];
            z[static_cast<std::size_t>(a)] =
                coords[static_cast<std::size_t>(a)][static_cast<std::size_t>(idx[static_cast<std::size_t>(a)])];
        }
        const double vi = vin[flat];
        for (int a = 0; a < d; ++a) {
            const std::size_t s = stride[static_cast<std::size_t>(a)];
            const int i = idx[static_cast<std::size_t>(a)];
            const int n = count[static_cast<std::size_t>(a)];
            const double ha = h[static_cast<std::size_t>(a)];
            const double inv = inv_h[static_cast<std::size_t>(a)];
            const double vm1 = (i >= 1) ? vin[flat - static_cast<std::int64_t>(s)]
                                        : 2.0 * vi - vin[flat + static_cast<std::int64_t>(s)];
            const double vp1 = (i <= n - 2) ? vin[flat + static_cast<std::int64_t>(s)]
                                            : 2.0 * vi - vin[flat - static_cast<std::int64_t>(s)];
            const double dm = (vi - vm1) * inv;
            const double dp = (vp1 - vi) * inv;
            const double d2c =
                (i >= 1 && i <= n - 2) ? (vp1 - 2.0 * vi + vm1) * inv * inv : 0.0;
            const double d2m =
                (i >= 2) ? (vi - 2.0 * vin[flat - static_cast<std::int64_t>(s)] +
                            vin[flat - 2 * static_cast<std::int64_t>(s)]) *
                               inv * inv
                         : 0.0;
            const double d2p =
                (i <= n - 3) ? (vin[flat + 2 * static_cast<std::int64_t>(s)] - 2.0 * vp1 + vi) *
                                   inv * inv
                             : 0.0;
            auto minmod = [](double x, double y) {
                if (x * y <= 0.0) return 0.0;
                return std::abs(x) < std::abs(y) ? x : y;
            };
            pm[static_cast<std::size_t>(a)] = dm + 0.5 * ha * minmod(d2m, d2c);
            pp[static_cast<std::size_t>(a)] = dp - 0.5 * ha * minmod(d2c, d2p);
            pavg[static_cast<std::size_t>(a)] =
                0.5 * (pm[static_cast<std::size_t>(a)] + pp[static_cast<std::size_t>(a)]);
        }
        double ham = model.flux(std::span<const int>(idx.data(), static_cast<std::size_t>(d)),
                                std::span<const double>(z.data(), static_cast<std::size_t>(d)),
                                std::span<const double>(pavg.data(), static_cast<std::size_t>(d)),
                                std::span<double>(alpha.data(), static_cast<std::size_t>(d)));
        for (int a = 0; a < d; ++a)
            ham -= 0.5 * alpha[static_cast<std::size_t>(a)] *
                   (pp[static_cast<std::size_t>(a)] - pm[static_cast<std::size_t>(a)]);
        // The pause clamp wraps the full numerical Hamiltonian (dissipation
        // included): wherever the discrete flux is non-positive the node is
        // frozen exactly, so converged basin interiors stop drifting and the
        // update stays monotone (nested masks) with v >= g preserved.
        if (capture) ham = std::max(0.0, ham);
        vout[flat] = std::max(vi - dt * ham, gin[flat]);
    }
}

ScalarField HJBSolver::step(const ScalarField& v, double t, double dt) const {
    if (!(dt > 0.0)) throw std::invalid_argument("HJBSolver::step: dt must be positive");
    if (dt > stable_dt_ * (1.0 + 1e-12))
        throw NumericalError("HJBSolver::step: dt exceeds the CFL-stable bound");
    const ScalarField g_next = constraint_field(std::max(0.0, problem_.horizon - (t + dt)));
    ScalarField out = ScalarField::zeros(problem_.grid, t + dt);
    step_into(v, g_next, dt, out);
    return out;
}

ValueEvolution HJBSolver::solve(const SolveOptions& options) const {
#ifdef _OPENMP
    if (options.workers > 0) omp_set_num_threads(options.workers);
#endif
    const double T = problem_.horizon;
    double dt = stable_dt_;
    std::size_t nsteps;
    if (dt == kInf || dt >= T) {
        dt = T;
        nsteps = 1;
    } else {
        nsteps = static_cast<std::size_t>(std::ceil(T / dt - 1e-12));
    }
    std::vector<double> times(nsteps + 1);
    for (std::size_t k = 0; k <= nsteps; ++k) times[k] = std::min(T, static_cast<double>(k) * dt);

    // Map each requested output time to the nearest completed step.
    std::vector<std::vector<std::size_t>> want(nsteps + 1);
    for (std::size_t r = 0; r < options.snapshot_times.size(); ++r) {
        std::size_t best = 0;
        for (std::size_t k = 1; k <= nsteps; ++k)
            if (std::abs(times[k] - options.snapshot_times[r]) <
                std::abs(times[best] - options.snapshot_times[r]))
                best = k;
        want[best].push_back(r);
    }

    ValueEvolution evo;
    evo.snapshots.resize(options.snapshot_times.size());

    ScalarField current = initialize();
    for (std::size_t r : want[0]) evo.snapshots[r] = current;
    if (options.observer) options.observer(0.0, current);

    const bool static_g = !problem_.constraint.time_dependent();
    ScalarField g_field = constraint_field(static_g ? 0.0 : T);
    ScalarField next = ScalarField::zeros(problem_.grid);

    for (std::size_t k = 1; k <= nsteps; ++k) {
        const double step_dt = times[k] - times[k - 1];
        if (step_dt <= 0.0) continue;
        if (!static_g) g_field = constraint_field(std::max(0.0, T - times[k]));
        next.time_stamp = times[k];
        step_into(current, g_field, step_dt, next);
        std::swap(current, next);
        current.time_stamp = times[k];
        evo.dt_schedule.push_back(step_dt);
        for (std::size_t r : want[k]) evo.snapshots[r] = current;
        if (options.observer) options.observer(times[k], current);
    }

    // Always expose the final field as the last snapshot if none was requested.
    if (options.snapshot_times.empty()) evo.snapshots.push_back(current);
    return evo;
}

std::vector<std::uint8_t> reachable_set(const ScalarField& snapshot) {
    std::vector<std::uint8_t> mask(snapshot.values.size());
    for (std::size_t i = 0; i < mask.size(); ++i) mask[i] = snapshot.values[i] <= 0.0 ? 1 : 0;
    return mask;
}

std::vector<std::uint8_t> mask_slice_xy(const GridSpec& grid,
                                        const std::vector<std::uint8_t>& mask, int psi_index,
                                        int v_index) {
    if (grid.dim() != 4) throw std::invalid_argument("mask_slice_xy: 4-axis grid required");
    const int nx = grid.axis(0).n, ny = grid.axis(1).n;
    std::vector<std::uint8_t> out(static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny));
    for (int ix = 0; ix < nx; ++ix) {
        for (int iy = 0; iy < ny; ++iy) {
            const std::array<int, 4> idx{ix, iy, psi_index, v_index};
            out[static_cast<std::size_t>(ix) * static_cast<std::size_t>(ny) +
                static_cast<std::size_t>(iy)] = mask[grid.flatten(idx)];
        }
    }
    return out;
}

int connected_components(const std::vector<std::uint8_t>& slice, int nx, int ny) {
    std::vector<std::uint8_t> seen(slice.size(), 0);
    std::vector<int> stack;
    int components = 0;
    auto at = [&](int x, int y) { return static_cast<std::size_t>(x) * static_cast<std::size_t>(ny) + static_cast<std::size_t>(y); };
    for (int x = 0; x < nx; ++x) {
        for (int y = 0; y < ny; ++y) {
            if (!slice[at(x, y)] || seen[at(x, y)]) continue;
            ++components;
            stack.push_back(static_cast<int>(at(x, y)));
            seen[at(x, y)] = 1;
            while (!stack.empty()) {
                const int cur = stack.back();
                stack.pop_back();
                const int cx = cur / ny, cy = cur % ny;
                const int dx[] = {1, -1, 0, 0};
                const int dy[] = {0, 0, 1, -1};
                for (int k = 0; k < 4; ++k) {
                    const int nx2 = cx + dx[k], ny2 = cy + dy[k];
                    if (nx2 < 0 || nx2 >= nx || ny2 < 0 || ny2 >= ny) continue;
                    if (!slice[at(nx2, ny2)] || seen[at(nx2, ny2)]) continue;
                    seen[at(nx2, ny2)] = 1;
                    stack.push_back(static_cast<int>(at(nx2, ny2)));
                }
            }
        }
    }
    return components;
}

}  // namespace hjreach
