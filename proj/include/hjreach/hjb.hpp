#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <stdexcept>
#include <vector>

#include "hjreach/dynamics.hpp"
#include "hjreach/grid.hpp"
#include "hjreach/levelset.hpp"

namespace hjreach {

/// Raised when the explicit scheme would be stepped past its stability bound.
struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Analytic Hamiltonian H(z,p) = max_u(-f(z,u).p) together with the local
/// Lax-Friedrichs viscosity coefficients (bounds on |dH/dp_j|).
class HamiltonianModel {
public:
    virtual ~HamiltonianModel() = default;
    virtual int dim() const = 0;
    /// Returns H(z, p) and fills alpha with per-axis viscosity coefficients.
    virtual double flux(std::span<const int> idx, std::span<const double> z,
                        std::span<const double> p, std::span<double> alpha) const = 0;
    virtual std::vector<double> sup_norms(const GridSpec& grid) const = 0;
    /// Called once before a sweep so the model can cache per-axis tables.
    virtual void prepare(const GridSpec& grid) { (void)grid; }
};

/// The 4-state point-mass vehicle on an (x, y, psi, v) grid.
class VehicleHamiltonian final : public HamiltonianModel {
public:
    explicit VehicleHamiltonian(ControlBounds bounds) : bounds_(bounds) {}

    int dim() const override { return 4; }
    double flux(std::span<const int> idx, std::span<const double> z, std::span<const double> p,
                std::span<double> alpha) const override;
    std::vector<double> sup_norms(const GridSpec& grid) const override;
    void prepare(const GridSpec& grid) override;

    const ControlBounds& bounds() const { return bounds_; }

private:
    ControlBounds bounds_;
    std::vector<double> cos_psi_, sin_psi_, speed_;
    int n_psi_ = 0, n_speed_ = 0;
};

/// Constant-velocity transport z' = c (no control); H = -c.p. Used by the
/// scheme sanity checks against method-of-characteristics solutions.
class AdvectionHamiltonian final : public HamiltonianModel {
public:
    explicit AdvectionHamiltonian(std::vector<double> velocity) : velocity_(std::move(velocity)) {}

    int dim() const override { return static_cast<int>(velocity_.size()); }
    double flux(std::span<const int> idx, std::span<const double> z, std::span<const double> p,
                std::span<double> alpha) const override;
    std::vector<double> sup_norms(const GridSpec& grid) const override;

private:
    std::vector<double> velocity_;
};

enum class HJBMode : std::uint8_t {
    ExactTime,     // reachable set at exactly time t
    CaptureBasin,  // lambda-scaled dynamics; H clamped at zero
};

struct HJBProblem {
    GridSpec grid;
    std::shared_ptr<HamiltonianModel> model;
    LevelSetExpr target;      // phi
    LevelSetExpr constraint;  // g, possibly time-dependent
    double horizon = 0.0;
    HJBMode mode = HJBMode::CaptureBasin;
    double cfl = 0.5;
};

struct ValueEvolution {
    std::vector<ScalarField> snapshots;  // at the requested output times
    std::vector<double> dt_schedule;
};

struct SolveOptions {
    std::vector<double> snapshot_times;  // snapped to the nearest completed step
    int workers = 0;                     // 0 = all hardware threads
    /// Invoked after every completed step with (t_{n+1}, new field).
    std::function<void(double, const ScalarField&)> observer;
};

/// Monotone local Lax-Friedrichs flux over one-sided gradients:
/// H(z, (p-+p+)/2) - sum_j alpha_j (p_j+ - p_j-)/2, with the capture clamp
/// applied to the full discrete flux (viscosity included) so capture updates
/// are exactly non-increasing.
double numerical_hamiltonian(const HamiltonianModel& model, std::span<const int> idx,
                             std::span<const double> z, std::span<const double> p_minus,
                             std::span<const double> p_plus, HJBMode mode);

class HJBSolver {
public:
    explicit HJBSolver(HJBProblem problem);

    const HJBProblem& problem() const { return problem_; }
    double stable_timestep() const { return stable_dt_; }

    /// v0(z) = max(phi(z), g(z, 0)) at every node.
    ScalarField initialize() const;

    /// One forward-Euler update with the nodewise obstacle clamp; refuses
    /// time steps beyond the CFL bound.
    ScalarField step(const ScalarField& v, double t, double dt) const;

    /// Full sweep from 0 to the horizon on the CFL schedule.
    ValueEvolution solve(const SolveOptions& options = {}) const;

private:
    ScalarField constraint_field(double t) const;
    void step_into(const ScalarField& v, const ScalarField& g_next, double dt,
                   ScalarField& out) const;

    HJBProblem problem_;
    double stable_dt_ = 0.0;
    std::vector<double> sup_norms_;
};

inline ScalarField initialize(const HJBProblem& p) { return HJBSolver(p).initialize(); }
inline ValueEvolution solve(const HJBProblem& p, const SolveOptions& opts = {}) {
    return HJBSolver(p).solve(opts);
}

/// Non-positive sublevel mask of a snapshot.
std::vector<std::uint8_t> reachable_set(const ScalarField& snapshot);

/// (x,y) slice of a 4D mask at fixed (psi, v) node indices; row-major over (i_x, i_y).
std::vector<std::uint8_t> mask_slice_xy(const GridSpec& grid,
                                        const std::vector<std::uint8_t>& mask, int psi_index,
                                        int v_index);

/// 4-connected component count of an (nx x ny) boolean slice.
int connected_components(const std::vector<std::uint8_t>& slice, int nx, int ny);

}  // namespace hjreach
