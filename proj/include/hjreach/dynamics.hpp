#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "hjreach/grid.hpp"

namespace hjreach {

/// Vehicle state (position, yaw angle, speed modulus).
struct State4 {
    double x = 0.0;
    double y = 0.0;
    double psi = 0.0;
    double v = 0.0;
};

/// Acceleration and yaw-rate input.
struct Control {
    double a = 0.0;
    double w = 0.0;
};

struct ControlBounds {
    double a_min = -10.0;
    double a_max = 10.0;
    double w_max = 1.0;
};

inline State4 point_mass_rhs(const State4& z, const Control& u) {
    return {z.v * std::cos(z.psi), z.v * std::sin(z.psi), u.w, u.a};
}

/// Clock-augmented dynamics: the fifth component always advances at unit rate.
inline std::array<double, 5> augmented_rhs(const State4& z, double /*tau*/, const Control& u) {
    const State4 dz = point_mass_rhs(z, u);
    return {dz.x, dz.y, dz.psi, dz.v, 1.0};
}

/// H(z,p) = max_{u in U} (-f(z,u) . p). The dynamics is affine in u, so the
/// maximum is attained at the box corners and evaluates in closed form.
inline double hamiltonian(const State4& z, const std::array<double, 4>& p,
                          const ControlBounds& b) {
    return -z.v * std::cos(z.psi) * p[0] - z.v * std::sin(z.psi) * p[1] +
           b.w_max * std::abs(p[2]) + std::max(-b.a_min * p[3], -b.a_max * p[3]);
}

/// Capture-basin Hamiltonian: the virtual control lambda in [0,1] scales the
/// dynamics, which clamps H at zero.
inline double capture_hamiltonian(const State4& z, const std::array<double, 4>& p,
                                  const ControlBounds& b) {
    return std::max(0.0, hamiltonian(z, p, b));
}

/// max of |cos| over [lo, hi].
inline double max_abs_cos(double lo, double hi) {
    // |cos| peaks at integer multiples of pi.
    const double pi = std::numbers::pi;
    if (std::floor(hi / pi) >= std::ceil(lo / pi)) return 1.0;
    return std::max(std::abs(std::cos(lo)), std::abs(std::cos(hi)));
}

/// max of |sin| over [lo, hi].
inline double max_abs_sin(double lo, double hi) {
    const double pi = std::numbers::pi;
    if (std::floor(hi / pi - 0.5) >= std::ceil(lo / pi - 0.5)) return 1.0;
    return std::max(std::abs(std::sin(lo)), std::abs(std::sin(hi)));
}

/// Per-axis sup norms of the point-mass dynamics over a (x,y,psi,v) grid box.
inline std::array<double, 4> sup_norms_on_domain(const GridSpec& grid, const ControlBounds& b) {
    if (grid.dim() != 4)
        throw std::invalid_argument("sup_norms_on_domain: expected a 4-axis (x,y,psi,v) grid");
    const Axis& psi = grid.axis(2);
    const Axis& v = grid.axis(3);
    const double v_max = std::max(std::abs(v.lo), std::abs(v.hi));
    return {v_max * max_abs_cos(psi.lo, psi.hi), v_max * max_abs_sin(psi.lo, psi.hi),
            b.w_max, std::max(std::abs(b.a_min), std::abs(b.a_max))};
}

}  // namespace hjreach
