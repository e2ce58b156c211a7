#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace hjreach {

/// Sentinel used for "no finite value" entries (minimal-time fields, degenerate CFL).
inline constexpr double kInf = std::numeric_limits<double>::infinity();

inline constexpr int kMaxAxes = 5;

struct Axis {
    std::string name;
    double lo = 0.0;
    double hi = 1.0;
    int n = 0;

    double step() const { return (hi - lo) / static_cast<double>(n - 1); }
};

/// Uniform Cartesian mesh over 1-5 state axes. Node j on axis a sits at
/// lo_a + j * step_a; storage order is row-major with the last axis fastest.
class GridSpec {
public:
    GridSpec() = default;
    explicit GridSpec(std::vector<Axis> axes);

    int dim() const { return static_cast<int>(axes_.size()); }
    std::size_t size() const { return size_; }
    const Axis& axis(int a) const { return axes_[static_cast<std::size_t>(a)]; }
    const std::vector<Axis>& axes() const { return axes_; }
    std::size_t stride(int a) const { return strides_[static_cast<std::size_t>(a)]; }

    double coord(int a, int i) const;
    void node_coords(std::span<const int> multi_index, std::span<double> out) const;

    std::size_t flatten(std::span<const int> multi_index) const;
    void unflatten(std::size_t flat, std::span<int> out) const;

    /// Nearest node index along one axis, clamped to the grid; ties toward the lower node.
    int nearest_index(int a, double value) const;

    bool operator==(const GridSpec& other) const;

private:
    std::vector<Axis> axes_;
    std::vector<std::size_t> strides_;
    std::size_t size_ = 0;
};

struct ScalarField {
    GridSpec grid;
    std::vector<double> values;
    double time_stamp = 0.0;

    static ScalarField zeros(const GridSpec& grid, double time_stamp = 0.0);
};

/// Second-order ENO one-sided derivatives along `axis` at `multi_index`.
/// Boundary nodes use linear ghost extension (the outermost slope is extrapolated),
/// so affine fields are differentiated exactly everywhere.
std::pair<double, double> eno2_one_sided(const ScalarField& field, int axis,
                                         std::span<const int> multi_index);

/// CFL-stable explicit time step: cfl / sum_j(sup_j / dx_j). All-zero sup norms
/// give the +inf sentinel.
double cfl_timestep(const GridSpec& grid, std::span<const double> sup_norms,
                    double cfl_number = 0.5);

struct ErrorNorms {
    double linf = 0.0;
    double l1 = 0.0;
    double l2 = 0.0;
};

/// Discrete error norms of (field - reference) at the field's nodes. The reference
/// must live on the identical grid; use resample() first for refined references.
ErrorNorms error_norms(const ScalarField& field, const ScalarField& reference);

/// log2 ratio of successive errors.
double convergence_order(double e_coarse, double e_fine);

/// Multilinear interpolation of `field` at a point; throws if outside the box.
double interp_field(const ScalarField& field, std::span<const double> point);

/// Multilinear resampling of `field` onto `target` (target box must be contained
/// in the field's box).
ScalarField resample(const ScalarField& field, const GridSpec& target);

void write_csv(const ScalarField& field, std::ostream& os);
void write_binary(const ScalarField& field, std::ostream& os);
ScalarField read_binary(std::istream& is);

}  // namespace hjreach
