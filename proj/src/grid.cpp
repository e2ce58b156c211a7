#include "hjreach/grid.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace hjreach {

namespace {

double minmod(double a, double b) {
    if (a * b <= 0.0) return 0.0;
    return std::abs(a) < std::abs(b) ? a : b;
}

}  // namespace

GridSpec::GridSpec(std::vector<Axis> axes) : axes_(std::move(axes)) {
    if (axes_.empty() || axes_.size() > kMaxAxes)
        throw std::invalid_argument("GridSpec: axis count must be 1-" + std::to_string(kMaxAxes));
    for (const Axis& ax : axes_) {
        if (!(ax.lo < ax.hi))
            throw std::invalid_argument("GridSpec: axis '" + ax.name + "' needs lo < hi");
        if (ax.n < 3)
            throw std::invalid_argument("GridSpec: axis '" + ax.name + "' needs n >= 3");
    }
    strides_.assign(axes_.size(), 1);
    size_ = 1;
    for (int a = dim() - 1; a >= 0; --a) {
        strides_[static_cast<std::size_t>(a)] = size_;
        size_ *= static_cast<std::size_t>(axes_[static_cast<std::size_t>(a)].n);
    }
}

double GridSpec::coord(int a, int i) const {
    const Axis& ax = axes_[static_cast<std::size_t>(a)];
    if (i < 0 || i >= ax.n)
        throw std::out_of_range("GridSpec::coord: index out of range on axis " + ax.name);
    return ax.lo + static_cast<double>(i) * ax.step();
}

void GridSpec::node_coords(std::span<const int> multi_index, std::span<double> out) const {
    if (static_cast<int>(multi_index.size()) != dim())
        throw std::invalid_argument("GridSpec::node_coords: index rank mismatch");
    for (int a = 0; a < dim(); ++a) out[static_cast<std::size_t>(a)] = coord(a, multi_index[static_cast<std::size_t>(a)]);
}

std::size_t GridSpec::flatten(std::span<const int> multi_index) const {
    if (static_cast<int>(multi_index.size()) != dim())
        throw std::invalid_argument("GridSpec::flatten: index rank mismatch");
    std::size_t flat = 0;
    for (int a = 0; a < dim(); ++a) {
        const int i = multi_index[static_cast<std::size_t>(a)];
        if (i < 0 || i >= axes_[static_cast<std::size_t>(a)].n)
            throw std::out_of_range("GridSpec::flatten: index out of range");
        flat += static_cast<std::size_t>(i) * strides_[static_cast<std::size_t>(a)];
    }
    return flat;
}

void GridSpec::unflatten(std::size_t flat, std::span<int> out) const {
    for (int a = 0; a < dim(); ++a) {
        out[static_cast<std::size_t>(a)] = static_cast<int>(flat / strides_[static_cast<std::size_t>(a)]);
        flat %= strides_[static_cast<std::size_t>(a)];
    }
}

int GridSpec::nearest_index(int a, double value) const {
    const Axis& ax = axes_[static_cast<std::size_t>(a)];
    const double pos = (value - ax.lo) / ax.step();
    int i = static_cast<int>(std::ceil(pos - 0.5));  // ties toward the lower node
    return std::clamp(i, 0, ax.n - 1);
}

bool GridSpec::operator==(const GridSpec& other) const {
    if (dim() != other.dim()) return false;
    for (int a = 0; a < dim(); ++a) {
        const Axis& x = axes_[static_cast<std::size_t>(a)];
        const Axis& y = other.axes_[static_cast<std::size_t>(a)];
        if (x.lo != y.lo || x.hi != y.hi || x.n != y.n) return false;
    }
    return true;
}

ScalarField ScalarField::zeros(const GridSpec& grid, double time_stamp) {
    ScalarField f;
    f.grid = grid;
    f.values.assign(grid.size(), 0.0);
    f.time_stamp = time_stamp;
    return f;
}

std::pair<double, double> eno2_one_sided(const ScalarField& field, int axis,
                                         std::span<const int> multi_index) {
    const GridSpec& g = field.grid;
    const std::size_t flat = g.flatten(multi_index);
    const int i = multi_index[static_cast<std::size_t>(axis)];
    const int n = g.axis(axis).n;
    const double h = g.axis(axis).step();
    const std::size_t s = g.stride(axis);
    const double* v = field.values.data();

    const double vi = v[flat];
    const double vm1 = (i >= 1) ? v[flat - s] : 2.0 * vi - v[flat + s];
    const double vp1 = (i <= n - 2) ? v[flat + s] : 2.0 * vi - v[flat - s];

    const double dm = (vi - vm1) / h;
    const double dp = (vp1 - vi) / h;

    const double d2c = (i >= 1 && i <= n - 2) ? (vp1 - 2.0 * vi + vm1) / (h * h) : 0.0;
    const double d2m = (i >= 2) ? (vi - 2.0 * v[flat - s] + v[flat - 2 * s]) / (h * h) : 0.0;
    const double d2p = (i <= n - 3) ? (v[flat + 2 * s] - 2.0 * vp1 + vi) / (h * h) : 0.0;

    const double left = dm + 0.5 * h * minmod(d2m, d2c);
    const double right = dp - 0.5 * h * minmod(d2c, d2p);
    return {left, right};
}

double cfl_timestep(const GridSpec& grid, std::span<const double> sup_norms, double cfl_number) {
    if (static_cast<int>(sup_norms.size()) != grid.dim())
        throw std::invalid_argument("cfl_timestep: sup norm count must match axis count");
    if (!(cfl_number > 0.0 && cfl_number <= 1.0))
        throw std::invalid_argument("cfl_timestep: cfl number must lie in (0,1]");
    double sum = 0.0;
    for (int a = 0; a < grid.dim(); ++a) {
        const double s = sup_norms[static_cast<std::size_t>(a)];
        if (s < 0.0) throw std::invalid_argument("cfl_timestep: negative sup norm");
        sum += s / grid.axis(a).step();
    }
    if (sum == 0.0) return kInf;
    return cfl_number / sum;
}

ErrorNorms error_norms(const ScalarField& field, const ScalarField& reference) {
    if (!(field.grid == reference.grid))
        throw std::invalid_argument("error_norms: fields must share the same grid (resample first)");
    double cell = 1.0;
    for (int a = 0; a < field.grid.dim(); ++a) cell *= field.grid.axis(a).step();
    ErrorNorms e;
    double sum1 = 0.0, sum2 = 0.0;
    for (std::size_t i = 0; i < field.values.size(); ++i) {
        const double d = field.values[i] - reference.values[i];
        e.linf = std::max(e.linf, std::abs(d));
        sum1 += std::abs(d);
        sum2 += d * d;
    }
    e.l1 = cell * sum1;
    e.l2 = std::sqrt(cell) * std::sqrt(sum2);
    return e;
}

double convergence_order(double e_coarse, double e_fine) {
    if (!(e_coarse > 0.0) || !(e_fine > 0.0))
        throw std::invalid_argument("convergence_order: errors must be positive");
    return std::log(e_coarse / e_fine) / std::log(2.0);
}

double interp_field(const ScalarField& field, std::span<const double> point) {
    const GridSpec& g = field.grid;
    if (static_cast<int>(point.size()) != g.dim())
        throw std::invalid_argument("interp_field: point rank mismatch");
    std::array<int, kMaxAxes> base{};
    std::array<double, kMaxAxes> frac{};
    for (int a = 0; a < g.dim(); ++a) {
        const Axis& ax = g.axis(a);
        const double p = point[static_cast<std::size_t>(a)];
        if (p < ax.lo - 1e-12 * std::abs(ax.lo) - 1e-12 || p > ax.hi + 1e-12 * std::abs(ax.hi) + 1e-12)
            throw std::out_of_range("interp_field: point outside grid box");
        double pos = (p - ax.lo) / ax.step();
        int i = static_cast<int>(std::floor(pos));
        i = std::clamp(i, 0, ax.n - 2);
        base[static_cast<std::size_t>(a)] = i;
        frac[static_cast<std::size_t>(a)] = std::clamp(pos - i, 0.0, 1.0);
    }
    const int d = g.dim();
    double acc = 0.0;
    for (int corner = 0; corner < (1 << d); ++corner) {
        double w = 1.0;
        std::size_t flat = 0;
        for (int a = 0; a < d; ++a) {
            const int bit = (corner >> a) & 1;
            w *= bit ? frac[static_cast<std::size_t>(a)] : 1.0 - frac[static_cast<std::size_t>(a)];
            flat += static_cast<std::size_t>(base[static_cast<std::size_t>(a)] + bit) * g.stride(a);
        }
        acc += w * field.values[flat];
    }
    return acc;
}

ScalarField resample(const ScalarField& field, const GridSpec& target) {
    ScalarField out = ScalarField::zeros(target, field.time_stamp);
    std::array<int, kMaxAxes> idx{};
    std::array<double, kMaxAxes> pt{};
    const int d = target.dim();
    for (std::size_t flat = 0; flat < target.size(); ++flat) {
        target.unflatten(flat, std::span<int>(idx.data(), static_cast<std::size_t>(d)));
        target.node_coords(std::span<const int>(idx.data(), static_cast<std::size_t>(d)),
                           std::span<double>(pt.data(), static_cast<std::size_t>(d)));
        out.values[flat] = interp_field(field, std::span<const double>(pt.data(), static_cast<std::size_t>(d)));
    }
    return out;
}

void write_csv(const ScalarField& field, std::ostream& os) {
    const GridSpec& g = field.grid;
    const int d = g.dim();
    for (int a = 0; a < d; ++a) os << "i" << a + 1 << ",";
    for (int a = 0; a < d; ++a) os << "x" << a + 1 << ",";
    os << "value\n";
    std::array<int, kMaxAxes> idx{};
    os.precision(17);
    for (std::size_t flat = 0; flat < g.size(); ++flat) {
        g.unflatten(flat, std::span<int>(idx.data(), static_cast<std::size_t>(d)));
        for (int a = 0; a < d; ++a) os << idx[static_cast<std::size_t>(a)] << ",";
        for (int a = 0; a < d; ++a) os << g.coord(a, idx[static_cast<std::size_t>(a)]) << ",";
        const double v = field.values[flat];
        if (v == kInf)
            os << "inf\n";
        else
            os << v << "\n";
    }
}

namespace {
constexpr std::uint64_t kBinaryMagic = 0x484a5246494c4431ull;  // "HJRFILD1"
}

void write_binary(const ScalarField& field, std::ostream& os) {
    auto put = [&os](const void* p, std::size_t n) { os.write(static_cast<const char*>(p), static_cast<std::streamsize>(n)); };
    put(&kBinaryMagic, sizeof kBinaryMagic);
    const std::uint32_t d = static_cast<std::uint32_t>(field.grid.dim());
    put(&d, sizeof d);
    for (int a = 0; a < field.grid.dim(); ++a) {
        const Axis& ax = field.grid.axis(a);
        const std::uint32_t name_len = static_cast<std::uint32_t>(ax.name.size());
        put(&name_len, sizeof name_len);
        put(ax.name.data(), ax.name.size());
        put(&ax.lo, sizeof ax.lo);
        put(&ax.hi, sizeof ax.hi);
        const std::uint32_t n = static_cast<std::uint32_t>(ax.n);
        put(&n, sizeof n);
    }
    put(&field.time_stamp, sizeof field.time_stamp);
    put(field.values.data(), field.values.size() * sizeof(double));
}

ScalarField read_binary(std::istream& is) {
    auto get = [&is](void* p, std::size_t n) {
        is.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
        if (!is) throw std::runtime_error("read_binary: truncated field dump");
    };
    std::uint64_t magic = 0;
    get(&magic, sizeof magic);
    if (magic != kBinaryMagic) throw std::runtime_error("read_binary: bad magic");
    std::uint32_t d = 0;
    get(&d, sizeof d);
    std::vector<Axis> axes;
    for (std::uint32_t a = 0; a < d; ++a) {
        Axis ax;
        std::uint32_t name_len = 0;
        get(&name_len, sizeof name_len);
        ax.name.resize(name_len);
        if (name_len > 0) get(ax.name.data(), name_len);
        get(&ax.lo, sizeof ax.lo);
        get(&ax.hi, sizeof ax.hi);
        std::uint32_t n = 0;
        get(&n, sizeof n);
        ax.n = static_cast<int>(n);
        axes.push_back(std::move(ax));
    }
    ScalarField f;
    f.grid = GridSpec(std::move(axes));
    get(&f.time_stamp, sizeof f.time_stamp);
    f.values.resize(f.grid.size());
    get(f.values.data(), f.values.size() * sizeof(double));
    return f;
}

}  // namespace hjreach
