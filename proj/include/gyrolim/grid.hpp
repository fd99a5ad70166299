#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "gyrolim/vec2.hpp"

namespace gyrolim {

// Uniform cell-centered grid on [-L, L]^2 with n cells per axis, spacing
// h = 2L/n. Cell (i, j) is centered at (-L + (i+1/2)h, -L + (j+1/2)h).
struct GridSpec {
    double half_width = 2.0;
    int n = 256;

    GridSpec() = default;
    GridSpec(double L, int cells) : half_width(L), n(cells) {
        if (n < 16) throw std::invalid_argument("GridSpec: n must be >= 16, got " + std::to_string(n));
        if (n % 2 != 0) throw std::invalid_argument("GridSpec: n must be even, got " + std::to_string(n));
        if (!(half_width > 0.0)) throw std::invalid_argument("GridSpec: half-width must be positive");
    }

    double spacing() const { return 2.0 * half_width / n; }
    double cell_area() const { return spacing() * spacing(); }
    double coord(int k) const { return -half_width + (k + 0.5) * spacing(); }
    Vec2 center(int i, int j) const { return {coord(i), coord(j)}; }
    bool contains(Vec2 p) const {
        return p.x >= -half_width && p.x <= half_width && p.y >= -half_width && p.y <= half_width;
    }
    bool operator==(const GridSpec& o) const { return half_width == o.half_width && n == o.n; }
};

class ScalarGrid {
public:
    ScalarGrid() = default;
    explicit ScalarGrid(GridSpec spec, double fill = 0.0)
        : spec_(spec), v_(static_cast<std::size_t>(spec.n) * spec.n, fill) {}

    const GridSpec& spec() const { return spec_; }
    int n() const { return spec_.n; }

    double& at(int i, int j) { return v_[static_cast<std::size_t>(i) * spec_.n + j]; }
    double at(int i, int j) const { return v_[static_cast<std::size_t>(i) * spec_.n + j]; }
    std::vector<double>& data() { return v_; }
    const std::vector<double>& data() const { return v_; }

    // cell-centered midpoint quadrature: h^2 * sum of values
    double integral() const {
        double s = 0.0;
        for (double x : v_) s += x;
        return s * spec_.cell_area();
    }

    double max_abs() const {
        double m = 0.0;
        for (double x : v_) m = std::max(m, std::abs(x));
        return m;
    }

    double norm_l1() const {
        double s = 0.0;
        for (double x : v_) s += std::abs(x);
        return s * spec_.cell_area();
    }

    double norm_l2() const {
        double s = 0.0;
        for (double x : v_) s += x * x;
        return std::sqrt(s * spec_.cell_area());
    }

    double norm_lp(double p) const {
        if (p < 1.0) throw std::invalid_argument("norm_lp: p must be >= 1");
        double s = 0.0;
        for (double x : v_) s += std::pow(std::abs(x), p);
        return std::pow(s * spec_.cell_area(), 1.0 / p);
    }

    // bilinear interpolation at a point inside the domain; near the boundary
    // the stencil is clamped to the outermost cell centers
    double interpolate(Vec2 p) const {
        const int n = spec_.n;
        const double h = spec_.spacing();
        double gx = (p.x + spec_.half_width) / h - 0.5;
        double gy = (p.y + spec_.half_width) / h - 0.5;
        int i0 = static_cast<int>(std::floor(gx));
        int j0 = static_cast<int>(std::floor(gy));
        i0 = std::max(0, std::min(n - 2, i0));
        j0 = std::max(0, std::min(n - 2, j0));
        double fx = std::min(1.0, std::max(0.0, gx - i0));
        double fy = std::min(1.0, std::max(0.0, gy - j0));
        return (1 - fx) * (1 - fy) * at(i0, j0) + fx * (1 - fy) * at(i0 + 1, j0) +
               (1 - fx) * fy * at(i0, j0 + 1) + fx * fy * at(i0 + 1, j0 + 1);
    }

    template <class Fn>
    static ScalarGrid from_function(GridSpec spec, Fn&& f) {
        ScalarGrid g(spec);
        for (int i = 0; i < spec.n; ++i)
            for (int j = 0; j < spec.n; ++j) g.at(i, j) = f(spec.center(i, j));
        return g;
    }

private:
    GridSpec spec_;
    std::vector<double> v_;
};

struct VectorGrid {
    ScalarGrid x;
    ScalarGrid y;

    VectorGrid() = default;
    explicit VectorGrid(GridSpec spec) : x(spec), y(spec) {}
    const GridSpec& spec() const { return x.spec(); }
    Vec2 at(int i, int j) const { return {x.at(i, j), y.at(i, j)}; }
    Vec2 interpolate(Vec2 p) const { return {x.interpolate(p), y.interpolate(p)}; }
};

// centered differences in the interior, one-sided at the boundary
inline ScalarGrid d_dx(const ScalarGrid& f) {
    const int n = f.n();
    const double h = f.spec().spacing();
    ScalarGrid g(f.spec());
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            if (i == 0)
                g.at(i, j) = (f.at(1, j) - f.at(0, j)) / h;
            else if (i == n - 1)
                g.at(i, j) = (f.at(n - 1, j) - f.at(n - 2, j)) / h;
            else
                g.at(i, j) = (f.at(i + 1, j) - f.at(i - 1, j)) / (2.0 * h);
        }
    return g;
}

inline ScalarGrid d_dy(const ScalarGrid& f) {
    const int n = f.n();
    const double h = f.spec().spacing();
    ScalarGrid g(f.spec());
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            if (j == 0)
                g.at(i, j) = (f.at(i, 1) - f.at(i, 0)) / h;
            else if (j == n - 1)
                g.at(i, j) = (f.at(i, n - 1) - f.at(i, n - 2)) / h;
            else
                g.at(i, j) = (f.at(i, j + 1) - f.at(i, j - 1)) / (2.0 * h);
        }
    return g;
}

} // namespace gyrolim
