#pragma once

#include <complex>
#include <mutex>
#include <stdexcept>
#include <vector>

#include <fftw3.h>

#include "gyrolim/grid.hpp"
#include "gyrolim/kernels.hpp"

namespace gyrolim {

// Free-space convolution (kernel * f) on the grid, evaluated at cell centers:
//   (kernel * f)(x_i) ~= h^2 sum_j kernel(x_i - x_j) f(x_j).
// Implemented by Hockney-style domain doubling with zero padding, so no
// periodic images contaminate the result. The kernel table on the singular
// cell holds the exact cell average for V and zero for the antisymmetric
// kernels (their cell average vanishes).
enum class KernelChoice { coulomb, coulomb_grad, biot_savart, gaussian };

namespace detail {

inline std::mutex& fftw_mutex() {
    static std::mutex m;
    return m;
}

// 2n x 2n complex-to-complex FFT workspace
class FftPlan2d {
public:
    explicit FftPlan2d(int size) : size_(size), buf_(static_cast<std::size_t>(size) * size) {
        std::lock_guard<std::mutex> lock(fftw_mutex());
        fwd_ = fftw_plan_dft_2d(size, size, reinterpret_cast<fftw_complex*>(buf_.data()),
                                reinterpret_cast<fftw_complex*>(buf_.data()), FFTW_FORWARD, FFTW_ESTIMATE);
        inv_ = fftw_plan_dft_2d(size, size, reinterpret_cast<fftw_complex*>(buf_.data()),
                                reinterpret_cast<fftw_complex*>(buf_.data()), FFTW_BACKWARD, FFTW_ESTIMATE);
        if (!fwd_ || !inv_) throw std::runtime_error("FftPlan2d: fftw plan creation failed");
    }
    ~FftPlan2d() {
        std::lock_guard<std::mutex> lock(fftw_mutex());
        fftw_destroy_plan(fwd_);
        fftw_destroy_plan(inv_);
    }
    FftPlan2d(const FftPlan2d&) = delete;
    FftPlan2d& operator=(const FftPlan2d&) = delete;

    int size() const { return size_; }
    std::vector<std::complex<double>>& buffer() { return buf_; }
    void forward() { fftw_execute(fwd_); }
    void backward() { fftw_execute(inv_); }

private:
    int size_;
    std::vector<std::complex<double>> buf_;
    fftw_plan fwd_ = nullptr;
    fftw_plan inv_ = nullptr;
};

// kernel value at lattice offset (di*h, dj*h); the (0,0) cell is regularized
inline double kernel_table_value(KernelChoice kind, int component, int di, int dj, double h,
                                 double gauss_a) {
    const Vec2 r{di * h, dj * h};
    if (di == 0 && dj == 0) {
        switch (kind) {
            case KernelChoice::coulomb: return coulomb_cell_average(h);
            case KernelChoice::gaussian: return gaussian_density({0.0, 0.0}, gauss_a);
            default: return 0.0; // antisymmetric kernels average to zero on the centered cell
        }
    }
    switch (kind) {
        case KernelChoice::coulomb: return coulomb_potential(r);
        case KernelChoice::gaussian: return gaussian_density(r, gauss_a);
        case KernelChoice::coulomb_grad: {
            const Vec2 g = coulomb_gradient(r);
            return component == 0 ? g.x : g.y;
        }
        case KernelChoice::biot_savart: {
            const Vec2 k = biot_savart_kernel(r);
            return component == 0 ? k.x : k.y;
        }
    }
    throw std::invalid_argument("free_space_convolve: invalid kernel choice");
}

// one scalar convolution pass; fhat is the forward transform of the padded input
inline ScalarGrid convolve_with_table(const GridSpec& spec,
                                      const std::vector<std::complex<double>>& fhat,
                                      KernelChoice kind, int component, double gauss_a) {
    const int n = spec.n;
    const int m = 2 * n;
    const double h = spec.spacing();
    FftPlan2d plan(m);
    auto& buf = plan.buffer();

    // kernel table wrapped into the doubled domain: offset d in [-(n-1), n-1]
    // stored at index (d + m) mod m
    std::fill(buf.begin(), buf.end(), std::complex<double>(0.0, 0.0));
    for (int di = -(n - 1); di <= n - 1; ++di) {
        const int ii = (di + m) % m;
        for (int dj = -(n - 1); dj <= n - 1; ++dj) {
            const int jj = (dj + m) % m;
            buf[static_cast<std::size_t>(ii) * m + jj] =
                kernel_table_value(kind, component, di, dj, h, gauss_a);
        }
    }
    plan.forward();

    const double scale = h * h / (static_cast<double>(m) * m); // quadrature weight and FFT normalization
    for (std::size_t k = 0; k < buf.size(); ++k) buf[k] *= fhat[k] * scale;
    plan.backward();

    ScalarGrid out(spec);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) out.at(i, j) = buf[static_cast<std::size_t>(i) * m + j].real();
    return out;
}

inline std::vector<std::complex<double>> padded_forward(const ScalarGrid& f) {
    const int n = f.n();
    const int m = 2 * n;
    FftPlan2d plan(m);
    auto& buf = plan.buffer();
    std::fill(buf.begin(), buf.end(), std::complex<double>(0.0, 0.0));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) buf[static_cast<std::size_t>(i) * m + j] = f.at(i, j);
    plan.forward();
    return buf;
}

} // namespace detail

inline ScalarGrid free_space_convolve(const ScalarGrid& f, KernelChoice kind, double gauss_a = 0.0) {
    if (kind == KernelChoice::coulomb_grad || kind == KernelChoice::biot_savart)
        throw std::invalid_argument("free_space_convolve: vector kernel passed to scalar convolve");
    auto fhat = detail::padded_forward(f);
    return detail::convolve_with_table(f.spec(), fhat, kind, 0, gauss_a);
}

inline VectorGrid free_space_convolve_vector(const ScalarGrid& f, KernelChoice kind) {
    if (kind != KernelChoice::coulomb_grad && kind != KernelChoice::biot_savart)
        throw std::invalid_argument("free_space_convolve_vector: scalar kernel passed to vector convolve");
    auto fhat = detail::padded_forward(f);
    VectorGrid out(f.spec());
    out.x = detail::convolve_with_table(f.spec(), fhat, kind, 0, 0.0);
    out.y = detail::convolve_with_table(f.spec(), fhat, kind, 1, 0.0);
    return out;
}

// u = K * omega sampled at arbitrary points (bilinear interpolation of the grid field)
inline std::vector<Vec2> velocity_from_vorticity(const ScalarGrid& omega, const std::vector<Vec2>& points) {
    const VectorGrid u = free_space_convolve_vector(omega, KernelChoice::biot_savart);
    std::vector<Vec2> out;
    out.reserve(points.size());
    for (const Vec2& p : points) out.push_back(u.interpolate(p));
    return out;
}

} // namespace gyrolim
