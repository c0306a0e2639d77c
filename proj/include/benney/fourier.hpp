#pragma once

// Periodic grid, FFT plumbing and spectral calculus on [0, L).  The FFT
// backend is Eigen's (kissfft); plans are cached per thread, so everything
// here is safe to use concurrently from independent threads.

#include <complex>
#include <stdexcept>
#include <vector>

#include <unsupported/Eigen/FFT>

namespace benney {

using cx = std::complex<double>;

struct GridSpec {
    double L = 2.0 * M_PI;
    int n_modes = 256; // power of two, >= 8

    void validate() const {
        if (!(L > 0.0)) throw std::invalid_argument("GridSpec: L > 0 required");
        if (n_modes < 8 || (n_modes & (n_modes - 1)) != 0)
            throw std::invalid_argument("GridSpec: n_modes must be a power of two >= 8");
    }
    double dx() const { return L / n_modes; }
    bool operator==(const GridSpec&) const = default;
};

/// One time slice of the coupled fields: complex short wave u, real long wave v.
struct State {
    std::vector<cx> u;
    std::vector<double> v;
    double t = 0.0;
    GridSpec grid;
};

inline std::vector<double> grid_nodes(const GridSpec& g) {
    std::vector<double> x(g.n_modes);
    for (int j = 0; j < g.n_modes; ++j) x[j] = g.L * j / g.n_modes;
    return x;
}

/// Signed integer mode for storage index k in wrap-around FFT order.
inline int mode_of_index(int k, int n) { return k < n / 2 ? k : k - n; }

inline double wavenumber(const GridSpec& g, int k) {
    return 2.0 * M_PI * mode_of_index(k, g.n_modes) / g.L;
}

namespace detail {
inline Eigen::FFT<double>& fft_engine() {
    thread_local Eigen::FFT<double> engine;
    return engine;
}
} // namespace detail

/// Unnormalized forward DFT: dst[k] = sum_j src[j] e^{-2 pi i jk/N}.
inline void fft_forward(std::vector<cx>& dst, const std::vector<cx>& src) {
    detail::fft_engine().fwd(dst, src);
}

/// Normalized inverse, so fft_inverse(fft_forward(x)) == x.
inline void fft_inverse(std::vector<cx>& dst, const std::vector<cx>& src) {
    detail::fft_engine().inv(dst, src);
}

inline std::vector<cx> to_complex(const std::vector<double>& re) {
    std::vector<cx> out(re.size());
    for (size_t i = 0; i < re.size(); ++i) out[i] = re[i];
    return out;
}

/// Fourier coefficients with the amplitude convention: a plane wave
/// a e^{i k x} has coefficient a at its mode.
inline std::vector<cx> fourier_coefficients(const GridSpec& g, const std::vector<cx>& phys) {
    std::vector<cx> c;
    fft_forward(c, phys);
    for (auto& v : c) v /= static_cast<double>(g.n_modes);
    return c;
}

/// p-th spectral derivative of a physical-space field (complex samples).
inline std::vector<cx> spectral_derivative(const GridSpec& g, const std::vector<cx>& phys, int p = 1) {
    std::vector<cx> hat;
    fft_forward(hat, phys);
    const int n = g.n_modes;
    for (int k = 0; k < n; ++k) {
        if (p % 2 == 1 && k == n / 2) { // Nyquist has no signed derivative
            hat[k] = 0.0;
            continue;
        }
        cx f{1.0, 0.0};
        const cx ik(0.0, wavenumber(g, k));
        for (int q = 0; q < p; ++q) f *= ik;
        hat[k] *= f;
    }
    std::vector<cx> out;
    fft_inverse(out, hat);
    return out;
}

inline std::vector<double> spectral_derivative(const GridSpec& g, const std::vector<double>& phys, int p = 1) {
    const auto d = spectral_derivative(g, to_complex(phys), p);
    std::vector<double> out(d.size());
    for (size_t i = 0; i < d.size(); ++i) out[i] = d[i].real();
    return out;
}

/// Trapezoid rule on the periodic grid (spectrally accurate for smooth data).
inline double integrate(const GridSpec& g, const std::vector<double>& f) {
    double s = 0.0;
    for (double v : f) s += v;
    return s * g.dx();
}

/// 2/3-rule mask: keep |mode| <= n/3, zero the rest (applied to products).
inline std::vector<char> dealias_mask(const GridSpec& g) {
    std::vector<char> keep(g.n_modes);
    const int cut = g.n_modes / 3;
    for (int k = 0; k < g.n_modes; ++k)
        keep[k] = std::abs(mode_of_index(k, g.n_modes)) <= cut ? 1 : 0;
    return keep;
}

} // namespace benney
