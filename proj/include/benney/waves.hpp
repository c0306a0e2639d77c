#pragma once

// The dnoidal travelling-wave family.  Profiles
//   phi(xi) = sqrt(c/(1-beta c)) * eta1 * dn(eta1 xi/sqrt2; kappa)
//   n(xi)   = -eta1^2/(1-beta c) * dn^2(eta1 xi/sqrt2; kappa)
// with eta1^2 + eta2^2 = 2 sigma, kappa^2 = (eta1^2-eta2^2)/eta1^2 and the
// fundamental period pinned to L through 2 sqrt2 K(kappa)/eta1 = L.

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "benney/elliptic.hpp"
#include "benney/fourier.hpp"

namespace benney {

struct WaveParams {
    double omega = 0.0; // frequency (omega < 0 in the admissible region)
    double c = 0.0;     // speed, c > 0
    double beta = 0.0;
    double L = 0.0;     // fundamental period
    // derived
    double sigma = 0.0;  // -omega - c^2/4
    double kappa2 = 0.0; // squared elliptic modulus
    double eta1 = 0.0;
    double eta2 = 0.0;

    double amplitude_factor() const { return std::sqrt(c / (1.0 - beta * c)); }
};

struct PeriodConstraintRoots {
    double eta1;
    double eta2;
    double kappa2;
};

inline double sigma_floor(double L) { return 2.0 * M_PI * M_PI / (L * L); }

namespace detail {
// Fundamental period of the normalized profile as a function of m = kappa^2
// at fixed sigma: T(m) = 2 K(m) sqrt(2-m) / sqrt(sigma).  Strictly increasing,
// T(0) = pi sqrt(2/sigma), T -> infinity as m -> 1.
inline double dnoidal_period(double m, double sigma) {
    return 2.0 * complete_K(m) * std::sqrt((2.0 - m) / sigma);
}

inline double dnoidal_period_dm(double m, double sigma) {
    const double K = complete_K(m);
    const double dK = (complete_E(m) - (1.0 - m) * K) / (2.0 * m * (1.0 - m));
    const double root = std::sqrt((2.0 - m) / sigma);
    return 2.0 * dK * root - K / (root * sigma);
}
} // namespace detail

/// Solve 2 sqrt2 K(kappa)/eta1 = L for (eta1, eta2, kappa^2) at fixed sigma.
/// Bracketed bisection in kappa^2 followed by a Newton polish.
inline PeriodConstraintRoots solve_period_constraint(double L, double sigma, double tol = 1e-13) {
    if (!(L > 0.0)) throw std::domain_error("solve_period_constraint: L > 0 required");
    if (!(sigma > sigma_floor(L)))
        throw std::domain_error("solve_period_constraint: sigma <= 2*pi^2/L^2 (admissible region is open)");

    double lo = 0.0, hi = 1.0 - 1e-16;
    if (detail::dnoidal_period(hi, sigma) < L)
        throw std::runtime_error("solve_period_constraint: kappa^2 bracket exhausted "
                                 "(period constraint unresolvable in double precision)");
    while (hi - lo > 1e-13) {
        const double mid = 0.5 * (lo + hi);
        (detail::dnoidal_period(mid, sigma) < L ? lo : hi) = mid;
    }
    double m = 0.5 * (lo + hi);
    for (int it = 0; it < 8; ++it) {
        const double f = detail::dnoidal_period(m, sigma) - L;
        if (std::abs(f) <= tol * L) break;
        const double df = detail::dnoidal_period_dm(m, sigma);
        if (!(df > 0.0)) break;
        m = std::clamp(m - f / df, lo, hi);
    }
    const double eta1 = std::sqrt(2.0 * sigma / (2.0 - m));
    const double eta2 = eta1 * std::sqrt(1.0 - m);
    return {eta1, eta2, m};
}

/// Construct admissible wave parameters; throws naming the violated inequality.
inline WaveParams make_wave(double omega, double c, double beta, double L) {
    if (!(c > 0.0)) throw std::domain_error("make_wave: admissibility c > 0 violated");
    if (!(1.0 - beta * c > 0.0))
        throw std::domain_error("make_wave: admissibility 1 - beta*c > 0 violated");
    const double sigma = -omega - 0.25 * c * c;
    if (!(sigma > sigma_floor(L)))
        throw std::domain_error("make_wave: admissibility -omega - c^2/4 > 2*pi^2/L^2 violated");
    const auto roots = solve_period_constraint(L, sigma);
    WaveParams p;
    p.omega = omega;
    p.c = c;
    p.beta = beta;
    p.L = L;
    p.sigma = sigma;
    p.kappa2 = roots.kappa2;
    p.eta1 = roots.eta1;
    p.eta2 = roots.eta2;
    return p;
}

/// Pointwise profile values (valid for any real xi; dn is entire and periodic).
inline double dnoidal_phi(const WaveParams& p, double xi) {
    return p.amplitude_factor() * p.eta1 * jacobi(p.eta1 * xi / std::sqrt(2.0), p.kappa2).dn;
}

inline double dnoidal_n(const WaveParams& p, double xi) {
    const double d = jacobi(p.eta1 * xi / std::sqrt(2.0), p.kappa2).dn;
    return -p.eta1 * p.eta1 / (1.0 - p.beta * p.c) * d * d;
}

struct WaveProfile {
    std::vector<double> phi;
    std::vector<double> n;
    GridSpec grid;
};

inline void require_matching_period(double a, double b, const char* where) {
    if (std::abs(a - b) > 1e-12 * std::max(std::abs(a), std::abs(b)))
        throw std::invalid_argument(std::string(where) + ": grid period does not match wave period");
}

inline WaveProfile sample_profile(const WaveParams& p, const GridSpec& grid) {
    grid.validate();
    require_matching_period(grid.L, p.L, "sample_profile");
    WaveProfile prof;
    prof.grid = grid;
    prof.phi.resize(grid.n_modes);
    prof.n.resize(grid.n_modes);
    const auto x = grid_nodes(grid);
    for (int j = 0; j < grid.n_modes; ++j) {
        prof.phi[j] = dnoidal_phi(p, x[j]);
        prof.n[j] = dnoidal_n(p, x[j]);
    }
    return prof;
}

struct OdeResidual {
    double r1; // sup-norm residual of phi'' - sigma phi - (beta - 1/c) phi^3
    double r2; // sup-norm residual of the first integral on the normalized profile
};

inline OdeResidual ode_residual(const WaveProfile& prof, const WaveParams& p) {
    if (prof.grid.n_modes < 64)
        throw std::invalid_argument("ode_residual: need at least 64 modes");
    const auto& phi = prof.phi;
    const auto d2 = spectral_derivative(prof.grid, phi, 2);
    const double cubic = p.beta - 1.0 / p.c;
    double r1 = 0.0;
    for (size_t j = 0; j < phi.size(); ++j)
        r1 = std::max(r1, std::abs(d2[j] - p.sigma * phi[j] - cubic * phi[j] * phi[j] * phi[j]));

    const double amp = p.amplitude_factor();
    std::vector<double> psi(phi.size());
    for (size_t j = 0; j < phi.size(); ++j) psi[j] = phi[j] / amp;
    const auto d1 = spectral_derivative(prof.grid, psi, 1);
    double r2 = 0.0;
    for (size_t j = 0; j < psi.size(); ++j) {
        const double p2 = psi[j] * psi[j];
        const double rhs = 0.5 * (p.eta1 * p.eta1 - p2) * (p2 - p.eta2 * p.eta2);
        r2 = std::max(r2, std::abs(d1[j] * d1[j] - rhs));
    }
    return {r1, r2};
}

/// Number of half-phase windings over one period; integer iff 4 pi q / c = L.
inline double phase_winding_q(const WaveParams& p) { return p.c * p.L / (4.0 * M_PI); }

/// u(x,t) = e^{-i omega t} e^{i c (x-ct)/2} phi(x-ct),  v(x,t) = n(x-ct),
/// sampled on the grid.  Requires the L-periodicity hypothesis 4 pi q/c = L.
inline State modulated_travelling_state(const WaveParams& p, double t, const GridSpec& grid) {
    grid.validate();
    require_matching_period(grid.L, p.L, "modulated_travelling_state");
    const double q = phase_winding_q(p);
    if (std::abs(q - std::round(q)) > 1e-9 || std::round(q) < 1.0)
        throw std::domain_error("modulated_travelling_state: no positive integer q with 4*pi*q/c = L");
    State s;
    s.grid = grid;
    s.t = t;
    s.u.resize(grid.n_modes);
    s.v.resize(grid.n_modes);
    const auto x = grid_nodes(grid);
    const cx phase_t = std::exp(cx(0.0, -p.omega * t));
    for (int j = 0; j < grid.n_modes; ++j) {
        const double xi = x[j] - p.c * t;
        s.u[j] = phase_t * std::exp(cx(0.0, 0.5 * p.c * xi)) * dnoidal_phi(p, xi);
        s.v[j] = dnoidal_n(p, xi);
    }
    return s;
}

/// Fundamental period of a sampled profile, detected as the smallest positive
/// autocorrelation peak; returns the full period L when none occurs inside.
inline double autocorrelation_period(const GridSpec& grid, const std::vector<double>& f) {
    const int n = grid.n_modes;
    double mean = 0.0;
    for (double v : f) mean += v;
    mean /= n;
    std::vector<cx> g(n);
    for (int j = 0; j < n; ++j) g[j] = f[j] - mean;
    std::vector<cx> hat;
    fft_forward(hat, g);
    for (auto& h : hat) h = cx(std::norm(h), 0.0);
    std::vector<cx> corr;
    fft_inverse(corr, hat);
    const double c0 = corr[0].real();
    for (int s = 1; s < n; ++s)
        if (corr[s].real() >= (1.0 - 1e-6) * c0) return s * grid.dx();
    return grid.L;
}

} // namespace benney
