#pragma once

// Periodic pseudospectral solver for the coupled system
//   i u_t + u_xx = u v + beta |u|^2 u
//   v_t = (|u|^2)_x
// Time stepping is integrating-factor RK4: the u_xx phase is applied exactly
// in Fourier space and classical RK4 handles the remaining nonstiff coupling.
// Products are dealiased with the 2/3 rule.

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "benney/fourier.hpp"
#include "benney/waves.hpp"

namespace benney {

struct ConservedTriple {
    double E1; // int |u|^2
    double E2; // int v|u|^2 + |u_x|^2 + (beta/2)|u|^4
    double E3; // int v^2 + 2 Im(u conj(u_x))
};

inline ConservedTriple conserved(const State& s, double beta) {
    const auto ux = spectral_derivative(s.grid, s.u, 1);
    double e1 = 0.0, e2 = 0.0, e3 = 0.0;
    for (int j = 0; j < s.grid.n_modes; ++j) {
        const double uu = std::norm(s.u[j]);
        e1 += uu;
        e2 += s.v[j] * uu + std::norm(ux[j]) + 0.5 * beta * uu * uu;
        e3 += s.v[j] * s.v[j] + 2.0 * std::imag(s.u[j] * std::conj(ux[j]));
    }
    const double dx = s.grid.dx();
    return {e1 * dx, e2 * dx, e3 * dx};
}

/// Conservative default step from the grid scale; halve when drift demands it.
inline double default_dt(const GridSpec& g) {
    const double scale = g.L / (2.0 * M_PI);
    return 0.5 / (static_cast<double>(g.n_modes) * g.n_modes) * scale * scale;
}

class Stepper {
  public:
    Stepper(GridSpec grid, double beta) : grid_(grid), beta_(beta) {
        grid_.validate();
        const int n = grid_.n_modes;
        k_.resize(n);
        keep_ = dealias_mask(grid_);
        for (int i = 0; i < n; ++i) k_[i] = wavenumber(grid_, i);
        uh_.resize(n); vh_.resize(n);
        su_.resize(n); sv_.resize(n);
        au_.assign(4, std::vector<cx>(n)); av_.assign(4, std::vector<cx>(n));
        up_.resize(n); vp_.resize(n); fu_.resize(n); fv_.resize(n);
        eh_.resize(n);
    }

    State step(const State& s, double dt) {
        if (!(dt > 0.0)) throw std::invalid_argument("step: dt > 0 required");
        if (s.grid != grid_ || static_cast<int>(s.u.size()) != grid_.n_modes ||
            static_cast<int>(s.v.size()) != grid_.n_modes)
            throw std::invalid_argument("step: state does not match stepper grid");
        prepare_phases(dt);

        fft_forward(uh_, s.u);
        fft_forward(vh_, to_complex(s.v));

        const int n = grid_.n_modes;
        // RK4 on w = e^{-L tau} uhat; the half/full-step phases move stage
        // values between the w frame and the physical frame.
        rhs(uh_, vh_, au_[0], av_[0]);
        for (int i = 0; i < n; ++i) {
            su_[i] = eh_[i] * (uh_[i] + 0.5 * dt * au_[0][i]);
            sv_[i] = vh_[i] + 0.5 * dt * av_[0][i];
        }
        rhs(su_, sv_, au_[1], av_[1]);
        for (int i = 0; i < n; ++i) au_[1][i] *= std::conj(eh_[i]);
        for (int i = 0; i < n; ++i) {
            su_[i] = eh_[i] * (uh_[i] + 0.5 * dt * au_[1][i]);
            sv_[i] = vh_[i] + 0.5 * dt * av_[1][i];
        }
        rhs(su_, sv_, au_[2], av_[2]);
        for (int i = 0; i < n; ++i) au_[2][i] *= std::conj(eh_[i]);
        for (int i = 0; i < n; ++i) {
            su_[i] = eh_[i] * eh_[i] * (uh_[i] + dt * au_[2][i]);
            sv_[i] = vh_[i] + dt * av_[2][i];
        }
        rhs(su_, sv_, au_[3], av_[3]);
        for (int i = 0; i < n; ++i) au_[3][i] *= std::conj(eh_[i]) * std::conj(eh_[i]);

        State out;
        out.grid = grid_;
        out.t = s.t + dt;
        out.u.resize(n);
        out.v.resize(n);
        for (int i = 0; i < n; ++i) {
            const cx du = dt / 6.0 * (au_[0][i] + 2.0 * (au_[1][i] + au_[2][i]) + au_[3][i]);
            const cx dv = dt / 6.0 * (av_[0][i] + 2.0 * (av_[1][i] + av_[2][i]) + av_[3][i]);
            su_[i] = eh_[i] * eh_[i] * (uh_[i] + du);
            sv_[i] = vh_[i] + dv;
        }
        fft_inverse(up_, su_);
        fft_inverse(vp_, sv_);
        last_v_imag_ = 0.0;
        double amp = 0.0;
        for (int i = 0; i < n; ++i) {
            out.u[i] = up_[i];
            out.v[i] = vp_[i].real();
            last_v_imag_ = std::max(last_v_imag_, std::abs(vp_[i].imag()));
            amp = std::max({amp, std::abs(up_[i]), std::abs(out.v[i])});
        }
        if (!(amp < 1e12))
            throw std::runtime_error("step: blow-up guard tripped (field norm exceeds 1e12)");
        return out;
    }

    /// Largest imaginary residue of v produced by the most recent step.
    double last_v_imag() const { return last_v_imag_; }

  private:
    void prepare_phases(double dt) {
        if (dt == cached_dt_) return;
        for (size_t i = 0; i < k_.size(); ++i)
            eh_[i] = std::exp(cx(0.0, -k_[i] * k_[i] * 0.5 * dt));
        cached_dt_ = dt;
    }

    // Nonlinear RHS in spectral variables; products formed in physical space.
    void rhs(const std::vector<cx>& uhat, const std::vector<cx>& vhat,
             std::vector<cx>& nu, std::vector<cx>& nv) {
        const int n = grid_.n_modes;
        fft_inverse(up_, uhat);
        fft_inverse(vp_, vhat);
        for (int i = 0; i < n; ++i) {
            const double uu = std::norm(up_[i]);
            fu_[i] = up_[i] * vp_[i] + beta_ * uu * up_[i];
            fv_[i] = uu;
        }
        fft_forward(nu, fu_);
        fft_forward(nv, fv_);
        for (int i = 0; i < n; ++i) {
            if (!keep_[i]) {
                nu[i] = 0.0;
                nv[i] = 0.0;
                continue;
            }
            nu[i] *= cx(0.0, -1.0);
            nv[i] *= cx(0.0, k_[i]);
        }
    }

    GridSpec grid_;
    double beta_;
    double cached_dt_ = -1.0;
    double last_v_imag_ = 0.0;
    std::vector<double> k_;
    std::vector<char> keep_;
    std::vector<cx> uh_, vh_, su_, sv_, eh_, up_, vp_, fu_, fv_;
    std::vector<std::vector<cx>> au_, av_;
};

/// Single step with a throwaway workspace (convenience for one-off calls).
inline State step(const State& s, double dt, double beta) {
    Stepper st(s.grid, beta);
    return st.step(s, dt);
}

/// March to T in uniform steps (dt adjusted to divide T exactly), invoking
/// the observer on the initial state, every `stride` steps, and at T.
template <class Observer>
State evolve(State s, double T, double dt, double beta, Observer&& observe, int stride = 1) {
    if (T < 0.0) throw std::invalid_argument("evolve: T >= 0 required");
    observe(s);
    if (T == 0.0) return s;
    const long n_steps = std::max(1L, std::lround(T / dt));
    const double dt_eff = T / static_cast<double>(n_steps);
    Stepper st(s.grid, beta);
    for (long i = 1; i <= n_steps; ++i) {
        s = st.step(s, dt_eff);
        if (i % stride == 0 || i == n_steps) observe(s);
    }
    return s;
}

inline State evolve(State s, double T, double dt, double beta) {
    return evolve(std::move(s), T, dt, beta, [](const State&) {});
}

// ---------------------------------------------------------------------------
// Distance to the travelling-wave orbit in H^1 x L^2.

struct OrbitFit {
    double distance;
    double theta; // optimal phase in [0, 2pi)
    double shift; // optimal translation in [0, L)
};

namespace detail {

struct OrbitObjective {
    // f(r) = -2|I(r)| - 2 Re J(r) up to state-independent constants, where
    // I, J are the H^1 / L^2 cross-correlations against the shifted wave.
    const std::vector<cx>& iw;
    const std::vector<cx>& jw;
    const std::vector<double>& k;

    void eval(double r, cx& I, cx& Ip, cx& Ipp, cx& J, cx& Jp, cx& Jpp) const {
        I = Ip = Ipp = J = Jp = Jpp = 0.0;
        for (size_t q = 0; q < k.size(); ++q) {
            const cx e = std::exp(cx(0.0, -k[q] * r));
            const cx d(0.0, -k[q]);
            I += iw[q] * e;
            Ip += iw[q] * d * e;
            Ipp += iw[q] * d * d * e;
            J += jw[q] * e;
            Jp += jw[q] * d * e;
            Jpp += jw[q] * d * d * e;
        }
    }

    double f(double r) const {
        cx I, Ip, Ipp, J, Jp, Jpp;
        eval(r, I, Ip, Ipp, J, Jp, Jpp);
        return -2.0 * std::abs(I) - 2.0 * J.real();
    }

    // first and second derivative of f
    std::pair<double, double> df(double r) const {
        cx I, Ip, Ipp, J, Jp, Jpp;
        eval(r, I, Ip, Ipp, J, Jp, Jpp);
        const double a = std::abs(I);
        double d1 = -2.0 * Jp.real(), d2 = -2.0 * Jpp.real();
        if (a > 1e-300) {
            const double g1 = (std::conj(I) * Ip).real() / a;
            const double g2 = ((std::norm(Ip) + (std::conj(I) * Ipp).real()) - g1 * g1) / a;
            d1 -= 2.0 * g1;
            d2 -= 2.0 * g2;
        }
        return {d1, d2};
    }
};

} // namespace detail

/// Minimize ||(u,v) - (e^{i theta} Phi(.+r), Psi(.+r))||_{H^1 x L^2} over the
/// group orbit.  theta is closed-form given r; r is located by a coarse grid
/// scan plus Newton refinement on the smooth correlation series.
inline OrbitFit orbit_fit(const State& s, const WaveParams& p) {
    require_matching_period(s.grid.L, p.L, "orbit_fit");
    const auto wave = modulated_travelling_state(p, 0.0, s.grid);
    const int n = s.grid.n_modes;
    const double L = s.grid.L;

    const auto cu = fourier_coefficients(s.grid, s.u);
    const auto cp = fourier_coefficients(s.grid, wave.u);
    const auto cv = fourier_coefficients(s.grid, to_complex(s.v));
    const auto cq = fourier_coefficients(s.grid, to_complex(wave.v));

    std::vector<double> k(n);
    std::vector<cx> iw(n), jw(n);
    double cst = 0.0; // ||u||^2 + ||Phi||^2 + ||v||^2 + ||Psi||^2
    for (int q = 0; q < n; ++q) {
        k[q] = wavenumber(s.grid, q);
        const double w1 = L * (1.0 + k[q] * k[q]);
        iw[q] = w1 * cu[q] * std::conj(cp[q]);
        jw[q] = L * cv[q] * std::conj(cq[q]);
        cst += w1 * (std::norm(cu[q]) + std::norm(cp[q])) +
               L * (std::norm(cv[q]) + std::norm(cq[q]));
    }

    // coarse scan over all grid shifts via one FFT
    std::vector<cx> icorr, jcorr;
    fft_forward(icorr, iw);
    fft_forward(jcorr, jw);
    int best = 0;
    double fbest = 0.0;
    for (int j = 0; j < n; ++j) {
        const double f = -2.0 * std::abs(icorr[j]) - 2.0 * jcorr[j].real();
        if (j == 0 || f < fbest) {
            fbest = f;
            best = j;
        }
    }

    const detail::OrbitObjective obj{iw, jw, k};
    double r = best * s.grid.dx();
    const double max_step = 0.75 * s.grid.dx();
    for (int it = 0; it < 60; ++it) {
        const auto [d1, d2] = obj.df(r);
        if (std::abs(d1) < 1e-14 * (std::abs(fbest) + 1.0)) break;
        double stepr = (d2 > 0.0) ? -d1 / d2 : -std::copysign(max_step, d1);
        stepr = std::clamp(stepr, -max_step, max_step);
        const double cand = r + stepr;
        if (obj.f(cand) <= obj.f(r))
            r = cand;
        else
            break;
        if (std::abs(stepr) < 1e-15 * std::max(1.0, L)) break;
    }
    r = std::fmod(r, L);
    if (r < 0.0) r += L;

    cx I, Ip, Ipp, J, Jp, Jpp;
    obj.eval(r, I, Ip, Ipp, J, Jp, Jpp);
    double theta = std::abs(I) > 0.0 ? std::arg(I) : 0.0;
    if (theta < 0.0) theta += 2.0 * M_PI;

    // distance from the explicit difference (immune to cancellation)
    const cx phase = std::exp(cx(0.0, theta));
    double dist2 = 0.0;
    for (int q = 0; q < n; ++q) {
        const cx sh = std::exp(cx(0.0, k[q] * r));
        dist2 += L * (1.0 + k[q] * k[q]) * std::norm(cu[q] - phase * cp[q] * sh);
        dist2 += L * std::norm(cv[q] - cq[q] * sh);
    }
    return {std::sqrt(std::max(0.0, dist2)), theta, r};
}

inline double orbit_distance(const State& s, const WaveParams& p) {
    return orbit_fit(s, p).distance;
}

// ---------------------------------------------------------------------------
// Orbital-stability experiment.

struct PerturbationSpec {
    double epsilon = 0.0; // H^1 x L^2 norm of the perturbation
    std::uint64_t seed = 0;
    int max_mode = 8; // spectral support of the random perturbation
};

struct StabilitySample {
    double t;
    double orbit_dist;
    double E1, E2, E3;
};

struct StabilitySeries {
    std::vector<StabilitySample> samples;
    ConservedTriple initial{};
};

/// Smooth random perturbation with prescribed H^1 x L^2 norm.
inline std::pair<std::vector<cx>, std::vector<double>>
make_perturbation(const GridSpec& g, const PerturbationSpec& spec) {
    std::vector<cx> du(g.n_modes, cx(0.0));
    std::vector<double> dv(g.n_modes, 0.0);
    if (spec.epsilon == 0.0) return {du, dv};
    std::mt19937_64 rng(spec.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const auto x = grid_nodes(g);
    for (int mode = -spec.max_mode; mode <= spec.max_mode; ++mode) {
        const cx a(gauss(rng), gauss(rng));
        const double b_re = gauss(rng), b_im = (mode > 0) ? gauss(rng) : 0.0;
        const double kk = 2.0 * M_PI * mode / g.L;
        for (int j = 0; j < g.n_modes; ++j) {
            const cx e = std::exp(cx(0.0, kk * x[j]));
            du[j] += a * e;
            if (mode == 0)
                dv[j] += b_re;
            else if (mode > 0) // conjugate pair keeps dv real
                dv[j] += 2.0 * (b_re * std::cos(kk * x[j]) - b_im * std::sin(kk * x[j]));
        }
    }
    double norm2 = 0.0;
    const auto cdu = fourier_coefficients(g, du);
    const auto cdv = fourier_coefficients(g, to_complex(dv));
    for (int q = 0; q < g.n_modes; ++q) {
        const double kq = wavenumber(g, q);
        norm2 += g.L * (1.0 + kq * kq) * std::norm(cdu[q]) + g.L * std::norm(cdv[q]);
    }
    const double scale = spec.epsilon / std::sqrt(norm2);
    for (auto& z : du) z *= scale;
    for (auto& z : dv) z *= scale;
    return {du, dv};
}

/// Evolve a perturbed travelling wave and record the distance to its orbit
/// together with the conserved quantities at the observer stride.
inline StabilitySeries stability_experiment(const WaveParams& p, const PerturbationSpec& pert,
                                            double T, double dt, const GridSpec& grid,
                                            int stride = 16) {
    State s = modulated_travelling_state(p, 0.0, grid);
    const auto [du, dv] = make_perturbation(grid, pert);
    for (int j = 0; j < grid.n_modes; ++j) {
        s.u[j] += du[j];
        s.v[j] += dv[j];
    }
    StabilitySeries series;
    series.initial = conserved(s, p.beta);
    auto observer = [&](const State& cur) {
        const auto e = conserved(cur, p.beta);
        series.samples.push_back({cur.t, orbit_distance(cur, p), e.E1, e.E2, e.E3});
    };
    evolve(std::move(s), T, dt, p.beta, observer, stride);
    return series;
}

} // namespace benney
