#pragma once

// Discrete space-time symbol grids and the X^{r,b} / H^b_t H^s norm family,
// the necessity-counterexample sweeps, the well-posedness region predicate,
// and the plane-wave ill-posedness experiment.
//
// A symbol lives on the lattice {(n, tau): |n| <= n_max, tau = j*dtau} and is
// stored row-compressed: each occupied n keeps one dense tau window; absent
// cells are exactly zero.  The counterexample symbols occupy O(1) cells per n,
// so sweeps up to N = 2^10 stay tiny even though tau_max grows like N^2.

#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include "benney/dynamics.hpp"
#include "benney/fourier.hpp"

namespace benney {

struct SymbolRow {
    int n = 0;
    double tau0 = 0.0; // tau of vals.front()
    std::vector<cx> vals;
};

struct SymbolGrid {
    int n_max;
    double tau_max;
    double dtau;
    std::vector<SymbolRow> rows;

    SymbolGrid(int n_max_, double tau_max_, double dtau_ = 0.25)
        : n_max(n_max_), tau_max(tau_max_), dtau(dtau_) {
        if (!(dtau > 0.0)) throw std::invalid_argument("SymbolGrid: dtau > 0 required");
    }

    SymbolRow& add_row(int n, double tau_lo, int len) {
        if (std::abs(n) > n_max) throw std::invalid_argument("SymbolGrid: |n| exceeds n_max");
        rows.push_back({n, tau_lo, std::vector<cx>(len, cx(0.0))});
        return rows.back();
    }
};

/// Indicator row chi_{[-1,1]}(tau + n^2): support on the Schroedinger parabola.
inline SymbolRow chi_row_parabola(const SymbolGrid& g, int n) {
    const double c = -static_cast<double>(n) * n;
    const int len = static_cast<int>(std::lround(2.0 / g.dtau)) + 1;
    return {n, c - 1.0, std::vector<cx>(len, cx(1.0))};
}

/// Indicator row chi_{[-1,1]}(tau).
inline SymbolRow chi_row_flat(const SymbolGrid& g, int n) {
    const int len = static_cast<int>(std::lround(2.0 / g.dtau)) + 1;
    return {n, -1.0, std::vector<cx>(len, cx(1.0))};
}

/// Continuum convolution in tau (and addition in n) of two rows.
inline SymbolRow convolve(const SymbolRow& a, const SymbolRow& b, double dtau) {
    SymbolRow out{a.n + b.n, a.tau0 + b.tau0,
                  std::vector<cx>(a.vals.size() + b.vals.size() - 1, cx(0.0))};
    for (size_t i = 0; i < a.vals.size(); ++i)
        for (size_t j = 0; j < b.vals.size(); ++j) out.vals[i + j] += a.vals[i] * b.vals[j] * dtau;
    return out;
}

/// Symbol of the complex conjugate: n -> -n, tau -> -tau, values conjugated.
inline SymbolRow conjugate_reflect(const SymbolRow& a, double dtau) {
    SymbolRow out{-a.n, -(a.tau0 + dtau * static_cast<double>(a.vals.size() - 1)),
                  std::vector<cx>(a.vals.rbegin(), a.vals.rend())};
    for (auto& v : out.vals) v = std::conj(v);
    return out;
}

/// Symbol of d/dx: multiply by i n.
inline SymbolRow apply_dx(SymbolRow row) {
    for (auto& v : row.vals) v *= cx(0.0, static_cast<double>(row.n));
    return row;
}

// Checked dispersive-relation helpers used by the sweep constructors:
// for uv,        tau+n^2 - (tau1+n1^2) - tau2          = n^2 - n1^2;
// for d_x(u wbar), (tau1+n1^2) + (tau2-n2^2) - tau     = n1^2 - n2^2.
inline double dispersive_gap_uv(int n_u, int n_v) {
    const double n = n_u + n_v;
    return n * n - static_cast<double>(n_u) * n_u;
}
inline double dispersive_gap_derivative(int n_u, int n_w) {
    return static_cast<double>(n_u) * n_u - static_cast<double>(n_w) * n_w;
}

enum class NormFlavor { X_sb, Hb_Hs, X_mod, Y_mod };

struct NormRequest {
    double index = 0.0; // Sobolev exponent r or s
    double b = 0.5;     // modulation exponent (the modified flavors pin b = 1/2)
    NormFlavor flavor = NormFlavor::X_sb;
};

struct NormDiagnostics {
    bool truncation_warning = false;
    double edge_mass_fraction = 0.0;
};

inline double norm(const SymbolGrid& g, const NormRequest& req, NormDiagnostics* diag = nullptr) {
    const bool modified = req.flavor == NormFlavor::X_mod || req.flavor == NormFlavor::Y_mod;
    const bool parabola_weight = req.flavor == NormFlavor::X_sb || req.flavor == NormFlavor::X_mod;
    const double b = modified ? 0.5 : req.b;

    double base2 = 0.0, l1_sq = 0.0, total_mass = 0.0, edge_mass = 0.0;
    for (const auto& row : g.rows) {
        const double wn = std::pow(1.0 + std::abs(row.n), 2.0 * req.index);
        const double shift = parabola_weight ? static_cast<double>(row.n) * row.n : 0.0;
        double cell = 0.0, l1 = 0.0;
        for (size_t j = 0; j < row.vals.size(); ++j) {
            const double tau = row.tau0 + g.dtau * static_cast<double>(j);
            const double mod2 = std::norm(row.vals[j]);
            cell += std::pow(1.0 + std::abs(tau + shift), 2.0 * b) * mod2 * g.dtau;
            l1 += std::abs(row.vals[j]) * g.dtau;
            total_mass += mod2;
            if (std::abs(tau) >= g.tau_max - g.dtau) edge_mass += mod2;
        }
        base2 += wn * cell;
        l1_sq += wn * l1 * l1;
    }
    if (diag) {
        diag->edge_mass_fraction = total_mass > 0.0 ? edge_mass / total_mass : 0.0;
        diag->truncation_warning = total_mass > 0.0 && diag->edge_mass_fraction >= 1e-6;
    }
    const double base = std::sqrt(base2);
    return modified ? base + std::sqrt(l1_sq) : base;
}

// ---------------------------------------------------------------------------
// Necessity sweeps.

struct SweepPoint {
    int N;
    double norm_product;
    double norm_u;
    double norm_v;
};

struct SweepSeries {
    std::vector<SweepPoint> points;
    double slope_product = 0.0;
    double slope_u = 0.0;
    double slope_v = 0.0;
};

struct NecessityResult {
    SweepSeries pair1;
    SweepSeries pair2;
};

namespace detail {

inline double fit_slope(const std::vector<double>& logx, const std::vector<double>& logy) {
    const size_t n = logx.size();
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (size_t i = 0; i < n; ++i) {
        sx += logx[i];
        sy += logy[i];
        sxx += logx[i] * logx[i];
        sxy += logx[i] * logy[i];
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

/// Least-squares log-log slopes over the largest four N.
inline void fit_series(SweepSeries& s) {
    const size_t use = std::min<size_t>(4, s.points.size());
    std::vector<double> lx, lp, lu, lv;
    for (size_t i = s.points.size() - use; i < s.points.size(); ++i) {
        lx.push_back(std::log(static_cast<double>(s.points[i].N)));
        lp.push_back(std::log(s.points[i].norm_product));
        lu.push_back(std::log(s.points[i].norm_u));
        lv.push_back(std::log(s.points[i].norm_v));
    }
    s.slope_product = fit_slope(lx, lp);
    s.slope_u = fit_slope(lx, lu);
    s.slope_v = fit_slope(lx, lv);
}

inline SymbolGrid grid_for(int N) {
    // n_max = 2N is the largest occupied mode; tau_max = n_max^2 + 64 keeps
    // the curve tau = -n^2 inside the logical grid.
    const double n_max = 2.0 * N;
    return SymbolGrid(2 * N, n_max * n_max + 64.0, 0.25);
}

} // namespace detail

/// Counterexample pairs for the uv estimate: (u at n=N on the parabola,
/// v at n=-2N flat) then (u at n=0, v at n=N).  Expected slope tuples
/// (r, r, s) and (r-1, 0, s).
inline NecessityResult necessity_sweep_uv(const std::vector<int>& N_list, double r, double s,
                                          double b1, double b2) {
    NecessityResult res;
    const auto run = [&](SweepSeries& series, auto n_of_u, auto n_of_v) {
        for (int N : N_list) {
            auto g = detail::grid_for(N);
            const auto urow = chi_row_parabola(g, n_of_u(N));
            const auto vrow = chi_row_flat(g, n_of_v(N));
            auto prod = convolve(urow, vrow, g.dtau);
            // support sits at distance |n^2 - n1^2| from the parabola
            const double center = prod.tau0 + 0.5 * g.dtau * static_cast<double>(prod.vals.size() - 1);
            const double gap = dispersive_gap_uv(urow.n, vrow.n);
            if (std::abs(center + static_cast<double>(prod.n) * prod.n - gap) > 1e-9)
                throw std::logic_error("necessity_sweep_uv: dispersive relation violated");

            SymbolGrid gu(g.n_max, g.tau_max, g.dtau), gv(g.n_max, g.tau_max, g.dtau),
                gp(g.n_max, g.tau_max, g.dtau);
            gu.rows.push_back(urow);
            gv.rows.push_back(vrow);
            gp.rows.push_back(prod);
            series.points.push_back({N, norm(gp, {r, -0.5, NormFlavor::X_sb}),
                                     norm(gu, {r, b1, NormFlavor::X_sb}),
                                     norm(gv, {s, b2, NormFlavor::Hb_Hs})});
        }
        detail::fit_series(series);
    };
    run(res.pair1, [](int N) { return N; }, [](int N) { return -2 * N; });
    run(res.pair2, [](int) { return 0; }, [](int N) { return N; });
    return res;
}

/// Counterexample pairs for the d_x(u conj(w)) estimate: (u at N, w at -N)
/// then (u at 0, w at N).  Expected slope tuples (s+1, r, r) and (s, 0, r).
inline NecessityResult necessity_sweep_derivative(const std::vector<int>& N_list, double r, double s,
                                                  double b1, double b2) {
    NecessityResult res;
    const auto run = [&](SweepSeries& series, auto n_of_u, auto n_of_w) {
        for (int N : N_list) {
            auto g = detail::grid_for(N);
            const auto urow = chi_row_parabola(g, n_of_u(N));
            const auto wrow = chi_row_parabola(g, n_of_w(N));
            const auto wbar = conjugate_reflect(wrow, g.dtau);
            auto prod = apply_dx(convolve(urow, wbar, g.dtau));
            const double center = prod.tau0 + 0.5 * g.dtau * static_cast<double>(prod.vals.size() - 1);
            if (std::abs(center + dispersive_gap_derivative(urow.n, wrow.n)) > 1e-9)
                throw std::logic_error("necessity_sweep_derivative: dispersive relation violated");

            SymbolGrid gu(g.n_max, g.tau_max, g.dtau), gw(g.n_max, g.tau_max, g.dtau),
                gp(g.n_max, g.tau_max, g.dtau);
            gu.rows.push_back(urow);
            gw.rows.push_back(wrow);
            gp.rows.push_back(prod);
            series.points.push_back({N, norm(gp, {s, -0.5, NormFlavor::Hb_Hs}),
                                     norm(gu, {r, b1, NormFlavor::X_sb}),
                                     norm(gw, {r, b2, NormFlavor::X_sb})});
        }
        detail::fit_series(series);
    };
    run(res.pair1, [](int N) { return N; }, [](int N) { return -N; });
    run(res.pair2, [](int) { return 0; }, [](int N) { return N; });
    return res;
}

// ---------------------------------------------------------------------------
// Well-posedness region and the ill-posedness experiment.

enum class RegionClass { in_W, outside_W, illposed_zone };

/// max{0, r-1} <= s <= min{r, 2r-1} classifies W; r < 0 is the ill-posed
/// zone (for beta != 0) regardless of s.
inline RegionClass wellposed_region(double r, double s) {
    if (r < 0.0) return RegionClass::illposed_zone;
    if (std::max(0.0, r - 1.0) <= s && s <= std::min(r, 2.0 * r - 1.0)) return RegionClass::in_W;
    return RegionClass::outside_W;
}

struct IllposednessParams {
    double r;
    double nu;
    double delta;
    double alpha1;
    double alpha2;
    int N;
    double beta;
};

struct IllposednessReport {
    double gamma = 0.0;
    double a1 = 0.0, a2 = 0.0;
    double u0_dist_sq = 0.0;      // = (alpha1 - alpha2)^2
    double v0_dist_sq = 0.0;      // = (alpha1^2 - alpha2^2)^2
    double t_star = 0.0;          // (pi/2) delta^{-1} (1+N^2)^{-nu}
    double phase_at_tstar = 0.0;  // t* (gamma+beta)(a1^2 - a2^2)
    double u_dist_sq_at_tstar = 0.0;
    double lower_bound_ratio = 0.0;    // u_dist^2(t*) / (alpha1^2 + alpha2^2)
    double condition_residual = 0.0;   // beta(a1^2-a2^2) - delta (1+N^2)^nu
};

/// alpha2 satisfying the phase-separation condition
/// beta (alpha1^2 - alpha2^2) (1+N^2)^{-r} = delta (1+N^2)^{nu}.
inline double alpha2_for_separation(double r, double nu, double delta, double alpha1, int N,
                                    double beta) {
    const double w = 1.0 + static_cast<double>(N) * N;
    const double a2sq = alpha1 * alpha1 - delta * std::pow(w, nu + r) / beta;
    if (!(a2sq > 0.0))
        throw std::domain_error("alpha2_for_separation: no real alpha2 for these parameters");
    return std::sqrt(a2sq);
}

/// Closed-form evaluation of the two-solution experiment built on
/// u_{N,a}(t,x) = a e^{iNx} e^{-it(N^2 + (gamma+beta)a^2)}, v = gamma a^2,
/// with |gamma| = (1+N^2)^r and a_i = alpha_i (1+N^2)^{-r/2}.
inline IllposednessReport illposedness_experiment(const IllposednessParams& p) {
    if (!(p.r < 0.0)) throw std::domain_error("illposedness_experiment: r < 0 required");
    if (!(p.nu > 0.0)) throw std::domain_error("illposedness_experiment: nu > 0 required");
    if (!(p.nu + p.r < 0.0)) throw std::domain_error("illposedness_experiment: nu + r < 0 required");
    if (p.beta == 0.0) throw std::domain_error("illposedness_experiment: beta != 0 required");
    if (p.N < 1) throw std::domain_error("illposedness_experiment: N >= 1 required");

    const double w = 1.0 + static_cast<double>(p.N) * p.N;
    IllposednessReport rep;
    rep.gamma = std::pow(w, p.r);
    rep.a1 = p.alpha1 * std::pow(w, -0.5 * p.r);
    rep.a2 = p.alpha2 * std::pow(w, -0.5 * p.r);

    rep.u0_dist_sq = std::pow(w, p.r) * (rep.a1 - rep.a2) * (rep.a1 - rep.a2);
    const double da2 = rep.a1 * rep.a1 - rep.a2 * rep.a2;
    rep.v0_dist_sq = rep.gamma * rep.gamma * da2 * da2;

    rep.t_star = 0.5 * M_PI / (p.delta * std::pow(w, p.nu));
    rep.phase_at_tstar = rep.t_star * (rep.gamma + p.beta) * da2;
    rep.u_dist_sq_at_tstar =
        std::pow(w, p.r) * (rep.a1 * rep.a1 + rep.a2 * rep.a2 -
                            2.0 * rep.a1 * rep.a2 * std::cos(rep.phase_at_tstar));
    rep.lower_bound_ratio =
        rep.u_dist_sq_at_tstar / (p.alpha1 * p.alpha1 + p.alpha2 * p.alpha2);
    rep.condition_residual = p.beta * da2 - p.delta * std::pow(w, p.nu);
    return rep;
}

struct CrosscheckResult {
    double closed_form; // u distance^2 at t* per the closed form
    double solver;      // same quantity from the spectral time stepper
    double abs_error;
};

/// Evolve the two plane-wave data sets with the PDE solver and compare the
/// discrete H^r distance at t* against the closed form.
inline CrosscheckResult illposedness_crosscheck(const IllposednessParams& p, int n_modes = 64,
                                                double dt = 1e-3) {
    const auto rep = illposedness_experiment(p);
    GridSpec g{2.0 * M_PI, n_modes};
    if (p.N > n_modes / 3)
        throw std::invalid_argument("illposedness_crosscheck: N beyond the dealiased band");
    const auto x = grid_nodes(g);

    const auto evolve_amp = [&](double a) {
        State s;
        s.grid = g;
        s.u.resize(n_modes);
        s.v.assign(n_modes, rep.gamma * a * a);
        for (int j = 0; j < n_modes; ++j) s.u[j] = a * std::exp(cx(0.0, p.N * x[j]));
        return evolve(std::move(s), rep.t_star, dt, p.beta);
    };
    const auto s1 = evolve_amp(rep.a1);
    const auto s2 = evolve_amp(rep.a2);

    const auto c1 = fourier_coefficients(g, s1.u);
    const auto c2 = fourier_coefficients(g, s2.u);
    double dist2 = 0.0;
    for (int q = 0; q < n_modes; ++q) {
        const double mode = mode_of_index(q, n_modes);
        dist2 += std::pow(1.0 + mode * mode, p.r) * std::norm(c1[q] - c2[q]);
    }
    return {rep.u_dist_sq_at_tstar, dist2, std::abs(dist2 - rep.u_dist_sq_at_tstar)};
}

} // namespace benney
