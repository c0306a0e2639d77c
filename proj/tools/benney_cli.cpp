// Batch front door.  Subcommands: wave, evolve, spectrum, criterion,
// bourgain, illposed.  Every run reads a flat key=value config, writes its
// outputs (CSV/JSON) into --out, and drops a run_record.json manifest with
// the config echo and content hashes.  Reruns with identical config, seed
// and version reproduce identical output bytes (the manifest's wall-clock
// field is the single exemption).
//
// Exit codes: 0 success, 2 invalid config or inadmissible parameters,
// 3 numerical failure (blow-up, convergence, eigensolver).

#include <atomic>
#include <chrono>
#include <clocale>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "benney/benney.hpp"
#include "benney/io.hpp"
#include "benney/version.hpp"

namespace fs = std::filesystem;
using namespace benney;
using nlohmann::json;

namespace {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

class Config {
  public:
    static Config load(const fs::path& path) {
        std::ifstream in(path);
        if (!in) throw ConfigError("cannot read config file: " + path.string());
        Config cfg;
        std::string line;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
            const auto eq = line.find('=');
            if (eq == std::string::npos) {
                if (line.find_first_not_of(" \t\r") != std::string::npos)
                    throw ConfigError("config line " + std::to_string(lineno) +
                                      ": expected key = value");
                continue;
            }
            const auto key = trim(line.substr(0, eq));
            const auto val = trim(line.substr(eq + 1));
            if (key.empty() || val.empty())
                throw ConfigError("config line " + std::to_string(lineno) + ": empty key or value");
            if (!cfg.kv_.emplace(key, val).second)
                throw ConfigError("config: duplicate key '" + key + "'");
        }
        return cfg;
    }

    double number(const std::string& key) const {
        return parse_number(key, require(key));
    }
    double number(const std::string& key, double def) const {
        const auto it = kv_.find(key);
        if (it == kv_.end()) {
            echo_[key] = io::fmt_g17(def);
            return def;
        }
        return parse_number(key, it->second);
    }
    long integer(const std::string& key) const { return std::lround(number(key)); }
    long integer(const std::string& key, long def) const {
        return std::lround(number(key, static_cast<double>(def)));
    }
    std::string text(const std::string& key) const {
        const auto v = require(key);
        echo_[key] = v;
        return v;
    }
    std::string text(const std::string& key, const std::string& def) const {
        const auto it = kv_.find(key);
        echo_[key] = it == kv_.end() ? def : it->second;
        consumed_.insert(key);
        return echo_[key];
    }
    bool has(const std::string& key) const { return kv_.count(key) > 0; }

    void reject_unconsumed() const {
        std::string stray;
        for (const auto& [k, v] : kv_)
            if (!consumed_.count(k)) stray += (stray.empty() ? "" : ", ") + k;
        if (!stray.empty()) throw ConfigError("config: unknown keys: " + stray);
    }
    const std::map<std::string, std::string>& echo() const { return echo_; }
    void echo_extra(const std::string& key, const std::string& val) const { echo_[key] = val; }

  private:
    static std::string trim(std::string s) {
        const auto a = s.find_first_not_of(" \t\r");
        const auto b = s.find_last_not_of(" \t\r");
        return a == std::string::npos ? std::string{} : s.substr(a, b - a + 1);
    }
    std::string require(const std::string& key) const {
        const auto it = kv_.find(key);
        if (it == kv_.end()) throw ConfigError("config: missing required key '" + key + "'");
        consumed_.insert(key);
        return it->second;
    }
    double parse_number(const std::string& key, const std::string& raw) const {
        consumed_.insert(key);
        size_t pos = 0;
        double v = 0.0;
        try {
            v = std::stod(raw, &pos);
        } catch (const std::exception&) {
            throw ConfigError("config: key '" + key + "' is not a number: " + raw);
        }
        if (pos != raw.size())
            throw ConfigError("config: key '" + key + "' has trailing characters: " + raw);
        echo_[key] = io::fmt_g17(v);
        return v;
    }

    std::map<std::string, std::string> kv_;
    mutable std::map<std::string, std::string> echo_;
    mutable std::set<std::string> consumed_;
};

json wave_params_json(const WaveParams& p) {
    return {{"omega", p.omega},   {"c", p.c},       {"beta", p.beta}, {"L", p.L},
            {"sigma", p.sigma},   {"kappa2", p.kappa2}, {"eta1", p.eta1}, {"eta2", p.eta2}};
}

GridSpec grid_from(const Config& cfg, double L, long default_modes) {
    GridSpec g{L, static_cast<int>(cfg.integer("n_modes", default_modes))};
    g.validate();
    return g;
}

// ---------------------------------------------------------------------- wave
void cmd_wave(const Config& cfg, const fs::path& out, io::RunRecord& rec) {
    const auto p = make_wave(cfg.number("omega"), cfg.number("c"), cfg.number("beta"),
                             cfg.number("L"));
    const auto grid = grid_from(cfg, p.L, 512);
    const auto prof = sample_profile(p, grid);
    const auto res = ode_residual(prof, p);
    const double period = autocorrelation_period(grid, prof.phi);

    const auto x = grid_nodes(grid);
    io::CsvWriter phi(out / "phi.csv", {"xi", "phi"});
    io::CsvWriter n(out / "n.csv", {"xi", "n"});
    for (int j = 0; j < grid.n_modes; ++j) {
        phi.row({x[j], prof.phi[j]});
        n.row({x[j], prof.n[j]});
    }
    phi.write();
    n.write();

    json params = wave_params_json(p);
    params["ode_residual_r1"] = res.r1;
    params["ode_residual_r2"] = res.r2;
    params["autocorrelation_period"] = period;
    std::ofstream(out / "params.json", std::ios::binary) << params.dump(2) << '\n';

    rec.add_output(phi.path());
    rec.add_output(n.path());
    rec.add_output(out / "params.json");
    rec.note("ode_residual_r1", res.r1);
    rec.note("ode_residual_r2", res.r2);
    std::cout << "wave: r1 = " << io::fmt_g17(res.r1) << "  r2 = " << io::fmt_g17(res.r2)
              << "  period = " << io::fmt_g17(period) << "\n";
}

// -------------------------------------------------------------------- evolve
void cmd_evolve(const Config& cfg, const fs::path& out, std::uint64_t seed, io::RunRecord& rec) {
    const auto initial = cfg.text("initial", "dnoidal");
    const double beta = cfg.number("beta");
    const double T = cfg.number("T");
    const long stride = cfg.integer("stride", 16);

    State s0;
    std::optional<WaveParams> wave;
    double pw_amp = 0.0, pw_gamma = 0.0;
    int pw_mode = 0;
    if (initial == "dnoidal") {
        wave = make_wave(cfg.number("omega"), cfg.number("c"), beta, cfg.number("L"));
        const auto grid = grid_from(cfg, wave->L, 256);
        s0 = modulated_travelling_state(*wave, 0.0, grid);
        const double eps = cfg.number("perturb_eps", 0.0);
        if (eps > 0.0) {
            const auto [du, dv] = make_perturbation(
                grid, {eps, seed, static_cast<int>(cfg.integer("perturb_max_mode", 8))});
            for (int j = 0; j < grid.n_modes; ++j) {
                s0.u[j] += du[j];
                s0.v[j] += dv[j];
            }
        }
    } else if (initial == "planewave") {
        const double L = cfg.number("L", 2.0 * M_PI);
        const auto grid = grid_from(cfg, L, 64);
        pw_amp = cfg.number("amp");
        pw_gamma = cfg.number("gamma");
        pw_mode = static_cast<int>(cfg.integer("mode"));
        s0.grid = grid;
        s0.u.resize(grid.n_modes);
        s0.v.assign(grid.n_modes, pw_gamma * pw_amp * pw_amp);
        const auto x = grid_nodes(grid);
        for (int j = 0; j < grid.n_modes; ++j)
            s0.u[j] = pw_amp * std::exp(cx(0.0, pw_mode * x[j]));
    } else if (initial == "zero") {
        const auto grid = grid_from(cfg, cfg.number("L", 2.0 * M_PI), 64);
        s0.grid = grid;
        s0.u.assign(grid.n_modes, cx(0.0));
        s0.v.assign(grid.n_modes, 0.0);
    } else {
        throw ConfigError("config: initial must be dnoidal, planewave or zero");
    }
    const double dt = cfg.number("dt", default_dt(s0.grid));

    io::CsvWriter traj(out / "trajectory.csv", {"t", "E1", "E2", "E3", "orbit_dist"});
    const auto e0 = conserved(s0, beta);
    double pw_err = 0.0;
    std::vector<std::array<double, 5>> stability_rows;
    const auto x = grid_nodes(s0.grid);

    auto observer = [&](const State& s) {
        const auto e = conserved(s, beta);
        double dist = std::numeric_limits<double>::quiet_NaN();
        if (wave) dist = orbit_distance(s, *wave);
        traj.row({s.t, e.E1, e.E2, e.E3, dist});
        if (wave) stability_rows.push_back({s.t, dist, e.E1 - e0.E1, e.E2 - e0.E2, e.E3 - e0.E3});
        if (initial == "planewave") {
            const double om = pw_mode * pw_mode + (pw_gamma + beta) * pw_amp * pw_amp;
            for (int j = 0; j < s.grid.n_modes; ++j)
                pw_err = std::max(pw_err, std::abs(s.u[j] - pw_amp * std::exp(cx(
                                              0.0, pw_mode * x[j] - om * s.t))));
        }
    };
    evolve(s0, T, dt, beta, observer, static_cast<int>(stride));
    traj.write();
    rec.add_output(traj.path());

    if (wave) {
        io::CsvWriter stab(out / "stability.csv", {"t", "orbit_dist", "dE1", "dE2", "dE3"});
        for (const auto& r : stability_rows) stab.row({r[0], r[1], r[2], r[3], r[4]});
        stab.write();
        rec.add_output(stab.path());
    }
    if (initial == "planewave") {
        rec.note("planewave_sup_error", pw_err);
        std::cout << "evolve: plane-wave sup error = " << io::fmt_g17(pw_err) << "\n";
    }
    rec.note("E1_initial", e0.E1);
}

// ------------------------------------------------------------------ spectrum
void cmd_spectrum(const Config& cfg, const fs::path& out, io::RunRecord& rec) {
    const auto p = make_wave(cfg.number("omega"), cfg.number("c"), cfg.number("beta"),
                             cfg.number("L"));
    const auto op_name = cfg.text("operator", "L1");
    HillOperator which;
    if (op_name == "L1")
        which = HillOperator::L1;
    else if (op_name == "L2")
        which = HillOperator::L2;
    else
        throw ConfigError("config: operator must be L1 or L2");
    const int M = static_cast<int>(cfg.integer("M", 64));
    const int n_eigs = static_cast<int>(cfg.integer("n_eigs", 10));

    const auto s = spectrum({which, p, M}, n_eigs);
    json j;
    j["params"] = wave_params_json(p);
    j["operator"] = op_name;
    j["M"] = M;
    j["eigenvalues"] = s.eigenvalues;
    j["n_negative"] = s.n_negative;
    j["kernel_dim"] = s.kernel_dim_numeric;
    j["kernel_tol"] = s.kernel_tol;
    std::ofstream(out / "spectrum.json", std::ios::binary) << j.dump(2) << '\n';
    rec.add_output(out / "spectrum.json");
    rec.note("n_negative", s.n_negative);
    std::cout << "spectrum: lowest = " << io::fmt_g17(s.eigenvalues.front())
              << "  n_negative = " << s.n_negative << "\n";
}

// ----------------------------------------------------------------- criterion
json report_json(const StabilityReport& rep) {
    return {{"d_ww", rep.d_ww},
            {"d_wc", rep.d_wc},
            {"d_cw", rep.d_cw},
            {"d_cc", rep.d_cc},
            {"d_ww_formula", rep.d_ww_formula},
            {"d_wc_formula", rep.d_wc_formula},
            {"d_cw_formula", rep.d_cw_formula},
            {"d_cc_formula", rep.d_cc_formula},
            {"det_d", rep.det_d},
            {"det_d_formula", rep.det_d_formula},
            {"rel_deviation", rep.rel_deviation},
            {"B_value", rep.B_value},
            {"kappa_prime", rep.kappa_prime},
            {"n_H", rep.n_H},
            {"p_d", rep.p_d},
            {"condition_a", rep.condition_a},
            {"condition_b", rep.condition_b},
            {"verdict", rep.verdict == StabilityReport::Verdict::stable_by_theorem
                            ? "stable-by-theorem"
                            : "inconclusive"}};
}

void cmd_criterion(const Config& cfg, const fs::path& out, int threads, io::RunRecord& rec) {
    const double omega = cfg.number("omega"), c = cfg.number("c");
    const double beta = cfg.number("beta"), L = cfg.number("L");
    const int M = static_cast<int>(cfg.integer("M", 64));
    const int n_modes = static_cast<int>(cfg.integer("n_modes", 512));

    const auto rep = verdict(omega, c, beta, L, M, n_modes);
    std::ofstream(out / "report.json", std::ios::binary) << report_json(rep).dump(2) << '\n';
    rec.add_output(out / "report.json");
    std::cout << "criterion: det(d'') = " << io::fmt_g17(rep.det_d) << "  verdict = "
              << (rep.verdict == StabilityReport::Verdict::stable_by_theorem ? "stable-by-theorem"
                                                                             : "inconclusive")
              << "\n";

    const long count = cfg.integer("sweep_count", 0);
    if (count > 0) {
        const double lo = cfg.number("sweep_omega_min"), hi = cfg.number("sweep_omega_max");
        struct Row {
            double omega, kappa2;
            StabilityReport rep;
        };
        std::vector<Row> rows(count);
        std::atomic<long> cursor{0};
        std::exception_ptr failure;
        std::mutex failure_mutex;
        auto worker = [&] {
            for (;;) {
                const long i = cursor.fetch_add(1);
                if (i >= count) return;
                try {
                    const double w = count == 1 ? lo : lo + (hi - lo) * i / (count - 1.0);
                    rows[i] = {w, make_wave(w, c, beta, L).kappa2, verdict(w, c, beta, L, M, n_modes)};
                } catch (...) {
                    std::lock_guard lk(failure_mutex);
                    if (!failure) failure = std::current_exception();
                    return;
                }
            }
        };
        std::vector<std::thread> pool;
        const int nw = std::max(1, std::min<int>(threads, static_cast<int>(count)));
        for (int i = 0; i < nw; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
        if (failure) std::rethrow_exception(failure);

        io::CsvWriter sweep(out / "sweep.csv", {"omega", "c", "beta", "kappa2", "det_d_formula",
                                                "det_d_fd", "B", "verdict"});
        for (const auto& r : rows)
            sweep.row({r.omega, c, beta, r.kappa2, r.rep.det_d_formula, r.rep.det_d, r.rep.B_value,
                       r.rep.verdict == StabilityReport::Verdict::stable_by_theorem ? 1.0 : 0.0});
        sweep.write();
        rec.add_output(sweep.path());
    }
}

// ------------------------------------------------------------------ bourgain
void cmd_bourgain(const Config& cfg, const fs::path& out, io::RunRecord& rec) {
    const auto mode = cfg.text("mode", "uv");
    const double r = cfg.number("r"), s = cfg.number("s");

    if (mode == "region") {
        const auto cls = wellposed_region(r, s);
        json j{{"r", r},
               {"s", s},
               {"class", cls == RegionClass::in_W          ? "in_W"
                         : cls == RegionClass::outside_W   ? "outside_W"
                                                           : "illposed_zone"}};
        std::ofstream(out / "report.json", std::ios::binary) << j.dump(2) << '\n';
        rec.add_output(out / "report.json");
        std::cout << "bourgain: region class = " << j["class"].get<std::string>() << "\n";
        return;
    }

    const double b1 = cfg.number("b1", 0.5), b2 = cfg.number("b2", 0.5);
    std::vector<int> Ns;
    for (long p = cfg.integer("N_pow_min", 4); p <= cfg.integer("N_pow_max", 10); ++p)
        Ns.push_back(1 << p);

    NecessityResult res;
    if (mode == "uv")
        res = necessity_sweep_uv(Ns, r, s, b1, b2);
    else if (mode == "derivative")
        res = necessity_sweep_derivative(Ns, r, s, b1, b2);
    else
        throw ConfigError("config: mode must be uv, derivative or region");

    const auto dump_series = [&](const SweepSeries& series, const std::string& name) {
        io::CsvWriter csv(out / (name + ".csv"),
                          {"N", "norm_product", "norm_u", "norm_v", "fitted_slope"});
        for (const auto& pt : series.points)
            csv.row({static_cast<double>(pt.N), pt.norm_product, pt.norm_u, pt.norm_v,
                     series.slope_product});
        csv.write();
        rec.add_output(csv.path());
    };
    dump_series(res.pair1, "pair1");
    dump_series(res.pair2, "pair2");

    json j{{"mode", mode},
           {"pair1", {{"slope_product", res.pair1.slope_product},
                      {"slope_u", res.pair1.slope_u},
                      {"slope_v", res.pair1.slope_v}}},
           {"pair2", {{"slope_product", res.pair2.slope_product},
                      {"slope_u", res.pair2.slope_u},
                      {"slope_v", res.pair2.slope_v}}}};
    std::ofstream(out / "report.json", std::ios::binary) << j.dump(2) << '\n';
    rec.add_output(out / "report.json");
    std::cout << "bourgain: pair1 product slope = " << io::fmt_g17(res.pair1.slope_product)
              << "  pair2 = " << io::fmt_g17(res.pair2.slope_product) << "\n";
}

// ------------------------------------------------------------------ illposed
void cmd_illposed(const Config& cfg, const fs::path& out, io::RunRecord& rec) {
    IllposednessParams p;
    p.r = cfg.number("r");
    p.nu = cfg.number("nu");
    p.delta = cfg.number("delta");
    p.alpha1 = cfg.number("alpha1");
    p.N = static_cast<int>(cfg.integer("N"));
    p.beta = cfg.number("beta");
    if (cfg.has("alpha2")) {
        p.alpha2 = cfg.number("alpha2");
    } else {
        p.alpha2 = alpha2_for_separation(p.r, p.nu, p.delta, p.alpha1, p.N, p.beta);
        cfg.echo_extra("alpha2", io::fmt_g17(p.alpha2));
    }

    const auto rep = illposedness_experiment(p);
    auto p2 = p;
    p2.N = 2 * p.N;
    p2.alpha2 = cfg.has("alpha2")
                    ? p.alpha2
                    : alpha2_for_separation(p.r, p.nu, p.delta, p.alpha1, p2.N, p.beta);
    const auto rep2 = illposedness_experiment(p2);

    json j{{"r", p.r},
           {"nu", p.nu},
           {"delta", p.delta},
           {"alpha1", p.alpha1},
           {"alpha2", p.alpha2},
           {"N", p.N},
           {"beta", p.beta},
           {"gamma", rep.gamma},
           {"a1", rep.a1},
           {"a2", rep.a2},
           {"u0_dist_sq", rep.u0_dist_sq},
           {"v0_dist_sq", rep.v0_dist_sq},
           {"t_star", rep.t_star},
           {"t_star_2N", rep2.t_star},
           {"phase_at_tstar", rep.phase_at_tstar},
           {"u_dist_sq_at_tstar", rep.u_dist_sq_at_tstar},
           {"lower_bound_ratio", rep.lower_bound_ratio},
           {"condition_residual", rep.condition_residual}};

    if (cfg.integer("crosscheck", 1) != 0) {
        const auto xc = illposedness_crosscheck(p, static_cast<int>(cfg.integer("n_modes", 64)),
                                                cfg.number("dt", 1e-3));
        j["crosscheck"] = {{"closed_form", xc.closed_form},
                           {"solver", xc.solver},
                           {"abs_error", xc.abs_error}};
        rec.note("crosscheck_abs_error", xc.abs_error);
    }
    std::ofstream(out / "report.json", std::ios::binary) << j.dump(2) << '\n';
    rec.add_output(out / "report.json");
    std::cout << "illposed: t* = " << io::fmt_g17(rep.t_star)
              << "  u_dist^2(t*) = " << io::fmt_g17(rep.u_dist_sq_at_tstar) << "\n";
}

} // namespace

int main(int argc, char** argv) {
    std::setlocale(LC_ALL, "C");
    CLI::App app{"numerical laboratory for the periodic Benney system"};
    app.require_subcommand(1);

    std::string config_path, out_dir;
    std::uint64_t seed = 0;
    int threads = 1;
    app.add_option("--config", config_path, "flat key=value config file")->required();
    app.add_option("--out", out_dir, "output directory (must exist)")->required();
    app.add_option("--seed", seed, "RNG seed recorded in the run record");
    app.add_option("--threads", threads, "worker threads for sweeps")->check(CLI::PositiveNumber);

    const char* names[] = {"wave", "evolve", "spectrum", "criterion", "bourgain", "illposed"};
    for (const char* n : names) app.add_subcommand(n)->fallthrough();
    CLI11_PARSE(app, argc, argv);
    const std::string cmd = app.get_subcommands().front()->get_name();

    const auto t0 = std::chrono::steady_clock::now();
    try {
        const fs::path out{out_dir};
        if (!fs::is_directory(out))
            throw ConfigError("output directory does not exist: " + out_dir);
        const auto cfg = Config::load(config_path);
        io::RunRecord rec(cmd, build_version);

        if (cmd == "wave")
            cmd_wave(cfg, out, rec);
        else if (cmd == "evolve")
            cmd_evolve(cfg, out, seed, rec);
        else if (cmd == "spectrum")
            cmd_spectrum(cfg, out, rec);
        else if (cmd == "criterion")
            cmd_criterion(cfg, out, threads, rec);
        else if (cmd == "bourgain")
            cmd_bourgain(cfg, out, rec);
        else
            cmd_illposed(cfg, out, rec);

        cfg.reject_unconsumed();
        cfg.echo_extra("seed", std::to_string(seed));
        io::RunRecord final_rec = rec; // config echo is complete only now
        final_rec.set_config(cfg.echo());
        final_rec.set_wall_clock_ms(
            std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
                .count());
        final_rec.write(out);
        return 0;
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::domain_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    }
}
