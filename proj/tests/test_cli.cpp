#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include <json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const fs::path kTmp = BENNEY_TEST_TMPDIR;

struct RunResult {
    int exit_code;
    std::string stderr_text;
};

fs::path fresh_dir(const std::string& name) {
    const auto dir = kTmp / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

void write_config(const fs::path& p, const std::string& body) {
    std::ofstream(p) << body;
}

RunResult run_cli(const std::string& sub, const fs::path& config, const fs::path& out,
                  const std::string& extra = "") {
    const auto errfile = out.string() + ".stderr";
    std::ostringstream cmd;
    cmd << BENNEY_CLI_PATH << " " << sub << " --config " << config << " --out " << out << " "
        << extra << " 2>" << errfile << " >/dev/null";
    const int status = std::system(cmd.str().c_str());
    std::ifstream err(errfile);
    std::stringstream ss;
    ss << err.rdbuf();
    return {WEXITSTATUS(status), ss.str()};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

TEST_CASE("wave command", "[cli]") {
    const auto dir = fresh_dir("wave_ok");
    const auto cfgp = dir / "cfg";
    write_config(cfgp, "omega = -3.0\nc = 1.0\nbeta = 0.0\nL = 6.283185307179586\n");

    const auto res = run_cli("wave", cfgp, dir);
    REQUIRE(res.exit_code == 0);
    CHECK(fs::exists(dir / "phi.csv"));
    CHECK(fs::exists(dir / "n.csv"));
    CHECK(fs::exists(dir / "run_record.json"));
    const auto params = json::parse(slurp(dir / "params.json"));
    CHECK(params["ode_residual_r1"].get<double>() < 1e-8);

    SECTION("inadmissible beta*c >= 1 names the violated inequality") {
        const auto dir2 = fresh_dir("wave_bad");
        const auto cfg2 = dir2 / "cfg";
        write_config(cfg2, "omega = -3.0\nc = 2.0\nbeta = 0.6\nL = 6.283185307179586\n");
        const auto bad = run_cli("wave", cfg2, dir2);
        CHECK(bad.exit_code == 2);
        CHECK(bad.stderr_text.find("1 - beta*c > 0") != std::string::npos);
        CHECK_FALSE(fs::exists(dir2 / "phi.csv"));
    }

    SECTION("missing output directory fails cleanly") {
        const auto ghost = kTmp / "does_not_exist_dir";
        fs::remove_all(ghost);
        const auto bad = run_cli("wave", cfgp, ghost);
        CHECK(bad.exit_code == 2);
        CHECK_FALSE(fs::exists(ghost));
    }

    SECTION("unknown config keys are rejected") {
        const auto dir3 = fresh_dir("wave_stray");
        const auto cfg3 = dir3 / "cfg";
        write_config(cfg3, "omega = -3.0\nc = 1.0\nbeta = 0.0\nL = 6.283185307179586\ntypo = 1\n");
        CHECK(run_cli("wave", cfg3, dir3).exit_code == 2);
    }
}

TEST_CASE("evolve command", "[cli]") {
    SECTION("plane-wave regression reports a tiny sup error") {
        const auto dir = fresh_dir("evolve_pw");
        const auto cfgp = dir / "cfg";
        write_config(cfgp,
                     "initial = planewave\namp = 0.75\nmode = 3\ngamma = -0.6\nbeta = 1.3\n"
                     "T = 1.0\ndt = 1e-3\nn_modes = 64\n");
        REQUIRE(run_cli("evolve", cfgp, dir).exit_code == 0);
        const auto rec = json::parse(slurp(dir / "run_record.json"));
        CHECK(rec["results"]["planewave_sup_error"].get<double>() < 1e-8);
        CHECK(fs::exists(dir / "trajectory.csv"));
    }

    SECTION("zero field produces a flat trajectory") {
        const auto dir = fresh_dir("evolve_zero");
        const auto cfgp = dir / "cfg";
        write_config(cfgp, "initial = zero\nbeta = 0.5\nT = 0.5\ndt = 1e-2\nn_modes = 64\n");
        REQUIRE(run_cli("evolve", cfgp, dir).exit_code == 0);
        std::ifstream csv(dir / "trajectory.csv");
        std::string line;
        std::getline(csv, line); // header
        while (std::getline(csv, line)) {
            const auto c1 = line.find(',');
            const auto rest = line.substr(c1 + 1);
            CHECK(rest.substr(0, 5) == "0,0,0"); // E1,E2,E3 all zero
        }
    }

    SECTION("oversized dt trips the blow-up guard with exit 3") {
        const auto dir = fresh_dir("evolve_blowup");
        const auto cfgp = dir / "cfg";
        write_config(cfgp,
                     "initial = planewave\namp = 40.0\nmode = 3\ngamma = 1.0\nbeta = 2.0\n"
                     "T = 100.0\ndt = 0.05\nn_modes = 64\n");
        CHECK(run_cli("evolve", cfgp, dir).exit_code == 3);
    }
}

TEST_CASE("reproducibility: identical config and seed give identical bytes", "[cli]") {
    const std::string cfg_body =
        "initial = dnoidal\nomega = -3.75\nc = 2.0\nbeta = -0.5\nL = 6.283185307179586\n"
        "T = 0.2\ndt = 1e-3\nn_modes = 128\nperturb_eps = 1e-3\nstride = 50\n";
    const auto a = fresh_dir("repro_a");
    const auto b = fresh_dir("repro_b");
    write_config(a / "cfg", cfg_body);
    write_config(b / "cfg", cfg_body);
    REQUIRE(run_cli("evolve", a / "cfg", a, "--seed 7").exit_code == 0);
    REQUIRE(run_cli("evolve", b / "cfg", b, "--seed 7").exit_code == 0);

    CHECK(slurp(a / "trajectory.csv") == slurp(b / "trajectory.csv"));
    CHECK(slurp(a / "stability.csv") == slurp(b / "stability.csv"));

    auto ra = json::parse(slurp(a / "run_record.json"));
    auto rb = json::parse(slurp(b / "run_record.json"));
    ra.erase("wall_clock_ms");
    rb.erase("wall_clock_ms");
    CHECK(ra.dump() == rb.dump());

    // a different seed must change the perturbed trajectory
    const auto c = fresh_dir("repro_c");
    write_config(c / "cfg", cfg_body);
    REQUIRE(run_cli("evolve", c / "cfg", c, "--seed 8").exit_code == 0);
    CHECK(slurp(a / "stability.csv") != slurp(c / "stability.csv"));
}

TEST_CASE("spectrum command", "[cli]") {
    const auto dir = fresh_dir("spectrum");
    const auto cfgp = dir / "cfg";
    write_config(cfgp, "omega = -3.0\nc = 1.0\nbeta = 0.0\nL = 6.283185307179586\n"
                       "operator = L1\nM = 48\nn_eigs = 5\n");
    REQUIRE(run_cli("spectrum", cfgp, dir).exit_code == 0);
    const auto j = json::parse(slurp(dir / "spectrum.json"));
    CHECK(j["n_negative"].get<int>() == 1);
    CHECK(j["kernel_dim"].get<int>() == 1);
    CHECK(j["eigenvalues"].size() == 5);
}

TEST_CASE("criterion command with a sweep", "[cli]") {
    const auto dir = fresh_dir("criterion");
    const auto cfgp = dir / "cfg";
    write_config(cfgp, "omega = -3.75\nc = 2.0\nbeta = -0.5\nL = 6.283185307179586\n"
                       "M = 48\nn_modes = 256\nsweep_count = 3\n"
                       "sweep_omega_min = -4.5\nsweep_omega_max = -3.5\n");
    REQUIRE(run_cli("criterion", cfgp, dir, "--threads 2").exit_code == 0);
    const auto j = json::parse(slurp(dir / "report.json"));
    CHECK(j["verdict"].get<std::string>() == "stable-by-theorem");
    CHECK(j["det_d"].get<double>() < 0.0);
    const auto sweep = slurp(dir / "sweep.csv");
    CHECK(sweep.find("omega,c,beta,kappa2,det_d_formula,det_d_fd,B,verdict") == 0);
    CHECK(std::count(sweep.begin(), sweep.end(), '\n') == 4); // header + 3 rows
}

TEST_CASE("bourgain command", "[cli]") {
    SECTION("uv sweep") {
        const auto dir = fresh_dir("bourgain_uv");
        const auto cfgp = dir / "cfg";
        write_config(cfgp, "mode = uv\nr = 0.75\ns = 0.5\nN_pow_min = 4\nN_pow_max = 8\n");
        REQUIRE(run_cli("bourgain", cfgp, dir).exit_code == 0);
        const auto j = json::parse(slurp(dir / "report.json"));
        CHECK(std::abs(j["pair1"]["slope_product"].get<double>() - 0.75) < 0.1);
        CHECK(fs::exists(dir / "pair1.csv"));
        CHECK(fs::exists(dir / "pair2.csv"));
    }

    SECTION("region classification") {
        const auto dir = fresh_dir("bourgain_region");
        const auto cfgp = dir / "cfg";
        write_config(cfgp, "mode = region\nr = -0.1\ns = 3.0\n");
        REQUIRE(run_cli("bourgain", cfgp, dir).exit_code == 0);
        CHECK(json::parse(slurp(dir / "report.json"))["class"].get<std::string>() ==
              "illposed_zone");
    }
}

TEST_CASE("illposed command", "[cli]") {
    const auto dir = fresh_dir("illposed");
    const auto cfgp = dir / "cfg";
    write_config(cfgp, "r = -0.5\nnu = 0.25\ndelta = 1.0\nalpha1 = 1.0\nN = 16\nbeta = 1.0\n"
                       "crosscheck = 1\nn_modes = 64\ndt = 1e-3\n");
    REQUIRE(run_cli("illposed", cfgp, dir).exit_code == 0);
    const auto j = json::parse(slurp(dir / "report.json"));
    CHECK(j["crosscheck"]["abs_error"].get<double>() < 1e-6);
    CHECK(j["t_star_2N"].get<double>() < j["t_star"].get<double>());
    CHECK(j["lower_bound_ratio"].get<double>() > 0.5);

    SECTION("violated precondition exits with 2") {
        const auto dir2 = fresh_dir("illposed_bad");
        const auto cfg2 = dir2 / "cfg";
        write_config(cfg2, "r = 0.5\nnu = 0.25\ndelta = 1.0\nalpha1 = 1.0\nN = 16\nbeta = 1.0\n"
                           "alpha2 = 0.9\ncrosscheck = 0\n");
        const auto bad = run_cli("illposed", cfg2, dir2);
        CHECK(bad.exit_code == 2);
        CHECK(bad.stderr_text.find("r < 0") != std::string::npos);
    }
}
