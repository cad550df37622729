// End-to-end checks of the dlab command-line tool: config validation, report
// formats, determinism (byte-identical reruns), and plotting.  The binary is
// located relative to this test executable's own directory.
#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

fs::path cli_path() {
    // the build places the `dlab` binary next to the test executables
    fs::path p = fs::read_symlink("/proc/self/exe").parent_path() / "dlab";
    REQUIRE(fs::exists(p));
    return p;
}

struct RunResult {
    int code = -1;
    std::string out;
};

RunResult run_cli(const std::string& args) {
    fs::path tmp = fs::temp_directory_path() / "dlab_cli_out.txt";
    std::string cmd = cli_path().string() + " " + args + " > " + tmp.string() + " 2>&1";
    int rc = std::system(cmd.c_str());
    RunResult r;
    r.code = WEXITSTATUS(rc);
    std::ifstream in(tmp);
    std::ostringstream body;
    body << in.rdbuf();
    r.out = body.str();
    return r;
}

fs::path write_config(const std::string& name, const std::string& body) {
    fs::path dir = fs::temp_directory_path() / "dlab_cli_tests";
    fs::create_directories(dir);
    fs::path p = dir / name;
    std::ofstream(p) << body;
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream body;
    body << in.rdbuf();
    return body.str();
}

}  // namespace

TEST_CASE("cli: validate accepts a good config and rejects bad ones", "[cli]") {
    fs::path good = write_config("good.toml",
                                 "[experiment]\n"
                                 "kind = \"dissipation-time\"\n"
                                 "[grid]\n"
                                 "n = 64\n"
                                 "[flow]\n"
                                 "kind = \"zero\"\n"
                                 "[dissipation]\n"
                                 "alpha = 1.0\n"
                                 "gamma = 1.0\n");
    RunResult ok = run_cli("validate " + good.string());
    INFO(ok.out);
    CHECK(ok.code == 0);
    CHECK(ok.out.find("ok:") != std::string::npos);

    SECTION("negative gamma names the field and exits 1") {
        fs::path bad = write_config("bad_gamma.toml",
                                    "[experiment]\n"
                                    "kind = \"decay\"\n"
                                    "[evolve]\n"
                                    "gamma = -0.5\n");
        RunResult r = run_cli("validate " + bad.string());
        CHECK(r.code == 1);
        CHECK(r.out.find("evolve.gamma") != std::string::npos);
    }
    SECTION("unknown experiment kind exits 1") {
        fs::path bad = write_config("bad_kind.toml",
                                    "[experiment]\nkind = \"warp-drive\"\n");
        RunResult r = run_cli("validate " + bad.string());
        CHECK(r.code == 1);
        CHECK(r.out.find("experiment.kind") != std::string::npos);
    }
    SECTION("unknown key exits 1 and is named") {
        fs::path bad = write_config("bad_key.toml",
                                    "[experiment]\nkind = \"decay\"\n[evolve]\ngama = 1.0\n");
        RunResult r = run_cli("validate " + bad.string());
        CHECK(r.code == 1);
        CHECK(r.out.find("evolve.gama") != std::string::npos);
    }
    SECTION("malformed syntax exits 1") {
        fs::path bad = write_config("bad_syntax.toml", "[experiment\nkind=\"decay\"\n");
        RunResult r = run_cli("validate " + bad.string());
        CHECK(r.code == 1);
    }
}

TEST_CASE("cli: pure-diffusion dissipation time and byte-identical rerun", "[cli]") {
    fs::path dir = fs::temp_directory_path() / "dlab_cli_tests";
    fs::path cfg = write_config("dt.toml",
                                "[experiment]\n"
                                "kind = \"dissipation-time\"\n"
                                "out = \"" + (dir / "out_dt").string() + "\"\n"
                                "[grid]\n"
                                "n = 64\n"
                                "[flow]\n"
                                "kind = \"zero\"\n"
                                "[dissipation]\n"
                                "alpha = 1.0\n"
                                "gamma = 1.0\n");
    RunResult r = run_cli("run " + cfg.string());
    INFO(r.out);
    REQUIRE(r.code == 0);
    // summary line carries tau ≈ ln2/(4π²) = 0.017557
    CHECK(r.out.find("tau=0.01755") != std::string::npos);

    fs::path out = dir / "out_dt";
    REQUIRE(fs::exists(out / "manifest.json"));
    REQUIRE(fs::exists(out / "report.json"));
    REQUIRE(fs::exists(out / "samples.csv"));
    std::string report1 = slurp(out / "report.json");
    std::string samples1 = slurp(out / "samples.csv");
    CHECK(samples1.substr(0, samples1.find("\r\n")) == "t,norm,converged");
    CHECK(report1.find("\"tau\"") != std::string::npos);

    // rerun into a second directory: data files byte-identical
    RunResult r2 = run_cli("run " + cfg.string() + " --out " + (dir / "out_dt2").string());
    REQUIRE(r2.code == 0);
    CHECK(slurp(dir / "out_dt2" / "report.json") == report1);
    CHECK(slurp(dir / "out_dt2" / "samples.csv") == samples1);
}

TEST_CASE("cli: sweep writes one row per cell and indexes every file", "[cli]") {
    fs::path dir = fs::temp_directory_path() / "dlab_cli_tests";
    fs::path cfg = write_config("sweep.toml",
                                "[experiment]\n"
                                "kind = \"sweep\"\n"
                                "out = \"" + (dir / "out_sw").string() + "\"\n"
                                "[grid]\n"
                                "n = 32\n"
                                "[sweep]\n"
                                "ms = [1, 2, 4]\n"
                                "As = [0, 4, 8]\n"
                                "alphas = [1.0]\n"
                                "gamma = 0.05\n"
                                "tol = 0.08\n");
    RunResult r = run_cli("run " + cfg.string());
    INFO(r.out);
    REQUIRE(r.code == 0);
    fs::path out = dir / "out_sw";
    std::string sweep = slurp(out / "sweep.csv");
    CHECK(sweep.substr(0, sweep.find("\r\n")) ==
          "m,A,alpha,gamma,tau,t_lo,t_hi,norm_samples_file");
    // 3×3 grid: header + 9 rows
    CHECK(std::count(sweep.begin(), sweep.end(), '\n') == 10);

    std::string manifest = slurp(out / "manifest.json");
    // manifest indexes sweep.csv + 9 norm-sample files
    std::size_t nfiles = 0, pos = 0;
    while ((pos = manifest.find(".csv\"", pos)) != std::string::npos) {
        ++nfiles;
        pos += 5;
    }
    CHECK(nfiles == 10);
    // every indexed file exists
    CHECK(fs::exists(out / "samples_m1_A0_a1.csv"));
    CHECK(fs::exists(out / "samples_m4_A8_a1.csv"));
}

TEST_CASE("cli: DLAB_SEED env var overrides the configured seed", "[cli]") {
    fs::path dir = fs::temp_directory_path() / "dlab_cli_tests";
    fs::path cfg = write_config("seeded.toml",
                                "[experiment]\n"
                                "kind = \"dissipation-time\"\n"
                                "seed = 1\n"
                                "out = \"" + (dir / "out_seed").string() + "\"\n"
                                "[grid]\n"
                                "n = 32\n"
                                "[flow]\n"
                                "kind = \"cellular\"\n"
                                "m = 1\n"
                                "A = 4.0\n"
                                "[dissipation]\n"
                                "alpha = 1.0\n"
                                "gamma = 0.05\n"
                                "tol = 0.08\n");
    RunResult r = run_cli("run " + cfg.string());
    REQUIRE(r.code == 0);
    std::string m1 = slurp(dir / "out_seed" / "manifest.json");
    CHECK(m1.find("\"seed\": 1") != std::string::npos);

    std::string cmd = "DLAB_SEED=77 " + cli_path().string() + " run " + cfg.string() +
                      " --out " + (dir / "out_seed3").string() + " >/dev/null 2>&1";
    REQUIRE(std::system(cmd.c_str()) == 0);
    std::string m3 = slurp(dir / "out_seed3" / "manifest.json");
    CHECK(m3.find("\"seed\": 77") != std::string::npos);
    CHECK(m3.find("\"seed_overridden\": true") != std::string::npos);
}

TEST_CASE("cli: decay run writes a trajectory and plots deterministically", "[cli]") {
    fs::path dir = fs::temp_directory_path() / "dlab_cli_tests";
    fs::path cfg = write_config("decay.toml",
                                "[experiment]\n"
                                "kind = \"decay\"\n"
                                "out = \"" + (dir / "out_decay").string() + "\"\n"
                                "[grid]\n"
                                "n = 32\n"
                                "[flow]\n"
                                "kind = \"cellular\"\n"
                                "m = 1\n"
                                "A = 2.0\n"
                                "[initial]\n"
                                "kind = \"product\"\n"
                                "k1 = 1\n"
                                "k2 = 1\n"
                                "[evolve]\n"
                                "alpha = 1.0\n"
                                "gamma = 0.05\n"
                                "T = 0.5\n"
                                "cfl = 0.5\n");
    RunResult r = run_cli("run " + cfg.string());
    INFO(r.out);
    REQUIRE(r.code == 0);
    fs::path out = dir / "out_decay";
    std::string traj = slurp(out / "trajectory.csv");
    CHECK(traj.substr(0, traj.find("\r\n")) == "time,l2,hs_alpha,min,max");

    RunResult p1 = run_cli("plot " + (out / "trajectory.csv").string() + " --log-y");
    INFO(p1.out);
    REQUIRE(p1.code == 0);
    std::string svg1 = slurp(out / "trajectory.svg");
    CHECK(svg1.find("<svg") != std::string::npos);
    CHECK(svg1.find("dlab-config-hash:") != std::string::npos);

    // rerun the plot: byte-identical SVG
    RunResult p2 = run_cli("plot " + (out / "trajectory.csv").string() + " --log-y");
    REQUIRE(p2.code == 0);
    CHECK(slurp(out / "trajectory.svg") == svg1);

    SECTION("unknown report schema exits 1") {
        fs::path bogus = dir / "bogus.csv";
        std::ofstream(bogus) << "a,b\r\n1,2\r\n";
        RunResult pb = run_cli("plot " + bogus.string());
        CHECK(pb.code == 1);
        CHECK(pb.out.find("schema") != std::string::npos);
    }
}

TEST_CASE("cli: runtime failure exits 2 and the manifest marks the job", "[cli]") {
    fs::path dir = fs::temp_directory_path() / "dlab_cli_tests";
    // diffusivity without a flow is a validated-config, runtime-detected failure
    fs::path cfg = write_config("diff_bad.toml",
                                "[experiment]\n"
                                "kind = \"diffusivity\"\n"
                                "out = \"" + (dir / "out_dbad").string() + "\"\n"
                                "[grid]\n"
                                "n = 32\n"
                                "[flow]\n"
                                "kind = \"zero\"\n"
                                "[diffusivity]\n"
                                "paths = 100\n"
                                "T = 0.5\n"
                                "dt = 0.001\n");
    RunResult r = run_cli("run " + cfg.string());
    INFO(r.out);
    CHECK(r.code == 2);
    std::string m = slurp(dir / "out_dbad" / "manifest.json");
    CHECK(m.find("\"status\": \"failed\"") != std::string::npos);
}
