#define DOCTEST_CONFIG_IMPLEMENT
#include <doctest.h>

#include "jex/exchange.hpp"
#include "jex/quantities.hpp"
#include "jex/transmon.hpp"

#include <json.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <algorithm>
#include <sstream>
#include <string>

#include <sys/wait.h>
#include <unistd.h>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string g_exe;
fs::path g_dir;

int run(const std::string& args, const std::string& stdout_file = "out.txt") {
    const std::string cmd = "cd '" + g_dir.string() + "' && '" + g_exe + "' " + args + " > " +
                            stdout_file + " 2> err.txt";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

std::string slurp(const std::string& name) {
    std::ifstream in(g_dir / name);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void put(const std::string& name, const std::string& content) {
    std::ofstream out(g_dir / name);
    out << content;
}

const char* kPiNetlist =
    "! pi-capacitive test network\n"
    "C p1 0 8.02e-14\n"
    "C p2 0 8.02e-14\n"
    "C p1 p2 2e-16\n"
    "PORT 1 p1 0\n"
    "PORT 2 p2 0\n";

} // namespace

TEST_CASE("spectrum command") {
    SUBCASE("json schema") {
        REQUIRE(run("--json spectrum --ec '250 MHz' --ej '12.5 GHz'") == 0);
        const json doc = json::parse(slurp("out.txt"));
        REQUIRE(doc.contains("q01_GHz"));
        REQUIRE(doc.contains("alpha_MHz"));
        REQUIRE(doc.contains("n_matrix"));
        REQUIRE(doc.contains("converged"));
        CHECK(doc["q01_GHz"].get<double>() == doctest::Approx(4.75).epsilon(0.02));
        CHECK(doc["alpha_MHz"].get<double>() < 0.0);
        CHECK(doc["converged"].get<bool>());
        CHECK(fs::exists(g_dir / "spectrum_levels.csv"));
        CHECK(fs::exists(g_dir / "spectrum_nmatrix.csv"));
    }
    SUBCASE("text report") {
        REQUIRE(run("spectrum --ec '250 MHz' --ej '12.5 GHz'") == 0);
        const std::string text = slurp("out.txt");
        CHECK(text.find("q01_GHz") != std::string::npos);
        CHECK(text.find("4.7") != std::string::npos);
    }
    SUBCASE("missing required input is a usage error") {
        CHECK(run("spectrum --ej '12.5 GHz'") == 2);
        CHECK(run("spectrum") == 2);
        CHECK(run("nonsense-command") == 2);
    }
    SUBCASE("missing unit suffix is a usage error") {
        CHECK(run("spectrum --ec 250 --ej '12.5 GHz'") == 2);
    }
}

TEST_CASE("calibrate command") {
    REQUIRE(run("--json calibrate --ec '250 MHz' --f01 '4.75 GHz'") == 0);
    const json doc = json::parse(slurp("out.txt"));
    CHECK(doc["EJ_GHz"].get<double>() == doctest::Approx(12.5).epsilon(0.05));
}

TEST_CASE("jcap and fitcc commands") {
    REQUIRE(run("--json jcap --c1 '81.94 fF' --c2 '81.93 fF' --cc '0.216 fF' --f1 '4.52 GHz' "
                "--f2 '4.52 GHz'") == 0);
    const json jc = json::parse(slurp("out.txt"));
    CHECK(jc["J_MHz"].get<double>() == doctest::Approx(5.96).epsilon(0.01));

    REQUIRE(run("--json fitcc --j '5.77 MHz' --c1 '81.94 fF' --c2 '81.93 fF' --f1 '4.52 GHz' "
                "--f2 '4.52 GHz'") == 0);
    const json fc = json::parse(slurp("out.txt"));
    CHECK(fc["Cc_fF"].get<double>() == doctest::Approx(0.209).epsilon(0.01));
}

TEST_CASE("netlist-z and jrate pipeline") {
    put("pi.cir", kPiNetlist);
    REQUIRE(run("netlist-z --netlist pi.cir --fmin '3.5 GHz' --fmax '6.5 GHz' --points 201 "
                "--out pi.s2p") == 0);
    REQUIRE(fs::exists(g_dir / "pi.s2p"));

    SUBCASE("equal-frequency sweep against the closed form") {
        REQUIRE(run("--json jrate --touchstone pi.s2p --c1 '80.2 fF' --c2 '80.2 fF' "
                    "--mode equal --fmin '4 GHz' --fmax '6 GHz' --points 5") == 0);
        const json doc = json::parse(slurp("out.txt"));
        REQUIRE(doc["points"].size() == 5);
        const double cq = 8.02e-14, cc = 2e-16;
        const double delta = (cq + cc) * (cq + cc) - cc * cc;
        const double ec = jex::constants::e * jex::constants::e / (2.0 * 80.2e-15);
        for (const auto& p : doc["points"]) {
            REQUIRE(p.contains("J_MHz"));
            CHECK(std::abs(p["term1_MHz"].get<double>() - p["term2_MHz"].get<double>()) <
                  1e-6 * std::abs(p["J_MHz"].get<double>()));
            // Closed form for the pure-capacitive bridge, with n01 from the
            // same calibration the tool performs.
            const double q = jex::ghz_to_rad_s(p["q2_GHz"].get<double>());
            const jex::TransmonSpectrum s =
                jex::solve_spectrum({ec, jex::calibrate_ej(q, ec), 0.0, 30}, 4);
            const double n01 = s.charge_matrix(0, 1);
            const double expect = -4.0 * jex::constants::e * jex::constants::e * n01 * n01 * cc /
                                  delta / (jex::constants::h * 1e6);
            CHECK(std::abs(p["J_MHz"].get<double>() - expect) < 1e-4 * std::abs(expect));
        }
        CHECK(fs::exists(g_dir / "jrate_curve.csv"));
    }
    SUBCASE("byte-identical reruns") {
        REQUIRE(run("jrate --touchstone pi.s2p --c1 '80.2 fF' --c2 '80.2 fF' --mode equal "
                    "--fmin '4 GHz' --fmax '6 GHz' --points 3 --prefix detA") == 0);
        const std::string first = slurp("detA_curve.csv");
        REQUIRE(run("jrate --touchstone pi.s2p --c1 '80.2 fF' --c2 '80.2 fF' --mode equal "
                    "--fmin '4 GHz' --fmax '6 GHz' --points 3 --prefix detB") == 0);
        CHECK(first == slurp("detB_curve.csv"));
        CHECK(!first.empty());
    }
    SUBCASE("parallel jobs give identical bytes") {
        REQUIRE(run("--jobs 4 jrate --touchstone pi.s2p --c1 '80.2 fF' --c2 '80.2 fF' "
                    "--mode equal --fmin '4 GHz' --fmax '6 GHz' --points 7 --prefix par") == 0);
        REQUIRE(run("jrate --touchstone pi.s2p --c1 '80.2 fF' --c2 '80.2 fF' --mode equal "
                    "--fmin '4 GHz' --fmax '6 GHz' --points 7 --prefix ser") == 0);
        CHECK(slurp("par_curve.csv") == slurp("ser_curve.csv"));
    }
    SUBCASE("file not found") {
        CHECK(run("jrate --touchstone missing.s2p --c1 '80 fF' --c2 '80 fF' --mode equal "
                  "--fmin '4 GHz' --fmax '6 GHz' --points 3") == 2);
    }
    SUBCASE("sweep entirely outside the tabulated band is a computation failure") {
        REQUIRE(run("--json jrate --touchstone pi.s2p --c1 '80.2 fF' --c2 '80.2 fF' "
                    "--mode equal --fmin '20 GHz' --fmax '21 GHz' --points 2") == 1);
        const json doc = json::parse(slurp("out.txt"));
        for (const auto& p : doc["points"]) CHECK(p.contains("error"));
    }
}

TEST_CASE("fixed-frequency sweep shows the sign change across a resonator pole") {
    // Dead-end coupling caps into a 7.55 GHz tank.
    put("lc.cir",
        "C p1 m 4e-15\nC p2 m 4e-15\nC m 0 5e-13\nL m 0 8.8872e-10\n"
        "PORT 1 p1 0\nPORT 2 p2 0\n");
    REQUIRE(run("netlist-z --netlist lc.cir --fmin '4 GHz' --fmax '11 GHz' --points 1401 "
                "--out lc.s2p") == 0);
    REQUIRE(run("--json jrate --touchstone lc.s2p --c1 '85 fF' --c2 '85 fF' --mode fixed "
                "--fixed-f '5.82 GHz' --fmin '6.6 GHz' --fmax '8.6 GHz' --points 9") == 0);
    const json doc = json::parse(slurp("out.txt"));
    int sign_changes = 0;
    double prev = 0.0;
    for (const auto& p : doc["points"]) {
        REQUIRE(p.contains("J_MHz"));
        CHECK(p["q1_GHz"].get<double>() == doctest::Approx(5.82));
        const double j = p["J_MHz"].get<double>();
        if (prev != 0.0 && prev * j < 0.0) ++sign_changes;
        prev = j;
    }
    CHECK(sign_changes == 1);
}

TEST_CASE("zz command") {
    SUBCASE("all-J-zero single point") {
        REQUIRE(run("--json zz --q1 '5 GHz' --q2 '5.5 GHz' --alpha1 '300 MHz' --alpha2 '300 MHz' "
                    "--alphac '300 MHz' --j12 '0 MHz' --qc '7 GHz' --j1c '0 MHz' --j2c '0 MHz'") ==
                0);
        const json doc = json::parse(slurp("out.txt"));
        CHECK(doc["zz_kHz"].get<double>() == 0.0);
    }
    SUBCASE("sweep writes curve and crossing files") {
        std::ostringstream curve;
        curve << "q_c_GHz,J1c_MHz,J2c_MHz\n";
        for (int i = 0; i <= 10; ++i) curve << 6.5 + 0.1 * i << ",10,12\n";
        put("jcurve.csv", curve.str());
        REQUIRE(run("zz --q1 '5 GHz' --q2 '5.5 GHz' --alpha1 '300 MHz' --alpha2 '300 MHz' "
                    "--alphac '300 MHz' --j12 '10 MHz' --jcurve jcurve.csv") == 0);
        CHECK(fs::exists(g_dir / "zz_curve.csv"));
        CHECK(fs::exists(g_dir / "zz_crossings.csv"));
        CHECK(slurp("zz_curve.csv").substr(0, 29) == "q_c_GHz,zz_kHz,label_quality\n");
    }
    SUBCASE("malformed jcurve names the line") {
        put("bad.csv", "q_c_GHz,J1c_MHz,J2c_MHz\n3.0,1\n");
        CHECK(run("zz --q1 '5 GHz' --q2 '5.5 GHz' --alpha1 '300 MHz' --alpha2 '300 MHz' "
                  "--alphac '300 MHz' --j12 '10 MHz' --jcurve bad.csv") == 2);
        CHECK(slurp("err.txt").find("line 2") != std::string::npos);
    }
}

TEST_CASE("pv-check command") {
    // Inductive bridge resonant at 7.55 GHz; q at 80% of it.
    put("bridge.cir",
        "C p1 0 1e-13\nC p2 0 1e-13\nL p1 p2 8.887e-9\nPORT 1 p1 0\nPORT 2 p2 0\n");
    REQUIRE(run("--json pv-check --netlist bridge.cir --loss-q 1e4 --q '6.04 GHz'") == 0);
    const json doc = json::parse(slurp("out.txt"));
    CHECK(doc["applicable"].get<bool>());
    CHECK(doc["relative_gap"].get<double>() < 1e-2);
}

TEST_CASE("oracle selectors") {
    SUBCASE("unknown selector is a usage error") { CHECK(run("oracle bogus") == 2); }
    SUBCASE("pv selector runs only the identity check") {
        REQUIRE(run("--json oracle pv") == 0);
        const json doc = json::parse(slurp("out.txt"));
        REQUIRE(doc.size() == 1);
        CHECK(doc[0]["name"].get<std::string>() == "pv-identity");
        CHECK(doc[0]["passed"].get<bool>());
    }
    SUBCASE("full run on the shipped fixtures passes") {
        REQUIRE(run("oracle") == 0);
        const std::string text = slurp("out.txt");
        CHECK(text.find("[PASS] capacitive-equivalence") != std::string::npos);
        CHECK(text.find("[PASS] pv-identity") != std::string::npos);
        CHECK(text.find("[PASS] splitting-vs-modesum") != std::string::npos);
        CHECK(text.find("[PASS] foster-monotonicity") != std::string::npos);
        CHECK(text.find("[FAIL]") == std::string::npos);
    }
}

TEST_CASE("config file with flag overrides") {
    put("pi2.cir", kPiNetlist);
    REQUIRE(run("netlist-z --netlist pi2.cir --fmin '3.5 GHz' --fmax '6.5 GHz' --points 101 "
                "--out pi2.s2p") == 0);
    put("run.ini",
        "[jrate]\n"
        "touchstone = \"pi2.s2p\"\n"
        "c1 = \"80.2 fF\"\n"
        "c2 = \"80.2 fF\"\n"
        "mode = \"equal\"\n"
        "fmin = \"4 GHz\"\n"
        "fmax = \"6 GHz\"\n"
        "points = 3\n"
        "prefix = \"fromcfg\"\n");
    REQUIRE(run("--config run.ini jrate") == 0);
    CHECK(fs::exists(g_dir / "fromcfg_curve.csv"));
    // Command-line flags win over the config file.
    REQUIRE(run("--config run.ini jrate --prefix flagwins --points 4") == 0);
    CHECK(fs::exists(g_dir / "flagwins_curve.csv"));
    const std::string csv = slurp("flagwins_curve.csv");
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 5);  // header + 4 points
}

TEST_CASE("gnuplot script emission") {
    put("pi3.cir", kPiNetlist);
    REQUIRE(run("netlist-z --netlist pi3.cir --fmin '3.5 GHz' --fmax '6.5 GHz' --points 51 "
                "--out pi3.s2p") == 0);
    REQUIRE(run("--gnuplot jrate --touchstone pi3.s2p --c1 '80.2 fF' --c2 '80.2 fF' "
                "--mode equal --fmin '4 GHz' --fmax '6 GHz' --points 3 --prefix gp") == 0);
    CHECK(fs::exists(g_dir / "gp_curve.gp"));
    CHECK(slurp("gp_curve.gp").find("plot 'gp_curve.csv'") != std::string::npos);
}

int main(int argc, char** argv) {
    if (argc < 2) {
        std::fprintf(stderr, "usage: test_cli <path-to-jex-binary> [doctest args]\n");
        return 1;
    }
    g_exe = fs::absolute(argv[1]).string();
    g_dir = fs::temp_directory_path() / ("jex_cli_test_" + std::to_string(::getpid()));
    fs::create_directories(g_dir);

    doctest::Context context;
    context.applyCommandLine(argc - 1, argv + 1);
    const int rc = context.run();
    fs::remove_all(g_dir);
    return rc;
}
