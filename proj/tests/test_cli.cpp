#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>
#include <unistd.h>

#include "doctest.h"
#include "tsrt/neteval.hpp"
#include "tsrt/scenario.hpp"

using namespace tsrt;
namespace fs = std::filesystem;

namespace {

struct CliResult {
    int exit_code;
    std::string out;
    std::string err;
};

std::string slurp(const fs::path& p) {
    std::ifstream f(p);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

fs::path temp_dir() {
    static int counter = 0;
    fs::path dir = fs::temp_directory_path() / ("tsrt_cli_test_" + std::to_string(::getpid()) +
                                                "_" + std::to_string(counter++));
    fs::create_directories(dir);
    return dir;
}

CliResult run_cli(const std::string& args, const fs::path& dir) {
    fs::path out = dir / "stdout.txt";
    fs::path err = dir / "stderr.txt";
    std::string cmd = std::string(TSRT_CLI_PATH) + " " + args + " >" + out.string() + " 2>" +
                      err.string();
    int status = std::system(cmd.c_str());
    int code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return {code, slurp(out), slurp(err)};
}

fs::path write_config(const fs::path& dir, const std::string& name, const std::string& body) {
    fs::path p = dir / name;
    std::ofstream f(p);
    f << body;
    return p;
}

const char* kBaseConfig =
    "topology = linear:5\n"
    "edge_delay = 0.010\n"
    "seed = 42\n"
    "clock_offset_std = 0.005\n"
    "n_beacons = 1\n"
    "rounds = 1\n"
    "eps_max = 0.010\n"
    "ps_limit = 0.001\n"
    "sigma_o1 = 16.67e-6\n"
    "sigma_s1 = 1.58e-6\n"
    "tau_sync = 2.0\n";

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("scenario parsing round trip") {
    std::istringstream in(
        "# comment\n"
        "topology = linear:3   # trailing comment\n"
        "seed = 7\n"
        "loss_prob = 0.25\n"
        "correction = paper\n"
        "regression = off\n"
        "eps_max = 0.01\n");
    Scenario sc = Scenario::parse(in);
    CHECK(sc.topology == "linear:3");
    CHECK(sc.seed == 7);
    CHECK(sc.loss_prob == doctest::Approx(0.25));
    CHECK(sc.correction == CorrectionMode::PaperFormula);
    REQUIRE(sc.regression.has_value());
    CHECK_FALSE(*sc.regression);
    CHECK(sc.eps_max == doctest::Approx(0.01));
}

TEST_CASE("scenario errors name the offending key") {
    std::istringstream unknown("topologgy = linear:3\n");
    CHECK_THROWS_WITH_AS(Scenario::parse(unknown), doctest::Contains("topologgy"), ScenarioError);

    std::istringstream bad_number("loss_prob = lots\n");
    CHECK_THROWS_WITH_AS(Scenario::parse(bad_number), doctest::Contains("loss_prob"), ScenarioError);

    std::istringstream no_eq("topology linear:3\n");
    CHECK_THROWS_AS(Scenario::parse(no_eq), ScenarioError);

    Scenario sc;
    CHECK_THROWS_WITH_AS(sc.require_eval_params(), doctest::Contains("eps_max"), ScenarioError);
    sc.eps_max = 0.01;
    CHECK_THROWS_WITH_AS(sc.require_eval_params(), doctest::Contains("ps_limit"), ScenarioError);
    CHECK_THROWS_WITH_AS(sc.require_topology(), doctest::Contains("topology"), ScenarioError);
}

TEST_CASE("scenario builds graphs from both topology forms") {
    Scenario sc;
    sc.topology = "linear:4";
    CHECK(sc.make_graph().node_count() == 5);
    sc.topology = "ring:4";
    CHECK_THROWS_AS(sc.make_graph(), ScenarioError);
    sc.topology = "file:/nonexistent/graph.txt";
    CHECK_THROWS_AS(sc.make_graph(), ScenarioError);
}

TEST_CASE("cli tree prints BFS levels on the chain") {
    fs::path dir = temp_dir();
    fs::path cfg = write_config(dir, "t.conf", kBaseConfig);
    CliResult r = run_cli("tree " + cfg.string(), dir);
    CHECK(r.exit_code == 0);
    std::istringstream lines(r.out);
    int id, parent, level, receivers;
    int row = 0;
    while (lines >> id >> parent >> level >> receivers) {
        CHECK(id == row);
        CHECK(level == row);
        CHECK(parent == row - 1);
        CHECK(receivers == (row < 5 ? 1 : 0));
        ++row;
    }
    CHECK(row == 6);
}

TEST_CASE("cli run: zero noise is exact and deterministic") {
    fs::path dir = temp_dir();
    fs::path cfg = write_config(dir, "r.conf", kBaseConfig);
    fs::path out1 = dir / "report1.txt";
    fs::path out2 = dir / "report2.txt";
    CliResult r1 = run_cli("run " + cfg.string() + " --out " + out1.string(), dir);
    CHECK(r1.exit_code == 0);
    CliResult r2 = run_cli("run " + cfg.string() + " --out " + out2.string(), dir);
    CHECK(r2.exit_code == 0);
    std::string report = slurp(out1);
    CHECK(report == slurp(out2));

    std::istringstream lines(report);
    std::string line;
    int rows = 0;
    while (std::getline(lines, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        int id, level;
        double err;
        ls >> id >> level >> err;
        CHECK(err < 1e-9);
        ++rows;
    }
    CHECK(rows == 5);
}

TEST_CASE("cli run: different seeds give different reports under jitter") {
    fs::path dir = temp_dir();
    fs::path cfg = write_config(dir, "j.conf",
                                std::string(kBaseConfig) + "jitter_control = 0.0005\n");
    CliResult a = run_cli("run " + cfg.string() + " --seed 1", dir);
    std::string out_a = a.out;
    CliResult b = run_cli("run " + cfg.string() + " --seed 2", dir);
    CHECK(a.exit_code == 0);
    CHECK(b.exit_code == 0);
    CHECK(out_a != b.out);
}

TEST_CASE("cli run: total loss reports sync failure") {
    fs::path dir = temp_dir();
    fs::path cfg = write_config(dir, "l.conf", std::string(kBaseConfig) + "loss_prob = 1.0\n");
    CliResult r = run_cli("run " + cfg.string(), dir);
    CHECK(r.exit_code == 2);
}

TEST_CASE("cli run honors the --mode override") {
    fs::path dir = temp_dir();
    fs::path cfg = write_config(dir, "m.conf", kBaseConfig);
    CliResult corrected = run_cli("run " + cfg.string() + " --mode corrected", dir);
    std::string corrected_out = corrected.out;
    CliResult paper = run_cli("run " + cfg.string() + " --mode paper", dir);
    CHECK(corrected.exit_code == 0);
    CHECK(paper.exit_code == 0);
    CHECK(corrected_out != paper.out);  // the literal formula leaves its bias

    std::istringstream lines(paper.out);
    std::string line;
    bool saw_bias = false;
    while (std::getline(lines, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        int id, level;
        double err;
        ls >> id >> level >> err;
        if (err > 5e-3) saw_bias = true;  // at least the 10 ms delay term
    }
    CHECK(saw_bias);
}

TEST_CASE("cli sweep emits the CSV and validates its range") {
    fs::path dir = temp_dir();
    fs::path cfg = write_config(dir, "s.conf", kBaseConfig);
    fs::path csv = dir / "sweep.csv";
    CliResult r = run_cli("sweep " + cfg.string() + " --n-min 1 --n-max 30 --out " + csv.string(),
                          dir);
    CHECK(r.exit_code == 0);
    std::string text = slurp(csv);
    CHECK(text.rfind("N,M_tsrt,M_tpsn,tau_max_tsrt,tau_max_tpsn,mode\n", 0) == 0);
    CHECK(std::count(text.begin(), text.end(), '\n') == 31);

    CliResult bad = run_cli("sweep " + cfg.string() + " --n-min 5 --n-max 2", dir);
    CHECK(bad.exit_code == 1);
}

TEST_CASE("cli sweep writes the machine-readable copy when asked") {
    fs::path dir = temp_dir();
    fs::path json = dir / "sweep.json";
    fs::path cfg = write_config(dir, "sj.conf",
                                std::string(kBaseConfig) + "json_out = " + json.string() + "\n");
    CliResult r = run_cli("sweep " + cfg.string() + " --n-min 1 --n-max 3 --out " +
                              (dir / "sweep.csv").string(),
                          dir);
    CHECK(r.exit_code == 0);
    std::string text = slurp(json);
    CHECK(text.find("\"rows\"") != std::string::npos);
    CHECK(text.find("\"M_tsrt\"") != std::string::npos);
    CHECK(text.find("\"tau_max_tpsn\"") != std::string::npos);
}

TEST_CASE("cli run exports the event trace on request") {
    fs::path dir = temp_dir();
    fs::path trace = dir / "run.trace";
    fs::path cfg = write_config(dir, "tr.conf",
                                std::string(kBaseConfig) + "trace_out = " + trace.string() + "\n");
    CliResult r = run_cli("run " + cfg.string() + " --out " + (dir / "r.txt").string(), dir);
    CHECK(r.exit_code == 0);
    std::string text = slurp(trace);
    CHECK(text.find("send node=0 fd_pkt") != std::string::npos);
    CHECK(text.find("offset_bcast") != std::string::npos);
    // One event per line: time, event type, node, kind, payload.
    std::istringstream lines(text);
    std::string line;
    REQUIRE(std::getline(lines, line));
    double t;
    std::string type;
    std::istringstream first(line);
    CHECK((first >> t >> type));
    CHECK(type == "send");
}

TEST_CASE("cli accepts an edge-list topology file") {
    fs::path dir = temp_dir();
    fs::path graph = dir / "net.graph";
    {
        std::ofstream f(graph);
        f << "reference 0\n0 1 0.01\n1 2 0.01\n1 3 0.01\n";
    }
    fs::path cfg = write_config(dir, "f.conf",
                                "topology = file:" + graph.string() +
                                    "\nclock_offset_std = 0.002\n");
    CliResult r = run_cli("tree " + cfg.string(), dir);
    CHECK(r.exit_code == 0);
    CHECK(r.out ==
          "0 -1 0 1\n"
          "1 0 1 2\n"
          "2 1 2 0\n"
          "3 1 2 0\n");
}

TEST_CASE("cli evaluate matches the library composition") {
    fs::path dir = temp_dir();
    fs::path cfg = write_config(dir, "e.conf", std::string(kBaseConfig) + "n_beacons = 4\n");
    CliResult r = run_cli("evaluate " + cfg.string(), dir);
    CHECK(r.exit_code == 0);

    SyncParams p;
    p.branches = 5;
    p.tau = 1.0;
    p.n_beacons = 4;
    p.eps_max = 0.010;
    p.ps_limit = 0.001;
    p.tau_sync = 2.0;
    ErrorModel m;
    m.sigma_o1 = 16.67e-6;
    m.sigma_s1 = 1.58e-6;
    EvalReport want = evaluate(p, m);
    CHECK(r.out == want.to_text());
}

TEST_CASE("cli reports missing and malformed config as validation errors") {
    fs::path dir = temp_dir();
    fs::path missing = write_config(dir, "missing.conf", "topology = linear:5\n");
    CliResult r = run_cli("evaluate " + missing.string(), dir);
    CHECK(r.exit_code == 1);
    CHECK(r.err.find("eps_max") != std::string::npos);

    fs::path malformed = write_config(dir, "malformed.conf", "topology linear:5\n");
    CliResult r2 = run_cli("tree " + malformed.string(), dir);
    CHECK(r2.exit_code == 1);

    CliResult r3 = run_cli("tree /does/not/exist.conf", dir);
    CHECK(r3.exit_code == 1);
}

TEST_CASE("cli validation failures never write partial output files") {
    fs::path dir = temp_dir();
    fs::path bad = write_config(dir, "bad.conf",
                                std::string(kBaseConfig) + "ps_limit = 3.0\n");
    fs::path out = dir / "never.txt";
    CliResult r = run_cli("evaluate " + bad.string() + " --out " + out.string(), dir);
    CHECK(r.exit_code == 1);
    CHECK(r.err.find("ps_limit") != std::string::npos);
    CHECK_FALSE(fs::exists(out));
}

}  // TEST_SUITE
