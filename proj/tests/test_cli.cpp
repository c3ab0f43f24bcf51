#include <catch_amalgamated.hpp>

#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct RunResult {
    int code = -1;
    std::string out;
    std::string err;
};

std::string slurp(const fs::path& p) {
    std::ifstream f(p);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

RunResult run_cli(const std::string& args) {
    static int counter = 0;
    const fs::path dir = fs::temp_directory_path();
    const fs::path so = dir / ("qbern_test_out_" + std::to_string(++counter) + ".txt");
    const fs::path se = dir / ("qbern_test_err_" + std::to_string(counter) + ".txt");
    const std::string cmd = std::string(QBERN_CLI_PATH) + " " + args + " >" +
                            so.string() + " 2>" + se.string();
    const int status = std::system(cmd.c_str());
    RunResult r;
    if (WIFEXITED(status))
        r.code = WEXITSTATUS(status);
    r.out = slurp(so);
    r.err = slurp(se);
    fs::remove(so);
    fs::remove(se);
    return r;
}

fs::path write_temp(const std::string& name, const std::string& content) {
    const fs::path p = fs::temp_directory_path() / name;
    std::ofstream f(p);
    f << content;
    return p;
}

std::vector<std::string> lines_of(const std::string& s) {
    std::vector<std::string> lines;
    std::stringstream ss(s);
    std::string line;
    while (std::getline(ss, line))
        if (!line.empty())
            lines.push_back(line);
    return lines;
}

} // namespace

TEST_CASE("weights: CSV table sums to one") {
    const RunResult r = run_cli("weights --q 0.5 --x 0.5");
    REQUIRE(r.code == 0);
    const auto lines = lines_of(r.out);
    REQUIRE(lines.size() >= 3);
    CHECK(lines.front() == "k,p_k,cumulative_sum");
    const std::string& last = lines.back();
    const double cum = std::stod(last.substr(last.rfind(',') + 1));
    CHECK_THAT(cum, Catch::Matchers::WithinAbs(1.0, 1e-10));
}

TEST_CASE("weights: degenerate point x = 0 in JSON form") {
    const RunResult r = run_cli("weights --q 0.5 --x 0 --format json");
    REQUIRE(r.code == 0);
    const json rep = json::parse(r.out);
    CHECK(rep["schema_version"] == 1);
    CHECK(rep["config"]["q"] == 0.5);
    CHECK(rep["result"]["computed_terms"] == 1);
    CHECK(rep["result"]["weights"][0] == 1.0);
    CHECK(rep["result"]["total"] == 1.0);
}

TEST_CASE("weights: parameter outside (0,1) is invalid input") {
    CHECK(run_cli("weights --q 1.5 --x 0.5").code == 2);
    CHECK(run_cli("weights --q 0.5 --x 1.5").code == 2);
    CHECK(run_cli("weights --x 0.5").code == 2); // missing --q
}

TEST_CASE("weights: exhausting the term budget exits with code 3") {
    const RunResult r = run_cli("weights --q 0.9 --x 0.99 --max-terms 10");
    CHECK(r.code == 3);
    CHECK(r.err.find("budget") != std::string::npos);
}

TEST_CASE("top-level parse errors are invalid input") {
    CHECK(run_cli("no-such-command").code == 2);
    CHECK(run_cli("").code == 2);
    CHECK(run_cli("--help").code == 0);
}

TEST_CASE("bq-apply: identity function returns the evaluation point") {
    const fs::path fn = write_temp("qbern_identity.csv", "0,0\n1,1\n");
    const RunResult r =
        run_cli("bq-apply --q 0.5 --x 0.37 --fn " + fn.string() + " --format json");
    REQUIRE(r.code == 0);
    const json rep = json::parse(r.out);
    CHECK_THAT(rep["result"]["value"].get<double>(),
               Catch::Matchers::WithinAbs(0.37, 1e-12));
    CHECK(rep["result"]["fn_breakpoints"] == 2);
    fs::remove(fn);
}

TEST_CASE("bq-apply: bad function files are invalid input") {
    const fs::path fn = write_temp("qbern_bad.csv", "0.2,0\n1,0\n");
    CHECK(run_cli("bq-apply --q 0.5 --x 0.3 --fn " + fn.string()).code == 2);
    CHECK(run_cli("bq-apply --q 0.5 --x 0.3 --fn /nonexistent/file.csv").code == 2);
    fs::remove(fn);
}

TEST_CASE("verify: every suite passes on its default sweep") {
    for (const std::string suite :
         {"fedja", "moments", "theta", "rho", "decay", "tail", "envelope"}) {
        const RunResult r = run_cli("verify " + suite);
        INFO("suite " << suite << ": " << r.out << r.err);
        REQUIRE(r.code == 0);
        const json rep = json::parse(r.out);
        CHECK(rep["result"]["pass"] == true);
        CHECK(rep["result"]["failure_count"] == 0);
        CHECK(rep["result"]["cases"].get<long>() > 0);
        CHECK(rep["config"]["suite"] == suite);
    }
}

TEST_CASE("verify: unknown suite is invalid input") {
    CHECK(run_cli("verify bogus").code == 2);
}

TEST_CASE("distance: commensurable pair brackets the exact value") {
    const RunResult r =
        run_cli("distance --q 0.5 --r 0.25 --N 40 --grid-depth 6 --per-octave 4");
    REQUIRE(r.code == 0);
    const json rep = json::parse(r.out);
    CHECK(rep["result"]["regime"] == "commensurable");
    CHECK(rep["result"]["relation"]["j"] == 1);
    CHECK(rep["result"]["relation"]["m"] == 2);
    CHECK(rep["result"]["closed_form"] == 1.0);
    const double lb = rep["result"]["lower_bound"].get<double>();
    CHECK(lb >= 0.95);
    CHECK(lb <= 2.0 + 1e-10);
    CHECK(rep["result"]["envelope_at_finest"].get<double>() <= 1.05);
}

TEST_CASE("distance: incommensurable pair approaches the universal value") {
    const RunResult r =
        run_cli("distance --q 0.5 --r 0.3 --N 30 --grid-depth 6 --per-octave 4");
    REQUIRE(r.code == 0);
    const json rep = json::parse(r.out);
    CHECK(rep["result"]["regime"] == "incommensurable");
    CHECK(rep["result"]["relation"].is_null());
    CHECK(rep["result"]["closed_form"].is_null());
    CHECK(rep["result"]["lower_bound"].get<double>() >= 1.5);
}

TEST_CASE("distance: identical parameters") {
    const RunResult r = run_cli("distance --q 0.4 --r 0.4");
    REQUIRE(r.code == 0);
    const json rep = json::parse(r.out);
    CHECK(rep["result"]["regime"] == "identical");
    CHECK(rep["result"]["lower_bound"] == 0.0);
}

TEST_CASE("quad-error: cubic on one panel, both methods give 1/12") {
    const RunResult r = run_cli("quad-error --f t3 --a 0 --b 1 --n 1 --m 3");
    REQUIRE(r.code == 0);
    const json rep = json::parse(r.out);
    CHECK_THAT(rep["result"]["direct"]["error"].get<double>(),
               Catch::Matchers::WithinAbs(1.0 / 12.0, 1e-12));
    CHECK_THAT(rep["result"]["peano"]["error"].get<double>(),
               Catch::Matchers::WithinAbs(1.0 / 12.0, 1e-12));
    CHECK(rep["result"]["method_agreement"].get<double>() <= 1e-12);
}

TEST_CASE("quad-error: semi-infinite domain with curvature weight") {
    const RunResult r =
        run_cli("quad-error --f neglog1mexp --a 0.1 --b inf --h 0.25 --m 2");
    REQUIRE(r.code == 0);
    const json rep = json::parse(r.out);
    CHECK_THAT(rep["result"]["peano"]["error"].get<double>(),
               Catch::Matchers::WithinRel(0.0202311185755, 1e-6));
    CHECK(run_cli("quad-error --f neglog1mexp --a 0.1 --b inf --h 0.25 --m 2 "
                  "--max-terms 10")
              .code == 3);
}

TEST_CASE("quad-error: unknown integrand is invalid input") {
    CHECK(run_cli("quad-error --f bogus --a 0 --b 1").code == 2);
}

TEST_CASE("moments: CSV of closed form vs integral") {
    const RunResult r = run_cli("moments --m 2 --h 1");
    REQUIRE(r.code == 0);
    const auto lines = lines_of(r.out);
    REQUIRE(lines.size() == 4); // header + j = 0,1,2
    CHECK(lines.front() == "j,closed_form,integral,abs_diff");
    std::stringstream row(lines[1]);
    std::string cell;
    std::getline(row, cell, ',');
    CHECK(cell == "0");
    std::getline(row, cell, ',');
    CHECK_THAT(std::stod(cell),
               Catch::Matchers::WithinRel(0.30685281944005469058, 1e-12));
    std::getline(row, cell, ',');
    std::getline(row, cell, ',');
    CHECK(std::stod(cell) <= 1e-10);
    CHECK(run_cli("moments --m 1").code == 2);
}

TEST_CASE("reports are deterministic and honour --out") {
    const std::string args = "distance --q 0.5 --r 0.25 --N 10 --grid-depth 4 --per-octave 2";
    const RunResult a = run_cli(args);
    const RunResult b = run_cli(args);
    REQUIRE(a.code == 0);
    CHECK(a.out == b.out);

    const fs::path outfile = fs::temp_directory_path() / "qbern_report.json";
    const RunResult c = run_cli(args + " --out " + outfile.string());
    REQUIRE(c.code == 0);
    CHECK(c.out.empty());
    CHECK(slurp(outfile) == a.out);
    fs::remove(outfile);
}
