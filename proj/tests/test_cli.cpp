#include <catch2/catch_amalgamated.hpp>

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

using json = nlohmann::json;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

struct RunResult {
    int code = -1;
    std::string out;
};

std::string slurp(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

// Spawns the installed CLI binary and captures stdout; stderr is discarded
// unless the scenario inspects it.
RunResult run_cli(const std::string& args) {
    static int counter = 0;
    const std::string outp =
        "/tmp/conflab_cli_t" + std::to_string(::getpid()) + "_" + std::to_string(counter++) + ".out";
    const std::string cmd = std::string(CONFLAB_CLI_PATH) + " " + args + " > " + outp + " 2> /dev/null";
    const int rc = std::system(cmd.c_str());
    RunResult r;
    r.code = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
    r.out = slurp(outp);
    std::remove(outp.c_str());
    return r;
}

json parse_doc(const RunResult& r) {
    INFO("stdout: " << r.out);
    return json::parse(r.out);
}

const json* find_check(const json& doc, const std::string& name) {
    for (const auto& c : doc.at("checks"))
        if (c.at("name") == name) return &c;
    return nullptr;
}

std::string strip_wall(const std::string& text) {
    std::istringstream in(text);
    std::ostringstream out;
    std::string line;
    while (std::getline(in, line))
        if (line.find("wall_ms") == std::string::npos) out << line << "\n";
    return out.str();
}

}  // namespace

TEST_CASE("umbilic boundary value through the bk subcommand", "[cli]") {
    const auto r = run_cli("bk --n 4 --k 2 --at 2I --h 1");
    REQUIRE(r.code == 0);
    const json doc = parse_doc(r);
    CHECK(doc.at("version") == "0.1.0");
    CHECK(doc.at("pass") == true);
    REQUIRE(doc.at("checks").size() == 1);
    CHECK(doc.at("checks")[0].at("value").get<double>() == 7.0);

    const auto h2 = run_cli("bk --n 4 --k 2 --at 2I --h 2");
    REQUIRE(h2.code == 0);
    CHECK(parse_doc(h2).at("checks")[0].at("value").get<double>() == 20.0);
}

TEST_CASE("usage errors exit with code 2", "[cli]") {
    CHECK(run_cli("bk --n 3 --k 2 --at 2I --h 1").code == 2);
    CHECK(run_cli("bk --n 4 --k 2").code == 2);
    CHECK(run_cli("bogus-subcommand").code == 2);
    CHECK(run_cli("").code == 2);
    CHECK(run_cli("sigma --a 1,2,3,4 --k 1").code == 2);
    CHECK(run_cli("sigma --a 2I --k 2").code == 2);
    CHECK(run_cli("cone --const 1 --b 1 --center 0,0,-1 --k 1").code == 2);
    CHECK(run_cli("--help").code == 0);
    CHECK(run_cli("bk --help").code == 0);
}

TEST_CASE("failed checks exit with code 1", "[cli]") {
    const auto r = run_cli("cone --const 1 --n 4 --k 1");
    REQUIRE(r.code == 1);
    const json doc = parse_doc(r);
    CHECK(doc.at("pass") == false);
}

TEST_CASE("sigma accepts matrix literals", "[cli]") {
    const auto shorthand = run_cli("sigma --a 2I --n 4 --k 2");
    REQUIRE(shorthand.code == 0);
    CHECK(parse_doc(shorthand).at("checks")[0].at("value").get<double>() == 24.0);

    const auto triangle = run_cli("sigma --a 2,0,0,2,0,2 --k 2");
    REQUIRE(triangle.code == 0);
    CHECK(parse_doc(triangle).at("checks")[0].at("value").get<double>() == 12.0);
}

TEST_CASE("schouten reports the model tensor", "[cli]") {
    const auto r = run_cli("schouten --b 0.25 --center 0,0,0,-1 --x 0.3,0,0,0.5 --k 2");
    REQUIRE(r.code == 0);
    const json doc = parse_doc(r);
    const json* a00 = find_check(doc, "A[0][0]");
    const json* a01 = find_check(doc, "A[0][1]");
    const json* s2 = find_check(doc, "sigma-2");
    REQUIRE(a00 != nullptr);
    REQUIRE(a01 != nullptr);
    REQUIRE(s2 != nullptr);
    CHECK_THAT(a00->at("value").get<double>(), WithinAbs(2.0, 1e-9));
    CHECK_THAT(a01->at("value").get<double>(), WithinAbs(0.0, 1e-9));
    CHECK_THAT(s2->at("value").get<double>(), WithinAbs(24.0, 1e-8));
}

TEST_CASE("model certification pipeline", "[cli]") {
    const auto r = run_cli("bubble-certify --k 2 --b 0.25 --center 0,0,0,-1");
    REQUIRE(r.code == 0);
    const json doc = parse_doc(r);
    CHECK(doc.at("pass") == true);
    const json* c0 = find_check(doc, "c0");
    REQUIRE(c0 != nullptr);
    CHECK(c0->at("informational") == true);
    CHECK_THAT(c0->at("value").get<double>(), WithinAbs(7.0, 1e-9));
    const json* serr = find_check(doc, "sigma-err");
    REQUIRE(serr != nullptr);
    CHECK(serr->at("informational") == false);
    CHECK(serr->at("pass") == true);
}

TEST_CASE("root solving and its failure mode", "[cli]") {
    const auto ok = run_cli("solve-h --mat 2I --n 4 --k 2 --c0 7");
    REQUIRE(ok.code == 0);
    CHECK_THAT(parse_doc(ok).at("checks")[0].at("value").get<double>(), WithinAbs(1.0, 1e-10));

    const auto fail = run_cli("solve-h --mode fixedm --mat 2.5I --n 4 --k 2 --c0 12");
    REQUIRE(fail.code == 3);
    const json doc = parse_doc(fail);
    CHECK(doc.at("pass") == false);
    REQUIRE(doc.contains("error"));
    CHECK(doc.at("error").at("kind") == "no-root");
    const std::string msg = doc.at("error").at("message");
    CHECK(msg.find("supremum") != std::string::npos);
    CHECK(msg.find("11.18") != std::string::npos);
}

TEST_CASE("family solve round-trips the boundary constant", "[cli]") {
    const auto r = run_cli("solve-family --n 4 --k 2 --c0 20");
    REQUIRE(r.code == 0);
    const json doc = parse_doc(r);
    const json* h = find_check(doc, "h");
    const json* rt = find_check(doc, "round-trip-c0");
    REQUIRE(h != nullptr);
    REQUIRE(rt != nullptr);
    CHECK_THAT(h->at("value").get<double>(), WithinAbs(2.0, 1e-9));
    CHECK(rt->at("pass") == true);
    CHECK_THAT(rt->at("value").get<double>(), WithinRel(20.0, 1e-8));
}

TEST_CASE("reconciliation rows are exact and informational", "[cli]") {
    const auto r = run_cli("constraint-report --n 4 --k 2 --h 1");
    REQUIRE(r.code == 0);
    const json doc = parse_doc(r);
    REQUIRE(doc.at("checks").size() == 5);
    for (const auto& c : doc.at("checks")) CHECK(c.at("informational") == true);
    CHECK(find_check(doc, "display-lhs")->at("value").get<double>() == 5.5);
    CHECK(find_check(doc, "direct-c0")->at("value").get<double>() == 7.0);
    CHECK(find_check(doc, "display-rhs")->at("value").get<double>() == 5.25);
    CHECK(find_check(doc, "alternative-lhs")->at("value").get<double>() == 7.0);
}

TEST_CASE("reports are deterministic up to wall time", "[cli]") {
    const auto a = run_cli("solve-family --n 4 --k 2 --c0 7 --seed 3");
    const auto b = run_cli("solve-family --n 4 --k 2 --c0 7 --seed 3");
    REQUIRE(a.code == 0);
    REQUIRE(b.code == 0);
    CHECK(strip_wall(a.out) == strip_wall(b.out));
}

TEST_CASE("grid emission writes a boundary-constant CSV", "[cli]") {
    const std::string csv = "/tmp/conflab_cli_grid_" + std::to_string(::getpid()) + ".csv";
    const auto r = run_cli("emit-grid --b 0.25 --center 0,0,0,-1 --quantity bk-boundary --k 2 "
                           "--axes 1,2 --min -1,-1 --max 1,1 --count 11,11 --out " + csv);
    REQUIRE(r.code == 0);
    const json doc = parse_doc(r);
    CHECK(find_check(doc, "grid-rows")->at("value").get<double>() == 121.0);

    std::ifstream f(csv);
    REQUIRE(f.good());
    std::string line;
    REQUIRE(std::getline(f, line));
    CHECK(line == "x1,x2,x3,x4,value");
    int rows = 0;
    double vmin = 1e300, vmax = -1e300;
    while (std::getline(f, line)) {
        ++rows;
        const double v = std::stod(line.substr(line.rfind(',') + 1));
        vmin = std::min(vmin, v);
        vmax = std::max(vmax, v);
    }
    CHECK(rows == 121);
    CHECK(vmax - vmin <= 1e-9);
    std::remove(csv.c_str());

    const auto large = run_cli("emit-grid --b 0.25 --center 0,0,0,-1 --quantity u "
                               "--axes 1,2 --min -2,-2 --max 2,2 --count 101,101 --out " + csv);
    REQUIRE(large.code == 0);
    CHECK(find_check(parse_doc(large), "grid-rows")->at("value").get<double>() == 10201.0);
    {
        std::ifstream lf(csv);
        int lines = 0;
        std::string ln;
        while (std::getline(lf, ln)) ++lines;
        CHECK(lines == 10202);
    }
    std::remove(csv.c_str());

    const auto interior = run_cli("emit-grid --b 1 --center 0,0,0,-1 --quantity sigma-k --k 2 "
                                  "--axes 1,3 --min -1,-1 --max 1,1 --count 5,5 "
                                  "--base 0,0.2,0,0.7 --out " + csv);
    REQUIRE(interior.code == 0);
    {
        std::ifstream lf(csv);
        std::string ln;
        std::getline(lf, ln);
        while (std::getline(lf, ln)) {
            const double v = std::stod(ln.substr(ln.rfind(',') + 1));
            CHECK_THAT(v, WithinAbs(24.0, 1e-8));
        }
    }
    std::remove(csv.c_str());

    const auto off_axis = run_cli("emit-grid --b 0.25 --center 0,0,0,-1 --quantity bk-boundary "
                                  "--k 2 --axes 1,4 --min -1,-1 --max 1,1 --count 3,3 --out " + csv);
    CHECK(off_axis.code == 2);

    const auto unwritable = run_cli("emit-grid --b 0.25 --center 0,0,0,-1 --quantity u "
                                    "--axes 1,2 --min -1,-1 --max 1,1 --count 3,3 "
                                    "--out /nonexistent/dir/g.csv");
    CHECK(unwritable.code == 3);
}

TEST_CASE("unwritable report path yields an io error document", "[cli]") {
    const auto r = run_cli("constraint-report --n 4 --k 2 --h 1 --out /nonexistent/dir/x.json");
    REQUIRE(r.code == 3);
    const json doc = parse_doc(r);
    CHECK(doc.at("error").at("kind") == "io");
}

TEST_CASE("moving-spheres radius matches the closed form", "[cli]") {
    const auto r = run_cli("lambda-bar --b 1 --center 0,0,0,-1 --x 0,0,0,0");
    REQUIRE(r.code == 0);
    const json doc = parse_doc(r);
    const json* lb = find_check(doc, "lambda-bar");
    REQUIRE(lb != nullptr);
    CHECK_THAT(lb->at("value").get<double>(), WithinAbs(std::sqrt(2.0), 1e-3));
}

TEST_CASE("ball transplant report through the CLI", "[cli]") {
    const auto r = run_cli("ball-check --k 2 --b 0.25 --center 0,0,0,-1 --d 0.5 --samples 60");
    REQUIRE(r.code == 0);
    const json doc = parse_doc(r);
    CHECK(doc.at("pass") == true);
    for (const char* name : {"ball-sigma", "ball-boundary-constancy", "ball-profile-fit"}) {
        const json* row = find_check(doc, name);
        REQUIRE(row != nullptr);
        CHECK(row->at("pass") == true);
    }
}

TEST_CASE("acceptance suite runs green end to end", "[cli]") {
    const auto r = run_cli("suite --seed 0");
    REQUIRE(r.code == 0);
    const json doc = parse_doc(r);
    REQUIRE(doc.at("checks").size() == 10);
    for (const auto& c : doc.at("checks")) {
        INFO(c.at("name").get<std::string>());
        CHECK(c.at("pass") == true);
    }
}
