#include <doctest.h>

#include <sys/wait.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const fs::path work = ANGULUS_CLI_WORK;

int run(const std::string& args, const std::string& env = "") {
    const std::string cmd = env + " " + std::string(ANGULUS_CLI) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path fresh(const std::string& name) {
    const fs::path p = work / name;
    fs::remove_all(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

json load(const fs::path& p) { return json::parse(slurp(p)); }

void write(const fs::path& p, const std::string& text) {
    fs::create_directories(p.parent_path());
    std::ofstream(p) << text;
}

} // namespace

TEST_CASE("usage errors") {
    CHECK(run("") == 2);
    CHECK(run("nonsense") == 2);
    CHECK(run("semigroup --out " + fresh("u").string()) == 2);
    CHECK(run("semigroup --alphas 0.5,0.6 --gammas -1 --out " + fresh("u").string()) == 2);
    CHECK(run("semigroup --alphas 0.5,0.5 --gammas -1") == 2);
    CHECK(run("semigroup --alphas 0.5,0.5 --gammas -1 --out " + fresh("u").string(), "ANGULUS_TOL=abc") == 2);
    CHECK(run("semigroup --alphas 0.5,0.5 --gammas -1 --out " + fresh("u").string(), "ANGULUS_TOL=0.5") == 2);
    CHECK(run("verify --alphas 0.5,0.5 --gammas -1 --weights 0.5,0.6 --out " + fresh("u").string()) == 2);
    CHECK(run("--help") == 0);
}

TEST_CASE("semigroup") {
    const auto out = fresh("semigroup");
    REQUIRE(run("semigroup --alphas 0.4,0.6 --gammas -1 --out " + out.string()) == 0);
    const auto cert = load(out / "certificate.json");
    CHECK(cert["certificate"]["residual"].get<double>() <= 1e-8);
    CHECK(cert["certificate"]["certified"].get<bool>());
    CHECK(cert["prevertices"]["repulsive"].size() == 2);
    CHECK(fs::exists(out / "domain.svg"));
    const std::string csv = slurp(out / "fixed_points.csv");
    CHECK(csv.find("denjoy_wolff") != std::string::npos);
    CHECK(csv.find("xi_2") != std::string::npos);

    const auto strip = fresh("strip");
    REQUIRE(run("semigroup --alphas 1 --t 0.5,1,2 --out " + strip.string()) == 0);
    const auto c1 = load(strip / "certificate.json");
    CHECK(c1["closed_form"]["pass"].get<bool>());
    CHECK(c1["closed_form"]["value"].get<double>() <= 1e-10);
    CHECK(fs::exists(strip / "closed_form.csv"));
}

TEST_CASE("verify") {
    const auto matched = fresh("verify_matched");
    CHECK(run("verify --alphas 0.4,0.6 --gammas -1 --out " + matched.string()) == 3);
    const auto rep = load(matched / "inequality_report.json");
    CHECK(rep["summary"]["fails"].get<int>() == 0);
    for (const auto& set : rep["sets"])
        for (const auto& r : set["reports"]) {
            CHECK(std::abs(r["slack"].get<double>()) <= 1e-12);
            CHECK(r["satisfied"].get<bool>());
        }
    CHECK(fs::exists(matched / "inequality_report.csv"));

    const auto mism = fresh("verify_mismatched");
    CHECK(run("verify --alphas 0.5,0.5 --gammas -1 --weights 0.3,0.7 --out " + mism.string()) == 3);
    int positive = 0;
    const auto mrep = load(mism / "inequality_report.json");
    for (const auto& set : mrep["sets"])
        for (const auto& r : set["reports"])
            if (r["report"] == "weights_1") {
                CHECK(r["verdict"] == "holds");
                CHECK(r["slack"].get<double>() == doctest::Approx(0.16 * M_PI).epsilon(1e-12));
                ++positive;
            }
    CHECK(positive == 2);

    const auto table = work / "tables" / "strict.json";
    write(table, R"({"denjoy_wolff": {"angle": 0, "multiplier": 0.5},
                     "repulsive": [{"angle": 2, "multiplier": 20, "error": 0.01},
                                   {"angle": 4, "log_multiplier": 3.0}]})");
    const auto strict = fresh("verify_table");
    CHECK(run("verify --multipliers " + table.string() + " --weights 0.5,0.5 --out " + strict.string()) == 0);
    CHECK(load(strict / "inequality_report.json")["summary"]["holds"].get<int>() == 3);

    const auto broken = work / "tables" / "broken.json";
    write(broken, R"({"denjoy_wolff": {"angle": 0, "multiplier": 1.5},
                      "repulsive": [{"angle": 2, "multiplier": 20}]})");
    CHECK(run("verify --multipliers " + broken.string() + " --out " + fresh("verify_broken").string()) == 2);

    // a repulsive multiplier just above 1 makes the unweighted form fail
    const auto violated = work / "tables" / "violated.json";
    write(violated, R"({"denjoy_wolff": {"angle": 0, "multiplier": 0.5},
                        "repulsive": [{"angle": 2, "multiplier": 1.1}]})");
    CHECK(run("verify --multipliers " + violated.string() + " --out " + fresh("verify_violated").string()) == 6);
}

TEST_CASE("qd") {
    const auto sym = fresh("qd_sym");
    REQUIRE(run("qd --alphas 0.5,0.5 --gammas -1 --out " + sym.string()) == 0);
    const auto q = load(sym / "qd.json");
    CHECK(std::abs(q["qd"]["betas"][0].get<double>() - M_PI) <= 1e-10);
    CHECK(q["all_checks_pass"].get<bool>());
    bool hausdorff_row = false;
    for (const auto& c : q["checks"])
        if (c["check"].get<std::string>().find("Hausdorff") != std::string::npos) {
            hausdorff_row = true;
            CHECK(c["value"].get<double>() <= 1e-3);
        }
    CHECK(hausdorff_row);
    CHECK(fs::file_size(sym / "trajectories.svg") > 1000);

    const auto one = fresh("qd_one");
    REQUIRE(run("qd --alphas 1 --out " + one.string()) == 0);
    bool closed_form_row = false;
    const auto q1 = load(one / "qd.json");
    for (const auto& c : q1["checks"])
        if (c["check"].get<std::string>().find("closed form") != std::string::npos) {
            closed_form_row = true;
            CHECK(c["pass"].get<bool>());
        }
    CHECK(closed_form_row);
}

TEST_CASE("moduli") {
    const auto out = fresh("moduli");
    REQUIRE(run("moduli --alphas 0.4,0.6 --gammas -1 --t 0.5 --out " + out.string()) == 0);
    const auto r = load(out / "moduli_report.json");
    CHECK(r["digons"].size() == 2);
    CHECK(r["checks"][0]["value"].get<double>() <= 1e-3);
    CHECK(r["checks"][1]["value"].get<double>() <= 1e-6);
    CHECK(r["overlaps"].get<int>() == 0);

    const auto single = fresh("moduli_single");
    REQUIRE(run("moduli --alphas 1 --out " + single.string()) == 0);
    const auto s = load(single / "moduli_report.json");
    REQUIRE(s["digons"].size() == 1);
    CHECK(s["digons"][0]["modulus_before"]["value"].get<double>() == doctest::Approx(2 / M_PI * std::log(2.0)).epsilon(1e-9));
}

TEST_CASE("scenario files, overrides and determinism") {
    const auto scen = work / "scenarios" / "run.json";
    write(scen, R"({"alphas": [0.2, 0.3, 0.5], "gammas": [-1, -0.5], "times": [0.5, 1],
                    "weights": [[0.2, 0.3, 0.5], [0.1, 0.1, 0.8]], "out": "unused"})");
    const auto a = fresh("det_a"), b = fresh("det_b");
    for (const auto& sub : {"semigroup", "verify", "qd", "moduli"}) {
        const int ca = run(std::string(sub) + " --scenario " + scen.string() + " --out " + a.string());
        const int cb = run(std::string(sub) + " --scenario " + scen.string() + " --out " + b.string());
        CHECK(ca == cb);
        CHECK(ca != 1);
    }
    for (const auto& name : {"certificate.json", "fixed_points.csv", "inequality_report.json", "inequality_report.csv",
                             "qd.json", "moduli_report.json", "trajectories.svg", "domain.svg"}) {
        INFO(name);
        REQUIRE(fs::exists(a / name));
        CHECK(slurp(a / name) == slurp(b / name));
    }
    const auto cert = load(a / "certificate.json");
    CHECK(cert["domain"]["alphas"].size() == 3);

    // flags override the file; the file's weights no longer fit two channels
    const auto o = fresh("override");
    CHECK(run("semigroup --scenario " + scen.string() + " --alphas 0.5,0.5 --gammas -2 --out " + o.string()) == 2);
    REQUIRE(run("semigroup --scenario " + scen.string() + " --alphas 0.5,0.5 --gammas -2 --weights 0.5,0.5 --out " +
                o.string()) == 0);
    const auto c2 = load(o / "certificate.json");
    CHECK(c2["domain"]["gammas"][0].get<double>() == -2.0);
    CHECK(c2["times"].size() == 2);
}

TEST_CASE("bundled scenarios") {
    const fs::path dir = ANGULUS_SCENARIOS;
    struct Run {
        const char* sub;
        const char* file;
        int code;
    };
    for (const auto& r : {Run{"semigroup", "strip.json", 0}, Run{"verify", "equality.json", 3},
                          Run{"verify", "strict.json", 3}, Run{"verify", "table.json", 0},
                          Run{"qd", "three_channels.json", 0}, Run{"moduli", "equality.json", 0}}) {
        INFO(r.sub << " " << r.file);
        CHECK(run(std::string(r.sub) + " --scenario " + (dir / r.file).string() + " --out " +
                  fresh(std::string("bundled_") + r.sub).string()) == r.code);
    }
}
