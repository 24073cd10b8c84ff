// angulus: scenario runner for slit-strip semigroups.
//
//   angulus semigroup|verify|qd|moduli [--scenario file.json] [overrides] --out DIR
//
// Exit codes: 0 ok, 1 build or I/O failure, 2 usage or validation error,
// 3 some inequality report is indeterminate, 4 quadratic differential
// failure, 5 reduced modulus failure, 6 some inequality fails within error.

#include <CLI11.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>

#include "angulus/angular.hpp"
#include "angulus/error.hpp"
#include "angulus/io.hpp"
#include "angulus/koenigs.hpp"
#include "angulus/moduli.hpp"
#include "angulus/quaddiff.hpp"

namespace fs = std::filesystem;
using namespace angulus;
using io::Json;
using numerics::pi;
using Complex = std::complex<double>;
using geometry::BoundaryPoint;

namespace {

enum Exit { ok = 0, build_failure = 1, usage = 2, indeterminate = 3, qd_failure = 4, modulus_failure = 5, violated = 6 };

// A failure with its exit code; caught in main.
struct Failure {
    int code;
    std::string message;
};

struct Flags {
    std::string scenario;
    std::vector<double> alphas, gammas, times;
    std::vector<std::string> weights;
    std::string multipliers;
    double tolerance = 0.0;
    std::string out;
    CLI::Option* alphas_opt = nullptr;
    CLI::Option* gammas_opt = nullptr;
    CLI::Option* times_opt = nullptr;
    CLI::Option* tolerance_opt = nullptr;
};

void add_common(CLI::App* cmd, Flags& f, bool with_multipliers) {
    cmd->add_option("--scenario", f.scenario, "scenario JSON file")->check(CLI::ExistingFile);
    f.alphas_opt = cmd->add_option("--alphas", f.alphas, "channel widths, comma separated")->delimiter(',');
    f.gammas_opt = cmd->add_option("--gammas", f.gammas, "slit tip abscissas, comma separated")->delimiter(',');
    f.times_opt = cmd->add_option("--t,--times", f.times, "semigroup times, comma separated")->delimiter(',');
    cmd->add_option("--weights", f.weights, "weight vector, comma separated (repeatable)");
    if (with_multipliers)
        cmd->add_option("--multipliers", f.multipliers, "multiplier table JSON")->check(CLI::ExistingFile);
    f.tolerance_opt = cmd->add_option("--tolerance", f.tolerance, "map build tolerance");
    cmd->add_option("--out", f.out, "output directory");
}

std::vector<double> parse_list(const std::string& s) {
    std::vector<double> out;
    std::size_t pos = 0;
    while (pos <= s.size()) {
        const auto next = std::min(s.find(',', pos), s.size());
        const std::string item = s.substr(pos, next - pos);
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(item, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != item.size())
            throw DomainError("cannot read '" + s + "' as a list of numbers");
        out.push_back(v);
        pos = next + 1;
    }
    return out;
}

// default < ANGULUS_TOL < scenario file < flags
io::Scenario resolve(const Flags& f, bool need_domain) {
    io::Scenario s;
    if (const char* env = std::getenv("ANGULUS_TOL")) {
        char* end = nullptr;
        const double tol = std::strtod(env, &end);
        if (end == env || *end != '\0')
            throw DomainError(std::string("ANGULUS_TOL is not a number: ") + env);
        s.tolerance = tol;
    }
    if (!f.scenario.empty()) {
        const double env_tol = s.tolerance;
        std::ifstream probe(f.scenario);
        Json j;
        try {
            j = Json::parse(probe);
        } catch (const Json::parse_error& e) {
            throw DomainError(std::string("scenario: ") + e.what());
        }
        s = io::scenario_from_json(j, fs::path(f.scenario).parent_path());
        if (!j.contains("tolerance"))
            s.tolerance = env_tol;
    }
    if (f.alphas_opt->count())
        s.alphas = f.alphas;
    if (f.gammas_opt->count())
        s.gammas = f.gammas;
    if (f.times_opt->count())
        s.times = f.times;
    if (!f.weights.empty()) {
        s.weights.clear();
        for (const auto& w : f.weights)
            s.weights.push_back(parse_list(w));
    }
    if (!f.multipliers.empty()) {
        std::ifstream in(f.multipliers);
        try {
            s.multipliers = Json::parse(in);
        } catch (const Json::parse_error& e) {
            throw DomainError(std::string("multipliers: ") + e.what());
        }
    }
    if (f.tolerance_opt->count())
        s.tolerance = f.tolerance;
    if (!f.out.empty())
        s.out = f.out;
    if (s.out.empty())
        throw DomainError("an output directory is required (--out or \"out\" in the scenario)");
    s.validate(need_domain);
    return s;
}

fs::path prepare_out(const io::Scenario& s) {
    std::error_code ec;
    fs::create_directories(s.out, ec);
    if (ec)
        throw Failure{build_failure, "cannot create " + s.out + ": " + ec.message()};
    return fs::path(s.out);
}

std::shared_ptr<const koenigs::KoenigsMap> build(const io::Scenario& s) {
    koenigs::BuildOptions opt;
    opt.tolerance = s.tolerance;
    try {
        return std::make_shared<const koenigs::KoenigsMap>(koenigs::build_koenigs_map(s.domain(), opt));
    } catch (const Error& e) {
        throw Failure{build_failure, std::string("map build failed: ") + e.what()};
    }
}

Json check_row(const std::string& name, double value, double threshold, bool upper = true) {
    return Json{{"check", name},
                {"value", value},
                {"threshold", threshold},
                {"pass", upper ? value <= threshold : value >= threshold}};
}

std::string join(const std::vector<double>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i)
        out += (i ? ";" : "") + io::format_double(v[i]);
    return out;
}

// ---------------------------------------------------------------------------

int cmd_semigroup(const io::Scenario& s) {
    const auto map = build(s);
    const fs::path out = prepare_out(s);
    Json cert = io::certificate_json(*map);
    const double threshold = 1e-8;
    cert["certificate"]["threshold"] = threshold;
    cert["certificate"]["certified"] = map->certificate().residual() <= threshold;

    if (map->domain().channels() == 1) {
        // (1/pi) log((1+z)/(1-z)) up to the rotation taking a to 1
        const Complex rot = map->denjoy_wolff().value();
        io::CsvTable table({"re_z", "im_z", "re_h", "im_h", "re_closed_form", "im_closed_form", "abs_diff"});
        double worst = 0.0;
        for (int j = 0; j < 20; ++j) {
            const Complex z = std::polar(0.05 + 0.9 * j / 19.0, 2 * pi * (0.37 * j + 0.11));
            const Complex u = z / rot;
            const Complex exact = std::log((1.0 + u) / (1.0 - u)) / pi;
            const Complex h = map->eval(z);
            worst = std::max(worst, std::abs(h - exact));
            table.add_row({io::format_double(z.real()), io::format_double(z.imag()), io::format_double(h.real()),
                           io::format_double(h.imag()), io::format_double(exact.real()),
                           io::format_double(exact.imag()), io::format_double(std::abs(h - exact))});
        }
        io::write_text(out / "closed_form.csv", table.str());
        cert["closed_form"] = check_row("max |h - (1/pi) log((1+z)/(1-z))| on 20 points", worst, 1e-10);
    }
    cert["times"] = s.times;
    io::write_json(out / "certificate.json", cert);

    io::CsvTable fp({"t", "point", "angle", "kind", "exact_log_multiplier", "estimated_log_multiplier",
                     "estimated_log_error", "relative_deviation", "status"});
    const auto fixed = koenigs::locate_fixed_points(*map);
    for (double t : s.times) {
        const koenigs::SemigroupElement phi(map, t);
        const auto exact = koenigs::exact_log_multipliers(map->domain(), t);
        auto row = [&](const std::string& name, const BoundaryPoint& p, double exact_log) {
            std::vector<std::string> cells{io::format_double(t), name, io::format_double(p.angle())};
            try {
                const auto e = angular::estimate_angular_derivative_adaptive(phi, p, koenigs::semigroup_estimate_options());
                const double lm = std::log(e.multiplier);
                cells.push_back(angular::to_string(e.kind));
                cells.push_back(io::format_double(exact_log));
                cells.push_back(io::format_double(lm));
                cells.push_back(io::format_double(e.error / e.multiplier));
                cells.push_back(io::format_double(std::expm1(lm - exact_log)));
                cells.push_back(e.converged && !e.infinite ? "ok" : "not converged");
            } catch (const Error& e) {
                cells.insert(cells.end(), {"", io::format_double(exact_log), "", "", "", "unavailable"});
            }
            fp.add_row(cells);
        };
        row("denjoy_wolff", fixed.denjoy_wolff, exact.denjoy_wolff);
        for (std::size_t k = 0; k < fixed.repulsive.size(); ++k)
            row("xi_" + std::to_string(k + 1), fixed.repulsive[k], exact.repulsive[k]);
    }
    io::write_text(out / "fixed_points.csv", fp.str());
    io::write_text(out / "domain.svg", io::domain_svg(*map));

    std::cout << "certificate residual " << io::format_double(map->certificate().residual()) << "\n";
    return ok;
}

// ---------------------------------------------------------------------------

int cmd_verify(const io::Scenario& s) {
    struct Source {
        std::string label;
        std::optional<double> t;
        inequality::MultiplierData data;
    };
    std::vector<Source> sources;
    std::vector<Json> unavailable;
    std::shared_ptr<const koenigs::KoenigsMap> map;
    if (s.multipliers) {
        sources.push_back({"supplied", std::nullopt, io::multipliers_from_json(*s.multipliers)});
    } else {
        map = build(s);
        for (double t : s.times) {
            sources.push_back({"exact", t, koenigs::exact_multipliers(*map, t)});
            try {
                sources.push_back({"estimated", t, koenigs::estimated_multipliers(map, t)});
            } catch (const Error& e) {
                unavailable.push_back(Json{{"source", "estimated"}, {"t", t}, {"reason", e.what()}});
            }
        }
    }
    std::vector<std::pair<std::string, std::vector<double>>> weight_lists;
    if (map)
        weight_lists.push_back({"matched", map->domain().alphas()});
    for (std::size_t i = 0; i < s.weights.size(); ++i)
        weight_lists.push_back({"weights_" + std::to_string(i + 1), s.weights[i]});
    const fs::path out = prepare_out(s);

    io::CsvTable csv({"source", "t", "report", "theorem", "weights", "left", "right", "slack", "error", "verdict"});
    Json sets = Json::array();
    int holds = 0, fails = 0, undecided = 0;
    for (const auto& src : sources) {
        const std::string t_cell = src.t ? io::format_double(*src.t) : "";
        Json reports = Json::array();
        auto record = [&](const std::string& name, const inequality::InequalityReport& r) {
            Json j = io::to_json(r);
            j["report"] = name;
            reports.push_back(j);
            csv.add_row({src.label, t_cell, name, r.theorem, join(r.weights), io::format_double(r.left),
                         io::format_double(r.right), io::format_double(r.slack), io::format_double(r.error),
                         inequality::to_string(r.verdict)});
            switch (r.verdict) {
            case inequality::Verdict::holds: ++holds; break;
            case inequality::Verdict::fails: ++fails; break;
            case inequality::Verdict::indeterminate: ++undecided; break;
            }
        };
        record("unweighted", inequality::verify_unweighted(src.data));
        for (const auto& [name, w] : weight_lists) {
            if (w.size() != src.data.size())
                throw DomainError(name + " has " + std::to_string(w.size()) + " entries for " +
                                  std::to_string(src.data.size()) + " repulsive points");
            record(name, inequality::verify_weighted(src.data, inequality::WeightVector(w)));
        }
        const auto rec = inequality::recover_unweighted(src.data);
        const auto opt = inequality::optimal_weights(src.data);
        record("optimal", rec.weighted);
        Json set{{"source", src.label}};
        if (src.t)
            set["t"] = *src.t;
        set["multipliers"] = io::to_json(src.data);
        set["reports"] = reports;
        set["optimal"] = Json{{"weights", opt.weights.values()},
                              {"minimal_value", opt.minimal_value},
                              {"numerical_gap", opt.numerical_gap},
                              {"consistency_residual", rec.consistency_residual},
                              {"signs_agree", rec.signs_agree}};
        sets.push_back(set);
    }
    const int code = fails ? violated : undecided ? indeterminate : ok;
    Json report{{"scenario", io::to_json(s)},
                {"sets", sets},
                {"unavailable", unavailable},
                {"summary", {{"holds", holds}, {"fails", fails}, {"indeterminate", undecided}}},
                {"exit_code", code}};
    io::write_json(out / "inequality_report.json", report);
    io::write_text(out / "inequality_report.csv", csv.str());
    std::cout << "holds " << holds << ", fails " << fails << ", indeterminate " << undecided << "\n";
    return code;
}

// ---------------------------------------------------------------------------

int cmd_qd(const io::Scenario& s) {
    const auto map = build(s);
    const auto& alphas = map->domain().alphas();
    quaddiff::StarQuadDiff qd;
    try {
        qd = quaddiff::solve_parameters(map->denjoy_wolff(), map->repulsive(), alphas);
    } catch (const Error& e) {
        throw Failure{qd_failure, std::string("quadratic differential solve failed: ") + e.what()};
    }
    const fs::path out = prepare_out(s);
    const double t = s.times.front();
    Json checks = Json::array();

    checks.push_back(check_row("circle trajectory residual", quaddiff::circle_trajectory_residual(qd), 1e-10));
    const auto residue = quaddiff::residue_heights(qd);
    std::vector<double> traced;
    try {
        traced = quaddiff::heights(qd);
    } catch (const ConvergenceError& e) {
        throw Failure{qd_failure, std::string("height trace failed: ") + e.what()};
    }
    double residue_gap = 0.0, traced_gap = 0.0;
    for (std::size_t k = 0; k < alphas.size(); ++k) {
        residue_gap = std::max(residue_gap, std::abs(residue[k] - alphas[k]));
        traced_gap = std::max(traced_gap, std::abs(traced[k] - alphas[k]));
    }
    checks.push_back(check_row("max |residue height - alpha|", residue_gap, 1e-8));
    checks.push_back(check_row("max |traced height - alpha|", traced_gap, 1e-8));

    const auto betas = qd.betas();
    if (alphas.size() == 2 && map->domain().conjugation_symmetric())
        checks.push_back(check_row("|beta_1 - pi| (symmetric domain)", std::abs(betas[0] - pi), 1e-10));
    if (alphas.size() == 1) {
        // strip oracle: Q = ((2/pi) / (1 - u^2))^2 (dz)^2 with u = z / a
        const Complex rot = qd.a.value();
        double worst = 0.0;
        for (int j = 0; j < 20; ++j) {
            const Complex z = std::polar(0.05 + 0.9 * j / 19.0, 2 * pi * (0.37 * j + 0.11));
            const Complex u = z / rot;
            const Complex hp = 2.0 / (pi * (1.0 - u * u)) / rot;
            worst = std::max(worst, std::abs(quaddiff::eval_Q(qd, z) - hp * hp) / std::abs(hp * hp));
        }
        checks.push_back(check_row("n=1 closed form: max relative |Q - h'^2|", worst, 1e-10));
    }
    const koenigs::SemigroupElement phi(map, t);
    const auto ode = quaddiff::extremal_ode_residual(qd, phi);
    checks.push_back(check_row("extremal ODE residual against phi_t", ode.max_residual, 1e-4));

    // forward orbit of a point in the first channel against its trajectory
    const Complex z0 = map->inverse(Complex(0.0, 0.5 * (map->domain().level(0) + map->domain().level(1))));
    std::vector<Complex> orbit;
    for (int i = 0; i <= 2000; ++i)
        orbit.push_back(koenigs::SemigroupElement(map, 0.001 * i)(z0));
    checks.push_back(
        check_row("orbit vs trajectory Hausdorff distance", quaddiff::orbit_trajectory_distance(qd, orbit, 2.0), 1e-3));

    const auto arcs = quaddiff::slit_arcs(qd, 6.0);
    std::vector<std::vector<quaddiff::Trajectory>> families(qd.size());
    for (std::size_t k = 0; k < qd.size(); ++k) {
        for (double r : {0.02, 0.05, 0.1, 0.2, 0.35, 0.5}) {
            const Complex seed = qd.xi[k].value() * (1.0 - r);
            for (auto type : {quaddiff::TrajectoryType::trajectory, quaddiff::TrajectoryType::orthogonal})
                for (int dir : {1, -1}) {
                    quaddiff::TraceOptions opt;
                    opt.direction = dir;
                    opt.max_step = 0.02;
                    try {
                        families[k].push_back(quaddiff::trace_trajectory(qd, seed, type, 6.0, opt));
                    } catch (const DomainError&) {
                        // seed on a critical point; nothing to draw
                    }
                }
        }
    }
    Json arc_rows = Json::array();
    for (std::size_t j = 0; j < arcs.size(); ++j)
        arc_rows.push_back(Json{{"zero", j + 1},
                                {"beta", betas[j]},
                                {"points", arcs[j].points.size()},
                                {"length", arcs[j].lengths.back()},
                                {"termination", quaddiff::to_string(arcs[j].termination)}});

    bool all_pass = true;
    for (const auto& c : checks)
        all_pass = all_pass && c["pass"].get<bool>();
    Json report{{"scenario", io::to_json(s)},
                {"t", t},
                {"qd", io::to_json(qd)},
                {"heights", {{"target", alphas}, {"residue", residue}, {"traced", traced}}},
                {"checks", checks},
                {"ode_residual",
                 {{"max", ode.max_residual},
                  {"worst_point", {ode.worst_point.real(), ode.worst_point.imag()}},
                  {"evaluated", ode.evaluated},
                  {"skipped", ode.skipped}}},
                {"slit_arcs", arc_rows},
                {"all_checks_pass", all_pass}};
    io::write_json(out / "qd.json", report);
    io::write_text(out / "trajectories.svg", io::trajectories_svg(qd, arcs, families));
    std::cout << "betas " << join(betas) << (all_pass ? ", all checks pass" : ", some checks fail") << "\n";
    return all_pass ? ok : qd_failure;
}

// ---------------------------------------------------------------------------

int cmd_moduli(const io::Scenario& s) {
    const auto map = build(s);
    const auto& alphas = map->domain().alphas();
    const double t = s.times.front();
    const fs::path out = prepare_out(s);
    Json report{{"scenario", io::to_json(s)}, {"t", t}};
    Json checks = Json::array();
    try {
        auto before = moduli::extremal_star_system(map, alphas, 0.0);
        auto after = moduli::extremal_star_system(map, alphas, t);
        moduli::compute_moduli(before);
        moduli::compute_moduli(after);

        Json digons = Json::array();
        for (std::size_t k = 0; k < alphas.size(); ++k) {
            const auto at_a = moduli::vertex_angle(before.digons[k], true);
            const auto at_xi = moduli::vertex_angle(before.digons[k], false);
            digons.push_back(Json{{"k", k + 1},
                                  {"alpha", alphas[k]},
                                  {"xi", before.endpoints[k].angle()},
                                  {"angle_at_a", {{"measured", at_a.value}, {"error", at_a.error},
                                                  {"compatible", before.compatible_angle_at_center(k)}}},
                                  {"angle_at_xi", {{"measured", at_xi.value}, {"error", at_xi.error},
                                                   {"compatible", before.compatible_angle_at_endpoint(k)}}},
                                  {"modulus_before", io::to_json(*before.moduli[k])},
                                  {"modulus_after", io::to_json(*after.moduli[k])}});
        }
        const double sum_before = moduli::weighted_modulus_sum(before);
        const double sum_after = moduli::weighted_modulus_sum(after);
        const auto logs = koenigs::exact_log_multipliers(map->domain(), t);
        double predicted = logs.denjoy_wolff;
        for (std::size_t k = 0; k < alphas.size(); ++k)
            predicted += alphas[k] * alphas[k] * logs.repulsive[k];
        predicted /= pi;
        report["digons"] = digons;
        report["weighted_sum"] = Json{{"before", sum_before},
                                      {"after", sum_after},
                                      {"difference", sum_after - sum_before},
                                      {"predicted", predicted}};
        report["overlaps"] = moduli::sampled_overlaps(before);
        checks.push_back(check_row("identity residual |difference - predicted|",
                                   std::abs(sum_after - sum_before - predicted), 1e-3));

        // covariance on the unit disk digon
        const auto disk = moduli::Digon::unit_disk();
        const auto T = geometry::MobiusMap::disk_automorphism(0.7, Complex(0.3, 0.2));
        const double m0 = moduli::reduced_modulus(disk).value;
        const double mt = moduli::reduced_modulus(disk.transformed(T)).value;
        const double shifted = moduli::change_of_variable(m0, pi, pi, std::abs(T.derivative(-1.0)),
                                                          std::abs(T.derivative(1.0)));
        checks.push_back(check_row("Mobius covariance self-test", std::abs(mt - shifted), 1e-6));
    } catch (const ConvergenceError& e) {
        throw Failure{modulus_failure, std::string("reduced modulus failed: ") + e.what()};
    }
    bool all_pass = true;
    for (const auto& c : checks)
        all_pass = all_pass && c["pass"].get<bool>();
    report["checks"] = checks;
    report["all_checks_pass"] = all_pass;
    io::write_json(out / "moduli_report.json", report);
    std::cout << "identity residual " << io::format_double(checks[0]["value"].get<double>())
              << (all_pass ? ", all checks pass" : ", some checks fail") << "\n";
    return all_pass ? ok : modulus_failure;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Slit-strip semigroups, angular derivative inequalities and their extremal maps"};
    app.require_subcommand(1);
    Flags semigroup_f, verify_f, qd_f, moduli_f;
    auto* semigroup = app.add_subcommand("semigroup", "build the Koenigs map, certificate and fixed-point table");
    auto* verify = app.add_subcommand("verify", "check the weighted and unweighted inequalities");
    auto* qd = app.add_subcommand("qd", "fit and trace the star quadratic differential");
    auto* mod = app.add_subcommand("moduli", "reduced moduli of the extremal star system");
    add_common(semigroup, semigroup_f, false);
    add_common(verify, verify_f, true);
    add_common(qd, qd_f, false);
    add_common(mod, moduli_f, false);
    app.footer("Exit codes: 0 ok, 1 build or I/O failure, 2 usage or validation error, 3 indeterminate\n"
               "inequality report, 4 quadratic differential failure, 5 reduced modulus failure,\n"
               "6 an inequality fails within error. ANGULUS_TOL sets the default tolerance.");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return usage;
    }

    try {
        if (semigroup->parsed())
            return cmd_semigroup(resolve(semigroup_f, true));
        if (verify->parsed()) {
            // a multiplier table replaces the domain
            auto s = resolve(verify_f, false);
            if (!s.multipliers)
                s.validate(true);
            return cmd_verify(s);
        }
        if (qd->parsed())
            return cmd_qd(resolve(qd_f, true));
        if (mod->parsed())
            return cmd_moduli(resolve(moduli_f, true));
    } catch (const Failure& f) {
        std::cerr << "angulus: " << f.message << "\n";
        return f.code;
    } catch (const DomainError& e) {
        std::cerr << "angulus: invalid input: " << e.what() << "\n";
        return usage;
    } catch (const Error& e) {
        std::cerr << "angulus: " << e.what() << "\n";
        return build_failure;
    }
    return usage;
}
