#include "angulus/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "angulus/error.hpp"
#include "angulus/numerics.hpp"

namespace angulus::io {

using numerics::pi;
using Complex = std::complex<double>;
using geometry::BoundaryPoint;

namespace {

std::vector<double> number_list(const Json& j, const char* key) {
    if (!j.is_array())
        throw DomainError(std::string("scenario: '") + key + "' must be an array of numbers");
    std::vector<double> out;
    for (const auto& x : j) {
        if (!x.is_number())
            throw DomainError(std::string("scenario: '") + key + "' must be an array of numbers");
        out.push_back(x.get<double>());
    }
    return out;
}

Json complex_json(Complex z) { return Json{{"re", z.real()}, {"im", z.imag()}}; }

std::vector<double> angles(const std::vector<BoundaryPoint>& pts) {
    std::vector<double> out;
    for (const auto& p : pts)
        out.push_back(p.angle());
    return out;
}

inequality::FixedPointMultiplier multiplier_entry(const Json& j, const std::string& where) {
    if (!j.is_object() || !j.contains("angle") || !j["angle"].is_number())
        throw DomainError("multipliers: " + where + " needs a numeric 'angle'");
    const BoundaryPoint p(j["angle"].get<double>());
    const bool has_m = j.contains("multiplier"), has_log = j.contains("log_multiplier");
    if (has_m == has_log)
        throw DomainError("multipliers: " + where + " needs exactly one of 'multiplier' and 'log_multiplier'");
    double log_m = 0.0;
    if (has_m) {
        const double m = j["multiplier"].get<double>();
        if (!(m > 0.0))
            throw DomainError("multipliers: " + where + " multiplier must be positive");
        log_m = std::log(m);
    } else {
        log_m = j["log_multiplier"].get<double>();
    }
    double log_err = 0.0;
    if (j.contains("error"))
        log_err = j["error"].get<double>() / std::exp(log_m);
    if (j.contains("log_error"))
        log_err = j["log_error"].get<double>();
    if (!(log_err >= 0.0) || !std::isfinite(log_m))
        throw DomainError("multipliers: " + where + " has an invalid value or error");
    return {p, log_m, log_err, log_err > 0.0 ? inequality::Provenance::estimated : inequality::Provenance::exact};
}

Json entry_json(const inequality::FixedPointMultiplier& m) {
    return Json{{"angle", m.point.angle()},
                {"log_multiplier", m.log_multiplier},
                {"log_error", m.log_error},
                {"provenance", m.provenance == inequality::Provenance::exact ? "exact" : "estimated"}};
}

std::string escape_xml(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '&': out += "&amp;"; break;
        case '"': out += "&quot;"; break;
        default: out += c;
        }
    }
    return out;
}

std::string px(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", x);
    return buf;
}

const std::vector<std::string> palette{"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                       "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

} // namespace

// ---------------------------------------------------------------------------

void Scenario::validate(bool need_domain) const {
    if (need_domain) {
        if (alphas.empty())
            throw DomainError("scenario: alphas are required");
        (void)domain();
    }
    if (times.empty())
        throw DomainError("scenario: at least one time is required");
    for (double t : times)
        if (!(t > 0.0) || !std::isfinite(t))
            throw DomainError("scenario: times must be positive");
    for (const auto& w : weights) {
        if (need_domain && w.size() != alphas.size())
            throw DomainError("scenario: every weight list needs one entry per channel");
        (void)inequality::WeightVector(w);
    }
    if (!(tolerance > 0.0) || !(tolerance < 1e-2))
        throw DomainError("scenario: tolerance must lie in (0, 1e-2)");
}

koenigs::SlitStripDomain Scenario::domain() const { return koenigs::SlitStripDomain(alphas, gammas); }

Scenario scenario_from_json(const Json& j, const std::filesystem::path& base) {
    if (!j.is_object())
        throw DomainError("scenario: top level must be an object");
    Scenario s;
    for (const auto& [key, value] : j.items()) {
        if (key == "alphas")
            s.alphas = number_list(value, "alphas");
        else if (key == "gammas")
            s.gammas = number_list(value, "gammas");
        else if (key == "times")
            s.times = number_list(value, "times");
        else if (key == "weights") {
            if (!value.is_array())
                throw DomainError("scenario: 'weights' must be an array of arrays");
            for (const auto& w : value)
                s.weights.push_back(number_list(w, "weights"));
        } else if (key == "tolerance") {
            if (!value.is_number())
                throw DomainError("scenario: 'tolerance' must be a number");
            s.tolerance = value.get<double>();
        } else if (key == "multipliers") {
            if (value.is_string()) {
                auto path = std::filesystem::path(value.get<std::string>());
                if (path.is_relative())
                    path = base / path;
                std::ifstream in(path);
                if (!in)
                    throw DomainError("scenario: cannot read multiplier table " + path.string());
                try {
                    s.multipliers = Json::parse(in);
                } catch (const Json::parse_error& e) {
                    throw DomainError(std::string("multipliers: ") + e.what());
                }
            } else {
                s.multipliers = value;
            }
        } else if (key == "out") {
            if (!value.is_string())
                throw DomainError("scenario: 'out' must be a string");
            s.out = value.get<std::string>();
        } else {
            throw DomainError("scenario: unknown key '" + key + "'");
        }
    }
    return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw DomainError("scenario: cannot read " + path.string());
    Json j;
    try {
        j = Json::parse(in);
    } catch (const Json::parse_error& e) {
        throw DomainError(std::string("scenario: ") + e.what());
    }
    return scenario_from_json(j, path.parent_path());
}

Json to_json(const Scenario& s) {
    Json j{{"alphas", s.alphas}, {"gammas", s.gammas}, {"times", s.times},
           {"weights", s.weights}, {"tolerance", s.tolerance}};
    if (s.multipliers)
        j["multipliers"] = *s.multipliers;
    return j;
}

// ---------------------------------------------------------------------------

inequality::MultiplierData multipliers_from_json(const Json& j) {
    if (!j.is_object() || !j.contains("denjoy_wolff") || !j.contains("repulsive") || !j["repulsive"].is_array())
        throw DomainError("multipliers: need 'denjoy_wolff' and a 'repulsive' array");
    try {
        std::vector<inequality::FixedPointMultiplier> rep;
        for (std::size_t k = 0; k < j["repulsive"].size(); ++k)
            rep.push_back(multiplier_entry(j["repulsive"][k], "repulsive[" + std::to_string(k) + "]"));
        return inequality::MultiplierData(multiplier_entry(j["denjoy_wolff"], "denjoy_wolff"), std::move(rep));
    } catch (const Json::exception& e) {
        throw DomainError(std::string("multipliers: ") + e.what());
    }
}

Json to_json(const inequality::MultiplierData& data) {
    Json rep = Json::array();
    for (const auto& r : data.repulsive())
        rep.push_back(entry_json(r));
    return Json{{"denjoy_wolff", entry_json(data.denjoy_wolff())}, {"repulsive", rep}};
}

Json to_json(const inequality::InequalityReport& r) {
    Json j{{"theorem", r.theorem}, {"left", r.left},   {"right", r.right},
           {"slack", r.slack},     {"error", r.error}, {"verdict", inequality::to_string(r.verdict)},
           {"satisfied", r.satisfied()}};
    if (!r.weights.empty())
        j["weights"] = r.weights;
    return j;
}

Json certificate_json(const koenigs::KoenigsMap& map) {
    const auto& d = map.domain();
    std::vector<double> levels;
    for (std::size_t k = 0; k <= d.channels(); ++k)
        levels.push_back(d.level(k));
    const auto& c = map.certificate();
    Json strips = Json::array();
    for (const auto& s : koenigs::invariant_set(d).strips)
        strips.push_back(Json{{"lower", s.lower}, {"upper", s.upper}, {"width", s.width},
                              {"repulsive_index", s.repulsive_index + 1}});
    return Json{
        {"domain", {{"alphas", d.alphas()}, {"gammas", d.gammas()}, {"levels", levels}}},
        {"prevertices",
         {{"denjoy_wolff", map.denjoy_wolff().angle()},
          {"repulsive", angles(map.repulsive())},
          {"tips", angles(map.tips())}}},
        {"derivative_constant", complex_json(map.derivative_constant())},
        {"invariant_strips", strips},
        {"certificate",
         {{"residual", c.residual()},
          {"level_residual", c.level_residual},
          {"tip_residual", c.tip_residual},
          {"origin_residual", c.origin_residual},
          {"derivative_argument", c.derivative_argument},
          {"min_image_separation", c.min_image_separation},
          {"univalence_samples", c.univalence_samples},
          {"solver_iterations", c.solver_iterations},
          {"min_prevertex_gap", c.min_prevertex_gap},
          {"warnings", c.warnings}}},
    };
}

Json to_json(const quaddiff::StarQuadDiff& qd) {
    return Json{{"a", qd.a.angle()},
                {"xi", angles(qd.xi)},
                {"betas", qd.betas()},
                {"A", complex_json(qd.A)},
                {"alphas", qd.alphas},
                {"iterations", qd.iterations},
                {"residual", qd.residual},
                {"warnings", qd.warnings}};
}

Json to_json(const moduli::ReducedModulus& m) {
    Json samples = Json::array();
    for (const auto& s : m.samples)
        samples.push_back(Json::array({s.h, s.value.real()}));
    return Json{{"value", m.value}, {"error", m.error}, {"samples", samples}};
}

// ---------------------------------------------------------------------------

std::string format_double(double x) {
    if (std::isnan(x))
        return "nan";
    if (std::isinf(x))
        return x > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

CsvTable::CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

void CsvTable::add_row(std::vector<std::string> cells) {
    if (cells.size() != header_.size())
        throw Error("CsvTable: row has " + std::to_string(cells.size()) + " cells, header has " +
                    std::to_string(header_.size()));
    rows_.push_back(std::move(cells));
}

std::string CsvTable::str() const {
    auto line = [](const std::vector<std::string>& cells) {
        std::string out;
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i)
                out += ',';
            if (cells[i].find_first_of(",\"\n") != std::string::npos) {
                out += '"';
                for (char c : cells[i])
                    out += c == '"' ? std::string("\"\"") : std::string(1, c);
                out += '"';
            } else {
                out += cells[i];
            }
        }
        return out + "\n";
    };
    std::string out = line(header_);
    for (const auto& r : rows_)
        out += line(r);
    return out;
}

// ---------------------------------------------------------------------------

SvgCanvas::SvgCanvas(double xmin, double xmax, double ymin, double ymax, int width_px)
    : xmin_(xmin), xmax_(xmax), ymin_(ymin), ymax_(ymax), width_(width_px) {
    if (!(xmax > xmin) || !(ymax > ymin) || width_px <= 0)
        throw Error("SvgCanvas: empty frame");
    scale_ = width_px / (xmax - xmin);
    height_ = static_cast<int>(std::ceil((ymax - ymin) * scale_));
}

std::string SvgCanvas::point(Complex p) const {
    return px((p.real() - xmin_) * scale_) + "," + px((ymax_ - p.imag()) * scale_);
}

void SvgCanvas::polyline(const std::vector<Complex>& pts, const std::string& color, double width) {
    // split where the curve leaves the frame
    std::string run;
    std::size_t count = 0;
    auto flush = [&] {
        if (count >= 2)
            items_.push_back("<polyline fill=\"none\" stroke=\"" + color + "\" stroke-width=\"" + px(width) +
                             "\" points=\"" + run + "\"/>");
        run.clear();
        count = 0;
    };
    for (const auto& p : pts) {
        const bool inside = std::isfinite(p.real()) && std::isfinite(p.imag()) && p.real() >= xmin_ &&
                            p.real() <= xmax_ && p.imag() >= ymin_ && p.imag() <= ymax_;
        if (!inside) {
            flush();
            continue;
        }
        if (count)
            run += ' ';
        run += point(p);
        ++count;
    }
    flush();
}

void SvgCanvas::dot(Complex p, double radius_px, const std::string& color) {
    const std::string xy = point(p);
    const auto comma = xy.find(',');
    items_.push_back("<circle cx=\"" + xy.substr(0, comma) + "\" cy=\"" + xy.substr(comma + 1) + "\" r=\"" +
                     px(radius_px) + "\" fill=\"" + color + "\"/>");
}

void SvgCanvas::circle(Complex center, double r, const std::string& color, double width) {
    const std::string xy = point(center);
    const auto comma = xy.find(',');
    items_.push_back("<circle cx=\"" + xy.substr(0, comma) + "\" cy=\"" + xy.substr(comma + 1) + "\" r=\"" +
                     px(r * scale_) + "\" fill=\"none\" stroke=\"" + color + "\" stroke-width=\"" + px(width) +
                     "\"/>");
}

void SvgCanvas::label(Complex p, const std::string& text, const std::string& color) {
    const std::string xy = point(p);
    const auto comma = xy.find(',');
    items_.push_back("<text x=\"" + xy.substr(0, comma) + "\" y=\"" + xy.substr(comma + 1) +
                     "\" font-family=\"sans-serif\" font-size=\"14\" fill=\"" + color + "\">" + escape_xml(text) +
                     "</text>");
}

std::string SvgCanvas::str() const {
    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width_ << "\" height=\"" << height_
        << "\" viewBox=\"0 0 " << width_ << " " << height_ << "\">\n"
        << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    for (const auto& item : items_)
        out << item << "\n";
    out << "</svg>\n";
    return out.str();
}

// ---------------------------------------------------------------------------

std::string domain_svg(const koenigs::KoenigsMap& map) {
    const auto& d = map.domain();
    double gmin = 0.0;
    for (double g : d.gammas())
        gmin = std::min(gmin, g);
    const double xmin = gmin - 2.5, xmax = 3.0;
    SvgCanvas svg(xmin, xmax, -0.65, 0.65, 1000);

    // polar grid of the disk pushed forward by h
    for (int j = 0; j < 32; ++j) {
        const double th = 2 * pi * (j + 0.5) / 32;
        std::vector<Complex> ray;
        for (int i = 0; i <= 400; ++i) {
            const double r = 0.9995 * (1.0 - std::pow(1.0 - i / 400.0, 3));
            ray.push_back(map.eval(std::polar(r, th)));
        }
        svg.polyline(ray, "#9ecae1", 0.8);
    }
    for (double r : {0.3, 0.5, 0.7, 0.85, 0.93, 0.97, 0.99}) {
        std::vector<Complex> ring;
        for (int i = 0; i <= 2000; ++i)
            ring.push_back(map.eval(std::polar(r, 2 * pi * i / 2000)));
        svg.polyline(ring, "#fdae6b", 0.8);
    }
    svg.polyline({{xmin, -0.5}, {xmax, -0.5}}, "black", 2.0);
    svg.polyline({{xmin, 0.5}, {xmax, 0.5}}, "black", 2.0);
    for (std::size_t k = 0; k < d.gammas().size(); ++k)
        svg.polyline({{xmin, d.level(k + 1)}, {d.gammas()[k], d.level(k + 1)}}, "black", 2.0);
    svg.dot(0.0, 3.0, "black");
    return svg.str();
}

std::string trajectories_svg(const quaddiff::StarQuadDiff& qd, const std::vector<quaddiff::Trajectory>& slit_arcs,
                             const std::vector<std::vector<quaddiff::Trajectory>>& families) {
    SvgCanvas svg(-1.2, 1.2, -1.2, 1.2, 800);
    for (std::size_t f = 0; f < families.size(); ++f)
        for (const auto& tr : families[f])
            svg.polyline(tr.points, palette[f % palette.size()],
                         tr.type == quaddiff::TrajectoryType::trajectory ? 1.0 : 0.6);
    svg.circle(0.0, 1.0, "black", 1.5);
    for (const auto& arc : slit_arcs)
        svg.polyline(arc.points, "black", 2.5);
    svg.dot(qd.a.value(), 6.0, "#d62728");
    svg.label(qd.a.value() * 1.08, "a", "#d62728");
    for (std::size_t k = 0; k < qd.xi.size(); ++k) {
        svg.dot(qd.xi[k].value(), 6.0, "#1f77b4");
        svg.label(qd.xi[k].value() * 1.08, "xi" + std::to_string(k + 1), "#1f77b4");
    }
    for (const auto& z : qd.zeros)
        svg.dot(z.value(), 4.0, "black");
    return svg.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw Error("cannot write " + path.string());
    out << text;
    if (!out)
        throw Error("cannot write " + path.string());
}

void write_json(const std::filesystem::path& path, const Json& j) { write_text(path, j.dump(2) + "\n"); }

} // namespace angulus::io
