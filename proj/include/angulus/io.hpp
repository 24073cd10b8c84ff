#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "angulus/inequality.hpp"
#include "angulus/koenigs.hpp"
#include "angulus/moduli.hpp"
#include "angulus/quaddiff.hpp"

/// Scenario files, JSON/CSV reports and SVG figures. Every writer is
/// deterministic: keys keep insertion order and numbers are printed with
/// round-trip precision.
namespace angulus::io {

using Json = nlohmann::ordered_json;

/// A run description. JSON form:
///
///   {"alphas": [0.4, 0.6], "gammas": [-1], "times": [1],
///    "weights": [[0.3, 0.7]], "tolerance": 1e-12,
///    "multipliers": {...} or "table.json", "out": "results"}
///
/// Every key is optional; missing alphas are reported by validate().
struct Scenario {
    std::vector<double> alphas;
    std::vector<double> gammas;
    std::vector<double> times{1.0};
    std::vector<std::vector<double>> weights;
    double tolerance = 1e-12;
    std::optional<Json> multipliers; ///< inline multiplier table
    std::string out;

    /// Checks the domain, times, weight lists and tolerance against the
    /// library preconditions. Throws DomainError.
    void validate(bool need_domain = true) const;
    koenigs::SlitStripDomain domain() const;
};

/// Relative paths inside the file (a multiplier table given by name) are
/// resolved against the scenario's directory.
Scenario load_scenario(const std::filesystem::path& path);
Scenario scenario_from_json(const Json& j, const std::filesystem::path& base = {});
Json to_json(const Scenario& s);

/// {"denjoy_wolff": {"angle": 0, "multiplier": 0.0432}, "repulsive": [...]}.
/// Each entry takes "multiplier" or "log_multiplier", and optionally "error"
/// (absolute, on the multiplier) or "log_error". Entries with a positive error
/// are estimates, the rest exact. Throws DomainError.
inequality::MultiplierData multipliers_from_json(const Json& j);
Json to_json(const inequality::MultiplierData& data);
Json to_json(const inequality::InequalityReport& report);

Json certificate_json(const koenigs::KoenigsMap& map);
Json to_json(const quaddiff::StarQuadDiff& qd);
Json to_json(const moduli::ReducedModulus& m);

/// %.17g, with "nan"/"inf" spelled out.
std::string format_double(double x);

class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> header);
    void add_row(std::vector<std::string> cells);
    std::string str() const;

private:
    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

/// Plain SVG in a square frame with a math-oriented coordinate box.
class SvgCanvas {
public:
    SvgCanvas(double xmin, double xmax, double ymin, double ymax, int width_px = 800);

    void polyline(const std::vector<std::complex<double>>& pts, const std::string& color, double width = 1.0);
    void dot(std::complex<double> p, double radius_px, const std::string& color);
    void circle(std::complex<double> center, double r, const std::string& color, double width = 1.0);
    void label(std::complex<double> p, const std::string& text, const std::string& color = "black");
    std::string str() const;

private:
    std::string point(std::complex<double> p) const;
    double xmin_, xmax_, ymin_, ymax_;
    int width_, height_;
    double scale_;
    std::vector<std::string> items_;
};

/// The slit strip with the image of a polar grid under h.
std::string domain_svg(const koenigs::KoenigsMap& map);

/// Unit circle, poles, zeros, slit arcs and the traced trajectory families.
std::string trajectories_svg(const quaddiff::StarQuadDiff& qd, const std::vector<quaddiff::Trajectory>& slit_arcs,
                             const std::vector<std::vector<quaddiff::Trajectory>>& families);

/// Overwrites `path`; throws Error when the file cannot be written.
void write_text(const std::filesystem::path& path, const std::string& text);
void write_json(const std::filesystem::path& path, const Json& j);

} // namespace angulus::io
