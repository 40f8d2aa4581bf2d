#include "nonlocal/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace nonlocal {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& where, const std::string& what) {
    throw std::invalid_argument("config." + where + ": " + what);
}

const std::set<std::string> kKinds = {"assemble",   "resolvent-sweep", "caccioppoli",
                                      "wrh",        "cz",              "good-lambda",
                                      "maxreg",     "square-function"};

}  // namespace

ExperimentConfig ExperimentConfig::load_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::invalid_argument("config: cannot open " + path);
    json j;
    try {
        j = json::parse(is);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(std::string("config: parse error: ") + e.what());
    }
    return from_json(std::move(j));
}

ExperimentConfig ExperimentConfig::from_json(json j) {
    ExperimentConfig c;
    c.raw = std::move(j);
    c.validate();
    return c;
}

std::string ExperimentConfig::kind() const { return raw.value("kind", std::string{}); }

void ExperimentConfig::validate() const {
    if (!raw.is_object()) fail("root", "top level must be a JSON object");
    if (!raw.contains("kind") || !raw["kind"].is_string()) fail("kind", "missing experiment kind");
    if (kKinds.find(raw["kind"].get<std::string>()) == kKinds.end())
        fail("kind", "unknown experiment kind '" + raw["kind"].get<std::string>() + "'");
    if (raw.contains("kernel")) {
        make_kernel();  // throws on bad fields
    }
    if (raw.contains("grid")) {
        make_grid().validate();
    }
    if (raw.contains("sweep") && raw["sweep"].contains("lambda")) {
        const json& l = raw["sweep"]["lambda"];
        if (!l.contains("decades") || !l["decades"].is_array() || l["decades"].size() != 2)
            fail("sweep.lambda.decades", "expected [lo, hi]");
        if (!l.contains("args") || !l["args"].is_array() || l["args"].empty())
            fail("sweep.lambda.args", "expected a nonempty argument list");
    }
}

std::uint64_t ExperimentConfig::hash() const {
    // canonical dump: nlohmann objects iterate in sorted key order
    json sem;
    for (const char* key : {"kind", "kernel", "grid", "sector", "sweep", "cz", "seed"})
        if (raw.contains(key)) sem[key] = raw[key];
    return fnv1a64(sem.dump());
}

KernelSpec ExperimentConfig::make_kernel() const {
    if (!raw.contains("kernel")) fail("kernel", "missing kernel block");
    const json& k = raw["kernel"];
    const std::string form = k.value("form", "fractional");
    const int d = k.value("d", 1);
    const double alpha = k.value("alpha", 0.5);
    const double lambda = k.value("lambda", 0.5);
    return kernel_by_name(form, d, alpha, lambda);
}

Grid ExperimentConfig::make_grid() const {
    if (!raw.contains("grid")) fail("grid", "missing grid block");
    const json& g = raw["grid"];
    Grid grid;
    grid.dimension = raw.contains("kernel") ? raw["kernel"].value("d", 1) : g.value("d", 1);
    grid.half_width = g.value("L", 1.0);
    grid.cells_per_dim = g.value("n", 2);
    const std::string b = g.value("boundary", "zero_extension");
    if (b == "periodic")
        grid.boundary = Boundary::Periodic;
    else if (b == "zero_extension")
        grid.boundary = Boundary::ZeroExtension;
    else
        fail("grid.boundary", "expected 'periodic' or 'zero_extension'");
    return grid;
}

double ExperimentConfig::theta_fraction() const {
    if (raw.contains("sector")) return raw["sector"].value("theta_fraction", 0.9);
    return 0.9;
}

std::vector<cplx> ExperimentConfig::lambda_lattice(double theta) const {
    if (!raw.contains("sweep") || !raw["sweep"].contains("lambda"))
        fail("sweep.lambda", "missing lambda lattice");
    const json& l = raw["sweep"]["lambda"];
    const double lo = l["decades"][0].get<double>();
    const double hi = l["decades"][1].get<double>();
    const int per = l.value("per_decade", 1);
    if (per < 1) fail("sweep.lambda.per_decade", "must be >= 1");
    if (hi < lo) fail("sweep.lambda.decades", "hi < lo");

    std::vector<double> args;
    for (const json& a : l["args"]) {
        if (a.is_number()) {
            args.push_back(a.get<double>());
        } else if (a.is_string()) {
            const std::string s = a.get<std::string>();
            if (s == "theta")
                args.push_back(theta);
            else if (s == "-theta")
                args.push_back(-theta);
            else
                fail("sweep.lambda.args", "unknown symbolic argument '" + s + "'");
        } else {
            fail("sweep.lambda.args", "arguments must be numbers or 'theta'/'-theta'");
        }
    }
    if (args.empty()) fail("sweep.lambda.args", "empty lattice");

    std::vector<cplx> out;
    const int steps = static_cast<int>(std::lround((hi - lo) * per));
    for (int s = 0; s <= steps; ++s) {
        const double mag = std::pow(10.0, lo + static_cast<double>(s) / per);
        for (double a : args) out.push_back(std::polar(mag, a));
    }
    return out;
}

std::vector<std::uint64_t> ExperimentConfig::seeds() const {
    std::vector<std::uint64_t> out;
    if (raw.contains("sweep") && raw["sweep"].contains("seeds")) {
        for (const json& s : raw["sweep"]["seeds"]) out.push_back(s.get<std::uint64_t>());
    }
    if (out.empty()) out.push_back(raw.value("seed", 1));
    return out;
}

std::vector<double> ExperimentConfig::radii() const {
    std::vector<double> out;
    if (raw.contains("sweep") && raw["sweep"].contains("radii"))
        for (const json& r : raw["sweep"]["radii"]) out.push_back(r.get<double>());
    return out;
}

std::vector<double> ExperimentConfig::p_list() const {
    std::vector<double> out;
    if (raw.contains("sweep") && raw["sweep"].contains("p"))
        for (const json& p : raw["sweep"]["p"]) out.push_back(p.get<double>());
    return out;
}

double ExperimentConfig::iota() const {
    if (raw.contains("sweep")) return raw["sweep"].value("iota", 2.0);
    return 2.0;
}

double ExperimentConfig::num(const std::string& sec, const std::string& key, double dflt) const {
    if (raw.contains(sec) && raw[sec].contains(key)) return raw[sec][key].get<double>();
    return dflt;
}

long ExperimentConfig::integer(const std::string& sec, const std::string& key, long dflt) const {
    if (raw.contains(sec) && raw[sec].contains(key)) return raw[sec][key].get<long>();
    return dflt;
}

std::string ExperimentConfig::text(const std::string& sec, const std::string& key,
                                   const std::string& dflt) const {
    if (raw.contains(sec) && raw[sec].contains(key)) return raw[sec][key].get<std::string>();
    return dflt;
}

bool ExperimentConfig::flag(const std::string& sec, const std::string& key, bool dflt) const {
    if (raw.contains(sec) && raw[sec].contains(key)) return raw[sec][key].get<bool>();
    return dflt;
}

}  // namespace nonlocal
