#pragma once

#include <json.hpp>
#include <string>
#include <vector>

#include "nonlocal/grid.hpp"
#include "nonlocal/kernels.hpp"

namespace nonlocal {

// Experiment configuration: structured JSON with explicit units (radii in box
// units, lambda as magnitude plus argument in radians or the symbolic
// "theta"/"-theta"). The hash covers the semantic fields only, so output
// paths and thread counts do not perturb baselines.
struct ExperimentConfig {
    nlohmann::json raw;

    static ExperimentConfig load_file(const std::string& path);
    static ExperimentConfig from_json(nlohmann::json j);

    std::string kind() const;
    void validate() const;  // throws std::invalid_argument with field context
    std::uint64_t hash() const;

    KernelSpec make_kernel() const;
    Grid make_grid() const;
    double theta_fraction() const;  // default 0.9

    /// Magnitudes 10^lo..10^hi (per_decade steps per decade) crossed with the
    /// argument list; symbolic "theta"/"-theta" resolve against `theta`.
    std::vector<cplx> lambda_lattice(double theta) const;
    std::vector<std::uint64_t> seeds() const;
    std::vector<double> radii() const;
    std::vector<double> p_list() const;
    double iota() const;  // default 2

    // generic field access with defaults
    double num(const std::string& section, const std::string& key, double dflt) const;
    long integer(const std::string& section, const std::string& key, long dflt) const;
    std::string text(const std::string& section, const std::string& key,
                     const std::string& dflt) const;
    bool flag(const std::string& section, const std::string& key, bool dflt) const;
};

}  // namespace nonlocal
