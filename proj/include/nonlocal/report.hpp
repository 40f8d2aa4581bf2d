#pragma once

#include <json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "nonlocal/util.hpp"

namespace nonlocal {

using json = nlohmann::json;

struct CaseRecord {
    std::string id;
    json params;
    double lhs = 0.0;
    double rhs = 0.0;
    double ratio = 0.0;
    json extra;
};

// Per-experiment record: parameters, per-case (lhs, rhs, ratio) rows, summary
// statistics, and verdicts. Everything except the metadata block is a pure
// function of (config, seeds).
struct VerificationReport {
    std::string experiment;
    json params;
    std::uint64_t config_hash = 0;
    std::vector<CaseRecord> cases;
    json summary;
    bool hard_pass = true;
    bool soft_pass = true;
    std::string notes;
    // metadata (excluded from the deterministic payload)
    double wall_ms = 0.0;
    std::string timestamp;

    json to_json(bool include_metadata = true) const;
    void write_json(const std::string& path) const;
    void write_cases_csv(const std::string& path) const;
    std::uint64_t payload_checksum() const;
};

struct Baseline {
    std::uint64_t config_hash = 0;
    json summary;
    std::uint64_t checksum = 0;
};

void write_baseline(const std::string& path, const VerificationReport& report);
/// Throws std::runtime_error on checksum mismatch (tampered file).
Baseline read_baseline(const std::string& path);

/// Soft regression verdict: every summary ratio within 10% of the baseline.
bool compare_to_baseline(const VerificationReport& report, const Baseline& base,
                         std::string* detail = nullptr);

}  // namespace nonlocal
