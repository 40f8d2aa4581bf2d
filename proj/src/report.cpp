#include "nonlocal/report.hpp"

#include <fstream>
#include <sstream>

namespace nonlocal {

json VerificationReport::to_json(bool include_metadata) const {
    json j;
    j["schema_version"] = 1;
    j["experiment"] = experiment;
    j["params"] = params;
    j["config_hash"] = config_hash;
    json jc = json::array();
    for (const CaseRecord& c : cases) {
        json e;
        e["id"] = c.id;
        e["params"] = c.params;
        e["lhs"] = c.lhs;
        e["rhs"] = c.rhs;
        e["ratio"] = c.ratio;
        if (!c.extra.is_null()) e["extra"] = c.extra;
        jc.push_back(std::move(e));
    }
    j["cases"] = std::move(jc);
    j["summary"] = summary;
    j["verdicts"] = {{"hard_pass", hard_pass}, {"soft_pass", soft_pass}};
    if (!notes.empty()) j["notes"] = notes;
    if (include_metadata) j["metadata"] = {{"wall_ms", wall_ms}, {"timestamp", timestamp}};
    return j;
}

std::uint64_t VerificationReport::payload_checksum() const {
    return fnv1a64(to_json(false).dump());
}

void VerificationReport::write_json(const std::string& path) const {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("write_json: cannot open " + path);
    os << to_json(true).dump(2) << "\n";
}

void VerificationReport::write_cases_csv(const std::string& path) const {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("write_cases_csv: cannot open " + path);
    os.precision(17);
    os << "id,params,lhs,rhs,ratio\n";
    for (const CaseRecord& c : cases) {
        std::string p = c.params.dump();
        for (char& ch : p)
            if (ch == ',') ch = ';';
        os << c.id << ',' << p << ',' << c.lhs << ',' << c.rhs << ',' << c.ratio << '\n';
    }
}

void write_baseline(const std::string& path, const VerificationReport& report) {
    json j;
    j["config_hash"] = report.config_hash;
    j["summary"] = report.summary;
    j["checksum"] = fnv1a64(json{{"config_hash", report.config_hash},
                                 {"summary", report.summary}}
                                .dump());
    std::ofstream os(path);
    if (!os) throw std::runtime_error("write_baseline: cannot open " + path);
    os << j.dump(2) << "\n";
}

Baseline read_baseline(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("read_baseline: cannot open " + path);
    json j = json::parse(is);
    Baseline b;
    b.config_hash = j.at("config_hash").get<std::uint64_t>();
    b.summary = j.at("summary");
    b.checksum = j.at("checksum").get<std::uint64_t>();
    const std::uint64_t expect =
        fnv1a64(json{{"config_hash", b.config_hash}, {"summary", b.summary}}.dump());
    if (expect != b.checksum)
        throw std::runtime_error("read_baseline: checksum mismatch (file tampered or corrupted)");
    return b;
}

bool compare_to_baseline(const VerificationReport& report, const Baseline& base,
                         std::string* detail) {
    bool ok = true;
    std::ostringstream os;
    for (auto it = base.summary.begin(); it != base.summary.end(); ++it) {
        if (!it->is_number()) continue;
        if (!report.summary.contains(it.key()) || !report.summary[it.key()].is_number()) continue;
        const double ref = it->get<double>();
        const double cur = report.summary[it.key()].get<double>();
        if (std::abs(cur) > std::abs(ref) * 1.10 + 1e-300) {
            ok = false;
            os << it.key() << ": " << cur << " exceeds baseline " << ref << " by >10%; ";
        }
    }
    if (detail) *detail = os.str();
    return ok;
}

}  // namespace nonlocal
