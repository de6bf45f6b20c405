#pragma once

#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include <nvmx/core/csv.hpp>
#include <nvmx/cov/experiment.hpp>

namespace nvmx {

// Correlator table, one row per (sweep point, pair).
inline void write_correlator_csv(const std::string& path,
                                 const std::vector<SweepRecord>& records) {
    CsvWriter csv(path);
    csv.header({"sweep_value", "site_i", "site_j", "r_raw", "r_corr", "stderr", "n_shots"});
    for (const auto& sr : records) {
        csv.field(sr.sweep_value)
            .field(sr.rec.site_i)
            .field(sr.rec.site_j)
            .field(sr.rec.r_raw)
            .field(sr.rec.r_corr)
            .field(sr.rec.stderr)
            .field(sr.rec.n_shots);
        csv.endrow();
    }
    csv.close();
}

inline void write_baseline_json(const std::string& path, const BaselineEstimate& cal) {
    nlohmann::json j;
    j["baseline"] = cal.baseline;
    j["stderr"] = cal.stderr;
    j["n_pairs"] = cal.n_pairs;
    j["n_shots"] = cal.n_shots;
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_baseline_json: cannot open " + path);
    out << j.dump(2) << '\n';
    if (!out) throw std::runtime_error("write_baseline_json: write failed");
}

inline BaselineEstimate read_baseline_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("read_baseline_json: cannot open " + path);
    nlohmann::json j;
    in >> j;
    BaselineEstimate cal;
    cal.baseline = j.at("baseline").get<double>();
    cal.stderr = j.at("stderr").get<double>();
    cal.n_pairs = j.at("n_pairs").get<std::size_t>();
    cal.n_shots = j.at("n_shots").get<std::size_t>();
    return cal;
}

} // namespace nvmx
