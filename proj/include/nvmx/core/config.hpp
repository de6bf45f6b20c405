#pragma once

#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include <nvmx/core/camera.hpp>
#include <nvmx/core/site.hpp>

namespace nvmx {

enum class ExperimentKind { Charge, Scc, Odmr, Rabi, T1, Driven, Spectroscopy };

inline const char* to_string(ExperimentKind k) {
    switch (k) {
        case ExperimentKind::Charge: return "charge";
        case ExperimentKind::Scc: return "scc";
        case ExperimentKind::Odmr: return "odmr";
        case ExperimentKind::Rabi: return "rabi";
        case ExperimentKind::T1: return "t1";
        case ExperimentKind::Driven: return "driven";
        case ExperimentKind::Spectroscopy: return "spectroscopy";
    }
    return "?";
}

struct FrameGeometry {
    std::uint32_t width = 64;
    std::uint32_t height = 64;
    std::uint32_t count = 1000;
};

struct PsfConfig {
    double sigma_px = 1.3;  // isotropic Gaussian width
};

// Frequency sweep for continuous-wave spectra. Per-site resonances are
// f_center plus a seeded scatter so multi-site fits have distinct truth.
struct OdmrConfig {
    double f_center_hz = 2.870e9;
    double f_span_hz = 12.0e6;
    int n_points = 41;
    double contrast = 0.2;
    double linewidth_hz = 1.0e6;
    double site_scatter_hz = 2.0e6;
    double base_rate = 5.0;  // photons per readout off resonance
    bool hyperfine = false;
};

struct RabiConfig {
    double t_stop_s = 1.0e-6;
    int n_points = 41;
    double contrast = 0.3;
    double decay_s = 3.0e-6;
    double base_rate = 5.0;
};

struct T1Config {
    double t_start_s = 1.0e-5;
    double t_stop_s = 8.0e-3;
    int n_points = 14;
    double contrast = 0.3;
    double base_rate = 5.0;
};

// Spin-to-charge frames take their bright/dark populations from the rate
// model evolved for t_ion at the given per-site power.
struct SccConfig {
    std::string preset = "orange_594";
    double power_mw_per_nv = 6.0;
    double t_ion_ns = 250.0;
};

struct DrivenConfig {
    int theta_points = 24;
    std::int64_t shots_per_point = 100000;
    double sigma_r = 12.0;        // per-site readout noise the readout is tuned to
    double charge_mean = 0.45;    // midpoint of the two survival probabilities
    double gain_noise_sigma = 0.0;
    std::vector<int> opposite_sites;  // site ids prepared in the inverted state
};

struct SpectroscopyConfig {
    double tau_ns = 250.0;
    int n_pulses = 16;
    double b_amp_t = 3.1e-6;
    double f_start_hz = 1.0e6;
    double f_stop_hz = 3.0e6;
    int n_freqs = 11;
    std::int64_t shots_per_freq = 3000000;
    double sigma_r = 12.0;
    double charge_mean = 0.45;
    std::vector<int> opposite_sites;
};

struct HoloTarget {
    double kx = 0.0;
    double ky = 0.0;
    double amplitude = 1.0;
};

struct HoloConfig {
    int grid = 512;
    int iterations = 50;
    std::vector<HoloTarget> targets;  // empty: n_random seeded spots
    int n_random = 15;
    double random_extent = 0.3;  // fraction of the grid half-width
};

struct SweepConfig {
    std::string kind = "scc_opt";  // scc_opt | multiplex_scaling | wgs_bench
    std::string preset = "orange_594";
    // scc_opt
    std::vector<double> powers_mw = {3.0, 6.0, 12.0};
    double t_min_ns = 50.0;
    double t_max_ns = 4000.0;
    int n_t = 60;
    // multiplex_scaling
    double total_power_mw = 30.0;
    std::vector<int> n_sites_list = {1, 2, 3, 5, 8, 12, 16};
    // wgs_bench
    int grid = 256;
    int n_spots = 15;
    int iterations = 50;
};

struct BaselineConfig {
    int n_sites = 15;
    std::int64_t shots = 300000;
    double mu = 4.0;
    double sigma_n = 0.05;
};

struct RunConfig {
    ExperimentKind experiment = ExperimentKind::Charge;
    std::uint64_t seed = 1;
    int threads = 1;
    std::string out_dir = "out";

    FrameGeometry frames;
    CameraModel camera;
    PsfConfig psf;
    std::vector<NVSite> sites;

    OdmrConfig odmr;
    RabiConfig rabi;
    T1Config t1;
    SccConfig scc;
    DrivenConfig driven;
    SpectroscopyConfig spectroscopy;
    HoloConfig holo;
    SweepConfig sweep;
    BaselineConfig baseline;

    void validate() const;
};

namespace cfg_detail {

using nlohmann::json;

[[noreturn]] inline void bad(const std::string& path, const std::string& what) {
    throw std::invalid_argument("config " + path + ": " + what);
}

inline void check_keys(const json& j, const std::string& path,
                       std::initializer_list<const char*> allowed) {
    std::set<std::string> ok(allowed.begin(), allowed.end());
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!ok.count(it.key())) bad(path + "." + it.key(), "unknown key");
}

inline void expect_object(const json& j, const std::string& path) {
    if (!j.is_object()) bad(path, "expected an object");
}

inline double num(const json& j, const std::string& path, const char* key, double def) {
    if (!j.contains(key)) return def;
    const json& v = j.at(key);
    if (!v.is_number()) bad(path + "." + key, "expected a number");
    return v.get<double>();
}

inline std::int64_t integer(const json& j, const std::string& path, const char* key,
                            std::int64_t def) {
    if (!j.contains(key)) return def;
    const json& v = j.at(key);
    if (!v.is_number_integer()) bad(path + "." + key, "expected an integer");
    return v.get<std::int64_t>();
}

inline bool boolean(const json& j, const std::string& path, const char* key, bool def) {
    if (!j.contains(key)) return def;
    const json& v = j.at(key);
    if (!v.is_boolean()) bad(path + "." + key, "expected a boolean");
    return v.get<bool>();
}

inline std::string text(const json& j, const std::string& path, const char* key,
                        const std::string& def) {
    if (!j.contains(key)) return def;
    const json& v = j.at(key);
    if (!v.is_string()) bad(path + "." + key, "expected a string");
    return v.get<std::string>();
}

inline std::vector<double> num_list(const json& j, const std::string& path, const char* key,
                                    std::vector<double> def) {
    if (!j.contains(key)) return def;
    const json& v = j.at(key);
    if (!v.is_array()) bad(path + "." + key, "expected an array of numbers");
    std::vector<double> out;
    for (const auto& e : v) {
        if (!e.is_number()) bad(path + "." + key, "expected an array of numbers");
        out.push_back(e.get<double>());
    }
    return out;
}

inline std::vector<int> int_list(const json& j, const std::string& path, const char* key,
                                 std::vector<int> def) {
    if (!j.contains(key)) return def;
    const json& v = j.at(key);
    if (!v.is_array()) bad(path + "." + key, "expected an array of integers");
    std::vector<int> out;
    for (const auto& e : v) {
        if (!e.is_number_integer()) bad(path + "." + key, "expected an array of integers");
        out.push_back(e.get<int>());
    }
    return out;
}

inline NVSite parse_site(const json& j, const std::string& path) {
    expect_object(j, path);
    check_keys(j, path,
               {"id", "x", "y", "orientation_family", "lambda0", "lambda1", "t1_s", "t2_xy8_s",
                "rabi_hz", "nv_minus_init", "spin_init_fidelity"});
    NVSite s;
    s.id = static_cast<int>(integer(j, path, "id", 0));
    s.x = num(j, path, "x", 0.0);
    s.y = num(j, path, "y", 0.0);
    s.orientation_family = static_cast<int>(integer(j, path, "orientation_family", 0));
    s.lambda0 = num(j, path, "lambda0", s.lambda0);
    s.lambda1 = num(j, path, "lambda1", s.lambda1);
    s.t1_s = num(j, path, "t1_s", s.t1_s);
    s.t2_xy8_s = num(j, path, "t2_xy8_s", s.t2_xy8_s);
    s.rabi_hz = num(j, path, "rabi_hz", s.rabi_hz);
    s.nv_minus_init = num(j, path, "nv_minus_init", s.nv_minus_init);
    s.spin_init_fidelity = num(j, path, "spin_init_fidelity", s.spin_init_fidelity);
    s.validate();
    return s;
}

} // namespace cfg_detail

inline void RunConfig::validate() const {
    camera.validate();
    if (!(psf.sigma_px > 0.0))
        throw std::invalid_argument("config psf.sigma_px: must be > 0");
    bool needs_sites = experiment == ExperimentKind::Charge || experiment == ExperimentKind::Scc ||
                       experiment == ExperimentKind::Odmr || experiment == ExperimentKind::Rabi ||
                       experiment == ExperimentKind::T1;
    if (needs_sites && sites.empty())
        throw std::invalid_argument("config sites: at least one site required for '" +
                                    std::string(to_string(experiment)) + "' runs");
    std::set<int> ids;
    for (const auto& s : sites) {
        s.validate();
        if (!ids.insert(s.id).second)
            throw std::invalid_argument("config sites: duplicate id " + std::to_string(s.id));
    }
    if (frames.width == 0 || frames.height == 0)
        throw std::invalid_argument("config frames: width and height must be > 0");
}

inline RunConfig parse_config(const nlohmann::json& j) {
    using namespace cfg_detail;
    expect_object(j, "config");
    check_keys(j, "config",
               {"experiment", "seed", "threads", "out_dir", "frames", "camera", "psf", "sites",
                "odmr", "rabi", "t1", "scc", "driven", "spectroscopy", "holo", "sweep",
                "baseline"});

    RunConfig c;
    std::string kind = text(j, "config", "experiment", "charge");
    if (kind == "charge") c.experiment = ExperimentKind::Charge;
    else if (kind == "scc") c.experiment = ExperimentKind::Scc;
    else if (kind == "odmr") c.experiment = ExperimentKind::Odmr;
    else if (kind == "rabi") c.experiment = ExperimentKind::Rabi;
    else if (kind == "t1") c.experiment = ExperimentKind::T1;
    else if (kind == "driven") c.experiment = ExperimentKind::Driven;
    else if (kind == "spectroscopy") c.experiment = ExperimentKind::Spectroscopy;
    else cfg_detail::bad("config.experiment", "unknown experiment '" + kind + "'");

    c.seed = static_cast<std::uint64_t>(integer(j, "config", "seed", 1));
    c.threads = static_cast<int>(integer(j, "config", "threads", 1));
    c.out_dir = text(j, "config", "out_dir", "out");

    if (j.contains("frames")) {
        const auto& f = j.at("frames");
        expect_object(f, "config.frames");
        check_keys(f, "config.frames", {"width", "height", "count"});
        c.frames.width = static_cast<std::uint32_t>(integer(f, "config.frames", "width", 64));
        c.frames.height = static_cast<std::uint32_t>(integer(f, "config.frames", "height", 64));
        c.frames.count = static_cast<std::uint32_t>(integer(f, "config.frames", "count", 1000));
    }
    if (j.contains("camera")) {
        const auto& m = j.at("camera");
        expect_object(m, "config.camera");
        check_keys(m, "config.camera",
                   {"em_gain", "read_noise_adu", "bias_adu", "adu_threshold", "roi_n",
                    "exposure_s"});
        c.camera.em_gain = num(m, "config.camera", "em_gain", c.camera.em_gain);
        c.camera.read_noise_adu = num(m, "config.camera", "read_noise_adu", c.camera.read_noise_adu);
        c.camera.bias_adu = num(m, "config.camera", "bias_adu", c.camera.bias_adu);
        c.camera.adu_threshold = num(m, "config.camera", "adu_threshold", c.camera.adu_threshold);
        c.camera.roi_n = static_cast<int>(integer(m, "config.camera", "roi_n", c.camera.roi_n));
        c.camera.exposure_s = num(m, "config.camera", "exposure_s", c.camera.exposure_s);
    }
    if (j.contains("psf")) {
        const auto& p = j.at("psf");
        expect_object(p, "config.psf");
        check_keys(p, "config.psf", {"sigma_px"});
        c.psf.sigma_px = num(p, "config.psf", "sigma_px", c.psf.sigma_px);
    }
    if (j.contains("sites")) {
        const auto& arr = j.at("sites");
        if (!arr.is_array()) cfg_detail::bad("config.sites", "expected an array");
        int idx = 0;
        for (const auto& e : arr)
            c.sites.push_back(parse_site(e, "config.sites[" + std::to_string(idx++) + "]"));
    }
    if (j.contains("odmr")) {
        const auto& o = j.at("odmr");
        expect_object(o, "config.odmr");
        check_keys(o, "config.odmr",
                   {"f_center_hz", "f_span_hz", "n_points", "contrast", "linewidth_hz",
                    "site_scatter_hz", "base_rate", "hyperfine"});
        c.odmr.f_center_hz = num(o, "config.odmr", "f_center_hz", c.odmr.f_center_hz);
        c.odmr.f_span_hz = num(o, "config.odmr", "f_span_hz", c.odmr.f_span_hz);
        c.odmr.n_points = static_cast<int>(integer(o, "config.odmr", "n_points", c.odmr.n_points));
        c.odmr.contrast = num(o, "config.odmr", "contrast", c.odmr.contrast);
        c.odmr.linewidth_hz = num(o, "config.odmr", "linewidth_hz", c.odmr.linewidth_hz);
        c.odmr.site_scatter_hz = num(o, "config.odmr", "site_scatter_hz", c.odmr.site_scatter_hz);
        c.odmr.base_rate = num(o, "config.odmr", "base_rate", c.odmr.base_rate);
        c.odmr.hyperfine = boolean(o, "config.odmr", "hyperfine", c.odmr.hyperfine);
    }
    if (j.contains("rabi")) {
        const auto& r = j.at("rabi");
        expect_object(r, "config.rabi");
        check_keys(r, "config.rabi", {"t_stop_s", "n_points", "contrast", "decay_s", "base_rate"});
        c.rabi.t_stop_s = num(r, "config.rabi", "t_stop_s", c.rabi.t_stop_s);
        c.rabi.n_points = static_cast<int>(integer(r, "config.rabi", "n_points", c.rabi.n_points));
        c.rabi.contrast = num(r, "config.rabi", "contrast", c.rabi.contrast);
        c.rabi.decay_s = num(r, "config.rabi", "decay_s", c.rabi.decay_s);
        c.rabi.base_rate = num(r, "config.rabi", "base_rate", c.rabi.base_rate);
    }
    if (j.contains("t1")) {
        const auto& t = j.at("t1");
        expect_object(t, "config.t1");
        check_keys(t, "config.t1", {"t_start_s", "t_stop_s", "n_points", "contrast", "base_rate"});
        c.t1.t_start_s = num(t, "config.t1", "t_start_s", c.t1.t_start_s);
        c.t1.t_stop_s = num(t, "config.t1", "t_stop_s", c.t1.t_stop_s);
        c.t1.n_points = static_cast<int>(integer(t, "config.t1", "n_points", c.t1.n_points));
        c.t1.contrast = num(t, "config.t1", "contrast", c.t1.contrast);
        c.t1.base_rate = num(t, "config.t1", "base_rate", c.t1.base_rate);
    }
    if (j.contains("scc")) {
        const auto& s = j.at("scc");
        expect_object(s, "config.scc");
        check_keys(s, "config.scc", {"preset", "power_mw_per_nv", "t_ion_ns"});
        c.scc.preset = text(s, "config.scc", "preset", c.scc.preset);
        c.scc.power_mw_per_nv = num(s, "config.scc", "power_mw_per_nv", c.scc.power_mw_per_nv);
        c.scc.t_ion_ns = num(s, "config.scc", "t_ion_ns", c.scc.t_ion_ns);
    }
    if (j.contains("driven")) {
        const auto& d = j.at("driven");
        expect_object(d, "config.driven");
        check_keys(d, "config.driven",
                   {"theta_points", "shots_per_point", "sigma_r", "charge_mean",
                    "gain_noise_sigma", "opposite_sites"});
        c.driven.theta_points =
            static_cast<int>(integer(d, "config.driven", "theta_points", c.driven.theta_points));
        c.driven.shots_per_point =
            integer(d, "config.driven", "shots_per_point", c.driven.shots_per_point);
        c.driven.sigma_r = num(d, "config.driven", "sigma_r", c.driven.sigma_r);
        c.driven.charge_mean = num(d, "config.driven", "charge_mean", c.driven.charge_mean);
        c.driven.gain_noise_sigma =
            num(d, "config.driven", "gain_noise_sigma", c.driven.gain_noise_sigma);
        c.driven.opposite_sites = int_list(d, "config.driven", "opposite_sites", {});
    }
    if (j.contains("spectroscopy")) {
        const auto& s = j.at("spectroscopy");
        expect_object(s, "config.spectroscopy");
        check_keys(s, "config.spectroscopy",
                   {"tau_ns", "n_pulses", "b_amp_t", "f_start_hz", "f_stop_hz", "n_freqs",
                    "shots_per_freq", "sigma_r", "charge_mean", "opposite_sites"});
        c.spectroscopy.tau_ns = num(s, "config.spectroscopy", "tau_ns", c.spectroscopy.tau_ns);
        c.spectroscopy.n_pulses =
            static_cast<int>(integer(s, "config.spectroscopy", "n_pulses", c.spectroscopy.n_pulses));
        c.spectroscopy.b_amp_t = num(s, "config.spectroscopy", "b_amp_t", c.spectroscopy.b_amp_t);
        c.spectroscopy.f_start_hz =
            num(s, "config.spectroscopy", "f_start_hz", c.spectroscopy.f_start_hz);
        c.spectroscopy.f_stop_hz =
            num(s, "config.spectroscopy", "f_stop_hz", c.spectroscopy.f_stop_hz);
        c.spectroscopy.n_freqs =
            static_cast<int>(integer(s, "config.spectroscopy", "n_freqs", c.spectroscopy.n_freqs));
        c.spectroscopy.shots_per_freq =
            integer(s, "config.spectroscopy", "shots_per_freq", c.spectroscopy.shots_per_freq);
        c.spectroscopy.sigma_r = num(s, "config.spectroscopy", "sigma_r", c.spectroscopy.sigma_r);
        c.spectroscopy.charge_mean =
            num(s, "config.spectroscopy", "charge_mean", c.spectroscopy.charge_mean);
        c.spectroscopy.opposite_sites = int_list(s, "config.spectroscopy", "opposite_sites", {});
    }
    if (j.contains("holo")) {
        const auto& h = j.at("holo");
        expect_object(h, "config.holo");
        check_keys(h, "config.holo", {"grid", "iterations", "targets", "n_random", "random_extent"});
        c.holo.grid = static_cast<int>(integer(h, "config.holo", "grid", c.holo.grid));
        c.holo.iterations =
            static_cast<int>(integer(h, "config.holo", "iterations", c.holo.iterations));
        c.holo.n_random = static_cast<int>(integer(h, "config.holo", "n_random", c.holo.n_random));
        c.holo.random_extent = num(h, "config.holo", "random_extent", c.holo.random_extent);
        if (h.contains("targets")) {
            const auto& arr = h.at("targets");
            if (!arr.is_array()) cfg_detail::bad("config.holo.targets", "expected an array");
            int idx = 0;
            for (const auto& e : arr) {
                std::string p = "config.holo.targets[" + std::to_string(idx++) + "]";
                expect_object(e, p);
                check_keys(e, p, {"kx", "ky", "amplitude"});
                HoloTarget t;
                t.kx = num(e, p, "kx", 0.0);
                t.ky = num(e, p, "ky", 0.0);
                t.amplitude = num(e, p, "amplitude", 1.0);
                c.holo.targets.push_back(t);
            }
        }
    }
    if (j.contains("sweep")) {
        const auto& s = j.at("sweep");
        expect_object(s, "config.sweep");
        check_keys(s, "config.sweep",
                   {"kind", "preset", "powers_mw", "t_min_ns", "t_max_ns", "n_t", "total_power_mw",
                    "n_sites_list", "grid", "n_spots", "iterations"});
        c.sweep.kind = text(s, "config.sweep", "kind", c.sweep.kind);
        c.sweep.preset = text(s, "config.sweep", "preset", c.sweep.preset);
        c.sweep.powers_mw = num_list(s, "config.sweep", "powers_mw", c.sweep.powers_mw);
        c.sweep.t_min_ns = num(s, "config.sweep", "t_min_ns", c.sweep.t_min_ns);
        c.sweep.t_max_ns = num(s, "config.sweep", "t_max_ns", c.sweep.t_max_ns);
        c.sweep.n_t = static_cast<int>(integer(s, "config.sweep", "n_t", c.sweep.n_t));
        c.sweep.total_power_mw = num(s, "config.sweep", "total_power_mw", c.sweep.total_power_mw);
        c.sweep.n_sites_list = int_list(s, "config.sweep", "n_sites_list", c.sweep.n_sites_list);
        c.sweep.grid = static_cast<int>(integer(s, "config.sweep", "grid", c.sweep.grid));
        c.sweep.n_spots = static_cast<int>(integer(s, "config.sweep", "n_spots", c.sweep.n_spots));
        c.sweep.iterations =
            static_cast<int>(integer(s, "config.sweep", "iterations", c.sweep.iterations));
        if (c.sweep.kind != "scc_opt" && c.sweep.kind != "multiplex_scaling" &&
            c.sweep.kind != "wgs_bench")
            cfg_detail::bad("config.sweep.kind", "unknown kind '" + c.sweep.kind + "'");
    }
    if (j.contains("baseline")) {
        const auto& b = j.at("baseline");
        expect_object(b, "config.baseline");
        check_keys(b, "config.baseline", {"n_sites", "shots", "mu", "sigma_n"});
        c.baseline.n_sites =
            static_cast<int>(integer(b, "config.baseline", "n_sites", c.baseline.n_sites));
        c.baseline.shots = integer(b, "config.baseline", "shots", c.baseline.shots);
        c.baseline.mu = num(b, "config.baseline", "mu", c.baseline.mu);
        c.baseline.sigma_n = num(b, "config.baseline", "sigma_n", c.baseline.sigma_n);
    }

    c.validate();
    return c;
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("load_config: cannot open " + path);
    nlohmann::json j;
    try {
        f >> j;
    } catch (const nlohmann::json::parse_error& e) {
        throw std::runtime_error("load_config: " + path + ": " + e.what());
    }
    return parse_config(j);
}

} // namespace nvmx
