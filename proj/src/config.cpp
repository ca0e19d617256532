#include "sphw/config.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

namespace sphw {

namespace {

using nlohmann::json;

// Maps field paths back to source lines for diagnostics.
class Locator {
public:
    Locator(const std::string& text, std::string source) : text_(text), source_(std::move(source)) {}

    std::string at_offset(std::size_t offset) const {
        const std::size_t end = std::min(offset, text_.size());
        const auto line = 1 + std::count(text_.begin(), text_.begin() + static_cast<long>(end), '\n');
        return source_ + ":" + std::to_string(line);
    }

    /// Line of the last key in a dotted path, searched after its parents.
    std::string field(const std::string& path) const {
        std::size_t pos = 0;
        std::stringstream ss(path);
        std::string part;
        bool found = true;
        while (std::getline(ss, part, '.')) {
            const std::size_t hit = text_.find("\"" + part + "\"", pos);
            if (hit == std::string::npos) {
                found = false;
                break;
            }
            pos = hit;
        }
        return found ? at_offset(pos) : source_;
    }

    const std::string& source() const { return source_; }

private:
    const std::string& text_;
    std::string source_;
};

class Reader {
public:
    Reader(const json& obj, const Locator& loc, std::string prefix) : obj_(obj), loc_(loc), prefix_(std::move(prefix)) {
        if (!obj_.is_object()) fail("", "expected an object");
    }

    [[noreturn]] void fail(const std::string& key, const std::string& what) const {
        const std::string path = key.empty() ? (prefix_.empty() ? "" : prefix_.substr(0, prefix_.size() - 1))
                                             : prefix_ + key;
        throw ConfigError(path.empty() ? loc_.source() : loc_.field(path), path, what);
    }

    void reject_unknown(std::initializer_list<const char*> allowed) const {
        const std::set<std::string> ok(allowed.begin(), allowed.end());
        for (const auto& [key, value] : obj_.items()) {
            if (!ok.count(key)) fail(key, "unknown key");
        }
    }

    bool has(const std::string& key) const { return obj_.contains(key); }
    const json& raw(const std::string& key) const { return obj_.at(key); }

    double number(const std::string& key, double fallback) const {
        if (!has(key)) return fallback;
        const json& v = raw(key);
        if (!v.is_number()) fail(key, "expected a number");
        const double d = v.get<double>();
        if (!std::isfinite(d)) fail(key, "must be finite");
        return d;
    }

    long long integer(const std::string& key, long long fallback) const {
        if (!has(key)) return fallback;
        const json& v = raw(key);
        if (v.is_number_integer()) return v.get<long long>();
        if (v.is_number_float()) {
            const double d = v.get<double>();
            if (d == std::floor(d) && std::abs(d) < 9e15) return static_cast<long long>(d);
        }
        fail(key, "expected an integer");
    }

    bool boolean(const std::string& key, bool fallback) const {
        if (!has(key)) return fallback;
        if (!raw(key).is_boolean()) fail(key, "expected true or false");
        return raw(key).get<bool>();
    }

    std::string string(const std::string& key, const std::string& fallback) const {
        if (!has(key)) return fallback;
        if (!raw(key).is_string()) fail(key, "expected a string");
        return raw(key).get<std::string>();
    }

    Reader child(const std::string& key) const { return Reader(raw(key), loc_, prefix_ + key + "."); }

private:
    const json& obj_;
    const Locator& loc_;
    std::string prefix_;
};

RunConfig parse_object(const json& doc, const Locator& loc) {
    const Reader r(doc, loc, "");
    r.reject_unknown({"family", "gamma", "k_eos", "theta", "h", "resolutions", "dt", "t_end", "snapshots", "eta",
                      "morse", "init", "seed", "full_scale", "output_dir", "workers", "parallel_runs",
                      "verbosity"});
    if (!r.has("family")) throw ConfigError(loc.source(), "family", "required");
    Family family;
    try {
        family = family_from_string(r.string("family", ""));
    } catch (const InvalidParameter&) {
        r.fail("family", "must be one of expansion_1d, rotating_square_2d, morse_2d");
    }

    RunConfig cfg;
    ExperimentPlan& p = cfg.plan;
    p = ExperimentPlan::defaults(family);

    p.gamma = r.number("gamma", p.gamma);
    if (!(p.gamma > 0.0)) r.fail("gamma", "must be positive");
    if (p.is_hydro() && p.gamma < 1.0) r.fail("gamma", "must be at least 1");
    p.k_eos = r.number("k_eos", p.k_eos);
    if (!(p.k_eos > 0.0)) r.fail("k_eos", "must be positive");
    const long long theta = r.integer("theta", p.theta);
    if (theta != 0 && theta != 1) r.fail("theta", "must be 0 or 1");
    p.theta = static_cast<int>(theta);

    if (r.has("h")) {
        const Reader h = r.child("h");
        h.reject_unknown({"mode", "value"});
        const std::string mode = h.string("mode", "fixed");
        if (mode != "fixed" && mode != "scaled") h.fail("mode", "must be 'fixed' or 'scaled'");
        const double value = h.number("value", mode == "fixed" ? 1.0 : 1.5);
        if (!(value > 0.0)) h.fail("value", "must be positive");
        p.h_mode = mode == "fixed" ? SmoothingLength::fixed(value) : SmoothingLength::scaled(value);
    }

    p.full_scale = r.boolean("full_scale", p.full_scale);
    if (r.has("resolutions")) {
        const json& res = r.raw("resolutions");
        if (!res.is_array() || res.size() < 2) r.fail("resolutions", "expected an array of at least two integers");
        p.resolutions.clear();
        for (const json& v : res) {
            if (!v.is_number_integer()) r.fail("resolutions", "entries must be integers");
            p.resolutions.push_back(v.get<int>());
        }
    }
    const int cap = p.full_scale ? full_scale_cap(family) : desk_scale_cap(family);
    for (std::size_t i = 0; i < p.resolutions.size(); ++i) {
        if (p.resolutions[i] < 1) r.fail("resolutions", "entries must be at least 1");
        if (i > 0 && p.resolutions[i] <= p.resolutions[i - 1]) r.fail("resolutions", "must be strictly increasing");
        if (p.resolutions[i] > cap) {
            r.fail("resolutions", "entry " + std::to_string(p.resolutions[i]) + " exceeds the cap " +
                                      std::to_string(cap) + (p.full_scale ? "" : "; set full_scale to raise it"));
        }
    }

    p.dt = r.number("dt", p.dt);
    if (!(p.dt > 0.0)) r.fail("dt", "must be positive");
    p.t_end = r.number("t_end", p.t_end);
    if (!(p.t_end >= 0.0)) r.fail("t_end", "must be nonnegative");
    const long long snaps = r.integer("snapshots", static_cast<long long>(p.snapshots));
    if (snaps < 2) r.fail("snapshots", "must be at least 2");
    p.snapshots = static_cast<std::size_t>(snaps);
    p.eta = r.number("eta", p.eta);
    if (!(p.eta >= 0.0)) r.fail("eta", "must be nonnegative");

    if (r.has("morse")) {
        const Reader m = r.child("morse");
        m.reject_unknown({"c_a", "c_r", "l_a", "l_r", "r_cut"});
        p.morse.c_a = m.number("c_a", p.morse.c_a);
        p.morse.c_r = m.number("c_r", p.morse.c_r);
        p.morse.l_a = m.number("l_a", p.morse.l_a);
        p.morse.l_r = m.number("l_r", p.morse.l_r);
        p.morse.r_cut = m.number("r_cut", p.morse.r_cut);
        for (const char* key : {"c_a", "c_r", "l_a", "l_r", "r_cut"}) {
            if (!(m.number(key, 1.0) > 0.0)) m.fail(key, "must be positive");
        }
    }
    if (r.has("init")) {
        const Reader i = r.child("init");
        i.reject_unknown({"mode"});
        const std::string mode = i.string("mode", "equipartition");
        if (mode != "equipartition" && mode != "iid") i.fail("mode", "must be 'equipartition' or 'iid'");
        p.init_mode = mode == "iid" ? InitMode::Iid : InitMode::Equipartition;
    }
    const long long seed = r.integer("seed", 0);
    if (seed < 0) r.fail("seed", "must be nonnegative");
    p.seed = static_cast<std::uint64_t>(seed);

    cfg.output_dir = r.string("output_dir", cfg.output_dir.string());
    const long long workers = r.integer("workers", cfg.workers);
    if (workers < 1 || workers > 1024) r.fail("workers", "must be between 1 and 1024");
    cfg.workers = static_cast<int>(workers);
    const long long par = r.integer("parallel_runs", cfg.parallel_runs);
    if (par < 1 || par > 1024) r.fail("parallel_runs", "must be between 1 and 1024");
    cfg.parallel_runs = static_cast<int>(par);
    cfg.verbosity = r.string("verbosity", cfg.verbosity);
    static const std::set<std::string> levels{"trace", "debug", "info", "warn", "error", "off"};
    if (!levels.count(cfg.verbosity)) r.fail("verbosity", "must be one of trace, debug, info, warn, error, off");

    try {
        p.validate();
    } catch (const InvalidParameter& e) {
        throw ConfigError(loc.source(), "", e.what());
    }
    return cfg;
}

} // namespace

RunConfig parse_run_config(const std::string& text, const std::string& source) {
    const Locator loc(text, source);
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(loc.at_offset(e.byte > 0 ? e.byte - 1 : 0), "", "invalid JSON: " + std::string(e.what()));
    }
    if (doc.is_object() && doc.contains("config") && doc.contains("runs")) doc = doc.at("config");
    RunConfig cfg = parse_object(doc, loc);
    if (const char* dir = std::getenv("SPHW_OUTPUT_DIR"); dir && *dir) cfg.output_dir = dir;
    return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError(path.string(), "", "cannot open file");
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_run_config(ss.str(), path.string());
}

std::string to_json(const RunConfig& cfg) {
    const ExperimentPlan& p = cfg.plan;
    json j;
    j["family"] = to_string(p.family);
    j["gamma"] = p.gamma;
    j["k_eos"] = p.k_eos;
    j["theta"] = p.theta;
    j["h"] = {{"mode", p.h_mode.kind == SmoothingLength::Kind::Fixed ? "fixed" : "scaled"},
              {"value", p.h_mode.value}};
    j["resolutions"] = p.resolutions;
    j["dt"] = p.dt;
    j["t_end"] = p.t_end;
    j["snapshots"] = p.snapshots;
    j["eta"] = p.eta;
    j["morse"] = {{"c_a", p.morse.c_a}, {"c_r", p.morse.c_r}, {"l_a", p.morse.l_a},
                  {"l_r", p.morse.l_r}, {"r_cut", p.morse.r_cut}};
    j["init"] = {{"mode", p.init_mode == InitMode::Iid ? "iid" : "equipartition"}};
    j["seed"] = p.seed;
    j["full_scale"] = p.full_scale;
    j["output_dir"] = cfg.output_dir.string();
    j["workers"] = cfg.workers;
    j["parallel_runs"] = cfg.parallel_runs;
    j["verbosity"] = cfg.verbosity;
    return j.dump(2);
}

} // namespace sphw
