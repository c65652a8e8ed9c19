#pragma once

#include "flowspectra/expression.hpp"
#include "flowspectra/flow.hpp"
#include "flowspectra/monotonicity.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>

namespace flowspectra {

struct GeometryConfig {
    /// polygon | icosphere | ellipsoid | perturbed_icosphere | off | curve
    std::string type = "icosphere";
    double radius = 1.0;
    int vertices = 256;
    int subdivision = 4;
    double a = 1.0;
    double b = 1.0;
    double c = 1.0;
    double amplitude = 0.05;
    std::string file;
};

struct WeightConfig {
    /// Ambient expression sampled once at t = 0; ignored when `file` is set.
    std::string phi = "0";
    std::string file;
};

struct VerifyConfig {
    DownExponent down_exponent = DownExponent::AsWritten;
    double variation_tolerance = 0.05;
    double variation_floor = 0.0;
    double spread_tolerance = 1e-2;
    double identity_tolerance = 0.05;
};

struct ExperimentConfig {
    std::string source;
    GeometryConfig geometry;
    SpeedLaw law = SpeedLaw::mcf();
    WeightConfig weight;
    EvolveOptions evolve;
    std::string output_dir = "out";
    std::uint64_t seed = 1;
    int block_size = 8;
    double eigen_tolerance = 1e-8;
    VerifyConfig verify;
};

namespace detail {

/// Line of `key` inside `[section]`, for diagnostics; 0 when not found.
inline int find_key_line(const std::string& text, const std::string& section, const std::string& key)
{
    std::istringstream in(text);
    std::string line;
    std::string current;
    int no = 0;
    while (std::getline(in, line)) {
        ++no;
        const auto b = line.find_first_not_of(" \t");
        if (b == std::string::npos || line[b] == ';' || line[b] == '#') {
            continue;
        }
        if (line[b] == '[') {
            const auto e = line.find(']', b);
            current = line.substr(b + 1, e == std::string::npos ? std::string::npos : e - b - 1);
            continue;
        }
        const auto eq = line.find('=', b);
        if (eq == std::string::npos) {
            continue;
        }
        std::string k = line.substr(b, eq - b);
        k.erase(k.find_last_not_of(" \t") + 1);
        if (current == section && k == key) {
            return no;
        }
    }
    return 0;
}

class ConfigReader {
public:
    ConfigReader(std::string text, std::string source)
        : text_(std::move(text))
        , source_(std::move(source))
    {
        std::istringstream in(text_);
        try {
            boost::property_tree::ini_parser::read_ini(in, tree_);
        } catch (const boost::property_tree::ini_parser_error& e) {
            throw ConfigError(source_ + ":" + std::to_string(e.line()) + ": " + e.message());
        }
        for (const auto& [section, body] : tree_) {
            if (body.empty() && !body.data().empty()) {
                throw ConfigError(source_ + ":" + std::to_string(find_key_line(text_, "", section)) +
                                  ": key '" + section + "' outside of a section");
            }
        }
    }

    [[noreturn]] void fail(const std::string& section, const std::string& key,
                           const std::string& msg) const
    {
        const int line = find_key_line(text_, section, key);
        std::string where = source_;
        if (line > 0) {
            where += ":" + std::to_string(line);
        }
        throw ConfigError(where + ": " + section + "." + key + ": " + msg);
    }

    bool has(const std::string& section, const std::string& key) const
    {
        return static_cast<bool>(tree_.get_child_optional(path(section, key)));
    }

    std::string get_string(const std::string& section, const std::string& key,
                           const std::string& fallback)
    {
        used_.insert(section + "." + key);
        const auto v = tree_.get_optional<std::string>(path(section, key));
        return v ? *v : fallback;
    }

    double get_double(const std::string& section, const std::string& key, double fallback)
    {
        if (!has(section, key)) {
            used_.insert(section + "." + key);
            return fallback;
        }
        const std::string raw = get_string(section, key, "");
        std::size_t used = 0;
        double x = 0.0;
        try {
            x = std::stod(raw, &used);
        } catch (const std::exception&) {
            fail(section, key, "expected a number, got '" + raw + "'");
        }
        if (used != raw.size() || !std::isfinite(x)) {
            fail(section, key, "expected a finite number, got '" + raw + "'");
        }
        return x;
    }

    long get_integer(const std::string& section, const std::string& key, long fallback)
    {
        if (!has(section, key)) {
            used_.insert(section + "." + key);
            return fallback;
        }
        const std::string raw = get_string(section, key, "");
        std::size_t used = 0;
        long x = 0;
        try {
            x = std::stol(raw, &used);
        } catch (const std::exception&) {
            fail(section, key, "expected an integer, got '" + raw + "'");
        }
        if (used != raw.size()) {
            fail(section, key, "expected an integer, got '" + raw + "'");
        }
        return x;
    }

    /// Any key present in the file but never read is reported as unknown.
    void reject_unknown() const
    {
        static const std::set<std::string> sections = {"geometry", "flow", "weight", "run", "verify"};
        for (const auto& [section, body] : tree_) {
            if (!sections.count(section)) {
                throw ConfigError(source_ + ": unknown section [" + section + "]");
            }
            for (const auto& [key, value] : body) {
                if (!used_.count(section + "." + key)) {
                    fail(section, key, "unknown key");
                }
            }
        }
    }

private:
    static boost::property_tree::ptree::path_type path(const std::string& section, const std::string& key)
    {
        return boost::property_tree::ptree::path_type(section + '\x1f' + key, '\x1f');
    }

    std::string text_;
    std::string source_;
    boost::property_tree::ptree tree_;
    std::set<std::string> used_;
};

} // namespace detail

/// Parse INI text. Relative file paths resolve against `base_dir`.
inline ExperimentConfig parse_config(const std::string& text, const std::string& source = "config",
                                     const std::filesystem::path& base_dir = {})
{
    detail::ConfigReader r(text, source);
    ExperimentConfig cfg;
    cfg.source = source;
    auto resolve = [&](const std::string& p) {
        if (p.empty()) {
            return p;
        }
        std::filesystem::path path(p);
        return (path.is_absolute() ? path : base_dir / path).lexically_normal().string();
    };

    auto& g = cfg.geometry;
    g.type = r.get_string("geometry", "type", g.type);
    g.radius = r.get_double("geometry", "radius", g.radius);
    g.vertices = static_cast<int>(r.get_integer("geometry", "vertices", g.vertices));
    g.subdivision = static_cast<int>(r.get_integer("geometry", "subdivision", g.subdivision));
    g.a = r.get_double("geometry", "a", g.a);
    g.b = r.get_double("geometry", "b", g.b);
    g.c = r.get_double("geometry", "c", g.c);
    g.amplitude = r.get_double("geometry", "amplitude", g.amplitude);
    g.file = resolve(r.get_string("geometry", "file", ""));
    static const std::set<std::string> types = {"polygon", "icosphere",  "ellipsoid",
                                                "perturbed_icosphere", "off", "curve"};
    if (!types.count(g.type)) {
        r.fail("geometry", "type", "unknown geometry '" + g.type + "'");
    }
    if ((g.type == "off" || g.type == "curve") && g.file.empty()) {
        r.fail("geometry", "file", "required for type " + g.type);
    }
    if (!g.file.empty() && !std::filesystem::exists(g.file)) {
        r.fail("geometry", "file", "no such file " + g.file);
    }
    if (!(g.radius > 0.0)) {
        r.fail("geometry", "radius", "must be positive");
    }
    if (g.vertices < 3) {
        r.fail("geometry", "vertices", "must be at least 3");
    }
    if (g.subdivision < 0 || g.subdivision > 7) {
        r.fail("geometry", "subdivision", "must lie in [0, 7]");
    }
    if (!(g.a > 0.0 && g.b > 0.0 && g.c > 0.0)) {
        r.fail("geometry", "a", "semi-axes must be positive");
    }

    const std::string law = r.get_string("flow", "law", "mcf");
    const long k = r.get_integer("flow", "k", 1);
    if (law == "mcf") {
        cfg.law = SpeedLaw::mcf();
    } else if (law == "volume_preserving") {
        cfg.law = SpeedLaw::volume_preserving();
    } else if (law == "squared_volume_preserving") {
        cfg.law = SpeedLaw::squared_volume_preserving();
    } else if (law == "power") {
        if (k < 1) {
            r.fail("flow", "k", "must be a positive integer");
        }
        cfg.law = SpeedLaw::power(static_cast<int>(k));
    } else {
        r.fail("flow", "law", "unknown law '" + law + "'");
    }
    auto& ev = cfg.evolve;
    if (!r.has("flow", "t_end")) {
        r.fail("flow", "t_end", "missing");
    }
    ev.t_end = r.get_double("flow", "t_end", 0.0);
    ev.cfl = r.get_double("flow", "cfl", ev.cfl);
    ev.curvature_ceiling_factor = r.get_double("flow", "curvature_ceiling", ev.curvature_ceiling_factor);
    ev.dt_floor = r.get_double("flow", "dt_floor", ev.dt_floor);
    ev.edge_ratio_floor = r.get_double("flow", "edge_ratio_floor", ev.edge_ratio_floor);
    const long max_steps = r.get_integer("flow", "max_steps", static_cast<long>(ev.max_steps));
    if (!(ev.t_end > 0.0)) {
        r.fail("flow", "t_end", "must be positive");
    }
    if (!(ev.cfl > 0.0 && ev.cfl <= 1.0)) {
        r.fail("flow", "cfl", "must lie in (0, 1]");
    }
    if (!(ev.curvature_ceiling_factor > 0.0)) {
        r.fail("flow", "curvature_ceiling", "must be positive");
    }
    if (!(ev.dt_floor > 0.0)) {
        r.fail("flow", "dt_floor", "must be positive");
    }
    if (!(ev.edge_ratio_floor >= 0.0 && ev.edge_ratio_floor < 1.0)) {
        r.fail("flow", "edge_ratio_floor", "must lie in [0, 1)");
    }
    if (max_steps < 1) {
        r.fail("flow", "max_steps", "must be at least 1");
    }
    ev.max_steps = static_cast<std::uint64_t>(max_steps);

    cfg.weight.phi = r.get_string("weight", "phi", cfg.weight.phi);
    cfg.weight.file = resolve(r.get_string("weight", "file", ""));
    if (r.has("weight", "phi") && r.has("weight", "file")) {
        r.fail("weight", "file", "give either phi or file, not both");
    }
    if (!cfg.weight.file.empty() && !std::filesystem::exists(cfg.weight.file)) {
        r.fail("weight", "file", "no such file " + cfg.weight.file);
    }
    try {
        Expression check(cfg.weight.phi);
    } catch (const ConfigError& e) {
        r.fail("weight", "phi", e.what());
    }

    const long cadence = r.get_integer("run", "cadence", 1);
    if (cadence < 1) {
        r.fail("run", "cadence", "must be at least 1");
    }
    ev.cadence = static_cast<int>(cadence);
    cfg.output_dir = resolve(r.get_string("run", "output", cfg.output_dir));
    const long seed = r.get_integer("run", "seed", 1);
    if (seed < 0) {
        r.fail("run", "seed", "must be non-negative");
    }
    cfg.seed = static_cast<std::uint64_t>(seed);
    cfg.block_size = static_cast<int>(r.get_integer("run", "block_size", cfg.block_size));
    if (cfg.block_size < 1) {
        r.fail("run", "block_size", "must be at least 1");
    }
    cfg.eigen_tolerance = r.get_double("run", "eigen_tolerance", cfg.eigen_tolerance);
    if (!(cfg.eigen_tolerance > 0.0)) {
        r.fail("run", "eigen_tolerance", "must be positive");
    }

    auto& v = cfg.verify;
    const std::string down = r.get_string("verify", "down_exponent", "as_written");
    if (down == "as_written") {
        v.down_exponent = DownExponent::AsWritten;
    } else if (down == "symmetric") {
        v.down_exponent = DownExponent::Symmetric;
    } else {
        r.fail("verify", "down_exponent", "expected as_written or symmetric");
    }
    v.variation_tolerance = r.get_double("verify", "variation_tolerance", v.variation_tolerance);
    v.variation_floor = r.get_double("verify", "variation_floor", v.variation_floor);
    v.spread_tolerance = r.get_double("verify", "spread_tolerance", v.spread_tolerance);
    v.identity_tolerance = r.get_double("verify", "identity_tolerance", v.identity_tolerance);
    if (!(v.variation_tolerance > 0.0) || !(v.identity_tolerance > 0.0)) {
        r.fail("verify", "variation_tolerance", "tolerances must be positive");
    }
    if (v.variation_floor < 0.0 || v.spread_tolerance < 0.0) {
        r.fail("verify", "variation_floor", "floors must be non-negative");
    }

    r.reject_unknown();
    return cfg;
}

inline ExperimentConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open config " + path);
    }
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str(), path, std::filesystem::path(path).parent_path());
}

} // namespace flowspectra
