#pragma once

#include "flowspectra/monotonicity.hpp"

#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>
#include <string>

namespace flowspectra {

/// 17 significant digits, enough to round-trip through strtod. Non-finite
/// values print as empty fields.
inline std::string format_number(double x)
{
    if (!std::isfinite(x)) {
        return {};
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

inline std::string format_number(const std::optional<double>& x)
{
    return x ? format_number(*x) : std::string{};
}

namespace detail {

inline std::ifstream open_input(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw Error("cannot open " + path);
    }
    return in;
}

inline std::ofstream open_output(const std::string& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw Error("cannot write " + path);
    }
    return out;
}

inline std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) {
        return {};
    }
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_csv(const std::string& line)
{
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) {
        out.push_back(trim(cell));
    }
    if (!line.empty() && line.back() == ',') {
        out.emplace_back();
    }
    return out;
}

inline double parse_double(const std::string& s, const std::string& where)
{
    std::size_t used = 0;
    double x = 0.0;
    try {
        x = std::stod(s, &used);
    } catch (const std::exception&) {
        throw Error(where + ": not a number: '" + s + "'");
    }
    if (used != s.size()) {
        throw Error(where + ": trailing characters in '" + s + "'");
    }
    return x;
}

/// Next line that is neither blank nor a '#' comment.
inline bool next_content_line(std::istream& in, std::string& line, int& line_no)
{
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) {
            line.erase(hash);
        }
        line = trim(line);
        if (!line.empty()) {
            return true;
        }
    }
    return false;
}

} // namespace detail

// ---------------------------------------------------------------------------
// Meshes

inline SurfaceMesh read_off(std::istream& in, const std::string& name = "OFF")
{
    std::string line;
    int line_no = 0;
    auto fail = [&](const std::string& msg) {
        throw Error(name + ":" + std::to_string(line_no) + ": " + msg);
    };
    if (!detail::next_content_line(in, line, line_no)) {
        fail("empty file");
    }
    std::string header = line;
    std::string rest;
    if (header.rfind("OFF", 0) != 0) {
        fail("missing OFF header");
    }
    rest = detail::trim(header.substr(3));
    if (rest.empty() && !detail::next_content_line(in, rest, line_no)) {
        fail("missing counts line");
    }
    long nv = -1;
    long nf = -1;
    long ne = 0;
    {
        std::istringstream ss(rest);
        if (!(ss >> nv >> nf) || nv < 0 || nf < 0) {
            fail("bad counts line");
        }
        ss >> ne;
    }
    std::vector<Eigen::Vector3d> vertices(static_cast<std::size_t>(nv));
    for (auto& p : vertices) {
        if (!detail::next_content_line(in, line, line_no)) {
            fail("unexpected end of vertex list");
        }
        std::istringstream ss(line);
        if (!(ss >> p.x() >> p.y() >> p.z())) {
            fail("bad vertex");
        }
    }
    std::vector<std::array<Index, 3>> faces(static_cast<std::size_t>(nf));
    for (auto& f : faces) {
        if (!detail::next_content_line(in, line, line_no)) {
            fail("unexpected end of face list");
        }
        std::istringstream ss(line);
        long k = 0;
        long a = 0;
        long b = 0;
        long c = 0;
        if (!(ss >> k >> a >> b >> c)) {
            fail("bad face");
        }
        if (k != 3) {
            fail("only triangles are supported");
        }
        for (long v : {a, b, c}) {
            if (v < 0 || v >= nv) {
                fail("face index out of range");
            }
        }
        f = {static_cast<Index>(a), static_cast<Index>(b), static_cast<Index>(c)};
    }
    return SurfaceMesh(std::move(vertices), std::move(faces));
}

inline SurfaceMesh read_off(const std::string& path)
{
    auto in = detail::open_input(path);
    return read_off(in, path);
}

inline void write_off(std::ostream& out, const SurfaceMesh& mesh)
{
    out << "OFF\n" << mesh.num_vertices() << ' ' << mesh.elements().size() << " 0\n";
    for (const auto& p : mesh.vertices()) {
        out << format_number(p.x()) << ' ' << format_number(p.y()) << ' ' << format_number(p.z())
            << '\n';
    }
    for (const auto& t : mesh.elements()) {
        out << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
    }
}

inline void write_off(const std::string& path, const SurfaceMesh& mesh)
{
    auto out = detail::open_output(path);
    write_off(out, mesh);
}

/// Closed polygon, one "x,y" row per vertex; an optional "x,y" header is skipped.
inline CurveMesh read_curve_csv(std::istream& in, const std::string& name = "curve")
{
    std::string line;
    int line_no = 0;
    std::vector<Eigen::Vector2d> pts;
    while (detail::next_content_line(in, line, line_no)) {
        const auto cells = detail::split_csv(line);
        const std::string where = name + ":" + std::to_string(line_no);
        if (pts.empty() && cells.size() == 2 && cells[0] == "x" && cells[1] == "y") {
            continue;
        }
        if (cells.size() != 2) {
            throw Error(where + ": expected two columns x,y");
        }
        pts.emplace_back(detail::parse_double(cells[0], where), detail::parse_double(cells[1], where));
    }
    return CurveMesh(std::move(pts));
}

inline CurveMesh read_curve_csv(const std::string& path)
{
    auto in = detail::open_input(path);
    return read_curve_csv(in, path);
}

inline void write_curve_csv(std::ostream& out, const CurveMesh& mesh)
{
    out << "x,y\n";
    for (const auto& p : mesh.vertices()) {
        out << format_number(p.x()) << ',' << format_number(p.y()) << '\n';
    }
}

inline void write_curve_csv(const std::string& path, const CurveMesh& mesh)
{
    auto out = detail::open_output(path);
    write_curve_csv(out, mesh);
}

/// One value per line (optionally headed "phi").
inline std::vector<double> read_vertex_values(const std::string& path)
{
    auto in = detail::open_input(path);
    std::string line;
    int line_no = 0;
    std::vector<double> out;
    while (detail::next_content_line(in, line, line_no)) {
        if (out.empty() && line == "phi") {
            continue;
        }
        out.push_back(detail::parse_double(line, path + ":" + std::to_string(line_no)));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Traces

inline const std::vector<std::string>& trace_columns()
{
    static const std::vector<std::string> cols = {
        "t",      "dt",      "area",          "volume", "H_min", "H_max",
        "eps_star", "lambda", "rhs_variation", "q_up",   "q_down"};
    return cols;
}

inline void write_trace_csv(std::ostream& out, const FlowTrace& trace)
{
    const auto& cols = trace_columns();
    for (std::size_t i = 0; i < cols.size(); ++i) {
        out << (i ? "," : "") << cols[i];
    }
    out << '\n';
    for (const auto& r : trace.rows) {
        std::optional<double> lambda;
        std::optional<double> rhs;
        if (r.spectral) {
            lambda = r.spectral->lambda;
            rhs = r.spectral->rhs_variation;
        }
        out << format_number(r.t) << ',' << format_number(r.dt) << ',' << format_number(r.area)
            << ',' << format_number(r.volume) << ',' << format_number(r.h_min) << ','
            << format_number(r.h_max) << ',' << format_number(r.eps_star) << ','
            << format_number(lambda) << ',' << format_number(rhs) << ',' << format_number(r.q_up)
            << ',' << format_number(r.q_down) << '\n';
    }
}

inline void write_trace_csv(const std::string& path, const FlowTrace& trace)
{
    auto out = detail::open_output(path);
    write_trace_csv(out, trace);
}

/// Column-oriented view of a trace CSV; empty cells are NaN.
struct TraceTable {
    std::vector<std::string> header;
    std::map<std::string, std::vector<double>> columns;
    std::size_t rows = 0;

    const std::vector<double>& column(const std::string& name) const
    {
        const auto it = columns.find(name);
        if (it == columns.end()) {
            throw Error("trace has no column " + name);
        }
        return it->second;
    }
};

inline TraceTable read_trace_csv(std::istream& in, const std::string& name = "trace")
{
    TraceTable table;
    std::string line;
    int line_no = 0;
    if (!std::getline(in, line)) {
        throw Error(name + ": empty file");
    }
    ++line_no;
    table.header = detail::split_csv(detail::trim(line));
    for (const auto& h : table.header) {
        table.columns[h];
    }
    while (std::getline(in, line)) {
        ++line_no;
        line = detail::trim(line);
        if (line.empty()) {
            continue;
        }
        const auto cells = detail::split_csv(line);
        const std::string where = name + ":" + std::to_string(line_no);
        if (cells.size() != table.header.size()) {
            throw Error(where + ": expected " + std::to_string(table.header.size()) + " fields");
        }
        for (std::size_t i = 0; i < cells.size(); ++i) {
            table.columns[table.header[i]].push_back(
                cells[i].empty() ? std::numeric_limits<double>::quiet_NaN()
                                 : detail::parse_double(cells[i], where));
        }
        ++table.rows;
    }
    return table;
}

inline TraceTable read_trace_csv(const std::string& path)
{
    auto in = detail::open_input(path);
    return read_trace_csv(in, path);
}

// ---------------------------------------------------------------------------
// JSON

inline nlohmann::ordered_json number_or_null(double x)
{
    if (std::isfinite(x)) {
        return x;
    }
    return nullptr;
}

inline nlohmann::ordered_json to_json(const Verdict& v)
{
    nlohmann::ordered_json j;
    j["theorem"] = v.theorem;
    j["hypothesis_holds"] = v.hypothesis_holds;
    j["conclusion_holds"] = v.conclusion_holds;
    j["max_violation"] = number_or_null(v.max_violation);
    j["samples"] = v.samples;
    j["passed"] = v.passed();
    nlohmann::ordered_json details = nlohmann::ordered_json::object();
    for (const auto& [k, x] : v.details) {
        details[k] = number_or_null(x);
    }
    j["details"] = std::move(details);
    return j;
}

inline nlohmann::ordered_json to_json(const EigenPair& eig)
{
    nlohmann::ordered_json j;
    j["lambda"] = eig.lambda;
    j["residual"] = eig.residual;
    j["iterations"] = eig.iterations;
    j["size"] = eig.f.size();
    return j;
}

/// Doubles are printed in shortest round-trip form, so reruns compare byte for byte.
inline std::string dump_json(const nlohmann::ordered_json& j)
{
    return j.dump(2) + "\n";
}

inline void write_json(const std::string& path, const nlohmann::ordered_json& j)
{
    auto out = detail::open_output(path);
    out << dump_json(j);
}

inline nlohmann::ordered_json read_json(const std::string& path)
{
    auto in = detail::open_input(path);
    try {
        return nlohmann::ordered_json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(path + ": " + e.what());
    }
}

/// "i,f" rows for an eigenfunction.
inline void write_eigenfunction_csv(const std::string& path, const EigenPair& eig)
{
    auto out = detail::open_output(path);
    out << "vertex,f\n";
    for (Eigen::Index i = 0; i < eig.f.size(); ++i) {
        out << i << ',' << format_number(eig.f[i]) << '\n';
    }
}

} // namespace flowspectra
