#pragma once

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "cellinf/complex.hpp"
#include "cellinf/error.hpp"
#include "cellinf/factorize.hpp"

namespace cellinf::io {

namespace fs = std::filesystem;

namespace detail {

inline std::ifstream open_in(const fs::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw Error(ErrorCode::IoError, "cannot open " + path.string() + " for reading");
    return in;
}

inline std::ofstream open_out(const fs::path& path)
{
    if (path.has_parent_path())
        fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::trunc);
    if (!out)
        throw Error(ErrorCode::IoError, "cannot open " + path.string() + " for writing");
    return out;
}

[[noreturn]] inline void parse_error(const fs::path& path, long line, const std::string& what)
{
    throw Error(ErrorCode::ParseError, path.string() + ":" + std::to_string(line) + ": " + what);
}

inline std::string_view trim(std::string_view s)
{
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos)
        return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

inline std::vector<std::string_view> split(std::string_view s, char sep)
{
    std::vector<std::string_view> parts;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        parts.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
        if (pos == std::string_view::npos)
            return parts;
        start = pos + 1;
    }
}

inline std::vector<std::string_view> tokens(std::string_view s)
{
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == '\r'))
            ++i;
        std::size_t j = i;
        while (j < s.size() && s[j] != ' ' && s[j] != '\t' && s[j] != '\r')
            ++j;
        if (j > i)
            out.push_back(s.substr(i, j - i));
        i = j;
    }
    return out;
}

template <typename T>
std::optional<T> parse_number(std::string_view s)
{
    T value{};
    if (!s.empty() && s.front() == '+')
        s.remove_prefix(1);
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty())
        return std::nullopt;
    return value;
}

/// Reads all lines, dropping one trailing empty line left by a final newline.
inline std::vector<std::string> read_lines(const fs::path& path)
{
    std::ifstream in = open_in(path);
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line))
        lines.push_back(line);
    while (!lines.empty() && trim(lines.back()).empty())
        lines.pop_back();
    return lines;
}

}  // namespace detail

/// `%.17g`, enough digits to round-trip any double.
inline std::string format_exact(double x)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

/// `%.9g`: 9 significant digits, shortest of fixed/exponent form; zero is `0`.
inline std::string format_9g(double x)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.9g", x);
    return buf;
}

// Edge list: header `nodes <n>`, then one `<source> <target>` line per edge
// in id order.

inline void write_graph(const OrientedGraph& graph, const fs::path& path)
{
    std::ofstream out = detail::open_out(path);
    out << "nodes " << graph.node_count() << '\n';
    for (const Edge& e : graph.edges())
        out << e.source << ' ' << e.target << '\n';
    if (!out)
        throw Error(ErrorCode::IoError, "failed writing " + path.string());
}

inline OrientedGraph read_graph(const fs::path& path)
{
    const std::vector<std::string> lines = detail::read_lines(path);
    if (lines.empty())
        detail::parse_error(path, 1, "missing `nodes <n>` header");
    const auto header = detail::tokens(lines[0]);
    std::optional<int> n;
    if (header.size() == 2 && header[0] == "nodes")
        n = detail::parse_number<int>(header[1]);
    if (!n)
        detail::parse_error(path, 1, "expected `nodes <n>`");
    std::vector<Edge> edges;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const auto parts = detail::tokens(lines[i]);
        std::optional<int> s, t;
        if (parts.size() == 2) {
            s = detail::parse_number<int>(parts[0]);
            t = detail::parse_number<int>(parts[1]);
        }
        if (!s || !t)
            detail::parse_error(path, static_cast<long>(i + 1), "expected `<source> <target>`");
        edges.push_back({*s, *t});
    }
    try {
        return OrientedGraph(*n, std::move(edges));
    } catch (const Error& err) {
        throw Error(ErrorCode::InvariantViolation, path.string() + ": " + err.what());
    }
}

// Cell file: one `<edge_id> <cell_id> <sign>` triplet per nonzero of B2.

inline void write_cells(const CellComplex& complex, const fs::path& path)
{
    std::ofstream out = detail::open_out(path);
    for (int c = 0; c < complex.cell_count(); ++c)
        for (const SignedEdge& entry : complex.cells()[c].entries())
            out << entry.edge << ' ' << c << ' ' << entry.sign << '\n';
    if (!out)
        throw Error(ErrorCode::IoError, "failed writing " + path.string());
}

inline CellComplex read_cells(const OrientedGraph& graph, const fs::path& path)
{
    const std::vector<std::string> lines = detail::read_lines(path);
    std::map<int, std::vector<SignedEdge>> by_cell;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const long line = static_cast<long>(i + 1);
        const auto parts = detail::tokens(lines[i]);
        std::optional<int> e, c, sign;
        if (parts.size() == 3) {
            e = detail::parse_number<int>(parts[0]);
            c = detail::parse_number<int>(parts[1]);
            sign = detail::parse_number<int>(parts[2]);
        }
        if (!e || !c || !sign)
            detail::parse_error(path, line, "expected `<edge_id> <cell_id> <sign>`");
        if (*sign != 1 && *sign != -1)
            detail::parse_error(path, line, "sign must be 1 or -1");
        if (*e < 0 || *e >= graph.edge_count())
            throw Error(ErrorCode::InvariantViolation, path.string() + ":" + std::to_string(line) + ": edge id "
                                                           + std::to_string(*e) + " outside [0, "
                                                           + std::to_string(graph.edge_count()) + ")");
        if (*c < 0)
            throw Error(ErrorCode::InvariantViolation, path.string() + ":" + std::to_string(line) + ": negative cell id");
        by_cell[*c].push_back({*e, *sign});
    }
    std::vector<CellBoundary> cells;
    int expected = 0;
    try {
        for (auto& [id, entries] : by_cell) {
            if (id != expected)
                throw Error(ErrorCode::InvalidCell, "cell ids must be contiguous from 0; missing " + std::to_string(expected));
            ++expected;
            cells.emplace_back(graph.edge_count(), std::move(entries));
        }
        return CellComplex(graph, std::move(cells));
    } catch (const Error& err) {
        throw Error(ErrorCode::InvariantViolation, path.string() + ": " + err.what());
    }
}

// Flow CSV: header `edge_id,f0,...,f{s-1}`, one row per edge in id order.

inline void write_flows(const FlowMatrix& flows, const fs::path& path)
{
    std::ofstream out = detail::open_out(path);
    out << "edge_id";
    for (Eigen::Index j = 0; j < flows.cols(); ++j)
        out << ",f" << j;
    out << '\n';
    for (Eigen::Index e = 0; e < flows.rows(); ++e) {
        out << e;
        for (Eigen::Index j = 0; j < flows.cols(); ++j)
            out << ',' << format_exact(flows(e, j));
        out << '\n';
    }
    if (!out)
        throw Error(ErrorCode::IoError, "failed writing " + path.string());
}

inline FlowMatrix read_flows(const fs::path& path, int edge_count)
{
    const std::vector<std::string> lines = detail::read_lines(path);
    if (lines.empty())
        detail::parse_error(path, 1, "missing header");
    const auto header = detail::split(lines[0], ',');
    if (header.size() < 2 || header[0] != "edge_id")
        detail::parse_error(path, 1, "header must be `edge_id,f0,...`");
    for (std::size_t j = 1; j < header.size(); ++j)
        if (header[j] != "f" + std::to_string(j - 1))
            detail::parse_error(path, 1, "expected column f" + std::to_string(j - 1));
    const auto flows = static_cast<Eigen::Index>(header.size() - 1);
    if (static_cast<long>(lines.size()) - 1 != edge_count)
        detail::parse_error(path, static_cast<long>(lines.size()),
                            "expected " + std::to_string(edge_count) + " edge rows, found " + std::to_string(lines.size() - 1));
    FlowMatrix f(edge_count, flows);
    for (int e = 0; e < edge_count; ++e) {
        const long line = e + 2;
        const auto cells = detail::split(lines[static_cast<std::size_t>(e) + 1], ',');
        if (static_cast<Eigen::Index>(cells.size()) != flows + 1)
            detail::parse_error(path, line, "expected " + std::to_string(flows + 1) + " fields");
        if (detail::parse_number<int>(cells[0]) != e)
            detail::parse_error(path, line, "rows must be in edge id order; expected edge " + std::to_string(e));
        for (Eigen::Index j = 0; j < flows; ++j) {
            const auto value = detail::parse_number<double>(cells[static_cast<std::size_t>(j) + 1]);
            if (!value || !std::isfinite(*value))
                detail::parse_error(path, line, "bad number in column f" + std::to_string(j));
            f(e, j) = *value;
        }
    }
    return f;
}

/// `key=value` lines in the given order.
inline void write_meta(const std::vector<std::pair<std::string, std::string>>& entries, const fs::path& path)
{
    std::ofstream out = detail::open_out(path);
    for (const auto& [key, value] : entries)
        out << key << '=' << value << '\n';
}

inline std::map<std::string, std::string> read_meta(const fs::path& path)
{
    std::map<std::string, std::string> out;
    const std::vector<std::string> lines = detail::read_lines(path);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const auto pos = lines[i].find('=');
        if (pos == std::string::npos)
            detail::parse_error(path, static_cast<long>(i + 1), "expected key=value");
        out[std::string(detail::trim(std::string_view(lines[i]).substr(0, pos)))] =
            std::string(detail::trim(std::string_view(lines[i]).substr(pos + 1)));
    }
    return out;
}

}  // namespace cellinf::io
