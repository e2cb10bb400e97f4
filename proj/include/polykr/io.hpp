#pragma once

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "polykr/errors.hpp"
#include "polykr/metrics.hpp"
#include "polykr/multi_index.hpp"
#include "polykr/surrogate.hpp"

namespace polykr::io {

// 17 significant digits round-trip any double exactly.
inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline double parse_double(const std::string& token) {
    char* end = nullptr;
    const double v = std::strtod(token.c_str(), &end);
    if (end == token.c_str() || *end != '\0')
        throw io_error("not a number: '" + token + "'");
    return v;
}

// Surrogate file: version header, dimension, basis tag, one line per
// multi-index ("nu_1 ... nu_d c_nu" in lexicographic order), then the fit
// metadata footer. Decimal serialization keeps load(save(g)) bit-exact.
inline void save_surrogate(const PolynomialSurrogate& g, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw io_error("cannot open for writing: " + path.string());
    out << "polykr-surrogate v1\n";
    out << "dim " << g.dimension() << "\n";
    out << "basis legendre01\n";
    out << "size " << g.size() << "\n";
    const auto& lambda = g.index_set();
    const auto coeffs = g.coefficients();
    for (std::size_t i = 0; i < g.size(); ++i) {
        for (int v : lambda[i]) out << v << ' ';
        out << format_double(coeffs[i]) << "\n";
    }
    out << "method " << (g.info().method.empty() ? "unknown" : g.info().method) << "\n";
    out << "evaluations " << g.info().evaluations << "\n";
    out << "rounds " << g.info().rounds << "\n";
    if (g.info().seed) out << "seed " << *g.info().seed << "\n";
    if (!out) throw io_error("write failed: " + path.string());
}

inline PolynomialSurrogate load_surrogate(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open: " + path.string());
    std::string line;
    auto next_line = [&](const char* what) {
        if (!std::getline(in, line)) throw io_error(std::string("surrogate file truncated: ") + what);
        return line;
    };
    if (next_line("header") != "polykr-surrogate v1")
        throw io_error("unrecognized surrogate file header in " + path.string());

    int dim = 0;
    std::size_t size = 0;
    {
        std::istringstream ss(next_line("dim"));
        std::string key;
        if (!(ss >> key >> dim) || key != "dim" || dim < 1)
            throw io_error("bad dim line in " + path.string());
    }
    if (next_line("basis") != "basis legendre01")
        throw io_error("unsupported basis in " + path.string());
    {
        std::istringstream ss(next_line("size"));
        std::string key;
        if (!(ss >> key >> size) || key != "size" || size == 0)
            throw io_error("bad size line in " + path.string());
    }

    std::vector<std::vector<int>> rows;
    std::vector<double> coeffs;
    rows.reserve(size);
    coeffs.reserve(size);
    for (std::size_t i = 0; i < size; ++i) {
        std::istringstream ss(next_line("coefficient row"));
        std::vector<int> row(dim);
        for (int j = 0; j < dim; ++j)
            if (!(ss >> row[j]) || row[j] < 0)
                throw io_error("bad multi-index in " + path.string());
        std::string token;
        if (!(ss >> token)) throw io_error("missing coefficient in " + path.string());
        rows.push_back(std::move(row));
        coeffs.push_back(parse_double(token));
    }

    FitInfo info;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string key;
        ss >> key;
        if (key == "method") ss >> info.method;
        else if (key == "evaluations") ss >> info.evaluations;
        else if (key == "rounds") ss >> info.rounds;
        else if (key == "seed") {
            std::uint64_t s = 0;
            ss >> s;
            info.seed = s;
        } else {
            throw io_error("unknown footer line in " + path.string() + ": " + line);
        }
    }

    // rows were written in lexicographic order; from_rows re-sorts, and the
    // coefficient order must follow
    MultiIndexSet lambda = MultiIndexSet::from_rows(dim, rows);
    if (lambda.size() != size) throw io_error("duplicate multi-indices in " + path.string());
    std::vector<double> ordered(size);
    for (std::size_t i = 0; i < size; ++i) {
        const auto pos = lambda.find(rows[i]);
        if (pos < 0) throw io_error("index lookup failed in " + path.string());
        ordered[static_cast<std::size_t>(pos)] = coeffs[i];
    }
    return PolynomialSurrogate(std::move(lambda), std::move(ordered), std::move(info));
}

// Points CSV: header x1,...,xd then one row per point. RFC-4180-style,
// '.' decimal separator, LF line endings.
inline void write_points_csv(const std::filesystem::path& path,
                             std::span<const double> points, std::size_t count, int dim) {
    std::ofstream out(path);
    if (!out) throw io_error("cannot open for writing: " + path.string());
    for (int j = 0; j < dim; ++j) out << (j ? ",x" : "x") << (j + 1);
    out << "\n";
    for (std::size_t i = 0; i < count; ++i) {
        for (int j = 0; j < dim; ++j) {
            if (j) out << ',';
            out << format_double(points[i * dim + j]);
        }
        out << "\n";
    }
    if (!out) throw io_error("write failed: " + path.string());
}

struct PointsFile {
    int dim = 0;
    std::size_t count = 0;
    std::vector<double> values;  // count x dim, row-major
};

inline PointsFile read_points_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open: " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw io_error("empty points file: " + path.string());
    PointsFile file;
    {
        std::istringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) ++file.dim;
        if (file.dim < 1) throw io_error("bad header in " + path.string());
    }
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string cell;
        int cols = 0;
        while (std::getline(ss, cell, ',')) {
            file.values.push_back(parse_double(cell));
            ++cols;
        }
        if (cols != file.dim)
            throw io_error("row " + std::to_string(file.count + 1) + " has " +
                           std::to_string(cols) + " columns, expected " +
                           std::to_string(file.dim) + " in " + path.string());
        ++file.count;
    }
    return file;
}

// Convergence CSV; failed rows carry the literal `failed` in the hellinger
// column.
inline void write_convergence_csv(const std::filesystem::path& path,
                                  const metrics::ConvergenceRecord& record) {
    std::ofstream out(path);
    if (!out) throw io_error("cannot open for writing: " + path.string());
    out << "cardinality,evaluations,hellinger,method,seconds\n";
    for (const auto& row : record) {
        out << row.cardinality << ',' << row.evaluations << ',';
        if (row.failed)
            out << "failed";
        else
            out << format_double(row.hellinger);
        out << ',' << row.method << ',' << format_double(row.seconds) << "\n";
    }
    if (!out) throw io_error("write failed: " + path.string());
}

}  // namespace polykr::io
