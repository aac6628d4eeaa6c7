#include "mdprec/matrix_market.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "mdprec/errors.hpp"

namespace mdprec::mm {

namespace {

std::string lower(std::string s) {
    std::ranges::transform(s, s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s;
}

struct Header {
    std::string object, format, field, symmetry;
};

Header read_header(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw IoError("MatrixMarket: empty input");
    std::istringstream hs(line);
    std::string banner;
    Header h;
    hs >> banner >> h.object >> h.format >> h.field >> h.symmetry;
    if (banner != "%%MatrixMarket") throw IoError("MatrixMarket: missing %%MatrixMarket banner");
    h.object = lower(h.object);
    h.format = lower(h.format);
    h.field = lower(h.field);
    h.symmetry = lower(h.symmetry);
    if (h.object != "matrix") throw IoError("MatrixMarket: unsupported object '" + h.object + "'");
    if (h.field != "real" && h.field != "integer" && h.field != "double") {
        throw IoError("MatrixMarket: unsupported field '" + h.field + "'");
    }
    if (h.symmetry != "general") {
        throw IoError("MatrixMarket: unsupported symmetry '" + h.symmetry + "'");
    }
    return h;
}

// Next line that is neither blank nor a comment.
bool next_data_line(std::istream& in, std::string& line) {
    while (std::getline(in, line)) {
        auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '%') continue;
        return true;
    }
    return false;
}

double parse_real(const char*& p, Index line_no) {
    char* end = nullptr;
    const double v = std::strtod(p, &end);
    if (end == p || !std::isfinite(v)) {
        throw IoError("MatrixMarket: bad numeric value on data line " + std::to_string(line_no));
    }
    p = end;
    return v;
}

Index parse_index(const char*& p, Index line_no) {
    while (*p == ' ' || *p == '\t') ++p;
    Index v = 0;
    auto [ptr, ec] = std::from_chars(p, p + std::char_traits<char>::length(p), v);
    if (ec != std::errc{}) {
        throw IoError("MatrixMarket: bad index on data line " + std::to_string(line_no));
    }
    p = ptr;
    return v;
}

void expect_rest_blank(const char* p, Index line_no) {
    while (*p == ' ' || *p == '\t' || *p == '\r') ++p;
    if (*p != '\0') {
        throw IoError("MatrixMarket: trailing characters on data line " + std::to_string(line_no));
    }
}

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    return in;
}

} // namespace

std::string format_double(double v, FloatFormat fmt) {
    char buf[64];
    if (fmt == FloatFormat::hex) {
        std::snprintf(buf, sizeof buf, "%a", v);
        return buf;
    }
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return {buf, ptr};
}

void write_matrix(std::ostream& out, const CsrMatrix& m, FloatFormat fmt) {
    out << "%%MatrixMarket matrix coordinate real general\n";
    out << m.rows() << ' ' << m.cols() << ' ' << m.nnz() << '\n';
    for (Index i = 0; i < m.rows(); ++i) {
        auto c = m.row_cols(i);
        auto v = m.row_values(i);
        for (Index k = 0; k < c.size(); ++k) {
            out << i + 1 << ' ' << c[k] + 1 << ' ' << format_double(v[k], fmt) << '\n';
        }
    }
    if (!out) throw IoError("MatrixMarket: write failed");
}

void write_matrix(const std::filesystem::path& path, const CsrMatrix& m, FloatFormat fmt) {
    auto out = open_out(path);
    write_matrix(out, m, fmt);
}

CsrMatrix read_matrix(std::istream& in) {
    const Header h = read_header(in);
    if (h.format != "coordinate") throw IoError("MatrixMarket: expected coordinate format");
    std::string line;
    if (!next_data_line(in, line)) throw IoError("MatrixMarket: missing size line");
    Index rows = 0, cols = 0, nnz = 0;
    {
        const char* p = line.c_str();
        rows = parse_index(p, 0);
        cols = parse_index(p, 0);
        nnz = parse_index(p, 0);
        expect_rest_blank(p, 0);
    }
    std::vector<Triplet> triplets;
    triplets.reserve(nnz);
    for (Index k = 0; k < nnz; ++k) {
        if (!next_data_line(in, line)) {
            throw IoError("MatrixMarket: expected " + std::to_string(nnz) + " entries, found " +
                          std::to_string(k));
        }
        const char* p = line.c_str();
        const Index i = parse_index(p, k + 1);
        const Index j = parse_index(p, k + 1);
        const double v = parse_real(p, k + 1);
        expect_rest_blank(p, k + 1);
        if (i < 1 || i > rows || j < 1 || j > cols) {
            throw IoError("MatrixMarket: entry index out of range on data line " +
                          std::to_string(k + 1));
        }
        triplets.push_back({i - 1, j - 1, v});
    }
    if (next_data_line(in, line)) throw IoError("MatrixMarket: more entries than declared");
    return CsrMatrix::from_triplets(rows, cols, std::move(triplets));
}

CsrMatrix read_matrix(const std::filesystem::path& path) {
    auto in = open_in(path);
    try {
        return read_matrix(in);
    } catch (const IoError& e) {
        throw IoError(path.string() + ": " + e.what());
    }
}

void write_vector(std::ostream& out, std::span<const double> v, FloatFormat fmt) {
    out << "%%MatrixMarket matrix array real general\n";
    out << v.size() << " 1\n";
    for (double x : v) out << format_double(x, fmt) << '\n';
    if (!out) throw IoError("MatrixMarket: write failed");
}

void write_vector(const std::filesystem::path& path, std::span<const double> v, FloatFormat fmt) {
    auto out = open_out(path);
    write_vector(out, v, fmt);
}

Vector read_vector(std::istream& in) {
    const Header h = read_header(in);
    if (h.format != "array") throw IoError("MatrixMarket: expected array format for a vector");
    std::string line;
    if (!next_data_line(in, line)) throw IoError("MatrixMarket: missing size line");
    Index rows = 0, cols = 0;
    {
        const char* p = line.c_str();
        rows = parse_index(p, 0);
        cols = parse_index(p, 0);
        expect_rest_blank(p, 0);
    }
    if (cols != 1) throw IoError("MatrixMarket: vector file must have one column");
    Vector v(rows);
    for (Index k = 0; k < rows; ++k) {
        if (!next_data_line(in, line)) throw IoError("MatrixMarket: truncated vector");
        const char* p = line.c_str();
        v[k] = parse_real(p, k + 1);
        expect_rest_blank(p, k + 1);
    }
    if (next_data_line(in, line)) throw IoError("MatrixMarket: more values than declared");
    return v;
}

Vector read_vector(const std::filesystem::path& path) {
    auto in = open_in(path);
    try {
        return read_vector(in);
    } catch (const IoError& e) {
        throw IoError(path.string() + ": " + e.what());
    }
}

} // namespace mdprec::mm
