#include "mdprec/csv.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "mdprec/errors.hpp"
#include "mdprec/matrix_market.hpp"

namespace mdprec {

void Table::add_row(std::vector<std::string> row) {
    if (row.size() != header.size()) {
        throw DimensionError("Table::add_row: row has " + std::to_string(row.size()) +
                             " cells, header has " + std::to_string(header.size()));
    }
    rows.push_back(std::move(row));
}

std::size_t Table::column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == name) return i;
    }
    throw InvariantError("Table: no column named " + name);
}

namespace {

void write_field(std::ostream& out, const std::string& f) {
    if (f.find_first_of(",\"\r\n") == std::string::npos) {
        out << f;
        return;
    }
    out << '"';
    for (char c : f) {
        if (c == '"') out << '"';
        out << c;
    }
    out << '"';
}

void write_record(std::ostream& out, const std::vector<std::string>& r) {
    for (std::size_t i = 0; i < r.size(); ++i) {
        if (i) out << ',';
        write_field(out, r[i]);
    }
    out << "\r\n";
}

} // namespace

void write_csv(std::ostream& out, const Table& t) {
    write_record(out, t.header);
    for (const auto& r : t.rows) write_record(out, r);
}

void write_csv(const std::filesystem::path& path, const Table& t) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    write_csv(out, t);
    if (!out) throw IoError("failed writing " + path.string());
}

std::string to_csv(const Table& t) {
    std::ostringstream s;
    write_csv(s, t);
    return s.str();
}

Table parse_csv(const std::string& text) {
    std::vector<std::vector<std::string>> records;
    std::vector<std::string> rec;
    std::string field;
    bool quoted = false;
    bool any = false;
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field += c;
            }
            continue;
        }
        if (c == '"') {
            quoted = true;
            any = true;
        } else if (c == ',') {
            rec.push_back(std::move(field));
            field.clear();
            any = true;
        } else if (c == '\r' || c == '\n') {
            if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
            rec.push_back(std::move(field));
            field.clear();
            records.push_back(std::move(rec));
            rec.clear();
            any = false;
        } else {
            field += c;
            any = true;
        }
    }
    if (quoted) throw IoError("parse_csv: unterminated quoted field");
    if (any || !field.empty()) {
        rec.push_back(std::move(field));
        records.push_back(std::move(rec));
    }
    Table t;
    if (records.empty()) return t;
    t.header = std::move(records.front());
    for (std::size_t r = 1; r < records.size(); ++r) t.add_row(std::move(records[r]));
    return t;
}

std::string cell(double v) { return mm::format_double(v); }
std::string cell(std::size_t v) { return std::to_string(v); }
std::string cell(int v) { return std::to_string(v); }
std::string cell(bool v) { return v ? "true" : "false"; }

std::string seconds_cell(double s) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3f", s);
    return buf;
}

bool equal_modulo_timing(const Table& a, const Table& b) {
    if (a.header != b.header || a.rows.size() != b.rows.size()) return false;
    auto timing = [](const std::string& name) {
        const std::string suffix = "_seconds";
        return (name.size() >= suffix.size() &&
                name.compare(name.size() - suffix.size(), suffix.size(), suffix) == 0) ||
               name == "speedup";
    };
    for (std::size_t r = 0; r < a.rows.size(); ++r) {
        for (std::size_t c = 0; c < a.header.size(); ++c) {
            if (timing(a.header[c])) continue;
            if (a.rows[r][c] != b.rows[r][c]) return false;
        }
    }
    return true;
}

} // namespace mdprec
