#pragma once

#include "drfuse/error.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace drfuse::csv {

/// Split one CSV line. Fields may be double-quoted; "" inside a quoted
/// field is an escaped quote. No multi-line fields.
inline std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    fields.push_back(cur);
    return fields;
}

inline std::string escape(const std::string& field) {
    if (field.find_first_of(",\"\n") == std::string::npos)
        return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    out += '"';
    return out;
}

inline std::string join(const std::vector<std::string>& fields) {
    std::string out;
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) out += ',';
        out += escape(fields[i]);
    }
    return out;
}

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

/// Read a whole CSV file. First line is the header; blank lines are skipped;
/// every row must have as many fields as the header.
inline Table read_file(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path))
        raise(ErrorKind::MissingFile, path.string());
    std::ifstream in(path);
    if (!in)
        raise(ErrorKind::IoError, "cannot open " + path.string());

    Table table;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty())
            continue;
        auto fields = split_line(line);
        if (table.header.empty()) {
            table.header = std::move(fields);
        } else {
            if (fields.size() != table.header.size())
                raise(ErrorKind::ParseError, path.string() + ":" + std::to_string(lineno) +
                                                 ": expected " + std::to_string(table.header.size()) +
                                                 " fields, got " + std::to_string(fields.size()));
            table.rows.push_back(std::move(fields));
        }
    }
    if (table.header.empty())
        raise(ErrorKind::ParseError, path.string() + ": empty CSV");
    return table;
}

inline void write_file(const std::filesystem::path& path, const std::vector<std::string>& header,
                       const std::vector<std::vector<std::string>>& rows) {
    std::ofstream out(path, std::ios::trunc);
    if (!out)
        raise(ErrorKind::IoError, "cannot open for writing: " + path.string());
    out << join(header) << '\n';
    for (const auto& row : rows)
        out << join(row) << '\n';
    if (!out)
        raise(ErrorKind::IoError, "write failed: " + path.string());
}

/// Field index of `name` in the header, or ParseError.
inline std::size_t column(const Table& table, const std::string& name, const std::string& context) {
    for (std::size_t i = 0; i < table.header.size(); ++i)
        if (table.header[i] == name)
            return i;
    raise(ErrorKind::ParseError, context + ": missing column '" + name + "'");
}

inline long long parse_int(const std::string& text, const std::string& context) {
    try {
        std::size_t pos = 0;
        long long v = std::stoll(text, &pos);
        if (pos != text.size())
            raise(ErrorKind::ParseError, context + ": not an integer: '" + text + "'");
        return v;
    } catch (const Error&) {
        throw;
    } catch (const std::exception&) {
        raise(ErrorKind::ParseError, context + ": not an integer: '" + text + "'");
    }
}

} // namespace drfuse::csv
