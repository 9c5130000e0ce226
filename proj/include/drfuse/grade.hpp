#pragma once

#include "drfuse/csv.hpp"
#include "drfuse/error.hpp"

#include <algorithm>
#include <filesystem>
#include <set>
#include <string>
#include <vector>

namespace drfuse {

/// DR severity: 0 = Normal, 1 = NPDR, 2 = PDR.
enum class Grade : int { Normal = 0, Npdr = 1, Pdr = 2 };

inline int grade_value(Grade g) noexcept { return static_cast<int>(g); }

inline Grade grade_from_int(long long v) {
    if (v < 0 || v > 2)
        raise(ErrorKind::ParseError, "grade must be 0, 1 or 2, got " + std::to_string(v));
    return static_cast<Grade>(v);
}

struct GradeRecord {
    std::string image_id;
    Grade grade;

    friend bool operator==(const GradeRecord&, const GradeRecord&) = default;
};

/// Read a grade CSV (header: image_id,grade). Duplicate ids are rejected.
inline std::vector<GradeRecord> read_grades_csv(const std::filesystem::path& path) {
    const auto table = csv::read_file(path);
    const auto id_col = csv::column(table, "image_id", path.string());
    const auto grade_col = csv::column(table, "grade", path.string());

    std::vector<GradeRecord> records;
    std::set<std::string> seen;
    records.reserve(table.rows.size());
    for (const auto& row : table.rows) {
        const auto& id = row[id_col];
        if (!seen.insert(id).second)
            raise(ErrorKind::DuplicateId, path.string() + ": duplicate image_id '" + id + "'");
        records.push_back({id, grade_from_int(csv::parse_int(row[grade_col], path.string()))});
    }
    return records;
}

inline void write_grades_csv(const std::filesystem::path& path, const std::vector<GradeRecord>& records) {
    std::vector<std::vector<std::string>> rows;
    rows.reserve(records.size());
    for (const auto& r : records)
        rows.push_back({r.image_id, std::to_string(grade_value(r.grade))});
    csv::write_file(path, {"image_id", "grade"}, rows);
}

} // namespace drfuse
