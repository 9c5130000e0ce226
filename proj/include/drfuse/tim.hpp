#pragma once

#include "drfuse/ensemble.hpp"
#include "drfuse/error.hpp"
#include "drfuse/grade.hpp"
#include "drfuse/geometry.hpp"
#include "drfuse/mask.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <array>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace drfuse {

/// Pixel-count thresholds for the three fused outputs, measured at
/// reference_dims. Counts below t_min[i] satisfy the Normal-side condition
/// for class i+1; counts above t_max[i] satisfy the PDR-side condition.
struct ThresholdConfig {
    std::array<std::int64_t, 3> t_min{};
    std::array<std::int64_t, 3> t_max{};
    Dims reference_dims{1024, 1024};

    void validate() const {
        for (std::size_t i = 0; i < 3; ++i) {
            if (t_min[i] <= 0 || t_max[i] <= 0)
                raise(ErrorKind::InvalidConfig, "thresholds must be positive");
            if (t_min[i] >= t_max[i])
                raise(ErrorKind::InvalidConfig,
                      "t_min must be below t_max for class " + std::to_string(i + 1));
        }
        if (reference_dims.width <= 0 || reference_dims.height <= 0)
            raise(ErrorKind::InvalidConfig, "reference dims must be positive");
    }
};

/// The published thresholds: (26^2, 130^2, 28^2) and (78^2, 750^2, 100^2),
/// bound to 1024x1024 masks.
inline ThresholdConfig default_thresholds() {
    ThresholdConfig t;
    t.t_min = {676, 16900, 784};
    t.t_max = {6084, 562500, 10000};
    t.reference_dims = {1024, 1024};
    return t;
}

inline nlohmann::ordered_json thresholds_to_json(const ThresholdConfig& t) {
    nlohmann::ordered_json j;
    j["t_min"] = t.t_min;
    j["t_max"] = t.t_max;
    j["reference_dims"] = {{"width", t.reference_dims.width}, {"height", t.reference_dims.height}};
    return j;
}

inline ThresholdConfig thresholds_from_json(const nlohmann::json& j) {
    try {
        ThresholdConfig t;
        for (std::size_t i = 0; i < 3; ++i) {
            t.t_min[i] = j.at("t_min").at(i).get<std::int64_t>();
            t.t_max[i] = j.at("t_max").at(i).get<std::int64_t>();
        }
        if (j.contains("reference_dims")) {
            t.reference_dims.width = j.at("reference_dims").at("width").get<int>();
            t.reference_dims.height = j.at("reference_dims").at("height").get<int>();
        }
        t.validate();
        return t;
    } catch (const Error&) {
        throw;
    } catch (const nlohmann::json::exception& e) {
        raise(ErrorKind::ParseError, std::string("bad threshold document: ") + e.what());
    }
}

inline ThresholdConfig load_thresholds(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path))
        raise(ErrorKind::MissingFile, path.string());
    std::ifstream in(path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        raise(ErrorKind::ParseError, path.string() + ": " + e.what());
    }
    return thresholds_from_json(j);
}

/// Foreground pixel counts of the fused outputs O1, O2, O3.
struct LesionCounts {
    std::int64_t o1 = 0;
    std::int64_t o2 = 0;
    std::int64_t o3 = 0;

    std::int64_t by_index(std::size_t i) const noexcept { return i == 0 ? o1 : (i == 1 ? o2 : o3); }
};

/// Outcome of the per-class threshold judgments. sigma0/sigma1 are the
/// number of satisfied min/max conditions.
struct ConditionVector {
    std::array<bool, 3> c_min{};
    std::array<bool, 3> c_max{};

    int sigma0() const noexcept { return static_cast<int>(c_min[0]) + c_min[1] + c_min[2]; }
    int sigma1() const noexcept { return static_cast<int>(c_max[0]) + c_max[1] + c_max[2]; }

    bool consistent() const noexcept {
        for (std::size_t i = 0; i < 3; ++i)
            if (c_min[i] && c_max[i])
                return false;
        return true;
    }

    friend bool operator==(const ConditionVector&, const ConditionVector&) = default;
};

/// Strict inequalities: a count exactly at a threshold satisfies neither
/// condition. t_min < t_max guarantees c_min and c_max are never both true.
inline ConditionVector evaluate_conditions(const LesionCounts& counts, const ThresholdConfig& th) {
    ConditionVector cv;
    for (std::size_t i = 0; i < 3; ++i) {
        cv.c_min[i] = counts.by_index(i) < th.t_min[i];
        cv.c_max[i] = counts.by_index(i) > th.t_max[i];
    }
    return cv;
}

/// How the sigma0 = 2 sub-check re-examines the single failing min
/// condition: against that same lesion's max condition, or against any
/// satisfied max condition.
enum class IndexMode { SameIndex, AnyIndex };

inline const char* to_string(IndexMode m) noexcept {
    return m == IndexMode::SameIndex ? "same-index" : "any-index";
}

struct Revision {
    Grade revised;
    std::string rule_fired;
};

/// The grade adjustment table. All adjustments stay within adjacent
/// levels.
inline Revision revise_grade(Grade prelim, const ConditionVector& cv, IndexMode mode) {
    if (!cv.consistent())
        raise(ErrorKind::InconsistentConditionVector, "c_min and c_max both set for one lesion class");

    const int s0 = cv.sigma0();
    const int s1 = cv.sigma1();

    const auto failing_index = [&]() -> std::size_t {
        for (std::size_t i = 0; i < 3; ++i)
            if (!cv.c_min[i])
                return i;
        return 0; // unreachable when s0 == 2
    };
    const auto check = [&](std::size_t j) { return mode == IndexMode::SameIndex ? cv.c_max[j] : s1 >= 1; };

    switch (prelim) {
    case Grade::Normal:
        if (s0 == 3) return {Grade::Normal, "N-s3-keep"};
        if (s0 == 2) {
            if (check(failing_index())) return {Grade::Npdr, "N-s2-up"};
            return {Grade::Normal, "N-s2-keep"};
        }
        return {Grade::Npdr, "N-s01-up"};
    case Grade::Npdr:
        if (s0 == 3) return {Grade::Normal, "NP-s3-down"};
        if (s1 == 3) return {Grade::Pdr, "NP-max3-up"};
        return {Grade::Npdr, "NP-keep"};
    case Grade::Pdr:
        if (s0 == 3) return {Grade::Npdr, "P-s3-down"};
        if (s0 == 2) {
            if (check(failing_index())) return {Grade::Pdr, "P-s2-pass"};
            return {Grade::Npdr, "P-s2-fail"};
        }
        return {Grade::Pdr, "P-s01-keep"};
    }
    raise(ErrorKind::InvalidArgument, "bad preliminary grade");
}

/// Full audit trail of one revision.
struct RevisionRecord {
    std::string image_id;
    Grade preliminary;
    Grade revised;
    LesionCounts counts;
    ConditionVector conditions;
    std::string rule_fired;
};

/// Revise a batch of preliminary grades against their fused outputs.
/// Samples are independent; output is sorted by image_id.
inline std::vector<RevisionRecord> revise_batch(std::span<const GradeRecord> prelim,
                                                std::span<const FusedOutput> fused, const ThresholdConfig& th,
                                                IndexMode mode) {
    th.validate();

    std::map<std::string, const FusedOutput*> by_id;
    for (const auto& f : fused)
        if (!by_id.emplace(f.image_id, &f).second)
            raise(ErrorKind::DuplicateId, "fused outputs: duplicate image_id '" + f.image_id + "'");

    std::map<std::string, Grade> grades;
    for (const auto& g : prelim)
        if (!grades.emplace(g.image_id, g.grade).second)
            raise(ErrorKind::DuplicateId, "preliminary grades: duplicate image_id '" + g.image_id + "'");

    if (by_id.size() != grades.size())
        raise(ErrorKind::IdMismatch, "preliminary grades and fused outputs cover different image sets");
    for (const auto& [id, g] : grades)
        if (!by_id.count(id))
            raise(ErrorKind::IdMismatch, "no fused output for image_id '" + id + "'");

    std::vector<RevisionRecord> records;
    records.reserve(grades.size());
    for (const auto& [id, grade] : grades) {
        const FusedOutput& f = *by_id.at(id);
        for (const BinaryMask* m : {&f.o1, &f.o2, &f.o3})
            if (m->dims() != th.reference_dims)
                raise(ErrorKind::DimMismatch, "fused mask for '" + id + "' is " + to_string(m->dims()) +
                                                  ", thresholds are bound to " + to_string(th.reference_dims));

        RevisionRecord rec;
        rec.image_id = id;
        rec.preliminary = grade;
        rec.counts = {pixel_count(f.o1), pixel_count(f.o2), pixel_count(f.o3)};
        rec.conditions = evaluate_conditions(rec.counts, th);
        const Revision rev = revise_grade(grade, rec.conditions, mode);
        rec.revised = rev.revised;
        rec.rule_fired = rev.rule_fired;
        records.push_back(std::move(rec));
    }
    return records;
}

} // namespace drfuse
