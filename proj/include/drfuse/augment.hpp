#pragma once

#include "drfuse/csv.hpp"
#include "drfuse/error.hpp"
#include "drfuse/grade.hpp"
#include "drfuse/mask.hpp"
#include "drfuse/png_io.hpp"

#include <array>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace drfuse {

/// The six deterministic geometric variants used for dataset expansion.
enum class AugmentVariant { Orig, HFlip, VFlip, R90, R180, R270 };

inline constexpr std::array<AugmentVariant, 6> kAllVariants = {
    AugmentVariant::Orig, AugmentVariant::HFlip, AugmentVariant::VFlip,
    AugmentVariant::R90,  AugmentVariant::R180,  AugmentVariant::R270,
};

inline const char* variant_tag(AugmentVariant v) noexcept {
    switch (v) {
    case AugmentVariant::Orig: return "orig";
    case AugmentVariant::HFlip: return "hflip";
    case AugmentVariant::VFlip: return "vflip";
    case AugmentVariant::R90: return "r90";
    case AugmentVariant::R180: return "r180";
    case AugmentVariant::R270: return "r270";
    }
    return "?";
}

template <typename T>
Raster<T> apply_variant(const Raster<T>& src, AugmentVariant v) {
    switch (v) {
    case AugmentVariant::Orig: return src;
    case AugmentVariant::HFlip: return flip(src, FlipAxis::Horizontal);
    case AugmentVariant::VFlip: return flip(src, FlipAxis::Vertical);
    case AugmentVariant::R90: return rotate_ccw(src, Rotation::Deg90);
    case AugmentVariant::R180: return rotate_ccw(src, Rotation::Deg180);
    case AugmentVariant::R270: return rotate_ccw(src, Rotation::Deg270);
    }
    raise(ErrorKind::InvalidArgument, "bad augment variant");
}

/// All six variants of one raster, tagged. The orig entry is a bit-exact
/// passthrough.
template <typename T>
std::array<std::pair<AugmentVariant, Raster<T>>, 6> expand_image(const Raster<T>& src) {
    std::array<std::pair<AugmentVariant, Raster<T>>, 6> out = {{
        {AugmentVariant::Orig, src},
        {AugmentVariant::HFlip, apply_variant(src, AugmentVariant::HFlip)},
        {AugmentVariant::VFlip, apply_variant(src, AugmentVariant::VFlip)},
        {AugmentVariant::R90, apply_variant(src, AugmentVariant::R90)},
        {AugmentVariant::R180, apply_variant(src, AugmentVariant::R180)},
        {AugmentVariant::R270, apply_variant(src, AugmentVariant::R270)},
    }};
    return out;
}

/// One input of the expansion: an image plus optional lesion masks
/// (Mask A = classes 1 and 3 fused, Mask B = class 2) and optional grade.
struct AugmentEntry {
    std::string image_id;
    std::filesystem::path image_path;
    std::optional<std::filesystem::path> mask_a;
    std::optional<std::filesystem::path> mask_b;
    std::optional<Grade> grade;
};

struct DatasetManifest {
    std::vector<AugmentEntry> entries;

    /// CSV columns: image_id,path,mask_a,mask_b,grade (mask/grade cells may
    /// be empty). Relative paths resolve against the CSV directory.
    static DatasetManifest load_csv(const std::filesystem::path& path) {
        const auto table = csv::read_file(path);
        const std::string ctx = path.string();
        const auto id_col = csv::column(table, "image_id", ctx);
        const auto path_col = csv::column(table, "path", ctx);
        const auto a_col = csv::column(table, "mask_a", ctx);
        const auto b_col = csv::column(table, "mask_b", ctx);
        const auto grade_col = csv::column(table, "grade", ctx);

        const auto base = path.has_parent_path() ? path.parent_path() : std::filesystem::path(".");
        const auto resolve = [&](const std::string& s) -> std::filesystem::path {
            std::filesystem::path p = s;
            return p.is_absolute() ? p : base / p;
        };

        DatasetManifest manifest;
        std::set<std::string> seen;
        for (const auto& row : table.rows) {
            AugmentEntry e;
            e.image_id = row[id_col];
            if (!seen.insert(e.image_id).second)
                raise(ErrorKind::DuplicateId, ctx + ": duplicate image_id '" + e.image_id + "'");
            e.image_path = resolve(row[path_col]);
            if (!row[a_col].empty()) e.mask_a = resolve(row[a_col]);
            if (!row[b_col].empty()) e.mask_b = resolve(row[b_col]);
            if (!row[grade_col].empty()) e.grade = grade_from_int(csv::parse_int(row[grade_col], ctx));
            manifest.entries.push_back(std::move(e));
        }
        return manifest;
    }
};

/// Count summary of one expansion run, shaped like the published
/// augmentation tables: totals, per-grade totals, and per-mask
/// lesion-present / lesion-free splits.
struct ExpansionReport {
    std::int64_t input_images = 0;
    std::int64_t output_images = 0;
    std::array<std::int64_t, 3> input_per_grade{};
    std::array<std::int64_t, 3> output_per_grade{};
    std::int64_t input_a_lesion = 0, input_a_clean = 0;
    std::int64_t output_a_lesion = 0, output_a_clean = 0;
    std::int64_t input_b_lesion = 0, input_b_clean = 0;
    std::int64_t output_b_lesion = 0, output_b_clean = 0;

    std::vector<std::string> lines() const {
        std::vector<std::string> out;
        out.push_back("images: " + std::to_string(input_images) + " -> " + std::to_string(output_images));
        if (input_per_grade[0] + input_per_grade[1] + input_per_grade[2] > 0)
            for (int g = 0; g < 3; ++g)
                out.push_back("grade " + std::to_string(g) + ": " + std::to_string(input_per_grade[g]) +
                              " -> " + std::to_string(output_per_grade[g]));
        if (input_a_lesion + input_a_clean > 0) {
            out.push_back("mask A lesion: " + std::to_string(input_a_lesion) + " -> " +
                          std::to_string(output_a_lesion));
            out.push_back("mask A clean: " + std::to_string(input_a_clean) + " -> " +
                          std::to_string(output_a_clean));
        }
        if (input_b_lesion + input_b_clean > 0) {
            out.push_back("mask B lesion: " + std::to_string(input_b_lesion) + " -> " +
                          std::to_string(output_b_lesion));
            out.push_back("mask B clean: " + std::to_string(input_b_clean) + " -> " +
                          std::to_string(output_b_clean));
        }
        return out;
    }
};

/// Expand every manifest entry into its six geometric variants. Outputs
/// are written as <image_id>__<tag>.png under images/, mask_a/, mask_b/;
/// grades (when present) go to grades.csv with one row per variant.
inline ExpansionReport expand_dataset(const DatasetManifest& manifest, const std::filesystem::path& out_dir) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir / "images");

    ExpansionReport report;
    std::set<std::string> written;
    std::vector<GradeRecord> out_grades;

    for (const auto& entry : manifest.entries) {
        const GrayImage image = load_gray(entry.image_path);
        std::optional<BinaryMask> mask_a;
        std::optional<BinaryMask> mask_b;
        if (entry.mask_a) {
            mask_a = load_mask(*entry.mask_a);
            fs::create_directories(out_dir / "mask_a");
        }
        if (entry.mask_b) {
            mask_b = load_mask(*entry.mask_b);
            fs::create_directories(out_dir / "mask_b");
        }

        ++report.input_images;
        if (entry.grade) ++report.input_per_grade[static_cast<std::size_t>(grade_value(*entry.grade))];
        if (mask_a) (pixel_count(*mask_a) > 0 ? report.input_a_lesion : report.input_a_clean) += 1;
        if (mask_b) (pixel_count(*mask_b) > 0 ? report.input_b_lesion : report.input_b_clean) += 1;

        for (AugmentVariant v : kAllVariants) {
            const std::string out_id = entry.image_id + "__" + variant_tag(v);
            if (!written.insert(out_id).second)
                raise(ErrorKind::DuplicateOutputId, out_id);

            save_gray(apply_variant(image, v), out_dir / "images" / (out_id + ".png"));
            if (mask_a) {
                const BinaryMask m = apply_variant(*mask_a, v);
                save_mask(m, out_dir / "mask_a" / (out_id + ".png"));
                (pixel_count(m) > 0 ? report.output_a_lesion : report.output_a_clean) += 1;
            }
            if (mask_b) {
                const BinaryMask m = apply_variant(*mask_b, v);
                save_mask(m, out_dir / "mask_b" / (out_id + ".png"));
                (pixel_count(m) > 0 ? report.output_b_lesion : report.output_b_clean) += 1;
            }
            if (entry.grade) {
                ++report.output_per_grade[static_cast<std::size_t>(grade_value(*entry.grade))];
                out_grades.push_back({out_id, *entry.grade});
            }
            ++report.output_images;
        }
    }

    if (!out_grades.empty())
        write_grades_csv(out_dir / "grades.csv", out_grades);
    return report;
}

} // namespace drfuse
