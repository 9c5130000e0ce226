#pragma once

#include "drfuse/csv.hpp"
#include "drfuse/error.hpp"
#include "drfuse/geometry.hpp"

#include <compare>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace drfuse {

/// Upstream segmentation model: m = MAE, c = ConvNeXt, s = SegFormer.
enum class Model : char { Mae = 'm', ConvNext = 'c', SegFormer = 's' };

/// ConvNeXt size annotation. Metadata only: fusion and manifest lookup
/// ignore it.
enum class ConvNextVariant { None, L, XL };

inline char model_letter(Model m) noexcept { return static_cast<char>(m); }

inline Model model_from_string(const std::string& s) {
    if (s == "m") return Model::Mae;
    if (s == "c") return Model::ConvNext;
    if (s == "s") return Model::SegFormer;
    raise(ErrorKind::ParseError, "model must be m, c or s, got '" + s + "'");
}

inline std::string to_string(ConvNextVariant v) {
    switch (v) {
    case ConvNextVariant::None: return "";
    case ConvNextVariant::L: return "L";
    case ConvNextVariant::XL: return "XL";
    }
    return "";
}

inline ConvNextVariant variant_from_string(const std::string& s) {
    if (s.empty()) return ConvNextVariant::None;
    if (s == "L") return ConvNextVariant::L;
    if (s == "XL") return ConvNextVariant::XL;
    raise(ErrorKind::ParseError, "variant must be empty, L or XL, got '" + s + "'");
}

/// Lesion classes of the three fused outputs O1, O2, O3.
enum class LesionClass : int { Irma = 1, Nonperfusion = 2, Neovascularization = 3 };

inline constexpr LesionClass kLesionClasses[] = {LesionClass::Irma, LesionClass::Nonperfusion,
                                                 LesionClass::Neovascularization};

inline int class_number(LesionClass c) noexcept { return static_cast<int>(c); }

/// 0-based index for array storage.
inline std::size_t class_index(LesionClass c) noexcept { return static_cast<std::size_t>(class_number(c) - 1); }

inline LesionClass lesion_class_from_int(long long v) {
    if (v < 1 || v > 3)
        raise(ErrorKind::ParseError, "lesion class must be 1, 2 or 3, got " + std::to_string(v));
    return static_cast<LesionClass>(v);
}

/// Resolution tag of an upstream prediction: the size the network saw.
enum class SourceResolution : int { Res1024 = 1024, Res1536 = 1536 };

inline int resolution_value(SourceResolution r) noexcept { return static_cast<int>(r); }

inline SourceResolution resolution_from_int(long long v) {
    if (v == 1024) return SourceResolution::Res1024;
    if (v == 1536) return SourceResolution::Res1536;
    raise(ErrorKind::ParseError, "resolution must be 1024 or 1536, got " + std::to_string(v));
}

/// Identity of one prediction mask. The ConvNeXt variant is deliberately
/// not part of the key.
struct PredictionKey {
    std::string image_id;
    LesionClass lesion;
    Model model;
    SourceResolution resolution;
    Rotation rotation;

    friend auto operator<=>(const PredictionKey&, const PredictionKey&) = default;
};

inline std::string to_string(const PredictionKey& k) {
    return k.image_id + " class=" + std::to_string(class_number(k.lesion)) + " model=" +
           std::string(1, model_letter(k.model)) + " res=" + std::to_string(resolution_value(k.resolution)) +
           " rot=" + std::to_string(degrees(k.rotation));
}

struct ManifestEntry {
    PredictionKey key;
    ConvNextVariant variant = ConvNextVariant::None;
    std::filesystem::path path;
};

/// Index of prediction mask files. Entries are keyed by PredictionKey;
/// rotations are never inferred from filenames.
class PredictionManifest {
public:
    void add(ManifestEntry entry) {
        auto [it, inserted] = entries_.emplace(entry.key, std::move(entry));
        if (!inserted)
            raise(ErrorKind::DuplicateId, "duplicate manifest entry: " + to_string(it->first));
    }

    const ManifestEntry* find(const PredictionKey& key) const {
        auto it = entries_.find(key);
        return it == entries_.end() ? nullptr : &it->second;
    }

    std::size_t size() const noexcept { return entries_.size(); }

    const std::map<PredictionKey, ManifestEntry>& entries() const noexcept { return entries_; }

    /// Sorted unique image ids.
    std::vector<std::string> image_ids() const {
        std::vector<std::string> ids;
        for (const auto& [key, entry] : entries_)
            if (ids.empty() || ids.back() != key.image_id)
                ids.push_back(key.image_id);
        return ids;
    }

    Dims canonical_dims() const noexcept { return canonical_dims_; }
    void set_canonical_dims(Dims d) {
        if (d.width <= 0 || d.height <= 0)
            raise(ErrorKind::InvalidConfig, "canonical dims must be positive");
        canonical_dims_ = d;
    }

    /// Parse a manifest CSV with columns image_id,class,model,variant,
    /// resolution,rotation,path. Relative mask paths are resolved against
    /// the directory containing the CSV.
    static PredictionManifest load_csv(const std::filesystem::path& path) {
        const auto table = csv::read_file(path);
        const std::string ctx = path.string();
        const auto id_col = csv::column(table, "image_id", ctx);
        const auto class_col = csv::column(table, "class", ctx);
        const auto model_col = csv::column(table, "model", ctx);
        const auto variant_col = csv::column(table, "variant", ctx);
        const auto res_col = csv::column(table, "resolution", ctx);
        const auto rot_col = csv::column(table, "rotation", ctx);
        const auto path_col = csv::column(table, "path", ctx);

        const auto base = path.has_parent_path() ? path.parent_path() : std::filesystem::path(".");
        PredictionManifest manifest;
        for (const auto& row : table.rows) {
            ManifestEntry entry;
            entry.key.image_id = row[id_col];
            entry.key.lesion = lesion_class_from_int(csv::parse_int(row[class_col], ctx));
            entry.key.model = model_from_string(row[model_col]);
            entry.key.resolution = resolution_from_int(csv::parse_int(row[res_col], ctx));
            entry.key.rotation = rotation_from_degrees(static_cast<int>(csv::parse_int(row[rot_col], ctx)));
            entry.variant = variant_from_string(row[variant_col]);
            std::filesystem::path p = row[path_col];
            entry.path = p.is_absolute() ? p : base / p;
            manifest.add(std::move(entry));
        }
        return manifest;
    }

    /// Write the manifest with paths relative to the CSV's directory when
    /// possible, so the corpus is relocatable.
    void write_csv(const std::filesystem::path& path) const {
        const auto base = path.has_parent_path() ? path.parent_path() : std::filesystem::path(".");
        std::vector<std::vector<std::string>> rows;
        rows.reserve(entries_.size());
        for (const auto& [key, entry] : entries_) {
            auto rel = entry.path.lexically_proximate(base);
            rows.push_back({key.image_id, std::to_string(class_number(key.lesion)),
                            std::string(1, model_letter(key.model)), to_string(entry.variant),
                            std::to_string(resolution_value(key.resolution)), std::to_string(degrees(key.rotation)),
                            rel.generic_string()});
        }
        csv::write_file(path, {"image_id", "class", "model", "variant", "resolution", "rotation", "path"}, rows);
    }

private:
    std::map<PredictionKey, ManifestEntry> entries_;
    Dims canonical_dims_{1024, 1024};
};

} // namespace drfuse
