#pragma once

#include "drfuse/error.hpp"
#include "drfuse/mask.hpp"
#include "drfuse/manifest.hpp"
#include "drfuse/png_io.hpp"
#include "drfuse/recipe.hpp"

#include <array>
#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace drfuse {

/// Rotations a recipe term expects in the manifest: tau = 0 always, plus
/// 90/180/270 for multi-angle terms. A partial multi-angle set is an
/// error, not a silent subset.
inline std::vector<Rotation> required_rotations(const RecipeTerm& term) {
    if (term.multi_angle)
        return {Rotation::Deg0, Rotation::Deg90, Rotation::Deg180, Rotation::Deg270};
    return {Rotation::Deg0};
}

struct ValidationReport {
    std::vector<PredictionKey> missing_entries;
    std::vector<ManifestEntry> missing_files;

    bool ok() const noexcept { return missing_entries.empty() && missing_files.empty(); }

    std::vector<std::string> lines() const {
        std::vector<std::string> out;
        for (const auto& key : missing_entries)
            out.push_back("missing entry: " + to_string(key));
        for (const auto& entry : missing_files)
            out.push_back("missing file: " + entry.path.string() + " (" + to_string(entry.key) + ")");
        return out;
    }
};

/// Check that the manifest provides every (image, class, term, rotation)
/// the recipe needs, and that every needed file exists.
inline ValidationReport validate_manifest(const PredictionManifest& manifest, const FusionRecipe& recipe) {
    recipe.validate();
    ValidationReport report;
    for (const auto& image_id : manifest.image_ids()) {
        for (LesionClass lesion : kLesionClasses) {
            for (const auto& term : recipe.terms_for(lesion)) {
                for (Rotation rot : required_rotations(term)) {
                    PredictionKey key{image_id, lesion, term.model, term.resolution, rot};
                    const auto* entry = manifest.find(key);
                    if (!entry)
                        report.missing_entries.push_back(std::move(key));
                    else if (!std::filesystem::exists(entry->path))
                        report.missing_files.push_back(*entry);
                }
            }
        }
    }
    return report;
}

/// Register a prediction made on a tau-rotated input back to the
/// unrotated frame by applying the inverse (clockwise) rotation.
inline BinaryMask align_rotated_prediction(const BinaryMask& pred, Rotation input_rotation) {
    if ((input_rotation == Rotation::Deg90 || input_rotation == Rotation::Deg270) &&
        pred.width() != pred.height())
        raise(ErrorKind::NonSquareRotation,
              "aligning a " + std::to_string(degrees(input_rotation)) + "-degree prediction requires a square mask, got " +
                  to_string(pred.dims()));
    return rotate_ccw(pred, inverse(input_rotation));
}

/// Eq.-1 style multi-angle union: base OR the aligned rotated predictions.
/// Rotations must come from {90, 180, 270}, each at most once.
inline BinaryMask multi_angle_union(const BinaryMask& base,
                                    const std::vector<std::pair<Rotation, BinaryMask>>& rotated) {
    BinaryMask acc = base;
    bool seen[4] = {false, false, false, false};
    for (const auto& [rot, pred] : rotated) {
        if (rot == Rotation::Deg0)
            raise(ErrorKind::InvalidArgument, "multi-angle rotations must be 90, 180 or 270");
        const int slot = degrees(rot) / 90;
        if (seen[slot])
            raise(ErrorKind::DuplicateRotation,
                  "rotation " + std::to_string(degrees(rot)) + " supplied more than once");
        seen[slot] = true;
        acc = mask_union(acc, align_rotated_prediction(pred, rot));
    }
    return acc;
}

/// Rescale to the canonical output dims (identity if already there).
inline BinaryMask canonicalize(const BinaryMask& pred, Dims canonical) {
    if (pred.dims() == canonical)
        return pred;
    return resize_nearest(pred, canonical);
}

/// Source of prediction masks by key. Must throw Error(MissingPrediction)
/// for absent keys.
using MaskSource = std::function<BinaryMask(const PredictionKey&)>;

/// A MaskSource that loads mask files through the manifest.
inline MaskSource manifest_mask_source(const PredictionManifest& manifest) {
    return [&manifest](const PredictionKey& key) {
        const auto* entry = manifest.find(key);
        if (!entry)
            raise(ErrorKind::MissingPrediction, to_string(key));
        return load_mask(entry->path);
    };
}

/// Fuse one class of one image: per term, union the multi-angle rotations
/// in the source-resolution frame, rescale to canonical dims, then union
/// across terms.
inline BinaryMask compose_class(const MaskSource& source, const FusionRecipe& recipe, const std::string& image_id,
                                LesionClass lesion, Dims canonical) {
    const auto& terms = recipe.terms_for(lesion);
    if (terms.empty())
        raise(ErrorKind::InvalidConfig, "recipe '" + recipe.name + "' has no terms for class " +
                                            std::to_string(class_number(lesion)));
    BinaryMask acc;
    for (const auto& term : terms) {
        BinaryMask m = source({image_id, lesion, term.model, term.resolution, Rotation::Deg0});
        if (term.multi_angle) {
            std::vector<std::pair<Rotation, BinaryMask>> rotated;
            for (Rotation rot : {Rotation::Deg90, Rotation::Deg180, Rotation::Deg270})
                rotated.emplace_back(rot, source({image_id, lesion, term.model, term.resolution, rot}));
            m = multi_angle_union(m, rotated);
        }
        m = canonicalize(m, canonical);
        acc = acc.empty() ? std::move(m) : mask_union(acc, m);
    }
    return acc;
}

inline BinaryMask compose_class(const PredictionManifest& manifest, const FusionRecipe& recipe,
                                const std::string& image_id, LesionClass lesion) {
    return compose_class(manifest_mask_source(manifest), recipe, image_id, lesion, manifest.canonical_dims());
}

/// The three fused per-class outputs of one image. `overlap13` is empty
/// until the postprocess stage fills it.
struct FusedOutput {
    std::string image_id;
    BinaryMask o1;
    BinaryMask o2;
    BinaryMask o3;
    BinaryMask overlap13;

    const BinaryMask& by_class(LesionClass c) const {
        switch (c) {
        case LesionClass::Irma: return o1;
        case LesionClass::Nonperfusion: return o2;
        case LesionClass::Neovascularization: return o3;
        }
        raise(ErrorKind::InvalidArgument, "bad lesion class");
    }
};

inline FusedOutput fuse_image(const MaskSource& source, const FusionRecipe& recipe, const std::string& image_id,
                              Dims canonical) {
    FusedOutput out;
    out.image_id = image_id;
    out.o1 = compose_class(source, recipe, image_id, LesionClass::Irma, canonical);
    out.o2 = compose_class(source, recipe, image_id, LesionClass::Nonperfusion, canonical);
    out.o3 = compose_class(source, recipe, image_id, LesionClass::Neovascularization, canonical);
    out.overlap13 = BinaryMask(canonical, 0);
    return out;
}

inline FusedOutput fuse_image(const PredictionManifest& manifest, const FusionRecipe& recipe,
                              const std::string& image_id) {
    return fuse_image(manifest_mask_source(manifest), recipe, image_id, manifest.canonical_dims());
}

} // namespace drfuse
