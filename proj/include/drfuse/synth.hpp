#pragma once

#include "drfuse/grade.hpp"
#include "drfuse/manifest.hpp"
#include "drfuse/mask.hpp"
#include "drfuse/png_io.hpp"

#include <algorithm>
#include <array>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <initializer_list>
#include <numeric>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace drfuse {

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Stable substream seed from a root seed plus stream tags, so generation
/// order never affects content.
inline std::uint64_t mix_seed(std::initializer_list<std::uint64_t> parts) {
    std::uint64_t s = 0x6a09e667f3bcc909ULL;
    for (auto p : parts)
        s = splitmix64(s ^ p);
    return s;
}

struct SynthRng {
    std::mt19937_64 eng;

    explicit SynthRng(std::uint64_t seed) : eng(seed) {}

    std::uint64_t next_u64() { return eng(); }
    // Uniform in [0,1); mapped by hand so output is engine-defined only.
    double next_double() { return static_cast<double>(eng() >> 11) * 0x1.0p-53; }
    std::int64_t next_in(std::int64_t lo, std::int64_t hi) {
        return lo + static_cast<std::int64_t>(eng() % static_cast<std::uint64_t>(hi - lo + 1));
    }
};

/// Smooth pseudo-random field in [0,1): coarse noise grid, bilinearly
/// upsampled. Gives connected blobby level sets.
inline std::vector<double> value_field(Dims dims, SynthRng& rng, int cell = 32) {
    const int gw = std::max(2, (dims.width + cell - 1) / cell);
    const int gh = std::max(2, (dims.height + cell - 1) / cell);
    std::vector<double> grid(static_cast<std::size_t>(gw) * gh);
    for (auto& v : grid)
        v = rng.next_double();

    std::vector<double> field(static_cast<std::size_t>(dims.area()));
    for (int y = 0; y < dims.height; ++y) {
        const double fy = dims.height > 1 ? static_cast<double>(y) * (gh - 1) / (dims.height - 1) : 0.0;
        const int y0 = static_cast<int>(fy);
        const int y1 = std::min(y0 + 1, gh - 1);
        const double ty = fy - y0;
        for (int x = 0; x < dims.width; ++x) {
            const double fx = dims.width > 1 ? static_cast<double>(x) * (gw - 1) / (dims.width - 1) : 0.0;
            const int x0 = static_cast<int>(fx);
            const int x1 = std::min(x0 + 1, gw - 1);
            const double tx = fx - x0;
            const double top = grid[static_cast<std::size_t>(y0) * gw + x0] * (1 - tx) +
                               grid[static_cast<std::size_t>(y0) * gw + x1] * tx;
            const double bot = grid[static_cast<std::size_t>(y1) * gw + x0] * (1 - tx) +
                               grid[static_cast<std::size_t>(y1) * gw + x1] * tx;
            field[static_cast<std::size_t>(y) * dims.width + x] = top * (1 - ty) + bot * ty;
        }
    }
    return field;
}

} // namespace detail

/// Deterministic blob mask with exactly k foreground pixels, k drawn
/// uniformly from [min_count, max_count]. The foreground is the top-k
/// level set of a smooth random field (ties broken by pixel index).
inline BinaryMask synth_blob_mask(Dims dims, std::uint64_t seed, std::int64_t min_count,
                                  std::int64_t max_count) {
    if (min_count < 0 || max_count < min_count || max_count > dims.area())
        raise(ErrorKind::InvalidArgument, "bad blob pixel band");

    detail::SynthRng rng(seed);
    const std::int64_t k = rng.next_in(min_count, max_count);
    const auto field = detail::value_field(dims, rng);

    std::vector<std::int32_t> order(field.size());
    std::iota(order.begin(), order.end(), 0);
    const auto above = [&](std::int32_t a, std::int32_t b) {
        if (field[a] != field[b])
            return field[a] > field[b];
        return a < b;
    };
    std::nth_element(order.begin(), order.begin() + k, order.end(), above);

    BinaryMask mask(dims, 0);
    for (std::int64_t i = 0; i < k; ++i)
        mask.pixels()[static_cast<std::size_t>(order[i])] = 1;
    return mask;
}

/// Deterministic grayscale test image from the same field machinery.
inline GrayImage synth_gray_image(Dims dims, std::uint64_t seed) {
    detail::SynthRng rng(seed);
    const auto field = detail::value_field(dims, rng, 16);
    GrayImage img(dims);
    for (std::size_t i = 0; i < field.size(); ++i)
        img.pixels()[i] = static_cast<std::uint8_t>(field[i] * 255.0);
    return img;
}

struct SynthConfig {
    std::uint64_t seed = 1;
    int n_images = 4;
    Dims canonical{1024, 1024};
    Dims highres{1536, 1536};
    bool include_convnext = true;
    /// Per-class foreground band as a fraction of mask area.
    std::array<std::pair<double, double>, 3> fg_band = {{{0.0002, 0.02}, {0.003, 0.05}, {0.0002, 0.02}}};
};

struct SynthResult {
    std::filesystem::path manifest_path;
    std::filesystem::path prelim_path;
    std::filesystem::path gt_dir;
    std::filesystem::path images_dir;
    std::size_t manifest_entries = 0;
};

inline std::string synth_image_id(int index) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "img%04d", index);
    return buf;
}

/// Generate a complete synthetic corpus: prediction masks + manifest,
/// per-class ground truth, source images, and preliminary grades. The
/// prediction for a rotated input is exactly the rotation of the base
/// prediction, so alignment round-trips are checkable end to end.
inline SynthResult generate_corpus(const SynthConfig& cfg, const std::filesystem::path& out_dir) {
    namespace fs = std::filesystem;
    if (cfg.n_images <= 0)
        raise(ErrorKind::InvalidArgument, "n_images must be positive");

    const fs::path pred_dir = out_dir / "predictions";
    const fs::path gt_dir = out_dir / "gt";
    const fs::path images_dir = out_dir / "images";
    fs::create_directories(pred_dir);
    fs::create_directories(gt_dir);
    fs::create_directories(images_dir);

    struct TermSpec {
        Model model;
        SourceResolution resolution;
        bool rotations;
    };
    std::vector<TermSpec> terms = {
        {Model::Mae, SourceResolution::Res1536, true},
        {Model::SegFormer, SourceResolution::Res1536, true},
        {Model::SegFormer, SourceResolution::Res1024, false},
    };
    if (cfg.include_convnext)
        terms.insert(terms.begin() + 1, {Model::ConvNext, SourceResolution::Res1536, true});

    PredictionManifest manifest;
    manifest.set_canonical_dims(cfg.canonical);
    std::vector<GradeRecord> prelim;

    for (int i = 0; i < cfg.n_images; ++i) {
        const std::string id = synth_image_id(i);

        detail::SynthRng grade_rng(detail::mix_seed({cfg.seed, 900, static_cast<std::uint64_t>(i)}));
        prelim.push_back({id, static_cast<Grade>(grade_rng.next_u64() % 3)});

        save_gray(synth_gray_image(cfg.canonical, detail::mix_seed({cfg.seed, 7001, static_cast<std::uint64_t>(i)})),
                  images_dir / (id + ".png"));

        for (LesionClass lesion : kLesionClasses) {
            const auto band = cfg.fg_band[class_index(lesion)];

            const Dims gt_dims = cfg.canonical;
            const auto gt_band_lo = static_cast<std::int64_t>(band.first * gt_dims.area());
            const auto gt_band_hi = static_cast<std::int64_t>(band.second * gt_dims.area());
            save_mask(synth_blob_mask(gt_dims,
                                      detail::mix_seed({cfg.seed, 600, static_cast<std::uint64_t>(i),
                                                        static_cast<std::uint64_t>(class_number(lesion))}),
                                      gt_band_lo, gt_band_hi),
                      gt_dir / (id + "__O" + std::to_string(class_number(lesion)) + ".png"));

            for (const auto& term : terms) {
                const Dims dims = term.resolution == SourceResolution::Res1536 ? cfg.highres : cfg.canonical;
                const auto lo = static_cast<std::int64_t>(band.first * dims.area());
                const auto hi = static_cast<std::int64_t>(band.second * dims.area());
                const BinaryMask base = synth_blob_mask(
                    dims, detail::mix_seed({cfg.seed, 500, static_cast<std::uint64_t>(i),
                                            static_cast<std::uint64_t>(class_number(lesion)),
                                            static_cast<std::uint64_t>(model_letter(term.model)),
                                            static_cast<std::uint64_t>(resolution_value(term.resolution))}),
                    lo, hi);

                std::vector<Rotation> rotations = {Rotation::Deg0};
                if (term.rotations)
                    rotations = {Rotation::Deg0, Rotation::Deg90, Rotation::Deg180, Rotation::Deg270};
                for (Rotation rot : rotations) {
                    const std::string name = id + "__c" + std::to_string(class_number(lesion)) + "__" +
                                             std::string(1, model_letter(term.model)) +
                                             std::to_string(resolution_value(term.resolution)) + "__r" +
                                             std::to_string(degrees(rot)) + ".png";
                    save_mask(rotate_ccw(base, rot), pred_dir / name);

                    ManifestEntry entry;
                    entry.key = {id, lesion, term.model, term.resolution, rot};
                    entry.variant =
                        term.model == Model::ConvNext ? ConvNextVariant::XL : ConvNextVariant::None;
                    entry.path = pred_dir / name;
                    manifest.add(std::move(entry));
                }
            }
        }
    }

    SynthResult result;
    result.manifest_path = out_dir / "manifest.csv";
    result.prelim_path = out_dir / "prelim.csv";
    result.gt_dir = gt_dir;
    result.images_dir = images_dir;
    result.manifest_entries = manifest.size();
    manifest.write_csv(result.manifest_path);
    write_grades_csv(result.prelim_path, prelim);
    return result;
}

} // namespace drfuse
