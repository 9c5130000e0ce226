#pragma once

#include "drfuse/error.hpp"
#include "drfuse/geometry.hpp"

#include <cstdint>

namespace drfuse {

/// Binary lesion mask: every pixel is 0 (background) or 1 (foreground).
/// All producers in this library (file loading, set operations, fusion)
/// emit normalized 0/1 rasters.
using BinaryMask = Raster<std::uint8_t>;

/// 8-bit grayscale raster; shares the geometric primitives with BinaryMask.
using GrayImage = Raster<std::uint8_t>;

inline void require_same_dims(const BinaryMask& a, const BinaryMask& b, const char* op) {
    if (a.dims() != b.dims())
        raise(ErrorKind::DimMismatch,
              std::string(op) + " requires equal dims, got " + to_string(a.dims()) + " vs " + to_string(b.dims()));
}

/// Per-pixel logical OR.
inline BinaryMask mask_union(const BinaryMask& a, const BinaryMask& b) {
    require_same_dims(a, b, "union");
    BinaryMask out(a.dims());
    const auto& pa = a.pixels();
    const auto& pb = b.pixels();
    auto& po = out.pixels();
    for (std::size_t i = 0; i < pa.size(); ++i)
        po[i] = (pa[i] || pb[i]) ? 1 : 0;
    return out;
}

/// Per-pixel logical AND.
inline BinaryMask mask_intersect(const BinaryMask& a, const BinaryMask& b) {
    require_same_dims(a, b, "intersect");
    BinaryMask out(a.dims());
    const auto& pa = a.pixels();
    const auto& pb = b.pixels();
    auto& po = out.pixels();
    for (std::size_t i = 0; i < pa.size(); ++i)
        po[i] = (pa[i] && pb[i]) ? 1 : 0;
    return out;
}

/// Number of foreground pixels.
inline std::int64_t pixel_count(const BinaryMask& m) {
    std::int64_t n = 0;
    for (auto v : m.pixels())
        n += v ? 1 : 0;
    return n;
}

/// True iff every foreground pixel of `inner` is foreground in `outer`.
inline bool mask_subset(const BinaryMask& inner, const BinaryMask& outer) {
    require_same_dims(inner, outer, "subset");
    const auto& pi = inner.pixels();
    const auto& po = outer.pixels();
    for (std::size_t i = 0; i < pi.size(); ++i)
        if (pi[i] && !po[i])
            return false;
    return true;
}

/// Threshold a grayscale raster into a 0/1 mask (value >= threshold is foreground).
inline BinaryMask binarize(const GrayImage& img, std::uint8_t threshold = 128) {
    BinaryMask out(img.dims());
    const auto& pi = img.pixels();
    auto& po = out.pixels();
    for (std::size_t i = 0; i < pi.size(); ++i)
        po[i] = pi[i] >= threshold ? 1 : 0;
    return out;
}

} // namespace drfuse
