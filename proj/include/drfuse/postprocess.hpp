#pragma once

#include "drfuse/mask.hpp"

#include <string>

namespace drfuse {

struct OverlapReport {
    std::string image_id;
    std::int64_t overlap_pixels = 0;
    double overlap_fraction_of_1 = 0.0; // 0 when O1 is empty
    double overlap_fraction_of_3 = 0.0; // 0 when O3 is empty
};

struct DistributeResult {
    BinaryMask o1;
    BinaryMask o3;
    OverlapReport report;
};

/// Resolve the class-1 / class-3 overlap by distributing it into both
/// outputs. On binary per-class masks this leaves the masks unchanged;
/// the stage exists so the overlap is measured and reported, and so an
/// arbitration policy could be slotted in behind the same interface.
inline DistributeResult distribute_overlap(const BinaryMask& o1, const BinaryMask& o3,
                                           std::string image_id = {}) {
    require_same_dims(o1, o3, "distribute_overlap");
    const BinaryMask overlap = mask_intersect(o1, o3);

    DistributeResult result;
    result.o1 = mask_union(o1, overlap);
    result.o3 = mask_union(o3, overlap);
    result.report.image_id = std::move(image_id);
    result.report.overlap_pixels = pixel_count(overlap);

    const auto n1 = pixel_count(o1);
    const auto n3 = pixel_count(o3);
    result.report.overlap_fraction_of_1 = n1 ? static_cast<double>(result.report.overlap_pixels) / n1 : 0.0;
    result.report.overlap_fraction_of_3 = n3 ? static_cast<double>(result.report.overlap_pixels) / n3 : 0.0;
    return result;
}

} // namespace drfuse
