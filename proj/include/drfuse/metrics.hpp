#pragma once

#include "drfuse/error.hpp"
#include "drfuse/grade.hpp"
#include "drfuse/manifest.hpp"
#include "drfuse/mask.hpp"

#include <array>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace drfuse {

struct BinaryConfusion {
    std::int64_t tp = 0;
    std::int64_t fp = 0;
    std::int64_t fn = 0;
    std::int64_t tn = 0;

    std::int64_t total() const noexcept { return tp + fp + fn + tn; }

    BinaryConfusion& operator+=(const BinaryConfusion& o) noexcept {
        tp += o.tp;
        fp += o.fp;
        fn += o.fn;
        tn += o.tn;
        return *this;
    }
};

inline BinaryConfusion binary_confusion(const BinaryMask& pred, const BinaryMask& gt) {
    require_same_dims(pred, gt, "binary_confusion");
    BinaryConfusion c;
    const auto& pp = pred.pixels();
    const auto& pg = gt.pixels();
    for (std::size_t i = 0; i < pp.size(); ++i) {
        const bool p = pp[i] != 0;
        const bool g = pg[i] != 0;
        if (p && g) ++c.tp;
        else if (p && !g) ++c.fp;
        else if (!p && g) ++c.fn;
        else ++c.tn;
    }
    return c;
}

/// Dice = 2tp / (2tp + fp + fn). Empty-vs-empty (denominator 0) scores 1:
/// a lesion-free image predicted lesion-free is a correct prediction.
inline double dice(const BinaryConfusion& c) {
    const std::int64_t den = 2 * c.tp + c.fp + c.fn;
    if (den == 0)
        return 1.0;
    return 2.0 * static_cast<double>(c.tp) / static_cast<double>(den);
}

/// IoU = tp / (tp + fp + fn), with the same empty-vs-empty convention.
inline double iou(const BinaryConfusion& c) {
    const std::int64_t den = c.tp + c.fp + c.fn;
    if (den == 0)
        return 1.0;
    return static_cast<double>(c.tp) / static_cast<double>(den);
}

enum class SegAveraging {
    Aggregate,    // sum confusions over images, score once
    PerImageMean, // score each image, average the scores
};

struct ClassScore {
    LesionClass lesion;
    double iou = 0.0;
    double dice = 0.0;
    int images_counted = 0;
};

inline ClassScore dataset_class_score(std::span<const BinaryMask> preds, std::span<const BinaryMask> gts,
                                      LesionClass lesion, SegAveraging mode) {
    if (preds.size() != gts.size())
        raise(ErrorKind::LengthMismatch, "dataset_class_score: " + std::to_string(preds.size()) +
                                             " predictions vs " + std::to_string(gts.size()) + " ground truths");
    if (preds.empty())
        raise(ErrorKind::LengthMismatch, "dataset_class_score: empty dataset");

    ClassScore score;
    score.lesion = lesion;
    score.images_counted = static_cast<int>(preds.size());
    if (mode == SegAveraging::Aggregate) {
        BinaryConfusion sum;
        for (std::size_t i = 0; i < preds.size(); ++i)
            sum += binary_confusion(preds[i], gts[i]);
        score.iou = iou(sum);
        score.dice = dice(sum);
    } else {
        double iou_sum = 0.0;
        double dice_sum = 0.0;
        for (std::size_t i = 0; i < preds.size(); ++i) {
            const auto c = binary_confusion(preds[i], gts[i]);
            iou_sum += iou(c);
            dice_sum += dice(c);
        }
        score.iou = iou_sum / static_cast<double>(preds.size());
        score.dice = dice_sum / static_cast<double>(preds.size());
    }
    return score;
}

/// Unweighted mean of the three per-class dice values.
inline double mean_dsc(std::span<const double> class_dices) {
    if (class_dices.size() != 3)
        raise(ErrorKind::WrongArity, "mean_dsc expects exactly 3 class dice values, got " +
                                         std::to_string(class_dices.size()));
    return (class_dices[0] + class_dices[1] + class_dices[2]) / 3.0;
}

/// 3x3 ordinal confusion matrix; counts[a][r] = samples assigned grade a
/// whose reference grade is r.
struct GradeConfusion {
    std::array<std::array<std::int64_t, 3>, 3> counts{};

    std::int64_t total() const noexcept {
        std::int64_t n = 0;
        for (const auto& row : counts)
            for (auto v : row)
                n += v;
        return n;
    }
};

/// Join assigned and reference grade records on image_id.
inline GradeConfusion grade_confusion(std::span<const GradeRecord> assigned,
                                      std::span<const GradeRecord> reference) {
    std::map<std::string, Grade> ref;
    for (const auto& r : reference)
        if (!ref.emplace(r.image_id, r.grade).second)
            raise(ErrorKind::DuplicateId, "reference grades: duplicate image_id '" + r.image_id + "'");

    GradeConfusion cm;
    std::map<std::string, Grade> seen;
    for (const auto& a : assigned) {
        if (!seen.emplace(a.image_id, a.grade).second)
            raise(ErrorKind::DuplicateId, "assigned grades: duplicate image_id '" + a.image_id + "'");
        auto it = ref.find(a.image_id);
        if (it == ref.end())
            raise(ErrorKind::IdMismatch, "image_id '" + a.image_id + "' has no reference grade");
        ++cm.counts[static_cast<std::size_t>(grade_value(a.grade))]
                   [static_cast<std::size_t>(grade_value(it->second))];
    }
    if (seen.size() != ref.size())
        for (const auto& [id, g] : ref)
            if (!seen.count(id))
                raise(ErrorKind::IdMismatch, "image_id '" + id + "' has no assigned grade");
    return cm;
}

/// Quadratic weighted kappa over K = 3 grades: kappa = 1 - sum(wO)/sum(wE)
/// with w_ij = (i-j)^2/(K-1)^2 and E the outer product of the integer
/// marginals scaled to the total. Returns 1 when both the observed and the
/// expected weighted disagreement vanish.
inline double quadratic_weighted_kappa(const GradeConfusion& cm) {
    const std::int64_t n = cm.total();
    if (n == 0)
        raise(ErrorKind::EmptyMatrix, "quadratic_weighted_kappa: empty confusion matrix");

    std::array<std::int64_t, 3> row{};
    std::array<std::int64_t, 3> col{};
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j) {
            row[i] += cm.counts[i][j];
            col[j] += cm.counts[i][j];
        }

    double observed = 0.0;
    double expected = 0.0;
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j) {
            const double w = static_cast<double>((static_cast<int>(i) - static_cast<int>(j)) *
                                                 (static_cast<int>(i) - static_cast<int>(j))) /
                             4.0;
            observed += w * static_cast<double>(cm.counts[i][j]);
            expected += w * static_cast<double>(row[i]) * static_cast<double>(col[j]) / static_cast<double>(n);
        }

    if (expected == 0.0)
        return 1.0; // all mass on one diagonal cell: observed is 0 too
    return 1.0 - observed / expected;
}

} // namespace drfuse
