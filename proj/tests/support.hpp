#pragma once

#include "drfuse/geometry.hpp"
#include "drfuse/mask.hpp"

#include <array>
#include <atomic>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

namespace testutil {

using drfuse::BinaryMask;
using drfuse::Dims;
using drfuse::Rotation;

/// Unique scratch directory, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& label = "drfuse-test") {
        static std::atomic<unsigned> counter{0};
        std::random_device rd;
        const auto tag = std::to_string(rd()) + "-" + std::to_string(counter.fetch_add(1));
        path_ = std::filesystem::temp_directory_path() / (label + "-" + tag);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

inline BinaryMask random_mask(std::mt19937_64& rng, Dims dims, double fg_prob = 0.3) {
    BinaryMask m(dims);
    const auto cut = static_cast<std::uint64_t>(fg_prob * 4294967296.0);
    for (auto& px : m.pixels())
        px = (rng() & 0xffffffffULL) < cut ? 1 : 0;
    return m;
}

inline BinaryMask complement(const BinaryMask& m) {
    BinaryMask out(m.dims());
    for (std::size_t i = 0; i < m.pixels().size(); ++i)
        out.pixels()[i] = m.pixels()[i] ? 0 : 1;
    return out;
}

// ---------------------------------------------------------------------
// Independent oracles. These re-derive each result pixel by pixel from
// the definitions and never call the library's vectorized paths.
// ---------------------------------------------------------------------
namespace oracle {

inline std::int64_t count(const BinaryMask& m) {
    std::int64_t n = 0;
    for (int y = 0; y < m.height(); ++y)
        for (int x = 0; x < m.width(); ++x)
            if (m.at(x, y)) ++n;
    return n;
}

inline BinaryMask mask_or(const BinaryMask& a, const BinaryMask& b) {
    BinaryMask out(a.dims());
    for (int y = 0; y < a.height(); ++y)
        for (int x = 0; x < a.width(); ++x)
            out.at(x, y) = (a.at(x, y) != 0 || b.at(x, y) != 0) ? 1 : 0;
    return out;
}

inline BinaryMask mask_and(const BinaryMask& a, const BinaryMask& b) {
    BinaryMask out(a.dims());
    for (int y = 0; y < a.height(); ++y)
        for (int x = 0; x < a.width(); ++x)
            out.at(x, y) = (a.at(x, y) != 0 && b.at(x, y) != 0) ? 1 : 0;
    return out;
}

/// Rotation by repeated single quarter turns with the inverse coordinate
/// map: output (x, y) pulls from input (W_in - 1 - y, x).
inline BinaryMask rotate90(const BinaryMask& src) {
    BinaryMask out(Dims{src.height(), src.width()});
    for (int y = 0; y < out.height(); ++y)
        for (int x = 0; x < out.width(); ++x)
            out.at(x, y) = src.at(src.width() - 1 - y, x);
    return out;
}

inline BinaryMask rotate(const BinaryMask& src, Rotation r) {
    BinaryMask out = src;
    for (int i = 0; i < drfuse::degrees(r) / 90; ++i)
        out = rotate90(out);
    return out;
}

/// Undo a ccw input rotation: rotate the remaining (360 - tau) degrees.
inline BinaryMask align(const BinaryMask& pred, Rotation input_rotation) {
    BinaryMask out = pred;
    for (int i = 0; i < (360 - drfuse::degrees(input_rotation)) % 360 / 90; ++i)
        out = rotate90(out);
    return out;
}

/// Nearest-neighbor resize straight from the sampling rule,
/// floor((i + 0.5) * src / dst), evaluated per output pixel in floating
/// point.
inline BinaryMask resize(const BinaryMask& src, Dims target) {
    BinaryMask out(target);
    for (int y = 0; y < target.height; ++y)
        for (int x = 0; x < target.width; ++x) {
            const int sx = static_cast<int>((x + 0.5) * src.width() / target.width);
            const int sy = static_cast<int>((y + 0.5) * src.height() / target.height);
            out.at(x, y) = src.at(sx, sy);
        }
    return out;
}

/// Quadratic weighted kappa in exact integer arithmetic:
/// kappa = (B - A*N) / B with A = sum (i-j)^2 O_ij and
/// B = sum (i-j)^2 row_i col_j. The common 1/(K-1)^2 weight factor
/// cancels.
inline long double kappa_exact(const std::array<std::array<std::int64_t, 3>, 3>& counts) {
    std::int64_t n = 0;
    std::array<std::int64_t, 3> row{};
    std::array<std::int64_t, 3> col{};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            n += counts[i][j];
            row[i] += counts[i][j];
            col[j] += counts[i][j];
        }
    std::int64_t a = 0;
    std::int64_t b = 0;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            a += static_cast<std::int64_t>((i - j) * (i - j)) * counts[i][j];
            b += static_cast<std::int64_t>((i - j) * (i - j)) * row[i] * col[j];
        }
    if (b == 0)
        return 1.0L;
    return static_cast<long double>(b - a * n) / static_cast<long double>(b);
}

} // namespace oracle
} // namespace testutil
