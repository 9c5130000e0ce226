#pragma once

#include "drfuse/error.hpp"

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace drfuse {

struct Dims {
    int width = 0;
    int height = 0;

    std::int64_t area() const noexcept {
        return static_cast<std::int64_t>(width) * height;
    }
    friend bool operator==(const Dims&, const Dims&) = default;
};

inline std::string to_string(const Dims& d) {
    return std::to_string(d.width) + "x" + std::to_string(d.height);
}

/// Counterclockwise rotation, restricted to quarter turns.
enum class Rotation : int { Deg0 = 0, Deg90 = 90, Deg180 = 180, Deg270 = 270 };

inline int degrees(Rotation r) noexcept { return static_cast<int>(r); }

inline Rotation rotation_from_degrees(int deg) {
    switch (deg) {
    case 0: return Rotation::Deg0;
    case 90: return Rotation::Deg90;
    case 180: return Rotation::Deg180;
    case 270: return Rotation::Deg270;
    default:
        raise(ErrorKind::ParseError, "rotation must be one of 0/90/180/270, got " + std::to_string(deg));
    }
}

/// The rotation that undoes `r`: ccw by (360 - r) mod 360.
inline Rotation inverse(Rotation r) noexcept {
    return static_cast<Rotation>((360 - degrees(r)) % 360);
}

enum class FlipAxis { Horizontal, Vertical };

/// Row-major 2-D pixel grid. Pixel (x, y) has x as the column index and
/// y as the row index, y = 0 at the top.
template <typename T>
class Raster {
public:
    Raster() = default;

    explicit Raster(Dims dims, T fill = T{}) : dims_(dims) {
        if (dims.width <= 0 || dims.height <= 0)
            raise(ErrorKind::InvalidArgument, "raster dims must be positive, got " + to_string(dims));
        pixels_.assign(static_cast<std::size_t>(dims.area()), fill);
    }

    Raster(int width, int height, T fill = T{}) : Raster(Dims{width, height}, fill) {}

    static Raster from_pixels(Dims dims, std::vector<T> pixels) {
        Raster r(dims);
        if (pixels.size() != static_cast<std::size_t>(dims.area()))
            raise(ErrorKind::InvalidArgument, "pixel buffer size does not match dims " + to_string(dims));
        r.pixels_ = std::move(pixels);
        return r;
    }

    int width() const noexcept { return dims_.width; }
    int height() const noexcept { return dims_.height; }
    Dims dims() const noexcept { return dims_; }
    bool empty() const noexcept { return pixels_.empty(); }

    T at(int x, int y) const { return pixels_[index(x, y)]; }
    T& at(int x, int y) { return pixels_[index(x, y)]; }

    const std::vector<T>& pixels() const noexcept { return pixels_; }
    std::vector<T>& pixels() noexcept { return pixels_; }

    friend bool operator==(const Raster&, const Raster&) = default;

private:
    std::size_t index(int x, int y) const noexcept {
        return static_cast<std::size_t>(y) * dims_.width + x;
    }

    Dims dims_;
    std::vector<T> pixels_;
};

/// Rotate counterclockwise by a quarter-turn multiple. For 90 degrees the
/// pixel map is (x, y) -> (y, W-1-x) with output dims swapped.
template <typename T>
Raster<T> rotate_ccw(const Raster<T>& src, Rotation r) {
    const int w = src.width();
    const int h = src.height();
    switch (r) {
    case Rotation::Deg0:
        return src;
    case Rotation::Deg90: {
        Raster<T> out(h, w);
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x)
                out.at(y, w - 1 - x) = src.at(x, y);
        return out;
    }
    case Rotation::Deg180: {
        Raster<T> out(w, h);
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x)
                out.at(w - 1 - x, h - 1 - y) = src.at(x, y);
        return out;
    }
    case Rotation::Deg270: {
        Raster<T> out(h, w);
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x)
                out.at(h - 1 - y, x) = src.at(x, y);
        return out;
    }
    }
    raise(ErrorKind::InvalidArgument, "invalid rotation value");
}

template <typename T>
Raster<T> flip(const Raster<T>& src, FlipAxis axis) {
    const int w = src.width();
    const int h = src.height();
    Raster<T> out(w, h);
    if (axis == FlipAxis::Horizontal) {
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x)
                out.at(w - 1 - x, y) = src.at(x, y);
    } else {
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x)
                out.at(x, h - 1 - y) = src.at(x, y);
    }
    return out;
}

/// Nearest-neighbor resize with pixel-center sampling:
/// source index = floor((i + 0.5) * src / dst), computed in exact integer
/// arithmetic. Only pixel values present in the input can appear in the
/// output, so binary rasters stay binary.
template <typename T>
Raster<T> resize_nearest(const Raster<T>& src, Dims target) {
    if (target.width <= 0 || target.height <= 0)
        raise(ErrorKind::InvalidArgument, "resize target must be positive, got " + to_string(target));
    if (target == src.dims())
        return src;

    std::vector<int> xmap(static_cast<std::size_t>(target.width));
    std::vector<int> ymap(static_cast<std::size_t>(target.height));
    for (int x = 0; x < target.width; ++x)
        xmap[x] = static_cast<int>((2LL * x + 1) * src.width() / (2LL * target.width));
    for (int y = 0; y < target.height; ++y)
        ymap[y] = static_cast<int>((2LL * y + 1) * src.height() / (2LL * target.height));

    Raster<T> out(target);
    for (int y = 0; y < target.height; ++y) {
        const int sy = ymap[y];
        for (int x = 0; x < target.width; ++x)
            out.at(x, y) = src.at(xmap[x], sy);
    }
    return out;
}

} // namespace drfuse
