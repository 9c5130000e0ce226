#include "drfuse/mask.hpp"
#include "drfuse/png_io.hpp"

#include "support.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <fstream>

using namespace drfuse;
using testutil::TempDir;

namespace {

BinaryMask mask_from(Dims dims, std::initializer_list<int> bits) {
    std::vector<std::uint8_t> px;
    for (int b : bits)
        px.push_back(static_cast<std::uint8_t>(b));
    return BinaryMask::from_pixels(dims, std::move(px));
}

} // namespace

TEST_CASE("rotate_ccw basics", "[mask]") {
    std::mt19937_64 rng(11);
    const auto m = testutil::random_mask(rng, {7, 5});

    SECTION("rotation by 0 is the identity") {
        CHECK(rotate_ccw(m, Rotation::Deg0) == m);
    }
    SECTION("four quarter turns are the identity") {
        auto r = m;
        for (int i = 0; i < 4; ++i)
            r = rotate_ccw(r, Rotation::Deg90);
        CHECK(r == m);
    }
    SECTION("2x1 mask maps (x,y) -> (y, W-1-x)") {
        const auto two = mask_from({2, 1}, {1, 0});
        const auto rotated = rotate_ccw(two, Rotation::Deg90);
        REQUIRE(rotated.dims() == Dims{1, 2});
        CHECK(rotated.at(0, 0) == 0);
        CHECK(rotated.at(0, 1) == 1);
    }
    SECTION("rotation then inverse rotation is the identity") {
        for (Rotation r : {Rotation::Deg90, Rotation::Deg180, Rotation::Deg270})
            CHECK(rotate_ccw(rotate_ccw(m, r), inverse(r)) == m);
    }
}

TEST_CASE("rotation and flip algebra over random masks", "[mask][property]") {
    std::mt19937_64 rng(12);
    for (int trial = 0; trial < 300; ++trial) {
        const Dims dims{static_cast<int>(1 + rng() % 24), static_cast<int>(1 + rng() % 24)};
        const auto m = testutil::random_mask(rng, dims);

        const auto r90 = rotate_ccw(m, Rotation::Deg90);
        const auto r180 = rotate_ccw(m, Rotation::Deg180);
        const auto r270 = rotate_ccw(m, Rotation::Deg270);

        // composition table
        CHECK(rotate_ccw(r90, Rotation::Deg90) == r180);
        CHECK(rotate_ccw(r180, Rotation::Deg90) == r270);
        CHECK(rotate_ccw(r180, Rotation::Deg180) == m);

        // oracle comparison
        CHECK(r90 == testutil::oracle::rotate(m, Rotation::Deg90));
        CHECK(r270 == testutil::oracle::rotate(m, Rotation::Deg270));

        // pixel count invariance
        CHECK(pixel_count(r90) == pixel_count(m));
        CHECK(pixel_count(r180) == pixel_count(m));

        // flips are involutions and preserve counts
        for (FlipAxis axis : {FlipAxis::Horizontal, FlipAxis::Vertical}) {
            const auto f = flip(m, axis);
            CHECK(flip(f, axis) == m);
            CHECK(pixel_count(f) == pixel_count(m));
        }
    }
}

TEST_CASE("flip coordinate maps", "[mask]") {
    const auto m = mask_from({2, 2}, {1, 0, 0, 0});
    const auto h = flip(m, FlipAxis::Horizontal);
    CHECK(h.at(1, 0) == 1);
    CHECK(pixel_count(h) == 1);
    const auto v = flip(m, FlipAxis::Vertical);
    CHECK(v.at(0, 1) == 1);

    // a symmetric mask is a fixed point
    const auto sym = mask_from({2, 2}, {1, 1, 1, 1});
    CHECK(flip(sym, FlipAxis::Horizontal) == sym);
}

TEST_CASE("resize_nearest", "[mask]") {
    SECTION("identity at equal dims") {
        std::mt19937_64 rng(13);
        const auto m = testutil::random_mask(rng, {9, 4});
        CHECK(resize_nearest(m, m.dims()) == m);
    }
    SECTION("constant masks stay constant") {
        const BinaryMask full({6, 6}, 1);
        const auto small = resize_nearest(full, {4, 4});
        CHECK(pixel_count(small) == 16);
    }
    SECTION("2x2 upscaled to 4x4 puts fg in the top-left block") {
        const auto m = mask_from({2, 2}, {1, 0, 0, 0});
        const auto big = resize_nearest(m, {4, 4});
        const auto expected = mask_from({4, 4}, {1, 1, 0, 0, 1, 1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0});
        CHECK(big == expected);
    }
    SECTION("matches the sampling-rule oracle on random masks") {
        std::mt19937_64 rng(14);
        for (int trial = 0; trial < 100; ++trial) {
            const Dims src{static_cast<int>(1 + rng() % 30), static_cast<int>(1 + rng() % 30)};
            const Dims dst{static_cast<int>(1 + rng() % 30), static_cast<int>(1 + rng() % 30)};
            const auto m = testutil::random_mask(rng, src);
            CHECK(resize_nearest(m, dst) == testutil::oracle::resize(m, dst));
        }
    }
    SECTION("binary stays binary") {
        std::mt19937_64 rng(15);
        const auto m = testutil::random_mask(rng, {96, 96});
        const auto r = resize_nearest(m, {64, 64});
        for (auto v : r.pixels())
            CHECK((v == 0 || v == 1));
    }
}

TEST_CASE("union, intersect and pixel_count", "[mask]") {
    std::mt19937_64 rng(16);
    const Dims dims{64, 64};
    const auto a = testutil::random_mask(rng, dims);
    const auto b = testutil::random_mask(rng, dims);
    const BinaryMask empty(dims, 0);
    const BinaryMask full(dims, 1);

    CHECK(mask_union(a, empty) == a);
    CHECK(mask_union(a, a) == a);
    CHECK(mask_union(a, b) == mask_union(b, a));
    CHECK(mask_union(a, b) == testutil::oracle::mask_or(a, b));

    CHECK(mask_intersect(a, full) == a);
    CHECK(pixel_count(mask_intersect(a, testutil::complement(a))) == 0);
    CHECK(mask_intersect(a, b) == testutil::oracle::mask_and(a, b));

    CHECK(pixel_count(empty) == 0);
    CHECK(pixel_count(full) == dims.area());
    CHECK(pixel_count(a) == testutil::oracle::count(a));
    CHECK(pixel_count(mask_union(a, b)) >= std::max(pixel_count(a), pixel_count(b)));

    CHECK_THROWS_MATCHES(mask_union(a, BinaryMask(3, 3)), Error,
                         Catch::Matchers::Predicate<Error>([](const Error& e) {
                             return e.kind() == ErrorKind::DimMismatch;
                         }));
}

TEST_CASE("mask PNG round trip", "[mask][io]") {
    TempDir tmp;
    std::mt19937_64 rng(17);

    SECTION("random 64x64 round trip") {
        const auto m = testutil::random_mask(rng, {64, 64});
        const auto path = tmp / "m.png";
        save_mask(m, path);
        CHECK(load_mask(path) == m);
    }
    SECTION("empty and full masks") {
        for (int fill : {0, 1}) {
            const BinaryMask m({16, 16}, static_cast<std::uint8_t>(fill));
            const auto path = tmp / ("c" + std::to_string(fill) + ".png");
            save_mask(m, path);
            CHECK(load_mask(path) == m);
        }
    }
    SECTION("threshold sits exactly at 128") {
        GrayImage img(2, 1);
        img.at(0, 0) = 127;
        img.at(1, 0) = 128;
        const auto path = tmp / "t.png";
        save_gray(img, path);
        const auto m = load_mask(path);
        CHECK(m.at(0, 0) == 0);
        CHECK(m.at(1, 0) == 1);
        CHECK(pixel_count(m) == 1);
    }
    SECTION("all-zero image loads as empty mask") {
        const GrayImage img({4, 4}, 0);
        const auto path = tmp / "z.png";
        save_gray(img, path);
        CHECK(pixel_count(load_mask(path)) == 0);
    }
    SECTION("checkerboard of 0/255 loads two foreground pixels") {
        GrayImage img({2, 2}, 0);
        img.at(0, 0) = 255;
        img.at(1, 1) = 255;
        const auto path = tmp / "cb.png";
        save_gray(img, path);
        CHECK(pixel_count(load_mask(path)) == 2);
    }
}

TEST_CASE("mask loading failure modes", "[mask][io]") {
    TempDir tmp;

    SECTION("missing file") {
        CHECK_THROWS_MATCHES(load_mask(tmp / "nope.png"), Error,
                             Catch::Matchers::Predicate<Error>([](const Error& e) {
                                 return e.kind() == ErrorKind::MissingFile;
                             }));
    }
    SECTION("not a PNG") {
        const auto path = tmp / "junk.png";
        std::ofstream(path) << "definitely not a png";
        CHECK_THROWS_MATCHES(load_mask(path), Error, Catch::Matchers::Predicate<Error>([](const Error& e) {
                                 return e.kind() == ErrorKind::DecodeError;
                             }));
    }
    SECTION("16-bit and RGB PNGs are rejected") {
        auto write_png = [&](const std::filesystem::path& path, int bit_depth, int color_type) {
            std::FILE* fp = std::fopen(path.string().c_str(), "wb");
            REQUIRE(fp);
            png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
            png_infop info = png_create_info_struct(png);
            REQUIRE(setjmp(png_jmpbuf(png)) == 0);
            png_init_io(png, fp);
            png_set_IHDR(png, info, 2, 2, bit_depth, color_type, PNG_INTERLACE_NONE,
                         PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
            png_write_info(png, info);
            const int channels = color_type == PNG_COLOR_TYPE_RGB ? 3 : 1;
            std::vector<png_byte> row(2 * channels * (bit_depth / 8), 0);
            for (int y = 0; y < 2; ++y)
                png_write_row(png, row.data());
            png_write_end(png, nullptr);
            png_destroy_write_struct(&png, &info);
            std::fclose(fp);
        };
        const auto deep = tmp / "16bit.png";
        write_png(deep, 16, PNG_COLOR_TYPE_GRAY);
        CHECK_THROWS_MATCHES(load_mask(deep), Error, Catch::Matchers::Predicate<Error>([](const Error& e) {
                                 return e.kind() == ErrorKind::UnsupportedBitDepth;
                             }));
        const auto rgb = tmp / "rgb.png";
        write_png(rgb, 8, PNG_COLOR_TYPE_RGB);
        CHECK_THROWS_MATCHES(load_mask(rgb), Error, Catch::Matchers::Predicate<Error>([](const Error& e) {
                                 return e.kind() == ErrorKind::UnsupportedBitDepth;
                             }));
    }
    SECTION("truncated PNG") {
        const auto good = tmp / "good.png";
        save_mask(BinaryMask({32, 32}, 1), good);
        std::ifstream in(good, std::ios::binary);
        std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        const auto bad = tmp / "bad.png";
        std::ofstream out(bad, std::ios::binary);
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size() / 2));
        out.close();
        CHECK_THROWS_AS(load_mask(bad), Error);
    }
}
