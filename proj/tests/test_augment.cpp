#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

#include <stimkit/augment.hpp>

#include "testutil.hpp"

using namespace stimkit;

TEST_CASE("hflip mirrors columns and is an involution", "[augment]") {
    std::mt19937_64 rng(501);
    const Frame f = testutil::random_frame(9, 6, rng);
    const Frame g = hflip(f);
    for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 9; ++j) CHECK(g.at(i, j) == f.at(i, 8 - j));
    CHECK(hflip(g) == f);
}

TEST_CASE("vflip mirrors rows and is an involution", "[augment]") {
    std::mt19937_64 rng(502);
    const Frame f = testutil::random_frame(5, 8, rng);
    const Frame g = vflip(f);
    for (int i = 0; i < 8; ++i)
        for (int j = 0; j < 5; ++j) CHECK(g.at(i, j) == f.at(7 - i, j));
    CHECK(vflip(g) == f);
}

TEST_CASE("flips commute", "[augment]") {
    std::mt19937_64 rng(503);
    const Frame f = testutil::random_frame(7, 7, rng);
    CHECK(hflip(vflip(f)) == vflip(hflip(f)));
}

TEST_CASE("invert_color is 255 minus each channel", "[augment]") {
    std::mt19937_64 rng(504);
    const Frame f = testutil::random_frame(6, 4, rng);
    const Frame g = invert_color(f);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 6; ++j)
            for (int c = 0; c < 3; ++c) CHECK(int(g.at(i, j)[c]) == 255 - int(f.at(i, j)[c]));
    CHECK(invert_color(g) == f);
}

TEST_CASE("rotate by zero degrees is exact identity", "[augment]") {
    std::mt19937_64 rng(505);
    for (int round = 0; round < 5; ++round) {
        const Frame f = testutil::random_frame(11 + round, 7 + round, rng);
        CHECK(rotate(f, 0.0) == f);
    }
}

TEST_CASE("rotate 90 degrees permutes pixels on a square frame", "[augment]") {
    std::mt19937_64 rng(506);
    for (int n : {8, 9}) {
        const Frame f = testutil::random_frame(n, n, rng);
        const Frame g = rotate(f, 90.0);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) CHECK(g.at(i, j) == f.at(n - 1 - j, i));
        const Frame h = rotate(f, -90.0);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) CHECK(h.at(i, j) == f.at(j, n - 1 - i));
        CHECK(rotate(g, -90.0) == f);
    }
}

TEST_CASE("rotate of a constant frame is constant", "[augment]") {
    const Frame f(10, 12, Rgb{41, 142, 243});
    for (double deg : {13.7, 25.0, 91.3, -200.0}) CHECK(rotate(f, deg) == f);
}

TEST_CASE("rotate round trip is tight on smooth frames", "[augment]") {
    std::mt19937_64 rng(507);
    for (int round = 0; round < 8; ++round) {
        const int w = 21 + static_cast<int>(rng() % 8);
        const int h = 21 + static_cast<int>(rng() % 8);
        const int ax = static_cast<int>(rng() % 5) - 2;
        const int ay = static_cast<int>(rng() % 5) - 2;
        const Frame f = testutil::gradient_frame(w, h, 128, ax, ay);
        const Frame back = rotate(rotate(f, 25.0), -25.0);

        const double cx = (w - 1) / 2.0, cy = (h - 1) / 2.0;
        const double radius = std::min(cx, cy) - 5.0;
        int checked = 0;
        for (int i = 0; i < h; ++i)
            for (int j = 0; j < w; ++j) {
                const double dx = j - cx, dy = i - cy;
                if (dx * dx + dy * dy > radius * radius) continue;
                ++checked;
                for (int c = 0; c < 3; ++c)
                    CHECK(std::abs(int(back.at(i, j)[c]) - int(f.at(i, j)[c])) <= 2);
            }
        CHECK(checked > 0);
    }
}

TEST_CASE("rotate full circle lands back on the input", "[augment]") {
    std::mt19937_64 rng(508);
    const Frame f = testutil::random_frame(12, 10, rng);
    const Frame g = rotate(f, 360.0);
    for (int i = 0; i < 10; ++i)
        for (int j = 0; j < 12; ++j)
            for (int c = 0; c < 3; ++c)
                CHECK(std::abs(int(g.at(i, j)[c]) - int(f.at(i, j)[c])) <= 1);
}

TEST_CASE("upsample with alpha one is exact identity", "[augment]") {
    std::mt19937_64 rng(509);
    const Frame f = testutil::random_frame(9, 7, rng);
    CHECK(upsample_spatial(f, 1.0) == f);
}

TEST_CASE("upsample by two reproduces source pixels on the even lattice", "[augment]") {
    std::mt19937_64 rng(510);
    const Frame f = testutil::random_frame(8, 6, rng);
    const Frame g = upsample_spatial(f, 2.0);
    REQUIRE(g.width() == 16);
    REQUIRE(g.height() == 12);
    for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 8; ++j) CHECK(g.at(2 * i, 2 * j) == f.at(i, j));
}

TEST_CASE("upsample of a constant frame is constant", "[augment]") {
    const Frame f(5, 4, Rgb{9, 99, 199});
    for (double alpha : {1.5, 2.0, 3.0}) {
        const Frame g = upsample_spatial(f, alpha);
        for (const Rgb& p : g.pixels()) CHECK(p == Rgb{9, 99, 199});
    }
}

TEST_CASE("upsample output dimensions round half up", "[augment]") {
    const Frame a(3, 3);
    CHECK(upsample_spatial(a, 1.5).width() == 5);  // 4.5 rounds up
    const Frame b(8, 8);
    const Frame g = upsample_spatial(b, 0.25);
    CHECK(g.width() == 2);
    CHECK(g.height() == 2);
}

TEST_CASE("upsample tracks a linear ramp away from the borders", "[augment]") {
    const int n = 16;
    const Frame f = testutil::gradient_frame(n, n, 5, 3, 0);
    const double alpha = 2.0;
    const Frame g = upsample_spatial(f, alpha);
    for (int j = 0; j < g.width(); ++j) {
        const double pos = j / alpha;
        if (pos < 1.0 || pos > n - 2.0) continue;  // cubic taps fully interior
        const double expect = 5.0 + 3.0 * pos;
        CHECK(std::abs(g.at(8, j)[0] - expect) <= 1.0);
    }
}

TEST_CASE("upsample validates alpha", "[augment]") {
    const Frame f(3, 3);
    CHECK_THROWS_AS(upsample_spatial(f, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(upsample_spatial(f, -2.0), std::invalid_argument);
    CHECK_THROWS_AS(upsample_spatial(f, std::nan("")), std::invalid_argument);
    CHECK_THROWS_AS(upsample_spatial(f, 0.01), std::invalid_argument);  // empty output
}

TEST_CASE("reflect101 mirrors without repeating edges", "[augment]") {
    CHECK(detail::reflect101(0, 1) == 0);
    CHECK(detail::reflect101(5, 1) == 0);
    CHECK(detail::reflect101(-3, 1) == 0);
    // n = 4: ... 3 2 1 | 0 1 2 3 | 2 1 0 ...
    CHECK(detail::reflect101(-1, 4) == 1);
    CHECK(detail::reflect101(-3, 4) == 3);
    CHECK(detail::reflect101(4, 4) == 2);
    CHECK(detail::reflect101(6, 4) == 0);
    for (int idx = 0; idx < 4; ++idx) CHECK(detail::reflect101(idx, 4) == idx);
}

TEST_CASE("temporal downsample keeps every beta-th frame", "[augment]") {
    const VideoClip clip = testutil::make_clip("t", ClassLabel::Spinning, 5, 4, 4, 30.0, 511);
    const VideoClip out = downsample_temporal(clip, 2);
    CHECK(out.frame_count() == 3);  // ceil(5 / 2)
    CHECK(out.frames()[0] == clip.frames()[0]);
    CHECK(out.frames()[1] == clip.frames()[2]);
    CHECK(out.frames()[2] == clip.frames()[4]);
    CHECK(out.fps() == 15.0);
    CHECK(out.clip_id() == "t__downsample");
    CHECK(out.label() == clip.label());
}

TEST_CASE("temporal downsample corner cases", "[augment]") {
    const VideoClip clip = testutil::make_clip("t", ClassLabel::Spinning, 4, 4, 4, 30.0, 512);
    CHECK(downsample_temporal(clip, 1).frames() == clip.frames());
    const VideoClip big = downsample_temporal(clip, 9);
    CHECK(big.frame_count() == 1);
    CHECK(big.frames()[0] == clip.frames()[0]);
    CHECK_THROWS_AS(downsample_temporal(clip, 0), std::invalid_argument);
}

TEST_CASE("frame count after downsample is ceil(n over beta)", "[augment]") {
    for (int n = 1; n <= 12; ++n) {
        const VideoClip clip = testutil::make_clip("n", ClassLabel::ArmFlapping, n, 2, 2, 30.0, 513);
        for (int beta = 1; beta <= 5; ++beta)
            CHECK(downsample_temporal(clip, beta).frame_count() == (n + beta - 1) / beta);
    }
}

TEST_CASE("transform names round trip", "[augment]") {
    for (Transform t : kAllTransforms) CHECK(transform_from_name(transform_name(t)) == t);
    CHECK(transform_name(Transform::Original) == "original");
    CHECK(transform_name(Transform::InvertColor) == "invert");
    CHECK(transform_name(Transform::DownsampleTemporal) == "downsample");
    CHECK_THROWS_AS(transform_from_name("sepia"), std::invalid_argument);
}

TEST_CASE("augment_clip emits the original plus six variants in order", "[augment]") {
    const VideoClip clip = testutil::make_clip("base", ClassLabel::HeadBanging, 4, 6, 6, 30.0, 514);
    const AugmentParams params;
    const std::vector<VideoClip> out = augment_clip(clip, params);
    REQUIRE(out.size() == 7);
    CHECK(out[0].clip_id() == "base__original");
    CHECK(out[1].clip_id() == "base__hflip");
    CHECK(out[2].clip_id() == "base__vflip");
    CHECK(out[3].clip_id() == "base__upsample");
    CHECK(out[4].clip_id() == "base__rotate");
    CHECK(out[5].clip_id() == "base__invert");
    CHECK(out[6].clip_id() == "base__downsample");

    CHECK(out[0].frames() == clip.frames());
    CHECK(out[1].frames()[0] == hflip(clip.frames()[0]));
    CHECK(out[3].width() == 12);
    CHECK(out[3].height() == 12);
    CHECK(out[4].frames()[2] == rotate(clip.frames()[2], 25.0));
    CHECK(out[6].frame_count() == 2);
    CHECK(out[6].fps() == 15.0);
    for (const VideoClip& c : out) CHECK(c.label() == clip.label());
    for (std::size_t k = 0; k < 6; ++k) CHECK(out[k].fps() == 30.0);
}

TEST_CASE("augment params defaults and validation", "[augment]") {
    const AugmentParams p;
    CHECK(p.alpha == 2.0);
    CHECK(p.theta_degrees == 25.0);
    CHECK(p.beta == 2);
    CHECK_NOTHROW(p.validate());

    AugmentParams bad = p;
    bad.alpha = 0.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = p;
    bad.beta = 0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = p;
    bad.theta_degrees = std::nan("");
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("apply_transform respects the parameter overrides", "[augment]") {
    const VideoClip clip = testutil::make_clip("o", ClassLabel::ArmFlapping, 6, 4, 4, 24.0, 515);
    AugmentParams params;
    params.beta = 3;
    params.theta_degrees = 90.0;
    params.alpha = 3.0;
    CHECK(apply_transform(clip, Transform::DownsampleTemporal, params).frame_count() == 2);
    CHECK(apply_transform(clip, Transform::DownsampleTemporal, params).fps() == 8.0);
    CHECK(apply_transform(clip, Transform::Upsample, params).width() == 12);
    CHECK(apply_transform(clip, Transform::Rotate, params).frames()[0] ==
          rotate(clip.frames()[0], 90.0));
}
