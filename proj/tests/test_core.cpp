#include <catch2/catch_amalgamated.hpp>

#include <atomic>
#include <numeric>
#include <set>
#include <vector>

#include <stimkit/core.hpp>
#include <stimkit/parallel.hpp>
#include <stimkit/random.hpp>

#include "testutil.hpp"

using namespace stimkit;

TEST_CASE("frame stores pixels row-major", "[core]") {
    Frame f(3, 2, std::vector<Rgb>{{1, 1, 1}, {2, 2, 2}, {3, 3, 3},
                                   {4, 4, 4}, {5, 5, 5}, {6, 6, 6}});
    CHECK(f.width() == 3);
    CHECK(f.height() == 2);
    CHECK(f.at(0, 0) == Rgb{1, 1, 1});
    CHECK(f.at(0, 2) == Rgb{3, 3, 3});
    CHECK(f.at(1, 0) == Rgb{4, 4, 4});
    CHECK(f.at(1, 2) == Rgb{6, 6, 6});
}

TEST_CASE("frame constructor validation", "[core]") {
    CHECK_THROWS_AS(Frame(0, 1), std::invalid_argument);
    CHECK_THROWS_AS(Frame(1, 0), std::invalid_argument);
    CHECK_THROWS_AS(Frame(2, 2, std::vector<Rgb>(3)), std::invalid_argument);
    CHECK_THROWS_AS(Frame(2, 2).at(2, 0), std::out_of_range);
    CHECK_THROWS_AS(Frame(2, 2).at(0, 2), std::out_of_range);
    CHECK_THROWS_AS(Frame(2, 2).at(-1, 0), std::out_of_range);
}

TEST_CASE("frame fill and from_ints", "[core]") {
    const Frame f(2, 2, Rgb{7, 8, 9});
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) CHECK(f.at(i, j) == Rgb{7, 8, 9});

    const Frame g = Frame::from_ints(1, 2, {{0, 128, 255}, {1, 2, 3}});
    CHECK(g.at(0, 0) == Rgb{0, 128, 255});
    CHECK(g.at(1, 0) == Rgb{1, 2, 3});
    CHECK_THROWS_AS(Frame::from_ints(1, 1, {{-1, 0, 0}}), std::out_of_range);
    CHECK_THROWS_AS(Frame::from_ints(1, 1, {{0, 256, 0}}), std::out_of_range);
}

TEST_CASE("class labels map to stable indices and names", "[core]") {
    CHECK(class_index(ClassLabel::ArmFlapping) == 0);
    CHECK(class_index(ClassLabel::HeadBanging) == 1);
    CHECK(class_index(ClassLabel::Spinning) == 2);
    for (ClassLabel label : kAllClasses) {
        CHECK(class_from_index(class_index(label)) == label);
        CHECK(class_from_name(class_name(label)) == label);
    }
    CHECK(class_name(ClassLabel::ArmFlapping) == "ArmFlapping");
    CHECK(class_name(ClassLabel::HeadBanging) == "HeadBanging");
    CHECK(class_name(ClassLabel::Spinning) == "Spinning");
    CHECK_THROWS_AS(class_from_index(-1), std::out_of_range);
    CHECK_THROWS_AS(class_from_index(3), std::out_of_range);
    CHECK_THROWS_AS(class_from_name("Waving"), std::invalid_argument);
}

TEST_CASE("bounding box needs positive extent", "[core]") {
    const BoundingBox b(1, 2, 3, 5);
    CHECK(b.x1 == 1);
    CHECK(b.y2 == 5);
    CHECK_THROWS_AS(BoundingBox(-1, 0, 2, 2), std::invalid_argument);
    CHECK_THROWS_AS(BoundingBox(0, -1, 2, 2), std::invalid_argument);
    CHECK_THROWS_AS(BoundingBox(2, 0, 2, 2), std::invalid_argument);
    CHECK_THROWS_AS(BoundingBox(0, 2, 2, 2), std::invalid_argument);
    CHECK_THROWS_AS(BoundingBox(3, 0, 2, 2), std::invalid_argument);
}

TEST_CASE("detection confidence range", "[core]") {
    CHECK_NOTHROW(Detection(BoundingBox(0, 0, 1, 1), 0.0, 0));
    CHECK_NOTHROW(Detection(BoundingBox(0, 0, 1, 1), 1.0, 5));
    CHECK_THROWS_AS(Detection(BoundingBox(0, 0, 1, 1), -0.1, 0), std::invalid_argument);
    CHECK_THROWS_AS(Detection(BoundingBox(0, 0, 1, 1), 1.1, 0), std::invalid_argument);
}

TEST_CASE("video clip invariants", "[core]") {
    std::vector<Frame> frames{Frame(4, 3), Frame(4, 3), Frame(4, 3)};
    const VideoClip clip("c1", frames, 30.0, ClassLabel::Spinning);
    CHECK(clip.clip_id() == "c1");
    CHECK(clip.width() == 4);
    CHECK(clip.height() == 3);
    CHECK(clip.frame_count() == 3);
    CHECK(clip.fps() == 30.0);
    CHECK(clip.duration_sec() == Catch::Approx(0.1));
    CHECK(clip.label() == ClassLabel::Spinning);

    CHECK_THROWS_AS(VideoClip("c", {}, 30.0, ClassLabel::Spinning), std::invalid_argument);
    CHECK_THROWS_AS(VideoClip("c", frames, 0.0, ClassLabel::Spinning), std::invalid_argument);
    CHECK_THROWS_AS(VideoClip("c", frames, -1.0, ClassLabel::Spinning), std::invalid_argument);
    std::vector<Frame> mixed{Frame(4, 3), Frame(3, 4)};
    CHECK_THROWS_AS(VideoClip("c", mixed, 30.0, ClassLabel::Spinning), std::invalid_argument);
}

TEST_CASE("clip duration for 120 frames at 24 fps is 5 seconds", "[core]") {
    const VideoClip clip = testutil::make_clip("d", ClassLabel::ArmFlapping, 120, 2, 2, 24.0, 9);
    CHECK(clip.duration_sec() == Catch::Approx(5.0));
}

TEST_CASE("bounded_rand stays below the bound", "[random]") {
    std::mt19937_64 rng(123);
    for (std::uint64_t bound : {1ull, 2ull, 3ull, 7ull, 100ull, 1ull << 40}) {
        for (int k = 0; k < 200; ++k) {
            const std::uint64_t v = bounded_rand(rng, bound);
            CHECK(v < bound);
        }
    }
    CHECK(bounded_rand(rng, 0) == 0);
    CHECK(bounded_rand(rng, 1) == 0);
}

TEST_CASE("bounded_rand covers small ranges", "[random]") {
    std::mt19937_64 rng(7);
    std::set<std::uint64_t> seen;
    for (int k = 0; k < 500; ++k) seen.insert(bounded_rand(rng, 5));
    CHECK(seen == std::set<std::uint64_t>{0, 1, 2, 3, 4});
}

TEST_CASE("deterministic_shuffle is a seed-stable permutation", "[random]") {
    std::vector<int> base(50);
    std::iota(base.begin(), base.end(), 0);

    auto a = base;
    auto b = base;
    std::mt19937_64 r1(99), r2(99);
    deterministic_shuffle(a, r1);
    deterministic_shuffle(b, r2);
    CHECK(a == b);

    auto sorted = a;
    std::sort(sorted.begin(), sorted.end());
    CHECK(sorted == base);

    auto c = base;
    std::mt19937_64 r3(100);
    deterministic_shuffle(c, r3);
    CHECK(c != a);
}

TEST_CASE("deterministic_shuffle handles tiny inputs", "[random]") {
    std::mt19937_64 rng(1);
    std::vector<int> empty;
    deterministic_shuffle(empty, rng);
    CHECK(empty.empty());
    std::vector<int> one{42};
    deterministic_shuffle(one, rng);
    CHECK(one == std::vector<int>{42});
}

TEST_CASE("parallel_for touches every index exactly once", "[parallel]") {
    for (unsigned jobs : {0u, 1u, 2u, 5u}) {
        const std::size_t n = 1000;
        std::vector<std::atomic<int>> hits(n);
        parallel_for(n, jobs, [&](std::size_t i) { hits[i].fetch_add(1); });
        for (std::size_t i = 0; i < n; ++i) CHECK(hits[i].load() == 1);
    }
}

TEST_CASE("parallel_for with zero items does nothing", "[parallel]") {
    std::atomic<int> calls{0};
    parallel_for(0, 4, [&](std::size_t) { calls.fetch_add(1); });
    CHECK(calls.load() == 0);
}

TEST_CASE("parallel_for propagates worker exceptions", "[parallel]") {
    const auto boom = [](std::size_t i) {
        if (i == 17) throw std::runtime_error("boom");
    };
    CHECK_THROWS_WITH(parallel_for(100, 4, boom), "boom");
    CHECK_THROWS_WITH(parallel_for(100, 1, boom), "boom");
}
