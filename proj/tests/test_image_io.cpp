#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <random>

#include <stimkit/image_io.hpp>

#include "testutil.hpp"

using namespace stimkit;
namespace fs = std::filesystem;

TEST_CASE("png encode decode round trip", "[io]") {
    std::mt19937_64 rng(31);
    for (auto [w, h] : {std::pair{1, 1}, {3, 7}, {16, 5}, {64, 48}}) {
        const Frame src = testutil::random_frame(w, h, rng);
        const Frame back = decode_png_rgb(encode_png_rgb(src));
        CHECK(back == src);
    }
}

TEST_CASE("png decode rejects garbage", "[io]") {
    const std::vector<std::uint8_t> junk{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    CHECK_THROWS(decode_png_rgb(junk));
}

TEST_CASE("png bytes are identical across encodes", "[io]") {
    std::mt19937_64 rng(32);
    const Frame f = testutil::random_frame(20, 11, rng);
    CHECK(encode_png_rgb(f) == encode_png_rgb(f));
}

TEST_CASE("atomic_write_file creates parents and leaves no temp file", "[io]") {
    testutil::TempDir tmp;
    const fs::path target = tmp.path() / "a" / "b" / "note.txt";
    atomic_write_file(target, "hello\n");
    CHECK(read_file_text(target) == "hello\n");
    CHECK_FALSE(fs::exists(target.string() + ".tmp"));

    atomic_write_file(target, "bye\n");
    CHECK(read_file_text(target) == "bye\n");
}

TEST_CASE("read_file helpers report missing paths", "[io]") {
    testutil::TempDir tmp;
    CHECK_THROWS(read_file_text(tmp.path() / "nope.txt"));
    CHECK_THROWS(read_file_bytes(tmp.path() / "nope.bin"));
}

TEST_CASE("frame_filename pads to six digits", "[io]") {
    CHECK(frame_filename(0) == "frame_000000.png");
    CHECK(frame_filename(42) == "frame_000042.png");
    CHECK(frame_filename(123456) == "frame_123456.png");
}

TEST_CASE("save and load clip round trip", "[io]") {
    testutil::TempDir tmp;
    const VideoClip src = testutil::make_clip("roundtrip", ClassLabel::HeadBanging, 5, 9, 6, 12.5, 77);
    const fs::path dir = tmp.path() / "roundtrip";
    save_clip(dir, src);

    CHECK(fs::exists(dir / "clip.json"));
    for (int i = 0; i < 5; ++i) CHECK(fs::exists(dir / frame_filename(i)));

    const VideoClip back = load_clip(dir);
    CHECK(back.clip_id() == "roundtrip");
    CHECK(back.fps() == 12.5);
    CHECK(back.label() == ClassLabel::HeadBanging);
    CHECK(back.frames() == src.frames());
}

TEST_CASE("clip id comes from the directory name", "[io]") {
    testutil::TempDir tmp;
    const VideoClip src = testutil::make_clip("whatever", ClassLabel::Spinning, 2, 4, 4, 30.0, 5);
    save_clip(tmp.path() / "renamed", src);
    CHECK(load_clip(tmp.path() / "renamed").clip_id() == "renamed");
}

TEST_CASE("descriptor parse failures name the file", "[io]") {
    testutil::TempDir tmp;
    const fs::path dir = tmp.path() / "bad";

    atomic_write_file(dir / "clip.json", "{not json");
    CHECK_THROWS_WITH(read_clip_descriptor(dir), Catch::Matchers::ContainsSubstring("malformed descriptor"));

    atomic_write_file(dir / "clip.json", R"({"fps": 30, "width": 4, "height": 4})");
    CHECK_THROWS_WITH(read_clip_descriptor(dir), Catch::Matchers::ContainsSubstring("malformed descriptor"));

    atomic_write_file(dir / "clip.json",
                      R"({"fps": 0, "width": 4, "height": 4, "frame_count": 2, "label": "Spinning"})");
    CHECK_THROWS(read_clip_descriptor(dir));

    atomic_write_file(dir / "clip.json",
                      R"({"fps": 30, "width": 4, "height": 4, "frame_count": 2, "label": "Nope"})");
    CHECK_THROWS(read_clip_descriptor(dir));
}

TEST_CASE("load_clip rejects frame size mismatch", "[io]") {
    testutil::TempDir tmp;
    const fs::path dir = tmp.path() / "mismatch";
    save_clip(dir, testutil::make_clip("mismatch", ClassLabel::ArmFlapping, 2, 4, 4, 30.0, 8));
    const auto wrong = encode_png_rgb(Frame(5, 4));
    atomic_write_file(dir / frame_filename(1), wrong.data(), wrong.size());
    CHECK_THROWS_WITH(load_clip(dir), Catch::Matchers::ContainsSubstring("size mismatch"));
}

TEST_CASE("load_clip reports a missing frame", "[io]") {
    testutil::TempDir tmp;
    const fs::path dir = tmp.path() / "short";
    save_clip(dir, testutil::make_clip("short", ClassLabel::ArmFlapping, 3, 4, 4, 30.0, 8));
    fs::remove(dir / frame_filename(2));
    CHECK_THROWS(load_clip(dir));
}
