#include <catch2/catch_amalgamated.hpp>

#include <filesystem>

#include <stimkit/pipeline.hpp>

#include "testutil.hpp"

using namespace stimkit;
namespace fs = std::filesystem;

namespace {

void write_detection_file(const fs::path& dir, const std::string& clip_id,
                          const std::string& jsonl) {
    atomic_write_file(dir / (clip_id + ".jsonl"), jsonl);
}

}  // namespace

TEST_CASE("mask_dataset masks every clip into the output tree", "[pipeline]") {
    testutil::TempDir tmp;
    const fs::path root = tmp.path() / "src";
    testutil::build_dataset(root, {1, 1, 0}, 3, 10, 10, 30.0);
    const Manifest manifest = scan_dataset(root);

    const fs::path dets = tmp.path() / "dets";
    fs::create_directories(dets);
    write_detection_file(
        dets, "clip_0_000",
        R"({"frame_index": 0, "detections": [{"x1": 1, "y1": 1, "x2": 6, "y2": 6, "conf": 0.9, "cls": 0}]}
{"frame_index": 1, "detections": [{"x1": 0, "y1": 0, "x2": 4, "y2": 4, "conf": 0.8, "cls": 0}]}
)");

    MaskingConfig cfg;
    cfg.target_width = 5;
    cfg.target_height = 5;
    const fs::path out = tmp.path() / "out";
    const MaskRunReport report = mask_dataset(manifest, root, dets, out, cfg, 2);

    CHECK(report.errors.empty());
    REQUIRE(report.manifest.entries.size() == 2);
    REQUIRE(report.clips.size() == 2);

    const ManifestEntry& first = report.manifest.entries[0];
    CHECK(first.clip_id == "clip_0_000");
    CHECK(first.path == "ArmFlapping/clip_0_000");
    CHECK(first.width == 5);
    CHECK(first.height == 5);
    CHECK(first.frame_count == 3);
    REQUIRE(first.provenance.has_value());
    CHECK(first.provenance->source == "clip_0_000");
    CHECK(first.provenance->transform == "mask");

    CHECK(report.clips[0].masked == 2);
    CHECK(report.clips[0].passthrough == 1);
    // no detection file at all: every frame passes through
    CHECK(report.clips[1].masked == 0);
    CHECK(report.clips[1].passthrough == 3);

    const VideoClip masked = load_clip(out / "ArmFlapping" / "clip_0_000");
    const VideoClip source = load_clip(root / "ArmFlapping" / "clip_0_000");
    const Frame expect = resize_area(
        apply_mask(source.frames()[0], build_mask(10, 10, BoundingBox(1, 1, 6, 6))), 5, 5);
    CHECK(masked.frames()[0] == expect);
    CHECK(masked.frames()[2] == resize_area(source.frames()[2], 5, 5));
    CHECK(masked.fps() == source.fps());
}

TEST_CASE("mask_dataset without a detections directory passes frames through", "[pipeline]") {
    testutil::TempDir tmp;
    const fs::path root = tmp.path() / "src";
    testutil::build_dataset(root, {1, 0, 0}, 2, 8, 8, 24.0);
    const Manifest manifest = scan_dataset(root);

    MaskingConfig cfg;
    cfg.target_width = 4;
    cfg.target_height = 4;
    const MaskRunReport report =
        mask_dataset(manifest, root, std::nullopt, tmp.path() / "out", cfg);
    CHECK(report.errors.empty());
    CHECK(report.clips[0].passthrough == 2);
}

TEST_CASE("mask_dataset records failures and keeps processing", "[pipeline]") {
    testutil::TempDir tmp;
    const fs::path root = tmp.path() / "src";
    testutil::build_dataset(root, {2, 0, 0}, 2, 8, 8, 24.0);
    Manifest manifest = scan_dataset(root);
    ManifestEntry ghost;
    ghost.clip_id = "ghost";
    ghost.path = "ArmFlapping/ghost";
    ghost.label = ClassLabel::ArmFlapping;
    ghost.frame_count = 2;
    ghost.fps = 24.0;
    ghost.width = 8;
    ghost.height = 8;
    manifest.entries.push_back(ghost);

    const MaskRunReport report =
        mask_dataset(manifest, root, std::nullopt, tmp.path() / "out", MaskingConfig{});
    REQUIRE(report.errors.size() == 1);
    CHECK(report.errors[0].clip_id == "ghost");
    CHECK(report.manifest.entries.size() == 2);
}

TEST_CASE("mask_dataset surfaces detection parse failures per clip", "[pipeline]") {
    testutil::TempDir tmp;
    const fs::path root = tmp.path() / "src";
    testutil::build_dataset(root, {1, 0, 0}, 2, 8, 8, 24.0);
    const Manifest manifest = scan_dataset(root);

    const fs::path dets = tmp.path() / "dets";
    fs::create_directories(dets);
    write_detection_file(dets, "clip_0_000", "{nope\n");

    const MaskRunReport report =
        mask_dataset(manifest, root, dets, tmp.path() / "out", MaskingConfig{});
    REQUIRE(report.errors.size() == 1);
    CHECK(report.errors[0].clip_id == "clip_0_000");
    CHECK(report.errors[0].message.find("line 1") != std::string::npos);
    CHECK(report.manifest.entries.empty());
}

TEST_CASE("mask run report serialises clip summaries and errors", "[pipeline]") {
    MaskRunReport report;
    report.clips.push_back(MaskClipSummary{"a", 3, 1, 0, 0});
    report.errors.push_back(MaskError{"b", "went wrong"});
    const nlohmann::json j = mask_run_report_to_json(report);
    CHECK(j["clips"][0]["clip_id"] == "a");
    CHECK(j["clips"][0]["masked"] == 3);
    CHECK(j["errors"][0]["clip_id"] == "b");
    CHECK(j["errors"][0]["message"] == "went wrong");
}

TEST_CASE("masked clips reload byte for byte across runs", "[pipeline]") {
    testutil::TempDir tmp;
    const fs::path root = tmp.path() / "src";
    testutil::build_dataset(root, {1, 1, 1}, 2, 12, 12, 30.0);
    const Manifest manifest = scan_dataset(root);

    const fs::path out_a = tmp.path() / "a";
    const fs::path out_b = tmp.path() / "b";
    MaskingConfig cfg;
    cfg.target_width = 6;
    cfg.target_height = 6;
    mask_dataset(manifest, root, std::nullopt, out_a, cfg, 3);
    mask_dataset(manifest, root, std::nullopt, out_b, cfg, 1);

    for (const auto& walk : fs::recursive_directory_iterator(out_a)) {
        if (!walk.is_regular_file()) continue;
        const fs::path rel = fs::relative(walk.path(), out_a);
        CHECK(read_file_bytes(walk.path()) == read_file_bytes(out_b / rel));
    }
}
