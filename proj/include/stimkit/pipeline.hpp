#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "stimkit/dataset.hpp"
#include "stimkit/image_io.hpp"
#include "stimkit/masking.hpp"
#include "stimkit/parallel.hpp"

namespace stimkit {

struct MaskError {
    std::string clip_id;
    std::string message;
};

struct MaskClipSummary {
    std::string clip_id;
    int masked = 0;
    int passthrough = 0;
    int blackout = 0;
    int skipped = 0;
};

struct MaskRunReport {
    Manifest manifest;  // masked clips under the output root
    std::vector<MaskClipSummary> clips;
    std::vector<MaskError> errors;
};

/// Mask every clip of a manifest into `out_root/<ClassName>/<clip_id>/`.
/// Detections are read from `<detections_dir>/<clip_id>.jsonl`; a clip with
/// no detection file (or no directory given at all) runs with zero
/// detections everywhere, so the no-detection policy decides its frames.
/// Clips that fail are reported and skipped, the rest still process.
inline MaskRunReport mask_dataset(const Manifest& manifest,
                                  const std::filesystem::path& manifest_dir,
                                  const std::optional<std::filesystem::path>& detections_dir,
                                  const std::filesystem::path& out_root,
                                  const MaskingConfig& config, unsigned jobs = 0) {
    namespace fs = std::filesystem;
    manifest.validate();
    config.validate();

    struct Slot {
        std::optional<ManifestEntry> entry;
        std::optional<MaskClipSummary> summary;
        std::optional<MaskError> error;
    };
    std::vector<Slot> slots(manifest.entries.size());

    parallel_for(manifest.entries.size(), jobs, [&](std::size_t idx) {
        const ManifestEntry& src = manifest.entries[idx];
        Slot& slot = slots[idx];
        try {
            const VideoClip clip = load_clip(manifest_dir / src.path);
            std::vector<std::vector<Detection>> detections(
                static_cast<std::size_t>(clip.frame_count()));
            if (detections_dir) {
                const fs::path det_path = *detections_dir / (src.clip_id + ".jsonl");
                if (fs::exists(det_path)) {
                    const std::string text = read_file_text(det_path);
                    try {
                        detections = parse_detections_jsonl(text, clip.frame_count());
                    } catch (const std::exception& e) {
                        throw std::runtime_error(det_path.string() + ": " + e.what());
                    }
                }
            }
            ProcessedClip processed = process_clip(clip, detections, config);

            const std::string rel =
                std::string(class_name(processed.clip.label())) + "/" + processed.clip.clip_id();
            save_clip(out_root / rel, processed.clip);

            ManifestEntry e;
            e.clip_id = processed.clip.clip_id();
            e.path = rel;
            e.label = processed.clip.label();
            e.frame_count = processed.clip.frame_count();
            e.fps = processed.clip.fps();
            e.width = processed.clip.width();
            e.height = processed.clip.height();
            e.provenance = Provenance{src.clip_id, "mask"};
            slot.entry = std::move(e);
            slot.summary = MaskClipSummary{src.clip_id, processed.report.masked,
                                           processed.report.passthrough, processed.report.blackout,
                                           processed.report.skipped};
        } catch (const std::exception& ex) {
            slot.entry.reset();
            slot.summary.reset();
            slot.error = MaskError{src.clip_id, ex.what()};
        }
    });

    MaskRunReport report;
    for (Slot& slot : slots) {
        if (slot.error) {
            report.errors.push_back(std::move(*slot.error));
            continue;
        }
        report.manifest.entries.push_back(std::move(*slot.entry));
        report.clips.push_back(std::move(*slot.summary));
    }
    report.manifest.validate();
    return report;
}

inline nlohmann::json mask_run_report_to_json(const MaskRunReport& report) {
    nlohmann::json clips = nlohmann::json::array();
    for (const MaskClipSummary& c : report.clips)
        clips.push_back(nlohmann::json{{"clip_id", c.clip_id},
                                       {"masked", c.masked},
                                       {"passthrough", c.passthrough},
                                       {"blackout", c.blackout},
                                       {"skipped", c.skipped}});
    nlohmann::json errors = nlohmann::json::array();
    for (const MaskError& e : report.errors)
        errors.push_back(nlohmann::json{{"clip_id", e.clip_id}, {"message", e.message}});
    return nlohmann::json{{"clips", std::move(clips)}, {"errors", std::move(errors)}};
}

}  // namespace stimkit
