#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <limits>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <json.hpp>

#include "stimkit/augment.hpp"
#include "stimkit/core.hpp"
#include "stimkit/image_io.hpp"
#include "stimkit/parallel.hpp"
#include "stimkit/random.hpp"

namespace stimkit {

enum class SplitSet { Train, Val, Test };

inline std::string_view split_set_name(SplitSet s) {
    switch (s) {
        case SplitSet::Train: return "train";
        case SplitSet::Val: return "val";
        case SplitSet::Test: return "test";
    }
    throw std::invalid_argument("SplitSet: invalid enum value");
}

inline SplitSet split_set_from_name(std::string_view name) {
    if (name == "train") return SplitSet::Train;
    if (name == "val") return SplitSet::Val;
    if (name == "test") return SplitSet::Test;
    throw std::invalid_argument("unknown split '" + std::string(name) + "'");
}

/// Where a derived clip came from: the source clip plus the operation
/// (a transform name, "trim:<start>-<end>", or "mask").
struct Provenance {
    std::string source;
    std::string transform;

    bool operator==(const Provenance&) const = default;
};

struct ManifestEntry {
    std::string clip_id;
    std::string path;  // relative to the manifest's directory, forward slashes
    ClassLabel label = ClassLabel::ArmFlapping;
    int frame_count = 0;
    double fps = 0.0;
    int width = 0;
    int height = 0;
    std::optional<SplitSet> split;
    std::optional<Provenance> provenance;

    bool operator==(const ManifestEntry&) const = default;
};

struct Manifest {
    int schema_version = 1;
    std::vector<ManifestEntry> entries;

    void validate() const {
        if (schema_version != 1)
            throw std::runtime_error("manifest: unsupported schema_version " +
                                     std::to_string(schema_version));
        std::vector<std::string> ids;
        ids.reserve(entries.size());
        for (const ManifestEntry& e : entries) {
            if (e.clip_id.empty()) throw std::runtime_error("manifest: empty clip_id");
            if (e.path.empty()) throw std::runtime_error("manifest: empty path for " + e.clip_id);
            if (e.frame_count < 1 || e.width < 1 || e.height < 1 || !(e.fps > 0.0))
                throw std::runtime_error("manifest: non-positive geometry for " + e.clip_id);
            ids.push_back(e.clip_id);
        }
        std::sort(ids.begin(), ids.end());
        const auto dup = std::adjacent_find(ids.begin(), ids.end());
        if (dup != ids.end())
            throw std::runtime_error("manifest: duplicate clip_id '" + *dup + "'");
    }

    bool operator==(const Manifest&) const = default;
};

inline nlohmann::json manifest_to_json(const Manifest& manifest) {
    nlohmann::json entries = nlohmann::json::array();
    for (const ManifestEntry& e : manifest.entries) {
        nlohmann::json j;
        j["clip_id"] = e.clip_id;
        j["path"] = e.path;
        j["label"] = std::string(class_name(e.label));
        j["frame_count"] = e.frame_count;
        j["fps"] = e.fps;
        j["width"] = e.width;
        j["height"] = e.height;
        if (e.split) j["split"] = std::string(split_set_name(*e.split));
        if (e.provenance)
            j["provenance"] = {{"source", e.provenance->source},
                               {"transform", e.provenance->transform}};
        entries.push_back(std::move(j));
    }
    return nlohmann::json{{"schema_version", manifest.schema_version},
                          {"entries", std::move(entries)}};
}

inline Manifest manifest_from_json(const nlohmann::json& j) {
    Manifest m;
    m.schema_version = j.at("schema_version").get<int>();
    for (const auto& je : j.at("entries")) {
        ManifestEntry e;
        e.clip_id = je.at("clip_id").get<std::string>();
        e.path = je.at("path").get<std::string>();
        e.label = class_from_name(je.at("label").get<std::string>());
        e.frame_count = je.at("frame_count").get<int>();
        e.fps = je.at("fps").get<double>();
        e.width = je.at("width").get<int>();
        e.height = je.at("height").get<int>();
        if (je.contains("split")) e.split = split_set_from_name(je.at("split").get<std::string>());
        if (je.contains("provenance"))
            e.provenance = Provenance{je.at("provenance").at("source").get<std::string>(),
                                      je.at("provenance").at("transform").get<std::string>()};
        m.entries.push_back(std::move(e));
    }
    m.validate();
    return m;
}

inline Manifest load_manifest(const std::filesystem::path& path) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_file_text(path));
        return manifest_from_json(j);
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("malformed manifest " + path.string() + ": " + e.what());
    }
}

inline void save_manifest(const std::filesystem::path& path, const Manifest& manifest) {
    manifest.validate();
    atomic_write_file(path, manifest_to_json(manifest).dump(2) + "\n");
}

/// Walk `root/<ClassName>/<clip_dir>` and build a manifest from the clip
/// descriptors found there, sorted by clip_id. Non-directories under the
/// root are ignored; a directory that is not named after a class, or a clip
/// directory without a readable descriptor, is an error.
inline Manifest scan_dataset(const std::filesystem::path& root) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(root))
        throw std::runtime_error("scan: '" + root.string() + "' is not a directory");

    Manifest m;
    for (const auto& top : fs::directory_iterator(root)) {
        if (!top.is_directory()) continue;
        const std::string name = top.path().filename().string();
        ClassLabel label;
        try {
            label = class_from_name(name);
        } catch (const std::exception&) {
            throw std::runtime_error("scan: '" + top.path().string() +
                                     "' is not a class directory (expected ArmFlapping, "
                                     "HeadBanging, or Spinning)");
        }
        for (const auto& entry : fs::directory_iterator(top.path())) {
            if (!entry.is_directory()) continue;
            const fs::path dir = entry.path();
            if (!fs::exists(dir / "clip.json"))
                throw std::runtime_error("scan: clip directory '" + dir.string() +
                                         "' has no clip.json");
            const ClipDescriptor desc = read_clip_descriptor(dir);
            if (desc.label != label)
                throw std::runtime_error("scan: clip '" + dir.string() + "' is labelled '" +
                                         std::string(class_name(desc.label)) +
                                         "' but sits under '" + name + "'");
            ManifestEntry e;
            e.clip_id = dir.filename().string();
            e.path = name + "/" + e.clip_id;
            e.label = label;
            e.frame_count = desc.frame_count;
            e.fps = desc.fps;
            e.width = desc.width;
            e.height = desc.height;
            m.entries.push_back(std::move(e));
        }
    }
    std::sort(m.entries.begin(), m.entries.end(),
              [](const ManifestEntry& a, const ManifestEntry& b) { return a.clip_id < b.clip_id; });
    m.validate();
    return m;
}

// ---- trimming ----

struct TrimSegment {
    std::string clip_id;
    int start = 0;  // first frame kept
    int end = 0;    // one past the last frame kept

    bool operator==(const TrimSegment&) const = default;
};

/// Keep frames [start, end). The trimmed clip keeps fps and label and gets
/// the id `<id>__t<start>_<end>`.
inline VideoClip trim_clip(const VideoClip& clip, int start, int end) {
    if (start < 0 || end <= start || end > clip.frame_count())
        throw std::invalid_argument("trim_clip: need 0 <= start < end <= frame_count, got [" +
                                    std::to_string(start) + ", " + std::to_string(end) +
                                    ") of " + std::to_string(clip.frame_count()));
    std::vector<Frame> frames(clip.frames().begin() + start, clip.frames().begin() + end);
    const std::string id =
        clip.clip_id() + "__t" + std::to_string(start) + "_" + std::to_string(end);
    return VideoClip(id, std::move(frames), clip.fps(), clip.label());
}

/// One output clip per (start, end) pair, in the given order.
inline std::vector<VideoClip> trim_segments(const VideoClip& clip,
                                            std::span<const std::pair<int, int>> segments) {
    if (segments.empty()) throw std::invalid_argument("trim_segments: no segments given");
    std::vector<VideoClip> out;
    out.reserve(segments.size());
    for (const auto& [start, end] : segments) out.push_back(trim_clip(clip, start, end));
    return out;
}

/// Segment file: one `clip_id start end` per line, whitespace separated.
/// Blank lines are skipped.
inline std::vector<TrimSegment> parse_segments(std::istream& in) {
    std::vector<TrimSegment> segments;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
        std::istringstream ls(line);
        TrimSegment seg;
        std::string extra;
        if (!(ls >> seg.clip_id >> seg.start >> seg.end) || (ls >> extra))
            throw std::runtime_error("segments line " + std::to_string(line_no) +
                                     ": expected 'clip_id start end'");
        if (seg.start < 0 || seg.end <= seg.start)
            throw std::runtime_error("segments line " + std::to_string(line_no) +
                                     ": need 0 <= start < end");
        segments.push_back(std::move(seg));
    }
    return segments;
}

inline std::vector<TrimSegment> parse_segments(const std::string& text) {
    std::istringstream in(text);
    return parse_segments(in);
}

// ---- splitting ----

struct SplitRatios {
    double train = 0.70;
    double val = 0.15;
    double test = 0.15;

    void validate() const {
        for (double r : {train, val, test})
            if (!(r > 0.0 && r < 1.0))
                throw std::invalid_argument("SplitRatios: each ratio must lie in (0, 1)");
        if (std::fabs(train + val + test - 1.0) > 1e-9)
            throw std::invalid_argument("SplitRatios: ratios must sum to 1");
    }

    /// Parse "70:15:15" or "0.7:0.15:0.15" (train:val:test); parts are
    /// normalised by their sum.
    static SplitRatios parse(const std::string& text) {
        std::array<double, 3> parts{};
        std::size_t pos = 0;
        for (int i = 0; i < 3; ++i) {
            const std::size_t next = i < 2 ? text.find(':', pos) : text.size();
            if (next == std::string::npos)
                throw std::invalid_argument("ratios: expected 'train:val:test', got '" + text + "'");
            try {
                std::size_t used = 0;
                const std::string part = text.substr(pos, next - pos);
                parts[static_cast<std::size_t>(i)] = std::stod(part, &used);
                if (used != part.size()) throw std::invalid_argument(part);
            } catch (const std::exception&) {
                throw std::invalid_argument("ratios: bad component in '" + text + "'");
            }
            pos = next + 1;
        }
        const double sum = parts[0] + parts[1] + parts[2];
        if (!(sum > 0.0))
            throw std::invalid_argument("ratios: components must have a positive sum");
        SplitRatios r{parts[0] / sum, parts[1] / sum, parts[2] / sum};
        r.validate();
        return r;
    }
};

struct SplitCounts {
    int train = 0;
    int val = 0;
    int test = 0;
};

/// Count rule applied independently per class: train takes floor(r_train*n);
/// of the remainder, test takes the ceiling of its proportional share and
/// val the rest. A small epsilon keeps exact products like 0.7*10 from
/// landing on the wrong side of floor/ceil.
inline SplitCounts split_counts(int n, const SplitRatios& ratios) {
    ratios.validate();
    if (n < 0) throw std::invalid_argument("split_counts: n must be >= 0");
    constexpr double eps = 1e-9;
    SplitCounts c;
    c.train = static_cast<int>(std::floor(ratios.train * n + eps));
    const int rem = n - c.train;
    if (rem > 0) {
        c.test = static_cast<int>(
            std::ceil(rem * ratios.test / (ratios.test + ratios.val) - eps));
        c.val = rem - c.test;
    }
    return c;
}

/// Stratified split: per class, entries are ordered by clip_id, shuffled
/// with a single seeded generator (classes drawn in label order), and
/// assigned train / test / val by split_counts. The returned manifest keeps
/// the input entry order with the split field set. Same seed, same
/// assignment, regardless of the manifest's entry order. Entries that
/// already carry a split are rejected unless force is set.
inline Manifest split_manifest(const Manifest& manifest, const SplitRatios& ratios,
                               std::uint64_t seed, bool force = false) {
    manifest.validate();
    ratios.validate();
    if (!force)
        for (const ManifestEntry& e : manifest.entries)
            if (e.split)
                throw std::runtime_error("split: entry '" + e.clip_id +
                                         "' is already assigned to a split (use force to "
                                         "reassign)");

    std::array<std::vector<const ManifestEntry*>, kNumClasses> by_class;
    for (const ManifestEntry& e : manifest.entries)
        by_class[static_cast<std::size_t>(class_index(e.label))].push_back(&e);

    std::mt19937_64 rng(seed);
    std::unordered_map<std::string, SplitSet> assignment;
    assignment.reserve(manifest.entries.size());
    for (ClassLabel label : kAllClasses) {
        auto& group = by_class[static_cast<std::size_t>(class_index(label))];
        std::sort(group.begin(), group.end(),
                  [](const ManifestEntry* a, const ManifestEntry* b) {
                      return a->clip_id < b->clip_id;
                  });
        deterministic_shuffle(group, rng);
        const SplitCounts counts = split_counts(static_cast<int>(group.size()), ratios);
        for (std::size_t i = 0; i < group.size(); ++i) {
            SplitSet s;
            if (i < static_cast<std::size_t>(counts.train))
                s = SplitSet::Train;
            else if (i < static_cast<std::size_t>(counts.train + counts.test))
                s = SplitSet::Test;
            else
                s = SplitSet::Val;
            assignment.emplace(group[i]->clip_id, s);
        }
    }

    Manifest out = manifest;
    for (ManifestEntry& e : out.entries) e.split = assignment.at(e.clip_id);
    return out;
}

/// Entries of one split, in manifest order.
inline std::vector<ManifestEntry> split_subset(const Manifest& manifest, SplitSet set) {
    std::vector<ManifestEntry> out;
    for (const ManifestEntry& e : manifest.entries)
        if (e.split == set) out.push_back(e);
    return out;
}

// ---- statistics ----

struct ClassStats {
    int clip_count = 0;
    int min_frame_count = 0;
    int max_frame_count = 0;
    double avg_frame_count = 0.0;
    int min_width = 0;
    int max_width = 0;
    double avg_width = 0.0;
    int min_height = 0;
    int max_height = 0;
    double avg_height = 0.0;
    double avg_duration_sec = 0.0;
};

struct StatsTable {
    std::array<std::optional<ClassStats>, kNumClasses> per_class;
    std::optional<ClassStats> overall;
};

namespace detail {

inline ClassStats accumulate_stats(const std::vector<const ManifestEntry*>& entries) {
    ClassStats s;
    s.clip_count = static_cast<int>(entries.size());
    s.min_frame_count = s.min_width = s.min_height = std::numeric_limits<int>::max();
    double fsum = 0, wsum = 0, hsum = 0, dsum = 0;
    for (const ManifestEntry* e : entries) {
        s.min_frame_count = std::min(s.min_frame_count, e->frame_count);
        s.max_frame_count = std::max(s.max_frame_count, e->frame_count);
        s.min_width = std::min(s.min_width, e->width);
        s.max_width = std::max(s.max_width, e->width);
        s.min_height = std::min(s.min_height, e->height);
        s.max_height = std::max(s.max_height, e->height);
        fsum += e->frame_count;
        wsum += e->width;
        hsum += e->height;
        dsum += e->frame_count / e->fps;
    }
    s.avg_frame_count = fsum / s.clip_count;
    s.avg_width = wsum / s.clip_count;
    s.avg_height = hsum / s.clip_count;
    s.avg_duration_sec = dsum / s.clip_count;
    return s;
}

}  // namespace detail

/// Per-class and overall descriptive statistics straight from manifest
/// metadata. Classes with no clips stay unset rather than reporting zeros.
inline StatsTable compute_stats(const Manifest& manifest) {
    manifest.validate();
    StatsTable table;
    std::array<std::vector<const ManifestEntry*>, kNumClasses> by_class;
    std::vector<const ManifestEntry*> all;
    for (const ManifestEntry& e : manifest.entries) {
        by_class[static_cast<std::size_t>(class_index(e.label))].push_back(&e);
        all.push_back(&e);
    }
    for (ClassLabel label : kAllClasses) {
        const auto& group = by_class[static_cast<std::size_t>(class_index(label))];
        if (!group.empty())
            table.per_class[static_cast<std::size_t>(class_index(label))] =
                detail::accumulate_stats(group);
    }
    if (!all.empty()) table.overall = detail::accumulate_stats(all);
    return table;
}

inline nlohmann::json stats_to_json(const StatsTable& table) {
    const auto stats_json = [](const ClassStats& s) {
        return nlohmann::json{{"clip_count", s.clip_count},
                              {"min_frame_count", s.min_frame_count},
                              {"max_frame_count", s.max_frame_count},
                              {"avg_frame_count", s.avg_frame_count},
                              {"min_width", s.min_width},
                              {"max_width", s.max_width},
                              {"avg_width", s.avg_width},
                              {"min_height", s.min_height},
                              {"max_height", s.max_height},
                              {"avg_height", s.avg_height},
                              {"avg_duration_sec", s.avg_duration_sec}};
    };
    nlohmann::json per_class = nlohmann::json::object();
    for (ClassLabel label : kAllClasses) {
        const auto& s = table.per_class[static_cast<std::size_t>(class_index(label))];
        if (s) per_class[std::string(class_name(label))] = stats_json(*s);
    }
    nlohmann::json j{{"per_class", std::move(per_class)}};
    if (table.overall) j["overall"] = stats_json(*table.overall);
    return j;
}

// ---- expansion ----

struct ExpandError {
    std::string clip_id;
    std::string message;
};

struct ExpandReport {
    Manifest manifest;  // entries describe clips under the output root
    std::vector<ExpandError> errors;
    int clips_in = 0;
    int clips_out = 0;
};

/// Materialise the selected transforms of every manifest entry under
/// `out_root/<ClassName>/<derived_clip_id>/`. Source clips that fail to load
/// are reported and skipped; the rest still expand. The returned manifest is
/// ordered by source clip_id, then by transform declaration order, with
/// paths relative to out_root.
inline ExpandReport expand_dataset(const Manifest& manifest,
                                   const std::filesystem::path& manifest_dir,
                                   const std::filesystem::path& out_root,
                                   const AugmentParams& params,
                                   std::span<const Transform> transforms, unsigned jobs = 0) {
    manifest.validate();
    params.validate();
    if (transforms.empty())
        throw std::invalid_argument("expand_dataset: no transforms selected");

    std::vector<const ManifestEntry*> sources;
    sources.reserve(manifest.entries.size());
    for (const ManifestEntry& e : manifest.entries) sources.push_back(&e);
    std::sort(sources.begin(), sources.end(),
              [](const ManifestEntry* a, const ManifestEntry* b) {
                  return a->clip_id < b->clip_id;
              });

    struct Slot {
        std::vector<ManifestEntry> entries;
        std::optional<ExpandError> error;
    };
    std::vector<Slot> slots(sources.size());

    parallel_for(sources.size(), jobs, [&](std::size_t idx) {
        const ManifestEntry& src = *sources[idx];
        Slot& slot = slots[idx];
        try {
            const VideoClip clip = load_clip(manifest_dir / src.path);
            for (Transform t : transforms) {
                const VideoClip derived = apply_transform(clip, t, params);
                const std::string rel =
                    std::string(class_name(derived.label())) + "/" + derived.clip_id();
                save_clip(out_root / rel, derived);
                ManifestEntry e;
                e.clip_id = derived.clip_id();
                e.path = rel;
                e.label = derived.label();
                e.frame_count = derived.frame_count();
                e.fps = derived.fps();
                e.width = derived.width();
                e.height = derived.height();
                e.provenance = Provenance{src.clip_id, std::string(transform_name(t))};
                slot.entries.push_back(std::move(e));
            }
        } catch (const std::exception& ex) {
            slot.entries.clear();
            slot.error = ExpandError{src.clip_id, ex.what()};
        }
    });

    ExpandReport report;
    report.clips_in = static_cast<int>(sources.size());
    for (Slot& slot : slots) {
        if (slot.error) {
            report.errors.push_back(std::move(*slot.error));
            continue;
        }
        for (ManifestEntry& e : slot.entries) {
            report.manifest.entries.push_back(std::move(e));
            ++report.clips_out;
        }
    }
    report.manifest.validate();
    return report;
}

inline ExpandReport expand_dataset(const Manifest& manifest,
                                   const std::filesystem::path& manifest_dir,
                                   const std::filesystem::path& out_root,
                                   const AugmentParams& params, unsigned jobs = 0) {
    return expand_dataset(manifest, manifest_dir, out_root, params,
                          std::span<const Transform>(kAllTransforms), jobs);
}

}  // namespace stimkit
