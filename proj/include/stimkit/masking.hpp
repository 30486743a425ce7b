#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "stimkit/core.hpp"

namespace stimkit {

/// What to emit for a frame with no detection at all.
enum class NoDetectionPolicy { Passthrough, Blackout, SkipFrame };

inline std::string_view no_detection_policy_name(NoDetectionPolicy p) {
    switch (p) {
        case NoDetectionPolicy::Passthrough: return "passthrough";
        case NoDetectionPolicy::Blackout: return "blackout";
        case NoDetectionPolicy::SkipFrame: return "skip_frame";
    }
    throw std::invalid_argument("NoDetectionPolicy: invalid enum value");
}

inline NoDetectionPolicy no_detection_policy_from_name(std::string_view name) {
    if (name == "passthrough") return NoDetectionPolicy::Passthrough;
    if (name == "blackout") return NoDetectionPolicy::Blackout;
    if (name == "skip_frame") return NoDetectionPolicy::SkipFrame;
    throw std::invalid_argument("unknown no-detection policy '" + std::string(name) + "'");
}

struct MaskingConfig {
    int target_width = 224;
    int target_height = 224;
    NoDetectionPolicy on_no_detection = NoDetectionPolicy::Passthrough;

    void validate() const {
        if (target_width < 1 || target_height < 1)
            throw std::invalid_argument("MaskingConfig: target size components must be >= 1");
    }
};

/// Per-pixel grid of {0, 255}; 255 keeps the source pixel, 0 blacks it out.
class BinaryMask {
public:
    BinaryMask(int width, int height, std::vector<std::uint8_t> values)
        : width_(width), height_(height), values_(std::move(values)) {
        if (width_ < 1 || height_ < 1)
            throw std::invalid_argument("BinaryMask: dimensions must be >= 1");
        if (values_.size() != static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_))
            throw std::invalid_argument("BinaryMask: value count must equal width*height");
        for (std::uint8_t v : values_)
            if (v != 0 && v != 255)
                throw std::invalid_argument("BinaryMask: values must be exactly 0 or 255");
    }

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    std::uint8_t at(int i, int j) const {
        if (i < 0 || i >= height_ || j < 0 || j >= width_)
            throw std::out_of_range("BinaryMask: index out of range");
        return values_[static_cast<std::size_t>(i) * width_ + j];
    }
    const std::vector<std::uint8_t>& values() const noexcept { return values_; }

    /// Number of 255 pixels.
    long long count_set() const noexcept {
        return std::count(values_.begin(), values_.end(), std::uint8_t{255});
    }

    bool operator==(const BinaryMask&) const = default;

private:
    int width_;
    int height_;
    std::vector<std::uint8_t> values_;
};

inline long long box_area(const BoundingBox& box) noexcept {
    return static_cast<long long>(box.x2 - box.x1) * static_cast<long long>(box.y2 - box.y1);
}

/// Largest-area detection wins; ties keep the earliest detection (strict >
/// against the running maximum). Empty input yields no detection.
inline std::optional<Detection> select_largest_detection(std::span<const Detection> detections) {
    long long max_area = 0;
    std::optional<Detection> winner;
    for (const Detection& d : detections) {
        const long long area = box_area(d.bbox);
        if (area > max_area) {
            max_area = area;
            winner = d;
        }
    }
    return winner;
}

inline std::optional<BoundingBox> select_largest(std::span<const Detection> detections) {
    const auto winner = select_largest_detection(detections);
    if (!winner) return std::nullopt;
    return winner->bbox;
}

/// All-zero mask with 255 filled over the box rectangle, clamped to the
/// frame; the 255 pixels are rows [y1, y2-1] x cols [x1, x2-1] so the set
/// count equals the box area when the box lies inside the frame.
inline BinaryMask build_mask(int width, int height, const BoundingBox& box) {
    if (width < 1 || height < 1)
        throw std::invalid_argument("build_mask: dimensions must be >= 1");
    std::vector<std::uint8_t> values(static_cast<std::size_t>(width) * height, 0);
    const int row_end = std::min(box.y2 - 1, height - 1);
    const int col_end = std::min(box.x2 - 1, width - 1);
    for (int i = box.y1; i <= row_end; ++i)
        for (int j = box.x1; j <= col_end; ++j)
            values[static_cast<std::size_t>(i) * width + j] = 255;
    return BinaryMask(width, height, std::move(values));
}

/// Keeps pixels where the mask is 255, turns the rest black.
inline Frame apply_mask(const Frame& frame, const BinaryMask& mask) {
    if (mask.width() != frame.width() || mask.height() != frame.height())
        throw std::invalid_argument("apply_mask: mask dimensions must equal frame dimensions");
    std::vector<Rgb> out(frame.pixels().size());
    const auto& src = frame.pixels();
    const auto& m = mask.values();
    for (std::size_t k = 0; k < src.size(); ++k)
        out[k] = m[k] == 255 ? src[k] : Rgb{0, 0, 0};
    return Frame(frame.width(), frame.height(), std::move(out));
}

/// Subframe covering the intersection of the box and the frame.
inline Frame crop(const Frame& frame, const BoundingBox& box) {
    const int row_end = std::min(box.y2, frame.height());  // exclusive
    const int col_end = std::min(box.x2, frame.width());
    if (box.y1 >= row_end || box.x1 >= col_end)
        throw std::invalid_argument("crop: box does not intersect the frame");
    const int out_w = col_end - box.x1;
    const int out_h = row_end - box.y1;
    std::vector<Rgb> out;
    out.reserve(static_cast<std::size_t>(out_w) * out_h);
    for (int i = box.y1; i < row_end; ++i)
        for (int j = box.x1; j < col_end; ++j)
            out.push_back(frame.at(i, j));
    return Frame(out_w, out_h, std::move(out));
}

namespace detail {

inline std::uint8_t round_channel(double v) {
    const double r = std::floor(v + 0.5);  // round half up
    return static_cast<std::uint8_t>(std::clamp(r, 0.0, 255.0));
}

// Box-filter weights: overlap of each output cell [o*scale, (o+1)*scale)
// with the source cells it covers.
struct AxisWeights {
    std::vector<int> start;
    std::vector<std::vector<double>> weights;
};

inline AxisWeights box_filter_weights(int src_n, int dst_n) {
    AxisWeights aw;
    aw.start.resize(static_cast<std::size_t>(dst_n));
    aw.weights.resize(static_cast<std::size_t>(dst_n));
    const double scale = static_cast<double>(src_n) / static_cast<double>(dst_n);
    for (int o = 0; o < dst_n; ++o) {
        const double lo = o * scale;
        const double hi = (o + 1) * scale;
        int k0 = std::clamp(static_cast<int>(std::floor(lo)), 0, src_n - 1);
        int k1 = std::clamp(static_cast<int>(std::ceil(hi)), k0 + 1, src_n);
        auto& w = aw.weights[static_cast<std::size_t>(o)];
        for (int k = k0; k < k1; ++k)
            w.push_back(std::max(0.0, std::min<double>(k + 1, hi) - std::max<double>(k, lo)));
        aw.start[static_cast<std::size_t>(o)] = k0;
    }
    return aw;
}

}  // namespace detail

/// Pixel-area-relation resample: every output pixel is the area-weighted
/// mean of the source rectangle it covers. An exact integer reduction k
/// degenerates to plain k x k block means.
inline Frame resize_area(const Frame& frame, int target_width, int target_height) {
    if (target_width < 1 || target_height < 1)
        throw std::invalid_argument("resize_area: target components must be >= 1");
    const int sw = frame.width(), sh = frame.height();
    const auto wx = detail::box_filter_weights(sw, target_width);
    const auto wy = detail::box_filter_weights(sh, target_height);

    // horizontal pass
    std::vector<double> mid(static_cast<std::size_t>(sh) * target_width * 3);
    for (int i = 0; i < sh; ++i) {
        for (int o = 0; o < target_width; ++o) {
            double acc[3] = {0, 0, 0};
            double wsum = 0;
            const auto& w = wx.weights[static_cast<std::size_t>(o)];
            for (std::size_t t = 0; t < w.size(); ++t) {
                const Rgb& p = frame.at(i, wx.start[static_cast<std::size_t>(o)] + static_cast<int>(t));
                for (int c = 0; c < 3; ++c) acc[c] += w[t] * p[c];
                wsum += w[t];
            }
            double* dst = &mid[(static_cast<std::size_t>(i) * target_width + o) * 3];
            for (int c = 0; c < 3; ++c) dst[c] = acc[c] / wsum;
        }
    }

    // vertical pass
    std::vector<Rgb> out(static_cast<std::size_t>(target_width) * target_height);
    for (int o = 0; o < target_height; ++o) {
        const auto& w = wy.weights[static_cast<std::size_t>(o)];
        for (int j = 0; j < target_width; ++j) {
            double acc[3] = {0, 0, 0};
            double wsum = 0;
            for (std::size_t t = 0; t < w.size(); ++t) {
                const int i = wy.start[static_cast<std::size_t>(o)] + static_cast<int>(t);
                const double* p = &mid[(static_cast<std::size_t>(i) * target_width + j) * 3];
                for (int c = 0; c < 3; ++c) acc[c] += w[t] * p[c];
                wsum += w[t];
            }
            Rgb& dst = out[static_cast<std::size_t>(o) * target_width + j];
            for (int c = 0; c < 3; ++c) dst[c] = detail::round_channel(acc[c] / wsum);
        }
    }
    return Frame(target_width, target_height, std::move(out));
}

enum class FrameAction { Masked, Passthrough, Blackout, Skipped };

inline std::string_view frame_action_name(FrameAction a) {
    switch (a) {
        case FrameAction::Masked: return "masked";
        case FrameAction::Passthrough: return "passthrough";
        case FrameAction::Blackout: return "blackout";
        case FrameAction::Skipped: return "skipped";
    }
    throw std::invalid_argument("FrameAction: invalid enum value");
}

struct FrameReport {
    int frame_index = 0;
    std::optional<Detection> chosen;  // the winning detection, conf and cls included
    std::optional<long long> chosen_area;
    FrameAction action = FrameAction::Passthrough;
};

struct ProcessReport {
    std::vector<FrameReport> frames;
    int masked = 0;
    int passthrough = 0;
    int blackout = 0;
    int skipped = 0;
};

struct ProcessedClip {
    VideoClip clip;
    ProcessReport report;
};

/// Full per-frame pipeline: select largest box, rectangle-mask the frame,
/// resize with area interpolation. Frames with no detection follow the
/// configured policy. Output fps equals input fps.
inline ProcessedClip process_clip(const VideoClip& clip,
                                  const std::vector<std::vector<Detection>>& detections,
                                  const MaskingConfig& config) {
    config.validate();
    if (detections.size() != static_cast<std::size_t>(clip.frame_count()))
        throw std::invalid_argument("process_clip: detections length must equal frame count");

    ProcessReport report;
    std::vector<Frame> out_frames;
    out_frames.reserve(detections.size());

    for (int i = 0; i < clip.frame_count(); ++i) {
        const Frame& src = clip.frames()[static_cast<std::size_t>(i)];
        FrameReport fr;
        fr.frame_index = i;
        const auto winner = select_largest_detection(detections[static_cast<std::size_t>(i)]);
        if (winner) {
            fr.chosen = *winner;
            fr.chosen_area = box_area(winner->bbox);
            fr.action = FrameAction::Masked;
            ++report.masked;
            const BinaryMask mask = build_mask(src.width(), src.height(), winner->bbox);
            out_frames.push_back(resize_area(apply_mask(src, mask),
                                             config.target_width, config.target_height));
        } else {
            switch (config.on_no_detection) {
                case NoDetectionPolicy::Passthrough:
                    fr.action = FrameAction::Passthrough;
                    ++report.passthrough;
                    out_frames.push_back(resize_area(src, config.target_width, config.target_height));
                    break;
                case NoDetectionPolicy::Blackout:
                    fr.action = FrameAction::Blackout;
                    ++report.blackout;
                    out_frames.emplace_back(config.target_width, config.target_height, Rgb{0, 0, 0});
                    break;
                case NoDetectionPolicy::SkipFrame:
                    fr.action = FrameAction::Skipped;
                    ++report.skipped;
                    break;
            }
        }
        report.frames.push_back(fr);
    }

    if (out_frames.empty())
        throw std::runtime_error("process_clip: skip_frame policy dropped every frame of clip '" +
                                 clip.clip_id() + "'");
    return ProcessedClip{VideoClip(clip.clip_id(), std::move(out_frames), clip.fps(), clip.label()),
                         std::move(report)};
}

inline nlohmann::json process_report_to_json(const ProcessReport& report) {
    nlohmann::json frames = nlohmann::json::array();
    for (const FrameReport& fr : report.frames) {
        nlohmann::json f;
        f["frame_index"] = fr.frame_index;
        f["action"] = std::string(frame_action_name(fr.action));
        if (fr.chosen) {
            f["box"] = {{"x1", fr.chosen->bbox.x1},
                        {"y1", fr.chosen->bbox.y1},
                        {"x2", fr.chosen->bbox.x2},
                        {"y2", fr.chosen->bbox.y2}};
            f["area"] = *fr.chosen_area;
            f["conf"] = fr.chosen->conf;
            f["cls"] = fr.chosen->cls;
        }
        frames.push_back(std::move(f));
    }
    return nlohmann::json{{"frames", std::move(frames)},
                          {"masked", report.masked},
                          {"passthrough", report.passthrough},
                          {"blackout", report.blackout},
                          {"skipped", report.skipped}};
}

/// Detection file: one JSON object per line, `{"frame_index": i,
/// "detections": [{"x1":..,"y1":..,"x2":..,"y2":..,"conf":..,"cls":..}]}`.
/// Frames absent from the file get zero detections. Coordinates are rounded
/// to integers and clamped at zero; boxes left with no positive extent are
/// dropped (they can never win largest-box selection).
inline std::vector<std::vector<Detection>> parse_detections_jsonl(std::istream& in, int frame_count) {
    if (frame_count < 1)
        throw std::invalid_argument("parse_detections_jsonl: frame_count must be >= 1");
    std::vector<std::vector<Detection>> per_frame(static_cast<std::size_t>(frame_count));
    std::vector<bool> seen(static_cast<std::size_t>(frame_count), false);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw std::runtime_error("detections line " + std::to_string(line_no) + ": " + e.what());
        }
        try {
            const int idx = j.at("frame_index").get<int>();
            if (idx < 0 || idx >= frame_count)
                throw std::invalid_argument("frame_index " + std::to_string(idx) +
                                            " outside [0, " + std::to_string(frame_count) + ")");
            if (seen[static_cast<std::size_t>(idx)])
                throw std::invalid_argument("duplicate frame_index " + std::to_string(idx));
            seen[static_cast<std::size_t>(idx)] = true;
            for (const auto& d : j.at("detections")) {
                const int x1 = std::max(0, static_cast<int>(std::llround(d.at("x1").get<double>())));
                const int y1 = std::max(0, static_cast<int>(std::llround(d.at("y1").get<double>())));
                const int x2 = static_cast<int>(std::llround(d.at("x2").get<double>()));
                const int y2 = static_cast<int>(std::llround(d.at("y2").get<double>()));
                const double conf = d.at("conf").get<double>();
                const int cls = d.at("cls").get<int>();
                if (x2 <= x1 || y2 <= y1) continue;  // degenerate box
                per_frame[static_cast<std::size_t>(idx)].emplace_back(BoundingBox(x1, y1, x2, y2), conf, cls);
            }
        } catch (const std::exception& e) {
            throw std::runtime_error("detections line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return per_frame;
}

inline std::vector<std::vector<Detection>> parse_detections_jsonl(const std::string& text, int frame_count) {
    std::istringstream in(text);
    return parse_detections_jsonl(in, frame_count);
}

}  // namespace stimkit
