#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace stimkit {

using Rgb = std::array<std::uint8_t, 3>;

/// One RGB image held as a row-major grid of 8-bit pixels.
/// Row index i runs downward, column index j rightward, both 0-based.
class Frame {
public:
    Frame(int width, int height, std::vector<Rgb> pixels)
        : width_(width), height_(height), pixels_(std::move(pixels)) {
        if (width_ < 1 || height_ < 1)
            throw std::invalid_argument("Frame: dimensions must be >= 1");
        if (pixels_.size() != static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_))
            throw std::invalid_argument("Frame: pixel count must equal width*height");
    }

    Frame(int width, int height, Rgb fill = {0, 0, 0})
        : Frame(width, height,
                std::vector<Rgb>(check_dims(width, height), fill)) {}

    /// Builds a frame from int triples, rejecting any channel outside [0, 255].
    static Frame from_ints(int width, int height, const std::vector<std::array<int, 3>>& values) {
        std::vector<Rgb> px;
        px.reserve(values.size());
        for (const auto& v : values) {
            Rgb p{};
            for (int c = 0; c < 3; ++c) {
                if (v[c] < 0 || v[c] > 255)
                    throw std::out_of_range("Frame: channel value outside [0, 255]");
                p[c] = static_cast<std::uint8_t>(v[c]);
            }
            px.push_back(p);
        }
        return Frame(width, height, std::move(px));
    }

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }

    /// Pixel at (row i, column j); throws std::out_of_range when outside the grid.
    const Rgb& at(int i, int j) const {
        check_index(i, j);
        return pixels_[static_cast<std::size_t>(i) * width_ + j];
    }
    Rgb& at(int i, int j) {
        check_index(i, j);
        return pixels_[static_cast<std::size_t>(i) * width_ + j];
    }

    const std::vector<Rgb>& pixels() const noexcept { return pixels_; }

    bool operator==(const Frame&) const = default;

private:
    static int check_dims(int width, int height) {
        if (width < 1 || height < 1)
            throw std::invalid_argument("Frame: dimensions must be >= 1");
        return width * height;
    }
    void check_index(int i, int j) const {
        if (i < 0 || i >= height_ || j < 0 || j >= width_)
            throw std::out_of_range("Frame: pixel index out of range");
    }

    int width_;
    int height_;
    std::vector<Rgb> pixels_;
};

/// The three gesture classes, with their stable integer encoding.
enum class ClassLabel : int {
    ArmFlapping = 0,
    HeadBanging = 1,
    Spinning = 2,
};

inline constexpr int kNumClasses = 3;
inline constexpr std::array<ClassLabel, kNumClasses> kAllClasses = {
    ClassLabel::ArmFlapping, ClassLabel::HeadBanging, ClassLabel::Spinning};

inline constexpr int class_index(ClassLabel label) noexcept {
    return static_cast<int>(label);
}

inline ClassLabel class_from_index(int index) {
    if (index < 0 || index >= kNumClasses)
        throw std::out_of_range("ClassLabel: index must be in [0, 2]");
    return static_cast<ClassLabel>(index);
}

inline std::string_view class_name(ClassLabel label) {
    switch (label) {
        case ClassLabel::ArmFlapping: return "ArmFlapping";
        case ClassLabel::HeadBanging: return "HeadBanging";
        case ClassLabel::Spinning: return "Spinning";
    }
    throw std::invalid_argument("ClassLabel: invalid enum value");
}

inline ClassLabel class_from_name(std::string_view name) {
    for (ClassLabel label : kAllClasses)
        if (class_name(label) == name) return label;
    throw std::invalid_argument("ClassLabel: unknown class name '" + std::string(name) + "'");
}

/// Axis-aligned box given by its top-left (x1, y1) and bottom-right (x2, y2)
/// corners in pixels. Must have positive extent on both axes.
struct BoundingBox {
    int x1;
    int y1;
    int x2;
    int y2;

    BoundingBox(int x1_, int y1_, int x2_, int y2_) : x1(x1_), y1(y1_), x2(x2_), y2(y2_) {
        if (x1 < 0 || y1 < 0)
            throw std::invalid_argument("BoundingBox: coordinates must be >= 0");
        if (x2 <= x1 || y2 <= y1)
            throw std::invalid_argument("BoundingBox: corners must satisfy x2 > x1 and y2 > y1");
    }

    bool operator==(const BoundingBox&) const = default;
};

/// One detector hit: box, confidence and class id. Selection downstream uses
/// only the box; conf and cls are carried through for reporting.
struct Detection {
    BoundingBox bbox;
    double conf;
    int cls;

    Detection(BoundingBox bbox_, double conf_, int cls_) : bbox(bbox_), conf(conf_), cls(cls_) {
        if (!(conf >= 0.0 && conf <= 1.0))
            throw std::invalid_argument("Detection: conf must be in [0, 1]");
    }

    bool operator==(const Detection&) const = default;
};

/// An ordered frame sequence with a frame rate and a class label.
/// All frames share one size; immutable once built.
class VideoClip {
public:
    VideoClip(std::string clip_id, std::vector<Frame> frames, double fps, ClassLabel label)
        : clip_id_(std::move(clip_id)), frames_(std::move(frames)), fps_(fps), label_(label) {
        if (frames_.empty())
            throw std::invalid_argument("VideoClip: needs at least one frame");
        if (!(fps_ > 0.0))
            throw std::invalid_argument("VideoClip: fps must be positive");
        const int w = frames_.front().width();
        const int h = frames_.front().height();
        for (const Frame& f : frames_)
            if (f.width() != w || f.height() != h)
                throw std::invalid_argument("VideoClip: all frames must share one size");
    }

    const std::string& clip_id() const noexcept { return clip_id_; }
    const std::vector<Frame>& frames() const noexcept { return frames_; }
    double fps() const noexcept { return fps_; }
    ClassLabel label() const noexcept { return label_; }

    int width() const noexcept { return frames_.front().width(); }
    int height() const noexcept { return frames_.front().height(); }
    int frame_count() const noexcept { return static_cast<int>(frames_.size()); }
    double duration_sec() const noexcept { return frame_count() / fps_; }

    bool operator==(const VideoClip&) const = default;

private:
    std::string clip_id_;
    std::vector<Frame> frames_;
    double fps_;
    ClassLabel label_;
};

}  // namespace stimkit
