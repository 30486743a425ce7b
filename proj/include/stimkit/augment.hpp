#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "stimkit/core.hpp"

namespace stimkit {

namespace detail {

/// Mirror an index into [0, n) without repeating the edge sample
/// (... 2 1 0 1 2 ... n-2 n-1 n-2 ...). n == 1 collapses to 0.
inline int reflect101(int idx, int n) {
    if (n == 1) return 0;
    const int period = 2 * (n - 1);
    int m = idx % period;
    if (m < 0) m += period;
    return m < n ? m : period - m;
}

inline std::uint8_t round_half_up_u8(double v) {
    const double r = std::floor(v + 0.5);
    return static_cast<std::uint8_t>(std::clamp(r, 0.0, 255.0));
}

/// Catmull-Rom kernel (cubic with a = -0.5), support [-2, 2].
inline double cubic_weight(double x) {
    constexpr double a = -0.5;
    x = std::fabs(x);
    if (x < 1.0) return ((a + 2.0) * x - (a + 3.0)) * x * x + 1.0;
    if (x < 2.0) return (((x - 5.0) * x + 8.0) * x - 4.0) * a;
    return 0.0;
}

}  // namespace detail

/// out(i, j) = in(i, W-1-j)
inline Frame hflip(const Frame& frame) {
    const int w = frame.width(), h = frame.height();
    std::vector<Rgb> out(static_cast<std::size_t>(w) * h);
    for (int i = 0; i < h; ++i)
        for (int j = 0; j < w; ++j)
            out[static_cast<std::size_t>(i) * w + j] = frame.at(i, w - 1 - j);
    return Frame(w, h, std::move(out));
}

/// out(i, j) = in(H-1-i, j)
inline Frame vflip(const Frame& frame) {
    const int w = frame.width(), h = frame.height();
    std::vector<Rgb> out(static_cast<std::size_t>(w) * h);
    for (int i = 0; i < h; ++i)
        for (int j = 0; j < w; ++j)
            out[static_cast<std::size_t>(i) * w + j] = frame.at(h - 1 - i, j);
    return Frame(w, h, std::move(out));
}

/// Every channel c becomes 255 - c.
inline Frame invert_color(const Frame& frame) {
    std::vector<Rgb> out(frame.pixels().size());
    const auto& src = frame.pixels();
    for (std::size_t k = 0; k < src.size(); ++k)
        out[k] = Rgb{static_cast<std::uint8_t>(255 - src[k][0]),
                     static_cast<std::uint8_t>(255 - src[k][1]),
                     static_cast<std::uint8_t>(255 - src[k][2])};
    return Frame(frame.width(), frame.height(), std::move(out));
}

/// Rotate by `degrees` counterclockwise about the frame center
/// ((W-1)/2, (H-1)/2). Output keeps the input dimensions. Each output pixel
/// is sampled at the inverse-rotated source position with bilinear
/// interpolation; positions falling outside the frame take mirrored
/// (edge-non-repeating) neighbours. degrees == 0 reproduces the input
/// exactly.
inline Frame rotate(const Frame& frame, double degrees) {
    const int w = frame.width(), h = frame.height();
    const double theta = degrees * std::numbers::pi / 180.0;
    const double c = std::cos(theta), s = std::sin(theta);
    const double cx = (w - 1) / 2.0, cy = (h - 1) / 2.0;

    std::vector<Rgb> out(static_cast<std::size_t>(w) * h);
    for (int i = 0; i < h; ++i) {
        for (int j = 0; j < w; ++j) {
            // inverse mapping: rotate the output position by -theta
            const double dx = j - cx, dy = i - cy;
            const double sx = cx + c * dx + s * dy;
            const double sy = cy - s * dx + c * dy;

            const double fx = std::floor(sx), fy = std::floor(sy);
            const double tx = sx - fx, ty = sy - fy;
            const int x0 = static_cast<int>(fx), y0 = static_cast<int>(fy);

            const int xs[2] = {detail::reflect101(x0, w), detail::reflect101(x0 + 1, w)};
            const int ys[2] = {detail::reflect101(y0, h), detail::reflect101(y0 + 1, h)};
            const double wx[2] = {1.0 - tx, tx};
            const double wy[2] = {1.0 - ty, ty};

            double acc[3] = {0, 0, 0};
            for (int a = 0; a < 2; ++a)
                for (int b = 0; b < 2; ++b) {
                    const Rgb& p = frame.at(ys[a], xs[b]);
                    const double wgt = wy[a] * wx[b];
                    for (int ch = 0; ch < 3; ++ch) acc[ch] += wgt * p[ch];
                }
            Rgb& dst = out[static_cast<std::size_t>(i) * w + j];
            for (int ch = 0; ch < 3; ++ch) dst[ch] = detail::round_half_up_u8(acc[ch]);
        }
    }
    return Frame(w, h, std::move(out));
}

/// Scale spatially by `alpha` > 0 with Catmull-Rom bicubic interpolation.
/// Output dimensions are round-half-up(alpha * W) x round-half-up(alpha * H);
/// output pixel (i, j) samples the source at (i / alpha, j / alpha) with
/// mirrored out-of-range taps.
inline Frame upsample_spatial(const Frame& frame, double alpha) {
    if (!(alpha > 0.0) || !std::isfinite(alpha))
        throw std::invalid_argument("upsample_spatial: alpha must be a positive finite number");
    const int sw = frame.width(), sh = frame.height();
    const int dw = static_cast<int>(std::floor(alpha * sw + 0.5));
    const int dh = static_cast<int>(std::floor(alpha * sh + 0.5));
    if (dw < 1 || dh < 1)
        throw std::invalid_argument("upsample_spatial: alpha too small, output would be empty");

    // per-axis taps are identical across rows/columns, so precompute columns
    struct Taps { int idx[4]; double w[4]; };
    const auto make_taps = [alpha](int dst_n, int src_n) {
        std::vector<Taps> taps(static_cast<std::size_t>(dst_n));
        for (int o = 0; o < dst_n; ++o) {
            const double pos = o / alpha;
            const int base = static_cast<int>(std::floor(pos));
            const double t = pos - base;
            for (int k = 0; k < 4; ++k) {
                taps[static_cast<std::size_t>(o)].idx[k] = detail::reflect101(base - 1 + k, src_n);
                taps[static_cast<std::size_t>(o)].w[k] = detail::cubic_weight(t - (k - 1));
            }
        }
        return taps;
    };
    const auto col_taps = make_taps(dw, sw);
    const auto row_taps = make_taps(dh, sh);

    // horizontal pass into doubles, then vertical pass
    std::vector<double> mid(static_cast<std::size_t>(sh) * dw * 3);
    for (int i = 0; i < sh; ++i)
        for (int j = 0; j < dw; ++j) {
            const Taps& tp = col_taps[static_cast<std::size_t>(j)];
            double acc[3] = {0, 0, 0};
            for (int k = 0; k < 4; ++k) {
                const Rgb& p = frame.at(i, tp.idx[k]);
                for (int ch = 0; ch < 3; ++ch) acc[ch] += tp.w[k] * p[ch];
            }
            double* dst = &mid[(static_cast<std::size_t>(i) * dw + j) * 3];
            for (int ch = 0; ch < 3; ++ch) dst[ch] = acc[ch];
        }

    std::vector<Rgb> out(static_cast<std::size_t>(dw) * dh);
    for (int i = 0; i < dh; ++i) {
        const Taps& tp = row_taps[static_cast<std::size_t>(i)];
        for (int j = 0; j < dw; ++j) {
            double acc[3] = {0, 0, 0};
            for (int k = 0; k < 4; ++k) {
                const double* p = &mid[(static_cast<std::size_t>(tp.idx[k]) * dw + j) * 3];
                for (int ch = 0; ch < 3; ++ch) acc[ch] += tp.w[k] * p[ch];
            }
            Rgb& dst = out[static_cast<std::size_t>(i) * dw + j];
            for (int ch = 0; ch < 3; ++ch) dst[ch] = detail::round_half_up_u8(acc[ch]);
        }
    }
    return Frame(dw, dh, std::move(out));
}

// ---- clip-level transforms ----

inline VideoClip map_frames(const VideoClip& clip, const std::string& id_suffix,
                            Frame (*fn)(const Frame&)) {
    std::vector<Frame> frames;
    frames.reserve(clip.frames().size());
    for (const Frame& f : clip.frames()) frames.push_back(fn(f));
    return VideoClip(clip.clip_id() + id_suffix, std::move(frames), clip.fps(), clip.label());
}

inline VideoClip hflip_clip(const VideoClip& clip) { return map_frames(clip, "__hflip", hflip); }
inline VideoClip vflip_clip(const VideoClip& clip) { return map_frames(clip, "__vflip", vflip); }
inline VideoClip invert_color_clip(const VideoClip& clip) {
    return map_frames(clip, "__invert", invert_color);
}

inline VideoClip rotate_clip(const VideoClip& clip, double degrees) {
    std::vector<Frame> frames;
    frames.reserve(clip.frames().size());
    for (const Frame& f : clip.frames()) frames.push_back(rotate(f, degrees));
    return VideoClip(clip.clip_id() + "__rotate", std::move(frames), clip.fps(), clip.label());
}

inline VideoClip upsample_clip(const VideoClip& clip, double alpha) {
    std::vector<Frame> frames;
    frames.reserve(clip.frames().size());
    for (const Frame& f : clip.frames()) frames.push_back(upsample_spatial(f, alpha));
    return VideoClip(clip.clip_id() + "__upsample", std::move(frames), clip.fps(), clip.label());
}

/// Keep every beta-th frame starting at index 0; fps divides by beta so the
/// wall-clock span is preserved. Output frame count is ceil(N / beta).
inline VideoClip downsample_temporal(const VideoClip& clip, int beta) {
    if (beta < 1)
        throw std::invalid_argument("downsample_temporal: beta must be >= 1");
    std::vector<Frame> frames;
    for (int t = 0; t < clip.frame_count(); t += beta)
        frames.push_back(clip.frames()[static_cast<std::size_t>(t)]);
    return VideoClip(clip.clip_id() + "__downsample", std::move(frames),
                     clip.fps() / beta, clip.label());
}

struct AugmentParams {
    double alpha = 2.0;
    double theta_degrees = 25.0;
    int beta = 2;

    void validate() const {
        if (!(alpha > 0.0) || !std::isfinite(alpha))
            throw std::invalid_argument("AugmentParams: alpha must be positive and finite");
        if (!std::isfinite(theta_degrees))
            throw std::invalid_argument("AugmentParams: theta must be finite");
        if (beta < 1)
            throw std::invalid_argument("AugmentParams: beta must be >= 1");
    }
};

enum class Transform {
    Original,
    HFlip,
    VFlip,
    Upsample,
    Rotate,
    InvertColor,
    DownsampleTemporal,
};

inline constexpr Transform kAllTransforms[] = {
    Transform::Original,     Transform::HFlip,       Transform::VFlip,
    Transform::Upsample,     Transform::Rotate,      Transform::InvertColor,
    Transform::DownsampleTemporal,
};

inline std::string_view transform_name(Transform t) {
    switch (t) {
        case Transform::Original: return "original";
        case Transform::HFlip: return "hflip";
        case Transform::VFlip: return "vflip";
        case Transform::Upsample: return "upsample";
        case Transform::Rotate: return "rotate";
        case Transform::InvertColor: return "invert";
        case Transform::DownsampleTemporal: return "downsample";
    }
    throw std::invalid_argument("Transform: invalid enum value");
}

inline Transform transform_from_name(std::string_view name) {
    for (Transform t : kAllTransforms)
        if (transform_name(t) == name) return t;
    throw std::invalid_argument("unknown transform '" + std::string(name) + "'");
}

inline VideoClip apply_transform(const VideoClip& clip, Transform t, const AugmentParams& params) {
    params.validate();
    switch (t) {
        case Transform::Original:
            return VideoClip(clip.clip_id() + "__original", clip.frames(), clip.fps(), clip.label());
        case Transform::HFlip: return hflip_clip(clip);
        case Transform::VFlip: return vflip_clip(clip);
        case Transform::Upsample: return upsample_clip(clip, params.alpha);
        case Transform::Rotate: return rotate_clip(clip, params.theta_degrees);
        case Transform::InvertColor: return invert_color_clip(clip);
        case Transform::DownsampleTemporal: return downsample_temporal(clip, params.beta);
    }
    throw std::invalid_argument("Transform: invalid enum value");
}

/// The original plus all six augmentations, in declaration order.
inline std::vector<VideoClip> augment_clip(const VideoClip& clip, const AugmentParams& params) {
    std::vector<VideoClip> out;
    out.reserve(std::size(kAllTransforms));
    for (Transform t : kAllTransforms) out.push_back(apply_transform(clip, t, params));
    return out;
}

}  // namespace stimkit
