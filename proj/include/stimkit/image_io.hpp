#pragma once

#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

#include <png.h>

#include <json.hpp>

#include "stimkit/core.hpp"

namespace stimkit {

namespace fs = std::filesystem;
using json = nlohmann::json;

inline std::vector<std::uint8_t> read_file_bytes(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open file: " + path.string());
    std::vector<std::uint8_t> data((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
    if (in.bad()) throw std::runtime_error("read failed: " + path.string());
    return data;
}

inline std::string read_file_text(const fs::path& path) {
    const auto bytes = read_file_bytes(path);
    return std::string(bytes.begin(), bytes.end());
}

/// Write-temp-then-rename so readers never observe a partial file and
/// re-running a pipeline stage leaves byte-identical trees.
inline void atomic_write_file(const fs::path& path, const void* data, std::size_t size) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open file for writing: " + tmp.string());
        out.write(static_cast<const char*>(data), static_cast<std::streamsize>(size));
        if (!out) throw std::runtime_error("write failed: " + tmp.string());
    }
    fs::rename(tmp, path);
}

inline void atomic_write_file(const fs::path& path, std::string_view text) {
    atomic_write_file(path, text.data(), text.size());
}

inline Frame decode_png_rgb(const std::uint8_t* data, std::size_t size) {
    png_image image;
    std::memset(&image, 0, sizeof image);
    image.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_memory(&image, data, size))
        throw std::runtime_error(std::string("png decode: ") + image.message);
    image.format = PNG_FORMAT_RGB;
    std::vector<Rgb> pixels(static_cast<std::size_t>(image.width) * image.height);
    if (!png_image_finish_read(&image, nullptr, pixels.data(), 0, nullptr)) {
        std::string message = image.message;
        png_image_free(&image);
        throw std::runtime_error("png decode: " + message);
    }
    return Frame(static_cast<int>(image.width), static_cast<int>(image.height), std::move(pixels));
}

inline Frame decode_png_rgb(const std::vector<std::uint8_t>& data) {
    return decode_png_rgb(data.data(), data.size());
}

inline std::vector<std::uint8_t> encode_png_rgb(const Frame& frame) {
    png_image image;
    std::memset(&image, 0, sizeof image);
    image.version = PNG_IMAGE_VERSION;
    image.width = static_cast<png_uint_32>(frame.width());
    image.height = static_cast<png_uint_32>(frame.height());
    image.format = PNG_FORMAT_RGB;

    png_alloc_size_t size = 0;
    if (!png_image_write_to_memory(&image, nullptr, &size, 0, frame.pixels().data(), 0, nullptr))
        throw std::runtime_error(std::string("png encode: ") + image.message);
    std::vector<std::uint8_t> out(size);
    if (!png_image_write_to_memory(&image, out.data(), &size, 0, frame.pixels().data(), 0, nullptr))
        throw std::runtime_error(std::string("png encode: ") + image.message);
    out.resize(size);
    return out;
}

inline std::string frame_filename(int index) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "frame_%06d.png", index);
    return buf;
}

/// Per-clip metadata stored as clip.json next to the frame PNGs.
struct ClipDescriptor {
    double fps;
    int width;
    int height;
    int frame_count;
    ClassLabel label;
};

inline ClipDescriptor read_clip_descriptor(const fs::path& clip_dir) {
    const fs::path desc_path = clip_dir / "clip.json";
    json j;
    try {
        j = json::parse(read_file_text(desc_path));
    } catch (const json::exception& e) {
        throw std::runtime_error("malformed descriptor " + desc_path.string() + ": " + e.what());
    }
    try {
        ClipDescriptor d{};
        d.fps = j.at("fps").get<double>();
        d.width = j.at("width").get<int>();
        d.height = j.at("height").get<int>();
        d.frame_count = j.at("frame_count").get<int>();
        d.label = class_from_name(j.at("label").get<std::string>());
        if (!(d.fps > 0.0) || d.width < 1 || d.height < 1 || d.frame_count < 1)
            throw std::invalid_argument("non-positive fps, size or frame count");
        return d;
    } catch (const std::exception& e) {
        throw std::runtime_error("malformed descriptor " + desc_path.string() + ": " + e.what());
    }
}

/// Loads a frame-directory clip. The clip id is the directory name.
inline VideoClip load_clip(const fs::path& clip_dir) {
    const ClipDescriptor desc = read_clip_descriptor(clip_dir);
    std::vector<Frame> frames;
    frames.reserve(static_cast<std::size_t>(desc.frame_count));
    for (int i = 0; i < desc.frame_count; ++i) {
        const fs::path frame_path = clip_dir / frame_filename(i);
        Frame frame = decode_png_rgb(read_file_bytes(frame_path));
        if (frame.width() != desc.width || frame.height() != desc.height)
            throw std::runtime_error("frame size mismatch in " + frame_path.string());
        frames.push_back(std::move(frame));
    }
    return VideoClip(clip_dir.filename().string(), std::move(frames), desc.fps, desc.label);
}

inline void save_clip(const fs::path& clip_dir, const VideoClip& clip) {
    fs::create_directories(clip_dir);
    for (int i = 0; i < clip.frame_count(); ++i) {
        const auto png = encode_png_rgb(clip.frames()[static_cast<std::size_t>(i)]);
        atomic_write_file(clip_dir / frame_filename(i), png.data(), png.size());
    }
    json j;
    j["fps"] = clip.fps();
    j["width"] = clip.width();
    j["height"] = clip.height();
    j["frame_count"] = clip.frame_count();
    j["label"] = std::string(class_name(clip.label()));
    // descriptor written last: its presence marks the clip directory complete
    atomic_write_file(clip_dir / "clip.json", j.dump(2) + "\n");
}

}  // namespace stimkit
