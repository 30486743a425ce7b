#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include <stimkit/stimkit.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

/// Bad argument values detected after CLI11 parsing; mapped to exit code 2.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::pair<int, int> parse_size(const std::string& text) {
    const auto x = text.find('x');
    if (x == std::string::npos || x == 0 || x + 1 >= text.size())
        throw UsageError("--size must look like HxW, e.g. 224x224");
    try {
        std::size_t uh = 0, uw = 0;
        const std::string hs = text.substr(0, x), ws = text.substr(x + 1);
        const int h = std::stoi(hs, &uh);
        const int w = std::stoi(ws, &uw);
        if (uh != hs.size() || uw != ws.size() || h < 1 || w < 1)
            throw std::invalid_argument(text);
        return {h, w};
    } catch (const std::exception&) {
        throw UsageError("--size must be two positive integers as HxW, got '" + text + "'");
    }
}

void ensure_output_dir(const fs::path& out, bool force) {
    if (!fs::exists(out)) return;
    if (!fs::is_directory(out))
        throw std::runtime_error("output path '" + out.string() + "' exists and is not a directory");
    if (!fs::is_empty(out) && !force)
        throw std::runtime_error("output directory '" + out.string() +
                                 "' is not empty; pass --force to write into it");
}

void write_json_file(const fs::path& path, const json& j) {
    stimkit::atomic_write_file(path, j.dump(2) + "\n");
}

void print_json(const json& j) { std::cout << j.dump(2) << "\n"; }

std::string rebase_path(const std::string& rel, const fs::path& from_dir, const fs::path& to_dir) {
    const fs::path target = fs::absolute(from_dir / rel).lexically_normal();
    const fs::path base = fs::absolute(to_dir).lexically_normal();
    fs::path r = target.lexically_relative(base);
    if (r.empty()) r = target;
    return r.generic_string();
}

stimkit::Manifest rebase_manifest(stimkit::Manifest manifest, const fs::path& from_dir,
                                  const fs::path& to_dir) {
    for (stimkit::ManifestEntry& e : manifest.entries)
        e.path = rebase_path(e.path, from_dir, to_dir);
    return manifest;
}

json per_class_counts(const std::vector<stimkit::ManifestEntry>& entries) {
    std::array<int, stimkit::kNumClasses> counts{};
    for (const auto& e : entries) ++counts[static_cast<std::size_t>(stimkit::class_index(e.label))];
    json j = json::object();
    for (stimkit::ClassLabel label : stimkit::kAllClasses)
        j[std::string(stimkit::class_name(label))] =
            counts[static_cast<std::size_t>(stimkit::class_index(label))];
    return j;
}

// ---- flat key=value configuration files ----

std::map<std::string, std::string> load_config_file(const fs::path& path) {
    const std::string text = stimkit::read_file_text(path);
    std::map<std::string, std::string> kv;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    const auto trim = [](std::string s) {
        const auto b = s.find_first_not_of(" \t\r");
        const auto e = s.find_last_not_of(" \t\r");
        return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    while (std::getline(in, line)) {
        ++line_no;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos || eq == 0)
            throw UsageError("config " + path.string() + " line " + std::to_string(line_no) +
                             ": expected key=value");
        kv[trim(t.substr(0, eq))] = trim(t.substr(eq + 1));
    }
    return kv;
}

template <typename T>
void merge_option(const CLI::App* cmd, const std::map<std::string, std::string>& cfg,
                  const std::string& flag, const std::string& key, T& value) {
    if (cmd->count(flag) > 0) return;  // explicit flag wins over the config file
    const auto it = cfg.find(key);
    if (it == cfg.end()) return;
    if constexpr (std::is_same_v<T, std::string>) {
        value = it->second;
    } else if constexpr (std::is_same_v<T, bool>) {
        const std::string& v = it->second;
        if (v == "1" || v == "true" || v == "on" || v == "yes")
            value = true;
        else if (v == "0" || v == "false" || v == "off" || v == "no")
            value = false;
        else
            throw UsageError("config: bad boolean '" + v + "' for " + key);
    } else {
        std::istringstream ss(it->second);
        T parsed{};
        ss >> parsed;
        if (ss.fail() || !(ss >> std::ws).eof())
            throw UsageError("config: bad value '" + it->second + "' for " + key);
        value = parsed;
    }
}

// ---- subcommand options ----

struct ScanOpts {
    std::string root;
    std::string out;
    std::string config;
};

struct TrimOpts {
    std::string root;
    std::string segments;
    std::string out;
    bool force = false;
    std::string config;
};

struct MaskOpts {
    std::string manifest;
    std::string detections;
    std::string out;
    std::string size = "224x224";
    std::string policy = "passthrough";
    unsigned jobs = 0;
    bool force = false;
    std::string config;
};

struct AugmentOpts {
    std::string manifest;
    std::string out;
    bool all = false;
    std::vector<std::string> transforms;
    double alpha = 2.0;
    double theta = 25.0;
    int beta = 2;
    unsigned jobs = 0;
    bool force = false;
    std::string config;
};

struct SplitOpts {
    std::string manifest;
    std::string out;
    std::string ratios = "70:15:15";
    std::uint64_t seed = 0;
    bool force = false;
    std::string config;
};

struct StatsOpts {
    std::string manifest;
    std::string out;
    bool as_json = false;
    std::string config;
};

struct EvalOpts {
    std::string predictions;
    std::string out;
    bool as_json = false;
    std::string config;
};

struct TubemaskOpts {
    int frames = 16;
    std::string size = "224x224";
    double rho = std::numeric_limits<double>::quiet_NaN();  // no default ratio
    std::uint64_t seed = 0;
    std::string out;
    std::string config;
};

// ---- subcommand bodies ----

int run_scan(const ScanOpts& o) {
    const fs::path root = o.root;
    const stimkit::Manifest manifest = stimkit::scan_dataset(root);
    const fs::path out = o.out.empty() ? root / "manifest.json" : fs::path(o.out);
    stimkit::save_manifest(out, rebase_manifest(manifest, root, out.parent_path()));
    print_json(json{{"entries", manifest.entries.size()},
                    {"per_class", per_class_counts(manifest.entries)},
                    {"manifest", out.string()}});
    return 0;
}

int run_trim(const TrimOpts& o) {
    const fs::path root = o.root;
    const fs::path out_root = o.out.empty() ? fs::path(root.string() + "_trimmed") : fs::path(o.out);
    ensure_output_dir(out_root, o.force);

    const stimkit::Manifest source = stimkit::scan_dataset(root);
    std::map<std::string, const stimkit::ManifestEntry*> by_id;
    for (const auto& e : source.entries) by_id[e.clip_id] = &e;

    const auto segments = stimkit::parse_segments(stimkit::read_file_text(o.segments));
    if (segments.empty()) throw std::runtime_error("segments file lists no segments");

    stimkit::Manifest out_manifest;
    for (const stimkit::TrimSegment& seg : segments) {
        const auto it = by_id.find(seg.clip_id);
        if (it == by_id.end())
            throw std::runtime_error("segment refers to unknown clip '" + seg.clip_id + "'");
        const stimkit::VideoClip clip = stimkit::load_clip(root / it->second->path);
        stimkit::VideoClip trimmed = [&] {
            try {
                return stimkit::trim_clip(clip, seg.start, seg.end);
            } catch (const std::exception& e) {
                throw std::runtime_error("clip '" + seg.clip_id + "': " + e.what());
            }
        }();
        const std::string rel =
            std::string(stimkit::class_name(trimmed.label())) + "/" + trimmed.clip_id();
        stimkit::save_clip(out_root / rel, trimmed);
        stimkit::ManifestEntry e;
        e.clip_id = trimmed.clip_id();
        e.path = rel;
        e.label = trimmed.label();
        e.frame_count = trimmed.frame_count();
        e.fps = trimmed.fps();
        e.width = trimmed.width();
        e.height = trimmed.height();
        e.provenance = stimkit::Provenance{
            seg.clip_id, "trim:" + std::to_string(seg.start) + "-" + std::to_string(seg.end)};
        out_manifest.entries.push_back(std::move(e));
    }
    stimkit::save_manifest(out_root / "manifest.json", out_manifest);
    print_json(json{{"segments", segments.size()},
                    {"clips_written", out_manifest.entries.size()},
                    {"manifest", (out_root / "manifest.json").string()}});
    return 0;
}

int run_mask(const MaskOpts& o) {
    const fs::path manifest_path = o.manifest;
    const fs::path out_root =
        o.out.empty() ? fs::path(manifest_path.parent_path().string() + "_masked")
                      : fs::path(o.out);
    ensure_output_dir(out_root, o.force);

    stimkit::MaskingConfig config;
    const auto [h, w] = parse_size(o.size);
    config.target_height = h;
    config.target_width = w;
    try {
        config.on_no_detection = stimkit::no_detection_policy_from_name(o.policy);
    } catch (const std::exception& e) {
        throw UsageError(e.what());
    }

    const stimkit::Manifest manifest = stimkit::load_manifest(manifest_path);
    std::optional<fs::path> detections;
    if (!o.detections.empty()) detections = fs::path(o.detections);

    const stimkit::MaskRunReport report = stimkit::mask_dataset(
        manifest, manifest_path.parent_path(), detections, out_root, config, o.jobs);

    stimkit::save_manifest(out_root / "manifest.json", report.manifest);
    write_json_file(out_root / "mask_report.json", stimkit::mask_run_report_to_json(report));
    print_json(json{{"clips_in", manifest.entries.size()},
                    {"clips_out", report.manifest.entries.size()},
                    {"errors", report.errors.size()},
                    {"manifest", (out_root / "manifest.json").string()}});
    for (const stimkit::MaskError& e : report.errors)
        std::cerr << "error: clip '" << e.clip_id << "': " << e.message << "\n";
    return report.errors.empty() ? 0 : 1;
}

int run_augment(const AugmentOpts& o) {
    const fs::path manifest_path = o.manifest;
    const fs::path out_root =
        o.out.empty() ? fs::path(manifest_path.parent_path().string() + "_augmented")
                      : fs::path(o.out);
    ensure_output_dir(out_root, o.force);

    stimkit::AugmentParams params;
    params.alpha = o.alpha;
    params.theta_degrees = o.theta;
    params.beta = o.beta;
    std::vector<stimkit::Transform> transforms;
    try {
        params.validate();
        if (o.all || o.transforms.empty()) {
            transforms.assign(std::begin(stimkit::kAllTransforms),
                              std::end(stimkit::kAllTransforms));
        } else {
            for (const std::string& name : o.transforms)
                transforms.push_back(stimkit::transform_from_name(name));
        }
    } catch (const std::exception& e) {
        throw UsageError(e.what());
    }

    const stimkit::Manifest manifest = stimkit::load_manifest(manifest_path);
    const stimkit::ExpandReport report = stimkit::expand_dataset(
        manifest, manifest_path.parent_path(), out_root, params, transforms, o.jobs);

    stimkit::save_manifest(out_root / "manifest.json", report.manifest);
    print_json(json{{"clips_in", report.clips_in},
                    {"clips_out", report.clips_out},
                    {"errors", report.errors.size()},
                    {"per_class", per_class_counts(report.manifest.entries)},
                    {"manifest", (out_root / "manifest.json").string()}});
    for (const stimkit::ExpandError& e : report.errors)
        std::cerr << "error: clip '" << e.clip_id << "': " << e.message << "\n";
    return report.errors.empty() ? 0 : 1;
}

int run_split(const SplitOpts& o) {
    const fs::path manifest_path = o.manifest;
    const fs::path out = o.out.empty() ? manifest_path.parent_path() / "split.json"
                                       : fs::path(o.out);
    stimkit::SplitRatios ratios;
    try {
        ratios = stimkit::SplitRatios::parse(o.ratios);
    } catch (const std::exception& e) {
        throw UsageError(e.what());
    }

    const stimkit::Manifest manifest = stimkit::load_manifest(manifest_path);
    const stimkit::Manifest assigned = stimkit::split_manifest(manifest, ratios, o.seed, o.force);
    stimkit::save_manifest(
        out, rebase_manifest(assigned, manifest_path.parent_path(), out.parent_path()));

    json summary;
    summary["seed"] = o.seed;
    summary["manifest"] = out.string();
    for (stimkit::SplitSet s : {stimkit::SplitSet::Train, stimkit::SplitSet::Val,
                                stimkit::SplitSet::Test}) {
        const auto subset = stimkit::split_subset(assigned, s);
        summary[std::string(stimkit::split_set_name(s))] =
            json{{"total", subset.size()}, {"per_class", per_class_counts(subset)}};
    }
    print_json(summary);
    return 0;
}

void print_stats_table(const stimkit::StatsTable& table) {
    const auto row = [](const std::string& name, const stimkit::ClassStats& s) {
        std::ostringstream os;
        os << std::left << std::setw(14) << name << std::right << std::setw(6) << s.clip_count
           << std::setw(8) << s.min_frame_count << std::setw(8) << s.max_frame_count
           << std::setw(10) << std::fixed << std::setprecision(1) << s.avg_frame_count
           << std::setw(12)
           << (std::to_string(s.min_width) + "x" + std::to_string(s.min_height))
           << std::setw(12)
           << (std::to_string(s.max_width) + "x" + std::to_string(s.max_height))
           << std::setw(12) << std::setprecision(2) << s.avg_duration_sec;
        return os.str();
    };
    std::cout << std::left << std::setw(14) << "class" << std::right << std::setw(6) << "clips"
              << std::setw(8) << "minfrm" << std::setw(8) << "maxfrm" << std::setw(10) << "avgfrm"
              << std::setw(12) << "minsize" << std::setw(12) << "maxsize" << std::setw(12)
              << "avgdur(s)" << "\n";
    for (stimkit::ClassLabel label : stimkit::kAllClasses) {
        const auto& s =
            table.per_class[static_cast<std::size_t>(stimkit::class_index(label))];
        if (s)
            std::cout << row(std::string(stimkit::class_name(label)), *s) << "\n";
        else
            std::cout << std::left << std::setw(14) << stimkit::class_name(label) << " (no clips)\n";
    }
    if (table.overall) std::cout << row("overall", *table.overall) << "\n";
}

int run_stats(const StatsOpts& o) {
    const stimkit::Manifest manifest = stimkit::load_manifest(o.manifest);
    const stimkit::StatsTable table = stimkit::compute_stats(manifest);
    const json j = stimkit::stats_to_json(table);
    if (!o.out.empty()) write_json_file(o.out, j);
    if (o.as_json)
        print_json(j);
    else
        print_stats_table(table);
    return 0;
}

void print_eval_table(const stimkit::EvalReport& r) {
    std::cout << "samples " << r.total << "  accuracy " << std::fixed << std::setprecision(4)
              << r.accuracy;
    if (r.cross_entropy) std::cout << "  cross_entropy " << *r.cross_entropy;
    std::cout << "\n\n"
              << std::left << std::setw(14) << "class" << std::right << std::setw(9) << "support"
              << std::setw(11) << "precision" << std::setw(9) << "recall" << std::setw(9) << "f1"
              << "\n";
    const auto cell = [](double value, bool defined) {
        if (!defined) return std::string("-");
        std::ostringstream os;
        os << std::fixed << std::setprecision(4) << value;
        return os.str();
    };
    for (stimkit::ClassLabel label : stimkit::kAllClasses) {
        const auto& cm = r.per_class[static_cast<std::size_t>(stimkit::class_index(label))];
        std::cout << std::left << std::setw(14) << stimkit::class_name(label) << std::right
                  << std::setw(9) << cm.support << std::setw(11)
                  << cell(cm.precision, cm.precision_defined) << std::setw(9)
                  << cell(cm.recall, cm.recall_defined) << std::setw(9)
                  << cell(cm.f1, cm.f1_defined) << "\n";
    }
    std::cout << "\nconfusion (rows = true class)\n";
    for (std::size_t t = 0; t < stimkit::kNumClasses; ++t) {
        std::cout << std::left << std::setw(14)
                  << stimkit::class_name(stimkit::kAllClasses[t]) << std::right;
        for (std::size_t p = 0; p < stimkit::kNumClasses; ++p)
            std::cout << std::setw(7) << r.confusion[t][p];
        std::cout << "\n";
    }
}

int run_eval(const EvalOpts& o) {
    const auto preds = stimkit::parse_predictions_csv(stimkit::read_file_text(o.predictions));
    const stimkit::EvalReport report = stimkit::evaluate(preds);
    const json j = stimkit::eval_report_to_json(report);
    if (!o.out.empty()) write_json_file(o.out, j);
    if (o.as_json)
        print_json(j);
    else
        print_eval_table(report);
    return 0;
}

int run_tubemask(const TubemaskOpts& o) {
    if (std::isnan(o.rho))
        throw UsageError("--rho is required; there is no default masking ratio");
    const auto [h, w] = parse_size(o.size);
    stimkit::TubeMask mask = [&] {
        try {
            const stimkit::TokenGrid grid = stimkit::make_token_grid(o.frames, h, w);
            return stimkit::generate_tube_mask(grid, o.rho, o.seed);
        } catch (const std::exception& e) {
            throw UsageError(e.what());
        }
    }();
    const json j = stimkit::tube_mask_to_json(mask, o.rho, o.seed);
    if (!o.out.empty()) write_json_file(o.out, j);
    print_json(j);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"batch toolkit for gesture video clip datasets"};
    app.set_version_flag("--version", "stimkit 1.0.0");
    app.require_subcommand(1);

    int rc = 0;
    const auto add_config = [](CLI::App* cmd, std::string& slot) {
        cmd->add_option("--config", slot,
                        "flat key=value file mirroring this subcommand's flag names; "
                        "flags given on the command line win");
    };

    ScanOpts scan;
    auto* scan_cmd = app.add_subcommand("scan", "index a dataset tree into a manifest");
    scan_cmd->add_option("root,--root", scan.root,
                         "dataset root with <ClassName>/<clip>/ directories")
        ->required();
    scan_cmd->add_option("--out", scan.out, "manifest path (default: <root>/manifest.json)");
    add_config(scan_cmd, scan.config);
    scan_cmd->callback([&] {
        if (!scan.config.empty()) {
            const auto cfg = load_config_file(scan.config);
            merge_option(scan_cmd, cfg, "--out", "out", scan.out);
        }
        rc = run_scan(scan);
    });

    TrimOpts trim;
    auto* trim_cmd = app.add_subcommand("trim", "cut listed frame ranges into new clips");
    trim_cmd->add_option("root,--root", trim.root, "dataset root to read clips from")->required();
    trim_cmd->add_option("--segments", trim.segments, "file of 'clip_id start end' lines")
        ->required();
    trim_cmd->add_option("--out", trim.out, "output dataset root (default: <root>_trimmed)");
    trim_cmd->add_flag("--force", trim.force, "write into a non-empty output directory");
    add_config(trim_cmd, trim.config);
    trim_cmd->callback([&] {
        if (!trim.config.empty()) {
            const auto cfg = load_config_file(trim.config);
            merge_option(trim_cmd, cfg, "--segments", "segments", trim.segments);
            merge_option(trim_cmd, cfg, "--out", "out", trim.out);
            merge_option(trim_cmd, cfg, "--force", "force", trim.force);
        }
        rc = run_trim(trim);
    });

    MaskOpts mask;
    auto* mask_cmd = app.add_subcommand("mask", "mask clips to their largest detection box");
    mask_cmd->add_option("manifest,--manifest", mask.manifest, "input manifest")->required();
    mask_cmd->add_option("--detections", mask.detections,
                         "directory of <clip_id>.jsonl detection files");
    mask_cmd->add_option("--out", mask.out,
                         "output dataset root (default: <manifest dir>_masked)");
    mask_cmd->add_option("--size", mask.size, "output frame size as HxW")->capture_default_str();
    mask_cmd
        ->add_option("--policy", mask.policy, "what to do with frames lacking detections")
        ->capture_default_str()
        ->check(CLI::IsMember({"passthrough", "blackout", "skip_frame"}));
    mask_cmd->add_option("--jobs", mask.jobs, "worker threads (0 = all cores)");
    mask_cmd->add_flag("--force", mask.force, "write into a non-empty output directory");
    add_config(mask_cmd, mask.config);
    mask_cmd->callback([&] {
        if (!mask.config.empty()) {
            const auto cfg = load_config_file(mask.config);
            merge_option(mask_cmd, cfg, "--detections", "detections", mask.detections);
            merge_option(mask_cmd, cfg, "--out", "out", mask.out);
            merge_option(mask_cmd, cfg, "--size", "size", mask.size);
            merge_option(mask_cmd, cfg, "--policy", "policy", mask.policy);
            merge_option(mask_cmd, cfg, "--jobs", "jobs", mask.jobs);
            merge_option(mask_cmd, cfg, "--force", "force", mask.force);
        }
        rc = run_mask(mask);
    });

    AugmentOpts augment;
    auto* augment_cmd =
        app.add_subcommand("augment", "expand clips by flips, upsampling, rotation, color "
                                      "inversion, and temporal downsampling");
    augment_cmd->add_option("manifest,--manifest", augment.manifest, "input manifest")
        ->required();
    augment_cmd->add_option("--out", augment.out,
                            "output dataset root (default: <manifest dir>_augmented)");
    augment_cmd->add_flag("--all", augment.all,
                          "apply the original plus all six transforms (the default set)");
    augment_cmd
        ->add_option("--transform", augment.transforms,
                     "apply only the named transforms (original, hflip, vflip, upsample, "
                     "rotate, invert, downsample); repeatable")
        ->excludes("--all");
    augment_cmd->add_option("--alpha", augment.alpha, "spatial upsample factor")
        ->capture_default_str();
    augment_cmd->add_option("--theta", augment.theta,
                            "rotation angle in degrees (fixed-angle 'random rotate')")
        ->capture_default_str();
    augment_cmd->add_option("--beta", augment.beta, "temporal downsample stride")
        ->capture_default_str();
    augment_cmd->add_option("--jobs", augment.jobs, "worker threads (0 = all cores)");
    augment_cmd->add_flag("--force", augment.force, "write into a non-empty output directory");
    add_config(augment_cmd, augment.config);
    augment_cmd->callback([&] {
        if (!augment.config.empty()) {
            const auto cfg = load_config_file(augment.config);
            merge_option(augment_cmd, cfg, "--out", "out", augment.out);
            merge_option(augment_cmd, cfg, "--alpha", "alpha", augment.alpha);
            merge_option(augment_cmd, cfg, "--theta", "theta", augment.theta);
            merge_option(augment_cmd, cfg, "--beta", "beta", augment.beta);
            merge_option(augment_cmd, cfg, "--jobs", "jobs", augment.jobs);
            merge_option(augment_cmd, cfg, "--force", "force", augment.force);
            std::string transform_csv;
            merge_option(augment_cmd, cfg, "--transform", "transform", transform_csv);
            if (!transform_csv.empty() && augment.transforms.empty() && !augment.all) {
                std::istringstream ss(transform_csv);
                std::string name;
                while (std::getline(ss, name, ',')) augment.transforms.push_back(name);
            }
        }
        rc = run_augment(augment);
    });

    SplitOpts split;
    auto* split_cmd = app.add_subcommand("split", "stratified train/val/test assignment");
    split_cmd->add_option("manifest,--manifest", split.manifest, "input manifest")->required();
    split_cmd->add_option("--out", split.out,
                          "annotated manifest path (default: <manifest dir>/split.json)");
    split_cmd->add_option("--ratios", split.ratios, "train:val:test proportions")
        ->capture_default_str();
    split_cmd->add_option("--seed", split.seed, "shuffle seed")->capture_default_str();
    split_cmd->add_flag("--force", split.force, "reassign entries that already carry a split");
    add_config(split_cmd, split.config);
    split_cmd->callback([&] {
        if (!split.config.empty()) {
            const auto cfg = load_config_file(split.config);
            merge_option(split_cmd, cfg, "--out", "out", split.out);
            merge_option(split_cmd, cfg, "--ratios", "ratios", split.ratios);
            merge_option(split_cmd, cfg, "--seed", "seed", split.seed);
            merge_option(split_cmd, cfg, "--force", "force", split.force);
        }
        rc = run_split(split);
    });

    StatsOpts stats;
    auto* stats_cmd = app.add_subcommand("stats", "per-class dataset statistics");
    stats_cmd->add_option("manifest,--manifest", stats.manifest, "input manifest")->required();
    stats_cmd->add_option("--out", stats.out, "also write the JSON report here");
    stats_cmd->add_flag("--json", stats.as_json, "print JSON instead of the table");
    add_config(stats_cmd, stats.config);
    stats_cmd->callback([&] {
        if (!stats.config.empty()) {
            const auto cfg = load_config_file(stats.config);
            merge_option(stats_cmd, cfg, "--out", "out", stats.out);
            merge_option(stats_cmd, cfg, "--json", "json", stats.as_json);
        }
        rc = run_stats(stats);
    });

    EvalOpts eval;
    auto* eval_cmd = app.add_subcommand("eval", "classification metrics from a predictions CSV");
    eval_cmd
        ->add_option("predictions,--predictions", eval.predictions,
                     "CSV of clip_id,true_label,pred_label[,p0,p1,p2] with a header line")
        ->required();
    eval_cmd->add_option("--out", eval.out, "also write the JSON report here");
    eval_cmd->add_flag("--json", eval.as_json, "print JSON instead of the table");
    add_config(eval_cmd, eval.config);
    eval_cmd->callback([&] {
        if (!eval.config.empty()) {
            const auto cfg = load_config_file(eval.config);
            merge_option(eval_cmd, cfg, "--out", "out", eval.out);
            merge_option(eval_cmd, cfg, "--json", "json", eval.as_json);
        }
        rc = run_eval(eval);
    });

    TubemaskOpts tubemask;
    auto* tubemask_cmd =
        app.add_subcommand("tubemask", "deterministic tube mask for a clip shape");
    tubemask_cmd->add_option("--frames", tubemask.frames, "frame count")->capture_default_str();
    tubemask_cmd->add_option("--size", tubemask.size, "frame size as HxW")
        ->capture_default_str();
    tubemask_cmd->add_option("--rho", tubemask.rho, "masking ratio in [0, 1); required");
    tubemask_cmd->add_option("--seed", tubemask.seed, "mask seed")->capture_default_str();
    tubemask_cmd->add_option("--out", tubemask.out, "also write the JSON mask here");
    add_config(tubemask_cmd, tubemask.config);
    tubemask_cmd->callback([&] {
        if (!tubemask.config.empty()) {
            const auto cfg = load_config_file(tubemask.config);
            merge_option(tubemask_cmd, cfg, "--frames", "frames", tubemask.frames);
            merge_option(tubemask_cmd, cfg, "--size", "size", tubemask.size);
            merge_option(tubemask_cmd, cfg, "--rho", "rho", tubemask.rho);
            merge_option(tubemask_cmd, cfg, "--seed", "seed", tubemask.seed);
            merge_option(tubemask_cmd, cfg, "--out", "out", tubemask.out);
        }
        rc = run_tubemask(tubemask);
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return rc;
}
