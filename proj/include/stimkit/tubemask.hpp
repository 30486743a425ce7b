#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "stimkit/random.hpp"

namespace stimkit {

/// Tokenisation geometry: how many frames and pixels collapse into one token.
struct PatchSpec {
    int temporal_patch = 2;
    int spatial_patch_h = 16;
    int spatial_patch_w = 16;
    int embed_dim = 768;

    void validate() const {
        if (temporal_patch < 1 || spatial_patch_h < 1 || spatial_patch_w < 1 || embed_dim < 1)
            throw std::invalid_argument("PatchSpec: all components must be >= 1");
    }

    bool operator==(const PatchSpec&) const = default;
};

/// Token lattice of a clip after patch embedding: t = frames / temporal_patch,
/// h = height / patch_h, w = width / patch_w.
struct TokenGrid {
    int t = 0;
    int h = 0;
    int w = 0;

    int spatial_count() const noexcept { return h * w; }
    long long token_count() const noexcept {
        return static_cast<long long>(t) * h * w;
    }

    bool operator==(const TokenGrid&) const = default;
};

inline TokenGrid make_token_grid(int frames, int height, int width,
                                 const PatchSpec& spec = {}) {
    spec.validate();
    if (frames % spec.temporal_patch != 0)
        throw std::invalid_argument("token grid: frame count " + std::to_string(frames) +
                                    " is not divisible by the temporal patch " +
                                    std::to_string(spec.temporal_patch));
    if (height % spec.spatial_patch_h != 0)
        throw std::invalid_argument("token grid: height " + std::to_string(height) +
                                    " is not divisible by the patch height " +
                                    std::to_string(spec.spatial_patch_h));
    if (width % spec.spatial_patch_w != 0)
        throw std::invalid_argument("token grid: width " + std::to_string(width) +
                                    " is not divisible by the patch width " +
                                    std::to_string(spec.spatial_patch_w));
    if (frames < 1 || height < 1 || width < 1)
        throw std::invalid_argument("token grid: clip dimensions must be >= 1");
    return TokenGrid{frames / spec.temporal_patch, height / spec.spatial_patch_h,
                     width / spec.spatial_patch_w};
}

/// Number of masked positions per time slice for a masking ratio rho,
/// rounded half up.
inline int masked_spatial_count(const TokenGrid& grid, double rho) {
    if (!(rho >= 0.0 && rho < 1.0))
        throw std::invalid_argument("masking ratio must lie in [0, 1)");
    return static_cast<int>(std::floor(rho * grid.spatial_count() + 0.5));
}

/// A tube mask: one spatial mask pattern repeated across every time slice.
/// Token index order is t-major, `index = (t * h + i) * w + j`.
class TubeMask {
public:
    TubeMask(TokenGrid grid, std::vector<std::uint8_t> spatial)
        : grid_(grid), spatial_(std::move(spatial)) {
        if (grid_.t < 1 || grid_.h < 1 || grid_.w < 1)
            throw std::invalid_argument("TubeMask: grid dimensions must be >= 1");
        if (spatial_.size() != static_cast<std::size_t>(grid_.spatial_count()))
            throw std::invalid_argument("TubeMask: pattern size must equal h*w");
        for (std::uint8_t v : spatial_)
            if (v != 0 && v != 1)
                throw std::invalid_argument("TubeMask: pattern values must be 0 or 1");
    }

    const TokenGrid& grid() const noexcept { return grid_; }
    const std::vector<std::uint8_t>& spatial_pattern() const noexcept { return spatial_; }

    bool is_masked_spatial(int i, int j) const {
        if (i < 0 || i >= grid_.h || j < 0 || j >= grid_.w)
            throw std::out_of_range("TubeMask: spatial index out of range");
        return spatial_[static_cast<std::size_t>(i) * grid_.w + j] != 0;
    }

    bool is_masked_token(long long index) const {
        if (index < 0 || index >= grid_.token_count())
            throw std::out_of_range("TubeMask: token index out of range");
        return spatial_[static_cast<std::size_t>(index % grid_.spatial_count())] != 0;
    }

    int masked_spatial() const noexcept {
        int n = 0;
        for (std::uint8_t v : spatial_) n += v;
        return n;
    }
    long long masked_tokens() const noexcept {
        return static_cast<long long>(masked_spatial()) * grid_.t;
    }
    long long visible_tokens() const noexcept {
        return grid_.token_count() - masked_tokens();
    }

    /// Token indices the mask keeps, ascending.
    std::vector<long long> visible_positions() const {
        std::vector<long long> pos;
        pos.reserve(static_cast<std::size_t>(visible_tokens()));
        for (long long idx = 0; idx < grid_.token_count(); ++idx)
            if (!is_masked_token(idx)) pos.push_back(idx);
        return pos;
    }

    std::vector<long long> masked_positions() const {
        std::vector<long long> pos;
        pos.reserve(static_cast<std::size_t>(masked_tokens()));
        for (long long idx = 0; idx < grid_.token_count(); ++idx)
            if (is_masked_token(idx)) pos.push_back(idx);
        return pos;
    }

    bool operator==(const TubeMask&) const = default;

private:
    TokenGrid grid_;
    std::vector<std::uint8_t> spatial_;
};

/// Draw a spatial pattern with exactly masked_spatial_count(grid, rho) ones,
/// uniformly at random via a partial Fisher-Yates pass, and repeat it over
/// all time slices. Same grid, rho and seed always give the same mask.
inline TubeMask generate_tube_mask(const TokenGrid& grid, double rho, std::uint64_t seed) {
    const int s = grid.spatial_count();
    const int m = masked_spatial_count(grid, rho);
    std::vector<int> order(static_cast<std::size_t>(s));
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(seed);
    for (int i = 0; i < m; ++i) {
        const auto j = i + static_cast<int>(bounded_rand(rng, static_cast<std::uint64_t>(s - i)));
        std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(j)]);
    }
    std::vector<std::uint8_t> spatial(static_cast<std::size_t>(s), 0);
    for (int i = 0; i < m; ++i) spatial[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])] = 1;
    return TubeMask(grid, std::move(spatial));
}

struct VisibleSelection {
    std::vector<double> tokens;        // visible token vectors, packed
    std::vector<long long> positions;  // original token index of each packed vector
};

/// Pack the visible token vectors out of a flat (token_count x dim) array,
/// keeping canonical t-major order and remembering where each came from.
inline VisibleSelection select_visible(const std::vector<double>& tokens, int dim,
                                       const TubeMask& mask) {
    if (dim < 1) throw std::invalid_argument("select_visible: dim must be >= 1");
    const long long n = mask.grid().token_count();
    if (tokens.size() != static_cast<std::size_t>(n) * static_cast<std::size_t>(dim))
        throw std::invalid_argument("select_visible: token array size must be token_count*dim");
    VisibleSelection sel;
    sel.positions = mask.visible_positions();
    sel.tokens.reserve(sel.positions.size() * static_cast<std::size_t>(dim));
    for (long long idx : sel.positions) {
        const auto off = static_cast<std::size_t>(idx) * static_cast<std::size_t>(dim);
        sel.tokens.insert(sel.tokens.end(), tokens.begin() + static_cast<std::ptrdiff_t>(off),
                          tokens.begin() + static_cast<std::ptrdiff_t>(off + dim));
    }
    return sel;
}

/// Inverse of select_visible: spread packed vectors back to their original
/// positions; every other slot takes fill_value.
inline std::vector<double> scatter_visible(const VisibleSelection& sel, int dim,
                                           const TubeMask& mask, double fill_value = 0.0) {
    if (dim < 1) throw std::invalid_argument("scatter_visible: dim must be >= 1");
    if (sel.tokens.size() != sel.positions.size() * static_cast<std::size_t>(dim))
        throw std::invalid_argument("scatter_visible: packed size must be positions*dim");
    const long long n = mask.grid().token_count();
    std::vector<double> out(static_cast<std::size_t>(n) * static_cast<std::size_t>(dim), fill_value);
    for (std::size_t k = 0; k < sel.positions.size(); ++k) {
        const long long idx = sel.positions[k];
        if (idx < 0 || idx >= n)
            throw std::invalid_argument("scatter_visible: position out of range");
        std::copy(sel.tokens.begin() + static_cast<std::ptrdiff_t>(k * dim),
                  sel.tokens.begin() + static_cast<std::ptrdiff_t>((k + 1) * dim),
                  out.begin() + static_cast<std::ptrdiff_t>(static_cast<std::size_t>(idx) * dim));
    }
    return out;
}

struct MaskedMseResult {
    double value = 0.0;
    bool empty_mask = false;  // true when no positions were averaged (loss forced to 0)
};

/// Mean squared error between two flat (token_count x dim) arrays, averaged
/// over masked positions only unless all_positions is set. When the mask
/// holds no masked tokens there is nothing to average; the result is 0 with
/// empty_mask set instead of an error.
inline MaskedMseResult masked_mse(const std::vector<double>& pred,
                                  const std::vector<double>& target, int dim,
                                  const TubeMask& mask, bool all_positions = false) {
    if (dim < 1) throw std::invalid_argument("masked_mse: dim must be >= 1");
    const long long n = mask.grid().token_count();
    const auto expected = static_cast<std::size_t>(n) * static_cast<std::size_t>(dim);
    if (pred.size() != expected || target.size() != expected)
        throw std::invalid_argument("masked_mse: arrays must both be token_count*dim");
    if (!all_positions && mask.masked_tokens() == 0) return {0.0, true};
    double sum = 0.0;
    long long counted = 0;
    for (long long idx = 0; idx < n; ++idx) {
        if (!all_positions && !mask.is_masked_token(idx)) continue;
        const auto off = static_cast<std::size_t>(idx) * static_cast<std::size_t>(dim);
        for (int c = 0; c < dim; ++c) {
            const double d = pred[off + static_cast<std::size_t>(c)] -
                             target[off + static_cast<std::size_t>(c)];
            sum += d * d;
        }
        ++counted;
    }
    return {sum / (static_cast<double>(counted) * dim), false};
}

inline nlohmann::json tube_mask_to_json(const TubeMask& mask, double rho, std::uint64_t seed) {
    std::string pattern;
    pattern.reserve(mask.spatial_pattern().size());
    for (std::uint8_t v : mask.spatial_pattern()) pattern.push_back(v ? '1' : '0');
    return nlohmann::json{{"grid", {{"t", mask.grid().t}, {"h", mask.grid().h}, {"w", mask.grid().w}}},
                          {"rho", rho},
                          {"seed", seed},
                          {"total_tokens", mask.grid().token_count()},
                          {"masked_spatial", mask.masked_spatial()},
                          {"masked_tokens", mask.masked_tokens()},
                          {"visible_tokens", mask.visible_tokens()},
                          {"spatial_pattern", std::move(pattern)}};
}

inline TubeMask tube_mask_from_json(const nlohmann::json& j) {
    const TokenGrid grid{j.at("grid").at("t").get<int>(), j.at("grid").at("h").get<int>(),
                         j.at("grid").at("w").get<int>()};
    const std::string pattern = j.at("spatial_pattern").get<std::string>();
    std::vector<std::uint8_t> spatial;
    spatial.reserve(pattern.size());
    for (char c : pattern) {
        if (c != '0' && c != '1')
            throw std::runtime_error("tube mask: spatial_pattern must contain only 0 and 1");
        spatial.push_back(c == '1' ? 1 : 0);
    }
    return TubeMask(grid, std::move(spatial));
}

}  // namespace stimkit
