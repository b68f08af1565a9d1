#pragma once

#include <cstddef>
#include <vector>

namespace nltrack {

// Channel-major float32 raster (planes laid out [c][h][w]), values in [0,1].
// Matches the dataset blob layout, so frames can be memcpy'd in and out.
struct Image {
    int c = 0;
    int h = 0;
    int w = 0;
    std::vector<float> px;

    Image() = default;
    Image(int c_, int h_, int w_)
        : c(c_), h(h_), w(w_), px(static_cast<std::size_t>(c_) * h_ * w_, 0.0f) {}

    float& at(int ch, int y, int x) {
        return px[(static_cast<std::size_t>(ch) * h + y) * w + x];
    }
    float at(int ch, int y, int x) const {
        return px[(static_cast<std::size_t>(ch) * h + y) * w + x];
    }
};

inline bool bit_equal(const Image& a, const Image& b) {
    if (a.c != b.c || a.h != b.h || a.w != b.w) return false;
    for (std::size_t i = 0; i < a.px.size(); ++i)
        if (a.px[i] != b.px[i]) return false;
    return true;
}

}  // namespace nltrack
