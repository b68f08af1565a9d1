#include "nltrack/pipeline/crop.hpp"

#include <algorithm>
#include <cmath>

#include "nltrack/common.hpp"

namespace nltrack::pipeline {

CropParams centered_crop(const Box& box, double context_factor, int out_size) {
    if (!box_valid(box))
        fail(ErrorCode::degenerate_box, "cannot crop around a degenerate box");
    if (context_factor <= 0.0 || out_size <= 0)
        fail(ErrorCode::config_invalid, "crop needs a positive context factor and size");
    double w = box[2] - box[0];
    double h = box[3] - box[1];
    CropParams p;
    p.cx = 0.5 * (box[0] + box[2]);
    p.cy = 0.5 * (box[1] + box[3]);
    p.side = std::min(1.0, context_factor * std::sqrt(w * h));
    p.out_size = out_size;
    return p;
}

Box map_box_to_crop(const Box& frame_box, const CropParams& p) {
    double x0 = p.cx - 0.5 * p.side;
    double y0 = p.cy - 0.5 * p.side;
    return {(frame_box[0] - x0) / p.side, (frame_box[1] - y0) / p.side,
            (frame_box[2] - x0) / p.side, (frame_box[3] - y0) / p.side};
}

Box map_box_to_frame(const Box& crop_box, const CropParams& p) {
    double x0 = p.cx - 0.5 * p.side;
    double y0 = p.cy - 0.5 * p.side;
    return {x0 + crop_box[0] * p.side, y0 + crop_box[1] * p.side,
            x0 + crop_box[2] * p.side, y0 + crop_box[3] * p.side};
}

Image resample_crop(const Image& frame, const CropParams& p) {
    if (p.out_size <= 0 || p.side <= 0.0)
        fail(ErrorCode::config_invalid, "crop parameters must be resolved before resampling");
    const int n = p.out_size;
    Image out(frame.c, n, n);
    double x0 = p.cx - 0.5 * p.side;
    double y0 = p.cy - 0.5 * p.side;
    auto tap = [&](int ch, int y, int x) -> double {
        if (x < 0 || y < 0 || x >= frame.w || y >= frame.h) return 0.0;
        return frame.at(ch, y, x);
    };
    for (int i = 0; i < n; ++i) {
        double fy = (y0 + (i + 0.5) / n * p.side) * frame.h - 0.5;
        int iy = static_cast<int>(std::floor(fy));
        double wy = fy - iy;
        for (int j = 0; j < n; ++j) {
            double fx = (x0 + (j + 0.5) / n * p.side) * frame.w - 0.5;
            int ix = static_cast<int>(std::floor(fx));
            double wx = fx - ix;
            for (int ch = 0; ch < frame.c; ++ch) {
                double v = (1.0 - wy) * ((1.0 - wx) * tap(ch, iy, ix) +
                                         wx * tap(ch, iy, ix + 1)) +
                           wy * ((1.0 - wx) * tap(ch, iy + 1, ix) +
                                 wx * tap(ch, iy + 1, ix + 1));
                out.at(ch, i, j) = static_cast<float>(v);
            }
        }
    }
    return out;
}

Crop crop_template(const Image& frame, const Box& box, double context_factor,
                   int out_size) {
    CropParams p = centered_crop(box, context_factor, out_size);
    return {resample_crop(frame, p), p};
}

Crop crop_search(const Image& frame, const Box& box, double context_factor,
                 int out_size) {
    CropParams p = centered_crop(box, context_factor, out_size);
    return {resample_crop(frame, p), p};
}

}  // namespace nltrack::pipeline
