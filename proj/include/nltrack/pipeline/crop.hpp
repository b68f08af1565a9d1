#pragma once

#include "nltrack/core/image.hpp"
#include "nltrack/pipeline/box.hpp"

namespace nltrack::pipeline {

// Context factors: square crop side = factor * sqrt(box area), clamped to the
// frame. The template keeps a tight view of the target; the search region
// leaves room for motion between frames.
inline constexpr double kTemplateContext = 2.0;
inline constexpr double kSearchContext = 4.0;

// A square axis-aligned window over a frame, in frame-normalized units, plus
// the resolution it was (or will be) resampled to. Fully describes the affine
// map between frame and crop coordinates.
struct CropParams {
    double cx = 0.5;
    double cy = 0.5;
    double side = 1.0;
    int out_size = 0;
};

CropParams centered_crop(const Box& box, double context_factor, int out_size);

// Affine coordinate transfer; exact inverses of each other.
Box map_box_to_crop(const Box& frame_box, const CropParams& p);
Box map_box_to_frame(const Box& crop_box, const CropParams& p);

struct Crop {
    Image image;
    CropParams params;
};

// Bilinear resample of the window to out_size x out_size. Samples falling
// outside the frame read as zero rather than clamping to the border, so the
// padded band carries no fabricated texture.
Image resample_crop(const Image& frame, const CropParams& p);

Crop crop_template(const Image& frame, const Box& box, double context_factor,
                   int out_size);
Crop crop_search(const Image& frame, const Box& box, double context_factor,
                 int out_size);

}  // namespace nltrack::pipeline
