#pragma once

#include <string>

#include "nltrack/core/image.hpp"
#include "nltrack/pipeline/box.hpp"

namespace nltrack::cli {

// Binary P6, maxval 255. Bytes map to floats in [0,1] (v = byte / 255), the
// same range the renderer and the model use.
Image read_ppm(const std::string& path);
void write_ppm(const std::string& path, const Image& img);  // 3-channel only

// Burns a 1 px rectangle outline (normalized coordinates) into the image.
void draw_box(Image& img, const pipeline::Box& box, float r, float g, float b);

}  // namespace nltrack::cli
