#include "nltrack/cli/ppm.hpp"

#include <algorithm>
#include <cmath>
#include <cctype>
#include <fstream>

#include "nltrack/common.hpp"

namespace nltrack::cli {

namespace {

// PPM header scanner: whitespace separates tokens, '#' comments run to
// end of line.
struct Scanner {
    const std::string& data;
    std::size_t pos = 0;
    const std::string& path;

    void skip() {
        while (pos < data.size()) {
            if (std::isspace(static_cast<unsigned char>(data[pos]))) {
                ++pos;
            } else if (data[pos] == '#') {
                while (pos < data.size() && data[pos] != '\n') ++pos;
            } else {
                break;
            }
        }
    }

    int next_int() {
        skip();
        std::size_t start = pos;
        while (pos < data.size() && std::isdigit(static_cast<unsigned char>(data[pos]))) ++pos;
        if (pos == start)
            fail(ErrorCode::parse_error, "malformed PPM header in '" + path + "'");
        return std::stoi(data.substr(start, pos - start));
    }
};

}  // namespace

Image read_ppm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::io_error, "cannot open image '" + path + "'");
    std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

    if (data.size() < 2 || data[0] != 'P' || data[1] != '6')
        fail(ErrorCode::parse_error, "'" + path + "' is not a binary PPM (P6) file");
    Scanner sc{data, 2, path};
    const int w = sc.next_int();
    const int h = sc.next_int();
    const int maxval = sc.next_int();
    if (w <= 0 || h <= 0) fail(ErrorCode::parse_error, "'" + path + "' has empty dimensions");
    if (maxval != 255)
        fail(ErrorCode::parse_error, "'" + path + "' uses maxval " + std::to_string(maxval) +
                                         "; only 255 is supported");
    ++sc.pos;  // exactly one whitespace byte separates header and raster
    const std::size_t need = static_cast<std::size_t>(w) * h * 3;
    if (sc.pos + need > data.size())
        fail(ErrorCode::parse_error, "'" + path + "' raster is truncated");

    Image img(3, h, w);
    const unsigned char* raster = reinterpret_cast<const unsigned char*>(data.data()) + sc.pos;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            for (int ch = 0; ch < 3; ++ch)
                img.at(ch, y, x) = static_cast<float>(raster[(y * w + x) * 3 + ch]) / 255.0f;
    return img;
}

void write_ppm(const std::string& path, const Image& img) {
    if (img.c != 3) fail(ErrorCode::shape_error, "PPM output needs a 3-channel image");
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorCode::io_error, "cannot write image '" + path + "'");
    out << "P6\n" << img.w << " " << img.h << "\n255\n";
    std::string raster(static_cast<std::size_t>(img.w) * img.h * 3, '\0');
    for (int y = 0; y < img.h; ++y)
        for (int x = 0; x < img.w; ++x)
            for (int ch = 0; ch < 3; ++ch) {
                const float v = std::clamp(img.at(ch, y, x), 0.0f, 1.0f);
                raster[(static_cast<std::size_t>(y) * img.w + x) * 3 + ch] =
                    static_cast<char>(std::lround(v * 255.0f));
            }
    out.write(raster.data(), static_cast<std::streamsize>(raster.size()));
    if (!out) fail(ErrorCode::io_error, "short write to image '" + path + "'");
}

void draw_box(Image& img, const pipeline::Box& box, float r, float g, float b) {
    auto to_px = [](double v, int n) {
        return std::clamp(static_cast<int>(std::lround(v * n)), 0, n - 1);
    };
    int x1 = to_px(box[0], img.w), x2 = to_px(box[2], img.w);
    int y1 = to_px(box[1], img.h), y2 = to_px(box[3], img.h);
    if (x2 < x1) std::swap(x1, x2);
    if (y2 < y1) std::swap(y1, y2);
    auto put = [&](int y, int x) {
        img.at(0, y, x) = r;
        img.at(1, y, x) = g;
        img.at(2, y, x) = b;
    };
    for (int x = x1; x <= x2; ++x) {
        put(y1, x);
        put(y2, x);
    }
    for (int y = y1; y <= y2; ++y) {
        put(y, x1);
        put(y, x2);
    }
}

}  // namespace nltrack::cli
