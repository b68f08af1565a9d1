#include "nltrack/pipeline/box.hpp"

#include <algorithm>
#include <cmath>

#include "nltrack/common.hpp"

namespace nltrack::pipeline {

bool box_valid(const Box& b) {
    for (double v : b)
        if (!std::isfinite(v)) return false;
    return b[2] > b[0] && b[3] > b[1];
}

Box clamp_unit(const Box& b) {
    auto cl = [](double v) { return std::min(1.0, std::max(0.0, v)); };
    return {cl(b[0]), cl(b[1]), cl(b[2]), cl(b[3])};
}

namespace {

void require_valid(const Box& b, const char* which) {
    if (!box_valid(b))
        fail(ErrorCode::degenerate_box,
             std::string(which) + " box has a non-positive side or non-finite coordinate");
}

double area(const Box& b) { return (b[2] - b[0]) * (b[3] - b[1]); }

double intersection(const Box& a, const Box& b) {
    double w = std::min(a[2], b[2]) - std::max(a[0], b[0]);
    double h = std::min(a[3], b[3]) - std::max(a[1], b[1]);
    if (w <= 0.0 || h <= 0.0) return 0.0;
    return w * h;
}

}  // namespace

double iou(const Box& a, const Box& b) {
    require_valid(a, "first");
    require_valid(b, "second");
    double inter = intersection(a, b);
    return inter / (area(a) + area(b) - inter);
}

double giou(const Box& a, const Box& b) {
    require_valid(a, "first");
    require_valid(b, "second");
    double inter = intersection(a, b);
    double uni = area(a) + area(b) - inter;
    double cw = std::max(a[2], b[2]) - std::min(a[0], b[0]);
    double ch = std::max(a[3], b[3]) - std::min(a[1], b[1]);
    double hull = cw * ch;
    return inter / uni - (hull - uni) / hull;
}

namespace {

struct Sides {
    ag::Var x1, y1, x2, y2;
};

Sides split(ag::Var b) {
    return {ag::slice_cols(b, 0, 1), ag::slice_cols(b, 1, 2), ag::slice_cols(b, 2, 3),
            ag::slice_cols(b, 3, 4)};
}

}  // namespace

ag::Var giou_var(ag::Var a, ag::Var b) {
    if (a.rows() != 1 || a.cols() != 4 || b.rows() != 1 || b.cols() != 4)
        fail(ErrorCode::shape_error, "giou expects [1,4] coordinate rows");
    Sides p = split(a);
    Sides q = split(b);
    using namespace ag;
    Var iw = relu(sub(minimum(p.x2, q.x2), maximum(p.x1, q.x1)));
    Var ih = relu(sub(minimum(p.y2, q.y2), maximum(p.y1, q.y1)));
    Var inter = mul(iw, ih);
    Var area_a = mul(sub(p.x2, p.x1), sub(p.y2, p.y1));
    Var area_b = mul(sub(q.x2, q.x1), sub(q.y2, q.y1));
    Var uni = sub(add(area_a, area_b), inter);
    Var hull = mul(sub(maximum(p.x2, q.x2), minimum(p.x1, q.x1)),
                   sub(maximum(p.y2, q.y2), minimum(p.y1, q.y1)));
    return sub(divide(inter, uni), divide(sub(hull, uni), hull));
}

ag::Var box_loss(ag::Var raw, ag::Var clamped, ag::Var gt, double lambda_giou,
                 double lambda_l1) {
    using namespace ag;
    Var overlap = add_const(scale(giou_var(clamped, gt), -1.0), 1.0);
    Var l1 = mean_all(abs_val(sub(raw, gt)));
    return add(scale(overlap, lambda_giou), scale(l1, lambda_l1));
}

}  // namespace nltrack::pipeline
