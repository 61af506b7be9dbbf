#pragma once

#include <algorithm>
#include <array>
#include <string_view>

namespace tableforge {

enum class CellKlass { content, empty };

inline std::string_view to_string(CellKlass k) {
    return k == CellKlass::content ? "content" : "empty";
}

/// Axis-aligned rectangle in pixel coordinates, origin top-left.
/// Valid boxes satisfy x0 < x1 and y0 < y1.
struct CellBox {
    double x0 = 0.0;
    double y0 = 0.0;
    double x1 = 0.0;
    double y1 = 0.0;
    CellKlass klass = CellKlass::content;

    double width() const { return x1 - x0; }
    double height() const { return y1 - y0; }
    double area() const { return width() * height(); }
    double cx() const { return 0.5 * (x0 + x1); }
    double cy() const { return 0.5 * (y0 + y1); }

    bool valid() const { return x0 < x1 && y0 < y1; }

    std::array<double, 4> coords() const { return {x0, y0, x1, y1}; }

    friend bool operator==(const CellBox& a, const CellBox& b) {
        return a.x0 == b.x0 && a.y0 == b.y0 && a.x1 == b.x1 && a.y1 == b.y1 &&
               a.klass == b.klass;
    }
};

inline double intersection_area(const CellBox& a, const CellBox& b) {
    const double w = std::min(a.x1, b.x1) - std::max(a.x0, b.x0);
    const double h = std::min(a.y1, b.y1) - std::max(a.y0, b.y0);
    if (w <= 0.0 || h <= 0.0) return 0.0;
    return w * h;
}

inline double union_area(const CellBox& a, const CellBox& b) {
    return a.area() + b.area() - intersection_area(a, b);
}

/// Intersection over union. 0 for disjoint boxes, 1 for identical ones.
inline double iou(const CellBox& a, const CellBox& b) {
    const double inter = intersection_area(a, b);
    if (inter <= 0.0) return 0.0;
    return inter / (a.area() + b.area() - inter);
}

/// Intersection divided by the area of `pdf`. Containment-biased score:
/// 1 whenever the PDF cell lies fully inside the prediction.
inline double modified_iou(const CellBox& pred, const CellBox& pdf) {
    const double inter = intersection_area(pred, pdf);
    if (inter <= 0.0) return 0.0;
    return inter / pdf.area();
}

/// Smallest axis-aligned box enclosing both inputs.
inline CellBox enclosing_box(const CellBox& a, const CellBox& b) {
    return CellBox{std::min(a.x0, b.x0), std::min(a.y0, b.y0),
                   std::max(a.x1, b.x1), std::max(a.y1, b.y1), a.klass};
}

/// Overlap length of the 1-D intervals [a0, a1] and [b0, b1].
inline double interval_overlap(double a0, double a1, double b0, double b1) {
    return std::max(0.0, std::min(a1, b1) - std::max(a0, b0));
}

/// Gap between two 1-D intervals; 0 when they touch or overlap.
inline double interval_gap(double a0, double a1, double b0, double b1) {
    if (b0 > a1) return b0 - a1;
    if (a0 > b1) return a0 - b1;
    return 0.0;
}

} // namespace tableforge
