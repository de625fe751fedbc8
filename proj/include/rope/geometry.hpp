#pragma once

#include <algorithm>
#include <array>
#include <cmath>

namespace rope {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double k) const { return {x * k, y * k}; }
    double dot(const Vec2& o) const { return x * o.x + y * o.y; }
    double cross(const Vec2& o) const { return x * o.y - y * o.x; }
    double norm() const { return std::hypot(x, y); }
};

inline double distance(const Vec2& a, const Vec2& b) { return (a - b).norm(); }

// Axis-aligned rectangle.
struct Rect {
    double xmin = 0.0, ymin = 0.0, xmax = 0.0, ymax = 0.0;

    bool contains(const Vec2& p) const {
        return p.x >= xmin && p.x <= xmax && p.y >= ymin && p.y <= ymax;
    }
};

inline int orientation_sign(const Vec2& a, const Vec2& b, const Vec2& c) {
    double v = (b - a).cross(c - a);
    if (v > 0.0) return 1;
    if (v < 0.0) return -1;
    return 0;
}

inline bool on_segment(const Vec2& a, const Vec2& b, const Vec2& p) {
    return std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) &&
           std::min(a.y, b.y) <= p.y && p.y <= std::max(a.y, b.y);
}

inline bool segments_intersect(const Vec2& p1, const Vec2& p2, const Vec2& q1,
                               const Vec2& q2) {
    int o1 = orientation_sign(p1, p2, q1);
    int o2 = orientation_sign(p1, p2, q2);
    int o3 = orientation_sign(q1, q2, p1);
    int o4 = orientation_sign(q1, q2, p2);
    if (o1 != o2 && o3 != o4) return true;
    if (o1 == 0 && on_segment(p1, p2, q1)) return true;
    if (o2 == 0 && on_segment(p1, p2, q2)) return true;
    if (o3 == 0 && on_segment(q1, q2, p1)) return true;
    if (o4 == 0 && on_segment(q1, q2, p2)) return true;
    return false;
}

inline bool segment_intersects_rect(const Vec2& a, const Vec2& b, const Rect& r) {
    if (r.contains(a) || r.contains(b)) return true;
    Vec2 c1{r.xmin, r.ymin}, c2{r.xmax, r.ymin}, c3{r.xmax, r.ymax}, c4{r.xmin, r.ymax};
    return segments_intersect(a, b, c1, c2) || segments_intersect(a, b, c2, c3) ||
           segments_intersect(a, b, c3, c4) || segments_intersect(a, b, c4, c1);
}

// Oriented rectangle given by center, unit axis, half-length, half-width.
// Intersection test works in the rectangle's local frame.
inline bool segment_intersects_obb(const Vec2& a, const Vec2& b, const Vec2& center,
                                   const Vec2& axis, double half_len, double half_wid) {
    Vec2 u = axis;
    double n = u.norm();
    if (n == 0.0) u = {1.0, 0.0};
    else u = u * (1.0 / n);
    Vec2 v{-u.y, u.x};
    Vec2 ra = a - center;
    Vec2 rb = b - center;
    Vec2 la{ra.dot(u), ra.dot(v)};
    Vec2 lb{rb.dot(u), rb.dot(v)};
    Rect local{-half_len, -half_wid, half_len, half_wid};
    return segment_intersects_rect(la, lb, local);
}

inline Vec2 closest_point_on_segment(const Vec2& a, const Vec2& b, const Vec2& p) {
    Vec2 ab = b - a;
    double len2 = ab.dot(ab);
    if (len2 == 0.0) return a;
    double t = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
    return a + ab * t;
}

}  // namespace rope
