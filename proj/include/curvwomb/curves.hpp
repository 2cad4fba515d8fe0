#pragma once

// Wombling curves and their rectilinear partitions.

#include "curvwomb/types.hpp"

#include <optional>
#include <string_view>
#include <vector>

namespace curvwomb {

/// One straight piece of a partition. The normal is the tangent rotated by
/// -90 degrees, u_perp = (u2, -u1), so a clockwise closed curve has inward
/// normals and a counterclockwise one outward normals.
struct Segment {
    Vec2 start{Vec2::Zero()};
    Vec2 stop{Vec2::Zero()};
    double length{0.0};
    Vec2 u{Vec2::UnitX()};
    Vec2 u_perp{Vec2(0.0, -1.0)};

    Segment() = default;
    Segment(const Vec2& a, const Vec2& b);

    [[nodiscard]] Vec2 point(double t) const { return start + t * u; }
};

struct Partition {
    std::vector<Segment> segments;
    double norm{0.0};          // max segment length
    double total_length{0.0};
    bool closed{false};
};

/// Regular grid of a scalar field; values(j, i) sits at (xs[i], ys[j]). NaN
/// marks cells excluded from contouring.
struct ScalarGrid {
    Vec xs;
    Vec ys;
    Mat values;
};

enum class CurveKind { Polyline, Bezier, LevelSet };
enum class Orientation { AsGiven, Clockwise, CounterClockwise };

[[nodiscard]] std::string_view to_string(CurveKind k);
[[nodiscard]] CurveKind curve_kind_from_string(std::string_view s);
[[nodiscard]] std::string_view to_string(Orientation o);
[[nodiscard]] Orientation orientation_from_string(std::string_view s);

struct Curve {
    CurveKind kind{CurveKind::Polyline};
    std::vector<Vec2> points;  // polyline vertices or Bezier control points
    int resolution{200};       // Bezier parameter steps
    bool closed{false};
    double level{0.0};         // LevelSet only
    std::optional<Vec2> select;  // LevelSet: pick the component enclosing / nearest this point
    Orientation orientation{Orientation::AsGiven};
};

struct Polyline {
    std::vector<Vec2> points;
    bool closed{false};

    [[nodiscard]] double length() const;
};

/// Marching squares with linear interpolation; saddles resolved by the cell
/// centre average. Components are returned longest first; closed components
/// repeat their first point at the end.
[[nodiscard]] std::vector<Polyline> trace_level_set(const ScalarGrid& field, double level);

/// de Casteljau evaluation at resolution + 1 equally spaced parameters.
[[nodiscard]] std::vector<Vec2> bezier_points(const std::vector<Vec2>& controls, int resolution);

/// Shoelace signed area (positive for counterclockwise).
[[nodiscard]] double signed_area(const std::vector<Vec2>& ring);

/// Splits every edge into equal pieces no longer than max_norm. Zero-length
/// edges are dropped.
[[nodiscard]] Partition partition_polyline(const std::vector<Vec2>& points, bool closed, double max_norm);

/// Realizes a curve document; LevelSet curves need `field`.
[[nodiscard]] Partition realize(const Curve& curve, double max_norm, const ScalarGrid* field = nullptr);

[[nodiscard]] double arc_length(const Partition& p);

/// Sets to NaN every grid value outside the convex hull of `locations`.
void mask_outside_convex_hull(ScalarGrid& field, const Mat& locations);

}  // namespace curvwomb
