#include "curvwomb/curves.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <unordered_map>

namespace curvwomb {

Segment::Segment(const Vec2& a, const Vec2& b) : start(a), stop(b), length((b - a).norm()) {
    if (length > 0.0) {
        u = (b - a) / length;
        u_perp = Vec2(u[1], -u[0]);
    }
}

std::string_view to_string(CurveKind k) {
    switch (k) {
    case CurveKind::Polyline: return "polyline";
    case CurveKind::Bezier: return "bezier";
    case CurveKind::LevelSet: return "level";
    }
    return "polyline";
}

CurveKind curve_kind_from_string(std::string_view s) {
    if (s == "polyline") return CurveKind::Polyline;
    if (s == "bezier") return CurveKind::Bezier;
    if (s == "level" || s == "levelset") return CurveKind::LevelSet;
    throw ConfigError("unknown curve kind '" + std::string(s) + "'");
}

std::string_view to_string(Orientation o) {
    switch (o) {
    case Orientation::AsGiven: return "as_given";
    case Orientation::Clockwise: return "clockwise";
    case Orientation::CounterClockwise: return "counterclockwise";
    }
    return "as_given";
}

Orientation orientation_from_string(std::string_view s) {
    if (s == "as_given") return Orientation::AsGiven;
    if (s == "clockwise" || s == "cw") return Orientation::Clockwise;
    if (s == "counterclockwise" || s == "ccw") return Orientation::CounterClockwise;
    throw ConfigError("unknown orientation '" + std::string(s) + "'");
}

double Polyline::length() const {
    double len = 0.0;
    for (std::size_t i = 1; i < points.size(); ++i) len += (points[i] - points[i - 1]).norm();
    return len;
}

namespace {

// Edge identifiers: horizontal edge (i,j)-(i+1,j) and vertical edge (i,j)-(i,j+1).
std::int64_t edge_key(bool vertical, Eigen::Index i, Eigen::Index j, Eigen::Index nx) {
    return 2 * (static_cast<std::int64_t>(j) * (nx + 1) + i) + (vertical ? 1 : 0);
}

// Pairs of cell edges (0 bottom, 1 right, 2 top, 3 left) crossed per case.
// Saddle cases 5 and 10 are handled separately.
constexpr int kTable[16][2] = {{-1, -1}, {3, 0}, {0, 1}, {3, 1}, {1, 2}, {-1, -1}, {0, 2}, {3, 2},
                               {2, 3},   {0, 2}, {-1, -1}, {1, 2}, {1, 3}, {0, 1}, {3, 0}, {-1, -1}};

}  // namespace

std::vector<Polyline> trace_level_set(const ScalarGrid& field, double level) {
    const Eigen::Index nx = field.xs.size(), ny = field.ys.size();
    if (field.values.rows() != ny || field.values.cols() != nx)
        throw LengthMismatch("grid values do not match the axis lengths");

    std::unordered_map<std::int64_t, Vec2> edge_point;
    std::vector<std::pair<std::int64_t, std::int64_t>> segs;
    const auto& v = field.values;

    auto interp = [&](Eigen::Index i0, Eigen::Index j0, Eigen::Index i1, Eigen::Index j1) {
        const double a = v(j0, i0), b = v(j1, i1);
        const double t = (b == a) ? 0.5 : (level - a) / (b - a);
        const Vec2 p0(field.xs[i0], field.ys[j0]), p1(field.xs[i1], field.ys[j1]);
        return Vec2(p0 + t * (p1 - p0));
    };

    for (Eigen::Index j = 0; j + 1 < ny; ++j) {
        for (Eigen::Index i = 0; i + 1 < nx; ++i) {
            const double c0 = v(j, i), c1 = v(j, i + 1), c2 = v(j + 1, i + 1), c3 = v(j + 1, i);
            if (std::isnan(c0) || std::isnan(c1) || std::isnan(c2) || std::isnan(c3)) continue;
            const int idx = (c0 >= level ? 1 : 0) | (c1 >= level ? 2 : 0) | (c2 >= level ? 4 : 0) | (c3 >= level ? 8 : 0);
            if (idx == 0 || idx == 15) continue;

            const std::int64_t keys[4] = {edge_key(false, i, j, nx), edge_key(true, i + 1, j, nx),
                                          edge_key(false, i, j + 1, nx), edge_key(true, i, j, nx)};
            auto point_of = [&](int e) {
                const std::int64_t k = keys[e];
                if (!edge_point.count(k)) {
                    switch (e) {
                    case 0: edge_point[k] = interp(i, j, i + 1, j); break;
                    case 1: edge_point[k] = interp(i + 1, j, i + 1, j + 1); break;
                    case 2: edge_point[k] = interp(i, j + 1, i + 1, j + 1); break;
                    default: edge_point[k] = interp(i, j, i, j + 1); break;
                    }
                }
                return k;
            };
            auto add = [&](int a, int b) { segs.emplace_back(point_of(a), point_of(b)); };

            if (idx == 5 || idx == 10) {
                const bool center_above = 0.25 * (c0 + c1 + c2 + c3) >= level;
                const bool corner0_above = idx == 5;
                if (center_above == corner0_above) {
                    // c0 and c2 regions joined through the centre when idx == 5.
                    add(0, 1);
                    add(2, 3);
                } else {
                    add(3, 0);
                    add(1, 2);
                }
            } else {
                add(kTable[idx][0], kTable[idx][1]);
            }
        }
    }

    std::unordered_map<std::int64_t, std::vector<std::size_t>> incident;
    for (std::size_t s = 0; s < segs.size(); ++s) {
        incident[segs[s].first].push_back(s);
        incident[segs[s].second].push_back(s);
    }
    std::vector<bool> used(segs.size(), false);
    std::vector<Polyline> out;

    auto walk = [&](std::size_t first, std::int64_t from) {
        Polyline pl;
        pl.points.push_back(edge_point[from]);
        std::int64_t cur = from;
        std::size_t s = first;
        const std::int64_t origin = from;
        while (true) {
            used[s] = true;
            const std::int64_t next = segs[s].first == cur ? segs[s].second : segs[s].first;
            pl.points.push_back(edge_point[next]);
            cur = next;
            if (cur == origin) {
                pl.closed = true;
                break;
            }
            std::size_t nxt = segs.size();
            for (std::size_t cand : incident[cur])
                if (!used[cand]) {
                    nxt = cand;
                    break;
                }
            if (nxt == segs.size()) break;
            s = nxt;
        }
        return pl;
    };

    // Open chains start at edge points with a single incident segment.
    for (std::size_t s = 0; s < segs.size(); ++s) {
        if (used[s]) continue;
        for (std::int64_t end : {segs[s].first, segs[s].second}) {
            if (incident[end].size() == 1 && !used[s]) out.push_back(walk(s, end));
        }
    }
    for (std::size_t s = 0; s < segs.size(); ++s)
        if (!used[s]) out.push_back(walk(s, segs[s].first));

    std::stable_sort(out.begin(), out.end(), [](const Polyline& a, const Polyline& b) { return a.length() > b.length(); });
    return out;
}

std::vector<Vec2> bezier_points(const std::vector<Vec2>& controls, int resolution) {
    if (controls.size() < 2) throw EmptyCurve("a Bezier curve needs at least two control points");
    if (resolution < 1) throw ConfigError("Bezier resolution must be positive");
    std::vector<Vec2> out;
    out.reserve(resolution + 1);
    std::vector<Vec2> work(controls.size());
    for (int k = 0; k <= resolution; ++k) {
        const double t = static_cast<double>(k) / resolution;
        std::copy(controls.begin(), controls.end(), work.begin());
        for (std::size_t r = controls.size() - 1; r > 0; --r)
            for (std::size_t i = 0; i < r; ++i) work[i] = (1.0 - t) * work[i] + t * work[i + 1];
        out.push_back(work[0]);
    }
    out.front() = controls.front();
    out.back() = controls.back();
    return out;
}

double signed_area(const std::vector<Vec2>& ring) {
    double a = 0.0;
    const std::size_t n = ring.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2& p = ring[i];
        const Vec2& q = ring[(i + 1) % n];
        a += p[0] * q[1] - q[0] * p[1];
    }
    return 0.5 * a;
}

Partition partition_polyline(const std::vector<Vec2>& input, bool closed, double max_norm) {
    if (!(max_norm > 0.0)) throw ConfigError("max_norm must be positive");
    if (input.size() < 2) throw EmptyCurve("a curve needs at least two points");
    std::vector<Vec2> pts;
    for (const Vec2& p : input) {
        if (!p.allFinite()) throw ConfigError("curve points must be finite");
        if (pts.empty() || (p - pts.back()).norm() >= 1e-12) pts.push_back(p);
    }
    if (closed && (pts.back() - pts.front()).norm() >= 1e-12) pts.push_back(pts.front());
    if (closed && pts.size() > 1) pts.back() = pts.front();
    if (pts.size() < 2) throw DegenerateCurve("all curve points coincide");

    Partition part;
    part.closed = closed;
    for (std::size_t e = 0; e + 1 < pts.size(); ++e) {
        const Vec2 a = pts[e], b = pts[e + 1];
        const double len = (b - a).norm();
        const auto pieces = static_cast<int>(std::max(1.0, std::ceil(len / max_norm - 1e-12)));
        Vec2 prev = a;
        for (int k = 1; k <= pieces; ++k) {
            const Vec2 next = (k == pieces) ? b : Vec2(a + (static_cast<double>(k) / pieces) * (b - a));
            Segment seg(prev, next);
            if (seg.length >= 1e-12) part.segments.push_back(seg);
            prev = next;
        }
    }
    if (part.segments.empty()) throw DegenerateCurve("curve has zero length");
    for (const Segment& s : part.segments) {
        part.norm = std::max(part.norm, s.length);
        part.total_length += s.length;
    }
    return part;
}

namespace {

bool point_in_ring(const std::vector<Vec2>& ring, const Vec2& p) {
    bool inside = false;
    const std::size_t n = ring.size();
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        const Vec2& a = ring[i];
        const Vec2& b = ring[j];
        if (((a[1] > p[1]) != (b[1] > p[1])) && (p[0] < (b[0] - a[0]) * (p[1] - a[1]) / (b[1] - a[1]) + a[0]))
            inside = !inside;
    }
    return inside;
}

double distance_to_polyline(const std::vector<Vec2>& pts, const Vec2& p) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        const Vec2 d = pts[i + 1] - pts[i];
        const double l2 = d.squaredNorm();
        const double t = l2 > 0.0 ? std::clamp((p - pts[i]).dot(d) / l2, 0.0, 1.0) : 0.0;
        best = std::min(best, (pts[i] + t * d - p).norm());
    }
    return best;
}

}  // namespace

Partition realize(const Curve& curve, double max_norm, const ScalarGrid* field) {
    std::vector<Vec2> pts;
    bool closed = curve.closed;
    switch (curve.kind) {
    case CurveKind::Polyline:
        pts = curve.points;
        break;
    case CurveKind::Bezier:
        pts = bezier_points(curve.points, curve.resolution);
        break;
    case CurveKind::LevelSet: {
        if (field == nullptr) throw ConfigError("a level curve needs a gridded field");
        const auto comps = trace_level_set(*field, curve.level);
        if (comps.empty()) throw EmptyCurve("level " + std::to_string(curve.level) + " is not crossed by the field");
        const Polyline* chosen = &comps.front();
        if (curve.select) {
            const Polyline* enclosing = nullptr;
            const Polyline* nearest = nullptr;
            double best = std::numeric_limits<double>::infinity();
            for (const Polyline& c : comps) {
                if (c.closed && !enclosing && point_in_ring(c.points, *curve.select)) enclosing = &c;
                const double d = distance_to_polyline(c.points, *curve.select);
                if (d < best) {
                    best = d;
                    nearest = &c;
                }
            }
            chosen = enclosing ? enclosing : nearest;
        }
        pts = chosen->points;
        closed = chosen->closed;
        break;
    }
    }
    if (pts.size() < 2) throw EmptyCurve("a curve needs at least two points");

    if (closed && curve.orientation != Orientation::AsGiven) {
        const double area = signed_area(pts);
        const bool ccw = area > 0.0;
        if ((curve.orientation == Orientation::Clockwise && ccw) ||
            (curve.orientation == Orientation::CounterClockwise && !ccw))
            std::reverse(pts.begin(), pts.end());
    }
    return partition_polyline(pts, closed, max_norm);
}

double arc_length(const Partition& p) {
    double len = 0.0;
    for (const Segment& s : p.segments) len += s.length;
    return len;
}

void mask_outside_convex_hull(ScalarGrid& field, const Mat& locations) {
    std::vector<Vec2> pts;
    for (Eigen::Index i = 0; i < locations.rows(); ++i) pts.emplace_back(locations(i, 0), locations(i, 1));
    std::sort(pts.begin(), pts.end(), [](const Vec2& a, const Vec2& b) { return a[0] < b[0] || (a[0] == b[0] && a[1] < b[1]); });
    if (pts.size() < 3) {
        field.values.setConstant(std::numeric_limits<double>::quiet_NaN());
        return;
    }
    auto cross = [](const Vec2& o, const Vec2& a, const Vec2& b) {
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
    };
    std::vector<Vec2> hull(2 * pts.size());
    std::size_t k = 0;
    for (const Vec2& p : pts) {
        while (k >= 2 && cross(hull[k - 2], hull[k - 1], p) <= 0) --k;
        hull[k++] = p;
    }
    for (std::size_t i = pts.size() - 1, t = k + 1; i > 0; --i) {
        while (k >= t && cross(hull[k - 2], hull[k - 1], pts[i - 1]) <= 0) --k;
        hull[k++] = pts[i - 1];
    }
    hull.resize(k - 1);  // counterclockwise, no repeated point

    for (Eigen::Index j = 0; j < field.ys.size(); ++j)
        for (Eigen::Index i = 0; i < field.xs.size(); ++i) {
            const Vec2 p(field.xs[i], field.ys[j]);
            bool inside = true;
            for (std::size_t e = 0; e < hull.size() && inside; ++e)
                if (cross(hull[e], hull[(e + 1) % hull.size()], p) < -1e-12) inside = false;
            if (!inside) field.values(j, i) = std::numeric_limits<double>::quiet_NaN();
        }
}

}  // namespace curvwomb
