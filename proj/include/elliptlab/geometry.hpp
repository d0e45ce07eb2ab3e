// Polar-aligned triangulations of the unit disc, P1 fields, discrete balls,
// quadrature and averaged norms.
#ifndef ELLIPTLAB_GEOMETRY_HPP
#define ELLIPTLAB_GEOMETRY_HPP

#include "elliptlab/core.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <vector>

namespace elliptlab {

// ---------------------------------------------------------------------------
// Quadrature on reference triangles (barycentric points, weights sum to 1).

struct QuadRule {
    std::vector<std::array<double, 3>> bary;
    std::vector<double> weights;
};

// degree 2: edge-midpoint rule; degree 4: 6-point Dunavant rule.
inline const QuadRule& quad_rule(int degree) {
    static const QuadRule mid{
        {{0.5, 0.5, 0.0}, {0.0, 0.5, 0.5}, {0.5, 0.0, 0.5}},
        {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0}};
    static const QuadRule dunavant6 = [] {
        QuadRule q;
        const double a1 = 0.445948490915965, w1 = 0.223381589678011;
        const double a2 = 0.091576213509771, w2 = 0.109951743655322;
        for (int i = 0; i < 3; ++i) {
            std::array<double, 3> b1{a1, a1, a1}, b2{a2, a2, a2};
            b1[i] = 1.0 - 2.0 * a1;
            b2[i] = 1.0 - 2.0 * a2;
            q.bary.push_back(b1);
            q.weights.push_back(w1);
            q.bary.push_back(b2);
            q.weights.push_back(w2);
        }
        return q;
    }();
    return degree <= 2 ? mid : dunavant6;
}

// ---------------------------------------------------------------------------
// Mesh

class Mesh {
public:
    struct Tri {
        std::array<int, 3> v;
    };

    const std::vector<Vec2>& nodes() const { return nodes_; }
    const std::vector<Tri>& triangles() const { return tris_; }
    const std::vector<int>& boundary_nodes() const { return boundary_; }
    bool is_boundary(int n) const { return boundary_flag_[std::size_t(n)]; }

    int ring_count() const { return rings_; }
    int sector_count() const { return sectors_; }
    double grading_exponent() const { return grading_; }
    bool structured() const { return rings_ > 0; }

    int node_count() const { return int(nodes_.size()); }
    int triangle_count() const { return int(tris_.size()); }

    double area(int t) const { return area_[std::size_t(t)]; }
    double total_area() const { return total_area_; }
    Vec2 centroid(int t) const {
        const auto& v = tris_[std::size_t(t)].v;
        return (nodes_[std::size_t(v[0])] + nodes_[std::size_t(v[1])] + nodes_[std::size_t(v[2])]) / 3.0;
    }
    Vec2 vertex(int t, int k) const { return nodes_[std::size_t(tris_[std::size_t(t)].v[std::size_t(k)])]; }
    Vec2 quad_point(int t, const std::array<double, 3>& b) const {
        return b[0] * vertex(t, 0) + b[1] * vertex(t, 1) + b[2] * vertex(t, 2);
    }

    // Index of the structured node on ring i >= 1, sector j (mod sectors).
    int node_id(int ring, int sector) const {
        if (ring == 0) return 0;
        const int j = ((sector % sectors_) + sectors_) % sectors_;
        return 1 + (ring - 1) * sectors_ + j;
    }

    // Triangle containing x, or -1. Exact up to a small barycentric tolerance.
    int locate(const Vec2& x) const {
        if (structured()) {
            const int t = locate_structured(x);
            if (t >= 0) return t;
        }
        return locate_scan(x);
    }

    // Barycentric coordinates of x in triangle t.
    std::array<double, 3> barycentric(int t, const Vec2& x) const {
        const Vec2 a = vertex(t, 0), b = vertex(t, 1), c = vertex(t, 2);
        const double det = cross2(b - a, c - a);
        const double l1 = cross2(x - a, c - a) / det;
        const double l2 = cross2(b - a, x - a) / det;
        return {1.0 - l1 - l2, l1, l2};
    }

    // --- text format -------------------------------------------------------
    // line 1 "nodes N", then N lines "x y boundary_flag";
    // line "triangles M", then M lines "i j k" (0-based).
    void write(std::ostream& os) const {
        os << "nodes " << node_count() << "\n";
        char buf[96];
        for (int i = 0; i < node_count(); ++i) {
            std::snprintf(buf, sizeof(buf), "%.17g %.17g %d\n", nodes_[std::size_t(i)].x(),
                          nodes_[std::size_t(i)].y(), is_boundary(i) ? 1 : 0);
            os << buf;
        }
        os << "triangles " << triangle_count() << "\n";
        for (const auto& t : tris_) os << t.v[0] << " " << t.v[1] << " " << t.v[2] << "\n";
    }

    static Mesh read(std::istream& is) {
        Mesh m;
        std::string kw;
        int n = 0;
        if (!(is >> kw >> n) || kw != "nodes") throw std::runtime_error("mesh read: expected 'nodes N'");
        m.nodes_.resize(std::size_t(n));
        m.boundary_flag_.assign(std::size_t(n), false);
        for (int i = 0; i < n; ++i) {
            int flag = 0;
            if (!(is >> m.nodes_[std::size_t(i)].x() >> m.nodes_[std::size_t(i)].y() >> flag))
                throw std::runtime_error("mesh read: bad node line");
            if (flag) {
                m.boundary_flag_[std::size_t(i)] = true;
                m.boundary_.push_back(i);
            }
        }
        int mt = 0;
        if (!(is >> kw >> mt) || kw != "triangles") throw std::runtime_error("mesh read: expected 'triangles M'");
        m.tris_.resize(std::size_t(mt));
        for (int t = 0; t < mt; ++t) {
            auto& v = m.tris_[std::size_t(t)].v;
            if (!(is >> v[0] >> v[1] >> v[2])) throw std::runtime_error("mesh read: bad triangle line");
        }
        m.finalize();
        return m;
    }

    friend Mesh build_disc_mesh(int, int, double);

private:
    void finalize() {
        area_.resize(tris_.size());
        total_area_ = 0.0;
        for (std::size_t t = 0; t < tris_.size(); ++t) {
            const Vec2 a = nodes_[std::size_t(tris_[t].v[0])];
            const Vec2 b = nodes_[std::size_t(tris_[t].v[1])];
            const Vec2 c = nodes_[std::size_t(tris_[t].v[2])];
            const double s = 0.5 * cross2(b - a, c - a);
            if (!(s > 0.0)) throw std::runtime_error("mesh: triangle " + std::to_string(t) +
                                                     " has non-positive signed area");
            area_[t] = s;
            total_area_ += s;
        }
    }

    int locate_structured(const Vec2& x) const {
        const double r = x.norm();
        if (r > radii_.back() + 1e-12) return -1;
        // ring band
        int ring = int(std::lower_bound(radii_.begin(), radii_.end(), r - 1e-14) - radii_.begin());
        ring = std::min(ring, rings_ - 1);
        double th = std::atan2(x.y(), x.x());
        if (th < 0) th += 2.0 * pi;
        int j = int(th / (2.0 * pi / sectors_));
        j = std::min(j, sectors_ - 1);
        for (int dr = 0; dr <= 1; ++dr) {
            const int ri = ring - dr;
            if (ri < 0 || ri >= rings_) continue;
            for (int dj = -1; dj <= 1; ++dj) {
                const int jj = ((j + dj) % sectors_ + sectors_) % sectors_;
                for (int t : cell_tris(ri, jj)) {
                    if (inside(t, x)) return t;
                }
            }
        }
        return -1;
    }

    std::vector<int> cell_tris(int ring, int j) const {
        if (ring == 0) return {j};
        const int base = sectors_ + (ring - 1) * 2 * sectors_;
        return {base + 2 * j, base + 2 * j + 1};
    }

    bool inside(int t, const Vec2& x) const {
        const auto b = barycentric(t, x);
        return b[0] >= -1e-12 && b[1] >= -1e-12 && b[2] >= -1e-12;
    }

    int locate_scan(const Vec2& x) const {
        for (int t = 0; t < triangle_count(); ++t)
            if (inside(t, x)) return t;
        return -1;
    }

    std::vector<Vec2> nodes_;
    std::vector<Tri> tris_;
    std::vector<int> boundary_;
    std::vector<bool> boundary_flag_;
    std::vector<double> area_;
    std::vector<double> radii_;  // ring radii, structured meshes only
    double total_area_ = 0.0;
    int rings_ = 0;
    int sectors_ = 0;
    double grading_ = 1.0;
};

// Structured polar triangulation: node at the origin, ring i at radius
// (i/ring_count)^grading, each ring split into sector_count sectors, each
// annulus quad split into two triangles. sector_count must be divisible by 8
// so that the cone lines {x2^2 = x1^2} are exact element edges; nodes are
// placed with octant symmetry so that diagonal nodes satisfy |x1| == |x2|
// bit-for-bit.
inline Mesh build_disc_mesh(int ring_count, int sector_count, double grading_exponent = 1.0) {
    if (ring_count < 1) throw std::invalid_argument("build_disc_mesh: ring_count must be >= 1");
    if (sector_count < 8 || sector_count % 8 != 0)
        throw std::invalid_argument(
            "build_disc_mesh: sector_count must be a positive multiple of 8 so that the "
            "cone lines x2^2 = x1^2 coincide with element edges");
    if (!(grading_exponent > 0.0))
        throw std::invalid_argument("build_disc_mesh: grading_exponent must be positive");

    const int S = sector_count, R = ring_count, S8 = S / 8;

    // Unit-circle points, folded through the first octant for exact symmetry.
    std::vector<Vec2> circle(static_cast<std::size_t>(S));
    std::vector<Vec2> oct(static_cast<std::size_t>(S8) + 1);
    for (int r = 0; r < S8; ++r) {
        const double th = 2.0 * pi * r / S;
        oct[std::size_t(r)] = {std::cos(th), std::sin(th)};
    }
    oct[std::size_t(S8)] = {std::sqrt(0.5), std::sqrt(0.5)};
    for (int j = 0; j < S; ++j) {
        const int o = j / S8, r = j % S8;
        const Vec2 p = oct[std::size_t(r)];
        const Vec2 q = oct[std::size_t(S8 - r)];
        switch (o) {
            case 0: circle[std::size_t(j)] = {p.x(), p.y()}; break;
            case 1: circle[std::size_t(j)] = {q.y(), q.x()}; break;
            case 2: circle[std::size_t(j)] = {-p.y(), p.x()}; break;
            case 3: circle[std::size_t(j)] = {-q.x(), q.y()}; break;
            case 4: circle[std::size_t(j)] = {-p.x(), -p.y()}; break;
            case 5: circle[std::size_t(j)] = {-q.y(), -q.x()}; break;
            case 6: circle[std::size_t(j)] = {p.y(), -p.x()}; break;
            default: circle[std::size_t(j)] = {q.x(), -q.y()}; break;
        }
    }

    Mesh m;
    m.rings_ = R;
    m.sectors_ = S;
    m.grading_ = grading_exponent;
    m.radii_.resize(std::size_t(R));
    for (int i = 1; i <= R; ++i)
        m.radii_[std::size_t(i - 1)] = std::pow(double(i) / double(R), grading_exponent);
    m.radii_.back() = 1.0;

    m.nodes_.reserve(std::size_t(1 + R * S));
    m.nodes_.push_back({0.0, 0.0});
    for (int i = 1; i <= R; ++i) {
        const double rad = m.radii_[std::size_t(i - 1)];
        for (int j = 0; j < S; ++j) m.nodes_.push_back(rad * circle[std::size_t(j)]);
    }
    m.boundary_flag_.assign(m.nodes_.size(), false);
    for (int j = 0; j < S; ++j) {
        const int id = m.node_id(R, j);
        m.boundary_flag_[std::size_t(id)] = true;
        m.boundary_.push_back(id);
    }

    // fan around the origin
    for (int j = 0; j < S; ++j)
        m.tris_.push_back({{0, m.node_id(1, j), m.node_id(1, j + 1)}});
    // annuli, two triangles per quad
    for (int i = 2; i <= R; ++i) {
        for (int j = 0; j < S; ++j) {
            const int a = m.node_id(i - 1, j), b = m.node_id(i, j);
            const int c = m.node_id(i, j + 1), d = m.node_id(i - 1, j + 1);
            m.tris_.push_back({{a, b, c}});
            m.tris_.push_back({{a, c, d}});
        }
    }
    m.finalize();
    return m;
}

// ---------------------------------------------------------------------------
// P1 nodal field

struct FeFunction {
    const Mesh* mesh = nullptr;
    std::vector<double> values;

    FeFunction() = default;
    FeFunction(const Mesh& m, std::vector<double> v) : mesh(&m), values(std::move(v)) {
        if (values.size() != std::size_t(m.node_count()))
            throw std::invalid_argument("FeFunction: values length must equal node count");
    }
    static FeFunction interpolate(const Mesh& m, const std::function<double(Vec2)>& f) {
        std::vector<double> v(std::size_t(m.node_count()));
        for (int i = 0; i < m.node_count(); ++i) v[std::size_t(i)] = f(m.nodes()[std::size_t(i)]);
        return FeFunction(m, std::move(v));
    }
    static FeFunction zero(const Mesh& m) {
        return FeFunction(m, std::vector<double>(std::size_t(m.node_count()), 0.0));
    }

    double value_in(int tri, const Vec2& x) const {
        const auto b = mesh->barycentric(tri, x);
        const auto& v = mesh->triangles()[std::size_t(tri)].v;
        return b[0] * values[std::size_t(v[0])] + b[1] * values[std::size_t(v[1])] +
               b[2] * values[std::size_t(v[2])];
    }

    double eval(const Vec2& x) const {
        const int t = mesh->locate(x);
        if (t < 0) throw std::domain_error("FeFunction::eval: point outside mesh");
        return value_in(t, x);
    }

    double max_value() const { return *std::max_element(values.begin(), values.end()); }
    double min_value() const { return *std::min_element(values.begin(), values.end()); }
};

// Constant gradient of the affine interpolant on one triangle. Written in
// difference form so equal nodal values give an exactly zero gradient.
inline Vec2 triangle_gradient(const Mesh& m, const std::vector<double>& values, int t) {
    const auto& v = m.triangles()[std::size_t(t)].v;
    const Vec2 a = m.vertex(t, 0);
    const Vec2 e1 = m.vertex(t, 1) - a, e2 = m.vertex(t, 2) - a;
    const double det = cross2(e1, e2);
    if (!(std::abs(det) > 1e-30))
        throw std::runtime_error("triangle_gradient: degenerate triangle " + std::to_string(t));
    const double d1 = values[std::size_t(v[1])] - values[std::size_t(v[0])];
    const double d2 = values[std::size_t(v[2])] - values[std::size_t(v[0])];
    return Vec2(e2.y() * d1 - e1.y() * d2, -e2.x() * d1 + e1.x() * d2) / det;
}

inline std::vector<Vec2> element_gradient(const FeFunction& u) {
    std::vector<Vec2> g(std::size_t(u.mesh->triangle_count()));
    for (int t = 0; t < u.mesh->triangle_count(); ++t) g[std::size_t(t)] = triangle_gradient(*u.mesh, u.values, t);
    return g;
}

// Gradients of the three barycentric coordinates on triangle t.
inline std::array<Vec2, 3> barycentric_gradients(const Mesh& m, int t) {
    const Vec2 a = m.vertex(t, 0), b = m.vertex(t, 1), c = m.vertex(t, 2);
    const double det = cross2(b - a, c - a);
    auto perp = [](const Vec2& v) { return Vec2(-v.y(), v.x()); };
    return {perp(c - b) / det, perp(a - c) / det, perp(b - a) / det};
}

// ---------------------------------------------------------------------------
// Discrete balls: all elements whose three vertices lie within the radius.
// Inner approximation, monotone in the radius by construction.

struct DiscreteBall {
    Vec2 center{0.0, 0.0};
    double radius = 0.0;
    std::vector<int> elements;

    bool empty() const { return elements.empty(); }
};

inline DiscreteBall discrete_ball(const Mesh& m, const Vec2& center, double radius) {
    if (!(radius > 0.0)) throw std::invalid_argument("discrete_ball: radius must be positive");
    DiscreteBall b;
    b.center = center;
    b.radius = radius;
    const double r2 = sqr(radius + 1e-12);
    for (int t = 0; t < m.triangle_count(); ++t) {
        bool in = true;
        for (int k = 0; k < 3 && in; ++k) in = (m.vertex(t, k) - center).squaredNorm() <= r2;
        if (in) b.elements.push_back(t);
    }
    return b;
}

inline double ball_measure(const Mesh& m, const DiscreteBall& b) {
    double a = 0.0;
    for (int t : b.elements) a += m.area(t);
    return a;
}

// Averaged norm |B|^{-1/kappa} ||f||_{L^kappa(B)} over a discrete ball.
// Element-wise quadrature; degree 2 by default, degree 4 for non-polynomial
// powers of P1 fields.
inline double averaged_norm(const FeFunction& u, const DiscreteBall& b, double kappa,
                            int quad_degree = 2) {
    if (b.empty()) throw std::invalid_argument("averaged_norm: empty discrete ball");
    if (!(kappa > 0.0)) throw std::invalid_argument("averaged_norm: kappa must be positive");
    const Mesh& m = *u.mesh;
    const QuadRule& q = quad_rule(quad_degree);
    double integral = 0.0, measure = 0.0;
    for (int t : b.elements) {
        const auto& v = m.triangles()[std::size_t(t)].v;
        double acc = 0.0;
        for (std::size_t k = 0; k < q.bary.size(); ++k) {
            const auto& bb = q.bary[k];
            const double val = bb[0] * u.values[std::size_t(v[0])] + bb[1] * u.values[std::size_t(v[1])] +
                               bb[2] * u.values[std::size_t(v[2])];
            acc += q.weights[k] * std::pow(std::abs(val), kappa);
        }
        integral += m.area(t) * acc;
        measure += m.area(t);
    }
    return std::pow(integral / measure, 1.0 / kappa);
}

// Same for a piecewise-constant element field.
inline double averaged_norm(const Mesh& m, const std::vector<double>& element_field,
                            const DiscreteBall& b, double kappa) {
    if (b.empty()) throw std::invalid_argument("averaged_norm: empty discrete ball");
    if (!(kappa > 0.0)) throw std::invalid_argument("averaged_norm: kappa must be positive");
    double integral = 0.0, measure = 0.0;
    for (int t : b.elements) {
        integral += m.area(t) * std::pow(std::abs(element_field[std::size_t(t)]), kappa);
        measure += m.area(t);
    }
    return std::pow(integral / measure, 1.0 / kappa);
}

// ---------------------------------------------------------------------------
// Exact circle intersections, used by the potential quadratures.

// |B_r(c) ∩ triangle|, exact (Green's theorem over clipped edges and arcs).
inline double circle_triangle_overlap(const Vec2& c, double r, Vec2 a, Vec2 b, Vec2 d) {
    a -= c;
    b -= c;
    d -= c;
    const double r2 = r * r;
    auto segment = [&](const Vec2& p, const Vec2& q) -> double {
        const Vec2 e = q - p;
        const double A = e.squaredNorm();
        double acc = 0.0;
        std::array<double, 4> ts{0.0, 1.0, 1.0, 1.0};
        int nt = 2;
        if (A > 0) {
            const double B = 2.0 * p.dot(e), C = p.squaredNorm() - r2;
            const double disc = B * B - 4.0 * A * C;
            if (disc > 0) {
                const double sd = std::sqrt(disc);
                for (double t : {(-B - sd) / (2 * A), (-B + sd) / (2 * A)})
                    if (t > 1e-14 && t < 1.0 - 1e-14) ts[std::size_t(nt++)] = t;
            }
        }
        std::sort(ts.begin(), ts.begin() + nt);
        for (int i = 0; i + 1 < nt; ++i) {
            const Vec2 u = p + ts[std::size_t(i)] * e, v = p + ts[std::size_t(i + 1)] * e;
            const Vec2 mid = 0.5 * (u + v);
            if (mid.squaredNorm() <= r2) {
                acc += 0.5 * cross2(u, v);
            } else {
                acc += 0.5 * r2 * std::atan2(cross2(u, v), u.dot(v));
            }
        }
        return acc;
    };
    const double s = segment(a, b) + segment(b, d) + segment(d, a);
    return std::max(0.0, s);
}

// |B_r1(x1) ∩ B_r2(x2)| with centers at distance d.
inline double disc_disc_overlap(double d, double r1, double r2) {
    if (d >= r1 + r2) return 0.0;
    if (d <= std::abs(r1 - r2)) return pi * sqr(std::min(r1, r2));
    const double a1 = std::acos(std::clamp((d * d + r1 * r1 - r2 * r2) / (2 * d * r1), -1.0, 1.0));
    const double a2 = std::acos(std::clamp((d * d + r2 * r2 - r1 * r1) / (2 * d * r2), -1.0, 1.0));
    const double k = 0.5 * std::sqrt(std::max(0.0, (-d + r1 + r2) * (d + r1 - r2) * (d - r1 + r2) * (d + r1 + r2)));
    return r1 * r1 * a1 + r2 * r2 * a2 - k;
}

}  // namespace elliptlab

#endif
