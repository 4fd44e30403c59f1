#include "shellvk/chart.hpp"

#include <cmath>
#include <sstream>
#include <vector>

namespace shellvk {

namespace {

// 32-point Gauss-Legendre nodes/weights on (-1,1), for the sphere-patch
// reference area. Generated by Newton iteration on Legendre polynomials.
void gauss_legendre(int n, std::vector<Real>& x, std::vector<Real>& w) {
    x.resize(n);
    w.resize(n);
    for (int i = 0; i < n; ++i) {
        Real t = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        for (int it = 0; it < 100; ++it) {
            Real p0 = 1.0, p1 = t;
            for (int k = 2; k <= n; ++k) {
                Real p2 = ((2 * k - 1) * t * p1 - (k - 1) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            Real dp = n * (t * p1 - p0) / (t * t - 1.0);
            Real dt = p1 / dp;
            t -= dt;
            if (std::abs(dt) < 1e-15) break;
        }
        Real p0 = 1.0, p1 = t;
        for (int k = 2; k <= n; ++k) {
            Real p2 = ((2 * k - 1) * t * p1 - (k - 1) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        Real dp = n * (t * p1 - p0) / (t * t - 1.0);
        x[i] = t;
        w[i] = 2.0 / ((1.0 - t * t) * dp * dp);
    }
}

} // namespace

std::string to_string(ChartKind k) {
    switch (k) {
        case ChartKind::Plate: return "plate";
        case ChartKind::Cylinder: return "cylinder";
        case ChartKind::SpherePatch: return "sphere_patch";
    }
    return "?";
}

ChartKind chart_kind_from_string(const std::string& s) {
    if (s == "plate") return ChartKind::Plate;
    if (s == "cylinder") return ChartKind::Cylinder;
    if (s == "sphere_patch" || s == "sphere") return ChartKind::SpherePatch;
    throw ConfigError("unknown chart kind: " + s);
}

Chart Chart::plate(Real lx, Real ly, int orientation) {
    if (lx <= 0 || ly <= 0) throw GeometryError("plate side lengths must be positive");
    Chart c;
    c.kind_ = ChartKind::Plate;
    c.orientation_ = orientation;
    c.shape_[0] = lx;
    c.shape_[1] = ly;
    c.lo_ = Vec2(0, 0);
    c.hi_ = Vec2(lx, ly);
    return c;
}

Chart Chart::cylinder(Real radius, Real angle, Real length, int orientation) {
    if (radius <= 0 || angle <= 0 || angle > 2 * M_PI || length <= 0)
        throw GeometryError("cylinder parameters out of range");
    Chart c;
    c.kind_ = ChartKind::Cylinder;
    c.orientation_ = orientation;
    c.shape_[0] = radius;
    c.shape_[1] = angle;
    c.shape_[2] = length;
    c.lo_ = Vec2(-angle / 2, 0);
    c.hi_ = Vec2(angle / 2, length);
    return c;
}

Chart Chart::sphere_patch(Real radius, Real half_width, int orientation) {
    if (radius <= 0 || half_width <= 0 || half_width * std::sqrt(2.0) >= radius)
        throw GeometryError("sphere patch needs half_width*sqrt(2) < radius");
    Chart c;
    c.kind_ = ChartKind::SpherePatch;
    c.orientation_ = orientation;
    c.shape_[0] = radius;
    c.shape_[1] = half_width;
    c.lo_ = Vec2(-half_width, -half_width);
    c.hi_ = Vec2(half_width, half_width);
    return c;
}

bool Chart::contains(const Vec2& xi, Real tol) const {
    return xi[0] >= lo_[0] - tol && xi[0] <= hi_[0] + tol && xi[1] >= lo_[1] - tol &&
           xi[1] <= hi_[1] + tol;
}

void Chart::require_inside(const Vec2& xi) const {
    if (!contains(xi)) {
        std::ostringstream os;
        os << "parameter point (" << xi[0] << ", " << xi[1] << ") outside chart rectangle";
        throw GeometryError(os.str());
    }
}

Vec3 Chart::position(const Vec2& xi) const {
    switch (kind_) {
        case ChartKind::Plate: return Vec3(xi[0], xi[1], 0);
        case ChartKind::Cylinder: {
            const Real r = shape_[0];
            return Vec3(r * std::cos(xi[0]), r * std::sin(xi[0]), xi[1]);
        }
        case ChartKind::SpherePatch: {
            const Real r = shape_[0];
            const Real w = std::sqrt(r * r - xi.squaredNorm());
            return Vec3(xi[0], xi[1], w);
        }
    }
    return Vec3::Zero();
}

Vec3 Chart::tangent(const Vec2& xi, int c) const {
    switch (kind_) {
        case ChartKind::Plate: return c == 0 ? Vec3(1, 0, 0) : Vec3(0, 1, 0);
        case ChartKind::Cylinder: {
            const Real r = shape_[0];
            if (c == 0) return Vec3(-r * std::sin(xi[0]), r * std::cos(xi[0]), 0);
            return Vec3(0, 0, 1);
        }
        case ChartKind::SpherePatch: {
            const Real r = shape_[0];
            const Real w = std::sqrt(r * r - xi.squaredNorm());
            if (c == 0) return Vec3(1, 0, -xi[0] / w);
            return Vec3(0, 1, -xi[1] / w);
        }
    }
    return Vec3::Zero();
}

Vec3 Chart::normal(const Vec2& xi) const {
    Vec3 n;
    switch (kind_) {
        case ChartKind::Plate: n = Vec3(0, 0, 1); break;
        case ChartKind::Cylinder: n = Vec3(std::cos(xi[0]), std::sin(xi[0]), 0); break;
        case ChartKind::SpherePatch: n = position(xi) / shape_[0]; break;
    }
    return Real(orientation_) * n;
}

Vec3 Chart::director(const Vec2& xi) const { return -normal(xi); }

Mat3 Chart::curvature(const Vec2& xi) const {
    // Pi = grad(m) with m = -n_oriented; for the default outward orientation
    // the principal curvatures are (-1/R, 0) on the cylinder and -1/R twice
    // on the sphere.
    const Real o = Real(orientation_);
    switch (kind_) {
        case ChartKind::Plate: return Mat3::Zero();
        case ChartKind::Cylinder: {
            const Real r = shape_[0];
            const Vec3 th(-std::sin(xi[0]), std::cos(xi[0]), 0);
            return -(o / r) * (th * th.transpose());
        }
        case ChartKind::SpherePatch: {
            const Real r = shape_[0];
            const Vec3 nhat = position(xi) / r;
            return -(o / r) * (Mat3::Identity() - nhat * nhat.transpose());
        }
    }
    return Mat3::Zero();
}

ChartFrame Chart::frame(const Vec2& xi) const {
    require_inside(xi);
    ChartFrame f;
    f.xi = xi;
    f.x = position(xi);
    f.t1 = tangent(xi, 0);
    f.t2 = tangent(xi, 1);

    switch (kind_) {
        case ChartKind::Plate:
            f.x11 = f.x12 = f.x22 = Vec3::Zero();
            break;
        case ChartKind::Cylinder: {
            const Real r = shape_[0];
            f.x11 = Vec3(-r * std::cos(xi[0]), -r * std::sin(xi[0]), 0);
            f.x12 = Vec3::Zero();
            f.x22 = Vec3::Zero();
            break;
        }
        case ChartKind::SpherePatch: {
            const Real r = shape_[0];
            const Real w = std::sqrt(r * r - xi.squaredNorm());
            const Real w3 = w * w * w;
            auto wdd = [&](int c, int d) {
                return -((c == d) ? 1.0 / w : 0.0) - xi[c] * xi[d] / w3;
            };
            f.x11 = Vec3(0, 0, wdd(0, 0));
            f.x12 = Vec3(0, 0, wdd(0, 1));
            f.x22 = Vec3(0, 0, wdd(1, 1));
            break;
        }
    }

    f.n = normal(xi);
    f.m = -f.n;
    f.Pi = curvature(xi);
    f.area_element = f.t1.cross(f.t2).norm();
    if (f.area_element < 1e-14) throw GeometryError("rank-deficient chart Jacobian");

    // First fundamental form and its inverse give the dual basis.
    Mat2 a;
    a(0, 0) = f.t1.dot(f.t1);
    a(0, 1) = f.t1.dot(f.t2);
    a(1, 0) = a(0, 1);
    a(1, 1) = f.t2.dot(f.t2);
    const Mat2 ai = a.inverse();
    f.g1 = ai(0, 0) * f.t1 + ai(0, 1) * f.t2;
    f.g2 = ai(1, 0) * f.t1 + ai(1, 1) * f.t2;

    // d/dxi_d of g^c: differentiate g^c = sum_e ai(c,e) t_e with
    // d(ai) = -ai * d(a) * ai.
    for (int d = 0; d < 2; ++d) {
        Mat2 da;
        for (int c = 0; c < 2; ++c)
            for (int e = 0; e < 2; ++e)
                da(c, e) = f.x_deriv2(c, d).dot(f.t(e)) + f.t(c).dot(f.x_deriv2(e, d));
        const Mat2 dai = -ai * da * ai;
        for (int c = 0; c < 2; ++c) {
            Vec3 gd = dai(c, 0) * f.t1 + dai(c, 1) * f.t2 + ai(c, 0) * f.x_deriv2(0, d) +
                      ai(c, 1) * f.x_deriv2(1, d);
            if (c == 0) (d == 0 ? f.g1_d1 : f.g1_d2) = gd;
            else (d == 0 ? f.g2_d1 : f.g2_d2) = gd;
        }
    }

    // Orthonormal tangent frame by Gram-Schmidt on (t1, t2).
    const Real n1 = f.t1.norm();
    f.that1 = f.t1 / n1;
    Vec3 u = f.t2 - f.t2.dot(f.that1) * f.that1;
    const Real n2 = u.norm();
    f.that2 = u / n2;
    f.beta.setZero();
    f.beta(0, 0) = 1.0 / n1;
    // that2 = (t2 - <t2,that1> that1)/n2 = (-<t2,t1>/(n1^2) t1 + t2)/n2
    f.beta(0, 1) = -f.t2.dot(f.t1) / (n1 * n1 * n2);
    f.beta(1, 1) = 1.0 / n2;

    // Chart derivatives of the orthonormal frame, by differentiating the
    // Gram-Schmidt construction.
    for (int c = 0; c < 2; ++c) {
        const Vec3 t1c = f.x_deriv2(0, c);
        const Vec3 t2c = f.x_deriv2(1, c);
        const Vec3 dthat1 = t1c / n1 - f.t1 * (f.t1.dot(t1c)) / (n1 * n1 * n1);
        const Vec3 dw = t2c - (t2c.dot(f.that1) + f.t2.dot(dthat1)) * f.that1 -
                        f.t2.dot(f.that1) * dthat1;
        const Vec3 dthat2 = dw / n2 - u * (u.dot(dw)) / (n2 * n2 * n2);
        (c == 0 ? f.that1_d1 : f.that1_d2) = dthat1;
        (c == 0 ? f.that2_d1 : f.that2_d2) = dthat2;
    }
    return f;
}

Chart::NormalJet Chart::normal_jet(const Vec2& xi) const {
    const Real o = Real(orientation_);
    NormalJet j;
    j.d1 = j.d2 = j.d11 = j.d12 = j.d22 = Vec3::Zero();
    switch (kind_) {
        case ChartKind::Plate: j.v = o * Vec3(0, 0, 1); break;
        case ChartKind::Cylinder:
            j.v = o * Vec3(std::cos(xi[0]), std::sin(xi[0]), 0);
            j.d1 = o * Vec3(-std::sin(xi[0]), std::cos(xi[0]), 0);
            j.d11 = -j.v;
            break;
        case ChartKind::SpherePatch: {
            const Real r = shape_[0];
            const ChartFrame f = frame(xi);
            j.v = o * f.x / r;
            j.d1 = o * f.t1 / r;
            j.d2 = o * f.t2 / r;
            j.d11 = o * f.x11 / r;
            j.d12 = o * f.x12 / r;
            j.d22 = o * f.x22 / r;
            break;
        }
    }
    return j;
}

Real Chart::reference_area() const {
    switch (kind_) {
        case ChartKind::Plate: return shape_[0] * shape_[1];
        case ChartKind::Cylinder: return shape_[0] * shape_[1] * shape_[2];
        case ChartKind::SpherePatch: {
            // area = int_{-a}^{a} 2R asin(a / sqrt(R^2 - x^2)) dx
            const Real r = shape_[0], a = shape_[1];
            std::vector<Real> x, w;
            gauss_legendre(48, x, w);
            Real area = 0;
            for (std::size_t i = 0; i < x.size(); ++i) {
                const Real xx = a * x[i];
                area += a * w[i] * 2.0 * r * std::asin(a / std::sqrt(r * r - xx * xx));
            }
            return area;
        }
    }
    return 0;
}

Real Chart::max_abs_curvature() const {
    switch (kind_) {
        case ChartKind::Plate: return 0;
        case ChartKind::Cylinder:
        case ChartKind::SpherePatch: return 1.0 / shape_[0];
    }
    return 0;
}

std::string Chart::describe() const {
    std::ostringstream os;
    os << to_string(kind_);
    switch (kind_) {
        case ChartKind::Plate: os << "(lx=" << shape_[0] << ", ly=" << shape_[1] << ")"; break;
        case ChartKind::Cylinder:
            os << "(R=" << shape_[0] << ", angle=" << shape_[1] << ", length=" << shape_[2] << ")";
            break;
        case ChartKind::SpherePatch:
            os << "(R=" << shape_[0] << ", half_width=" << shape_[1] << ")";
            break;
    }
    os << " orientation=" << (orientation_ > 0 ? "+1" : "-1");
    return os.str();
}

} // namespace shellvk
