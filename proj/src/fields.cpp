#include "shellvk/fields.hpp"

#include <cmath>

namespace shellvk {

namespace {

// Clamped bump on [0,1] with zero value, slope and curvature at both ends
// (max 1 at 1/2), so lifted states and their strain correctors satisfy the
// clamped lateral boundary exactly.
inline Real bump(Real r) { return 64.0 * r * r * r * (1 - r) * (1 - r) * (1 - r); }
inline Real bump_d(Real r) { return 192.0 * r * r * (1 - r) * (1 - r) * (1 - 2 * r); }
inline Real bump_dd(Real r) { return 384.0 * r * (1 - r) * (1 - 5 * r + 5 * r * r); }

struct Scal {
    Real v, d1, d2, d11, d12, d22;
};

// Spectrally narrow clamped profile (single 2 pi mode per direction): zero
// value and slope on the boundary; used where the lift must stay smooth on
// the shared grid.
inline Real sine2(Real r) { return std::sin(M_PI * r) * std::sin(M_PI * r); }
inline Real sine2_d(Real r) { return M_PI * std::sin(2 * M_PI * r); }
inline Real sine2_dd(Real r) { return 2 * M_PI * M_PI * std::cos(2 * M_PI * r); }

Scal scalar2d(const Chart& chart, const Vec2& xi, Real (*f)(Real), Real (*fd)(Real),
              Real (*fdd)(Real)) {
    const Vec2 lo = chart.param_lo(), hi = chart.param_hi();
    const Real L1 = hi[0] - lo[0], L2 = hi[1] - lo[1];
    const Real r1 = (xi[0] - lo[0]) / L1, r2 = (xi[1] - lo[1]) / L2;
    Scal s;
    s.v = f(r1) * f(r2);
    s.d1 = fd(r1) * f(r2) / L1;
    s.d2 = f(r1) * fd(r2) / L2;
    s.d11 = fdd(r1) * f(r2) / (L1 * L1);
    s.d12 = fd(r1) * fd(r2) / (L1 * L2);
    s.d22 = f(r1) * fdd(r2) / (L2 * L2);
    return s;
}

Scal bump2d(const Chart& chart, const Vec2& xi) {
    return scalar2d(chart, xi, bump, bump_d, bump_dd);
}

Scal sine2d(const Chart& chart, const Vec2& xi) {
    return scalar2d(chart, xi, sine2, sine2_d, sine2_dd);
}

} // namespace

ProfileJet profile_jet(const Chart& chart, const ProfileSpec& spec, const Vec2& xi) {
    ProfileJet j;
    if (spec.is_zero()) return j;

    if (spec.name == "normal_bump" || spec.name == "normal_sine") {
        const Scal b = spec.name == "normal_bump" ? bump2d(chart, xi) : sine2d(chart, xi);
        const Chart::NormalJet n = chart.normal_jet(xi);
        j.value = spec.amp * b.v * n.v;
        j.d1 = spec.amp * (b.d1 * n.v + b.v * n.d1);
        j.d2 = spec.amp * (b.d2 * n.v + b.v * n.d2);
        j.d11 = spec.amp * (b.d11 * n.v + 2 * b.d1 * n.d1 + b.v * n.d11);
        j.d12 = spec.amp * (b.d12 * n.v + b.d1 * n.d2 + b.d2 * n.d1 + b.v * n.d12);
        j.d22 = spec.amp * (b.d22 * n.v + 2 * b.d2 * n.d2 + b.v * n.d22);
        return j;
    }

    if (spec.name == "inplane_bump") {
        const ChartFrame f = chart.frame(xi);
        const Scal b = bump2d(chart, xi);
        const Vec3 dir = f.that1 + 0.4 * f.that2;
        const Vec3 dir1 = f.that1_d1 + 0.4 * f.that2_d1;
        const Vec3 dir2 = f.that1_d2 + 0.4 * f.that2_d2;
        j.value = spec.amp * b.v * dir;
        j.d1 = spec.amp * (b.d1 * dir + b.v * dir1);
        j.d2 = spec.amp * (b.d2 * dir + b.v * dir2);
        // Second derivatives omit the frame-curvature products; exact on the
        // plate (constant frame), and only value/first-derivative data of
        // in-plane profiles is consumed on curved charts.
        j.d11 = spec.amp * (b.d11 * dir + 2 * b.d1 * dir1);
        j.d12 = spec.amp * (b.d12 * dir + b.d1 * dir2 + b.d2 * dir1);
        j.d22 = spec.amp * (b.d22 * dir + 2 * b.d2 * dir2);
        return j;
    }

    if (spec.name == "offset_bump") {
        // Bump plus a constant normal offset; deliberately violates the
        // clamped boundary (used by error-path tests).
        ProfileSpec inner{"normal_bump", spec.amp};
        j = profile_jet(chart, inner, xi);
        const Chart::NormalJet n = chart.normal_jet(xi);
        j.value += 0.1 * std::abs(spec.amp) * n.v;
        j.d1 += 0.1 * std::abs(spec.amp) * n.d1;
        j.d2 += 0.1 * std::abs(spec.amp) * n.d2;
        return j;
    }

    throw ConfigError("unknown profile: " + spec.name);
}

Vec3 profile_value(const Chart& chart, const ProfileSpec& spec, const Vec2& xi) {
    return profile_jet(chart, spec, xi).value;
}

Forcing::Forcing(const Chart& chart, const std::string& profile, Real amp, Real omega,
                 bool zero_mean)
    : zero_(profile == "zero" || amp == 0.0), zero_mean_(zero_mean), profile_(profile),
      amp_(amp), omega_(omega) {
    if (zero_) return;
    if (profile_ != "normal_pulse" && profile_ != "constant_normal")
        throw ConfigError("unknown forcing profile: " + profile_);
    if (zero_mean_) {
        // Chart average of the raw space part, by a fine fixed quadrature.
        SurfaceGrid grid(chart, 24, 24, 3);
        Vec3 acc = Vec3::Zero();
        Real area = 0;
        for (int c = 0; c < grid.num_cells(); ++c)
            for (int q = 0; q < grid.qp_per_cell(); ++q) {
                const ChartFrame& f = grid.qp_frame(grid.qp_index(c, q));
                const Real w = grid.qp_weight(q) * f.area_element;
                Vec3 raw = amp_ * f.n;
                if (profile_ == "normal_pulse") {
                    const Vec2 lo = chart.param_lo(), hi = chart.param_hi();
                    const Real r1 = (f.xi[0] - lo[0]) / (hi[0] - lo[0]);
                    const Real r2 = (f.xi[1] - lo[1]) / (hi[1] - lo[1]);
                    raw *= bump(r1) * bump(r2);
                }
                acc += w * raw;
                area += w;
            }
        mean_correction_ = acc / area;
    }
}

Real Forcing::time_factor(Real t) const {
    if (zero_) return 0.0;
    return omega_ == 0.0 ? 1.0 : std::sin(omega_ * t);
}

Vec3 Forcing::space_value(const Chart& chart, const Vec2& xi) const {
    if (zero_) return Vec3::Zero();
    Vec3 raw = amp_ * chart.normal(xi);
    if (profile_ == "normal_pulse") {
        const Vec2 lo = chart.param_lo(), hi = chart.param_hi();
        const Real r1 = (xi[0] - lo[0]) / (hi[0] - lo[0]);
        const Real r2 = (xi[1] - lo[1]) / (hi[1] - lo[1]);
        raw *= bump(r1) * bump(r2);
    }
    return raw - mean_correction_;
}

} // namespace shellvk
