#ifndef SHELLVK_FIELDS_HPP
#define SHELLVK_FIELDS_HPP

#include "shellvk/chart.hpp"
#include "shellvk/geometry.hpp"
#include "shellvk/types.hpp"

#include <string>

namespace shellvk {

/// Named analytic chart fields used for initial data. All shipped profiles
/// vanish together with their first derivatives on the chart boundary, so
/// lifted 3D states are clamped-compatible.
///
///   zero          V = 0
///   normal_bump   V = amp b(r1) b(r2) n(xi),   b(r) = 16 r^2 (1-r)^2
///   inplane_bump  V = amp b(r1) b(r2) (c1 that1 + c2 that2), c = (1, 0.4)
struct ProfileSpec {
    std::string name = "zero";
    Real amp = 0.0;

    bool is_zero() const { return name == "zero" || amp == 0.0; }
};

/// Value and chart-derivative jet of a profile: what Hermite interpolation
/// and the Kirchhoff-Love lift need.
struct ProfileJet {
    Vec3 value = Vec3::Zero();
    Vec3 d1 = Vec3::Zero(), d2 = Vec3::Zero();   // d/dxi_c
    Vec3 d11 = Vec3::Zero(), d12 = Vec3::Zero(), d22 = Vec3::Zero();
};

ProfileJet profile_jet(const Chart& chart, const ProfileSpec& spec, const Vec2& xi);
Vec3 profile_value(const Chart& chart, const ProfileSpec& spec, const Vec2& xi);

/// Surface force field f(t, x) of separable form f = amp * T(t) * g(xi).
/// With the zero-mean flag the chart average of g (a vector integral) is
/// subtracted so that |int_S f dx| vanishes at every time sample.
class Forcing {
  public:
    Forcing() = default; // zero forcing
    Forcing(const Chart& chart, const std::string& profile, Real amp, Real omega,
            bool zero_mean);

    bool is_zero() const { return zero_; }
    bool zero_mean() const { return zero_mean_; }
    /// Time factor; the space part is fixed, so loads assembled once can be
    /// rescaled per step.
    Real time_factor(Real t) const;
    Vec3 space_value(const Chart& chart, const Vec2& xi) const;
    Vec3 value(const Chart& chart, Real t, const Vec2& xi) const {
        return time_factor(t) * space_value(chart, xi);
    }

    std::string profile() const { return profile_; }
    Real amplitude() const { return amp_; }
    Real omega() const { return omega_; }

  private:
    bool zero_ = true;
    bool zero_mean_ = false;
    std::string profile_ = "zero";
    Real amp_ = 0, omega_ = 0;
    Vec3 mean_correction_ = Vec3::Zero(); // subtracted constant field
};

} // namespace shellvk

#endif
