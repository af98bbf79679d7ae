#ifndef NFISAC_CHANNEL_HPP
#define NFISAC_CHANNEL_HPP

#include "nfisac/core.hpp"
#include "nfisac/geometry.hpp"

namespace nfisac {

struct ChannelModelParams {
    double wavelength = 0.01;        // metres
    double boresight_exponent = 2.0;  // b; 2 for a dipole-like element

    void validate() const {
        if (!(wavelength > 0.0)) throw ArgumentError("wavelength must be positive");
        if (!(boresight_exponent >= 0.0)) throw ArgumentError("boresight exponent must be non-negative");
    }
};

enum class Direction {
    outgoing,  // array -> point: displacement point - element
    incoming,  // point -> array: displacement element - point
};

// Element radiation profile 2(b+1) cos^b(psi) on psi in [0, pi/2], zero behind.
inline double radiation_profile(const Vec3& p, const Vec3& w, double b) {
    const double c = cos_angle(p, w);
    if (c < 0.0) return 0.0;
    return 2.0 * (b + 1.0) * std::pow(c, b);
}

// Free-space amplitude and phase lambda/(4 pi |p|) exp(-j 2 pi |p| / lambda).
inline Complex path_gain(const Vec3& p, double wavelength) {
    const double r = p.norm();
    if (!(r > 0.0)) throw SingularityError("path_gain: zero displacement (source colocated with element)");
    const double amp = wavelength / (4.0 * kPi * r);
    return std::polar(amp, -2.0 * kPi * r / wavelength);
}

/// Spherical-wave channel between every element of `array` and `point`.
/// Entry n is sqrt(F) * beta(d_n) with d_n = point - element_n when outgoing
/// and element_n - point when incoming. F is the element pattern towards the
/// point: for incoming waves it is evaluated on the arrival direction -d_n
/// against the normal, otherwise a receiver facing the scene would see every
/// point in front of it at psi > pi/2 and get an all-zero channel.
inline CVector nearfield_channel(const ArrayGeometry& array, const Vec3& point, const ChannelModelParams& params,
                                 Direction dir = Direction::outgoing) {
    params.validate();
    CVector h(static_cast<Eigen::Index>(array.size()));
    for (std::size_t n = 0; n < array.size(); ++n) {
        const Vec3 towards = point - array.element(n);
        if (!(towards.norm() > 0.0)) throw SingularityError("nearfield_channel: point coincides with an array element");
        const Vec3 d = dir == Direction::incoming ? Vec3(-towards) : towards;
        const double f = radiation_profile(towards, array.normal(), params.boresight_exponent);
        h(static_cast<Eigen::Index>(n)) = std::sqrt(f) * path_gain(d, params.wavelength);
    }
    return h;
}

/// Planar-wave approximation: common amplitude sqrt(F(d0, w)) |beta(d0)| with
/// d0 = point - centre, and per-element phase -2 pi Delta_n / lambda where
/// Delta_n = |d0| - (e_n - c) . d0 / |d0|.
inline CVector farfield_channel(const ArrayGeometry& array, const Vec3& point, const ChannelModelParams& params) {
    params.validate();
    const Vec3 d0 = point - array.center();
    const double r0 = d0.norm();
    if (!(r0 > 0.0)) throw SingularityError("farfield_channel: point coincides with the array centre");
    const double amp =
        std::sqrt(radiation_profile(d0, array.normal(), params.boresight_exponent)) * std::abs(path_gain(d0, params.wavelength));
    const Vec3 dir = d0 / r0;
    CVector h(static_cast<Eigen::Index>(array.size()));
    for (std::size_t n = 0; n < array.size(); ++n) {
        const double delta = r0 - (array.element(n) - array.center()).dot(dir);
        h(static_cast<Eigen::Index>(n)) = std::polar(amp, -2.0 * kPi * delta / params.wavelength);
    }
    return h;
}

// Round-trip sensing channel gamma * h_bwd h_fwd^T (N_r x N_t, rank <= 1).
struct RoundTripChannel {
    CMatrix matrix;
    Complex rcs{1.0, 0.0};
};

inline RoundTripChannel roundtrip_channel(const CVector& h_fwd, const CVector& h_bwd, Complex rcs) {
    return RoundTripChannel{rcs * h_bwd * h_fwd.transpose(), rcs};
}

}  // namespace nfisac

#endif  // NFISAC_CHANNEL_HPP
