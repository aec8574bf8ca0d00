#pragma once

#include <vector>

#include "cavnb/dynamics.hpp"

namespace cavnb {

struct FlowSample {
    double theta = 0, phi = 0;
    double dtheta_dt = 0;      ///< rad/s
    double dphi_sin_dt = 0;    ///< sin(theta) * dphi/dt, rad/s (tangent component)
};

/// Samples the Bloch-sphere flow on an n_theta x n_phi grid, theta clipped to
/// [eps, pi - eps] with eps = 1e-6.
std::vector<FlowSample> sample_flow_field(int n_body, double chi_collective, double phi_d,
                                          int n_theta, int n_phi);

struct FixedPoint {
    double theta = 0, phi = 0;
    Complex eig1, eig2;  ///< linearization eigenvalues (rad/s)
    enum class Kind { Center, Saddle, Degenerate } kind = Kind::Center;
    int flow_sectors = 0;  ///< alternating inward/outward sectors (poles only)
    bool stable() const { return kind == Kind::Center; }
};

/// Newton search seeded on a 24 x 48 grid, deduplicated at 1e-6 rad.
/// For n = 3, phi_d = 0: the two poles (degenerate trifurcation points, six
/// alternating flow sectors) plus six equatorial centers at phi = q pi/3.
std::vector<FixedPoint> find_fixed_points(int n_body, double chi_collective, double phi_d);

/// First-order displacement Delta Jz/(N/2); at theta = pi/2 this is
/// (3/2) chi3 N^2 dt sin(3 phi) for the 3-body flow. Requires |X dt| <= 0.1.
double short_time_displacement(double theta0, double phi0, double chi_collective, double dt,
                               int n_body = 3, double phi_d = 0);

struct RingPoint {
    double phi0 = 0;  ///< initial azimuth
    double jx = 0, jy = 0;
};

/// Evolves a ring of initial states at constant polar angle theta0 and returns
/// the final transverse components.
std::vector<RingPoint> trifurcation_signature(double theta0, int n_samples,
                                              double chi_collective, double dt, double phi_d,
                                              int n_body = 3);

/// Magnitudes of the angular harmonics of the ring's radial modulation,
/// resampled to a uniform grid in the final azimuth by linear interpolation.
/// Entry k is harmonic k, k = 0 .. n_harmonics-1.
std::vector<double> ring_radial_harmonics(const std::vector<RingPoint>& ring, int n_harmonics);

}  // namespace cavnb
