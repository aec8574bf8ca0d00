#include "cavnb/meanfield.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cavnb {

namespace {

MeanFieldParams make_params(int n_body, double chi_collective, double phi_d) {
    MeanFieldParams p;
    p.n_body = n_body;
    p.chi_collective = chi_collective;
    p.phi_d = phi_d;
    return p;
}

double wrap_angle(double a) {
    a = std::fmod(a, kTwoPi);
    if (a < 0) a += kTwoPi;
    return a;
}

}  // namespace

std::vector<FlowSample> sample_flow_field(int n_body, double chi_collective, double phi_d,
                                          int n_theta, int n_phi) {
    if (n_theta < 2 || n_phi < 2) throw std::invalid_argument("sample_flow_field: grid too small");
    const double eps = 1e-6;
    const auto p = make_params(n_body, chi_collective, phi_d);
    std::vector<FlowSample> out;
    out.reserve(static_cast<size_t>(n_theta) * n_phi);
    for (int i = 0; i < n_theta; ++i) {
        double theta = (i + 0.5) * kPi / n_theta;
        theta = std::clamp(theta, eps, kPi - eps);
        for (int k = 0; k < n_phi; ++k) {
            const double phi = k * kTwoPi / n_phi;
            const auto [dth, dph] = meanfield_angular_rates(theta, phi, p);
            out.push_back({theta, phi, dth, std::sin(theta) * dph});
        }
    }
    return out;
}

namespace {

// 2D Newton iteration on the angular flow; returns true on convergence.
bool newton_refine(const MeanFieldParams& p, double& theta, double& phi) {
    for (int it = 0; it < 60; ++it) {
        const auto [f1, f2] = meanfield_angular_rates(theta, phi, p);
        const double scale = std::abs(p.chi_collective);
        if (std::hypot(f1, f2) < 1e-13 * scale) return true;
        const double h = 1e-7;
        const auto [f1t, f2t] = meanfield_angular_rates(theta + h, phi, p);
        const auto [f1p, f2p] = meanfield_angular_rates(theta, phi + h, p);
        const double a = (f1t - f1) / h, b = (f1p - f1) / h;
        const double c = (f2t - f2) / h, d = (f2p - f2) / h;
        const double det = a * d - b * c;
        if (std::abs(det) < 1e-30) return false;
        theta -= (d * f1 - b * f2) / det;
        phi -= (-c * f1 + a * f2) / det;
        if (theta < -0.5 || theta > kPi + 0.5) return false;
    }
    return false;
}

FixedPoint classify_regular(const MeanFieldParams& p, double theta, double phi) {
    FixedPoint fp;
    fp.theta = theta;
    fp.phi = wrap_angle(phi);
    const double h = 1e-6;
    const auto [f1t, f2t] = meanfield_angular_rates(theta + h, phi, p);
    const auto [f1T, f2T] = meanfield_angular_rates(theta - h, phi, p);
    const auto [f1p, f2p] = meanfield_angular_rates(theta, phi + h, p);
    const auto [f1P, f2P] = meanfield_angular_rates(theta, phi - h, p);
    const double a = (f1t - f1T) / (2 * h), b = (f1p - f1P) / (2 * h);
    const double c = (f2t - f2T) / (2 * h), d = (f2p - f2P) / (2 * h);
    const double tr = a + d, det = a * d - b * c;
    const Complex disc = std::sqrt(Complex(tr * tr - 4 * det, 0));
    fp.eig1 = 0.5 * (tr + disc);
    fp.eig2 = 0.5 * (tr - disc);
    const double scale = std::max({std::abs(fp.eig1), std::abs(fp.eig2),
                                   1e-12 * std::abs(p.chi_collective)});
    const bool imag_pair = std::abs(fp.eig1.real()) < 1e-8 * scale &&
                           std::abs(fp.eig2.real()) < 1e-8 * scale &&
                           std::abs(fp.eig1.imag()) > 1e-8 * scale;
    if (imag_pair)
        fp.kind = FixedPoint::Kind::Center;
    else if (std::abs(fp.eig1) < 1e-8 * std::abs(p.chi_collective))
        fp.kind = FixedPoint::Kind::Degenerate;
    else
        fp.kind = FixedPoint::Kind::Saddle;
    return fp;
}

// The linearization vanishes identically at the poles for n >= 3; the
// trifurcation structure is read off the sign alternation of dtheta/dt on a
// small circle around the pole.
FixedPoint classify_pole(const MeanFieldParams& p, bool north) {
    FixedPoint fp;
    fp.theta = north ? 0.0 : kPi;
    fp.phi = 0.0;
    fp.kind = FixedPoint::Kind::Degenerate;
    const double theta = north ? 1e-3 : kPi - 1e-3;
    const int nphi = 720;
    int changes = 0;
    double prev = 0;
    bool have_prev = false;
    for (int k = 0; k <= nphi; ++k) {
        const double phi = k * kTwoPi / nphi;
        const auto [dth, dph] = meanfield_angular_rates(theta, phi, p);
        (void)dph;
        if (dth == 0) continue;
        if (have_prev && std::signbit(dth) != std::signbit(prev)) ++changes;
        prev = dth;
        have_prev = true;
    }
    fp.flow_sectors = changes;
    return fp;
}

}  // namespace

std::vector<FixedPoint> find_fixed_points(int n_body, double chi_collective, double phi_d) {
    if (chi_collective == 0.0)
        throw std::invalid_argument("find_fixed_points: chi_collective = 0 makes every point fixed");
    const auto p = make_params(n_body, chi_collective, phi_d);
    std::vector<FixedPoint> found;
    found.push_back(classify_pole(p, true));
    found.push_back(classify_pole(p, false));

    const int n_theta = 24, n_phi = 48;
    for (int i = 1; i < n_theta; ++i) {
        for (int k = 0; k < n_phi; ++k) {
            double theta = i * kPi / n_theta;
            double phi = k * kTwoPi / n_phi;
            if (!newton_refine(p, theta, phi)) continue;
            if (theta < 1e-6 || theta > kPi - 1e-6) continue;  // pole basin
            const double phiw = wrap_angle(phi);
            bool dup = false;
            for (const auto& fp : found) {
                const double dphi = std::abs(std::remainder(fp.phi - phiw, kTwoPi));
                if (std::abs(fp.theta - theta) < 1e-6 && dphi * std::sin(theta) < 1e-6) dup = true;
            }
            if (dup) continue;
            found.push_back(classify_regular(p, theta, phiw));
        }
    }
    std::sort(found.begin(), found.end(), [](const FixedPoint& a, const FixedPoint& b) {
        if (std::abs(a.theta - b.theta) > 1e-9) return a.theta < b.theta;
        return a.phi < b.phi;
    });
    return found;
}

double short_time_displacement(double theta0, double phi0, double chi_collective, double dt,
                               int n_body, double phi_d) {
    if (std::abs(chi_collective * dt) > 0.1)
        throw std::invalid_argument("short_time_displacement: |chi dt| must be <= 0.1");
    const auto p = make_params(n_body, chi_collective, phi_d);
    const auto s = MeanFieldState::from_angles(theta0, phi0);
    const auto [djp, djz] = meanfield_derivatives(s, p);
    (void)djp;
    return djz * dt;
}

std::vector<RingPoint> trifurcation_signature(double theta0, int n_samples,
                                              double chi_collective, double dt, double phi_d,
                                              int n_body) {
    if (theta0 <= 0 || theta0 >= 0.5 * kPi)
        throw std::invalid_argument("trifurcation_signature: theta0 must lie in (0, pi/2)");
    if (n_samples < 8) throw std::invalid_argument("trifurcation_signature: too few samples");
    const auto p = make_params(n_body, chi_collective, phi_d);
    std::vector<RingPoint> out;
    out.reserve(n_samples);
    for (int k = 0; k < n_samples; ++k) {
        const double phi0 = k * kTwoPi / n_samples;
        if (dt == 0) {
            const auto s = MeanFieldState::from_angles(theta0, phi0);
            out.push_back({phi0, s.jx, s.jy});
            continue;
        }
        const auto traj = evolve_meanfield(MeanFieldState::from_angles(theta0, phi0), p,
                                           {0.0, dt}, 1e-10);
        out.push_back({phi0, traj.back().jx, traj.back().jy});
    }
    return out;
}

std::vector<double> ring_radial_harmonics(const std::vector<RingPoint>& ring, int n_harmonics) {
    const int m = static_cast<int>(ring.size());
    if (m < 2 * n_harmonics)
        throw std::invalid_argument("ring_radial_harmonics: ring too sparse");
    // radial coordinate against final azimuth, unwrapped and resampled
    std::vector<std::pair<double, double>> samples;  // (angle, radius)
    samples.reserve(m);
    for (const auto& pt : ring)
        samples.emplace_back(wrap_angle(std::atan2(pt.jy, pt.jx)), std::hypot(pt.jx, pt.jy));
    std::sort(samples.begin(), samples.end());
    std::vector<double> r(m);
    for (int k = 0; k < m; ++k) {
        const double a = k * kTwoPi / m;
        auto hi = std::lower_bound(samples.begin(), samples.end(), std::make_pair(a, -1e300));
        const auto lo = (hi == samples.begin()) ? std::prev(samples.end()) : std::prev(hi);
        if (hi == samples.end()) hi = samples.begin();
        double gap = hi->first - lo->first;
        double off = a - lo->first;
        if (gap <= 0) gap += kTwoPi;
        if (off < 0) off += kTwoPi;
        const double w = (gap > 0) ? off / gap : 0.0;
        r[k] = (1 - w) * lo->second + w * hi->second;
    }
    std::vector<double> mags(n_harmonics, 0.0);
    for (int h = 0; h < n_harmonics; ++h) {
        Complex acc = 0;
        for (int k = 0; k < m; ++k)
            acc += r[k] * std::exp(Complex(0, -h * (k * kTwoPi / m)));
        mags[h] = std::abs(acc) / m;
    }
    return mags;
}

}  // namespace cavnb
