#include "shiftfdr/shift.hpp"

#include <cmath>
#include <stdexcept>

namespace shiftfdr {

namespace {

constexpr double kPFloor = 1e-300;
constexpr double kPCeil = 1.0 - 1e-16;

// H_theta without argument validation; theta may exceed 1 (inner compositions
// of the mixture bound use theta = tau/tau_i > 1).
double h_theta(double u, double theta, const DistributionKind& dist) {
    if (u <= 0.0)
        return 0.0;
    if (u >= 1.0)
        return 1.0;
    if (theta == 1.0)
        return u;
    const double q = quantile_upper(dist, u < kPFloor ? kPFloor : u);
    return survival(dist, theta * q);
}

bool is_identity_profile(const ShiftProfile& profile, double tau) {
    if (tau != 1.0)
        return false;
    for (int i = 0; i < profile.d; ++i)
        if (profile.tau[i] < 1.0)
            return false;
    return true;
}

} // namespace

double h_tau(double u, double tau, const DistributionKind& dist) {
    if (!(u > 0.0 && u < 1.0))
        throw std::domain_error("h_tau: u must lie in (0,1)");
    if (!(tau > 0.0 && tau <= 1.0))
        throw std::domain_error("h_tau: tau must lie in (0,1]");
    return h_theta(u, tau, dist);
}

double shift_pvalue(double p, double tau, const DistributionKind& dist) {
    if (p < 0.0 || p > 1.0)
        throw std::domain_error("shift_pvalue: p must lie in [0,1]");
    if (!(tau > 0.0 && tau <= 1.0))
        throw std::domain_error("shift_pvalue: tau must lie in (0,1]");
    if (p == 0.0 || p == 1.0)
        return p; // fixed points of the transform
    if (tau == 1.0)
        return p;
    const double clamped = p < kPFloor ? kPFloor : (p > kPCeil ? kPCeil : p);
    return survival(dist, quantile_upper(dist, clamped) / tau);
}

Eigen::VectorXd per_i_shifted(const Eigen::VectorXd& p, const ShiftProfile& profile,
                              const DistributionKind& dist) {
    if (p.size() != profile.d)
        throw std::invalid_argument("per_i_shifted: dimension mismatch");
    Eigen::VectorXd out(p.size());
    for (int i = 0; i < p.size(); ++i)
        out[i] = shift_pvalue(p[i], profile.tau[i], dist);
    return out;
}

double h_mixture(double u, const ShiftProfile& profile, double tau,
                 const DistributionKind& dist) {
    const int d = profile.d;
    if (!(u > 0.0) || u * d > 1.0 + 1e-15)
        throw std::domain_error("h_mixture: u must lie in (0, 1/d]");
    if (!(tau > 0.0 && tau <= 1.0))
        throw std::domain_error("h_mixture: tau must lie in (0,1]");

    int n_above = 0;
    double below_sum = 0.0;
    for (int i = 0; i < d; ++i) {
        const double ti = profile.tau[i];
        if (ti >= tau) {
            ++n_above;
        } else {
            const double inner = h_theta(std::min(1.0, u * d), tau / ti, dist) / d;
            below_sum += h_theta(inner, ti, dist);
        }
    }
    const double above = h_theta(u, tau, dist);
    if (n_above == d)
        return above; // exact first-branch reduction
    return (n_above * above + below_sum) / d;
}

double h_inverse(double target, const ShiftProfile& profile, double tau,
                 const DistributionKind& dist) {
    const int d = profile.d;
    if (!(target > 0.0 && target < 1.0))
        throw std::domain_error("h_inverse: target must lie in (0,1)");
    if (is_identity_profile(profile, tau))
        return target; // H is the identity
    const double hi0 = 1.0 / d;
    if (target >= h_mixture(hi0, profile, tau, dist))
        throw std::domain_error("h_inverse: target not attainable on (0, 1/d]");

    double lo = 0.0;
    double hi = hi0;
    double mid = 0.5 * hi0;
    for (int it = 0; it < 200; ++it) {
        mid = 0.5 * (lo + hi);
        const double v = h_mixture(mid, profile, tau, dist);
        if (it >= 60 && std::fabs(v - target) <= 1e-13)
            break;
        if (v < target)
            lo = mid;
        else
            hi = mid;
        if (hi - lo <= mid * 1e-17)
            break;
    }
    return mid;
}

CriticalConstants calibrate(double alpha, int d, const ShiftProfile& profile, double tau,
                            const DistributionKind& dist, CalibrationMethod method) {
    if (!(alpha > 0.0 && alpha < 1.0))
        throw std::domain_error("calibrate: alpha must lie in (0,1)");
    if (profile.d != d)
        throw std::invalid_argument("calibrate: profile dimension mismatch");

    double alpha1 = 0.0;
    if (method == CalibrationMethod::GSBH) {
        alpha1 = h_inverse(alpha / d, profile, tau, dist);
    } else {
        // SBH1: every coordinate keeps its own shift, so the Theorem-1 bound
        // is the average of the per-coordinate marginals.
        if (is_identity_profile(profile, 1.0)) {
            alpha1 = alpha / d;
        } else {
            const auto htilde = [&](double u) {
                double s = 0.0;
                for (int i = 0; i < d; ++i)
                    s += h_theta(u, profile.tau[i], dist);
                return s / d;
            };
            const double target = alpha / d;
            double lo = 0.0;
            double hi = 1.0 / d;
            if (target >= htilde(hi))
                throw std::domain_error("calibrate: target not attainable");
            double mid = 0.5 * hi;
            for (int it = 0; it < 200; ++it) {
                mid = 0.5 * (lo + hi);
                const double v = htilde(mid);
                if (it >= 60 && std::fabs(v - target) <= 1e-13)
                    break;
                if (v < target)
                    lo = mid;
                else
                    hi = mid;
                if (hi - lo <= mid * 1e-17)
                    break;
            }
            alpha1 = mid;
        }
    }

    CriticalConstants cc;
    cc.alpha_target = alpha;
    cc.tilde_alpha = d * alpha1;
    cc.alphas.resize(d);
    for (int i = 0; i < d; ++i)
        cc.alphas[i] = (i + 1) * alpha1;
    return cc;
}

double minorant_pvalue(double p_self_shifted, double tau_i, double tau, double tilde_alpha,
                       const DistributionKind& dist) {
    if (!(tau_i > 0.0 && tau_i <= tau))
        throw std::domain_error("minorant_pvalue: requires 0 < tau_i <= tau");
    if (!(tilde_alpha > 0.0 && tilde_alpha < 1.0))
        throw std::domain_error("minorant_pvalue: tilde_alpha must lie in (0,1)");
    if (tau_i == tau)
        return p_self_shifted; // phi_i is the identity
    const double denom = survival(dist, (tau / tau_i) * quantile_upper(dist, tilde_alpha));
    return tilde_alpha * p_self_shifted / denom;
}

} // namespace shiftfdr
