#ifndef SHIFTFDR_SHIFT_HPP
#define SHIFTFDR_SHIFT_HPP

#include <Eigen/Dense>

#include "shiftfdr/corr.hpp"
#include "shiftfdr/dist.hpp"

namespace shiftfdr {

// Raw p-values together with their left-shifted transforms.
struct ShiftedPValues {
    Eigen::VectorXd raw;
    Eigen::VectorXd shifted;
    double tau_used = 1.0; // 0 when each coordinate used its own tau_i
    DistributionKind dist;
};

// Step-up constants alpha_i = i * alpha_1 with alpha_1 = H^{-1}(alpha/d).
struct CriticalConstants {
    Eigen::VectorXd alphas;
    double alpha_target = 0.0;
    double tilde_alpha = 0.0; // d * alpha_1
};

enum class CalibrationMethod { GSBH, SBH1 };

// H_tau(u) = S(tau * S^{-1}(u)) for the survival function S of dist.
// Accepts any tau > 0; the u in {0,1} limits are their fixed points.
double h_tau(double u, double tau, const DistributionKind& dist);

// Eq.-style left shift: S(S^{-1}(p) / tau). p in {0,1} are fixed points.
double shift_pvalue(double p, double tau, const DistributionKind& dist);

// elementwise shift_pvalue(p_i, tau_i)
Eigen::VectorXd per_i_shifted(const Eigen::VectorXd& p, const ShiftProfile& profile,
                              const DistributionKind& dist);

// The calibration bound
//   H(u) = (1/d) [ sum_{tau_i >= tau} H_tau(u)
//                + sum_{tau_i < tau} H_{tau_i}( H_{tau/tau_i}(d u) / d ) ],
// defined for u in (0, 1/d].
double h_mixture(double u, const ShiftProfile& profile, double tau, const DistributionKind& dist);

// inverse of h_mixture by bisection on (0, 1/d]
double h_inverse(double target, const ShiftProfile& profile, double tau,
                 const DistributionKind& dist);

// GSBH: alpha_1 = H^{-1}(alpha/d) with H = h_mixture.
// SBH1: alpha_1 = Htilde^{-1}(alpha/d) with Htilde(u) = (1/d) sum_i H_{tau_i}(u).
CriticalConstants calibrate(double alpha, int d, const ShiftProfile& profile, double tau,
                            const DistributionKind& dist, CalibrationMethod method);

// scaled minorant used inside the FDR bound when tau_i < tau:
//   tilde_alpha * p / S((tau/tau_i) S^{-1}(tilde_alpha))
double minorant_pvalue(double p_self_shifted, double tau_i, double tau, double tilde_alpha,
                       const DistributionKind& dist);

} // namespace shiftfdr

#endif
