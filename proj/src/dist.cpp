#include "shiftfdr/dist.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace shiftfdr {

namespace {

constexpr double kEps = 1e-16;
constexpr double kFpMin = std::numeric_limits<double>::min() / 1e-16;

// lower regularized incomplete gamma P(a,x) by its power series; valid x < a+1
double gamma_p_series(double a, double x) {
    double ap = a;
    double del = 1.0 / a;
    double sum = del;
    for (int n = 0; n < 10000; ++n) {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if (std::fabs(del) < std::fabs(sum) * kEps)
            break;
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// upper regularized incomplete gamma Q(a,x) by continued fraction (modified
// Lentz); valid x >= a+1
double gamma_q_cf(double a, double x) {
    double b = x + 1.0 - a;
    double c = 1.0 / kFpMin;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i <= 10000; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < kFpMin)
            d = kFpMin;
        c = b + an / c;
        if (std::fabs(c) < kFpMin)
            c = kFpMin;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < kEps)
            break;
    }
    return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

double gamma_q(double a, double x) {
    if (x == 0.0)
        return 1.0;
    if (x < a + 1.0)
        return 1.0 - gamma_p_series(a, x);
    return gamma_q_cf(a, x);
}

// continued fraction for the incomplete beta function (Numerical Recipes form)
double beta_cf(double a, double b, double x) {
    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < kFpMin)
        d = kFpMin;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= 10000; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kFpMin)
            d = kFpMin;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kFpMin)
            c = kFpMin;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kFpMin)
            d = kFpMin;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kFpMin)
            c = kFpMin;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < kEps)
            break;
    }
    return h;
}

// regularized incomplete beta I_x(a,b)
double beta_inc(double a, double b, double x) {
    if (x <= 0.0)
        return 0.0;
    if (x >= 1.0)
        return 1.0;
    const double front = std::exp(std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                                  a * std::log(x) + b * std::log1p(-x));
    if (x < (a + 1.0) / (a + b + 2.0))
        return front * beta_cf(a, b, x) / a;
    return 1.0 - front * beta_cf(b, a, 1.0 - x) / b;
}

double chi2_log_density(double x, int m) {
    const double a = 0.5 * m;
    return (a - 1.0) * std::log(x) - 0.5 * x - std::lgamma(a) - a * std::log(2.0);
}

// density of the chi-square ratio at x, written through z = 1/(1 + x)
double scaledF_log_density(double x, int m, int nu) {
    const double a = 0.5 * nu;
    const double b = 0.5 * m;
    const double log_z = -std::log1p(x);
    const double log_1mz = std::log(x) + log_z;
    const double log_beta = std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
    return (a + 1.0) * log_z + (b - 1.0) * log_1mz - log_beta;
}

// Solves survival(x) = u for a strictly decreasing survival function with
// log-density log_pdf, by bracketed Newton with bisection safeguard. The
// initial bracket [0, 1e3] is widened geometrically when needed.
template <class S, class LogPdf>
double invert_survival(S survival_fn, LogPdf log_pdf, double u) {
    double lo = 0.0;
    double hi = 1e3;
    for (int i = 0; i < 200 && survival_fn(hi) > u; ++i) {
        lo = hi;
        hi *= 2.0;
    }
    if (survival_fn(hi) > u)
        throw std::domain_error("invert_survival: failed to bracket root");

    double x = 0.5 * (lo + hi);
    for (int it = 0; it < 200; ++it) {
        const double f = survival_fn(x) - u;
        if (std::fabs(f) <= 1e-13 * u + 1e-15)
            return x;
        if (f > 0.0)
            lo = x;
        else
            hi = x;
        // Newton step on S(x) - u; S' = -pdf
        const double step = f * std::exp(-log_pdf(x));
        double next = x + step;
        if (!(next > lo && next < hi))
            next = 0.5 * (lo + hi);
        if (next == x)
            break;
        x = next;
    }
    return x;
}

} // namespace

DistributionKind DistributionKind::scaled_f(int nu) {
    if (nu < 1)
        throw std::domain_error("DistributionKind: nu must be a positive integer");
    return {Family::ScaledF, nu};
}

double chi2_survival(double x, int m) {
    if (x < 0.0)
        throw std::domain_error("chi2_survival: x must be nonnegative");
    if (m < 1)
        throw std::domain_error("chi2_survival: df must be a positive integer");
    return gamma_q(0.5 * m, 0.5 * x);
}

double chi2_quantile_upper(double u, int m) {
    if (!(u > 0.0 && u < 1.0))
        throw std::domain_error("chi2_quantile_upper: u must lie in (0,1)");
    if (m < 1)
        throw std::domain_error("chi2_quantile_upper: df must be a positive integer");
    return invert_survival([m](double x) { return chi2_survival(x, m); },
                           [m](double x) { return chi2_log_density(x, m); }, u);
}

double scaledF_survival(double x, int m, int nu) {
    if (x < 0.0)
        throw std::domain_error("scaledF_survival: x must be nonnegative");
    if (m < 1 || nu < 1)
        throw std::domain_error("scaledF_survival: df must be positive integers");
    return beta_inc(0.5 * nu, 0.5 * m, 1.0 / (1.0 + x));
}

double scaledF_quantile_upper(double u, int m, int nu) {
    if (!(u > 0.0 && u < 1.0))
        throw std::domain_error("scaledF_quantile_upper: u must lie in (0,1)");
    if (m < 1 || nu < 1)
        throw std::domain_error("scaledF_quantile_upper: df must be positive integers");
    return invert_survival([m, nu](double x) { return scaledF_survival(x, m, nu); },
                           [m, nu](double x) { return scaledF_log_density(x, m, nu); }, u);
}

double noncentral_chi2_survival(double x, int m, double lambda) {
    if (x < 0.0)
        throw std::domain_error("noncentral_chi2_survival: x must be nonnegative");
    if (m < 1)
        throw std::domain_error("noncentral_chi2_survival: df must be a positive integer");
    if (lambda < 0.0)
        throw std::domain_error("noncentral_chi2_survival: lambda must be nonnegative");
    if (lambda == 0.0)
        return chi2_survival(x, m);
    if (x == 0.0)
        return 1.0;

    const double half = 0.5 * lambda;
    const long mode = static_cast<long>(half);

    // Poisson(lambda/2) mixture over chi-square tails, accumulated outward
    // from the mode so extreme lambda cannot underflow the leading weights.
    double sum = 0.0;
    double mass = 0.0;
    long terms = 0;

    double w_up = std::exp(-half + mode * std::log(half) - std::lgamma(mode + 1.0));
    long j_up = mode;
    long j_down = mode - 1;
    double w_down = j_down >= 0 ? w_up * static_cast<double>(mode) / half : 0.0;

    while (terms < 10000 && 1.0 - mass >= 1e-14) {
        sum += w_up * gamma_q(0.5 * m + j_up, 0.5 * x);
        mass += w_up;
        ++terms;
        ++j_up;
        w_up *= half / static_cast<double>(j_up);

        if (j_down >= 0 && terms < 10000 && 1.0 - mass >= 1e-14) {
            sum += w_down * gamma_q(0.5 * m + j_down, 0.5 * x);
            mass += w_down;
            ++terms;
            if (j_down > 0)
                w_down *= static_cast<double>(j_down) / half;
            --j_down;
        }
    }
    return std::min(1.0, std::max(0.0, sum));
}

double survival(const DistributionKind& dist, double x) {
    if (dist.family == DistributionKind::Family::ChiSq1)
        return chi2_survival(x, 1);
    return scaledF_survival(x, 1, dist.nu);
}

double quantile_upper(const DistributionKind& dist, double u) {
    if (dist.family == DistributionKind::Family::ChiSq1)
        return chi2_quantile_upper(u, 1);
    return scaledF_quantile_upper(u, 1, dist.nu);
}

double log_density(const DistributionKind& dist, double x) {
    if (dist.family == DistributionKind::Family::ChiSq1)
        return chi2_log_density(x, 1);
    return scaledF_log_density(x, 1, dist.nu);
}

} // namespace shiftfdr
