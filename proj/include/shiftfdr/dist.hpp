#ifndef SHIFTFDR_DIST_HPP
#define SHIFTFDR_DIST_HPP

namespace shiftfdr {

// Null distribution of the squared marginal test statistic: chi-square with
// one degree of freedom (known scale) or F(1,nu)/nu (scale estimated with nu
// degrees of freedom).
struct DistributionKind {
    enum class Family { ChiSq1, ScaledF };

    Family family = Family::ChiSq1;
    int nu = 0; // denominator df, ScaledF only

    static DistributionKind chisq1() { return {Family::ChiSq1, 0}; }
    static DistributionKind scaled_f(int nu);

    bool operator==(const DistributionKind&) const = default;
};

// Pr(chi^2_m >= x)
double chi2_survival(double x, int m);

// inverse of chi2_survival in x: chi2_survival(result, m) == u
double chi2_quantile_upper(double u, int m);

// Pr(chi^2_m / chi^2_nu >= x) with independent numerator and denominator;
// for m = 1 this is Pr(F_{1,nu}/nu >= x), the null law of the squared t ratio
double scaledF_survival(double x, int m, int nu);

// inverse of scaledF_survival in x
double scaledF_quantile_upper(double u, int m, int nu);

// Pr(chi'^2_m(lambda) >= x), Poisson mixture of central chi-square tails
double noncentral_chi2_survival(double x, int m, double lambda);

// dispatch on the kind, with numerator df 1
double survival(const DistributionKind& dist, double x);
double quantile_upper(const DistributionKind& dist, double u);
double log_density(const DistributionKind& dist, double x);

} // namespace shiftfdr

#endif
