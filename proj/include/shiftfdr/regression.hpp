#ifndef SHIFTFDR_REGRESSION_HPP
#define SHIFTFDR_REGRESSION_HPP

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "shiftfdr/corr.hpp"
#include "shiftfdr/procedures.hpp"

namespace shiftfdr {

// Fixed design with unit-norm columns and full column rank.
struct RegressionData {
    Eigen::MatrixXd x;
    Eigen::VectorXd y;
    int n = 0;
    int d = 0;
    std::vector<std::string> names; // optional column labels

    static RegressionData standardized(Eigen::MatrixXd x, Eigen::VectorXd y,
                                       std::vector<std::string> names = {});
};

struct OlsFit {
    Eigen::VectorXd beta;
    double eta2_hat = 0.0;
    int nu = 0;
    Eigen::MatrixXd a;     // X'X
    Eigen::MatrixXd a_inv; // (X'X)^{-1}

    Eigen::VectorXd pvalues(bool known_variance) const;
    // correlation matrix of beta_hat, i.e. A^{-1} rescaled to unit diagonal
    CorrelationMatrix beta_correlation() const;
};

OlsFit ols_fit(const RegressionData& data);

// A^{-1}-style covariance basis rescaled to unit diagonal
CorrelationMatrix normalize_to_correlation(const Eigen::MatrixXd& cov);

// Fixed-design knockoffs: X~'X~ = A and X'X~ = A - D with D = diag(s).
struct KnockoffAugmentation {
    Eigen::MatrixXd x_tilde;
    Eigen::VectorXd s;
};

// equicorrelated rule s_j = 0.999 * min(2 lambda_min(A), 1)
KnockoffAugmentation construct_knockoffs(const RegressionData& data);
KnockoffAugmentation construct_knockoffs(const RegressionData& data, const Eigen::VectorXd& s);

// Independent split of the OLS estimator through the knockoff augmentation:
// beta1 = (2A-D)^{-1}(X+X~)'Y and beta2 = D^{-1}(X-X~)'Y.
struct FissionPair {
    Eigen::VectorXd beta1;
    Eigen::VectorXd beta2;
    Eigen::MatrixXd cov1_basis; // (2A-D)^{-1}
    Eigen::VectorXd s;
    double eta2_hat = 0.0;
    int nu = 0;
};

FissionPair fission(const RegressionData& data, const KnockoffAugmentation& aug);

struct PairedPValues {
    Eigen::VectorXd p1; // from beta1, internally dependent
    Eigen::VectorXd p2; // from beta2, internally independent
    bool known_variance = true;
    int nu = 0;
};

// p2_chisq_as_written: keep the chi-square reference for P^(2) in the
// estimated-variance mode instead of the matching scaled-F reference.
PairedPValues paired_pvalues(const FissionPair& pair, bool known_variance,
                             bool p2_chisq_as_written = false);

// Bonferroni-BH: screen on P^(1) at sqrt(alpha), BH on P^(2) at sqrt(alpha).
StepUpResult bbh(const PairedPValues& pp, double alpha);

// BBH with P^(2) rescaled by the Storey estimate from P^(2).
StepUpResult adapt_bbh(const PairedPValues& pp, double alpha, double lambda = 0.5);

enum class SbbhVariant {
    PerCoordinate, // SBBH1: each coordinate keeps its own tau_i
    LambdaMin,     // SBBH2
    Min,           // SBBH3
    Median,        // SBBH4
    HarmMean,      // SBBH5
};

std::string sbbh_variant_name(SbbhVariant v);

// Shifted BBH: screen on P^(2) at sqrt(alpha), step-up on shifted P^(1) with
// constants i * H^{-1}(sqrt(alpha)/d); the shift profile comes from (2A-D)^{-1}.
StepUpResult sbbh(const PairedPValues& pp, double alpha, const Eigen::MatrixXd& cov1_basis,
                  SbbhVariant variant);
StepUpResult sbbh_with_profile(const PairedPValues& pp, double alpha,
                               const ShiftProfile& profile, SbbhVariant variant);

// Screen on P^(2), BH on P^(1); mirrored swaps the two roles.
StepUpResult rev_bbh(const PairedPValues& pp, double alpha, bool mirrored = false);

// BBH screen with BY in place of BH.
StepUpResult bby(const PairedPValues& pp, double alpha);

// Knockoff filter with W_j = |X_j'Y| - |X~_j'Y| and the data-dependent
// threshold; plus selects the knockoff+ offset.
std::vector<int> knockoff_filter(const RegressionData& data, const KnockoffAugmentation& aug,
                                 double alpha, bool plus = false);
std::vector<int> knockoff_filter_from_w(const Eigen::VectorXd& w, double alpha, bool plus = false);

} // namespace shiftfdr

#endif
