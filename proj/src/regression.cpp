#include "shiftfdr/regression.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "shiftfdr/dist.hpp"

namespace shiftfdr {

RegressionData RegressionData::standardized(Eigen::MatrixXd x, Eigen::VectorXd y,
                                            std::vector<std::string> names) {
    RegressionData data;
    data.n = static_cast<int>(x.rows());
    data.d = static_cast<int>(x.cols());
    if (data.n <= data.d)
        throw std::invalid_argument("RegressionData: requires n > d");
    if (y.size() != data.n)
        throw std::invalid_argument("RegressionData: response length mismatch");

    for (int j = 0; j < data.d; ++j) {
        const double norm = x.col(j).norm();
        if (!(norm > 0.0))
            throw std::invalid_argument("RegressionData: zero column");
        x.col(j) /= norm;
    }

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
    if (qr.rank() < data.d)
        throw std::runtime_error("RegressionData: design matrix is rank deficient");

    data.x = std::move(x);
    data.y = std::move(y);
    if (!names.empty() && static_cast<int>(names.size()) != data.d)
        throw std::invalid_argument("RegressionData: name count mismatch");
    data.names = std::move(names);
    return data;
}

OlsFit ols_fit(const RegressionData& data) {
    OlsFit fit;
    fit.a = data.x.transpose() * data.x;
    Eigen::LLT<Eigen::MatrixXd> llt(fit.a);
    if (llt.info() != Eigen::Success)
        throw std::runtime_error("ols_fit: X'X is not positive definite");
    fit.a_inv = llt.solve(Eigen::MatrixXd::Identity(data.d, data.d));
    fit.beta = llt.solve(data.x.transpose() * data.y);
    fit.nu = data.n - data.d;
    const double rss = data.y.squaredNorm() - fit.beta.dot(fit.a * fit.beta);
    fit.eta2_hat = std::max(0.0, rss) / fit.nu;
    return fit;
}

Eigen::VectorXd OlsFit::pvalues(bool known_variance) const {
    const int d = static_cast<int>(beta.size());
    Eigen::VectorXd p(d);
    if (known_variance) {
        for (int i = 0; i < d; ++i)
            p[i] = chi2_survival(beta[i] * beta[i] / a_inv(i, i), 1);
    } else {
        for (int i = 0; i < d; ++i)
            p[i] = scaledF_survival(beta[i] * beta[i] / (a_inv(i, i) * nu * eta2_hat), 1, nu);
    }
    return p;
}

CorrelationMatrix OlsFit::beta_correlation() const { return normalize_to_correlation(a_inv); }

CorrelationMatrix normalize_to_correlation(const Eigen::MatrixXd& cov) {
    const Eigen::VectorXd scale = cov.diagonal().cwiseSqrt().cwiseInverse();
    Eigen::MatrixXd corr = scale.asDiagonal() * cov * scale.asDiagonal();
    corr = ((corr + corr.transpose()) / 2.0).eval();
    corr.diagonal().setOnes();
    return CorrelationMatrix(std::move(corr));
}

KnockoffAugmentation construct_knockoffs(const RegressionData& data) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(data.x.transpose() * data.x,
                                                      Eigen::EigenvaluesOnly);
    const double lmin = es.eigenvalues().minCoeff();
    const double s = 0.999 * std::min(2.0 * lmin, 1.0);
    return construct_knockoffs(data, Eigen::VectorXd::Constant(data.d, s));
}

KnockoffAugmentation construct_knockoffs(const RegressionData& data, const Eigen::VectorXd& s) {
    const int n = data.n;
    const int d = data.d;
    if (n < 2 * d)
        throw std::invalid_argument("construct_knockoffs: requires n >= 2d");
    if (s.size() != d || (s.array() <= 0.0).any())
        throw std::invalid_argument("construct_knockoffs: s must be positive of length d");

    const Eigen::MatrixXd a = data.x.transpose() * data.x;
    Eigen::LLT<Eigen::MatrixXd> llt(a);
    if (llt.info() != Eigen::Success)
        throw std::runtime_error("construct_knockoffs: X'X is not positive definite");

    const Eigen::MatrixXd dmat = s.asDiagonal();
    const Eigen::MatrixXd gram = 2.0 * dmat - dmat * llt.solve(dmat);
    Eigen::LLT<Eigen::MatrixXd> gram_llt((gram + gram.transpose()) / 2.0);
    if (gram_llt.info() != Eigen::Success)
        throw std::runtime_error("construct_knockoffs: 2D - D A^-1 D is not positive definite");
    // C with C'C = 2D - D A^{-1} D
    const Eigen::MatrixXd c = Eigen::MatrixXd(gram_llt.matrixU());

    // orthonormal basis of the complement of col(X): trailing columns of the
    // full Q factor
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(data.x);
    const Eigen::MatrixXd q = qr.householderQ();
    const Eigen::MatrixXd u_tilde = q.middleCols(d, d);

    KnockoffAugmentation aug;
    aug.s = s;
    aug.x_tilde = data.x * llt.solve(a - dmat) + u_tilde * c;
    return aug;
}

FissionPair fission(const RegressionData& data, const KnockoffAugmentation& aug) {
    const int d = data.d;
    const Eigen::MatrixXd a = data.x.transpose() * data.x;
    const Eigen::MatrixXd dmat = aug.s.asDiagonal();
    const Eigen::MatrixXd two_a_minus_d = 2.0 * a - dmat;

    // algebraic independence certificate
    const Eigen::MatrixXd cross =
        (data.x + aug.x_tilde).transpose() * (data.x - aug.x_tilde);
    if (cross.norm() > 1e-8 * std::max(1.0, a.norm()))
        throw std::runtime_error("fission: (X+X~)'(X-X~) is not numerically zero");

    Eigen::LLT<Eigen::MatrixXd> llt(two_a_minus_d);
    if (llt.info() != Eigen::Success)
        throw std::runtime_error("fission: 2A - D is singular");

    FissionPair pair;
    pair.s = aug.s;
    pair.cov1_basis = llt.solve(Eigen::MatrixXd::Identity(d, d));
    pair.beta1 = llt.solve((data.x + aug.x_tilde).transpose() * data.y);
    pair.beta2 = ((data.x - aug.x_tilde).transpose() * data.y).cwiseQuotient(aug.s);

    const OlsFit fit = ols_fit(data);
    pair.eta2_hat = fit.eta2_hat;
    pair.nu = fit.nu;
    return pair;
}

PairedPValues paired_pvalues(const FissionPair& pair, bool known_variance,
                             bool p2_chisq_as_written) {
    const int d = static_cast<int>(pair.beta1.size());
    PairedPValues pp;
    pp.known_variance = known_variance;
    pp.nu = pair.nu;
    pp.p1.resize(d);
    pp.p2.resize(d);
    for (int i = 0; i < d; ++i) {
        const double q1 = pair.beta1[i] * pair.beta1[i] / (2.0 * pair.cov1_basis(i, i));
        const double q2 = pair.s[i] * pair.beta2[i] * pair.beta2[i] / 2.0;
        if (known_variance) {
            pp.p1[i] = chi2_survival(q1, 1);
            pp.p2[i] = chi2_survival(q2, 1);
        } else {
            const double scale = pair.nu * pair.eta2_hat;
            pp.p1[i] = scaledF_survival(q1 / scale, 1, pair.nu);
            pp.p2[i] = p2_chisq_as_written ? chi2_survival(q2 / scale, 1)
                                           : scaledF_survival(q2 / scale, 1, pair.nu);
        }
    }
    return pp;
}

namespace {

// screened combination: 1 where screen > cut, test value otherwise
Eigen::VectorXd screened(const Eigen::VectorXd& screen, const Eigen::VectorXd& test, double cut) {
    Eigen::VectorXd out(screen.size());
    for (int i = 0; i < screen.size(); ++i)
        out[i] = screen[i] > cut ? 1.0 : test[i];
    return out;
}

} // namespace

StepUpResult bbh(const PairedPValues& pp, double alpha) {
    const double root = std::sqrt(alpha);
    return bh(screened(pp.p1, pp.p2, root), root);
}

StepUpResult adapt_bbh(const PairedPValues& pp, double alpha, double lambda) {
    const double root = std::sqrt(alpha);
    const double pi0 = storey_pi0(pp.p2, lambda);
    return bh(screened(pp.p1, pi0 * pp.p2, root), root);
}

std::string sbbh_variant_name(SbbhVariant v) {
    switch (v) {
    case SbbhVariant::PerCoordinate:
        return "sbbh1";
    case SbbhVariant::LambdaMin:
        return "sbbh2";
    case SbbhVariant::Min:
        return "sbbh3";
    case SbbhVariant::Median:
        return "sbbh4";
    case SbbhVariant::HarmMean:
        return "sbbh5";
    }
    return "sbbh1";
}

StepUpResult sbbh(const PairedPValues& pp, double alpha, const Eigen::MatrixXd& cov1_basis,
                  SbbhVariant variant) {
    return sbbh_with_profile(pp, alpha, tau_profile(normalize_to_correlation(cov1_basis)),
                             variant);
}

StepUpResult sbbh_with_profile(const PairedPValues& pp, double alpha, const ShiftProfile& profile,
                               SbbhVariant variant) {
    const double root = std::sqrt(alpha);
    const DistributionKind dist =
        pp.known_variance ? DistributionKind::chisq1() : DistributionKind::scaled_f(pp.nu);

    Eigen::VectorXd shifted1;
    CriticalConstants cc;
    if (variant == SbbhVariant::PerCoordinate) {
        shifted1 = per_i_shifted(pp.p1, profile, dist);
        cc = calibrate(root, profile.d, profile, 1.0, dist, CalibrationMethod::SBH1);
    } else {
        TauRule rule = TauRule::LambdaMin;
        if (variant == SbbhVariant::Min)
            rule = TauRule::Min;
        else if (variant == SbbhVariant::Median)
            rule = TauRule::Median;
        else if (variant == SbbhVariant::HarmMean)
            rule = TauRule::HarmMean;
        const double tau = select_tau(profile, rule);
        shifted1.resize(pp.p1.size());
        for (int i = 0; i < pp.p1.size(); ++i)
            shifted1[i] = shift_pvalue(pp.p1[i], tau, dist);
        cc = calibrate(root, profile.d, profile, tau, dist, CalibrationMethod::GSBH);
    }
    return step_up(screened(pp.p2, shifted1, root), cc.alphas);
}

StepUpResult rev_bbh(const PairedPValues& pp, double alpha, bool mirrored) {
    const double root = std::sqrt(alpha);
    if (mirrored)
        return bh(screened(pp.p1, pp.p2, root), root);
    return bh(screened(pp.p2, pp.p1, root), root);
}

StepUpResult bby(const PairedPValues& pp, double alpha) {
    const double root = std::sqrt(alpha);
    return by(screened(pp.p1, pp.p2, root), root);
}

std::vector<int> knockoff_filter_from_w(const Eigen::VectorXd& w, double alpha, bool plus) {
    const int d = static_cast<int>(w.size());
    std::vector<double> candidates;
    candidates.reserve(d);
    for (int j = 0; j < d; ++j)
        candidates.push_back(std::fabs(w[j]));
    std::sort(candidates.begin(), candidates.end());

    const double offset = plus ? 1.0 : 0.0;
    for (double t : candidates) {
        int neg = 0, pos = 0;
        for (int j = 0; j < d; ++j) {
            if (w[j] <= -t)
                ++neg;
            if (w[j] >= t)
                ++pos;
        }
        if ((offset + neg) / std::max(pos, 1) <= alpha) {
            std::vector<int> selected;
            for (int j = 0; j < d; ++j)
                if (w[j] >= t)
                    selected.push_back(j);
            return selected;
        }
    }
    return {};
}

std::vector<int> knockoff_filter(const RegressionData& data, const KnockoffAugmentation& aug,
                                 double alpha, bool plus) {
    Eigen::VectorXd w(data.d);
    for (int j = 0; j < data.d; ++j)
        w[j] = std::fabs(data.x.col(j).dot(data.y)) - std::fabs(aug.x_tilde.col(j).dot(data.y));
    return knockoff_filter_from_w(w, alpha, plus);
}

} // namespace shiftfdr
