#include "shiftfdr/procedures.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace shiftfdr {

StepUpResult step_up(const Eigen::VectorXd& values, const Eigen::VectorXd& constants) {
    const int d = static_cast<int>(values.size());
    if (constants.size() != d)
        throw std::invalid_argument("step_up: values/constants length mismatch");
    for (int i = 1; i < d; ++i)
        if (constants[i] < constants[i - 1])
            throw std::invalid_argument("step_up: constants must be nondecreasing");

    std::vector<int> order(d);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return values[a] < values[b]; });

    int r = 0;
    for (int i = d; i >= 1; --i) {
        if (values[order[i - 1]] <= constants[i - 1]) {
            r = i;
            break;
        }
    }

    StepUpResult res;
    res.R = r;
    if (r > 0) {
        res.threshold = values[order[r - 1]];
        res.rejected.assign(order.begin(), order.begin() + r);
        std::sort(res.rejected.begin(), res.rejected.end());
    }
    return res;
}

StepUpResult bh(const Eigen::VectorXd& p, double alpha) {
    const int d = static_cast<int>(p.size());
    Eigen::VectorXd constants(d);
    for (int i = 0; i < d; ++i)
        constants[i] = (i + 1) * alpha / d;
    return step_up(p, constants);
}

StepUpResult by(const Eigen::VectorXd& p, double alpha) {
    const int d = static_cast<int>(p.size());
    double harmonic = 0.0;
    for (int j = 1; j <= d; ++j)
        harmonic += 1.0 / j;
    Eigen::VectorXd constants(d);
    for (int i = 0; i < d; ++i)
        constants[i] = (i + 1) * alpha / (d * harmonic);
    return step_up(p, constants);
}

double storey_pi0(const Eigen::VectorXd& p, double lambda) {
    if (!(lambda > 0.0 && lambda < 1.0))
        throw std::domain_error("storey_pi0: lambda must lie in (0,1)");
    const int d = static_cast<int>(p.size());
    int count = 0;
    for (int i = 0; i < d; ++i)
        if (p[i] > lambda)
            ++count;
    return std::min(1.0, (1.0 + count) / (d * (1.0 - lambda)));
}

std::string procedure_name(ProcedureId id) {
    switch (id) {
    case ProcedureId::BH:
        return "bh";
    case ProcedureId::BY:
        return "by";
    case ProcedureId::GSBH1:
        return "gsbh1";
    case ProcedureId::GSBH2:
        return "gsbh2";
    case ProcedureId::GSBH3:
        return "gsbh3";
    case ProcedureId::GSBH4:
        return "gsbh4";
    case ProcedureId::GSBH5:
        return "gsbh5";
    case ProcedureId::GSBH6:
        return "gsbh6";
    case ProcedureId::SBH1:
        return "sbh1";
    case ProcedureId::SBH2Orig:
        return "sbh2";
    case ProcedureId::SBH2New:
        return "sbh2new";
    }
    return "bh";
}

ProcedureId procedure_from_name(const std::string& name) {
    for (ProcedureId id : mean_test_catalog())
        if (procedure_name(id) == name)
            return id;
    throw std::invalid_argument("unknown procedure: " + name);
}

const std::vector<ProcedureId>& mean_test_catalog() {
    static const std::vector<ProcedureId> catalog = {
        ProcedureId::BH,    ProcedureId::BY,    ProcedureId::GSBH1,    ProcedureId::GSBH2,
        ProcedureId::GSBH3, ProcedureId::GSBH4, ProcedureId::GSBH5,    ProcedureId::GSBH6,
        ProcedureId::SBH1,  ProcedureId::SBH2Orig, ProcedureId::SBH2New};
    return catalog;
}

TauRule gsbh_tau_rule(ProcedureId id) {
    switch (id) {
    case ProcedureId::GSBH1:
        return TauRule::Min;
    case ProcedureId::GSBH2:
        return TauRule::Max;
    case ProcedureId::GSBH3:
        return TauRule::Median;
    case ProcedureId::GSBH4:
        return TauRule::ArithMean;
    case ProcedureId::GSBH5:
        return TauRule::GeoMean;
    case ProcedureId::GSBH6:
        return TauRule::HarmMean;
    case ProcedureId::SBH2Orig:
        return TauRule::LambdaMinFraction;
    case ProcedureId::SBH2New:
        return TauRule::LambdaMin;
    default:
        throw std::invalid_argument("procedure has no global tau rule");
    }
}

TestSetting TestSetting::estimated(double v, int nu) {
    if (!(v > 0.0))
        throw std::domain_error("TestSetting: scale statistic V must be positive");
    if (nu < 1)
        throw std::domain_error("TestSetting: nu must be a positive integer");
    return {false, v, nu};
}

DistributionKind TestSetting::dist() const {
    return known_variance ? DistributionKind::chisq1() : DistributionKind::scaled_f(nu);
}

Eigen::VectorXd raw_pvalues(const Eigen::VectorXd& x, const TestSetting& setting) {
    const DistributionKind dist = setting.dist();
    Eigen::VectorXd p(x.size());
    for (int i = 0; i < x.size(); ++i)
        p[i] = survival(dist, setting.squared_stat(x[i]));
    return p;
}

MeanTestPlan::MeanTestPlan(ProcedureId id, const ShiftProfile& profile, double alpha,
                           const DistributionKind& dist, double sbh2_fraction)
    : id_(id), dist_(dist) {
    const int d = profile.d;
    switch (id) {
    case ProcedureId::BH: {
        tau_ = 1.0;
        constants_.alpha_target = alpha;
        constants_.tilde_alpha = alpha;
        constants_.alphas.resize(d);
        for (int i = 0; i < d; ++i)
            constants_.alphas[i] = (i + 1) * alpha / d;
        break;
    }
    case ProcedureId::BY: {
        tau_ = 1.0;
        double harmonic = 0.0;
        for (int j = 1; j <= d; ++j)
            harmonic += 1.0 / j;
        constants_.alpha_target = alpha;
        constants_.tilde_alpha = alpha / harmonic;
        constants_.alphas.resize(d);
        for (int i = 0; i < d; ++i)
            constants_.alphas[i] = (i + 1) * alpha / (d * harmonic);
        break;
    }
    case ProcedureId::SBH1: {
        tau_per_i_ = profile.tau;
        constants_ = calibrate(alpha, d, profile, 1.0, dist, CalibrationMethod::SBH1);
        break;
    }
    default: {
        tau_ = select_tau(profile, gsbh_tau_rule(id), sbh2_fraction);
        constants_ = calibrate(alpha, d, profile, tau_, dist, CalibrationMethod::GSBH);
        break;
    }
    }
}

Eigen::VectorXd MeanTestPlan::shifted_from_stats(const Eigen::VectorXd& x,
                                                 const TestSetting& setting) const {
    if (setting.dist() != dist_)
        throw std::invalid_argument("MeanTestPlan: setting does not match calibration");
    Eigen::VectorXd out(x.size());
    if (tau_per_i_.size() > 0) {
        for (int i = 0; i < x.size(); ++i)
            out[i] = survival(dist_, setting.squared_stat(x[i]) / tau_per_i_[i]);
    } else if (tau_ == 1.0) {
        for (int i = 0; i < x.size(); ++i)
            out[i] = survival(dist_, setting.squared_stat(x[i]));
    } else {
        for (int i = 0; i < x.size(); ++i)
            out[i] = survival(dist_, setting.squared_stat(x[i]) / tau_);
    }
    return out;
}

StepUpResult MeanTestPlan::run_stats(const Eigen::VectorXd& x, const TestSetting& setting) const {
    return step_up(shifted_from_stats(x, setting), constants_.alphas);
}

StepUpResult MeanTestPlan::run_pvalues(const Eigen::VectorXd& p) const {
    Eigen::VectorXd shifted(p.size());
    if (tau_per_i_.size() > 0) {
        for (int i = 0; i < p.size(); ++i)
            shifted[i] = shift_pvalue(p[i], tau_per_i_[i], dist_);
    } else {
        for (int i = 0; i < p.size(); ++i)
            shifted[i] = shift_pvalue(p[i], tau_, dist_);
    }
    return step_up(shifted, constants_.alphas);
}

StepUpResult gsbh(const Eigen::VectorXd& x, const CorrelationMatrix& sigma, double alpha,
                  TauRule rule, const TestSetting& setting) {
    const ShiftProfile profile = tau_profile(sigma);
    ProcedureId id = ProcedureId::GSBH1;
    switch (rule) {
    case TauRule::Min:
        id = ProcedureId::GSBH1;
        break;
    case TauRule::Max:
        id = ProcedureId::GSBH2;
        break;
    case TauRule::Median:
        id = ProcedureId::GSBH3;
        break;
    case TauRule::ArithMean:
        id = ProcedureId::GSBH4;
        break;
    case TauRule::GeoMean:
        id = ProcedureId::GSBH5;
        break;
    case TauRule::HarmMean:
        id = ProcedureId::GSBH6;
        break;
    case TauRule::LambdaMin:
        id = ProcedureId::SBH2New;
        break;
    case TauRule::LambdaMinFraction:
        id = ProcedureId::SBH2Orig;
        break;
    }
    return MeanTestPlan(id, profile, alpha, setting.dist()).run_stats(x, setting);
}

StepUpResult sbh1(const Eigen::VectorXd& x, const CorrelationMatrix& sigma, double alpha,
                  const TestSetting& setting) {
    const ShiftProfile profile = tau_profile(sigma);
    return MeanTestPlan(ProcedureId::SBH1, profile, alpha, setting.dist()).run_stats(x, setting);
}

StepUpResult sbh2(const Eigen::VectorXd& x, const CorrelationMatrix& sigma, double alpha,
                  bool original, const TestSetting& setting, double fraction) {
    const ShiftProfile profile = tau_profile(sigma);
    return MeanTestPlan(original ? ProcedureId::SBH2Orig : ProcedureId::SBH2New, profile, alpha,
                        setting.dist(), fraction)
        .run_stats(x, setting);
}

} // namespace shiftfdr
