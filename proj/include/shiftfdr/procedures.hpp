#ifndef SHIFTFDR_PROCEDURES_HPP
#define SHIFTFDR_PROCEDURES_HPP

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "shiftfdr/corr.hpp"
#include "shiftfdr/shift.hpp"

namespace shiftfdr {

struct StepUpResult {
    int R = 0;
    std::vector<int> rejected; // original indices, ascending
    double threshold = 0.0;    // realized cutoff: value_(R), or 0 when R = 0
};

// Exact step-up semantics: R = max{ i : value_(i) <= alpha_i }, reject all
// indices with value <= value_(R).
StepUpResult step_up(const Eigen::VectorXd& values, const Eigen::VectorXd& constants);

StepUpResult bh(const Eigen::VectorXd& p, double alpha);
StepUpResult by(const Eigen::VectorXd& p, double alpha);

// min(1, (1 + #{p_i > lambda}) / (d (1 - lambda)))
double storey_pi0(const Eigen::VectorXd& p, double lambda = 0.5);

enum class ProcedureId {
    BH,
    BY,
    GSBH1, // tau = min tau_i
    GSBH2, // tau = max tau_i
    GSBH3, // tau = median
    GSBH4, // tau = arithmetic mean
    GSBH5, // tau = geometric mean
    GSBH6, // tau = harmonic mean
    SBH1,  // per-coordinate shifts
    SBH2Orig, // tau = c * lambda_min
    SBH2New,  // tau = lambda_min
};

std::string procedure_name(ProcedureId id);
ProcedureId procedure_from_name(const std::string& name);
const std::vector<ProcedureId>& mean_test_catalog();
TauRule gsbh_tau_rule(ProcedureId id);

// Marginal test layout, Settings 1 and 2: the squared statistic is x^2 under
// a known scale, or x^2/V with V the independent chi-square scale estimate.
struct TestSetting {
    bool known_variance = true;
    double v = 0.0;
    int nu = 0;

    static TestSetting known() { return {true, 0.0, 0}; }
    static TestSetting estimated(double v, int nu);

    DistributionKind dist() const;
    double squared_stat(double x) const { return known_variance ? x * x : x * x / v; }
};

Eigen::VectorXd raw_pvalues(const Eigen::VectorXd& x, const TestSetting& setting);

// A procedure calibrated once against a shift profile; immutable afterwards,
// safe to share across replication workers.
class MeanTestPlan {
  public:
    MeanTestPlan(ProcedureId id, const ShiftProfile& profile, double alpha,
                 const DistributionKind& dist, double sbh2_fraction = 0.9);

    StepUpResult run_stats(const Eigen::VectorXd& x, const TestSetting& setting) const;
    StepUpResult run_pvalues(const Eigen::VectorXd& p) const;

    // shifted values as tested by run_stats
    Eigen::VectorXd shifted_from_stats(const Eigen::VectorXd& x, const TestSetting& setting) const;

    ProcedureId id() const { return id_; }
    const CriticalConstants& constants() const { return constants_; }
    double tau() const { return tau_; }
    const Eigen::VectorXd& tau_per_coordinate() const { return tau_per_i_; }

  private:
    ProcedureId id_;
    DistributionKind dist_;
    Eigen::VectorXd tau_per_i_; // SBH1 only
    double tau_ = 1.0;          // global shift, 1 for BH/BY
    CriticalConstants constants_;
};

// Convenience single-shot entry points over raw observations.
StepUpResult gsbh(const Eigen::VectorXd& x, const CorrelationMatrix& sigma, double alpha,
                  TauRule rule, const TestSetting& setting);
StepUpResult sbh1(const Eigen::VectorXd& x, const CorrelationMatrix& sigma, double alpha,
                  const TestSetting& setting);
StepUpResult sbh2(const Eigen::VectorXd& x, const CorrelationMatrix& sigma, double alpha,
                  bool original, const TestSetting& setting, double fraction = 0.9);

} // namespace shiftfdr

#endif
