#ifndef SHIFTFDR_HARNESS_HPP
#define SHIFTFDR_HARNESS_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "shiftfdr/corr.hpp"
#include "shiftfdr/procedures.hpp"

namespace shiftfdr {

enum class Scenario { Means, VarSel, Knockoff };
enum class Regime { FixedNull, FixedSignal };

std::string scenario_name(Scenario s);
Scenario scenario_from_name(const std::string& name);
std::string regime_name(Regime r);
Regime regime_from_name(const std::string& name);

struct ExperimentConfig {
    Scenario scenario = Scenario::Means;
    int d = 40;
    int n = 100; // varsel/knockoff only
    StructureSpec structure = StructureSpec::equi(40, 0.0);
    Regime regime = Regime::FixedNull;
    std::vector<double> mu = {1, 2, 3, 4, 5};
    std::vector<double> null_frac = {0.75};
    int k = -1; // explicit signal-count override (FixedNull only)
    std::vector<std::string> procedures;
    std::vector<double> alphas = {0.05};
    int replications = 500;
    std::uint64_t master_seed = 1;
    bool known_variance = true;
    int nu = -1; // means scenario, estimated-variance df; -1 = 2d
    bool random_sign = false;
    bool resample_structure = false;
    double sbh2_fraction = 0.9;
    double storey_lambda = 0.5;
    bool p2_chisq_as_written = false;
    bool mirror_rev_bbh = false;
    int threads = 1;

    void validate() const; // throws std::invalid_argument naming the field
};

struct CellRecord {
    std::string scenario;
    std::string procedure;
    std::string structure;
    double rho = 0.0;
    int d = 0;
    int n = 0;
    double mu = 0.0;
    double null_frac = 0.0;
    double alpha = 0.0;
    double fdr_hat = 0.0;
    double fdr_se = 0.0;
    double power_hat = 0.0;
    double power_se = 0.0;
    double mean_rejections = 0.0;
    int replications = 0;
    std::uint64_t seed = 0;
    bool low_confidence = false;
};

struct ExperimentSummary {
    std::vector<CellRecord> cells;
};

struct CellStats {
    double fdr_hat = 0.0;
    double fdr_se = 0.0;
    double power_hat = 0.0;
    double power_se = 0.0;
    double mean_rejections = 0.0;
    bool low_confidence = false;
};

// sample means and standard errors over per-replication records
CellStats estimate_cell(const std::vector<double>& fdp, const std::vector<double>& power,
                        const std::vector<double>& rejections);

ExperimentSummary run_means(const ExperimentConfig& config);
ExperimentSummary run_varsel(const ExperimentConfig& config);
ExperimentSummary run_knockoff(const ExperimentConfig& config);
ExperimentSummary run_experiment(const ExperimentConfig& config);

// Monte Carlo check of the calibration bound: all-null empirical FDR against
// the sum of the marginal closed forms at tilde_alpha/d.
struct Lemma1Diagnostic {
    double empirical_fdr = 0.0;
    double empirical_se = 0.0;
    double theoretical_bound = 0.0;
    bool within_band = false; // empirical <= bound + 3 se
};

Lemma1Diagnostic lemma1_oracle(const StructureSpec& structure, const std::string& procedure,
                               double alpha, int reps, std::uint64_t seed);

const std::vector<std::string>& knockoff_catalog_names();
const std::vector<std::string>& mean_catalog_names();

} // namespace shiftfdr

#endif
