#include "shiftfdr/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <functional>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <thread>

#include "shiftfdr/regression.hpp"

namespace shiftfdr {

namespace {

constexpr std::uint64_t kRepTag = 0x526570;    // replication streams
constexpr std::uint64_t kStructTag = 0x537472; // randomized-structure seeds

void parallel_for(int count, int threads, const std::function<void(int)>& fn) {
    threads = std::max(1, std::min(threads, count));
    if (threads == 1) {
        for (int i = 0; i < count; ++i)
            fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr err;
    std::mutex err_mutex;
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (int t = 0; t < threads; ++t) {
        pool.emplace_back([&] {
            while (true) {
                const int i = next.fetch_add(1);
                if (i >= count)
                    return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(err_mutex);
                    if (!err)
                        err = std::current_exception();
                    return;
                }
            }
        });
    }
    for (auto& th : pool)
        th.join();
    if (err)
        std::rethrow_exception(err);
}

struct Outcome {
    double fdp = 0.0;
    double power = 0.0;
    double rej = 0.0;
};

Outcome score(const std::vector<int>& rejected, const std::vector<char>& is_signal, int k) {
    int v = 0;
    int tp = 0;
    for (int idx : rejected)
        is_signal[idx] ? ++tp : ++v;
    const int r = static_cast<int>(rejected.size());
    Outcome o;
    o.rej = r;
    o.fdp = r > 0 ? static_cast<double>(v) / r : 0.0; // 0/0 = 0
    o.power = k > 0 ? static_cast<double>(tp) / k : 0.0;
    return o;
}

// k signal coordinates drawn uniformly at random; signals get mean +mu, or a
// random sign when requested
std::vector<char> place_signals(int d, int k, double mu_value, bool random_sign, RngStream& rng,
                                Eigen::VectorXd& mu_out) {
    std::vector<int> idx(d);
    for (int i = 0; i < d; ++i)
        idx[i] = i;
    for (int i = 0; i < k; ++i)
        std::swap(idx[i], idx[i + static_cast<int>(rng.below(d - i))]);

    std::vector<char> is_signal(d, 0);
    mu_out = Eigen::VectorXd::Zero(d);
    for (int i = 0; i < k; ++i) {
        is_signal[idx[i]] = 1;
        double v = mu_value;
        if (random_sign && rng.uniform() < 0.5)
            v = -v;
        mu_out[idx[i]] = v;
    }
    return is_signal;
}

struct GridPoint {
    double mu = 0.0;
    double null_frac = 0.0;
    int k = 0;
};

std::vector<GridPoint> build_grid(const ExperimentConfig& config) {
    std::vector<GridPoint> grid;
    if (config.regime == Regime::FixedNull) {
        const double nf = config.null_frac[0];
        const int k = config.k >= 0
                          ? config.k
                          : static_cast<int>(std::lround((1.0 - nf) * config.d));
        for (double m : config.mu)
            grid.push_back({m, nf, k});
    } else {
        const double m = config.mu[0];
        for (double nf : config.null_frac) {
            const int k = static_cast<int>(std::lround((1.0 - nf) * config.d));
            grid.push_back({m, nf, k});
        }
    }
    return grid;
}

bool structure_needs_seed(const StructureSpec& spec) {
    return spec.kind == StructureSpec::Kind::Sparse ||
           spec.kind == StructureSpec::Kind::Prefixed;
}

StructureSpec resolved_structure(const ExperimentConfig& config) {
    StructureSpec spec = config.structure;
    spec.d = config.d;
    if (structure_needs_seed(spec) && spec.seed == 0)
        spec.seed = mix64(config.master_seed, kStructTag);
    return spec;
}

CellRecord make_record(const ExperimentConfig& config, const GridPoint& g, double alpha,
                       const std::string& procedure, const CellStats& stats) {
    CellRecord rec;
    rec.scenario = scenario_name(config.scenario);
    rec.procedure = procedure;
    rec.structure = config.structure.name();
    rec.rho = config.structure.rho;
    rec.d = config.d;
    rec.n = config.scenario == Scenario::Means ? 0 : config.n;
    rec.mu = g.mu;
    rec.null_frac = g.null_frac;
    rec.alpha = alpha;
    rec.fdr_hat = stats.fdr_hat;
    rec.fdr_se = stats.fdr_se;
    rec.power_hat = stats.power_hat;
    rec.power_se = stats.power_se;
    rec.mean_rejections = stats.mean_rejections;
    rec.replications = config.replications;
    rec.seed = config.master_seed;
    rec.low_confidence = stats.low_confidence;
    return rec;
}

// outcomes indexed [alpha][procedure][replication]
using OutcomeGrid = std::vector<std::vector<std::vector<Outcome>>>;

OutcomeGrid make_outcome_grid(std::size_t n_alpha, std::size_t n_proc, std::size_t reps) {
    return OutcomeGrid(n_alpha,
                       std::vector<std::vector<Outcome>>(n_proc, std::vector<Outcome>(reps)));
}

void append_cells(ExperimentSummary& summary, const ExperimentConfig& config, const GridPoint& g,
                  const std::vector<std::string>& proc_names, const OutcomeGrid& outcomes) {
    for (std::size_t ai = 0; ai < config.alphas.size(); ++ai) {
        for (std::size_t pi = 0; pi < proc_names.size(); ++pi) {
            const auto& recs = outcomes[ai][pi];
            std::vector<double> fdp(recs.size()), power(recs.size()), rej(recs.size());
            for (std::size_t r = 0; r < recs.size(); ++r) {
                fdp[r] = recs[r].fdp;
                power[r] = recs[r].power;
                rej[r] = recs[r].rej;
            }
            summary.cells.push_back(make_record(config, g, config.alphas[ai], proc_names[pi],
                                                estimate_cell(fdp, power, rej)));
        }
    }
}

std::vector<ProcedureId> resolve_mean_procedures(const std::vector<std::string>& names) {
    std::vector<ProcedureId> ids;
    ids.reserve(names.size());
    for (const auto& name : names)
        ids.push_back(procedure_from_name(name));
    return ids;
}

[[noreturn]] void rethrow_with_cell(const ExperimentConfig& config, const GridPoint& g,
                                    const std::exception& e) {
    char buf[128];
    std::snprintf(buf, sizeof(buf), " mu=%g null_frac=%g", g.mu, g.null_frac);
    throw std::runtime_error("cell structure=" + config.structure.name() + buf + ": " + e.what());
}

void run_cell(const ExperimentConfig& config, const GridPoint& g,
              const std::function<void(int)>& fn) {
    try {
        parallel_for(config.replications, config.threads, fn);
    } catch (const std::exception& e) {
        rethrow_with_cell(config, g, e);
    }
}

} // namespace

std::string scenario_name(Scenario s) {
    switch (s) {
    case Scenario::Means:
        return "means";
    case Scenario::VarSel:
        return "varsel";
    case Scenario::Knockoff:
        return "knockoff";
    }
    return "means";
}

Scenario scenario_from_name(const std::string& name) {
    if (name == "means")
        return Scenario::Means;
    if (name == "varsel")
        return Scenario::VarSel;
    if (name == "knockoff")
        return Scenario::Knockoff;
    throw std::invalid_argument("unknown scenario: " + name);
}

std::string regime_name(Regime r) {
    return r == Regime::FixedNull ? "fixed_null" : "fixed_signal";
}

Regime regime_from_name(const std::string& name) {
    if (name == "fixed_null")
        return Regime::FixedNull;
    if (name == "fixed_signal")
        return Regime::FixedSignal;
    throw std::invalid_argument("unknown regime: " + name);
}

const std::vector<std::string>& mean_catalog_names() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> out;
        for (ProcedureId id : mean_test_catalog())
            out.push_back(procedure_name(id));
        return out;
    }();
    return names;
}

const std::vector<std::string>& knockoff_catalog_names() {
    static const std::vector<std::string> names = {
        "bh2",   "bbh",   "adaptbbh", "sbbh1", "sbbh2", "sbbh3",
        "sbbh4", "sbbh5", "knockoff", "revbbh", "bby"};
    return names;
}

void ExperimentConfig::validate() const {
    if (d < 2)
        throw std::invalid_argument("config field d: must be at least 2");
    if (replications < 1)
        throw std::invalid_argument("config field reps: must be at least 1");
    if (threads < 1)
        throw std::invalid_argument("config field threads: must be at least 1");
    if (alphas.empty())
        throw std::invalid_argument("config field alpha: at least one level required");
    for (double a : alphas)
        if (!(a > 0.0 && a < 1.0))
            throw std::invalid_argument("config field alpha: levels must lie in (0,1)");
    if (mu.empty())
        throw std::invalid_argument("config field mu: at least one value required");
    for (double m : mu)
        if (m < 0.0)
            throw std::invalid_argument("config field mu: values must be nonnegative");
    if (null_frac.empty())
        throw std::invalid_argument("config field null_frac: at least one value required");
    for (double nf : null_frac)
        if (!(nf > 0.0 && nf <= 1.0))
            throw std::invalid_argument("config field null_frac: values must lie in (0,1]");
    if (regime == Regime::FixedNull && null_frac.size() != 1)
        throw std::invalid_argument("config field null_frac: fixed_null regime takes one value");
    if (regime == Regime::FixedSignal && mu.size() != 1)
        throw std::invalid_argument("config field mu: fixed_signal regime takes one value");
    if (k >= 0 && regime != Regime::FixedNull)
        throw std::invalid_argument("config field k: override applies to fixed_null only");
    if (k > d)
        throw std::invalid_argument("config field k: cannot exceed d");
    if (regime == Regime::FixedSignal) {
        for (double nf : null_frac)
            if (std::lround((1.0 - nf) * d) < 1)
                throw std::invalid_argument(
                    "config field null_frac: fixed_signal regime needs at least one signal");
    }
    if (!(sbh2_fraction > 0.0 && sbh2_fraction < 1.0))
        throw std::invalid_argument("config field sbh2_fraction: must lie in (0,1)");
    if (!(storey_lambda > 0.0 && storey_lambda < 1.0))
        throw std::invalid_argument("config field storey_lambda: must lie in (0,1)");
    if (nu != -1 && nu < 1)
        throw std::invalid_argument("config field nu: must be a positive integer");

    if (scenario != Scenario::Means) {
        if (n <= d)
            throw std::invalid_argument("config field n: must exceed d");
        if (scenario == Scenario::Knockoff && n < 2 * d)
            throw std::invalid_argument("config field n: knockoff scenario needs n >= 2d");
    }

    const auto& known = scenario == Scenario::Knockoff ? knockoff_catalog_names()
                                                       : mean_catalog_names();
    for (const auto& name : procedures) {
        if (std::find(known.begin(), known.end(), name) == known.end() &&
            !(scenario == Scenario::Knockoff && name == "knockoff_plus"))
            throw std::invalid_argument("config field procedures: unknown procedure '" + name +
                                        "'");
    }
}

CellStats estimate_cell(const std::vector<double>& fdp, const std::vector<double>& power,
                        const std::vector<double>& rejections) {
    const std::size_t r = fdp.size();
    if (r == 0 || power.size() != r || rejections.size() != r)
        throw std::invalid_argument("estimate_cell: per-replication records misaligned");

    const auto mean = [](const std::vector<double>& v) {
        double s = 0.0;
        for (double x : v)
            s += x;
        return s / v.size();
    };
    const auto se = [&](const std::vector<double>& v, double m) {
        if (v.size() < 2)
            return 0.0;
        double ss = 0.0;
        for (double x : v)
            ss += (x - m) * (x - m);
        return std::sqrt(ss / (v.size() - 1)) / std::sqrt(static_cast<double>(v.size()));
    };

    CellStats stats;
    stats.fdr_hat = mean(fdp);
    stats.power_hat = mean(power);
    stats.mean_rejections = mean(rejections);
    stats.fdr_se = se(fdp, stats.fdr_hat);
    stats.power_se = se(power, stats.power_hat);
    stats.low_confidence = r < 2;
    return stats;
}

ExperimentSummary run_means(const ExperimentConfig& config_in) {
    ExperimentConfig config = config_in;
    if (config.procedures.empty())
        config.procedures = mean_catalog_names();
    config.validate();

    const int d = config.d;
    const int nu = config.known_variance ? 0 : (config.nu > 0 ? config.nu : 2 * d);
    const DistributionKind dist =
        config.known_variance ? DistributionKind::chisq1() : DistributionKind::scaled_f(nu);
    const auto ids = resolve_mean_procedures(config.procedures);
    const StructureSpec spec = resolved_structure(config);

    std::optional<CorrelationMatrix> sigma;
    std::optional<ShiftProfile> profile;
    if (!config.resample_structure) {
        sigma.emplace(make_correlation(spec));
        profile.emplace(tau_profile(*sigma));
    }

    ExperimentSummary summary;
    for (const GridPoint& g : build_grid(config)) {
        std::vector<std::vector<MeanTestPlan>> plans;
        if (!config.resample_structure) {
            for (double a : config.alphas) {
                std::vector<MeanTestPlan> row;
                row.reserve(ids.size());
                for (ProcedureId id : ids)
                    row.emplace_back(id, *profile, a, dist, config.sbh2_fraction);
                plans.push_back(std::move(row));
            }
        }

        OutcomeGrid outcomes =
            make_outcome_grid(config.alphas.size(), ids.size(), config.replications);

        run_cell(config, g, [&](int r) {
            RngStream stream(config.master_seed, kRepTag, static_cast<std::uint64_t>(r));

            std::optional<CorrelationMatrix> sigma_r;
            std::optional<ShiftProfile> profile_r;
            std::vector<std::vector<MeanTestPlan>> plans_r;
            const CorrelationMatrix* sig = sigma ? &*sigma : nullptr;
            const auto* plan_grid = &plans;
            if (config.resample_structure) {
                StructureSpec sr = spec;
                sr.seed = mix64(config.master_seed, kStructTag, static_cast<std::uint64_t>(r));
                sigma_r.emplace(make_correlation(sr));
                profile_r.emplace(tau_profile(*sigma_r));
                for (double a : config.alphas) {
                    std::vector<MeanTestPlan> row;
                    for (ProcedureId id : ids)
                        row.emplace_back(id, *profile_r, a, dist, config.sbh2_fraction);
                    plans_r.push_back(std::move(row));
                }
                sig = &*sigma_r;
                plan_grid = &plans_r;
            }

            Eigen::VectorXd mu_vec;
            const auto is_signal =
                place_signals(d, g.k, g.mu, config.random_sign, stream, mu_vec);
            const Eigen::VectorXd x = sample_mvn(*sig, mu_vec, stream);
            const TestSetting setting =
                config.known_variance ? TestSetting::known()
                                      : TestSetting::estimated(stream.chi_squared(nu), nu);

            for (std::size_t ai = 0; ai < config.alphas.size(); ++ai)
                for (std::size_t pi = 0; pi < ids.size(); ++pi)
                    outcomes[ai][pi][r] =
                        score((*plan_grid)[ai][pi].run_stats(x, setting).rejected, is_signal,
                              g.k);
        });

        append_cells(summary, config, g, config.procedures, outcomes);
    }
    return summary;
}

namespace {

// rows i.i.d. N(0, Sigma): Z L' with Z standard normal n x d
Eigen::MatrixXd sample_design(const CorrelationMatrix& sigma, int n, RngStream& rng) {
    const int d = sigma.dim();
    Eigen::MatrixXd z(n, d);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < d; ++j)
            z(i, j) = rng.normal();
    return z * sigma.cholesky_lower().transpose();
}

} // namespace

ExperimentSummary run_varsel(const ExperimentConfig& config_in) {
    ExperimentConfig config = config_in;
    if (config.procedures.empty())
        config.procedures = mean_catalog_names();
    config.validate();

    const int d = config.d;
    const int n = config.n;
    const int nu = n - d;
    const DistributionKind dist =
        config.known_variance ? DistributionKind::chisq1() : DistributionKind::scaled_f(nu);
    const auto ids = resolve_mean_procedures(config.procedures);
    const StructureSpec spec = resolved_structure(config);

    std::optional<CorrelationMatrix> row_sigma;
    if (!config.resample_structure)
        row_sigma.emplace(make_correlation(spec));

    ExperimentSummary summary;
    for (const GridPoint& g : build_grid(config)) {
        OutcomeGrid outcomes =
            make_outcome_grid(config.alphas.size(), ids.size(), config.replications);

        run_cell(config, g, [&](int r) {
            RngStream stream(config.master_seed, kRepTag, static_cast<std::uint64_t>(r));

            std::optional<CorrelationMatrix> sigma_r;
            const CorrelationMatrix* sig = row_sigma ? &*row_sigma : nullptr;
            if (config.resample_structure) {
                StructureSpec sr = spec;
                sr.seed = mix64(config.master_seed, kStructTag, static_cast<std::uint64_t>(r));
                sigma_r.emplace(make_correlation(sr));
                sig = &*sigma_r;
            }

            Eigen::VectorXd beta;
            const auto is_signal =
                place_signals(d, g.k, g.mu, config.random_sign, stream, beta);
            const Eigen::MatrixXd x_raw = sample_design(*sig, n, stream);
            Eigen::VectorXd eps(n);
            for (int i = 0; i < n; ++i)
                eps[i] = stream.normal();

            // response built against the standardized design
            RegressionData data = RegressionData::standardized(x_raw, Eigen::VectorXd::Zero(n));
            data.y = data.x * beta + eps;

            const OlsFit fit = ols_fit(data);
            Eigen::VectorXd stats(d);
            for (int i = 0; i < d; ++i)
                stats[i] = fit.beta[i] / std::sqrt(fit.a_inv(i, i));
            const TestSetting setting =
                config.known_variance ? TestSetting::known()
                                      : TestSetting::estimated(nu * fit.eta2_hat, nu);
            const ShiftProfile profile = tau_profile(fit.beta_correlation());

            for (std::size_t ai = 0; ai < config.alphas.size(); ++ai) {
                for (std::size_t pi = 0; pi < ids.size(); ++pi) {
                    MeanTestPlan plan(ids[pi], profile, config.alphas[ai], dist,
                                      config.sbh2_fraction);
                    outcomes[ai][pi][r] =
                        score(plan.run_stats(stats, setting).rejected, is_signal, g.k);
                }
            }
        });

        append_cells(summary, config, g, config.procedures, outcomes);
    }
    return summary;
}

ExperimentSummary run_knockoff(const ExperimentConfig& config_in) {
    ExperimentConfig config = config_in;
    if (config.procedures.empty())
        config.procedures = knockoff_catalog_names();
    config.validate();

    const int d = config.d;
    const int n = config.n;
    const auto& proc_names = config.procedures;
    const StructureSpec spec = resolved_structure(config);

    std::optional<CorrelationMatrix> row_sigma;
    if (!config.resample_structure)
        row_sigma.emplace(make_correlation(spec));

    ExperimentSummary summary;
    for (const GridPoint& g : build_grid(config)) {
        OutcomeGrid outcomes =
            make_outcome_grid(config.alphas.size(), proc_names.size(), config.replications);

        run_cell(config, g, [&](int r) {
            RngStream stream(config.master_seed, kRepTag, static_cast<std::uint64_t>(r));

            std::optional<CorrelationMatrix> sigma_r;
            const CorrelationMatrix* sig = row_sigma ? &*row_sigma : nullptr;
            if (config.resample_structure) {
                StructureSpec sr = spec;
                sr.seed = mix64(config.master_seed, kStructTag, static_cast<std::uint64_t>(r));
                sigma_r.emplace(make_correlation(sr));
                sig = &*sigma_r;
            }

            Eigen::VectorXd beta;
            const auto is_signal =
                place_signals(d, g.k, g.mu, config.random_sign, stream, beta);
            const Eigen::MatrixXd x_raw = sample_design(*sig, n, stream);
            Eigen::VectorXd eps(n);
            for (int i = 0; i < n; ++i)
                eps[i] = stream.normal();

            RegressionData data = RegressionData::standardized(x_raw, Eigen::VectorXd::Zero(n));
            data.y = data.x * beta + eps;

            const KnockoffAugmentation aug = construct_knockoffs(data);
            const FissionPair pair = fission(data, aug);
            const PairedPValues pp =
                paired_pvalues(pair, config.known_variance, config.p2_chisq_as_written);
            const ShiftProfile profile =
                tau_profile(normalize_to_correlation(pair.cov1_basis));

            for (std::size_t ai = 0; ai < config.alphas.size(); ++ai) {
                const double a = config.alphas[ai];
                for (std::size_t pi = 0; pi < proc_names.size(); ++pi) {
                    const std::string& name = proc_names[pi];
                    std::vector<int> rejected;
                    if (name == "bh2")
                        rejected = bh(pp.p2, a).rejected;
                    else if (name == "bbh")
                        rejected = bbh(pp, a).rejected;
                    else if (name == "adaptbbh")
                        rejected = adapt_bbh(pp, a, config.storey_lambda).rejected;
                    else if (name == "sbbh1")
                        rejected =
                            sbbh_with_profile(pp, a, profile, SbbhVariant::PerCoordinate).rejected;
                    else if (name == "sbbh2")
                        rejected =
                            sbbh_with_profile(pp, a, profile, SbbhVariant::LambdaMin).rejected;
                    else if (name == "sbbh3")
                        rejected = sbbh_with_profile(pp, a, profile, SbbhVariant::Min).rejected;
                    else if (name == "sbbh4")
                        rejected = sbbh_with_profile(pp, a, profile, SbbhVariant::Median).rejected;
                    else if (name == "sbbh5")
                        rejected =
                            sbbh_with_profile(pp, a, profile, SbbhVariant::HarmMean).rejected;
                    else if (name == "knockoff")
                        rejected = knockoff_filter(data, aug, a, false);
                    else if (name == "knockoff_plus")
                        rejected = knockoff_filter(data, aug, a, true);
                    else if (name == "revbbh")
                        rejected = rev_bbh(pp, a, config.mirror_rev_bbh).rejected;
                    else if (name == "bby")
                        rejected = bby(pp, a).rejected;
                    else
                        throw std::invalid_argument("unknown knockoff procedure: " + name);
                    outcomes[ai][pi][r] = score(rejected, is_signal, g.k);
                }
            }
        });

        append_cells(summary, config, g, proc_names, outcomes);
    }
    return summary;
}

ExperimentSummary run_experiment(const ExperimentConfig& config) {
    switch (config.scenario) {
    case Scenario::Means:
        return run_means(config);
    case Scenario::VarSel:
        return run_varsel(config);
    case Scenario::Knockoff:
        return run_knockoff(config);
    }
    throw std::invalid_argument("run_experiment: unknown scenario");
}

Lemma1Diagnostic lemma1_oracle(const StructureSpec& structure, const std::string& procedure,
                               double alpha, int reps, std::uint64_t seed) {
    const int d = structure.d;
    const CorrelationMatrix sigma = make_correlation(structure);
    const ShiftProfile profile = tau_profile(sigma);
    const DistributionKind dist = DistributionKind::chisq1();
    const ProcedureId id = procedure_from_name(procedure);
    const MeanTestPlan plan(id, profile, alpha, dist);

    const double a1 = plan.constants().alphas[0];
    const double tilde_alpha = plan.constants().tilde_alpha;

    // marginal rejection probabilities at level alpha_1 from the closed forms
    double bound = 0.0;
    switch (id) {
    case ProcedureId::BH:
    case ProcedureId::BY:
        bound = d * a1; // null p-values are uniform
        break;
    case ProcedureId::SBH1:
        for (int i = 0; i < d; ++i)
            bound += h_tau(a1, profile.tau[i], dist);
        break;
    default: {
        const double tau = plan.tau();
        for (int i = 0; i < d; ++i) {
            const double ti = profile.tau[i];
            if (ti >= tau) {
                bound += h_tau(a1, tau, dist);
            } else {
                const double inner =
                    survival(dist, (tau / ti) * quantile_upper(dist, tilde_alpha)) / d;
                bound += survival(dist, ti * quantile_upper(dist, inner));
            }
        }
        break;
    }
    }

    std::vector<double> fdp(reps);
    const Eigen::VectorXd zero_mu = Eigen::VectorXd::Zero(d);
    for (int r = 0; r < reps; ++r) {
        RngStream stream(seed, kRepTag, static_cast<std::uint64_t>(r));
        const Eigen::VectorXd x = sample_mvn(sigma, zero_mu, stream);
        const StepUpResult res = plan.run_stats(x, TestSetting::known());
        fdp[r] = res.R > 0 ? 1.0 : 0.0; // all nulls: FDP is 1 when anything rejects
    }

    Lemma1Diagnostic diag;
    double m = 0.0;
    for (double v : fdp)
        m += v;
    m /= reps;
    double ss = 0.0;
    for (double v : fdp)
        ss += (v - m) * (v - m);
    diag.empirical_fdr = m;
    diag.empirical_se = reps > 1 ? std::sqrt(ss / (reps - 1)) / std::sqrt(double(reps)) : 0.0;
    diag.theoretical_bound = bound;
    diag.within_band = diag.empirical_fdr <= bound + 3.0 * diag.empirical_se;
    return diag;
}

} // namespace shiftfdr
