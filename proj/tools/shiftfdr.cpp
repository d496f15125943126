#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "shiftfdr/config.hpp"
#include "shiftfdr/dist.hpp"
#include "shiftfdr/regression.hpp"

namespace {

using namespace shiftfdr;

constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitData = 4;

struct ExperimentOptions {
    std::string config_path;
    std::string out_path = "results.csv";
    std::optional<std::uint64_t> seed;
    std::optional<int> reps;
    std::vector<double> alphas;
    std::string procedures;
    std::string structure;
    std::optional<double> rho;
    std::optional<int> d;
    std::optional<int> n;
    std::string variance;
    std::vector<double> mu;
    std::vector<double> null_frac;
    std::string regime;
    std::optional<int> k;
    std::optional<int> threads;
};

void add_experiment_flags(CLI::App* cmd, ExperimentOptions& opt) {
    cmd->add_option("--config", opt.config_path, "config file (key = value or resolved JSON)");
    cmd->add_option("--out", opt.out_path, "output CSV path (a .config.json sidecar is added)");
    cmd->add_option("--seed", opt.seed, "master seed");
    cmd->add_option("--reps", opt.reps, "Monte Carlo replications");
    cmd->add_option("--alpha", opt.alphas, "FDR level, repeatable");
    cmd->add_option("--procedures", opt.procedures, "comma-separated procedure names");
    cmd->add_option("--structure", opt.structure,
                    "correlation structure: equi|ar1|iar1|block|sparse|prefixed");
    cmd->add_option("--rho", opt.rho, "correlation parameter");
    cmd->add_option("--d", opt.d, "number of hypotheses / predictors");
    cmd->add_option("--n", opt.n, "sample size (varsel/knockoff)");
    cmd->add_option("--variance", opt.variance, "known or estimated")
        ->check(CLI::IsMember({"known", "estimated"}));
    cmd->add_option("--mu", opt.mu, "signal magnitude grid, repeatable");
    cmd->add_option("--null-frac", opt.null_frac, "null fraction grid, repeatable");
    cmd->add_option("--regime", opt.regime, "fixed_null or fixed_signal")
        ->check(CLI::IsMember({"fixed_null", "fixed_signal"}));
    cmd->add_option("--k", opt.k, "explicit signal count (fixed_null only)");
    cmd->add_option("--threads", opt.threads, "worker threads");
}

std::vector<std::string> split_names(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty())
            out.push_back(item);
    return out;
}

ExperimentConfig build_config(const std::string& scenario, const ExperimentOptions& opt) {
    ExperimentConfig config;
    if (!opt.config_path.empty()) {
        config = load_config_file(opt.config_path, scenario);
    } else {
        if (opt.structure.empty())
            throw ConfigError("missing required field 'structure' (config file or --structure)");
        std::string text = "scenario = " + scenario + "\nstructure = " + opt.structure + "\n";
        config = parse_config_text(text);
    }

    if (!opt.structure.empty())
        config.structure.kind = StructureSpec::kind_from_name(opt.structure);
    if (opt.rho)
        config.structure.rho = *opt.rho;
    if (opt.d) {
        config.d = *opt.d;
        config.structure.d = *opt.d;
    }
    if (opt.n)
        config.n = *opt.n;
    if (opt.seed)
        config.master_seed = *opt.seed;
    if (opt.reps)
        config.replications = *opt.reps;
    if (!opt.alphas.empty())
        config.alphas = opt.alphas;
    if (!opt.procedures.empty())
        config.procedures = split_names(opt.procedures);
    if (!opt.variance.empty())
        config.known_variance = opt.variance == "known";
    if (!opt.regime.empty())
        config.regime = regime_from_name(opt.regime);
    if (!opt.mu.empty())
        config.mu = opt.mu;
    if (!opt.null_frac.empty())
        config.null_frac = opt.null_frac;
    if (opt.k)
        config.k = *opt.k;
    if (opt.threads)
        config.threads = *opt.threads;
    return config;
}

int run_experiment_command(const std::string& scenario, const ExperimentOptions& opt) {
    ExperimentConfig config;
    try {
        config = build_config(scenario, opt);
        config.validate();
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    }

    ExperimentSummary summary;
    try {
        summary = run_experiment(config);
    } catch (const std::exception& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return kExitNumeric;
    }

    try {
        write_text_file(opt.out_path, results_csv(summary));
        write_text_file(opt.out_path + ".config.json", resolved_config_json(config));
    } catch (const std::exception& e) {
        std::cerr << e.what() << "\n";
        return 1;
    }
    std::cout << "wrote " << summary.cells.size() << " cells to " << opt.out_path << "\n";
    return 0;
}

struct CsvTable {
    std::vector<std::string> names; // predictor columns
    Eigen::MatrixXd x;
    Eigen::VectorXd y;
    int dropped_rows = 0;
};

CsvTable read_data_csv(const std::string& path) {
    const std::string text = read_text_file(path);
    std::stringstream ss(text);
    std::string line;
    if (!std::getline(ss, line))
        throw std::runtime_error("empty CSV file");
    while (!line.empty() && (line.back() == '\r' || line.back() == '\n'))
        line.pop_back();

    std::vector<std::string> header = split_names(line);
    int y_col = -1;
    for (std::size_t j = 0; j < header.size(); ++j)
        if (header[j] == "y")
            y_col = static_cast<int>(j);
    if (y_col < 0)
        throw std::runtime_error("CSV must contain a response column named 'y'");

    CsvTable table;
    for (std::size_t j = 0; j < header.size(); ++j)
        if (static_cast<int>(j) != y_col)
            table.names.push_back(header[j]);

    std::vector<std::vector<double>> rows;
    int lineno = 1;
    while (std::getline(ss, line)) {
        ++lineno;
        while (!line.empty() && (line.back() == '\r' || line.back() == '\n'))
            line.pop_back();
        if (line.empty())
            continue;
        std::vector<std::string> cells;
        std::stringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ','))
            cells.push_back(cell);
        if (line.back() == ',')
            cells.push_back("");
        if (cells.size() != header.size())
            throw std::runtime_error("line " + std::to_string(lineno) + ": expected " +
                                     std::to_string(header.size()) + " cells");
        bool missing = false;
        std::vector<double> vals(cells.size());
        for (std::size_t j = 0; j < cells.size(); ++j) {
            if (cells[j].empty()) {
                missing = true;
                break;
            }
            try {
                std::size_t pos = 0;
                vals[j] = std::stod(cells[j], &pos);
                if (pos != cells[j].size())
                    throw std::invalid_argument("bad number");
            } catch (const std::exception&) {
                throw std::runtime_error("line " + std::to_string(lineno) +
                                         ": non-numeric cell '" + cells[j] + "'");
            }
        }
        if (missing) {
            ++table.dropped_rows;
            continue;
        }
        rows.push_back(std::move(vals));
    }
    if (rows.empty())
        throw std::runtime_error("no complete data rows");

    const int n = static_cast<int>(rows.size());
    const int d = static_cast<int>(header.size()) - 1;
    table.x.resize(n, d);
    table.y.resize(n);
    for (int i = 0; i < n; ++i) {
        int jx = 0;
        for (std::size_t j = 0; j < rows[i].size(); ++j) {
            if (static_cast<int>(j) == y_col)
                table.y[i] = rows[i][j];
            else
                table.x(i, jx++) = rows[i][j];
        }
    }
    return table;
}

bool is_paired_procedure(const std::string& name) {
    for (const auto& k : knockoff_catalog_names())
        if (name == k)
            return true;
    return name == "knockoff_plus";
}

int cmd_analyze(const std::string& data_path, const std::string& procedure, double alpha,
                const std::string& variance, const std::string& json_out, double sbh2_fraction) {
    CsvTable table;
    try {
        table = read_data_csv(data_path);
    } catch (const std::exception& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kExitData;
    }
    if (table.dropped_rows > 0)
        std::cerr << "note: dropped " << table.dropped_rows << " rows with missing values\n";

    const bool known_variance = variance != "estimated";
    const bool paired = is_paired_procedure(procedure);

    RegressionData data;
    try {
        data = RegressionData::standardized(table.x, table.y, table.names);
    } catch (const std::runtime_error& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const std::exception& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kExitData;
    }

    if (paired && data.n < 2 * data.d) {
        std::cerr << "config error: procedure '" << procedure << "' needs n >= 2d (n=" << data.n
                  << ", d=" << data.d << ")\n";
        return kExitConfig;
    }

    std::vector<int> selected;
    Eigen::VectorXd report_p;
    try {
        const OlsFit fit = ols_fit(data);
        report_p = fit.pvalues(known_variance);
        if (paired) {
            const KnockoffAugmentation aug = construct_knockoffs(data);
            if (procedure == "knockoff" || procedure == "knockoff_plus") {
                selected = knockoff_filter(data, aug, alpha, procedure == "knockoff_plus");
            } else {
                const FissionPair pair = fission(data, aug);
                const PairedPValues pp = paired_pvalues(pair, known_variance);
                if (procedure == "bh2")
                    selected = bh(pp.p2, alpha).rejected;
                else if (procedure == "bbh")
                    selected = bbh(pp, alpha).rejected;
                else if (procedure == "adaptbbh")
                    selected = adapt_bbh(pp, alpha).rejected;
                else if (procedure == "revbbh")
                    selected = rev_bbh(pp, alpha).rejected;
                else if (procedure == "bby")
                    selected = bby(pp, alpha).rejected;
                else {
                    SbbhVariant variant = SbbhVariant::PerCoordinate;
                    if (procedure == "sbbh2")
                        variant = SbbhVariant::LambdaMin;
                    else if (procedure == "sbbh3")
                        variant = SbbhVariant::Min;
                    else if (procedure == "sbbh4")
                        variant = SbbhVariant::Median;
                    else if (procedure == "sbbh5")
                        variant = SbbhVariant::HarmMean;
                    selected = sbbh(pp, alpha, pair.cov1_basis, variant).rejected;
                }
            }
        } else {
            const ProcedureId id = procedure_from_name(procedure);
            const ShiftProfile profile = tau_profile(fit.beta_correlation());
            const DistributionKind dist = known_variance
                                              ? DistributionKind::chisq1()
                                              : DistributionKind::scaled_f(fit.nu);
            Eigen::VectorXd stats(data.d);
            for (int i = 0; i < data.d; ++i)
                stats[i] = fit.beta[i] / std::sqrt(fit.a_inv(i, i));
            const TestSetting setting =
                known_variance ? TestSetting::known()
                               : TestSetting::estimated(fit.nu * fit.eta2_hat, fit.nu);
            MeanTestPlan plan(id, profile, alpha, dist, sbh2_fraction);
            selected = plan.run_stats(stats, setting).rejected;
        }
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return kExitNumeric;
    }

    std::cout << "selected " << selected.size() << " of " << data.d << " variables at alpha="
              << alpha << " (" << procedure << ")\n";
    for (int idx : selected) {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%.6g", report_p[idx]);
        std::cout << data.names[idx] << "\t" << buf << "\n";
    }

    if (!json_out.empty()) {
        nlohmann::json j;
        j["procedure"] = procedure;
        j["alpha"] = alpha;
        j["n"] = data.n;
        j["d"] = data.d;
        j["variance"] = known_variance ? "known" : "estimated";
        nlohmann::json sel = nlohmann::json::array();
        for (int idx : selected)
            sel.push_back({{"name", data.names[idx]}, {"index", idx}, {"pvalue", report_p[idx]}});
        j["selected"] = sel;
        write_text_file(json_out, j.dump(2) + "\n");
    }
    return 0;
}

struct CheckCase {
    std::string name;
    bool pass = false;
    double worst = 0.0;
};

int cmd_check() {
    double tol = 1e-9;
    if (const char* env = std::getenv("SHIFTFDR_CHECK_TOL"))
        tol = std::atof(env);

    std::vector<CheckCase> cases;
    const auto grid_u = [](int n) {
        std::vector<double> u(n);
        for (int i = 0; i < n; ++i)
            u[i] = (i + 1.0) / (n + 1.0);
        return u;
    };

    // Result 1(i)/(ii): concavity of u -> S_{m+h}(theta S_m^{-1}(u)), theta <= 1
    for (const bool scaled : {false, true}) {
        CheckCase c;
        c.name = scaled ? "scaled-F shift concavity" : "chi-square shift concavity";
        c.pass = true;
        const int nu = 10;
        for (const double theta : {0.3, 0.7, 1.0}) {
            for (const int h : {0, 2}) {
                const auto u = grid_u(1000);
                std::vector<double> g(u.size());
                for (std::size_t i = 0; i < u.size(); ++i) {
                    const double q = scaled ? scaledF_quantile_upper(u[i], 1, nu)
                                            : chi2_quantile_upper(u[i], 1);
                    g[i] = scaled ? scaledF_survival(theta * q, 1 + h, nu)
                                  : chi2_survival(theta * q, 1 + h);
                }
                for (std::size_t i = 1; i + 1 < u.size(); ++i) {
                    const double second = g[i + 1] - 2.0 * g[i] + g[i - 1];
                    c.worst = std::max(c.worst, second);
                    if (second > tol)
                        c.pass = false;
                }
            }
        }
        cases.push_back(c);
    }

    // Result 1(iii): survival ratio monotone in the scale
    {
        CheckCase c;
        c.name = "survival ratio monotone (TP2)";
        c.pass = true;
        const double qa = chi2_quantile_upper(0.2, 1);
        const double qb = chi2_quantile_upper(0.8, 1);
        double prev = 1.0;
        for (int i = 1; i <= 1000; ++i) {
            const double x = 5.0 * i / 1000.0;
            const double ratio = chi2_survival(x * qa, 1) / chi2_survival(x * qb, 1);
            c.worst = std::max(c.worst, ratio - prev);
            if (ratio > prev + tol)
                c.pass = false;
            prev = ratio;
        }
        cases.push_back(c);
    }

    // conditional left-tail ratio nonincreasing
    {
        CheckCase c;
        c.name = "conditional left-tail ratio";
        c.pass = true;
        for (const double rho : {0.3, 0.7}) {
            for (const double x : {0.0, 1.0, 2.0}) {
                const double lambda = (rho * x) * (rho * x) / (1.0 - rho * rho);
                double prev = std::numeric_limits<double>::infinity();
                for (int i = 1; i <= 200; ++i) {
                    const double u = i / 201.0;
                    const double ratio =
                        noncentral_chi2_survival(chi2_quantile_upper(u, 1), 1, lambda) / u;
                    c.worst = std::max(c.worst, ratio - prev);
                    if (ratio > prev + tol)
                        c.pass = false;
                    prev = ratio;
                }
            }
        }
        cases.push_back(c);
    }

    // H calibration roundtrip
    {
        CheckCase c;
        c.name = "H inverse roundtrip";
        c.pass = true;
        const CorrelationMatrix sigma = make_correlation(StructureSpec::equi(40, 0.3));
        const ShiftProfile profile = tau_profile(sigma);
        const double tau = select_tau(profile, TauRule::Median);
        const DistributionKind dist = DistributionKind::chisq1();
        for (const double target : {0.00005, 0.00125, 0.01}) {
            const double u = h_inverse(target, profile, tau, dist);
            const double err = std::fabs(h_mixture(u, profile, tau, dist) - target);
            c.worst = std::max(c.worst, err);
            if (err > std::max(tol, 1e-10))
                c.pass = false;
        }
        cases.push_back(c);
    }

    // knockoff and fission algebra on a seeded random design
    {
        CheckCase c;
        c.name = "knockoff/fission algebra";
        c.pass = true;
        RngStream rng(20240717u, 0x4B4Eu);
        const int n = 100, d = 40;
        Eigen::MatrixXd x(n, d);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < d; ++j)
                x(i, j) = rng.normal();
        Eigen::VectorXd y(n);
        for (int i = 0; i < n; ++i)
            y[i] = rng.normal();
        const RegressionData data = RegressionData::standardized(x, y);
        const KnockoffAugmentation aug = construct_knockoffs(data);
        const Eigen::MatrixXd a = data.x.transpose() * data.x;
        const double r1 = (aug.x_tilde.transpose() * aug.x_tilde - a).norm();
        const double r2 =
            (data.x.transpose() * aug.x_tilde -
             (a - Eigen::MatrixXd(aug.s.asDiagonal())))
                .norm();
        const double r3 =
            ((data.x + aug.x_tilde).transpose() * (data.x - aug.x_tilde)).norm();
        c.worst = std::max({r1, r2, r3});
        c.pass = c.worst <= std::max(tol, 1e-8);
        cases.push_back(c);
    }

    bool all_pass = true;
    std::printf("%-34s %-6s %s\n", "check", "status", "worst deviation");
    for (const auto& c : cases) {
        all_pass = all_pass && c.pass;
        std::printf("%-34s %-6s %.3e\n", c.name.c_str(), c.pass ? "PASS" : "FAIL", c.worst);
    }
    return all_pass ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"dependence-aware FDR control: shifted BH procedures, knockoff-assisted "
                 "selection, and a Monte Carlo harness"};
    app.require_subcommand(1);

    ExperimentOptions means_opt, varsel_opt, knockoff_opt;
    auto* means_cmd = app.add_subcommand("means", "Gaussian mean-testing experiments");
    add_experiment_flags(means_cmd, means_opt);
    auto* varsel_cmd = app.add_subcommand("varsel", "regression variable-selection experiments");
    add_experiment_flags(varsel_cmd, varsel_opt);
    auto* knockoff_cmd =
        app.add_subcommand("knockoff", "knockoff-assisted paired-testing experiments");
    add_experiment_flags(knockoff_cmd, knockoff_opt);

    std::string data_path, procedure = "gsbh3", variance = "estimated", json_out;
    double alpha = 0.05, sbh2_fraction = 0.9;
    auto* analyze_cmd = app.add_subcommand("analyze", "run a procedure on a CSV dataset");
    analyze_cmd->add_option("data", data_path, "CSV with response column 'y'")->required();
    analyze_cmd->add_option("--procedure", procedure, "procedure name");
    analyze_cmd->add_option("--alpha", alpha, "FDR level");
    analyze_cmd->add_option("--variance", variance, "known or estimated")
        ->check(CLI::IsMember({"known", "estimated"}));
    analyze_cmd->add_option("--json", json_out, "write the selection to a JSON file");
    analyze_cmd->add_option("--sbh2-fraction", sbh2_fraction, "fraction for sbh2");

    auto* check_cmd = app.add_subcommand("check", "run the numeric invariant suite");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : kExitConfig;
    }

    if (means_cmd->parsed())
        return run_experiment_command("means", means_opt);
    if (varsel_cmd->parsed())
        return run_experiment_command("varsel", varsel_opt);
    if (knockoff_cmd->parsed())
        return run_experiment_command("knockoff", knockoff_opt);
    if (analyze_cmd->parsed())
        return cmd_analyze(data_path, procedure, alpha, variance, json_out, sbh2_fraction);
    if (check_cmd->parsed())
        return cmd_check();
    return kExitConfig;
}
