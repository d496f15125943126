#include "shiftfdr/corr.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace shiftfdr {

namespace {

// Adds delta*I when the smallest eigenvalue falls below 0.05, then rescales
// back to unit diagonal. Used by the randomized structures only.
Eigen::MatrixXd repair_to_unit_diagonal(Eigen::MatrixXd m) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
    const double lmin = es.eigenvalues().minCoeff();
    const double delta = std::max(0.0, 0.05 - lmin);
    if (delta > 0.0) {
        m.diagonal().array() += delta;
        m /= 1.0 + delta;
    }
    m.diagonal().setOnes();
    return m;
}

Eigen::MatrixXd make_equi(int d, double rho) {
    Eigen::MatrixXd m = Eigen::MatrixXd::Constant(d, d, rho);
    m.diagonal().setOnes();
    return m;
}

Eigen::MatrixXd make_ar1(int d, double rho) {
    Eigen::MatrixXd m(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            m(i, j) = std::pow(rho, std::abs(i - j));
    return m;
}

Eigen::MatrixXd make_iar1(int d, double rho) {
    const Eigen::MatrixXd inv = make_ar1(d, rho).inverse();
    const Eigen::VectorXd scale = inv.diagonal().cwiseSqrt().cwiseInverse();
    Eigen::MatrixXd m = scale.asDiagonal() * inv * scale.asDiagonal();
    m.diagonal().setOnes();
    return m;
}

Eigen::MatrixXd make_block(int d, double within_rho) {
    Eigen::MatrixXd m = Eigen::MatrixXd::Identity(d, d);
    for (int start = 0; start < d; start += 4) {
        const int size = std::min(4, d - start);
        for (int i = 0; i < size; ++i)
            for (int j = 0; j < size; ++j)
                if (i != j)
                    m(start + i, start + j) = within_rho;
    }
    return m;
}

Eigen::MatrixXd make_sparse(int d, double density, std::uint64_t seed) {
    RngStream rng(seed, 0x5350u); // "SP"
    Eigen::MatrixXd m = Eigen::MatrixXd::Identity(d, d);
    for (int i = 0; i < d; ++i) {
        for (int j = i + 1; j < d; ++j) {
            if (rng.uniform() < density) {
                const double v = rng.uniform() - 0.5;
                m(i, j) = v;
                m(j, i) = v;
            }
        }
    }
    return repair_to_unit_diagonal(std::move(m));
}

Eigen::MatrixXd make_prefixed(int d, double fraction, std::uint64_t seed) {
    RngStream rng(seed, 0x5046u); // "PF"
    const int k = std::max(1, static_cast<int>(std::lround(fraction * d)));

    std::vector<int> idx(d);
    std::iota(idx.begin(), idx.end(), 0);
    for (int i = 0; i < k; ++i)
        std::swap(idx[i], idx[i + static_cast<int>(rng.below(d - i))]);
    std::vector<bool> chosen(d, false);
    for (int i = 0; i < k; ++i)
        chosen[idx[i]] = true;

    Eigen::MatrixXd m = Eigen::MatrixXd::Identity(d, d);
    for (int i = 0; i < d; ++i) {
        for (int j = i + 1; j < d; ++j) {
            if (chosen[i] || chosen[j]) {
                const double v = rng.uniform() - 0.5;
                m(i, j) = v;
                m(j, i) = v;
            }
        }
    }
    return repair_to_unit_diagonal(std::move(m));
}

} // namespace

CorrelationMatrix::CorrelationMatrix(Eigen::MatrixXd entries) : m_(std::move(entries)) {
    if (m_.rows() != m_.cols() || m_.rows() < 1)
        throw std::invalid_argument("CorrelationMatrix: matrix must be square");
    if (((m_ - m_.transpose()).cwiseAbs().maxCoeff()) > 1e-12)
        throw std::invalid_argument("CorrelationMatrix: matrix must be symmetric");
    if ((m_.diagonal().array() - 1.0).abs().maxCoeff() > 1e-12)
        throw std::invalid_argument("CorrelationMatrix: diagonal must be 1");
    m_ = ((m_ + m_.transpose()) / 2.0).eval();
    m_.diagonal().setOnes();

    Eigen::LLT<Eigen::MatrixXd> llt(m_);
    if (llt.info() != Eigen::Success)
        throw std::invalid_argument("CorrelationMatrix: matrix is not positive definite");
    chol_lower_ = llt.matrixL();
}

CorrelationMatrix CorrelationMatrix::identity(int d) {
    return CorrelationMatrix(Eigen::MatrixXd::Identity(d, d));
}

std::string StructureSpec::name() const {
    switch (kind) {
    case Kind::Equi:
        return "equi";
    case Kind::AR1:
        return "ar1";
    case Kind::IAR1:
        return "iar1";
    case Kind::BlockDiagonal:
        return "block";
    case Kind::Sparse:
        return "sparse";
    case Kind::Prefixed:
        return "prefixed";
    }
    return "equi";
}

StructureSpec::Kind StructureSpec::kind_from_name(const std::string& name) {
    if (name == "equi")
        return Kind::Equi;
    if (name == "ar1")
        return Kind::AR1;
    if (name == "iar1")
        return Kind::IAR1;
    if (name == "block")
        return Kind::BlockDiagonal;
    if (name == "sparse")
        return Kind::Sparse;
    if (name == "prefixed")
        return Kind::Prefixed;
    throw std::invalid_argument("unknown correlation structure: " + name);
}

std::string tau_rule_name(TauRule rule) {
    switch (rule) {
    case TauRule::Min:
        return "min";
    case TauRule::Max:
        return "max";
    case TauRule::Median:
        return "median";
    case TauRule::ArithMean:
        return "mean";
    case TauRule::GeoMean:
        return "geomean";
    case TauRule::HarmMean:
        return "harmmean";
    case TauRule::LambdaMin:
        return "lambda_min";
    case TauRule::LambdaMinFraction:
        return "lambda_min_fraction";
    }
    return "min";
}

CorrelationMatrix make_correlation(const StructureSpec& spec) {
    if (spec.d < 2)
        throw std::invalid_argument("make_correlation: d must be at least 2");
    switch (spec.kind) {
    case StructureSpec::Kind::Equi:
    case StructureSpec::Kind::AR1:
    case StructureSpec::Kind::IAR1:
        if (!(spec.rho > -1.0 && spec.rho < 1.0))
            throw std::invalid_argument("make_correlation: rho must lie in (-1,1)");
        break;
    default:
        break;
    }

    switch (spec.kind) {
    case StructureSpec::Kind::Equi:
        return CorrelationMatrix(make_equi(spec.d, spec.rho));
    case StructureSpec::Kind::AR1:
        return CorrelationMatrix(make_ar1(spec.d, spec.rho));
    case StructureSpec::Kind::IAR1:
        return CorrelationMatrix(make_iar1(spec.d, spec.rho));
    case StructureSpec::Kind::BlockDiagonal:
        return CorrelationMatrix(make_block(spec.d, spec.rho));
    case StructureSpec::Kind::Sparse:
        return CorrelationMatrix(make_sparse(spec.d, spec.density, spec.seed));
    case StructureSpec::Kind::Prefixed:
        return CorrelationMatrix(make_prefixed(spec.d, spec.fraction, spec.seed));
    }
    throw std::invalid_argument("make_correlation: unknown structure kind");
}

ShiftProfile tau_profile(const CorrelationMatrix& sigma) {
    const int d = sigma.dim();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sigma.entries(), Eigen::EigenvaluesOnly);
    const double lmin = es.eigenvalues().minCoeff();
    const double lmax = es.eigenvalues().maxCoeff();
    if (!(lmin > 0.0) || lmax / lmin > 1e12)
        throw std::runtime_error("tau_profile: correlation matrix is numerically singular");

    // tau_i = 1/(Sigma^{-1})_ii, one inversion instead of d block solves
    const Eigen::MatrixXd precision =
        Eigen::LLT<Eigen::MatrixXd>(sigma.entries())
            .solve(Eigen::MatrixXd::Identity(d, d));

    ShiftProfile profile;
    profile.d = d;
    profile.tau.resize(d);
    for (int i = 0; i < d; ++i) {
        double t = 1.0 / precision(i, i);
        // eigensolver/solve noise: values within 1e-12 of 1 are exactly 1 so
        // the independence case collapses to BH bitwise
        if (t > 1.0 - 1e-12)
            t = 1.0;
        if (!(t > 0.0 && t <= 1.0))
            throw std::runtime_error("tau_profile: tau out of (0,1]");
        profile.tau[i] = t;
    }
    profile.lambda_min = lmin > 1.0 - 1e-12 && lmin < 1.0 + 1e-12 ? 1.0 : lmin;
    return profile;
}

double select_tau(const ShiftProfile& profile, TauRule rule, double fraction) {
    const auto& tau = profile.tau;
    const int d = profile.d;
    switch (rule) {
    case TauRule::Min:
        return tau.minCoeff();
    case TauRule::Max:
        return tau.maxCoeff();
    case TauRule::Median: {
        std::vector<double> v(tau.data(), tau.data() + d);
        std::sort(v.begin(), v.end());
        return d % 2 == 1 ? v[d / 2] : 0.5 * (v[d / 2 - 1] + v[d / 2]);
    }
    case TauRule::ArithMean:
        return tau.mean();
    case TauRule::GeoMean:
        return std::exp(tau.array().log().mean());
    case TauRule::HarmMean:
        return static_cast<double>(d) / tau.array().inverse().sum();
    case TauRule::LambdaMin:
        return profile.lambda_min;
    case TauRule::LambdaMinFraction:
        if (!(fraction > 0.0 && fraction < 1.0))
            throw std::invalid_argument("select_tau: fraction must lie in (0,1)");
        return fraction * profile.lambda_min;
    }
    throw std::invalid_argument("select_tau: unknown rule");
}

Eigen::VectorXd sample_mvn(const CorrelationMatrix& sigma, const Eigen::VectorXd& mu,
                           RngStream& rng) {
    const int d = sigma.dim();
    if (mu.size() != d)
        throw std::invalid_argument("sample_mvn: mean dimension mismatch");
    Eigen::VectorXd z(d);
    for (int i = 0; i < d; ++i)
        z[i] = rng.normal();
    return mu + sigma.cholesky_lower() * z;
}

} // namespace shiftfdr
