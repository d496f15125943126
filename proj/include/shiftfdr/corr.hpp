#ifndef SHIFTFDR_CORR_HPP
#define SHIFTFDR_CORR_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <string>

#include "shiftfdr/rng.hpp"

namespace shiftfdr {

// Symmetric positive definite matrix with unit diagonal. The lower Cholesky
// factor is computed once at construction and reused by the sampler.
class CorrelationMatrix {
  public:
    explicit CorrelationMatrix(Eigen::MatrixXd entries);

    static CorrelationMatrix identity(int d);

    int dim() const { return static_cast<int>(m_.rows()); }
    const Eigen::MatrixXd& entries() const { return m_; }
    const Eigen::MatrixXd& cholesky_lower() const { return chol_lower_; }

  private:
    Eigen::MatrixXd m_;
    Eigen::MatrixXd chol_lower_;
};

// Per-coordinate shift factors tau_i = 1 - R_i^2 together with the smallest
// eigenvalue of the correlation matrix.
struct ShiftProfile {
    Eigen::VectorXd tau;
    double lambda_min = 1.0;
    int d = 0;
};

struct StructureSpec {
    enum class Kind { Equi, AR1, IAR1, BlockDiagonal, Sparse, Prefixed };

    Kind kind = Kind::Equi;
    int d = 2;
    double rho = 0.0;       // pairwise/serial correlation; within-block for BlockDiagonal
    double density = 0.2;   // Sparse: fraction of nonzero off-diagonal entries
    double fraction = 0.25; // Prefixed: fraction of rows filled
    std::uint64_t seed = 0; // Sparse/Prefixed only

    static StructureSpec equi(int d, double rho) { return {Kind::Equi, d, rho, 0.2, 0.25, 0}; }
    static StructureSpec ar1(int d, double rho) { return {Kind::AR1, d, rho, 0.2, 0.25, 0}; }
    static StructureSpec iar1(int d, double rho) { return {Kind::IAR1, d, rho, 0.2, 0.25, 0}; }
    static StructureSpec block(int d, double within_rho = 0.5) {
        return {Kind::BlockDiagonal, d, within_rho, 0.2, 0.25, 0};
    }
    static StructureSpec sparse(int d, std::uint64_t seed) {
        return {Kind::Sparse, d, 0.0, 0.2, 0.25, seed};
    }
    static StructureSpec prefixed(int d, std::uint64_t seed) {
        return {Kind::Prefixed, d, 0.0, 0.2, 0.25, seed};
    }

    std::string name() const;
    static Kind kind_from_name(const std::string& name);
};

// tau selection rules; LambdaMinFraction takes the fraction as an argument
enum class TauRule { Min, Max, Median, ArithMean, GeoMean, HarmMean, LambdaMin, LambdaMinFraction };

std::string tau_rule_name(TauRule rule);

CorrelationMatrix make_correlation(const StructureSpec& spec);

ShiftProfile tau_profile(const CorrelationMatrix& sigma);

double select_tau(const ShiftProfile& profile, TauRule rule, double fraction = 0.9);

// mu + L z with z i.i.d. standard normal from the stream
Eigen::VectorXd sample_mvn(const CorrelationMatrix& sigma, const Eigen::VectorXd& mu,
                           RngStream& rng);

} // namespace shiftfdr

#endif
