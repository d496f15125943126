#include "shiftfdr/config.hpp"

#include <cinttypes>
#include <cstdio>

namespace shiftfdr {

namespace {

// locale-independent decimal formatting, >= 6 significant digits
std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

} // namespace

std::string results_csv(const ExperimentSummary& summary) {
    std::string out =
        "scenario,procedure,structure,rho,d,n,mu,null_frac,alpha,"
        "fdr_hat,fdr_se,power_hat,power_se,mean_rejections,replications,seed\n";
    for (const CellRecord& c : summary.cells) {
        char tail[160];
        std::snprintf(tail, sizeof(tail), ",%d,%" PRIu64 "\n", c.replications,
                      static_cast<std::uint64_t>(c.seed));
        out += c.scenario + ',' + c.procedure + ',' + c.structure + ',' + fmt(c.rho) + ',' +
               std::to_string(c.d) + ',' + std::to_string(c.n) + ',' + fmt(c.mu) + ',' +
               fmt(c.null_frac) + ',' + fmt(c.alpha) + ',' + fmt(c.fdr_hat) + ',' +
               fmt(c.fdr_se) + ',' + fmt(c.power_hat) + ',' + fmt(c.power_se) + ',' +
               fmt(c.mean_rejections) + tail;
    }
    return out;
}

} // namespace shiftfdr
