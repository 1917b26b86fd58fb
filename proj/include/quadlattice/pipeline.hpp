#pragma once

#include "quadlattice/degeneracy.hpp"
#include "quadlattice/io.hpp"
#include "quadlattice/perturbation.hpp"

#include <iosfwd>
#include <optional>
#include <string>

namespace ql {

// lazily computed, cached stages of one crystal
class Context {
public:
    explicit Context(CrystalConfig cfg);
    const CrystalConfig& config() const { return cfg_; }
    const FourierCoeffs& coeffs();
    const BzSample& bz();
    const PairSelection& selection();  // AssumptionError if no admissible pair
    const MPointPair& pair();
    const AnalyticBranch& branch();
    const FitResult& fit();
    const TStar& t_star();
    cplx r_star();
    DegeneracyReport degeneracy();

private:
    CrystalConfig cfg_;
    std::optional<FourierCoeffs> coeffs_;
    std::optional<BzSample> bz_;
    std::optional<PairSelection> sel_;
    std::optional<MPointPair> pair_;
    std::optional<AnalyticBranch> branch_;
    std::optional<FitResult> fit_;
    std::optional<TStar> t_;
    std::optional<cplx> r_;
};

inline constexpr int scan_bands = 16;
inline constexpr double branch_halfwidth = 0.3;
inline constexpr int branch_points = 61;

struct RunOptions {
    int supercell = 12;
    int band_lo = -1, band_hi = -1;  // projected supercell window, -1: full plane waves
    int nbands = 16;
    int per_leg = 20;
};

inline const std::vector<std::string>& commands() {
    static const std::vector<std::string> c{"bands",  "degeneracy", "flux",     "perturb",   "green",
                                            "kernels", "interface", "bie-scan", "verify-all"};
    return c;
}

// writes the command's artifacts through `out`, a summary to `log`; returns the exit status
int run_command(const std::string& command, Context& ctx, RunManifest& out, const RunOptions& opt, std::ostream& log);

}  // namespace ql
