#pragma once

#include "quadlattice/crystal.hpp"

#include <functional>
#include <string>
#include <vector>

namespace ql {

struct Criterion {
    int id = 0;
    std::string title;
    bool pass = false;
    bool blocking = true;
    double seconds = 0;
    double budget = 0;  // seconds
    std::string summary;
    std::vector<std::string> notes;  // diagnostics, printed indented
};

struct AcceptanceOptions {
    std::vector<int> only;   // empty: all
    bool large_n = true;     // band-projected large-supercell diagnostics for the interface criterion
};

std::vector<Criterion> run_acceptance(const CrystalConfig& cfg, const AcceptanceOptions& opt,
                                      const std::function<void(const Criterion&)>& on_done = {});

std::string format_criterion(const Criterion& c);

}  // namespace ql
