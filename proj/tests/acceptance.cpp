#include "quadlattice/acceptance.hpp"
#include "quadlattice/linalg.hpp"
#include "quadlattice/parallel.hpp"

#include <cstdlib>
#include <iostream>

int main(int argc, char** argv) {
    using namespace ql;
    int nt = 1;
    if (const char* env = std::getenv("QUADLATTICE_THREADS")) nt = std::max(1, std::atoi(env));
    set_threads(nt);
    single_threaded_blas();
    AcceptanceOptions opt;
    for (int i = 1; i < argc; ++i) {
        const std::string a = argv[i];
        if (a == "--no-large-n") opt.large_n = false;
        else opt.only.push_back(std::atoi(a.c_str()));
    }
    int failed = 0;
    const auto res = run_acceptance(CrystalConfig{}, opt, [](const Criterion& c) { std::cout << format_criterion(c) << std::flush; });
    for (const auto& c : res) failed += c.blocking && !c.pass;
    std::cout << (failed ? "acceptance: " + std::to_string(failed) + " blocking criteria failed" : std::string("acceptance: all blocking criteria passed")) << '\n';
    return failed ? 1 : 0;
}
