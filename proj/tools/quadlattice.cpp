#include "quadlattice/linalg.hpp"
#include "quadlattice/parallel.hpp"
#include "quadlattice/pipeline.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>

int main(int argc, char** argv) {
    using namespace ql;
    CLI::App app{"quadlattice: band structure, quadratic degeneracy, gap opening and interface modes of a "
                 "square-lattice gyromagnetic photonic crystal"};
    app.require_subcommand(1);
    std::string config_path, out_dir = "out";
    std::optional<double> delta;
    std::optional<int> cutoff, threads;
    RunOptions opt;
    std::vector<int> bands;
    app.add_option("--config", config_path, "JSON config (flat keys)")->check(CLI::ExistingFile);
    app.add_option("--out", out_dir, "output directory")->capture_default_str();
    app.add_option("--delta", delta, "override the perturbation strength");
    app.add_option("--cutoff", cutoff, "override the plane-wave cutoff");
    app.add_option("--supercell", opt.supercell, "interface supercell half-width N (cells)")->capture_default_str();
    app.add_option("--threads", threads, "worker threads (default QUADLATTICE_THREADS or 1)");
    app.add_option("--bands", bands, "interface: bulk band window LO HI for the projected supercell")->expected(2);
    std::string command;
    for (const auto& c : commands()) app.add_subcommand(c)->fallthrough()->callback([&command, c] { command = c; });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    int nt = 1;
    if (threads) nt = *threads;
    else if (const char* env = std::getenv("QUADLATTICE_THREADS")) nt = std::atoi(env);
    if (nt < 1) {
        std::cerr << "error: threads: must be a positive integer\n";
        return 2;
    }
    set_threads(nt);
    single_threaded_blas();

    try {
        CrystalConfig cfg = config_path.empty() ? CrystalConfig{} : load_config(config_path);
        if (delta) cfg.delta = *delta;
        if (cutoff) cfg.cutoff = *cutoff;
        cfg.validate();
        if (bands.size() == 2) opt.band_lo = bands[0], opt.band_hi = bands[1];
        Context ctx(cfg);
        RunManifest man(out_dir, command, cfg);
        man.note("threads", nt);
        if (command == "interface") man.note("supercell", opt.supercell);
        int rc = 0;
        try {
            rc = run_command(command, ctx, man, opt, std::cout);
        } catch (const AssumptionError& e) {
            man.finish(3);
            std::cerr << "assumption failed (" << e.assumption << "): " << e.what() << '\n';
            return 3;
        }
        man.finish(rc);
        return rc;
    } catch (const ConfigError& e) {
        std::cerr << "config error [" << e.key << "]: " << e.what() << '\n';
        return 2;
    } catch (const AssumptionError& e) {
        std::cerr << "assumption failed (" << e.assumption << "): " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 4;
    }
}
