#include "quadlattice/parallel.hpp"

#include <cstdlib>
#include <string>

namespace ql {

namespace {
std::atomic<int> g_threads{0};
}

void set_threads(int n) { g_threads = n > 0 ? n : 0; }

int threads() {
    if (int n = g_threads.load(); n > 0) return n;
    if (const char* env = std::getenv("QUADLATTICE_THREADS")) {
        try {
            int n = std::stoi(env);
            if (n > 0) return n;
        } catch (...) {
        }
    }
    return 1;
}

}  // namespace ql
