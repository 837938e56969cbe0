#include "marginmine/parallel.hpp"

#include <cstdlib>
#include <string>

namespace marginmine {

std::size_t resolve_threads(int requested) {
    if (requested > 0) {
        return static_cast<std::size_t>(requested);
    }
    if (const char* env = std::getenv("MARGIN_MINER_THREADS")) {
        try {
            const int v = std::stoi(env);
            if (v > 0) {
                return static_cast<std::size_t>(v);
            }
        } catch (const std::exception&) {
            // fall through to hardware default
        }
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? hw : 1;
}

} // namespace marginmine
