#include "torcount/parallel.hpp"

namespace torcount {

unsigned resolve_threads(unsigned requested) {
    if (requested) return requested;
    unsigned hw = std::thread::hardware_concurrency();
    return hw ? hw : 1;
}

}  // namespace torcount
