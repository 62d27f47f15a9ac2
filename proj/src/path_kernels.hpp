#pragma once

#include <cstddef>
#include <cstdint>

#include "rootbarrier/simulate.hpp"

namespace rootbarrier::kernels {

/// Runs body(p) for every path index. Each body must touch only its own
/// output slots and seed its own generator, so the order is irrelevant.
template <class Body>
void for_each_path(std::size_t n, Execution ex, Body&& body) {
    if (ex == Execution::parallel) {
        const auto count = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(dynamic, 256)
        for (std::int64_t p = 0; p < count; ++p) body(static_cast<std::size_t>(p));
    } else {
        for (std::size_t p = 0; p < n; ++p) body(p);
    }
}

}  // namespace rootbarrier::kernels
