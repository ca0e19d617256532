#pragma once

#include <algorithm>
#include <cstddef>
#include <thread>
#include <vector>

namespace sphw {

/// Runs body(begin, end) over [0, n) split into contiguous chunks, one per
/// worker. Each index is written by exactly one worker, so results do not
/// depend on the worker count.
template <class Body>
void parallel_for(std::size_t n, int workers, Body&& body) {
    const std::size_t w = static_cast<std::size_t>(std::max(1, workers));
    if (w == 1 || n < 2 * w) {
        body(std::size_t{0}, n);
        return;
    }
    std::vector<std::jthread> pool;
    pool.reserve(w - 1);
    const std::size_t chunk = (n + w - 1) / w;
    for (std::size_t t = 1; t < w; ++t) {
        const std::size_t b = std::min(n, t * chunk);
        const std::size_t e = std::min(n, b + chunk);
        if (b < e) pool.emplace_back([&body, b, e] { body(b, e); });
    }
    body(std::size_t{0}, std::min(n, chunk));
}

} // namespace sphw
