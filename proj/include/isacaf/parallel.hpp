// SPDX-License-Identifier: Apache-2.0
//
// isacaf - ambiguity function and ranging simulation of OFDM ISAC signals
// under power-amplifier clipping.

#pragma once

// Deterministic Monte-Carlo reduction.
//
// Trials are cut into fixed-size blocks whose boundaries do not depend on the
// worker count. Each block is accumulated sequentially in trial order and the
// block partials are merged in block order, so the floating-point result is
// bit-identical for any number of workers.

#include <algorithm>
#include <cstddef>
#include <exception>
#include <optional>
#include <thread>
#include <vector>

namespace isacaf {

inline constexpr std::size_t kTrialBlock = 64;

struct ParallelOptions {
    unsigned workers = 1;
    std::size_t block = kTrialBlock;
};

/// Default worker count for library calls that do not receive one.
inline unsigned& default_workers()
{
    static unsigned w = 1;
    return w;
}

/// Run `accumulate(partial, trial)` for trial in [0, trials) and return the merged partial.
///
/// `make()` creates an empty partial, `merge(into, from)` folds one block into the total.
template <class Make, class Accumulate, class Merge>
auto reduce_trials(std::size_t trials, Make make, Accumulate accumulate, Merge merge, ParallelOptions opt = {})
{
    using Partial = decltype(make());
    const std::size_t block = std::max<std::size_t>(1, opt.block);
    const std::size_t nblocks = (trials + block - 1) / block;
    const unsigned workers = std::max(1u, opt.workers);

    Partial total = make();
    std::vector<std::optional<Partial>> slots(std::min<std::size_t>(workers, std::max<std::size_t>(nblocks, 1)));

    auto run_block = [&](std::size_t b, std::optional<Partial>& slot) {
        Partial p = make();
        const std::size_t lo = b * block;
        const std::size_t hi = std::min(trials, lo + block);
        for (std::size_t t = lo; t < hi; ++t) accumulate(p, t);
        slot = std::move(p);
    };

    for (std::size_t wave = 0; wave < nblocks; wave += slots.size()) {
        const std::size_t count = std::min(slots.size(), nblocks - wave);
        if (count == 1 || workers == 1) {
            for (std::size_t i = 0; i < count; ++i) run_block(wave + i, slots[i]);
        } else {
            std::vector<std::exception_ptr> errors(count);
            std::vector<std::thread> pool;
            pool.reserve(count);
            for (std::size_t i = 0; i < count; ++i) {
                pool.emplace_back([&, i] {
                    try {
                        run_block(wave + i, slots[i]);
                    } catch (...) {
                        errors[i] = std::current_exception();
                    }
                });
            }
            for (auto& th : pool) th.join();
            for (auto& e : errors)
                if (e) std::rethrow_exception(e);
        }
        for (std::size_t i = 0; i < count; ++i) {
            merge(total, *slots[i]);
            slots[i].reset();
        }
    }
    return total;
}

/// Element-wise `into += from` for vector partials.
template <class V>
void add_into(V& into, const V& from)
{
    for (std::size_t i = 0; i < into.size(); ++i) into[i] += from[i];
}

/// Evaluate `fn(i)` for i in [0, n) on `workers` threads; results returned in index order.
template <class Fn>
auto parallel_map(std::size_t n, Fn fn, unsigned workers)
{
    using R = decltype(fn(std::size_t{0}));
    std::vector<std::optional<R>> out(n);
    workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
    if (workers == 1) {
        for (std::size_t i = 0; i < n; ++i) out[i] = fn(i);
    } else {
        std::vector<std::exception_ptr> errors(workers);
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < workers; ++w) {
            pool.emplace_back([&, w] {
                try {
                    for (std::size_t i = w; i < n; i += workers) out[i] = fn(i);
                } catch (...) {
                    errors[w] = std::current_exception();
                }
            });
        }
        for (auto& th : pool) th.join();
        for (auto& e : errors)
            if (e) std::rethrow_exception(e);
    }
    std::vector<R> res;
    res.reserve(n);
    for (auto& o : out) res.push_back(std::move(*o));
    return res;
}

} // namespace isacaf
