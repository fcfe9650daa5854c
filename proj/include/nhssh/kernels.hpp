#pragma once

// Data-parallel loops. Every kernel has a plain serial reference and an
// OpenMP variant; both evaluate the same per-index function and write to
// disjoint slots, so results are bit-identical regardless of thread count.

#include <cstddef>
#include <exception>
#include <vector>

namespace nhssh {

enum class Execution { Serial, Parallel };

/// Set the OpenMP thread count (no-op when built without OpenMP).
void set_thread_count(int threads);
[[nodiscard]] int thread_count();

namespace detail {

inline void rethrow_first(const std::vector<std::exception_ptr>& errors) {
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

}  // namespace detail

namespace serial {

template <class T, class Fn>
std::vector<T> map_indexed(std::size_t n, Fn&& fn) {
    std::vector<T> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = fn(i);
    return out;
}

}  // namespace serial

namespace omp {

// Exceptions cannot cross the parallel region; they are parked per index and
// the lowest-index one is rethrown, matching what the serial loop would throw.
template <class T, class Fn>
std::vector<T> map_indexed(std::size_t n, Fn&& fn) {
    std::vector<T> out(n);
    std::vector<std::exception_ptr> errors(n);
    const auto count = static_cast<long long>(n);
#pragma omp parallel for schedule(dynamic)
    for (long long i = 0; i < count; ++i) {
        const auto idx = static_cast<std::size_t>(i);
        try {
            out[idx] = fn(idx);
        } catch (...) {
            errors[idx] = std::current_exception();
        }
    }
    detail::rethrow_first(errors);
    return out;
}

}  // namespace omp

template <class T, class Fn>
std::vector<T> map_indexed(std::size_t n, Fn&& fn, Execution exec) {
    return exec == Execution::Serial ? serial::map_indexed<T>(n, fn) : omp::map_indexed<T>(n, fn);
}

}  // namespace nhssh
