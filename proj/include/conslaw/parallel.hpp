#pragma once

#include <cstddef>
#include <exception>
#include <limits>

namespace conslaw {

// Serial is the reference path; Parallel must produce bit-identical output.
enum class Exec { Serial, Parallel };

void set_thread_count(int n);
int thread_count();

// Exceptions thrown by fn are rethrown after the loop; with several, the one
// from the lowest index wins so the error does not depend on scheduling.
template <class Fn>
void for_each_index(std::size_t n, Exec exec, Fn&& fn) {
    if (exec == Exec::Parallel) {
        const long long count = static_cast<long long>(n);
        std::exception_ptr error;
        std::size_t error_index = std::numeric_limits<std::size_t>::max();
#pragma omp parallel for schedule(dynamic, 16)
        for (long long i = 0; i < count; ++i) {
            try {
                fn(static_cast<std::size_t>(i));
            } catch (...) {
#pragma omp critical(conslaw_loop_error)
                if (static_cast<std::size_t>(i) < error_index) {
                    error_index = static_cast<std::size_t>(i);
                    error = std::current_exception();
                }
            }
        }
        if (error) std::rethrow_exception(error);
    } else {
        for (std::size_t i = 0; i < n; ++i) fn(i);
    }
}

}  // namespace conslaw
