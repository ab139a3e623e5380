#include "mpdr/parallel.hpp"

#include <algorithm>
#include <cerrno>
#include <cstdlib>
#include <mutex>
#include <thread>
#include <vector>

#include "mpdr/error.hpp"

namespace mpdr {

std::size_t thread_budget() {
    const char* env = std::getenv("MPDR_THREADS");
    if (env == nullptr || *env == '\0') {
        unsigned hc = std::thread::hardware_concurrency();
        return hc == 0 ? 1 : hc;
    }
    errno = 0;
    char* end = nullptr;
    unsigned long long v = std::strtoull(env, &end, 10);
    if (errno != 0 || end == env || *end != '\0' || v == 0 || env[0] == '-') {
        throw ConfigError(std::string("MPDR_THREADS must be a positive integer, got '") + env +
                          "'");
    }
    return static_cast<std::size_t>(v);
}

void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& fn) {
    if (n == 0) return;
    const std::size_t workers = std::min(thread_budget(), n);
    if (workers <= 1) {
        fn(0, n);
        return;
    }

    const std::size_t chunk = n / workers;
    const std::size_t extra = n % workers; // first `extra` workers take one more

    std::mutex mu;
    std::exception_ptr first_error;
    auto run = [&](std::size_t begin, std::size_t end) {
        try {
            fn(begin, end);
        } catch (...) {
            std::lock_guard<std::mutex> lock(mu);
            if (!first_error) first_error = std::current_exception();
        }
    };

    std::vector<std::thread> threads;
    threads.reserve(workers - 1);
    std::size_t begin = 0;
    for (std::size_t w = 0; w < workers; ++w) {
        std::size_t end = begin + chunk + (w < extra ? 1 : 0);
        if (w == workers - 1) {
            run(begin, end); // last range on the calling thread
        } else {
            threads.emplace_back(run, begin, end);
        }
        begin = end;
    }
    for (std::thread& t : threads) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

} // namespace mpdr
