#include "lsvj/parallel.hpp"

#include <atomic>

namespace lsvj {

namespace {
std::atomic<std::size_t> g_threads{1};
}

void set_thread_count(std::size_t n) { g_threads = n == 0 ? 1 : n; }
std::size_t thread_count() { return g_threads; }

}  // namespace lsvj
