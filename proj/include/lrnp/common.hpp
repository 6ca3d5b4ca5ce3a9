#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace lrnp {

/// Raised when caller-supplied data or parameters violate a documented
/// precondition. The CLI maps it to exit status 2.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

using Rng = std::mt19937_64;

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Counter-based seed derivation. Every random consumer in the library takes
/// its seed from (master, stream, index) so results do not depend on the
/// order in which independent pieces of work are executed.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream,
                                    std::uint64_t index = 0) {
  return splitmix64(master ^ splitmix64(stream * 0x100000001b3ULL ^ splitmix64(index)));
}

// Stream identifiers used with derive_seed.
namespace stream {
inline constexpr std::uint64_t features = 1;
inline constexpr std::uint64_t noise = 2;
inline constexpr std::uint64_t mechanism = 3;
inline constexpr std::uint64_t target = 4;
inline constexpr std::uint64_t tree = 5;
inline constexpr std::uint64_t label = 6;
inline constexpr std::uint64_t fold = 7;
inline constexpr std::uint64_t run = 8;
inline constexpr std::uint64_t sweep = 9;
inline constexpr std::uint64_t honesty = 10;
inline constexpr std::uint64_t subsample = 11;
inline constexpr std::uint64_t tie_break = 12;
}  // namespace stream

/// Runs fn(i) for i in [0, count) on up to `threads` worker threads.
/// Work items must write to disjoint outputs. The first exception thrown by
/// any item is rethrown on the calling thread.
template <class Fn>
void parallel_for(std::size_t count, unsigned threads, Fn&& fn) {
  if (threads <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  const std::size_t workers = std::min<std::size_t>(threads, count);
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < count; i += workers) fn(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace lrnp
