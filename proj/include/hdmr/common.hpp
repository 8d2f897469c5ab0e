#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <cstdlib>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace hdmr {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Exit-code contract shared with the CLI: 2 input, 3 degenerate, 4 capacity.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Malformed or out-of-contract input (bad CSV, shape mismatch, parameter
// outside its admissible range).
class InputError : public Error {
  public:
    using Error::Error;
};

class DomainError : public InputError {
  public:
    using InputError::InputError;
};

class ShapeError : public InputError {
  public:
    using InputError::InputError;
};

// Structurally valid input that admits no answer (zero-variance target,
// annihilated subspace at |rho| = 1).
class DegenerateError : public Error {
  public:
    using Error::Error;
};

// Resource guard tripped (feature-map enumeration, quadrature tensors).
class CapacityError : public Error {
  public:
    using Error::Error;
};

// Requested analytic moment order above the configured cap. Callers must
// switch to an empirical measure rather than silently sampling.
class MomentOrderError : public InputError {
  public:
    using InputError::InputError;
};

inline constexpr int kMaxAnalyticMomentOrder = 16;

inline int default_thread_count() {
    if (const char* env = std::getenv("HDMR_THREADS")) {
        int v = std::atoi(env);
        if (v >= 1) return v;
    }
    unsigned hc = std::thread::hardware_concurrency();
    return hc == 0 ? 1 : static_cast<int>(hc);
}

inline int& thread_count() {
    static int count = default_thread_count();
    return count;
}

// Static block partition; bodies must not touch shared mutable state.
inline void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body) {
    int threads = thread_count();
    if (threads <= 1 || n < 2) {
        body(0, n);
        return;
    }
    std::size_t chunks = std::min<std::size_t>(static_cast<std::size_t>(threads), n);
    std::size_t step = (n + chunks - 1) / chunks;
    std::vector<std::thread> pool;
    pool.reserve(chunks);
    for (std::size_t c = 0; c < chunks; ++c) {
        std::size_t lo = c * step;
        std::size_t hi = std::min(n, lo + step);
        if (lo >= hi) break;
        pool.emplace_back([&body, lo, hi] { body(lo, hi); });
    }
    for (auto& t : pool) t.join();
}

inline uint64_t derive_seed(uint64_t base, uint64_t stream) {
    // splitmix64 step keeps replicate streams decorrelated.
    uint64_t z = base + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace hdmr
