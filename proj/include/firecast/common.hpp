#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace firecast {

// Dense storage is row-major throughout so flat buffers (checkpoints, binary
// payloads) read back in the documented order.
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vec = Eigen::VectorXd;
using MatMap = Eigen::Map<Mat>;
using ConstMatMap = Eigen::Map<const Mat>;
using VecMap = Eigen::Map<Vec>;
using ConstVecMap = Eigen::Map<const Vec>;

struct ShapeError : std::runtime_error {
    explicit ShapeError(const std::string& what) : std::runtime_error(what) {}
};

struct RangeError : std::runtime_error {
    explicit RangeError(const std::string& what) : std::runtime_error(what) {}
};

struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

struct NumericError : std::runtime_error {
    explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

struct IoError : std::runtime_error {
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

/**
 * Seeded random stream with hand-rolled draw functions.
 *
 * The standard distributions are implementation-defined, so every draw here
 * is spelled out explicitly; a given seed produces the same stream on any
 * conforming platform.
 */
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() { return state_(); }

    /// Uniform draw in [0, 1) with 53 bits of entropy.
    double uniform01() { return static_cast<double>(state_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    /// Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n) { return state_() % n; }

    /// Standard normal via Marsaglia polar method.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * uniform01() - 1.0;
            v = 2.0 * uniform01() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double mul = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * mul;
        has_spare_ = true;
        return u * mul;
    }

    /// Seeded Fisher-Yates shuffle.
    template <typename T>
    void shuffle(std::vector<T>& items) {
        for (std::size_t i = items.size(); i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(below(i));
            std::swap(items[i - 1], items[j]);
        }
    }

    /// First `count` elements of a seeded shuffle of 0..n-1 (sample without
    /// replacement).
    std::vector<int> sample_without_replacement(int n, int count) {
        std::vector<int> idx(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) idx[static_cast<std::size_t>(i)] = i;
        shuffle(idx);
        idx.resize(static_cast<std::size_t>(count));
        return idx;
    }

private:
    std::mt19937_64 state_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

/**
 * Runs fn(lo, hi) over contiguous partitions of [0, count) on up to
 * `threads` workers. With threads <= 1 the call happens inline. Partitions
 * are fixed by (count, threads), so any result each worker writes to its own
 * slot is identical across thread counts.
 */
void parallel_for(std::size_t count, int threads,
                  const std::function<void(std::size_t, std::size_t)>& fn);

}  // namespace firecast
