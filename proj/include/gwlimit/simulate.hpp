#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "gwlimit/gwmodel.hpp"

namespace gwlimit {

/// Philox4x32-10 counter-based generator. Stream (key, stream_id) yields the
/// blocks philox(counter = (i_lo, i_hi, id_lo, id_hi), key) for i = 0, 1, ...
/// Satisfies UniformRandomBitGenerator with 64-bit output.
class Philox4x32 {
public:
    using result_type = std::uint64_t;
    using Block = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    Philox4x32(std::uint64_t key, std::uint64_t stream_id);

    static Block bijection(Block counter, Key key);

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
    result_type operator()();

    /// Uniform on [0, 1) with 53 random bits.
    double uniform();

private:
    Key key_;
    std::uint64_t stream_;
    std::uint64_t block_index_ = 0;
    Block buffer_{};
    int used_ = 2;
};

struct SimConfig {
    std::size_t replicates = 100000;
    int generations = 12;
    std::uint64_t seed = 0;
    std::size_t bins = 100;
    std::pair<double, double> tail_fit_range{0.7, 1.0};
    /// 0 picks std::thread::hardware_concurrency().
    unsigned workers = 0;
    std::uint64_t population_cap = 1000000000;
};

struct Histogram {
    std::vector<double> edges;
    std::vector<std::size_t> counts;
};

struct TailFit {
    double beta_hat = 0.0;
    double r2 = 0.0;
};

struct SimOutput {
    std::vector<double> w_samples;
    double survived_fraction = 0.0;
    Histogram histogram;
    /// Empty when the tail fit is underdetermined, e.g. a degenerate W.
    std::optional<TailFit> tail_fit;
};

/// Uniform-width histogram of the strictly positive samples over [0, max].
Histogram positive_histogram(std::span<const double> samples, std::size_t bins);

/// Least-squares slope of log(count / (n * width)) against bin centre, over
/// bins whose centres lie in [lo * max, hi * max]; empty bins are dropped.
/// Needs at least 100 positive samples and 3 usable bins.
TailFit estimate_beta(std::span<const double> samples, std::size_t bins, std::pair<double, double> fit_range);

/// M independent runs of T generations from Z_0 = 1; W = Z_T / m^T.
/// Replicate r draws from Philox4x32(seed, r), so the samples do not depend on
/// the number of workers. Small generations draw offspring one individual at a
/// time by inverse CDF; larger ones draw the exact generation total from its
/// multinomial (or binomial/negative-binomial) decomposition.
SimOutput simulate_w(const Pgf& pgf, const SimConfig& cfg);

}  // namespace gwlimit
