#include "gwlimit/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <random>
#include <stdexcept>
#include <thread>

namespace gwlimit {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

// Below this many parents, offspring are drawn one individual at a time.
constexpr std::uint64_t kPerIndividualLimit = 32;

Philox4x32::Block philox_round(const Philox4x32::Block& x, const Philox4x32::Key& k) {
    const std::uint64_t p0 = std::uint64_t(kMul0) * x[0];
    const std::uint64_t p1 = std::uint64_t(kMul1) * x[2];
    return {std::uint32_t(p1 >> 32) ^ x[1] ^ k[0], std::uint32_t(p1), std::uint32_t(p0 >> 32) ^ x[3] ^ k[1],
            std::uint32_t(p0)};
}

class OffspringSampler {
public:
    explicit OffspringSampler(const Pgf& pgf) : pgf_(pgf) {
        if (pgf.is_polynomial()) {
            probs_ = pgf.as_polynomial().p;
            cdf_.resize(probs_.size());
            double acc = 0.0;
            for (std::size_t j = 0; j < probs_.size(); ++j) cdf_[j] = (acc += probs_[j]);
            cdf_.back() = 1.0;
        } else {
            const auto lf = pgf.as_linear_fractional();
            p0_ = pgf.p0();
            c_ = lf.c;
            log_c_ = std::log(lf.c);
        }
    }

    std::uint64_t next_generation(std::uint64_t parents, Philox4x32& rng) const {
        if (parents == 0) return 0;
        if (parents <= kPerIndividualLimit) {
            std::uint64_t total = 0;
            for (std::uint64_t i = 0; i < parents; ++i) total += one(rng);
            return total;
        }
        return pgf_.is_polynomial() ? multinomial_total(parents, rng) : linear_fractional_total(parents, rng);
    }

private:
    std::uint64_t one(Philox4x32& rng) const {
        const double u = rng.uniform();
        if (pgf_.is_polynomial()) {
            std::size_t j = 0;
            while (u >= cdf_[j]) ++j;
            return j;
        }
        if (u < p0_) return 0;
        // 1 + Geometric: P(k extra) = (1 - c) c^k.
        const double v = 1.0 - rng.uniform();
        return 1 + static_cast<std::uint64_t>(std::floor(std::log(v) / log_c_));
    }

    std::uint64_t multinomial_total(std::uint64_t parents, Philox4x32& rng) const {
        std::uint64_t remaining = parents;
        double mass_left = 1.0;
        std::uint64_t total = 0;
        const std::size_t d = probs_.size() - 1;
        for (std::size_t j = 0; j < d && remaining > 0; ++j) {
            const double p = mass_left > 0.0 ? std::clamp(probs_[j] / mass_left, 0.0, 1.0) : 1.0;
            std::binomial_distribution<std::uint64_t> draw(remaining, p);
            const std::uint64_t n_j = draw(rng);
            total += j * n_j;
            remaining -= n_j;
            mass_left -= probs_[j];
        }
        return total + d * remaining;
    }

    std::uint64_t linear_fractional_total(std::uint64_t parents, Philox4x32& rng) const {
        std::binomial_distribution<std::uint64_t> breeders(parents, 1.0 - p0_);
        const std::uint64_t n = breeders(rng);
        if (n == 0) return 0;
        std::negative_binomial_distribution<std::uint64_t> extra(n, 1.0 - c_);
        return n + extra(rng);
    }

    const Pgf& pgf_;
    std::vector<double> probs_;
    std::vector<double> cdf_;
    double p0_ = 0.0;
    double c_ = 0.0;
    double log_c_ = 0.0;
};

}  // namespace

Philox4x32::Philox4x32(std::uint64_t key, std::uint64_t stream_id)
    : key_{std::uint32_t(key), std::uint32_t(key >> 32)}, stream_(stream_id) {}

Philox4x32::Block Philox4x32::bijection(Block counter, Key key) {
    for (int round = 0; round < 10; ++round) {
        if (round > 0) {
            key[0] += kWeyl0;
            key[1] += kWeyl1;
        }
        counter = philox_round(counter, key);
    }
    return counter;
}

Philox4x32::result_type Philox4x32::operator()() {
    if (used_ == 2) {
        buffer_ = bijection({std::uint32_t(block_index_), std::uint32_t(block_index_ >> 32), std::uint32_t(stream_),
                             std::uint32_t(stream_ >> 32)},
                            key_);
        ++block_index_;
        used_ = 0;
    }
    const std::uint64_t lo = buffer_[2 * used_];
    const std::uint64_t hi = buffer_[2 * used_ + 1];
    ++used_;
    return lo | (hi << 32);
}

double Philox4x32::uniform() { return double((*this)() >> 11) * 0x1.0p-53; }

Histogram positive_histogram(std::span<const double> samples, std::size_t bins) {
    if (bins < 1) throw std::invalid_argument("histogram needs at least one bin");
    double top = 0.0;
    for (double w : samples) top = std::max(top, w);
    Histogram h;
    if (!(top > 0.0)) return h;
    const double width = top / double(bins);
    h.edges.resize(bins + 1);
    for (std::size_t k = 0; k <= bins; ++k) h.edges[k] = width * double(k);
    h.counts.assign(bins, 0);
    for (double w : samples) {
        if (!(w > 0.0)) continue;
        const auto k = std::min(bins - 1, static_cast<std::size_t>(w / width));
        ++h.counts[k];
    }
    return h;
}

TailFit estimate_beta(std::span<const double> samples, std::size_t bins, std::pair<double, double> fit_range) {
    const auto [lo, hi] = fit_range;
    if (!(lo >= 0.0 && lo < hi && hi <= 1.0)) throw std::invalid_argument("tail fit range must satisfy 0 <= lo < hi <= 1");
    const auto positive = std::count_if(samples.begin(), samples.end(), [](double w) { return w > 0.0; });
    if (positive < 100) throw std::invalid_argument("tail fit needs at least 100 positive samples");

    const Histogram h = positive_histogram(samples, bins);
    const double top = h.edges.back();
    const double width = h.edges[1] - h.edges[0];
    std::vector<double> xs;
    std::vector<double> ys;
    for (std::size_t k = 0; k < h.counts.size(); ++k) {
        const double centre = h.edges[k] + 0.5 * width;
        if (centre < lo * top || centre > hi * top || h.counts[k] == 0) continue;
        xs.push_back(centre);
        ys.push_back(std::log(double(h.counts[k]) / (double(positive) * width)));
    }
    if (xs.size() < 3) throw std::runtime_error("tail fit underdetermined");

    const double n = double(xs.size());
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0;
    double sxy = 0.0;
    double syy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
        syy += (ys[i] - my) * (ys[i] - my);
    }
    const double slope = sxy / sxx;
    const double ss_res = syy - slope * sxy;
    return TailFit{-slope, syy > 0.0 ? 1.0 - ss_res / syy : 1.0};
}

SimOutput simulate_w(const Pgf& pgf, const SimConfig& cfg) {
    const double m = mean(pgf);
    if (!(m > 1.0)) throw std::domain_error("mean offspring <= 1");
    if (cfg.replicates < 100) throw std::invalid_argument("need at least 100 replicates");
    if (cfg.generations < 1) throw std::invalid_argument("need at least one generation");
    if (pgf.is_polynomial() && std::abs(pgf.value(1.0) - 1.0) > 1e-12)
        throw std::invalid_argument("offspring law must sum to 1");
    const auto [lo, hi] = cfg.tail_fit_range;
    if (!(lo >= 0.0 && lo < hi && hi <= 1.0)) throw std::invalid_argument("tail fit range must satisfy 0 <= lo < hi <= 1");
    if (cfg.bins < 1) throw std::invalid_argument("histogram needs at least one bin");

    const OffspringSampler sampler(pgf);
    const double scale = std::pow(m, -cfg.generations);
    std::vector<double> w(cfg.replicates);

    unsigned workers = cfg.workers != 0 ? cfg.workers : std::max(1u, std::thread::hardware_concurrency());
    workers = static_cast<unsigned>(std::min<std::size_t>(workers, cfg.replicates));
    std::vector<std::exception_ptr> errors(workers);

    auto run = [&](unsigned worker) {
        try {
            for (std::size_t r = worker; r < cfg.replicates; r += workers) {
                Philox4x32 rng(cfg.seed, r);
                std::uint64_t z = 1;
                for (int t = 0; t < cfg.generations && z > 0; ++t) {
                    z = sampler.next_generation(z, rng);
                    if (z > cfg.population_cap)
                        throw std::runtime_error("population cap exceeded; increase cap or reduce T");
                }
                w[r] = double(z) * scale;
            }
        } catch (...) {
            errors[worker] = std::current_exception();
        }
    };

    if (workers == 1) {
        run(0);
    } else {
        std::vector<std::thread> pool;
        for (unsigned k = 0; k < workers; ++k) pool.emplace_back(run, k);
        for (auto& th : pool) th.join();
    }
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);

    SimOutput out;
    const auto survivors = std::count_if(w.begin(), w.end(), [](double x) { return x > 0.0; });
    out.survived_fraction = double(survivors) / double(cfg.replicates);
    out.histogram = positive_histogram(w, cfg.bins);
    try {
        out.tail_fit = estimate_beta(w, cfg.bins, cfg.tail_fit_range);
    } catch (const std::invalid_argument&) {
    } catch (const std::runtime_error&) {
    }
    out.w_samples = std::move(w);
    return out;
}

}  // namespace gwlimit
