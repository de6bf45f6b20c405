#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include <nvmx/core/rng.hpp>
#include <nvmx/cov/records.hpp>

namespace nvmx {

// One-pass accumulator of means and co-moments over a fixed set of channels.
// Welford updates keep it numerically stable for long shot streams, and two
// accumulators filled from disjoint shot ranges merge exactly, so partial
// sums from parallel workers combine in any association order.
class CovAccumulator {
  public:
    explicit CovAccumulator(std::size_t n_channels)
        : k_(n_channels), mean_(n_channels, 0.0), m2_(n_channels * n_channels, 0.0),
          delta_(n_channels, 0.0) {
        if (n_channels < 2)
            throw std::invalid_argument("CovAccumulator: need at least 2 channels");
    }

    std::size_t channels() const { return k_; }
    std::size_t count() const { return n_; }

    void add(const std::vector<double>& x) {
        if (x.size() != k_)
            throw std::invalid_argument("CovAccumulator: sample dimension mismatch");
        add(x.data());
    }

    void add(const double* x) {
        n_ += 1;
        double n = static_cast<double>(n_);
        // co-moment increment is the outer product of the deviation from the
        // previous mean, scaled by (n-1)/n; written this way the matrix stays
        // exactly symmetric
        double w = (n - 1.0) / n;
        for (std::size_t i = 0; i < k_; ++i) delta_[i] = x[i] - mean_[i];
        for (std::size_t i = 0; i < k_; ++i) {
            double wi = w * delta_[i];
            double* row = &m2_[i * k_];
            for (std::size_t j = 0; j < k_; ++j) row[j] += wi * delta_[j];
        }
        for (std::size_t i = 0; i < k_; ++i) mean_[i] += delta_[i] / n;
    }

    void merge(const CovAccumulator& other) {
        if (other.k_ != k_)
            throw std::invalid_argument("CovAccumulator: cannot merge different channel counts");
        if (other.n_ == 0) return;
        if (n_ == 0) {
            *this = other;
            return;
        }
        std::size_t n = n_ + other.n_;
        double na = static_cast<double>(n_);
        double nb = static_cast<double>(other.n_);
        double w = na * nb / static_cast<double>(n);
        std::vector<double> delta(k_);
        for (std::size_t i = 0; i < k_; ++i) delta[i] = other.mean_[i] - mean_[i];
        for (std::size_t i = 0; i < k_; ++i)
            for (std::size_t j = 0; j < k_; ++j)
                m2_[i * k_ + j] += other.m2_[i * k_ + j] + w * delta[i] * delta[j];
        for (std::size_t i = 0; i < k_; ++i)
            mean_[i] += delta[i] * nb / static_cast<double>(n);
        n_ = n;
    }

    double mean(std::size_t i) const { return mean_.at(i); }

    double covariance(std::size_t i, std::size_t j) const {
        if (n_ < 2) throw std::invalid_argument("CovAccumulator: need at least 2 samples");
        return m2_.at(i * k_ + j) / static_cast<double>(n_ - 1);
    }

    double variance(std::size_t i) const { return covariance(i, i); }

    // Sample Pearson correlation with the small-r standard error
    // (1 - r^2)/sqrt(n - 1). Until a baseline is subtracted the corrected
    // value simply mirrors the raw one.
    CorrelationRecord pearson(std::size_t i, std::size_t j) const {
        double vi = variance(i);
        double vj = variance(j);
        if (!(vi > 0.0) || !(vj > 0.0))
            throw std::invalid_argument("CovAccumulator: zero variance, correlation undefined");
        CorrelationRecord rec;
        rec.site_i = static_cast<int>(i);
        rec.site_j = static_cast<int>(j);
        rec.r_raw = covariance(i, j) / std::sqrt(vi * vj);
        rec.stderr = (1.0 - rec.r_raw * rec.r_raw) /
                     std::sqrt(static_cast<double>(n_ - 1));
        rec.r_corr = rec.r_raw;
        rec.n_shots = n_;
        return rec;
    }

    // All k(k-1)/2 distinct pairs in lexicographic order.
    std::vector<CorrelationRecord> all_pairs() const {
        std::vector<CorrelationRecord> out;
        out.reserve(k_ * (k_ - 1) / 2);
        for (std::size_t i = 0; i < k_; ++i)
            for (std::size_t j = i + 1; j < k_; ++j) out.push_back(pearson(i, j));
        return out;
    }

  private:
    std::size_t k_ = 0;
    std::size_t n_ = 0;
    std::vector<double> mean_;
    std::vector<double> m2_;
    std::vector<double> delta_;
};

// Pearson correlation of two equal-length signal streams.
inline CorrelationRecord pearson(const std::vector<double>& a, const std::vector<double>& b,
                                 int site_i = 0, int site_j = 1) {
    if (a.size() != b.size())
        throw std::invalid_argument("pearson: streams must have equal length");
    if (a.size() < 2) throw std::invalid_argument("pearson: need at least 2 shots");
    CovAccumulator acc(2);
    double x[2];
    for (std::size_t s = 0; s < a.size(); ++s) {
        x[0] = a[s];
        x[1] = b[s];
        acc.add(x);
    }
    CorrelationRecord rec = acc.pearson(0, 1);
    rec.site_i = site_i;
    rec.site_j = site_j;
    return rec;
}

// Nonparametric alternative to the analytic (1 - r^2)/sqrt(n - 1) error:
// resample shots with replacement and report the spread of the replicated
// correlations. Replicates that collapse to zero variance are skipped.
inline double pearson_bootstrap_stderr(const std::vector<double>& a,
                                       const std::vector<double>& b, int n_boot = 200,
                                       std::uint64_t seed = 1) {
    if (a.size() != b.size())
        throw std::invalid_argument("pearson_bootstrap_stderr: streams must have equal length");
    if (a.size() < 2 || n_boot < 2)
        throw std::invalid_argument("pearson_bootstrap_stderr: need >= 2 shots and replicates");
    RngStream rng = RngStream::root(seed).child(0x72626f6f);
    std::vector<double> reps;
    reps.reserve(static_cast<std::size_t>(n_boot));
    std::size_t n = a.size();
    for (int rep = 0; rep < n_boot; ++rep) {
        CovAccumulator acc(2);
        double x[2];
        for (std::size_t s = 0; s < n; ++s) {
            std::size_t pick = static_cast<std::size_t>(rng.next_u64() % n);
            x[0] = a[pick];
            x[1] = b[pick];
            acc.add(x);
        }
        try {
            reps.push_back(acc.pearson(0, 1).r_raw);
        } catch (const std::invalid_argument&) {
            // degenerate resample, carries no correlation information
        }
    }
    if (reps.size() < 2)
        throw std::runtime_error("pearson_bootstrap_stderr: too few usable replicates");
    double mean = 0.0;
    for (double r : reps) mean += r;
    mean /= static_cast<double>(reps.size());
    double q = 0.0;
    for (double r : reps) q += (r - mean) * (r - mean);
    return std::sqrt(q / static_cast<double>(reps.size() - 1));
}

} // namespace nvmx
