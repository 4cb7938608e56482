#ifndef SATPROBE_COVARIANCE_HPP
#define SATPROBE_COVARIANCE_HPP

#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "satprobe/error.hpp"
#include "satprobe/matrix.hpp"

namespace satprobe {

/*
 Running mean and autocovariance of a stream of d-dimensional samples.

 Each sample z_n updates

   mean_n = mean_{n-1} + (z_n - mean_{n-1}) / n
   M_n    = M_{n-1} + ((n-1)/n) (z_n - mean_{n-1})(z_n - mean_{n-1})^T

 where M_n = n * Cov_n is the comoment. Dividing by n reproduces the divide-by-n
 recurrence Cov_n = [Cov_{n-1}(n-1) + ((n-1)/n) dd^T] / n without rescaling the
 whole matrix every step. "n" counts samples, not minibatches.

 Accumulation is always in double precision.
*/
class CovarianceEstimator {
public:
    explicit CovarianceEstimator(std::size_t dim) : dim_(dim), mean_(dim, 0.0), comoment_(dim, dim) {
        if (dim == 0) {
            throw InvalidArgument("covariance dimension must be positive");
        }
    }

    std::size_t dim() const noexcept { return dim_; }
    std::uint64_t count() const noexcept { return count_; }
    const std::vector<double>& mean() const noexcept { return mean_; }
    const Matrix& comoment() const noexcept { return comoment_; }

    void update_sample(std::span<const double> z) {
        check_sample(z);
        ++count_;
        const double n = static_cast<double>(count_);
        delta_.resize(dim_);
        for (std::size_t i = 0; i < dim_; ++i) {
            delta_[i] = z[i] - mean_[i];
            mean_[i] += delta_[i] / n;
        }
        const double w = (n - 1.0) / n;
        add_outer_symmetric(comoment_, delta_, w);
    }

    /// Rows of `batch` are samples. Equivalent to update_sample over the rows
    /// in order; computed as a two-pass batch moment merged into the state.
    void update_batch(const Matrix& batch) {
        if (batch.cols() != dim_) {
            throw InvalidArgument("batch has " + std::to_string(batch.cols()) + " columns, estimator dim is " +
                                  std::to_string(dim_));
        }
        if (batch.rows() == 0) {
            return;
        }
        if (!all_finite(batch.data())) {
            throw InvalidArgument("non-finite value in covariance batch");
        }
        if (batch.rows() == 1) {
            update_sample(batch.row(0));
            return;
        }
        CovarianceEstimator part(dim_);
        part.count_ = batch.rows();
        // Running mean over the rows.
        for (std::size_t r = 0; r < batch.rows(); ++r) {
            auto row = batch.row(r);
            const double k = static_cast<double>(r + 1);
            for (std::size_t i = 0; i < dim_; ++i) {
                part.mean_[i] += (row[i] - part.mean_[i]) / k;
            }
        }
        std::vector<double> dev(dim_);
        for (std::size_t r = 0; r < batch.rows(); ++r) {
            auto row = batch.row(r);
            for (std::size_t i = 0; i < dim_; ++i) {
                dev[i] = row[i] - part.mean_[i];
            }
            add_outer_upper(part.comoment_, dev, 1.0);
        }
        mirror_upper(part.comoment_);
        merge(part);
    }

    /// Folds another estimator's samples into this one, as if its stream had
    /// been appended to ours.
    void merge(const CovarianceEstimator& other) {
        if (other.dim_ != dim_) {
            throw InvalidArgument("cannot merge estimators of dimension " + std::to_string(dim_) + " and " +
                                  std::to_string(other.dim_));
        }
        if (other.count_ == 0) {
            return;
        }
        if (count_ == 0) {
            count_ = other.count_;
            mean_ = other.mean_;
            comoment_ = other.comoment_;
            return;
        }
        const double na = static_cast<double>(count_);
        const double nb = static_cast<double>(other.count_);
        const double n = na + nb;
        delta_.resize(dim_);
        for (std::size_t i = 0; i < dim_; ++i) {
            delta_[i] = other.mean_[i] - mean_[i];
        }
        comoment_ += other.comoment_;
        add_outer_symmetric(comoment_, delta_, na * nb / n);
        for (std::size_t i = 0; i < dim_; ++i) {
            mean_[i] = (na * mean_[i] + nb * other.mean_[i]) / n;
        }
        count_ += other.count_;
    }

    /// Population covariance M_n / n.
    Matrix covariance() const {
        if (count_ == 0) {
            throw AnalysisError("covariance requested with no samples");
        }
        return comoment_ * (1.0 / static_cast<double>(count_));
    }

    void reset() {
        count_ = 0;
        std::fill(mean_.begin(), mean_.end(), 0.0);
        comoment_.fill(0.0);
    }

private:
    void check_sample(std::span<const double> z) const {
        if (z.size() != dim_) {
            throw InvalidArgument("sample length " + std::to_string(z.size()) + " != estimator dim " +
                                  std::to_string(dim_));
        }
        if (!all_finite(z)) {
            throw InvalidArgument("non-finite value in covariance sample");
        }
    }

    static void add_outer_upper(Matrix& m, std::span<const double> v, double w) {
        const std::size_t d = v.size();
        for (std::size_t i = 0; i < d; ++i) {
            const double wi = w * v[i];
            if (wi == 0.0) {
                continue;
            }
            auto row = m.row(i);
            for (std::size_t j = i; j < d; ++j) {
                row[j] += wi * v[j];
            }
        }
    }

    static void mirror_upper(Matrix& m) {
        for (std::size_t i = 0; i < m.rows(); ++i) {
            for (std::size_t j = i + 1; j < m.cols(); ++j) {
                m(j, i) = m(i, j);
            }
        }
    }

    // Keeps the stored matrix exactly symmetric.
    static void add_outer_symmetric(Matrix& m, std::span<const double> v, double w) {
        add_outer_upper(m, v, w);
        mirror_upper(m);
    }

    friend void save_state(std::ostream&, const CovarianceEstimator&);
    friend CovarianceEstimator load_state(std::istream&);

    std::size_t dim_;
    std::uint64_t count_ = 0;
    std::vector<double> mean_;
    Matrix comoment_;
    std::vector<double> delta_;  // scratch
};

inline CovarianceEstimator merge(CovarianceEstimator a, const CovarianceEstimator& b) {
    a.merge(b);
    return a;
}

/*
 Estimator checkpoint, little-endian like SATL logs:

   "SATC" | version u16 (=1) | dim u64 | count u64 | mean f64 * dim | comoment f64 * dim * dim
*/
inline constexpr std::array<char, 4> kStateMagic{'S', 'A', 'T', 'C'};

inline void save_state(std::ostream& out, const CovarianceEstimator& est) {
    std::vector<std::uint8_t> bytes;
    auto put = [&](std::uint64_t v, int n) {
        for (int i = 0; i < n; ++i) {
            bytes.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
        }
    };
    for (char c : kStateMagic) {
        bytes.push_back(static_cast<std::uint8_t>(c));
    }
    put(1, 2);
    put(est.dim_, 8);
    put(est.count_, 8);
    for (double v : est.mean_) {
        put(std::bit_cast<std::uint64_t>(v), 8);
    }
    for (double v : est.comoment_.data()) {
        put(std::bit_cast<std::uint64_t>(v), 8);
    }
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
        throw IoError("failed to write estimator state");
    }
}

inline CovarianceEstimator load_state(std::istream& in) {
    auto get = [&](int n) {
        std::uint8_t buf[8];
        if (!in.read(reinterpret_cast<char*>(buf), n)) {
            throw IoError("truncated estimator state");
        }
        std::uint64_t v = 0;
        for (int i = 0; i < n; ++i) {
            v |= std::uint64_t{buf[i]} << (8 * i);
        }
        return v;
    };
    for (char c : kStateMagic) {
        if (static_cast<char>(get(1)) != c) {
            throw IoError("not an estimator state file");
        }
    }
    if (get(2) != 1) {
        throw IoError("unsupported estimator state version");
    }
    const std::uint64_t dim = get(8);
    if (dim == 0 || dim > (std::uint64_t{1} << 16)) {
        throw IoError("implausible estimator dimension " + std::to_string(dim));
    }
    CovarianceEstimator est(static_cast<std::size_t>(dim));
    est.count_ = get(8);
    for (double& v : est.mean_) {
        v = std::bit_cast<double>(get(8));
    }
    for (double& v : est.comoment_.data()) {
        v = std::bit_cast<double>(get(8));
    }
    if (!all_finite(est.mean_) || !all_finite(est.comoment_.data())) {
        throw IoError("estimator state contains non-finite values");
    }
    return est;
}

} // namespace satprobe

#endif
