#ifndef SATPROBE_SPECTRAL_HPP
#define SATPROBE_SPECTRAL_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "satprobe/actlog.hpp"
#include "satprobe/covariance.hpp"
#include "satprobe/error.hpp"
#include "satprobe/matrix.hpp"

namespace satprobe {

inline constexpr double kDefaultThreshold = 0.99;

struct SymmetricEigen {
    std::vector<double> values;  // descending
    Matrix vectors;              // column i pairs with values[i]; empty unless requested
    int sweeps = 0;
};

struct JacobiOptions {
    int max_sweeps = 100;
    double relative_tolerance = 1e-12;   // off-diagonal bound, relative to ||A||_F
    double symmetry_tolerance = 1e-9;    // accepted max|A - A^T|, relative to ||A||_F
};

/// Cyclic Jacobi eigensolver for a real symmetric matrix. The input is
/// symmetrized as (A + A^T)/2 first. Sweeps visit (p, q) in row-major order,
/// so results are deterministic. Converged when every off-diagonal entry is
/// at most relative_tolerance * ||A||_F.
inline SymmetricEigen jacobi_eigen(const Matrix& input, bool want_vectors = false, const JacobiOptions& opt = {}) {
    if (input.rows() != input.cols()) {
        throw InvalidArgument("eigensolver needs a square matrix, got " + std::to_string(input.rows()) + "x" +
                              std::to_string(input.cols()));
    }
    const std::size_t d = input.rows();
    if (d == 0) {
        throw InvalidArgument("eigensolver needs a non-empty matrix");
    }
    if (!all_finite(input.data())) {
        throw InvalidArgument("eigensolver input contains non-finite values");
    }
    const double norm = input.frobenius_norm();
    Matrix a(d, d);
    double asym = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = 0; j < d; ++j) {
            asym = std::max(asym, std::abs(input(i, j) - input(j, i)));
            a(i, j) = 0.5 * (input(i, j) + input(j, i));
        }
    }
    if (asym > opt.symmetry_tolerance * norm) {
        throw InvalidArgument("matrix is not symmetric (max |A - A^T| = " + std::to_string(asym) + ")");
    }

    Matrix v = want_vectors ? Matrix::identity(d) : Matrix();
    const double tol = opt.relative_tolerance * norm;
    auto max_off = [&] {
        double m = 0.0;
        for (std::size_t p = 0; p < d; ++p) {
            for (std::size_t q = p + 1; q < d; ++q) {
                m = std::max(m, std::abs(a(p, q)));
            }
        }
        return m;
    };

    SymmetricEigen out;
    bool converged = max_off() <= tol;
    while (!converged) {
        if (out.sweeps == opt.max_sweeps) {
            throw AnalysisError("Jacobi eigensolver did not converge in " + std::to_string(opt.max_sweeps) +
                                " sweeps");
        }
        ++out.sweeps;
        for (std::size_t p = 0; p + 1 < d; ++p) {
            for (std::size_t q = p + 1; q < d; ++q) {
                const double apq = a(p, q);
                if (std::abs(apq) <= tol) {
                    continue;
                }
                const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                double t;
                if (std::abs(theta) > 1e150) {
                    t = 0.5 / theta;
                } else {
                    t = 1.0 / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                    if (theta < 0.0) {
                        t = -t;
                    }
                }
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                const double tau = s / (1.0 + c);

                a(p, p) -= t * apq;
                a(q, q) += t * apq;
                a(p, q) = 0.0;
                a(q, p) = 0.0;
                for (std::size_t r = 0; r < d; ++r) {
                    if (r == p || r == q) {
                        continue;
                    }
                    const double arp = a(r, p);
                    const double arq = a(r, q);
                    a(r, p) = arp - s * (arq + tau * arp);
                    a(r, q) = arq + s * (arp - tau * arq);
                    a(p, r) = a(r, p);
                    a(q, r) = a(r, q);
                }
                if (want_vectors) {
                    for (std::size_t r = 0; r < d; ++r) {
                        const double vrp = v(r, p);
                        const double vrq = v(r, q);
                        v(r, p) = vrp - s * (vrq + tau * vrp);
                        v(r, q) = vrq + s * (vrp - tau * vrq);
                    }
                }
            }
        }
        converged = max_off() <= tol;
    }

    std::vector<std::size_t> order(d);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return a(i, i) > a(j, j); });
    out.values.resize(d);
    for (std::size_t k = 0; k < d; ++k) {
        out.values[k] = a(order[k], order[k]);
    }
    if (want_vectors) {
        out.vectors = Matrix(d, d);
        for (std::size_t k = 0; k < d; ++k) {
            for (std::size_t r = 0; r < d; ++r) {
                out.vectors(r, k) = v(r, order[k]);
            }
        }
    }
    return out;
}

/// All eigenvalues of a symmetric matrix, descending. Not clamped.
inline std::vector<double> eigvals_sym(const Matrix& a) { return jacobi_eigen(a, false).values; }

inline void check_threshold(double threshold) {
    if (!(threshold > 0.0 && threshold <= 1.0)) {
        throw InvalidArgument("variance threshold must lie in (0, 1], got " + std::to_string(threshold));
    }
}

/// Smallest m such that the m largest eigenvalues sum to at least
/// threshold * (sum of all eigenvalues). Zero when the total is zero.
inline std::size_t intrinsic_dim(std::span<const double> eigenvalues, double threshold = kDefaultThreshold) {
    check_threshold(threshold);
    for (std::size_t i = 0; i < eigenvalues.size(); ++i) {
        if (!(eigenvalues[i] >= 0.0)) {
            throw InvalidArgument("eigenvalues must be non-negative");
        }
        if (i > 0 && eigenvalues[i] > eigenvalues[i - 1]) {
            throw InvalidArgument("eigenvalues must be sorted in descending order");
        }
    }
    const double total = std::accumulate(eigenvalues.begin(), eigenvalues.end(), 0.0);
    if (total == 0.0) {
        return 0;
    }
    const double target = threshold * total;
    double cumulative = 0.0;
    for (std::size_t m = 0; m < eigenvalues.size(); ++m) {
        cumulative += eigenvalues[m];
        if (cumulative >= target) {
            return m + 1;
        }
    }
    return eigenvalues.size();
}

/// Layer saturation: intrinsic dimensionality divided by the layer width.
inline double saturation(std::span<const double> eigenvalues, std::size_t layer_width,
                         double threshold = kDefaultThreshold) {
    if (layer_width == 0) {
        throw InvalidArgument("layer width must be positive");
    }
    if (eigenvalues.size() > layer_width) {
        throw InvalidArgument("more eigenvalues than the layer width");
    }
    return static_cast<double>(intrinsic_dim(eigenvalues, threshold)) / static_cast<double>(layer_width);
}

struct SpectrumResult {
    std::vector<double> eigenvalues;  // descending, negatives clamped to zero
    std::size_t intrinsic_dim = 0;
    double saturation = 0.0;
    double threshold = kDefaultThreshold;
    std::size_t layer_width = 1;
    std::uint64_t samples = 0;

    friend bool operator==(const SpectrumResult&, const SpectrumResult&) = default;
};

/// Eigenvalues of a covariance matrix with round-off negatives set to zero.
inline std::vector<double> clamped_spectrum(const Matrix& covariance) {
    auto values = eigvals_sym(covariance);
    for (double& v : values) {
        v = std::max(v, 0.0);
    }
    return values;
}

/// covariance -> eigenvalues -> intrinsic dimensionality -> saturation.
inline SpectrumResult analyze_layer(const CovarianceEstimator& est, const actlog::LayerDescriptor& layer,
                                    double threshold = kDefaultThreshold) {
    check_threshold(threshold);
    if (est.count() < 2) {
        throw AnalysisError("layer '" + layer.name + "' has " + std::to_string(est.count()) +
                            " sample(s); at least 2 are needed");
    }
    if (est.dim() != layer.width) {
        throw InvalidArgument("estimator dimension " + std::to_string(est.dim()) + " does not match width " +
                              std::to_string(layer.width) + " of layer '" + layer.name + "'");
    }
    SpectrumResult r;
    r.eigenvalues = clamped_spectrum(est.covariance());
    r.threshold = threshold;
    r.layer_width = layer.width;
    r.samples = est.count();
    r.intrinsic_dim = intrinsic_dim(r.eigenvalues, threshold);
    r.saturation = static_cast<double>(r.intrinsic_dim) / static_cast<double>(layer.width);
    return r;
}

} // namespace satprobe

#endif
