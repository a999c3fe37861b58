#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <random>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace hpmab {

/// Grid-index feature of one cell, x_a = [x, y]^T.
struct CellFeature {
    int x = 0;
    int y = 0;

    friend bool operator==(const CellFeature& a, const CellFeature& b) {
        return a.x == b.x && a.y == b.y;
    }
};

/// One real score per grid cell. Flat index = y * X + x.
struct ScoreField {
    int X = 0;
    int Y = 0;
    std::vector<double> values;

    ScoreField() = default;
    ScoreField(int x_dim, int y_dim, double fill = 0.0)
        : X(x_dim), Y(y_dim), values(static_cast<std::size_t>(x_dim) * static_cast<std::size_t>(y_dim), fill) {}

    [[nodiscard]] std::size_t size() const { return values.size(); }
    [[nodiscard]] static std::size_t index_of(int x, int y, int X_dim) {
        return static_cast<std::size_t>(y) * static_cast<std::size_t>(X_dim) +
               static_cast<std::size_t>(x);
    }
    [[nodiscard]] double& at(int x, int y) { return values[index_of(x, y, X)]; }
    [[nodiscard]] double at(int x, int y) const { return values[index_of(x, y, X)]; }
    [[nodiscard]] CellFeature feature(std::size_t flat) const {
        return CellFeature{static_cast<int>(flat % static_cast<std::size_t>(X)),
                           static_cast<int>(flat / static_cast<std::size_t>(X))};
    }

    [[nodiscard]] double sum() const {
        return std::accumulate(values.begin(), values.end(), 0.0);
    }
};

/// exp(-||a-b||^2 / (2 sigma_gp^2)), in (0, 1].
inline double rbf_kernel(const CellFeature& a, const CellFeature& b, double sigma_gp) {
    if (!(sigma_gp > 0.0)) {
        throw std::invalid_argument("rbf_kernel: sigma_gp must be > 0");
    }
    const double dx = static_cast<double>(a.x - b.x);
    const double dy = static_cast<double>(a.y - b.y);
    return std::exp(-(dx * dx + dy * dy) / (2.0 * sigma_gp * sigma_gp));
}

struct GPConfig {
    double sigma_gp = 1.0;     // RBF length scale in grid-index units
    double noise_jitter = 1e-6; // diagonal regularizer / observation noise variance

    void validate() const {
        if (!(sigma_gp > 0.0) || !(noise_jitter >= 0.0)) {
            throw std::invalid_argument("GPConfig: need sigma_gp > 0 and noise_jitter >= 0");
        }
    }
};

struct GPPrediction {
    std::vector<double> mean;
    std::vector<double> stddev;
};

/// Zero-mean GP regression with unit prior variance. Posterior over the
/// latent function: mean = k_*^T (K + D)^-1 y, var = 1 - k_*^T (K + D)^-1 k_*
/// where D = jitter * I by default or diag(per_point_noise) when given
/// (repeated observations of one cell aggregate to noise jitter/n).
inline GPPrediction gp_fit_predict(const std::vector<CellFeature>& train_features,
                                   const std::vector<double>& train_targets,
                                   const std::vector<CellFeature>& queries,
                                   const GPConfig& cfg,
                                   const std::vector<double>* per_point_noise = nullptr) {
    cfg.validate();
    const std::size_t n = train_features.size();
    if (n == 0 || train_targets.size() != n) {
        throw std::invalid_argument("gp_fit_predict: need equally sized, non-empty training lists");
    }
    if (per_point_noise != nullptr && per_point_noise->size() != n) {
        throw std::invalid_argument("gp_fit_predict: per-point noise size mismatch");
    }

    Eigen::MatrixXd K(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i; j < n; ++j) {
            const double k = rbf_kernel(train_features[i], train_features[j], cfg.sigma_gp);
            K(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = k;
            K(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = k;
        }
        K(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) +=
            per_point_noise != nullptr ? (*per_point_noise)[i] : cfg.noise_jitter;
    }

    Eigen::LLT<Eigen::MatrixXd> solver(K);
    if (solver.info() != Eigen::Success) {
        throw std::runtime_error("gp_fit_predict: kernel system factorization failed");
    }
    Eigen::VectorXd y(n);
    for (std::size_t i = 0; i < n; ++i) {
        y(static_cast<Eigen::Index>(i)) = train_targets[i];
    }
    const Eigen::VectorXd weights = solver.solve(y);
    if (!weights.allFinite()) {
        throw std::runtime_error("gp_fit_predict: kernel system solve produced non-finite weights");
    }

    GPPrediction out;
    out.mean.reserve(queries.size());
    out.stddev.reserve(queries.size());
    Eigen::VectorXd k_star(n);
    for (const CellFeature& q : queries) {
        for (std::size_t i = 0; i < n; ++i) {
            k_star(static_cast<Eigen::Index>(i)) = rbf_kernel(train_features[i], q, cfg.sigma_gp);
        }
        out.mean.push_back(k_star.dot(weights));
        const double var = 1.0 - k_star.dot(solver.solve(k_star));
        out.stddev.push_back(std::sqrt(std::max(var, 0.0)));
    }
    return out;
}

/// Discrete 2D Gaussian smoothing, kernel g(x,y) proportional to
/// exp(-(x^2+y^2)/(2 sigma^2)), truncated at radius ceil(3 sigma) and
/// renormalized per output cell at the grid edge (no padding). sigma = 0 is
/// the identity.
inline ScoreField gaussian_filter(const ScoreField& field, double sigma) {
    if (!(sigma >= 0.0)) {
        throw std::invalid_argument("gaussian_filter: sigma must be >= 0");
    }
    if (sigma == 0.0) {
        return field;
    }
    const int radius = static_cast<int>(std::ceil(3.0 * sigma));
    std::vector<double> kernel_1d(static_cast<std::size_t>(2 * radius + 1));
    for (int d = -radius; d <= radius; ++d) {
        kernel_1d[static_cast<std::size_t>(d + radius)] =
            std::exp(-static_cast<double>(d) * static_cast<double>(d) / (2.0 * sigma * sigma));
    }

    ScoreField out(field.X, field.Y);
    for (int y = 0; y < field.Y; ++y) {
        for (int x = 0; x < field.X; ++x) {
            double acc = 0.0;
            double weight = 0.0;
            for (int dy = -radius; dy <= radius; ++dy) {
                const int yy = y + dy;
                if (yy < 0 || yy >= field.Y) {
                    continue;
                }
                const double wy = kernel_1d[static_cast<std::size_t>(dy + radius)];
                for (int dx = -radius; dx <= radius; ++dx) {
                    const int xx = x + dx;
                    if (xx < 0 || xx >= field.X) {
                        continue;
                    }
                    const double w = wy * kernel_1d[static_cast<std::size_t>(dx + radius)];
                    acc += w * field.at(xx, yy);
                    weight += w;
                }
            }
            out.at(x, y) = acc / weight;
        }
    }
    return out;
}

/// Softmax with temperature tau, computed with max-subtraction.
inline ScoreField softmax_probs(const ScoreField& field, double tau) {
    if (!(tau > 0.0)) {
        throw std::invalid_argument("softmax_probs: tau must be > 0");
    }
    ScoreField out(field.X, field.Y);
    const double max_score = *std::max_element(field.values.begin(), field.values.end());
    double total = 0.0;
    for (std::size_t i = 0; i < field.size(); ++i) {
        out.values[i] = std::exp((field.values[i] - max_score) / tau);
        total += out.values[i];
    }
    for (double& v : out.values) {
        v /= total;
    }
    return out;
}

/// Draws `n` distinct cells sequentially (draw, remove, renormalize); the
/// returned order is the rank order. Once every positive-probability cell is
/// taken, remaining picks are uniform over the zero-probability cells.
inline std::vector<int> sample_without_replacement(const ScoreField& probs, int n,
                                                   std::mt19937_64& rng) {
    const int n_cells = static_cast<int>(probs.size());
    if (n < 1 || n > n_cells) {
        throw std::invalid_argument("sample_without_replacement: need 1 <= n <= #cells");
    }
    std::vector<int> remaining(static_cast<std::size_t>(n_cells));
    std::iota(remaining.begin(), remaining.end(), 0);
    std::vector<int> picked;
    picked.reserve(static_cast<std::size_t>(n));
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    while (static_cast<int>(picked.size()) < n) {
        double total = 0.0;
        for (int cell : remaining) {
            total += probs.values[static_cast<std::size_t>(cell)];
        }
        std::size_t chosen;
        if (total > 0.0) {
            const double u = unif(rng) * total;
            double acc = 0.0;
            chosen = remaining.size() - 1;
            for (std::size_t i = 0; i < remaining.size(); ++i) {
                acc += probs.values[static_cast<std::size_t>(remaining[i])];
                if (u < acc) {
                    chosen = i;
                    break;
                }
            }
        } else {
            // all remaining mass is zero: uniform pad
            chosen = static_cast<std::size_t>(
                std::uniform_int_distribution<int>(0, static_cast<int>(remaining.size()) - 1)(rng));
        }
        picked.push_back(remaining[chosen]);
        remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(chosen));
    }
    return picked;
}

} // namespace hpmab
