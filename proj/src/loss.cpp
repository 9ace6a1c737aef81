#include "zsplit/loss.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "zsplit/numeric.hpp"
#include "zsplit/stats.hpp"

namespace zsplit {

namespace {

void check_shapes(const Matrix& logits, const Matrix& labels,
                  const std::vector<double>& train_ratios) {
    if (logits.rows != labels.rows || logits.cols != labels.cols) {
        throw std::invalid_argument("logit and label matrices must share a shape");
    }
    if (train_ratios.size() != logits.cols) {
        throw std::invalid_argument("expected one train ratio per attribute column, got " +
                                    std::to_string(train_ratios.size()));
    }
    for (double r : train_ratios) {
        if (!(r >= 0.0 && r <= 1.0)) {
            throw std::invalid_argument("train ratios must lie in [0,1]");
        }
    }
    for (double y : labels.data) {
        if (y != 0.0 && y != 1.0) {
            throw std::invalid_argument("labels must be 0 or 1");
        }
    }
}

}  // namespace

Matrix linear_probs(const Matrix& features, const Matrix& weights) {
    if (features.cols != weights.rows) {
        throw std::invalid_argument("feature dimension " + std::to_string(features.cols) +
                                    " does not match weight rows " + std::to_string(weights.rows));
    }
    Matrix probs = Matrix::zeros(features.rows, weights.cols);
    for (std::size_t i = 0; i < features.rows; ++i) {
        for (std::size_t j = 0; j < weights.cols; ++j) {
            double z = 0.0;
            for (std::size_t k = 0; k < features.cols; ++k) {
                z += features.at(i, k) * weights.at(k, j);
            }
            probs.at(i, j) = sigmoid(z);
        }
    }
    return probs;
}

Matrix cosine_logits(const Matrix& features, const Matrix& weights, double scale) {
    if (features.cols != weights.rows) {
        throw std::invalid_argument("feature dimension " + std::to_string(features.cols) +
                                    " does not match weight rows " + std::to_string(weights.rows));
    }
    if (!(scale > 0.0)) {
        throw std::invalid_argument("cosine scale must be positive");
    }
    std::vector<double> row_norm(features.rows, 0.0);
    for (std::size_t i = 0; i < features.rows; ++i) {
        double s = 0.0;
        for (std::size_t k = 0; k < features.cols; ++k) s += features.at(i, k) * features.at(i, k);
        row_norm[i] = std::sqrt(s);
        if (row_norm[i] == 0.0) {
            throw std::invalid_argument("feature row " + std::to_string(i) + " has zero norm");
        }
    }
    std::vector<double> col_norm(weights.cols, 0.0);
    for (std::size_t j = 0; j < weights.cols; ++j) {
        double s = 0.0;
        for (std::size_t k = 0; k < weights.rows; ++k) s += weights.at(k, j) * weights.at(k, j);
        col_norm[j] = std::sqrt(s);
        if (col_norm[j] == 0.0) {
            throw std::invalid_argument("weight column " + std::to_string(j) + " has zero norm");
        }
    }
    Matrix logits = Matrix::zeros(features.rows, weights.cols);
    for (std::size_t i = 0; i < features.rows; ++i) {
        for (std::size_t j = 0; j < weights.cols; ++j) {
            double dot = 0.0;
            for (std::size_t k = 0; k < features.cols; ++k) {
                dot += features.at(i, k) * weights.at(k, j);
            }
            logits.at(i, j) = scale * dot / (row_norm[i] * col_norm[j]);
        }
    }
    return logits;
}

double weighted_bce(const Matrix& logits, const Matrix& labels,
                    const std::vector<double>& train_ratios) {
    check_shapes(logits, labels, train_ratios);
    if (logits.rows == 0) return 0.0;
    // -y log sigma(z) - (1-y) log(1-sigma(z)) collapses to a single softplus
    // per element, which stays finite for any logit.
    std::vector<double> terms;
    terms.reserve(logits.rows * logits.cols);
    for (std::size_t i = 0; i < logits.rows; ++i) {
        for (std::size_t j = 0; j < logits.cols; ++j) {
            const bool positive = labels.at(i, j) == 1.0;
            const double weight = sample_weight(train_ratios[j], positive);
            const double z = logits.at(i, j);
            terms.push_back(weight * (positive ? softplus(-z) : softplus(z)));
        }
    }
    return pairwise_sum(terms) / static_cast<double>(logits.rows);
}

Matrix weighted_bce_grad(const Matrix& logits, const Matrix& labels,
                         const std::vector<double>& train_ratios) {
    check_shapes(logits, labels, train_ratios);
    Matrix grad = Matrix::zeros(logits.rows, logits.cols);
    if (logits.rows == 0) return grad;
    const double inv_n = 1.0 / static_cast<double>(logits.rows);
    for (std::size_t i = 0; i < logits.rows; ++i) {
        for (std::size_t j = 0; j < logits.cols; ++j) {
            const bool positive = labels.at(i, j) == 1.0;
            const double weight = sample_weight(train_ratios[j], positive);
            grad.at(i, j) =
                inv_n * weight * (sigmoid(logits.at(i, j)) - labels.at(i, j));
        }
    }
    return grad;
}

}  // namespace zsplit
