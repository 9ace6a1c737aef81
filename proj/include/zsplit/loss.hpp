#pragma once

#include <cstddef>
#include <vector>

#include "zsplit/core.hpp"

namespace zsplit {

/// Dense row-major double matrix; small reference implementation, no BLAS.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    static Matrix zeros(std::size_t rows, std::size_t cols) {
        return Matrix{rows, cols, std::vector<double>(rows * cols, 0.0)};
    }
    double at(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
    double& at(std::size_t i, std::size_t j) { return data[i * cols + j]; }
};

/// Probabilities of a linear classifier: p = sigmoid(features * weights),
/// with features N x d and weights d x M. No bias term.
Matrix linear_probs(const Matrix& features, const Matrix& weights);

/// Scaled cosine similarity logits: scale * (x_i . w_j) / (|x_i| |w_j|).
/// Invariant under positive rescaling of any feature row or weight column.
/// Throws on a zero-norm row or column.
Matrix cosine_logits(const Matrix& features, const Matrix& weights, double scale);

/// Mean weighted binary cross-entropy over all images and attributes.
/// Per element the weight is e^(1-r_j) for a positive label and e^r_j for
/// a negative one, with r_j the train-set positive ratio of attribute j.
/// Evaluated through softplus, so extreme logits stay finite. labels must
/// be 0/1, train_ratios in [0,1] with one entry per column.
double weighted_bce(const Matrix& logits, const Matrix& labels,
                    const std::vector<double>& train_ratios);

/// Analytic gradient of weighted_bce with respect to each logit:
/// (1/N) * weight(y, r_j) * (sigmoid(z) - y).
Matrix weighted_bce_grad(const Matrix& logits, const Matrix& labels,
                         const std::vector<double>& train_ratios);

}  // namespace zsplit
