#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "lito/errors.hpp"

namespace lito {

// Dense row-major matrix of doubles. All exported operations keep entries
// finite; accumulation order is fixed (row-major) so results are reproducible
// bit-for-bit across runs.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
    Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);

    static Matrix identity(std::size_t n);
    static Matrix from_rows(const std::vector<std::vector<double>>& rows);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }
    std::vector<double>& storage() { return data_; }
    const std::vector<double>& storage() const { return data_; }

    std::vector<double> row(std::size_t r) const;

    bool all_finite() const;

    bool operator==(const Matrix& other) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

using Vector = std::vector<double>;

Matrix matmul(const Matrix& a, const Matrix& b);

// Numerically stable softmax (max subtraction). Output sums to 1 within 1e-12.
Vector softmax(const Vector& v);

double sigmoid(double x);

// Vector helpers used throughout the pipeline. All reduce left-to-right.
double dot(const Vector& a, const Vector& b);
double norm(const Vector& v);
Vector normalized(const Vector& v);
double cosine(const Vector& a, const Vector& b);

// Leading principal component of the mean-centered covariance of `rows`,
// via power iteration (tol 1e-10, max 10000 iterations). The sign is fixed
// so that the dot product with the mean of the raw rows is >= 0.
Vector pca_first_component(const Matrix& rows);

// Deterministic seeded generator. Identical seeds give identical streams on
// every platform: distributions are derived from the raw mt19937_64 output
// rather than the implementation-defined std:: distributions.
class SeededRng {
public:
    explicit SeededRng(std::uint64_t seed) : seed_(seed), gen_(seed) {}

    std::uint64_t seed() const { return seed_; }

    std::uint64_t next_u64() { return gen_(); }

    // Uniform in [0, 1).
    double uniform();
    // Uniform in [lo, hi).
    double uniform(double lo, double hi);
    // Standard normal via Box-Muller on raw uniform bits.
    double normal();
    double normal(double mean, double stddev) { return mean + stddev * normal(); }
    // Uniform integer in [0, n).
    std::uint64_t uniform_index(std::uint64_t n);

    template <typename T>
    void shuffle(std::vector<T>& v) {
        if (v.empty()) return;
        for (std::size_t i = v.size() - 1; i > 0; --i) {
            std::size_t j = static_cast<std::size_t>(uniform_index(i + 1));
            std::swap(v[i], v[j]);
        }
    }

private:
    std::uint64_t seed_;
    std::mt19937_64 gen_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace lito
