#include "lito/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

namespace lito {

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows_ * cols_) {
        throw contract_error("Matrix: data length does not match rows*cols");
    }
}

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Matrix Matrix::from_rows(const std::vector<std::vector<double>>& rows) {
    if (rows.empty()) return Matrix();
    Matrix m(rows.size(), rows[0].size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].size() != m.cols()) {
            throw contract_error("Matrix::from_rows: ragged input");
        }
        for (std::size_t c = 0; c < m.cols(); ++c) m(r, c) = rows[r][c];
    }
    return m;
}

std::vector<double> Matrix::row(std::size_t r) const {
    return {data_.begin() + static_cast<std::ptrdiff_t>(r * cols_),
            data_.begin() + static_cast<std::ptrdiff_t>((r + 1) * cols_)};
}

bool Matrix::all_finite() const {
    for (double x : data_) {
        if (!std::isfinite(x)) return false;
    }
    return true;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) {
        throw contract_error("matmul: dimension mismatch");
    }
    Matrix out(a.rows(), b.cols());
    // i-k-j loop order: row-major accumulation, fixed summation order.
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double aik = a(i, k);
            if (aik == 0.0) continue;
            const double* brow = b.data() + k * b.cols();
            double* orow = out.data() + i * out.cols();
            for (std::size_t j = 0; j < b.cols(); ++j) {
                orow[j] += aik * brow[j];
            }
        }
    }
    return out;
}

Vector softmax(const Vector& v) {
    if (v.empty()) {
        throw contract_error("softmax: empty input");
    }
    double mx = *std::max_element(v.begin(), v.end());
    Vector out(v.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        out[i] = std::exp(v[i] - mx);
        sum += out[i];
    }
    for (double& x : out) x /= sum;
    return out;
}

double sigmoid(double x) {
    if (x >= 0.0) {
        return 1.0 / (1.0 + std::exp(-x));
    }
    double e = std::exp(x);
    return e / (1.0 + e);
}

double dot(const Vector& a, const Vector& b) {
    if (a.size() != b.size()) {
        throw contract_error("dot: dimension mismatch");
    }
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm(const Vector& v) { return std::sqrt(dot(v, v)); }

Vector normalized(const Vector& v) {
    double n = norm(v);
    if (n == 0.0) {
        throw data_error("normalized: zero vector");
    }
    Vector out(v);
    for (double& x : out) x /= n;
    return out;
}

double cosine(const Vector& a, const Vector& b) {
    return dot(a, b) / (norm(a) * norm(b));
}

Vector pca_first_component(const Matrix& rows) {
    if (rows.rows() < 2 || rows.cols() < 1) {
        throw contract_error("pca_first_component: need >= 2 rows and >= 1 col");
    }
    const std::size_t n = rows.rows();
    const std::size_t d = rows.cols();

    Vector mean(d, 0.0);
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < d; ++c) mean[c] += rows(r, c);
    }
    for (double& x : mean) x /= static_cast<double>(n);

    Matrix centered(n, d);
    double total_var = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < d; ++c) {
            centered(r, c) = rows(r, c) - mean[c];
            total_var += centered(r, c) * centered(r, c);
        }
    }
    if (total_var == 0.0) {
        throw data_error("pca_first_component: rank-zero input (all rows identical)");
    }

    // Covariance (1/(n-1)) C^T C, built explicitly: d is small here.
    Matrix cov(d, d);
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t i = 0; i < d; ++i) {
            const double ci = centered(r, i);
            if (ci == 0.0) continue;
            for (std::size_t j = 0; j < d; ++j) {
                cov(i, j) += ci * centered(r, j);
            }
        }
    }
    for (double& x : cov.storage()) x /= static_cast<double>(n - 1);

    // Power iteration from a fixed deterministic start.
    Vector v(d, 0.0);
    // Start along the coordinate of largest variance so the start never lies
    // in the null space of a nontrivial covariance.
    std::size_t start = 0;
    for (std::size_t i = 1; i < d; ++i) {
        if (cov(i, i) > cov(start, start)) start = i;
    }
    v[start] = 1.0;

    const double tol = 1e-10;
    const int max_iters = 10000;
    for (int it = 0; it < max_iters; ++it) {
        Vector next(d, 0.0);
        for (std::size_t i = 0; i < d; ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < d; ++j) s += cov(i, j) * v[j];
            next[i] = s;
        }
        double nn = norm(next);
        if (nn == 0.0) {
            throw data_error("pca_first_component: degenerate iteration");
        }
        for (double& x : next) x /= nn;
        // Convergence up to sign.
        double diff_plus = 0.0, diff_minus = 0.0;
        for (std::size_t i = 0; i < d; ++i) {
            diff_plus = std::max(diff_plus, std::abs(next[i] - v[i]));
            diff_minus = std::max(diff_minus, std::abs(next[i] + v[i]));
        }
        v = std::move(next);
        if (std::min(diff_plus, diff_minus) < tol) break;
    }

    // Sign convention: align with the mean of the raw (un-centered) rows.
    if (dot(v, mean) < 0.0) {
        for (double& x : v) x = -x;
    }
    return v;
}

double SeededRng::uniform() {
    // 53 random bits -> [0, 1).
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double SeededRng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

double SeededRng::normal() {
    if (have_spare_) {
        have_spare_ = false;
        return spare_;
    }
    double u1, u2;
    do {
        u1 = uniform();
    } while (u1 <= 0.0);
    u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double theta = 2.0 * M_PI * u2;
    spare_ = r * std::sin(theta);
    have_spare_ = true;
    return r * std::cos(theta);
}

std::uint64_t SeededRng::uniform_index(std::uint64_t n) {
    if (n == 0) {
        throw contract_error("uniform_index: n must be positive");
    }
    // Rejection sampling for an unbiased draw.
    std::uint64_t limit = UINT64_MAX - (UINT64_MAX % n);
    std::uint64_t x;
    do {
        x = next_u64();
    } while (x >= limit);
    return x % n;
}

}  // namespace lito
