#pragma once

#include <cstddef>
#include <initializer_list>
#include <vector>

namespace cdcr::nn {

// Dense row-major matrix of doubles. All training math runs in double so
// finite-difference gradient checks are meaningful; storage formats convert
// at the file boundary.
class Mat {
public:
    Mat() = default;
    Mat(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    static Mat row_vector(std::initializer_list<double> vals) {
        Mat m(1, vals.size());
        std::size_t i = 0;
        for (double v : vals) m.data_[i++] = v;
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }
    std::vector<double>& raw() { return data_; }
    const std::vector<double>& raw() const { return data_; }

    void fill(double v) { std::fill(data_.begin(), data_.end(), v); }

    bool same_shape(const Mat& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

Mat matmul(const Mat& a, const Mat& b);
Mat transpose(const Mat& a);

double dot_row(const Mat& a, std::size_t ra, const Mat& b, std::size_t rb);
double row_norm(const Mat& a, std::size_t r);

// Squared Frobenius norm of (a - b); shapes must match.
double sq_frobenius_diff(const Mat& a, const Mat& b);

}  // namespace cdcr::nn
