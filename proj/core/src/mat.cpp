#include "cdcr/nn/mat.hpp"

#include <cmath>

#include "cdcr/errors.hpp"

namespace cdcr::nn {

Mat matmul(const Mat& a, const Mat& b) {
    if (a.cols() != b.rows()) throw ValidationError("matmul: inner dimensions differ");
    Mat c(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t k = 0; k < a.cols(); ++k) {
            double aik = a(i, k);
            if (aik == 0.0) continue;
            for (std::size_t j = 0; j < b.cols(); ++j) {
                c(i, j) += aik * b(k, j);
            }
        }
    }
    return c;
}

Mat transpose(const Mat& a) {
    Mat t(a.cols(), a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
    }
    return t;
}

double dot_row(const Mat& a, std::size_t ra, const Mat& b, std::size_t rb) {
    if (a.cols() != b.cols()) throw ValidationError("dot_row: widths differ");
    double s = 0.0;
    for (std::size_t j = 0; j < a.cols(); ++j) s += a(ra, j) * b(rb, j);
    return s;
}

double row_norm(const Mat& a, std::size_t r) {
    double s = 0.0;
    for (std::size_t j = 0; j < a.cols(); ++j) s += a(r, j) * a(r, j);
    return std::sqrt(s);
}

double sq_frobenius_diff(const Mat& a, const Mat& b) {
    if (!a.same_shape(b)) throw ValidationError("sq_frobenius_diff: shape mismatch");
    double s = 0.0;
    const double* pa = a.data();
    const double* pb = b.data();
    for (std::size_t i = 0; i < a.size(); ++i) {
        double d = pa[i] - pb[i];
        s += d * d;
    }
    return s;
}

}  // namespace cdcr::nn
