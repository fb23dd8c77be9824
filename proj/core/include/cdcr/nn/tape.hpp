#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "cdcr/nn/mat.hpp"

namespace cdcr::nn {

// Reverse-mode autodiff over matrix-valued nodes. Forward values are
// computed eagerly; backward() replays the recorded ops in reverse. One
// tape per training step; leaves are copies of the parameter matrices and
// their gradients are read back after backward().
class Tape {
public:
    struct Var {
        int id = -1;
        bool valid() const { return id >= 0; }
    };

    Var input(Mat value);     // leaf whose gradient will be read
    Var constant(Mat value);  // leaf whose gradient is ignored

    const Mat& value(Var v) const { return nodes_[check(v)].value; }
    const Mat& grad(Var v) const { return nodes_[check(v)].grad; }

    // --- elementwise / shape ---
    Var add(Var a, Var b);
    Var sub(Var a, Var b);
    Var mul(Var a, Var b);
    Var scale(Var a, double s);
    Var add_row_broadcast(Var a, Var row);  // a[m x n] + row[1 x n] per row
    Var relu(Var a);
    Var tanh(Var a);
    Var transpose(Var a);
    Var slice_cols(Var a, std::size_t begin, std::size_t end);
    Var slice_rows(Var a, std::size_t begin, std::size_t end);
    Var concat_cols(const std::vector<Var>& parts);
    Var concat_rows(const std::vector<Var>& parts);
    Var gather_rows(Var table, std::vector<std::size_t> row_ids);
    Var mean_rows(Var a);  // 1 x n column means
    Var sum_all(Var a);    // 1 x 1

    // --- linear algebra ---
    Var matmul(Var a, Var b);

    // --- nonlinear blocks ---
    Var softmax_rows(Var a);
    Var normalize_rows(Var a);  // divide each row by its sum (sums must be > 0)
    Var layer_norm_rows(Var a, Var gain, Var bias, double eps = 1e-5);

    // --- losses (scalar 1 x 1 results) ---
    // Mean negative log-softmax at the target class.
    Var cross_entropy_mean(Var logits, std::vector<std::size_t> targets);
    // Mean binary cross entropy over sigmoid(logits); logits is m x 1.
    Var bce_with_logits_mean(Var logits, std::vector<double> labels);
    // Sum over rows of (1 - cosine(p_i, r_i)); throws on zero-norm rows.
    Var cosine_align_loss(Var p, Var r);

    void backward(Var loss);  // loss must be 1 x 1

private:
    struct Node {
        Mat value;
        Mat grad;
        std::function<void()> back;  // empty for leaves
    };

    std::vector<Node> nodes_;

    int check(Var v) const;
    Var make(Mat value, std::function<void()> back);
    Mat& grad_ref(int id) { return nodes_[static_cast<std::size_t>(id)].grad; }
    const Mat& val_ref(int id) const { return nodes_[static_cast<std::size_t>(id)].value; }
};

using Var = Tape::Var;

}  // namespace cdcr::nn
