#include "cdcr/nn/tape.hpp"

#include <cmath>

#include "cdcr/errors.hpp"

namespace cdcr::nn {

int Tape::check(Var v) const {
    if (v.id < 0 || static_cast<std::size_t>(v.id) >= nodes_.size()) {
        throw ValidationError("tape: invalid var");
    }
    return v.id;
}

Tape::Var Tape::make(Mat value, std::function<void()> back) {
    Node node;
    node.grad = Mat(value.rows(), value.cols(), 0.0);
    node.value = std::move(value);
    node.back = std::move(back);
    nodes_.push_back(std::move(node));
    return Var{static_cast<int>(nodes_.size()) - 1};
}

Tape::Var Tape::input(Mat value) { return make(std::move(value), {}); }
Tape::Var Tape::constant(Mat value) { return make(std::move(value), {}); }

Tape::Var Tape::add(Var a, Var b) {
    int ia = check(a), ib = check(b);
    const Mat& va = val_ref(ia);
    const Mat& vb = val_ref(ib);
    if (!va.same_shape(vb)) throw ValidationError("add: shape mismatch");
    Mat out = va;
    for (std::size_t i = 0; i < out.size(); ++i) out.raw()[i] += vb.raw()[i];
    Var o = make(std::move(out), {});
    int io = o.id;
    nodes_[io].back = [this, ia, ib, io]() {
        const Mat& g = grad_ref(io);
        Mat& ga = grad_ref(ia);
        Mat& gb = grad_ref(ib);
        for (std::size_t i = 0; i < g.size(); ++i) {
            ga.raw()[i] += g.raw()[i];
            gb.raw()[i] += g.raw()[i];
        }
    };
    return o;
}

Tape::Var Tape::sub(Var a, Var b) {
    int ia = check(a), ib = check(b);
    const Mat& va = val_ref(ia);
    const Mat& vb = val_ref(ib);
    if (!va.same_shape(vb)) throw ValidationError("sub: shape mismatch");
    Mat out = va;
    for (std::size_t i = 0; i < out.size(); ++i) out.raw()[i] -= vb.raw()[i];
    Var o = make(std::move(out), {});
    int io = o.id;
    nodes_[io].back = [this, ia, ib, io]() {
        const Mat& g = grad_ref(io);
        Mat& ga = grad_ref(ia);
        Mat& gb = grad_ref(ib);
        for (std::size_t i = 0; i < g.size(); ++i) {
            ga.raw()[i] += g.raw()[i];
            gb.raw()[i] -= g.raw()[i];
        }
    };
    return o;
}

Tape::Var Tape::mul(Var a, Var b) {
    int ia = check(a), ib = check(b);
    const Mat& va = val_ref(ia);
    const Mat& vb = val_ref(ib);
    if (!va.same_shape(vb)) throw ValidationError("mul: shape mismatch");
    Mat out = va;
    for (std::size_t i = 0; i < out.size(); ++i) out.raw()[i] *= vb.raw()[i];
    Var o = make(std::move(out), {});
    int io = o.id;
    nodes_[io].back = [this, ia, ib, io]() {
        const Mat& g = grad_ref(io);
        const Mat& va2 = val_ref(ia);
        const Mat& vb2 = val_ref(ib);
        Mat& ga = grad_ref(ia);
        Mat& gb = grad_ref(ib);
        for (std::size_t i = 0; i < g.size(); ++i) {
            ga.raw()[i] += g.raw()[i] * vb2.raw()[i];
            gb.raw()[i] += g.raw()[i] * va2.raw()[i];
        }
    };
    return o;
}

Tape::Var Tape::scale(Var a, double s) {
    int ia = check(a);
    Mat out = val_ref(ia);
    for (double& v : out.raw()) v *= s;
    Var o = make(std::move(out), {});
    int io = o.id;
    nodes_[io].back = [this, ia, io, s]() {
        const Mat& g = grad_ref(io);
        Mat& ga = grad_ref(ia);
        for (std::size_t i = 0; i < g.size(); ++i) ga.raw()[i] += s * g.raw()[i];
    };
    return o;
}

Tape::Var Tape::add_row_broadcast(Var a, Var row) {
    int ia = check(a), ir = check(row);
    const Mat& va = val_ref(ia);
    const Mat& vr = val_ref(ir);
    if (vr.rows() != 1 || vr.cols() != va.cols()) {
        throw ValidationError("add_row_broadcast: row shape mismatch");
    }
    Mat out = va;
    for (std::size_t r = 0; r < out.rows(); ++r) {
        for (std::size_t c = 0; c < out.cols(); ++c) out(r, c) += vr(0, c);
    }
    Var o = make(std::move(out), {});
    int io = o.id;
    nodes_[io].back = [this, ia, ir, io]() {
        const Mat& g = grad_ref(io);
        Mat& ga = grad_ref(ia);
        Mat& gr = grad_ref(ir);
        for (std::size_t r = 0; r < g.rows(); ++r) {
            for (std::size_t c = 0; c < g.cols(); ++c) {
                ga(r, c) += g(r, c);
                gr(0, c) += g(r, c);
            }
        }
    };
    return o;
}

Tape::Var Tape::relu(Var a) {
    int ia = check(a);
    Mat out = val_ref(ia);
    for (double& v : out.raw()) v = v > 0.0 ? v : 0.0;
    Var o = make(std::move(out), {});
    int io = o.id;
    nodes_[io].back = [this, ia, io]() {
        const Mat& g = grad_ref(io);
        const Mat& va = val_ref(ia);
        Mat& ga = grad_ref(ia);
        for (std::size_t i = 0; i < g.size(); ++i) {
            if (va.raw()[i] > 0.0) ga.raw()[i] += g.raw()[i];
        }
    };
    return o;
}

Tape::Var Tape::tanh(Var a) {
    int ia = check(a);
    Mat out = val_ref(ia);
    for (double& v : out.raw()) v = std::tanh(v);
    Var o = make(std::move(out), {});
    int io = o.id;
    nodes_[io].back = [this, ia, io]() {
        const Mat& g = grad_ref(io);
        const Mat& y = val_ref(io);
        Mat& ga = grad_ref(ia);
        for (std::size_t i = 0; i < g.size(); ++i) {
            ga.raw()[i] += g.raw()[i] * (1.0 - y.raw()[i] * y.raw()[i]);
        }
    };
    return o;
}

Tape::Var Tape::transpose(Var a) {
    int ia = check(a);
    Var o = make(nn::transpose(val_ref(ia)), {});
    int io = o.id;
    nodes_[io].back = [this, ia, io]() {
        const Mat& g = grad_ref(io);
        Mat& ga = grad_ref(ia);
        for (std::size_t r = 0; r < g.rows(); ++r) {
            for (std::size_t c = 0; c < g.cols(); ++c) ga(c, r) += g(r, c);
        }
    };
    return o;
}

Tape::Var Tape::slice_cols(Var a, std::size_t begin, std::size_t end) {
    int ia = check(a);
    const Mat& va = val_ref(ia);
    if (!(begin < end && end <= va.cols())) throw ValidationError("slice_cols: bad range");
    Mat out(va.rows(), end - begin);
    for (std::size_t r = 0; r < va.rows(); ++r) {
        for (std::size_t c = begin; c < end; ++c) out(r, c - begin) = va(r, c);
    }
    Var o = make(std::move(out), {});
    int io = o.id;
    nodes_[io].back = [this, ia, io, begin]() {
        const Mat& g = grad_ref(io);
        Mat& ga = grad_ref(ia);
        for (std::size_t r = 0; r < g.rows(); ++r) {
            for (std::size_t c = 0; c < g.cols(); ++c) ga(r, begin + c) += g(r, c);
        }
    };
    return o;
}

Tape::Var Tape::slice_rows(Var a, std::size_t begin, std::size_t end) {
    int ia = check(a);
    const Mat& va = val_ref(ia);
    if (!(begin < end && end <= va.rows())) throw ValidationError("slice_rows: bad range");
    Mat out(end - begin, va.cols());
    for (std::size_t r = begin; r < end; ++r) {
        for (std::size_t c = 0; c < va.cols(); ++c) out(r - begin, c) = va(r, c);
    }
    Var o = make(std::move(out), {});
    int io = o.id;
    nodes_[io].back = [this, ia, io, begin]() {
        const Mat& g = grad_ref(io);
        Mat& ga = grad_ref(ia);
        for (std::size_t r = 0; r < g.rows(); ++r) {
            for (std::size_t c = 0; c < g.cols(); ++c) ga(begin + r, c) += g(r, c);
        }
    };
    return o;
}

Tape::Var Tape::concat_cols(const std::vector<Var>& parts) {
    if (parts.empty()) throw ValidationError("concat_cols: empty");
    std::vector<int> ids;
    std::size_t rows = val_ref(check(parts[0])).rows();
    std::size_t cols = 0;
    for (Var p : parts) {
        int ip = check(p);
        if (val_ref(ip).rows() != rows) throw ValidationError("concat_cols: row mismatch");
        cols += val_ref(ip).cols();
        ids.push_back(ip);
    }
    Mat out(rows, cols);
    std::size_t at = 0;
    for (int ip : ids) {
        const Mat& v = val_ref(ip);
        for (std::size_t r = 0; r < rows; ++r) {
            for (std::size_t c = 0; c < v.cols(); ++c) out(r, at + c) = v(r, c);
        }
        at += v.cols();
    }
    Var o = make(std::move(out), {});
    int io = o.id;
    nodes_[io].back = [this, ids, io]() {
        const Mat& g = grad_ref(io);
        std::size_t at = 0;
        for (int ip : ids) {
            Mat& gp = grad_ref(ip);
            for (std::size_t r = 0; r < gp.rows(); ++r) {
                for (std::size_t c = 0; c < gp.cols(); ++c) gp(r, c) += g(r, at + c);
            }
            at += gp.cols();
        }
    };
    return o;
}

Tape::Var Tape::concat_rows(const std::vector<Var>& parts) {
    if (parts.empty()) throw ValidationError("concat_rows: empty");
    std::vector<int> ids;
    std::size_t cols = val_ref(check(parts[0])).cols();
    std::size_t rows = 0;
    for (Var p : parts) {
        int ip = check(p);
        if (val_ref(ip).cols() != cols) throw ValidationError("concat_rows: col mismatch");
        rows += val_ref(ip).rows();
        ids.push_back(ip);
    }
    Mat out(rows, cols);
    std::size_t at = 0;
    for (int ip : ids) {
        const Mat& v = val_ref(ip);
        for (std::size_t r = 0; r < v.rows(); ++r) {
            for (std::size_t c = 0; c < cols; ++c) out(at + r, c) = v(r, c);
        }
        at += v.rows();
    }
    Var o = make(std::move(out), {});
    int io = o.id;
    nodes_[io].back = [this, ids, io]() {
        const Mat& g = grad_ref(io);
        std::size_t at = 0;
        for (int ip : ids) {
            Mat& gp = grad_ref(ip);
            for (std::size_t r = 0; r < gp.rows(); ++r) {
                for (std::size_t c = 0; c < gp.cols(); ++c) gp(r, c) += g(at + r, c);
            }
            at += gp.rows();
        }
    };
    return o;
}

Tape::Var Tape::gather_rows(Var table, std::vector<std::size_t> row_ids) {
    int it = check(table);
    const Mat& vt = val_ref(it);
    for (std::size_t r : row_ids) {
        if (r >= vt.rows()) throw ValidationError("gather_rows: row id out of range");
    }
    Mat out(row_ids.size(), vt.cols());
    for (std::size_t i = 0; i < row_ids.size(); ++i) {
        for (std::size_t c = 0; c < vt.cols(); ++c) out(i, c) = vt(row_ids[i], c);
    }
    Var o = make(std::move(out), {});
    int io = o.id;
    nodes_[io].back = [this, it, io, ids = std::move(row_ids)]() {
        const Mat& g = grad_ref(io);
        Mat& gt = grad_ref(it);
        for (std::size_t i = 0; i < ids.size(); ++i) {
            for (std::size_t c = 0; c < g.cols(); ++c) gt(ids[i], c) += g(i, c);
        }
    };
    return o;
}

Tape::Var Tape::mean_rows(Var a) {
    int ia = check(a);
    const Mat& va = val_ref(ia);
    if (va.rows() == 0) throw ValidationError("mean_rows: empty");
    Mat out(1, va.cols());
    for (std::size_t r = 0; r < va.rows(); ++r) {
        for (std::size_t c = 0; c < va.cols(); ++c) out(0, c) += va(r, c);
    }
    double inv = 1.0 / static_cast<double>(va.rows());
    for (double& v : out.raw()) v *= inv;
    Var o = make(std::move(out), {});
    int io = o.id;
    nodes_[io].back = [this, ia, io, inv]() {
        const Mat& g = grad_ref(io);
        Mat& ga = grad_ref(ia);
        for (std::size_t r = 0; r < ga.rows(); ++r) {
            for (std::size_t c = 0; c < ga.cols(); ++c) ga(r, c) += inv * g(0, c);
        }
    };
    return o;
}

Tape::Var Tape::sum_all(Var a) {
    int ia = check(a);
    const Mat& va = val_ref(ia);
    double s = 0.0;
    for (double v : va.raw()) s += v;
    Var o = make(Mat(1, 1, s), {});
    int io = o.id;
    nodes_[io].back = [this, ia, io]() {
        double g = grad_ref(io)(0, 0);
        Mat& ga = grad_ref(ia);
        for (double& v : ga.raw()) v += g;
    };
    return o;
}

Tape::Var Tape::matmul(Var a, Var b) {
    int ia = check(a), ib = check(b);
    Var o = make(nn::matmul(val_ref(ia), val_ref(ib)), {});
    int io = o.id;
    nodes_[io].back = [this, ia, ib, io]() {
        const Mat& g = grad_ref(io);
        const Mat& va = val_ref(ia);
        const Mat& vb = val_ref(ib);
        // dA += G * B^T ; dB += A^T * G
        Mat& ga = grad_ref(ia);
        Mat& gb = grad_ref(ib);
        for (std::size_t i = 0; i < va.rows(); ++i) {
            for (std::size_t j = 0; j < vb.cols(); ++j) {
                double gij = g(i, j);
                if (gij == 0.0) continue;
                for (std::size_t k = 0; k < va.cols(); ++k) {
                    ga(i, k) += gij * vb(k, j);
                    gb(k, j) += gij * va(i, k);
                }
            }
        }
    };
    return o;
}

Tape::Var Tape::softmax_rows(Var a) {
    int ia = check(a);
    const Mat& va = val_ref(ia);
    Mat out(va.rows(), va.cols());
    for (std::size_t r = 0; r < va.rows(); ++r) {
        double mx = va(r, 0);
        for (std::size_t c = 1; c < va.cols(); ++c) mx = std::max(mx, va(r, c));
        double sum = 0.0;
        for (std::size_t c = 0; c < va.cols(); ++c) {
            out(r, c) = std::exp(va(r, c) - mx);
            sum += out(r, c);
        }
        for (std::size_t c = 0; c < va.cols(); ++c) out(r, c) /= sum;
    }
    Var o = make(std::move(out), {});
    int io = o.id;
    nodes_[io].back = [this, ia, io]() {
        const Mat& g = grad_ref(io);
        const Mat& y = val_ref(io);
        Mat& ga = grad_ref(ia);
        for (std::size_t r = 0; r < y.rows(); ++r) {
            double dot = 0.0;
            for (std::size_t c = 0; c < y.cols(); ++c) dot += g(r, c) * y(r, c);
            for (std::size_t c = 0; c < y.cols(); ++c) {
                ga(r, c) += y(r, c) * (g(r, c) - dot);
            }
        }
    };
    return o;
}

Tape::Var Tape::normalize_rows(Var a) {
    int ia = check(a);
    const Mat& va = val_ref(ia);
    Mat out(va.rows(), va.cols());
    std::vector<double> sums(va.rows(), 0.0);
    for (std::size_t r = 0; r < va.rows(); ++r) {
        for (std::size_t c = 0; c < va.cols(); ++c) sums[r] += va(r, c);
        if (sums[r] <= 0.0) throw ValidationError("normalize_rows: nonpositive row sum");
        for (std::size_t c = 0; c < va.cols(); ++c) out(r, c) = va(r, c) / sums[r];
    }
    Var o = make(std::move(out), {});
    int io = o.id;
    nodes_[io].back = [this, ia, io, sums = std::move(sums)]() {
        const Mat& g = grad_ref(io);
        const Mat& y = val_ref(io);
        Mat& ga = grad_ref(ia);
        for (std::size_t r = 0; r < y.rows(); ++r) {
            double dot = 0.0;
            for (std::size_t c = 0; c < y.cols(); ++c) dot += g(r, c) * y(r, c);
            for (std::size_t c = 0; c < y.cols(); ++c) {
                ga(r, c) += (g(r, c) - dot) / sums[r];
            }
        }
    };
    return o;
}

Tape::Var Tape::layer_norm_rows(Var a, Var gain, Var bias, double eps) {
    int ia = check(a), ig = check(gain), ib = check(bias);
    const Mat& va = val_ref(ia);
    const Mat& vg = val_ref(ig);
    const Mat& vb = val_ref(ib);
    if (vg.rows() != 1 || vg.cols() != va.cols() || vb.rows() != 1 || vb.cols() != va.cols()) {
        throw ValidationError("layer_norm_rows: gain/bias shape mismatch");
    }
    std::size_t n = va.cols();
    Mat xhat(va.rows(), n);
    std::vector<double> inv_std(va.rows());
    for (std::size_t r = 0; r < va.rows(); ++r) {
        double mean = 0.0;
        for (std::size_t c = 0; c < n; ++c) mean += va(r, c);
        mean /= static_cast<double>(n);
        double var = 0.0;
        for (std::size_t c = 0; c < n; ++c) {
            double d = va(r, c) - mean;
            var += d * d;
        }
        var /= static_cast<double>(n);
        inv_std[r] = 1.0 / std::sqrt(var + eps);
        for (std::size_t c = 0; c < n; ++c) xhat(r, c) = (va(r, c) - mean) * inv_std[r];
    }
    Mat out(va.rows(), n);
    for (std::size_t r = 0; r < va.rows(); ++r) {
        for (std::size_t c = 0; c < n; ++c) out(r, c) = xhat(r, c) * vg(0, c) + vb(0, c);
    }
    Var o = make(std::move(out), {});
    int io = o.id;
    nodes_[io].back = [this, ia, ig, ib, io, xhat = std::move(xhat),
                       inv_std = std::move(inv_std), n]() {
        const Mat& g = grad_ref(io);
        const Mat& vg2 = val_ref(ig);
        Mat& ga = grad_ref(ia);
        Mat& gg = grad_ref(ig);
        Mat& gb = grad_ref(ib);
        double dn = static_cast<double>(n);
        for (std::size_t r = 0; r < g.rows(); ++r) {
            double sum_dy = 0.0, sum_dy_xhat = 0.0;
            for (std::size_t c = 0; c < n; ++c) {
                double dy = g(r, c) * vg2(0, c);
                sum_dy += dy;
                sum_dy_xhat += dy * xhat(r, c);
                gg(0, c) += g(r, c) * xhat(r, c);
                gb(0, c) += g(r, c);
            }
            for (std::size_t c = 0; c < n; ++c) {
                double dy = g(r, c) * vg2(0, c);
                ga(r, c) += inv_std[r] * (dy - sum_dy / dn - xhat(r, c) * sum_dy_xhat / dn);
            }
        }
    };
    return o;
}

Tape::Var Tape::cross_entropy_mean(Var logits, std::vector<std::size_t> targets) {
    int il = check(logits);
    const Mat& z = val_ref(il);
    if (targets.size() != z.rows()) throw ValidationError("cross_entropy_mean: batch mismatch");
    for (std::size_t t : targets) {
        if (t >= z.cols()) throw ValidationError("cross_entropy_mean: target out of range");
    }
    std::size_t m = z.rows();
    Mat probs(m, z.cols());
    double loss = 0.0;
    for (std::size_t r = 0; r < m; ++r) {
        double mx = z(r, 0);
        for (std::size_t c = 1; c < z.cols(); ++c) mx = std::max(mx, z(r, c));
        double sum = 0.0;
        for (std::size_t c = 0; c < z.cols(); ++c) {
            probs(r, c) = std::exp(z(r, c) - mx);
            sum += probs(r, c);
        }
        for (std::size_t c = 0; c < z.cols(); ++c) probs(r, c) /= sum;
        loss += -(z(r, targets[r]) - mx - std::log(sum));
    }
    loss /= static_cast<double>(m);
    Var o = make(Mat(1, 1, loss), {});
    int io = o.id;
    nodes_[io].back = [this, il, io, probs = std::move(probs), targets = std::move(targets)]() {
        double g = grad_ref(io)(0, 0);
        Mat& gl = grad_ref(il);
        double inv_m = 1.0 / static_cast<double>(probs.rows());
        for (std::size_t r = 0; r < probs.rows(); ++r) {
            for (std::size_t c = 0; c < probs.cols(); ++c) {
                double delta = (c == targets[r]) ? 1.0 : 0.0;
                gl(r, c) += g * inv_m * (probs(r, c) - delta);
            }
        }
    };
    return o;
}

Tape::Var Tape::bce_with_logits_mean(Var logits, std::vector<double> labels) {
    int il = check(logits);
    const Mat& z = val_ref(il);
    if (z.cols() != 1 || labels.size() != z.rows()) {
        throw ValidationError("bce_with_logits_mean: shape mismatch");
    }
    std::size_t m = z.rows();
    double loss = 0.0;
    Mat sig(m, 1);
    for (std::size_t r = 0; r < m; ++r) {
        double x = z(r, 0);
        double y = labels[r];
        // stable: max(x,0) - x*y + log(1 + exp(-|x|))
        loss += std::max(x, 0.0) - x * y + std::log1p(std::exp(-std::abs(x)));
        sig(r, 0) = 1.0 / (1.0 + std::exp(-x));
    }
    loss /= static_cast<double>(m);
    Var o = make(Mat(1, 1, loss), {});
    int io = o.id;
    nodes_[io].back = [this, il, io, sig = std::move(sig), labels = std::move(labels)]() {
        double g = grad_ref(io)(0, 0);
        Mat& gl = grad_ref(il);
        double inv_m = 1.0 / static_cast<double>(sig.rows());
        for (std::size_t r = 0; r < sig.rows(); ++r) {
            gl(r, 0) += g * inv_m * (sig(r, 0) - labels[r]);
        }
    };
    return o;
}

Tape::Var Tape::cosine_align_loss(Var p, Var r) {
    int ip = check(p), ir = check(r);
    const Mat& vp = val_ref(ip);
    const Mat& vr = val_ref(ir);
    if (!vp.same_shape(vr)) throw ValidationError("cosine_align_loss: shape mismatch");
    std::size_t m = vp.rows();
    double loss = 0.0;
    std::vector<double> np(m), nr(m), cs(m);
    for (std::size_t i = 0; i < m; ++i) {
        np[i] = row_norm(vp, i);
        nr[i] = row_norm(vr, i);
        if (np[i] == 0.0 || nr[i] == 0.0) {
            throw ValidationError("cosine_align_loss: zero-norm row " + std::to_string(i));
        }
        cs[i] = dot_row(vp, i, vr, i) / (np[i] * nr[i]);
        loss += 1.0 - cs[i];
    }
    Var o = make(Mat(1, 1, loss), {});
    int io = o.id;
    nodes_[io].back = [this, ip, ir, io, np = std::move(np), nr = std::move(nr),
                       cs = std::move(cs)]() {
        double g = grad_ref(io)(0, 0);
        const Mat& vp2 = val_ref(ip);
        const Mat& vr2 = val_ref(ir);
        Mat& gp = grad_ref(ip);
        Mat& gr = grad_ref(ir);
        for (std::size_t i = 0; i < vp2.rows(); ++i) {
            // d(1 - cos)/dp = cos * p / |p|^2 - r / (|p||r|), symmetric in r.
            for (std::size_t c = 0; c < vp2.cols(); ++c) {
                gp(i, c) += g * (cs[i] * vp2(i, c) / (np[i] * np[i]) -
                                 vr2(i, c) / (np[i] * nr[i]));
                gr(i, c) += g * (cs[i] * vr2(i, c) / (nr[i] * nr[i]) -
                                 vp2(i, c) / (np[i] * nr[i]));
            }
        }
    };
    return o;
}

void Tape::backward(Var loss) {
    int il = check(loss);
    const Mat& v = val_ref(il);
    if (v.rows() != 1 || v.cols() != 1) throw ValidationError("backward: loss must be 1x1");
    grad_ref(il)(0, 0) = 1.0;
    for (int i = il; i >= 0; --i) {
        auto& node = nodes_[static_cast<std::size_t>(i)];
        if (node.back) node.back();
    }
}

}  // namespace cdcr::nn
