#include "cfrec/ops.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace cfrec {

namespace {

std::string shape_str(const std::vector<int>& s) {
    std::string out = "(";
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (i) out += ",";
        out += std::to_string(s[i]);
    }
    return out + ")";
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
    if (a.shape() != b.shape())
        throw InvalidShapeError(std::string(op) + ": shape mismatch " + shape_str(a.shape()) +
                                " vs " + shape_str(b.shape()));
}

void accumulate(const NodePtr& p, const Vec& g) {
    if (!p->requires_grad) return;
    p->ensure_grad();
    p->grad += g;
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "add");
    Vec out = a.values() + b.values();
    return make_op_node(a.shape(), std::move(out), {a.node(), b.node()}, [](TensorNode& self) {
        accumulate(self.parents[0], self.grad);
        accumulate(self.parents[1], self.grad);
    });
}

Tensor sub(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "sub");
    Vec out = a.values() - b.values();
    return make_op_node(a.shape(), std::move(out), {a.node(), b.node()}, [](TensorNode& self) {
        accumulate(self.parents[0], self.grad);
        accumulate(self.parents[1], -self.grad);
    });
}

Tensor mul(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "mul");
    Vec out = a.values().cwiseProduct(b.values());
    return make_op_node(a.shape(), std::move(out), {a.node(), b.node()}, [](TensorNode& self) {
        accumulate(self.parents[0], self.grad.cwiseProduct(self.parents[1]->values));
        accumulate(self.parents[1], self.grad.cwiseProduct(self.parents[0]->values));
    });
}

Tensor scale(const Tensor& a, double c) {
    Vec out = a.values() * c;
    return make_op_node(a.shape(), std::move(out), {a.node()}, [c](TensorNode& self) {
        accumulate(self.parents[0], (self.grad * c).eval());
    });
}

Tensor add_const(const Tensor& a, double c) {
    Vec out = a.values().array() + c;
    return make_op_node(a.shape(), std::move(out), {a.node()}, [](TensorNode& self) {
        accumulate(self.parents[0], self.grad);
    });
}

Tensor relu(const Tensor& a) {
    Vec out = a.values().cwiseMax(0.0);
    return make_op_node(a.shape(), std::move(out), {a.node()}, [](TensorNode& self) {
        const Vec& x = self.parents[0]->values;
        Vec g = (x.array() > 0.0).select(self.grad, Vec::Zero(x.size()));
        accumulate(self.parents[0], g);
    });
}

Tensor sigmoid(const Tensor& a) {
    const Vec& x = a.values();
    Vec out(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        double v = x[i];
        if (v >= 0.0) {
            out[i] = 1.0 / (1.0 + std::exp(-v));
        } else {
            double e = std::exp(v);
            out[i] = e / (1.0 + e);
        }
    }
    return make_op_node(a.shape(), std::move(out), {a.node()}, [](TensorNode& self) {
        const Vec& y = self.values;
        Vec g = self.grad.array() * y.array() * (1.0 - y.array());
        accumulate(self.parents[0], g);
    });
}

Tensor softmax(const Tensor& v) {
    if (v.rank() != 1) throw InvalidShapeError("softmax: expected rank-1 input");
    const Vec& x = v.values();
    double m = x.maxCoeff();
    Vec e = (x.array() - m).exp();
    Vec out = e / e.sum();
    return make_op_node(v.shape(), std::move(out), {v.node()}, [](TensorNode& self) {
        const Vec& y = self.values;
        double inner = y.dot(self.grad);
        Vec g = y.array() * (self.grad.array() - inner);
        accumulate(self.parents[0], g);
    });
}

Tensor sum(const Tensor& a) {
    Vec out(1);
    out[0] = a.values().sum();
    return make_op_node({1}, std::move(out), {a.node()}, [](TensorNode& self) {
        const NodePtr& p = self.parents[0];
        if (!p->requires_grad) return;
        p->ensure_grad();
        p->grad.array() += self.grad[0];
    });
}

Tensor sum_scalars(const std::vector<Tensor>& xs) {
    if (xs.empty()) throw InvalidArgumentError("sum_scalars: empty input");
    double total = 0.0;
    std::vector<NodePtr> parents;
    parents.reserve(xs.size());
    for (const Tensor& t : xs) {
        if (t.size() != 1) throw InvalidShapeError("sum_scalars: inputs must be scalar");
        total += t.value();
        parents.push_back(t.node());
    }
    Vec out(1);
    out[0] = total;
    return make_op_node({1}, std::move(out), std::move(parents), [](TensorNode& self) {
        for (const NodePtr& p : self.parents) {
            if (!p->requires_grad) continue;
            p->ensure_grad();
            p->grad[0] += self.grad[0];
        }
    });
}

Tensor matmul(const Tensor& a, const Tensor& b) {
    if (a.rank() != 2 || b.rank() != 2 || a.dim(1) != b.dim(0))
        throw InvalidShapeError("matmul: incompatible shapes " + shape_str(a.shape()) + " x " +
                                shape_str(b.shape()));
    const int m = a.dim(0), k = a.dim(1), n = b.dim(1);
    ConstMatMap am(a.values().data(), m, k);
    ConstMatMap bm(b.values().data(), k, n);
    Vec out(static_cast<Eigen::Index>(m) * n);
    MatMap(out.data(), m, n) = am * bm;
    return make_op_node({m, n}, std::move(out), {a.node(), b.node()},
                        [m, k, n](TensorNode& self) {
                            ConstMatMap dc(self.grad.data(), m, n);
                            const NodePtr& pa = self.parents[0];
                            const NodePtr& pb = self.parents[1];
                            if (pa->requires_grad) {
                                pa->ensure_grad();
                                ConstMatMap bm(pb->values.data(), k, n);
                                MatMap(pa->grad.data(), m, k).noalias() += dc * bm.transpose();
                            }
                            if (pb->requires_grad) {
                                pb->ensure_grad();
                                ConstMatMap am(pa->values.data(), m, k);
                                MatMap(pb->grad.data(), k, n).noalias() += am.transpose() * dc;
                            }
                        });
}

Tensor add_row_bias(const Tensor& m, const Tensor& bias) {
    if (m.rank() != 2 || bias.rank() != 1 || m.dim(1) != bias.dim(0))
        throw InvalidShapeError("add_row_bias: incompatible shapes");
    const int rows = m.dim(0), cols = m.dim(1);
    Vec out = m.values();
    MatMap(out.data(), rows, cols).rowwise() +=
        Eigen::Map<const Eigen::RowVectorXd>(bias.values().data(), cols);
    return make_op_node({rows, cols}, std::move(out), {m.node(), bias.node()},
                        [rows, cols](TensorNode& self) {
                            accumulate(self.parents[0], self.grad);
                            const NodePtr& pb = self.parents[1];
                            if (pb->requires_grad) {
                                pb->ensure_grad();
                                ConstMatMap g(self.grad.data(), rows, cols);
                                pb->grad += g.colwise().sum().transpose();
                            }
                        });
}

Tensor vec_linear(const Tensor& x, const Tensor& w, const Tensor& bias) {
    if (x.rank() != 1 || w.rank() != 2 || bias.rank() != 1 || w.dim(0) != x.dim(0) ||
        w.dim(1) != bias.dim(0))
        throw InvalidShapeError("vec_linear: incompatible shapes");
    const int n = w.dim(0), m = w.dim(1);
    ConstMatMap wm(w.values().data(), n, m);
    Vec out = wm.transpose() * x.values() + bias.values();
    return make_op_node({m}, std::move(out), {x.node(), w.node(), bias.node()},
                        [n, m](TensorNode& self) {
                            const NodePtr& px = self.parents[0];
                            const NodePtr& pw = self.parents[1];
                            const NodePtr& pb = self.parents[2];
                            if (px->requires_grad) {
                                px->ensure_grad();
                                ConstMatMap wm(pw->values.data(), n, m);
                                px->grad.noalias() += wm * self.grad;
                            }
                            if (pw->requires_grad) {
                                pw->ensure_grad();
                                MatMap(pw->grad.data(), n, m).noalias() +=
                                    px->values * self.grad.transpose();
                            }
                            accumulate(pb, self.grad);
                        });
}

Tensor lookup_rows(const Tensor& table, const std::vector<int>& ids) {
    if (table.rank() != 2) throw InvalidShapeError("lookup_rows: table must be rank-2");
    if (ids.empty()) throw InvalidArgumentError("lookup_rows: empty id list");
    const int v = table.dim(0), d = table.dim(1);
    for (int id : ids)
        if (id < 0 || id >= v)
            throw InvalidIndexError("lookup_rows: id " + std::to_string(id) + " out of range [0," +
                                    std::to_string(v) + ")");
    const int l = static_cast<int>(ids.size());
    Vec out(static_cast<Eigen::Index>(l) * d);
    ConstMatMap tm(table.values().data(), v, d);
    MatMap om(out.data(), l, d);
    for (int r = 0; r < l; ++r) om.row(r) = tm.row(ids[static_cast<std::size_t>(r)]);
    return make_op_node({l, d}, std::move(out), {table.node()}, [ids, l, d](TensorNode& self) {
        const NodePtr& pt = self.parents[0];
        if (!pt->requires_grad) return;
        pt->ensure_grad();
        ConstMatMap g(self.grad.data(), l, d);
        MatMap tg(pt->grad.data(), pt->shape[0], d);
        for (int r = 0; r < l; ++r) tg.row(ids[static_cast<std::size_t>(r)]) += g.row(r);
    });
}

Tensor lookup_row(const Tensor& table, int id) {
    if (table.rank() != 2) throw InvalidShapeError("lookup_row: table must be rank-2");
    const int v = table.dim(0), d = table.dim(1);
    if (id < 0 || id >= v)
        throw InvalidIndexError("lookup_row: id " + std::to_string(id) + " out of range [0," +
                                std::to_string(v) + ")");
    ConstMatMap tm(table.values().data(), v, d);
    Vec out = tm.row(id).transpose();
    return make_op_node({d}, std::move(out), {table.node()}, [id, d](TensorNode& self) {
        const NodePtr& pt = self.parents[0];
        if (!pt->requires_grad) return;
        pt->ensure_grad();
        MatMap tg(pt->grad.data(), pt->shape[0], d);
        tg.row(id) += self.grad.transpose();
    });
}

Tensor conv1d(const Tensor& seq, const Tensor& kernels, const Tensor& bias) {
    if (seq.rank() != 2 || kernels.rank() != 3 || bias.rank() != 1)
        throw InvalidShapeError("conv1d: expected seq {L,d_in}, kernels {w,d_in,d_out}, bias {d_out}");
    const int l = seq.dim(0), d_in = seq.dim(1);
    const int w = kernels.dim(0), d_out = kernels.dim(2);
    if (kernels.dim(1) != d_in)
        throw InvalidShapeError("conv1d: kernel d_in " + std::to_string(kernels.dim(1)) +
                                " != seq d_in " + std::to_string(d_in));
    if (bias.dim(0) != d_out) throw InvalidShapeError("conv1d: bias size != d_out");
    if (l < w) throw InvalidShapeError("conv1d: sequence shorter than kernel width");

    const int out_len = l - w + 1;
    const int patch = w * d_in;

    // im2col: row t holds the window starting at t; the kernel tensor's
    // row-major layout is exactly the {patch, d_out} matrix view.
    Mat cols(out_len, patch);
    ConstMatMap x(seq.values().data(), l, d_in);
    for (int t = 0; t < out_len; ++t)
        for (int j = 0; j < w; ++j) cols.block(t, j * d_in, 1, d_in) = x.row(t + j);

    ConstMatMap km(kernels.values().data(), patch, d_out);
    Vec out(static_cast<Eigen::Index>(out_len) * d_out);
    MatMap om(out.data(), out_len, d_out);
    om.noalias() = cols * km;
    om.rowwise() += Eigen::Map<const Eigen::RowVectorXd>(bias.values().data(), d_out);

    return make_op_node(
        {out_len, d_out}, std::move(out), {seq.node(), kernels.node(), bias.node()},
        [cols = std::move(cols), l, d_in, w, d_out, out_len, patch](TensorNode& self) {
            ConstMatMap dy(self.grad.data(), out_len, d_out);
            const NodePtr& ps = self.parents[0];
            const NodePtr& pk = self.parents[1];
            const NodePtr& pb = self.parents[2];
            if (pk->requires_grad) {
                pk->ensure_grad();
                MatMap(pk->grad.data(), patch, d_out).noalias() += cols.transpose() * dy;
            }
            if (pb->requires_grad) {
                pb->ensure_grad();
                pb->grad += dy.colwise().sum().transpose();
            }
            if (ps->requires_grad) {
                ps->ensure_grad();
                ConstMatMap km(pk->values.data(), patch, d_out);
                Mat dcols = dy * km.transpose();  // {out_len, patch}
                MatMap dx(ps->grad.data(), l, d_in);
                for (int t = 0; t < out_len; ++t)
                    for (int j = 0; j < w; ++j) dx.row(t + j) += dcols.block(t, j * d_in, 1, d_in);
            }
        });
}

Tensor maxpool1d(const Tensor& seq, int window, int stride) {
    if (seq.rank() != 2) throw InvalidShapeError("maxpool1d: expected rank-2 input");
    if (window < 1 || stride < 1)
        throw InvalidArgumentError("maxpool1d: window and stride must be positive");
    const int l = seq.dim(0), d = seq.dim(1);
    if (l < window) throw InvalidShapeError("maxpool1d: sequence shorter than window");
    const int out_len = (l - window) / stride + 1;

    ConstMatMap x(seq.values().data(), l, d);
    Vec out(static_cast<Eigen::Index>(out_len) * d);
    MatMap om(out.data(), out_len, d);
    // argmax per (output position, channel); ties go to the lowest index so
    // the backward pass is deterministic.
    std::vector<int> argmax(static_cast<std::size_t>(out_len) * static_cast<std::size_t>(d));
    for (int t = 0; t < out_len; ++t) {
        const int start = t * stride;
        for (int c = 0; c < d; ++c) {
            int best = start;
            double best_v = x(start, c);
            for (int j = 1; j < window; ++j) {
                double v = x(start + j, c);
                if (v > best_v) {
                    best_v = v;
                    best = start + j;
                }
            }
            om(t, c) = best_v;
            argmax[static_cast<std::size_t>(t) * d + c] = best;
        }
    }
    return make_op_node({out_len, d}, std::move(out), {seq.node()},
                        [argmax = std::move(argmax), out_len, d](TensorNode& self) {
                            const NodePtr& ps = self.parents[0];
                            if (!ps->requires_grad) return;
                            ps->ensure_grad();
                            ConstMatMap dy(self.grad.data(), out_len, d);
                            MatMap dx(ps->grad.data(), ps->shape[0], d);
                            for (int t = 0; t < out_len; ++t)
                                for (int c = 0; c < d; ++c)
                                    dx(argmax[static_cast<std::size_t>(t) * d + c], c) += dy(t, c);
                        });
}

Tensor weighted_rows_sum(const Tensor& rows, const Tensor& alpha) {
    if (rows.rank() != 2 || alpha.rank() != 1 || rows.dim(0) != alpha.dim(0))
        throw InvalidShapeError("weighted_rows_sum: incompatible shapes");
    const int p = rows.dim(0), d = rows.dim(1);
    ConstMatMap h(rows.values().data(), p, d);
    Vec out = h.transpose() * alpha.values();
    return make_op_node({d}, std::move(out), {rows.node(), alpha.node()},
                        [p, d](TensorNode& self) {
                            const NodePtr& ph = self.parents[0];
                            const NodePtr& pa = self.parents[1];
                            if (ph->requires_grad) {
                                ph->ensure_grad();
                                MatMap(ph->grad.data(), p, d).noalias() +=
                                    pa->values * self.grad.transpose();
                            }
                            if (pa->requires_grad) {
                                pa->ensure_grad();
                                ConstMatMap h(ph->values.data(), p, d);
                                pa->grad.noalias() += h * self.grad;
                            }
                        });
}

Tensor dropout(const Tensor& x, double drop_rate, Rng& rng, bool train) {
    if (drop_rate < 0.0 || drop_rate >= 1.0)
        throw InvalidArgumentError("dropout: rate must be in [0,1)");
    if (!train || drop_rate == 0.0) return x;
    const double keep = 1.0 - drop_rate;
    const double inv_keep = 1.0 / keep;
    Vec mask(x.size());
    for (Eigen::Index i = 0; i < mask.size(); ++i)
        mask[i] = rng.uniform() < keep ? inv_keep : 0.0;
    Vec out = x.values().cwiseProduct(mask);
    return make_op_node(x.shape(), std::move(out), {x.node()},
                        [mask = std::move(mask)](TensorNode& self) {
                            accumulate(self.parents[0], self.grad.cwiseProduct(mask));
                        });
}

Tensor flatten(const Tensor& x) {
    Vec out = x.values();
    return make_op_node({static_cast<int>(x.size())}, std::move(out), {x.node()},
                        [](TensorNode& self) { accumulate(self.parents[0], self.grad); });
}

}  // namespace cfrec
