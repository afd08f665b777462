#include "roirank/ops.hpp"

#include <cmath>
#include <cstring>

namespace roirank {

namespace {

bool any_requires(const std::vector<Value>& parents) {
    for (const auto& p : parents)
        if (p->requires_grad) return true;
    return false;
}

Value make_op(Tensor out, std::vector<Value> parents,
              std::function<void(Node&)> backprop) {
    auto n = std::make_shared<Node>();
    n->value = std::move(out);
    if (grad_enabled() && any_requires(parents)) {
        n->requires_grad = true;
        n->parents = std::move(parents);
        n->backprop = std::move(backprop);
    }
    return n;
}

void check_same_shape(const Value& a, const Value& b, const char* op) {
    if (!a->value.same_shape(b->value)) {
        throw ShapeError(std::string(op) + ": shape mismatch " +
                         shape_to_string(a->shape()) + " vs " +
                         shape_to_string(b->shape()));
    }
}

// Decompose a shape around `axis` into [outer, extent, inner].
void axis_strides(const std::vector<std::size_t>& shape, std::size_t axis,
                  std::size_t& outer, std::size_t& extent, std::size_t& inner) {
    outer = 1;
    for (std::size_t i = 0; i < axis; ++i) outer *= shape[i];
    extent = shape[axis];
    inner = 1;
    for (std::size_t i = axis + 1; i < shape.size(); ++i) inner *= shape[i];
}

}  // namespace

Value add(const Value& a, const Value& b) {
    check_same_shape(a, b, "add");
    Tensor out = a->value;
    const double* bd = b->value.data();
    double* od = out.data();
    for (std::size_t i = 0; i < out.size(); ++i) od[i] += bd[i];
    return make_op(std::move(out), {a, b}, [](Node& n) {
        for (int k = 0; k < 2; ++k) {
            Node* p = n.parents[k].get();
            if (!p->requires_grad) continue;
            p->ensure_grad();
            const double* g = n.grad.data();
            double* pg = p->grad.data();
            for (std::size_t i = 0; i < n.grad.size(); ++i) pg[i] += g[i];
        }
    });
}

Value mul(const Value& a, const Value& b) {
    check_same_shape(a, b, "mul");
    Tensor out = a->value;
    const double* bd = b->value.data();
    double* od = out.data();
    for (std::size_t i = 0; i < out.size(); ++i) od[i] *= bd[i];
    return make_op(std::move(out), {a, b}, [](Node& n) {
        Node* a = n.parents[0].get();
        Node* b = n.parents[1].get();
        const double* g = n.grad.data();
        if (a->requires_grad) {
            a->ensure_grad();
            const double* bv = b->value.data();
            double* ag = a->grad.data();
            for (std::size_t i = 0; i < n.grad.size(); ++i) ag[i] += g[i] * bv[i];
        }
        if (b->requires_grad) {
            b->ensure_grad();
            const double* av = a->value.data();
            double* bg = b->grad.data();
            for (std::size_t i = 0; i < n.grad.size(); ++i) bg[i] += g[i] * av[i];
        }
    });
}

Value scale(const Value& a, double s) {
    Tensor out = a->value;
    for (double& v : out.values()) v *= s;
    return make_op(std::move(out), {a}, [s](Node& n) {
        Node* a = n.parents[0].get();
        if (!a->requires_grad) return;
        a->ensure_grad();
        const double* g = n.grad.data();
        double* ag = a->grad.data();
        for (std::size_t i = 0; i < n.grad.size(); ++i) ag[i] += g[i] * s;
    });
}

Value reshape(const Value& a, std::vector<std::size_t> shape) {
    Tensor out = a->value.reshaped(std::move(shape));
    return make_op(std::move(out), {a}, [](Node& n) {
        Node* a = n.parents[0].get();
        if (!a->requires_grad) return;
        a->ensure_grad();
        const double* g = n.grad.data();
        double* ag = a->grad.data();
        for (std::size_t i = 0; i < n.grad.size(); ++i) ag[i] += g[i];
    });
}

Value narrow(const Value& a, std::size_t axis, std::size_t start, std::size_t len) {
    const auto& shape = a->shape();
    if (axis >= shape.size() || start + len > shape[axis]) {
        throw ShapeError("narrow out of bounds on " + shape_to_string(shape));
    }
    std::size_t outer, extent, inner;
    axis_strides(shape, axis, outer, extent, inner);
    std::vector<std::size_t> out_shape = shape;
    out_shape[axis] = len;
    Tensor out(out_shape);
    const double* ad = a->value.data();
    double* od = out.data();
    for (std::size_t o = 0; o < outer; ++o) {
        std::memcpy(od + o * len * inner, ad + (o * extent + start) * inner,
                    len * inner * sizeof(double));
    }
    return make_op(std::move(out), {a},
                   [outer, extent, inner, start, len](Node& n) {
        Node* a = n.parents[0].get();
        if (!a->requires_grad) return;
        a->ensure_grad();
        const double* g = n.grad.data();
        double* ag = a->grad.data();
        for (std::size_t o = 0; o < outer; ++o) {
            const double* gs = g + o * len * inner;
            double* as = ag + (o * extent + start) * inner;
            for (std::size_t i = 0; i < len * inner; ++i) as[i] += gs[i];
        }
    });
}

Value concat_lastdim(const Value& a, const Value& b) {
    const auto& sa = a->shape();
    const auto& sb = b->shape();
    if (sa.size() != sb.size() || sa.empty()) {
        throw ShapeError("concat_lastdim: rank mismatch");
    }
    for (std::size_t i = 0; i + 1 < sa.size(); ++i) {
        if (sa[i] != sb[i]) throw ShapeError("concat_lastdim: leading dims differ");
    }
    std::size_t la = sa.back(), lb = sb.back();
    std::size_t rows = shape_product(sa) / la;
    std::vector<std::size_t> out_shape = sa;
    out_shape.back() = la + lb;
    Tensor out(out_shape);
    const double* ad = a->value.data();
    const double* bd = b->value.data();
    double* od = out.data();
    for (std::size_t r = 0; r < rows; ++r) {
        std::memcpy(od + r * (la + lb), ad + r * la, la * sizeof(double));
        std::memcpy(od + r * (la + lb) + la, bd + r * lb, lb * sizeof(double));
    }
    return make_op(std::move(out), {a, b}, [rows, la, lb](Node& n) {
        Node* a = n.parents[0].get();
        Node* b = n.parents[1].get();
        const double* g = n.grad.data();
        if (a->requires_grad) {
            a->ensure_grad();
            double* ag = a->grad.data();
            for (std::size_t r = 0; r < rows; ++r)
                for (std::size_t i = 0; i < la; ++i)
                    ag[r * la + i] += g[r * (la + lb) + i];
        }
        if (b->requires_grad) {
            b->ensure_grad();
            double* bg = b->grad.data();
            for (std::size_t r = 0; r < rows; ++r)
                for (std::size_t i = 0; i < lb; ++i)
                    bg[r * lb + i] += g[r * (la + lb) + la + i];
        }
    });
}

Value stack_axis1(const std::vector<Value>& steps) {
    if (steps.empty()) throw ShapeError("stack_axis1: empty input");
    const auto& s0 = steps[0]->shape();
    if (s0.size() != 2) throw ShapeError("stack_axis1: expects [B x F] steps");
    std::size_t batch = s0[0], feat = s0[1], n_steps = steps.size();
    for (const auto& s : steps) check_same_shape(s, steps[0], "stack_axis1");
    Tensor out({batch, n_steps, feat});
    double* od = out.data();
    for (std::size_t t = 0; t < n_steps; ++t) {
        const double* sd = steps[t]->value.data();
        for (std::size_t b = 0; b < batch; ++b) {
            std::memcpy(od + (b * n_steps + t) * feat, sd + b * feat,
                        feat * sizeof(double));
        }
    }
    std::vector<Value> parents(steps.begin(), steps.end());
    return make_op(std::move(out), std::move(parents),
                   [batch, n_steps, feat](Node& n) {
        const double* g = n.grad.data();
        for (std::size_t t = 0; t < n_steps; ++t) {
            Node* p = n.parents[t].get();
            if (!p->requires_grad) continue;
            p->ensure_grad();
            double* pg = p->grad.data();
            for (std::size_t b = 0; b < batch; ++b) {
                const double* gs = g + (b * n_steps + t) * feat;
                double* ps = pg + b * feat;
                for (std::size_t i = 0; i < feat; ++i) ps[i] += gs[i];
            }
        }
    });
}

Value leaky_relu(const Value& a, double slope) {
    Tensor out = a->value;
    for (double& v : out.values()) {
        if (v < 0) v *= slope;
    }
    return make_op(std::move(out), {a}, [slope](Node& n) {
        Node* a = n.parents[0].get();
        if (!a->requires_grad) return;
        a->ensure_grad();
        const double* g = n.grad.data();
        const double* x = a->value.data();
        double* ag = a->grad.data();
        // subgradient at 0 fixed to the slope
        for (std::size_t i = 0; i < n.grad.size(); ++i)
            ag[i] += g[i] * (x[i] > 0 ? 1.0 : slope);
    });
}

Value tanh_op(const Value& a) {
    Tensor out = a->value;
    for (double& v : out.values()) v = std::tanh(v);
    return make_op(std::move(out), {a}, [](Node& n) {
        Node* a = n.parents[0].get();
        if (!a->requires_grad) return;
        a->ensure_grad();
        const double* g = n.grad.data();
        const double* y = n.value.data();
        double* ag = a->grad.data();
        for (std::size_t i = 0; i < n.grad.size(); ++i)
            ag[i] += g[i] * (1.0 - y[i] * y[i]);
    });
}

Value sigmoid(const Value& a) {
    Tensor out = a->value;
    for (double& v : out.values()) v = 1.0 / (1.0 + std::exp(-v));
    return make_op(std::move(out), {a}, [](Node& n) {
        Node* a = n.parents[0].get();
        if (!a->requires_grad) return;
        a->ensure_grad();
        const double* g = n.grad.data();
        const double* y = n.value.data();
        double* ag = a->grad.data();
        for (std::size_t i = 0; i < n.grad.size(); ++i)
            ag[i] += g[i] * y[i] * (1.0 - y[i]);
    });
}

Value mean_lastdim(const Value& a) {
    const auto& shape = a->shape();
    if (shape.size() < 2) throw ShapeError("mean_lastdim: rank >= 2 required");
    std::size_t len = shape.back();
    std::size_t rows = shape_product(shape) / len;
    std::vector<std::size_t> out_shape(shape.begin(), shape.end() - 1);
    Tensor out(out_shape);
    const double* ad = a->value.data();
    double* od = out.data();
    for (std::size_t r = 0; r < rows; ++r) {
        double s = 0;
        for (std::size_t i = 0; i < len; ++i) s += ad[r * len + i];
        od[r] = s / static_cast<double>(len);
    }
    return make_op(std::move(out), {a}, [rows, len](Node& n) {
        Node* a = n.parents[0].get();
        if (!a->requires_grad) return;
        a->ensure_grad();
        const double* g = n.grad.data();
        double* ag = a->grad.data();
        double inv = 1.0 / static_cast<double>(len);
        for (std::size_t r = 0; r < rows; ++r)
            for (std::size_t i = 0; i < len; ++i) ag[r * len + i] += g[r] * inv;
    });
}

Value mean_axis1(const Value& a) {
    const auto& shape = a->shape();
    if (shape.size() != 3) throw ShapeError("mean_axis1: expects [B x N x F]");
    std::size_t batch = shape[0], n = shape[1], feat = shape[2];
    Tensor out({batch, feat});
    const double* ad = a->value.data();
    double* od = out.data();
    for (std::size_t b = 0; b < batch; ++b) {
        for (std::size_t f = 0; f < feat; ++f) {
            double s = 0;
            for (std::size_t i = 0; i < n; ++i) s += ad[(b * n + i) * feat + f];
            od[b * feat + f] = s / static_cast<double>(n);
        }
    }
    return make_op(std::move(out), {a}, [batch, n, feat](Node& nd) {
        Node* a = nd.parents[0].get();
        if (!a->requires_grad) return;
        a->ensure_grad();
        const double* g = nd.grad.data();
        double* ag = a->grad.data();
        double inv = 1.0 / static_cast<double>(n);
        for (std::size_t b = 0; b < batch; ++b)
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t f = 0; f < feat; ++f)
                    ag[(b * n + i) * feat + f] += g[b * feat + f] * inv;
    });
}

Value linear(const Value& x, const Value& w, const Value& b) {
    const auto& xs = x->shape();
    const auto& ws = w->shape();
    if (xs.empty() || ws.size() != 2 || xs.back() != ws[1]) {
        throw ShapeError("linear: x " + shape_to_string(xs) + " vs w " +
                         shape_to_string(ws));
    }
    std::size_t in = ws[1], out_dim = ws[0];
    std::size_t rows = shape_product(xs) / in;
    if (b && (b->shape().size() != 1 || b->shape()[0] != out_dim)) {
        throw ShapeError("linear: bias shape mismatch");
    }
    std::vector<std::size_t> out_shape(xs.begin(), xs.end() - 1);
    out_shape.push_back(out_dim);
    Tensor out(out_shape);
    const double* xd = x->value.data();
    const double* wd = w->value.data();
    const double* bd = b ? b->value.data() : nullptr;
    double* od = out.data();
    for (std::size_t r = 0; r < rows; ++r) {
        const double* xr = xd + r * in;
        double* orow = od + r * out_dim;
        for (std::size_t o = 0; o < out_dim; ++o) {
            const double* wr = wd + o * in;
            double s = bd ? bd[o] : 0.0;
            for (std::size_t i = 0; i < in; ++i) s += xr[i] * wr[i];
            orow[o] = s;
        }
    }
    std::vector<Value> parents = b ? std::vector<Value>{x, w, b}
                                   : std::vector<Value>{x, w};
    return make_op(std::move(out), std::move(parents),
                   [rows, in, out_dim](Node& n) {
        Node* x = n.parents[0].get();
        Node* w = n.parents[1].get();
        Node* b = n.parents.size() > 2 ? n.parents[2].get() : nullptr;
        const double* g = n.grad.data();
        if (x->requires_grad) {
            x->ensure_grad();
            const double* wd = w->value.data();
            double* xg = x->grad.data();
            for (std::size_t r = 0; r < rows; ++r) {
                const double* gr = g + r * out_dim;
                double* xr = xg + r * in;
                for (std::size_t o = 0; o < out_dim; ++o) {
                    const double go = gr[o];
                    const double* wr = wd + o * in;
                    for (std::size_t i = 0; i < in; ++i) xr[i] += go * wr[i];
                }
            }
        }
        if (w->requires_grad) {
            w->ensure_grad();
            const double* xd = x->value.data();
            double* wg = w->grad.data();
            for (std::size_t r = 0; r < rows; ++r) {
                const double* gr = g + r * out_dim;
                const double* xr = xd + r * in;
                for (std::size_t o = 0; o < out_dim; ++o) {
                    const double go = gr[o];
                    double* wr = wg + o * in;
                    for (std::size_t i = 0; i < in; ++i) wr[i] += go * xr[i];
                }
            }
        }
        if (b && b->requires_grad) {
            b->ensure_grad();
            double* bg = b->grad.data();
            for (std::size_t r = 0; r < rows; ++r)
                for (std::size_t o = 0; o < out_dim; ++o) bg[o] += g[r * out_dim + o];
        }
    });
}

Value conv1d(const Value& x, const Value& w, const Value& b, std::size_t dilation) {
    const auto& xs = x->shape();
    const auto& ws = w->shape();
    if (xs.size() != 3 || ws.size() != 3) {
        throw ShapeError("conv1d: expects x [N x C x L], w [Co x Ci x K]");
    }
    if (dilation == 0) throw ShapeError("conv1d: dilation must be positive");
    std::size_t batch = xs[0], cin = xs[1], len = xs[2];
    std::size_t cout = ws[0], k = ws[2];
    if (ws[1] != cin) throw ShapeError("conv1d: channel mismatch");
    std::size_t span = (k - 1) * dilation + 1;
    if (len < span) {
        throw DataError("conv1d: sequence length " + std::to_string(len) +
                        " shorter than effective kernel span " + std::to_string(span));
    }
    if (b && (b->shape().size() != 1 || b->shape()[0] != cout)) {
        throw ShapeError("conv1d: bias shape mismatch");
    }
    std::size_t lout = len - (k - 1) * dilation;
    Tensor out({batch, cout, lout});
    const double* xd = x->value.data();
    const double* wd = w->value.data();
    const double* bd = b ? b->value.data() : nullptr;
    double* od = out.data();
    for (std::size_t n = 0; n < batch; ++n) {
        for (std::size_t co = 0; co < cout; ++co) {
            double* orow = od + (n * cout + co) * lout;
            const double bias = bd ? bd[co] : 0.0;
            for (std::size_t t = 0; t < lout; ++t) orow[t] = bias;
            for (std::size_t ci = 0; ci < cin; ++ci) {
                const double* xrow = xd + (n * cin + ci) * len;
                const double* wrow = wd + (co * cin + ci) * k;
                for (std::size_t kk = 0; kk < k; ++kk) {
                    const double wv = wrow[kk];
                    const double* xoff = xrow + kk * dilation;
                    for (std::size_t t = 0; t < lout; ++t) orow[t] += wv * xoff[t];
                }
            }
        }
    }
    std::vector<Value> parents = b ? std::vector<Value>{x, w, b}
                                   : std::vector<Value>{x, w};
    return make_op(std::move(out), std::move(parents),
                   [batch, cin, cout, len, lout, k, dilation](Node& nd) {
        Node* x = nd.parents[0].get();
        Node* w = nd.parents[1].get();
        Node* b = nd.parents.size() > 2 ? nd.parents[2].get() : nullptr;
        const double* g = nd.grad.data();
        const double* xd = x->value.data();
        const double* wd = w->value.data();
        if (x->requires_grad) {
            x->ensure_grad();
            double* xg = x->grad.data();
            for (std::size_t n = 0; n < batch; ++n)
                for (std::size_t co = 0; co < cout; ++co) {
                    const double* grow = g + (n * cout + co) * lout;
                    for (std::size_t ci = 0; ci < cin; ++ci) {
                        double* xrow = xg + (n * cin + ci) * len;
                        const double* wrow = wd + (co * cin + ci) * k;
                        for (std::size_t kk = 0; kk < k; ++kk) {
                            const double wv = wrow[kk];
                            double* xoff = xrow + kk * dilation;
                            for (std::size_t t = 0; t < lout; ++t)
                                xoff[t] += wv * grow[t];
                        }
                    }
                }
        }
        if (w->requires_grad) {
            w->ensure_grad();
            double* wg = w->grad.data();
            for (std::size_t n = 0; n < batch; ++n)
                for (std::size_t co = 0; co < cout; ++co) {
                    const double* grow = g + (n * cout + co) * lout;
                    for (std::size_t ci = 0; ci < cin; ++ci) {
                        const double* xrow = xd + (n * cin + ci) * len;
                        double* wrow = wg + (co * cin + ci) * k;
                        for (std::size_t kk = 0; kk < k; ++kk) {
                            const double* xoff = xrow + kk * dilation;
                            double s = 0;
                            for (std::size_t t = 0; t < lout; ++t)
                                s += xoff[t] * grow[t];
                            wrow[kk] += s;
                        }
                    }
                }
        }
        if (b && b->requires_grad) {
            b->ensure_grad();
            double* bg = b->grad.data();
            for (std::size_t n = 0; n < batch; ++n)
                for (std::size_t co = 0; co < cout; ++co) {
                    const double* grow = g + (n * cout + co) * lout;
                    double s = 0;
                    for (std::size_t t = 0; t < lout; ++t) s += grow[t];
                    bg[co] += s;
                }
        }
    });
}

Value bmm(const Value& a, const Value& b) {
    const auto& as = a->shape();
    const auto& bs = b->shape();
    if (as.size() != 3 || bs.size() != 3 || as[0] != bs[0] || as[2] != bs[1]) {
        throw ShapeError("bmm: incompatible shapes " + shape_to_string(as) +
                         " and " + shape_to_string(bs));
    }
    std::size_t batch = as[0], n = as[1], m = as[2], f = bs[2];
    Tensor out({batch, n, f});
    const double* ad = a->value.data();
    const double* bd = b->value.data();
    double* od = out.data();
    for (std::size_t bt = 0; bt < batch; ++bt) {
        const double* ab = ad + bt * n * m;
        const double* bb = bd + bt * m * f;
        double* ob = od + bt * n * f;
        for (std::size_t i = 0; i < n; ++i) {
            double* orow = ob + i * f;
            for (std::size_t x = 0; x < f; ++x) orow[x] = 0.0;
            for (std::size_t j = 0; j < m; ++j) {
                const double av = ab[i * m + j];
                const double* brow = bb + j * f;
                for (std::size_t x = 0; x < f; ++x) orow[x] += av * brow[x];
            }
        }
    }
    return make_op(std::move(out), {a, b}, [batch, n, m, f](Node& nd) {
        Node* a = nd.parents[0].get();
        Node* b = nd.parents[1].get();
        const double* g = nd.grad.data();
        if (a->requires_grad) {
            a->ensure_grad();
            const double* bd = b->value.data();
            double* ag = a->grad.data();
            for (std::size_t bt = 0; bt < batch; ++bt)
                for (std::size_t i = 0; i < n; ++i)
                    for (std::size_t j = 0; j < m; ++j) {
                        const double* grow = g + (bt * n + i) * f;
                        const double* brow = bd + (bt * m + j) * f;
                        double s = 0;
                        for (std::size_t x = 0; x < f; ++x) s += grow[x] * brow[x];
                        ag[(bt * n + i) * m + j] += s;
                    }
        }
        if (b->requires_grad) {
            b->ensure_grad();
            const double* ad = a->value.data();
            double* bg = b->grad.data();
            for (std::size_t bt = 0; bt < batch; ++bt)
                for (std::size_t i = 0; i < n; ++i) {
                    const double* grow = g + (bt * n + i) * f;
                    for (std::size_t j = 0; j < m; ++j) {
                        const double av = ad[(bt * n + i) * m + j];
                        double* brow = bg + (bt * m + j) * f;
                        for (std::size_t x = 0; x < f; ++x) brow[x] += av * grow[x];
                    }
                }
        }
    });
}

Value broadcast_add_pair(const Value& u, const Value& r) {
    check_same_shape(u, r, "broadcast_add_pair");
    const auto& s = u->shape();
    if (s.size() != 3) throw ShapeError("broadcast_add_pair: expects [B x N x A]");
    std::size_t batch = s[0], n = s[1], a = s[2];
    Tensor out({batch, n, n, a});
    const double* ud = u->value.data();
    const double* rd = r->value.data();
    double* od = out.data();
    for (std::size_t b = 0; b < batch; ++b)
        for (std::size_t i = 0; i < n; ++i) {
            const double* ui = ud + (b * n + i) * a;
            for (std::size_t j = 0; j < n; ++j) {
                const double* rj = rd + (b * n + j) * a;
                double* orow = od + ((b * n + i) * n + j) * a;
                for (std::size_t x = 0; x < a; ++x) orow[x] = ui[x] + rj[x];
            }
        }
    return make_op(std::move(out), {u, r}, [batch, n, a](Node& nd) {
        Node* u = nd.parents[0].get();
        Node* r = nd.parents[1].get();
        const double* g = nd.grad.data();
        if (u->requires_grad) {
            u->ensure_grad();
            double* ug = u->grad.data();
            for (std::size_t b = 0; b < batch; ++b)
                for (std::size_t i = 0; i < n; ++i) {
                    double* ui = ug + (b * n + i) * a;
                    for (std::size_t j = 0; j < n; ++j) {
                        const double* grow = g + ((b * n + i) * n + j) * a;
                        for (std::size_t x = 0; x < a; ++x) ui[x] += grow[x];
                    }
                }
        }
        if (r->requires_grad) {
            r->ensure_grad();
            double* rg = r->grad.data();
            for (std::size_t b = 0; b < batch; ++b)
                for (std::size_t i = 0; i < n; ++i)
                    for (std::size_t j = 0; j < n; ++j) {
                        const double* grow = g + ((b * n + i) * n + j) * a;
                        double* rj = rg + (b * n + j) * a;
                        for (std::size_t x = 0; x < a; ++x) rj[x] += grow[x];
                    }
        }
    });
}

Value vecdot_lastdim(const Value& x, const Value& v) {
    const auto& xs = x->shape();
    const auto& vs = v->shape();
    if (vs.size() != 1 || xs.empty() || xs.back() != vs[0]) {
        throw ShapeError("vecdot_lastdim: shape mismatch");
    }
    std::size_t a = vs[0];
    std::size_t rows = shape_product(xs) / a;
    std::vector<std::size_t> out_shape(xs.begin(), xs.end() - 1);
    if (out_shape.empty()) out_shape.push_back(1);
    Tensor out(out_shape);
    const double* xd = x->value.data();
    const double* vd = v->value.data();
    double* od = out.data();
    for (std::size_t r = 0; r < rows; ++r) {
        double s = 0;
        const double* xr = xd + r * a;
        for (std::size_t i = 0; i < a; ++i) s += xr[i] * vd[i];
        od[r] = s;
    }
    return make_op(std::move(out), {x, v}, [rows, a](Node& n) {
        Node* x = n.parents[0].get();
        Node* v = n.parents[1].get();
        const double* g = n.grad.data();
        if (x->requires_grad) {
            x->ensure_grad();
            const double* vd = v->value.data();
            double* xg = x->grad.data();
            for (std::size_t r = 0; r < rows; ++r)
                for (std::size_t i = 0; i < a; ++i) xg[r * a + i] += g[r] * vd[i];
        }
        if (v->requires_grad) {
            v->ensure_grad();
            const double* xd = x->value.data();
            double* vg = v->grad.data();
            for (std::size_t r = 0; r < rows; ++r)
                for (std::size_t i = 0; i < a; ++i) vg[i] += g[r] * xd[r * a + i];
        }
    });
}

Value softmax_lastdim(const Value& a) {
    const auto& shape = a->shape();
    if (shape.empty()) throw ShapeError("softmax_lastdim: scalar input");
    std::size_t len = shape.back();
    std::size_t rows = shape_product(shape) / len;
    Tensor out = a->value;
    double* od = out.data();
    for (std::size_t r = 0; r < rows; ++r) {
        double* row = od + r * len;
        double mx = row[0];
        for (std::size_t i = 1; i < len; ++i) mx = std::max(mx, row[i]);
        double s = 0;
        for (std::size_t i = 0; i < len; ++i) {
            row[i] = std::exp(row[i] - mx);
            s += row[i];
        }
        for (std::size_t i = 0; i < len; ++i) row[i] /= s;
    }
    return make_op(std::move(out), {a}, [rows, len](Node& n) {
        Node* a = n.parents[0].get();
        if (!a->requires_grad) return;
        a->ensure_grad();
        const double* g = n.grad.data();
        const double* y = n.value.data();
        double* ag = a->grad.data();
        for (std::size_t r = 0; r < rows; ++r) {
            const double* gr = g + r * len;
            const double* yr = y + r * len;
            double dot = 0;
            for (std::size_t i = 0; i < len; ++i) dot += gr[i] * yr[i];
            for (std::size_t i = 0; i < len; ++i)
                ag[r * len + i] += yr[i] * (gr[i] - dot);
        }
    });
}

Value softmax_cross_entropy(const Value& logits, const std::vector<int>& labels) {
    const auto& s = logits->shape();
    if (s.size() != 2 || s[1] != 2) {
        throw ShapeError("softmax_cross_entropy: expects logits [B x 2]");
    }
    std::size_t batch = s[0];
    if (labels.size() != batch) {
        throw ShapeError("softmax_cross_entropy: label count mismatch");
    }
    for (int l : labels) {
        if (l != 0 && l != 1)
            throw DataError("softmax_cross_entropy: label outside {0,1}");
    }
    std::size_t classes = s[1];
    const double* ld = logits->value.data();
    auto probs = std::make_shared<Tensor>(Tensor({batch, classes}));
    double* pd = probs->data();
    double loss = 0;
    for (std::size_t b = 0; b < batch; ++b) {
        const double* row = ld + b * classes;
        double mx = std::max(row[0], row[1]);
        double e0 = std::exp(row[0] - mx), e1 = std::exp(row[1] - mx);
        double z = e0 + e1;
        pd[b * classes] = e0 / z;
        pd[b * classes + 1] = e1 / z;
        loss += -(row[labels[b]] - mx - std::log(z));
    }
    loss /= static_cast<double>(batch);
    return make_op(Tensor::scalar(loss), {logits},
                   [batch, classes, probs, labels](Node& n) {
        Node* x = n.parents[0].get();
        if (!x->requires_grad) return;
        x->ensure_grad();
        const double g = n.grad[0];
        const double* pd = probs->data();
        double* xg = x->grad.data();
        double inv = g / static_cast<double>(batch);
        for (std::size_t b = 0; b < batch; ++b)
            for (std::size_t c = 0; c < classes; ++c) {
                double onehot = (static_cast<int>(c) == labels[b]) ? 1.0 : 0.0;
                xg[b * classes + c] += inv * (pd[b * classes + c] - onehot);
            }
    });
}

Value batch_norm1d(const Value& x, const Value& gamma, const Value& beta,
                   Tensor& running_mean, Tensor& running_var, bool training,
                   double momentum, double eps) {
    const auto& xs = x->shape();
    if (xs.size() != 3) throw ShapeError("batch_norm1d: expects [N x C x L]");
    std::size_t batch = xs[0], ch = xs[1], len = xs[2];
    if (gamma->shape() != std::vector<std::size_t>{ch} ||
        beta->shape() != std::vector<std::size_t>{ch} ||
        running_mean.shape() != std::vector<std::size_t>{ch} ||
        running_var.shape() != std::vector<std::size_t>{ch}) {
        throw ShapeError("batch_norm1d: per-channel parameter shape mismatch");
    }
    std::size_t group = batch * len;
    if (training && group < 2) {
        throw DataError("batch_norm1d: degenerate normalization group of size " +
                        std::to_string(group));
    }
    const double* xd = x->value.data();
    const double* gd = gamma->value.data();
    const double* bd = beta->value.data();

    std::vector<double> mean(ch), var(ch);
    if (training) {
        for (std::size_t c = 0; c < ch; ++c) {
            double s = 0;
            for (std::size_t n = 0; n < batch; ++n) {
                const double* row = xd + (n * ch + c) * len;
                for (std::size_t t = 0; t < len; ++t) s += row[t];
            }
            double m = s / static_cast<double>(group);
            double v = 0;
            for (std::size_t n = 0; n < batch; ++n) {
                const double* row = xd + (n * ch + c) * len;
                for (std::size_t t = 0; t < len; ++t) {
                    double d = row[t] - m;
                    v += d * d;
                }
            }
            v /= static_cast<double>(group);
            mean[c] = m;
            var[c] = v;
            running_mean[c] = momentum * running_mean[c] + (1.0 - momentum) * m;
            running_var[c] = momentum * running_var[c] + (1.0 - momentum) * v;
        }
    } else {
        for (std::size_t c = 0; c < ch; ++c) {
            mean[c] = running_mean[c];
            var[c] = running_var[c];
        }
    }

    Tensor out({batch, ch, len});
    auto xhat = std::make_shared<Tensor>(Tensor({batch, ch, len}));
    std::vector<double> inv_std(ch);
    double* od = out.data();
    double* hd = xhat->data();
    for (std::size_t c = 0; c < ch; ++c) inv_std[c] = 1.0 / std::sqrt(var[c] + eps);
    for (std::size_t n = 0; n < batch; ++n)
        for (std::size_t c = 0; c < ch; ++c) {
            const double* row = xd + (n * ch + c) * len;
            double* orow = od + (n * ch + c) * len;
            double* hrow = hd + (n * ch + c) * len;
            const double m = mean[c], is = inv_std[c], gg = gd[c], bb = bd[c];
            for (std::size_t t = 0; t < len; ++t) {
                double h = (row[t] - m) * is;
                hrow[t] = h;
                orow[t] = gg * h + bb;
            }
        }

    auto inv_std_sp = std::make_shared<std::vector<double>>(std::move(inv_std));
    return make_op(std::move(out), {x, gamma, beta},
                   [batch, ch, len, training, xhat, inv_std_sp](Node& nd) {
        Node* x = nd.parents[0].get();
        Node* gamma = nd.parents[1].get();
        Node* beta = nd.parents[2].get();
        const double* g = nd.grad.data();
        const double* hd = xhat->data();
        const double* gd = gamma->value.data();
        const std::size_t group = batch * len;
        if (gamma->requires_grad) {
            gamma->ensure_grad();
            double* gg = gamma->grad.data();
            for (std::size_t n = 0; n < batch; ++n)
                for (std::size_t c = 0; c < ch; ++c) {
                    const double* grow = g + (n * ch + c) * len;
                    const double* hrow = hd + (n * ch + c) * len;
                    double s = 0;
                    for (std::size_t t = 0; t < len; ++t) s += grow[t] * hrow[t];
                    gg[c] += s;
                }
        }
        if (beta->requires_grad) {
            beta->ensure_grad();
            double* bg = beta->grad.data();
            for (std::size_t n = 0; n < batch; ++n)
                for (std::size_t c = 0; c < ch; ++c) {
                    const double* grow = g + (n * ch + c) * len;
                    double s = 0;
                    for (std::size_t t = 0; t < len; ++t) s += grow[t];
                    bg[c] += s;
                }
        }
        if (x->requires_grad) {
            x->ensure_grad();
            double* xg = x->grad.data();
            if (!training) {
                for (std::size_t n = 0; n < batch; ++n)
                    for (std::size_t c = 0; c < ch; ++c) {
                        const double* grow = g + (n * ch + c) * len;
                        double* xrow = xg + (n * ch + c) * len;
                        const double k = gd[c] * (*inv_std_sp)[c];
                        for (std::size_t t = 0; t < len; ++t) xrow[t] += k * grow[t];
                    }
                return;
            }
            // training: mean and variance depend on x
            std::vector<double> sum_g(ch, 0.0), sum_gh(ch, 0.0);
            for (std::size_t n = 0; n < batch; ++n)
                for (std::size_t c = 0; c < ch; ++c) {
                    const double* grow = g + (n * ch + c) * len;
                    const double* hrow = hd + (n * ch + c) * len;
                    for (std::size_t t = 0; t < len; ++t) {
                        sum_g[c] += grow[t];
                        sum_gh[c] += grow[t] * hrow[t];
                    }
                }
            const double invm = 1.0 / static_cast<double>(group);
            for (std::size_t n = 0; n < batch; ++n)
                for (std::size_t c = 0; c < ch; ++c) {
                    const double* grow = g + (n * ch + c) * len;
                    const double* hrow = hd + (n * ch + c) * len;
                    double* xrow = xg + (n * ch + c) * len;
                    const double k = gd[c] * (*inv_std_sp)[c];
                    for (std::size_t t = 0; t < len; ++t) {
                        xrow[t] += k * (grow[t] - invm * sum_g[c] -
                                        hrow[t] * invm * sum_gh[c]);
                    }
                }
        }
    });
}

}  // namespace roirank
