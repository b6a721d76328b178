#include "symdiff/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_set>

namespace symdiff::ad {

namespace {

Value make_node(int rows, int cols, std::vector<Value> parents) {
    auto node = std::make_shared<Node>();
    node->rows = rows;
    node->cols = cols;
    node->v.resize(static_cast<size_t>(rows) * cols);
    node->parents = std::move(parents);
    for (const Value& p : node->parents) node->needs_grad |= p->needs_grad;
    return node;
}

void check(bool ok, const char* msg) {
    if (!ok) throw std::invalid_argument(msg);
}

}  // namespace

Value constant(int rows, int cols, std::vector<double> data) {
    check(static_cast<size_t>(rows) * cols == data.size(), "constant: shape/data mismatch");
    auto node = make_node(rows, cols, {});
    node->v = std::move(data);
    return node;
}

Value scalar(double x) { return constant(1, 1, {x}); }

Value param(int rows, int cols, std::vector<double> data) {
    auto node = constant(rows, cols, std::move(data));
    node->needs_grad = true;
    return node;
}

Value add(const Value& a, const Value& b) {
    const bool same = a->rows == b->rows && a->cols == b->cols;
    const bool row_bcast = b->rows == 1 && b->cols == a->cols;
    const bool scalar_bcast = b->rows == 1 && b->cols == 1;
    check(same || row_bcast || scalar_bcast, "add: incompatible shapes");
    auto out = make_node(a->rows, a->cols, {a, b});
    for (int r = 0; r < a->rows; ++r)
        for (int c = 0; c < a->cols; ++c)
            out->at(r, c) = a->at(r, c) + (same ? b->at(r, c) : scalar_bcast ? b->v[0] : b->at(0, c));
    Value av = a, bv = b;
    Node* o = out.get();
    out->backprop = [av, bv, o, same, scalar_bcast]() {
        if (av->needs_grad)
            for (size_t i = 0; i < o->size(); ++i) av->g[i] += o->g[i];
        if (bv->needs_grad) {
            if (same) {
                for (size_t i = 0; i < o->size(); ++i) bv->g[i] += o->g[i];
            } else if (scalar_bcast) {
                for (size_t i = 0; i < o->size(); ++i) bv->g[0] += o->g[i];
            } else {
                for (int r = 0; r < o->rows; ++r)
                    for (int c = 0; c < o->cols; ++c) bv->g[c] += o->gat(r, c);
            }
        }
    };
    return out;
}

Value neg(const Value& a) { return scale(a, -1.0); }

Value sub(const Value& a, const Value& b) { return add(a, neg(b)); }

Value mul(const Value& a, const Value& b) {
    check(a->rows == b->rows && a->cols == b->cols, "mul: shape mismatch");
    auto out = make_node(a->rows, a->cols, {a, b});
    for (size_t i = 0; i < out->size(); ++i) out->v[i] = a->v[i] * b->v[i];
    Value av = a, bv = b;
    Node* o = out.get();
    out->backprop = [av, bv, o]() {
        if (av->needs_grad)
            for (size_t i = 0; i < o->size(); ++i) av->g[i] += o->g[i] * bv->v[i];
        if (bv->needs_grad)
            for (size_t i = 0; i < o->size(); ++i) bv->g[i] += o->g[i] * av->v[i];
    };
    return out;
}

Value scale(const Value& a, double c) {
    auto out = make_node(a->rows, a->cols, {a});
    for (size_t i = 0; i < out->size(); ++i) out->v[i] = a->v[i] * c;
    Value av = a;
    Node* o = out.get();
    out->backprop = [av, o, c]() {
        if (av->needs_grad)
            for (size_t i = 0; i < o->size(); ++i) av->g[i] += o->g[i] * c;
    };
    return out;
}

Value matmul(const Value& a, const Value& b) {
    check(a->cols == b->rows, "matmul: inner dimension mismatch");
    auto out = make_node(a->rows, b->cols, {a, b});
    for (int r = 0; r < a->rows; ++r)
        for (int k = 0; k < a->cols; ++k) {
            const double arv = a->at(r, k);
            if (arv == 0.0) continue;
            for (int c = 0; c < b->cols; ++c) out->at(r, c) += arv * b->at(k, c);
        }
    Value av = a, bv = b;
    Node* o = out.get();
    out->backprop = [av, bv, o]() {
        if (av->needs_grad)  // dA = dC B^T
            for (int r = 0; r < av->rows; ++r)
                for (int c = 0; c < o->cols; ++c) {
                    const double gv = o->gat(r, c);
                    if (gv == 0.0) continue;
                    for (int k = 0; k < av->cols; ++k) av->gat(r, k) += gv * bv->at(k, c);
                }
        if (bv->needs_grad)  // dB = A^T dC
            for (int r = 0; r < av->rows; ++r)
                for (int k = 0; k < av->cols; ++k) {
                    const double arv = av->at(r, k);
                    if (arv == 0.0) continue;
                    for (int c = 0; c < o->cols; ++c) bv->gat(k, c) += arv * o->gat(r, c);
                }
    };
    return out;
}

Value matmul_nt(const Value& a, const Value& b) {
    check(a->cols == b->cols, "matmul_nt: inner dimension mismatch");
    auto out = make_node(a->rows, b->rows, {a, b});
    for (int r = 0; r < a->rows; ++r)
        for (int c = 0; c < b->rows; ++c) {
            double acc = 0.0;
            for (int k = 0; k < a->cols; ++k) acc += a->at(r, k) * b->at(c, k);
            out->at(r, c) = acc;
        }
    Value av = a, bv = b;
    Node* o = out.get();
    out->backprop = [av, bv, o]() {
        if (av->needs_grad)  // dA = dC B
            for (int r = 0; r < av->rows; ++r)
                for (int c = 0; c < o->cols; ++c) {
                    const double gv = o->gat(r, c);
                    if (gv == 0.0) continue;
                    for (int k = 0; k < av->cols; ++k) av->gat(r, k) += gv * bv->at(c, k);
                }
        if (bv->needs_grad)  // dB = dC^T A
            for (int r = 0; r < o->rows; ++r)
                for (int c = 0; c < o->cols; ++c) {
                    const double gv = o->gat(r, c);
                    if (gv == 0.0) continue;
                    for (int k = 0; k < bv->cols; ++k) bv->gat(c, k) += gv * av->at(r, k);
                }
    };
    return out;
}

Value transpose(const Value& a) {
    auto out = make_node(a->cols, a->rows, {a});
    for (int r = 0; r < a->rows; ++r)
        for (int c = 0; c < a->cols; ++c) out->at(c, r) = a->at(r, c);
    Value av = a;
    Node* o = out.get();
    out->backprop = [av, o]() {
        if (!av->needs_grad) return;
        for (int r = 0; r < o->rows; ++r)
            for (int c = 0; c < o->cols; ++c) av->gat(c, r) += o->gat(r, c);
    };
    return out;
}

Value relu(const Value& a) {
    auto out = make_node(a->rows, a->cols, {a});
    for (size_t i = 0; i < out->size(); ++i) out->v[i] = std::max(a->v[i], 0.0);
    Value av = a;
    Node* o = out.get();
    out->backprop = [av, o]() {
        if (av->needs_grad)
            for (size_t i = 0; i < o->size(); ++i)
                if (av->v[i] > 0.0) av->g[i] += o->g[i];
    };
    return out;
}

Value softplus(const Value& a) {
    auto out = make_node(a->rows, a->cols, {a});
    for (size_t i = 0; i < out->size(); ++i) {
        const double x = a->v[i];
        out->v[i] = std::log1p(std::exp(-std::abs(x))) + std::max(x, 0.0);
    }
    Value av = a;
    Node* o = out.get();
    out->backprop = [av, o]() {
        if (av->needs_grad)
            for (size_t i = 0; i < o->size(); ++i)
                av->g[i] += o->g[i] / (1.0 + std::exp(-av->v[i]));
    };
    return out;
}

Value softmax_rows(const Value& a) {
    auto out = make_node(a->rows, a->cols, {a});
    for (int r = 0; r < a->rows; ++r) {
        double m = a->at(r, 0);
        for (int c = 1; c < a->cols; ++c) m = std::max(m, a->at(r, c));
        double total = 0.0;
        for (int c = 0; c < a->cols; ++c) total += std::exp(a->at(r, c) - m);
        for (int c = 0; c < a->cols; ++c) out->at(r, c) = std::exp(a->at(r, c) - m) / total;
    }
    Value av = a;
    Node* o = out.get();
    out->backprop = [av, o]() {
        if (!av->needs_grad) return;
        for (int r = 0; r < o->rows; ++r) {
            double dot = 0.0;
            for (int c = 0; c < o->cols; ++c) dot += o->gat(r, c) * o->at(r, c);
            for (int c = 0; c < o->cols; ++c)
                av->gat(r, c) += (o->gat(r, c) - dot) * o->at(r, c);
        }
    };
    return out;
}

Value logsumexp_rows(const Value& a) {
    auto out = make_node(a->rows, 1, {a});
    for (int r = 0; r < a->rows; ++r) {
        double m = a->at(r, 0);
        for (int c = 1; c < a->cols; ++c) m = std::max(m, a->at(r, c));
        double total = 0.0;
        for (int c = 0; c < a->cols; ++c) total += std::exp(a->at(r, c) - m);
        out->at(r, 0) = m + std::log(total);
    }
    Value av = a;
    Node* o = out.get();
    out->backprop = [av, o]() {
        if (!av->needs_grad) return;
        for (int r = 0; r < av->rows; ++r) {
            const double gv = o->gat(r, 0);
            if (gv == 0.0) continue;
            for (int c = 0; c < av->cols; ++c)
                av->gat(r, c) += gv * std::exp(av->at(r, c) - o->at(r, 0));
        }
    };
    return out;
}

Value sum_all(const Value& a) {
    auto out = make_node(1, 1, {a});
    double acc = 0.0;
    for (double x : a->v) acc += x;
    out->v[0] = acc;
    Value av = a;
    Node* o = out.get();
    out->backprop = [av, o]() {
        if (av->needs_grad)
            for (size_t i = 0; i < av->size(); ++i) av->g[i] += o->g[0];
    };
    return out;
}

Value gather_rows(const Value& a, std::vector<int> idx) {
    for (int i : idx) check(i >= 0 && i < a->rows, "gather_rows: index out of range");
    auto out = make_node(static_cast<int>(idx.size()), a->cols, {a});
    for (size_t r = 0; r < idx.size(); ++r)
        for (int c = 0; c < a->cols; ++c) out->at(static_cast<int>(r), c) = a->at(idx[r], c);
    Value av = a;
    Node* o = out.get();
    auto ix = std::make_shared<std::vector<int>>(std::move(idx));
    out->backprop = [av, o, ix]() {
        if (!av->needs_grad) return;
        for (size_t r = 0; r < ix->size(); ++r)
            for (int c = 0; c < av->cols; ++c)
                av->gat((*ix)[r], c) += o->gat(static_cast<int>(r), c);
    };
    return out;
}

Value select_elems(const Value& a, std::vector<int> row_idx, std::vector<int> col_idx) {
    check(row_idx.size() == col_idx.size(), "select_elems: index length mismatch");
    for (size_t i = 0; i < row_idx.size(); ++i)
        check(row_idx[i] >= 0 && row_idx[i] < a->rows && col_idx[i] >= 0 && col_idx[i] < a->cols,
              "select_elems: index out of range");
    auto out = make_node(static_cast<int>(row_idx.size()), 1, {a});
    for (size_t i = 0; i < row_idx.size(); ++i)
        out->v[i] = a->at(row_idx[i], col_idx[i]);
    Value av = a;
    Node* o = out.get();
    auto ri = std::make_shared<std::vector<int>>(std::move(row_idx));
    auto ci = std::make_shared<std::vector<int>>(std::move(col_idx));
    out->backprop = [av, o, ri, ci]() {
        if (!av->needs_grad) return;
        for (size_t i = 0; i < ri->size(); ++i)
            av->gat((*ri)[i], (*ci)[i]) += o->g[i];
    };
    return out;
}

Value concat_rows(const Value& a, const Value& b) {
    check(a->cols == b->cols, "concat_rows: column mismatch");
    auto out = make_node(a->rows + b->rows, a->cols, {a, b});
    std::copy(a->v.begin(), a->v.end(), out->v.begin());
    std::copy(b->v.begin(), b->v.end(), out->v.begin() + a->v.size());
    Value av = a, bv = b;
    Node* o = out.get();
    out->backprop = [av, bv, o]() {
        if (av->needs_grad)
            for (size_t i = 0; i < av->size(); ++i) av->g[i] += o->g[i];
        if (bv->needs_grad)
            for (size_t i = 0; i < bv->size(); ++i) bv->g[i] += o->g[i + av->size()];
    };
    return out;
}

Value slice_rows(const Value& a, int r0, int r1) {
    check(0 <= r0 && r0 < r1 && r1 <= a->rows, "slice_rows: bad range");
    auto out = make_node(r1 - r0, a->cols, {a});
    for (int r = r0; r < r1; ++r)
        for (int c = 0; c < a->cols; ++c) out->at(r - r0, c) = a->at(r, c);
    Value av = a;
    Node* o = out.get();
    out->backprop = [av, o, r0]() {
        if (!av->needs_grad) return;
        for (int r = 0; r < o->rows; ++r)
            for (int c = 0; c < o->cols; ++c) av->gat(r + r0, c) += o->gat(r, c);
    };
    return out;
}

Value masked_attention(const Value& q, const Value& k, const Value& v, const Value& mask,
                       double scale_factor) {
    Value scores = add(scale(matmul_nt(q, k), scale_factor), mask);
    return matmul(softmax_rows(scores), v);
}

void backward(const Value& root) {
    if (root->rows != 1 || root->cols != 1)
        throw std::invalid_argument("backward: root must be a scalar");
    std::vector<Node*> topo;
    std::unordered_set<Node*> seen;
    std::vector<std::pair<Node*, size_t>> stack{{root.get(), 0}};
    seen.insert(root.get());
    while (!stack.empty()) {
        auto& [node, next] = stack.back();
        if (next < node->parents.size()) {
            Node* parent = node->parents[next++].get();
            if (seen.insert(parent).second) stack.push_back({parent, 0});
        } else {
            topo.push_back(node);
            stack.pop_back();
        }
    }
    for (Node* node : topo) node->g.assign(node->size(), 0.0);
    root->g[0] = 1.0;
    for (auto it = topo.rbegin(); it != topo.rend(); ++it)
        if ((*it)->backprop && (*it)->needs_grad) (*it)->backprop();
}

}  // namespace symdiff::ad
