#pragma once

#include <functional>
#include <memory>
#include <vector>

namespace symdiff::ad {

/// Dense 2-D tensor node in a define-by-run reverse-mode graph. Vectors are
/// n x 1, scalars 1 x 1. Values are computed eagerly; backward() replays the
/// tape. Double precision throughout.
struct Node {
    int rows = 0, cols = 0;
    std::vector<double> v;
    std::vector<double> g;
    bool needs_grad = false;
    std::vector<std::shared_ptr<Node>> parents;
    std::function<void()> backprop;

    double& at(int r, int c) { return v[static_cast<size_t>(r) * cols + c]; }
    double at(int r, int c) const { return v[static_cast<size_t>(r) * cols + c]; }
    double& gat(int r, int c) { return g[static_cast<size_t>(r) * cols + c]; }
    size_t size() const { return v.size(); }
};

using Value = std::shared_ptr<Node>;

Value constant(int rows, int cols, std::vector<double> data);
Value scalar(double x);
/// Leaf with requires-grad set; the learnable-parameter entry point.
Value param(int rows, int cols, std::vector<double> data);

Value add(const Value& a, const Value& b);  // same shape, or b 1 x cols / 1 x 1 broadcast
Value sub(const Value& a, const Value& b);
Value neg(const Value& a);
Value mul(const Value& a, const Value& b);  // elementwise
Value scale(const Value& a, double c);
Value matmul(const Value& a, const Value& b);
Value matmul_nt(const Value& a, const Value& b);  // a * b^T
Value transpose(const Value& a);
Value relu(const Value& a);
Value softplus(const Value& a);
Value softmax_rows(const Value& a);
Value logsumexp_rows(const Value& a);  // n x m -> n x 1
Value sum_all(const Value& a);         // -> 1 x 1
Value gather_rows(const Value& a, std::vector<int> idx);  // embedding lookup
/// Picks a[row_idx[i], col_idx[i]] into a k x 1 vector.
Value select_elems(const Value& a, std::vector<int> row_idx, std::vector<int> col_idx);
Value concat_rows(const Value& a, const Value& b);
Value slice_rows(const Value& a, int r0, int r1);  // rows [r0, r1)

/// scale * (q k^T) + mask, softmax over rows, times v. The mask is additive
/// (0 = allowed, large negative = blocked) and carries no gradient.
Value masked_attention(const Value& q, const Value& k, const Value& v, const Value& mask,
                       double scale);

/// Reverse pass from a 1 x 1 root: zeroes gradients across the reachable
/// graph, seeds d(root) = 1 and accumulates into every needs_grad leaf.
void backward(const Value& root);

}  // namespace symdiff::ad
