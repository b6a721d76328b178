#include "symdiff/perm.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace symdiff {

Permutation::Permutation(std::vector<int> mapping) : map_(std::move(mapping)) {
    if (map_.empty()) throw std::invalid_argument("permutation needs n >= 1");
    std::vector<bool> seen(map_.size(), false);
    for (int v : map_) {
        if (v < 0 || v >= static_cast<int>(map_.size()) || seen[v])
            throw std::invalid_argument("mapping is not a bijection on [n]");
        seen[v] = true;
    }
}

Permutation Permutation::identity(int n) {
    std::vector<int> m(n);
    std::iota(m.begin(), m.end(), 0);
    return Permutation(std::move(m));
}

bool Permutation::is_identity() const {
    for (int i = 0; i < n(); ++i)
        if (map_[i] != i) return false;
    return true;
}

std::string Permutation::to_string() const {
    std::string s = "(";
    for (int i = 0; i < n(); ++i) {
        if (i) s += ",";
        s += std::to_string(map_[i] + 1);
    }
    return s + ")";
}

ObjectList::ObjectList(int n, int dim)
    : n_(n), dim_(dim), values_(static_cast<size_t>(n) * dim, 0.0) {
    if (n < 1 || dim < 1) throw std::invalid_argument("ObjectList needs n >= 1, dim >= 1");
}

ObjectList::ObjectList(int n, int dim, std::vector<double> values)
    : n_(n), dim_(dim), values_(std::move(values)) {
    if (n < 1 || dim < 1) throw std::invalid_argument("ObjectList needs n >= 1, dim >= 1");
    if (values_.size() != static_cast<size_t>(n) * dim)
        throw std::invalid_argument("ObjectList value count does not match n x dim");
}

bool ObjectList::operator==(const ObjectList& other) const {
    return n_ == other.n_ && dim_ == other.dim_ && values_ == other.values_;
}

Permutation compose(const Permutation& a, const Permutation& b) {
    if (a.n() != b.n()) throw std::invalid_argument("compose: size mismatch");
    std::vector<int> m(a.n());
    for (int i = 0; i < a.n(); ++i) m[i] = a(b(i));
    return Permutation(std::move(m));
}

Permutation inverse(const Permutation& a) {
    std::vector<int> m(a.n());
    for (int i = 0; i < a.n(); ++i) m[a(i)] = i;
    return Permutation(std::move(m));
}

ObjectList apply(const Permutation& sigma, const ObjectList& X) {
    if (sigma.n() != X.n()) throw std::invalid_argument("apply: size mismatch");
    ObjectList out(X.n(), X.dim());
    for (int i = 0; i < X.n(); ++i)
        for (int c = 0; c < X.dim(); ++c) out.at(i, c) = X.at(sigma(i), c);
    return out;
}

int rising_sequences(const Permutation& sigma) {
    const int n = sigma.n();
    std::vector<int> pos(n);
    for (int i = 0; i < n; ++i) pos[sigma(i)] = i;
    int r = 1;
    for (int v = 1; v < n; ++v)
        if (pos[v] < pos[v - 1]) ++r;
    return r;
}

std::vector<Permutation> enumerate_sn(int n) {
    if (n < 1 || n > kEnumerateCap)
        throw std::invalid_argument("enumerate_sn: n must be in [1, 8]");
    std::vector<int> m(n);
    std::iota(m.begin(), m.end(), 0);
    std::vector<Permutation> out;
    do {
        out.emplace_back(m);
    } while (std::next_permutation(m.begin(), m.end()));
    return out;
}

Permutation random_uniform(int n, Rng& rng) {
    if (n < 1) throw std::invalid_argument("random_uniform: n >= 1");
    std::vector<int> m(n);
    std::iota(m.begin(), m.end(), 0);
    for (int i = n - 1; i > 0; --i) {
        const int j = static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(i) + 1));
        std::swap(m[i], m[j]);
    }
    return Permutation(std::move(m));
}

}  // namespace symdiff
