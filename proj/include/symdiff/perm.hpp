#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "symdiff/rng.hpp"

namespace symdiff {

/// A permutation of [n] in one-line notation. Internally 0-based: entry i
/// holds sigma(i). All serialized/printed forms are 1-based.
class Permutation {
public:
    explicit Permutation(std::vector<int> mapping);
    static Permutation identity(int n);

    int n() const { return static_cast<int>(map_.size()); }
    int operator()(int i) const { return map_[i]; }
    const std::vector<int>& mapping() const { return map_; }

    bool is_identity() const;
    bool operator==(const Permutation& other) const { return map_ == other.map_; }
    bool operator<(const Permutation& other) const { return map_ < other.map_; }

    /// One-line notation, 1-based, e.g. "(2,3,1)".
    std::string to_string() const;

private:
    std::vector<int> map_;
};

/// A ranked list of n objects, each a d-dimensional row vector.
class ObjectList {
public:
    ObjectList(int n, int dim);
    ObjectList(int n, int dim, std::vector<double> values);

    int n() const { return n_; }
    int dim() const { return dim_; }
    double& at(int row, int col) { return values_[static_cast<size_t>(row) * dim_ + col]; }
    double at(int row, int col) const { return values_[static_cast<size_t>(row) * dim_ + col]; }
    const std::vector<double>& values() const { return values_; }

    bool operator==(const ObjectList& other) const;

private:
    int n_;
    int dim_;
    std::vector<double> values_;  // row-major n x dim
};

/// Function composition: result(i) = a(b(i)).
Permutation compose(const Permutation& a, const Permutation& b);

Permutation inverse(const Permutation& a);

/// Row permutation: row i of the result is row sigma(i) of X.
/// Satisfies apply(compose(a, b), X) == apply(b, apply(a, X)).
ObjectList apply(const Permutation& sigma, const ObjectList& X);

/// Number of rising sequences (maximal chains of contiguously increasing
/// values read left to right); equals 1 + #descents of sigma^{-1}.
int rising_sequences(const Permutation& sigma);

/// All n! permutations in lexicographic order of one-line notation. n <= 8.
std::vector<Permutation> enumerate_sn(int n);

constexpr int kEnumerateCap = 8;

Permutation random_uniform(int n, Rng& rng);

}  // namespace symdiff
