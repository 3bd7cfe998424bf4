#pragma once

// Integer points on the pyramid surface P(n, k) = { y in Z^n : sum |y_i| = k },
// their enumeration count, nearest-direction encoding and the bijection to
// [0, N_p(n, k)).

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace pvq {

/// Exact point counts and indices. 128 bits covers every pyramid used by
/// the codec, e.g. N_p(63, 20) needs 79 bits.
__extension__ typedef unsigned __int128 IndexValue;

std::string to_string(IndexValue v);

/// A lattice point with sum |c_i| == k. Immutable once constructed.
class PvqPoint {
public:
    /// Takes k as the L1 norm of the components. Throws InvalidArgument if
    /// the vector is empty.
    explicit PvqPoint(std::vector<std::int32_t> components);

    /// Throws InvalidArgument unless sum |components| == k.
    PvqPoint(std::vector<std::int32_t> components, int k);

    /// The all-zeros point of dimension n (k = 0).
    static PvqPoint zero(int n);

    int n() const noexcept { return static_cast<int>(components_.size()); }
    int k() const noexcept { return k_; }
    bool is_zero() const noexcept { return k_ == 0; }
    std::span<const std::int32_t> components() const noexcept { return components_; }
    std::int32_t operator[](std::size_t i) const noexcept { return components_[i]; }

    /// sum of c_i^2; the key of the inverse-norm lookup table.
    std::int64_t squared_norm() const noexcept;

    friend bool operator==(const PvqPoint&, const PvqPoint&) = default;

private:
    std::vector<std::int32_t> components_;
    int k_ = 0;
};

/// Product-PVQ approximation radius * point / |point|_2.
/// radius == 0 exactly when the point is the zero point.
class PvqVector {
public:
    PvqVector(double radius, PvqPoint point);

    static PvqVector null(int n) { return PvqVector(0.0, PvqPoint::zero(n)); }

    double radius() const noexcept { return radius_; }
    const PvqPoint& point() const noexcept { return point_; }
    int n() const noexcept { return point_.n(); }

    friend bool operator==(const PvqVector&, const PvqVector&) = default;

private:
    double radius_;
    PvqPoint point_;
};

/// Position of a point in the canonical enumeration of P(n, k).
struct PyramidIndex {
    int n = 0;
    int k = 0;
    IndexValue value = 0;

    friend bool operator==(const PyramidIndex&, const PyramidIndex&) = default;
};

/// Exact table of N_p(n, k) for 0 <= n <= max_n, 0 <= k <= max_k, built by
/// the recurrence N(n,k) = N(n-1,k) + N(n,k-1) + N(n-1,k-1). Entries that
/// exceed 128 bits are marked and raise OverflowError on access.
class CountTable {
public:
    CountTable(int max_n, int max_k);

    int max_n() const noexcept { return max_n_; }
    int max_k() const noexcept { return max_k_; }
    bool covers(int n, int k) const noexcept { return n <= max_n_ && k <= max_k_; }

    /// Requires covers(n, k). n == 0 is allowed: N(0,0) = 1, N(0,k>0) = 0.
    IndexValue at(int n, int k) const;
    /// at() without bounds or overflow checks; the caller guarantees both.
    IndexValue unchecked(int n, int k) const noexcept {
        return counts_[static_cast<std::size_t>(n) * (static_cast<std::size_t>(max_k_) + 1) +
                       static_cast<std::size_t>(k)];
    }

private:
    int max_n_;
    int max_k_;
    std::vector<IndexValue> counts_;
};

/// Shared, read-only table covering at least (n, k). The process-wide cache
/// grows on demand under a lock and is read lock-free otherwise; returned
/// tables are never mutated or freed.
std::shared_ptr<const CountTable> count_table(int n, int k);

/// Number of points on P(n, k). Throws OverflowError past 128 bits.
IndexValue count_points(int n, int k);

/// ceil(log2(N_p(n, k))): width of a packed index. 0 when N_p == 1.
int bits_required(int n, int k);

/// Nearest pyramid direction to y. Pre-projects with
/// round(k |y_i| / |y|_1), then adds or removes single units, each time on
/// the component giving the largest cosine with y (lowest index on ties),
/// until the L1 norm is k. Finally moves single units between components
/// while that strictly raises the cosine. The zero vector maps to the zero
/// point.
PvqPoint encode(std::span<const double> y, int k);

PyramidIndex point_to_index(const PvqPoint& p);
PvqPoint index_to_point(const PyramidIndex& idx);

/// |p|_2, in [sqrt(k), k]. Throws for the zero point.
double l2_norm(const PvqPoint& p);

/// 1 / sqrt(squared_norm), served from a precomputed table when the key is
/// small enough. Sets *from_table accordingly when non-null.
double inverse_norm(std::int64_t squared_norm, bool* from_table = nullptr);

/// radius * components / |point|_2, or zeros when radius == 0.
std::vector<double> reconstruct(const PvqVector& v);

}  // namespace pvq
