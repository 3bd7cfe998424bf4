#pragma once

// Dot products between a PVQ vector and a dense vector using only signed
// additions for the accumulation: a point on P(n, k) contributes exactly k
// terms, so the sum costs k - 1 additions however sparse the point is.

#include "pvq/cost_meter.hpp"
#include "pvq/error.hpp"
#include "pvq/pyramid.hpp"

#include <cstdlib>
#include <span>
#include <string>
#include <vector>

namespace pvq {

struct DotOptions {
    /// Count r / |y|_2 as a single multiplication (alpha precomputed per
    /// vector) instead of one multiplication by r and one by 1/|y|_2.
    bool fuse_scaling = false;
};

/// sum_i y_i x_i evaluated as repeated signed additions: components in
/// ascending order, each repeated |y_i| times, the first term initialising
/// the accumulator. Records exactly k - 1 additions for k >= 1.
///
/// Element needs unary minus and binary + and -.
template <typename Element>
Element pvq_accumulate(const PvqPoint& p, std::span<const Element> x, CostMeter& meter, Element zero = Element{}) {
    if (x.size() != p.components().size()) {
        throw InvalidArgument("pvq_accumulate: dimension mismatch (" + std::to_string(p.n()) + " vs " +
                              std::to_string(x.size()) + ")");
    }
    Element acc = std::move(zero);
    bool first = true;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const std::int32_t c = p[i];
        const int reps = std::abs(c);
        for (int r = 0; r < reps; ++r) {
            if (first) {
                acc = c > 0 ? x[i] : -x[i];
                first = false;
            } else {
                if (c > 0) acc = acc + x[i];
                else acc = acc - x[i];
                meter.add();
            }
        }
    }
    return acc;
}

/// (r / |y|_2) * sum y_i x_i. Cost: k - 1 additions, one table lookup for
/// 1/|y|_2, one multiplication by it and one by r (skipped when r == 1).
/// The null vector (r == 0) costs nothing and returns 0.
double pvq_dot(const PvqVector& v, std::span<const double> x, CostMeter& meter, DotOptions opts = {});

/// Same as above for a (radius, point) pair that has not been validated as
/// a PvqVector. Throws if radius > 0 while the point is the zero point.
double pvq_dot(double radius, const PvqPoint& p, std::span<const double> x, CostMeter& meter,
               DotOptions opts = {});

/// Reference sum a_i b_i: n multiplications, n - 1 additions.
double dense_dot(std::span<const double> a, std::span<const double> b, CostMeter& meter);

/// Row-major square matrix used as a dot-product element.
struct BlockElement {
    int m = 0;
    std::vector<double> values;

    BlockElement operator-() const;
    friend BlockElement operator+(const BlockElement& a, const BlockElement& b);
    friend BlockElement operator-(const BlockElement& a, const BlockElement& b);
};

/// (r / |y|_2) * sum y_i X_i where each X_i is an m x m matrix. Counts one
/// addition per matrix addition and one multiplication per scaling, the
/// same event granularity as the scalar version.
BlockElement pvq_dot_blocks(double radius, const PvqPoint& p, std::span<const BlockElement> x, CostMeter& meter);

}  // namespace pvq
