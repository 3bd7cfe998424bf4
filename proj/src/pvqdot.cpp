#include "pvq/pvqdot.hpp"

#include <cmath>

namespace pvq {

namespace {

void check_finite(std::span<const double> x, const char* who) {
    for (double v : x) {
        if (!std::isfinite(v)) throw InvalidArgument(std::string(who) + ": non-finite component");
    }
}

// Multiplies the accumulated sum by 1/|y|_2 (table) and r, recording each event.
template <typename Scale>
void apply_scaling(double radius, const PvqPoint& p, CostMeter& meter, DotOptions opts, Scale&& scale) {
    bool hit = false;
    const double inv = inverse_norm(p.squared_norm(), &hit);
    if (hit) meter.lookup();
    if (opts.fuse_scaling) {
        scale(radius * inv);
        meter.mul();
        return;
    }
    scale(inv);
    meter.mul();
    if (radius != 1.0) {
        scale(radius);
        meter.mul();
    }
}

void check_consistent(double radius, const PvqPoint& p, const char* who) {
    if (!std::isfinite(radius) || radius < 0.0) {
        throw InvalidArgument(std::string(who) + ": radius must be finite and non-negative");
    }
    if (radius > 0.0 && p.is_zero()) {
        throw InvalidArgument(std::string(who) + ": radius > 0 with the zero point (k = 0)");
    }
}

}  // namespace

double pvq_dot(double radius, const PvqPoint& p, std::span<const double> x, CostMeter& meter, DotOptions opts) {
    check_consistent(radius, p, "pvq_dot");
    if (x.size() != p.components().size()) {
        throw InvalidArgument("pvq_dot: dimension mismatch (" + std::to_string(p.n()) + " vs " +
                              std::to_string(x.size()) + ")");
    }
    check_finite(x, "pvq_dot");
    if (radius == 0.0) return 0.0;

    double acc = pvq_accumulate<double>(p, x, meter);
    apply_scaling(radius, p, meter, opts, [&](double f) { acc *= f; });
    return acc;
}

double pvq_dot(const PvqVector& v, std::span<const double> x, CostMeter& meter, DotOptions opts) {
    return pvq_dot(v.radius(), v.point(), x, meter, opts);
}

double dense_dot(std::span<const double> a, std::span<const double> b, CostMeter& meter) {
    if (a.size() != b.size()) {
        throw InvalidArgument("dense_dot: dimension mismatch (" + std::to_string(a.size()) + " vs " +
                              std::to_string(b.size()) + ")");
    }
    if (a.empty()) return 0.0;
    double acc = a[0] * b[0];
    meter.mul();
    for (std::size_t i = 1; i < a.size(); ++i) {
        acc += a[i] * b[i];
        meter.mul();
        meter.add();
    }
    return acc;
}

BlockElement BlockElement::operator-() const {
    BlockElement out = *this;
    for (auto& v : out.values) v = -v;
    return out;
}

BlockElement operator+(const BlockElement& a, const BlockElement& b) {
    if (a.m != b.m || a.values.size() != b.values.size()) throw InvalidArgument("BlockElement: size mismatch");
    BlockElement out = a;
    for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] += b.values[i];
    return out;
}

BlockElement operator-(const BlockElement& a, const BlockElement& b) {
    if (a.m != b.m || a.values.size() != b.values.size()) throw InvalidArgument("BlockElement: size mismatch");
    BlockElement out = a;
    for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] -= b.values[i];
    return out;
}

BlockElement pvq_dot_blocks(double radius, const PvqPoint& p, std::span<const BlockElement> x, CostMeter& meter) {
    check_consistent(radius, p, "pvq_dot_blocks");
    if (x.empty()) throw InvalidArgument("pvq_dot_blocks: no elements");
    BlockElement zero{x[0].m, std::vector<double>(x[0].values.size(), 0.0)};
    if (radius == 0.0) {
        if (x.size() != p.components().size()) throw InvalidArgument("pvq_dot_blocks: dimension mismatch");
        return zero;
    }
    BlockElement acc = pvq_accumulate<BlockElement>(p, x, meter, std::move(zero));
    apply_scaling(radius, p, meter, DotOptions{}, [&](double f) {
        for (auto& v : acc.values) v *= f;
    });
    return acc;
}

}  // namespace pvq
