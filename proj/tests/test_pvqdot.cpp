#include "oracles.hpp"

#include "pvq/error.hpp"
#include "pvq/pvqdot.hpp"

#include <doctest.h>

#include <cmath>
#include <string>

using namespace pvq;

namespace {

// Records the expression built by the accumulation.
struct Sym {
    std::string expr;
    Sym operator-() const { return {"-" + expr}; }
    friend Sym operator+(const Sym& a, const Sym& b) { return {a.expr + "+" + b.expr}; }
    friend Sym operator-(const Sym& a, const Sym& b) { return {a.expr + "-" + b.expr}; }
};

std::vector<Sym> symbols(int n) {
    std::vector<Sym> x;
    for (int i = 0; i < n; ++i) x.push_back({"x" + std::to_string(i)});
    return x;
}

}  // namespace

TEST_CASE("accumulation follows the signed repeated-addition expansion") {
    const auto x = symbols(7);
    CostMeter meter;
    const PvqPoint a({0, 0, -3, 0, 1, -1, 0});
    CHECK(pvq_accumulate<Sym>(a, x, meter).expr == "-x2-x2-x2+x4-x5");
    CHECK(meter.additions == 4);
    CHECK(meter.multiplications == 0);

    meter.reset();
    const PvqPoint b({2, 1, 0, 1, 0, 0, 1});
    CHECK(pvq_accumulate<Sym>(b, x, meter).expr == "x0+x0+x1+x3+x6");
    CHECK(meter.additions == 4);
}

TEST_CASE("pvq_dot cost profile") {
    const std::vector<double> x{0.5, -1.25, 2.0, 3.5, -0.75, 1.5, 4.0};
    const PvqPoint a({0, 0, -3, 0, 1, -1, 0});
    const double sum = -3 * 2.0 + (-0.75) - 1.5;

    CostMeter unit;
    CHECK(pvq_dot(1.0, a, x, unit) == doctest::Approx(sum / std::sqrt(11.0)).epsilon(1e-15));
    CHECK(unit == CostMeter{4, 1, 1});

    CostMeter scaled;
    CHECK(pvq_dot(2.5, a, x, scaled) == doctest::Approx(2.5 * sum / std::sqrt(11.0)).epsilon(1e-15));
    CHECK(scaled == CostMeter{4, 2, 1});

    CostMeter fused;
    CHECK(pvq_dot(2.5, a, x, fused, DotOptions{true}) == doctest::Approx(2.5 * sum / std::sqrt(11.0)).epsilon(1e-15));
    CHECK(fused == CostMeter{4, 1, 1});

    CostMeter null;
    CHECK(pvq_dot(PvqVector::null(7), x, null) == 0.0);
    CHECK(null == CostMeter{});
}

TEST_CASE("pvq_dot errors") {
    CostMeter meter;
    const std::vector<double> x{1, 2, 3};
    CHECK_THROWS_AS(pvq_dot(1.0, PvqPoint({1, 1}), x, meter), InvalidArgument);
    CHECK_THROWS_AS(pvq_dot(1.0, PvqPoint::zero(3), x, meter), InvalidArgument);
    CHECK_THROWS_AS(pvq_dot(-1.0, PvqPoint({1, 0, 0}), x, meter), InvalidArgument);
    const std::vector<double> bad{1, NAN, 3};
    CHECK_THROWS_AS(pvq_dot(1.0, PvqPoint({1, 0, 0}), bad, meter), InvalidArgument);
}

TEST_CASE("dense_dot") {
    CostMeter meter;
    const std::vector<double> a{1, 2}, b{3, 4};
    CHECK(dense_dot(a, b, meter) == 11.0);
    CHECK(meter == CostMeter{1, 2, 0});
    const std::vector<double> z(2, 0.0);
    CHECK(dense_dot(a, z, meter) == 0.0);
    CHECK_THROWS_AS(dense_dot(a, std::vector<double>{1.0}, meter), InvalidArgument);

    auto g = oracle::rng(0);
    for (int trial = 0; trial < 100; ++trial) {
        const auto u = oracle::uniform_vector(g, 50), v = oracle::uniform_vector(g, 50);
        CostMeter m;
        CHECK(dense_dot(u, v, m) == doctest::Approx(oracle::reversed_dot(u, v)).epsilon(1e-12));
    }
}

TEST_CASE("pvq_dot matches the dense dot on the reconstruction with k - 1 additions") {
    auto g = oracle::rng(0);
    std::uniform_int_distribution<int> dim(1, 64), kk(1, 32);
    for (int trial = 0; trial < 10000; ++trial) {
        const int n = dim(g), k = kk(g);
        const PvqPoint p = oracle::random_point(g, n, k);
        const double r = std::exp(oracle::uniform_vector(g, 1, -3, 3)[0]);
        const auto x = oracle::uniform_vector(g, static_cast<std::size_t>(n), -10, 10);
        CostMeter meter;
        const double got = pvq_dot(PvqVector(r, p), x, meter);
        const double want = oracle::reversed_dot(reconstruct(PvqVector(r, p)), x);
        REQUIRE(std::abs(got - want) <= 1e-9 * std::max(1.0, std::abs(want)));
        REQUIRE(meter.additions == static_cast<std::uint64_t>(k - 1));
        REQUIRE(meter.multiplications == 2);
    }
}

TEST_CASE("pvq_dot is linear in x") {
    auto g = oracle::rng(0);
    for (int trial = 0; trial < 1000; ++trial) {
        const PvqPoint p = oracle::random_point(g, 40, 12);
        const auto x = oracle::uniform_vector(g, 40), z = oracle::uniform_vector(g, 40);
        const double alpha = 3.5, beta = -0.25;
        std::vector<double> mix(40);
        for (int i = 0; i < 40; ++i) mix[i] = alpha * x[i] + beta * z[i];
        CostMeter meter;
        const double lhs = pvq_dot(1.7, p, mix, meter);
        const double rhs = alpha * pvq_dot(1.7, p, x, meter) + beta * pvq_dot(1.7, p, z, meter);
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-9));
    }
}

TEST_CASE("pvq_dot_blocks matches the scalar version per entry") {
    auto g = oracle::rng(0);
    const int m = 4, n = 15;
    std::vector<BlockElement> xs;
    for (int i = 0; i < n; ++i) xs.push_back({m, oracle::uniform_vector(g, m * m)});
    const PvqPoint p = oracle::random_point(g, n, 9);
    CostMeter meter;
    const BlockElement out = pvq_dot_blocks(2.0, p, xs, meter);
    CHECK(meter == CostMeter{8, 2, 1});
    for (int e = 0; e < m * m; ++e) {
        std::vector<double> col;
        for (const auto& b : xs) col.push_back(b.values[e]);
        CostMeter scalar;
        CHECK(out.values[e] == doctest::Approx(pvq_dot(2.0, p, col, scalar)).epsilon(1e-12));
    }
    CostMeter zero;
    CHECK(pvq_dot_blocks(0.0, PvqPoint::zero(n), xs, zero).values == std::vector<double>(m * m, 0.0));
}
