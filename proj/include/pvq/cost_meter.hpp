#pragma once

#include <cstdint>

namespace pvq {

/// Exact tally of arithmetic events. Every operation that takes a meter
/// increments it at the point the event happens; nothing is estimated.
struct CostMeter {
    std::uint64_t additions = 0;  // additions and subtractions
    std::uint64_t multiplications = 0;
    std::uint64_t table_lookups = 0;

    void add(std::uint64_t n = 1) noexcept { additions += n; }
    void mul(std::uint64_t n = 1) noexcept { multiplications += n; }
    void lookup(std::uint64_t n = 1) noexcept { table_lookups += n; }

    void reset() noexcept { *this = CostMeter{}; }

    CostMeter& operator+=(const CostMeter& o) noexcept {
        additions += o.additions;
        multiplications += o.multiplications;
        table_lookups += o.table_lookups;
        return *this;
    }

    friend bool operator==(const CostMeter&, const CostMeter&) = default;
};

}  // namespace pvq
