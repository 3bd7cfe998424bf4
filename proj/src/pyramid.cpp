#include "pvq/pyramid.hpp"

#include "pvq/error.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdlib>
#include <atomic>
#include <limits>
#include <mutex>
#include <string>

namespace pvq {

namespace {

// N_p(n, k) is even for k >= 1 (sign symmetry) and 1 for k == 0, so the
// all-ones pattern can never be a genuine count.
constexpr IndexValue kOverflow = ~IndexValue{0};

IndexValue saturating_add(IndexValue a, IndexValue b) {
    if (a == kOverflow || b == kOverflow) return kOverflow;
    IndexValue r = 0;
    if (__builtin_add_overflow(a, b, &r) || r == kOverflow) return kOverflow;
    return r;
}

void check_params(int n, int k) {
    if (n < 1) throw InvalidArgument("pyramid: dimension must be >= 1, got " + std::to_string(n));
    if (k < 0) throw InvalidArgument("pyramid: k must be >= 0, got " + std::to_string(k));
}

}  // namespace

PvqPoint::PvqPoint(std::vector<std::int32_t> components) : components_(std::move(components)) {
    if (components_.empty()) throw InvalidArgument("PvqPoint: dimension must be >= 1");
    std::int64_t l1 = 0;
    for (auto c : components_) l1 += std::abs(static_cast<std::int64_t>(c));
    if (l1 > std::numeric_limits<int>::max()) throw InvalidArgument("PvqPoint: L1 norm too large");
    k_ = static_cast<int>(l1);
}

PvqPoint::PvqPoint(std::vector<std::int32_t> components, int k) : PvqPoint(std::move(components)) {
    if (k_ != k) {
        throw InvalidArgument("PvqPoint: sum of |components| is " + std::to_string(k_) +
                              ", expected " + std::to_string(k));
    }
}

PvqPoint PvqPoint::zero(int n) {
    if (n < 1) throw InvalidArgument("PvqPoint: dimension must be >= 1");
    return PvqPoint(std::vector<std::int32_t>(static_cast<std::size_t>(n), 0));
}

std::int64_t PvqPoint::squared_norm() const noexcept {
    std::int64_t s = 0;
    for (auto c : components_) s += static_cast<std::int64_t>(c) * c;
    return s;
}

PvqVector::PvqVector(double radius, PvqPoint point) : radius_(radius), point_(std::move(point)) {
    if (!std::isfinite(radius_) || radius_ < 0.0) {
        throw InvalidArgument("PvqVector: radius must be finite and non-negative");
    }
    if ((radius_ == 0.0) != point_.is_zero()) {
        throw InvalidArgument("PvqVector: radius is zero exactly when the point is the zero point");
    }
}

CountTable::CountTable(int max_n, int max_k) : max_n_(max_n), max_k_(max_k) {
    if (max_n < 0 || max_k < 0) throw InvalidArgument("CountTable: negative bounds");
    const auto cols = static_cast<std::size_t>(max_k_) + 1;
    counts_.assign((static_cast<std::size_t>(max_n_) + 1) * cols, 0);
    auto cell = [&](int n, int k) -> IndexValue& {
        return counts_[static_cast<std::size_t>(n) * cols + static_cast<std::size_t>(k)];
    };
    cell(0, 0) = 1;
    for (int n = 1; n <= max_n_; ++n) {
        cell(n, 0) = 1;
        for (int k = 1; k <= max_k_; ++k) {
            cell(n, k) = saturating_add(saturating_add(cell(n - 1, k), cell(n, k - 1)), cell(n - 1, k - 1));
        }
    }
}

IndexValue CountTable::at(int n, int k) const {
    if (n < 0 || k < 0 || !covers(n, k)) throw InvalidArgument("CountTable: (n, k) outside table");
    const auto v = counts_[static_cast<std::size_t>(n) * (static_cast<std::size_t>(max_k_) + 1) +
                           static_cast<std::size_t>(k)];
    if (v == kOverflow) {
        throw OverflowError("N_p(" + std::to_string(n) + ", " + std::to_string(k) +
                            ") exceeds 128-bit range");
    }
    return v;
}

namespace {

// Every table ever built stays alive, so a pointer published through
// `current` remains valid for the life of the process.
struct TableCache {
    std::mutex mutex;
    std::vector<std::shared_ptr<const CountTable>> tables{std::make_shared<const CountTable>(64, 64)};
    std::atomic<const CountTable*> current{tables.front().get()};
};

TableCache& table_cache() {
    static TableCache cache;
    return cache;
}

const CountTable& table_for(int n, int k) {
    TableCache& cache = table_cache();
    const CountTable* t = cache.current.load(std::memory_order_acquire);
    if (t->covers(n, k)) return *t;
    std::lock_guard lock(cache.mutex);
    t = cache.current.load(std::memory_order_relaxed);
    if (!t->covers(n, k)) {
        cache.tables.push_back(std::make_shared<const CountTable>(std::max(n, t->max_n()), std::max(k, t->max_k())));
        t = cache.tables.back().get();
        cache.current.store(t, std::memory_order_release);
    }
    return *t;
}

}  // namespace

std::shared_ptr<const CountTable> count_table(int n, int k) {
    const CountTable* t = &table_for(n, k);
    TableCache& cache = table_cache();
    std::lock_guard lock(cache.mutex);
    for (const auto& owned : cache.tables)
        if (owned.get() == t) return owned;
    return cache.tables.back();
}

std::string to_string(IndexValue v) {
    if (v == 0) return "0";
    std::string out;
    while (v != 0) {
        out.push_back(static_cast<char>('0' + static_cast<int>(v % 10)));
        v /= 10;
    }
    return {out.rbegin(), out.rend()};
}

IndexValue count_points(int n, int k) {
    check_params(n, k);
    return table_for(n, k).at(n, k);
}

int bits_required(int n, int k) {
    const IndexValue count = count_points(n, k);
    if (count <= 1) return 0;
    const IndexValue top = count - 1;
    const auto high = static_cast<std::uint64_t>(top >> 64);
    const auto low = static_cast<std::uint64_t>(top);
    return high != 0 ? 128 - std::countl_zero(high) : 64 - std::countl_zero(low);
}

PvqPoint encode(std::span<const double> y, int k) {
    const int n = static_cast<int>(y.size());
    if (n < 1) throw InvalidArgument("encode: empty input");
    if (k < 1) throw InvalidArgument("encode: k must be >= 1");
    double l1 = 0.0;
    for (double v : y) {
        if (!std::isfinite(v)) throw InvalidArgument("encode: non-finite input component");
        l1 += std::abs(v);
    }
    if (l1 == 0.0) return PvqPoint::zero(n);

    std::vector<std::int32_t> mag(static_cast<std::size_t>(n));
    std::int64_t sum = 0;
    double dot = 0.0;       // sum |y_i| * |c_i|
    std::int64_t nsq = 0;   // sum c_i^2
    for (int i = 0; i < n; ++i) {
        const double a = std::abs(y[i]);
        const auto c = static_cast<std::int32_t>(std::floor(k * a / l1 + 0.5));
        mag[i] = c;
        sum += c;
        dot += a * c;
        nsq += static_cast<std::int64_t>(c) * c;
    }

    while (sum < k) {
        int best = 0;
        double best_score = -1.0;
        for (int i = 0; i < n; ++i) {
            const double score = (dot + std::abs(y[i])) / std::sqrt(static_cast<double>(nsq + 2 * mag[i] + 1));
            if (score > best_score) {
                best_score = score;
                best = i;
            }
        }
        dot += std::abs(y[best]);
        nsq += 2 * mag[best] + 1;
        ++mag[best];
        ++sum;
    }
    while (sum > k) {
        int best = -1;
        double best_score = -std::numeric_limits<double>::infinity();
        for (int i = 0; i < n; ++i) {
            if (mag[i] == 0) continue;
            const double score = (dot - std::abs(y[i])) / std::sqrt(static_cast<double>(nsq - 2 * mag[i] + 1));
            if (score > best_score) {
                best_score = score;
                best = i;
            }
        }
        dot -= std::abs(y[best]);
        nsq -= 2 * mag[best] - 1;
        --mag[best];
        --sum;
    }

    // Unit transfers between components while one strictly raises the cosine.
    // The score is recomputed from scratch after each move so it is a function
    // of the state alone; strict increase then guarantees termination.
    for (;;) {
        const double current = dot / std::sqrt(static_cast<double>(nsq));
        int from = -1;
        int to = -1;
        double best_score = current;
        for (int i = 0; i < n; ++i) {
            if (mag[i] == 0) continue;
            const double ai = std::abs(y[i]);
            for (int j = 0; j < n; ++j) {
                if (j == i) continue;
                const double d = dot - ai + std::abs(y[j]);
                const std::int64_t q = nsq - 2 * mag[i] + 2 * mag[j] + 2;
                const double score = d / std::sqrt(static_cast<double>(q));
                if (score > best_score) {
                    best_score = score;
                    from = i;
                    to = j;
                }
            }
        }
        if (from < 0) break;
        --mag[from];
        ++mag[to];
        dot = 0.0;
        nsq = 0;
        for (int i = 0; i < n; ++i) {
            dot += std::abs(y[i]) * mag[i];
            nsq += static_cast<std::int64_t>(mag[i]) * mag[i];
        }
        if (!(dot / std::sqrt(static_cast<double>(nsq)) > current)) {
            ++mag[from];
            --mag[to];
            break;
        }
    }

    for (int i = 0; i < n; ++i) {
        if (y[i] < 0.0) mag[i] = -mag[i];
    }
    return PvqPoint(std::move(mag), k);
}

// Canonical order: components left to right; each component takes values
// 0, +1, -1, +2, -2, ...; a value v that is passed over skips the
// N_p(remaining dims, remaining k - |v|) completions that start with it.
PyramidIndex point_to_index(const PvqPoint& p) {
    const int n = p.n();
    const CountTable& table = table_for(n, p.k());
    (void)table.at(n, p.k());  // every entry used below is at most N_p(n, k)
    int remaining = p.k();
    IndexValue index = 0;
    for (int i = 0; i < n && remaining > 0; ++i) {
        const int rest = n - i - 1;
        const std::int32_t v = p[i];
        const int a = std::abs(v);
        if (a == 0) continue;
        index += table.unchecked(rest, remaining);
        for (int b = 1; b < a; ++b) index += 2 * table.unchecked(rest, remaining - b);
        if (v < 0) index += table.unchecked(rest, remaining - a);
        remaining -= a;
    }
    return PyramidIndex{n, p.k(), index};
}

PvqPoint index_to_point(const PyramidIndex& idx) {
    const IndexValue total = count_points(idx.n, idx.k);
    if (idx.value >= total) {
        throw InvalidArgument("index_to_point: index " + to_string(idx.value) +
                              " out of range for P(" + std::to_string(idx.n) + ", " +
                              std::to_string(idx.k) + ")");
    }
    const CountTable& table = table_for(idx.n, idx.k);
    std::vector<std::int32_t> out(static_cast<std::size_t>(idx.n), 0);
    IndexValue value = idx.value;
    int remaining = idx.k;
    for (int i = 0; i < idx.n && remaining > 0; ++i) {
        const int rest = idx.n - i - 1;
        IndexValue block = table.unchecked(rest, remaining);
        if (value < block) continue;  // component is 0
        value -= block;
        for (int a = 1; a <= remaining; ++a) {
            block = table.unchecked(rest, remaining - a);
            if (value < block) {
                out[i] = a;
                remaining -= a;
                break;
            }
            value -= block;
            if (value < block) {
                out[i] = -a;
                remaining -= a;
                break;
            }
            value -= block;
        }
    }
    return PvqPoint(std::move(out), idx.k);
}

double l2_norm(const PvqPoint& p) {
    if (p.is_zero()) throw InvalidArgument("l2_norm: undefined for the zero point");
    return std::sqrt(static_cast<double>(p.squared_norm()));
}

double inverse_norm(std::int64_t squared_norm, bool* from_table) {
    constexpr std::int64_t kTableSize = 1 << 16;
    static const std::vector<double> table = [] {
        std::vector<double> t(kTableSize, 0.0);
        for (std::int64_t s = 1; s < kTableSize; ++s) t[s] = 1.0 / std::sqrt(static_cast<double>(s));
        return t;
    }();
    if (squared_norm <= 0) throw InvalidArgument("inverse_norm: squared norm must be positive");
    const bool hit = squared_norm < kTableSize;
    if (from_table) *from_table = hit;
    return hit ? table[static_cast<std::size_t>(squared_norm)]
               : 1.0 / std::sqrt(static_cast<double>(squared_norm));
}

std::vector<double> reconstruct(const PvqVector& v) {
    std::vector<double> out(static_cast<std::size_t>(v.n()), 0.0);
    if (v.radius() == 0.0) return out;
    const double alpha = v.radius() / l2_norm(v.point());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = alpha * v.point()[i];
    return out;
}

}  // namespace pvq
