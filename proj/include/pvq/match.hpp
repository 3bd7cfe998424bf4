#pragma once

// Keypoint descriptor store holding PVQ directions as packed pyramid
// indices, with cosine-similarity search that costs k - 1 additions and one
// multiplication per stored descriptor.

#include "pvq/cost_meter.hpp"
#include "pvq/pyramid.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <unordered_set>
#include <vector>

namespace pvq {

/// Database of descriptors on P(n, k). The radius of each encoded
/// descriptor is discarded. Const member functions may run concurrently;
/// add_descriptor needs exclusive access.
class DescriptorDb {
public:
    /// Applied to each raw descriptor before encoding; identity when empty.
    using PreTransform = std::function<std::vector<double>(std::span<const double>)>;

    struct Entry {
        std::uint64_t id = 0;
        PyramidIndex index;
    };

    DescriptorDb(int n, int k, PreTransform pre = {});

    int n() const noexcept { return n_; }
    int k() const noexcept { return k_; }
    std::size_t size() const noexcept { return entries_.size(); }
    bool empty() const noexcept { return entries_.empty(); }
    std::span<const Entry> entries() const noexcept { return entries_; }
    /// Decoded point of entry i.
    const PvqPoint& point(std::size_t i) const { return points_.at(i); }

    /// Throws InvalidArgument on dimension mismatch, a zero (or non-finite)
    /// descriptor, or a duplicate id.
    const Entry& add_descriptor(std::span<const double> raw, std::uint64_t id);
    /// Inserts an already-mapped descriptor (used when loading).
    const Entry& add_index(std::uint64_t id, const PyramidIndex& index);

private:
    int n_;
    int k_;
    PreTransform pre_;
    std::vector<Entry> entries_;
    std::vector<PvqPoint> points_;
    std::unordered_set<std::uint64_t> ids_;
};

/// (x . y) / (|x|_2 |y|_2) with the dot product taken on the PVQ point
/// (r = 1). Throws for a zero query or zero point.
double cosine_to(std::span<const double> query, const PvqPoint& p, CostMeter& meter);

struct Match {
    std::uint64_t id = 0;
    double score = 0.0;  // (x . y) / |y|_2, i.e. cosine scaled by |x|_2
};

/// argmax over entries of (x . y) / |y|_2; ties go to the lowest id. The
/// running maximum starts at -infinity, so all-negative databases still
/// return their true best entry.
Match best_match(const DescriptorDb& db, std::span<const double> query, CostMeter& meter);

/// |x - y|_2 for unit vectors with cosine c: sqrt(2 - 2c). Accepts c within
/// 1e-12 of [-1, 1] (clamped); throws InvalidArgument otherwise.
double distance_from_cosine(double c);

/// "PVQD" | n u16 | k u16 | count u64 | per entry: id u64 then the index
/// on bits_required(n, k) bits; MSB-first, zero-padded to a byte at the end.
std::vector<std::uint8_t> serialize_db(const DescriptorDb& db);
DescriptorDb parse_db(std::span<const std::uint8_t> bytes);
void save(const DescriptorDb& db, const std::filesystem::path& path);
DescriptorDb load(const std::filesystem::path& path);

inline constexpr std::size_t kDbHeaderBytes = 16;
/// Exact serialized size for `count` entries.
std::uint64_t db_file_size(int n, int k, std::uint64_t count);

}  // namespace pvq
