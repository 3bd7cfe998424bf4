#include "pvq/match.hpp"

#include "pvq/bitstream.hpp"
#include "pvq/error.hpp"
#include "pvq/image.hpp"
#include "pvq/pvqdot.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace pvq {

DescriptorDb::DescriptorDb(int n, int k, PreTransform pre) : n_(n), k_(k), pre_(std::move(pre)) {
    if (n < 1 || n > 0xFFFF) throw InvalidArgument("DescriptorDb: n must be in [1, 65535]");
    if (k < 1 || k > 0xFFFF) throw InvalidArgument("DescriptorDb: k must be in [1, 65535]");
    (void)count_points(n, k);
}

const DescriptorDb::Entry& DescriptorDb::add_descriptor(std::span<const double> raw, std::uint64_t id) {
    if (raw.size() != static_cast<std::size_t>(n_)) {
        throw InvalidArgument("add_descriptor: expected dimension " + std::to_string(n_) + ", got " +
                              std::to_string(raw.size()));
    }
    if (ids_.contains(id)) throw InvalidArgument("add_descriptor: duplicate id " + std::to_string(id));
    std::vector<double> v = pre_ ? pre_(raw) : std::vector<double>(raw.begin(), raw.end());
    if (v.size() != static_cast<std::size_t>(n_)) throw InvalidArgument("add_descriptor: transform changed dimension");
    PvqPoint p = encode(v, k_);
    if (p.is_zero()) throw InvalidArgument("add_descriptor: zero descriptor");
    const PyramidIndex idx = point_to_index(p);
    ids_.insert(id);
    entries_.push_back(Entry{id, idx});
    points_.push_back(std::move(p));
    return entries_.back();
}

const DescriptorDb::Entry& DescriptorDb::add_index(std::uint64_t id, const PyramidIndex& index) {
    if (index.n != n_ || index.k != k_) throw InvalidArgument("add_index: index is for a different pyramid");
    if (ids_.contains(id)) throw InvalidArgument("add_index: duplicate id " + std::to_string(id));
    PvqPoint p = index_to_point(index);
    ids_.insert(id);
    entries_.push_back(Entry{id, index});
    points_.push_back(std::move(p));
    return entries_.back();
}

double cosine_to(std::span<const double> query, const PvqPoint& p, CostMeter& meter) {
    double qq = 0.0;
    for (double v : query) qq += v * v;
    if (!(qq > 0.0) || !std::isfinite(qq)) throw InvalidArgument("cosine_to: query must be non-zero and finite");
    if (p.is_zero()) throw InvalidArgument("cosine_to: zero point");
    const double inv_query = 1.0 / std::sqrt(qq);
    const double c = pvq_dot(1.0, p, query, meter) * inv_query;
    meter.mul();
    return c;
}

Match best_match(const DescriptorDb& db, std::span<const double> query, CostMeter& meter) {
    if (db.empty()) throw InvalidArgument("best_match: empty database");
    Match best{0, -std::numeric_limits<double>::infinity()};
    bool found = false;
    for (std::size_t i = 0; i < db.size(); ++i) {
        const double s = pvq_dot(1.0, db.point(i), query, meter);
        const std::uint64_t id = db.entries()[i].id;
        if (!found || s > best.score || (s == best.score && id < best.id)) {
            best = {id, s};
            found = true;
        }
    }
    return best;
}

double distance_from_cosine(double c) {
    constexpr double kSlack = 1e-12;
    if (!(c >= -1.0 - kSlack && c <= 1.0 + kSlack)) {
        throw InvalidArgument("distance_from_cosine: cosine outside [-1, 1]");
    }
    return std::sqrt(2.0 - 2.0 * std::clamp(c, -1.0, 1.0));
}

std::uint64_t db_file_size(int n, int k, std::uint64_t count) {
    return kDbHeaderBytes + (count * (64 + static_cast<std::uint64_t>(bits_required(n, k))) + 7) / 8;
}

std::vector<std::uint8_t> serialize_db(const DescriptorDb& db) {
    BitWriter w;
    for (char c : {'P', 'V', 'Q', 'D'}) w.write_u8(static_cast<std::uint8_t>(c));
    w.write_u16(static_cast<std::uint16_t>(db.n()));
    w.write_u16(static_cast<std::uint16_t>(db.k()));
    w.write_u64(db.size());
    const int bits = bits_required(db.n(), db.k());
    for (const auto& e : db.entries()) {
        w.write_u64(e.id);
        w.write_wide(e.index.value, bits);
    }
    return std::move(w).take();
}

DescriptorDb parse_db(std::span<const std::uint8_t> bytes) {
    using Kind = FormatError::Kind;
    if (bytes.size() < 4 || bytes[0] != 'P' || bytes[1] != 'V' || bytes[2] != 'Q' || bytes[3] != 'D') {
        throw FormatError(Kind::bad_magic, "descriptor db: bad magic (expected PVQD)");
    }
    if (bytes.size() < kDbHeaderBytes) throw FormatError(Kind::truncated, "descriptor db: truncated header");
    BitReader r(bytes);
    r.read(32);
    const int n = r.read_u16();
    const int k = r.read_u16();
    const std::uint64_t count = r.read_u64();
    if (n < 1 || k < 1) throw FormatError(Kind::bad_header, "descriptor db: n and k must be >= 1");
    IndexValue np = 0;
    int bits = 0;
    try {
        np = count_points(n, k);
        bits = bits_required(n, k);
    } catch (const Error& e) {
        throw FormatError(Kind::bad_header, std::string("descriptor db: ") + e.what());
    }
    const std::uint64_t entry_bits = 64 + static_cast<std::uint64_t>(bits);
    const std::uint64_t payload = bytes.size() - kDbHeaderBytes;
    if (count > payload * 8 / entry_bits) throw FormatError(Kind::truncated, "descriptor db: truncated entries");
    if (bytes.size() != db_file_size(n, k, count)) {
        throw FormatError(Kind::bad_header, "descriptor db: file size does not match entry count");
    }
    DescriptorDb db(n, k);
    for (std::uint64_t i = 0; i < count; ++i) {
        const std::uint64_t id = r.read_u64();
        const IndexValue value = r.read_wide(bits);
        if (value >= np) {
            throw FormatError(Kind::index_out_of_range, "descriptor db: entry " + std::to_string(i) + " index " +
                                                            to_string(value) + " >= N_p");
        }
        try {
            db.add_index(id, PyramidIndex{n, k, value});
        } catch (const InvalidArgument& e) {
            throw FormatError(Kind::bad_value, std::string("descriptor db: ") + e.what());
        }
    }
    return db;
}

void save(const DescriptorDb& db, const std::filesystem::path& path) { write_file(path, serialize_db(db)); }

DescriptorDb load(const std::filesystem::path& path) { return parse_db(read_file(path)); }

}  // namespace pvq
