#include "pvq/codec.hpp"

#include "pvq/bitstream.hpp"
#include "pvq/error.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <string>

namespace pvq {

namespace {

constexpr std::uint8_t kMagic[4] = {'P', 'V', 'Q', '1'};

std::uint16_t transform_tag(TransformKind kind) {
    switch (kind) {
        case TransformKind::dct2: return 0;
        case TransformKind::wht: return 1;
        case TransformKind::dft: break;
    }
    throw InvalidArgument("codec: transform must be dct or wht");
}

int ac_dimension(int m) { return m * m - 1; }

double as_binary32(double v) { return static_cast<double>(static_cast<float>(v)); }

}  // namespace

PyramidIndex block_index(const EncodedBlock& b, int m, int k) {
    if (b.point.is_zero()) return PyramidIndex{ac_dimension(m), k, 0};
    if (b.point.n() != ac_dimension(m) || b.point.k() != k) {
        throw InvalidArgument("block_index: point is not on P(m*m - 1, k)");
    }
    return point_to_index(b.point);
}

void CodecParams::validate() const {
    spec().validate();
    if (transform == TransformKind::dft) throw InvalidArgument("codec: transform must be dct or wht");
    if (m > 255) throw InvalidArgument("codec: block side must fit in 8 bits");
    if (k < 1 || k > 0xFFFF) throw InvalidArgument("codec: k must be in [1, 65535]");
    if (dc_bits < 0 || dc_bits > 32) throw InvalidArgument("codec: dc_bits must be in [0, 32]");
    if (r_bits < 0 || r_bits > 32) throw InvalidArgument("codec: r_bits must be in [0, 32]");
    (void)bits_required(ac_dimension(m), k);
}

ScalarQuantizer::ScalarQuantizer(int bits, double max_value, bool reserve_zero)
    : bits_(bits), max_(max_value), reserve_zero_(reserve_zero) {
    if (bits < 1 || bits > 32) throw InvalidArgument("ScalarQuantizer: bits must be in [1, 32]");
    if (!(max_value > 0.0) || !std::isfinite(max_value)) throw InvalidArgument("ScalarQuantizer: bad range");
    levels_ = std::uint64_t{1} << bits;
}

std::uint64_t ScalarQuantizer::code(double v) const {
    if (!std::isfinite(v)) throw InvalidArgument("ScalarQuantizer: non-finite value");
    if (reserve_zero_) {
        if (v <= 0.0) return 0;
        const double width = max_ / static_cast<double>(levels_ - 1);
        const double c = std::ceil(v / width);
        return static_cast<std::uint64_t>(std::clamp(c, 1.0, static_cast<double>(levels_ - 1)));
    }
    const double c = std::floor(v / max_ * static_cast<double>(levels_));
    return static_cast<std::uint64_t>(std::clamp(c, 0.0, static_cast<double>(levels_ - 1)));
}

double ScalarQuantizer::value(std::uint64_t code) const {
    if (code >= levels_) throw InvalidArgument("ScalarQuantizer: code out of range");
    if (reserve_zero_) {
        if (code == 0) return 0.0;
        const double width = max_ / static_cast<double>(levels_ - 1);
        return (static_cast<double>(code) - 0.5) * width;
    }
    return (static_cast<double>(code) + 0.5) * max_ / static_cast<double>(levels_);
}

ScalarQuantizer dc_quantizer(const CodecParams& p) { return ScalarQuantizer(p.dc_bits, 255.0 * p.m, false); }

ScalarQuantizer radius_quantizer(const CodecParams& p) { return ScalarQuantizer(p.r_bits, 127.5 * p.m, true); }

EncodedBlock encode_block(const PixelBlock& x, const BlockTransform& transform, int k, const WeightBlock* weights) {
    CoeffBlock q = transform.forward(x);
    if (weights) q = weight_coefficients(q, *weights);
    std::vector<double> ac = ac_vector(q);
    // A constant block has no AC energy; drop the rounding residue of the
    // transform so it is stored as a null vector.
    const auto px = x.values();
    if (std::all_of(px.begin(), px.end(), [&](double v) { return v == px.front(); })) {
        std::fill(ac.begin(), ac.end(), 0.0);
    }
    double energy = 0.0;
    for (double v : ac) energy += v * v;
    EncodedBlock out;
    out.dc = q.at(0, 0);
    out.radius = std::sqrt(energy);
    out.point = out.radius > 0.0 ? encode(ac, k) : PvqPoint::zero(static_cast<int>(ac.size()));
    return out;
}

CoeffBlock decoded_coefficients(const EncodedBlock& b, int m) {
    std::vector<double> ac(static_cast<std::size_t>(ac_dimension(m)), 0.0);
    if (b.point.n() != ac_dimension(m)) throw InvalidArgument("decoded_coefficients: point dimension mismatch");
    if (b.radius > 0.0) {
        const double alpha = b.radius / l2_norm(b.point);
        for (std::size_t t = 0; t < ac.size(); ++t) ac[t] = alpha * b.point[t];
    }
    return assemble_coefficients(m, b.dc, ac);
}

PixelBlock decode_block(const EncodedBlock& b, const BlockTransform& transform, const WeightBlock* weights) {
    CoeffBlock q = decoded_coefficients(b, transform.m());
    if (weights) {
        WeightBlock inv(weights->m());
        for (std::size_t i = 0; i < inv.values().size(); ++i) {
            const double w = weights->values()[i];
            if (!std::isfinite(w) || w <= 0.0) throw InvalidArgument("decode_block: weights must be positive");
            inv.values()[i] = 1.0 / w;
        }
        q = weight_coefficients(q, inv);
    }
    return transform.inverse(q);
}

EncodedImage encode_image(const GrayImage& pixels, const CodecParams& params) {
    params.validate();
    if (pixels.width <= 0 || pixels.height <= 0) throw InvalidArgument("encode_image: zero-sized image");
    const int m = params.m;
    EncodedImage out;
    out.params = params;
    out.width = (pixels.width + m - 1) / m * m;
    out.height = (pixels.height + m - 1) / m * m;
    const BlockTransform transform(params.spec());

    const bool raw_dc = params.dc_bits == 0;
    const bool raw_r = params.r_bits == 0;
    const auto dcq = raw_dc ? ScalarQuantizer(1, 1.0, false) : dc_quantizer(params);
    const auto rq = raw_r ? ScalarQuantizer(1, 1.0, true) : radius_quantizer(params);

    out.blocks.reserve(static_cast<std::size_t>(out.blocks_w()) * out.blocks_h());
    PixelBlock x(m);
    for (int by = 0; by < out.blocks_h(); ++by) {
        for (int bx = 0; bx < out.blocks_w(); ++bx) {
            for (int i = 0; i < m; ++i) {
                const int py = std::min(by * m + i, pixels.height - 1);
                for (int j = 0; j < m; ++j) {
                    const int px = std::min(bx * m + j, pixels.width - 1);
                    x.at(i, j) = pixels.at(px, py);
                }
            }
            EncodedBlock b = encode_block(x, transform, params.k);
            b.dc = raw_dc ? as_binary32(b.dc) : dcq.quantize(b.dc);
            b.radius = raw_r ? as_binary32(b.radius) : rq.quantize(b.radius);
            if (b.radius == 0.0) b.point = PvqPoint::zero(ac_dimension(m));
            out.blocks.push_back(std::move(b));
        }
    }
    return out;
}

RealImage reconstruct_image(const EncodedImage& img) {
    const int m = img.params.m;
    const BlockTransform transform(img.params.spec());
    RealImage out(img.width, img.height);
    for (int by = 0; by < img.blocks_h(); ++by) {
        for (int bx = 0; bx < img.blocks_w(); ++bx) {
            const PixelBlock x = decode_block(img.block(bx, by), transform);
            for (int i = 0; i < m; ++i)
                for (int j = 0; j < m; ++j) out.at(bx * m + j, by * m + i) = x.at(i, j);
        }
    }
    return out;
}

GrayImage decode_image(const EncodedImage& img) { return to_gray(reconstruct_image(img)); }

std::uint64_t block_bits(const CodecParams& p) {
    const std::uint64_t dc = p.dc_bits == 0 ? 32 : static_cast<std::uint64_t>(p.dc_bits);
    const std::uint64_t r = p.r_bits == 0 ? 32 : static_cast<std::uint64_t>(p.r_bits);
    return dc + r + static_cast<std::uint64_t>(bits_required(ac_dimension(p.m), p.k));
}

std::uint64_t payload_bits(int width, int height, const CodecParams& p) {
    const std::uint64_t blocks = static_cast<std::uint64_t>(width / p.m) * static_cast<std::uint64_t>(height / p.m);
    return blocks * block_bits(p);
}

std::uint64_t packed_size(int width, int height, const CodecParams& p) {
    return kBitstreamHeaderBytes + (payload_bits(width, height, p) + 7) / 8;
}

std::vector<std::uint8_t> pack(const EncodedImage& img) {
    const CodecParams& p = img.params;
    p.validate();
    if (img.width <= 0 || img.height <= 0 || img.width % p.m || img.height % p.m) {
        throw InvalidArgument("pack: image size must be a positive multiple of m");
    }
    if (img.blocks.size() != static_cast<std::size_t>(img.blocks_w()) * img.blocks_h()) {
        throw InvalidArgument("pack: block count does not match image size");
    }
    BitWriter w;
    for (auto c : kMagic) w.write_u8(c);
    w.write_u32(static_cast<std::uint32_t>(img.width));
    w.write_u32(static_cast<std::uint32_t>(img.height));
    w.write_u8(static_cast<std::uint8_t>(p.m));
    w.write_u16(static_cast<std::uint16_t>(p.k));
    w.write_u8(static_cast<std::uint8_t>(p.dc_bits));
    w.write_u8(static_cast<std::uint8_t>(p.r_bits));
    w.write_u16(transform_tag(p.transform));

    const int index_bits = bits_required(ac_dimension(p.m), p.k);
    const auto dcq = p.dc_bits ? dc_quantizer(p) : ScalarQuantizer(1, 1.0, false);
    const auto rq = p.r_bits ? radius_quantizer(p) : ScalarQuantizer(1, 1.0, true);
    for (const auto& b : img.blocks) {
        if (p.dc_bits == 0) w.write_u32(std::bit_cast<std::uint32_t>(static_cast<float>(b.dc)));
        else w.write(dcq.code(b.dc), p.dc_bits);
        if (p.r_bits == 0) w.write_u32(std::bit_cast<std::uint32_t>(static_cast<float>(b.radius)));
        else w.write(rq.code(b.radius), p.r_bits);
        w.write_wide(block_index(b, p.m, p.k).value, index_bits);
    }
    return std::move(w).take();
}

EncodedImage unpack(std::span<const std::uint8_t> bytes) {
    using Kind = FormatError::Kind;
    if (bytes.size() < 4 || !std::equal(std::begin(kMagic), std::end(kMagic), bytes.begin())) {
        throw FormatError(Kind::bad_magic, "bitstream: bad magic (expected PVQ1)");
    }
    BitReader r(bytes);
    r.read(32);
    EncodedImage img;
    const std::uint32_t width = r.read_u32();
    const std::uint32_t height = r.read_u32();
    CodecParams& p = img.params;
    p.m = r.read_u8();
    p.k = r.read_u16();
    p.dc_bits = r.read_u8();
    p.r_bits = r.read_u8();
    const std::uint16_t tag = r.read_u16();
    if (tag > 1) throw FormatError(Kind::bad_header, "bitstream: unknown transform tag " + std::to_string(tag));
    p.transform = tag == 0 ? TransformKind::dct2 : TransformKind::wht;
    try {
        p.validate();
    } catch (const Error& e) {
        throw FormatError(Kind::bad_header, std::string("bitstream: ") + e.what());
    }
    if (width == 0 || height == 0 || width > 0x7FFFFFFFU || height > 0x7FFFFFFFU || width % p.m || height % p.m) {
        throw FormatError(Kind::bad_header, "bitstream: image size must be a positive multiple of m");
    }
    img.width = static_cast<int>(width);
    img.height = static_cast<int>(height);

    const std::uint64_t expected = packed_size(img.width, img.height, p);
    if (bytes.size() < expected) throw FormatError(Kind::truncated, "bitstream: truncated payload");
    if (bytes.size() > expected) throw FormatError(Kind::bad_header, "bitstream: trailing bytes after payload");

    const int n = ac_dimension(p.m);
    const int index_bits = bits_required(n, p.k);
    const IndexValue np = count_points(n, p.k);
    const auto dcq = p.dc_bits ? dc_quantizer(p) : ScalarQuantizer(1, 1.0, false);
    const auto rq = p.r_bits ? radius_quantizer(p) : ScalarQuantizer(1, 1.0, true);
    const std::size_t count = static_cast<std::size_t>(img.blocks_w()) * img.blocks_h();
    img.blocks.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        EncodedBlock b;
        b.dc = p.dc_bits == 0 ? static_cast<double>(std::bit_cast<float>(r.read_u32())) : dcq.value(r.read(p.dc_bits));
        b.radius = p.r_bits == 0 ? static_cast<double>(std::bit_cast<float>(r.read_u32())) : rq.value(r.read(p.r_bits));
        const IndexValue index = r.read_wide(index_bits);
        if (!std::isfinite(b.dc)) throw FormatError(Kind::bad_value, "bitstream: non-finite DC in block " + std::to_string(i));
        if (!std::isfinite(b.radius) || b.radius < 0.0) {
            throw FormatError(Kind::bad_value, "bitstream: invalid radius in block " + std::to_string(i));
        }
        if (index >= np) {
            throw FormatError(Kind::index_out_of_range,
                              "bitstream: index " + to_string(index) + " >= N_p in block " + std::to_string(i));
        }
        if (b.radius == 0.0) {
            if (index != 0) throw FormatError(Kind::bad_value, "bitstream: null block with non-zero index");
            b.point = PvqPoint::zero(n);
        } else {
            b.point = index_to_point(PyramidIndex{n, p.k, index});
        }
        img.blocks.push_back(std::move(b));
    }
    return img;
}

}  // namespace pvq
