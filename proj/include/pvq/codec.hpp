#pragma once

// Fixed-rate block image codec: each m x m block is transformed, its DC kept
// apart and its m*m - 1 AC coefficients PVQ encoded as one vector. Every
// block costs the same number of bits, so the compressed size depends only
// on the image dimensions and the codec parameters.

#include "pvq/image.hpp"
#include "pvq/pyramid.hpp"
#include "pvq/transform.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace pvq {

struct EncodedBlock {
    double dc = 0.0;
    double radius = 0.0;
    PvqPoint point = PvqPoint::zero(1);  // zero point iff radius == 0

    friend bool operator==(const EncodedBlock&, const EncodedBlock&) = default;
};

/// Index of the block's point over P(m*m - 1, k). Null blocks use index 0.
PyramidIndex block_index(const EncodedBlock& b, int m, int k);

struct CodecParams {
    TransformKind transform = TransformKind::dct2;
    int m = 8;
    int k = 10;
    int dc_bits = 0;  // 0: raw IEEE-754 binary32
    int r_bits = 0;   // 0: raw IEEE-754 binary32

    TransformSpec spec() const { return TransformSpec{transform, m, true}; }
    /// Throws InvalidArgument for unsupported combinations.
    void validate() const;

    friend bool operator==(const CodecParams&, const CodecParams&) = default;
};

struct EncodedImage {
    int width = 0;   // padded to a multiple of m
    int height = 0;  // padded to a multiple of m
    CodecParams params;
    std::vector<EncodedBlock> blocks;  // row-major

    int blocks_w() const noexcept { return width / params.m; }
    int blocks_h() const noexcept { return height / params.m; }
    const EncodedBlock& block(int bx, int by) const { return blocks[static_cast<std::size_t>(by) * blocks_w() + bx]; }

    friend bool operator==(const EncodedImage&, const EncodedImage&) = default;
};

/// Uniform scalar quantizer with midpoint reconstruction. When
/// reserve_zero is set, code 0 reconstructs exactly 0 and the remaining
/// codes split (0, max] evenly.
class ScalarQuantizer {
public:
    ScalarQuantizer(int bits, double max_value, bool reserve_zero);

    std::uint64_t code(double v) const;
    double value(std::uint64_t code) const;
    double quantize(double v) const { return value(code(v)); }

private:
    int bits_;
    double max_;
    bool reserve_zero_;
    std::uint64_t levels_;
};

/// Quantizer ranges for 8-bit input under an orthonormal transform whose DC
/// basis is constant: q00 = m * mean lies in [0, 255 m] and the AC norm,
/// |X - mean|_F, is at most 127.5 m.
ScalarQuantizer dc_quantizer(const CodecParams& p);
ScalarQuantizer radius_quantizer(const CodecParams& p);

/// dc = q00; radius = |AC|_2; point = encode(AC, k) in row-major scan order.
/// With weights, Q is weighted before grouping.
EncodedBlock encode_block(const PixelBlock& x, const BlockTransform& transform, int k,
                          const WeightBlock* weights = nullptr);

/// Q^ = q00 U00 + alpha * sum_t y_t U_ij with alpha = r / |y|_2.
CoeffBlock decoded_coefficients(const EncodedBlock& b, int m);

/// T^-1(Q^), undoing the weights first when given.
PixelBlock decode_block(const EncodedBlock& b, const BlockTransform& transform, const WeightBlock* weights = nullptr);

/// Pads by edge replication to multiples of m, then encodes every block.
/// DC and radius are passed through the same representation the bitstream
/// uses (binary32 or the scalar quantizers), so pack/unpack is lossless.
EncodedImage encode_image(const GrayImage& pixels, const CodecParams& params);

/// Unclamped reconstruction at the padded size.
RealImage reconstruct_image(const EncodedImage& img);
/// reconstruct_image rounded and clamped to 8 bits.
GrayImage decode_image(const EncodedImage& img);

inline constexpr std::size_t kBitstreamHeaderBytes = 19;

/// Bits per block: dc + radius + bits_required(m*m - 1, k).
std::uint64_t block_bits(const CodecParams& p);
/// Payload bits for an image of the given (padded) size.
std::uint64_t payload_bits(int width, int height, const CodecParams& p);
/// Header plus byte-padded payload.
std::uint64_t packed_size(int width, int height, const CodecParams& p);

/// Layout (big-endian, MSB-first):
///   "PVQ1" | width u32 | height u32 | m u8 | k u16 | dc_bits u8 | r_bits u8 |
///   transform u16 (0 dct, 1 wht) | per block: dc, radius, index
std::vector<std::uint8_t> pack(const EncodedImage& img);
/// Throws FormatError on bad magic, bad header, truncation, trailing bytes,
/// out-of-range indices or invalid real fields.
EncodedImage unpack(std::span<const std::uint8_t> bytes);

}  // namespace pvq
