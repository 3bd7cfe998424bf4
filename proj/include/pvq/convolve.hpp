#pragma once

// Convolution (Frobenius inner product C * X) evaluated directly on encoded
// blocks. A kernel's response to an encoded block is a DC term plus a PVQ
// dot product against either its basis responses or its transform T(C);
// kernels straddling block boundaries are split into four zero-padded
// sub-kernels, one per overlapped block.

#include "pvq/codec.hpp"
#include "pvq/cost_meter.hpp"
#include "pvq/image.hpp"
#include "pvq/transform.hpp"

#include <array>
#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <span>
#include <utility>
#include <vector>

namespace pvq {

/// Offset of a kernel's top-left corner from the origin of block b0;
/// x grows rightward, y downward. Both lie in [0, m).
struct Shift {
    int x = 0;
    int y = 0;

    friend auto operator<=>(const Shift&, const Shift&) = default;
};

/// Zero-extends a kernel of side <= m to m x m.
Kernel zero_extend(const Kernel& c, int m);

/// sum c_ij x_ij with C zero-extended to the block size.
double conv_direct(const Kernel& c, const PixelBlock& x);

/// q00 * R00 + alpha * sum_t y_t R_ij, R = basis_responses(C).
/// Cost: k - 1 additions, 2 multiplications and 1 lookup for the AC term;
/// 1 multiplication and 1 addition for the DC term.
double conv_pvq_basis(const BasisResponses& responses, const EncodedBlock& b, CostMeter& meter);

/// q00 * w00 + alpha * sum_t y_t w_ij, W = T(C). Only valid for orthonormal
/// real transforms; same cost profile as conv_pvq_basis.
double conv_pvq_transform(const CoeffBlock& tc, const EncodedBlock& b, const TransformSpec& spec, CostMeter& meter);

/// T(zero_extend(C)).
CoeffBlock transformed_kernel(const Kernel& c, const BlockTransform& transform);

/// The four sub-kernels of C placed at `shift` over the 2x2 block
/// neighbourhood b0 (top-left), b1 (top-right), b2 (bottom-left),
/// b3 (bottom-right). Their supports are disjoint and cover C.
struct ShiftedKernelSet {
    Shift shift;
    int m = 0;
    std::array<Kernel, 4> spatial;
    std::array<CoeffBlock, 4> transformed;
    std::array<bool, 4> active{};  // sub-kernel overlaps its block
};

/// Throws InvalidArgument if the shift is outside [0, m) or the kernel would
/// reach past the 2x2 neighbourhood.
ShiftedKernelSet make_shifted_kernels(const Kernel& c, Shift shift, const BlockTransform& transform);

/// sum over active sub-kernels of conv_pvq_transform(T(C_q), b_q), plus one
/// combining addition per extra active block. Blocks whose sub-kernel is
/// inactive are never read and may be null in the pointer form.
double conv_overlap(const ShiftedKernelSet& set, const std::array<const EncodedBlock*, 4>& blocks,
                    const TransformSpec& spec, CostMeter& meter);
double conv_overlap(const ShiftedKernelSet& set, const EncodedBlock& b0, const EncodedBlock& b1,
                    const EncodedBlock& b2, const EncodedBlock& b3, const TransformSpec& spec, CostMeter& meter);

/// Sliding-window convolution over an encoded image. Each output position
/// belongs to a shift class; the ShiftedKernelSet of a class is built on
/// first use and reused. Lookups and inserts on the cache are internally
/// synchronised.
class ConvolutionProcessor {
public:
    ConvolutionProcessor(Kernel kernel, TransformSpec spec);

    /// Valid-mode response map: positions (x, y) = stride * (ox, oy) with the
    /// kernel fully inside the image.
    RealImage run(const EncodedImage& img, int stride, CostMeter& meter) const;

    const ShiftedKernelSet& kernels_for(Shift shift) const;
    std::size_t cached_shifts() const;
    const Kernel& kernel() const noexcept { return kernel_; }

private:
    Kernel kernel_;
    BlockTransform transform_;
    mutable std::shared_mutex mutex_;
    mutable std::map<Shift, std::unique_ptr<const ShiftedKernelSet>> cache_;
};

RealImage conv_image(const Kernel& c, const EncodedImage& img, int stride, CostMeter& meter);

/// Coefficients kept after discarding all but the K largest in magnitude.
struct SparseCoeffs {
    struct Entry {
        int i = 0;
        int j = 0;
        double value = 0.0;
    };
    int m = 0;
    std::vector<Entry> retained;
};

/// K largest |q_ij|; ties go to the earlier row-major position.
SparseCoeffs topk_retain(const CoeffBlock& q, int keep);

/// sum over retained entries of value * w_ij: |retained| multiplications and
/// |retained| - 1 additions.
double conv_sparse(const SparseCoeffs& s, const CoeffBlock& tc, const TransformSpec& spec, CostMeter& meter);

/// Circular convolution of an image with a kernel through the unitary 2D
/// DFT, keeping only the `keep` largest-magnitude image coefficients.
/// Sizes are zero-padded up to powers of two and the result is cropped back.
/// When a meter is given, each retained coefficient costs one (complex)
/// multiplication.
RealImage conv_fft_sparse(const RealImage& image, const Kernel& kernel, std::size_t keep,
                          CostMeter* meter = nullptr);

/// Response maps as flat big-endian binary32 with a 16-byte header:
/// "PVQR" | width u32 | height u32 | reserved u32.
std::vector<std::uint8_t> serialize_response_map(const RealImage& map);
RealImage parse_response_map(std::span<const std::uint8_t> bytes);

/// Text kernel: first line m1, then m1 rows of m1 reals.
Kernel parse_kernel(std::string_view text);
Kernel read_kernel(const std::filesystem::path& path);

}  // namespace pvq
