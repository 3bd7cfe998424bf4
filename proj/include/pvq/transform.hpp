#pragma once

// Orthonormal separable 2D block transforms (DCT-II, Walsh-Hadamard, DFT),
// coefficient weighting, the AC scan order shared by the codec and the
// convolvers, and precomputed kernel responses to the spatial basis images.

#include "pvq/error.hpp"

#include <complex>
#include <cstddef>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

namespace pvq {

enum class TransformKind { dct2, wht, dft };

std::string_view to_string(TransformKind kind);
/// Accepts "dct", "dct2", "wht", "hadamard", "dft". Throws InvalidArgument.
TransformKind parse_transform_kind(std::string_view name);

struct TransformSpec {
    TransformKind kind = TransformKind::dct2;
    int m = 8;
    bool orthonormal = true;

    bool is_real() const noexcept { return kind != TransformKind::dft; }
    /// Throws InvalidArgument: m < 2 (DCT) or m not a power of two (WHT, DFT).
    void validate() const;

    friend bool operator==(const TransformSpec&, const TransformSpec&) = default;
};

/// m x m row-major block of reals. Tag keeps pixel-domain and
/// transform-domain blocks from being mixed up.
template <typename Tag>
class SquareBlock {
public:
    SquareBlock() = default;
    explicit SquareBlock(int m, double fill = 0.0) : m_(m), values_(static_cast<std::size_t>(m) * m, fill) {}
    SquareBlock(int m, std::vector<double> values);

    int m() const noexcept { return m_; }
    double& at(int i, int j) { return values_[static_cast<std::size_t>(i) * m_ + j]; }
    double at(int i, int j) const { return values_[static_cast<std::size_t>(i) * m_ + j]; }
    std::span<double> values() noexcept { return values_; }
    std::span<const double> values() const noexcept { return values_; }

    friend bool operator==(const SquareBlock&, const SquareBlock&) = default;

private:
    int m_ = 0;
    std::vector<double> values_;
};

struct PixelTag {};
struct CoeffTag {};
struct ResponseTag {};
struct KernelTag {};

using PixelBlock = SquareBlock<PixelTag>;
using CoeffBlock = SquareBlock<CoeffTag>;
/// Entry (i, j) = <C, T^-1(U_ij)>, the kernel's response to basis image (i, j).
using BasisResponses = SquareBlock<ResponseTag>;
/// Convolution kernel (mask); its side may be smaller than the block side.
using Kernel = SquareBlock<KernelTag>;
/// Per-coefficient weights for weight_coefficients.
using WeightBlock = SquareBlock<CoeffTag>;

/// DFT coefficients as separate real and imaginary planes.
struct ComplexBlock {
    int m = 0;
    std::vector<double> re;
    std::vector<double> im;

    explicit ComplexBlock(int m = 0)
        : m(m), re(static_cast<std::size_t>(m) * m, 0.0), im(static_cast<std::size_t>(m) * m, 0.0) {}
    double magnitude(int i, int j) const;
};

/// Precomputed 1D basis for a TransformSpec; immutable after construction
/// and safe to share between threads.
class BlockTransform {
public:
    explicit BlockTransform(TransformSpec spec);

    const TransformSpec& spec() const noexcept { return spec_; }
    int m() const noexcept { return spec_.m; }

    /// Real transforms only (DCT-II, WHT).
    CoeffBlock forward(const PixelBlock& x) const;
    PixelBlock inverse(const CoeffBlock& q) const;

    /// DFT only.
    ComplexBlock forward_complex(const PixelBlock& x) const;
    ComplexBlock inverse_complex(const ComplexBlock& q) const;

    /// Row u of the 1D real basis: forward coefficient u = sum_x basis(u, x) v_x.
    double basis(int u, int x) const { return basis_[static_cast<std::size_t>(u) * spec_.m + x]; }

private:
    void require_real(const char* who) const;
    void require_size(int m, const char* who) const;

    TransformSpec spec_;
    std::vector<double> basis_;  // m x m, row-major; unused for DFT
};

CoeffBlock forward(const TransformSpec& spec, const PixelBlock& x);
PixelBlock inverse(const TransformSpec& spec, const CoeffBlock& q);

/// Elementwise product Q o W. Throws InvalidArgument for non-positive or
/// non-finite weights, or mismatched sizes.
CoeffBlock weight_coefficients(const CoeffBlock& q, const WeightBlock& weights);

/// <C, T^-1(U_ij)> for every (i, j), computed from the spatial basis images.
BasisResponses basis_responses(const Kernel& kernel, const BlockTransform& transform);

// AC scan order: row-major with (0,0) skipped, so vector position
// t = m*i + j - 1.
std::pair<int, int> scan_position(int t, int m);
int scan_index(int i, int j, int m);
std::vector<double> ac_vector(std::span<const double> block, int m);
template <typename Tag>
std::vector<double> ac_vector(const SquareBlock<Tag>& b) {
    return ac_vector(b.values(), b.m());
}
/// Q with q00 = dc and the AC positions filled from the scan-ordered vector.
CoeffBlock assemble_coefficients(int m, double dc, std::span<const double> ac);

bool is_power_of_two(std::size_t v) noexcept;

/// In-place unitary 1D DFT (radix-2, size must be a power of two). The
/// inverse uses the conjugate kernel; both scale by 1/sqrt(n).
void fft_unitary(std::span<std::complex<double>> data, bool inverse);

/// Unitary 2D DFT of a row-major width x height array, both powers of two.
void fft2d_unitary(std::vector<std::complex<double>>& data, int width, int height, bool inverse);

// ---------------------------------------------------------------------------

template <typename Tag>
SquareBlock<Tag>::SquareBlock(int m, std::vector<double> values) : m_(m), values_(std::move(values)) {
    if (m < 1 || values_.size() != static_cast<std::size_t>(m) * m) {
        throw InvalidArgument("SquareBlock: expected m*m values");
    }
}

}  // namespace pvq
