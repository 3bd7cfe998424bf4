#include "pvq/convolve.hpp"

#include "pvq/bitstream.hpp"
#include "pvq/error.hpp"
#include "pvq/pvqdot.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <mutex>
#include <numeric>
#include <sstream>
#include <string>

namespace pvq {

namespace {

// DC term plus PVQ dot product of the block's AC point against the
// scan-ordered AC entries of `coeffs` (m x m, row-major).
double compressed_response(std::span<const double> coeffs, int m, const EncodedBlock& b, CostMeter& meter) {
    if (b.point.n() != m * m - 1) {
        throw InvalidArgument("convolution: block has " + std::to_string(b.point.n()) +
                              " AC components, kernel side implies " + std::to_string(m * m - 1));
    }
    const double dc_term = b.dc * coeffs[0];
    meter.mul();
    if (b.radius == 0.0) return dc_term;
    const double ac_term = pvq_dot(b.radius, b.point, coeffs.subspan(1), meter);
    meter.add();
    return dc_term + ac_term;
}

void require_orthonormal_real(const TransformSpec& spec, const char* who) {
    spec.validate();
    if (!spec.orthonormal || !spec.is_real()) {
        throw InvalidArgument(std::string(who) + ": requires an orthonormal real transform (dct or wht)");
    }
}

}  // namespace

Kernel zero_extend(const Kernel& c, int m) {
    if (c.m() < 1 || c.m() > m) {
        throw InvalidArgument("zero_extend: kernel side " + std::to_string(c.m()) + " exceeds block side " +
                              std::to_string(m));
    }
    Kernel out(m);
    for (int i = 0; i < c.m(); ++i)
        for (int j = 0; j < c.m(); ++j) out.at(i, j) = c.at(i, j);
    return out;
}

double conv_direct(const Kernel& c, const PixelBlock& x) {
    if (c.m() > x.m()) throw InvalidArgument("conv_direct: kernel larger than block");
    double s = 0.0;
    for (int i = 0; i < c.m(); ++i)
        for (int j = 0; j < c.m(); ++j) s += c.at(i, j) * x.at(i, j);
    return s;
}

double conv_pvq_basis(const BasisResponses& responses, const EncodedBlock& b, CostMeter& meter) {
    return compressed_response(responses.values(), responses.m(), b, meter);
}

double conv_pvq_transform(const CoeffBlock& tc, const EncodedBlock& b, const TransformSpec& spec, CostMeter& meter) {
    require_orthonormal_real(spec, "conv_pvq_transform");
    if (tc.m() != spec.m) throw InvalidArgument("conv_pvq_transform: transformed kernel side does not match spec");
    return compressed_response(tc.values(), tc.m(), b, meter);
}

CoeffBlock transformed_kernel(const Kernel& c, const BlockTransform& transform) {
    const Kernel ext = zero_extend(c, transform.m());
    return transform.forward(PixelBlock(ext.m(), {ext.values().begin(), ext.values().end()}));
}

ShiftedKernelSet make_shifted_kernels(const Kernel& c, Shift shift, const BlockTransform& transform) {
    const int m = transform.m();
    const int m1 = c.m();
    if (shift.x < 0 || shift.y < 0 || shift.x >= m || shift.y >= m) {
        throw InvalidArgument("make_shifted_kernels: shift outside [0, m)");
    }
    if (shift.x + m1 > 2 * m || shift.y + m1 > 2 * m) {
        throw InvalidArgument("make_shifted_kernels: kernel of side " + std::to_string(m1) + " at shift (" +
                              std::to_string(shift.x) + ", " + std::to_string(shift.y) +
                              ") overlaps more than four blocks");
    }
    ShiftedKernelSet set;
    set.shift = shift;
    set.m = m;
    for (int q = 0; q < 4; ++q) {
        const int ox = (q % 2) * m;  // quadrant origin in the 2m x 2m neighbourhood
        const int oy = (q / 2) * m;
        Kernel part(m);
        bool any = false;
        for (int i = 0; i < m; ++i) {
            const int ki = oy + i - shift.y;
            if (ki < 0 || ki >= m1) continue;
            for (int j = 0; j < m; ++j) {
                const int kj = ox + j - shift.x;
                if (kj < 0 || kj >= m1) continue;
                part.at(i, j) = c.at(ki, kj);
                any = true;
            }
        }
        set.active[q] = any;
        set.transformed[q] = transformed_kernel(part, transform);
        set.spatial[q] = std::move(part);
    }
    return set;
}

double conv_overlap(const ShiftedKernelSet& set, const std::array<const EncodedBlock*, 4>& blocks,
                    const TransformSpec& spec, CostMeter& meter) {
    if (spec.m != set.m) throw InvalidArgument("conv_overlap: kernel set and spec disagree on block side");
    double sum = 0.0;
    bool first = true;
    for (int q = 0; q < 4; ++q) {
        if (!set.active[q]) continue;
        if (!blocks[q]) throw InvalidArgument("conv_overlap: missing block for an active sub-kernel");
        const double v = conv_pvq_transform(set.transformed[q], *blocks[q], spec, meter);
        if (first) {
            sum = v;
            first = false;
        } else {
            sum += v;
            meter.add();
        }
    }
    return sum;
}

double conv_overlap(const ShiftedKernelSet& set, const EncodedBlock& b0, const EncodedBlock& b1,
                    const EncodedBlock& b2, const EncodedBlock& b3, const TransformSpec& spec, CostMeter& meter) {
    return conv_overlap(set, {&b0, &b1, &b2, &b3}, spec, meter);
}

ConvolutionProcessor::ConvolutionProcessor(Kernel kernel, TransformSpec spec)
    : kernel_(std::move(kernel)), transform_(spec) {
    require_orthonormal_real(spec, "ConvolutionProcessor");
    if (kernel_.m() < 1 || kernel_.m() > 2 * spec.m) {
        throw InvalidArgument("ConvolutionProcessor: kernel side must be in [1, 2m]");
    }
}

const ShiftedKernelSet& ConvolutionProcessor::kernels_for(Shift shift) const {
    {
        std::shared_lock lock(mutex_);
        if (auto it = cache_.find(shift); it != cache_.end()) return *it->second;
    }
    auto built = std::make_unique<const ShiftedKernelSet>(make_shifted_kernels(kernel_, shift, transform_));
    std::unique_lock lock(mutex_);
    auto [it, inserted] = cache_.try_emplace(shift, std::move(built));
    return *it->second;
}

std::size_t ConvolutionProcessor::cached_shifts() const {
    std::shared_lock lock(mutex_);
    return cache_.size();
}

RealImage ConvolutionProcessor::run(const EncodedImage& img, int stride, CostMeter& meter) const {
    const TransformSpec& spec = transform_.spec();
    if (stride < 1) throw InvalidArgument("conv_image: stride must be >= 1");
    if (img.params.m != spec.m || img.params.transform != spec.kind) {
        throw InvalidArgument("conv_image: encoded image uses a different transform or block size");
    }
    const int m = spec.m;
    const int m1 = kernel_.m();
    if (img.width < m1 || img.height < m1) throw InvalidArgument("conv_image: kernel larger than image");
    const int out_w = (img.width - m1) / stride + 1;
    const int out_h = (img.height - m1) / stride + 1;
    RealImage out(out_w, out_h);
    for (int oy = 0; oy < out_h; ++oy) {
        for (int ox = 0; ox < out_w; ++ox) {
            const int px = ox * stride;
            const int py = oy * stride;
            const int bx = px / m;
            const int by = py / m;
            const ShiftedKernelSet& set = kernels_for(Shift{px % m, py % m});
            std::array<const EncodedBlock*, 4> blocks{};
            for (int q = 0; q < 4; ++q) {
                if (set.active[q]) blocks[q] = &img.block(bx + q % 2, by + q / 2);
            }
            out.at(ox, oy) = conv_overlap(set, blocks, spec, meter);
        }
    }
    return out;
}

RealImage conv_image(const Kernel& c, const EncodedImage& img, int stride, CostMeter& meter) {
    return ConvolutionProcessor(c, img.params.spec()).run(img, stride, meter);
}

SparseCoeffs topk_retain(const CoeffBlock& q, int keep) {
    const int m = q.m();
    if (keep < 1 || keep > m * m) {
        throw InvalidArgument("topk_retain: K must be in [1, " + std::to_string(m * m) + "]");
    }
    std::vector<int> order(static_cast<std::size_t>(m) * m);
    std::iota(order.begin(), order.end(), 0);
    auto v = q.values();
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return std::abs(v[a]) > std::abs(v[b]); });
    SparseCoeffs out;
    out.m = m;
    order.resize(static_cast<std::size_t>(keep));
    std::sort(order.begin(), order.end());
    for (int idx : order) out.retained.push_back({idx / m, idx % m, v[idx]});
    return out;
}

double conv_sparse(const SparseCoeffs& s, const CoeffBlock& tc, const TransformSpec& spec, CostMeter& meter) {
    require_orthonormal_real(spec, "conv_sparse");
    if (s.m != spec.m || tc.m() != spec.m) throw InvalidArgument("conv_sparse: block side mismatch");
    double sum = 0.0;
    bool first = true;
    for (const auto& e : s.retained) {
        const double p = e.value * tc.at(e.i, e.j);
        meter.mul();
        if (first) {
            sum = p;
            first = false;
        } else {
            sum += p;
            meter.add();
        }
    }
    return sum;
}

RealImage conv_fft_sparse(const RealImage& image, const Kernel& kernel, std::size_t keep, CostMeter* meter) {
    if (image.width < 1 || image.height < 1) throw InvalidArgument("conv_fft_sparse: empty image");
    const int w = static_cast<int>(std::bit_ceil(static_cast<unsigned>(image.width)));
    const int h = static_cast<int>(std::bit_ceil(static_cast<unsigned>(image.height)));
    if (kernel.m() > w || kernel.m() > h) throw InvalidArgument("conv_fft_sparse: kernel larger than image");
    const std::size_t total = static_cast<std::size_t>(w) * h;

    std::vector<std::complex<double>> spectrum(total);
    for (int y = 0; y < image.height; ++y)
        for (int x = 0; x < image.width; ++x) spectrum[static_cast<std::size_t>(y) * w + x] = image.at(x, y);
    fft2d_unitary(spectrum, w, h, false);

    std::vector<std::complex<double>> kspec(total);
    for (int i = 0; i < kernel.m(); ++i)
        for (int j = 0; j < kernel.m(); ++j) kspec[static_cast<std::size_t>(i) * w + j] = kernel.at(i, j);
    fft2d_unitary(kspec, w, h, false);
    // Unitary scaling: DFT(C conv I) = sqrt(w h) DFT(C) DFT(I); fold the
    // factor into the kernel spectrum, which is computed once per kernel.
    const double gain = std::sqrt(static_cast<double>(total));
    for (auto& v : kspec) v *= gain;

    keep = std::min(keep, total);
    std::vector<std::size_t> order(total);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return std::abs(spectrum[a]) > std::abs(spectrum[b]); });
    std::vector<std::complex<double>> product(total);
    for (std::size_t r = 0; r < keep; ++r) {
        const std::size_t idx = order[r];
        product[idx] = spectrum[idx] * kspec[idx];
    }
    if (meter) meter->mul(keep);
    fft2d_unitary(product, w, h, true);

    RealImage out(image.width, image.height);
    for (int y = 0; y < image.height; ++y)
        for (int x = 0; x < image.width; ++x) out.at(x, y) = product[static_cast<std::size_t>(y) * w + x].real();
    return out;
}

std::vector<std::uint8_t> serialize_response_map(const RealImage& map) {
    BitWriter w;
    for (char c : {'P', 'V', 'Q', 'R'}) w.write_u8(static_cast<std::uint8_t>(c));
    w.write_u32(static_cast<std::uint32_t>(map.width));
    w.write_u32(static_cast<std::uint32_t>(map.height));
    w.write_u32(0);
    for (double v : map.values) w.write_u32(std::bit_cast<std::uint32_t>(static_cast<float>(v)));
    return std::move(w).take();
}

RealImage parse_response_map(std::span<const std::uint8_t> bytes) {
    using Kind = FormatError::Kind;
    if (bytes.size() < 4 || bytes[0] != 'P' || bytes[1] != 'V' || bytes[2] != 'Q' || bytes[3] != 'R') {
        throw FormatError(Kind::bad_magic, "response map: bad magic (expected PVQR)");
    }
    BitReader r(bytes);
    r.read(32);
    const std::uint32_t width = r.read_u32();
    const std::uint32_t height = r.read_u32();
    r.read_u32();
    if (width > 0x7FFFFFFFU || height > 0x7FFFFFFFU) throw FormatError(Kind::bad_header, "response map: bad size");
    const std::uint64_t count = std::uint64_t{width} * height;
    if (bytes.size() != 16 + count * 4) throw FormatError(Kind::truncated, "response map: size does not match header");
    RealImage out(static_cast<int>(width), static_cast<int>(height));
    for (auto& v : out.values) v = std::bit_cast<float>(r.read_u32());
    return out;
}

Kernel parse_kernel(std::string_view text) {
    using Kind = FormatError::Kind;
    std::istringstream in{std::string(text)};
    int m1 = 0;
    if (!(in >> m1) || m1 < 1 || m1 > 4096) throw FormatError(Kind::bad_header, "kernel: first line must be the side m1 >= 1");
    Kernel k(m1);
    for (auto& v : k.values()) {
        if (!(in >> v) || !std::isfinite(v)) {
            throw FormatError(Kind::bad_value, "kernel: expected " + std::to_string(m1 * m1) + " finite reals");
        }
    }
    std::string extra;
    if (in >> extra) throw FormatError(Kind::bad_value, "kernel: trailing data after " + std::to_string(m1) + " rows");
    return k;
}

Kernel read_kernel(const std::filesystem::path& path) {
    const auto bytes = read_file(path);
    return parse_kernel(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

}  // namespace pvq
