#include "pvq/transform.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <string>

namespace pvq {

std::string_view to_string(TransformKind kind) {
    switch (kind) {
        case TransformKind::dct2: return "dct";
        case TransformKind::wht: return "wht";
        case TransformKind::dft: return "dft";
    }
    return "?";
}

TransformKind parse_transform_kind(std::string_view name) {
    if (name == "dct" || name == "dct2") return TransformKind::dct2;
    if (name == "wht" || name == "hadamard") return TransformKind::wht;
    if (name == "dft") return TransformKind::dft;
    throw InvalidArgument("unknown transform '" + std::string(name) + "' (expected dct, wht or dft)");
}

bool is_power_of_two(std::size_t v) noexcept { return v != 0 && std::has_single_bit(v); }

void TransformSpec::validate() const {
    if (kind == TransformKind::dct2) {
        if (m < 2) throw InvalidArgument("DCT block side must be >= 2, got " + std::to_string(m));
    } else if (m < 1 || !is_power_of_two(static_cast<std::size_t>(m))) {
        throw InvalidArgument(std::string(to_string(kind)) + " block side must be a power of two, got " +
                              std::to_string(m));
    }
}

double ComplexBlock::magnitude(int i, int j) const {
    const auto idx = static_cast<std::size_t>(i) * m + j;
    return std::hypot(re[idx], im[idx]);
}

BlockTransform::BlockTransform(TransformSpec spec) : spec_(spec) {
    spec_.validate();
    const int m = spec_.m;
    if (spec_.kind == TransformKind::dft) return;
    basis_.resize(static_cast<std::size_t>(m) * m);
    for (int u = 0; u < m; ++u) {
        for (int x = 0; x < m; ++x) {
            double v = 0.0;
            if (spec_.kind == TransformKind::dct2) {
                const double c = u == 0 ? std::sqrt(1.0 / m) : std::sqrt(2.0 / m);
                v = c * std::cos(std::numbers::pi * (2 * x + 1) * u / (2.0 * m));
            } else {
                v = (std::popcount(static_cast<unsigned>(u & x)) % 2 ? -1.0 : 1.0) / std::sqrt(static_cast<double>(m));
            }
            basis_[static_cast<std::size_t>(u) * m + x] = v;
        }
    }
}

void BlockTransform::require_real(const char* who) const {
    if (!spec_.is_real()) throw InvalidArgument(std::string(who) + ": requires a real transform (dct or wht)");
}

void BlockTransform::require_size(int m, const char* who) const {
    if (m != spec_.m) {
        throw InvalidArgument(std::string(who) + ": block side " + std::to_string(m) + " does not match transform side " +
                              std::to_string(spec_.m));
    }
}

// Q = A X A^T
CoeffBlock BlockTransform::forward(const PixelBlock& x) const {
    require_real("forward");
    require_size(x.m(), "forward");
    const int m = spec_.m;
    PixelBlock tmp(m);  // tmp = X A^T (rows transformed)
    for (int r = 0; r < m; ++r)
        for (int v = 0; v < m; ++v) {
            double s = 0.0;
            for (int y = 0; y < m; ++y) s += x.at(r, y) * basis(v, y);
            tmp.at(r, v) = s;
        }
    CoeffBlock q(m);
    for (int u = 0; u < m; ++u)
        for (int v = 0; v < m; ++v) {
            double s = 0.0;
            for (int r = 0; r < m; ++r) s += basis(u, r) * tmp.at(r, v);
            q.at(u, v) = s;
        }
    return q;
}

// X = A^T Q A
PixelBlock BlockTransform::inverse(const CoeffBlock& q) const {
    require_real("inverse");
    require_size(q.m(), "inverse");
    const int m = spec_.m;
    CoeffBlock tmp(m);  // tmp = Q A
    for (int u = 0; u < m; ++u)
        for (int y = 0; y < m; ++y) {
            double s = 0.0;
            for (int v = 0; v < m; ++v) s += q.at(u, v) * basis(v, y);
            tmp.at(u, y) = s;
        }
    PixelBlock x(m);
    for (int r = 0; r < m; ++r)
        for (int y = 0; y < m; ++y) {
            double s = 0.0;
            for (int u = 0; u < m; ++u) s += basis(u, r) * tmp.at(u, y);
            x.at(r, y) = s;
        }
    return x;
}

namespace {

ComplexBlock dft2d(const ComplexBlock& in, bool inverse) {
    std::vector<std::complex<double>> data(in.re.size());
    for (std::size_t i = 0; i < data.size(); ++i) data[i] = {in.re[i], in.im[i]};
    fft2d_unitary(data, in.m, in.m, inverse);
    ComplexBlock out(in.m);
    for (std::size_t i = 0; i < data.size(); ++i) {
        out.re[i] = data[i].real();
        out.im[i] = data[i].imag();
    }
    return out;
}

}  // namespace

ComplexBlock BlockTransform::forward_complex(const PixelBlock& x) const {
    if (spec_.kind != TransformKind::dft) throw InvalidArgument("forward_complex: requires the dft transform");
    require_size(x.m(), "forward_complex");
    ComplexBlock in(x.m());
    std::copy(x.values().begin(), x.values().end(), in.re.begin());
    return dft2d(in, false);
}

ComplexBlock BlockTransform::inverse_complex(const ComplexBlock& q) const {
    if (spec_.kind != TransformKind::dft) throw InvalidArgument("inverse_complex: requires the dft transform");
    require_size(q.m, "inverse_complex");
    return dft2d(q, true);
}

CoeffBlock forward(const TransformSpec& spec, const PixelBlock& x) { return BlockTransform(spec).forward(x); }

PixelBlock inverse(const TransformSpec& spec, const CoeffBlock& q) { return BlockTransform(spec).inverse(q); }

CoeffBlock weight_coefficients(const CoeffBlock& q, const WeightBlock& weights) {
    if (q.m() != weights.m()) throw InvalidArgument("weight_coefficients: size mismatch");
    CoeffBlock out = q;
    auto w = weights.values();
    auto v = out.values();
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!std::isfinite(w[i]) || w[i] <= 0.0) {
            throw InvalidArgument("weight_coefficients: weights must be positive and finite");
        }
        v[i] *= w[i];
    }
    return out;
}

BasisResponses basis_responses(const Kernel& kernel, const BlockTransform& transform) {
    const int m = transform.m();
    if (kernel.m() != m) {
        throw InvalidArgument("basis_responses: kernel side " + std::to_string(kernel.m()) +
                              " does not match transform side " + std::to_string(m));
    }
    BasisResponses out(m);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) {
            CoeffBlock unit(m);
            unit.at(i, j) = 1.0;
            const PixelBlock image = transform.inverse(unit);
            double s = 0.0;
            for (std::size_t p = 0; p < image.values().size(); ++p) s += kernel.values()[p] * image.values()[p];
            out.at(i, j) = s;
        }
    return out;
}

std::pair<int, int> scan_position(int t, int m) {
    if (t < 0 || t >= m * m - 1) throw InvalidArgument("scan_position: index out of range");
    return {(t + 1) / m, (t + 1) % m};
}

int scan_index(int i, int j, int m) {
    if (i < 0 || j < 0 || i >= m || j >= m || (i == 0 && j == 0)) {
        throw InvalidArgument("scan_index: not an AC position");
    }
    return m * i + j - 1;
}

std::vector<double> ac_vector(std::span<const double> block, int m) {
    if (block.size() != static_cast<std::size_t>(m) * m) throw InvalidArgument("ac_vector: expected m*m values");
    return {block.begin() + 1, block.end()};
}

CoeffBlock assemble_coefficients(int m, double dc, std::span<const double> ac) {
    if (ac.size() != static_cast<std::size_t>(m) * m - 1) {
        throw InvalidArgument("assemble_coefficients: expected m*m - 1 AC values");
    }
    CoeffBlock q(m);
    q.values()[0] = dc;
    std::copy(ac.begin(), ac.end(), q.values().begin() + 1);
    return q;
}

void fft_unitary(std::span<std::complex<double>> data, bool inverse) {
    const std::size_t n = data.size();
    if (!is_power_of_two(n)) throw InvalidArgument("fft: size must be a power of two");
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(data[i], data[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double angle = 2.0 * std::numbers::pi / static_cast<double>(len) * (inverse ? 1.0 : -1.0);
        for (std::size_t start = 0; start < n; start += len) {
            for (std::size_t k = 0; k < len / 2; ++k) {
                const std::complex<double> w = std::polar(1.0, angle * static_cast<double>(k));
                const auto a = data[start + k];
                const auto b = data[start + k + len / 2] * w;
                data[start + k] = a + b;
                data[start + k + len / 2] = a - b;
            }
        }
    }
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));
    for (auto& v : data) v *= scale;
}

void fft2d_unitary(std::vector<std::complex<double>>& data, int width, int height, bool inverse) {
    if (width < 1 || height < 1 || data.size() != static_cast<std::size_t>(width) * height) {
        throw InvalidArgument("fft2d: size mismatch");
    }
    for (int r = 0; r < height; ++r) {
        fft_unitary(std::span(data).subspan(static_cast<std::size_t>(r) * width, width), inverse);
    }
    std::vector<std::complex<double>> column(static_cast<std::size_t>(height));
    for (int c = 0; c < width; ++c) {
        for (int r = 0; r < height; ++r) column[r] = data[static_cast<std::size_t>(r) * width + c];
        fft_unitary(column, inverse);
        for (int r = 0; r < height; ++r) data[static_cast<std::size_t>(r) * width + c] = column[r];
    }
}

}  // namespace pvq
