#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace pvq {

/// 8-bit grayscale raster, row-major.
struct GrayImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> pixels;

    GrayImage() = default;
    GrayImage(int w, int h, std::uint8_t fill = 0);

    std::uint8_t& at(int x, int y) { return pixels[static_cast<std::size_t>(y) * width + x]; }
    std::uint8_t at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * width + x]; }

    friend bool operator==(const GrayImage&, const GrayImage&) = default;
};

/// Real-valued raster, row-major. Used for reconstructions before rounding
/// and for convolution response maps.
struct RealImage {
    int width = 0;
    int height = 0;
    std::vector<double> values;

    RealImage() = default;
    RealImage(int w, int h, double fill = 0.0);

    double& at(int x, int y) { return values[static_cast<std::size_t>(y) * width + x]; }
    double at(int x, int y) const { return values[static_cast<std::size_t>(y) * width + x]; }
};

RealImage to_real(const GrayImage& img);
/// Rounds to nearest and clamps to [0, 255].
GrayImage to_gray(const RealImage& img);
/// Linearly maps [min, max] onto [0, 255]; a constant image maps to 0.
GrayImage normalize_to_gray(const RealImage& img);

/// Binary PGM (P5, maxval 255). Throws FormatError.
GrayImage parse_pgm(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> serialize_pgm(const GrayImage& img);
GrayImage read_pgm(const std::filesystem::path& path);
void write_pgm(const std::filesystem::path& path, const GrayImage& img);

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

double mse(const RealImage& a, const RealImage& b);
double mse(const GrayImage& a, const GrayImage& b);
/// 10 log10(255^2 / MSE); +inf for identical images.
double psnr(const GrayImage& a, const GrayImage& b);
double psnr(const RealImage& a, const RealImage& b);

}  // namespace pvq
