#include "pvq/image.hpp"

#include "pvq/error.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iterator>
#include <limits>
#include <string>

namespace pvq {

GrayImage::GrayImage(int w, int h, std::uint8_t fill)
    : width(w), height(h), pixels(static_cast<std::size_t>(w) * h, fill) {
    if (w < 0 || h < 0) throw InvalidArgument("GrayImage: negative size");
}

RealImage::RealImage(int w, int h, double fill)
    : width(w), height(h), values(static_cast<std::size_t>(w) * h, fill) {
    if (w < 0 || h < 0) throw InvalidArgument("RealImage: negative size");
}

RealImage to_real(const GrayImage& img) {
    RealImage out(img.width, img.height);
    std::copy(img.pixels.begin(), img.pixels.end(), out.values.begin());
    return out;
}

GrayImage to_gray(const RealImage& img) {
    GrayImage out(img.width, img.height);
    for (std::size_t i = 0; i < img.values.size(); ++i) {
        out.pixels[i] = static_cast<std::uint8_t>(std::clamp(std::round(img.values[i]), 0.0, 255.0));
    }
    return out;
}

GrayImage normalize_to_gray(const RealImage& img) {
    GrayImage out(img.width, img.height);
    if (img.values.empty()) return out;
    const auto [lo, hi] = std::minmax_element(img.values.begin(), img.values.end());
    const double range = *hi - *lo;
    if (range <= 0.0) return out;
    for (std::size_t i = 0; i < img.values.size(); ++i) {
        out.pixels[i] = static_cast<std::uint8_t>(std::round((img.values[i] - *lo) / range * 255.0));
    }
    return out;
}

namespace {

class PgmHeaderReader {
public:
    explicit PgmHeaderReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

    int next_int() {
        skip_space_and_comments();
        if (pos_ >= bytes_.size() || !std::isdigit(bytes_[pos_])) {
            throw FormatError(FormatError::Kind::bad_header, "PGM: expected an integer in header");
        }
        long value = 0;
        while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
            value = value * 10 + (bytes_[pos_++] - '0');
            if (value > std::numeric_limits<int>::max()) {
                throw FormatError(FormatError::Kind::bad_header, "PGM: header value too large");
            }
        }
        return static_cast<int>(value);
    }

    // Exactly one whitespace byte separates maxval from the raster.
    std::size_t raster_offset() {
        if (pos_ >= bytes_.size() || !std::isspace(bytes_[pos_])) {
            throw FormatError(FormatError::Kind::bad_header, "PGM: missing separator before raster");
        }
        return pos_ + 1;
    }

private:
    void skip_space_and_comments() {
        while (pos_ < bytes_.size()) {
            if (std::isspace(bytes_[pos_])) {
                ++pos_;
            } else if (bytes_[pos_] == '#') {
                while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
            } else {
                break;
            }
        }
    }

    std::span<const std::uint8_t> bytes_;
    std::size_t pos_ = 2;
};

}  // namespace

GrayImage parse_pgm(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '5') {
        throw FormatError(FormatError::Kind::bad_magic, "PGM: expected binary P5 magic");
    }
    PgmHeaderReader reader(bytes);
    const int width = reader.next_int();
    const int height = reader.next_int();
    const int maxval = reader.next_int();
    if (width <= 0 || height <= 0) throw FormatError(FormatError::Kind::bad_header, "PGM: zero-sized image");
    if (maxval != 255) throw FormatError(FormatError::Kind::bad_header, "PGM: only 8-bit (maxval 255) supported");
    const std::size_t offset = reader.raster_offset();
    const std::size_t count = static_cast<std::size_t>(width) * height;
    if (bytes.size() < offset + count) throw FormatError(FormatError::Kind::truncated, "PGM: truncated raster");
    GrayImage img(width, height);
    std::copy_n(bytes.begin() + static_cast<std::ptrdiff_t>(offset), count, img.pixels.begin());
    return img;
}

std::vector<std::uint8_t> serialize_pgm(const GrayImage& img) {
    const std::string header = "P5\n" + std::to_string(img.width) + " " + std::to_string(img.height) + "\n255\n";
    std::vector<std::uint8_t> out(header.begin(), header.end());
    out.insert(out.end(), img.pixels.begin(), img.pixels.end());
    return out;
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError(FormatError::Kind::io, "cannot open '" + path.string() + "' for reading");
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError(FormatError::Kind::io, "cannot open '" + path.string() + "' for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw FormatError(FormatError::Kind::io, "write to '" + path.string() + "' failed");
}

GrayImage read_pgm(const std::filesystem::path& path) { return parse_pgm(read_file(path)); }

void write_pgm(const std::filesystem::path& path, const GrayImage& img) { write_file(path, serialize_pgm(img)); }

double mse(const RealImage& a, const RealImage& b) {
    if (a.width != b.width || a.height != b.height) throw InvalidArgument("mse: image sizes differ");
    if (a.values.empty()) throw InvalidArgument("mse: empty images");
    double s = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i) {
        const double d = a.values[i] - b.values[i];
        s += d * d;
    }
    return s / static_cast<double>(a.values.size());
}

double mse(const GrayImage& a, const GrayImage& b) { return mse(to_real(a), to_real(b)); }

double psnr(const RealImage& a, const RealImage& b) {
    const double e = mse(a, b);
    if (e == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(255.0 * 255.0 / e);
}

double psnr(const GrayImage& a, const GrayImage& b) { return psnr(to_real(a), to_real(b)); }

}  // namespace pvq
