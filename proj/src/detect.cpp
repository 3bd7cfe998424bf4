#include "pvq/detect.hpp"

#include "pvq/error.hpp"
#include "pvq/pvqdot.hpp"
#include "text_util.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace pvq {

CellGrid hog_cells(const RealImage& image, int cell_size) {
    if (cell_size < 1) throw InvalidArgument("hog_cells: cell size must be >= 1");
    if (image.width < cell_size || image.height < cell_size) {
        throw InvalidArgument("hog_cells: image smaller than one cell");
    }
    CellGrid grid;
    grid.cells_w = image.width / cell_size;
    grid.cells_h = image.height / cell_size;
    grid.bins.assign(static_cast<std::size_t>(grid.cells_w) * grid.cells_h * kHogBins, 0.0);

    auto px = [&](int x, int y) {
        return image.at(std::clamp(x, 0, image.width - 1), std::clamp(y, 0, image.height - 1));
    };
    const int used_w = grid.cells_w * cell_size;
    const int used_h = grid.cells_h * cell_size;
    constexpr double kBinWidth = 180.0 / kHogBins;
    for (int y = 0; y < used_h; ++y) {
        for (int x = 0; x < used_w; ++x) {
            const double gx = px(x + 1, y) - px(x - 1, y);
            const double gy = px(x, y + 1) - px(x, y - 1);
            const double mag = std::hypot(gx, gy);
            if (mag == 0.0) continue;
            double angle = std::atan2(gy, gx) * 180.0 / std::numbers::pi;
            angle = std::fmod(angle + 360.0, 180.0);
            const double pos = angle / kBinWidth - 0.5;
            const double lo = std::floor(pos);
            const double frac = pos - lo;
            const int b0 = (static_cast<int>(lo) % kHogBins + kHogBins) % kHogBins;
            const int b1 = (b0 + 1) % kHogBins;
            const std::size_t base =
                (static_cast<std::size_t>(y / cell_size) * grid.cells_w + static_cast<std::size_t>(x / cell_size)) *
                kHogBins;
            grid.bins[base + b0] += (1.0 - frac) * mag;
            grid.bins[base + b1] += frac * mag;
        }
    }
    return grid;
}

CellGrid hog_cells(const GrayImage& image, int cell_size) { return hog_cells(to_real(image), cell_size); }

PvqFeatureGrid pvq_features(const CellGrid& cells, int k) {
    if (cells.cells_w < 2 || cells.cells_h < 2) throw InvalidArgument("pvq_features: need at least 2x2 cells");
    if (k < 1) throw InvalidArgument("pvq_features: k must be >= 1");
    PvqFeatureGrid out;
    out.feats_w = cells.cells_w - 1;
    out.feats_h = cells.cells_h - 1;
    out.k = k;
    out.features.reserve(static_cast<std::size_t>(out.feats_w) * out.feats_h);
    std::vector<double> v(kFeatureDims);
    for (int fy = 0; fy < out.feats_h; ++fy) {
        for (int fx = 0; fx < out.feats_w; ++fx) {
            for (int c = 0; c < 4; ++c) {
                const auto cell = cells.cell(fx + c % 2, fy + c / 2);
                std::copy(cell.begin(), cell.end(), v.begin() + c * kHogBins);
            }
            out.features.push_back(encode(v, k));
        }
    }
    return out;
}

void LinearSvm::validate() const {
    if (window_w < 1 || window_h < 1 || dims < 1) throw InvalidArgument("LinearSvm: window and dims must be >= 1");
    if (weights.size() != static_cast<std::size_t>(window_w) * window_h * dims) {
        throw InvalidArgument("LinearSvm: expected " + std::to_string(window_w * window_h * dims) + " weights, got " +
                              std::to_string(weights.size()));
    }
    if (!std::isfinite(bias)) throw InvalidArgument("LinearSvm: non-finite bias");
}

double svm_window_score(const PvqFeatureGrid& feats, int row, int col, const LinearSvm& model, CostMeter& meter) {
    model.validate();
    if (row < 0 || col < 0 || row + model.window_h > feats.feats_h || col + model.window_w > feats.feats_w) {
        throw InvalidArgument("svm_window_score: window at (" + std::to_string(row) + ", " + std::to_string(col) +
                              ") does not fit the feature grid");
    }
    double sum = 0.0;
    bool first = true;
    for (int i = 0; i < model.window_h; ++i) {
        for (int j = 0; j < model.window_w; ++j) {
            const PvqPoint& f = feats.at(col + j, row + i);
            if (f.is_zero()) continue;
            if (f.n() != model.dims) throw InvalidArgument("svm_window_score: feature dimension does not match model");
            const double term = pvq_dot(1.0, f, model.weights_at(i, j), meter);
            if (first) {
                sum = term;
                first = false;
            } else {
                sum += term;
                meter.add();
            }
        }
    }
    if (first) return model.bias;
    meter.add();
    return sum + model.bias;
}

bool decide(double score) { return score > 0.0; }

std::vector<Detection> slide_detect(const PvqFeatureGrid& feats, const LinearSvm& model, int step, CostMeter* meter) {
    model.validate();
    if (step < 1) throw InvalidArgument("slide_detect: step must be >= 1");
    if (feats.feats_w < model.window_w || feats.feats_h < model.window_h) {
        throw InvalidArgument("slide_detect: feature grid smaller than the window");
    }
    CostMeter local;
    std::vector<Detection> out;
    for (int row = 0; row + model.window_h <= feats.feats_h; row += step) {
        for (int col = 0; col + model.window_w <= feats.feats_w; col += step) {
            const double s = svm_window_score(feats, row, col, model, meter ? *meter : local);
            if (decide(s)) out.push_back({row, col, s});
        }
    }
    std::stable_sort(out.begin(), out.end(), [](const Detection& a, const Detection& b) { return a.score > b.score; });
    return out;
}

LinearSvm parse_model(std::string_view text) {
    using Kind = FormatError::Kind;
    std::istringstream in{std::string(text)};
    LinearSvm m;
    if (!(in >> m.window_w >> m.window_h >> m.dims >> m.bias)) {
        throw FormatError(Kind::bad_header, "model: expected header 'window_w window_h dims bias'");
    }
    if (m.window_w < 1 || m.window_h < 1 || m.dims < 1 || m.window_w > 4096 || m.window_h > 4096 || m.dims > 4096) {
        throw FormatError(Kind::bad_header, "model: window and dims must be in [1, 4096]");
    }
    m.weights.resize(static_cast<std::size_t>(m.window_w) * m.window_h * m.dims);
    for (auto& w : m.weights) {
        if (!(in >> w) || !std::isfinite(w)) {
            throw FormatError(Kind::truncated, "model: expected " + std::to_string(m.weights.size()) + " finite weights");
        }
    }
    std::string extra;
    if (in >> extra) throw FormatError(Kind::bad_value, "model: trailing data after weights");
    if (!std::isfinite(m.bias)) throw FormatError(Kind::bad_value, "model: non-finite bias");
    return m;
}

LinearSvm read_model(const std::filesystem::path& path) {
    const auto bytes = read_file(path);
    return parse_model(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

std::string format_model(const LinearSvm& model) {
    model.validate();
    std::string out = std::to_string(model.window_w) + " " + std::to_string(model.window_h) + " " +
                      std::to_string(model.dims) + " " + detail::format_real(model.bias) + "\n";
    for (std::size_t i = 0; i < model.weights.size(); ++i) {
        out += detail::format_real(model.weights[i]);
        out += (i + 1) % static_cast<std::size_t>(model.dims) == 0 ? '\n' : ' ';
    }
    return out;
}

std::string format_features(const PvqFeatureGrid& feats) {
    const int dims = feats.features.empty() ? kFeatureDims : feats.features.front().n();
    std::string out = "PVQF " + std::to_string(feats.feats_w) + " " + std::to_string(feats.feats_h) + " " +
                      std::to_string(feats.k) + " " + std::to_string(dims) + "\n";
    for (const auto& f : feats.features) {
        for (int i = 0; i < f.n(); ++i) {
            if (i) out += ' ';
            out += std::to_string(f[i]);
        }
        out += '\n';
    }
    return out;
}

PvqFeatureGrid parse_features(std::string_view text) {
    using Kind = FormatError::Kind;
    std::istringstream in{std::string(text)};
    std::string magic;
    PvqFeatureGrid g;
    int dims = 0;
    if (!(in >> magic) || magic != "PVQF") throw FormatError(Kind::bad_magic, "features: expected PVQF header");
    if (!(in >> g.feats_w >> g.feats_h >> g.k >> dims) || g.feats_w < 1 || g.feats_h < 1 || g.k < 1 || dims < 1 ||
        g.feats_w > 1 << 16 || g.feats_h > 1 << 16 || dims > 4096) {
        throw FormatError(Kind::bad_header, "features: bad header");
    }
    const std::size_t count = static_cast<std::size_t>(g.feats_w) * g.feats_h;
    g.features.reserve(count);
    std::vector<std::int32_t> comps(static_cast<std::size_t>(dims));
    for (std::size_t f = 0; f < count; ++f) {
        for (auto& c : comps) {
            if (!(in >> c)) throw FormatError(Kind::truncated, "features: truncated at feature " + std::to_string(f));
        }
        PvqPoint p(comps);
        if (!p.is_zero() && p.k() != g.k) {
            throw FormatError(Kind::bad_value, "features: feature " + std::to_string(f) + " is not on P(dims, k)");
        }
        g.features.push_back(std::move(p));
    }
    std::string extra;
    if (in >> extra) throw FormatError(Kind::bad_value, "features: trailing data");
    return g;
}

std::string format_detections(std::span<const Detection> dets) {
    std::string out;
    for (const auto& d : dets) {
        out += std::to_string(d.row) + " " + std::to_string(d.col) + " " + detail::format_real(d.score) + "\n";
    }
    return out;
}

}  // namespace pvq
