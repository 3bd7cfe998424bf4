#pragma once

// HOG cell histograms whose 2x2-cell features are PVQ encoded on P(36, k)
// instead of being normalised, and linear SVM window scoring on them.

#include "pvq/cost_meter.hpp"
#include "pvq/image.hpp"
#include "pvq/pyramid.hpp"

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace pvq {

inline constexpr int kHogBins = 9;
inline constexpr int kFeatureDims = 4 * kHogBins;

/// Per-cell orientation histograms, cells in row-major order.
struct CellGrid {
    int cells_w = 0;
    int cells_h = 0;
    std::vector<double> bins;  // cells_w * cells_h * kHogBins, all >= 0

    std::span<const double> cell(int cx, int cy) const {
        return std::span(bins).subspan((static_cast<std::size_t>(cy) * cells_w + cx) * kHogBins, kHogBins);
    }
};

/// Centered [-1, 0, 1] gradients (borders replicated), unsigned orientation
/// in [0, 180) degrees, 9 bins of 20 degrees centred at 10, 30, ..., 170,
/// magnitude votes split linearly between the two nearest bin centres
/// (wrapping 170 -> 10). Pixels past the last full cell are ignored.
CellGrid hog_cells(const RealImage& image, int cell_size = 8);
CellGrid hog_cells(const GrayImage& image, int cell_size = 8);

/// Features on overlapping 2x2 cell groups (stride one cell): the four
/// histograms concatenated in row-major cell order, PVQ encoded with r = 1.
/// All-zero groups become the zero (null) point.
struct PvqFeatureGrid {
    int feats_w = 0;
    int feats_h = 0;
    int k = 0;
    std::vector<PvqPoint> features;  // row-major

    const PvqPoint& at(int fx, int fy) const { return features[static_cast<std::size_t>(fy) * feats_w + fx]; }
};

PvqFeatureGrid pvq_features(const CellGrid& cells, int k);

struct LinearSvm {
    int window_w = 7;   // features
    int window_h = 15;  // features
    int dims = kFeatureDims;
    std::vector<double> weights;  // window row-major, then feature components
    double bias = 0.0;

    /// Throws InvalidArgument if weights.size() != window_w * window_h * dims.
    void validate() const;
    std::span<const double> weights_at(int row, int col) const {
        return std::span(weights).subspan((static_cast<std::size_t>(row) * window_w + col) * dims, dims);
    }
};

/// sum over the window of (w_ij . f_ij) / |f_ij|_2, plus bias. (row, col) is
/// the window's top-left feature. Null features contribute nothing.
/// For a window without null features the meter records window_w*window_h
/// * (k - 1) accumulation additions, one multiplication (and lookup) per
/// feature, and window_w*window_h combining additions (bias included).
double svm_window_score(const PvqFeatureGrid& feats, int row, int col, const LinearSvm& model, CostMeter& meter);

/// score > 0; a score of exactly zero is negative.
bool decide(double score);

struct Detection {
    int row = 0;
    int col = 0;
    double score = 0.0;

    friend bool operator==(const Detection&, const Detection&) = default;
};

/// Evaluates every window position on the step grid and returns those with
/// a positive decision, highest score first (ties in scan order).
std::vector<Detection> slide_detect(const PvqFeatureGrid& feats, const LinearSvm& model, int step = 1,
                                    CostMeter* meter = nullptr);

/// Model text: "window_w window_h dims bias" then the weights.
LinearSvm parse_model(std::string_view text);
LinearSvm read_model(const std::filesystem::path& path);
std::string format_model(const LinearSvm& model);

/// Feature text: "PVQF feats_w feats_h k dims", then one line of integer
/// components per feature in row-major order.
std::string format_features(const PvqFeatureGrid& feats);
PvqFeatureGrid parse_features(std::string_view text);

/// One "row col score" line per detection.
std::string format_detections(std::span<const Detection> dets);

}  // namespace pvq
