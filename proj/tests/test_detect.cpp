#include "oracles.hpp"

#include "pvq/detect.hpp"
#include "pvq/error.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace pvq;

namespace {

// Triangular vote: bin b gets max(0, 1 - d / 20) of the magnitude, d the
// circular distance between the angle and the bin centre 10 + 20 b.
std::vector<double> hog_oracle(const RealImage& img, int cell) {
    const int cw = img.width / cell, ch = img.height / cell;
    std::vector<double> bins(static_cast<std::size_t>(cw) * ch * 9, 0.0);
    auto px = [&](int x, int y) {
        return img.at(std::clamp(x, 0, img.width - 1), std::clamp(y, 0, img.height - 1));
    };
    for (int y = 0; y < ch * cell; ++y)
        for (int x = 0; x < cw * cell; ++x) {
            const double gx = px(x + 1, y) - px(x - 1, y);
            const double gy = px(x, y + 1) - px(x, y - 1);
            const double mag = std::sqrt(gx * gx + gy * gy);
            if (mag == 0.0) continue;
            double theta = std::atan2(gy, gx) * 180.0 / std::numbers::pi;
            while (theta < 0.0) theta += 180.0;
            while (theta >= 180.0) theta -= 180.0;
            for (int b = 0; b < 9; ++b) {
                double d = std::abs(theta - (10.0 + 20.0 * b));
                d = std::min(d, 180.0 - d);
                bins[((y / cell) * cw + x / cell) * 9 + b] += mag * std::max(0.0, 1.0 - d / 20.0);
            }
        }
    return bins;
}

RealImage random_image(std::mt19937_64& g, int w, int h) {
    RealImage img(w, h);
    img.values = oracle::uniform_vector(g, static_cast<std::size_t>(w) * h, 0, 255);
    return img;
}

PvqFeatureGrid random_features(std::mt19937_64& g, int w, int h, int k) {
    PvqFeatureGrid f;
    f.feats_w = w;
    f.feats_h = h;
    f.k = k;
    for (int i = 0; i < w * h; ++i) f.features.push_back(oracle::random_point(g, kFeatureDims, k));
    return f;
}

LinearSvm random_model(std::mt19937_64& g) {
    LinearSvm m;
    m.weights = oracle::uniform_vector(g, 7 * 15 * kFeatureDims);
    m.bias = 0.5;
    return m;
}

// 3780-multiplication reference: sum of w . f / |f| over the window, plus bias.
double dense_score(const PvqFeatureGrid& feats, int row, int col, const LinearSvm& model) {
    double s = model.bias;
    for (int i = 0; i < model.window_h; ++i)
        for (int j = 0; j < model.window_w; ++j) {
            const PvqPoint& f = feats.at(col + j, row + i);
            if (f.is_zero()) continue;
            const double norm = std::sqrt(static_cast<double>(f.squared_norm()));
            const auto w = model.weights_at(i, j);
            for (int d = 0; d < model.dims; ++d) s += w[d] * (f[d] / norm);
        }
    return s;
}

}  // namespace

TEST_CASE("constant image has empty histograms") {
    const CellGrid g = hog_cells(RealImage(32, 24, 77.0));
    CHECK(g.cells_w == 4);
    CHECK(g.cells_h == 3);
    for (double v : g.bins) CHECK(v == 0.0);
    const PvqFeatureGrid f = pvq_features(g, 4);
    CHECK(f.feats_w == 3);
    CHECK(f.feats_h == 2);
    for (const auto& p : f.features) CHECK(p.is_zero());
}

TEST_CASE("vertical step edge votes half into each of the two bins around 0 degrees") {
    RealImage img(16, 8, 0.0);
    for (int y = 0; y < 8; ++y)
        for (int x = 8; x < 16; ++x) img.at(x, y) = 100.0;
    const CellGrid g = hog_cells(img);
    const auto left = g.cell(0, 0), right = g.cell(1, 0);
    // Column 7 sees the step; column 8 sees it in the neighbouring cell.
    CHECK(left[8] == doctest::Approx(8 * 50.0));
    CHECK(left[0] == doctest::Approx(8 * 50.0));
    CHECK(right[8] == doctest::Approx(8 * 50.0));
    CHECK(right[0] == doctest::Approx(8 * 50.0));
    for (int b = 1; b < 8; ++b) {
        CHECK(left[b] == 0.0);
        CHECK(right[b] == 0.0);
    }
}

TEST_CASE("45 degree ramp splits a quarter and three quarters") {
    RealImage img(24, 24);
    for (int y = 0; y < 24; ++y)
        for (int x = 0; x < 24; ++x) img.at(x, y) = x + y;
    const auto cell = hog_cells(img).cell(1, 1);
    const double mag = 64 * std::sqrt(8.0);
    CHECK(cell[1] == doctest::Approx(0.25 * mag));
    CHECK(cell[2] == doctest::Approx(0.75 * mag));
    for (int b : {0, 3, 4, 5, 6, 7, 8}) CHECK(cell[b] == 0.0);
}

TEST_CASE("hog_cells agrees with the triangular-vote oracle") {
    auto g = oracle::rng(0);
    for (int cell : {4, 8}) {
        const RealImage img = random_image(g, 37, 29);
        const CellGrid grid = hog_cells(img, cell);
        const auto want = hog_oracle(img, cell);
        REQUIRE(grid.bins.size() == want.size());
        for (std::size_t i = 0; i < want.size(); ++i) CHECK(grid.bins[i] == doctest::Approx(want[i]).epsilon(1e-10));
    }
    CHECK_THROWS_AS(hog_cells(RealImage(4, 16), 8), InvalidArgument);
    CHECK_THROWS_AS(hog_cells(RealImage(16, 16), 0), InvalidArgument);
}

TEST_CASE("each interior cell appears in four features") {
    CellGrid cells;
    cells.cells_w = 5;
    cells.cells_h = 4;
    cells.bins.assign(5 * 4 * 9, 0.0);
    const int cx = 2, cy = 1, bin = 6;
    cells.bins[(cy * 5 + cx) * 9 + bin] = 3.0;
    const PvqFeatureGrid f = pvq_features(cells, 7);
    int nonnull = 0;
    for (int fy = 0; fy < f.feats_h; ++fy)
        for (int fx = 0; fx < f.feats_w; ++fx) {
            const PvqPoint& p = f.at(fx, fy);
            const int dx = cx - fx, dy = cy - fy;
            if (dx < 0 || dx > 1 || dy < 0 || dy > 1) {
                CHECK(p.is_zero());
                continue;
            }
            ++nonnull;
            for (int d = 0; d < kFeatureDims; ++d) CHECK(p[d] == (d == (dy * 2 + dx) * 9 + bin ? 7 : 0));
        }
    CHECK(nonnull == 4);

    cells.bins.assign(cells.bins.size(), 0.0);
    cells.bins[0] = 1.0;
    int corner = 0;
    for (const auto& p : pvq_features(cells, 2).features) corner += !p.is_zero();
    CHECK(corner == 1);
    CHECK_THROWS_AS(pvq_features(cells, 0), InvalidArgument);
    CellGrid thin{1, 4, std::vector<double>(36, 1.0)};
    CHECK_THROWS_AS(pvq_features(thin, 4), InvalidArgument);
}

TEST_CASE("feature cosine to the histogram grows with k") {
    auto g = oracle::rng(0);
    const CellGrid cells = hog_cells(random_image(g, 96, 96));
    double previous = 0.0;
    for (int k : {2, 4, 8, 16, 32}) {
        const PvqFeatureGrid f = pvq_features(cells, k);
        double mean = 0.0;
        for (int fy = 0; fy < f.feats_h; ++fy)
            for (int fx = 0; fx < f.feats_w; ++fx) {
                std::vector<double> v;
                for (int c = 0; c < 4; ++c) {
                    const auto h = cells.cell(fx + c % 2, fy + c / 2);
                    v.insert(v.end(), h.begin(), h.end());
                }
                const PvqPoint& p = f.at(fx, fy);
                CHECK(p.k() == k);
                const double cos = oracle::cosine(v, {p.components().begin(), p.components().end()});
                mean += cos;
            }
        mean /= f.features.size();
        MESSAGE("k=" << k << " mean cosine " << mean);
        CHECK(mean > previous);
        previous = mean;
    }
}

TEST_CASE("7x15 window cost and dense agreement") {
    auto g = oracle::rng(0);
    for (int k : {1, 4, 10, 32}) {
        const PvqFeatureGrid feats = random_features(g, 20, 30, k);
        const LinearSvm model = random_model(g);
        for (auto [row, col] : {std::pair{0, 0}, std::pair{15, 13}, std::pair{7, 4}}) {
            CostMeter meter;
            const double got = svm_window_score(feats, row, col, model, meter);
            CHECK(meter.additions == 105u * (k - 1) + 105u);
            CHECK(meter.multiplications == 105u);
            CHECK(meter.table_lookups == 105u);
            const double want = dense_score(feats, row, col, model);
            CHECK(std::abs(got - want) <= 1e-9 * std::max(1.0, std::abs(want)));
        }
    }
}

TEST_CASE("null features contribute nothing") {
    auto g = oracle::rng(0);
    PvqFeatureGrid feats = random_features(g, 7, 15, 6);
    const LinearSvm model = random_model(g);
    feats.features[3] = PvqPoint::zero(kFeatureDims);
    feats.features[50] = PvqPoint::zero(kFeatureDims);
    CostMeter meter;
    const double got = svm_window_score(feats, 0, 0, model, meter);
    CHECK(got == doctest::Approx(dense_score(feats, 0, 0, model)).epsilon(1e-12));
    CHECK(meter.multiplications == 103u);
    CHECK(meter.additions == 103u * 5 + 103u);

    for (auto& f : feats.features) f = PvqPoint::zero(kFeatureDims);
    CostMeter none;
    CHECK(svm_window_score(feats, 0, 0, model, none) == model.bias);
    CHECK(none == CostMeter{});
}

TEST_CASE("window validation") {
    auto g = oracle::rng(0);
    const PvqFeatureGrid feats = random_features(g, 10, 20, 3);
    LinearSvm model = random_model(g);
    CostMeter meter;
    CHECK_THROWS_AS(svm_window_score(feats, 6, 0, model, meter), InvalidArgument);
    CHECK_THROWS_AS(svm_window_score(feats, 0, 4, model, meter), InvalidArgument);
    CHECK_THROWS_AS(svm_window_score(feats, -1, 0, model, meter), InvalidArgument);
    model.weights.pop_back();
    CHECK_THROWS_AS(svm_window_score(feats, 0, 0, model, meter), InvalidArgument);
}

TEST_CASE("decide") {
    CHECK(decide(1e-12));
    CHECK_FALSE(decide(0.0));
    CHECK_FALSE(decide(-0.0));
    CHECK_FALSE(decide(-3.0));
}

TEST_CASE("planted window is the only detection") {
    auto g = oracle::rng(0);
    const PvqFeatureGrid feats = random_features(g, 20, 30, 8);
    LinearSvm model;
    const int row = 9, col = 5;
    for (int i = 0; i < 15; ++i)
        for (int j = 0; j < 7; ++j) {
            const PvqPoint& f = feats.at(col + j, row + i);
            const double norm = std::sqrt(static_cast<double>(f.squared_norm()));
            for (int d = 0; d < kFeatureDims; ++d) model.weights.push_back(f[d] / norm);
        }
    model.bias = -50.0;
    CostMeter meter;
    const auto dets = slide_detect(feats, model, 1, &meter);
    REQUIRE(dets.size() == 1);
    CHECK(dets[0].row == row);
    CHECK(dets[0].col == col);
    CHECK(dets[0].score == doctest::Approx(105.0 - 50.0).epsilon(1e-12));
    CHECK(meter.multiplications == 105u * 16 * 14);

    CHECK(slide_detect(feats, model, 2).empty());
    CHECK_THROWS_AS(slide_detect(feats, model, 0), InvalidArgument);
    model.bias = 1e9;
    const auto all = slide_detect(feats, model, 3);
    CHECK(all.size() == 6 * 5);
    for (std::size_t i = 1; i < all.size(); ++i) CHECK(all[i - 1].score >= all[i].score);
}

TEST_CASE("model text round trip and errors") {
    auto g = oracle::rng(0);
    LinearSvm model;
    model.window_w = 2;
    model.window_h = 3;
    model.dims = 4;
    model.bias = -0.375;
    model.weights = oracle::uniform_vector(g, 24);
    const LinearSvm back = parse_model(format_model(model));
    CHECK(back.window_w == 2);
    CHECK(back.window_h == 3);
    CHECK(back.dims == 4);
    CHECK(back.bias == model.bias);
    CHECK(back.weights == model.weights);

    CHECK_THROWS_AS(parse_model(""), FormatError);
    CHECK_THROWS_AS(parse_model("1 1 2 0\n1.0\n"), FormatError);
    CHECK_THROWS_AS(parse_model("1 1 1 0\n1.0 2.0\n"), FormatError);
    CHECK_THROWS_AS(parse_model("0 1 1 0\n"), FormatError);
    CHECK_THROWS_AS(parse_model("1 1 1 0\ninf\n"), FormatError);
}

TEST_CASE("features text round trip and errors") {
    auto g = oracle::rng(0);
    PvqFeatureGrid feats = random_features(g, 3, 2, 5);
    feats.features[4] = PvqPoint::zero(kFeatureDims);
    const PvqFeatureGrid back = parse_features(format_features(feats));
    CHECK(back.feats_w == 3);
    CHECK(back.feats_h == 2);
    CHECK(back.k == 5);
    CHECK(back.features == feats.features);

    CHECK_THROWS_AS(parse_features("PVQX 1 1 1 1\n1\n"), FormatError);
    CHECK_THROWS_AS(parse_features("PVQF 1 1 2 2\n1\n"), FormatError);
    CHECK_THROWS_AS(parse_features("PVQF 1 1 2 2\n1 0\n"), FormatError);
    CHECK_THROWS_AS(parse_features("PVQF 1 1 1 2\n1 0 7\n"), FormatError);
    CHECK(parse_features("PVQF 1 1 3 2\n0 0\n").features[0].is_zero());
}

TEST_CASE("detections text") {
    const std::vector<Detection> dets{{1, 2, 3.5}, {0, 4, 0.25}};
    CHECK(format_detections(dets) == "1 2 3.5\n0 4 0.25\n");
}
