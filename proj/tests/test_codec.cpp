#include "oracles.hpp"

#include "pvq/codec.hpp"
#include "pvq/error.hpp"

#include <doctest.h>

#include <cmath>

using namespace pvq;

namespace {

const GrayImage& camera() {
    static const GrayImage img = read_pgm(PVQ_TEST_DATA_DIR "/camera.pgm");
    return img;
}

GrayImage noise_image(int w, int h, std::uint64_t seed) {
    auto g = oracle::rng(seed);
    std::uniform_int_distribution<int> d(0, 255);
    GrayImage img(w, h);
    for (auto& p : img.pixels) p = static_cast<std::uint8_t>(d(g));
    return img;
}

double block_sq_error(const PixelBlock& a, const PixelBlock& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.values().size(); ++i) s += std::pow(a.values()[i] - b.values()[i], 2);
    return s;
}

}  // namespace

TEST_CASE("params validation") {
    CHECK_NOTHROW(CodecParams{}.validate());
    CHECK_THROWS_AS((CodecParams{TransformKind::dft, 8, 10}.validate()), InvalidArgument);
    CHECK_THROWS_AS((CodecParams{TransformKind::wht, 6, 10}.validate()), InvalidArgument);
    CHECK_THROWS_AS((CodecParams{TransformKind::dct2, 8, 0}.validate()), InvalidArgument);
    CHECK_THROWS_AS((CodecParams{TransformKind::dct2, 8, 10, 33}.validate()), InvalidArgument);
    CHECK_THROWS_AS(encode_image(GrayImage(0, 0), CodecParams{}), InvalidArgument);
}

TEST_CASE("constant block encodes to a null vector") {
    const BlockTransform t({TransformKind::dct2, 8});
    const EncodedBlock b = encode_block(PixelBlock(8, 128.0), t, 10);
    CHECK(b.dc == doctest::Approx(1024.0).epsilon(1e-14));
    CHECK(b.radius == 0.0);
    CHECK(b.point.is_zero());
    CHECK(b.point.n() == 63);
    CHECK(block_index(b, 8, 10).value == 0);
    const PixelBlock x = decode_block(b, t);
    for (double v : x.values()) CHECK(v == doctest::Approx(128.0).epsilon(1e-13));
}

TEST_CASE("a block on a quantized direction is a fixed point") {
    auto g = oracle::rng(0);
    for (auto kind : {TransformKind::dct2, TransformKind::wht}) {
        const BlockTransform t({kind, 8});
        for (int trial = 0; trial < 100; ++trial) {
            const PvqPoint y = oracle::random_point(g, 63, 10);
            const double c = 5.0 + trial;
            std::vector<double> ac(63);
            for (int i = 0; i < 63; ++i) ac[i] = c * y[i] / l2_norm(y);
            const PixelBlock x = t.inverse(assemble_coefficients(8, 300.0, ac));
            const EncodedBlock b = encode_block(x, t, 10);
            REQUIRE(b.point == y);
            CHECK(b.radius == doctest::Approx(c).epsilon(1e-12));
            CHECK(b.dc == doctest::Approx(300.0).epsilon(1e-12));
            const PixelBlock back = decode_block(b, t);
            for (int i = 0; i < 64; ++i) CHECK(std::abs(back.values()[i] - x.values()[i]) < 1e-9);
        }
    }
}

TEST_CASE("decode then re-encode reproduces the block") {
    auto g = oracle::rng(0);
    const BlockTransform t({TransformKind::dct2, 8});
    for (int trial = 0; trial < 500; ++trial) {
        const PixelBlock x(8, oracle::uniform_vector(g, 64, 0, 255));
        const int k = 1 + trial % 20;
        const EncodedBlock b = encode_block(x, t, k);
        const EncodedBlock again = encode_block(decode_block(b, t), t, k);
        REQUIRE(again.point == b.point);
        CHECK(block_index(again, 8, k) == block_index(b, 8, k));
        CHECK(again.dc == doctest::Approx(b.dc).epsilon(1e-9));
        CHECK(again.radius == doctest::Approx(b.radius).epsilon(1e-9));
    }
}

TEST_CASE("decoded AC energy equals the radius") {
    auto g = oracle::rng(0);
    const BlockTransform t({TransformKind::wht, 4});
    for (int trial = 0; trial < 500; ++trial) {
        const EncodedBlock b = encode_block(PixelBlock(4, oracle::uniform_vector(g, 16, 0, 255)), t, 7);
        const auto ac = ac_vector(decoded_coefficients(b, 4));
        CHECK(std::sqrt(oracle::reversed_dot(ac, ac)) == doctest::Approx(b.radius).epsilon(1e-9));
    }
}

TEST_CASE("decoding matches the direct inverse transform oracle") {
    auto g = oracle::rng(0);
    for (auto kind : {TransformKind::dct2, TransformKind::wht}) {
        const BlockTransform t({kind, 8});
        for (int trial = 0; trial < 50; ++trial) {
            const EncodedBlock b = encode_block(PixelBlock(8, oracle::uniform_vector(g, 64, 0, 255)), t, 10);
            const auto want = oracle::decode_direct(kind, b, 8);
            const PixelBlock got = decode_block(b, t);
            for (int i = 0; i < 64; ++i) CHECK(std::abs(got.values()[i] - want[i]) < 1e-9);
        }
    }
}

TEST_CASE("weights are applied before grouping and undone on decode") {
    auto g = oracle::rng(0);
    const BlockTransform t({TransformKind::dct2, 4});
    const WeightBlock w(4, oracle::uniform_vector(g, 16, 0.5, 4.0));
    const PixelBlock x(4, oracle::uniform_vector(g, 16, 0, 255));
    const EncodedBlock b = encode_block(x, t, 12, &w);
    const CoeffBlock q = t.forward(x);
    CHECK(b.dc == doctest::Approx(q.at(0, 0) * w.at(0, 0)).epsilon(1e-14));
    const CoeffBlock qhat = decoded_coefficients(b, 4);
    CoeffBlock unweighted(4);
    for (int i = 0; i < 16; ++i) unweighted.values()[i] = qhat.values()[i] / w.values()[i];
    const PixelBlock want = t.inverse(unweighted);
    const PixelBlock got = decode_block(b, t, &w);
    for (int i = 0; i < 16; ++i) CHECK(got.values()[i] == doctest::Approx(want.values()[i]).epsilon(1e-12));
}

TEST_CASE("k = 10 beats k = 2 on at least 90% of natural image blocks") {
    const GrayImage& img = camera();
    const BlockTransform t({TransformKind::dct2, 8});
    int better = 0, total = 0;
    for (int by = 0; by < img.height / 8; ++by)
        for (int bx = 0; bx < img.width / 8; ++bx) {
            PixelBlock x(8);
            for (int i = 0; i < 8; ++i)
                for (int j = 0; j < 8; ++j) x.at(i, j) = img.at(bx * 8 + j, by * 8 + i);
            const double e10 = block_sq_error(x, decode_block(encode_block(x, t, 10), t));
            const double e2 = block_sq_error(x, decode_block(encode_block(x, t, 2), t));
            better += e10 < e2;
            ++total;
        }
    MESSAGE("k=10 strictly better on " << better << " of " << total << " blocks");
    CHECK(better * 10 >= total * 9);
}

TEST_CASE("image geometry and padding") {
    const EncodedImage one = encode_image(GrayImage(8, 8, 128), CodecParams{});
    CHECK(one.blocks.size() == 1);
    CHECK(one.blocks[0].radius == 0.0);

    const EncodedImage sixty_four = encode_image(noise_image(64, 64, 1), CodecParams{});
    CHECK(sixty_four.blocks.size() == 64);
    CHECK(payload_bits(64, 64, CodecParams{}) == 64 * (32 + 32 + 49));

    GrayImage odd(10, 13);
    for (int y = 0; y < 13; ++y)
        for (int x = 0; x < 10; ++x) odd.at(x, y) = static_cast<std::uint8_t>(10 * x + y);
    GrayImage replicated(16, 16);
    for (int y = 0; y < 16; ++y)
        for (int x = 0; x < 16; ++x) replicated.at(x, y) = odd.at(std::min(x, 9), std::min(y, 12));
    const EncodedImage e = encode_image(odd, CodecParams{});
    CHECK(e.width == 16);
    CHECK(e.height == 16);
    CHECK(e == encode_image(replicated, CodecParams{}));
}

TEST_CASE("rate-distortion on a natural image") {
    const GrayImage& img = camera();
    double prev = INFINITY;
    double psnr4 = 0.0, psnr10 = 0.0;
    for (int k : {2, 4, 5, 10, 20}) {
        const EncodedImage e = encode_image(img, CodecParams{TransformKind::dct2, 8, k});
        const double err = mse(to_real(img), reconstruct_image(e));
        MESSAGE("k=" << k << " mse=" << err);
        if (k == 4) psnr4 = psnr(img, decode_image(e));
        if (k == 10) psnr10 = psnr(img, decode_image(e));
        if (k != 4) {
            CHECK(err <= prev);
            prev = err;
        }
    }
    CHECK(psnr10 > psnr4);
}

TEST_CASE("scalar quantizers") {
    const ScalarQuantizer dc(8, 2040.0, false);
    CHECK(dc.code(0.0) == 0);
    CHECK(dc.code(2040.0) == 255);
    CHECK(dc.value(0) == doctest::Approx(2040.0 / 512));
    CHECK(dc.quantize(1000.0) == doctest::Approx((std::floor(1000.0 / 2040.0 * 256) + 0.5) * 2040.0 / 256));
    for (double v = 0.0; v <= 2040.0; v += 3.7) CHECK(std::abs(dc.quantize(v) - v) <= 2040.0 / 512 + 1e-9);

    const ScalarQuantizer r(6, 1020.0, true);
    CHECK(r.code(0.0) == 0);
    CHECK(r.value(0) == 0.0);
    CHECK(r.code(1e-9) == 1);
    CHECK(r.code(5000.0) == 63);
    for (double v = 0.01; v <= 1020.0; v += 2.3) {
        CHECK(r.quantize(v) > 0.0);
        CHECK(std::abs(r.quantize(v) - v) <= 1020.0 / 63 / 2 + 1e-9);
        CHECK(r.code(r.quantize(v)) == r.code(v));
    }
    CHECK_THROWS_AS(r.value(64), InvalidArgument);
    CHECK_THROWS_AS(ScalarQuantizer(0, 1.0, true), InvalidArgument);
}

TEST_CASE("pack and unpack round trip exactly") {
    for (auto params : {CodecParams{TransformKind::dct2, 8, 10}, CodecParams{TransformKind::wht, 4, 5, 10, 8},
                        CodecParams{TransformKind::dct2, 8, 20, 12, 0}, CodecParams{TransformKind::wht, 8, 40, 0, 9}}) {
        const EncodedImage e = encode_image(noise_image(40, 24, 3), params);
        const auto bytes = pack(e);
        CHECK(bytes.size() == packed_size(e.width, e.height, params));
        const EncodedImage back = unpack(bytes);
        CHECK(back == e);
        CHECK(pack(back) == bytes);
    }
}

TEST_CASE("payload size is fixed and content independent") {
    for (auto params : {CodecParams{TransformKind::dct2, 8, 10}, CodecParams{TransformKind::wht, 8, 3, 7, 5}}) {
        const auto flat = pack(encode_image(GrayImage(64, 48, 77), params));
        const auto noisy = pack(encode_image(noise_image(64, 48, 9), params));
        CHECK(flat.size() == noisy.size());
        CHECK(flat.size() == packed_size(64, 48, params));
    }
    // One block: 19 header bytes, 32 + 32 + 49 = 113 payload bits -> 15 bytes.
    CHECK(pack(encode_image(noise_image(8, 8, 2), CodecParams{})).size() == 19 + 15);
}

TEST_CASE("unpack rejects malformed streams") {
    const auto good = pack(encode_image(noise_image(8, 8, 4), CodecParams{}));
    auto expect_kind = [](std::vector<std::uint8_t> bytes, FormatError::Kind kind) {
        try {
            (void)unpack(bytes);
            FAIL("no error");
        } catch (const FormatError& e) {
            CHECK(e.kind() == kind);
        }
    };
    auto bad = good;
    bad[0] = 'X';
    expect_kind(bad, FormatError::Kind::bad_magic);
    expect_kind({good.begin(), good.end() - 1}, FormatError::Kind::truncated);
    bad = good;
    bad.push_back(0);
    expect_kind(bad, FormatError::Kind::bad_header);
    bad = good;
    bad[18] = 7;  // transform tag
    expect_kind(bad, FormatError::Kind::bad_header);

    // The 49 index bits start at byte 27; all ones is 2^49 - 1 >= N_p(63, 10).
    bad = good;
    for (std::size_t i = 27; i < bad.size(); ++i) bad[i] = 0xFF;
    expect_kind(bad, FormatError::Kind::index_out_of_range);

    bad = good;
    for (std::size_t i = 23; i < 27; ++i) bad[i] = 0;  // radius 0 with a non-zero index
    expect_kind(bad, FormatError::Kind::bad_value);
    bad = good;
    bad[23] = 0xFF;  // negative radius
    expect_kind(bad, FormatError::Kind::bad_value);
    expect_kind({}, FormatError::Kind::bad_magic);
}
