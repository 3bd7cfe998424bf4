#include "cli.hpp"

#include "pvq/codec.hpp"
#include "pvq/convolve.hpp"
#include "pvq/detect.hpp"
#include "pvq/error.hpp"
#include "pvq/match.hpp"
#include "pvq/pvqdot.hpp"
#include "pvq/pyramid.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <random>
#include <sstream>

namespace pvq::cli {

namespace {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string real(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::span<const std::uint8_t> as_bytes(const std::string& s) {
    return {reinterpret_cast<const std::uint8_t*>(s.data()), s.size()};
}

std::string read_text(const std::filesystem::path& path) {
    const auto bytes = read_file(path);
    return {bytes.begin(), bytes.end()};
}

void write_text(const std::filesystem::path& path, const std::string& text) { write_file(path, as_bytes(text)); }

TransformKind block_transform(const std::string& name) {
    TransformKind kind = TransformKind::dft;
    try {
        kind = parse_transform_kind(name);
    } catch (const InvalidArgument&) {
    }
    if (kind == TransformKind::dft) throw UsageError("--transform must be dct or wht");
    return kind;
}

// PVQR by default; a .pgm target gets the map rounded and clamped to 8 bits.
void write_map(const std::filesystem::path& path, const RealImage& map) {
    if (path.extension() == ".pgm") {
        write_pgm(path, to_gray(map));
    } else {
        write_file(path, serialize_response_map(map));
    }
}

struct Descriptor {
    std::uint64_t id = 0;
    std::vector<double> values;
};

// One "id v1 ... vn" per line; blank lines and lines starting with '#' are skipped.
std::vector<Descriptor> read_descriptors(const std::filesystem::path& path, int n) {
    std::istringstream in(read_text(path));
    std::vector<Descriptor> out;
    std::string line;
    for (int line_no = 1; std::getline(in, line); ++line_no) {
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') continue;
        std::istringstream fields(line);
        Descriptor d;
        if (!(fields >> d.id)) {
            throw FormatError(FormatError::Kind::bad_value, path.string() + ":" + std::to_string(line_no) + ": bad id");
        }
        for (double v; fields >> v;) d.values.push_back(v);
        if (!fields.eof() || d.values.size() != static_cast<std::size_t>(n)) {
            throw FormatError(FormatError::Kind::bad_value, path.string() + ":" + std::to_string(line_no) +
                                                                ": expected an id and " + std::to_string(n) +
                                                                " reals");
        }
        out.push_back(std::move(d));
    }
    return out;
}

void print_costs(std::ostream& out, const CostMeter& meter, double per) {
    out << "additions/trial=" << real(static_cast<double>(meter.additions) / per) << '\n';
    out << "multiplications/trial=" << real(static_cast<double>(meter.multiplications) / per) << '\n';
    out << "lookups/trial=" << real(static_cast<double>(meter.table_lookups) / per) << '\n';
}

double rel_error(double got, double want) { return std::abs(got - want) / std::max(1.0, std::abs(want)); }

std::vector<double> uniform(std::mt19937_64& g, std::size_t n, double lo, double hi) {
    std::uniform_real_distribution<double> d(lo, hi);
    std::vector<double> v(n);
    for (auto& x : v) x = d(g);
    return v;
}

// A point on P(n, k) from a Laplacian draw; never the zero point.
PvqPoint random_point(std::mt19937_64& g, int n, int k) {
    std::exponential_distribution<double> e(1.0);
    std::bernoulli_distribution sign(0.5);
    std::vector<double> v(static_cast<std::size_t>(n));
    for (auto& x : v) x = sign(g) ? e(g) : -e(g);
    return encode(v, k);
}

struct BenchOptions {
    std::string kind;
    int n = 63;
    int k = 10;
    int m = 8;
    int kernel_size = 0;
    std::string transform = "dct";
    int trials = 1000;
    std::uint64_t seed = 0;
};

void bench_dot(const BenchOptions& o, std::ostream& out) {
    std::mt19937_64 g(o.seed);
    CostMeter pvq, dense;
    double worst = 0.0;
    for (int t = 0; t < o.trials; ++t) {
        const PvqVector v(uniform(g, 1, 0.5, 2.0)[0], random_point(g, o.n, o.k));
        const auto x = uniform(g, static_cast<std::size_t>(o.n), -1.0, 1.0);
        const double got = pvq_dot(v, x, pvq);
        const double want = dense_dot(reconstruct(v), x, dense);
        worst = std::max(worst, rel_error(got, want));
    }
    out << "bench=dot\nn=" << o.n << "\nk=" << o.k << "\ntrials=" << o.trials << "\nseed=" << o.seed << '\n';
    print_costs(out, pvq, o.trials);
    out << "dense_additions/trial=" << real(static_cast<double>(dense.additions) / o.trials) << '\n';
    out << "dense_multiplications/trial=" << real(static_cast<double>(dense.multiplications) / o.trials) << '\n';
    out << "max_rel_error=" << real(worst) << '\n';
}

void bench_conv(const BenchOptions& o, std::ostream& out) {
    const int m1 = o.kernel_size ? o.kernel_size : o.m;
    if (m1 > o.m) throw UsageError("--kernel-size must not exceed -m");
    const BlockTransform t(TransformSpec{block_transform(o.transform), o.m, true});
    std::mt19937_64 g(o.seed);
    CostMeter total, ac;
    double worst = 0.0;
    for (int trial = 0; trial < o.trials; ++trial) {
        const Kernel c(m1, uniform(g, static_cast<std::size_t>(m1) * m1, -1.0, 1.0));
        EncodedBlock b;
        b.dc = uniform(g, 1, 0.0, 255.0 * o.m)[0];
        b.radius = uniform(g, 1, 1.0, 100.0 * o.m)[0];
        b.point = random_point(g, o.m * o.m - 1, o.k);
        const CoeffBlock tc = transformed_kernel(c, t);
        const double got = conv_pvq_transform(tc, b, t.spec(), total);
        pvq_dot(b.radius, b.point, tc.values().subspan(1), ac);
        worst = std::max(worst, rel_error(got, conv_direct(c, decode_block(b, t))));
    }
    out << "bench=conv\nm=" << o.m << "\nk=" << o.k << "\nkernel_size=" << m1 << "\ntransform=" << o.transform
        << "\ntrials=" << o.trials << "\nseed=" << o.seed << '\n';
    print_costs(out, total, o.trials);
    out << "ac_additions/trial=" << real(static_cast<double>(ac.additions) / o.trials) << '\n';
    out << "ac_multiplications/trial=" << real(static_cast<double>(ac.multiplications) / o.trials) << '\n';
    out << "dense_multiplications/trial=" << m1 * m1 << '\n';
    out << "max_rel_error=" << real(worst) << '\n';
}

void bench_window(const BenchOptions& o, std::ostream& out) {
    std::mt19937_64 g(o.seed);
    LinearSvm model;
    CostMeter meter;
    double worst = 0.0;
    for (int trial = 0; trial < o.trials; ++trial) {
        PvqFeatureGrid feats;
        feats.feats_w = model.window_w;
        feats.feats_h = model.window_h;
        feats.k = o.k;
        for (int f = 0; f < model.window_w * model.window_h; ++f) {
            feats.features.push_back(random_point(g, kFeatureDims, o.k));
        }
        model.weights = uniform(g, static_cast<std::size_t>(model.window_w) * model.window_h * kFeatureDims, -1, 1);
        model.bias = uniform(g, 1, -1.0, 1.0)[0];
        const double got = svm_window_score(feats, 0, 0, model, meter);
        double want = model.bias;
        for (int i = 0; i < model.window_h; ++i)
            for (int j = 0; j < model.window_w; ++j) {
                const PvqPoint& f = feats.at(j, i);
                const double norm = std::sqrt(static_cast<double>(f.squared_norm()));
                const auto w = model.weights_at(i, j);
                for (int d = 0; d < kFeatureDims; ++d) want += w[d] * f[d] / norm;
            }
        worst = std::max(worst, rel_error(got, want));
    }
    out << "bench=window\nk=" << o.k << "\nwindow=" << model.window_w << "x" << model.window_h
        << "\ntrials=" << o.trials << "\nseed=" << o.seed << '\n';
    print_costs(out, meter, o.trials);
    out << "dense_multiplications/trial=" << model.window_w * model.window_h * kFeatureDims << '\n';
    out << "max_rel_error=" << real(worst) << '\n';
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Product PVQ codec and compressed-domain vision tools", "pvqtool"};
    app.require_subcommand(1);

    int n = 0, k = 0, m = 8, dc_bits = 0, r_bits = 0, stride = 1, cell = 8, step = 1;
    double retain = 0.1;
    std::string transform = "dct";
    std::filesystem::path input, input_b, output, kernel_path, model_path, desc_path;

    auto* count = app.add_subcommand("count", "Print N_p(n, k) and the index width in bits");
    count->add_option("-n", n, "Dimension")->required()->check(CLI::Range(1, 1 << 20));
    count->add_option("-k", k, "Pulses")->required()->check(CLI::Range(0, 1 << 20));

    auto* enc = app.add_subcommand("encode", "Encode a PGM image into a fixed-rate bitstream");
    enc->add_option("input", input, "Input PGM")->required();
    enc->add_option("-m", m, "Block side")->check(CLI::Range(2, 255));
    enc->add_option("-k", k, "Pulses per block")->required()->check(CLI::Range(1, 65535));
    enc->add_option("-t,--transform", transform, "dct or wht");
    enc->add_option("--dc-bits", dc_bits, "DC quantizer bits (0: binary32)")->check(CLI::Range(0, 32));
    enc->add_option("--r-bits", r_bits, "Radius quantizer bits (0: binary32)")->check(CLI::Range(0, 32));
    enc->add_option("-o,--output", output, "Output bitstream")->required();

    auto* dec = app.add_subcommand("decode", "Decode a bitstream to PGM (padded size)");
    dec->add_option("input", input, "Input bitstream")->required();
    dec->add_option("-o,--output", output, "Output PGM")->required();

    auto* psnr_cmd = app.add_subcommand("psnr", "PSNR in dB between two PGM images");
    psnr_cmd->add_option("a", input, "First PGM")->required();
    psnr_cmd->add_option("b", input_b, "Second PGM")->required();

    auto* conv = app.add_subcommand("conv", "Valid-mode convolution on an encoded image");
    conv->add_option("input", input, "Input bitstream")->required();
    conv->add_option("--kernel", kernel_path, "Kernel text file")->required();
    conv->add_option("--stride", stride, "Output stride")->check(CLI::Range(1, 1 << 16));
    conv->add_option("-o,--output", output, "Response map (PVQR, or .pgm)")->required();

    auto* fft = app.add_subcommand("fftconv", "Circular convolution keeping a fraction of the image spectrum");
    fft->add_option("input", input, "Input PGM")->required();
    fft->add_option("--kernel", kernel_path, "Kernel text file")->required();
    fft->add_option("--retain", retain, "Fraction of coefficients kept, in (0, 1]")->check(CLI::Range(0.0, 1.0));
    fft->add_option("-o,--output", output, "Response map (PVQR, or .pgm)")->required();

    auto* hog = app.add_subcommand("hog", "PVQ-encoded HOG features of a PGM image");
    hog->add_option("input", input, "Input PGM")->required();
    hog->add_option("-k", k, "Pulses per feature")->required()->check(CLI::Range(1, 65535));
    hog->add_option("--cell", cell, "Cell side in pixels")->check(CLI::Range(1, 1 << 12));
    hog->add_option("-o,--output", output, "Feature file")->required();

    auto* detect = app.add_subcommand("detect", "Sliding-window linear SVM over a feature file");
    detect->add_option("input", input, "Feature file")->required();
    detect->add_option("--model", model_path, "Model text file")->required();
    detect->add_option("--step", step, "Window step in features")->check(CLI::Range(1, 1 << 12));
    detect->add_option("-o,--output", output, "Detections")->required();

    auto* db_add = app.add_subcommand("db-add", "Add descriptors to a database, creating it if needed");
    db_add->add_option("db", input, "Database file")->required();
    db_add->add_option("--input", desc_path, "Descriptor text: 'id v1 ... vn' per line")->required();
    db_add->add_option("-n", n, "Dimension (new database)")->check(CLI::Range(1, 65535));
    db_add->add_option("-k", k, "Pulses (new database)")->check(CLI::Range(1, 65535));

    auto* db_query = app.add_subcommand("db-query", "Best match for each query descriptor");
    db_query->add_option("db", input, "Database file")->required();
    db_query->add_option("--input", desc_path, "Query text: 'id v1 ... vn' per line")->required();
    db_query->add_option("-o,--output", output, "Results (default: standard output)");

    BenchOptions bo;
    auto* bench = app.add_subcommand("bench", "Operation counts against the dense reference");
    bench->add_option("kind", bo.kind, "dot, conv or window")->required()->check(CLI::IsMember({"dot", "conv", "window"}));
    bench->add_option("-n", bo.n, "Dimension (dot)")->check(CLI::Range(1, 1 << 16));
    bench->add_option("-k", bo.k, "Pulses")->check(CLI::Range(1, 1 << 16));
    bench->add_option("-m", bo.m, "Block side (conv)")->check(CLI::Range(2, 64));
    bench->add_option("--kernel-size", bo.kernel_size, "Kernel side (conv, default m)")->check(CLI::Range(1, 64));
    bench->add_option("-t,--transform", bo.transform, "dct or wht (conv)");
    bench->add_option("--trials", bo.trials, "Trials")->check(CLI::Range(1, 1 << 24));
    bench->add_option("--seed", bo.seed, "Random seed");

    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err) == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (count->parsed()) {
            out << to_string(count_points(n, k)) << "\nbits: " << bits_required(n, k) << '\n';
        } else if (enc->parsed()) {
            const CodecParams params{block_transform(transform), m, k, dc_bits, r_bits};
            params.validate();
            const EncodedImage e = encode_image(read_pgm(input), params);
            const auto bytes = pack(e);
            write_file(output, bytes);
            out << "size: " << e.width << "x" << e.height << "\nblocks: " << e.blocks.size()
                << "\npayload_bits: " << payload_bits(e.width, e.height, params) << "\nbytes: " << bytes.size()
                << '\n';
        } else if (dec->parsed()) {
            write_pgm(output, decode_image(unpack(read_file(input))));
        } else if (psnr_cmd->parsed()) {
            char buf[32];
            std::snprintf(buf, sizeof buf, "%.4f", psnr(read_pgm(input), read_pgm(input_b)));
            out << buf << '\n';
        } else if (conv->parsed()) {
            const EncodedImage e = unpack(read_file(input));
            CostMeter meter;
            const RealImage map = conv_image(read_kernel(kernel_path), e, stride, meter);
            write_map(output, map);
            out << "responses: " << map.width << "x" << map.height << "\nadditions: " << meter.additions
                << "\nmultiplications: " << meter.multiplications << '\n';
        } else if (fft->parsed()) {
            if (!(retain > 0.0)) throw UsageError("--retain must be in (0, 1]");
            const GrayImage img = read_pgm(input);
            const double total = static_cast<double>(std::bit_ceil(static_cast<unsigned>(img.width))) *
                                 std::bit_ceil(static_cast<unsigned>(img.height));
            const auto keep = static_cast<std::size_t>(std::max(1.0, std::round(retain * total)));
            CostMeter meter;
            write_map(output, conv_fft_sparse(to_real(img), read_kernel(kernel_path), keep, &meter));
            out << "retained: " << keep << "\nmultiplications: " << meter.multiplications << '\n';
        } else if (hog->parsed()) {
            const PvqFeatureGrid feats = pvq_features(hog_cells(read_pgm(input), cell), k);
            write_text(output, format_features(feats));
            out << "features: " << feats.feats_w << "x" << feats.feats_h << '\n';
        } else if (detect->parsed()) {
            const auto dets = slide_detect(parse_features(read_text(input)), read_model(model_path), step);
            write_text(output, format_detections(dets));
            out << "detections: " << dets.size() << '\n';
        } else if (db_add->parsed()) {
            const bool exists = std::filesystem::exists(input);
            if (!exists && (n == 0 || k == 0)) throw UsageError("a new database needs -n and -k");
            DescriptorDb db = exists ? load(input) : DescriptorDb(n, k);
            if ((n && n != db.n()) || (k && k != db.k())) {
                throw UsageError("-n/-k do not match the existing database (n=" + std::to_string(db.n()) +
                                 ", k=" + std::to_string(db.k()) + ")");
            }
            const auto descs = read_descriptors(desc_path, db.n());
            for (const auto& d : descs) db.add_descriptor(d.values, d.id);
            save(db, input);
            out << "added: " << descs.size() << "\nentries: " << db.size() << '\n';
        } else if (db_query->parsed()) {
            const DescriptorDb db = load(input);
            std::string results;
            CostMeter meter;
            for (const auto& q : read_descriptors(desc_path, db.n())) {
                const Match best = best_match(db, q.values, meter);
                double qq = 0.0;
                for (double v : q.values) qq += v * v;
                if (!(qq > 0.0)) throw InvalidArgument("query " + std::to_string(q.id) + " is zero");
                const double cosine = std::clamp(best.score / std::sqrt(qq), -1.0, 1.0);
                results += std::to_string(q.id) + " " + std::to_string(best.id) + " " + real(best.score) + " " +
                           real(cosine) + " " + real(distance_from_cosine(cosine)) + "\n";
            }
            if (output.empty()) {
                out << results;
            } else {
                write_text(output, results);
            }
        } else if (bench->parsed()) {
            if (bo.kind == "dot") bench_dot(bo, out);
            if (bo.kind == "conv") bench_conv(bo, out);
            if (bo.kind == "window") bench_window(bo, out);
        }
    } catch (const UsageError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kExitData;
    }
    return kExitOk;
}

int run(int argc, const char* const* argv) {
    return run(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}

}  // namespace pvq::cli
