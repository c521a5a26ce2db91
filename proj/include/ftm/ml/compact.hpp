#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include "ftm/errors.hpp"
#include "ftm/ml/model.hpp"

namespace ftm::ml {

/// Flat, versioned, little-endian model container ("FTMC"), the on-disk
/// twin of TrainedModel. Field-by-field layout is documented in
/// docs/model_format.md; the tree block is an array-of-nodes form a
/// microcontroller can walk directly.
inline constexpr char kCompactMagic[4] = {'F', 'T', 'M', 'C'};
inline constexpr std::uint16_t kCompactVersion = 1;

namespace detail {

class ByteWriter {
public:
    void u8(std::uint8_t v) { bytes_.push_back(v); }
    void u16(std::uint16_t v) {
        for (int i = 0; i < 2; ++i) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void u32(std::uint32_t v) {
        for (int i = 0; i < 4; ++i) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void i32(std::int32_t v) { u32(static_cast<std::uint32_t>(v)); }
    void f64(double v) {
        const auto bits = std::bit_cast<std::uint64_t>(v);
        for (int i = 0; i < 8; ++i) bytes_.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
    }
    std::vector<std::uint8_t> take() { return std::move(bytes_); }

private:
    std::vector<std::uint8_t> bytes_;
};

class ByteReader {
public:
    explicit ByteReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

    std::uint8_t u8() { return take(1)[0]; }
    std::uint16_t u16() {
        const auto b = take(2);
        return static_cast<std::uint16_t>(b[0] | (b[1] << 8));
    }
    std::uint32_t u32() {
        const auto b = take(4);
        return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
               (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
    }
    std::int32_t i32() { return static_cast<std::int32_t>(u32()); }
    double f64() {
        const auto b = take(8);
        std::uint64_t bits = 0;
        for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(b[i]) << (8 * i);
        return std::bit_cast<double>(bits);
    }
    bool exhausted() const { return at_ == bytes_.size(); }

private:
    std::span<const std::uint8_t> take(std::size_t n) {
        if (at_ + n > bytes_.size()) {
            throw Error(ErrorCode::ParseError, "compact model truncated");
        }
        auto out = bytes_.subspan(at_, n);
        at_ += n;
        return out;
    }

    std::span<const std::uint8_t> bytes_;
    std::size_t at_ = 0;
};

inline void write_kernel(ByteWriter& w, const KernelParams& k) {
    w.u8(k.kind == KernelKind::Gaussian ? 0 : 1);
    w.f64(k.sigma_f);
    w.f64(k.sigma_l);
    w.f64(k.noise_sigma);
}

inline KernelParams read_kernel(ByteReader& r) {
    KernelParams k;
    k.kind = r.u8() == 0 ? KernelKind::Gaussian : KernelKind::Exponential;
    k.sigma_f = r.f64();
    k.sigma_l = r.f64();
    k.noise_sigma = r.f64();
    return k;
}

}  // namespace detail

inline std::vector<std::uint8_t> export_compact_bytes(const TrainedModel& model) {
    detail::ByteWriter w;
    for (char c : kCompactMagic) w.u8(static_cast<std::uint8_t>(c));
    w.u16(kCompactVersion);
    w.u8(static_cast<std::uint8_t>(model.variant));
    w.u8(model.target.correction_mode ? 1 : 0);
    w.u8(2);  // feature count; order is [rtt_raw_ns, mean_rssi_dbm]
    for (double v : model.normalizer.means) w.f64(v);
    for (double v : model.normalizer.stds) w.f64(v);
    w.f64(model.target.mean);
    w.f64(model.target.std);

    switch (model.variant) {
        case Variant::Tree: {
            const auto& p = std::get<TreeParams>(model.params);
            w.u32(static_cast<std::uint32_t>(p.min_leaf_size));
            w.u32(static_cast<std::uint32_t>(p.nodes.size()));
            for (const auto& n : p.nodes) {
                w.u8(static_cast<std::uint8_t>(n.feature));
                w.f64(n.threshold);
                w.f64(n.value);
                w.i32(n.left);
                w.i32(n.right);
            }
            break;
        }
        case Variant::Svr: {
            const auto& p = std::get<SvrParams>(model.params);
            detail::write_kernel(w, p.solution.kernel);
            w.f64(p.C);
            w.f64(p.epsilon);
            w.f64(p.solution.bias);
            w.u32(static_cast<std::uint32_t>(p.solution.support_vectors.size()));
            for (std::size_t i = 0; i < p.solution.support_vectors.size(); ++i) {
                w.f64(p.solution.coefficients[i]);
                w.f64(p.solution.support_vectors[i][0]);
                w.f64(p.solution.support_vectors[i][1]);
            }
            break;
        }
        case Variant::Gp: {
            const auto& p = std::get<GpParams>(model.params);
            detail::write_kernel(w, p.solution.kernel);
            w.u32(static_cast<std::uint32_t>(p.solution.inputs.size()));
            for (std::size_t i = 0; i < p.solution.inputs.size(); ++i) {
                w.f64(p.solution.weights[i]);
                w.f64(p.solution.inputs[i][0]);
                w.f64(p.solution.inputs[i][1]);
            }
            break;
        }
        case Variant::Nn: {
            const auto& p = std::get<NnParams>(model.params);
            w.u32(static_cast<std::uint32_t>(p.net.hidden));
            for (double v : p.net.w1) w.f64(v);
            for (double v : p.net.b1) w.f64(v);
            for (double v : p.net.w2) w.f64(v);
            w.f64(p.net.b2);
            break;
        }
    }
    return w.take();
}

inline TrainedModel import_compact_bytes(std::span<const std::uint8_t> bytes) {
    detail::ByteReader r(bytes);
    for (char c : kCompactMagic) {
        if (r.u8() != static_cast<std::uint8_t>(c)) {
            throw Error(ErrorCode::ParseError, "bad magic; not a compact model file");
        }
    }
    const auto version = r.u16();
    if (version != kCompactVersion) {
        throw Error(ErrorCode::UnsupportedVersion, "compact model version " + std::to_string(version));
    }
    const auto variant_tag = r.u8();
    if (variant_tag > 3) {
        throw Error(ErrorCode::UnsupportedVariant, "variant tag " + std::to_string(variant_tag));
    }

    TrainedModel model;
    model.variant = static_cast<Variant>(variant_tag);
    model.target.correction_mode = (r.u8() & 1) != 0;
    if (r.u8() != 2) throw Error(ErrorCode::ParseError, "unexpected feature count");
    for (double& v : model.normalizer.means) v = r.f64();
    for (double& v : model.normalizer.stds) v = r.f64();
    model.target.mean = r.f64();
    model.target.std = r.f64();

    switch (model.variant) {
        case Variant::Tree: {
            TreeParams p;
            p.min_leaf_size = static_cast<int>(r.u32());
            const auto count = r.u32();
            p.nodes.reserve(count);
            for (std::uint32_t i = 0; i < count; ++i) {
                TreeNode n;
                n.feature = static_cast<std::int8_t>(r.u8());
                n.threshold = r.f64();
                n.value = r.f64();
                n.left = r.i32();
                n.right = r.i32();
                p.nodes.push_back(n);
            }
            model.params = std::move(p);
            break;
        }
        case Variant::Svr: {
            SvrParams p;
            p.solution.kernel = detail::read_kernel(r);
            p.C = r.f64();
            p.epsilon = r.f64();
            p.solution.bias = r.f64();
            const auto count = r.u32();
            for (std::uint32_t i = 0; i < count; ++i) {
                p.solution.coefficients.push_back(r.f64());
                Features x{r.f64(), r.f64()};
                p.solution.support_vectors.push_back(x);
            }
            model.params = std::move(p);
            break;
        }
        case Variant::Gp: {
            GpParams p;
            p.solution.kernel = detail::read_kernel(r);
            const auto count = r.u32();
            for (std::uint32_t i = 0; i < count; ++i) {
                p.solution.weights.push_back(r.f64());
                Features x{r.f64(), r.f64()};
                p.solution.inputs.push_back(x);
            }
            model.params = std::move(p);
            break;
        }
        case Variant::Nn: {
            NnParams p;
            p.net.hidden = static_cast<int>(r.u32());
            const auto hidden = static_cast<std::size_t>(p.net.hidden);
            p.net.w1.resize(hidden * 2);
            p.net.b1.resize(hidden);
            p.net.w2.resize(hidden);
            for (double& v : p.net.w1) v = r.f64();
            for (double& v : p.net.b1) v = r.f64();
            for (double& v : p.net.w2) v = r.f64();
            p.net.b2 = r.f64();
            model.params = std::move(p);
            break;
        }
    }
    if (!r.exhausted()) throw Error(ErrorCode::ParseError, "trailing bytes after model payload");
    return model;
}

inline void export_compact(const TrainedModel& model, const std::filesystem::path& path) {
    const auto bytes = export_compact_bytes(model);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::IoFailure, "cannot open " + path.string() + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error(ErrorCode::IoFailure, "short write to " + path.string());
}

inline TrainedModel import_compact(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoFailure, "cannot open " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    return import_compact_bytes(bytes);
}

}  // namespace ftm::ml
