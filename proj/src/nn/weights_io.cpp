#include "dicomrouter/nn/weights_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>

#include "dicomrouter/nn/router_net.hpp"

namespace dicomrouter::nn {

namespace {

constexpr char kMagic[4] = {'R', 'N', 'M', 'W'};

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
    out.push_back(static_cast<std::uint8_t>(v));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

class Reader {
public:
    explicit Reader(std::span<const std::uint8_t> data) : data_(data) {}

    std::span<const std::uint8_t> take(std::size_t n, const char* what) {
        if (data_.size() - pos_ < n) {
            throw TruncatedWeights(std::string("file ends inside ") + what);
        }
        auto s = data_.subspan(pos_, n);
        pos_ += n;
        return s;
    }
    std::uint8_t u8(const char* what) { return take(1, what)[0]; }
    std::uint16_t u16(const char* what) {
        const auto b = take(2, what);
        return static_cast<std::uint16_t>(b[0] | (b[1] << 8));
    }
    std::uint32_t u32(const char* what) {
        const auto b = take(4, what);
        return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
               (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
    }
    bool at_end() const { return pos_ == data_.size(); }

private:
    std::span<const std::uint8_t> data_;
    std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::uint8_t> save_weights(const ModelParams<float>& params) {
    std::vector<std::uint8_t> out(std::begin(kMagic), std::end(kMagic));
    put_u16(out, kWeightsVersion);
    put_u32(out, static_cast<std::uint32_t>(params.tensors.size()));
    for (const auto& t : params.tensors) {
        if (t.name.size() > std::numeric_limits<std::uint16_t>::max()) {
            throw std::invalid_argument("tensor name too long: " + t.name.substr(0, 32));
        }
        if (t.tensor.shape.size() > std::numeric_limits<std::uint8_t>::max()) {
            throw std::invalid_argument(t.name + " has too many dimensions");
        }
        if (t.tensor.data.size() != element_count(t.tensor.shape)) {
            throw ShapeMismatch(t.name + " data length does not match its shape");
        }
        put_u16(out, static_cast<std::uint16_t>(t.name.size()));
        out.insert(out.end(), t.name.begin(), t.name.end());
        out.push_back(static_cast<std::uint8_t>(t.tensor.shape.size()));
        for (const auto d : t.tensor.shape) {
            if (d > std::numeric_limits<std::uint32_t>::max()) {
                throw std::invalid_argument(t.name + " dimension exceeds u32");
            }
            put_u32(out, static_cast<std::uint32_t>(d));
        }
        for (const float v : t.tensor.data) put_u32(out, std::bit_cast<std::uint32_t>(v));
    }
    return out;
}

ModelParams<float> load_weights_unchecked(std::span<const std::uint8_t> bytes) {
    Reader in(bytes);
    if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
        throw BadMagic("missing RNMW magic");
    }
    in.take(4, "magic");
    const std::uint16_t version = in.u16("version");
    if (version != kWeightsVersion) {
        throw VersionUnsupported("weight file version " + std::to_string(version) +
                                 " (supported: " + std::to_string(kWeightsVersion) + ")");
    }
    const std::uint32_t count = in.u32("tensor count");
    ModelParams<float> params;
    for (std::uint32_t i = 0; i < count; ++i) {
        NamedTensor<float> t;
        const std::uint16_t name_len = in.u16("tensor name length");
        const auto name = in.take(name_len, "tensor name");
        t.name.assign(name.begin(), name.end());
        const std::uint8_t rank = in.u8("tensor rank");
        std::size_t n = 1;
        for (std::uint8_t r = 0; r < rank; ++r) {
            t.tensor.shape.push_back(in.u32("tensor dims"));
            n *= t.tensor.shape.back();
        }
        if (n > bytes.size() / 4) throw TruncatedWeights("file ends inside tensor data of " + t.name);
        const auto raw = in.take(n * 4, "tensor data");
        t.tensor.data.resize(n);
        for (std::size_t k = 0; k < n; ++k) {
            const std::uint32_t bits = static_cast<std::uint32_t>(raw[4 * k]) |
                                       (static_cast<std::uint32_t>(raw[4 * k + 1]) << 8) |
                                       (static_cast<std::uint32_t>(raw[4 * k + 2]) << 16) |
                                       (static_cast<std::uint32_t>(raw[4 * k + 3]) << 24);
            t.tensor.data[k] = std::bit_cast<float>(bits);
        }
        params.tensors.push_back(std::move(t));
    }
    if (!in.at_end()) throw WeightsError("trailing bytes after the last tensor");
    return params;
}

ModelParams<float> load_weights(std::span<const std::uint8_t> bytes) {
    auto params = load_weights_unchecked(bytes);
    try {
        validate_router_net(params);
    } catch (const ShapeMismatch& e) {
        throw ShapeMismatchWithArchitecture(e.what());
    }
    return params;
}

void save_weights_file(const ModelParams<float>& params, const std::filesystem::path& path) {
    const auto bytes = save_weights(params);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("cannot write " + path.string());
}

ModelParams<float> load_weights_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return load_weights(bytes);
}

}  // namespace dicomrouter::nn
