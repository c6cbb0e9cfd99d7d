#include "dicomrouter/image/png.hpp"

#include <zlib.h>

#include <array>
#include <cmath>
#include <stdexcept>
#include <string_view>

namespace dicomrouter::image {

namespace {

constexpr std::array<std::uint8_t, 8> kSignature = {0x89, 0x50, 0x4E, 0x47, 0x0D, 0x0A, 0x1A, 0x0A};

void put_u32_be(std::vector<std::uint8_t>& out, std::uint32_t v) {
    out.push_back(static_cast<std::uint8_t>(v >> 24));
    out.push_back(static_cast<std::uint8_t>(v >> 16));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v));
}

void chunk(std::vector<std::uint8_t>& out, std::string_view type,
           const std::vector<std::uint8_t>& data) {
    put_u32_be(out, static_cast<std::uint32_t>(data.size()));
    const std::size_t type_at = out.size();
    out.insert(out.end(), type.begin(), type.end());
    out.insert(out.end(), data.begin(), data.end());
    uLong crc = crc32(0L, Z_NULL, 0);
    crc = crc32(crc, out.data() + type_at, static_cast<uInt>(out.size() - type_at));
    put_u32_be(out, static_cast<std::uint32_t>(crc));
}

}  // namespace

std::uint8_t quantize_sample(float v) {
    const float clamped = std::min(std::max(v, 0.0f), 1.0f);
    return static_cast<std::uint8_t>(std::lround(static_cast<double>(clamped) * 255.0));
}

std::vector<std::uint8_t> encode_png_gray8(std::size_t width, std::size_t height,
                                           const std::vector<std::uint8_t>& samples) {
    if (width == 0 || height == 0 || samples.size() != width * height) {
        throw std::invalid_argument("encode_png_gray8: sample count does not match dimensions");
    }
    // Filter type 0 (None) on every scanline.
    std::vector<std::uint8_t> raw;
    raw.reserve(height * (width + 1));
    for (std::size_t y = 0; y < height; ++y) {
        raw.push_back(0);
        raw.insert(raw.end(), samples.begin() + static_cast<std::ptrdiff_t>(y * width),
                   samples.begin() + static_cast<std::ptrdiff_t>((y + 1) * width));
    }
    uLongf packed_size = compressBound(static_cast<uLong>(raw.size()));
    std::vector<std::uint8_t> packed(packed_size);
    if (compress2(packed.data(), &packed_size, raw.data(), static_cast<uLong>(raw.size()), 6) != Z_OK) {
        throw std::runtime_error("encode_png_gray8: deflate failed");
    }
    packed.resize(packed_size);

    std::vector<std::uint8_t> out(kSignature.begin(), kSignature.end());
    std::vector<std::uint8_t> ihdr;
    put_u32_be(ihdr, static_cast<std::uint32_t>(width));
    put_u32_be(ihdr, static_cast<std::uint32_t>(height));
    ihdr.push_back(8);  // bit depth
    ihdr.push_back(0);  // grayscale
    ihdr.push_back(0);  // deflate
    ihdr.push_back(0);  // adaptive filtering
    ihdr.push_back(0);  // no interlace
    chunk(out, "IHDR", ihdr);
    chunk(out, "IDAT", packed);
    chunk(out, "IEND", {});
    return out;
}

std::vector<std::uint8_t> export_png(const ImageTensor& img) {
    std::vector<std::uint8_t> samples(img.values.size());
    for (std::size_t i = 0; i < samples.size(); ++i) samples[i] = quantize_sample(img.values[i]);
    return encode_png_gray8(img.width, img.height, samples);
}

}  // namespace dicomrouter::image
