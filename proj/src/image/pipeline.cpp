#include "dicomrouter/image/pipeline.hpp"

#include <cmath>

#include "dicomrouter/image/resize.hpp"
#include "dicomrouter/simd/kernels.hpp"

namespace dicomrouter::image {

bool ImageTensor::is_valid() const {
    if (values.size() != height * width) return false;
    for (const float v : values) {
        if (!std::isfinite(v) || v < 0.0f || v > 1.0f) return false;
    }
    return true;
}

DecimalMatrix apply_modality_rescale(const dicom::PixelMatrix& raw, double slope, double intercept) {
    DecimalMatrix out{raw.rows, raw.cols, std::vector<double>(raw.values.size())};
    simd::active_kernels().rescale_i32(raw.values.data(), slope, intercept, out.values.data(),
                                       raw.values.size());
    return out;
}

ImageTensor apply_voi_window(const DecimalMatrix& values, std::optional<WindowSpec> window) {
    ImageTensor out(values.rows, values.cols);
    if (values.values.empty()) return out;
    const auto& k = simd::active_kernels();
    if (window) {
        if (!(window->width >= 1.0)) {
            throw InvalidWindow("window width must be >= 1, got " + std::to_string(window->width));
        }
        const double shifted = window->center - 0.5;
        const double half_span = (window->width - 1.0) / 2.0;
        const double inv_span = 1.0 / (window->width - 1.0);
        k.voi_linear(values.values.data(), shifted - half_span, shifted + half_span, shifted,
                     inv_span, out.values.data(), values.values.size());
        return out;
    }
    double lo = 0.0;
    double hi = 0.0;
    k.minmax_f64(values.values.data(), values.values.size(), &lo, &hi);
    const double scale = hi > lo ? 1.0 / (hi - lo) : 0.0;
    k.normalize_f64(values.values.data(), lo, scale, out.values.data(), values.values.size());
    return out;
}

ImageTensor apply_photometric(ImageTensor img, dicom::Photometric photometric) {
    if (photometric == dicom::Photometric::Monochrome1) {
        for (float& v : img.values) v = 1.0f - v;
    }
    return img;
}

std::optional<WindowSpec> window_from(const dicom::PixelDescriptor& desc) {
    if (desc.window_center && desc.window_width) {
        return WindowSpec{*desc.window_center, *desc.window_width};
    }
    return std::nullopt;
}

ImageTensor preprocess_dataset(const dicom::DataSet& dataset, std::size_t out_size) {
    const auto desc = dicom::read_pixel_descriptor(dataset);
    const auto raw = dicom::extract_pixel_data(dataset, desc);
    const auto rescaled = apply_modality_rescale(raw, desc.rescale_slope, desc.rescale_intercept);
    auto windowed = apply_voi_window(rescaled, window_from(desc));
    windowed = apply_photometric(std::move(windowed), desc.photometric);
    return resize_bilinear(windowed, out_size, out_size);
}

ImageTensor preprocess(std::span<const std::uint8_t> file_bytes, std::size_t out_size) {
    const auto parsed = dicom::parse_file(file_bytes);
    return preprocess_dataset(parsed.dataset, out_size);
}

}  // namespace dicomrouter::image
