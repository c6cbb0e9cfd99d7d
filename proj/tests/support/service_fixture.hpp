#pragma once

// Scratch router deployments for service tests.

#include <memory>
#include <string>

#include "dicomrouter/image/dicom_encode.hpp"
#include "dicomrouter/nn/backend.hpp"
#include "dicomrouter/service/config.hpp"
#include "test_support.hpp"

namespace testsupport {

namespace svc = dicomrouter::service;
namespace nn = dicomrouter::nn;

/// Every class routes to <root>/routed/<class>, state lives in <root>/state.
inline svc::RouteConfig scratch_config(const fs::path& root, std::size_t input_size = 16) {
    svc::RouteConfig c;
    for (std::size_t k = 0; k < nn::kNumClasses; ++k) {
        c.destinations[k] = {svc::Destination::Kind::Directory,
                             (root / "routed" / std::string(nn::to_string(nn::kAllClasses[k]))).string()};
    }
    c.watch_dir = root / "inbox";
    c.review_dir = root / "review";
    c.quarantine_dir = root / "quarantine";
    c.failed_dir = root / "failed";
    c.audit_log = root / "state" / "audit.jsonl";
    c.review_store = root / "state" / "review_labels.jsonl";
    c.input_size = input_size;
    c.retry.base_delay_s = 0.0;
    c.poll_interval_s = 0.02;
    return c;
}

/// Backend returning fixed logits regardless of the image.
inline std::shared_ptr<nn::Backend> fixed_backend(nn::Logits z, std::size_t input_size = 16) {
    return std::make_shared<nn::CallbackBackend>("fixed", input_size, [z](const auto&) { return z; });
}

/// Softmax of these logits puts more than 0.999 on `cls`.
inline nn::Logits confident_logits(nn::BodyPartClass cls) {
    nn::Logits z{};
    z[static_cast<std::size_t>(nn::code(cls))] = 10.0;
    return z;
}

/// Small 12-bit DICOM with a random payload and the given SOP Instance UID.
inline std::vector<std::uint8_t> random_dicom(const std::string& uid, std::uint64_t seed, std::size_t side = 16) {
    dicomrouter::Xoshiro256ss rng(seed);
    dicomrouter::image::ImageTensor img(side, side);
    for (auto& v : img.values) v = static_cast<float>(rng.uniform());
    dicomrouter::image::DicomEncodeOptions opt;
    opt.sop_instance_uid = uid;
    return dicomrouter::image::encode_as_dicom(img, opt);
}

inline std::size_t count_files(const fs::path& dir) {
    std::size_t n = 0;
    std::error_code ec;
    if (!fs::exists(dir, ec)) return 0;
    for (const auto& e : fs::recursive_directory_iterator(dir)) n += e.is_regular_file();
    return n;
}

}  // namespace testsupport
