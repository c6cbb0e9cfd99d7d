#include "dicomrouter/dicom/dataset.hpp"

#include <bit>
#include <charconv>
#include <cstring>

#include "dicomrouter/dicom/errors.hpp"

namespace dicomrouter::dicom {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\0')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\0')) s.remove_suffix(1);
    return s;
}

template <typename T>
T load_le(const std::uint8_t* p) {
    T out;
    std::memcpy(&out, p, sizeof(T));  // little-endian hosts only
    return out;
}

template <typename T>
void append_binary(const std::vector<std::uint8_t>& raw, std::vector<std::int64_t>& out) {
    for (std::size_t i = 0; i + sizeof(T) <= raw.size(); i += sizeof(T)) {
        out.push_back(static_cast<std::int64_t>(load_le<T>(raw.data() + i)));
    }
}

template <typename T>
void append_float(const std::vector<std::uint8_t>& raw, std::vector<double>& out) {
    for (std::size_t i = 0; i + sizeof(T) <= raw.size(); i += sizeof(T)) {
        out.push_back(static_cast<double>(load_le<T>(raw.data() + i)));
    }
}

}  // namespace

static_assert(std::endian::native == std::endian::little, "little-endian host required");

std::string DataElement::as_string() const {
    std::string_view s(reinterpret_cast<const char*>(value.data()), value.size());
    while (!s.empty() && (s.back() == ' ' || s.back() == '\0')) s.remove_suffix(1);
    return std::string(s);
}

std::vector<std::string> DataElement::strings() const {
    std::vector<std::string> out;
    const std::string text = as_string();
    std::string_view rest(text);
    if (rest.empty()) return out;
    while (true) {
        const auto pos = rest.find('\\');
        out.emplace_back(trim(rest.substr(0, pos)));
        if (pos == std::string_view::npos) break;
        rest.remove_prefix(pos + 1);
    }
    return out;
}

std::vector<std::int64_t> DataElement::integers() const {
    std::vector<std::int64_t> out;
    switch (vr) {
        case Vr::US:
            append_binary<std::uint16_t>(value, out);
            break;
        case Vr::SS:
            append_binary<std::int16_t>(value, out);
            break;
        case Vr::UL:
            append_binary<std::uint32_t>(value, out);
            break;
        case Vr::SL:
            append_binary<std::int32_t>(value, out);
            break;
        case Vr::IS:
            for (const auto& s : strings()) {
                std::string_view sv(s);
                if (!sv.empty() && sv.front() == '+') sv.remove_prefix(1);
                std::int64_t v = 0;
                const auto [ptr, ec] = std::from_chars(sv.data(), sv.data() + sv.size(), v);
                if (ec != std::errc() || ptr != sv.data() + sv.size()) {
                    throw DicomError(ErrorCode::MalformedElement, "bad integer string '" + s + "'", tag);
                }
                out.push_back(v);
            }
            break;
        default:
            break;
    }
    return out;
}

std::vector<double> DataElement::decimals() const {
    std::vector<double> out;
    switch (vr) {
        case Vr::FL:
            append_float<float>(value, out);
            break;
        case Vr::FD:
            append_float<double>(value, out);
            break;
        case Vr::DS:
        case Vr::IS:
            for (const auto& s : strings()) {
                std::string_view sv(s);
                if (!sv.empty() && sv.front() == '+') sv.remove_prefix(1);
                double v = 0;
                const auto [ptr, ec] = std::from_chars(sv.data(), sv.data() + sv.size(), v);
                if (ec != std::errc() || ptr != sv.data() + sv.size()) {
                    throw DicomError(ErrorCode::MalformedElement, "bad decimal string '" + s + "'", tag);
                }
                out.push_back(v);
            }
            break;
        default:
            for (auto v : integers()) out.push_back(static_cast<double>(v));
            break;
    }
    return out;
}

void DataSet::insert(DataElement element) {
    const Tag key = element.tag;
    elements_.insert_or_assign(key, std::move(element));
}

const DataElement* DataSet::find(Tag tag) const {
    const auto it = elements_.find(tag);
    return it == elements_.end() ? nullptr : &it->second;
}

}  // namespace dicomrouter::dicom
