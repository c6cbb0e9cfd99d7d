#include "dicomrouter/dicom/dump.hpp"

#include <cstdio>
#include <cstring>
#include <sstream>

namespace dicomrouter::dicom {

namespace {

template <typename T>
std::vector<T> unpack(const std::vector<std::uint8_t>& raw) {
    std::vector<T> out(raw.size() / sizeof(T));
    if (!out.empty()) std::memcpy(out.data(), raw.data(), out.size() * sizeof(T));
    return out;
}

template <typename T>
std::string join_numbers(const std::vector<std::uint8_t>& raw, const char* fmt) {
    std::string out;
    for (const T v : unpack<T>(raw)) {
        if (!out.empty()) out += '\\';
        char buf[40];
        if constexpr (std::is_floating_point_v<T>) {
            std::snprintf(buf, sizeof(buf), fmt, static_cast<double>(v));
        } else {
            std::snprintf(buf, sizeof(buf), fmt, static_cast<long long>(v));
        }
        out += buf;
    }
    return out;
}

// Latin-1 to UTF-8, so the dump compares equal to text written by other tools.
std::string latin1_to_utf8(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (const unsigned char c : s) {
        if (c < 0x80) {
            out += static_cast<char>(c);
        } else {
            out += static_cast<char>(0xC0 | (c >> 6));
            out += static_cast<char>(0x80 | (c & 0x3F));
        }
    }
    return out;
}

std::string format_value(const DataElement& el) {
    if (el.vr == Vr::SQ) return "(sequence)";
    if (is_string_vr(el.vr)) return "[" + latin1_to_utf8(el.as_string()) + "]";
    switch (el.vr) {
        case Vr::US:
            return join_numbers<std::uint16_t>(el.value, "%lld");
        case Vr::SS:
            return join_numbers<std::int16_t>(el.value, "%lld");
        case Vr::UL:
            return join_numbers<std::uint32_t>(el.value, "%lld");
        case Vr::SL:
            return join_numbers<std::int32_t>(el.value, "%lld");
        case Vr::FL:
            return join_numbers<float>(el.value, "%.9g");
        case Vr::FD:
            return join_numbers<double>(el.value, "%.17g");
        case Vr::AT: {
            std::string out;
            const auto words = unpack<std::uint16_t>(el.value);
            for (std::size_t i = 0; i + 1 < words.size(); i += 2) {
                if (!out.empty()) out += '\\';
                out += Tag{words[i], words[i + 1]}.to_string();
            }
            return out;
        }
        default: {
            static constexpr char kHex[] = "0123456789abcdef";
            std::string out;
            const std::size_t shown = std::min<std::size_t>(el.value.size(), 16);
            for (std::size_t i = 0; i < shown; ++i) {
                out += kHex[el.value[i] >> 4];
                out += kHex[el.value[i] & 0xF];
            }
            if (el.value.size() > 16) out += "...";
            return out;
        }
    }
}

}  // namespace

std::string format_element(const DataElement& el) {
    char head[32];
    std::snprintf(head, sizeof(head), "%04X,%04X ", el.tag.group, el.tag.element);
    std::string line = head;
    line += to_string(el.vr);
    line += ' ';
    line += el.undefined_length() ? std::string("undefined") : std::to_string(el.length);
    line += ' ';
    line += format_value(el);
    return line;
}

std::string dump(const ParsedFile& file) {
    std::string out;
    for (const auto* ds : {&file.file_meta, &file.dataset}) {
        for (const auto& [tag, el] : *ds) {
            out += format_element(el);
            out += '\n';
        }
    }
    return out;
}

}  // namespace dicomrouter::dicom
