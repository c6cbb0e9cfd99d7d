#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dicomrouter/dicom/tag.hpp"
#include "dicomrouter/dicom/vr.hpp"

namespace dicomrouter::dicom {

enum class TransferSyntax { ImplicitVRLittleEndian, ExplicitVRLittleEndian };

inline constexpr std::string_view kImplicitVrLittleEndianUid = "1.2.840.10008.1.2";
inline constexpr std::string_view kExplicitVrLittleEndianUid = "1.2.840.10008.1.2.1";
inline constexpr std::uint32_t kUndefinedLength = 0xFFFFFFFFu;

struct DataElement {
    Tag tag;
    Vr vr = Vr::UN;
    std::uint32_t length = 0;  // declared length; kUndefinedLength for skipped sequences
    std::vector<std::uint8_t> value;  // empty for skipped sequences

    bool undefined_length() const { return length == kUndefinedLength; }

    /// Raw bytes as text with trailing NUL/space padding removed.
    std::string as_string() const;

    /// Backslash-separated components, each trimmed of surrounding spaces.
    std::vector<std::string> strings() const;

    /// Binary integers (US, SS, UL, SL) or integer strings (IS).
    std::vector<std::int64_t> integers() const;

    /// Decimal strings (DS, IS) or binary floats (FL, FD). Throws
    /// DicomError(MalformedElement) on unparsable text.
    std::vector<double> decimals() const;
};

/// Attributes keyed by tag; iteration follows tag order.
class DataSet {
public:
    explicit DataSet(TransferSyntax ts = TransferSyntax::ExplicitVRLittleEndian)
        : transfer_syntax_(ts) {}

    TransferSyntax transfer_syntax() const { return transfer_syntax_; }
    void set_transfer_syntax(TransferSyntax ts) { transfer_syntax_ = ts; }

    void insert(DataElement element);
    const DataElement* find(Tag tag) const;
    bool contains(Tag tag) const { return find(tag) != nullptr; }

    std::size_t size() const { return elements_.size(); }
    bool empty() const { return elements_.empty(); }
    auto begin() const { return elements_.begin(); }
    auto end() const { return elements_.end(); }

private:
    TransferSyntax transfer_syntax_;
    std::map<Tag, DataElement> elements_;
};

/// Absent tags yield nullptr, never an error.
inline const DataElement* get_element(const DataSet& dataset, Tag tag) {
    return dataset.find(tag);
}

}  // namespace dicomrouter::dicom
