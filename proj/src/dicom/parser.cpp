#include "dicomrouter/dicom/parser.hpp"

#include <cstring>
#include <string>

#include "dicomrouter/dicom/errors.hpp"
#include "dictionary.hpp"

namespace dicomrouter::dicom {

namespace {

constexpr std::size_t kPreambleSize = 128;
constexpr int kMaxSequenceDepth = 32;

class Cursor {
public:
    explicit Cursor(std::span<const std::uint8_t> data, std::size_t pos = 0)
        : data_(data), pos_(pos) {}

    std::size_t remaining() const { return data_.size() - pos_; }
    bool at_end() const { return pos_ >= data_.size(); }

    std::uint16_t u16(Tag context) {
        need(2, context);
        const std::uint16_t v =
            static_cast<std::uint16_t>(data_[pos_] | (data_[pos_ + 1] << 8));
        pos_ += 2;
        return v;
    }

    std::uint32_t u32(Tag context) {
        need(4, context);
        const std::uint32_t v = static_cast<std::uint32_t>(data_[pos_]) |
                                (static_cast<std::uint32_t>(data_[pos_ + 1]) << 8) |
                                (static_cast<std::uint32_t>(data_[pos_ + 2]) << 16) |
                                (static_cast<std::uint32_t>(data_[pos_ + 3]) << 24);
        pos_ += 4;
        return v;
    }

    Tag tag() {
        const Tag context{};
        const auto group = u16(context);
        const auto element = u16(context);
        return Tag{group, element};
    }

    std::uint16_t peek_group() const {
        return static_cast<std::uint16_t>(data_[pos_] | (data_[pos_ + 1] << 8));
    }

    std::span<const std::uint8_t> take(std::size_t n, Tag context) {
        need(n, context);
        auto out = data_.subspan(pos_, n);
        pos_ += n;
        return out;
    }

    void skip(std::size_t n, Tag context) { take(n, context); }

private:
    void need(std::size_t n, Tag context) const {
        if (remaining() < n) {
            throw DicomError(ErrorCode::TruncatedElement,
                             "needs " + std::to_string(n) + " bytes, " +
                                 std::to_string(remaining()) + " remain",
                             context);
        }
    }

    std::span<const std::uint8_t> data_;
    std::size_t pos_;
};

struct Header {
    Tag tag;
    Vr vr;
    std::uint32_t length;
};

Header read_header(Cursor& in, bool explicit_vr) {
    Header h{};
    h.tag = in.tag();
    if (h.tag.group == 0xFFFE) {
        // Item and delimiter tags never carry a VR.
        h.vr = Vr::UN;
        h.length = in.u32(h.tag);
        return h;
    }
    if (explicit_vr) {
        const auto code = in.take(2, h.tag);
        const auto vr = vr_from_code(static_cast<char>(code[0]), static_cast<char>(code[1]));
        if (!vr) throw DicomError(ErrorCode::MalformedElement, "unknown value representation", h.tag);
        h.vr = *vr;
        if (has_long_length(h.vr)) {
            in.skip(2, h.tag);
            h.length = in.u32(h.tag);
        } else {
            h.length = in.u16(h.tag);
        }
    } else {
        h.vr = detail::implicit_vr(h.tag);
        h.length = in.u32(h.tag);
    }
    return h;
}

void skip_undefined_sequence(Cursor& in, bool explicit_vr, int depth, Tag owner);

// Item contents with undefined length: elements up to the item delimiter.
void skip_undefined_item(Cursor& in, bool explicit_vr, int depth, Tag owner) {
    while (true) {
        const Header h = read_header(in, explicit_vr);
        if (h.tag == tags::kItemDelimitation) return;
        if (h.tag.group == 0xFFFE) {
            throw DicomError(ErrorCode::MalformedElement, "unexpected delimiter inside item", owner);
        }
        if (h.length == kUndefinedLength) {
            // Explicit UN with undefined length is an implicit-VR encoded sequence.
            const bool nested_explicit = explicit_vr && h.vr != Vr::UN;
            skip_undefined_sequence(in, nested_explicit, depth + 1, h.tag);
        } else {
            in.skip(h.length, h.tag);
        }
    }
}

void skip_undefined_sequence(Cursor& in, bool explicit_vr, int depth, Tag owner) {
    if (depth > kMaxSequenceDepth) {
        throw DicomError(ErrorCode::MalformedElement, "sequence nesting too deep", owner);
    }
    while (true) {
        const Tag t = in.tag();
        const std::uint32_t length = in.u32(t);
        if (t == tags::kSequenceDelimitation) return;
        if (t != tags::kItem) {
            throw DicomError(ErrorCode::MalformedElement, "expected item in sequence", owner);
        }
        if (length == kUndefinedLength) {
            skip_undefined_item(in, explicit_vr, depth, owner);
        } else {
            in.skip(length, t);
        }
    }
}

DataElement read_element(Cursor& in, bool explicit_vr) {
    const Header h = read_header(in, explicit_vr);
    if (h.tag.group == 0xFFFE) {
        throw DicomError(ErrorCode::MalformedElement, "item tag outside a sequence", h.tag);
    }
    DataElement el;
    el.tag = h.tag;
    el.vr = h.vr;
    el.length = h.length;

    if (h.length == kUndefinedLength) {
        if (h.vr != Vr::SQ && h.vr != Vr::UN) {
            throw DicomError(ErrorCode::MalformedElement,
                             "undefined length on " + std::string(to_string(h.vr)), h.tag);
        }
        const bool nested_explicit = explicit_vr && h.vr == Vr::SQ;
        skip_undefined_sequence(in, nested_explicit, 0, h.tag);
        el.vr = Vr::SQ;
        return el;
    }
    if (h.length % 2 != 0) {
        throw DicomError(ErrorCode::MalformedElement, "odd value length", h.tag);
    }
    const auto bytes = in.take(h.length, h.tag);
    if (h.vr != Vr::SQ) el.value.assign(bytes.begin(), bytes.end());
    return el;
}

void append(DataSet& ds, DataElement el, std::optional<Tag>& previous) {
    if (previous && !(*previous < el.tag)) {
        throw DicomError(ErrorCode::MalformedElement,
                         "tags out of order after " + previous->to_string(), el.tag);
    }
    previous = el.tag;
    ds.insert(std::move(el));
}

}  // namespace

ParsedFile parse_file(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < kPreambleSize + 4 ||
        std::memcmp(bytes.data() + kPreambleSize, "DICM", 4) != 0) {
        throw DicomError(ErrorCode::MissingMagic, "no DICM prefix at offset 128");
    }
    Cursor in(bytes, kPreambleSize + 4);

    ParsedFile out{DataSet(TransferSyntax::ExplicitVRLittleEndian), DataSet()};
    std::optional<Tag> previous;
    while (in.remaining() >= 2 && in.peek_group() == 0x0002) {
        append(out.file_meta, read_element(in, true), previous);
    }

    const DataElement* ts_element = out.file_meta.find(tags::kTransferSyntaxUid);
    const std::string uid = ts_element ? ts_element->as_string() : std::string();
    TransferSyntax ts;
    if (uid == kImplicitVrLittleEndianUid) {
        ts = TransferSyntax::ImplicitVRLittleEndian;
    } else if (uid == kExplicitVrLittleEndianUid) {
        ts = TransferSyntax::ExplicitVRLittleEndian;
    } else {
        throw DicomError(ErrorCode::UnsupportedTransferSyntax,
                         uid.empty() ? "no transfer syntax in file meta" : uid,
                         tags::kTransferSyntaxUid);
    }
    out.dataset.set_transfer_syntax(ts);

    const bool explicit_vr = ts == TransferSyntax::ExplicitVRLittleEndian;
    previous.reset();
    while (!in.at_end()) {
        append(out.dataset, read_element(in, explicit_vr), previous);
    }
    return out;
}

}  // namespace dicomrouter::dicom
