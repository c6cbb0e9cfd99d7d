#pragma once

// Low-confidence items awaiting human labels.
//
// Round 1 and round 2 are labelled by different readers. Agreement sets the
// consensus; disagreement flags the item for adjudication, whose label
// becomes the consensus. In Disagreements mode an item whose round-1 label
// matches the model's prediction closes without a second round.
//
// State persists as an append-only JSONL event log replayed on startup.

#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "dicomrouter/nn/body_part.hpp"
#include "dicomrouter/service/config.hpp"

namespace dicomrouter::service {

class ReviewNotFound : public std::out_of_range {
public:
    using std::out_of_range::out_of_range;
};

/// The requested label is not allowed in the item's current state.
class ReviewConflict : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

enum class ReviewRound { First = 1, Second = 2, Adjudication = 3 };

enum class ReviewState { AwaitingRound1, AwaitingRound2, NeedsAdjudication, Closed };

std::string_view to_string(ReviewState s);

struct ReaderLabel {
    std::string reader;
    nn::BodyPartClass label;
    std::string ts;

    bool operator==(const ReaderLabel&) const = default;
};

struct ReviewItem {
    std::string id;
    nn::Probabilities probabilities{};
    nn::BodyPartClass predicted = nn::BodyPartClass::Others;
    std::string file;  // stored DICOM in the review directory
    std::string queued_ts;
    std::optional<ReaderLabel> round1;
    std::optional<ReaderLabel> round2;
    std::optional<ReaderLabel> adjudication;
    std::optional<nn::BodyPartClass> consensus;

    ReviewState state() const;
    double max_probability() const;

    bool operator==(const ReviewItem&) const = default;
};

class ReviewQueue {
public:
    /// `store` may be empty for a memory-only queue.
    ReviewQueue(fs::path store, SecondRoundMode mode);

    SecondRoundMode mode() const { return mode_; }

    /// Adds a new item; re-adding an existing id is ignored.
    void enqueue(ReviewItem item);

    /// Applies one reader's label and returns the updated item.
    /// Throws ReviewNotFound, ReviewConflict, or std::invalid_argument for an
    /// empty reader id.
    ReviewItem submit(const std::string& id, const std::string& reader, ReviewRound round,
                      nn::BodyPartClass label);

    std::optional<ReviewItem> get(const std::string& id) const;

    /// Open items (no consensus), ascending by max probability, then id.
    std::vector<ReviewItem> open_items() const;
    std::vector<ReviewItem> all_items() const;

private:
    void replay();
    void persist(const std::string& line);
    ReviewItem apply_label(ReviewItem& item, const std::string& reader, ReviewRound round,
                           nn::BodyPartClass label, const std::string& ts);

    fs::path store_;
    SecondRoundMode mode_;
    mutable std::mutex mutex_;
    std::map<std::string, ReviewItem> items_;
};

}  // namespace dicomrouter::service
