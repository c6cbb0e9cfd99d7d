#include "dicomrouter/service/review_queue.hpp"

#include <algorithm>
#include <fstream>

#include <json.hpp>

#include "dicomrouter/service/audit_log.hpp"

namespace dicomrouter::service {

using nlohmann::json;

std::string_view to_string(ReviewState s) {
    switch (s) {
        case ReviewState::AwaitingRound1: return "awaiting_round1";
        case ReviewState::AwaitingRound2: return "awaiting_round2";
        case ReviewState::NeedsAdjudication: return "needs_adjudication";
        case ReviewState::Closed: return "closed";
    }
    return "closed";
}

ReviewState ReviewItem::state() const {
    if (consensus) return ReviewState::Closed;
    if (!round1) return ReviewState::AwaitingRound1;
    if (!round2) return ReviewState::AwaitingRound2;
    return ReviewState::NeedsAdjudication;
}

double ReviewItem::max_probability() const {
    return *std::max_element(probabilities.begin(), probabilities.end());
}

ReviewQueue::ReviewQueue(fs::path store, SecondRoundMode mode)
    : store_(std::move(store)), mode_(mode) {
    if (!store_.empty()) replay();
}

void ReviewQueue::persist(const std::string& line) {
    if (store_.empty()) return;
    std::ofstream out(store_, std::ios::app | std::ios::binary);
    out << line << '\n';
    out.flush();
    if (!out) throw std::runtime_error("cannot append to review store " + store_.string());
}

void ReviewQueue::replay() {
    std::ifstream in(store_, std::ios::binary);
    if (!in) return;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::parse_error&) {
            continue;  // torn tail from a crash
        }
        const std::string event = j.value("event", "");
        if (event == "enqueue") {
            ReviewItem item;
            item.id = j.at("id").get<std::string>();
            const auto probs = j.at("probs").get<std::vector<double>>();
            std::copy_n(probs.begin(), std::min(probs.size(), nn::kNumClasses), item.probabilities.begin());
            item.predicted = nn::body_part_from_code(j.at("predicted").get<int>());
            item.file = j.value("file", "");
            item.queued_ts = j.value("ts", "");
            items_.emplace(item.id, std::move(item));
        } else if (event == "label") {
            const auto it = items_.find(j.at("id").get<std::string>());
            if (it == items_.end()) continue;
            try {
                apply_label(it->second, j.at("reader").get<std::string>(),
                            static_cast<ReviewRound>(j.at("round").get<int>()),
                            nn::body_part_from_code(j.at("class").get<int>()), j.value("ts", ""));
            } catch (const ReviewConflict&) {
                // Recorded events were valid when written; ignore on mode change.
            }
        }
    }
}

void ReviewQueue::enqueue(ReviewItem item) {
    std::lock_guard lock(mutex_);
    if (items_.contains(item.id)) return;
    if (item.queued_ts.empty()) item.queued_ts = utc_timestamp();
    json j = {{"event", "enqueue"},
              {"id", item.id},
              {"probs", std::vector<double>(item.probabilities.begin(), item.probabilities.end())},
              {"predicted", nn::code(item.predicted)},
              {"file", item.file},
              {"ts", item.queued_ts}};
    persist(j.dump());
    items_.emplace(item.id, std::move(item));
}

ReviewItem ReviewQueue::apply_label(ReviewItem& item, const std::string& reader, ReviewRound round,
                                    nn::BodyPartClass label, const std::string& ts) {
    const auto state = item.state();
    ReaderLabel rl{reader, label, ts};
    switch (round) {
        case ReviewRound::First:
            if (state != ReviewState::AwaitingRound1) throw ReviewConflict("round 1 already labelled");
            item.round1 = rl;
            if (mode_ == SecondRoundMode::Disagreements && label == item.predicted) {
                item.consensus = label;
            }
            break;
        case ReviewRound::Second:
            if (state != ReviewState::AwaitingRound2) {
                throw ReviewConflict(state == ReviewState::AwaitingRound1 ? "round 1 not labelled yet"
                                                                          : "round 2 already labelled");
            }
            if (item.round1->reader == reader) {
                throw ReviewConflict("reader '" + reader + "' already labelled round 1");
            }
            item.round2 = rl;
            if (item.round1->label == label) item.consensus = label;
            break;
        case ReviewRound::Adjudication:
            if (state != ReviewState::NeedsAdjudication) {
                throw ReviewConflict("item is " + std::string(to_string(state)) +
                                     ", not needs_adjudication");
            }
            item.adjudication = rl;
            item.consensus = label;
            break;
        default:
            throw std::invalid_argument("unknown review round");
    }
    return item;
}

ReviewItem ReviewQueue::submit(const std::string& id, const std::string& reader, ReviewRound round,
                               nn::BodyPartClass label) {
    if (reader.empty()) throw std::invalid_argument("reader id is required");
    std::lock_guard lock(mutex_);
    const auto it = items_.find(id);
    if (it == items_.end()) throw ReviewNotFound("no review item '" + id + "'");
    ReviewItem updated = it->second;
    const std::string ts = utc_timestamp();
    apply_label(updated, reader, round, label, ts);
    json j = {{"event", "label"}, {"id", id},           {"reader", reader},
              {"round", static_cast<int>(round)}, {"class", nn::code(label)}, {"ts", ts}};
    persist(j.dump());
    it->second = updated;
    return updated;
}

std::optional<ReviewItem> ReviewQueue::get(const std::string& id) const {
    std::lock_guard lock(mutex_);
    const auto it = items_.find(id);
    if (it == items_.end()) return std::nullopt;
    return it->second;
}

std::vector<ReviewItem> ReviewQueue::all_items() const {
    std::lock_guard lock(mutex_);
    std::vector<ReviewItem> out;
    for (const auto& [id, item] : items_) out.push_back(item);
    return out;
}

std::vector<ReviewItem> ReviewQueue::open_items() const {
    auto items = all_items();
    std::erase_if(items, [](const ReviewItem& i) { return i.consensus.has_value(); });
    std::stable_sort(items.begin(), items.end(), [](const ReviewItem& a, const ReviewItem& b) {
        return a.max_probability() < b.max_probability();
    });
    return items;
}

}  // namespace dicomrouter::service
