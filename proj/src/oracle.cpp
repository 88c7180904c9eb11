#include "advml/oracle.hpp"

#include <algorithm>
#include <cctype>
#include <unordered_map>

#include "advml/errors.hpp"

namespace advml {

namespace {

void require_text(std::string_view text) {
    const bool blank = std::all_of(text.begin(), text.end(), [](unsigned char c) { return std::isspace(c) != 0; });
    if (blank) throw InputError("text is empty");
}

} // namespace

OracleService::OracleService(SampleSet corpus, TargetKind kind, std::uint64_t seed, OracleOptions options)
    : corpus_(std::move(corpus)),
      kind_(kind),
      seed_(seed),
      options_(options),
      original_(TargetModel::train(corpus_, kind, seed)),
      current_(original_) {
    if (options_.calls_per_day == 0) throw InputError("calls_per_day must be positive");
    quota_.calls_per_day = options_.calls_per_day;
}

Label OracleService::classify(std::string_view text) {
    require_text(text);
    std::lock_guard lock(mutex_);
    if (quota_.calls_used_today >= quota_.calls_per_day) throw RateLimitedError(1);
    ++quota_.calls_used_today;
    ++total_calls_;
    return current_.classify(text);
}

void OracleService::submit_feedback(std::string_view text, Label label) {
    require_text(text);
    if (label != Label::one && label != Label::two) throw InputError("feedback label must be 1 or 2");
    std::lock_guard lock(mutex_);
    if (options_.rate_limit_feedback) {
        if (quota_.calls_used_today >= quota_.calls_per_day) throw RateLimitedError(1);
        ++quota_.calls_used_today;
    }
    pending_.emplace_back(std::string(text), label);
}

std::int64_t OracleService::advance_day() {
    std::lock_guard lock(mutex_);
    ++quota_.current_day;
    quota_.calls_used_today = 0;
    return quota_.current_day;
}

OracleStats OracleService::stats() {
    std::lock_guard lock(mutex_);
    return OracleStats{quota_.calls_used_today, quota_.calls_per_day, quota_.current_day, total_calls_};
}

void OracleService::reset() {
    std::lock_guard lock(mutex_);
    current_ = original_;
    pending_.clear();
    absorbed_.clear();
}

TargetModel OracleService::retrain_with_feedback() {
    std::lock_guard lock(mutex_);
    absorbed_.insert(absorbed_.end(), pending_.begin(), pending_.end());
    pending_.clear();
    if (absorbed_.empty()) {
        current_ = original_;
        return current_;
    }

    SampleSet data = corpus_;
    std::unordered_map<std::string_view, std::size_t> by_text;
    for (std::size_t i = 0; i < corpus_.samples.size(); ++i) by_text.emplace(corpus_.samples[i].text, i);
    for (const auto& [text, label] : absorbed_) {
        auto it = by_text.find(text);
        if (it != by_text.end()) data.samples[it->second].label = label;
        else data.samples.push_back(Sample{text, label});
    }
    current_ = TargetModel::train(data, kind_, seed_);
    return current_;
}

TargetModel OracleService::original_model() const {
    std::lock_guard lock(mutex_);
    return original_;
}

TargetModel OracleService::current_model() const {
    std::lock_guard lock(mutex_);
    return current_;
}

QuotaState OracleService::quota() const {
    std::lock_guard lock(mutex_);
    return quota_;
}

std::size_t OracleService::pending_feedback() const {
    std::lock_guard lock(mutex_);
    return pending_.size();
}

} // namespace advml
