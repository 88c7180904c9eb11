#pragma once

#include <cstddef>
#include <cstdint>
#include <mutex>
#include <string_view>
#include <utility>
#include <vector>

#include "advml/corpus.hpp"
#include "advml/target.hpp"

namespace advml {

struct QuotaState {
    std::size_t calls_per_day = 1000;
    std::size_t calls_used_today = 0;
    std::int64_t current_day = 0;

    bool operator==(const QuotaState&) const = default;
};

struct OracleStats {
    std::size_t calls_used_today = 0;
    std::size_t calls_per_day = 0;
    std::int64_t day = 0;
    // Accepted classify calls since construction, across all days.
    std::uint64_t total_calls = 0;

    bool operator==(const OracleStats&) const = default;
};

// The black-box surface an adversary sees. Implemented in-process by
// OracleService and over the wire by RemoteOracle.
class Oracle {
public:
    virtual ~Oracle() = default;

    // Label only. Throws RateLimitedError when today's quota is spent and
    // InputError for blank text; neither consumes quota.
    virtual Label classify(std::string_view text) = 0;
    virtual void submit_feedback(std::string_view text, Label label) = 0;
    virtual void retrain() = 0;

    // Admin channel, never rate limited.
    virtual std::int64_t advance_day() = 0;
    virtual OracleStats stats() = 0;
    // Restores the originally trained model and drops all feedback. Quota
    // state is left untouched.
    virtual void reset() = 0;
};

struct OracleOptions {
    std::size_t calls_per_day = 1000;
    bool rate_limit_feedback = false;
};

// Simulated target T behind a per-day quota, with a feedback buffer that a
// retrain folds into the training corpus to produce the updated model.
// All state transitions happen under one mutex.
class OracleService final : public Oracle {
public:
    OracleService(SampleSet corpus, TargetKind kind, std::uint64_t seed, OracleOptions options = {});

    Label classify(std::string_view text) override;
    void submit_feedback(std::string_view text, Label label) override;
    void submit_feedback(const Sample& sample, Label label) { submit_feedback(sample.text, label); }
    void retrain() override { retrain_with_feedback(); }
    std::int64_t advance_day() override;
    OracleStats stats() override;
    void reset() override;

    // Refits on the corpus plus every feedback item received so far, feedback
    // labels overriding corpus labels for identical texts. Clears the buffer.
    TargetModel retrain_with_feedback();

    TargetModel original_model() const;
    TargetModel current_model() const;
    QuotaState quota() const;
    std::size_t pending_feedback() const;

private:
    mutable std::mutex mutex_;
    SampleSet corpus_;
    TargetKind kind_;
    std::uint64_t seed_;
    OracleOptions options_;
    TargetModel original_;
    TargetModel current_;
    QuotaState quota_;
    std::uint64_t total_calls_ = 0;
    std::vector<std::pair<std::string, Label>> pending_;
    std::vector<std::pair<std::string, Label>> absorbed_;
};

} // namespace advml
