#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace advml {

// Binary class label as returned by the target API.
enum class Label : std::uint8_t { one = 1, two = 2 };

inline Label flip(Label l) { return l == Label::one ? Label::two : Label::one; }
inline int to_int(Label l) { return static_cast<int>(l); }
std::optional<Label> label_from_int(long long value);

struct Sample {
    std::string text;
    std::optional<Label> label;

    bool operator==(const Sample&) const = default;
};

// Validates the sample invariant (text non-blank) and builds the sample.
Sample make_sample(std::string text, std::optional<Label> label = std::nullopt);

enum class Provenance { file, generated };

struct SampleSet {
    std::vector<Sample> samples;
    Provenance provenance = Provenance::generated;

    std::size_t size() const { return samples.size(); }
    bool empty() const { return samples.empty(); }
    bool operator==(const SampleSet&) const = default;
};

// Lowercases ASCII and splits on runs of non-alphanumeric bytes. Bytes >= 0x80
// are kept inside tokens so UTF-8 words survive intact.
std::vector<std::string> tokenize(std::string_view text);

SampleSet load_corpus(const std::filesystem::path& path);
SampleSet read_corpus(std::istream& in);
void save_corpus(const SampleSet& corpus, const std::filesystem::path& path);
void write_corpus(const SampleSet& corpus, std::ostream& out);

// Synthetic two-class corpus with Zipf-weighted class vocabularies. The first
// round(overlap * vocab_size) ranks of both class vocabularies hold the same
// shared words; the remaining ranks are class-specific.
SampleSet generate_corpus(std::size_t n, std::size_t vocab_size, double overlap, std::uint64_t seed);

class Vocabulary {
public:
    struct Entry {
        std::string word;
        std::uint64_t frequency;

        bool operator==(const Entry&) const = default;
    };

    Vocabulary() = default;
    // Entries must already satisfy the ordering and uniqueness invariants.
    explicit Vocabulary(std::vector<Entry> entries);

    std::size_t size() const { return entries_.size(); }
    bool empty() const { return entries_.empty(); }
    const std::vector<Entry>& entries() const { return entries_; }
    const Entry& operator[](std::size_t i) const { return entries_[i]; }
    std::optional<std::size_t> index_of(std::string_view word) const;

    bool operator==(const Vocabulary& other) const { return entries_ == other.entries_; }

private:
    std::vector<Entry> entries_;
    std::unordered_map<std::string, std::size_t> index_;
};

// Top-k words by total occurrence count, ties broken lexicographically.
Vocabulary build_vocabulary(const SampleSet& corpus, std::size_t k);

void write_vocabulary(const Vocabulary& vocab, std::ostream& out);
Vocabulary read_vocabulary(std::istream& in);

// Sparse bag-of-words counts over a vocabulary. Nonzeros are sorted by index.
struct FeatureVector {
    std::size_t dim = 0;
    std::vector<std::pair<std::uint32_t, std::uint32_t>> nonzeros;

    std::uint32_t count(std::size_t i) const;
    std::vector<double> dense() const;
    std::uint64_t total() const;

    bool operator==(const FeatureVector&) const = default;
};

FeatureVector featurize(std::string_view text, const Vocabulary& vocab);

} // namespace advml
