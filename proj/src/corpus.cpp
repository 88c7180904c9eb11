#include "advml/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "advml/errors.hpp"
#include "advml/rng.hpp"

namespace advml {

namespace {

bool is_blank(std::string_view s) {
    return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c) != 0; });
}

bool is_word_byte(unsigned char c) {
    return c >= 0x80 || (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
}

constexpr std::string_view kConsonants = "bdfgklmnprstvwz";
constexpr std::string_view kVowels = "aeiou";

// Injective id -> pronounceable token: positional base-75 digits (no leading
// zero), one consonant-vowel syllable per digit.
std::string synthetic_word(std::size_t id) {
    const std::size_t base = kConsonants.size() * kVowels.size();
    std::size_t v = id + base; // at least two syllables
    std::string out;
    while (v > 0) {
        std::size_t digit = v % base;
        v /= base;
        out.insert(out.begin(), kVowels[digit % kVowels.size()]);
        out.insert(out.begin(), kConsonants[digit / kVowels.size()]);
    }
    return out;
}

std::vector<double> zipf_cdf(std::size_t n) {
    std::vector<double> cdf(n);
    double acc = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
        acc += 1.0 / static_cast<double>(r + 1);
        cdf[r] = acc;
    }
    for (auto& c : cdf) c /= acc;
    return cdf;
}

} // namespace

std::optional<Label> label_from_int(long long value) {
    if (value == 1) return Label::one;
    if (value == 2) return Label::two;
    return std::nullopt;
}

Sample make_sample(std::string text, std::optional<Label> label) {
    if (is_blank(text)) throw InputError("sample text is empty");
    return Sample{std::move(text), label};
}

std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> tokens;
    std::string current;
    for (unsigned char c : text) {
        if (is_word_byte(c)) {
            current.push_back(c < 0x80 ? static_cast<char>(std::tolower(c)) : static_cast<char>(c));
        } else if (!current.empty()) {
            tokens.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) tokens.push_back(std::move(current));
    return tokens;
}

SampleSet read_corpus(std::istream& in) {
    SampleSet set;
    set.provenance = Provenance::file;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (is_blank(line)) continue;
        auto tab = line.find('\t');
        if (tab == std::string::npos) {
            set.samples.push_back(Sample{line, std::nullopt});
            continue;
        }
        std::string_view field(line.data(), tab);
        std::optional<Label> label;
        if (field == "1") label = Label::one;
        if (field == "2") label = Label::two;
        if (!label) throw ParseError(line_no, "label must be 1 or 2, got '" + std::string(field) + "'");
        std::string text = line.substr(tab + 1);
        if (is_blank(text)) throw ParseError(line_no, "empty text");
        set.samples.push_back(Sample{std::move(text), label});
    }
    if (set.samples.empty()) throw ParseError(line_no, "corpus is empty");
    return set;
}

SampleSet load_corpus(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open corpus " + path.string());
    return read_corpus(in);
}

void write_corpus(const SampleSet& corpus, std::ostream& out) {
    for (const auto& s : corpus.samples) {
        if (s.label) out << to_int(*s.label) << '\t';
        out << s.text << '\n';
    }
}

void save_corpus(const SampleSet& corpus, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write corpus " + path.string());
    write_corpus(corpus, out);
}

SampleSet generate_corpus(std::size_t n, std::size_t vocab_size, double overlap, std::uint64_t seed) {
    if (n == 0) throw InputError("generate_corpus: n must be positive");
    if (vocab_size == 0) throw InputError("generate_corpus: vocab_size must be positive");
    if (!(overlap >= 0.0 && overlap <= 1.0)) throw InputError("generate_corpus: overlap must be in [0, 1]");

    const auto shared = static_cast<std::size_t>(std::llround(overlap * static_cast<double>(vocab_size)));
    const std::size_t unique = vocab_size - shared;

    // Rank order per class: shared words take the top ranks, like function
    // words, followed by the class-specific words.
    std::vector<std::string> class_words[2];
    for (int c = 0; c < 2; ++c) {
        class_words[c].reserve(vocab_size);
        for (std::size_t i = 0; i < shared; ++i) class_words[c].push_back(synthetic_word(i));
        for (std::size_t i = 0; i < unique; ++i)
            class_words[c].push_back(synthetic_word(shared + static_cast<std::size_t>(c) * unique + i));
    }
    constexpr std::size_t kMinTokens = 12;
    constexpr std::size_t kMaxTokens = 25;
    const auto cdf = zipf_cdf(vocab_size);

    Rng rng(derive_seed(seed, "generate_corpus"));
    std::vector<Label> labels(n, Label::two);
    std::fill(labels.begin(), labels.begin() + static_cast<std::ptrdiff_t>((n + 1) / 2), Label::one);
    rng.shuffle(std::span<Label>(labels));

    SampleSet set;
    set.provenance = Provenance::generated;
    set.samples.reserve(n);
    for (Label label : labels) {
        const auto& words = class_words[label == Label::one ? 0 : 1];
        const std::size_t len = kMinTokens + rng.below(kMaxTokens - kMinTokens + 1);
        std::string text;
        for (std::size_t t = 0; t < len; ++t) {
            const double u = rng.uniform();
            auto rank = static_cast<std::size_t>(std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
            rank = std::min(rank, vocab_size - 1);
            if (t > 0) text.push_back(' ');
            text += words[rank];
        }
        set.samples.push_back(Sample{std::move(text), label});
    }
    return set;
}

Vocabulary::Vocabulary(std::vector<Entry> entries) : entries_(std::move(entries)) {
    index_.reserve(entries_.size());
    for (std::size_t i = 0; i < entries_.size(); ++i) {
        if (!index_.emplace(entries_[i].word, i).second)
            throw InputError("duplicate vocabulary word '" + entries_[i].word + "'");
        if (i > 0 && entries_[i].frequency > entries_[i - 1].frequency)
            throw InputError("vocabulary frequencies must be non-increasing");
    }
}

std::optional<std::size_t> Vocabulary::index_of(std::string_view word) const {
    auto it = index_.find(std::string(word));
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

Vocabulary build_vocabulary(const SampleSet& corpus, std::size_t k) {
    if (corpus.empty()) throw InputError("build_vocabulary: corpus is empty");
    if (k == 0) throw InputError("build_vocabulary: k must be positive");
    std::unordered_map<std::string, std::uint64_t> counts;
    for (const auto& s : corpus.samples)
        for (auto& tok : tokenize(s.text)) ++counts[std::move(tok)];

    std::vector<Vocabulary::Entry> entries;
    entries.reserve(counts.size());
    for (auto& [word, count] : counts) entries.push_back({word, count});
    auto by_rank = [](const Vocabulary::Entry& a, const Vocabulary::Entry& b) {
        if (a.frequency != b.frequency) return a.frequency > b.frequency;
        return a.word < b.word;
    };
    const std::size_t keep = std::min(k, entries.size());
    std::partial_sort(entries.begin(), entries.begin() + static_cast<std::ptrdiff_t>(keep), entries.end(), by_rank);
    entries.resize(keep);
    return Vocabulary(std::move(entries));
}

void write_vocabulary(const Vocabulary& vocab, std::ostream& out) {
    for (const auto& e : vocab.entries()) out << e.word << '\t' << e.frequency << '\n';
}

Vocabulary read_vocabulary(std::istream& in) {
    std::vector<Vocabulary::Entry> entries;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) break;
        auto tab = line.find('\t');
        if (tab == std::string::npos || tab == 0) throw ParseError(line_no, "expected word<TAB>frequency");
        std::uint64_t freq = 0;
        std::istringstream field(line.substr(tab + 1));
        if (!(field >> freq)) throw ParseError(line_no, "bad frequency");
        entries.push_back({line.substr(0, tab), freq});
    }
    try {
        return Vocabulary(std::move(entries));
    } catch (const InputError& e) {
        throw ParseError(line_no, e.what());
    }
}

std::uint32_t FeatureVector::count(std::size_t i) const {
    auto it = std::lower_bound(nonzeros.begin(), nonzeros.end(), i,
                               [](const auto& nz, std::size_t idx) { return nz.first < idx; });
    return (it != nonzeros.end() && it->first == i) ? it->second : 0;
}

std::vector<double> FeatureVector::dense() const {
    std::vector<double> out(dim, 0.0);
    for (auto [i, c] : nonzeros) out[i] = c;
    return out;
}

std::uint64_t FeatureVector::total() const {
    std::uint64_t sum = 0;
    for (auto [i, c] : nonzeros) sum += c;
    return sum;
}

FeatureVector featurize(std::string_view text, const Vocabulary& vocab) {
    if (vocab.empty()) throw InputError("featurize: vocabulary is empty");
    std::map<std::uint32_t, std::uint32_t> counts;
    for (const auto& tok : tokenize(text))
        if (auto idx = vocab.index_of(tok)) ++counts[static_cast<std::uint32_t>(*idx)];
    FeatureVector fv;
    fv.dim = vocab.size();
    fv.nonzeros.assign(counts.begin(), counts.end());
    return fv;
}

} // namespace advml
