#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "cfrec/errors.hpp"

namespace cfrec {

/// One user-item review record as parsed from source files.
struct Interaction {
    std::string user_id;
    std::string item_id;
    double rating = 0.0;
    std::vector<std::string> tokens;
    std::optional<std::int64_t> timestamp;
};

enum class Split : std::uint8_t { train = 0, val = 1, test = 2 };

/// Lowercases ASCII letters and splits on runs of non-alphanumerics.
std::vector<std::string> tokenize(const std::string& text);

struct ParseStats {
    std::size_t lines = 0;
    std::size_t skipped = 0;
};

/// One JSON object per line with fields reviewerID, asin, overall,
/// reviewText and optional unixReviewTime. Malformed lines, missing fields
/// and ratings outside [1,5] are counted and skipped.
std::vector<Interaction> parse_amazon_jsonl(const std::string& path, ParseStats* stats = nullptr);

/// One JSON object per line with fields user_id, business_id, stars, text
/// and optional date (epoch seconds or "YYYY-MM-DD HH:MM:SS").
std::vector<Interaction> parse_yelp_jsonl(const std::string& path, ParseStats* stats = nullptr);

/// Keeps the largest subset where every user and every item retains at
/// least k interactions, by repeated pruning to the fixpoint. Input order
/// is preserved. Throws EmptyDatasetError when nothing survives.
std::vector<Interaction> k_core_filter(std::vector<Interaction> interactions, int k);

/// Token ids: 0 is the padding id, 1 the out-of-vocabulary id, content
/// tokens start at 2 ordered by descending frequency then lexicographic.
struct Vocab {
    static constexpr int kPad = 0;
    static constexpr int kUnk = 1;

    std::unordered_map<std::string, int> token_to_id;
    std::vector<std::string> id_to_token;  // [0], [1] are pseudo-tokens

    int size() const { return static_cast<int>(id_to_token.size()); }
    int id_or_unk(const std::string& token) const {
        auto it = token_to_id.find(token);
        return it == token_to_id.end() ? kUnk : it->second;
    }
};

/// Counts tokens across the given documents; keeps tokens with frequency
/// >= min_freq, capped at max_size content entries.
Vocab build_vocab(const std::vector<const std::vector<std::string>*>& docs, int min_freq,
                  int max_size);

/// Deterministic shuffle-then-cut split. Ratios must be positive and sum
/// to 1 within 1e-9; cut points are floor(r1*N) and floor((r1+r2)*N).
std::vector<Split> assign_splits(std::size_t n, const std::array<double, 3>& ratios,
                                 std::uint64_t seed);

struct CorpusConfig {
    int k_core = 5;
    std::array<double, 3> ratios{0.8, 0.1, 0.1};
    std::uint64_t split_seed = 670849;
    int min_freq = 5;
    int max_vocab = 50000;
    int max_doc_tokens = 500;
};

/// The model-ready dataset: indexed interactions, vocabulary, split tags,
/// and one token-id document per user and per item built from that
/// entity's training-split reviews (time order, oldest first).
struct Corpus {
    std::vector<Interaction> interactions;
    std::vector<int> user_of;   // dense user index per interaction
    std::vector<int> item_of;   // dense item index per interaction
    std::vector<Split> split_tags;

    std::vector<std::string> user_ids;  // dense index -> original id
    std::vector<std::string> item_ids;
    std::unordered_map<std::string, int> user_index;
    std::unordered_map<std::string, int> item_index;

    Vocab vocab;
    std::vector<std::vector<int>> user_docs;
    std::vector<std::vector<int>> item_docs;

    CorpusConfig config;

    int n_users() const { return static_cast<int>(user_ids.size()); }
    int n_items() const { return static_cast<int>(item_ids.size()); }
    std::size_t n_interactions() const { return interactions.size(); }
    std::vector<std::size_t> split_members(Split s) const;
};

/// Full pipeline: k-core filter, dense indexing in first-appearance order,
/// split assignment, vocabulary from training reviews, document assembly.
Corpus build_corpus(std::vector<Interaction> interactions, const CorpusConfig& config);

/// Binary cache. Raw review text is not retained; token lists are stored
/// through a shared string pool. Same corpus, same bytes.
void save_corpus(const std::string& path, const Corpus& corpus);
Corpus load_corpus(const std::string& path);

}  // namespace cfrec
