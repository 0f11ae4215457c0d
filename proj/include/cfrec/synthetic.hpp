#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cfrec/data.hpp"
#include "cfrec/lexicon.hpp"

namespace cfrec {

struct SynthConfig {
    int n_users = 1000;
    int n_items = 500;
    int per_user = 6;  // interactions per user; >= 5 keeps the 5-core valid
    double bias_strength = 1.0;  // extra noise sd per unit of negative polarity
    double base_noise = 0.5;     // noise sd floor
    std::uint64_t seed = 670849;
    int review_min_tokens = 8;
    int review_max_tokens = 16;
    std::array<double, 3> ratios{0.8, 0.1, 0.1};
    int min_freq = 1;
    int max_vocab = 50000;
    int max_doc_tokens = 120;

    void validate() const;
};

/// What the generator knows that a model must discover.
struct SynthTruth {
    std::vector<double> user_polarity;  // from mean noiseless rating
    std::vector<double> item_polarity;
    std::vector<double> true_rating;  // per interaction, before noise
};

/// Seeded corpus with a controllable accuracy bias: observation noise
/// grows with how negative an interaction's entities are, so predictors
/// score worse on negative-polarity users and items. Review text is drawn
/// from the lexicon so that lexicon scoring tracks the observed rating.
std::pair<Corpus, SynthTruth> generate(const SynthConfig& config, const Lexicon& lex);

/// Squared observation noise per interaction: the error left to a perfect
/// predictor, which isolates the injected bias from model effects.
std::vector<double> oracle_errors(const Corpus& corpus, const SynthTruth& truth);

void save_truth(const std::string& path, const SynthTruth& truth);
SynthTruth load_truth(const std::string& path);

}  // namespace cfrec
