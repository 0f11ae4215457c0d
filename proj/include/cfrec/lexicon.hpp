#pragma once

#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "cfrec/data.hpp"

namespace cfrec {

/// Token polarities in [-1, 1] with single-token negation handling.
/// Negation markers themselves carry no polarity and may not appear as
/// lexicon entries.
struct Lexicon {
    std::unordered_map<std::string, double> polarity;
    std::unordered_set<std::string> negations{"not", "no", "never", "n't"};
    double negation_multiplier = -0.5;

    std::size_t size() const { return polarity.size(); }

    /// Tab-separated token/polarity pairs, one per line; lines starting
    /// with '#' and blank lines are ignored. A malformed line, an
    /// out-of-range polarity, a duplicate token, or a negation-marker
    /// entry fails the load with its line number.
    static Lexicon load_tsv(const std::string& path);
};

/// Mean polarity of the matched tokens. A matched token directly preceded
/// by a negation marker contributes polarity * negation_multiplier.
/// No matches yield 0.
double review_polarity(const std::vector<std::string>& tokens, const Lexicon& lex);

/// Mean of review_polarity over an entity's reviews; zero reviews are an
/// error (every indexed entity has at least one).
double entity_polarity(const std::vector<const std::vector<std::string>*>& reviews,
                       const Lexicon& lex);

/// Lexicon polarity of every user and item, averaged over all of the
/// entity's reviews regardless of split.
struct PolarityProfile {
    std::vector<double> user_polarity;
    std::vector<int> user_review_count;
    std::vector<double> item_polarity;
    std::vector<int> item_review_count;
};

PolarityProfile entity_polarities(const Corpus& corpus, const Lexicon& lex);

/// Entities ranked ascending by (polarity, index): `negative` holds the
/// bottom floor(n/10), `positive` the top floor(n/10), both sorted by
/// entity index. Needs at least 10 entities.
struct ExtremeSets {
    std::vector<int> negative;
    std::vector<int> positive;
};

ExtremeSets extreme_deciles(const std::vector<double>& polarity);

inline constexpr const char* kDecileLabels[10] = {"N5", "N4", "N3", "N2", "N1",
                                                  "P1", "P2", "P3", "P4", "P5"};

/// Ten contiguous groups of entity indices along the same ranking, labeled
/// kDecileLabels[0..9] from most negative to most positive. Group sizes
/// differ by at most one; the first n%10 groups take the extra entity.
std::vector<std::vector<int>> decile_groups(const std::vector<double>& polarity);

}  // namespace cfrec
