#include "cfrec/lexicon.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <numeric>

namespace cfrec {

Lexicon Lexicon::load_tsv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open lexicon: " + path);
    Lexicon lex;
    std::string line;
    std::size_t line_no = 0;
    const auto fail = [&](const std::string& why) {
        throw IoError(path + ":" + std::to_string(line_no) + ": " + why);
    };
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        const auto tab = line.find('\t');
        if (tab == std::string::npos || tab == 0) fail("expected token<TAB>polarity");
        const std::string token = line.substr(0, tab);
        const std::string field = line.substr(tab + 1);
        double value = 0.0;
        const auto [end, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
        if (ec != std::errc{} || end != field.data() + field.size())
            fail("unparseable polarity '" + field + "'");
        if (value < -1.0 || value > 1.0) fail("polarity outside [-1,1]");
        if (lex.negations.count(token)) fail("negation marker '" + token + "' cannot be an entry");
        if (!lex.polarity.emplace(token, value).second) fail("duplicate token '" + token + "'");
    }
    return lex;
}

double review_polarity(const std::vector<std::string>& tokens, const Lexicon& lex) {
    double sum = 0.0;
    int matches = 0;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        const auto it = lex.polarity.find(tokens[i]);
        if (it == lex.polarity.end()) continue;
        double v = it->second;
        if (i > 0 && lex.negations.count(tokens[i - 1])) v *= lex.negation_multiplier;
        sum += v;
        ++matches;
    }
    return matches == 0 ? 0.0 : sum / matches;
}

double entity_polarity(const std::vector<const std::vector<std::string>*>& reviews,
                       const Lexicon& lex) {
    if (reviews.empty()) throw UndefinedMetricError("entity_polarity: entity has no reviews");
    double sum = 0.0;
    for (const auto* r : reviews) sum += review_polarity(*r, lex);
    return sum / static_cast<double>(reviews.size());
}

PolarityProfile entity_polarities(const Corpus& corpus, const Lexicon& lex) {
    PolarityProfile p;
    p.user_polarity.assign(static_cast<std::size_t>(corpus.n_users()), 0.0);
    p.user_review_count.assign(static_cast<std::size_t>(corpus.n_users()), 0);
    p.item_polarity.assign(static_cast<std::size_t>(corpus.n_items()), 0.0);
    p.item_review_count.assign(static_cast<std::size_t>(corpus.n_items()), 0);
    for (std::size_t k = 0; k < corpus.interactions.size(); ++k) {
        const double score = review_polarity(corpus.interactions[k].tokens, lex);
        const auto u = static_cast<std::size_t>(corpus.user_of[k]);
        const auto i = static_cast<std::size_t>(corpus.item_of[k]);
        p.user_polarity[u] += score;
        p.item_polarity[i] += score;
        ++p.user_review_count[u];
        ++p.item_review_count[i];
    }
    for (std::size_t u = 0; u < p.user_polarity.size(); ++u)
        if (p.user_review_count[u] > 0) p.user_polarity[u] /= p.user_review_count[u];
    for (std::size_t i = 0; i < p.item_polarity.size(); ++i)
        if (p.item_review_count[i] > 0) p.item_polarity[i] /= p.item_review_count[i];
    return p;
}

namespace {

std::vector<int> polarity_ranking(const std::vector<double>& polarity) {
    std::vector<int> order(polarity.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        const double pa = polarity[static_cast<std::size_t>(a)];
        const double pb = polarity[static_cast<std::size_t>(b)];
        if (pa != pb) return pa < pb;
        return a < b;
    });
    return order;
}

}  // namespace

ExtremeSets extreme_deciles(const std::vector<double>& polarity) {
    const std::size_t n = polarity.size();
    if (n < 10)
        throw InsufficientEntitiesError("extreme_deciles: need >= 10 entities, have " +
                                        std::to_string(n));
    const std::vector<int> order = polarity_ranking(polarity);
    const std::size_t cut = n / 10;
    ExtremeSets sets;
    sets.negative.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(cut));
    sets.positive.assign(order.end() - static_cast<std::ptrdiff_t>(cut), order.end());
    std::sort(sets.negative.begin(), sets.negative.end());
    std::sort(sets.positive.begin(), sets.positive.end());
    return sets;
}

std::vector<std::vector<int>> decile_groups(const std::vector<double>& polarity) {
    const std::size_t n = polarity.size();
    if (n < 10)
        throw InsufficientEntitiesError("decile_groups: need >= 10 entities, have " +
                                        std::to_string(n));
    const std::vector<int> order = polarity_ranking(polarity);
    std::vector<std::vector<int>> groups(10);
    const std::size_t base = n / 10;
    const std::size_t extra = n % 10;
    std::size_t pos = 0;
    for (std::size_t g = 0; g < 10; ++g) {
        const std::size_t len = base + (g < extra ? 1 : 0);
        groups[g].assign(order.begin() + static_cast<std::ptrdiff_t>(pos),
                         order.begin() + static_cast<std::ptrdiff_t>(pos + len));
        pos += len;
    }
    return groups;
}

}  // namespace cfrec
