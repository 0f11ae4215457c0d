#include "cfrec/synthetic.hpp"

#include <algorithm>
#include <cmath>

#include "cfrec/rng.hpp"
#include "cfrec/serialize.hpp"

namespace cfrec {

namespace {

// Independent RNG stream tags; the master seed fans out through
// Rng::derive so consumption in one phase never shifts another.
enum : std::uint64_t {
    kStreamLatent = 10,
    kStreamSlots = 11,
    kStreamNoise = 12,
    kStreamText = 13,
    kStreamSplit = 14,
};

constexpr int kLatentDim = 4;
constexpr double kInteractionScale = 0.25;
constexpr double kEntityEffectSd = 0.6;
// Rating structure must not be purely additive in the entity effects, or a
// user/item-offset model explains everything and pair-level sentiment carries
// no signal of its own.
constexpr double kSentimentInteractionScale = 1.5;
constexpr double kFillerRate = 0.3;
constexpr double kPoolThreshold = 0.3;

// Connective tokens outside the lexicon so reviews also carry neutral text.
const char* const kFillers[] = {
    "the", "a",  "it",    "was",  "is",   "this", "that", "item",  "thing", "one",
    "i",   "we", "have",  "had",  "with", "for",  "and",  "but",   "so",    "very",
    "too", "my", "about", "when", "them", "they", "use",  "using", "again", "time"};

std::string entity_id(char prefix, int n) { return prefix + std::to_string(n); }

double clamp_rating(double v) { return std::min(5.0, std::max(1.0, v)); }

// Item slot multiset: every item at least floor(total/n_items) >= 5 times,
// the remainder spread over the first items, then dealt per_user at a time.
std::vector<int> assign_items(const SynthConfig& cfg, Rng& rng) {
    const int total = cfg.n_users * cfg.per_user;
    std::vector<int> slots;
    slots.reserve(static_cast<std::size_t>(total));
    const int base = total / cfg.n_items;
    const int extra = total % cfg.n_items;
    for (int i = 0; i < cfg.n_items; ++i)
        for (int c = 0; c < base + (i < extra ? 1 : 0); ++c) slots.push_back(i);
    rng.shuffle(slots);

    // A user's hand must hold distinct items; resolve collisions by swapping
    // with the nearest compatible slot elsewhere in the deck.
    const auto hand_has = [&](int user, int item, int upto) {
        const int lo = user * cfg.per_user;
        for (int k = lo; k < upto; ++k)
            if (slots[static_cast<std::size_t>(k)] == item) return true;
        return false;
    };
    for (int u = 0; u < cfg.n_users; ++u) {
        const int lo = u * cfg.per_user;
        for (int k = lo; k < lo + cfg.per_user; ++k) {
            const auto ks = static_cast<std::size_t>(k);
            if (!hand_has(u, slots[ks], k)) continue;
            bool fixed = false;
            for (int j = (u + 1) * cfg.per_user; j < total && !fixed; ++j) {
                const auto js = static_cast<std::size_t>(j);
                if (!hand_has(u, slots[js], k)) {
                    std::swap(slots[ks], slots[js]);
                    fixed = true;
                }
            }
            for (int j = 0; j < lo && !fixed; ++j) {
                const auto js = static_cast<std::size_t>(j);
                const int owner = j / cfg.per_user;
                if (!hand_has(u, slots[js], k) &&
                    !hand_has(owner, slots[ks], (owner + 1) * cfg.per_user)) {
                    std::swap(slots[ks], slots[js]);
                    fixed = true;
                }
            }
            if (!fixed)
                throw Error("synthetic generate: could not deal distinct items; "
                            "lower per_user or raise n_items");
        }
    }
    return slots;
}

}  // namespace

void SynthConfig::validate() const {
    if (n_users < 1 || n_items < 1) throw InvalidArgumentError("synth config: counts must be positive");
    if (per_user < 5)
        throw InvalidArgumentError("synth config: per_user must be >= 5 for 5-core validity");
    if (per_user > n_items)
        throw InvalidArgumentError("synth config: per_user cannot exceed n_items");
    if (static_cast<long long>(n_users) * per_user < 5LL * n_items)
        throw InvalidArgumentError("synth config: n_users*per_user must cover 5 per item");
    if (bias_strength < 0 || base_noise < 0)
        throw InvalidArgumentError("synth config: noise terms must be >= 0");
    if (review_min_tokens < 1 || review_max_tokens < review_min_tokens)
        throw InvalidArgumentError("synth config: bad review token range");
}

std::pair<Corpus, SynthTruth> generate(const SynthConfig& cfg, const Lexicon& lex) {
    cfg.validate();

    // Word pools sorted so generation is independent of hash-map order.
    std::vector<std::pair<std::string, double>> entries(lex.polarity.begin(), lex.polarity.end());
    std::sort(entries.begin(), entries.end());
    std::vector<std::string> pos_pool, neg_pool;
    for (const auto& [tok, pol] : entries) {
        if (pol >= kPoolThreshold) pos_pool.push_back(tok);
        if (pol <= -kPoolThreshold) neg_pool.push_back(tok);
    }
    if (pos_pool.empty() || neg_pool.empty())
        throw InvalidArgumentError("synthetic generate: lexicon lacks strong words on both sides");

    Rng latent_rng(Rng::derive(cfg.seed, kStreamLatent));
    const auto nu = static_cast<std::size_t>(cfg.n_users);
    const auto ni = static_cast<std::size_t>(cfg.n_items);
    std::vector<std::array<double, kLatentDim>> a(nu), b(ni);
    std::vector<double> harshness(nu), quality(ni);
    for (auto& v : a)
        for (auto& x : v) x = latent_rng.normal();
    for (auto& h : harshness) h = kEntityEffectSd * latent_rng.normal();
    for (auto& v : b)
        for (auto& x : v) x = latent_rng.normal();
    for (auto& q : quality) q = kEntityEffectSd * latent_rng.normal();

    Rng slots_rng(Rng::derive(cfg.seed, kStreamSlots));
    const std::vector<int> slots = assign_items(cfg, slots_rng);

    const std::size_t total = slots.size();
    SynthTruth truth;
    truth.true_rating.resize(total);
    std::vector<double> user_true_sum(nu, 0.0), item_true_sum(ni, 0.0);
    std::vector<int> item_count(ni, 0);
    const double inv_sqrt_k = 1.0 / std::sqrt(static_cast<double>(kLatentDim));
    for (std::size_t k = 0; k < total; ++k) {
        const auto u = k / static_cast<std::size_t>(cfg.per_user);
        const auto i = static_cast<std::size_t>(slots[k]);
        double dot = 0.0;
        for (int d = 0; d < kLatentDim; ++d) dot += a[u][static_cast<std::size_t>(d)] * b[i][static_cast<std::size_t>(d)];
        const double t =
            clamp_rating(3.0 + kInteractionScale * dot * inv_sqrt_k + harshness[u] + quality[i] +
                         kSentimentInteractionScale * harshness[u] * quality[i]);
        truth.true_rating[k] = t;
        user_true_sum[u] += t;
        item_true_sum[i] += t;
        ++item_count[i];
    }
    truth.user_polarity.resize(nu);
    for (std::size_t u = 0; u < nu; ++u)
        truth.user_polarity[u] = (user_true_sum[u] / cfg.per_user - 3.0) / 2.0;
    truth.item_polarity.resize(ni);
    for (std::size_t i = 0; i < ni; ++i)
        truth.item_polarity[i] = (item_true_sum[i] / item_count[i] - 3.0) / 2.0;

    // Observation noise: the bias injection point. Negative-polarity
    // entities read noisier, so every predictor scores worse on them in
    // proportion to bias_strength.
    Rng noise_rng(Rng::derive(cfg.seed, kStreamNoise));
    std::vector<double> observed(total);
    for (std::size_t k = 0; k < total; ++k) {
        const auto u = k / static_cast<std::size_t>(cfg.per_user);
        const auto i = static_cast<std::size_t>(slots[k]);
        const double deficit = std::max(0.0, -truth.user_polarity[u]) +
                               std::max(0.0, -truth.item_polarity[i]);
        const double sd = cfg.base_noise + cfg.bias_strength * deficit;
        observed[k] = clamp_rating(truth.true_rating[k] + sd * noise_rng.normal());
    }

    Rng text_rng(Rng::derive(cfg.seed, kStreamText));
    std::vector<Interaction> interactions(total);
    for (std::size_t k = 0; k < total; ++k) {
        Interaction& rec = interactions[k];
        rec.user_id = entity_id('u', static_cast<int>(k / static_cast<std::size_t>(cfg.per_user)));
        rec.item_id = entity_id('i', slots[k]);
        rec.rating = observed[k];
        rec.timestamp = static_cast<std::int64_t>(k);
        const double target = std::min(1.0, std::max(-1.0, (observed[k] - 3.0) / 2.0));
        const double p_pos = 0.5 * (1.0 + target);
        const auto len = static_cast<std::size_t>(cfg.review_min_tokens) +
                         static_cast<std::size_t>(text_rng.below(static_cast<std::uint64_t>(
                             cfg.review_max_tokens - cfg.review_min_tokens + 1)));
        rec.tokens.reserve(len);
        for (std::size_t t = 0; t < len; ++t) {
            if (text_rng.uniform() < kFillerRate) {
                rec.tokens.push_back(kFillers[text_rng.below(std::size(kFillers))]);
            } else if (text_rng.uniform() < p_pos) {
                rec.tokens.push_back(pos_pool[text_rng.below(pos_pool.size())]);
            } else {
                rec.tokens.push_back(neg_pool[text_rng.below(neg_pool.size())]);
            }
        }
    }

    CorpusConfig corpus_cfg;
    corpus_cfg.k_core = 5;
    corpus_cfg.ratios = cfg.ratios;
    corpus_cfg.split_seed = Rng::derive(cfg.seed, kStreamSplit);
    corpus_cfg.min_freq = cfg.min_freq;
    corpus_cfg.max_vocab = cfg.max_vocab;
    corpus_cfg.max_doc_tokens = cfg.max_doc_tokens;
    Corpus corpus = build_corpus(std::move(interactions), corpus_cfg);
    if (corpus.n_interactions() != total)
        throw Error("synthetic generate: 5-core filter pruned a generated corpus");

    // The corpus indexes entities by first appearance; reorder the truth
    // columns to match.
    SynthTruth mapped;
    mapped.true_rating = std::move(truth.true_rating);
    mapped.user_polarity.resize(nu);
    for (std::size_t u = 0; u < nu; ++u) {
        const int dense = corpus.user_index.at(entity_id('u', static_cast<int>(u)));
        mapped.user_polarity[static_cast<std::size_t>(dense)] = truth.user_polarity[u];
    }
    mapped.item_polarity.resize(ni);
    for (std::size_t i = 0; i < ni; ++i) {
        const int dense = corpus.item_index.at(entity_id('i', static_cast<int>(i)));
        mapped.item_polarity[static_cast<std::size_t>(dense)] = truth.item_polarity[i];
    }
    return {std::move(corpus), std::move(mapped)};
}

std::vector<double> oracle_errors(const Corpus& corpus, const SynthTruth& truth) {
    if (corpus.n_interactions() != truth.true_rating.size())
        throw InvalidArgumentError("oracle_errors: truth does not match the corpus");
    std::vector<double> out(truth.true_rating.size());
    for (std::size_t k = 0; k < out.size(); ++k) {
        const double r = corpus.interactions[k].rating - truth.true_rating[k];
        out[k] = r * r;
    }
    return out;
}

namespace {
constexpr char kTruthMagic[8] = {'C', 'F', 'R', 'T', 'R', 'T', 'H', '1'};
}

void save_truth(const std::string& path, const SynthTruth& truth) {
    BinaryWriter w(path);
    w.str(std::string_view(kTruthMagic, sizeof kTruthMagic));
    for (const auto* v : {&truth.user_polarity, &truth.item_polarity, &truth.true_rating}) {
        w.u32(static_cast<std::uint32_t>(v->size()));
        for (double x : *v) w.f64(x);
    }
    w.close();
}

SynthTruth load_truth(const std::string& path) {
    BinaryReader r(path);
    if (r.str() != std::string_view(kTruthMagic, sizeof kTruthMagic))
        throw IoError("not a ground-truth file: " + path);
    SynthTruth truth;
    for (auto* v : {&truth.user_polarity, &truth.item_polarity, &truth.true_rating}) {
        v->resize(r.u32());
        for (double& x : *v) x = r.f64();
    }
    return truth;
}

}  // namespace cfrec
