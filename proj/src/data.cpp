#include "cfrec/data.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <numeric>

#include "cfrec/rng.hpp"
#include "cfrec/serialize.hpp"

namespace cfrec {

using nlohmann::json;

std::vector<std::string> tokenize(const std::string& text) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : text) {
        unsigned char c = static_cast<unsigned char>(ch);
        if (c >= 'A' && c <= 'Z') c = static_cast<unsigned char>(c - 'A' + 'a');
        const bool alnum = (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9');
        if (alnum) {
            cur.push_back(static_cast<char>(c));
        } else if (!cur.empty()) {
            out.push_back(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty()) out.push_back(std::move(cur));
    return out;
}

namespace {

bool get_string(const json& j, const char* key, std::string& out) {
    auto it = j.find(key);
    if (it == j.end() || !it->is_string()) return false;
    out = it->get<std::string>();
    return true;
}

bool get_rating(const json& j, const char* key, double& out) {
    auto it = j.find(key);
    if (it == j.end() || !it->is_number()) return false;
    out = it->get<double>();
    return out >= 1.0 && out <= 5.0;
}

// Days since 1970-01-01 for a proleptic Gregorian civil date.
std::int64_t days_from_civil(int y, int m, int d) {
    y -= m <= 2;
    const int era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = static_cast<unsigned>((153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1);
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return static_cast<std::int64_t>(era) * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

std::optional<std::int64_t> parse_timestamp(const json& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end()) return std::nullopt;
    if (it->is_number_integer()) return it->get<std::int64_t>();
    if (it->is_number()) return static_cast<std::int64_t>(it->get<double>());
    if (it->is_string()) {
        int y = 0, mo = 0, d = 0, h = 0, mi = 0, s = 0;
        const int got = std::sscanf(it->get<std::string>().c_str(), "%d-%d-%d %d:%d:%d",
                                    &y, &mo, &d, &h, &mi, &s);
        if (got < 3 || mo < 1 || mo > 12 || d < 1 || d > 31) return std::nullopt;
        return days_from_civil(y, mo, d) * 86400 + h * 3600 + mi * 60 + s;
    }
    return std::nullopt;
}

struct FieldNames {
    const char* user;
    const char* item;
    const char* rating;
    const char* text;
    const char* time;
};

std::vector<Interaction> parse_jsonl(const std::string& path, const FieldNames& f,
                                     ParseStats* stats) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open for reading: " + path);
    std::vector<Interaction> out;
    ParseStats st;
    std::string line;
    while (std::getline(in, line)) {
        ++st.lines;
        if (line.empty()) {
            ++st.skipped;
            continue;
        }
        const json j = json::parse(line, nullptr, /*allow_exceptions=*/false);
        Interaction rec;
        std::string text;
        if (j.is_discarded() || !j.is_object() || !get_string(j, f.user, rec.user_id) ||
            rec.user_id.empty() || !get_string(j, f.item, rec.item_id) || rec.item_id.empty() ||
            !get_rating(j, f.rating, rec.rating) || !get_string(j, f.text, text)) {
            ++st.skipped;
            continue;
        }
        rec.tokens = tokenize(text);
        rec.timestamp = parse_timestamp(j, f.time);
        out.push_back(std::move(rec));
    }
    if (stats) *stats = st;
    if (out.empty()) throw EmptyDatasetError("no valid records in " + path);
    return out;
}

}  // namespace

std::vector<Interaction> parse_amazon_jsonl(const std::string& path, ParseStats* stats) {
    return parse_jsonl(path, {"reviewerID", "asin", "overall", "reviewText", "unixReviewTime"},
                       stats);
}

std::vector<Interaction> parse_yelp_jsonl(const std::string& path, ParseStats* stats) {
    return parse_jsonl(path, {"user_id", "business_id", "stars", "text", "date"}, stats);
}

std::vector<Interaction> k_core_filter(std::vector<Interaction> interactions, int k) {
    if (k < 2) return interactions;
    for (;;) {
        std::unordered_map<std::string, int> u_count, i_count;
        for (const auto& r : interactions) {
            ++u_count[r.user_id];
            ++i_count[r.item_id];
        }
        const auto weak = [&](const Interaction& r) {
            return u_count[r.user_id] < k || i_count[r.item_id] < k;
        };
        const auto it = std::stable_partition(interactions.begin(), interactions.end(),
                                              [&](const Interaction& r) { return !weak(r); });
        if (it == interactions.end()) break;
        interactions.erase(it, interactions.end());
        if (interactions.empty())
            throw EmptyDatasetError("k-core filter removed every interaction (k=" +
                                    std::to_string(k) + ")");
    }
    return interactions;
}

Vocab build_vocab(const std::vector<const std::vector<std::string>*>& docs, int min_freq,
                  int max_size) {
    if (min_freq < 1) throw InvalidArgumentError("build_vocab: min_freq must be >= 1");
    if (max_size < 0) throw InvalidArgumentError("build_vocab: max_size must be >= 0");
    std::unordered_map<std::string, std::int64_t> counts;
    for (const auto* doc : docs)
        for (const auto& tok : *doc) ++counts[tok];

    std::vector<std::pair<std::string, std::int64_t>> kept;
    kept.reserve(counts.size());
    for (auto& [tok, c] : counts)
        if (c >= min_freq) kept.emplace_back(tok, c);
    std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    if (static_cast<int>(kept.size()) > max_size) kept.resize(static_cast<std::size_t>(max_size));

    Vocab v;
    v.id_to_token = {"<pad>", "<unk>"};
    v.id_to_token.reserve(kept.size() + 2);
    for (const auto& [tok, c] : kept) {
        v.token_to_id.emplace(tok, static_cast<int>(v.id_to_token.size()));
        v.id_to_token.push_back(tok);
    }
    return v;
}

std::vector<Split> assign_splits(std::size_t n, const std::array<double, 3>& ratios,
                                 std::uint64_t seed) {
    double sum = 0.0;
    for (double r : ratios) {
        if (r < 0.0) throw InvalidArgumentError("assign_splits: ratios must be non-negative");
        sum += r;
    }
    if (std::abs(sum - 1.0) > 1e-9)
        throw InvalidArgumentError("assign_splits: ratios must sum to 1");

    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    Rng rng(seed);
    rng.shuffle(perm);

    const auto c1 = static_cast<std::size_t>(ratios[0] * static_cast<double>(n));
    const auto c2 = static_cast<std::size_t>((ratios[0] + ratios[1]) * static_cast<double>(n));
    std::vector<Split> tags(n, Split::test);
    for (std::size_t i = 0; i < n; ++i)
        tags[perm[i]] = i < c1 ? Split::train : (i < c2 ? Split::val : Split::test);
    return tags;
}

std::vector<std::size_t> Corpus::split_members(Split s) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < split_tags.size(); ++i)
        if (split_tags[i] == s) out.push_back(i);
    return out;
}

namespace {

std::vector<int> doc_for_entity(const Corpus& c, const std::vector<std::size_t>& members) {
    // Training reviews only, oldest first; records without a timestamp sort
    // as 0 and keep their relative dataset order.
    std::vector<std::size_t> order = members;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return c.interactions[a].timestamp.value_or(0) < c.interactions[b].timestamp.value_or(0);
    });
    std::vector<int> doc;
    for (std::size_t idx : order) {
        for (const auto& tok : c.interactions[idx].tokens) {
            if (static_cast<int>(doc.size()) >= c.config.max_doc_tokens) break;
            doc.push_back(c.vocab.id_or_unk(tok));
        }
        if (static_cast<int>(doc.size()) >= c.config.max_doc_tokens) break;
    }
    while (doc.size() < 5) doc.push_back(Vocab::kPad);
    return doc;
}

}  // namespace

Corpus build_corpus(std::vector<Interaction> interactions, const CorpusConfig& config) {
    if (interactions.empty()) throw EmptyDatasetError("build_corpus: no interactions");
    if (config.max_doc_tokens < 5)
        throw InvalidArgumentError("build_corpus: max_doc_tokens must be >= 5");

    Corpus c;
    c.config = config;
    c.interactions = k_core_filter(std::move(interactions), config.k_core);

    c.user_of.reserve(c.interactions.size());
    c.item_of.reserve(c.interactions.size());
    for (const auto& r : c.interactions) {
        auto [uit, unew] = c.user_index.emplace(r.user_id, static_cast<int>(c.user_ids.size()));
        if (unew) c.user_ids.push_back(r.user_id);
        auto [iit, inew] = c.item_index.emplace(r.item_id, static_cast<int>(c.item_ids.size()));
        if (inew) c.item_ids.push_back(r.item_id);
        c.user_of.push_back(uit->second);
        c.item_of.push_back(iit->second);
    }

    c.split_tags = assign_splits(c.interactions.size(), config.ratios, config.split_seed);

    std::vector<const std::vector<std::string>*> train_docs;
    for (std::size_t i = 0; i < c.interactions.size(); ++i)
        if (c.split_tags[i] == Split::train) train_docs.push_back(&c.interactions[i].tokens);
    c.vocab = build_vocab(train_docs, config.min_freq, config.max_vocab);

    std::vector<std::vector<std::size_t>> by_user(static_cast<std::size_t>(c.n_users()));
    std::vector<std::vector<std::size_t>> by_item(static_cast<std::size_t>(c.n_items()));
    for (std::size_t i = 0; i < c.interactions.size(); ++i) {
        if (c.split_tags[i] != Split::train) continue;
        by_user[static_cast<std::size_t>(c.user_of[i])].push_back(i);
        by_item[static_cast<std::size_t>(c.item_of[i])].push_back(i);
    }
    c.user_docs.reserve(by_user.size());
    for (const auto& members : by_user) c.user_docs.push_back(doc_for_entity(c, members));
    c.item_docs.reserve(by_item.size());
    for (const auto& members : by_item) c.item_docs.push_back(doc_for_entity(c, members));
    return c;
}

namespace {

constexpr char kCorpusMagic[8] = {'C', 'F', 'R', 'C', 'O', 'R', 'P', '1'};

json config_to_json(const CorpusConfig& cfg) {
    return json{{"k_core", cfg.k_core},
                {"ratios", {cfg.ratios[0], cfg.ratios[1], cfg.ratios[2]}},
                {"split_seed", cfg.split_seed},
                {"min_freq", cfg.min_freq},
                {"max_vocab", cfg.max_vocab},
                {"max_doc_tokens", cfg.max_doc_tokens}};
}

CorpusConfig config_from_json(const json& j) {
    CorpusConfig cfg;
    cfg.k_core = j.at("k_core").get<int>();
    const auto& r = j.at("ratios");
    cfg.ratios = {r.at(0).get<double>(), r.at(1).get<double>(), r.at(2).get<double>()};
    cfg.split_seed = j.at("split_seed").get<std::uint64_t>();
    cfg.min_freq = j.at("min_freq").get<int>();
    cfg.max_vocab = j.at("max_vocab").get<int>();
    cfg.max_doc_tokens = j.at("max_doc_tokens").get<int>();
    return cfg;
}

void write_doc_list(BinaryWriter& w, const std::vector<std::vector<int>>& docs) {
    w.u32(static_cast<std::uint32_t>(docs.size()));
    for (const auto& d : docs) {
        std::vector<std::uint32_t> ids(d.begin(), d.end());
        w.u32(static_cast<std::uint32_t>(ids.size()));
        w.u32_array(ids);
    }
}

std::vector<std::vector<int>> read_doc_list(BinaryReader& r) {
    const std::uint32_t n = r.u32();
    std::vector<std::vector<int>> docs(n);
    for (auto& d : docs) {
        const auto ids = r.u32_array(r.u32());
        d.assign(ids.begin(), ids.end());
    }
    return docs;
}

}  // namespace

void save_corpus(const std::string& path, const Corpus& c) {
    BinaryWriter w(path);
    w.str(std::string_view(kCorpusMagic, sizeof kCorpusMagic));
    w.str(config_to_json(c.config).dump());

    w.u32(static_cast<std::uint32_t>(c.user_ids.size()));
    for (const auto& id : c.user_ids) w.str(id);
    w.u32(static_cast<std::uint32_t>(c.item_ids.size()));
    for (const auto& id : c.item_ids) w.str(id);

    w.u32(static_cast<std::uint32_t>(c.vocab.size()));
    for (int i = 2; i < c.vocab.size(); ++i) w.str(c.vocab.id_to_token[static_cast<std::size_t>(i)]);

    // Token strings dedup through a pool ordered by first appearance.
    std::unordered_map<std::string, std::uint32_t> pool_index;
    std::vector<const std::string*> pool;
    std::vector<std::vector<std::uint32_t>> token_refs(c.interactions.size());
    for (std::size_t i = 0; i < c.interactions.size(); ++i) {
        token_refs[i].reserve(c.interactions[i].tokens.size());
        for (const auto& tok : c.interactions[i].tokens) {
            auto [it, inserted] = pool_index.emplace(tok, static_cast<std::uint32_t>(pool.size()));
            if (inserted) pool.push_back(&tok);
            token_refs[i].push_back(it->second);
        }
    }
    w.u32(static_cast<std::uint32_t>(pool.size()));
    for (const auto* s : pool) w.str(*s);

    w.u32(static_cast<std::uint32_t>(c.interactions.size()));
    for (std::size_t i = 0; i < c.interactions.size(); ++i) {
        const auto& rec = c.interactions[i];
        w.u32(static_cast<std::uint32_t>(c.user_of[i]));
        w.u32(static_cast<std::uint32_t>(c.item_of[i]));
        w.f64(rec.rating);
        w.u8(static_cast<std::uint8_t>(c.split_tags[i]));
        w.u8(rec.timestamp.has_value() ? 1 : 0);
        if (rec.timestamp) w.i64(*rec.timestamp);
        w.u32(static_cast<std::uint32_t>(token_refs[i].size()));
        w.u32_array(token_refs[i]);
    }

    write_doc_list(w, c.user_docs);
    write_doc_list(w, c.item_docs);
    w.close();
}

Corpus load_corpus(const std::string& path) {
    BinaryReader r(path);
    if (r.str() != std::string_view(kCorpusMagic, sizeof kCorpusMagic))
        throw IoError("not a corpus cache file: " + path);
    Corpus c;
    c.config = config_from_json(json::parse(r.str()));

    c.user_ids.resize(r.u32());
    for (auto& id : c.user_ids) id = r.str();
    c.item_ids.resize(r.u32());
    for (auto& id : c.item_ids) id = r.str();
    for (std::size_t i = 0; i < c.user_ids.size(); ++i)
        c.user_index.emplace(c.user_ids[i], static_cast<int>(i));
    for (std::size_t i = 0; i < c.item_ids.size(); ++i)
        c.item_index.emplace(c.item_ids[i], static_cast<int>(i));

    const std::uint32_t vocab_size = r.u32();
    c.vocab.id_to_token = {"<pad>", "<unk>"};
    c.vocab.id_to_token.reserve(vocab_size);
    for (std::uint32_t i = 2; i < vocab_size; ++i) {
        c.vocab.id_to_token.push_back(r.str());
        c.vocab.token_to_id.emplace(c.vocab.id_to_token.back(), static_cast<int>(i));
    }

    std::vector<std::string> pool(r.u32());
    for (auto& s : pool) s = r.str();

    const std::uint32_t n = r.u32();
    c.interactions.resize(n);
    c.user_of.resize(n);
    c.item_of.resize(n);
    c.split_tags.resize(n);
    for (std::uint32_t i = 0; i < n; ++i) {
        auto& rec = c.interactions[i];
        c.user_of[i] = static_cast<int>(r.u32());
        c.item_of[i] = static_cast<int>(r.u32());
        rec.user_id = c.user_ids.at(static_cast<std::size_t>(c.user_of[i]));
        rec.item_id = c.item_ids.at(static_cast<std::size_t>(c.item_of[i]));
        rec.rating = r.f64();
        c.split_tags[i] = static_cast<Split>(r.u8());
        if (r.u8() != 0) rec.timestamp = r.i64();
        const auto refs = r.u32_array(r.u32());
        rec.tokens.reserve(refs.size());
        for (std::uint32_t ref : refs) rec.tokens.push_back(pool.at(ref));
    }

    c.user_docs = read_doc_list(r);
    c.item_docs = read_doc_list(r);
    return c;
}

}  // namespace cfrec
