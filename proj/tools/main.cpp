#include <CLI11.hpp>
#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <optional>

#include "cfrec/data.hpp"
#include "cfrec/debias.hpp"
#include "cfrec/lexicon.hpp"
#include "cfrec/manifest.hpp"
#include "cfrec/metrics.hpp"
#include "cfrec/model.hpp"
#include "cfrec/serialize.hpp"
#include "cfrec/synthetic.hpp"
#include "cfrec/training.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Relative inputs are also looked up under $CFREC_DATA_ROOT so shared
// datasets need no per-invocation paths.
std::string resolve_input(const std::string& path) {
    if (fs::exists(path)) return path;
    if (const char* root = std::getenv("CFREC_DATA_ROOT");
        root != nullptr && fs::path(path).is_relative()) {
        const fs::path joined = fs::path(root) / path;
        if (fs::exists(joined)) return joined.string();
    }
    return path;
}

json load_config_section(const std::string& config_path, const std::string& section) {
    if (config_path.empty()) return json::object();
    std::ifstream in(config_path);
    if (!in) throw cfrec::IoError("cannot open config: " + config_path);
    json j = json::parse(in, nullptr, /*allow_exceptions=*/false);
    if (j.is_discarded() || !j.is_object())
        throw cfrec::IoError("config is not a JSON object: " + config_path);
    if (j.contains(section) && j.at(section).is_object()) return j.at(section);
    return j;
}

template <typename T>
void apply_flag(const std::optional<T>& flag, T& field) {
    if (flag) field = *flag;
}

cfrec::RunManifest make_manifest(const std::string& command, const json& effective_config,
                                 const std::string& primary_input) {
    cfrec::RunManifest m;
    m.command = command;
    m.config_hash = cfrec::fnv1a64(effective_config.dump());
    m.dataset_fingerprint =
        primary_input.empty() ? "none" : cfrec::file_fingerprint(primary_input);
    return m;
}

struct SplitCounts {
    std::size_t train = 0, val = 0, test = 0;
};

SplitCounts count_splits(const cfrec::Corpus& corpus) {
    SplitCounts c;
    for (const auto s : corpus.split_tags) {
        if (s == cfrec::Split::train) ++c.train;
        else if (s == cfrec::Split::val) ++c.val;
        else ++c.test;
    }
    return c;
}

cfrec::Split parse_split(const std::string& name) {
    if (name == "train") return cfrec::Split::train;
    if (name == "val") return cfrec::Split::val;
    if (name == "test") return cfrec::Split::test;
    throw cfrec::InvalidArgumentError("unknown split: " + name);
}

// Minimal CSV reader for numeric tables: header row, comma separators,
// no quoting.
std::vector<std::pair<std::string, std::vector<double>>> read_numeric_csv(
    const std::string& path) {
    std::ifstream in(path);
    if (!in) throw cfrec::IoError("cannot open for reading: " + path);
    std::string line;
    if (!std::getline(in, line)) throw cfrec::IoError("empty csv: " + path);
    if (!line.empty() && line.back() == '\r') line.pop_back();

    std::vector<std::pair<std::string, std::vector<double>>> cols;
    std::size_t start = 0;
    while (start <= line.size()) {
        const auto comma = line.find(',', start);
        const auto end = comma == std::string::npos ? line.size() : comma;
        cols.emplace_back(line.substr(start, end - start), std::vector<double>{});
        if (comma == std::string::npos) break;
        start = comma + 1;
    }

    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::size_t col = 0;
        start = 0;
        while (start <= line.size() && col < cols.size()) {
            const auto comma = line.find(',', start);
            const auto end = comma == std::string::npos ? line.size() : comma;
            double v = 0.0;
            const char* first = line.data() + start;
            const char* last = line.data() + end;
            const auto [p, ec] = std::from_chars(first, last, v);
            if (ec != std::errc{} || p != last)
                throw cfrec::IoError(path + ":" + std::to_string(line_no) +
                                     ": non-numeric cell in column '" + cols[col].first + "'");
            cols[col].second.push_back(v);
            ++col;
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
        if (col != cols.size())
            throw cfrec::IoError(path + ":" + std::to_string(line_no) + ": expected " +
                                 std::to_string(cols.size()) + " columns");
    }
    return cols;
}

struct IngestArgs {
    std::string input, format = "amazon", out, config;
    std::optional<int> k_core, min_freq, max_vocab, max_doc_tokens;
    std::optional<std::uint64_t> seed;
    std::vector<double> ratios;
};

int cmd_ingest(const IngestArgs& args) {
    cfrec::CorpusConfig cfg;
    const json section = load_config_section(args.config, "ingest");
    cfg.k_core = section.value("k_core", cfg.k_core);
    cfg.split_seed = section.value("split_seed", cfg.split_seed);
    cfg.min_freq = section.value("min_freq", cfg.min_freq);
    cfg.max_vocab = section.value("max_vocab", cfg.max_vocab);
    cfg.max_doc_tokens = section.value("max_doc_tokens", cfg.max_doc_tokens);
    if (section.contains("ratios")) {
        const auto& r = section.at("ratios");
        cfg.ratios = {r.at(0).get<double>(), r.at(1).get<double>(), r.at(2).get<double>()};
    }
    apply_flag(args.k_core, cfg.k_core);
    apply_flag(args.seed, cfg.split_seed);
    apply_flag(args.min_freq, cfg.min_freq);
    apply_flag(args.max_vocab, cfg.max_vocab);
    apply_flag(args.max_doc_tokens, cfg.max_doc_tokens);
    if (!args.ratios.empty()) {
        if (args.ratios.size() != 3)
            throw cfrec::InvalidArgumentError("--ratios needs exactly three values");
        cfg.ratios = {args.ratios[0], args.ratios[1], args.ratios[2]};
    }

    const std::string input = resolve_input(args.input);
    cfrec::ParseStats stats;
    std::vector<cfrec::Interaction> interactions;
    if (args.format == "amazon") {
        interactions = cfrec::parse_amazon_jsonl(input, &stats);
    } else if (args.format == "yelp") {
        interactions = cfrec::parse_yelp_jsonl(input, &stats);
    } else {
        throw cfrec::InvalidArgumentError("unknown format: " + args.format);
    }

    const cfrec::Corpus corpus = cfrec::build_corpus(std::move(interactions), cfg);
    cfrec::save_corpus(args.out, corpus);

    const SplitCounts splits = count_splits(corpus);
    std::cout << "users " << corpus.n_users() << "\n"
              << "items " << corpus.n_items() << "\n"
              << "reviews " << corpus.n_interactions() << "\n"
              << "vocab " << corpus.vocab.size() << "\n"
              << "train " << splits.train << "\n"
              << "val " << splits.val << "\n"
              << "test " << splits.test << "\n"
              << "skipped_lines " << stats.skipped << "\n";

    json effective = {{"command", "ingest"},     {"format", args.format},
                      {"k_core", cfg.k_core},    {"split_seed", cfg.split_seed},
                      {"min_freq", cfg.min_freq}, {"max_vocab", cfg.max_vocab},
                      {"max_doc_tokens", cfg.max_doc_tokens},
                      {"ratios", {cfg.ratios[0], cfg.ratios[1], cfg.ratios[2]}}};
    cfrec::RunManifest manifest = make_manifest("ingest", effective, input);
    manifest.seeds = {cfg.split_seed};
    manifest.artifacts = {args.out};
    manifest.write(args.out + ".manifest.json");
    return 0;
}

struct GenSynthArgs {
    std::string out, truth_out, lexicon = "data/default_lexicon.tsv", config;
    std::optional<int> users, items, per_user;
    std::optional<double> bias_strength, base_noise;
    std::optional<std::uint64_t> seed;
};

int cmd_gen_synth(const GenSynthArgs& args) {
    cfrec::SynthConfig cfg;
    const json section = load_config_section(args.config, "synth");
    cfg.n_users = section.value("n_users", cfg.n_users);
    cfg.n_items = section.value("n_items", cfg.n_items);
    cfg.per_user = section.value("per_user", cfg.per_user);
    cfg.bias_strength = section.value("bias_strength", cfg.bias_strength);
    cfg.base_noise = section.value("base_noise", cfg.base_noise);
    cfg.seed = section.value("seed", cfg.seed);
    cfg.review_min_tokens = section.value("review_min_tokens", cfg.review_min_tokens);
    cfg.review_max_tokens = section.value("review_max_tokens", cfg.review_max_tokens);
    cfg.min_freq = section.value("min_freq", cfg.min_freq);
    cfg.max_vocab = section.value("max_vocab", cfg.max_vocab);
    cfg.max_doc_tokens = section.value("max_doc_tokens", cfg.max_doc_tokens);
    apply_flag(args.users, cfg.n_users);
    apply_flag(args.items, cfg.n_items);
    apply_flag(args.per_user, cfg.per_user);
    apply_flag(args.bias_strength, cfg.bias_strength);
    apply_flag(args.base_noise, cfg.base_noise);
    apply_flag(args.seed, cfg.seed);

    const std::string lexicon_path = resolve_input(args.lexicon);
    const cfrec::Lexicon lex = cfrec::Lexicon::load_tsv(lexicon_path);
    const auto [corpus, truth] = cfrec::generate(cfg, lex);

    const std::string truth_out = args.truth_out.empty() ? args.out + ".truth" : args.truth_out;
    cfrec::save_corpus(args.out, corpus);
    cfrec::save_truth(truth_out, truth);

    const SplitCounts splits = count_splits(corpus);
    std::cout << "users " << corpus.n_users() << "\n"
              << "items " << corpus.n_items() << "\n"
              << "reviews " << corpus.n_interactions() << "\n"
              << "vocab " << corpus.vocab.size() << "\n"
              << "train " << splits.train << "\n"
              << "val " << splits.val << "\n"
              << "test " << splits.test << "\n";

    json effective = {{"command", "gen-synth"},
                      {"n_users", cfg.n_users},
                      {"n_items", cfg.n_items},
                      {"per_user", cfg.per_user},
                      {"bias_strength", cfg.bias_strength},
                      {"base_noise", cfg.base_noise},
                      {"seed", cfg.seed},
                      {"review_min_tokens", cfg.review_min_tokens},
                      {"review_max_tokens", cfg.review_max_tokens},
                      {"min_freq", cfg.min_freq},
                      {"max_vocab", cfg.max_vocab},
                      {"max_doc_tokens", cfg.max_doc_tokens}};
    cfrec::RunManifest manifest = make_manifest("gen-synth", effective, lexicon_path);
    manifest.seeds = {cfg.seed};
    manifest.artifacts = {args.out, truth_out};
    manifest.write(args.out + ".manifest.json");
    return 0;
}

struct TrainArgs {
    std::string corpus, out_dir = "run", config;
    std::optional<double> lr, weight_decay, alpha_u, alpha_i, dropout;
    std::optional<int> batch_size, max_epochs, patience;
    std::optional<std::uint64_t> seed;
    std::optional<int> d_w, d_h, d_c, d_z, d_a, d_m;
};

int cmd_train(const TrainArgs& args) {
    cfrec::TrainConfig cfg =
        cfrec::TrainConfig::from_json(load_config_section(args.config, "train"));
    apply_flag(args.lr, cfg.lr);
    apply_flag(args.weight_decay, cfg.weight_decay);
    apply_flag(args.alpha_u, cfg.alpha_u);
    apply_flag(args.alpha_i, cfg.alpha_i);
    apply_flag(args.dropout, cfg.dropout);
    apply_flag(args.batch_size, cfg.batch_size);
    apply_flag(args.max_epochs, cfg.max_epochs);
    apply_flag(args.patience, cfg.patience);
    apply_flag(args.seed, cfg.seed);
    apply_flag(args.d_w, cfg.dims.d_w);
    apply_flag(args.d_h, cfg.dims.d_h);
    apply_flag(args.d_c, cfg.dims.d_c);
    apply_flag(args.d_z, cfg.dims.d_z);
    apply_flag(args.d_a, cfg.dims.d_a);
    apply_flag(args.d_m, cfg.dims.d_m);

    const std::string corpus_path = resolve_input(args.corpus);
    const cfrec::Corpus corpus = cfrec::load_corpus(corpus_path);
    const cfrec::TrainResult result = cfrec::train(corpus, cfg);

    fs::create_directories(args.out_dir);
    const std::string ckpt_path = (fs::path(args.out_dir) / "model.ckpt").string();
    const std::string history_path = (fs::path(args.out_dir) / "history.csv").string();
    const json effective = cfg.to_json();
    cfrec::save_model(ckpt_path, result.params, cfg.seed, cfrec::fnv1a64(effective.dump()),
                      effective.dump());
    result.history.write_csv(history_path);

    const auto& epochs = result.history.epochs;
    std::cout << "epochs " << epochs.size() << "\n"
              << "best_epoch " << result.history.best_epoch << "\n"
              << "best_val_mse "
              << cfrec::format_double(
                     epochs[static_cast<std::size_t>(result.history.best_epoch)].val_mse)
              << "\n"
              << "val_fallback_train " << (result.history.val_is_train_fallback ? 1 : 0) << "\n";

    cfrec::RunManifest manifest = make_manifest("train", effective, corpus_path);
    manifest.seeds = {cfg.seed};
    manifest.artifacts = {ckpt_path, history_path};
    manifest.write((fs::path(args.out_dir) / "manifest.json").string());
    return 0;
}

struct SweepArgs {
    std::string corpus, checkpoint, out = "sweep.csv", split = "val";
    std::string lexicon = "data/default_lexicon.tsv", config;
    std::vector<double> betas;
    std::string criterion;  // empty = take the config value
    std::optional<double> tradeoff_lambda;
    bool clip = false;
};

int cmd_sweep(const SweepArgs& args) {
    cfrec::DebiasConfig cfg;
    const json section = load_config_section(args.config, "sweep");
    if (section.contains("sweep_set"))
        cfg.sweep_set = section.at("sweep_set").get<std::vector<double>>();
    cfg.tradeoff_lambda = section.value("tradeoff_lambda", cfg.tradeoff_lambda);
    std::string criterion = section.value("criterion", std::string("min_mse"));
    if (!args.betas.empty()) cfg.sweep_set = args.betas;
    if (!args.criterion.empty()) criterion = args.criterion;
    if (criterion == "min_mse") {
        cfg.criterion = cfrec::SweepCriterion::min_mse;
    } else if (criterion == "mse_bias_tradeoff") {
        cfg.criterion = cfrec::SweepCriterion::mse_bias_tradeoff;
    } else {
        throw cfrec::InvalidArgumentError("unknown criterion: " + criterion);
    }
    apply_flag(args.tradeoff_lambda, cfg.tradeoff_lambda);
    cfg.clip = args.clip || section.value("clip", false);

    const std::string corpus_path = resolve_input(args.corpus);
    const cfrec::Corpus corpus = cfrec::load_corpus(corpus_path);
    const cfrec::LoadedModel model = cfrec::load_model(resolve_input(args.checkpoint));
    const cfrec::Lexicon lex = cfrec::Lexicon::load_tsv(resolve_input(args.lexicon));
    const cfrec::PolarityProfile profile = cfrec::entity_polarities(corpus, lex);

    const cfrec::SweepResult sweep =
        cfrec::beta_sweep(model.params, parse_split(args.split), corpus, profile, cfg);
    cfrec::write_sweep_csv(args.out, sweep);
    std::cout << "selected_beta " << cfrec::format_double(sweep.selected_beta) << "\n";
    for (const auto& row : sweep.rows)
        std::cout << "beta " << cfrec::format_double(row.beta) << " mse "
                  << cfrec::format_double(row.mse) << " bu " << cfrec::format_double(row.bu)
                  << " bi " << cfrec::format_double(row.bi)
                  << (row.selected ? " selected" : "") << "\n";

    json effective = {{"command", "sweep-beta"},
                      {"split", args.split},
                      {"criterion", criterion},
                      {"tradeoff_lambda", cfg.tradeoff_lambda},
                      {"clip", cfg.clip},
                      {"sweep_set", cfg.sweep_set}};
    cfrec::RunManifest manifest = make_manifest("sweep-beta", effective, corpus_path);
    manifest.seeds = {model.seed};
    manifest.artifacts = {args.out};
    manifest.write(args.out + ".manifest.json");
    return 0;
}

struct AnalyzeArgs {
    std::string corpus, checkpoint, out_dir = "analysis", split = "test";
    std::string lexicon = "data/default_lexicon.tsv", config;
    double beta = 0.0;
    double bin_width = 0.1;
    bool clip = false;
};

int cmd_analyze(const AnalyzeArgs& args) {
    const std::string corpus_path = resolve_input(args.corpus);
    const cfrec::Corpus corpus = cfrec::load_corpus(corpus_path);
    const cfrec::LoadedModel model = cfrec::load_model(resolve_input(args.checkpoint));
    const cfrec::Lexicon lex = cfrec::Lexicon::load_tsv(resolve_input(args.lexicon));
    const cfrec::PolarityProfile profile = cfrec::entity_polarities(corpus, lex);

    const cfrec::EvalResult eval =
        cfrec::evaluate(model.params, parse_split(args.split), corpus);
    const cfrec::BiasReport report =
        cfrec::analyze(eval, profile, args.beta, args.clip, args.bin_width);
    const std::vector<std::string> files = cfrec::write_report(args.out_dir, report);

    std::cout << "mse_before " << cfrec::format_double(report.mse_before) << "\n"
              << "bu_before " << cfrec::format_double(report.bu_before) << "\n"
              << "bi_before " << cfrec::format_double(report.bi_before) << "\n"
              << "mse " << cfrec::format_double(report.mse) << "\n"
              << "bu " << cfrec::format_double(report.bu) << "\n"
              << "bi " << cfrec::format_double(report.bi) << "\n"
              << "spearman " << cfrec::format_double(report.correlation.spearman) << "\n";

    json effective = {{"command", "analyze"}, {"split", args.split},   {"beta", args.beta},
                      {"clip", args.clip},    {"bin_width", args.bin_width}};
    cfrec::RunManifest manifest = make_manifest("analyze", effective, corpus_path);
    manifest.seeds = {model.seed};
    manifest.artifacts = files;
    manifest.write((fs::path(args.out_dir) / "manifest.json").string());
    return 0;
}

struct WilcoxonArgs {
    std::string input, col_a, col_b;
    std::string alternative = "greater", mode = "normal";
    std::vector<double> diffs;
};

int cmd_wilcoxon(const WilcoxonArgs& args) {
    std::vector<double> diffs = args.diffs;
    if (diffs.empty()) {
        if (args.input.empty())
            throw cfrec::InvalidArgumentError("wilcoxon needs --input or --diffs");
        const auto cols = read_numeric_csv(resolve_input(args.input));
        if (cols.size() < 2)
            throw cfrec::IoError("wilcoxon input needs at least two columns");
        const auto find_col = [&](const std::string& name,
                                  std::size_t fallback) -> const std::vector<double>& {
            if (name.empty()) return cols[fallback].second;
            for (const auto& [header, values] : cols)
                if (header == name) return values;
            throw cfrec::InvalidArgumentError("no column named '" + name + "'");
        };
        const auto& a = find_col(args.col_a, 0);
        const auto& b = find_col(args.col_b, 1);
        if (a.size() != b.size())
            throw cfrec::IoError("wilcoxon columns have different lengths");
        diffs.resize(a.size());
        for (std::size_t k = 0; k < a.size(); ++k) diffs[k] = a[k] - b[k];
    }

    cfrec::Alternative alt;
    if (args.alternative == "greater") alt = cfrec::Alternative::greater;
    else if (args.alternative == "less") alt = cfrec::Alternative::less;
    else if (args.alternative == "two-sided") alt = cfrec::Alternative::two_sided;
    else throw cfrec::InvalidArgumentError("unknown alternative: " + args.alternative);

    cfrec::WilcoxonMode mode;
    if (args.mode == "normal") mode = cfrec::WilcoxonMode::normal;
    else if (args.mode == "exact") mode = cfrec::WilcoxonMode::exact;
    else throw cfrec::InvalidArgumentError("unknown mode: " + args.mode);

    const cfrec::WilcoxonResult res = cfrec::wilcoxon_signed_rank(diffs, alt, mode);
    if (!res.warning.empty()) std::cerr << "warning: " << res.warning << "\n";
    std::cout << "n " << res.n << "\n"
              << "w_minus " << cfrec::format_double(res.w_minus) << "\n"
              << "w_plus " << cfrec::format_double(res.w_plus) << "\n"
              << "mode " << (res.mode_used == cfrec::WilcoxonMode::exact ? "exact" : "normal")
              << "\n";
    if (res.mode_used == cfrec::WilcoxonMode::normal)
        std::cout << "z " << cfrec::format_double(res.z) << "\n";
    std::cout << "p " << cfrec::format_double(res.p) << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Review-based rating prediction with counterfactual sentiment debiasing"};
    app.require_subcommand(1);

    IngestArgs ingest;
    auto* cmd_in = app.add_subcommand("ingest", "Parse reviews into a corpus cache");
    cmd_in->add_option("--input", ingest.input, "Review JSONL file")->required();
    cmd_in->add_option("--format", ingest.format, "amazon|yelp");
    cmd_in->add_option("--out", ingest.out, "Corpus cache path")->required();
    cmd_in->add_option("--config", ingest.config, "JSON config file");
    cmd_in->add_option("--k", ingest.k_core, "k-core threshold");
    cmd_in->add_option("--seed", ingest.seed, "Split seed");
    cmd_in->add_option("--ratios", ingest.ratios, "train,val,test ratios")->delimiter(',');
    cmd_in->add_option("--min-freq", ingest.min_freq, "Vocabulary min frequency");
    cmd_in->add_option("--max-vocab", ingest.max_vocab, "Vocabulary size cap");
    cmd_in->add_option("--max-doc-tokens", ingest.max_doc_tokens, "Document token cap");

    GenSynthArgs synth;
    auto* cmd_gs = app.add_subcommand("gen-synth", "Generate a synthetic biased corpus");
    cmd_gs->add_option("--out", synth.out, "Corpus cache path")->required();
    cmd_gs->add_option("--truth-out", synth.truth_out, "Ground-truth sidecar path");
    cmd_gs->add_option("--lexicon", synth.lexicon, "Lexicon TSV");
    cmd_gs->add_option("--config", synth.config, "JSON config file");
    cmd_gs->add_option("--users", synth.users, "User count");
    cmd_gs->add_option("--items", synth.items, "Item count");
    cmd_gs->add_option("--per-user", synth.per_user, "Interactions per user");
    cmd_gs->add_option("--bias-strength", synth.bias_strength, "Polarity noise coefficient");
    cmd_gs->add_option("--base-noise", synth.base_noise, "Base noise sd");
    cmd_gs->add_option("--seed", synth.seed, "Generator seed");

    TrainArgs train;
    auto* cmd_tr = app.add_subcommand("train", "Train the model on a corpus");
    cmd_tr->add_option("--corpus", train.corpus, "Corpus cache")->required();
    cmd_tr->add_option("--out-dir", train.out_dir, "Output directory");
    cmd_tr->add_option("--config", train.config, "JSON config file");
    cmd_tr->add_option("--lr", train.lr, "Learning rate");
    cmd_tr->add_option("--weight-decay", train.weight_decay, "L2 weight decay");
    cmd_tr->add_option("--alpha-u", train.alpha_u, "User-branch loss weight");
    cmd_tr->add_option("--alpha-i", train.alpha_i, "Item-branch loss weight");
    cmd_tr->add_option("--dropout", train.dropout, "Dropout rate");
    cmd_tr->add_option("--batch-size", train.batch_size, "Batch size");
    cmd_tr->add_option("--max-epochs", train.max_epochs, "Epoch cap");
    cmd_tr->add_option("--patience", train.patience, "Early-stop patience");
    cmd_tr->add_option("--seed", train.seed, "Training seed");
    cmd_tr->add_option("--d-w", train.d_w, "Word embedding dim");
    cmd_tr->add_option("--d-h", train.d_h, "Id embedding dim");
    cmd_tr->add_option("--d-c", train.d_c, "Conv channels");
    cmd_tr->add_option("--d-z", train.d_z, "Encoder output dim");
    cmd_tr->add_option("--d-a", train.d_a, "Attention hidden dim");
    cmd_tr->add_option("--d-m", train.d_m, "Interaction hidden dim");

    SweepArgs sweep;
    auto* cmd_sw = app.add_subcommand("sweep-beta", "Score the debias strength sweep");
    cmd_sw->add_option("--corpus", sweep.corpus, "Corpus cache")->required();
    cmd_sw->add_option("--checkpoint", sweep.checkpoint, "Model checkpoint")->required();
    cmd_sw->add_option("--out", sweep.out, "Sweep CSV path");
    cmd_sw->add_option("--split", sweep.split, "train|val|test");
    cmd_sw->add_option("--lexicon", sweep.lexicon, "Lexicon TSV");
    cmd_sw->add_option("--config", sweep.config, "JSON config file");
    cmd_sw->add_option("--betas", sweep.betas, "Sweep values")->delimiter(',');
    cmd_sw->add_option("--criterion", sweep.criterion, "min_mse|mse_bias_tradeoff");
    cmd_sw->add_option("--lambda", sweep.tradeoff_lambda, "Tradeoff weight");
    cmd_sw->add_flag("--clip", sweep.clip, "Clip predictions into [1,5]");

    AnalyzeArgs analyze;
    auto* cmd_an = app.add_subcommand("analyze", "Write the debias analysis report");
    cmd_an->add_option("--corpus", analyze.corpus, "Corpus cache")->required();
    cmd_an->add_option("--checkpoint", analyze.checkpoint, "Model checkpoint")->required();
    cmd_an->add_option("--out-dir", analyze.out_dir, "Report directory");
    cmd_an->add_option("--split", analyze.split, "train|val|test");
    cmd_an->add_option("--lexicon", analyze.lexicon, "Lexicon TSV");
    cmd_an->add_option("--config", analyze.config, "JSON config file");
    cmd_an->add_option("--beta", analyze.beta, "Debias strength");
    cmd_an->add_option("--bin-width", analyze.bin_width, "Histogram bin width");
    cmd_an->add_flag("--clip", analyze.clip, "Clip predictions into [1,5]");

    WilcoxonArgs wilcoxon;
    auto* cmd_wx = app.add_subcommand("wilcoxon", "Paired signed-rank test");
    cmd_wx->add_option("--input", wilcoxon.input, "CSV with paired metric columns");
    cmd_wx->add_option("--col-a", wilcoxon.col_a, "First column name");
    cmd_wx->add_option("--col-b", wilcoxon.col_b, "Second column name");
    cmd_wx->add_option("--diffs", wilcoxon.diffs, "Direct difference list")->delimiter(',');
    cmd_wx->add_option("--alternative", wilcoxon.alternative, "greater|less|two-sided");
    cmd_wx->add_option("--mode", wilcoxon.mode, "normal|exact");

    try {
        app.parse(argc, argv);
        if (cmd_in->parsed()) return cmd_ingest(ingest);
        if (cmd_gs->parsed()) return cmd_gen_synth(synth);
        if (cmd_tr->parsed()) return cmd_train(train);
        if (cmd_sw->parsed()) return cmd_sweep(sweep);
        if (cmd_an->parsed()) return cmd_analyze(analyze);
        if (cmd_wx->parsed()) return cmd_wilcoxon(wilcoxon);
        return 2;
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n";
        return 2;
    } catch (const cfrec::IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const cfrec::InvalidArgumentError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const cfrec::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
