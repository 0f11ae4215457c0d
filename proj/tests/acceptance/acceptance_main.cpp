// End-to-end acceptance gate. Each numbered check prints exactly one
// PASS/FAIL/SKIP line; the process exits nonzero when any check fails.
// Check 2 needs the public Gourmet Food 5-core review file and is skipped
// when $CFREC_DATA_ROOT does not provide it.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "cfrec/data.hpp"
#include "cfrec/debias.hpp"
#include "cfrec/grad_check.hpp"
#include "cfrec/lexicon.hpp"
#include "cfrec/metrics.hpp"
#include "cfrec/model.hpp"
#include "cfrec/ops.hpp"
#include "cfrec/rng.hpp"
#include "cfrec/synthetic.hpp"
#include "cfrec/training.hpp"

using namespace cfrec;
using Clock = std::chrono::steady_clock;

namespace {

enum class Outcome { pass, fail, skip };

struct CheckResult {
    Outcome outcome = Outcome::fail;
    std::string detail;
};

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return "<unreadable:" + path + ">";
    return std::string(std::istreambuf_iterator<char>(in), {});
}

const Lexicon& shipped_lexicon() {
    static Lexicon lex =
        Lexicon::load_tsv(std::string(CFREC_DATA_DIR) + "/default_lexicon.tsv");
    return lex;
}

// ---------------------------------------------------------------------------
// 1. Wilcoxon anchor

CheckResult check_wilcoxon_anchor() {
    const std::vector<double> diffs = {0.0163, 0.0525, 0.0402, -0.0120, 0.0492};
    WilcoxonResult r =
        wilcoxon_signed_rank(diffs, Alternative::greater, WilcoxonMode::normal);
    std::ostringstream os;
    os << "p=" << r.p << " w_minus=" << r.w_minus;
    if (r.p >= 0.0388 && r.p <= 0.0408 && r.w_minus == 1.0)
        return {Outcome::pass, os.str()};
    return {Outcome::fail, os.str() + " (want p in [0.0388, 0.0408])"};
}

// ---------------------------------------------------------------------------
// 2. Dataset-statistics anchor (skippable)

CheckResult check_dataset_anchor() {
    const char* root = std::getenv("CFREC_DATA_ROOT");
    if (root == nullptr || *root == '\0')
        return {Outcome::skip, "CFREC_DATA_ROOT not set"};
    const std::string path =
        std::string(root) + "/reviews_Grocery_and_Gourmet_Food_5.json";
    if (!std::filesystem::exists(path))
        return {Outcome::skip, "dataset file not present: " + path};

    ParseStats stats;
    std::vector<Interaction> xs = parse_amazon_jsonl(path, &stats);
    xs = k_core_filter(std::move(xs), 5);
    std::set<std::string> users, items;
    for (const auto& x : xs) {
        users.insert(x.user_id);
        items.insert(x.item_id);
    }
    std::ostringstream os;
    os << "users=" << users.size() << " items=" << items.size()
       << " reviews=" << xs.size();
    if (users.size() == 14683 && items.size() == 8715 && xs.size() == 151253)
        return {Outcome::pass, os.str()};
    return {Outcome::fail, os.str() + " (want 14683/8715/151253)"};
}

// ---------------------------------------------------------------------------
// 3. Gradient suite

Tensor rand_leaf(std::vector<int> shape, Rng& rng) {
    std::vector<double> v(static_cast<std::size_t>(numel(shape)));
    for (double& x : v) x = 2.0 * rng.uniform() - 1.0;
    return Tensor::leaf(std::move(shape), std::move(v), true);
}

Corpus toy_corpus() {
    // 3 users x 3 items, all pairs; each review has 4 unique-ish tokens so
    // every document is 12 tokens with no padding (padding rows are exact
    // zeros and would create maxpool ties that break finite differences)
    std::vector<Interaction> xs;
    int w = 0;
    for (int u = 0; u < 3; ++u)
        for (int i = 0; i < 3; ++i) {
            std::vector<std::string> toks;
            for (int t = 0; t < 4; ++t) toks.push_back("tok" + std::to_string(w++ % 17));
            xs.push_back({"user" + std::to_string(u), "item" + std::to_string(i),
                          1.0 + ((u * 3 + i) % 5), toks,
                          static_cast<std::int64_t>(u * 3 + i)});
        }
    CorpusConfig cfg;
    cfg.k_core = 3;
    cfg.min_freq = 1;
    cfg.ratios = {1.0, 0.0, 0.0};
    cfg.split_seed = 5;
    return build_corpus(std::move(xs), cfg);
}

CheckResult check_gradients() {
    const double tol = 1e-4;
    const double h = 1e-5;
    double worst = 0.0;
    std::string worst_name = "none";
    auto run = [&](const char* name, const std::function<Tensor()>& f,
                   std::vector<Tensor>& params) {
        const double err = grad_check(f, params, h);
        if (err > worst) {
            worst = err;
            worst_name = name;
        }
    };

    Rng rng(2024);
    {
        std::vector<Tensor> p = {rand_leaf({3, 4}, rng), rand_leaf({3, 4}, rng)};
        run("add", [&]() { return sum(add(p[0], p[1])); }, p);
        run("sub", [&]() { return sum(sub(p[0], p[1])); }, p);
        run("mul", [&]() { return sum(mul(p[0], p[1])); }, p);
        run("scale", [&]() { return sum(scale(p[0], -2.3)); }, p);
        run("add_const", [&]() { return sum(add_const(p[0], 1.1)); }, p);
        run("sigmoid", [&]() { return sum(sigmoid(p[0])); }, p);
        run("flatten", [&]() { return sum(flatten(p[0])); }, p);
    }
    {
        // relu probed away from its kink
        std::vector<Tensor> p = {Tensor::leaf({4}, std::vector<double>{-1.4, -0.5, 0.6, 1.3}, true)};
        run("relu", [&]() { return sum(relu(p[0])); }, p);
    }
    {
        std::vector<Tensor> p = {rand_leaf({6}, rng)};
        run("softmax", [&]() { return sum(mul(softmax(p[0]), p[0])); }, p);
    }
    {
        std::vector<Tensor> p = {rand_leaf({2, 3}, rng), rand_leaf({1}, rng),
                                 rand_leaf({1}, rng)};
        run("sum", [&]() { return sum(p[0]); }, p);
        run("sum_scalars",
            [&]() { return sum_scalars({sum(p[0]), scale(sum(p[1]), 2.0), sum(p[2])}); }, p);
    }
    {
        std::vector<Tensor> p = {rand_leaf({3, 4}, rng), rand_leaf({4, 2}, rng)};
        run("matmul", [&]() { return sum(matmul(p[0], p[1])); }, p);
    }
    {
        std::vector<Tensor> p = {rand_leaf({3, 4}, rng), rand_leaf({4}, rng)};
        run("add_row_bias", [&]() { return sum(add_row_bias(p[0], p[1])); }, p);
    }
    {
        std::vector<Tensor> p = {rand_leaf({3}, rng), rand_leaf({3, 4}, rng),
                                 rand_leaf({4}, rng)};
        run("vec_linear", [&]() { return sum(vec_linear(p[0], p[1], p[2])); }, p);
    }
    {
        std::vector<Tensor> p = {rand_leaf({5, 3}, rng)};
        run("lookup_rows", [&]() { return sum(lookup_rows(p[0], {2, 0, 2, 4})); }, p);
        run("lookup_row", [&]() { return sum(lookup_row(p[0], 1)); }, p);
    }
    {
        std::vector<Tensor> p = {rand_leaf({8, 3}, rng), rand_leaf({2, 3, 4}, rng),
                                 rand_leaf({4}, rng)};
        run("conv1d", [&]() { return sum(conv1d(p[0], p[1], p[2])); }, p);
        run("maxpool1d", [&]() { return sum(maxpool1d(p[0], 3, 2)); }, p);
    }
    {
        std::vector<Tensor> p = {rand_leaf({4, 3}, rng), rand_leaf({4}, rng)};
        run("weighted_rows_sum", [&]() { return sum(weighted_rows_sum(p[0], p[1])); }, p);
    }
    {
        // dropout with a fixed mask: reseed the stream inside f so every
        // evaluation sees the identical mask
        std::vector<Tensor> p = {rand_leaf({10}, rng)};
        run("dropout",
            [&]() {
                Rng mask_rng(77);
                return sum(dropout(p[0], 0.4, mask_rng, true));
            },
            p);
    }

    // full model + loss on the toy corpus
    Corpus corpus = toy_corpus();
    ModelDims dims;
    dims.d_w = 8;
    dims.d_h = 8;
    dims.d_c = 8;
    dims.d_z = 8;
    dims.d_a = 8;
    dims.d_m = 8;
    ModelParams mp =
        ModelParams::init(corpus.vocab.size(), corpus.n_users(), corpus.n_items(), dims, 9);
    std::vector<Tensor> all_params = mp.all();
    ForwardContext ctx;  // eval mode: no dropout, deterministic
    auto model_loss = [&]() {
        std::vector<Tensor> rc, lu, li;
        for (std::size_t k = 0; k < corpus.n_interactions(); ++k) {
            TensorBundle tb =
                forward(corpus.user_of[k], corpus.item_of[k], mp, corpus, ctx);
            Tensor y = Tensor::scalar(corpus.interactions[k].rating);
            Tensor e = sub(y, tb.y_hat_uis);
            rc.push_back(mul(e, e));
            Tensor eu = sub(y, tb.y_hat_u);
            lu.push_back(mul(eu, eu));
            Tensor ei = sub(y, tb.y_hat_i);
            li.push_back(mul(ei, ei));
        }
        const double inv_n = 1.0 / static_cast<double>(corpus.n_interactions());
        Tensor l_rc = scale(sum_scalars(rc), 0.5 * inv_n);
        Tensor l_u = scale(sum_scalars(lu), inv_n);
        Tensor l_i = scale(sum_scalars(li), inv_n);
        return add(add(l_rc, scale(l_u, 0.3)), scale(l_i, 0.3));
    };
    run("model+loss", model_loss, all_params);

    std::ostringstream os;
    os << "max_rel_err=" << worst << " at " << worst_name;
    if (worst < tol) return {Outcome::pass, os.str()};
    return {Outcome::fail, os.str() + " (tolerance 1e-4)"};
}

// ---------------------------------------------------------------------------
// 4. Identity suite

CheckResult check_identities() {
    Corpus corpus = toy_corpus();
    ModelDims dims;
    dims.d_w = 8;
    dims.d_h = 8;
    dims.d_c = 8;
    dims.d_z = 8;
    dims.d_a = 8;
    dims.d_m = 8;
    ModelParams mp =
        ModelParams::init(corpus.vocab.size(), corpus.n_users(), corpus.n_items(), dims, 9);

    EvalResult ev = evaluate(mp, Split::train, corpus);

    // debiasing at beta 0 and the bundle identities, bitwise
    for (const auto& rec : ev.records) {
        const PredictionBundle& b = rec.bundle;
        if (debias(b, 0.0) != b.y_hat_uis)
            return {Outcome::fail, "debias(beta=0) != y_hat_uis"};
        if (b.y_hat_ui != (b.q_m + b.y_hat_u) + b.y_hat_i)
            return {Outcome::fail, "y_hat_ui != (q_m + y_hat_u) + y_hat_i"};
        if (b.y_hat_uis != b.y_hat_ui * b.sigma_s)
            return {Outcome::fail, "y_hat_uis != y_hat_ui * sigma_s"};
    }

    // loss decomposition within 1e-12 against an independent accumulation
    std::vector<PredictionBundle> bundles;
    std::vector<double> ys;
    for (const auto& rec : ev.records) {
        bundles.push_back(rec.bundle);
        ys.push_back(rec.rating);
    }
    const double au = 0.37, ai = 0.21;
    LossValues lv = compute_losses(bundles, ys, au, ai);
    double rc = 0, lu = 0, li = 0;
    for (std::size_t k = 0; k < ys.size(); ++k) {
        const double e = ys[k] - bundles[k].y_hat_uis;
        rc += e * e;
        const double euv = ys[k] - bundles[k].y_hat_u;
        lu += euv * euv;
        const double eiv = ys[k] - bundles[k].y_hat_i;
        li += eiv * eiv;
    }
    const double n = static_cast<double>(ys.size());
    const double recomposed = rc / (2.0 * n) + au * (lu / n) + ai * (li / n);
    if (std::abs(lv.total - recomposed) > 1e-12)
        return {Outcome::fail, "loss decomposition off by " +
                                   std::to_string(std::abs(lv.total - recomposed))};
    if (std::abs(lv.total - (lv.rc + au * lv.user + ai * lv.item)) > 1e-12)
        return {Outcome::fail, "L != L_RC + au*L_U + ai*L_I"};

    // the sweep's beta = 0 row equals the evaluation it was fed
    PolarityProfile prof = entity_polarities(corpus, shipped_lexicon());
    // toy corpus has 3 users/items; deciles need 10, so grade on synthetic
    SynthConfig scfg;
    scfg.n_users = 60;
    scfg.n_items = 12;
    scfg.per_user = 5;
    scfg.seed = 31;
    auto [syn, truth] = generate(scfg, shipped_lexicon());
    ModelParams sp = ModelParams::init(syn.vocab.size(), syn.n_users(), syn.n_items(), dims, 9);
    EvalResult sev = evaluate(sp, Split::train, syn);
    PolarityProfile sprof = entity_polarities(syn, shipped_lexicon());
    DebiasConfig dcfg;
    SweepResult sw = beta_sweep(sev, sprof, dcfg);
    if (sw.rows.empty() || sw.rows[0].beta != 0.0)
        return {Outcome::fail, "sweep is missing the beta=0 baseline row"};
    if (sw.rows[0].mse != sev.mse)
        return {Outcome::fail, "sweep beta=0 mse differs from evaluate()"};

    return {Outcome::pass, "all identities hold"};
}

// ---------------------------------------------------------------------------
// 5 + 6. Synthetic debiasing efficacy and the gate-correlation property

struct EfficacyArtifacts {
    bool ready = false;
    std::string note;
    SweepResult sweep;
    double base_mse = 0, base_bias = 0;
    std::optional<SweepRow> winner;
    EvalResult test_eval;
    PolarityProfile profile;
};

EfficacyArtifacts run_efficacy() {
    EfficacyArtifacts art;

    SynthConfig scfg;  // defaults: 1000 users, 500 items, bias_strength 1.0,
                       // base_noise 0.5, seed 670849
    scfg.per_user = 8;
    auto [corpus, truth] = generate(scfg, shipped_lexicon());

    TrainConfig tcfg;
    tcfg.dims.d_w = 24;
    tcfg.dims.d_h = 16;
    tcfg.dims.d_c = 24;
    tcfg.dims.d_z = 16;
    tcfg.dims.d_a = 16;
    tcfg.dims.d_m = 2;  // a small fusion head leaves pair-level structure
                        // to the sentiment gate
    tcfg.lr = 0.005;
    tcfg.batch_size = 64;
    tcfg.dropout = 0.3;
    tcfg.alpha_u = 0.1;
    tcfg.alpha_i = 0.1;
    tcfg.max_epochs = 30;
    tcfg.patience = 30;  // the criterion trains the full 30 epochs
    tcfg.seed = 670849;
    TrainResult tr = train(corpus, tcfg);

    art.test_eval = evaluate(tr.params, Split::test, corpus);
    art.profile = entity_polarities(corpus, shipped_lexicon());

    DebiasConfig dcfg;  // the default sweep set is the 12-value grid
    art.sweep = beta_sweep(art.test_eval, art.profile, dcfg);

    const SweepRow& base = art.sweep.rows[0];
    art.base_mse = base.mse;
    art.base_bias = base.bu + base.bi;
    for (std::size_t r = 1; r < art.sweep.rows.size(); ++r) {
        const SweepRow& row = art.sweep.rows[r];
        const double bias = row.bu + row.bi;
        const bool bias_ok = art.base_bias > 0 && bias <= 0.9 * art.base_bias;
        const bool mse_ok = row.mse <= 1.15 * art.base_mse;
        if (bias_ok && mse_ok) {
            art.winner = row;
            break;
        }
    }
    art.ready = true;
    return art;
}

EfficacyArtifacts& efficacy() {
    static EfficacyArtifacts art = run_efficacy();
    return art;
}

CheckResult check_efficacy() {
    const EfficacyArtifacts& art = efficacy();
    std::ostringstream os;
    os << "base mse=" << art.base_mse << " bu+bi=" << art.base_bias;
    if (art.winner) {
        const double bias = art.winner->bu + art.winner->bi;
        os << "; beta=" << art.winner->beta << " mse=" << art.winner->mse
           << " bu+bi=" << bias << " (bias " << std::showpos
           << 100.0 * (bias / art.base_bias - 1.0) << "%, mse "
           << 100.0 * (art.winner->mse / art.base_mse - 1.0) << "%)" << std::noshowpos;
        return {Outcome::pass, os.str()};
    }
    os << "; no beta met bias -10% at mse +15%";
    return {Outcome::fail, os.str()};
}

CheckResult check_gate_correlation() {
    const EfficacyArtifacts& art = efficacy();
    CorrelationSummary cs = sentiment_correlation(art.test_eval.records, art.profile);
    std::ostringstream os;
    os << "spearman=" << cs.spearman;
    if (cs.degenerate) return {Outcome::fail, os.str() + " (degenerate gate)"};
    if (cs.spearman > 0.3) return {Outcome::pass, os.str()};
    return {Outcome::fail, os.str() + " (want > 0.3)"};
}

// ---------------------------------------------------------------------------
// 7. Overfit sanity

CheckResult check_overfit() {
    SynthConfig scfg;
    scfg.n_users = 20;
    scfg.n_items = 20;
    scfg.per_user = 10;  // 200 interactions
    scfg.ratios = {1.0, 0.0, 0.0};
    scfg.seed = 909;
    auto [corpus, truth] = generate(scfg, shipped_lexicon());

    TrainConfig tcfg;
    tcfg.dims.d_w = 16;
    tcfg.dims.d_h = 16;
    tcfg.dims.d_c = 16;
    tcfg.dims.d_z = 16;
    tcfg.dims.d_a = 8;
    tcfg.dims.d_m = 16;
    tcfg.batch_size = 200;  // full batch: one step per epoch
    tcfg.max_epochs = 500;
    tcfg.patience = 500;
    tcfg.dropout = 0.0;
    tcfg.lr = 0.01;
    tcfg.seed = 909;
    TrainResult tr = train(corpus, tcfg);

    double best = std::numeric_limits<double>::infinity();
    std::size_t steps = 0;
    for (const auto& ep : tr.history.epochs) {
        ++steps;
        best = std::min(best, ep.val_mse);  // all-train corpus: val falls back to train
        if (best < 0.05) break;
    }
    std::ostringstream os;
    os << "train mse " << best << " after " << steps << " full-batch steps";
    if (best < 0.05) return {Outcome::pass, os.str()};
    return {Outcome::fail, os.str() + " (want < 0.05 within 500)"};
}

// ---------------------------------------------------------------------------
// 8. End-to-end determinism through the command-line tool

CheckResult check_cli_determinism() {
    const char* bin = std::getenv("CFREC_BIN");
    if (bin == nullptr || *bin == '\0')
        return {Outcome::fail, "CFREC_BIN is not set (run through ctest)"};

    const auto base = std::filesystem::temp_directory_path() / "cfrec_accept_determinism";
    std::filesystem::remove_all(base);
    const std::string lex_path = std::string(CFREC_DATA_DIR) + "/default_lexicon.tsv";

    auto run_pipeline = [&](const std::string& dir) -> bool {
        std::filesystem::create_directories(dir);
        const std::string q = "'";
        auto sh = [&](const std::string& cmd) {
            const std::string full = "cd " + q + dir + q + " && " + cmd + " >/dev/null 2>&1";
            return std::system(full.c_str()) == 0;
        };
        const std::string b = std::string(q) + bin + q;
        const std::string lex = " --lexicon " + q + lex_path + q;
        return sh(b + " gen-synth --out syn.corpus --users 200 --items 50 --per-user 5"
                      " --seed 4242" + lex) &&
               sh(b + " train --corpus syn.corpus --out-dir run --max-epochs 3"
                      " --d-w 12 --d-h 8 --d-c 12 --d-z 8 --d-a 8 --d-m 8 --seed 4242") &&
               sh(b + " sweep-beta --corpus syn.corpus --checkpoint run/model.ckpt"
                      " --out sweep.csv --split train" + lex) &&
               sh(b + " analyze --corpus syn.corpus --checkpoint run/model.ckpt"
                      " --out-dir analysis --split train --beta 0.1" + lex);
    };

    const std::string dir_a = (base / "a").string();
    const std::string dir_b = (base / "b").string();
    if (!run_pipeline(dir_a)) return {Outcome::fail, "first pipeline run failed"};
    if (!run_pipeline(dir_b)) return {Outcome::fail, "second pipeline run failed"};

    const std::vector<std::string> artifacts = {
        "syn.corpus",          "syn.corpus.truth",        "syn.corpus.manifest.json",
        "run/model.ckpt",      "run/history.csv",         "run/manifest.json",
        "sweep.csv",           "sweep.csv.manifest.json", "analysis/report.json",
        "analysis/group_stats.csv", "analysis/dist_diff.csv",
        "analysis/correlation_bins.csv", "analysis/manifest.json",
    };
    for (const auto& rel : artifacts) {
        const std::string fa = dir_a + "/" + rel;
        const std::string fb = dir_b + "/" + rel;
        if (!std::filesystem::exists(fa))
            return {Outcome::fail, "missing artifact: " + fa};
        if (read_file(fa) != read_file(fb))
            return {Outcome::fail, "artifact differs between runs: " + rel};
    }
    std::filesystem::remove_all(base);
    std::ostringstream os;
    os << artifacts.size() << " artifacts byte-identical across runs";
    return {Outcome::pass, os.str()};
}

// ---------------------------------------------------------------------------
// 9. Oracle equivalences on random instances

CheckResult check_oracles() {
    Rng rng(123456);
    const double tol = 1e-12;

    // conv1d against the direct quadruple loop
    for (int it = 0; it < 100; ++it) {
        const int w = 1 + static_cast<int>(rng.below(4));
        const int L = w + static_cast<int>(rng.below(9));
        const int d_in = 1 + static_cast<int>(rng.below(5));
        const int d_out = 1 + static_cast<int>(rng.below(5));
        auto draw = [&](std::vector<int> shape) {
            std::vector<double> v(static_cast<std::size_t>(numel(shape)));
            for (double& x : v) x = 4.0 * rng.uniform() - 2.0;
            return Tensor::leaf(std::move(shape), std::move(v));
        };
        Tensor seq = draw({L, d_in});
        Tensor ker = draw({w, d_in, d_out});
        Tensor bias = draw({d_out});
        Tensor out = conv1d(seq, ker, bias);
        for (int t = 0; t < L - w + 1; ++t)
            for (int o = 0; o < d_out; ++o) {
                double acc = bias.values()[o];
                for (int k = 0; k < w; ++k)
                    for (int c = 0; c < d_in; ++c)
                        acc += seq.values()[(t + k) * d_in + c] *
                               ker.values()[(k * d_in + c) * d_out + o];
                if (std::abs(out.values()[t * d_out + o] - acc) > tol)
                    return {Outcome::fail, "conv1d oracle mismatch"};
            }
    }

    // maxpool1d against the direct loop
    for (int it = 0; it < 100; ++it) {
        const int window = 1 + static_cast<int>(rng.below(4));
        const int stride = 1 + static_cast<int>(rng.below(3));
        const int L = window + static_cast<int>(rng.below(12));
        const int d = 1 + static_cast<int>(rng.below(5));
        std::vector<double> v(static_cast<std::size_t>(L) * d);
        for (double& x : v) x = 4.0 * rng.uniform() - 2.0;
        Tensor seq = Tensor::leaf({L, d}, v);
        Tensor out = maxpool1d(seq, window, stride);
        const int out_len = (L - window) / stride + 1;
        for (int t = 0; t < out_len; ++t)
            for (int c = 0; c < d; ++c) {
                double best = v[static_cast<std::size_t>(t * stride) * d + c];
                for (int k = 1; k < window; ++k)
                    best = std::max(
                        best, v[static_cast<std::size_t>((t * stride + k)) * d + c]);
                if (std::abs(out.values()[t * d + c] - best) > tol)
                    return {Outcome::fail, "maxpool1d oracle mismatch"};
            }
    }

    // spearman against rank-then-pearson with average ties
    for (int it = 0; it < 100; ++it) {
        const std::size_t n = 2 + rng.below(25);
        std::vector<double> xs(n), ys(n);
        for (std::size_t i = 0; i < n; ++i) {
            xs[i] = static_cast<double>(rng.below(6));
            ys[i] = static_cast<double>(rng.below(6));
        }
        auto ranks = [n](const std::vector<double>& v) {
            std::vector<double> r(n);
            for (std::size_t i = 0; i < n; ++i) {
                double less = 0, equal = 0;
                for (std::size_t j = 0; j < n; ++j) {
                    if (v[j] < v[i]) ++less;
                    if (v[j] == v[i]) ++equal;
                }
                r[i] = less + (equal + 1.0) / 2.0;
            }
            return r;
        };
        const std::vector<double> rx = ranks(xs), ry = ranks(ys);
        double mx = 0, my = 0;
        for (std::size_t i = 0; i < n; ++i) {
            mx += rx[i];
            my += ry[i];
        }
        mx /= static_cast<double>(n);
        my /= static_cast<double>(n);
        double sxy = 0, sxx = 0, syy = 0;
        for (std::size_t i = 0; i < n; ++i) {
            sxy += (rx[i] - mx) * (ry[i] - my);
            sxx += (rx[i] - mx) * (rx[i] - mx);
            syy += (ry[i] - my) * (ry[i] - my);
        }
        bool degenerate = false;
        const double got = spearman(xs, ys, &degenerate);
        if (degenerate) {
            if (sxx != 0 && syy != 0) return {Outcome::fail, "spearman degeneracy mismatch"};
            if (got != 0.0) return {Outcome::fail, "degenerate spearman must be 0"};
        } else {
            const double want = sxy / std::sqrt(sxx * syy);
            if (std::abs(got - want) > tol)
                return {Outcome::fail, "spearman oracle mismatch"};
        }
    }

    // exact wilcoxon against full sign enumeration
    for (int it = 0; it < 100; ++it) {
        const std::size_t n = 3 + rng.below(9);  // [3, 11]
        std::vector<double> diffs(n);
        std::set<double> mags;
        for (std::size_t i = 0; i < n; ++i) {
            double m;
            do {
                m = rng.uniform() + 0.001;
            } while (!mags.insert(m).second);
            diffs[i] = m * (rng.uniform() < 0.5 ? 1.0 : -1.0);
        }
        WilcoxonResult r =
            wilcoxon_signed_rank(diffs, Alternative::greater, WilcoxonMode::exact);
        if (r.fell_back) return {Outcome::fail, "exact mode unexpectedly fell back"};

        // ranks of |d| are a permutation of 1..n (distinct magnitudes)
        std::vector<std::size_t> order(n);
        for (std::size_t i = 0; i < n; ++i) order[i] = i;
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return std::abs(diffs[a]) < std::abs(diffs[b]);
        });
        std::vector<double> rank(n);
        for (std::size_t pos = 0; pos < n; ++pos)
            rank[order[pos]] = static_cast<double>(pos + 1);
        double w_minus = 0;
        for (std::size_t i = 0; i < n; ++i)
            if (diffs[i] < 0) w_minus += rank[i];

        std::uint64_t count = 0;
        const std::uint64_t total = 1ULL << n;
        for (std::uint64_t mask = 0; mask < total; ++mask) {
            double w = 0;
            for (std::size_t i = 0; i < n; ++i)
                if (mask & (1ULL << i)) w += rank[i];
            if (w <= w_minus) ++count;
        }
        const double want = static_cast<double>(count) / static_cast<double>(total);
        if (std::abs(r.p - want) > tol)
            return {Outcome::fail, "exact wilcoxon oracle mismatch"};
    }

    return {Outcome::pass, "400 random instances matched at 1e-12"};
}

}  // namespace

int main() {
    struct Check {
        int id;
        const char* label;
        std::function<CheckResult()> run;
    };
    const std::vector<Check> checks = {
        {1, "wilcoxon reference p-value", check_wilcoxon_anchor},
        {2, "gourmet-food dataset counts", check_dataset_anchor},
        {3, "gradient checks (ops + full model)", check_gradients},
        {4, "prediction and loss identities", check_identities},
        {5, "synthetic debiasing efficacy", check_efficacy},
        {6, "sentiment-gate correlation", check_gate_correlation},
        {7, "small-corpus overfit", check_overfit},
        {8, "cli pipeline determinism", check_cli_determinism},
        {9, "brute-force oracle equivalences", check_oracles},
    };

    int failures = 0;
    for (const auto& check : checks) {
        const auto t0 = Clock::now();
        CheckResult result;
        try {
            result = check.run();
        } catch (const std::exception& e) {
            result = {Outcome::fail, std::string("exception: ") + e.what()};
        }
        const char* tag = result.outcome == Outcome::pass   ? "PASS"
                          : result.outcome == Outcome::skip ? "SKIP"
                                                            : "FAIL";
        if (result.outcome == Outcome::fail) ++failures;
        std::printf("[%s] %d. %-38s (%.2fs) %s\n", tag, check.id, check.label,
                    seconds_since(t0), result.detail.c_str());
        std::fflush(stdout);
    }
    if (failures > 0) {
        std::printf("%d of %zu checks failed\n", failures, checks.size());
        return 1;
    }
    std::printf("all checks passed\n");
    return 0;
}
