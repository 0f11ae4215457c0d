#include "cfrec/training.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <unordered_map>

#include "cfrec/adam.hpp"
#include "cfrec/serialize.hpp"

namespace cfrec {

using nlohmann::json;

void TrainConfig::validate() const {
    if (!(lr > 0)) throw InvalidArgumentError("train config: lr must be > 0");
    if (weight_decay < 0) throw InvalidArgumentError("train config: weight_decay must be >= 0");
    if (alpha_u < 0 || alpha_i < 0)
        throw InvalidArgumentError("train config: alpha_u and alpha_i must be >= 0");
    if (batch_size < 1) throw InvalidArgumentError("train config: batch_size must be >= 1");
    if (max_epochs < 1) throw InvalidArgumentError("train config: max_epochs must be >= 1");
    if (patience < 1) throw InvalidArgumentError("train config: patience must be >= 1");
    if (dropout < 0 || dropout >= 1)
        throw InvalidArgumentError("train config: dropout must be in [0,1)");
    for (int d : {dims.d_w, dims.d_h, dims.d_c, dims.d_z, dims.d_a, dims.d_m})
        if (d < 1) throw InvalidArgumentError("train config: dims must be positive");
}

json TrainConfig::to_json() const {
    return json{{"lr", lr},
                {"weight_decay", weight_decay},
                {"alpha_u", alpha_u},
                {"alpha_i", alpha_i},
                {"batch_size", batch_size},
                {"max_epochs", max_epochs},
                {"patience", patience},
                {"seed", seed},
                {"dropout", dropout},
                {"dims",
                 {{"d_w", dims.d_w},
                  {"d_h", dims.d_h},
                  {"d_c", dims.d_c},
                  {"d_z", dims.d_z},
                  {"d_a", dims.d_a},
                  {"d_m", dims.d_m}}}};
}

TrainConfig TrainConfig::from_json(const json& j) {
    TrainConfig c;
    c.lr = j.value("lr", c.lr);
    c.weight_decay = j.value("weight_decay", c.weight_decay);
    c.alpha_u = j.value("alpha_u", c.alpha_u);
    c.alpha_i = j.value("alpha_i", c.alpha_i);
    c.batch_size = j.value("batch_size", c.batch_size);
    c.max_epochs = j.value("max_epochs", c.max_epochs);
    c.patience = j.value("patience", c.patience);
    c.seed = j.value("seed", c.seed);
    c.dropout = j.value("dropout", c.dropout);
    if (j.contains("dims")) {
        const auto& d = j.at("dims");
        c.dims.d_w = d.value("d_w", c.dims.d_w);
        c.dims.d_h = d.value("d_h", c.dims.d_h);
        c.dims.d_c = d.value("d_c", c.dims.d_c);
        c.dims.d_z = d.value("d_z", c.dims.d_z);
        c.dims.d_a = d.value("d_a", c.dims.d_a);
        c.dims.d_m = d.value("d_m", c.dims.d_m);
    }
    return c;
}

void TrainHistory::write_csv(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing: " + path);
    out << "epoch,L,L_RC,L_U,L_I,val_mse\n";
    for (std::size_t e = 0; e < epochs.size(); ++e) {
        const auto& s = epochs[e];
        out << e << ',' << format_double(s.loss) << ',' << format_double(s.loss_rc) << ','
            << format_double(s.loss_u) << ',' << format_double(s.loss_i) << ','
            << format_double(s.val_mse) << '\n';
    }
    if (!out.flush()) throw IoError("write failed: " + path);
}

namespace {

LossValues losses_from_sums(double sum_rc, double sum_u, double sum_i, std::size_t n,
                            double alpha_u, double alpha_i) {
    LossValues v;
    const double inv_n = 1.0 / static_cast<double>(n);
    v.rc = sum_rc * (0.5 * inv_n);
    v.user = sum_u * inv_n;
    v.item = sum_i * inv_n;
    v.total = (v.rc + alpha_u * v.user) + alpha_i * v.item;
    return v;
}

}  // namespace

LossValues compute_losses(const std::vector<PredictionBundle>& bundles,
                          const std::vector<double>& ys, double alpha_u, double alpha_i) {
    if (bundles.empty()) throw InvalidArgumentError("compute_losses: empty batch");
    if (bundles.size() != ys.size())
        throw InvalidArgumentError("compute_losses: bundle/target count mismatch");
    double sum_rc = 0, sum_u = 0, sum_i = 0;
    for (std::size_t k = 0; k < bundles.size(); ++k) {
        const double r_rc = ys[k] - bundles[k].y_hat_uis;
        const double r_u = ys[k] - bundles[k].y_hat_u;
        const double r_i = ys[k] - bundles[k].y_hat_i;
        sum_rc += r_rc * r_rc;
        sum_u += r_u * r_u;
        sum_i += r_i * r_i;
    }
    return losses_from_sums(sum_rc, sum_u, sum_i, bundles.size(), alpha_u, alpha_i);
}

EvalResult evaluate(const ModelParams& params, Split split, const Corpus& corpus) {
    const auto members = corpus.split_members(split);
    if (members.empty()) throw InvalidArgumentError("evaluate: split has no interactions");

    NoGradGuard guard;
    ForwardContext ctx;  // eval mode

    std::vector<Tensor> user_z(static_cast<std::size_t>(corpus.n_users()));
    std::vector<Tensor> item_z(static_cast<std::size_t>(corpus.n_items()));

    EvalResult res;
    res.records.reserve(members.size());
    double sum_sq = 0.0;
    for (std::size_t k : members) {
        const auto u = static_cast<std::size_t>(corpus.user_of[k]);
        const auto i = static_cast<std::size_t>(corpus.item_of[k]);
        if (!user_z[u].defined()) user_z[u] = encode_entity(corpus.user_docs[u], params, ctx);
        if (!item_z[i].defined()) item_z[i] = encode_entity(corpus.item_docs[i], params, ctx);
        const TensorBundle tb = forward_from_encodings(user_z[u], item_z[i], corpus.user_of[k],
                                                       corpus.item_of[k], params);
        EvalRecord rec;
        rec.interaction = k;
        rec.user = corpus.user_of[k];
        rec.item = corpus.item_of[k];
        rec.rating = corpus.interactions[k].rating;
        rec.bundle = bundle_values(tb);
        const double r = rec.rating - rec.bundle.y_hat_uis;
        sum_sq += r * r;
        res.records.push_back(std::move(rec));
    }
    res.mse = sum_sq / static_cast<double>(members.size());
    return res;
}

TrainResult train(const Corpus& corpus, const TrainConfig& config) {
    config.validate();
    const auto train_idx = corpus.split_members(Split::train);
    if (train_idx.empty()) throw EmptyDatasetError("train: no training interactions");
    const bool have_val = !corpus.split_members(Split::val).empty();

    ModelParams params = ModelParams::init(corpus.vocab.size(), corpus.n_users(),
                                           corpus.n_items(), config.dims,
                                           Rng::derive(config.seed, 0));
    auto tensors = params.all();
    AdamState adam = AdamState::init(tensors);
    Rng shuffle_rng(Rng::derive(config.seed, 1));
    Rng dropout_rng(Rng::derive(config.seed, 2));
    ForwardContext ctx{/*train=*/true, config.dropout, &dropout_rng};

    TrainResult result;
    result.history.val_is_train_fallback = !have_val;
    double best_mse = std::numeric_limits<double>::infinity();
    int stale_epochs = 0;
    const auto t0 = std::chrono::steady_clock::now();

    for (int epoch = 0; epoch < config.max_epochs; ++epoch) {
        std::vector<std::size_t> order = train_idx;
        shuffle_rng.shuffle(order);

        double epoch_rc = 0, epoch_u = 0, epoch_i = 0;
        const auto n_batches =
            (order.size() + static_cast<std::size_t>(config.batch_size) - 1) /
            static_cast<std::size_t>(config.batch_size);
        for (std::size_t b = 0; b < n_batches; ++b) {
            const std::size_t lo = b * static_cast<std::size_t>(config.batch_size);
            const std::size_t hi = std::min(order.size(), lo + static_cast<std::size_t>(config.batch_size));
            const std::size_t n = hi - lo;

            params.zero_grads();
            std::unordered_map<int, Tensor> user_z, item_z;
            std::vector<Tensor> sq_rc, sq_u, sq_i;
            sq_rc.reserve(n);
            sq_u.reserve(n);
            sq_i.reserve(n);
            for (std::size_t k = lo; k < hi; ++k) {
                const std::size_t idx = order[k];
                const int u = corpus.user_of[idx];
                const int i = corpus.item_of[idx];
                auto [uit, unew] = user_z.try_emplace(u);
                if (unew)
                    uit->second = encode_entity(corpus.user_docs[static_cast<std::size_t>(u)],
                                                params, ctx);
                auto [iit, inew] = item_z.try_emplace(i);
                if (inew)
                    iit->second = encode_entity(corpus.item_docs[static_cast<std::size_t>(i)],
                                                params, ctx);
                const TensorBundle tb =
                    forward_from_encodings(uit->second, iit->second, u, i, params);
                const Tensor y = Tensor::scalar(corpus.interactions[idx].rating);
                const Tensor r_rc = sub(y, tb.y_hat_uis);
                const Tensor r_u = sub(y, tb.y_hat_u);
                const Tensor r_i = sub(y, tb.y_hat_i);
                sq_rc.push_back(mul(r_rc, r_rc));
                sq_u.push_back(mul(r_u, r_u));
                sq_i.push_back(mul(r_i, r_i));
            }
            const double inv_n = 1.0 / static_cast<double>(n);
            const Tensor sum_rc = sum_scalars(sq_rc);
            const Tensor sum_u = sum_scalars(sq_u);
            const Tensor sum_i = sum_scalars(sq_i);
            const Tensor l_rc = scale(sum_rc, 0.5 * inv_n);
            const Tensor l_u = scale(sum_u, inv_n);
            const Tensor l_i = scale(sum_i, inv_n);
            const Tensor loss =
                add(add(l_rc, scale(l_u, config.alpha_u)), scale(l_i, config.alpha_i));
            if (!std::isfinite(loss.value()))
                throw NumericError("non-finite loss at epoch " + std::to_string(epoch) +
                                   " batch " + std::to_string(b) +
                                   ": L_RC=" + format_double(l_rc.value()) +
                                   " L_U=" + format_double(l_u.value()) +
                                   " L_I=" + format_double(l_i.value()));
            backward(loss);
            adam_step(tensors, adam, config.lr, config.weight_decay);

            epoch_rc += sum_rc.value();
            epoch_u += sum_u.value();
            epoch_i += sum_i.value();
        }

        EpochStats stats;
        const LossValues lv = losses_from_sums(epoch_rc, epoch_u, epoch_i, order.size(),
                                               config.alpha_u, config.alpha_i);
        stats.loss = lv.total;
        stats.loss_rc = lv.rc;
        stats.loss_u = lv.user;
        stats.loss_i = lv.item;
        stats.val_mse = evaluate(params, have_val ? Split::val : Split::train, corpus).mse;
        result.history.epochs.push_back(stats);

        if (stats.val_mse < best_mse) {
            best_mse = stats.val_mse;
            result.history.best_epoch = epoch;
            result.params = params.clone();
            stale_epochs = 0;
        } else if (++stale_epochs >= config.patience) {
            break;
        }
    }

    result.history.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return result;
}

}  // namespace cfrec
