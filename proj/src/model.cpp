#include "cfrec/model.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <unordered_map>

#include "cfrec/serialize.hpp"

namespace cfrec {

namespace {

Tensor uniform_init(std::vector<int> shape, double bound, Rng& rng) {
    const std::int64_t n = numel(shape);
    Vec v(n);
    for (std::int64_t i = 0; i < n; ++i) v[i] = (2.0 * rng.uniform() - 1.0) * bound;
    return Tensor::leaf(std::move(shape), std::move(v), /*requires_grad=*/true);
}

Tensor zeros_param(std::vector<int> shape) {
    return Tensor::zeros(std::move(shape), /*requires_grad=*/true);
}

}  // namespace

ModelParams ModelParams::init(int vocab_size, int n_users, int n_items, const ModelDims& dims,
                              std::uint64_t seed) {
    if (vocab_size < 2 || n_users < 1 || n_items < 1)
        throw InvalidArgumentError("ModelParams::init: empty vocabulary or entity set");
    for (int d : {dims.d_w, dims.d_h, dims.d_c, dims.d_z, dims.d_a, dims.d_m})
        if (d < 1) throw InvalidArgumentError("ModelParams::init: dims must be positive");

    Rng rng(seed);
    const auto bound = [](int fan_in) { return 1.0 / std::sqrt(static_cast<double>(fan_in)); };
    constexpr int w = ModelDims::kConvWidth;

    ModelParams p;
    p.dims = dims;
    p.vocab_size = vocab_size;
    p.n_users = n_users;
    p.n_items = n_items;

    p.word_emb = uniform_init({vocab_size, dims.d_w}, bound(dims.d_w), rng);
    p.word_emb.values_mut().head(dims.d_w).setZero();  // padding row
    p.user_emb = uniform_init({n_users, dims.d_h}, bound(dims.d_h), rng);
    p.item_emb = uniform_init({n_items, dims.d_h}, bound(dims.d_h), rng);
    p.conv_kernel = uniform_init({w, dims.d_w, dims.d_c}, bound(w * dims.d_w), rng);
    p.conv_bias = zeros_param({dims.d_c});
    p.fc_w = uniform_init({dims.d_c, dims.d_z}, bound(dims.d_c), rng);
    p.fc_b = zeros_param({dims.d_z});
    p.attn_w1 = uniform_init({dims.d_z, dims.d_a}, bound(dims.d_z), rng);
    p.attn_b1 = zeros_param({dims.d_a});
    p.attn_w2 = uniform_init({dims.d_a, 1}, bound(dims.d_a), rng);
    p.attn_b2 = zeros_param({1});
    p.head_u_w = uniform_init({dims.d_z, 1}, bound(dims.d_z), rng);
    p.head_u_b = zeros_param({1});
    p.head_i_w = uniform_init({dims.d_z, 1}, bound(dims.d_z), rng);
    p.head_i_b = zeros_param({1});
    p.head_s_w = uniform_init({dims.d_z, 1}, bound(dims.d_z), rng);
    p.head_s_b = zeros_param({1});
    p.inter_w1 = uniform_init({dims.d_h, dims.d_m}, bound(dims.d_h), rng);
    p.inter_b1 = zeros_param({dims.d_m});
    p.inter_w2 = uniform_init({dims.d_m, 1}, bound(dims.d_m), rng);
    p.inter_b2 = zeros_param({1});
    return p;
}

std::vector<std::pair<std::string, Tensor>> ModelParams::named() const {
    return {{"word_emb", word_emb},   {"user_emb", user_emb},   {"item_emb", item_emb},
            {"conv_kernel", conv_kernel}, {"conv_bias", conv_bias},
            {"fc_w", fc_w},           {"fc_b", fc_b},
            {"attn_w1", attn_w1},     {"attn_b1", attn_b1},
            {"attn_w2", attn_w2},     {"attn_b2", attn_b2},
            {"head_u_w", head_u_w},   {"head_u_b", head_u_b},
            {"head_i_w", head_i_w},   {"head_i_b", head_i_b},
            {"head_s_w", head_s_w},   {"head_s_b", head_s_b},
            {"inter_w1", inter_w1},   {"inter_b1", inter_b1},
            {"inter_w2", inter_w2},   {"inter_b2", inter_b2}};
}

std::vector<Tensor> ModelParams::all() const {
    std::vector<Tensor> out;
    for (auto& [name, t] : named()) out.push_back(t);
    return out;
}

ModelParams ModelParams::clone() const {
    ModelParams c = *this;
    const auto copy = [](const Tensor& t) {
        return Tensor::leaf(t.shape(), t.values(), t.requires_grad());
    };
    c.word_emb = copy(word_emb);
    c.user_emb = copy(user_emb);
    c.item_emb = copy(item_emb);
    c.conv_kernel = copy(conv_kernel);
    c.conv_bias = copy(conv_bias);
    c.fc_w = copy(fc_w);
    c.fc_b = copy(fc_b);
    c.attn_w1 = copy(attn_w1);
    c.attn_b1 = copy(attn_b1);
    c.attn_w2 = copy(attn_w2);
    c.attn_b2 = copy(attn_b2);
    c.head_u_w = copy(head_u_w);
    c.head_u_b = copy(head_u_b);
    c.head_i_w = copy(head_i_w);
    c.head_i_b = copy(head_i_b);
    c.head_s_w = copy(head_s_w);
    c.head_s_b = copy(head_s_b);
    c.inter_w1 = copy(inter_w1);
    c.inter_b1 = copy(inter_b1);
    c.inter_w2 = copy(inter_w2);
    c.inter_b2 = copy(inter_b2);
    return c;
}

void ModelParams::zero_grads() {
    for (auto& t : all()) t.zero_grad();
}

void ModelParams::check_finite() const {
    for (const auto& [name, t] : named())
        if (!t.values().allFinite())
            throw NumericError("non-finite values in parameter '" + name + "'");
}

PredictionBundle bundle_values(const TensorBundle& t) {
    PredictionBundle b;
    b.q_m = t.q_m.value();
    b.y_hat_u = t.y_hat_u.value();
    b.y_hat_i = t.y_hat_i.value();
    b.s_ui = t.s_ui.value();
    b.sigma_s = t.sigma_s.value();
    b.y_hat_ui = t.y_hat_ui.value();
    b.y_hat_uis = t.y_hat_uis.value();
    return b;
}

namespace {

Tensor maybe_dropout(const Tensor& x, const ForwardContext& ctx) {
    if (!ctx.train || ctx.dropout_rate <= 0.0) return x;
    if (ctx.rng == nullptr)
        throw InvalidArgumentError("forward: train mode requires a dropout RNG");
    return dropout(x, ctx.dropout_rate, *ctx.rng, /*train=*/true);
}

}  // namespace

Tensor encode_entity(const std::vector<int>& doc, const ModelParams& params,
                     const ForwardContext& ctx) {
    if (doc.size() < static_cast<std::size_t>(ModelDims::kConvWidth))
        throw InvalidShapeError("encode_entity: document shorter than the conv width");

    const Tensor emb = lookup_rows(params.word_emb, doc);
    const Tensor conv = relu(conv1d(emb, params.conv_kernel, params.conv_bias));
    const int conv_len = conv.dim(0);
    const int window = std::min(ModelDims::kPoolWindow, conv_len);
    const Tensor pooled = maxpool1d(conv, window, ModelDims::kPoolStride);
    const Tensor features = add_row_bias(matmul(pooled, params.fc_w), params.fc_b);
    const Tensor positions = maybe_dropout(features, ctx);

    Tensor hidden = relu(add_row_bias(matmul(positions, params.attn_w1), params.attn_b1));
    hidden = maybe_dropout(hidden, ctx);
    const Tensor scores = flatten(add_row_bias(matmul(hidden, params.attn_w2), params.attn_b2));
    const Tensor weights = softmax(scores);
    return weighted_rows_sum(positions, weights);
}

Tensor interaction_score(int u, int i, const ModelParams& params) {
    const Tensor h = mul(lookup_row(params.user_emb, u), lookup_row(params.item_emb, i));
    const Tensor hidden = relu(vec_linear(h, params.inter_w1, params.inter_b1));
    return vec_linear(hidden, params.inter_w2, params.inter_b2);
}

std::pair<Tensor, Tensor> sentiment_gate(const Tensor& z_u, const Tensor& z_i,
                                         const ModelParams& params) {
    const Tensor s = vec_linear(mul(z_u, z_i), params.head_s_w, params.head_s_b);
    return {s, sigmoid(s)};
}

TensorBundle forward_from_encodings(const Tensor& z_u, const Tensor& z_i, int u, int i,
                                    const ModelParams& params) {
    TensorBundle b;
    b.q_m = interaction_score(u, i, params);
    b.y_hat_u = vec_linear(z_u, params.head_u_w, params.head_u_b);
    b.y_hat_i = vec_linear(z_i, params.head_i_w, params.head_i_b);
    std::tie(b.s_ui, b.sigma_s) = sentiment_gate(z_u, z_i, params);
    b.y_hat_ui = add(add(b.q_m, b.y_hat_u), b.y_hat_i);
    b.y_hat_uis = mul(b.y_hat_ui, b.sigma_s);
    return b;
}

TensorBundle forward(int u, int i, const ModelParams& params, const Corpus& corpus,
                     const ForwardContext& ctx) {
    if (u < 0 || u >= corpus.n_users())
        throw InvalidIndexError("forward: user index " + std::to_string(u) + " out of range");
    if (i < 0 || i >= corpus.n_items())
        throw InvalidIndexError("forward: item index " + std::to_string(i) + " out of range");
    const Tensor z_u = encode_entity(corpus.user_docs[static_cast<std::size_t>(u)], params, ctx);
    const Tensor z_i = encode_entity(corpus.item_docs[static_cast<std::size_t>(i)], params, ctx);
    return forward_from_encodings(z_u, z_i, u, i, params);
}

std::size_t load_pretrained_embeddings(const std::string& path, const Vocab& vocab,
                                       ModelParams& params) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open embeddings: " + path);
    const int d_w = params.dims.d_w;
    Vec& table = params.word_emb.values_mut();
    std::string line;
    std::size_t line_no = 0;
    std::size_t loaded = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto sp = line.find(' ');
        if (sp == std::string::npos || sp == 0)
            throw IoError(path + ":" + std::to_string(line_no) + ": expected token and values");
        const std::string token = line.substr(0, sp);
        const auto it = vocab.token_to_id.find(token);
        Vec row(d_w);
        const char* cur = line.data() + sp;
        const char* end = line.data() + line.size();
        for (int k = 0; k < d_w; ++k) {
            while (cur < end && *cur == ' ') ++cur;
            double v = 0.0;
            const auto [next, ec] = std::from_chars(cur, end, v);
            if (ec != std::errc{})
                throw IoError(path + ":" + std::to_string(line_no) + ": expected " +
                              std::to_string(d_w) + " values");
            row[k] = v;
            cur = next;
        }
        if (it == vocab.token_to_id.end()) continue;
        table.segment(static_cast<std::int64_t>(it->second) * d_w, d_w) = row;
        ++loaded;
    }
    return loaded;
}

void save_model(const std::string& path, const ModelParams& params, std::uint64_t seed,
                std::uint64_t config_hash, const std::string& meta_json) {
    Checkpoint ckpt;
    ckpt.config_hash = config_hash;
    ckpt.seed = seed;
    ckpt.meta_json = meta_json;
    ckpt.arrays = params.named();
    save_checkpoint(path, ckpt);
}

LoadedModel load_model(const std::string& path) {
    const Checkpoint ckpt = load_checkpoint(path);
    std::unordered_map<std::string, Tensor> by_name;
    for (const auto& [name, t] : ckpt.arrays) by_name.emplace(name, t);

    const auto take = [&](const char* name, int rank) {
        const auto it = by_name.find(name);
        if (it == by_name.end() || it->second.rank() != rank)
            throw IoError("checkpoint missing array '" + std::string(name) + "': " + path);
        // Checkpoint arrays load grad-less; heads must be trainable again.
        return Tensor::leaf(it->second.shape(), it->second.values(), /*requires_grad=*/true);
    };

    LoadedModel out;
    out.seed = ckpt.seed;
    out.config_hash = ckpt.config_hash;
    out.meta_json = ckpt.meta_json;
    ModelParams& p = out.params;
    p.word_emb = take("word_emb", 2);
    p.user_emb = take("user_emb", 2);
    p.item_emb = take("item_emb", 2);
    p.conv_kernel = take("conv_kernel", 3);
    p.conv_bias = take("conv_bias", 1);
    p.fc_w = take("fc_w", 2);
    p.fc_b = take("fc_b", 1);
    p.attn_w1 = take("attn_w1", 2);
    p.attn_b1 = take("attn_b1", 1);
    p.attn_w2 = take("attn_w2", 2);
    p.attn_b2 = take("attn_b2", 1);
    p.head_u_w = take("head_u_w", 2);
    p.head_u_b = take("head_u_b", 1);
    p.head_i_w = take("head_i_w", 2);
    p.head_i_b = take("head_i_b", 1);
    p.head_s_w = take("head_s_w", 2);
    p.head_s_b = take("head_s_b", 1);
    p.inter_w1 = take("inter_w1", 2);
    p.inter_b1 = take("inter_b1", 1);
    p.inter_w2 = take("inter_w2", 2);
    p.inter_b2 = take("inter_b2", 1);

    p.vocab_size = p.word_emb.dim(0);
    p.n_users = p.user_emb.dim(0);
    p.n_items = p.item_emb.dim(0);
    p.dims.d_w = p.word_emb.dim(1);
    p.dims.d_h = p.user_emb.dim(1);
    p.dims.d_c = p.conv_kernel.dim(2);
    p.dims.d_z = p.fc_w.dim(1);
    p.dims.d_a = p.attn_w1.dim(1);
    p.dims.d_m = p.inter_w1.dim(1);
    p.check_finite();
    return out;
}

}  // namespace cfrec
