#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cfrec/data.hpp"
#include "cfrec/ops.hpp"

namespace cfrec {

struct ModelDims {
    int d_w = 100;  // word embedding
    int d_h = 32;   // user/item id embedding
    int d_c = 64;   // conv channels
    int d_z = 64;   // encoder output
    int d_a = 32;   // attention hidden
    int d_m = 32;   // interaction hidden

    static constexpr int kConvWidth = 5;
    static constexpr int kPoolWindow = 3;
    static constexpr int kPoolStride = 3;
};

/// All trainable arrays. The two document encoders share the word
/// embeddings, conv stack, FC and attention weights; user and item id
/// embeddings and the per-branch heads are separate. d_z is common to both
/// encoders so the elementwise products in the gate are well-formed.
struct ModelParams {
    ModelDims dims;
    int vocab_size = 0;
    int n_users = 0;
    int n_items = 0;

    Tensor word_emb;   // {|V|, d_w}, row 0 (padding) fixed at zero
    Tensor user_emb;   // {n_users, d_h}
    Tensor item_emb;   // {n_items, d_h}
    Tensor conv_kernel;  // {5, d_w, d_c}
    Tensor conv_bias;    // {d_c}
    Tensor fc_w;  // {d_c, d_z}
    Tensor fc_b;  // {d_z}
    Tensor attn_w1;  // {d_z, d_a}
    Tensor attn_b1;  // {d_a}
    Tensor attn_w2;  // {d_a, 1}
    Tensor attn_b2;  // {1}
    Tensor head_u_w;  // {d_z, 1}
    Tensor head_u_b;  // {1}
    Tensor head_i_w;  // {d_z, 1}
    Tensor head_i_b;  // {1}
    Tensor head_s_w;  // {d_z, 1}
    Tensor head_s_b;  // {1}
    Tensor inter_w1;  // {d_h, d_m}
    Tensor inter_b1;  // {d_m}
    Tensor inter_w2;  // {d_m, 1}
    Tensor inter_b2;  // {1}

    /// Seeded init: weights uniform in ±1/sqrt(fan-in), biases zero, the
    /// padding embedding row zero. Draw order follows named().
    static ModelParams init(int vocab_size, int n_users, int n_items, const ModelDims& dims,
                            std::uint64_t seed);

    /// Stable (name, tensor) order shared by init, the optimizer state and
    /// the checkpoint layout.
    std::vector<std::pair<std::string, Tensor>> named() const;
    std::vector<Tensor> all() const;

    /// Deep copy with fresh leaves (values copied, graph not shared).
    ModelParams clone() const;
    void zero_grads();
    void check_finite() const;
};

/// Graph handles for one (user, item) prediction. All downstream losses
/// attach to these.
struct TensorBundle {
    Tensor q_m;
    Tensor y_hat_u;
    Tensor y_hat_i;
    Tensor s_ui;
    Tensor sigma_s;
    Tensor y_hat_ui;   // (q_m + y_hat_u) + y_hat_i, summed in that order
    Tensor y_hat_uis;  // y_hat_ui * sigma_s
};

/// The fused prediction decomposed into its causal-branch components.
struct PredictionBundle {
    double q_m = 0;
    double y_hat_u = 0;
    double y_hat_i = 0;
    double s_ui = 0;
    double sigma_s = 0;
    double y_hat_ui = 0;
    double y_hat_uis = 0;
    std::optional<double> y_debiased;
};

PredictionBundle bundle_values(const TensorBundle& t);

/// Per-forward mode switches. Dropout draws from `rng` only in train mode.
struct ForwardContext {
    bool train = false;
    double dropout_rate = 0.5;
    Rng* rng = nullptr;
};

/// Document encoder: embedding lookup, width-5 conv, ReLU, windowed max
/// pool, position-wise FC to d_z, dropout, two-layer additive attention
/// over positions, attention-weighted sum. The pool window shrinks to the
/// conv output length when that is shorter than 3, so a single-window
/// document degenerates to attention weight 1 over one position.
Tensor encode_entity(const std::vector<int>& doc, const ModelParams& params,
                     const ForwardContext& ctx);

/// q_m = two-layer head over h_u (*) h_i.
Tensor interaction_score(int u, int i, const ModelParams& params);

/// s_ui = linear head over z_u (*) z_i; sigma_s = logistic(s_ui).
std::pair<Tensor, Tensor> sentiment_gate(const Tensor& z_u, const Tensor& z_i,
                                         const ModelParams& params);

/// Full prediction for one interaction using the corpus documents.
TensorBundle forward(int u, int i, const ModelParams& params, const Corpus& corpus,
                     const ForwardContext& ctx);

/// Same, with entity encodings supplied by the caller; lets a batch reuse
/// one encoding per distinct user/item.
TensorBundle forward_from_encodings(const Tensor& z_u, const Tensor& z_i, int u, int i,
                                    const ModelParams& params);

/// Replaces embedding rows for tokens found in a text file of
/// `token v_1 ... v_{d_w}` lines. Unknown tokens are ignored; returns the
/// number of rows set. Malformed lines fail with their line number.
std::size_t load_pretrained_embeddings(const std::string& path, const Vocab& vocab,
                                       ModelParams& params);

/// Checkpoint container round-trip; bit-exact.
void save_model(const std::string& path, const ModelParams& params, std::uint64_t seed,
                std::uint64_t config_hash, const std::string& meta_json);

struct LoadedModel {
    ModelParams params;
    std::uint64_t seed = 0;
    std::uint64_t config_hash = 0;
    std::string meta_json;
};

LoadedModel load_model(const std::string& path);

}  // namespace cfrec
