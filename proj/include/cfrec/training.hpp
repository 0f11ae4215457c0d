#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "cfrec/model.hpp"

namespace cfrec {

struct TrainConfig {
    double lr = 0.002;
    double weight_decay = 1e-6;
    double alpha_u = 0.001;
    double alpha_i = 0.001;
    int batch_size = 128;
    int max_epochs = 30;
    int patience = 5;
    std::uint64_t seed = 670849;
    double dropout = 0.5;
    ModelDims dims;

    void validate() const;
    nlohmann::json to_json() const;
    static TrainConfig from_json(const nlohmann::json& j);
};

struct EpochStats {
    double loss = 0;      // L
    double loss_rc = 0;   // fused-prediction term, 1/(2N) scaling
    double loss_u = 0;    // user-branch term, 1/N scaling
    double loss_i = 0;    // item-branch term, 1/N scaling
    double val_mse = 0;
};

struct TrainHistory {
    std::vector<EpochStats> epochs;
    int best_epoch = -1;
    double wall_seconds = 0;
    /// Set when the corpus has no validation interactions and training MSE
    /// stood in as the selection criterion.
    bool val_is_train_fallback = false;

    void write_csv(const std::string& path) const;
};

struct LossValues {
    double total = 0;
    double rc = 0;
    double user = 0;
    double item = 0;
};

/// L_RC = (1/2N) sum (y - y_uis)^2, L_U = (1/N) sum (y - y_u)^2,
/// L_I likewise, L = L_RC + alpha_u*L_U + alpha_i*L_I (summed left to
/// right, matching the training graph bit for bit).
LossValues compute_losses(const std::vector<PredictionBundle>& bundles,
                          const std::vector<double>& ys, double alpha_u, double alpha_i);

struct EvalRecord {
    std::size_t interaction = 0;  // index into corpus.interactions
    int user = 0;
    int item = 0;
    double rating = 0;
    PredictionBundle bundle;
};

struct EvalResult {
    double mse = 0;  // over y_hat_uis
    std::vector<EvalRecord> records;
};

/// Eval-mode forward over every interaction in the split, dataset order.
EvalResult evaluate(const ModelParams& params, Split split, const Corpus& corpus);

struct TrainResult {
    ModelParams params;  // best-validation checkpoint
    TrainHistory history;
};

/// Mini-batch Adam with per-epoch seeded shuffling and early stopping on
/// validation MSE (patience epochs without strict improvement). With an
/// empty validation split, training-split MSE is the selection criterion.
TrainResult train(const Corpus& corpus, const TrainConfig& config);

}  // namespace cfrec
