#pragma once

#include <string>
#include <vector>

#include "cfrec/lexicon.hpp"
#include "cfrec/training.hpp"

namespace cfrec {

enum class SweepCriterion {
    min_mse,           // smallest validation MSE, ties to the smaller beta
    mse_bias_tradeoff  // smallest MSE + lambda * (BU + BI)
};

struct DebiasConfig {
    double beta = 0.0;
    std::vector<double> sweep_set{0.01, 0.02, 0.03, 0.04, 0.05, 0.1,
                                  0.2,  0.3,  0.4,  0.5,  0.6,  0.7};
    SweepCriterion criterion = SweepCriterion::min_mse;
    double tradeoff_lambda = 1.0;
    /// Clamp debiased outputs into [1,5]; off by default, the subtraction
    /// can legitimately land below the rating floor.
    bool clip = false;

    void validate() const;
};

/// The counterfactual correction: the sentiment-mediated share of the
/// reference prediction, beta * sigma_s, is removed from the fused score.
/// With beta = 0 this is exactly y_hat_uis.
double debias(const PredictionBundle& bundle, double beta);

double clip_rating(double y);

struct SweepRow {
    double beta = 0;
    double mse = 0;
    double bu = 0;
    double bi = 0;
    bool selected = false;
};

struct SweepResult {
    std::vector<SweepRow> rows;  // beta = 0 baseline first, then the sweep set ascending
    double selected_beta = 0;
};

/// One evaluation's bundles scored at every beta. The baseline row
/// (beta = 0) is always present and equals the biased metrics exactly.
SweepResult beta_sweep(const EvalResult& eval, const PolarityProfile& profile,
                       const DebiasConfig& config);

/// Convenience wrapper running evaluate() once over the given split.
SweepResult beta_sweep(const ModelParams& params, Split split, const Corpus& corpus,
                       const PolarityProfile& profile, const DebiasConfig& config);

void write_sweep_csv(const std::string& path, const SweepResult& sweep);

}  // namespace cfrec
