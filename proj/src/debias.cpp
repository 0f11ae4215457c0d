#include "cfrec/debias.hpp"

#include <algorithm>
#include <fstream>

#include "cfrec/metrics.hpp"
#include "cfrec/serialize.hpp"

namespace cfrec {

void DebiasConfig::validate() const {
    if (beta < 0) throw InvalidArgumentError("debias config: beta must be >= 0");
    if (sweep_set.empty()) throw InvalidArgumentError("debias config: empty sweep set");
    for (double b : sweep_set)
        if (b < 0) throw InvalidArgumentError("debias config: sweep values must be >= 0");
    if (tradeoff_lambda < 0)
        throw InvalidArgumentError("debias config: tradeoff lambda must be >= 0");
}

double debias(const PredictionBundle& bundle, double beta) {
    if (beta == 0.0) return bundle.y_hat_uis;
    return bundle.y_hat_uis - beta * bundle.sigma_s;
}

double clip_rating(double y) { return std::min(5.0, std::max(1.0, y)); }

namespace {

SweepRow score_at_beta(const EvalResult& eval, const ExtremeSets& user_sets,
                       const ExtremeSets& item_sets, double beta, bool clip) {
    InteractionErrors errors;
    errors.sq_err.reserve(eval.records.size());
    errors.user.reserve(eval.records.size());
    errors.item.reserve(eval.records.size());
    double sum_sq = 0.0;
    for (const auto& rec : eval.records) {
        double pred = debias(rec.bundle, beta);
        if (clip) pred = clip_rating(pred);
        const double r = rec.rating - pred;
        const double sq = r * r;
        sum_sq += sq;
        errors.sq_err.push_back(sq);
        errors.user.push_back(rec.user);
        errors.item.push_back(rec.item);
    }
    SweepRow row;
    row.beta = beta;
    row.mse = sum_sq / static_cast<double>(eval.records.size());
    std::tie(row.bu, row.bi) = bias_metrics(errors, user_sets, item_sets);
    return row;
}

}  // namespace

SweepResult beta_sweep(const EvalResult& eval, const PolarityProfile& profile,
                       const DebiasConfig& config) {
    config.validate();
    if (eval.records.empty()) throw InvalidArgumentError("beta_sweep: no evaluation records");

    std::vector<double> candidates = config.sweep_set;
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
    // The beta = 0 baseline row is always part of the table; it is eligible
    // for selection only when the sweep set itself contains 0.
    std::vector<double> betas = candidates;
    if (betas.empty() || betas.front() != 0.0) betas.insert(betas.begin(), 0.0);

    const ExtremeSets user_sets = extreme_deciles(profile.user_polarity);
    const ExtremeSets item_sets = extreme_deciles(profile.item_polarity);

    SweepResult result;
    result.rows.reserve(betas.size());
    for (double b : betas)
        result.rows.push_back(score_at_beta(eval, user_sets, item_sets, b, config.clip));

    double best_score = 0.0;
    std::size_t best_row = result.rows.size();
    for (std::size_t r = 0; r < result.rows.size(); ++r) {
        const SweepRow& row = result.rows[r];
        if (!std::binary_search(candidates.begin(), candidates.end(), row.beta)) continue;
        const double score = config.criterion == SweepCriterion::min_mse
                                 ? row.mse
                                 : row.mse + config.tradeoff_lambda * (row.bu + row.bi);
        // Strict comparison plus ascending beta order realizes the
        // ties-to-smaller-beta rule.
        if (best_row == result.rows.size() || score < best_score) {
            best_score = score;
            best_row = r;
        }
    }
    result.rows[best_row].selected = true;
    result.selected_beta = result.rows[best_row].beta;
    return result;
}

SweepResult beta_sweep(const ModelParams& params, Split split, const Corpus& corpus,
                       const PolarityProfile& profile, const DebiasConfig& config) {
    return beta_sweep(evaluate(params, split, corpus), profile, config);
}

void write_sweep_csv(const std::string& path, const SweepResult& sweep) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing: " + path);
    out << "beta,mse,bu,bi,selected\n";
    for (const auto& row : sweep.rows)
        out << format_double(row.beta) << ',' << format_double(row.mse) << ','
            << format_double(row.bu) << ',' << format_double(row.bi) << ','
            << (row.selected ? 1 : 0) << '\n';
    if (!out.flush()) throw IoError("write failed: " + path);
}

}  // namespace cfrec
