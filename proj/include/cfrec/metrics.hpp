#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cfrec/lexicon.hpp"
#include "cfrec/training.hpp"

namespace cfrec {

/// Per-interaction squared errors with the owning entities, the common
/// input of the bias metrics.
struct InteractionErrors {
    std::vector<double> sq_err;
    std::vector<int> user;
    std::vector<int> item;
};

/// BU = MSE over interactions whose user is in the negative extreme set
/// minus MSE over those whose user is in the positive set; BI likewise
/// over items. A restriction with no interactions is undefined.
std::pair<double, double> bias_metrics(const InteractionErrors& errors,
                                       const ExtremeSets& user_sets,
                                       const ExtremeSets& item_sets);

/// Linear-interpolation quantile (type 7) over an ascending-sorted vector.
double quantile_sorted(const std::vector<double>& sorted, double q);

struct Summary5 {
    double min = 0, q1 = 0, median = 0, q3 = 0, max = 0, mean = 0;
    std::size_t count = 0;  // 0 marks an empty summary
};

Summary5 summarize(std::vector<double> values);

/// Mean squared error per entity, then a five-number summary (plus mean)
/// of those per-entity values for each group. Entities without
/// interactions are left out; a group with none yields count = 0.
std::vector<Summary5> group_mse_stats(const std::vector<double>& sq_err,
                                      const std::vector<int>& entity_of,
                                      const std::vector<std::vector<int>>& groups);

struct DistDiff {
    double bin_width = 0.1;
    std::vector<double> edges;      // bin lower edges over [0,5]
    std::vector<std::int64_t> diff;  // count(after) - count(before) per bin
};

/// Histogram difference over [0,5]; out-of-range predictions land in the
/// edge bins.
DistDiff rating_distribution_diff(const std::vector<double>& before,
                                  const std::vector<double>& after, double bin_width = 0.1);

/// Spearman rank correlation with average ranks for ties. A zero-variance
/// side makes the value 0 and sets *degenerate.
double spearman(const std::vector<double>& xs, const std::vector<double>& ys,
                bool* degenerate = nullptr);

struct CorrelationBin {
    double lo = 0, hi = 0;
    double mean_sigma = 0;
    std::size_t count = 0;
};

struct CorrelationSummary {
    std::vector<CorrelationBin> bins;  // 20 equal-width bins over the x range
    double spearman = 0;
    bool degenerate = false;
};

/// x = product of the pair's lexicon polarities, y = the predicted gate
/// sigma_s; binned means plus the rank correlation.
CorrelationSummary sentiment_correlation(const std::vector<EvalRecord>& records,
                                         const PolarityProfile& profile);

enum class Alternative { greater, less, two_sided };
enum class WilcoxonMode { exact, normal };

struct WilcoxonResult {
    double w_minus = 0;
    double w_plus = 0;
    std::size_t n = 0;  // nonzero differences used
    double z = 0;       // normal mode only
    double p = 1;
    WilcoxonMode mode_used = WilcoxonMode::normal;
    bool fell_back = false;
    std::string warning;
};

/// Paired signed-rank test. Zero differences are dropped before ranking.
/// Exact mode enumerates the 2^n sign assignments (n <= 25, no zero
/// differences, no tied magnitudes) and falls back to the normal
/// approximation with a warning when its preconditions fail. The normal
/// mode applies no continuity correction.
WilcoxonResult wilcoxon_signed_rank(const std::vector<double>& diffs, Alternative alt,
                                    WilcoxonMode mode);

struct GroupRow {
    std::string label;  // N5..N1, P1..P5
    Summary5 before;
    Summary5 after;
};

/// Everything the debias analysis reports for one beta: error metrics
/// before (beta = 0) and after, per-decile distributions for users and
/// items, the prediction-histogram shift, and the gate correlation.
struct BiasReport {
    double beta = 0;
    bool clipped = false;
    double mse_before = 0, bu_before = 0, bi_before = 0;
    double mse = 0, bu = 0, bi = 0;
    std::vector<GroupRow> user_groups;
    std::vector<GroupRow> item_groups;
    DistDiff dist_diff;
    CorrelationSummary correlation;
};

BiasReport analyze(const EvalResult& eval, const PolarityProfile& profile, double beta,
                   bool clip = false, double bin_width = 0.1);

/// report.json plus group_stats.csv, dist_diff.csv, correlation_bins.csv
/// under `dir` (created if missing). Returns the paths written.
std::vector<std::string> write_report(const std::string& dir, const BiasReport& report);

}  // namespace cfrec
