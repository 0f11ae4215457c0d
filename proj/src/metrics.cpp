#include "cfrec/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <numeric>

#include "cfrec/debias.hpp"
#include "cfrec/serialize.hpp"

namespace cfrec {

using nlohmann::json;

namespace {

double restricted_mse(const std::vector<double>& sq_err, const std::vector<int>& entity_of,
                      const std::vector<int>& sorted_set, const char* what) {
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t k = 0; k < sq_err.size(); ++k) {
        if (!std::binary_search(sorted_set.begin(), sorted_set.end(), entity_of[k])) continue;
        sum += sq_err[k];
        ++count;
    }
    if (count == 0)
        throw UndefinedMetricError(std::string("bias_metrics: no interactions in the ") + what +
                                   " set");
    return sum / static_cast<double>(count);
}

}  // namespace

std::pair<double, double> bias_metrics(const InteractionErrors& errors,
                                       const ExtremeSets& user_sets,
                                       const ExtremeSets& item_sets) {
    if (errors.sq_err.size() != errors.user.size() || errors.sq_err.size() != errors.item.size())
        throw InvalidArgumentError("bias_metrics: column lengths differ");
    const double bu =
        restricted_mse(errors.sq_err, errors.user, user_sets.negative, "negative-user") -
        restricted_mse(errors.sq_err, errors.user, user_sets.positive, "positive-user");
    const double bi =
        restricted_mse(errors.sq_err, errors.item, item_sets.negative, "negative-item") -
        restricted_mse(errors.sq_err, errors.item, item_sets.positive, "positive-item");
    return {bu, bi};
}

double quantile_sorted(const std::vector<double>& sorted, double q) {
    if (sorted.empty()) throw InvalidArgumentError("quantile_sorted: empty input");
    q = std::min(1.0, std::max(0.0, q));
    const double h = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(h);
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

Summary5 summarize(std::vector<double> values) {
    Summary5 s;
    s.count = values.size();
    if (values.empty()) return s;
    std::sort(values.begin(), values.end());
    s.min = values.front();
    s.max = values.back();
    s.q1 = quantile_sorted(values, 0.25);
    s.median = quantile_sorted(values, 0.5);
    s.q3 = quantile_sorted(values, 0.75);
    s.mean = std::accumulate(values.begin(), values.end(), 0.0) /
             static_cast<double>(values.size());
    return s;
}

std::vector<Summary5> group_mse_stats(const std::vector<double>& sq_err,
                                      const std::vector<int>& entity_of,
                                      const std::vector<std::vector<int>>& groups) {
    if (sq_err.size() != entity_of.size())
        throw InvalidArgumentError("group_mse_stats: column lengths differ");
    std::unordered_map<int, std::pair<double, std::size_t>> accum;
    for (std::size_t k = 0; k < sq_err.size(); ++k) {
        auto& [sum, count] = accum[entity_of[k]];
        sum += sq_err[k];
        ++count;
    }
    std::vector<Summary5> out;
    out.reserve(groups.size());
    for (const auto& group : groups) {
        std::vector<double> means;
        means.reserve(group.size());
        for (int entity : group) {
            const auto it = accum.find(entity);
            if (it == accum.end()) continue;  // entity has no interactions here
            means.push_back(it->second.first / static_cast<double>(it->second.second));
        }
        out.push_back(summarize(std::move(means)));
    }
    return out;
}

DistDiff rating_distribution_diff(const std::vector<double>& before,
                                  const std::vector<double>& after, double bin_width) {
    if (before.size() != after.size())
        throw InvalidArgumentError("rating_distribution_diff: length mismatch");
    if (!(bin_width > 0))
        throw InvalidArgumentError("rating_distribution_diff: bin width must be > 0");
    const auto n_bins = static_cast<std::size_t>(std::ceil(5.0 / bin_width - 1e-9));
    DistDiff d;
    d.bin_width = bin_width;
    d.edges.resize(n_bins);
    for (std::size_t k = 0; k < n_bins; ++k) d.edges[k] = static_cast<double>(k) * bin_width;
    d.diff.assign(n_bins, 0);
    const auto bin_of = [&](double v) {
        const auto raw = static_cast<std::int64_t>(std::floor(v / bin_width));
        return static_cast<std::size_t>(
            std::min<std::int64_t>(static_cast<std::int64_t>(n_bins) - 1, std::max<std::int64_t>(0, raw)));
    };
    for (double v : after) ++d.diff[bin_of(v)];
    for (double v : before) --d.diff[bin_of(v)];
    return d;
}

namespace {

// Ranks 1..n with the mean rank over runs of equal values.
std::vector<double> average_ranks(const std::vector<double>& xs) {
    const std::size_t n = xs.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });
    std::vector<double> ranks(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && xs[order[j + 1]] == xs[order[i]]) ++j;
        const double mean_rank = static_cast<double>(i + j + 2) / 2.0;  // 1-based
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = mean_rank;
        i = j + 1;
    }
    return ranks;
}

double pearson(const std::vector<double>& xs, const std::vector<double>& ys, bool* degenerate) {
    const auto n = static_cast<double>(xs.size());
    const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
    const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
    double sxx = 0, syy = 0, sxy = 0;
    for (std::size_t k = 0; k < xs.size(); ++k) {
        const double dx = xs[k] - mx;
        const double dy = ys[k] - my;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if (sxx == 0.0 || syy == 0.0) {
        if (degenerate) *degenerate = true;
        return 0.0;
    }
    return sxy / std::sqrt(sxx * syy);
}

}  // namespace

double spearman(const std::vector<double>& xs, const std::vector<double>& ys, bool* degenerate) {
    if (xs.size() != ys.size()) throw InvalidArgumentError("spearman: length mismatch");
    if (xs.size() < 2) throw UndefinedMetricError("spearman: need at least 2 pairs");
    if (degenerate) *degenerate = false;
    return pearson(average_ranks(xs), average_ranks(ys), degenerate);
}

CorrelationSummary sentiment_correlation(const std::vector<EvalRecord>& records,
                                         const PolarityProfile& profile) {
    if (records.size() < 2)
        throw UndefinedMetricError("sentiment_correlation: need at least 2 pairs");
    std::vector<double> xs, ys;
    xs.reserve(records.size());
    ys.reserve(records.size());
    for (const auto& rec : records) {
        const auto u = static_cast<std::size_t>(rec.user);
        const auto i = static_cast<std::size_t>(rec.item);
        if (u >= profile.user_polarity.size() || i >= profile.item_polarity.size())
            throw InvalidIndexError("sentiment_correlation: entity without a polarity entry");
        xs.push_back(profile.user_polarity[u] * profile.item_polarity[i]);
        ys.push_back(rec.bundle.sigma_s);
    }

    CorrelationSummary out;
    constexpr std::size_t kBins = 20;
    const auto [min_it, max_it] = std::minmax_element(xs.begin(), xs.end());
    const double lo = *min_it, hi = *max_it;
    const double width = (hi - lo) / static_cast<double>(kBins);
    out.bins.resize(kBins);
    std::vector<double> sums(kBins, 0.0);
    for (std::size_t b = 0; b < kBins; ++b) {
        out.bins[b].lo = lo + static_cast<double>(b) * width;
        out.bins[b].hi = lo + static_cast<double>(b + 1) * width;
    }
    for (std::size_t k = 0; k < xs.size(); ++k) {
        std::size_t b = 0;
        if (width > 0)
            b = std::min(kBins - 1, static_cast<std::size_t>((xs[k] - lo) / width));
        sums[b] += ys[k];
        ++out.bins[b].count;
    }
    for (std::size_t b = 0; b < kBins; ++b)
        if (out.bins[b].count > 0)
            out.bins[b].mean_sigma = sums[b] / static_cast<double>(out.bins[b].count);
    out.spearman = spearman(xs, ys, &out.degenerate);
    return out;
}

namespace {

double normal_cdf(double z) { return 0.5 * std::erfc(-z / M_SQRT2); }

}  // namespace

WilcoxonResult wilcoxon_signed_rank(const std::vector<double>& diffs, Alternative alt,
                                    WilcoxonMode mode) {
    std::vector<double> nonzero;
    nonzero.reserve(diffs.size());
    for (double d : diffs)
        if (d != 0.0) nonzero.push_back(d);
    if (nonzero.empty())
        throw DegenerateTestError("wilcoxon_signed_rank: all differences are zero");

    const std::size_t n = nonzero.size();
    std::vector<double> abs_d(n);
    for (std::size_t k = 0; k < n; ++k) abs_d[k] = std::abs(nonzero[k]);
    const std::vector<double> ranks = average_ranks(abs_d);

    WilcoxonResult res;
    res.n = n;
    for (std::size_t k = 0; k < n; ++k)
        (nonzero[k] < 0 ? res.w_minus : res.w_plus) += ranks[k];

    bool exact_ok = mode == WilcoxonMode::exact;
    if (exact_ok && n > 25) {
        exact_ok = false;
        res.warning = "exact mode needs n <= 25; using the normal approximation";
    }
    if (exact_ok && nonzero.size() != diffs.size()) {
        exact_ok = false;
        res.warning = "exact mode forbids zero differences; using the normal approximation";
    }
    if (exact_ok) {
        auto sorted_abs = abs_d;
        std::sort(sorted_abs.begin(), sorted_abs.end());
        if (std::adjacent_find(sorted_abs.begin(), sorted_abs.end()) != sorted_abs.end()) {
            exact_ok = false;
            res.warning = "exact mode forbids tied magnitudes; using the normal approximation";
        }
    }
    res.fell_back = mode == WilcoxonMode::exact && !exact_ok;

    if (exact_ok) {
        // Null distribution of the one-sided rank sum over all 2^n sign
        // assignments; ranks are exactly 1..n here.
        const std::size_t max_w = n * (n + 1) / 2;
        std::vector<double> ways(max_w + 1, 0.0);
        ways[0] = 1.0;
        for (std::size_t r = 1; r <= n; ++r)
            for (std::size_t w = max_w; w >= r; --w) ways[w] += ways[w - r];
        const double total = std::ldexp(1.0, static_cast<int>(n));
        const auto tail = [&](double stat) {
            const auto cap = static_cast<std::size_t>(stat + 0.5);
            double acc = 0.0;
            for (std::size_t w = 0; w <= cap && w <= max_w; ++w) acc += ways[w];
            return acc / total;
        };
        res.mode_used = WilcoxonMode::exact;
        switch (alt) {
            case Alternative::greater: res.p = tail(res.w_minus); break;
            case Alternative::less: res.p = tail(res.w_plus); break;
            case Alternative::two_sided:
                res.p = std::min(1.0, 2.0 * std::min(tail(res.w_minus), tail(res.w_plus)));
                break;
        }
        return res;
    }

    const double nd = static_cast<double>(n);
    const double mu = nd * (nd + 1.0) / 4.0;
    const double sd = std::sqrt(nd * (nd + 1.0) * (2.0 * nd + 1.0) / 24.0);
    res.mode_used = WilcoxonMode::normal;
    switch (alt) {
        case Alternative::greater:
            res.z = (res.w_minus - mu) / sd;
            res.p = normal_cdf(res.z);
            break;
        case Alternative::less:
            res.z = (res.w_plus - mu) / sd;
            res.p = normal_cdf(res.z);
            break;
        case Alternative::two_sided:
            res.z = (std::min(res.w_minus, res.w_plus) - mu) / sd;
            res.p = std::min(1.0, 2.0 * normal_cdf(res.z));
            break;
    }
    return res;
}

namespace {

struct ErrorColumns {
    InteractionErrors errors;
    std::vector<double> predictions;
};

ErrorColumns errors_at_beta(const EvalResult& eval, double beta, bool clip) {
    ErrorColumns out;
    out.errors.sq_err.reserve(eval.records.size());
    out.errors.user.reserve(eval.records.size());
    out.errors.item.reserve(eval.records.size());
    out.predictions.reserve(eval.records.size());
    for (const auto& rec : eval.records) {
        double pred = debias(rec.bundle, beta);
        if (clip) pred = clip_rating(pred);
        const double r = rec.rating - pred;
        out.errors.sq_err.push_back(r * r);
        out.errors.user.push_back(rec.user);
        out.errors.item.push_back(rec.item);
        out.predictions.push_back(pred);
    }
    return out;
}

double mean(const std::vector<double>& v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

std::vector<GroupRow> grouped_rows(const std::vector<double>& before_err,
                                   const std::vector<double>& after_err,
                                   const std::vector<int>& entity_of,
                                   const std::vector<std::vector<int>>& groups) {
    const auto before = group_mse_stats(before_err, entity_of, groups);
    const auto after = group_mse_stats(after_err, entity_of, groups);
    std::vector<GroupRow> rows(groups.size());
    for (std::size_t g = 0; g < groups.size(); ++g) {
        rows[g].label = kDecileLabels[g];
        rows[g].before = before[g];
        rows[g].after = after[g];
    }
    return rows;
}

}  // namespace

BiasReport analyze(const EvalResult& eval, const PolarityProfile& profile, double beta,
                   bool clip, double bin_width) {
    if (eval.records.empty()) throw InvalidArgumentError("analyze: no evaluation records");
    const ExtremeSets user_sets = extreme_deciles(profile.user_polarity);
    const ExtremeSets item_sets = extreme_deciles(profile.item_polarity);
    const auto before = errors_at_beta(eval, 0.0, clip);
    const auto after = errors_at_beta(eval, beta, clip);

    BiasReport rep;
    rep.beta = beta;
    rep.clipped = clip;
    rep.mse_before = mean(before.errors.sq_err);
    std::tie(rep.bu_before, rep.bi_before) = bias_metrics(before.errors, user_sets, item_sets);
    rep.mse = mean(after.errors.sq_err);
    std::tie(rep.bu, rep.bi) = bias_metrics(after.errors, user_sets, item_sets);

    rep.user_groups = grouped_rows(before.errors.sq_err, after.errors.sq_err,
                                   after.errors.user, decile_groups(profile.user_polarity));
    rep.item_groups = grouped_rows(before.errors.sq_err, after.errors.sq_err,
                                   after.errors.item, decile_groups(profile.item_polarity));
    rep.dist_diff = rating_distribution_diff(before.predictions, after.predictions, bin_width);
    rep.correlation = sentiment_correlation(eval.records, profile);
    return rep;
}

namespace {

json summary_json(const Summary5& s) {
    return json{{"min", s.min},   {"q1", s.q1},
                {"median", s.median}, {"q3", s.q3},
                {"max", s.max},   {"mean", s.mean},
                {"count", s.count}};
}

void write_text(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path);
    out << content;
    if (!out.flush()) throw IoError("write failed: " + path);
}

void append_group_csv(std::string& csv, const char* kind, const std::vector<GroupRow>& rows) {
    for (const auto& row : rows) {
        for (const auto* phase : {"before", "after"}) {
            const Summary5& s = phase == std::string("before") ? row.before : row.after;
            csv += kind;
            csv += ',';
            csv += row.label;
            csv += ',';
            csv += phase;
            for (double v : {s.min, s.q1, s.median, s.q3, s.max, s.mean}) {
                csv += ',';
                csv += format_double(v);
            }
            csv += ',';
            csv += std::to_string(s.count);
            csv += '\n';
        }
    }
}

}  // namespace

std::vector<std::string> write_report(const std::string& dir, const BiasReport& rep) {
    std::filesystem::create_directories(dir);
    const auto path_of = [&](const char* name) {
        return (std::filesystem::path(dir) / name).string();
    };

    json group_json = json::array();
    for (const auto* kind : {"user", "item"}) {
        const auto& rows = kind == std::string("user") ? rep.user_groups : rep.item_groups;
        for (const auto& row : rows)
            group_json.push_back(json{{"kind", kind},
                                      {"label", row.label},
                                      {"before", summary_json(row.before)},
                                      {"after", summary_json(row.after)}});
    }
    const json summary = {
        {"beta", rep.beta},
        {"clipped", rep.clipped},
        {"mse_before", rep.mse_before},
        {"bu_before", rep.bu_before},
        {"bi_before", rep.bi_before},
        {"mse", rep.mse},
        {"bu", rep.bu},
        {"bi", rep.bi},
        {"spearman", rep.correlation.spearman},
        {"spearman_degenerate", rep.correlation.degenerate},
        {"groups", group_json},
    };

    std::string group_csv = "kind,label,phase,min,q1,median,q3,max,mean,count\n";
    append_group_csv(group_csv, "user", rep.user_groups);
    append_group_csv(group_csv, "item", rep.item_groups);

    std::string dist_csv = "bin_lo,bin_hi,diff\n";
    for (std::size_t b = 0; b < rep.dist_diff.diff.size(); ++b) {
        dist_csv += format_double(rep.dist_diff.edges[b]);
        dist_csv += ',';
        dist_csv += format_double(rep.dist_diff.edges[b] + rep.dist_diff.bin_width);
        dist_csv += ',';
        dist_csv += std::to_string(rep.dist_diff.diff[b]);
        dist_csv += '\n';
    }

    std::string corr_csv = "x_lo,x_hi,mean_sigma,count\n";
    for (const auto& bin : rep.correlation.bins) {
        corr_csv += format_double(bin.lo);
        corr_csv += ',';
        corr_csv += format_double(bin.hi);
        corr_csv += ',';
        corr_csv += format_double(bin.mean_sigma);
        corr_csv += ',';
        corr_csv += std::to_string(bin.count);
        corr_csv += '\n';
    }

    const std::vector<std::string> paths = {path_of("report.json"), path_of("group_stats.csv"),
                                            path_of("dist_diff.csv"),
                                            path_of("correlation_bins.csv")};
    write_text(paths[0], summary.dump(2) + "\n");
    write_text(paths[1], group_csv);
    write_text(paths[2], dist_csv);
    write_text(paths[3], corr_csv);
    return paths;
}

}  // namespace cfrec
