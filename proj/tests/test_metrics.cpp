#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <vector>

#include "cfrec/metrics.hpp"
#include "cfrec/rng.hpp"

using namespace cfrec;

namespace {

// Rank correlation computed the slow transparent way: rank both sides with
// average ties, then Pearson over the ranks using accumulators.
double spearman_naive(const std::vector<double>& xs, const std::vector<double>& ys) {
    const std::size_t n = xs.size();
    auto ranks = [n](const std::vector<double>& v) {
        std::vector<double> r(n);
        for (std::size_t i = 0; i < n; ++i) {
            double less = 0, equal = 0;
            for (std::size_t j = 0; j < n; ++j) {
                if (v[j] < v[i]) ++less;
                if (v[j] == v[i]) ++equal;
            }
            // average rank of a tie block of size `equal` starting after
            // `less` smaller values
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
    if (sxx == 0 || syy == 0) return 0;
    return sxy / std::sqrt(sxx * syy);
}

InteractionErrors errors_from(const std::vector<double>& sq,
                              const std::vector<int>& users,
                              const std::vector<int>& items) {
    return InteractionErrors{sq, users, items};
}

}  // namespace

TEST_CASE("bias metrics subtract positive-extreme mse from negative-extreme mse") {
    // users 0,1 negative extreme; users 8,9 positive extreme; items mirrored
    ExtremeSets user_sets{{0, 1}, {8, 9}};
    ExtremeSets item_sets{{0}, {5}};

    InteractionErrors e = errors_from(
        /*sq=*/{4.0, 2.0, 1.0, 0.5, 9.0, 16.0},
        /*users=*/{0, 1, 8, 9, 3, 4},
        /*items=*/{0, 5, 2, 3, 0, 5});

    auto [bu, bi] = bias_metrics(e, user_sets, item_sets);
    // BU: mse over users {0,1} = (4+2)/2 = 3; over {8,9} = (1+0.5)/2 = 0.75
    CHECK(bu == doctest::Approx(3.0 - 0.75).epsilon(1e-15));
    // BI: items {0}: (4+9)/2 = 6.5; items {5}: (2+16)/2 = 9
    CHECK(bi == doctest::Approx(6.5 - 9.0).epsilon(1e-15));

    SUBCASE("swapping the sets negates the metric") {
        ExtremeSets swapped_users{user_sets.positive, user_sets.negative};
        ExtremeSets swapped_items{item_sets.positive, item_sets.negative};
        auto [bu2, bi2] = bias_metrics(e, swapped_users, swapped_items);
        CHECK(bu2 == doctest::Approx(-(3.0 - 0.75)).epsilon(1e-15));
        CHECK(bi2 == doctest::Approx(-(6.5 - 9.0)).epsilon(1e-15));
    }

    SUBCASE("equal error levels give zero bias") {
        InteractionErrors flat = errors_from({1, 1, 1, 1}, {0, 1, 8, 9}, {0, 5, 0, 5});
        auto [bu3, bi3] = bias_metrics(flat, user_sets, item_sets);
        CHECK(bu3 == 0.0);
        CHECK(bi3 == 0.0);
    }

    SUBCASE("an empty restriction is undefined") {
        InteractionErrors none = errors_from({1.0}, {3}, {2});
        CHECK_THROWS_AS(bias_metrics(none, user_sets, item_sets), UndefinedMetricError);
    }
}

TEST_CASE("quantile_sorted matches the linear-interpolation definition") {
    std::vector<double> v = {1.0, 2.0, 3.0, 4.0};
    CHECK(quantile_sorted(v, 0.0) == 1.0);
    CHECK(quantile_sorted(v, 1.0) == 4.0);
    CHECK(quantile_sorted(v, 0.5) == doctest::Approx(2.5));
    // h = 0.25 * 3 = 0.75 -> 1 + 0.75*(2-1)
    CHECK(quantile_sorted(v, 0.25) == doctest::Approx(1.75));
    CHECK(quantile_sorted(v, 0.75) == doctest::Approx(3.25));

    SUBCASE("random instances agree with the direct formula") {
        Rng rng(71);
        for (int it = 0; it < 50; ++it) {
            const std::size_t n = 1 + rng.below(20);
            std::vector<double> xs(n);
            for (double& x : xs) x = rng.uniform() * 10.0;
            std::sort(xs.begin(), xs.end());
            const double q = rng.uniform();
            const double h = q * static_cast<double>(n - 1);
            const std::size_t lo = static_cast<std::size_t>(std::floor(h));
            const std::size_t hi = std::min(lo + 1, n - 1);
            const double expect = xs[lo] + (h - std::floor(h)) * (xs[hi] - xs[lo]);
            CHECK(quantile_sorted(xs, q) == doctest::Approx(expect).epsilon(1e-12));
        }
    }
}

TEST_CASE("summarize reports the five-number summary plus the mean") {
    Summary5 s = summarize({5.0, 1.0, 3.0, 2.0, 4.0});
    CHECK(s.min == 1.0);
    CHECK(s.max == 5.0);
    CHECK(s.median == 3.0);
    CHECK(s.q1 == 2.0);
    CHECK(s.q3 == 4.0);
    CHECK(s.mean == 3.0);
    CHECK(s.count == 5);

    Summary5 empty = summarize({});
    CHECK(empty.count == 0);
}

TEST_CASE("group_mse_stats averages per entity before summarizing") {
    // entity 0: errors 1,3 -> mse 2; entity 1: error 10 -> mse 10
    std::vector<double> sq = {1.0, 3.0, 10.0};
    std::vector<int> ent = {0, 0, 1};
    std::vector<std::vector<int>> groups = {{0, 1}, {2}};
    auto stats = group_mse_stats(sq, ent, groups);
    REQUIRE(stats.size() == 2);
    CHECK(stats[0].count == 2);
    CHECK(stats[0].mean == doctest::Approx(6.0));
    CHECK(stats[0].min == 2.0);
    CHECK(stats[0].max == 10.0);
    // entity 2 never occurs: the group summary is empty
    CHECK(stats[1].count == 0);
}

TEST_CASE("rating distribution diff buckets on a fixed grid") {
    // bin width 0.1 over [0,5): 2.05 lands in bin 20, 3.95 in bin 39
    DistDiff d = rating_distribution_diff({2.05}, {3.95}, 0.1);
    REQUIRE(d.edges.size() == 50);
    REQUIRE(d.diff.size() == 50);
    CHECK(d.diff[20] == -1);
    CHECK(d.diff[39] == +1);
    CHECK(std::accumulate(d.diff.begin(), d.diff.end(), std::int64_t{0}) == 0);

    SUBCASE("identical inputs cancel exactly") {
        std::vector<double> same = {0.4, 1.7, 4.99};
        DistDiff z = rating_distribution_diff(same, same, 0.1);
        for (auto c : z.diff) CHECK(c == 0);
    }

    SUBCASE("swapping before and after negates the diff") {
        std::vector<double> a = {1.0, 2.0, 2.0};
        std::vector<double> b = {3.0, 3.5, 0.2};
        DistDiff ab = rating_distribution_diff(a, b, 0.25);
        DistDiff ba = rating_distribution_diff(b, a, 0.25);
        REQUIRE(ab.diff.size() == ba.diff.size());
        for (std::size_t k = 0; k < ab.diff.size(); ++k) CHECK(ab.diff[k] == -ba.diff[k]);
    }

    SUBCASE("out-of-range values clamp to the edge bins") {
        DistDiff e = rating_distribution_diff({-3.0}, {11.0}, 0.5);
        CHECK(e.diff.front() == -1);
        CHECK(e.diff.back() == +1);
    }

    SUBCASE("length mismatch and bad widths are rejected") {
        CHECK_THROWS_AS(rating_distribution_diff({1.0}, {1.0, 2.0}, 0.1),
                        InvalidArgumentError);
        CHECK_THROWS_AS(rating_distribution_diff({1.0}, {2.0}, 0.0), InvalidArgumentError);
    }
}

TEST_CASE("spearman agrees with the transparent reference on random data") {
    Rng rng(81);
    for (int it = 0; it < 100; ++it) {
        const std::size_t n = 2 + rng.below(30);
        std::vector<double> xs(n), ys(n);
        for (std::size_t i = 0; i < n; ++i) {
            // coarse grid so ties actually occur
            xs[i] = static_cast<double>(rng.below(8));
            ys[i] = static_cast<double>(rng.below(8));
        }
        bool degenerate = false;
        const double got = spearman(xs, ys, &degenerate);
        const double want = spearman_naive(xs, ys);
        if (degenerate)
            CHECK(got == 0.0);
        else
            CHECK(std::abs(got - want) <= 1e-12);
    }
}

TEST_CASE("spearman handles monotone, reversed and degenerate inputs") {
    std::vector<double> x = {1, 2, 3, 4, 5};
    std::vector<double> up = {10, 20, 30, 40, 50};
    std::vector<double> down = {5, 4, 3, 2, 1};
    CHECK(spearman(x, up) == doctest::Approx(1.0));
    CHECK(spearman(x, down) == doctest::Approx(-1.0));

    bool degenerate = false;
    std::vector<double> flat = {2, 2, 2, 2, 2};
    CHECK(spearman(x, flat, &degenerate) == 0.0);
    CHECK(degenerate);

    CHECK_THROWS_AS(spearman({1.0}, {1.0}), UndefinedMetricError);
    CHECK_THROWS_AS(spearman({1.0, 2.0}, {1.0}), InvalidArgumentError);
}

TEST_CASE("wilcoxon normal mode reproduces the reference five-pair example") {
    const std::vector<double> diffs = {0.0163, 0.0525, 0.0402, -0.0120, 0.0492};
    WilcoxonResult r = wilcoxon_signed_rank(diffs, Alternative::greater, WilcoxonMode::normal);
    CHECK(r.n == 5);
    CHECK(r.w_minus == 1.0);
    CHECK(r.w_plus == 14.0);
    CHECK(r.z == doctest::Approx(-1.7529).epsilon(1e-4));
    CHECK(r.p > 0.0388);
    CHECK(r.p < 0.0408);
    CHECK(r.mode_used == WilcoxonMode::normal);
    CHECK_FALSE(r.fell_back);
}

TEST_CASE("wilcoxon exact mode enumerates the sign distribution") {
    const std::vector<double> diffs = {0.0163, 0.0525, 0.0402, -0.0120, 0.0492};
    WilcoxonResult r = wilcoxon_signed_rank(diffs, Alternative::greater, WilcoxonMode::exact);
    CHECK(r.mode_used == WilcoxonMode::exact);
    // P(W- <= 1) = ways(0)+ways(1) over 2^5 = 2/32
    CHECK(r.p == doctest::Approx(2.0 / 32.0).epsilon(1e-15));

    SUBCASE("all-positive differences give the minimal one-sided p") {
        WilcoxonResult ap = wilcoxon_signed_rank({0.5, 0.25, 0.125}, Alternative::greater,
                                                 WilcoxonMode::exact);
        CHECK(ap.p == doctest::Approx(1.0 / 8.0).epsilon(1e-15));
        CHECK(ap.w_minus == 0.0);
    }

    SUBCASE("two-sided doubles the smaller tail, capped at one") {
        WilcoxonResult ts = wilcoxon_signed_rank(diffs, Alternative::two_sided,
                                                 WilcoxonMode::exact);
        CHECK(ts.p == doctest::Approx(4.0 / 32.0).epsilon(1e-15));
    }

    SUBCASE("p_greater of d equals p_less of negated d") {
        std::vector<double> neg = diffs;
        for (double& v : neg) v = -v;
        WilcoxonResult a = wilcoxon_signed_rank(diffs, Alternative::greater,
                                                WilcoxonMode::exact);
        WilcoxonResult b = wilcoxon_signed_rank(neg, Alternative::less, WilcoxonMode::exact);
        CHECK(a.p == b.p);
    }
}

TEST_CASE("wilcoxon exact mode falls back when preconditions fail") {
    SUBCASE("tied magnitudes") {
        WilcoxonResult r = wilcoxon_signed_rank({0.5, -0.5, 0.25}, Alternative::greater,
                                                WilcoxonMode::exact);
        CHECK(r.mode_used == WilcoxonMode::normal);
        CHECK(r.fell_back);
        CHECK(r.warning.find("tied") != std::string::npos);
    }

    SUBCASE("zero differences in the input") {
        WilcoxonResult r = wilcoxon_signed_rank({0.5, 0.0, 0.25}, Alternative::greater,
                                                WilcoxonMode::exact);
        CHECK(r.fell_back);
        CHECK(r.warning.find("zero") != std::string::npos);
        CHECK(r.n == 2);  // the zero is dropped before ranking
    }

    SUBCASE("too many pairs") {
        std::vector<double> big(26);
        for (std::size_t i = 0; i < big.size(); ++i)
            big[i] = static_cast<double>(i + 1) * (i % 2 == 0 ? 1.0 : -1.0);
        WilcoxonResult r = wilcoxon_signed_rank(big, Alternative::greater,
                                                WilcoxonMode::exact);
        CHECK(r.fell_back);
        CHECK(r.warning.find("25") != std::string::npos);
    }

    SUBCASE("all zeros is degenerate") {
        CHECK_THROWS_AS(
            wilcoxon_signed_rank({0.0, 0.0}, Alternative::greater, WilcoxonMode::exact),
            DegenerateTestError);
    }
}

TEST_CASE("wilcoxon exact and normal p stay close on clean data") {
    Rng rng(91);
    for (int it = 0; it < 20; ++it) {
        std::vector<double> diffs;
        for (int k = 0; k < 15; ++k)
            diffs.push_back((rng.uniform() + 0.01) * (rng.uniform() < 0.6 ? 1.0 : -1.0));
        WilcoxonResult ex = wilcoxon_signed_rank(diffs, Alternative::greater,
                                                 WilcoxonMode::exact);
        if (ex.fell_back) continue;  // random ties are possible in principle
        WilcoxonResult nm = wilcoxon_signed_rank(diffs, Alternative::greater,
                                                 WilcoxonMode::normal);
        CHECK(std::abs(ex.p - nm.p) < 0.03);
    }
}

TEST_CASE("analyze assembles before and after views consistently") {
    // construct an evaluation whose users/items have known polarities
    Rng rng(55);
    EvalResult ev;
    PolarityProfile prof;
    const int n_users = 20, n_items = 15;
    for (int u = 0; u < n_users; ++u) {
        prof.user_polarity.push_back(-1.0 + 2.0 * u / (n_users - 1.0));
        prof.user_review_count.push_back(1);
    }
    for (int i = 0; i < n_items; ++i) {
        prof.item_polarity.push_back(-1.0 + 2.0 * i / (n_items - 1.0));
        prof.item_review_count.push_back(1);
    }
    std::size_t k = 0;
    for (int u = 0; u < n_users; ++u)
        for (int i = 0; i < n_items; ++i) {
            EvalRecord rec;
            rec.interaction = k++;
            rec.user = u;
            rec.item = i;
            rec.rating = 1.0 + 4.0 * rng.uniform();
            rec.bundle.y_hat_uis = 1.0 + 4.0 * rng.uniform();
            rec.bundle.sigma_s = 0.1 + 0.8 * rng.uniform();
            ev.records.push_back(rec);
        }
    double acc = 0;
    for (const auto& rec : ev.records) {
        const double e = rec.rating - rec.bundle.y_hat_uis;
        acc += e * e;
    }
    ev.mse = acc / static_cast<double>(ev.records.size());

    BiasReport rep = analyze(ev, prof, /*beta=*/0.3);
    CHECK(rep.beta == 0.3);
    CHECK(rep.mse_before == ev.mse);
    CHECK(rep.mse != rep.mse_before);
    REQUIRE(rep.user_groups.size() == 10);
    REQUIRE(rep.item_groups.size() == 10);
    CHECK(rep.user_groups[0].label == "N5");
    CHECK(rep.user_groups[9].label == "P5");
    for (const auto& g : rep.user_groups) CHECK(g.before.count > 0);
    CHECK(rep.correlation.bins.size() == 20);

    SUBCASE("write_report emits the four artifacts") {
        const auto dir =
            (std::filesystem::temp_directory_path() / "cfrec_report_test").string();
        std::filesystem::remove_all(dir);
        auto paths = write_report(dir, rep);
        REQUIRE(paths.size() == 4);
        for (const auto& p : paths) CHECK(std::filesystem::exists(p));

        std::ifstream gs(dir + "/group_stats.csv");
        std::string header;
        std::getline(gs, header);
        CHECK(header == "kind,label,phase,min,q1,median,q3,max,mean,count");

        std::ifstream dd(dir + "/dist_diff.csv");
        std::getline(dd, header);
        CHECK(header == "bin_lo,bin_hi,diff");

        std::ifstream cb(dir + "/correlation_bins.csv");
        std::getline(cb, header);
        CHECK(header == "x_lo,x_hi,mean_sigma,count");
        std::filesystem::remove_all(dir);
    }
}

TEST_CASE("sentiment correlation bins the polarity product against the gate") {
    // gate tracks the product exactly: correlation must be 1. Polarities are
    // odd multiples of 1/32 so equal products are equal doubles, keeping the
    // tie structure of x and sigma(x) identical.
    PolarityProfile prof;
    const int n = 30;
    for (int u = 0; u < n; ++u) {
        prof.user_polarity.push_back((2.0 * u - 29.0) / 32.0);
        prof.user_review_count.push_back(1);
    }
    for (int i = 0; i < n; ++i) {
        prof.item_polarity.push_back((2.0 * i - 29.0) / 32.0);
        prof.item_review_count.push_back(1);
    }
    std::vector<EvalRecord> records;
    std::size_t k = 0;
    for (int u = 0; u < n; ++u)
        for (int i = 0; i < n; ++i) {
            EvalRecord rec;
            rec.interaction = k++;
            rec.user = u;
            rec.item = i;
            rec.rating = 3.0;
            const double x = prof.user_polarity[static_cast<std::size_t>(u)] *
                             prof.item_polarity[static_cast<std::size_t>(i)];
            rec.bundle.sigma_s = 1.0 / (1.0 + std::exp(-x));
            rec.bundle.y_hat_uis = 3.0;
            records.push_back(rec);
        }

    CorrelationSummary cs = sentiment_correlation(records, prof);
    CHECK(cs.spearman == doctest::Approx(1.0).epsilon(1e-12));
    CHECK_FALSE(cs.degenerate);
    REQUIRE(cs.bins.size() == 20);
    std::size_t total = 0;
    for (const auto& b : cs.bins) total += b.count;
    CHECK(total == records.size());

    // bin means are monotone when the gate is monotone in x
    double prev = -1.0;
    for (const auto& b : cs.bins)
        if (b.count > 0) {
            CHECK(b.mean_sigma >= prev);
            prev = b.mean_sigma;
        }
}
