#include "nmfvar/model_selection.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <numeric>
#include <thread>

#include "nmfvar/design.hpp"
#include "nmfvar/error.hpp"
#include "nmfvar/numeric.hpp"

namespace nmfvar::select {

std::vector<std::vector<std::size_t>> make_folds(std::size_t n, std::size_t k, std::uint64_t seed, FoldMode mode) {
    if (k < 2) throw ConfigError("cross-validation needs at least 2 folds");
    if (k > n) throw ConfigError("folds k=" + std::to_string(k) + " exceed the " + std::to_string(n) + " columns");
    std::vector<std::vector<std::size_t>> folds(k);
    if (mode == FoldMode::blocks) {
        const std::size_t base = n / k, extra = n % k;
        std::size_t start = 0;
        for (std::size_t f = 0; f < k; ++f) {
            const std::size_t len = base + (f < extra ? 1 : 0);
            for (std::size_t i = 0; i < len; ++i) folds[f].push_back(start + i);
            start += len;
        }
        return folds;
    }
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    numeric::Rng rng(seed);
    for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
    for (std::size_t i = 0; i < n; ++i) folds[i % k].push_back(order[i]);
    for (auto& f : folds) std::sort(f.begin(), f.end());
    return folds;
}

namespace {

template <class Fn>
void parallel_for(std::size_t count, unsigned threads, Fn&& fn) {
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, count));
    std::vector<std::exception_ptr> errors(count);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < count; i = next++) {
            try {
                fn(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

} // namespace

CVReport cross_validate(const prep::TimeSeriesFrame& frame, const CVOptions& opts) {
    if (opts.ranks.empty() || opts.lags.empty()) throw ConfigError("cross-validation needs rank and lag candidates");
    const std::size_t t = frame.length(), p = frame.variables(), k = opts.folds;
    if (k < 2) throw ConfigError("cross-validation needs at least 2 folds");
    const std::size_t max_lag = *std::max_element(opts.lags.begin(), opts.lags.end());
    if (max_lag + k >= t) {
        throw ConfigError("largest lag " + std::to_string(max_lag) + " must be below T - k = " +
                          std::to_string(t > k ? t - k : 0));
    }
    const std::size_t n = t - max_lag;
    const std::size_t min_train = n - (n + k - 1) / k;

    std::vector<std::pair<std::size_t, std::size_t>> cands;
    std::string infeasible;
    for (std::size_t d : opts.lags) {
        for (std::size_t q : opts.ranks) {
            if (d < 1 || q < 1 || q > std::min(p, min_train)) {
                infeasible += " (Q=" + std::to_string(q) + ", D=" + std::to_string(d) + ")";
            }
            cands.emplace_back(q, d);
        }
    }
    if (!infeasible.empty()) {
        throw ConfigError("infeasible candidates:" + infeasible + "; need D >= 1 and 1 <= Q <= min(P=" +
                          std::to_string(p) + ", training columns=" + std::to_string(min_train) + ")");
    }

    CVReport report;
    report.folds = k;
    report.fold_mode = opts.fold_mode;
    report.seed = opts.fit.seed;
    report.evaluated_columns = n;
    report.fold_columns = make_folds(n, k, opts.fit.seed, opts.fold_mode);

    // one design per lag order, trimmed to the shared window
    std::vector<std::size_t> distinct = opts.lags;
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    std::vector<design::Design> designs;
    for (std::size_t d : distinct) {
        auto des = design::build_lag_design(frame, d);
        const std::size_t skip = max_lag - d;
        des.target = des.target.col_block(skip, n);
        des.covariates = des.covariates.col_block(skip, n);
        des.column_labels.erase(des.column_labels.begin(), des.column_labels.begin() + static_cast<std::ptrdiff_t>(skip));
        designs.push_back(std::move(des));
    }
    auto design_for = [&](std::size_t d) -> const design::Design& {
        return designs[static_cast<std::size_t>(std::lower_bound(distinct.begin(), distinct.end(), d) - distinct.begin())];
    };

    std::vector<std::vector<std::size_t>> train(k);
    for (std::size_t f = 0; f < k; ++f) {
        std::vector<bool> held(n, false);
        for (std::size_t c : report.fold_columns[f]) held[c] = true;
        for (std::size_t c = 0; c < n; ++c)
            if (!held[c]) train[f].push_back(c);
    }

    report.candidates.resize(cands.size());
    for (std::size_t i = 0; i < cands.size(); ++i) {
        report.candidates[i].rank = cands[i].first;
        report.candidates[i].lag = cands[i].second;
        report.candidates[i].fold_sse.assign(k, 0.0);
    }
    parallel_for(cands.size() * k, opts.threads, [&](std::size_t task) {
        const std::size_t ci = task / k, f = task % k;
        const auto& des = design_for(cands[ci].second);
        design::Design tr;
        tr.mode = des.mode;
        tr.lag_order = des.lag_order;
        tr.target = des.target.select_cols(train[f]);
        tr.covariates = des.covariates.select_cols(train[f]);
        solver::FitOptions fo = opts.fit;
        fo.rank = cands[ci].first;
        const auto model = solver::fit(tr, fo);
        const auto& held = report.fold_columns[f];
        const Matrix pred = matmul(model.basis, matmul(model.theta, des.covariates.select_cols(held)));
        report.candidates[ci].fold_sse[f] = solver::objective(des.target.select_cols(held), pred);
    });

    for (auto& c : report.candidates) {
        c.mean_sse = std::accumulate(c.fold_sse.begin(), c.fold_sse.end(), 0.0) / static_cast<double>(k);
    }
    for (std::size_t i = 1; i < report.candidates.size(); ++i) {
        const auto& a = report.candidates[i];
        const auto& b = report.candidates[report.chosen];
        if (a.mean_sse < b.mean_sse ||
            (a.mean_sse == b.mean_sse && (a.lag < b.lag || (a.lag == b.lag && a.rank < b.rank)))) {
            report.chosen = i;
        }
    }
    return report;
}

nlohmann::json to_json(const CVReport& r) {
    nlohmann::json cands = nlohmann::json::array();
    for (const auto& c : r.candidates) {
        cands.push_back({{"Q", c.rank}, {"D", c.lag}, {"fold_sse", c.fold_sse}, {"mean_sse", c.mean_sse}});
    }
    return {
        {"candidates", cands},
        {"chosen", {{"Q", r.best().rank}, {"D", r.best().lag}, {"mean_sse", r.best().mean_sse}}},
        {"folds", r.folds},
        {"fold_mode", r.fold_mode == FoldMode::random ? "random" : "blocks"},
        {"seed", r.seed},
        {"evaluated_columns", r.evaluated_columns},
    };
}

} // namespace nmfvar::select
