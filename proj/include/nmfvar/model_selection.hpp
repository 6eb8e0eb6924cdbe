#pragma once

#include <cstdint>
#include <vector>

#include <json.hpp>

#include "nmfvar/preprocessing.hpp"
#include "nmfvar/solver.hpp"

namespace nmfvar::select {

enum class FoldMode { random, blocks };

struct CVOptions {
    std::vector<std::size_t> ranks{2};
    std::vector<std::size_t> lags{1};
    std::size_t folds = 10;
    FoldMode fold_mode = FoldMode::random;
    solver::FitOptions fit;  // seed doubles as the fold shuffle seed
    unsigned threads = 0;    // 0: hardware concurrency
};

struct CandidateScore {
    std::size_t rank = 0;
    std::size_t lag = 0;
    std::vector<double> fold_sse;
    double mean_sse = 0.0;
};

struct CVReport {
    std::vector<CandidateScore> candidates;
    std::size_t chosen = 0;  // index into candidates
    std::size_t folds = 0;
    FoldMode fold_mode = FoldMode::random;
    std::uint64_t seed = 0;
    std::size_t evaluated_columns = 0;
    std::vector<std::vector<std::size_t>> fold_columns;

    const CandidateScore& best() const { return candidates.at(chosen); }
};

/// Scores every (Q, D) pair by held-out SSE of X*Theta*A on k folds of
/// target columns. All candidates share the evaluation window
/// t = max(D)+1 .. T so their SSE sums over identical columns.
CVReport cross_validate(const prep::TimeSeriesFrame& frame, const CVOptions& opts);

/// Partition of 0..n-1 into k folds whose sizes differ by at most one.
std::vector<std::vector<std::size_t>> make_folds(std::size_t n, std::size_t k, std::uint64_t seed, FoldMode mode);

nlohmann::json to_json(const CVReport& report);

} // namespace nmfvar::select
