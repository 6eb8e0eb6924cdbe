#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "nmfvar/csv.hpp"
#include "nmfvar/design.hpp"
#include "nmfvar/model_selection.hpp"
#include "nmfvar/preprocessing.hpp"
#include "nmfvar/solver.hpp"
#include "nmfvar/var_analysis.hpp"

namespace nmfvar::app {

inline constexpr int model_format_version = 1;

struct RunConfig {
    std::filesystem::path input;
    std::filesystem::path output_dir = ".";
    std::optional<std::size_t> rank;  // defaults to 2, or to the fixed basis width
    std::size_t lags = 1;
    design::CovariateMode covariates = design::CovariateMode::lags;
    double kernel_beta = 0.0;
    std::string transform;
    std::uint64_t seed = solver::default_seed;
    int max_iter = solver::FitOptions{}.max_iter;
    double tolerance = solver::FitOptions{}.tolerance;
    solver::InitMode init = solver::InitMode::kmeans;
    std::string fixed_basis;  // "", "scalar", or a CSV path (rows = variables)
    std::vector<std::string> basis_names;
    std::vector<std::size_t> q_candidates;
    std::vector<std::size_t> d_candidates;
    std::size_t folds = 10;
    select::FoldMode fold_mode = select::FoldMode::random;
    unsigned threads = 0;
    std::filesystem::path model;
    std::size_t horizon = 1;
};

/// Everything needed to forecast without the training data.
struct StoredModel {
    solver::FactorModel model;
    prep::PipelineSpec pipeline;
    std::vector<std::string> variable_names;
    std::vector<std::string> basis_names;
    Matrix history;  // last D preprocessed columns, oldest first (lag mode)
    std::vector<std::string> history_labels;
    std::size_t length = 0;  // T after preprocessing
    std::uint64_t seed = 0;
};

struct FitRun {
    StoredModel stored;
    prep::TimeSeriesFrame processed;
    design::Design design;
    std::optional<var::CompanionForm> companion;
    std::optional<var::ParameterCounts> parameters;
};

prep::TimeSeriesFrame load_frame(const std::filesystem::path& path);

FitRun run_fit(const prep::TimeSeriesFrame& raw, const RunConfig& cfg);

nlohmann::json model_to_json(const StoredModel& m);
StoredModel model_from_json(const nlohmann::json& j);
StoredModel load_model(const std::filesystem::path& path);
nlohmann::json diagnostics_json(const FitRun& run);

/// File name -> contents for every artifact of a fit.
std::map<std::string, std::string> fit_artifacts(const FitRun& run);

/// Writes all files or none: contents are rendered before the first write.
void write_files(const std::filesystem::path& dir, const std::map<std::string, std::string>& files);

struct ForecastResult {
    Matrix model_space;  // P x h, preprocessed scale
    Matrix values;       // P x h, original units
    std::vector<std::string> variable_names;
    bool smoothed_scale = false;
};

ForecastResult run_forecast(const StoredModel& m, std::size_t horizon);
io::CsvTable forecast_table(const ForecastResult& f);

select::CVReport run_cv(const prep::TimeSeriesFrame& raw, const RunConfig& cfg);
std::string cv_table(const select::CVReport& report);

void cmd_fit(const RunConfig& cfg);
void cmd_cv(const RunConfig& cfg, std::ostream& out);
void cmd_forecast(const RunConfig& cfg);

} // namespace nmfvar::app
