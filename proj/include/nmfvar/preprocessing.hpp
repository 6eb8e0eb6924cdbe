#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "nmfvar/matrix.hpp"

namespace nmfvar::prep {

/// P variables observed at T equally spaced time points, stored P x T.
struct TimeSeriesFrame {
    std::vector<std::string> variable_names;
    std::vector<std::string> time_labels;
    Matrix values;
    /// Label spacing when labels are numeric or calendar-like, else nullopt.
    std::optional<double> spacing;

    std::size_t variables() const noexcept { return values.rows(); }
    std::size_t length() const noexcept { return values.cols(); }
};

/// Validates shapes (P >= 1, T >= 2), unique names, and label ordering.
/// Numeric, ISO-date (YYYY-MM-DD or YYYY/M/D), month (YYYY-MM) and quarter
/// (YYYY Qn) labels must be strictly increasing and equally spaced; any other
/// label set is accepted in the given order if unique.
TimeSeriesFrame make_frame(std::vector<std::string> variable_names, std::vector<std::string> time_labels,
                           Matrix values);

/// Default labels "1".."T" and "V1".."VP".
TimeSeriesFrame make_frame(Matrix values);

enum class StepKind { log, log1p, moving_average, first_difference, minmax };

struct Step {
    StepKind kind = StepKind::log;
    int window = 0;  // moving_average only; odd and positive

    // Inversion state, filled by apply_pipeline.
    bool fitted = false;
    std::vector<double> first_values;  // first_difference: level before the first kept point
    std::vector<double> last_values;   // first_difference: final level of the training span
    std::string dropped_label;         // first_difference: label of the dropped point
    std::vector<double> minimum;       // minmax, per variable
    std::vector<double> maximum;
    std::size_t dropped_front = 0;
    std::size_t dropped_back = 0;
};

struct PipelineSpec {
    std::vector<Step> steps;

    bool fitted() const noexcept;
    bool smooths() const noexcept;  // contains a moving average
    std::size_t dropped() const noexcept;
};

/// Parses a comma list: log, log1p, ma<w> (e.g. ma7), diff, minmax.
/// An empty string or "none" is the empty pipeline.
PipelineSpec parse_pipeline(std::string_view text);
std::string to_string(const PipelineSpec& spec);

struct AppliedPipeline {
    TimeSeriesFrame frame;
    PipelineSpec fitted;
};

AppliedPipeline apply_pipeline(const TimeSeriesFrame& frame, const PipelineSpec& spec);

/// Where first_difference inversion starts its cumulative sum.
enum class Anchor {
    training_start,  // frame is the transformed training span; restores the dropped point
    after_training,  // frame continues right after the training span (forecasts)
};

struct InvertedFrame {
    TimeSeriesFrame frame;
    /// True when a moving average was in the pipeline: values are on the smoothed scale.
    bool smoothed_scale = false;
};

InvertedFrame invert_pipeline(const TimeSeriesFrame& frame, const PipelineSpec& fitted,
                              Anchor anchor = Anchor::training_start);

nlohmann::json to_json(const PipelineSpec& spec);
PipelineSpec pipeline_from_json(const nlohmann::json& j);

} // namespace nmfvar::prep
