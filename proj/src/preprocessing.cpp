#include "nmfvar/preprocessing.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <set>

#include "nmfvar/error.hpp"

namespace nmfvar::prep {

namespace {

std::optional<long> parse_int(std::string_view s) {
    long v = 0;
    if (s.empty()) return std::nullopt;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size()) return std::nullopt;
    return v;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        out.push_back(s.substr(start, pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

// Position of a label on a uniform axis, or nullopt for opaque labels.
std::optional<double> label_position(std::string_view s) {
    double v = 0.0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec == std::errc{} && p == s.data() + s.size() && std::isfinite(v)) return v;

    for (char sep : {'-', '/'}) {
        const auto parts = split(s, sep);
        if (parts.size() == 3 && parts[0].size() == 4) {
            const auto y = parse_int(parts[0]), m = parse_int(parts[1]), d = parse_int(parts[2]);
            if (!y || !m || !d) continue;
            using namespace std::chrono;
            const year_month_day ymd{year{static_cast<int>(*y)}, month{static_cast<unsigned>(*m)},
                                     day{static_cast<unsigned>(*d)}};
            if (!ymd.ok()) return std::nullopt;
            return static_cast<double>(sys_days{ymd}.time_since_epoch().count());
        }
        if (parts.size() == 2 && parts[0].size() == 4) {
            const auto y = parse_int(parts[0]), m = parse_int(parts[1]);
            if (y && m && *m >= 1 && *m <= 12) return static_cast<double>(*y * 12 + (*m - 1));
        }
    }
    // quarters: "1980 Q1", "1980-Q1", "1980Q1"
    if (s.size() >= 6 && (s.back() >= '1' && s.back() <= '4') && (s[s.size() - 2] == 'Q' || s[s.size() - 2] == 'q')) {
        std::string_view year_part = s.substr(0, s.size() - 2);
        while (!year_part.empty() && (year_part.back() == ' ' || year_part.back() == '-')) year_part.remove_suffix(1);
        if (const auto y = parse_int(year_part)) return static_cast<double>(*y * 4 + (s.back() - '1'));
    }
    return std::nullopt;
}

std::optional<double> validate_labels(const std::vector<std::string>& labels) {
    std::set<std::string> seen;
    for (const auto& l : labels) {
        if (!seen.insert(l).second) throw InputError("duplicate time label '" + l + "'");
    }
    std::vector<double> pos;
    pos.reserve(labels.size());
    for (const auto& l : labels) {
        const auto p = label_position(l);
        if (!p) return std::nullopt;
        pos.push_back(*p);
    }
    const double spacing = pos[1] - pos[0];
    for (std::size_t i = 1; i < pos.size(); ++i) {
        const double d = pos[i] - pos[i - 1];
        if (!(d > 0.0)) {
            throw InputError("time labels must be strictly increasing ('" + labels[i - 1] + "' then '" +
                             labels[i] + "')");
        }
        if (std::abs(d - spacing) > 1e-9 * std::max(1.0, std::abs(spacing))) {
            throw InputError("time labels are not equally spaced at '" + labels[i] + "'");
        }
    }
    return spacing;
}

void require_fitted(const Step& s) {
    if (!s.fitted) throw ConfigError("pipeline step is missing its inversion state");
}

std::string step_name(const Step& s) {
    switch (s.kind) {
    case StepKind::log: return "log";
    case StepKind::log1p: return "log1p";
    case StepKind::moving_average: return "ma" + std::to_string(s.window);
    case StepKind::first_difference: return "diff";
    case StepKind::minmax: return "minmax";
    }
    return "?";
}

} // namespace

TimeSeriesFrame make_frame(std::vector<std::string> variable_names, std::vector<std::string> time_labels,
                           Matrix values) {
    if (values.rows() < 1) throw InputError("frame needs at least one variable");
    if (values.cols() < 2) throw InputError("frame needs at least two time points, got " + std::to_string(values.cols()));
    if (variable_names.size() != values.rows()) {
        throw InputError("frame has " + std::to_string(values.rows()) + " variables but " +
                         std::to_string(variable_names.size()) + " names");
    }
    if (time_labels.size() != values.cols()) {
        throw InputError("frame has " + std::to_string(values.cols()) + " time points but " +
                         std::to_string(time_labels.size()) + " labels");
    }
    std::set<std::string> names(variable_names.begin(), variable_names.end());
    if (names.size() != variable_names.size()) throw InputError("duplicate variable names");
    if (!values.all_finite()) throw InputError("frame contains non-finite values");
    TimeSeriesFrame f{std::move(variable_names), std::move(time_labels), std::move(values), std::nullopt};
    f.spacing = validate_labels(f.time_labels);
    return f;
}

TimeSeriesFrame make_frame(Matrix values) {
    std::vector<std::string> names, labels;
    for (std::size_t i = 0; i < values.rows(); ++i) names.push_back("V" + std::to_string(i + 1));
    for (std::size_t t = 0; t < values.cols(); ++t) labels.push_back(std::to_string(t + 1));
    return make_frame(std::move(names), std::move(labels), std::move(values));
}

bool PipelineSpec::fitted() const noexcept {
    return std::all_of(steps.begin(), steps.end(), [](const Step& s) { return s.fitted; });
}

bool PipelineSpec::smooths() const noexcept {
    return std::any_of(steps.begin(), steps.end(), [](const Step& s) { return s.kind == StepKind::moving_average; });
}

std::size_t PipelineSpec::dropped() const noexcept {
    std::size_t n = 0;
    for (const auto& s : steps) n += s.dropped_front + s.dropped_back;
    return n;
}

PipelineSpec parse_pipeline(std::string_view text) {
    PipelineSpec spec;
    if (text.empty() || text == "none") return spec;
    for (auto tok : split(text, ',')) {
        while (!tok.empty() && tok.front() == ' ') tok.remove_prefix(1);
        while (!tok.empty() && tok.back() == ' ') tok.remove_suffix(1);
        Step s;
        if (tok == "log") {
            s.kind = StepKind::log;
        } else if (tok == "log1p") {
            s.kind = StepKind::log1p;
        } else if (tok == "diff") {
            s.kind = StepKind::first_difference;
        } else if (tok == "minmax") {
            s.kind = StepKind::minmax;
        } else if (tok.starts_with("ma")) {
            const auto w = parse_int(tok.substr(2));
            if (!w || *w < 1 || *w % 2 == 0) {
                throw ConfigError("moving average window must be an odd positive integer: '" + std::string(tok) + "'");
            }
            s.kind = StepKind::moving_average;
            s.window = static_cast<int>(*w);
        } else {
            throw ConfigError("unknown transform step '" + std::string(tok) + "'");
        }
        spec.steps.push_back(std::move(s));
    }
    return spec;
}

std::string to_string(const PipelineSpec& spec) {
    std::string out;
    for (const auto& s : spec.steps) {
        if (!out.empty()) out += ',';
        out += step_name(s);
    }
    return out.empty() ? "none" : out;
}

AppliedPipeline apply_pipeline(const TimeSeriesFrame& input, const PipelineSpec& spec) {
    TimeSeriesFrame cur = input;
    PipelineSpec fitted = spec;
    const std::size_t p = cur.variables();
    for (auto& step : fitted.steps) {
        const std::size_t t = cur.length();
        Matrix& v = cur.values;
        switch (step.kind) {
        case StepKind::log:
            for (std::size_t i = 0; i < v.size(); ++i) {
                const double x = v.data()[i];
                if (!(x > 0.0)) {
                    throw InputError("log requires positive values; variable '" + cur.variable_names[i / t] +
                                     "' has " + std::to_string(x) + " at '" + cur.time_labels[i % t] + "'");
                }
                v.data()[i] = std::log(x);
            }
            break;
        case StepKind::log1p:
            for (std::size_t i = 0; i < v.size(); ++i) {
                const double x = v.data()[i];
                if (!(x >= 0.0)) {
                    throw InputError("log1p requires non-negative values; variable '" + cur.variable_names[i / t] +
                                     "' has " + std::to_string(x) + " at '" + cur.time_labels[i % t] + "'");
                }
                v.data()[i] = std::log1p(x);
            }
            break;
        case StepKind::moving_average: {
            const std::size_t w = static_cast<std::size_t>(step.window);
            if (w > t) {
                throw ConfigError("moving average window " + std::to_string(w) + " exceeds series length " +
                                  std::to_string(t));
            }
            const std::size_t half = w / 2;
            const std::size_t out_t = t - 2 * half;
            Matrix out(p, out_t);
            for (std::size_t i = 0; i < p; ++i) {
                const auto r = v.row(i);
                for (std::size_t j = 0; j < out_t; ++j) {
                    double s = 0.0;
                    for (std::size_t k = 0; k < w; ++k) s += r[j + k];
                    out(i, j) = s / static_cast<double>(w);
                }
            }
            cur.values = std::move(out);
            cur.time_labels = std::vector<std::string>(cur.time_labels.begin() + static_cast<std::ptrdiff_t>(half),
                                                       cur.time_labels.end() - static_cast<std::ptrdiff_t>(half));
            step.dropped_front = step.dropped_back = half;
            break;
        }
        case StepKind::first_difference: {
            Matrix out(p, t - 1);
            step.first_values = v.col(0);
            step.last_values = v.col(t - 1);
            for (std::size_t i = 0; i < p; ++i)
                for (std::size_t j = 0; j + 1 < t; ++j) out(i, j) = v(i, j + 1) - v(i, j);
            step.dropped_label = cur.time_labels.front();
            cur.values = std::move(out);
            cur.time_labels.erase(cur.time_labels.begin());
            step.dropped_front = 1;
            step.dropped_back = 0;
            break;
        }
        case StepKind::minmax:
            step.minimum.assign(p, 0.0);
            step.maximum.assign(p, 0.0);
            for (std::size_t i = 0; i < p; ++i) {
                const auto r = v.row(i);
                const auto [lo_it, hi_it] = std::minmax_element(r.begin(), r.end());
                const double lo = *lo_it, hi = *hi_it;
                if (!(hi > lo)) {
                    throw InputError("minmax: variable '" + cur.variable_names[i] + "' is constant");
                }
                step.minimum[i] = lo;
                step.maximum[i] = hi;
                for (double& x : r) x = std::clamp((x - lo) / (hi - lo), 0.0, 1.0);
            }
            break;
        }
        step.fitted = true;
        if (cur.length() < 2) {
            throw ConfigError("pipeline step " + step_name(step) + " leaves fewer than two time points");
        }
    }
    cur.spacing = validate_labels(cur.time_labels);
    return {std::move(cur), std::move(fitted)};
}

InvertedFrame invert_pipeline(const TimeSeriesFrame& frame, const PipelineSpec& fitted, Anchor anchor) {
    InvertedFrame res{frame, false};
    TimeSeriesFrame& cur = res.frame;
    const std::size_t p = cur.variables();
    for (auto it = fitted.steps.rbegin(); it != fitted.steps.rend(); ++it) {
        const Step& step = *it;
        require_fitted(step);
        Matrix& v = cur.values;
        switch (step.kind) {
        case StepKind::log:
            for (std::size_t i = 0; i < v.size(); ++i) v.data()[i] = std::exp(v.data()[i]);
            break;
        case StepKind::log1p:
            for (std::size_t i = 0; i < v.size(); ++i) v.data()[i] = std::expm1(v.data()[i]);
            break;
        case StepKind::moving_average:
            res.smoothed_scale = true;
            break;
        case StepKind::first_difference: {
            const auto& base = anchor == Anchor::training_start ? step.first_values : step.last_values;
            if (base.size() != p) throw ConfigError("differencing state does not match the frame's variables");
            const std::size_t t = cur.length();
            const std::size_t offset = anchor == Anchor::training_start ? 1 : 0;
            Matrix out(p, t + offset);
            for (std::size_t i = 0; i < p; ++i) {
                double level = base[i];
                if (offset) out(i, 0) = level;
                for (std::size_t j = 0; j < t; ++j) {
                    level += v(i, j);
                    out(i, j + offset) = level;
                }
            }
            cur.values = std::move(out);
            if (offset) cur.time_labels.insert(cur.time_labels.begin(), step.dropped_label);
            break;
        }
        case StepKind::minmax:
            if (step.minimum.size() != p || step.maximum.size() != p) {
                throw ConfigError("minmax state does not match the frame's variables");
            }
            for (std::size_t i = 0; i < p; ++i) {
                const double lo = step.minimum[i], span = step.maximum[i] - step.minimum[i];
                for (double& x : v.row(i)) x = lo + x * span;
            }
            break;
        }
    }
    return res;
}

nlohmann::json to_json(const PipelineSpec& spec) {
    nlohmann::json steps = nlohmann::json::array();
    for (const auto& s : spec.steps) {
        nlohmann::json j;
        j["step"] = step_name(s);
        j["fitted"] = s.fitted;
        switch (s.kind) {
        case StepKind::moving_average:
            j["window"] = s.window;
            j["dropped_front"] = s.dropped_front;
            j["dropped_back"] = s.dropped_back;
            break;
        case StepKind::first_difference:
            j["first_values"] = s.first_values;
            j["last_values"] = s.last_values;
            j["dropped_label"] = s.dropped_label;
            j["dropped_front"] = s.dropped_front;
            break;
        case StepKind::minmax:
            j["minimum"] = s.minimum;
            j["maximum"] = s.maximum;
            break;
        default: break;
        }
        steps.push_back(std::move(j));
    }
    return {{"steps", steps}};
}

PipelineSpec pipeline_from_json(const nlohmann::json& j) {
    try {
        PipelineSpec spec;
        for (const auto& js : j.at("steps")) {
            auto parsed = parse_pipeline(js.at("step").get<std::string>());
            if (parsed.steps.size() != 1) throw InputError("bad pipeline step");
            Step s = parsed.steps.front();
            s.fitted = js.value("fitted", false);
            s.dropped_front = js.value("dropped_front", std::size_t{0});
            s.dropped_back = js.value("dropped_back", std::size_t{0});
            if (js.contains("first_values")) s.first_values = js["first_values"].get<std::vector<double>>();
            if (js.contains("last_values")) s.last_values = js["last_values"].get<std::vector<double>>();
            if (js.contains("dropped_label")) s.dropped_label = js["dropped_label"].get<std::string>();
            if (js.contains("minimum")) s.minimum = js["minimum"].get<std::vector<double>>();
            if (js.contains("maximum")) s.maximum = js["maximum"].get<std::vector<double>>();
            spec.steps.push_back(std::move(s));
        }
        return spec;
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("malformed pipeline JSON: ") + e.what());
    }
}

} // namespace nmfvar::prep
