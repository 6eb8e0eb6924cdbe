#include "nmfvar/workflow.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "nmfvar/clustering.hpp"
#include "nmfvar/error.hpp"

namespace nmfvar::app {

using nlohmann::json;

namespace {

json flat(const Matrix& m) {
    json a = json::array();
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (double v : m.row(i)) a.push_back(v);
    return a;
}

Matrix unflat(const json& j, std::size_t rows, std::size_t cols, const char* what) {
    if (!j.is_array() || j.size() != rows * cols) {
        throw InputError(std::string("model file: '") + what + "' must hold " + std::to_string(rows * cols) +
                         " numbers");
    }
    std::vector<double> v;
    v.reserve(j.size());
    for (const auto& e : j) {
        if (!e.is_number()) throw InputError(std::string("model file: '") + what + "' contains a non-number");
        v.push_back(e.get<double>());
    }
    return Matrix(rows, cols, std::move(v));
}

std::vector<std::string> default_basis_names(std::size_t q) {
    std::vector<std::string> out;
    for (std::size_t i = 1; i <= q; ++i) out.push_back("Basis" + std::to_string(i));
    return out;
}

Matrix read_fixed_basis(const RunConfig& cfg, const prep::TimeSeriesFrame& frame) {
    if (cfg.fixed_basis == "scalar") {
        if (frame.variables() != 1) {
            throw ConfigError("--fix-basis scalar needs a single variable, the data has " +
                              std::to_string(frame.variables()));
        }
        return Matrix(1, 1, 1.0);
    }
    const auto table = io::read_csv(cfg.fixed_basis);
    if (table.row_labels.size() != frame.variables()) {
        throw ConfigError("fixed basis has " + std::to_string(table.row_labels.size()) + " rows but the data has " +
                          std::to_string(frame.variables()) + " variables");
    }
    Matrix x(frame.variables(), table.values.cols());
    for (std::size_t p = 0; p < frame.variables(); ++p) {
        const auto& name = frame.variable_names[p];
        std::size_t r = 0;
        while (r < table.row_labels.size() && table.row_labels[r] != name) ++r;
        if (r == table.row_labels.size()) throw ConfigError("fixed basis has no row for variable '" + name + "'");
        for (std::size_t q = 0; q < x.cols(); ++q) x(p, q) = table.values(r, q);
    }
    return x;
}

design::Design make_design(const prep::TimeSeriesFrame& f, const RunConfig& cfg) {
    switch (cfg.covariates) {
    case design::CovariateMode::lags: return design::build_lag_design(f, cfg.lags);
    case design::CovariateMode::kernel: return design::build_kernel_design(f, cfg.kernel_beta);
    case design::CovariateMode::identity: return design::build_identity_design(f);
    }
    throw ConfigError("unknown covariate mode");
}

solver::FitOptions fit_options(const RunConfig& cfg) {
    solver::FitOptions o;
    o.rank = cfg.rank.value_or(2);
    o.max_iter = cfg.max_iter;
    o.tolerance = cfg.tolerance;
    o.seed = cfg.seed;
    o.init = cfg.init;
    return o;
}

json nan_to_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

} // namespace

prep::TimeSeriesFrame load_frame(const std::filesystem::path& path) {
    if (!std::filesystem::is_regular_file(path)) throw InputError("input file '" + path.string() + "' does not exist");
    return io::frame_from_table(io::read_csv(path));
}

FitRun run_fit(const prep::TimeSeriesFrame& raw, const RunConfig& cfg) {
    auto applied = prep::apply_pipeline(raw, prep::parse_pipeline(cfg.transform));
    auto opts = fit_options(cfg);
    if (!cfg.fixed_basis.empty()) {
        Matrix x = read_fixed_basis(cfg, applied.frame);
        if (cfg.rank && *cfg.rank != x.cols()) {
            throw ConfigError("--rank " + std::to_string(*cfg.rank) + " disagrees with the fixed basis width " +
                              std::to_string(x.cols()));
        }
        opts.rank = x.cols();
        opts.fixed_basis = std::move(x);
    }
    if (!cfg.basis_names.empty() && cfg.basis_names.size() != opts.rank) {
        throw ConfigError(std::to_string(cfg.basis_names.size()) + " basis names given for rank " +
                          std::to_string(opts.rank));
    }

    FitRun run;
    run.design = make_design(applied.frame, cfg);
    run.stored.model = solver::fit(run.design, opts);
    const auto& m = run.stored.model;
    if (!m.basis.all_finite() || !m.theta.all_finite() || !m.diagnostics.fitted.all_finite()) {
        throw NumericError("fit produced NaN or infinite values");
    }

    run.stored.pipeline = applied.fitted;
    run.stored.variable_names = applied.frame.variable_names;
    run.stored.basis_names = cfg.basis_names.empty() ? default_basis_names(opts.rank) : cfg.basis_names;
    run.stored.length = applied.frame.length();
    run.stored.seed = cfg.seed;
    if (m.mode == design::CovariateMode::lags) {
        const std::size_t t = applied.frame.length();
        run.stored.history = applied.frame.values.col_block(t - m.lag_order, m.lag_order);
        run.stored.history_labels.assign(applied.frame.time_labels.end() - static_cast<std::ptrdiff_t>(m.lag_order),
                                         applied.frame.time_labels.end());
        run.companion = var::companion_form(var::var_coefficients(m));
        run.parameters = var::parameter_reduction(m.variables(), m.rank(), m.lag_order);
    }
    run.processed = std::move(applied.frame);
    return run;
}

json model_to_json(const StoredModel& s) {
    const auto& m = s.model;
    json j;
    j["format_version"] = model_format_version;
    j["P"] = m.variables();
    j["T"] = s.length;
    j["Q"] = m.rank();
    j["D"] = m.lag_order;
    j["covariates"] = design::to_string(m.mode);
    j["kernel_beta"] = m.bandwidth;
    j["fixed_basis"] = m.fixed_basis;
    j["variable_names"] = s.variable_names;
    j["basis_names"] = s.basis_names;
    j["basis"] = flat(m.basis);
    j["theta_columns"] = m.theta.cols();
    j["theta"] = flat(m.theta);
    j["pipeline"] = prep::to_json(s.pipeline);
    j["history"] = flat(s.history);
    j["history_labels"] = s.history_labels;
    j["diagnostics"] = {{"objective_trace", m.diagnostics.objective_trace},
                        {"r_squared", nan_to_null(m.diagnostics.r_squared)},
                        {"iterations", m.diagnostics.iterations},
                        {"converged", m.diagnostics.converged}};
    j["seed"] = s.seed;
    return j;
}

StoredModel model_from_json(const json& j) {
    try {
        if (j.value("format_version", 0) != model_format_version) {
            throw InputError("model file: unsupported format_version");
        }
        StoredModel s;
        auto& m = s.model;
        const auto p = j.at("P").get<std::size_t>();
        const auto q = j.at("Q").get<std::size_t>();
        const auto d = j.at("D").get<std::size_t>();
        m.mode = design::covariate_mode_from_string(j.at("covariates").get<std::string>());
        m.lag_order = d;
        m.bandwidth = j.at("kernel_beta").get<double>();
        m.fixed_basis = j.value("fixed_basis", false);
        s.length = j.at("T").get<std::size_t>();
        s.variable_names = j.at("variable_names").get<std::vector<std::string>>();
        s.basis_names = j.at("basis_names").get<std::vector<std::string>>();
        if (s.variable_names.size() != p || s.basis_names.size() != q) {
            throw InputError("model file: name lists do not match P and Q");
        }
        m.basis = unflat(j.at("basis"), p, q, "basis");
        m.theta = unflat(j.at("theta"), q, j.at("theta_columns").get<std::size_t>(), "theta");
        s.pipeline = prep::pipeline_from_json(j.at("pipeline"));
        const std::size_t hist_cols = m.mode == design::CovariateMode::lags ? d : 0;
        s.history = unflat(j.at("history"), hist_cols ? p : 0, hist_cols, "history");
        s.history_labels = j.at("history_labels").get<std::vector<std::string>>();
        const auto& dj = j.at("diagnostics");
        m.diagnostics.objective_trace = dj.at("objective_trace").get<std::vector<double>>();
        m.diagnostics.r_squared = dj.at("r_squared").is_null() ? NAN : dj.at("r_squared").get<double>();
        m.diagnostics.iterations = dj.at("iterations").get<int>();
        m.diagnostics.converged = dj.at("converged").get<bool>();
        s.seed = j.at("seed").get<std::uint64_t>();
        return s;
    } catch (const json::exception& e) {
        throw InputError(std::string("model file: ") + e.what());
    }
}

StoredModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open model file '" + path.string() + "'");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw InputError("model file '" + path.string() + "' is not valid JSON: " + e.what());
    }
    return model_from_json(j);
}

json diagnostics_json(const FitRun& run) {
    const auto& s = run.stored;
    const auto& d = s.model.diagnostics;
    json j;
    j["covariates"] = design::to_string(s.model.mode);
    j["P"] = s.model.variables();
    j["T"] = s.length;
    j["Q"] = s.model.rank();
    j["D"] = s.model.lag_order;
    j["r_squared"] = nan_to_null(d.r_squared);
    json per = json::object();
    for (std::size_t p = 0; p < s.variable_names.size(); ++p) {
        per[s.variable_names[p]] = nan_to_null(d.r_squared_per_variable.at(p));
    }
    j["r_squared_per_variable"] = per;
    if (run.companion) {
        j["spectral_radius"] = run.companion->spectral_radius;
        j["stationary"] = run.companion->stationary;
    } else {
        j["spectral_radius"] = nullptr;
        j["stationary"] = nullptr;
    }
    if (run.parameters) {
        j["parameters"] = {{"nmfvar", run.parameters->nmfvar_params},
                           {"var", run.parameters->var_params},
                           {"ratio", run.parameters->ratio}};
    } else {
        j["parameters"] = nullptr;
    }
    json zero = json::array();
    for (auto r : d.zero_rows) zero.push_back(s.variable_names.at(r));
    j["zero_rows"] = zero;
    j["iterations"] = d.iterations;
    j["converged"] = d.converged;
    j["objective_trace"] = d.objective_trace;
    j["pipeline"] = prep::to_string(s.pipeline);
    j["seed"] = s.seed;
    return j;
}

std::map<std::string, std::string> fit_artifacts(const FitRun& run) {
    const auto& s = run.stored;
    const auto& m = s.model;
    const auto& diag = m.diagnostics;
    std::map<std::string, std::string> files;
    json diagnostics = diagnostics_json(run);

    // Fitted values and residuals on the scale the model was fitted on.
    io::CsvTable fitted;
    fitted.header.push_back("time");
    fitted.header.insert(fitted.header.end(), s.variable_names.begin(), s.variable_names.end());
    fitted.row_labels = run.design.column_labels;
    fitted.values = diag.fitted.transpose();
    files["fitted.csv"] = io::format_csv(fitted);

    io::CsvTable resid = fitted;
    Matrix r = run.design.target;
    for (std::size_t i = 0; i < r.rows(); ++i)
        for (std::size_t t = 0; t < r.cols(); ++t) r(i, t) -= diag.fitted(i, t);
    resid.values = r.transpose();
    files["residuals.csv"] = io::format_csv(resid);

    // Time points whose loadings are all zero have no membership.
    std::vector<std::size_t> keep_t;
    json zero_t = json::array();
    for (std::size_t t = 0; t < diag.coefficients.cols(); ++t) {
        double sum = 0.0;
        for (std::size_t q = 0; q < diag.coefficients.rows(); ++q) sum += diag.coefficients(q, t);
        if (sum > 0.0) keep_t.push_back(t);
        else zero_t.push_back(run.design.column_labels.at(t));
    }
    std::vector<std::string> kept_labels;
    for (auto t : keep_t) kept_labels.push_back(run.design.column_labels[t]);
    io::CsvTable mt;
    mt.header.push_back("time");
    mt.header.insert(mt.header.end(), s.basis_names.begin(), s.basis_names.end());
    if (!keep_t.empty()) {
        auto tm = cluster::time_membership(diag.coefficients.select_cols(keep_t), kept_labels);
        mt.row_labels = tm.labels;
        mt.values = tm.probabilities.transpose();
    } else {
        mt.values = Matrix(0, s.basis_names.size());
    }
    files["memberships_time.csv"] = io::format_csv(mt);
    diagnostics["zero_time_points"] = zero_t;

    std::vector<std::size_t> keep_p;
    json zero_p = json::array();
    for (std::size_t p = 0; p < m.basis.rows(); ++p) {
        double sum = 0.0;
        for (double v : m.basis.row(p)) sum += v;
        if (sum > 0.0) keep_p.push_back(p);
        else zero_p.push_back(s.variable_names[p]);
    }
    io::CsvTable mv;
    mv.header.push_back("variable");
    mv.header.insert(mv.header.end(), s.basis_names.begin(), s.basis_names.end());
    Matrix kept_basis(keep_p.size(), m.rank());
    std::vector<std::string> kept_names;
    for (std::size_t i = 0; i < keep_p.size(); ++i) {
        for (std::size_t q = 0; q < m.rank(); ++q) kept_basis(i, q) = m.basis(keep_p[i], q);
        kept_names.push_back(s.variable_names[keep_p[i]]);
    }
    if (!keep_p.empty()) {
        auto vm = cluster::variable_membership(kept_basis, kept_names);
        mv.row_labels = vm.labels;
        mv.values = vm.probabilities;
    } else {
        mv.values = Matrix(0, m.rank());
    }
    files["memberships_vars.csv"] = io::format_csv(mv);
    diagnostics["excluded_variables"] = zero_p;

    files["model.json"] = model_to_json(s).dump(2) + "\n";
    files["diagnostics.json"] = diagnostics.dump(2) + "\n";
    return files;
}

void write_files(const std::filesystem::path& dir, const std::map<std::string, std::string>& files) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw InputError("cannot create output directory '" + dir.string() + "': " + ec.message());
    for (const auto& [name, text] : files) io::write_text(dir / name, text);
}

ForecastResult run_forecast(const StoredModel& s, std::size_t horizon) {
    if (s.model.mode != design::CovariateMode::lags) throw ConfigError("forecasting requires lag covariates");
    if (horizon < 1) throw ConfigError("forecast horizon must be at least 1");
    ForecastResult out;
    out.variable_names = s.variable_names;
    out.model_space = var::forecast(s.model, s.history, horizon);

    prep::TimeSeriesFrame f;
    f.variable_names = s.variable_names;
    for (std::size_t h = 1; h <= horizon; ++h) f.time_labels.push_back("h" + std::to_string(h));
    f.values = out.model_space;
    auto inv = prep::invert_pipeline(f, s.pipeline, prep::Anchor::after_training);
    out.values = std::move(inv.frame.values);
    out.smoothed_scale = inv.smoothed_scale;
    if (!out.values.all_finite()) throw NumericError("forecast produced NaN or infinite values");
    return out;
}

io::CsvTable forecast_table(const ForecastResult& f) {
    io::CsvTable t;
    if (f.smoothed_scale) t.comments.push_back("# smoothed-scale: values are on the moving-average scale");
    t.header.push_back("variable");
    for (std::size_t h = 1; h <= f.values.cols(); ++h) t.header.push_back("h" + std::to_string(h));
    t.row_labels = f.variable_names;
    t.values = f.values;
    return t;
}

select::CVReport run_cv(const prep::TimeSeriesFrame& raw, const RunConfig& cfg) {
    if (cfg.covariates != design::CovariateMode::lags) {
        throw ConfigError("cross-validation selects lag orders and needs lag covariates");
    }
    if (!cfg.fixed_basis.empty()) throw ConfigError("cross-validation does not support a fixed basis");
    auto applied = prep::apply_pipeline(raw, prep::parse_pipeline(cfg.transform));
    select::CVOptions o;
    o.fit = fit_options(cfg);
    o.ranks = cfg.q_candidates.empty() ? std::vector<std::size_t>{o.fit.rank} : cfg.q_candidates;
    o.lags = cfg.d_candidates.empty() ? std::vector<std::size_t>{cfg.lags} : cfg.d_candidates;
    o.folds = cfg.folds;
    o.fold_mode = cfg.fold_mode;
    o.threads = cfg.threads;
    return select::cross_validate(applied.frame, o);
}

std::string cv_table(const select::CVReport& report) {
    std::ostringstream os;
    os << std::setw(4) << "Q" << std::setw(4) << "D" << std::setw(20) << "mean_sse" << '\n';
    for (std::size_t i = 0; i < report.candidates.size(); ++i) {
        const auto& c = report.candidates[i];
        os << std::setw(4) << c.rank << std::setw(4) << c.lag << std::setw(20) << std::setprecision(10) << c.mean_sse
           << (i == report.chosen ? "  *" : "") << '\n';
    }
    const auto& b = report.best();
    os << "chosen: Q=" << b.rank << " D=" << b.lag << '\n';
    return os.str();
}

void cmd_fit(const RunConfig& cfg) {
    const auto raw = load_frame(cfg.input);
    write_files(cfg.output_dir, fit_artifacts(run_fit(raw, cfg)));
}

void cmd_cv(const RunConfig& cfg, std::ostream& out) {
    const auto raw = load_frame(cfg.input);
    const auto report = run_cv(raw, cfg);
    write_files(cfg.output_dir, {{"cv_report.json", select::to_json(report).dump(2) + "\n"}});
    out << cv_table(report);
}

void cmd_forecast(const RunConfig& cfg) {
    const auto model = load_model(cfg.model);
    const auto f = run_forecast(model, cfg.horizon);
    write_files(cfg.output_dir, {{"forecast.csv", io::format_csv(forecast_table(f))}});
}

} // namespace nmfvar::app
