#include "nmfvar/nmfvar.h"

#include <memory>
#include <new>
#include <optional>
#include <string>

#include "nmfvar/error.hpp"
#include "nmfvar/workflow.hpp"

struct nmfvar_frame {
    nmfvar::prep::TimeSeriesFrame frame;
};

struct nmfvar_model {
    nmfvar::app::StoredModel stored;
    std::optional<nmfvar::app::FitRun> run;  // present for fresh fits
};

struct nmfvar_forecast {
    nmfvar::app::ForecastResult result;
};

struct nmfvar_cv_report {
    nmfvar::select::CVReport report;
    std::string table;
};

namespace {

thread_local std::string last_error;

nmfvar_status fail(nmfvar_status s, std::string msg) {
    last_error = std::move(msg);
    return s;
}

template <class F>
nmfvar_status guarded(F&& f) {
    try {
        last_error.clear();
        f();
        return NMFVAR_OK;
    } catch (const nmfvar::Error& e) {
        return fail(static_cast<nmfvar_status>(static_cast<int>(e.kind())), e.what());
    } catch (const std::bad_alloc&) {
        return fail(NMFVAR_NUMERIC_ERROR, "out of memory");
    } catch (const std::invalid_argument& e) {
        return fail(NMFVAR_CONFIG_ERROR, e.what());
    } catch (const std::exception& e) {
        return fail(NMFVAR_INTERNAL_ERROR, e.what());
    } catch (...) {
        return fail(NMFVAR_INTERNAL_ERROR, "unknown error");
    }
}

#define NMFVAR_REQUIRE(cond, what) \
    if (!(cond)) return fail(NMFVAR_INVALID_ARGUMENT, what)

nmfvar::app::RunConfig to_run_config(const nmfvar_fit_config& c) {
    nmfvar::app::RunConfig r;
    if (c.rank) r.rank = c.rank;
    r.lags = c.lags;
    switch (c.covariates) {
    case NMFVAR_COVARIATES_LAGS: r.covariates = nmfvar::design::CovariateMode::lags; break;
    case NMFVAR_COVARIATES_KERNEL: r.covariates = nmfvar::design::CovariateMode::kernel; break;
    case NMFVAR_COVARIATES_IDENTITY: r.covariates = nmfvar::design::CovariateMode::identity; break;
    default: throw nmfvar::ConfigError("unknown covariate mode");
    }
    r.kernel_beta = c.kernel_beta;
    if (c.transform) r.transform = c.transform;
    r.seed = c.seed;
    r.max_iter = c.max_iter;
    r.tolerance = c.tolerance;
    r.init = c.init == NMFVAR_INIT_UNIFORM_RANDOM ? nmfvar::solver::InitMode::uniform_random
                                                   : nmfvar::solver::InitMode::kmeans;
    if (c.fixed_basis) r.fixed_basis = c.fixed_basis;
    if (c.basis_name_count && !c.basis_names) throw nmfvar::ConfigError("basis_names is null");
    for (std::size_t i = 0; i < c.basis_name_count; ++i) {
        if (!c.basis_names[i]) throw nmfvar::ConfigError("basis name " + std::to_string(i) + " is null");
        r.basis_names.emplace_back(c.basis_names[i]);
    }
    return r;
}

} // namespace

extern "C" {

const char* nmfvar_version(void) { return "1.0.0"; }

const char* nmfvar_last_error(void) { return last_error.c_str(); }

uint64_t nmfvar_default_seed(void) { return nmfvar::solver::default_seed; }

void nmfvar_fit_config_init(nmfvar_fit_config* cfg) {
    if (!cfg) return;
    *cfg = nmfvar_fit_config{};
    cfg->rank = 0;
    cfg->lags = 1;
    cfg->covariates = NMFVAR_COVARIATES_LAGS;
    cfg->seed = nmfvar::solver::default_seed;
    cfg->max_iter = nmfvar::solver::FitOptions{}.max_iter;
    cfg->tolerance = nmfvar::solver::FitOptions{}.tolerance;
    cfg->init = NMFVAR_INIT_KMEANS;
}

void nmfvar_cv_config_init(nmfvar_cv_config* cfg) {
    if (!cfg) return;
    *cfg = nmfvar_cv_config{};
    nmfvar_fit_config_init(&cfg->fit);
    cfg->folds = 10;
    cfg->fold_mode = NMFVAR_FOLDS_RANDOM;
}

nmfvar_status nmfvar_frame_read_csv(const char* path, nmfvar_frame** out) {
    NMFVAR_REQUIRE(path && out, "null argument");
    *out = nullptr;
    return guarded([&] { *out = new nmfvar_frame{nmfvar::app::load_frame(path)}; });
}

nmfvar_status nmfvar_frame_from_values(size_t variables, size_t length, const double* values,
                                       const char* const* names, const char* const* labels, nmfvar_frame** out) {
    NMFVAR_REQUIRE(values && out, "null argument");
    *out = nullptr;
    return guarded([&] {
        nmfvar::Matrix m(variables, length, std::vector<double>(values, values + variables * length));
        if (!names && !labels) {
            *out = new nmfvar_frame{nmfvar::prep::make_frame(std::move(m))};
            return;
        }
        auto fallback = nmfvar::prep::make_frame(nmfvar::Matrix(variables, length));
        std::vector<std::string> n = fallback.variable_names, l = fallback.time_labels;
        if (names) n.assign(names, names + variables);
        if (labels) l.assign(labels, labels + length);
        *out = new nmfvar_frame{nmfvar::prep::make_frame(std::move(n), std::move(l), std::move(m))};
    });
}

size_t nmfvar_frame_variables(const nmfvar_frame* f) { return f ? f->frame.variables() : 0; }
size_t nmfvar_frame_length(const nmfvar_frame* f) { return f ? f->frame.length() : 0; }
void nmfvar_frame_free(nmfvar_frame* f) { delete f; }

nmfvar_status nmfvar_fit(const nmfvar_frame* frame, const nmfvar_fit_config* cfg, nmfvar_model** out) {
    NMFVAR_REQUIRE(frame && cfg && out, "null argument");
    *out = nullptr;
    return guarded([&] {
        auto run = nmfvar::app::run_fit(frame->frame, to_run_config(*cfg));
        auto m = std::make_unique<nmfvar_model>();
        m->stored = run.stored;
        m->run = std::move(run);
        *out = m.release();
    });
}

nmfvar_status nmfvar_model_write_artifacts(const nmfvar_model* m, const char* dir) {
    NMFVAR_REQUIRE(m && dir, "null argument");
    if (!m->run) return fail(NMFVAR_CONFIG_ERROR, "artifacts need a model fitted in this process, not a loaded one");
    return guarded([&] { nmfvar::app::write_files(dir, nmfvar::app::fit_artifacts(*m->run)); });
}

nmfvar_status nmfvar_model_save(const nmfvar_model* m, const char* path) {
    NMFVAR_REQUIRE(m && path, "null argument");
    return guarded([&] {
        nmfvar::io::write_text(path, nmfvar::app::model_to_json(m->stored).dump(2) + "\n");
    });
}

nmfvar_status nmfvar_model_load(const char* path, nmfvar_model** out) {
    NMFVAR_REQUIRE(path && out, "null argument");
    *out = nullptr;
    return guarded([&] {
        auto m = std::make_unique<nmfvar_model>();
        m->stored = nmfvar::app::load_model(path);
        *out = m.release();
    });
}

void nmfvar_model_free(nmfvar_model* m) { delete m; }

size_t nmfvar_model_variables(const nmfvar_model* m) { return m ? m->stored.model.variables() : 0; }
size_t nmfvar_model_rank(const nmfvar_model* m) { return m ? m->stored.model.rank() : 0; }
size_t nmfvar_model_lag_order(const nmfvar_model* m) { return m ? m->stored.model.lag_order : 0; }
int nmfvar_model_iterations(const nmfvar_model* m) { return m ? m->stored.model.diagnostics.iterations : 0; }
double nmfvar_model_r_squared(const nmfvar_model* m) { return m ? m->stored.model.diagnostics.r_squared : 0.0; }

nmfvar_status nmfvar_model_basis(const nmfvar_model* m, double* out, size_t capacity) {
    NMFVAR_REQUIRE(m && out, "null argument");
    const auto& x = m->stored.model.basis;
    NMFVAR_REQUIRE(capacity >= x.size(), "buffer too small for the basis");
    std::copy(x.data(), x.data() + x.size(), out);
    return NMFVAR_OK;
}

nmfvar_status nmfvar_model_var_coefficients(const nmfvar_model* m, double* lags, size_t lags_capacity,
                                            double* intercept, size_t intercept_capacity) {
    NMFVAR_REQUIRE(m && lags && intercept, "null argument");
    const std::size_t p = m->stored.model.variables();
    NMFVAR_REQUIRE(lags_capacity >= m->stored.model.lag_order * p * p && intercept_capacity >= p,
                   "buffer too small for the VAR coefficients");
    return guarded([&] {
        const auto c = nmfvar::var::var_coefficients(m->stored.model);
        for (std::size_t d = 0; d < c.lag_order(); ++d) {
            std::copy(c.lags[d].data(), c.lags[d].data() + c.lags[d].size(), lags + d * p * p);
        }
        std::copy(c.intercept.begin(), c.intercept.end(), intercept);
    });
}

nmfvar_status nmfvar_model_spectral_radius(const nmfvar_model* m, double* radius, int* stationary) {
    NMFVAR_REQUIRE(m && radius, "null argument");
    return guarded([&] {
        const auto f = nmfvar::var::companion_form(nmfvar::var::var_coefficients(m->stored.model));
        *radius = f.spectral_radius;
        if (stationary) *stationary = f.stationary ? 1 : 0;
    });
}

nmfvar_status nmfvar_model_objective_trace(const nmfvar_model* m, double* out, size_t capacity, size_t* length) {
    NMFVAR_REQUIRE(m && length, "null argument");
    const auto& tr = m->stored.model.diagnostics.objective_trace;
    *length = tr.size();
    if (out) std::copy_n(tr.begin(), std::min(capacity, tr.size()), out);
    return NMFVAR_OK;
}

nmfvar_status nmfvar_model_forecast(const nmfvar_model* m, size_t horizon, nmfvar_forecast** out) {
    NMFVAR_REQUIRE(m && out, "null argument");
    *out = nullptr;
    return guarded([&] { *out = new nmfvar_forecast{nmfvar::app::run_forecast(m->stored, horizon)}; });
}

size_t nmfvar_forecast_horizon(const nmfvar_forecast* f) { return f ? f->result.values.cols() : 0; }
size_t nmfvar_forecast_variables(const nmfvar_forecast* f) { return f ? f->result.values.rows() : 0; }
int nmfvar_forecast_smoothed_scale(const nmfvar_forecast* f) { return f && f->result.smoothed_scale ? 1 : 0; }

nmfvar_status nmfvar_forecast_values(const nmfvar_forecast* f, double* out, size_t capacity) {
    NMFVAR_REQUIRE(f && out, "null argument");
    const auto& v = f->result.values;
    NMFVAR_REQUIRE(capacity >= v.size(), "buffer too small for the forecast");
    std::copy(v.data(), v.data() + v.size(), out);
    return NMFVAR_OK;
}

nmfvar_status nmfvar_forecast_write_csv(const nmfvar_forecast* f, const char* path) {
    NMFVAR_REQUIRE(f && path, "null argument");
    return guarded([&] {
        const std::filesystem::path p(path);
        nmfvar::app::write_files(p.has_parent_path() ? p.parent_path() : std::filesystem::path("."),
                                 {{p.filename().string(),
                                   nmfvar::io::format_csv(nmfvar::app::forecast_table(f->result))}});
    });
}

void nmfvar_forecast_free(nmfvar_forecast* f) { delete f; }

nmfvar_status nmfvar_cross_validate(const nmfvar_frame* frame, const nmfvar_cv_config* cfg, nmfvar_cv_report** out) {
    NMFVAR_REQUIRE(frame && cfg && out, "null argument");
    NMFVAR_REQUIRE(!cfg->rank_count || cfg->ranks, "ranks is null");
    NMFVAR_REQUIRE(!cfg->lag_count || cfg->lags, "lags is null");
    *out = nullptr;
    return guarded([&] {
        auto rc = to_run_config(cfg->fit);
        if (cfg->ranks) rc.q_candidates.assign(cfg->ranks, cfg->ranks + cfg->rank_count);
        if (cfg->lags) rc.d_candidates.assign(cfg->lags, cfg->lags + cfg->lag_count);
        rc.folds = cfg->folds;
        rc.fold_mode = cfg->fold_mode == NMFVAR_FOLDS_BLOCKS ? nmfvar::select::FoldMode::blocks
                                                              : nmfvar::select::FoldMode::random;
        rc.threads = cfg->threads;
        auto r = std::make_unique<nmfvar_cv_report>();
        r->report = nmfvar::app::run_cv(frame->frame, rc);
        r->table = nmfvar::app::cv_table(r->report);
        *out = r.release();
    });
}

size_t nmfvar_cv_report_candidate_count(const nmfvar_cv_report* r) { return r ? r->report.candidates.size() : 0; }
size_t nmfvar_cv_report_chosen(const nmfvar_cv_report* r) { return r ? r->report.chosen : 0; }

nmfvar_status nmfvar_cv_report_candidate(const nmfvar_cv_report* r, size_t index, size_t* rank, size_t* lag,
                                         double* mean_sse) {
    NMFVAR_REQUIRE(r, "null argument");
    NMFVAR_REQUIRE(index < r->report.candidates.size(), "candidate index out of range");
    const auto& c = r->report.candidates[index];
    if (rank) *rank = c.rank;
    if (lag) *lag = c.lag;
    if (mean_sse) *mean_sse = c.mean_sse;
    return NMFVAR_OK;
}

const char* nmfvar_cv_report_table(const nmfvar_cv_report* r) { return r ? r->table.c_str() : ""; }

nmfvar_status nmfvar_cv_report_write_json(const nmfvar_cv_report* r, const char* path) {
    NMFVAR_REQUIRE(r && path, "null argument");
    return guarded([&] {
        const std::filesystem::path p(path);
        nmfvar::app::write_files(p.has_parent_path() ? p.parent_path() : std::filesystem::path("."),
                                 {{p.filename().string(), nmfvar::select::to_json(r->report).dump(2) + "\n"}});
    });
}

void nmfvar_cv_report_free(nmfvar_cv_report* r) { delete r; }

nmfvar_status nmfvar_parameter_reduction(uint64_t p, uint64_t q, uint64_t d, uint64_t* nmfvar_params,
                                         uint64_t* var_params, double* ratio) {
    return guarded([&] {
        const auto c = nmfvar::var::parameter_reduction(p, q, d);
        if (nmfvar_params) *nmfvar_params = c.nmfvar_params;
        if (var_params) *var_params = c.var_params;
        if (ratio) *ratio = c.ratio;
    });
}

} // extern "C"
