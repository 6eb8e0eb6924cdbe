// nmfvar: fit, cross-validate and forecast non-negative factor VAR models.
#include <CLI11.hpp>

#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "nmfvar/nmfvar.h"

namespace {

constexpr int exit_ok = 0;
constexpr int exit_input = 2;
constexpr int exit_config = 3;
constexpr int exit_numeric = 4;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

int exit_code(nmfvar_status s) {
    switch (s) {
    case NMFVAR_OK: return exit_ok;
    case NMFVAR_INPUT_ERROR: return exit_input;
    case NMFVAR_CONFIG_ERROR:
    case NMFVAR_INVALID_ARGUMENT: return exit_config;
    default: return exit_numeric;
    }
}

// Thrown through main's handler so every failure leaves with a known code.
struct Failure {
    int code;
};

void check(nmfvar_status s) {
    if (s != NMFVAR_OK) {
        std::cerr << "error: " << nmfvar_last_error() << '\n';
        throw Failure{exit_code(s)};
    }
}

template <class T, void (*Free)(T*)>
struct Deleter {
    void operator()(T* p) const { Free(p); }
};
using Frame = std::unique_ptr<nmfvar_frame, Deleter<nmfvar_frame, nmfvar_frame_free>>;
using Model = std::unique_ptr<nmfvar_model, Deleter<nmfvar_model, nmfvar_model_free>>;
using Forecast = std::unique_ptr<nmfvar_forecast, Deleter<nmfvar_forecast, nmfvar_forecast_free>>;
using Report = std::unique_ptr<nmfvar_cv_report, Deleter<nmfvar_cv_report, nmfvar_cv_report_free>>;

std::uint64_t parse_seed(const std::string& text, const char* what) {
    std::uint64_t v = 0;
    auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || p != text.data() + text.size() || text.empty()) {
        throw UsageError(std::string(what) + " must be a non-negative integer, got '" + text + "'");
    }
    return v;
}

std::size_t parse_size(const std::string& text) {
    std::size_t v = 0;
    auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || p != text.data() + text.size() || text.empty()) {
        throw UsageError("'" + text + "' is not a non-negative integer");
    }
    return v;
}

// "1,2,5", "1-14" or a mix such as "1-3,7".
std::vector<std::size_t> parse_candidates(const std::string& text) {
    std::vector<std::size_t> out;
    std::size_t start = 0;
    while (start <= text.size()) {
        auto end = text.find(',', start);
        if (end == std::string::npos) end = text.size();
        const std::string item = text.substr(start, end - start);
        const auto dash = item.find('-');
        if (dash == std::string::npos) {
            out.push_back(parse_size(item));
        } else {
            const auto lo = parse_size(item.substr(0, dash));
            const auto hi = parse_size(item.substr(dash + 1));
            if (hi < lo) throw UsageError("empty candidate range '" + item + "'");
            for (auto v = lo; v <= hi; ++v) out.push_back(v);
        }
        start = end + 1;
    }
    return out;
}

std::vector<std::string> split_names(const std::string& text) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= text.size()) {
        auto end = text.find(',', start);
        if (end == std::string::npos) end = text.size();
        out.push_back(text.substr(start, end - start));
        start = end + 1;
    }
    return out;
}

struct Options {
    std::string input;
    std::string output_dir = ".";
    std::optional<std::size_t> rank;
    std::size_t lags = 1;
    std::optional<double> kernel_beta;
    bool identity = false;
    std::string transform;
    std::optional<std::string> seed;
    int max_iter = 0;
    double tol = 0.0;
    std::string init = "kmeans";
    std::string fix_basis;
    std::string basis_names;
    std::size_t folds = 10;
    std::string fold_mode = "random";
    std::string d_candidates;
    std::string q_candidates;
    unsigned threads = 0;
    std::string model;
    std::size_t horizon = 1;
};

// Holds strings referenced by the C config.
struct FitConfig {
    nmfvar_fit_config cfg{};
    std::vector<std::string> names;
    std::vector<const char*> name_ptrs;
};

void fill_fit_config(const Options& o, FitConfig& fc) {
    nmfvar_fit_config_init(&fc.cfg);
    auto& c = fc.cfg;
    if (o.rank) {
        if (*o.rank == 0) throw UsageError("--rank must be at least 1");
        c.rank = *o.rank;
    }
    c.lags = o.lags;
    if (o.kernel_beta && o.identity) throw UsageError("--kernel-beta and --identity are mutually exclusive");
    if (o.kernel_beta) {
        c.covariates = NMFVAR_COVARIATES_KERNEL;
        c.kernel_beta = *o.kernel_beta;
    } else if (o.identity) {
        c.covariates = NMFVAR_COVARIATES_IDENTITY;
    }
    c.transform = o.transform.c_str();

    c.seed = nmfvar_default_seed();
    if (const char* env = std::getenv("NMFVAR_SEED"); env && *env) c.seed = parse_seed(env, "NMFVAR_SEED");
    if (o.seed) c.seed = parse_seed(*o.seed, "--seed");

    if (o.max_iter != 0) c.max_iter = o.max_iter;
    if (o.tol != 0.0) c.tolerance = o.tol;
    if (o.init == "kmeans") c.init = NMFVAR_INIT_KMEANS;
    else if (o.init == "random") c.init = NMFVAR_INIT_UNIFORM_RANDOM;
    else throw UsageError("--init must be kmeans or random");
    if (!o.fix_basis.empty()) c.fixed_basis = o.fix_basis.c_str();
    if (!o.basis_names.empty()) {
        fc.names = split_names(o.basis_names);
        for (const auto& n : fc.names) fc.name_ptrs.push_back(n.c_str());
        c.basis_names = fc.name_ptrs.data();
        c.basis_name_count = fc.name_ptrs.size();
    }
}

void require_input(const Options& o) {
    if (o.input.empty()) throw UsageError("--input is required");
}

int run_fit(const Options& o) {
    require_input(o);
    FitConfig fc;
    fill_fit_config(o, fc);
    nmfvar_frame* f = nullptr;
    check(nmfvar_frame_read_csv(o.input.c_str(), &f));
    Frame frame(f);
    nmfvar_model* m = nullptr;
    check(nmfvar_fit(frame.get(), &fc.cfg, &m));
    Model model(m);
    check(nmfvar_model_write_artifacts(model.get(), o.output_dir.c_str()));

    std::printf("R^2 %.6f after %d iterations\n", nmfvar_model_r_squared(model.get()),
                nmfvar_model_iterations(model.get()));
    if (fc.cfg.covariates == NMFVAR_COVARIATES_LAGS) {
        double rho = 0.0;
        int stationary = 0;
        check(nmfvar_model_spectral_radius(model.get(), &rho, &stationary));
        std::printf("spectral radius %.6f (%s)\n", rho, stationary ? "stationary" : "not stationary");
    }
    return exit_ok;
}

int run_cv(const Options& o) {
    require_input(o);
    nmfvar_cv_config cfg;
    nmfvar_cv_config_init(&cfg);
    FitConfig fc;
    fill_fit_config(o, fc);
    cfg.fit = fc.cfg;
    std::vector<std::size_t> ranks, lags;
    if (!o.q_candidates.empty()) ranks = parse_candidates(o.q_candidates);
    if (!o.d_candidates.empty()) lags = parse_candidates(o.d_candidates);
    if (!ranks.empty()) {
        cfg.ranks = ranks.data();
        cfg.rank_count = ranks.size();
    }
    if (!lags.empty()) {
        cfg.lags = lags.data();
        cfg.lag_count = lags.size();
    }
    cfg.folds = o.folds;
    if (o.fold_mode == "random") cfg.fold_mode = NMFVAR_FOLDS_RANDOM;
    else if (o.fold_mode == "blocks") cfg.fold_mode = NMFVAR_FOLDS_BLOCKS;
    else throw UsageError("--fold-mode must be random or blocks");
    cfg.threads = o.threads;

    nmfvar_frame* f = nullptr;
    check(nmfvar_frame_read_csv(o.input.c_str(), &f));
    Frame frame(f);
    nmfvar_cv_report* r = nullptr;
    check(nmfvar_cross_validate(frame.get(), &cfg, &r));
    Report report(r);
    const auto path = (std::filesystem::path(o.output_dir) / "cv_report.json").string();
    check(nmfvar_cv_report_write_json(report.get(), path.c_str()));
    std::fputs(nmfvar_cv_report_table(report.get()), stdout);
    return exit_ok;
}

int run_forecast(const Options& o) {
    if (o.model.empty()) throw UsageError("--model is required");
    if (o.horizon < 1) throw UsageError("--horizon must be at least 1");
    nmfvar_model* m = nullptr;
    check(nmfvar_model_load(o.model.c_str(), &m));
    Model model(m);
    nmfvar_forecast* fc = nullptr;
    check(nmfvar_model_forecast(model.get(), o.horizon, &fc));
    Forecast forecast(fc);
    const auto path = (std::filesystem::path(o.output_dir) / "forecast.csv").string();
    check(nmfvar_forecast_write_csv(forecast.get(), path.c_str()));
    if (nmfvar_forecast_smoothed_scale(forecast.get())) {
        std::printf("note: the pipeline smooths the data; forecasts are on the smoothed scale\n");
    }
    std::printf("wrote %s\n", path.c_str());
    return exit_ok;
}

void add_fit_flags(CLI::App* cmd, Options& o) {
    cmd->add_option("--input", o.input, "CSV with a time column followed by one column per variable");
    cmd->add_option("--output-dir", o.output_dir, "Directory for output files");
    cmd->add_option("-q,--rank", o.rank, "Number of basis vectors Q");
    cmd->add_option("-d,--lags", o.lags, "Lag order D");
    cmd->add_option("--kernel-beta", o.kernel_beta, "Use Gaussian kernel covariates with this bandwidth");
    cmd->add_flag("--identity", o.identity, "Use identity covariates (plain NMF)");
    cmd->add_option("--transform", o.transform, "Preprocessing steps, e.g. log1p,ma7,diff,minmax");
    cmd->add_option("--seed", o.seed, "Random seed (default 20240601, or NMFVAR_SEED)");
    cmd->add_option("--max-iter", o.max_iter, "Maximum multiplicative update iterations");
    cmd->add_option("--tol", o.tol, "Relative objective decrease that stops the iterations");
    cmd->add_option("--init", o.init, "Basis initialization: kmeans or random");
    cmd->add_option("--fix-basis", o.fix_basis, "'scalar' for a single variable, or a CSV basis (rows = variables)");
    cmd->add_option("--basis-names", o.basis_names, "Comma-separated basis names");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Non-negative matrix factorization with VAR covariates"};
    app.require_subcommand(1);
    Options o;

    auto* fit = app.add_subcommand("fit", "Fit a model and write its artifacts");
    add_fit_flags(fit, o);

    auto* cv = app.add_subcommand("cv", "Cross-validate candidate ranks and lag orders");
    add_fit_flags(cv, o);
    cv->add_option("--folds", o.folds, "Number of folds");
    cv->add_option("--fold-mode", o.fold_mode, "random or blocks");
    cv->add_option("--d-candidates", o.d_candidates, "Lag orders, e.g. 1-14 or 1,3,7");
    cv->add_option("--q-candidates", o.q_candidates, "Ranks, e.g. 2-5");
    cv->add_option("--threads", o.threads, "Worker threads (0: all cores)");

    auto* fc = app.add_subcommand("forecast", "Forecast from a fitted model");
    fc->add_option("--model", o.model, "model.json written by fit");
    fc->add_option("--horizon", o.horizon, "Number of steps ahead");
    fc->add_option("--output-dir", o.output_dir, "Directory for forecast.csv");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e) == 0 ? exit_ok : exit_config;
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e) == 0 ? exit_ok : exit_config;
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_config;
    }

    try {
        if (fit->parsed()) return run_fit(o);
        if (cv->parsed()) return run_cv(o);
        return run_forecast(o);
    } catch (const Failure& f) {
        return f.code;
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_config;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_numeric;
    }
}
