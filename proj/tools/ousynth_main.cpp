// Command-line pipeline over the ousynth library:
//   estimate  fit the market model from a wide price CSV
//   simulate  generate synthetic ETF scenario panels from a saved model
//   fit-apt   fit per-stock factor regressions against the historical panel
//   generate  map one ETF scenario through the factor model to stock prices
//   evaluate  compare a synthetic panel against a real one (KS/KDE/moments)
//   pipeline  estimate -> simulate -> fit-apt -> generate -> evaluate
//
// Every generation run writes a run manifest next to its outputs. All
// randomness flows from one seed (flag, or OUSYNTH_SEED) through the
// documented derive_seed streams; rerunning a command reproduces its
// output files byte for byte (timestamps live only in the manifest).

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ousynth/apt_model.hpp"
#include "ousynth/csv_io.hpp"
#include "ousynth/errors.hpp"
#include "ousynth/market_pipeline.hpp"
#include "ousynth/model_io.hpp"
#include "ousynth/ou_model.hpp"
#include "ousynth/rng.hpp"
#include "ousynth/stats_eval.hpp"
#include "ousynth/timeseries.hpp"
#include "ousynth/version.hpp"

namespace fs = std::filesystem;
using namespace ousynth;

namespace {

struct CommonFlags {
    std::string policy = "error";
    std::string date_column = "date";
    std::string anchor_date;
};

std::optional<int64_t> parse_anchor(const std::string& text) {
    if (text.empty()) return std::nullopt;
    if (text.find('-') == std::string::npos)  // step index for generated panels
        return std::stoll(text);
    return parse_iso_date(text);
}

std::string scenario_name(int k) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "scenario_%03d.csv", k);
    return buf;
}

std::string stocks_name(int k) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "stocks_%03d.csv", k);
    return buf;
}

std::string trace_name(int k) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "trace_%03d", k);
    return buf;
}

// per-trace stream tag for the stock-generation stage ("STOCK" in ASCII)
constexpr uint64_t kStockStreamTag = 0x53544F434BULL;

struct FitAptInputs {
    PricePanel etf_panel;   // market first, joint date axis
    FactorPanel factors;
    std::vector<ReturnSeries> stock_returns;
};

// joins the ETF and stock files on their common dates and builds the
// historical factor panel plus per-stock return series
FitAptInputs prepare_fit_apt(const std::string& etf_csv, const std::string& stocks_csv,
                             const std::vector<std::string>& etf_ids, const std::string& market_id,
                             MissingPolicy policy, const std::string& date_column) {
    IngestResult etfs = read_price_csv(etf_csv, policy, date_column);
    IngestResult stocks = read_price_csv(stocks_csv, policy, date_column);

    std::vector<PriceSeries> all = etfs.series;
    all.insert(all.end(), stocks.series.begin(), stocks.series.end());
    const PricePanel joint = align_panel(all, etfs.axis);

    std::vector<std::string> ordered;
    ordered.push_back(market_id);
    for (const auto& id : etf_ids)
        if (id != market_id) ordered.push_back(id);

    FitAptInputs out;
    out.etf_panel = select_columns(joint, ordered);
    out.factors = build_factor_panel(out.etf_panel, 0);
    for (const auto& s : stocks.series) {
        const int j = joint.column_index(s.id);
        out.stock_returns.push_back(returns_from_prices(panel_column(joint, j)));
    }
    return out;
}

std::vector<AptCoefficients> fit_all_stocks(const std::vector<ReturnSeries>& returns,
                                            const FactorPanel& factors) {
    std::vector<AptCoefficients> coeffs;
    coeffs.reserve(returns.size());
    for (const auto& r : returns) coeffs.push_back(fit_apt(r, factors));
    return coeffs;
}

int run_estimate(const std::string& input, const std::string& market, const std::string& out,
                 const CommonFlags& flags) {
    IngestConfig config;
    config.path = input;
    config.policy = parse_missing_policy(flags.policy);
    config.date_column = flags.date_column;
    config.market_ticker = market;
    config.anchor_date = parse_anchor(flags.anchor_date);

    const IngestResult ingested = ingest_csv(config);
    const PricePanel training = build_training_panel(ingested.series, market, 1.0, config.anchor_date);
    const MarketModel model = fit_market(training, market);
    save_market_model(model, out);
    std::cout << "fitted " << model.dim() << "-dimensional market model on " << training.rows()
              << " rows -> " << out << "\n";
    return 0;
}

int run_simulate(const std::string& model_path, int steps, int traces, uint64_t seed,
                 const std::string& out_dir, bool anchor_start) {
    MarketModel model = load_market_model(model_path);
    if (anchor_start) model = from_anchor(model);

    const auto panels = generate_etf_scenarios(model, steps, traces, seed);
    fs::create_directories(out_dir);
    for (int k = 0; k < traces; ++k)
        write_panel_csv(panels[static_cast<size_t>(k)], fs::path(out_dir) / scenario_name(k));

    RunManifest manifest;
    manifest.command = "simulate";
    manifest.seed = seed;
    manifest.steps = steps;
    manifest.traces = traces;
    manifest.inputs.emplace_back(model_path, fnv1a64_file(model_path));
    write_manifest(manifest, fs::path(out_dir) / "manifest.json");
    std::cout << "wrote " << traces << " scenario panels (" << (steps + 1) << "x" << model.dim()
              << ") to " << out_dir << "\n";
    return 0;
}

int run_fit_apt(const std::string& stocks_csv, const std::string& etf_model,
                const std::string& input_csv, const std::string& out, const CommonFlags& flags) {
    const MarketModel model = load_market_model(etf_model);
    const std::string market_id = model.column_ids[static_cast<size_t>(model.market_column)];
    const FitAptInputs inputs =
        prepare_fit_apt(input_csv, stocks_csv, model.column_ids, market_id,
                        parse_missing_policy(flags.policy), flags.date_column);

    AptModelFile apt;
    apt.factor_ids = inputs.factors.ids;
    apt.stocks = fit_all_stocks(inputs.stock_returns, inputs.factors);
    save_apt_model(apt, out);
    std::cout << "fitted " << apt.stocks.size() << " stocks on " << inputs.factors.rows()
              << " factor rows (K=" << inputs.factors.factors() << ") -> " << out << "\n";
    return 0;
}

int run_generate(const std::string& apt_path, const std::string& scenario_csv,
                 const std::string& noise, uint64_t seed, const std::string& out,
                 const CommonFlags& flags) {
    const AptModelFile apt = load_apt_model(apt_path);
    const PricePanel scenario =
        panel_from_csv(scenario_csv, parse_missing_policy(flags.policy), flags.date_column);

    const int market = scenario.column_index(apt.factor_ids.front());
    if (market < 0)
        throw DomainError("scenario '" + scenario_csv + "' lacks the market column '" +
                          apt.factor_ids.front() + "'");
    const FactorPanel factors = build_factor_panel(scenario, market);
    if (factors.ids != apt.factor_ids) {
        std::string got;
        for (const auto& id : factors.ids) got += (got.empty() ? "" : ",") + id;
        throw DomainError("scenario factor columns [" + got +
                          "] do not match the fitted factor set");
    }

    const PricePanel universe =
        generate_stock_universe(apt.stocks, factors, parse_noise_mode(noise), seed);
    write_panel_csv(universe, out);

    RunManifest manifest;
    manifest.command = "generate";
    manifest.seed = seed;
    manifest.steps = factors.rows();
    manifest.traces = 1;
    manifest.noise_mode = noise;
    manifest.inputs.emplace_back(apt_path, fnv1a64_file(apt_path));
    manifest.inputs.emplace_back(scenario_csv, fnv1a64_file(scenario_csv));
    write_manifest(manifest, out + ".manifest.json");
    std::cout << "wrote " << universe.rows() << "x" << universe.cols() << " stock panel to " << out
              << "\n";
    return 0;
}

int run_evaluate(const std::string& real_csv, const std::string& synth_csv, double alpha,
                 const std::string& out_dir, const std::string& market,
                 const CommonFlags& flags) {
    const MissingPolicy policy = parse_missing_policy(flags.policy);
    const PricePanel real = panel_from_csv(real_csv, policy, flags.date_column);
    const PricePanel synth = panel_from_csv(synth_csv, policy, flags.date_column);
    const EvalReport report = evaluate_scenario(real, synth, alpha, market);
    write_eval_report(report, out_dir);
    std::cout << "pass_count " << report.pass_count << "/" << report.series.size() << " at alpha="
              << alpha << "; report in " << out_dir << "\n";
    return 0;
}

int run_pipeline(const std::string& input, const std::string& stocks_csv,
                 const std::string& market, int steps, int traces, uint64_t seed,
                 const std::string& noise, double alpha, const std::string& out_dir,
                 bool anchor_start, const CommonFlags& flags) {
    const MissingPolicy policy = parse_missing_policy(flags.policy);
    const auto anchor_date = parse_anchor(flags.anchor_date);
    const fs::path root(out_dir);
    fs::create_directories(root);

    // market model on the training panel
    IngestConfig config;
    config.path = input;
    config.policy = policy;
    config.date_column = flags.date_column;
    config.market_ticker = market;
    config.anchor_date = anchor_date;
    const IngestResult ingested = ingest_csv(config);
    const PricePanel training = build_training_panel(ingested.series, market, 1.0, anchor_date);
    MarketModel model = fit_market(training, market);
    save_market_model(model, root / "model.json");
    if (anchor_start) model = from_anchor(model);

    // synthetic ETF scenarios
    const auto scenarios = generate_etf_scenarios(model, steps, traces, seed);
    for (int k = 0; k < traces; ++k)
        write_panel_csv(scenarios[static_cast<size_t>(k)], root / "scenarios" / scenario_name(k));

    // factor regressions on the historical panel
    const FitAptInputs apt_inputs =
        prepare_fit_apt(input, stocks_csv, model.column_ids, market, policy, flags.date_column);
    AptModelFile apt;
    apt.factor_ids = apt_inputs.factors.ids;
    apt.stocks = fit_all_stocks(apt_inputs.stock_returns, apt_inputs.factors);
    save_apt_model(apt, root / "apt.json");

    // per-trace stock universes and fidelity reports
    const PricePanel real_panel = normalized_panel(ingested.series, market, 1.0, anchor_date);
    const NoiseMode noise_mode = parse_noise_mode(noise);
    int pass_total = 0;
    for (int k = 0; k < traces; ++k) {
        const auto& scenario = scenarios[static_cast<size_t>(k)];
        const FactorPanel factors = build_factor_panel(scenario, 0);
        const uint64_t trace_seed = derive_seed(seed, static_cast<uint64_t>(k));
        const PricePanel universe = generate_stock_universe(
            apt.stocks, factors, noise_mode, derive_seed(trace_seed, kStockStreamTag));
        write_panel_csv(universe, root / "stocks" / stocks_name(k));

        const EvalReport report = evaluate_scenario(real_panel, scenario, alpha, market);
        write_eval_report(report, root / "eval" / trace_name(k));
        pass_total += report.pass_count;
        std::cout << trace_name(k) << ": pass_count " << report.pass_count << "/"
                  << report.series.size() << "\n";
    }

    RunManifest manifest;
    manifest.command = "pipeline";
    manifest.seed = seed;
    manifest.steps = steps;
    manifest.traces = traces;
    manifest.noise_mode = noise;
    manifest.inputs.emplace_back(input, fnv1a64_file(input));
    manifest.inputs.emplace_back(stocks_csv, fnv1a64_file(stocks_csv));
    write_manifest(manifest, root / "manifest.json");
    std::cout << "pipeline done: " << traces << " traces, mean pass_count "
              << (static_cast<double>(pass_total) / traces) << "/" << real_panel.cols() << "\n";
    return 0;
}

void add_common(CLI::App* cmd, CommonFlags& flags) {
    cmd->add_option("--policy", flags.policy, "missing-data policy: error|forward_fill")
        ->default_val("error");
    cmd->add_option("--date-col", flags.date_column, "date column header")->default_val("date");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"synthetic market generator: multivariate mean-reverting ETF scenarios mapped "
                 "through per-stock factor models"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);

    CommonFlags flags;
    uint64_t seed = 0;
    bool anchor_start = false;

    // estimate
    std::string input, market, out;
    auto* estimate = app.add_subcommand("estimate", "fit a market model from a price CSV");
    estimate->add_option("--input", input, "wide price CSV")->required();
    estimate->add_option("--market", market, "market index ticker (e.g. SPY)")->required();
    estimate->add_option("--out", out, "output model JSON")->required();
    estimate->add_option("--anchor-date", flags.anchor_date, "normalization anchor date (YYYY-MM-DD)");
    add_common(estimate, flags);

    // simulate
    std::string model_path, out_dir;
    int steps = 0, traces = 1;
    auto* simulate = app.add_subcommand("simulate", "generate synthetic ETF scenarios");
    simulate->add_option("--model", model_path, "fitted model JSON")->required();
    simulate->add_option("--steps", steps, "steps per scenario")->required();
    simulate->add_option("--traces", traces, "number of scenarios")->default_val(1);
    simulate->add_option("--seed", seed, "base seed")->envname("OUSYNTH_SEED")->default_val(0);
    simulate->add_option("--out-dir", out_dir, "output directory")->required();
    simulate->add_flag("--from-anchor", anchor_start,
                       "start scenarios from the anchor state instead of the last observation");

    // fit-apt
    std::string stocks_csv, etf_model, apt_out;
    auto* fit_apt_cmd = app.add_subcommand("fit-apt", "fit per-stock factor regressions");
    fit_apt_cmd->add_option("--stocks", stocks_csv, "wide stock price CSV")->required();
    fit_apt_cmd->add_option("--etf-model", etf_model, "fitted market model JSON")->required();
    fit_apt_cmd->add_option("--input", input, "wide ETF price CSV (historical factors)")->required();
    fit_apt_cmd->add_option("--out", apt_out, "output coefficients JSON")->required();
    add_common(fit_apt_cmd, flags);

    // generate
    std::string apt_path, scenario_csv, noise = "gaussian", gen_out;
    auto* generate = app.add_subcommand("generate", "generate stock prices from an ETF scenario");
    generate->add_option("--apt", apt_path, "fitted coefficients JSON")->required();
    generate->add_option("--etf-scenario", scenario_csv, "scenario panel CSV")->required();
    generate->add_option("--noise", noise, "idiosyncratic noise: gaussian|bootstrap|none")
        ->default_val("gaussian");
    generate->add_option("--seed", seed, "base seed")->envname("OUSYNTH_SEED")->default_val(0);
    generate->add_option("--out", gen_out, "output stock panel CSV")->required();
    add_common(generate, flags);

    // evaluate
    std::string real_csv, synth_csv, eval_market;
    double alpha = 0.05;
    auto* evaluate = app.add_subcommand("evaluate", "KS/KDE fidelity report for two panels");
    evaluate->add_option("--real", real_csv, "real panel CSV")->required();
    evaluate->add_option("--synthetic", synth_csv, "synthetic panel CSV")->required();
    evaluate->add_option("--alpha", alpha, "KS significance level")->default_val(0.05);
    evaluate->add_option("--market", eval_market, "market column id (default: first column)");
    evaluate->add_option("--out", out_dir, "report directory")->required();
    add_common(evaluate, flags);

    // pipeline
    auto* pipeline = app.add_subcommand("pipeline", "estimate -> simulate -> fit-apt -> generate -> evaluate");
    pipeline->add_option("--input", input, "wide ETF price CSV")->required();
    pipeline->add_option("--stocks", stocks_csv, "wide stock price CSV")->required();
    pipeline->add_option("--market", market, "market index ticker")->required();
    pipeline->add_option("--steps", steps, "steps per scenario")->required();
    pipeline->add_option("--traces", traces, "number of scenarios")->default_val(1);
    pipeline->add_option("--seed", seed, "base seed")->envname("OUSYNTH_SEED")->default_val(0);
    pipeline->add_option("--noise", noise, "idiosyncratic noise: gaussian|bootstrap|none")
        ->default_val("gaussian");
    pipeline->add_option("--alpha", alpha, "KS significance level")->default_val(0.05);
    pipeline->add_option("--out-dir", out_dir, "output directory")->required();
    pipeline->add_option("--anchor-date", flags.anchor_date, "normalization anchor date");
    pipeline->add_flag("--from-anchor", anchor_start, "start scenarios from the anchor state");
    add_common(pipeline, flags);

    CLI11_PARSE(app, argc, argv);

    try {
        if (estimate->parsed()) return run_estimate(input, market, out, flags);
        if (simulate->parsed()) return run_simulate(model_path, steps, traces, seed, out_dir, anchor_start);
        if (fit_apt_cmd->parsed()) return run_fit_apt(stocks_csv, etf_model, input, apt_out, flags);
        if (generate->parsed()) return run_generate(apt_path, scenario_csv, noise, seed, gen_out, flags);
        if (evaluate->parsed()) return run_evaluate(real_csv, synth_csv, alpha, out_dir, eval_market, flags);
        if (pipeline->parsed())
            return run_pipeline(input, stocks_csv, market, steps, traces, seed, noise, alpha,
                                out_dir, anchor_start, flags);
    } catch (const Error& e) {
        std::cerr << "error: " << e.kind() << ": " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: internal: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
