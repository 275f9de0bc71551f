// grouper - command-line pipeline for insurance portfolio compression:
// generate portfolios, value them exactly, train policy-value
// surrogates, optimize model points, and emit backtest reports.

#include "grouper/backtest.hpp"
#include "grouper/dataset.hpp"
#include "grouper/errors.hpp"
#include "grouper/evaluation.hpp"
#include "grouper/kmeans.hpp"
#include "grouper/model_points.hpp"
#include "grouper/parallel.hpp"
#include "grouper/policy_values.hpp"
#include "grouper/portfolio_io.hpp"
#include "grouper/rng.hpp"
#include "grouper/surrogate.hpp"
#include "grouper/synth.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;
constexpr int kExitRejected = 3;

struct GlobalOpts {
    std::string config_path;
    std::uint64_t seed = 1;
    int threads = 0;
    std::string out_dir = ".";
    json config; // loaded from config_path, may be null
};

// Fill an option's target from the config document when the flag was
// not given on the command line. Lookup order: config[sub][key], then
// config[key].
template <typename T>
void from_config(const GlobalOpts& g, const std::string& sub, CLI::Option* opt,
                 const char* key, T& var) {
    if (!opt || opt->count() > 0 || g.config.is_null()) return;
    const json* found = nullptr;
    if (g.config.contains(sub) && g.config[sub].contains(key))
        found = &g.config[sub][key];
    else if (g.config.contains(key))
        found = &g.config[key];
    if (found) var = found->get<T>();
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream f(path);
    if (!f) throw grouper::IoError("cannot open for writing", path);
    f << text;
    if (!f) throw grouper::IoError("write failed", path);
}

std::string out_path(const GlobalOpts& g, const std::string& name) {
    fs::create_directories(g.out_dir);
    return (fs::path(g.out_dir) / name).string();
}

void print_feature_summary(const grouper::Portfolio& p) {
    const auto& specs = grouper::feature_specs(p.line);
    std::printf("portfolio: line=%s entries=%zu contracts=%lld\n",
                grouper::to_string(p.line).c_str(), p.entries.size(),
                static_cast<long long>(p.total_count()));
    for (int f = 0; f < 5; ++f) {
        double lo = p.entries.front().contract.x[static_cast<std::size_t>(f)];
        double hi = lo;
        for (const auto& e : p.entries) {
            lo = std::min(lo, e.contract.x[static_cast<std::size_t>(f)]);
            hi = std::max(hi, e.contract.x[static_cast<std::size_t>(f)]);
        }
        std::printf("  %-17s [%.6g, %.6g]\n", specs[static_cast<std::size_t>(f)].name.c_str(),
                    lo, hi);
    }
}

// ---------------------------------------------------------------- generate

int cmd_generate(const GlobalOpts& g, const std::string& line_tag, std::int64_t n,
                 std::int64_t skip, const std::string& out) {
    const grouper::ProductLine line = grouper::product_line_from_string(line_tag);
    const grouper::Portfolio p = line == grouper::ProductLine::TermLife
                                     ? grouper::synth_term_life(n, skip)
                                     : grouper::synth_dc(n, skip);
    grouper::write_portfolio_csv(out, p);
    print_feature_summary(p);
    std::printf("wrote %s\n", out.c_str());
    return kExitOk;
}

// ------------------------------------------------------------------- value

int cmd_value(const GlobalOpts& g, const std::string& in,
              const std::string& assumptions_path, const std::string& out,
              bool per_contract) {
    const grouper::Portfolio p = grouper::read_portfolio_csv(in);
    grouper::ValuationAssumptions a;
    if (!assumptions_path.empty()) a = grouper::load_assumptions(assumptions_path);

    if (per_contract) {
        std::ofstream f(out);
        if (!f) throw grouper::IoError("cannot open for writing", out);
        f << "contract,t,value\n";
        for (std::size_t i = 0; i < p.entries.size(); ++i) {
            const auto y = grouper::policy_values(p.entries[i].contract, a);
            for (std::size_t t = 0; t < y.size(); ++t)
                f << i << ',' << t << ',' << grouper::format_double(y[t]) << '\n';
        }
    } else {
        grouper::write_path_csv(out, grouper::value_portfolio(p, a));
    }
    std::printf("wrote %s\n", out.c_str());
    return kExitOk;
}

// ------------------------------------------------------------------- train

int cmd_train(const GlobalOpts& g, const std::string& in, int members,
              const std::string& loss_mix_tag, grouper::TrainConfig cfg) {
    const grouper::Portfolio p = grouper::read_portfolio_csv(in);
    grouper::ValuationAssumptions a;
    const grouper::Dataset data = grouper::make_dataset(p, a);
    const grouper::DataSplit parts = grouper::split(data, cfg.seed);

    const auto mix = grouper::loss_mix_from_string(loss_mix_tag);
    const grouper::EnsembleTrainResult trained =
        grouper::train_ensemble(parts, cfg, members, mix);

    grouper::save_ensemble(out_path(g, "model.json"), trained.ensemble);
    for (std::size_t k = 0; k < trained.member_results.size(); ++k) {
        std::ofstream f(out_path(g, "train_log_" + std::to_string(k) + ".csv"));
        f << "epoch,train_loss,val_loss\n";
        for (const auto& row : trained.member_results[k].log)
            f << row.epoch << ',' << grouper::format_double(row.train_loss) << ','
              << grouper::format_double(row.val_loss) << '\n';
    }

    const grouper::EvalReport report = grouper::evaluate(trained.ensemble, parts.test);
    write_text(out_path(g, "eval.json"), grouper::eval_report_to_json(report));
    grouper::write_eval_report_csv(out_path(g, "eval.csv"), report);

    std::printf("trained %d member(s); test mean_wre=%.3g pc99|wre|=%.3g\n", members,
                report.mean_wre, report.pc99_abs_wre);
    std::printf("wrote %s\n", out_path(g, "model.json").c_str());
    return kExitOk;
}

// ------------------------------------------------------------------- group

int cmd_group(const GlobalOpts& g, const std::string& in, const std::string& model,
              int k, int m, grouper::GroupOpts opts, double alpha0,
              double alpha_slope) {
    const grouper::Portfolio p = grouper::read_portfolio_csv(in);
    const grouper::SurrogateEnsemble surrogate = grouper::load_ensemble(model);
    grouper::ValuationAssumptions a;

    const grouper::GroupingResult grouped =
        grouper::group_portfolio(p, surrogate, k, m, a, opts);
    const grouper::GroupingReport report =
        grouper::backtest(grouped, p, surrogate, a);

    grouper::write_model_points_csv(out_path(g, "model_points.csv"),
                                    grouped.model_points, grouped.weights);
    write_text(out_path(g, "report.json"), grouper::grouping_report_to_json(report));
    grouper::write_series_csv(out_path(g, "series.csv"), report);
    grouper::write_summary_csv(out_path(g, "summary.csv"), report);
    write_text(out_path(g, "clusters.json"),
               grouper::cluster_model_to_json(grouped.clusters));
    grouper::write_assignment_csv(out_path(g, "assignment.csv"), grouped.clusters);

    // Componentwise acceptance thresholds, increasing in t.
    std::vector<double> alpha(report.target.size());
    for (std::size_t t = 0; t < alpha.size(); ++t)
        alpha[t] = alpha0 + alpha_slope * static_cast<double>(t);
    const grouper::ThresholdCheck check =
        grouper::check_thresholds(report.target, report.ann_pred, alpha);

    const auto& ann = report.stats.at("ann_mid");
    const auto& km = report.stats.at("km_mid");
    std::printf("grouping: K=%d m=%d clusters=%zu points=%zu\n", k, m,
                grouped.per_cluster.size(), grouped.model_points.entries.size());
    std::printf("  ann_mid mean|re|=%.4g  km_mid mean|re|=%.4g\n", ann.mean_abs_re,
                km.mean_abs_re);
    if (!check.accepted) {
        std::printf("rejected: %zu time step(s) exceed threshold (first t=%d)\n",
                    check.failed_t.size(), check.failed_t.front());
        return kExitRejected;
    }
    std::printf("accepted\n");
    return kExitOk;
}

// ------------------------------------------------------------------ report

int cmd_report(const GlobalOpts& g, const std::string& in) {
    const grouper::GroupingReport r = grouper::load_grouping_report(in);
    grouper::write_series_csv(out_path(g, "series.csv"), r);
    grouper::write_summary_csv(out_path(g, "summary.csv"), r);
    std::printf("%-10s %12s %12s %12s %12s\n", "method", "mean_e", "mean_re",
                "mean|re|", "pc99|re|");
    for (const auto& [name, s] : r.stats)
        std::printf("%-10s %12.4g %12.4g %12.4g %12.4g\n", name.c_str(), s.mean_e,
                    s.mean_re, s.mean_abs_re, s.pc99_abs_re);
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"grouper: compress insurance portfolios into optimized model points"};
    app.require_subcommand(1);

    GlobalOpts g;
    app.add_option("--config", g.config_path, "JSON config supplying defaults");
    auto* seed_opt = app.add_option("--seed", g.seed, "base seed for all derived streams");
    app.add_option("--threads", g.threads, "worker cap (0 = hardware)");
    app.add_option("--out-dir", g.out_dir, "directory for output artifacts");

    // generate
    auto* gen = app.add_subcommand("generate", "synthesize a portfolio CSV");
    gen->fallthrough();
    std::string gen_line;
    std::int64_t gen_n = 0;
    std::string gen_out;
    auto* gen_line_opt = gen->add_option("--line", gen_line, "product line: tl|dc")
                             ->check(CLI::IsMember({"tl", "dc"}));
    auto* gen_n_opt = gen->add_option("--n", gen_n, "number of contracts");
    auto* gen_out_opt = gen->add_option("--out", gen_out, "output CSV path");

    // value
    auto* val = app.add_subcommand("value", "exact valuation of a portfolio CSV");
    val->fallthrough();
    std::string val_in, val_assumptions, val_out;
    bool val_per_contract = false;
    auto* val_in_opt = val->add_option("--in", val_in, "portfolio CSV");
    val->add_option("--assumptions", val_assumptions, "assumptions JSON");
    auto* val_out_opt = val->add_option("--out", val_out, "output paths CSV");
    val->add_flag("--per-contract", val_per_contract,
                  "one row per (contract, t) instead of the aggregate");

    // train
    auto* tr = app.add_subcommand("train", "train a surrogate ensemble");
    tr->fallthrough();
    std::string tr_in, tr_loss = "mse", tr_cell = "elman";
    int tr_members = 3;
    grouper::TrainConfig tr_cfg;
    auto* tr_in_opt = tr->add_option("--in", tr_in, "portfolio CSV");
    auto* tr_members_opt = tr->add_option("--members", tr_members, "ensemble size");
    auto* tr_loss_opt = tr->add_option("--loss", tr_loss, "member losses: mse|mae|mixed")
                            ->check(CLI::IsMember({"mse", "mae", "mixed"}));
    auto* tr_epochs_opt = tr->add_option("--epochs", tr_cfg.max_epochs, "max epochs");
    auto* tr_patience_opt = tr->add_option("--patience", tr_cfg.patience,
                                           "early-stopping patience");
    auto* tr_batch_opt = tr->add_option("--batch", tr_cfg.batch_size, "mini-batch size");
    auto* tr_hidden_opt = tr->add_option("--hidden", tr_cfg.hidden, "embedding width");
    auto* tr_units_opt = tr->add_option("--units", tr_cfg.rec_units, "recurrent width");
    auto* tr_lr_opt = tr->add_option("--lr", tr_cfg.lr, "Adam learning rate");
    auto* tr_cell_opt = tr->add_option("--cell", tr_cell, "recurrent cell: elman|lstm")
                            ->check(CLI::IsMember({"elman", "lstm"}));

    // group
    auto* gr = app.add_subcommand("group", "optimize model points against a surrogate");
    gr->fallthrough();
    std::string gr_in, gr_model, gr_optimizer = "fixed";
    int gr_k = 10, gr_m = 1;
    grouper::GroupOpts gr_opts;
    double gr_alpha0 = 0.02, gr_alpha_slope = 0.002;
    bool gr_no_box = false;
    auto* gr_in_opt = gr->add_option("--in", gr_in, "portfolio CSV");
    auto* gr_model_opt = gr->add_option("--model", gr_model, "surrogate model JSON");
    auto* gr_k_opt = gr->add_option("--k", gr_k, "number of clusters (1 = no preclustering)");
    auto* gr_m_opt = gr->add_option("--m", gr_m, "model points per cluster");
    auto* gr_steps_opt = gr->add_option("--steps", gr_opts.optimize.steps,
                                        "optimization steps per cluster");
    auto* gr_lr_opt = gr->add_option("--lr", gr_opts.optimize.lr, "step size");
    auto* gr_optimizer_opt =
        gr->add_option("--optimizer", gr_optimizer, "fixed|adam")
            ->check(CLI::IsMember({"fixed", "adam"}));
    auto* gr_alpha0_opt = gr->add_option("--alpha0", gr_alpha0, "threshold at t=0");
    auto* gr_alpha_slope_opt =
        gr->add_option("--alpha-slope", gr_alpha_slope, "threshold increase per year");
    gr->add_flag("--no-feature-box", gr_no_box,
                 "drop per-cluster feature range constraints");

    // report
    auto* rp = app.add_subcommand("report", "re-emit CSVs and a summary from a report JSON");
    rp->fallthrough();
    std::string rp_in;
    auto* rp_in_opt = rp->add_option("--in", rp_in, "report JSON");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (!g.config_path.empty()) {
            std::ifstream f(g.config_path);
            if (!f) throw grouper::IoError("cannot open config", g.config_path);
            f >> g.config;
            if (seed_opt->count() == 0 && g.config.contains("seed"))
                g.seed = g.config["seed"].get<std::uint64_t>();
            if (g.config.contains("threads") && g.threads == 0)
                g.threads = g.config["threads"].get<int>();
            if (g.config.contains("out_dir") && g.out_dir == ".")
                g.out_dir = g.config["out_dir"].get<std::string>();
        }
        grouper::set_max_threads(g.threads);

        if (app.got_subcommand(gen)) {
            from_config(g, "generate", gen_line_opt, "line", gen_line);
            from_config(g, "generate", gen_n_opt, "n", gen_n);
            from_config(g, "generate", gen_out_opt, "out", gen_out);
            if (gen_line.empty() || gen_n <= 0) {
                std::fprintf(stderr, "generate: --line and --n are required\n");
                return kExitUsage;
            }
            if (gen_out.empty()) gen_out = out_path(g, "portfolio.csv");
            return cmd_generate(g, gen_line, gen_n, static_cast<std::int64_t>(g.seed),
                                gen_out);
        }
        if (app.got_subcommand(val)) {
            from_config(g, "value", val_in_opt, "in", val_in);
            from_config(g, "value", val_out_opt, "out", val_out);
            if (val_in.empty()) {
                std::fprintf(stderr, "value: --in is required\n");
                return kExitUsage;
            }
            if (val_out.empty()) val_out = out_path(g, "paths.csv");
            return cmd_value(g, val_in, val_assumptions, val_out, val_per_contract);
        }
        if (app.got_subcommand(tr)) {
            from_config(g, "train", tr_in_opt, "in", tr_in);
            from_config(g, "train", tr_members_opt, "members", tr_members);
            from_config(g, "train", tr_loss_opt, "loss", tr_loss);
            from_config(g, "train", tr_epochs_opt, "epochs", tr_cfg.max_epochs);
            from_config(g, "train", tr_patience_opt, "patience", tr_cfg.patience);
            from_config(g, "train", tr_batch_opt, "batch", tr_cfg.batch_size);
            from_config(g, "train", tr_hidden_opt, "hidden", tr_cfg.hidden);
            from_config(g, "train", tr_units_opt, "units", tr_cfg.rec_units);
            from_config(g, "train", tr_lr_opt, "lr", tr_cfg.lr);
            from_config(g, "train", tr_cell_opt, "cell", tr_cell);
            if (tr_in.empty()) {
                std::fprintf(stderr, "train: --in is required\n");
                return kExitUsage;
            }
            tr_cfg.seed = g.seed;
            tr_cfg.cell = tr_cell == "lstm" ? grouper::RecurrentCell::Lstm
                                            : grouper::RecurrentCell::Elman;
            return cmd_train(g, tr_in, tr_members, tr_loss, tr_cfg);
        }
        if (app.got_subcommand(gr)) {
            from_config(g, "group", gr_in_opt, "in", gr_in);
            from_config(g, "group", gr_model_opt, "model", gr_model);
            from_config(g, "group", gr_k_opt, "k", gr_k);
            from_config(g, "group", gr_m_opt, "m", gr_m);
            from_config(g, "group", gr_steps_opt, "steps", gr_opts.optimize.steps);
            from_config(g, "group", gr_lr_opt, "lr", gr_opts.optimize.lr);
            from_config(g, "group", gr_optimizer_opt, "optimizer", gr_optimizer);
            from_config(g, "group", gr_alpha0_opt, "alpha0", gr_alpha0);
            from_config(g, "group", gr_alpha_slope_opt, "alpha_slope", gr_alpha_slope);
            if (gr_in.empty() || gr_model.empty()) {
                std::fprintf(stderr, "group: --in and --model are required\n");
                return kExitUsage;
            }
            gr_opts.seed = g.seed;
            gr_opts.use_feature_box = !gr_no_box;
            gr_opts.optimize.optimizer =
                grouper::optimizer_kind_from_string(gr_optimizer);
            return cmd_group(g, gr_in, gr_model, gr_k, gr_m, gr_opts, gr_alpha0,
                             gr_alpha_slope);
        }
        if (app.got_subcommand(rp)) {
            from_config(g, "report", rp_in_opt, "in", rp_in);
            if (rp_in.empty()) {
                std::fprintf(stderr, "report: --in is required\n");
                return kExitUsage;
            }
            return cmd_report(g, rp_in);
        }
        std::fprintf(stderr, "no subcommand\n");
        return kExitUsage;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitRuntime;
    }
}
