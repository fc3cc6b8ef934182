// Batch CLI for fitting and selecting partition-based contextual bandit
// models of learning data: synthetic campaigns, MLE fits, hold-out and
// penalized selection, hyperparameter sweeps, risk evaluation and expert-set
// selection. All commands read a JSON config and write into --out.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>

#include "banditfit/workbench.hpp"

namespace fs = std::filesystem;
using namespace banditfit;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitIo = 1;
constexpr int kExitValidation = 2;

struct CommonArgs {
    std::string config_path;
    std::string out_dir;
    std::optional<std::uint64_t> seed_override;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "JSON experiment config")
        ->required()
        ->check(CLI::ExistingFile);
    cmd->add_option("--out", args.out_dir, "output directory")->required();
    cmd->add_option("--seed", args.seed_override, "override the config master seed");
}

ExperimentConfig load(const CommonArgs& args) {
    ExperimentConfig cfg = load_config(args.config_path);
    if (args.seed_override) cfg.master_seed = *args.seed_override;
    return cfg;
}

fs::path ensure_out(const CommonArgs& args) {
    fs::path dir(args.out_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output dir: " + dir.string());
    return dir;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write: " + path.string());
    out << text;
    if (!out) throw IoError("write failed: " + path.string());
}

Campaign campaign_for(const ExperimentConfig& cfg, const StimulusSet& set) {
    if (!cfg.campaign_dir.empty()) return load_campaign(cfg.campaign_dir);
    return simulate_campaign(cfg, set);
}

std::string trajectory_label(const Trajectory& traj, int index) {
    std::ostringstream os;
    if (traj.generator_tag)
        os << traj.generator_tag->model << "_";
    os << "agent_" << std::setw(3) << std::setfill('0') << index;
    return os.str();
}

int run_simulate(const CommonArgs& args) {
    const auto cfg = load(args);
    const auto set = build_five_four_set();
    const auto dir = ensure_out(args);
    const Campaign campaign = generate_campaign(cfg, set, dir);
    std::cout << "wrote " << campaign.trajectories.size() << " trajectories to " << dir
              << "\n";
    return kExitOk;
}

int run_fit(const CommonArgs& args) {
    const auto cfg = load(args);
    const auto set = build_five_four_set();
    const auto dir = ensure_out(args);
    const Campaign campaign = campaign_for(cfg, set);
    const auto catalog = config_catalog(cfg, set);
    const int stop = cfg.stop_time > 0 ? cfg.stop_time : campaign.n;
    const LikelihoodWindow window{1, stop};

    fs::create_directories(dir / "fits");
    for (std::size_t i = 0; i < campaign.trajectories.size(); ++i) {
        const auto& traj = campaign.trajectories[i];
        json per_model = json::array();
        for (const auto& spec : catalog) {
            const FitResult fit = fit_mle(spec, traj, window, cfg.optimizer);
            per_model.push_back(fit_result_to_json(spec.name, window, fit));
        }
        const std::string label = trajectory_label(traj, static_cast<int>(i));
        write_text(dir / "fits" / (label + ".json"), per_model.dump(2) + "\n");
    }
    std::cout << "fitted " << catalog.size() << " models on " << campaign.trajectories.size()
              << " trajectories\n";
    return kExitOk;
}

int run_select(const CommonArgs& args, const std::string& method) {
    const auto cfg = load(args);
    const auto set = build_five_four_set();
    const auto dir = ensure_out(args);
    const Campaign campaign = campaign_for(cfg, set);
    const auto catalog = config_catalog(cfg, set);
    const SelectionMethod m =
        method == "holdout" ? SelectionMethod::holdout : SelectionMethod::penalized;

    const auto batch = run_selection_batch(cfg, campaign, catalog, m);
    fs::create_directories(dir / "reports");
    for (std::size_t i = 0; i < batch.reports.size(); ++i) {
        const std::string label =
            trajectory_label(campaign.trajectories[i], static_cast<int>(i));
        write_text(dir / "reports" / (label + ".json"),
                   selection_report_to_json(batch.reports[i]).dump(2) + "\n");
    }
    std::ostringstream aggregate;
    aggregate << "model,frequency\n";
    for (std::size_t mi = 0; mi < batch.model_names.size(); ++mi)
        aggregate << batch.model_names[mi] << ',' << format_double(batch.frequencies[mi])
                  << '\n';
    write_text(dir / "aggregate.csv", aggregate.str());
    if (!batch.by_generator.models.empty()) {
        std::ostringstream mm;
        write_mismatch_csv(batch.by_generator, mm);
        write_text(dir / "mismatch.csv", mm.str());
    }
    std::cout << method << " selection over " << batch.reports.size() << " trajectories\n";
    return kExitOk;
}

int run_sweep_n(const CommonArgs& args) {
    const auto cfg = load(args);
    const auto set = build_five_four_set();
    const auto dir = ensure_out(args);
    const Campaign campaign = campaign_for(cfg, set);
    const auto catalog = config_catalog(cfg, set);
    const auto sweep = sweep_holdout(cfg, campaign, catalog);
    for (const auto& [split, matrix] : sweep) {
        std::ostringstream mm;
        write_mismatch_csv(matrix, mm);
        write_text(dir / ("holdout_N" + std::to_string(split) + ".csv"), mm.str());
    }
    std::cout << "hold-out sweep over " << sweep.size() << " split points\n";
    return kExitOk;
}

int run_sweep_c(const CommonArgs& args) {
    const auto cfg = load(args);
    const auto set = build_five_four_set();
    const auto dir = ensure_out(args);
    const Campaign campaign = campaign_for(cfg, set);
    const auto catalog = config_catalog(cfg, set);
    const auto sweep = sweep_penalty(cfg, campaign, catalog);
    for (const auto& [c, matrix] : sweep) {
        std::ostringstream mm;
        write_mismatch_csv(matrix, mm);
        write_text(dir / ("penalty_c" + format_double(c) + ".csv"), mm.str());
    }
    std::cout << "penalty sweep over " << sweep.size() << " grid points\n";
    return kExitOk;
}

int run_risk(const CommonArgs& args) {
    const auto cfg = load(args);
    if (!cfg.risk) throw std::invalid_argument("config: 'risk' section required");
    const auto set = build_five_four_set();
    const auto dir = ensure_out(args);
    const auto catalog =
        canonical_catalog(set, cfg.cell_kind, cfg.bounds, cfg.n, cfg.sign);
    auto find = [&](const std::string& name) -> const PartitionModelSpec& {
        for (const auto& spec : catalog)
            if (spec.name == name) return spec;
        throw std::invalid_argument("risk: unknown model " + name);
    };
    const auto& gen = find(cfg.risk->generator_model);
    const auto& cand = find(cfg.risk->candidate_model);
    const ModelParams gen_theta = cfg.risk->generator_theta.empty()
                                      ? default_generator_params(gen)
                                      : cfg.risk->generator_theta;
    const ModelParams cand_theta = cfg.risk->candidate_theta.empty()
                                       ? default_generator_params(cand)
                                       : cfg.risk->candidate_theta;
    ContextSchedule schedule;
    schedule.kind = cfg.schedule_kind;
    schedule.horizon = cfg.n;
    auto rule = [&set](int ctx, int action) {
        return categorization_reward(set.object(ctx), action);
    };
    const LikelihoodWindow window{cfg.risk->window_from,
                                  cfg.risk->window_to > 0 ? cfg.risk->window_to : cfg.n};
    const RiskEstimate estimate =
        trajectory_risk(gen, gen_theta, cand, cand_theta, set, schedule, rule, window,
                        cfg.risk->n_trajectories, cfg.master_seed);
    json out = risk_estimate_to_json(estimate);
    out["generator"] = gen.name;
    out["candidate"] = cand.name;
    write_text(dir / "risk.json", out.dump(2) + "\n");
    std::cout << "risk: kl=" << estimate.kl << " hellinger_sq=" << estimate.hellinger_sq
              << "\n";
    return kExitOk;
}

int run_experts_select(const CommonArgs& args) {
    const auto cfg = load(args);
    if (cfg.expert_sets.empty())
        throw std::invalid_argument("config: 'expert_sets' section required");
    const auto set = build_five_four_set();
    const auto dir = ensure_out(args);
    const Campaign campaign = campaign_for(cfg, set);
    const auto catalog =
        canonical_catalog(set, cfg.cell_kind, cfg.bounds, cfg.n, cfg.sign);

    auto build_models = [&]() {
        std::vector<ExpertSetModel> models;
        for (const auto& set_cfg : cfg.expert_sets) {
            ExpertSetModel model;
            model.name = set_cfg.name;
            model.horizon = cfg.n;
            model.bounds = cfg.bounds;
            for (const auto& ref : set_cfg.experts) {
                auto it = std::find_if(catalog.begin(), catalog.end(),
                                       [&](const auto& s) { return s.name == ref.model; });
                if (it == catalog.end())
                    throw std::invalid_argument("expert_sets: unknown model " + ref.model);
                const ModelParams theta =
                    ref.theta.empty() ? default_generator_params(*it) : ref.theta;
                model.experts.push_back(
                    std::make_shared<PartitionPolicyExpert>(*it, theta));
            }
            models.push_back(std::move(model));
        }
        return models;
    };

    json reports = json::array();
    std::map<std::string, int> counts;
    for (const auto& traj : campaign.trajectories) {
        auto models = build_models();  // fresh expert state per trajectory
        const auto report = expert_set_select(models, traj, cfg.expert_stop_time, cfg.optimizer);
        reports.push_back(selection_report_to_json(report));
        ++counts[report.selected];
    }
    json out;
    out["reports"] = reports;
    out["selected_counts"] = counts;
    write_text(dir / "expert_selection.json", out.dump(2) + "\n");
    std::cout << "expert-set selection over " << campaign.trajectories.size()
              << " trajectories\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"partition-based contextual bandit model fitting and selection"};
    app.require_subcommand(1);

    CommonArgs args;
    std::string method = "holdout";

    auto* simulate = app.add_subcommand("simulate", "generate a synthetic-agent campaign");
    add_common(simulate, args);
    auto* fit = app.add_subcommand("fit", "fit all models to campaign trajectories");
    add_common(fit, args);
    auto* select = app.add_subcommand("select", "run model selection over a campaign");
    add_common(select, args);
    select->add_option("--method", method, "holdout or penalized")
        ->check(CLI::IsMember({"holdout", "penalized"}));
    auto* sweep_n = app.add_subcommand("sweep-n", "hold-out mismatch over the N grid");
    add_common(sweep_n, args);
    auto* sweep_c = app.add_subcommand("sweep-c", "penalized mismatch over the c grid");
    add_common(sweep_c, args);
    auto* risk = app.add_subcommand("risk", "KL/Hellinger risk of a candidate vs a generator");
    add_common(risk, args);
    auto* experts = app.add_subcommand("experts-select", "expert-set (Exp4) selection");
    add_common(experts, args);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitValidation;
    }

    try {
        if (simulate->parsed()) return run_simulate(args);
        if (fit->parsed()) return run_fit(args);
        if (select->parsed()) return run_select(args, method);
        if (sweep_n->parsed()) return run_sweep_n(args);
        if (sweep_c->parsed()) return run_sweep_c(args);
        if (risk->parsed()) return run_risk(args);
        if (experts->parsed()) return run_experts_select(args);
    } catch (const IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return kExitIo;
    } catch (const ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::invalid_argument& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    }
    return kExitOk;
}
