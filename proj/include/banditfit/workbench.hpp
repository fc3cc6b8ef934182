#pragma once

#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "banditfit/expert_advice.hpp"
#include "banditfit/inference.hpp"
#include "banditfit/partition_model.hpp"
#include "banditfit/risk.hpp"
#include "banditfit/selection.hpp"
#include "banditfit/stimulus.hpp"
#include "banditfit/trajectory_io.hpp"

namespace banditfit {

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// Experiment configuration

struct RiskJobConfig {
    std::string generator_model;
    ModelParams generator_theta;  // empty -> generator defaults for that model
    std::string candidate_model;
    ModelParams candidate_theta;  // empty -> homogeneous default
    int n_trajectories = 200;
    int window_from = 1;
    int window_to = 0;  // 0 -> n
};

struct ExpertRefConfig {
    std::string model;
    ModelParams theta;  // empty -> generator defaults
};

struct ExpertSetConfig {
    std::string name;
    std::vector<ExpertRefConfig> experts;
};

struct ExperimentConfig {
    int n = 500;
    int agents_per_model = 100;
    std::vector<std::string> models;  // empty -> full catalog
    CellBanditKind cell_kind = CellBanditKind::gradient_bandit;
    GradientSign sign = GradientSign::reward_ascent;
    ScheduleKind schedule_kind = ScheduleKind::cyclic;
    ParamBounds bounds;
    std::map<std::string, ModelParams> generator_theta;  // per-model overrides
    std::vector<int> n_grid;      // empty -> {25,50,100,150,200,250,n}
    std::vector<double> c_grid;   // empty -> default grid incl. 0.012, 0.053, AIC point
    std::uint64_t master_seed = 1;
    int holdout_split = 0;  // 0 -> ceil(n/2)
    double penalty_c = 0.012;
    int stop_time = 0;  // 0 -> n
    OptimizerConfig optimizer;
    int threads = 1;
    std::string campaign_dir;
    std::optional<RiskJobConfig> risk;
    std::vector<ExpertSetConfig> expert_sets;
    int expert_stop_time = 0;  // 0 -> n

    void validate() const {
        if (n < 2) throw std::invalid_argument("config: n must be >= 2");
        if (agents_per_model < 1)
            throw std::invalid_argument("config: agents_per_model must be >= 1");
        bounds.validate();
        optimizer.validate();
        for (int value : n_grid)
            if (value < 2 || value > n)
                throw std::invalid_argument("config: n_grid values must lie in [2, n]");
        for (double c : c_grid)
            if (c < 0.0) throw std::invalid_argument("config: c_grid values must be >= 0");
        const auto& known = canonical_model_names();
        for (const auto& name : models)
            if (std::find(known.begin(), known.end(), name) == known.end())
                throw std::invalid_argument("config: unknown model " + name);
    }
};

inline std::vector<int> default_n_grid(int n) {
    std::vector<int> grid{25, 50, 100, 150, 200, 250};
    std::erase_if(grid, [n](int v) { return v >= n; });
    grid.push_back(n);
    return grid;
}

// Covers the paper's calibrated point 0.012, the average-minimizing 0.053
// and the AIC point c log(n)^2 = 1; sorted so sweeps read as trends.
inline std::vector<double> default_c_grid(int n) {
    const double log_n = std::log(static_cast<double>(n));
    std::vector<double> grid{0.0, 0.004, 0.008, 0.012, 0.02, 0.04, 0.053, 0.06,
                             1.0 / (log_n * log_n)};
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    return grid;
}

// Generator parameters used for synthetic agents: every cell at
// 0.03 * sqrt(n), except OnePerItem whose cells follow the ladder
// (0.03/10 + k * 0.007) * sqrt(n) in presentation order.
inline ModelParams default_generator_params(const PartitionModelSpec& spec) {
    const double root_n = std::sqrt(static_cast<double>(spec.horizon));
    const int d = param_dim(spec.cell_kind);
    const int cells = spec.partition.cell_count();
    ModelParams theta(static_cast<std::size_t>(cells));
    for (int k = 0; k < cells; ++k) {
        const double value = (spec.name == "OnePerItem")
                                 ? (0.03 / 10.0 + k * 0.007) * root_n
                                 : 0.03 * root_n;
        theta[static_cast<std::size_t>(k)].assign(static_cast<std::size_t>(d), value);
    }
    return theta;
}

inline std::vector<PartitionModelSpec> config_catalog(const ExperimentConfig& cfg,
                                                      const StimulusSet& set) {
    auto all = canonical_catalog(set, cfg.cell_kind, cfg.bounds, cfg.n, cfg.sign);
    if (cfg.models.empty()) return all;
    std::vector<PartitionModelSpec> chosen;
    for (const auto& name : cfg.models) {
        auto it = std::find_if(all.begin(), all.end(),
                               [&](const auto& s) { return s.name == name; });
        if (it == all.end()) throw std::invalid_argument("config: unknown model " + name);
        chosen.push_back(*it);
    }
    return chosen;
}

inline ModelParams generator_params(const ExperimentConfig& cfg,
                                    const PartitionModelSpec& spec) {
    auto it = cfg.generator_theta.find(spec.name);
    if (it == cfg.generator_theta.end()) return default_generator_params(spec);
    validate_params(spec, it->second);
    return it->second;
}

// ---------------------------------------------------------------------------
// JSON config parsing

namespace detail {

inline ModelParams model_params_from_json(const json& j) {
    ModelParams theta;
    for (const auto& cell : j) {
        std::vector<double> values;
        if (cell.is_number()) {
            values.push_back(cell.get<double>());
        } else {
            for (const auto& v : cell) values.push_back(v.get<double>());
        }
        theta.push_back(std::move(values));
    }
    return theta;
}

}  // namespace detail

inline ExperimentConfig config_from_json(const json& j) {
    ExperimentConfig cfg;
    try {
        cfg.n = j.value("n", cfg.n);
        cfg.agents_per_model = j.value("agents_per_model", cfg.agents_per_model);
        if (j.contains("models")) cfg.models = j.at("models").get<std::vector<std::string>>();
        if (j.contains("cell_kind"))
            cfg.cell_kind = cell_kind_from_string(j.at("cell_kind").get<std::string>());
        if (j.contains("gradient_sign")) {
            const std::string s = j.at("gradient_sign").get<std::string>();
            if (s == "reward_ascent")
                cfg.sign = GradientSign::reward_ascent;
            else if (s == "literal_paper")
                cfg.sign = GradientSign::literal_paper;
            else
                throw std::invalid_argument("config: unknown gradient_sign " + s);
        }
        if (j.contains("schedule")) {
            const std::string s = j.at("schedule").get<std::string>();
            if (s == "cyclic")
                cfg.schedule_kind = ScheduleKind::cyclic;
            else if (s == "shuffled_blocks")
                cfg.schedule_kind = ScheduleKind::shuffled_blocks;
            else
                throw std::invalid_argument("config: unknown schedule " + s);
        }
        if (j.contains("bounds")) {
            cfg.bounds.lo = j.at("bounds").value("lo", 0.0);
            cfg.bounds.hi = j.at("bounds").value("hi", 1.0);
        }
        if (j.contains("generator_theta")) {
            for (const auto& [name, value] : j.at("generator_theta").items())
                cfg.generator_theta[name] = detail::model_params_from_json(value);
        }
        if (j.contains("n_grid")) cfg.n_grid = j.at("n_grid").get<std::vector<int>>();
        if (j.contains("c_grid")) cfg.c_grid = j.at("c_grid").get<std::vector<double>>();
        cfg.master_seed = j.value("seed", cfg.master_seed);
        cfg.holdout_split = j.value("holdout_N", cfg.holdout_split);
        cfg.penalty_c = j.value("penalty_c", cfg.penalty_c);
        cfg.stop_time = j.value("stop_time", cfg.stop_time);
        if (j.contains("optimizer")) {
            const auto& o = j.at("optimizer");
            cfg.optimizer.population_size =
                o.value("population_size", cfg.optimizer.population_size);
            cfg.optimizer.max_iterations =
                o.value("max_iterations", cfg.optimizer.max_iterations);
            cfg.optimizer.seed = o.value("seed", cfg.optimizer.seed);
            cfg.optimizer.restarts = o.value("restarts", cfg.optimizer.restarts);
            cfg.optimizer.prob_floor = o.value("prob_floor", cfg.optimizer.prob_floor);
        }
        cfg.threads = j.value("threads", cfg.threads);
        cfg.campaign_dir = j.value("campaign", cfg.campaign_dir);
        if (j.contains("risk")) {
            const auto& r = j.at("risk");
            RiskJobConfig job;
            job.generator_model = r.at("generator").at("model").get<std::string>();
            if (r.at("generator").contains("theta"))
                job.generator_theta =
                    detail::model_params_from_json(r.at("generator").at("theta"));
            job.candidate_model = r.at("candidate").at("model").get<std::string>();
            if (r.at("candidate").contains("theta"))
                job.candidate_theta =
                    detail::model_params_from_json(r.at("candidate").at("theta"));
            job.n_trajectories = r.value("n_trajectories", job.n_trajectories);
            if (r.contains("window")) {
                job.window_from = r.at("window").at(0).get<int>();
                job.window_to = r.at("window").at(1).get<int>();
            }
            cfg.risk = job;
        }
        if (j.contains("expert_sets")) {
            for (const auto& e : j.at("expert_sets")) {
                ExpertSetConfig set_cfg;
                set_cfg.name = e.at("name").get<std::string>();
                for (const auto& x : e.at("experts")) {
                    ExpertRefConfig ref;
                    ref.model = x.at("model").get<std::string>();
                    if (x.contains("theta"))
                        ref.theta = detail::model_params_from_json(x.at("theta"));
                    set_cfg.experts.push_back(std::move(ref));
                }
                cfg.expert_sets.push_back(std::move(set_cfg));
            }
        }
        cfg.expert_stop_time = j.value("expert_stop_time", cfg.expert_stop_time);
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("config: ") + e.what());
    }
    if (cfg.n_grid.empty()) cfg.n_grid = default_n_grid(cfg.n);
    if (cfg.c_grid.empty()) cfg.c_grid = default_c_grid(cfg.n);
    cfg.validate();
    return cfg;
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config: " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ParseError("config json: " + std::string(e.what()));
    }
    return config_from_json(j);
}

// ---------------------------------------------------------------------------
// Campaigns

struct Campaign {
    int n = 0;
    int action_count = 2;
    ScheduleKind schedule_kind = ScheduleKind::cyclic;
    std::uint64_t master_seed = 0;
    std::vector<Trajectory> trajectories;
};

inline std::uint64_t agent_seed(std::uint64_t master, const std::string& generator,
                                int agent_index) {
    return derive_seed(master, "agent:" + generator, static_cast<std::uint64_t>(agent_index));
}

// Simulates agents_per_model synthetic agents per generator model, each from
// its derived seed. Wholly determined by (config, master seed).
inline Campaign simulate_campaign(const ExperimentConfig& cfg, const StimulusSet& set) {
    cfg.validate();
    const auto catalog = config_catalog(cfg, set);
    auto reward_rule = [&set](int ctx, int action) {
        return categorization_reward(set.object(ctx), action);
    };
    Campaign campaign;
    campaign.n = cfg.n;
    campaign.action_count = set.action_count;
    campaign.schedule_kind = cfg.schedule_kind;
    campaign.master_seed = cfg.master_seed;
    for (const auto& spec : catalog) {
        const ModelParams theta = generator_params(cfg, spec);
        for (int a = 0; a < cfg.agents_per_model; ++a) {
            ContextSchedule schedule;
            schedule.kind = cfg.schedule_kind;
            schedule.horizon = cfg.n;
            schedule.seed =
                derive_seed(cfg.master_seed, "schedule:" + spec.name,
                            static_cast<std::uint64_t>(a));
            const auto contexts = generate_context_sequence(set, schedule);
            campaign.trajectories.push_back(simulate_agent(
                spec, theta, contexts, reward_rule, agent_seed(cfg.master_seed, spec.name, a),
                set.action_count));
        }
    }
    return campaign;
}

namespace detail {

inline std::string agent_file_name(const std::string& generator, int index) {
    std::ostringstream os;
    os << generator << "/agent_" << std::setw(3) << std::setfill('0') << index << ".csv";
    return os.str();
}

inline json model_params_to_json(const ModelParams& theta) {
    json out = json::array();
    for (const auto& cell : theta) out.push_back(cell);
    return out;
}

inline const char* schedule_name(ScheduleKind kind) {
    return kind == ScheduleKind::cyclic ? "cyclic" : "shuffled_blocks";
}

}  // namespace detail

inline void write_campaign(const Campaign& campaign, const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output dir: " + dir.string());

    json manifest;
    manifest["n"] = campaign.n;
    manifest["K"] = campaign.action_count;
    manifest["schedule"] = detail::schedule_name(campaign.schedule_kind);
    manifest["master_seed"] = campaign.master_seed;
    manifest["trajectories"] = json::array();

    std::map<std::string, int> per_generator_index;
    for (const auto& traj : campaign.trajectories) {
        if (!traj.generator_tag)
            throw std::invalid_argument("write_campaign: trajectory without generator tag");
        const auto& tag = *traj.generator_tag;
        const int index = per_generator_index[tag.model]++;
        const std::string file = detail::agent_file_name(tag.model, index);
        const auto path = dir / file;
        std::filesystem::create_directories(path.parent_path(), ec);
        if (ec) throw IoError("cannot create output dir: " + path.parent_path().string());
        write_trajectory_csv(traj, path);
        json entry;
        entry["file"] = file;
        entry["generator"] = tag.model;
        entry["theta"] = detail::model_params_to_json(tag.theta);
        entry["seed"] = tag.seed;
        entry["n"] = traj.length();
        entry["K"] = traj.action_count;
        entry["schedule"] = detail::schedule_name(campaign.schedule_kind);
        manifest["trajectories"].push_back(std::move(entry));
    }
    std::ofstream out(dir / "manifest.json");
    if (!out) throw IoError("cannot write manifest: " + (dir / "manifest.json").string());
    out << manifest.dump(2) << '\n';

    std::ofstream objects(dir / "objects.csv");
    if (!objects) throw IoError("cannot write objects.csv");
    write_objects_csv(build_five_four_set(), objects);
}

inline Campaign generate_campaign(const ExperimentConfig& cfg, const StimulusSet& set,
                                  const std::filesystem::path& dir) {
    Campaign campaign = simulate_campaign(cfg, set);
    write_campaign(campaign, dir);
    return campaign;
}

inline Campaign load_campaign(const std::filesystem::path& dir) {
    std::ifstream in(dir / "manifest.json");
    if (!in) throw IoError("cannot open manifest: " + (dir / "manifest.json").string());
    json manifest;
    try {
        in >> manifest;
    } catch (const json::exception& e) {
        throw ParseError("manifest json: " + std::string(e.what()));
    }
    Campaign campaign;
    try {
        campaign.n = manifest.at("n").get<int>();
        campaign.action_count = manifest.at("K").get<int>();
        campaign.schedule_kind = manifest.at("schedule").get<std::string>() == "cyclic"
                                     ? ScheduleKind::cyclic
                                     : ScheduleKind::shuffled_blocks;
        campaign.master_seed = manifest.at("master_seed").get<std::uint64_t>();
        std::vector<std::string> missing;
        for (const auto& entry : manifest.at("trajectories")) {
            const std::string file = entry.at("file").get<std::string>();
            if (!std::filesystem::exists(dir / file)) {
                missing.push_back(file);
                continue;
            }
            Trajectory traj = ingest_trajectory_csv(dir / file, campaign.action_count);
            GeneratorTag tag;
            tag.model = entry.at("generator").get<std::string>();
            tag.theta = detail::model_params_from_json(entry.at("theta"));
            tag.seed = entry.at("seed").get<std::uint64_t>();
            traj.generator_tag = tag;
            campaign.trajectories.push_back(std::move(traj));
        }
        if (!missing.empty()) {
            std::string msg = "campaign is missing trajectory files:";
            for (const auto& f : missing) msg += ' ' + f;
            throw IoError(msg);
        }
    } catch (const json::exception& e) {
        throw ParseError("manifest json: " + std::string(e.what()));
    }
    return campaign;
}

// ---------------------------------------------------------------------------
// Parallel map over trajectories (results land in preassigned slots, so the
// aggregation order never depends on scheduling).

template <typename Fn>
void parallel_for(int count, int threads, Fn&& fn) {
    if (threads <= 1 || count <= 1) {
        for (int i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    const int workers = std::min(threads, count);
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&]() {
            while (!failed.load()) {
                const int i = next.fetch_add(1);
                if (i >= count) break;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!first_error) first_error = std::current_exception();
                    failed.store(true);
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

// ---------------------------------------------------------------------------
// Aggregation

struct MismatchMatrix {
    std::vector<std::string> generators;           // row labels, first-appearance order
    std::vector<std::string> models;               // column labels, catalog order
    std::vector<std::vector<double>> frequencies;  // row: generator, col: selected
    std::vector<double> mismatch;                  // per row, 1 - own-model frequency
};

inline MismatchMatrix aggregate_mismatch(
    const std::vector<std::string>& model_names,
    const std::vector<std::pair<std::string, std::string>>& generator_selected) {
    MismatchMatrix matrix;
    matrix.models = model_names;
    const int m = static_cast<int>(model_names.size());
    auto col_of = [&](const std::string& name) {
        for (int i = 0; i < m; ++i)
            if (model_names[static_cast<std::size_t>(i)] == name) return i;
        throw std::invalid_argument("aggregate_mismatch: selected model " + name +
                                    " not in catalog");
    };
    auto row_of = [&](const std::string& name) {
        for (std::size_t i = 0; i < matrix.generators.size(); ++i)
            if (matrix.generators[i] == name) return static_cast<int>(i);
        matrix.generators.push_back(name);
        return static_cast<int>(matrix.generators.size()) - 1;
    };
    std::vector<std::vector<int>> counts;
    std::vector<int> totals;
    for (const auto& [generator, selected] : generator_selected) {
        const int g = row_of(generator);
        if (g == static_cast<int>(counts.size())) {
            counts.emplace_back(static_cast<std::size_t>(m), 0);
            totals.push_back(0);
        }
        ++counts[static_cast<std::size_t>(g)][static_cast<std::size_t>(col_of(selected))];
        ++totals[static_cast<std::size_t>(g)];
    }
    matrix.frequencies.assign(matrix.generators.size(),
                              std::vector<double>(static_cast<std::size_t>(m), 0.0));
    matrix.mismatch.assign(matrix.generators.size(), 1.0);
    for (std::size_t g = 0; g < matrix.generators.size(); ++g) {
        for (int s = 0; s < m; ++s)
            matrix.frequencies[g][static_cast<std::size_t>(s)] =
                static_cast<double>(counts[g][static_cast<std::size_t>(s)]) /
                static_cast<double>(totals[g]);
        for (int s = 0; s < m; ++s)
            if (model_names[static_cast<std::size_t>(s)] == matrix.generators[g])
                matrix.mismatch[g] = 1.0 - matrix.frequencies[g][static_cast<std::size_t>(s)];
    }
    return matrix;
}

inline void write_mismatch_csv(const MismatchMatrix& matrix, std::ostream& out) {
    out << "generator,selected,frequency\n";
    for (std::size_t g = 0; g < matrix.generators.size(); ++g)
        for (std::size_t s = 0; s < matrix.models.size(); ++s)
            out << matrix.generators[g] << ',' << matrix.models[s] << ','
                << format_double(matrix.frequencies[g][s]) << '\n';
}

// ---------------------------------------------------------------------------
// Selection batches and sweeps

enum class SelectionMethod { holdout, penalized };

struct SelectionBatchResult {
    std::vector<SelectionReport> reports;    // one per trajectory, input order
    std::vector<std::string> model_names;    // catalog order
    std::vector<double> frequencies;         // selection frequency per model
    MismatchMatrix by_generator;             // rows only for tagged generators
};

inline SelectionBatchResult run_selection_batch(const ExperimentConfig& cfg,
                                                const Campaign& campaign,
                                                const std::vector<PartitionModelSpec>& catalog,
                                                SelectionMethod method) {
    SelectionBatchResult result;
    for (const auto& spec : catalog) result.model_names.push_back(spec.name);
    const int count = static_cast<int>(campaign.trajectories.size());
    result.reports.resize(static_cast<std::size_t>(count));
    parallel_for(count, cfg.threads, [&](int i) {
        const Trajectory& traj = campaign.trajectories[static_cast<std::size_t>(i)];
        if (method == SelectionMethod::holdout) {
            HoldoutConfig hc;
            hc.split_n = cfg.holdout_split;
            hc.optimizer = cfg.optimizer;
            result.reports[static_cast<std::size_t>(i)] = holdout_select(catalog, traj, hc);
        } else {
            PenalizedConfig pc;
            pc.c = cfg.penalty_c;
            pc.stop_time = cfg.stop_time;
            pc.optimizer = cfg.optimizer;
            result.reports[static_cast<std::size_t>(i)] = penalized_select(catalog, traj, pc);
        }
    });
    result.frequencies.assign(result.model_names.size(), 0.0);
    std::vector<std::pair<std::string, std::string>> pairs;
    for (int i = 0; i < count; ++i) {
        const auto& report = result.reports[static_cast<std::size_t>(i)];
        for (std::size_t mi = 0; mi < result.model_names.size(); ++mi)
            if (result.model_names[mi] == report.selected) result.frequencies[mi] += 1.0;
        const auto& traj = campaign.trajectories[static_cast<std::size_t>(i)];
        if (traj.generator_tag)
            pairs.emplace_back(traj.generator_tag->model, report.selected);
    }
    if (count > 0)
        for (double& f : result.frequencies) f /= static_cast<double>(count);
    if (!pairs.empty()) result.by_generator = aggregate_mismatch(result.model_names, pairs);
    return result;
}

// Hold-out mismatch matrices for every split in the N grid.
inline std::vector<std::pair<int, MismatchMatrix>> sweep_holdout(
    const ExperimentConfig& cfg, const Campaign& campaign,
    const std::vector<PartitionModelSpec>& catalog) {
    std::vector<std::string> names;
    for (const auto& spec : catalog) names.push_back(spec.name);
    std::vector<std::pair<int, MismatchMatrix>> out;
    for (int split : cfg.n_grid) {
        const int count = static_cast<int>(campaign.trajectories.size());
        std::vector<std::string> selected(static_cast<std::size_t>(count));
        parallel_for(count, cfg.threads, [&](int i) {
            HoldoutConfig hc;
            hc.split_n = split;
            hc.optimizer = cfg.optimizer;
            selected[static_cast<std::size_t>(i)] =
                holdout_select(catalog, campaign.trajectories[static_cast<std::size_t>(i)], hc)
                    .selected;
        });
        std::vector<std::pair<std::string, std::string>> pairs;
        for (int i = 0; i < count; ++i) {
            const auto& traj = campaign.trajectories[static_cast<std::size_t>(i)];
            if (!traj.generator_tag)
                throw std::invalid_argument("sweep_holdout: untagged trajectory");
            pairs.emplace_back(traj.generator_tag->model,
                               selected[static_cast<std::size_t>(i)]);
        }
        out.emplace_back(split, aggregate_mismatch(names, pairs));
    }
    return out;
}

// Penalty-constant sweep. The fit does not depend on c, so each trajectory
// is fitted exactly once and the criterion is re-evaluated per c.
inline std::vector<std::pair<double, MismatchMatrix>> sweep_penalty(
    const ExperimentConfig& cfg, const Campaign& campaign,
    const std::vector<PartitionModelSpec>& catalog) {
    std::vector<std::string> names;
    for (const auto& spec : catalog) names.push_back(spec.name);
    const int count = static_cast<int>(campaign.trajectories.size());
    const int stop = cfg.stop_time > 0 ? cfg.stop_time : campaign.n;

    std::vector<std::vector<double>> lls(
        static_cast<std::size_t>(count),
        std::vector<double>(catalog.size(), 0.0));
    parallel_for(count, cfg.threads, [&](int i) {
        const Trajectory& traj = campaign.trajectories[static_cast<std::size_t>(i)];
        const LikelihoodWindow window{1, stop};
        for (std::size_t mi = 0; mi < catalog.size(); ++mi)
            lls[static_cast<std::size_t>(i)][mi] =
                fit_mle(catalog[mi], traj, window, cfg.optimizer).log_likelihood;
    });

    std::vector<std::pair<double, MismatchMatrix>> out;
    for (double c : cfg.c_grid) {
        std::vector<std::pair<std::string, std::string>> pairs;
        for (int i = 0; i < count; ++i) {
            std::vector<double> criteria(catalog.size());
            for (std::size_t mi = 0; mi < catalog.size(); ++mi)
                criteria[mi] = -lls[static_cast<std::size_t>(i)][mi] /
                                   static_cast<double>(stop) +
                               penalty(catalog[mi].partition.cell_count(), c, campaign.n);
            auto [best, tie] = detail::select_extremal(criteria, /*maximize=*/false);
            (void)tie;
            const auto& traj = campaign.trajectories[static_cast<std::size_t>(i)];
            if (!traj.generator_tag)
                throw std::invalid_argument("sweep_penalty: untagged trajectory");
            pairs.emplace_back(traj.generator_tag->model, catalog[best].name);
        }
        out.emplace_back(c, aggregate_mismatch(names, pairs));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Report serialization

inline json fit_result_to_json(const std::string& model, LikelihoodWindow window,
                               const FitResult& fit) {
    json theta = json::object();
    json per_cell = json::object();
    json flagged = json::array();
    for (std::size_t c = 0; c < fit.theta.size(); ++c) {
        const std::string key = std::to_string(c + 1);
        theta[key] = fit.theta[c];
        per_cell[key] = fit.per_cell_ll[c];
        if (fit.under_determined[c]) flagged.push_back(c + 1);
    }
    return json{{"model", model},
                {"window", {window.from_t, window.to_t}},
                {"theta", theta},
                {"loglik", fit.log_likelihood},
                {"per_cell", per_cell},
                {"flags", {{"under_determined", flagged}}}};
}

inline json selection_report_to_json(const SelectionReport& report) {
    json models = json::array();
    for (const auto& score : report.per_model) {
        models.push_back({{"model", score.model},
                          {"D", score.cell_count},
                          {"train_ll", score.train_ll},
                          {"test_ll", score.test_ll},
                          {"criterion", score.criterion},
                          {"penalty", score.penalty},
                          {"selected", score.model == report.selected}});
    }
    return json{{"selected", report.selected},
                {"tie_broken", report.tie_broken},
                {"models", models}};
}

inline void write_selection_csv(const SelectionReport& report, std::ostream& out) {
    out << "model,D,train_ll,test_ll,criterion,penalty,selected\n";
    for (const auto& score : report.per_model) {
        out << score.model << ',' << score.cell_count << ',' << format_double(score.train_ll)
            << ',' << format_double(score.test_ll) << ',' << format_double(score.criterion)
            << ',' << format_double(score.penalty) << ','
            << (score.model == report.selected ? 1 : 0) << '\n';
    }
}

inline json risk_estimate_to_json(const RiskEstimate& estimate) {
    return json{{"kl", estimate.kl},
                {"hellinger_sq", estimate.hellinger_sq},
                {"window", {estimate.window.from_t, estimate.window.to_t}},
                {"n_trajectories", estimate.n_trajectories},
                {"kl_infinite_terms", estimate.kl_infinite_terms}};
}

}  // namespace banditfit
