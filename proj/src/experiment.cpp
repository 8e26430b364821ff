#include "pcsim/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "pcsim/errors.hpp"

#include "json.hpp"

namespace pcsim {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string format2(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

std::string format4(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4f", v);
    return buf;
}

std::uint64_t fnv1a64(const std::string& text) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

template <typename T>
void read_field(const json& j, const char* key, T& out) {
    if (j.contains(key)) j.at(key).get_to(out);
}

json mixture_to_json(const MixtureConfig& m) {
    return json{{"hard_weight", m.hard_weight}, {"mid_weight", m.mid_weight},
                {"easy_weight", m.easy_weight}, {"hard_p", m.hard_p},
                {"mid_p_lo", m.mid_p_lo},       {"mid_p_hi", m.mid_p_hi},
                {"easy_p", m.easy_p}};
}

void mixture_from_json(const json& j, MixtureConfig& m) {
    read_field(j, "hard_weight", m.hard_weight);
    read_field(j, "mid_weight", m.mid_weight);
    read_field(j, "easy_weight", m.easy_weight);
    read_field(j, "hard_p", m.hard_p);
    read_field(j, "mid_p_lo", m.mid_p_lo);
    read_field(j, "mid_p_hi", m.mid_p_hi);
    read_field(j, "easy_p", m.easy_p);
}

json env_to_json(const EnvConfig& e) {
    return json{{"population_size", e.population_size},
                {"mixture", mixture_to_json(e.mixture)},
                {"hopeless_fraction", e.hopeless_fraction},
                {"hopeless_p", e.hopeless_p},
                {"learning_rate", e.learning_rate},
                {"seed", e.seed}};
}

void env_from_json(const json& j, EnvConfig& e) {
    read_field(j, "population_size", e.population_size);
    if (j.contains("mixture")) mixture_from_json(j.at("mixture"), e.mixture);
    read_field(j, "hopeless_fraction", e.hopeless_fraction);
    read_field(j, "hopeless_p", e.hopeless_p);
    read_field(j, "learning_rate", e.learning_rate);
    read_field(j, "seed", e.seed);
}

json scheduler_to_json(const SchedulerConfig& s) {
    return json{{"n_pilot", s.n_pilot},
                {"n_commit", s.n_commit},
                {"p_lower", s.p_lower},
                {"p_upper", s.p_upper},
                {"p_solve", s.p_solve},
                {"max_age_d", s.max_age_d},
                {"b_t", s.b_t},
                {"oversample_s", s.oversample_s},
                {"binding_enabled", s.binding_enabled}};
}

void scheduler_from_json(const json& j, SchedulerConfig& s) {
    read_field(j, "n_pilot", s.n_pilot);
    read_field(j, "n_commit", s.n_commit);
    read_field(j, "p_lower", s.p_lower);
    read_field(j, "p_upper", s.p_upper);
    read_field(j, "p_solve", s.p_solve);
    read_field(j, "max_age_d", s.max_age_d);
    read_field(j, "b_t", s.b_t);
    read_field(j, "oversample_s", s.oversample_s);
    read_field(j, "binding_enabled", s.binding_enabled);
}

json baseline_to_json(const BaselineConfig& b) {
    return json{{"n", b.n}, {"b_t", b.b_t}, {"oversample_s", b.oversample_s}};
}

void baseline_from_json(const json& j, BaselineConfig& b) {
    read_field(j, "n", b.n);
    read_field(j, "b_t", b.b_t);
    read_field(j, "oversample_s", b.oversample_s);
}

const char* target_policy_name(TargetPolicy p) {
    return p == TargetPolicy::grpo_peak ? "grpo_peak" : "fixed";
}

void write_text_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw error("cannot open for writing: " + path.string());
    out << text;
    if (!out) throw error("write failed: " + path.string());
}

}  // namespace

void ExperimentConfig::validate() const {
    env.validate();
    scheduler.validate();
    baseline.validate();
    if (method != "grpo" && method != "dapo" && method != "pc" && method != "compare") {
        throw config_error("method", "must be one of grpo, dapo, pc, compare");
    }
    if (max_steps < 0) throw config_error("max_steps", "must be >= 0");
    if (seeds.empty()) throw config_error("seeds", "must not be empty");
    if (output_dir.empty()) throw config_error("output_dir", "must not be empty");
    const bool uses_pc = method == "pc" || method == "compare";
    const bool uses_baseline = method != "pc";
    if (uses_pc && env.population_size < scheduler.b_g()) {
        throw config_error("env.population_size",
                           "must be >= scheduler sampling batch b_g = s * b_t");
    }
    if (uses_baseline && env.population_size < baseline.b_g()) {
        throw config_error("env.population_size",
                           "must be >= baseline sampling batch b_g = s * b_t");
    }
    if (require_train_match && uses_pc &&
        baseline.n != scheduler.n_pilot + scheduler.n_commit) {
        throw config_error("baseline.n",
                           "train-match requires n == n_pilot + n_commit");
    }
    if (target_policy == TargetPolicy::fixed && !(target_value > 0.0)) {
        throw config_error("target_value", "must be > 0 for a fixed target");
    }
}

std::string ExperimentConfig::to_json_text() const {
    json j;
    j["env"] = env_to_json(env);
    j["method"] = method;
    j["scheduler"] = scheduler_to_json(scheduler);
    j["baseline"] = baseline_to_json(baseline);
    j["max_steps"] = max_steps;
    j["seeds"] = seeds;
    j["target_policy"] = target_policy_name(target_policy);
    j["target_value"] = target_value;
    j["output_dir"] = output_dir;
    j["require_train_match"] = require_train_match;
    return j.dump(2) + "\n";
}

ExperimentConfig ExperimentConfig::from_json_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw config_error("<root>", std::string("invalid JSON: ") + e.what());
    }
    ExperimentConfig cfg;
    try {
        if (j.contains("env")) env_from_json(j.at("env"), cfg.env);
        read_field(j, "method", cfg.method);
        if (j.contains("scheduler")) scheduler_from_json(j.at("scheduler"), cfg.scheduler);
        if (j.contains("baseline")) baseline_from_json(j.at("baseline"), cfg.baseline);
        read_field(j, "max_steps", cfg.max_steps);
        read_field(j, "seeds", cfg.seeds);
        if (j.contains("target_policy")) {
            const std::string name = j.at("target_policy").get<std::string>();
            if (name == "grpo_peak") {
                cfg.target_policy = TargetPolicy::grpo_peak;
            } else if (name == "fixed") {
                cfg.target_policy = TargetPolicy::fixed;
            } else {
                throw config_error("target_policy", "must be grpo_peak or fixed");
            }
        }
        read_field(j, "target_value", cfg.target_value);
        read_field(j, "output_dir", cfg.output_dir);
        read_field(j, "require_train_match", cfg.require_train_match);
    } catch (const config_error&) {
        throw;
    } catch (const json::exception& e) {
        throw config_error("<root>", std::string("bad field type: ") + e.what());
    }
    return cfg;
}

ExperimentConfig ExperimentConfig::load_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw error("cannot open config file: " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return from_json_text(text);
}

std::string ExperimentConfig::digest() const {
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(fnv1a64(to_json_text())));
    return buf;
}

RunResult run_single(const ExperimentConfig& config, const std::string& method,
                     std::uint64_t seed, bool detailed_log) {
    EnvConfig env_cfg = config.env;
    env_cfg.seed = seed;
    Environment env(env_cfg);
    BudgetLedger ledger;

    RunResult result;
    result.summary.method = method;
    result.summary.seed = seed;
    result.summary.config_digest = config.digest();

    auto record = [&](const std::optional<StepMetrics>& m) {
        if (m) result.series.push_back(*m);
        return m.has_value();
    };

    if (method == "pc") {
        PilotCommitScheduler scheduler(config.scheduler, env, ledger, seed, detailed_log);
        for (std::int64_t s = 0; s < config.max_steps; ++s) {
            if (!record(scheduler.step())) break;
        }
        result.summary.exhausted_at = scheduler.exhausted_at();
    } else if (method == "grpo") {
        GrpoRunner runner(config.baseline, env, ledger, seed, detailed_log);
        for (std::int64_t s = 0; s < config.max_steps; ++s) {
            if (!record(runner.step())) break;
        }
        result.summary.exhausted_at = runner.exhausted_at();
    } else if (method == "dapo") {
        DapoRunner runner(config.baseline, env, ledger, seed, detailed_log);
        for (std::int64_t s = 0; s < config.max_steps; ++s) {
            if (!record(runner.step())) break;
        }
        result.summary.exhausted_at = runner.exhausted_at();
    } else {
        throw config_error("method", "run_single expects grpo, dapo, or pc");
    }

    result.summary.steps = static_cast<std::int64_t>(result.series.size());
    result.summary.sampled_total = ledger.sampled_total();
    result.summary.trained_total = ledger.trained_total();
    for (const StepMetrics& m : result.series) {
        result.summary.peak_success = std::max(result.summary.peak_success, m.mean_success);
    }
    if (env.total_draws() != ledger.sampled_total()) {
        throw error("ledger conservation violated: ledger=" +
                    std::to_string(ledger.sampled_total()) +
                    " env=" + std::to_string(env.total_draws()));
    }
    return result;
}

CompareResult run_compare(const ExperimentConfig& config) {
    CompareResult result;
    const std::vector<std::string> methods = {"grpo", "dapo", "pc"};
    for (const std::string& method : methods) {
        std::vector<RunResult> runs;
        std::vector<std::vector<StepMetrics>> series;
        for (std::uint64_t seed : config.seeds) {
            runs.push_back(run_single(config, method, seed));
            series.push_back(runs.back().series);
        }
        result.averaged[method] = average_series(series);
        result.runs[method] = std::move(runs);
    }

    if (config.target_policy == TargetPolicy::fixed) {
        result.target = config.target_value;
    } else {
        // Peak of the seed-averaged GRPO series: a level the baseline is
        // known to reach.
        double peak = 0.0;
        for (const AveragedStepPoint& p : result.averaged["grpo"]) {
            peak = std::max(peak, p.mean_success);
        }
        result.target = peak;
    }

    for (const std::string& method : methods) {
        result.rollouts_at_target[method] =
            rollouts_to_target(result.averaged[method], result.target);
    }

    const double pc_at = result.rollouts_at_target["pc"];
    const double grpo_at = result.rollouts_at_target["grpo"];
    const double dapo_at = result.rollouts_at_target["dapo"];
    if (pc_at >= 0.0 && grpo_at >= 0.0) result.grpo_over_pc = grpo_at / pc_at;
    if (pc_at >= 0.0 && dapo_at >= 0.0) result.dapo_over_pc = dapo_at / pc_at;

    // Per-run summaries share the compare target.
    for (auto& [method, runs] : result.runs) {
        for (RunResult& run : runs) {
            run.summary.target = result.target;
            run.summary.rollouts_to_target = rollouts_to_target(run.series, result.target);
        }
    }
    return result;
}

std::string compare_table_text(const CompareResult& result) {
    std::string out;
    out += "method    seed        steps   peak      at-target-rollouts\n";
    for (const auto& [method, runs] : result.runs) {
        for (const RunResult& run : runs) {
            char line[128];
            std::string at = run.summary.rollouts_to_target == kNeverReached
                                 ? "never"
                                 : std::to_string(run.summary.rollouts_to_target);
            std::snprintf(line, sizeof(line), "%-9s %-11llu %-7lld %-9s %s\n", method.c_str(),
                          static_cast<unsigned long long>(run.summary.seed),
                          static_cast<long long>(run.summary.steps),
                          format4(run.summary.peak_success).c_str(), at.c_str());
            out += line;
        }
    }
    out += "\ntarget mean_success: " + format4(result.target) + "\n";
    out += "seed-averaged rollouts to target:\n";
    for (const auto& [method, at] : result.rollouts_at_target) {
        out += "  " + method + ": " + (at < 0.0 ? "never" : format2(at)) + "\n";
    }
    out += "efficiency vs pc:\n";
    out += "  grpo/pc: " +
           (result.grpo_over_pc ? format2(*result.grpo_over_pc) : std::string("n/a")) + "\n";
    out += "  dapo/pc: " +
           (result.dapo_over_pc ? format2(*result.dapo_over_pc) : std::string("n/a")) + "\n";
    return out;
}

std::string compare_summary_json(const CompareResult& result,
                                 const ExperimentConfig& config) {
    json j;
    j["config_digest"] = config.digest();
    j["target"] = result.target;
    json methods = json::object();
    for (const auto& [method, runs] : result.runs) {
        json per_method;
        per_method["rollouts_to_target_avg"] = result.rollouts_at_target.at(method);
        json per_seed = json::array();
        for (const RunResult& run : runs) {
            json s;
            s["seed"] = run.summary.seed;
            s["steps"] = run.summary.steps;
            s["peak_success"] = run.summary.peak_success;
            s["rollouts_to_target"] = run.summary.rollouts_to_target;
            s["sampled_total"] = run.summary.sampled_total;
            s["trained_total"] = run.summary.trained_total;
            s["exhausted_at"] = run.summary.exhausted_at;
            per_seed.push_back(s);
        }
        per_method["runs"] = per_seed;
        methods[method] = per_method;
    }
    j["methods"] = methods;
    j["grpo_over_pc"] = result.grpo_over_pc ? json(*result.grpo_over_pc) : json(nullptr);
    j["dapo_over_pc"] = result.dapo_over_pc ? json(*result.dapo_over_pc) : json(nullptr);
    return j.dump(2) + "\n";
}

namespace {

void write_run_files(const fs::path& dir, const RunResult& run) {
    const std::string stem = run.summary.method + "_seed" + std::to_string(run.summary.seed);
    write_text_file(dir / (stem + ".csv"), metrics_to_csv(run.series));
    write_text_file(dir / (stem + "_summary.json"), summary_to_json(run.summary));
}

double resolve_target(const ExperimentConfig& config, const RunResult& run) {
    if (config.target_policy == TargetPolicy::fixed) return config.target_value;
    return run.summary.peak_success;  // single-method run: its own peak
}

}  // namespace

ExperimentReport run_experiment(const ExperimentConfig& config) {
    config.validate();
    fs::create_directories(config.output_dir);
    const fs::path dir(config.output_dir);

    ExperimentReport report;
    if (config.method == "compare") {
        CompareResult result = run_compare(config);
        for (const auto& [method, runs] : result.runs) {
            for (const RunResult& run : runs) write_run_files(dir, run);
        }
        report.table_text = compare_table_text(result);
        report.summary_json = compare_summary_json(result, config);
        write_text_file(dir / "compare_summary.json", report.summary_json);
        return report;
    }

    json all = json::array();
    std::string table = "method    seed        steps   peak      sampled_total\n";
    for (std::uint64_t seed : config.seeds) {
        RunResult run = run_single(config, config.method, seed);
        run.summary.target = resolve_target(config, run);
        run.summary.rollouts_to_target = rollouts_to_target(run.series, run.summary.target);
        write_run_files(dir, run);
        all.push_back(json::parse(summary_to_json(run.summary)));
        char line[128];
        std::snprintf(line, sizeof(line), "%-9s %-11llu %-7lld %-9s %lld\n",
                      config.method.c_str(), static_cast<unsigned long long>(seed),
                      static_cast<long long>(run.summary.steps),
                      format4(run.summary.peak_success).c_str(),
                      static_cast<long long>(run.summary.sampled_total));
        table += line;
    }
    report.table_text = table;
    report.summary_json = all.dump(2) + "\n";
    write_text_file(dir / (config.method + "_summary.json"), report.summary_json);
    return report;
}

SweepResult run_sweep(const ExperimentConfig& config, const std::string& axis,
                      const std::vector<double>& values, SweepMode mode) {
    config.validate();
    if (axis != "n_pilot" && axis != "p_lower" && axis != "p_upper" && axis != "p_solve" &&
        axis != "d") {
        throw config_error("axis",
                           "must be one of n_pilot, p_lower, p_upper, p_solve, d");
    }
    if (values.empty()) throw config_error("values", "must not be empty");
    if (mode != SweepMode::direct && axis != "n_pilot") {
        throw config_error("mode", "equal-training/equal-sampling apply to n_pilot sweeps");
    }

    const SchedulerConfig& base = config.scheduler;
    const std::int64_t fixed_training = base.n_pilot + base.n_commit;
    const std::int64_t fixed_sampling =
        static_cast<std::int64_t>(base.b_g()) * base.n_pilot +
        static_cast<std::int64_t>(base.b_t) * base.n_commit;

    SweepResult result;
    result.axis = axis;
    result.mode = mode;

    std::string table = "axis=" + axis + "\nvalue     n_pilot n_commit sampled/step  peak      at-target\n";
    for (double value : values) {
        SweepPoint point;
        point.value = value;
        ExperimentConfig cfg = config;
        cfg.method = "pc";

        if (axis == "n_pilot") {
            const auto n_pilot = static_cast<std::int64_t>(value);
            if (n_pilot < 1 || static_cast<double>(n_pilot) != value) {
                point.feasible = false;
                point.note = "n_pilot must be a positive integer";
            } else if (mode == SweepMode::equal_sampling) {
                const std::int64_t pilot_cost = cfg.scheduler.b_g() * n_pilot;
                const std::int64_t remainder = fixed_sampling - pilot_cost;
                if (remainder < 0 || remainder % cfg.scheduler.b_t != 0) {
                    point.feasible = false;
                    point.note = "no integral n_commit keeps per-step sampling at " +
                                 std::to_string(fixed_sampling);
                } else {
                    cfg.scheduler.n_pilot = static_cast<std::int32_t>(n_pilot);
                    cfg.scheduler.n_commit =
                        static_cast<std::int32_t>(remainder / cfg.scheduler.b_t);
                }
            } else {  // equal_training and direct both hold n_pilot + n_commit fixed
                if (n_pilot > fixed_training) {
                    point.feasible = false;
                    point.note = "n_pilot exceeds the fixed training total " +
                                 std::to_string(fixed_training);
                } else {
                    cfg.scheduler.n_pilot = static_cast<std::int32_t>(n_pilot);
                    cfg.scheduler.n_commit = static_cast<std::int32_t>(fixed_training - n_pilot);
                }
            }
        } else if (axis == "p_lower") {
            cfg.scheduler.p_lower = value;
        } else if (axis == "p_upper") {
            cfg.scheduler.p_upper = value;
        } else if (axis == "p_solve") {
            cfg.scheduler.p_solve = value;
        } else {  // d
            const auto d = static_cast<std::int64_t>(value);
            if (d < 0 || static_cast<double>(d) != value) {
                point.feasible = false;
                point.note = "d must be a non-negative integer";
            } else {
                cfg.scheduler.max_age_d = static_cast<std::int32_t>(d);
            }
        }

        if (point.feasible) {
            try {
                cfg.scheduler.validate();
            } catch (const config_error& e) {
                point.feasible = false;
                point.note = e.what();
            }
        }

        if (point.feasible) {
            point.n_pilot = cfg.scheduler.n_pilot;
            point.n_commit = cfg.scheduler.n_commit;
            point.expected_sampled_per_step =
                static_cast<std::int64_t>(cfg.scheduler.b_g()) * cfg.scheduler.n_pilot +
                static_cast<std::int64_t>(cfg.scheduler.b_t) * cfg.scheduler.n_commit;

            std::vector<std::vector<StepMetrics>> series;
            double peak = 0.0;
            std::int64_t sampled_total = 0;
            std::int64_t trained_total = 0;
            for (std::uint64_t seed : cfg.seeds) {
                RunResult run = run_single(cfg, "pc", seed);
                peak += run.summary.peak_success;
                sampled_total += run.summary.sampled_total;
                trained_total += run.summary.trained_total;
                series.push_back(std::move(run.series));
            }
            const auto n_seeds = static_cast<double>(cfg.seeds.size());
            point.summary.method = "pc";
            point.summary.config_digest = cfg.digest();
            point.summary.peak_success = peak / n_seeds;
            point.summary.sampled_total =
                static_cast<std::int64_t>(sampled_total / cfg.seeds.size());
            point.summary.trained_total =
                static_cast<std::int64_t>(trained_total / cfg.seeds.size());
            if (config.target_policy == TargetPolicy::fixed) {
                point.summary.target = config.target_value;
                const double at =
                    rollouts_to_target(average_series(series), config.target_value);
                point.summary.rollouts_to_target =
                    at < 0.0 ? kNeverReached : static_cast<std::int64_t>(at);
            }
            char line[160];
            std::string at = point.summary.rollouts_to_target == kNeverReached
                                 ? "-"
                                 : std::to_string(point.summary.rollouts_to_target);
            std::snprintf(line, sizeof(line), "%-9s %-7d %-8d %-13lld %-9s %s\n",
                          format4(value).c_str(), point.n_pilot, point.n_commit,
                          static_cast<long long>(point.expected_sampled_per_step),
                          format4(point.summary.peak_success).c_str(), at.c_str());
            table += line;
        } else {
            table += format4(value) + "  infeasible: " + point.note + "\n";
        }
        result.points.push_back(std::move(point));
    }
    result.table_text = table;
    return result;
}

std::string sweep_summary_json(const SweepResult& result) {
    json j;
    j["axis"] = result.axis;
    switch (result.mode) {
        case SweepMode::direct: j["mode"] = "direct"; break;
        case SweepMode::equal_training: j["mode"] = "equal-training"; break;
        case SweepMode::equal_sampling: j["mode"] = "equal-sampling"; break;
    }
    json points = json::array();
    for (const SweepPoint& p : result.points) {
        json pj;
        pj["value"] = p.value;
        pj["feasible"] = p.feasible;
        if (!p.feasible) {
            pj["note"] = p.note;
        } else {
            pj["n_pilot"] = p.n_pilot;
            pj["n_commit"] = p.n_commit;
            pj["sampled_per_step"] = p.expected_sampled_per_step;
            pj["peak_success"] = p.summary.peak_success;
            pj["rollouts_to_target"] = p.summary.rollouts_to_target == kNeverReached
                                           ? json(nullptr)
                                           : json(p.summary.rollouts_to_target);
            pj["sampled_total"] = p.summary.sampled_total;
            pj["trained_total"] = p.summary.trained_total;
        }
        points.push_back(pj);
    }
    j["points"] = points;
    return j.dump(2) + "\n";
}

}  // namespace pcsim
