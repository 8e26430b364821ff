#include "pcsim.h"

#include <cctype>
#include <cstring>
#include <string>
#include <vector>

#include "pcsim/errors.hpp"
#include "pcsim/experiment.hpp"

extern "C" {

struct pcsim_config {
    pcsim::ExperimentConfig cfg;
    std::string json_scratch;
};

struct pcsim_report {
    std::string text;
    std::string json;
};

}  // extern "C"

namespace {

thread_local std::string g_last_error = "no error";

pcsim_status fail(pcsim_status status, const char* message) {
    g_last_error = message;
    return status;
}

pcsim_status fail_current_exception() {
    try {
        throw;
    } catch (const pcsim::config_error& e) {
        g_last_error = e.what();
        return PCSIM_ERROR_CONFIG;
    } catch (const std::invalid_argument& e) {
        g_last_error = e.what();
        return PCSIM_ERROR_INVALID_ARGUMENT;
    } catch (const std::ios_base::failure& e) {
        g_last_error = e.what();
        return PCSIM_ERROR_IO;
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return PCSIM_ERROR_RUNTIME;
    } catch (...) {
        g_last_error = "unknown error";
        return PCSIM_ERROR_RUNTIME;
    }
}

std::vector<double> parse_values_csv(const char* text) {
    std::vector<double> values;
    const std::string s(text);
    std::size_t pos = 0;
    while (pos < s.size()) {
        std::size_t comma = s.find(',', pos);
        if (comma == std::string::npos) comma = s.size();
        const std::string item = s.substr(pos, comma - pos);
        if (!item.empty()) {
            std::size_t used = 0;
            const double v = std::stod(item, &used);
            while (used < item.size() && std::isspace(static_cast<unsigned char>(item[used]))) {
                ++used;
            }
            if (used != item.size()) {
                throw std::invalid_argument("bad number in values list: '" + item + "'");
            }
            values.push_back(v);
        }
        pos = comma + 1;
    }
    if (values.empty()) throw std::invalid_argument("values list is empty");
    return values;
}

}  // namespace

extern "C" {

const char* pcsim_version(void) { return "1.0.0"; }

const char* pcsim_last_error(void) { return g_last_error.c_str(); }

pcsim_status pcsim_config_create_default(pcsim_config** out_config) {
    if (!out_config) return fail(PCSIM_ERROR_INVALID_ARGUMENT, "out_config is null");
    try {
        *out_config = new pcsim_config{};
        return PCSIM_OK;
    } catch (...) {
        return fail_current_exception();
    }
}

pcsim_status pcsim_config_load_file(const char* path, pcsim_config** out_config) {
    if (!path || !out_config) {
        return fail(PCSIM_ERROR_INVALID_ARGUMENT, "path or out_config is null");
    }
    try {
        auto handle = new pcsim_config{};
        try {
            handle->cfg = pcsim::ExperimentConfig::load_file(path);
        } catch (...) {
            delete handle;
            throw;
        }
        *out_config = handle;
        return PCSIM_OK;
    } catch (const pcsim::config_error&) {
        return fail_current_exception();
    } catch (const pcsim::error& e) {
        g_last_error = e.what();
        return PCSIM_ERROR_IO;
    } catch (...) {
        return fail_current_exception();
    }
}

pcsim_status pcsim_config_load_json(const char* json_text, pcsim_config** out_config) {
    if (!json_text || !out_config) {
        return fail(PCSIM_ERROR_INVALID_ARGUMENT, "json_text or out_config is null");
    }
    try {
        auto handle = new pcsim_config{};
        try {
            handle->cfg = pcsim::ExperimentConfig::from_json_text(json_text);
        } catch (...) {
            delete handle;
            throw;
        }
        *out_config = handle;
        return PCSIM_OK;
    } catch (...) {
        return fail_current_exception();
    }
}

void pcsim_config_free(pcsim_config* config) { delete config; }

pcsim_status pcsim_config_set_method(pcsim_config* config, const char* method) {
    if (!config || !method) return fail(PCSIM_ERROR_INVALID_ARGUMENT, "null argument");
    const std::string m(method);
    if (m != "grpo" && m != "dapo" && m != "pc" && m != "compare") {
        return fail(PCSIM_ERROR_CONFIG, "method must be one of grpo, dapo, pc, compare");
    }
    config->cfg.method = m;
    return PCSIM_OK;
}

pcsim_status pcsim_config_set_seeds(pcsim_config* config, const uint64_t* seeds,
                                    size_t count) {
    if (!config || (!seeds && count > 0)) {
        return fail(PCSIM_ERROR_INVALID_ARGUMENT, "null argument");
    }
    if (count == 0) return fail(PCSIM_ERROR_CONFIG, "seeds: must not be empty");
    config->cfg.seeds.assign(seeds, seeds + count);
    return PCSIM_OK;
}

pcsim_status pcsim_config_set_max_steps(pcsim_config* config, int64_t max_steps) {
    if (!config) return fail(PCSIM_ERROR_INVALID_ARGUMENT, "config is null");
    if (max_steps < 0) return fail(PCSIM_ERROR_CONFIG, "max_steps: must be >= 0");
    config->cfg.max_steps = max_steps;
    return PCSIM_OK;
}

pcsim_status pcsim_config_set_output_dir(pcsim_config* config, const char* path) {
    if (!config || !path) return fail(PCSIM_ERROR_INVALID_ARGUMENT, "null argument");
    if (!*path) return fail(PCSIM_ERROR_CONFIG, "output_dir: must not be empty");
    config->cfg.output_dir = path;
    return PCSIM_OK;
}

const char* pcsim_config_json(pcsim_config* config) {
    if (!config) return "";
    config->json_scratch = config->cfg.to_json_text();
    return config->json_scratch.c_str();
}

pcsim_status pcsim_run(const pcsim_config* config, pcsim_report** out_report) {
    if (!config || !out_report) {
        return fail(PCSIM_ERROR_INVALID_ARGUMENT, "config or out_report is null");
    }
    try {
        pcsim::ExperimentReport r = pcsim::run_experiment(config->cfg);
        *out_report = new pcsim_report{std::move(r.table_text), std::move(r.summary_json)};
        return PCSIM_OK;
    } catch (...) {
        return fail_current_exception();
    }
}

pcsim_status pcsim_sweep(const pcsim_config* config, const char* axis, const char* values,
                         const char* mode, pcsim_report** out_report) {
    if (!config || !axis || !values || !out_report) {
        return fail(PCSIM_ERROR_INVALID_ARGUMENT, "null argument");
    }
    try {
        pcsim::SweepMode sweep_mode = pcsim::SweepMode::direct;
        if (mode && *mode) {
            const std::string m(mode);
            if (m == "direct") {
                sweep_mode = pcsim::SweepMode::direct;
            } else if (m == "equal-training") {
                sweep_mode = pcsim::SweepMode::equal_training;
            } else if (m == "equal-sampling") {
                sweep_mode = pcsim::SweepMode::equal_sampling;
            } else {
                return fail(PCSIM_ERROR_CONFIG,
                            "mode must be direct, equal-training, or equal-sampling");
            }
        }
        pcsim::SweepResult r =
            pcsim::run_sweep(config->cfg, axis, parse_values_csv(values), sweep_mode);
        std::string json_text = pcsim::sweep_summary_json(r);
        *out_report = new pcsim_report{std::move(r.table_text), std::move(json_text)};
        return PCSIM_OK;
    } catch (...) {
        return fail_current_exception();
    }
}

const char* pcsim_report_text(const pcsim_report* report) {
    return report ? report->text.c_str() : "";
}

const char* pcsim_report_json(const pcsim_report* report) {
    return report ? report->json.c_str() : "";
}

void pcsim_report_free(pcsim_report* report) { delete report; }

}  // extern "C"
