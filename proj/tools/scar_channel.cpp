// SPDX-License-Identifier: Apache-2.0
//
// scar-channel: LiDAR-driven scatterer recognition and V2V channel synthesis
// Copyright (C) 2026 The scar-channel authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------


// Command-line front end: synth, featurize, recognize, simulate, eval.

#include "scar/error.hpp"
#include "scar/pipeline.hpp"

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <iostream>
#include <optional>

namespace
{
void setup_logging()
{
    auto logger = spdlog::stderr_color_mt("scar");
    spdlog::set_default_logger(logger);
    spdlog::set_pattern("[%l] %v");
    spdlog::set_level(spdlog::level::warn);
    if (const char *env = std::getenv("SCAR_CHANNEL_LOG"))
    {
        const auto level = spdlog::level::from_str(env);
        // from_str maps unknown names to "off"; only accept it when asked for.
        if (level != spdlog::level::off || std::string(env) == "off")
            spdlog::set_level(level);
        else
            spdlog::warn("SCAR_CHANNEL_LOG='{}' is not a log level; using warn", env);
    }
}

struct RunFlags
{
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> jobs;
    std::string out;
};

void add_run_flags(CLI::App *cmd, RunFlags &f)
{
    cmd->add_option("--config", f.config, "Configuration file (JSON with comments)")->check(CLI::ExistingFile);
    cmd->add_option("--seed", f.seed, "Random seed (overrides the config)");
    cmd->add_option("--jobs", f.jobs, "Worker threads (overrides the config)")->check(CLI::PositiveNumber);
    cmd->add_option("--out", f.out, "Output directory (overrides the config)");
}

scar::RunConfig resolve(const RunFlags &f)
{
    scar::RunConfig cfg = f.config.empty() ? scar::config_from_json("{}") : scar::load_config(f.config);
    if (f.seed)
        cfg.seed = *f.seed;
    if (f.jobs)
        cfg.jobs = *f.jobs;
    if (!f.out.empty())
        cfg.out = f.out;
    cfg.validate();
    return cfg;
}
} // namespace

int main(int argc, char **argv)
{
    setup_logging();
    CLI::App app{"LiDAR-driven scatterer recognition and V2V channel synthesis"};
    app.require_subcommand(1);

    RunFlags synth, featurize, recognize, simulate;
    add_run_flags(app.add_subcommand("synth", "Generate a synthetic street scene on disk"), synth);
    add_run_flags(app.add_subcommand("featurize", "Write feature/truth SGM1 files and a dataset manifest"), featurize);
    add_run_flags(app.add_subcommand("recognize", "Write predicted scatterer maps (pred_<snapshot>.sgm1)"), recognize);
    add_run_flags(app.add_subcommand("simulate", "Synthesize CIRs and channel statistics"), simulate);

    std::string pred_dir, truth_dir, eval_out;
    auto *eval = app.add_subcommand("eval", "Score predicted scatterer maps against ground truth");
    eval->add_option("--pred", pred_dir, "Directory of pred_<id>.sgm1 files")->required()->check(CLI::ExistingDirectory);
    eval->add_option("--truth", truth_dir, "Directory of truth_<id>.sgm1 files")
        ->required()
        ->check(CLI::ExistingDirectory);
    eval->add_option("--out", eval_out, "Output directory")->required();

    CLI11_PARSE(app, argc, argv);

    try
    {
        if (app.got_subcommand("synth"))
            scar::cmd_synth(resolve(synth));
        else if (app.got_subcommand("featurize"))
            scar::cmd_featurize(resolve(featurize));
        else if (app.got_subcommand("recognize"))
            scar::cmd_recognize(resolve(recognize));
        else if (app.got_subcommand("simulate"))
            scar::cmd_simulate(resolve(simulate));
        else if (app.got_subcommand("eval"))
            scar::cmd_eval(pred_dir, truth_dir, eval_out);
    }
    catch (const std::exception &e)
    {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
