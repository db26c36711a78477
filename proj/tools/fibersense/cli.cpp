#include "cli.hpp"

#include <iostream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "fibersense/core/error.hpp"
#include "pipeline.hpp"
#include "run_config.hpp"

namespace fibersense::app {

namespace {

int fail(int code, const std::string& msg) {
  std::cerr << "fibersense: error: " << msg << '\n';
  return code;
}

}  // namespace

int run_cli(int argc, char** argv) {
  CLI::App app{"Simulate and process DAS, BOTDR and SOP measurements of a segmented subsea cable."};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config;
  Overrides ov;
  std::uint64_t seed = 0;
  std::string output;
  std::size_t jobs = 0;
  app.add_option("-c,--config", config, "Run configuration (JSON)")->required();
  auto* seed_opt = app.add_option("--seed", seed, "Override the run seed");
  auto* out_opt = app.add_option("-o,--output", output,
                                 fmt::format("Output directory (default: ${}/<scenario>)", kOutputRootEnv));
  auto* jobs_opt = app.add_option("-j,--jobs", jobs, "Worker threads (default: logical cores)");

  std::string modality;
  auto* sim = app.add_subcommand("simulate", "Synthesize the field and every enabled modality's raw data");
  sim->add_option("--modality", modality, "Only this modality (das, botdr, sop)");
  auto* proc = app.add_subcommand("process", "Derive products and plot tables from simulated data");
  proc->add_option("--modality", modality, "Only this modality (das, botdr, sop)");
  auto* rep = app.add_subcommand("report", "Write the cross-modal report");

  std::size_t block_t = 0, block_x = 0;
  auto* das = app.add_subcommand("das", "DAS pipeline steps");
  das->require_subcommand(1);
  auto* das_sim = das->add_subcommand("simulate", "Phase record (or its ground truth) for the DAS range");
  auto* das_proc = das->add_subcommand("process", "Strain std waterfall, taps, tones");
  auto* bt_opt = das_proc->add_option("--block-t", block_t, "Frames per std block");
  auto* bx_opt = das_proc->add_option("--block-x", block_x, "Channels per std block");

  std::vector<std::string> epochs;
  auto* botdr = app.add_subcommand("botdr", "BOTDR pipeline steps");
  botdr->require_subcommand(1);
  auto* botdr_sim = botdr->add_subcommand("simulate", "Brillouin gain spectra per epoch");
  botdr_sim->add_option("--epoch", epochs, "before, after or relaxed (repeatable; default all)");
  auto* botdr_fit_cmd = botdr->add_subcommand("fit", "Fit the Brillouin frequency shift per position");
  auto* botdr_diff_cmd = botdr->add_subcommand("diff", "Strain change against the pre-storm scan");

  double window_s = 0.0;
  auto* sop = app.add_subcommand("sop", "SOP pipeline steps");
  sop->require_subcommand(1);
  auto* sop_sim = sop->add_subcommand("simulate", "Detected dual-channel trace");
  auto* sop_proc = sop->add_subcommand("process", "Normalized S1 and spectrogram");
  auto* win_opt = sop_proc->add_option("--window-s", window_s, "RMS window length in seconds");

  double cal_lo = 5000.0, cal_hi = 15000.0, cal_target = 2.9;
  auto* cal = app.add_subcommand("calibrate", "Coupling scale that puts the noiseless DAS peak at a target");
  cal->add_option("--from-m", cal_lo, "Start of the span searched for the peak");
  cal->add_option("--to-m", cal_hi, "End of the span searched for the peak");
  cal->add_option("--target", cal_target, "Target peak std in nanostrain");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfig;
  }

  try {
    if (*seed_opt) ov.seed = seed;
    if (*out_opt) ov.output = output;
    if (*jobs_opt) ov.jobs = jobs;
    if (*bt_opt) ov.block_t = block_t;
    if (*bx_opt) ov.block_x = block_x;
    if (*win_opt) ov.window_s = window_s;
    const RunConfig rc = load_run_config(config, ov);
    std::optional<Modality> only;
    if (!modality.empty()) only = modality_from_string(modality);

    if (*sim) {
      simulate(rc, only);
    } else if (*proc) {
      process(rc, only);
    } else if (*rep) {
      report(rc);
    } else if (*das_sim) {
      rc.require_seed();
      das_simulate(rc);
    } else if (*das_proc) {
      das_process(rc);
    } else if (*botdr_sim) {
      rc.require_seed();
      std::vector<scenario::Epoch> es;
      for (const auto& e : epochs) {
        try {
          es.push_back(scenario::epoch_from_string(e));
        } catch (const std::exception& ex) {
          throw ConfigError(fmt::format("--epoch: {}", ex.what()));
        }
      }
      botdr_simulate(rc, es);
    } else if (*botdr_fit_cmd) {
      botdr_fit(rc);
    } else if (*botdr_diff_cmd) {
      botdr_diff(rc);
    } else if (*sop_sim) {
      rc.require_seed();
      sop_simulate(rc);
    } else if (*sop_proc) {
      sop_process(rc);
    } else if (*cal) {
      const auto s = suggest_coupling(rc, cal_lo, cal_hi, cal_target);
      std::cout << fmt::format("peak noiseless std {:.4f} nstrain at {:.0f} m\n", s.current_peak, s.peak_position_m)
                << fmt::format("scale couplings in [{:.0f}, {:.0f}] m by {:.6f} to reach {} nstrain\n", cal_lo, cal_hi,
                               s.scale, cal_target);
    }
  } catch (const ConfigError& e) {
    return fail(kConfig, e.what());
  } catch (const InvalidArgument& e) {
    return fail(kConfig, e.what());
  } catch (const FormatError& e) {
    return fail(kFormat, e.what());
  } catch (const std::exception& e) {
    return fail(kInternal, e.what());
  }
  return kOk;
}

}  // namespace fibersense::app
