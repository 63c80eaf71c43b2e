// Command-line front end: train / eval / report.
//
// Exit codes: 0 ok, 2 configuration error, 3 runtime or numeric error.

#include <algorithm>
#include <cstdio>
#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "roadrl/config.hpp"
#include "roadrl/error.hpp"
#include "roadrl/report.hpp"
#include "roadrl/run.hpp"

namespace {

int run_cli(int argc, char** argv) {
  CLI::App app{"Recurrent Q-learning lab on a synthetic road world"};
  app.require_subcommand(1);

  // train
  std::string train_config;
  std::string train_out;
  long train_seed = -1;
  CLI::App* train = app.add_subcommand("train", "Train an agent from a config file");
  train->add_option("--config", train_config, "Run configuration file")->required();
  train->add_option("--seed", train_seed, "Override run.seed")
      ->check(CLI::NonNegativeNumber);
  train->add_option("--out", train_out, "Override run.out_dir");

  // eval
  roadrl::EvalRequest eval_req;
  std::string eval_mode = "train";
  CLI::App* eval = app.add_subcommand("eval", "Evaluate a checkpoint greedily");
  eval->add_option("--checkpoint", eval_req.checkpoint, "Checkpoint file")->required();
  eval->add_option("--mode", eval_mode, "Start pose set: train or test")
      ->check(CLI::IsMember({"train", "test"}));
  eval->add_option("--trials", eval_req.trials, "Trials per start pose");
  eval->add_option("--threads", eval_req.threads, "Worker threads");
  eval->add_option("--config", eval_req.config_path, "Run config for environment parameters");
  eval->add_option("--out", eval_req.out_dir, "Directory for eval.csv outputs");

  // report
  std::vector<std::string> report_dirs;
  std::string report_out = "report";
  CLI::App* report = app.add_subcommand("report", "Render figures from run directories");
  report->add_option("run_dirs", report_dirs, "Run directories with metrics.csv")->required();
  report->add_option("--out", report_out, "Output directory for SVG/CSV figures");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);  // prints the message or help text
    return code == 0 ? 0 : 2;
  }

  if (train->parsed()) {
    roadrl::RunConfig cfg = roadrl::RunConfig::from_file(train_config);
    if (train_seed >= 0) {
      cfg.seed = static_cast<std::uint64_t>(train_seed);
      cfg.net.seed = 0;  // rederive from the run seed
      cfg.finalize();
    }
    if (!train_out.empty()) cfg.out_dir = train_out;
    const roadrl::TrainResult res = roadrl::cmd_train(cfg);
    std::cout << "trained " << res.steps << " steps over " << res.episodes << " episodes ("
              << res.updates << " updates)\n"
              << "run directory: " << res.out_dir << "\n"
              << "final checkpoint: " << res.final_checkpoint << "\n";
  } else if (eval->parsed()) {
    eval_req.test_set = eval_mode == "test";
    const roadrl::EvalReport rep = roadrl::cmd_eval(eval_req);
    std::cout << rep.table(eval_mode + " set, " + std::to_string(eval_req.trials) + "x" +
                           std::to_string(rep.episodes.size() /
                                          std::max<std::size_t>(1, eval_req.trials)) +
                           " episodes")
              << "reward histogram [0,.25) [.25,.5) [.5,.75) [.75,1]: " << rep.reward_bins[0]
              << " " << rep.reward_bins[1] << " " << rep.reward_bins[2] << " "
              << rep.reward_bins[3] << "\n";
  } else if (report->parsed()) {
    roadrl::cmd_report(report_dirs, report_out);
    std::cout << "report written to " << report_out << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run_cli(argc, argv);
  } catch (const roadrl::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
