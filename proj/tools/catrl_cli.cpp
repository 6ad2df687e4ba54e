// catrl: run experiments from config files.
//
//   catrl run --config a.ini [--config b.ini ...] [--out DIR] [--seed N]
//   catrl compare --config a.ini --config b.ini [--out DIR] [--seed N]
//   catrl compare --oracle --config a.ini [--out DIR] [--seed N]
//   catrl list-envs | list-algos
//
// Exit codes: 0 ok, 2 bad config or argument, 3 no convergence, 1 otherwise.

#include <CLI11.hpp>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "catrl/config.hpp"
#include "catrl/csv.hpp"
#include "catrl/errors.hpp"
#include "catrl/experiment.hpp"

namespace {

namespace fs = std::filesystem;
using catrl::config::ExperimentConfig;

constexpr int kConfigExit = 2;
constexpr int kNonConvergenceExit = 3;

struct Options {
  std::vector<std::string> configs;
  std::string out;
  std::optional<std::uint64_t> seed;
  bool oracle = false;
};

ExperimentConfig load(const std::string& path, const Options& opt) {
  ExperimentConfig c = catrl::config::load_config(path);
  if (opt.seed) c.seed = opt.seed;
  return c;
}

fs::path out_dir(const ExperimentConfig& c, const Options& opt) {
  if (!opt.out.empty()) return opt.out;
  if (!c.out.empty()) return c.out;
  return ".";
}

void write_file(const fs::path& path, const std::string& content) {
  fs::create_directories(path.parent_path().empty() ? fs::path(".") : path.parent_path());
  std::ofstream out(path, std::ios::binary);
  out << content;
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

// Runs `body`, mapping library errors to exit codes.
template <class F>
int guarded(F&& body) {
  try {
    body();
    return 0;
  } catch (const catrl::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigExit;
  } catch (const catrl::DomainError& e) {
    std::cerr << "domain error: " << e.what() << '\n';
    return kConfigExit;
  } catch (const catrl::UnsupportedOp& e) {
    std::cerr << "unsupported: " << e.what() << '\n';
    return kConfigExit;
  } catch (const catrl::NonConvergence& e) {
    std::cerr << "no convergence: " << e.what() << '\n';
    return kNonConvergenceExit;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}

int cmd_run(const Options& opt) {
  // Each config runs on its own worker; results are reported in input order.
  std::vector<std::future<catrl::experiment::RunResult>> jobs;
  std::vector<ExperimentConfig> configs;
  int status = 0;
  for (const auto& path : opt.configs) {
    const int code = guarded([&] { configs.push_back(load(path, opt)); });
    if (code != 0) return code;
  }
  for (const auto& c : configs) {
    jobs.push_back(std::async(std::launch::async, [c] { return catrl::experiment::run(c); }));
  }
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    const int code = guarded([&] {
      const auto result = jobs[i].get();
      const fs::path dir = out_dir(configs[i], opt);
      for (const auto& f : result.files) {
        write_file(dir / (result.label + "_" + f.suffix), f.content);
      }
      std::cout << result.summary << '\n';
    });
    if (code != 0 && status == 0) status = code;
  }
  return status;
}

int cmd_compare(const Options& opt) {
  return guarded([&] {
    if (opt.oracle) {
      if (opt.configs.size() != 1) throw catrl::ConfigError("--oracle takes one --config");
      const ExperimentConfig c = load(opt.configs[0], opt);
      const auto cmp = catrl::experiment::compare_with_oracle(c);
      write_file(out_dir(c, opt) / (c.label() + "_oracle.csv"), cmp.csv);
      std::cout << c.label() << ": oracle comparison steps=" << cmp.steps
                << " max_abs_dq=" << catrl::format_number(cmp.max_difference) << '\n';
      return;
    }
    if (opt.configs.size() != 2) throw catrl::ConfigError("compare takes two --config files");
    const ExperimentConfig a = load(opt.configs[0], opt);
    const ExperimentConfig b = load(opt.configs[1], opt);
    auto job_a = std::async(std::launch::async, [&a] { return catrl::experiment::run(a); });
    auto job_b = std::async(std::launch::async, [&b] { return catrl::experiment::run(b); });
    const auto ra = job_a.get();
    const auto rb = job_b.get();
    const std::string joined = catrl::experiment::join_curves(ra, rb);
    write_file(out_dir(a, opt) / (ra.label + "_vs_" + rb.label + "_compare.csv"), joined);
    std::cout << ra.summary << '\n' << rb.summary << '\n';
  });
}

int cmd_list_envs() {
  for (const auto& e : catrl::config::environments()) {
    std::cout << e.name << " (" << e.kind << "): " << e.summary << '\n';
  }
  return 0;
}

int cmd_list_algos() {
  for (const auto& a : catrl::config::algorithms()) {
    std::cout << a.name << " (" << a.kind << "): " << a.summary << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Compositional tabular and approximate reinforcement learning experiments"};
  app.require_subcommand(1);
  Options opt;
  std::uint64_t seed = 0;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", opt.configs, "experiment config file (repeatable)")
        ->required()
        ->check(CLI::ExistingFile);
    cmd->add_option("--out", opt.out, "output directory (overrides experiment.out)");
    cmd->add_option("--seed", seed, "override experiment.seed");
  };
  CLI::App* run = app.add_subcommand("run", "run one or more experiments");
  add_common(run);
  CLI::App* compare = app.add_subcommand("compare", "join two learning curves");
  add_common(compare);
  compare->add_flag("--oracle", opt.oracle,
                    "compare one config against its direct implementation instead");
  CLI::App* list_envs = app.add_subcommand("list-envs", "list environments");
  CLI::App* list_algos = app.add_subcommand("list-algos", "list algorithms");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfigExit;
  }
  for (CLI::App* cmd : {run, compare}) {
    if (cmd->parsed() && cmd->count("--seed") > 0) opt.seed = seed;
  }

  if (run->parsed()) return cmd_run(opt);
  if (compare->parsed()) return cmd_compare(opt);
  if (list_envs->parsed()) return cmd_list_envs();
  if (list_algos->parsed()) return cmd_list_algos();
  return kConfigExit;
}
