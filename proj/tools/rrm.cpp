#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "rrm/config.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace rrm;

namespace {

RunConfig read_config(const std::string& path) {
  return path.empty() ? RunConfig{} : load_run_config(path);
}

void write_json(const json& j, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << j.dump(2) << '\n';
    return;
  }
  if (const auto dir = fs::path(path).parent_path(); !dir.empty()) fs::create_directories(dir);
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << j.dump(2) << '\n';
}

std::ofstream open_out(const std::string& path) {
  if (const auto dir = fs::path(path).parent_path(); !dir.empty()) fs::create_directories(dir);
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << std::setprecision(10);
  return out;
}

const std::vector<BaselineKind> kAllBaselines{BaselineKind::full_reuse(), BaselineKind::tdm(),
                                              BaselineKind::itlinq()};

NormalizationStats collect_stats(const RunConfig& rc) {
  auto stats = fit(collect_offline_dataset(rc.env, kAllBaselines, rc.normalization.episodes,
                                           rc.normalization.seed),
                   rc.normalization.levels);
  stats.config_fingerprint = config_fingerprint(rc.env);
  return stats;
}

// Reuse the stats saved next to the training run unless asked to refit.
NormalizationStats stats_for(const RunConfig& rc, const std::string& path, bool refit) {
  if (refit || path.empty()) return collect_stats(rc);
  auto s = load_normalization(path);
  if (s.config_fingerprint != config_fingerprint(rc.env))
    std::cerr << "warning: normalization stats were fitted on a different config\n";
  return s;
}

EnvironmentSet env_set_for(const RunConfig& rc, const std::string& path) {
  if (!path.empty()) return load_environment_set(path);
  return make_environment_set(rc.env, rc.test_envs, rc.test_seed);
}

json eval_json(const Evaluation& ev, double bw) {
  json j = ev;
  j["mean_sum_rate_mbps"] = to_mbps(ev.mean_sum_rate, bw);
  j["mean_pct5_mbps"] = to_mbps(ev.mean_pct5, bw);
  j["mean_score_mbps"] = to_mbps(ev.mean_score, bw);
  return j;
}

void write_per_env_csv(const Evaluation& ev, std::span<const std::uint64_t> seeds,
                       double bw, const std::string& path) {
  auto out = open_out(path);
  out << "env_seed,sum_rate_mbps,pct5_mbps,score\n";
  for (std::size_t e = 0; e < ev.per_env.size(); ++e) {
    const auto& m = ev.per_env[e];
    out << seeds[e] << ',' << to_mbps(m.sum_rate, bw) << ',' << to_mbps(m.pct5_rate, bw) << ','
        << to_mbps(m.score, bw) << '\n';
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-agent DQN radio resource management simulator"};
  app.require_subcommand(1);

  std::string config_path;
  auto add_config = [&](CLI::App* sub) {
    sub->add_option("-c,--config", config_path, "Run config JSON (defaults if omitted)");
  };

  // config
  auto* show = app.add_subcommand("config", "Print the effective run config");
  add_config(show);

  // collect-norm-stats
  std::string out_path;
  auto* norm_cmd = app.add_subcommand("collect-norm-stats", "Fit observation percentiles and reward stats");
  add_config(norm_cmd);
  norm_cmd->add_option("-o,--out", out_path, "Output JSON")->required();

  // make-env-set / validation-set
  int count = 0;
  std::uint64_t seed = 0;
  auto* set_cmd = app.add_subcommand("make-env-set", "Persist random realizations");
  add_config(set_cmd);
  set_cmd->add_option("-n,--count", count, "Number of realizations")->required();
  set_cmd->add_option("-s,--seed", seed, "Seed")->required();
  set_cmd->add_option("-o,--out", out_path, "Output JSON")->required();

  auto* val_cmd = app.add_subcommand("validation-set", "Select representative realizations");
  add_config(val_cmd);
  val_cmd->add_option("-o,--out", out_path, "Output JSON")->required();

  // train
  std::string run_dir, norm_path, val_path;
  std::optional<std::uint64_t> train_seed;
  auto* train_cmd = app.add_subcommand("train", "Train the shared DQN policy");
  add_config(train_cmd);
  train_cmd->add_option("-s,--seed", train_seed, "Overrides trainer.seed");
  train_cmd->add_option("-o,--out", run_dir, "Run directory")->required();
  train_cmd->add_option("--norm", norm_path, "Existing normalization stats");
  train_cmd->add_option("--validation", val_path, "Existing validation set");

  // evaluate
  std::string ckpt_path, set_path;
  bool refit = false;
  auto* eval_cmd = app.add_subcommand("evaluate", "Score a checkpoint on an environment set");
  add_config(eval_cmd);
  eval_cmd->add_option("--checkpoint", ckpt_path, "Checkpoint file")->required();
  eval_cmd->add_option("--norm", norm_path, "Normalization stats from training");
  eval_cmd->add_flag("--refit", refit, "Refit normalization stats on the evaluation config");
  eval_cmd->add_option("--env-set", set_path, "Environment set (random test set if omitted)");
  eval_cmd->add_option("-o,--out", out_path, "Summary JSON (stdout if omitted)");
  std::string csv_path;
  eval_cmd->add_option("--csv", csv_path, "Per-environment CSV");

  // baseline
  std::string kind = "full_reuse";
  auto* base_cmd = app.add_subcommand("baseline", "Score a baseline (or random) policy");
  add_config(base_cmd);
  base_cmd->add_option("-k,--kind", kind, "full_reuse | tdm | itlinq | random");
  base_cmd->add_option("--env-set", set_path, "Environment set (random test set if omitted)");
  base_cmd->add_option("-o,--out", out_path, "Summary JSON (stdout if omitted)");
  base_cmd->add_option("--csv", csv_path, "Per-environment CSV");

  // analyze
  auto* analyze = app.add_subcommand("analyze", "Offline analyses");
  analyze->require_subcommand(1);
  int max_interferers = 9, realizations = 100;
  auto* interf = analyze->add_subcommand("interferers", "Mean SINR vs counted interferers");
  add_config(interf);
  interf->add_option("--max", max_interferers, "Largest interferer count");
  interf->add_option("--realizations", realizations, "Realizations to average");
  interf->add_option("-s,--seed", seed, "Seed");
  interf->add_option("-o,--out", out_path, "Output CSV")->required();

  auto* decisions = analyze->add_subcommand("decisions", "Per agent-interval decision log");
  add_config(decisions);
  decisions->add_option("--checkpoint", ckpt_path, "Checkpoint (otherwise --kind)");
  decisions->add_option("--norm", norm_path, "Normalization stats");
  decisions->add_option("-k,--kind", kind, "Baseline when no checkpoint is given");
  decisions->add_option("--env-set", set_path, "Environment set")->required();
  decisions->add_option("-o,--out", out_path, "Output CSV")->required();

  std::vector<std::string> inputs;
  auto* pareto = analyze->add_subcommand("pareto", "Non-dominated policies among evaluation JSONs");
  pareto->add_option("inputs", inputs, "Evaluation JSON files")->required();
  pareto->add_option("-o,--out", out_path, "Output CSV (stdout if omitted)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*show) {
      write_json(read_config(config_path), "-");
    } else if (*norm_cmd) {
      const auto rc = read_config(config_path);
      write_json(collect_stats(rc), out_path);
    } else if (*set_cmd) {
      const auto rc = read_config(config_path);
      save_environment_set(make_environment_set(rc.env, count, seed), out_path);
    } else if (*val_cmd) {
      const auto rc = read_config(config_path);
      save_environment_set(build_validation_set(rc.env, rc.validation, rc.validation_seed), out_path);
    } else if (*train_cmd) {
      auto rc = read_config(config_path);
      if (train_seed) rc.trainer.seed = *train_seed;
      fs::create_directories(run_dir);
      write_json(rc, (fs::path(run_dir) / "config.json").string());
      const auto stats = norm_path.empty() ? collect_stats(rc) : load_normalization(norm_path);
      save_normalization(stats, (fs::path(run_dir) / "norm_stats.json").string());
      const auto val = val_path.empty()
                           ? build_validation_set(rc.env, rc.validation, rc.validation_seed)
                           : load_environment_set(val_path);
      save_environment_set(val, (fs::path(run_dir) / "validation_set.json").string());
      const auto seeds = val.seeds();
      const auto res = run_training(rc.env, rc.trainer, stats, seeds,
                                    {run_dir, [](const EpochRecord& e) {
                                       std::cerr << "epoch " << e.epoch << " episodes " << e.episodes
                                                 << " eps " << e.epsilon << " loss " << e.mean_loss
                                                 << " score " << e.score << " Mbps\n";
                                     }});
      std::cerr << "best epoch " << res.best_epoch << '\n';
    } else if (*eval_cmd) {
      const auto rc = read_config(config_path);
      const auto ck = load_checkpoint(ckpt_path);
      const auto stats = stats_for(rc, norm_path, refit);
      const auto set = env_set_for(rc, set_path);
      const auto seeds = set.seeds();
      const auto ev = evaluate(AgentPolicy{&ck.net, stats.mapper, 0.0}, set.config, seeds);
      if (!csv_path.empty()) write_per_env_csv(ev, seeds, set.config.bandwidth_hz, csv_path);
      write_json(eval_json(ev, set.config.bandwidth_hz), out_path);
    } else if (*base_cmd) {
      const auto rc = read_config(config_path);
      const auto set = env_set_for(rc, set_path);
      const auto seeds = set.seeds();
      const Policy policy =
          kind == "random" ? Policy{RandomPolicy{}} : Policy{BaselineKind::parse(kind)};
      const auto ev = evaluate(policy, set.config, seeds, rc.trainer.seed);
      if (!csv_path.empty()) write_per_env_csv(ev, seeds, set.config.bandwidth_hz, csv_path);
      write_json(eval_json(ev, set.config.bandwidth_hz), out_path);
    } else if (*interf) {
      const auto rc = read_config(config_path);
      const auto prof = interference_profile(rc.env, max_interferers, realizations, seed);
      auto out = open_out(out_path);
      out << "interferers,mean_sinr_db\n";
      for (std::size_t n = 0; n < prof.size(); ++n) out << n << ',' << prof[n] << '\n';
    } else if (*decisions) {
      const auto set = load_environment_set(set_path);
      const auto seeds = set.seeds();
      auto out = open_out(out_path);
      if (!ckpt_path.empty()) {
        const auto ck = load_checkpoint(ckpt_path);
        const auto stats = stats_for(read_config(config_path), norm_path, false);
        export_decision_log(AgentPolicy{&ck.net, stats.mapper, 0.0}, set.config, seeds, out);
      } else {
        export_decision_log(BaselineKind::parse(kind), set.config, seeds, out);
      }
    } else if (*pareto) {
      struct Point {
        std::string name;
        double sum, pct5;
      };
      std::vector<Point> pts;
      for (const auto& path : inputs) {
        std::ifstream in(path);
        if (!in) throw std::runtime_error("cannot open " + path);
        const auto j = json::parse(in);
        pts.push_back({j.value("policy", path), j.at("mean_sum_rate_mbps").get<double>(),
                       j.at("mean_pct5_mbps").get<double>()});
      }
      std::ostringstream csv;
      csv << std::setprecision(10) << "policy,sum_rate_mbps,pct5_mbps,dominated\n";
      for (const auto& p : pts) {
        const bool dom = std::any_of(pts.begin(), pts.end(), [&](const Point& q) {
          return dominates(q.sum, q.pct5, p.sum, p.pct5);
        });
        csv << p.name << ',' << p.sum << ',' << p.pct5 << ',' << (dom ? 1 : 0) << '\n';
      }
      if (out_path.empty())
        std::cout << csv.str();
      else
        open_out(out_path) << csv.str();
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
