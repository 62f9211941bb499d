#include <cstdint>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "luresid/certificate.hpp"
#include "luresid/dataset.hpp"
#include "luresid/eval.hpp"
#include "luresid/io.hpp"
#include "luresid/model.hpp"
#include "luresid/sdp/pipeline.hpp"
#include "luresid/sector.hpp"
#include "luresid/trainer.hpp"
#include "luresid/types.hpp"
#include "luresid/version.hpp"

namespace {

using namespace luresid;

std::string version_string() {
  std::ostringstream out;
  out << "luresid " << kVersion << " (schemas: model " << kModelSchemaVersion
      << ", certificate " << kCertificateSchemaVersion << ", dataset "
      << kDatasetSchemaVersion << ", report " << kReportSchemaVersion
      << ", run-config " << kRunConfigSchemaVersion << ")";
  return out.str();
}

/// Flags and LURESID_* environment variables carry the same settings; an
/// explicit flag wins over the environment.
CLI::Option* env(CLI::Option* opt, const std::string& name) {
  return opt->envname("LURESID_" + name);
}

std::string joined(const std::string& dir, const std::string& name) {
  if (dir.empty()) return name;
  if (dir.back() == '/') return dir + name;
  return dir + "/" + name;
}

std::string first_failed_lmi(const CertificateReport& report) {
  if (!report.f_negative_definite) return "F";
  for (std::size_t i = 0; i < report.g_psd.size(); ++i) {
    if (!report.g_psd[i]) return "G" + std::to_string(i + 1);
  }
  if (!report.alpha_ok) return "alpha range";
  if (!report.delta_ok) return "input bound delta^2 <= (1 - alpha^2) s^2";
  return "none";
}

Json eval_report_to_json(const EvalReport& report) {
  Json axes = Json::array();
  for (Index i = 0; i < report.region_semi_axes.size(); ++i) {
    axes.push_back(report.region_semi_axes[i]);
  }
  return Json{
      {"schema_version", kReportSchemaVersion},
      {"mode", report.mode},
      {"nrmse", report.nrmse},
      {"certificate_status", report.certificate_status},
      {"delta", report.delta},
      {"region_semi_axes", std::move(axes)},
      {"counts",
       {{"truth_div_pred_div", report.counts.truth_div_pred_div},
        {"truth_div_pred_conv", report.counts.truth_div_pred_conv},
        {"truth_conv_pred_div", report.counts.truth_conv_pred_div},
        {"truth_conv_pred_conv", report.counts.truth_conv_pred_conv},
        {"total", report.counts.total()}}},
      {"trajectories", report.trajectories},
      {"parameter_count", report.parameter_count}};
}

// ---- generate ---------------------------------------------------------------

struct GenerateArgs {
  std::string out;
  GenConfig config;
  bool csv = false;
};

void run_generate(const GenerateArgs& args) {
  const Dataset dataset = generate(args.config);
  save_dataset(dataset, joined(args.out, "dataset.json"));

  GenConfig test_config = make_test_config(dataset.config);
  const Dataset test = generate(test_config);
  save_dataset(test, joined(args.out, "test.json"));

  if (args.csv) {
    for (std::size_t i = 0; i < dataset.trajectories.size(); ++i) {
      std::ostringstream name;
      name << "csv/traj_" << std::setw(5) << std::setfill('0') << i << ".csv";
      write_trajectory_csv(dataset.trajectories[i],
                           joined(args.out, name.str()));
    }
  }
  std::cout << "trajectories: " << dataset.trajectories.size() << " (+"
            << test.trajectories.size() << " test)\n"
            << "points: " << dataset.num_points() << "\n"
            << "delta = " << std::setprecision(17) << dataset.delta << "\n"
            << "s_true = " << dataset.config.s_true << "\n";
}

// ---- init -------------------------------------------------------------------

struct InitArgs {
  std::string out;
  std::string mode = "gensec";
  Index n = 2, r = 1, e = 1, m = 2;
  double delta = 1.0;
  double beta = 0.0;
  std::uint64_t seed = 0;
};

void run_init(const InitArgs& args) {
  const TrainMode mode = train_mode_from_string(args.mode);
  if (mode == TrainMode::nosec) {
    throw ConfigError("init: nosec mode has no certified initialization");
  }
  sdp::InitializeOptions options;
  options.pin_l_zero = (mode == TrainMode::stdsec);
  const std::optional<double> beta =
      args.beta > 0.0 ? std::optional<double>(args.beta) : std::nullopt;
  const auto init = sdp::initialize(Dimensions{args.n, args.r, args.e, args.m},
                                    args.delta, beta, args.seed, options);
  save_model(init.params, joined(args.out, "model.json"));
  save_certificate(init.certificate, joined(args.out, "certificate.json"));
  std::cout << "feasible initialization (s = " << init.certificate.s
            << ", alpha = " << init.certificate.alpha << ", "
            << init.info.newton_iterations << " Newton iterations)\n";
}

// ---- train ------------------------------------------------------------------

struct TrainArgs {
  std::string dataset_path;
  std::string out;
  std::string config_path;  // optional run config to reproduce
  std::string init_model, init_cert;
  std::string mode = "gensec";
  TrainConfig config;
};

Json train_config_to_json(const TrainConfig& config, double delta_used,
                          const std::string& dataset_path,
                          std::uint64_t dataset_hash) {
  return Json{{"schema_version", kRunConfigSchemaVersion},
              {"mode", to_string(config.mode)},
              {"epochs", config.epochs},
              {"batch_size", config.batch_size},
              {"learning_rate", config.learning_rate},
              {"adam_beta1", config.adam_beta1},
              {"adam_beta2", config.adam_beta2},
              {"adam_eps", config.adam_eps},
              {"nu0", config.nu0},
              {"nu_decay", config.nu_decay},
              {"nu_min", config.nu_min},
              {"delta", delta_used},
              {"check_every", config.check_every},
              {"seed", config.seed},
              {"rollback_limit", config.rollback_limit},
              {"model_n", config.model_n},
              {"model_m", config.model_m},
              {"beta", config.beta},
              {"dataset", dataset_path},
              {"dataset_hash", hex64(dataset_hash)}};
}

TrainConfig train_config_from_json(const Json& j) {
  TrainConfig config;
  config.mode = train_mode_from_string(j.at("mode").get<std::string>());
  config.epochs = j.at("epochs").get<Index>();
  config.batch_size = j.at("batch_size").get<Index>();
  config.learning_rate = j.at("learning_rate").get<double>();
  config.adam_beta1 = j.at("adam_beta1").get<double>();
  config.adam_beta2 = j.at("adam_beta2").get<double>();
  config.adam_eps = j.at("adam_eps").get<double>();
  config.nu0 = j.at("nu0").get<double>();
  config.nu_decay = j.at("nu_decay").get<double>();
  config.nu_min = j.at("nu_min").get<double>();
  config.delta = j.at("delta").get<double>();
  config.check_every = j.at("check_every").get<Index>();
  config.seed = j.at("seed").get<std::uint64_t>();
  config.rollback_limit = j.at("rollback_limit").get<Index>();
  config.model_n = j.at("model_n").get<Index>();
  config.model_m = j.at("model_m").get<Index>();
  config.beta = j.at("beta").get<double>();
  return config;
}

void run_train(TrainArgs& args, const std::vector<CLI::Option*>& set_flags) {
  if (!args.config_path.empty()) {
    const Json j = load_json_file(args.config_path);
    if (j.value("schema_version", 0) != kRunConfigSchemaVersion) {
      throw ParseError(args.config_path + ": unsupported run-config schema");
    }
    TrainConfig from_file = train_config_from_json(j);
    // Explicit flags override individual fields of the loaded config.
    for (const CLI::Option* opt : set_flags) {
      if (opt->count() == 0) continue;
      const std::string name = opt->get_name();
      if (name == "--mode") {
        from_file.mode = train_mode_from_string(args.mode);
      } else if (name == "--epochs") {
        from_file.epochs = args.config.epochs;
      } else if (name == "--batch-size") {
        from_file.batch_size = args.config.batch_size;
      } else if (name == "--lr") {
        from_file.learning_rate = args.config.learning_rate;
      } else if (name == "--nu0") {
        from_file.nu0 = args.config.nu0;
      } else if (name == "--nu-decay") {
        from_file.nu_decay = args.config.nu_decay;
      } else if (name == "--nu-min") {
        from_file.nu_min = args.config.nu_min;
      } else if (name == "--delta") {
        from_file.delta = args.config.delta;
      } else if (name == "--check-every") {
        from_file.check_every = args.config.check_every;
      } else if (name == "--seed") {
        from_file.seed = args.config.seed;
      } else if (name == "--rollback-limit") {
        from_file.rollback_limit = args.config.rollback_limit;
      } else if (name == "--model-n") {
        from_file.model_n = args.config.model_n;
      } else if (name == "--model-m") {
        from_file.model_m = args.config.model_m;
      } else if (name == "--beta") {
        from_file.beta = args.config.beta;
      }
    }
    args.config = from_file;
    if (args.dataset_path.empty() && j.contains("dataset")) {
      args.dataset_path = j.at("dataset").get<std::string>();
    }
  } else {
    args.config.mode = train_mode_from_string(args.mode);
  }
  if (args.dataset_path.empty()) {
    throw ConfigError("train: --dataset is required");
  }

  const Dataset dataset = load_dataset(args.dataset_path);
  const double delta_used =
      args.config.delta > 0.0 ? args.config.delta : dataset.delta;

  std::optional<InitialPoint> warm;
  if (!args.init_model.empty() || !args.init_cert.empty()) {
    if (args.init_model.empty() || args.init_cert.empty()) {
      throw ConfigError(
          "train: --init-model and --init-cert must be given together");
    }
    warm = InitialPoint{load_model(args.init_model),
                        load_certificate(args.init_cert)};
  }

  const TrainResult result = train(dataset, args.config, warm);

  const std::uint64_t dataset_hash = fnv1a64(read_text_file(args.dataset_path));
  save_json_file(train_config_to_json(args.config, delta_used,
                                      args.dataset_path, dataset_hash),
                 joined(args.out, "config.json"));
  write_history_csv(result.history, joined(args.out, "history.csv"));
  save_model(result.params, joined(args.out, "model.json"));
  if (result.certificate) {
    save_certificate(*result.certificate, joined(args.out, "certificate.json"));
  }
  const auto& last = result.history.empty() ? EpochRecord{} :
                                              result.history.back();
  std::cout << "trained " << to_string(args.config.mode) << " for "
            << result.history.size() << " epochs (final mse "
            << std::setprecision(6) << last.mse << ", restores "
            << result.total_restores << ", rollbacks "
            << result.total_rollbacks << ")\n";
}

// ---- analyze ----------------------------------------------------------------

struct AnalyzeArgs {
  std::string model_path;
  std::string out;
  double alpha = 0.97;
  double delta = 0.0;
  Index boundary_points = 256;
};

void run_analyze(const AnalyzeArgs& args) {
  const ModelParams params = load_model(args.model_path);
  const auto result = sdp::post_process(params, args.alpha, args.delta);
  if (result.status != sdp::SdpStatus::optimal || !result.certificate) {
    throw InfeasibleError("analyze: region maximization infeasible: " +
                          result.info.message);
  }
  const Certificate cert = *result.certificate;
  const CertificateReport report = check_certificate(params, cert, args.delta);
  if (!report.passed()) {
    throw InfeasibleError(
        "analyze: optimized certificate fails verification at LMI " +
        first_failed_lmi(report));
  }
  save_certificate(cert, joined(args.out, "certificate.json"));
  save_json_file(report_to_json(report), joined(args.out, "report.json"));

  if (params.dims.n == 2) {
    const auto boundary =
        ellipsoid_boundary_2d(report.region, 1.0, args.boundary_points);
    write_region_csv(joined(args.out, "region.csv"), boundary);

    double extent = 0.0;
    for (const auto& p : boundary) {
      extent = std::max(extent, p.cwiseAbs().maxCoeff());
    }
    extent = std::max(extent * 1.5, 1.0);
    BoundingBox box{-extent, extent, -extent, extent};
    write_polytope_csv(joined(args.out, "polytope.csv"),
                       polytope_edges_2d(Polytope{report.H}, box));
  }
  std::cout << "certified region scale s = " << std::setprecision(10) << cert.s
            << " at alpha = " << cert.alpha
            << " (|L| = " << cert.L.norm() << ")\n";
}

// ---- eval -------------------------------------------------------------------

struct EvalArgs {
  std::string model_path;
  std::string cert_path;
  std::string dataset_path;
  std::string out;
  std::string mode = "model";
  double delta = 0.0;
  DivergenceRule rule;
};

void run_eval(const EvalArgs& args) {
  const ModelParams params = load_model(args.model_path);
  std::optional<Certificate> cert;
  if (!args.cert_path.empty()) cert = load_certificate(args.cert_path);
  const Dataset test = load_dataset(args.dataset_path);
  const double delta = args.delta > 0.0 ? args.delta : test.delta;

  EvalReport report = evaluate(params, cert, test, delta, args.rule);
  report.mode = args.mode;
  save_json_file(eval_report_to_json(report), joined(args.out, "report.json"));
  write_phase_csv(params, test, joined(args.out, "phase.csv"), args.rule);

  std::cout << "nrmse = " << std::setprecision(10) << report.nrmse
            << "  certificate: " << report.certificate_status << "\n"
            << "divergence table (truth x prediction): [["
            << report.counts.truth_div_pred_div << ", "
            << report.counts.truth_div_pred_conv << "], ["
            << report.counts.truth_conv_pred_div << ", "
            << report.counts.truth_conv_pred_conv << "]]\n";
}

// ---- compare ----------------------------------------------------------------

struct CompareArgs {
  std::string dataset_path;
  std::string test_path;
  std::string out;
  TrainConfig config;
  DivergenceRule rule;
};

void run_compare(const CompareArgs& args) {
  const Dataset dataset = load_dataset(args.dataset_path);
  Dataset test;
  if (!args.test_path.empty()) {
    test = load_dataset(args.test_path);
  } else {
    test = generate(make_test_config(dataset.config));
  }
  const double delta =
      args.config.delta > 0.0 ? args.config.delta : dataset.delta;

  Json summary{{"schema_version", kReportSchemaVersion},
               {"modes", Json::array()}};
  std::cout << std::left << std::setw(8) << "mode" << std::setw(16) << "nrmse"
            << std::setw(14) << "certificate" << "params\n";
  for (const TrainMode mode :
       {TrainMode::gensec, TrainMode::stdsec, TrainMode::nosec}) {
    TrainConfig config = args.config;
    config.mode = mode;
    const TrainResult result = train(dataset, config, std::nullopt);
    EvalReport report =
        evaluate(result.params, result.certificate, test, delta, args.rule);
    report.mode = to_string(mode);

    const std::string dir = joined(args.out, to_string(mode));
    save_model(result.params, joined(dir, "model.json"));
    if (result.certificate) {
      save_certificate(*result.certificate, joined(dir, "certificate.json"));
    }
    write_history_csv(result.history, joined(dir, "history.csv"));
    save_json_file(eval_report_to_json(report), joined(dir, "report.json"));
    write_phase_csv(result.params, test, joined(dir, "phase.csv"), args.rule);

    summary["modes"].push_back(eval_report_to_json(report));
    std::cout << std::left << std::setw(8) << to_string(mode) << std::setw(16)
              << std::setprecision(6) << report.nrmse << std::setw(14)
              << report.certificate_status << report.parameter_count << "\n";
  }
  save_json_file(summary, joined(args.out, "summary.json"));
}

void add_train_config_flags(CLI::App* cmd, TrainConfig& config,
                            std::vector<CLI::Option*>& opts) {
  opts.push_back(
      env(cmd->add_option("--epochs", config.epochs, "Training epochs"),
          "EPOCHS"));
  opts.push_back(env(
      cmd->add_option("--batch-size", config.batch_size, "Trajectories per step"),
      "BATCH_SIZE"));
  opts.push_back(
      env(cmd->add_option("--lr", config.learning_rate, "Adam learning rate"),
          "LR"));
  opts.push_back(env(cmd->add_option("--nu0", config.nu0, "Initial barrier weight"),
                     "NU0"));
  opts.push_back(env(
      cmd->add_option("--nu-decay", config.nu_decay, "Barrier weight decay"),
      "NU_DECAY"));
  opts.push_back(
      env(cmd->add_option("--nu-min", config.nu_min, "Barrier weight floor"),
          "NU_MIN"));
  opts.push_back(env(cmd->add_option("--delta", config.delta,
                                     "Input bound (default: dataset delta)"),
                     "DELTA"));
  opts.push_back(env(cmd->add_option("--check-every", config.check_every,
                                     "Epochs between feasibility checks"),
                     "CHECK_EVERY"));
  opts.push_back(env(cmd->add_option("--seed", config.seed, "RNG seed"), "SEED"));
  opts.push_back(env(cmd->add_option("--rollback-limit", config.rollback_limit,
                                     "Consecutive rollbacks before abort"),
                     "ROLLBACK_LIMIT"));
  opts.push_back(env(
      cmd->add_option("--model-n", config.model_n, "Learned state dimension"),
      "MODEL_N"));
  opts.push_back(env(cmd->add_option("--model-m", config.model_m,
                                     "Learned nonlinearity channels"),
                     "MODEL_M"));
  opts.push_back(env(cmd->add_option("--beta", config.beta,
                                     "Initial region must contain this ball"),
                     "BETA"));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Regionally stable Lur'e model identification"};
  app.set_version_flag("--version", version_string());
  app.require_subcommand(1);

  GenerateArgs gen;
  auto* cmd_gen = app.add_subcommand("generate", "Generate a benchmark dataset");
  env(cmd_gen->add_option("--out", gen.out, "Output directory")->required(),
      "OUT");
  env(cmd_gen->add_option("--seed", gen.config.seed, "RNG seed"), "SEED");
  env(cmd_gen->add_option("--n-sin", gen.config.n_sin,
                          "Sinusoid trajectories, random x0"),
      "N_SIN");
  env(cmd_gen->add_option("--n-noise", gen.config.n_noise,
                          "Noise trajectories, random x0"),
      "N_NOISE");
  env(cmd_gen->add_option("--n-sin-zero", gen.config.n_sin_zero,
                          "Sinusoid trajectories, zero x0"),
      "N_SIN_ZERO");
  env(cmd_gen->add_option("--n-noise-zero", gen.config.n_noise_zero,
                          "Noise trajectories, zero x0"),
      "N_NOISE_ZERO");
  env(cmd_gen->add_option("--length", gen.config.length, "Steps per trajectory"),
      "LENGTH");
  env(cmd_gen->add_option("--dt", gen.config.dt, "Sampling time"), "DT");
  env(cmd_gen->add_option("--x0-range", gen.config.x0_range,
                          "Uniform bound for initial states"),
      "X0_RANGE");
  env(cmd_gen->add_option("--alpha", gen.config.alpha_true,
                          "Contraction rate for input scaling"),
      "ALPHA");
  env(cmd_gen->add_option("--s-true", gen.config.s_true,
                          "Region scale override (0: compute via SDP)"),
      "S_TRUE");
  env(cmd_gen->add_flag("--csv", gen.csv, "Also write per-trajectory CSVs"),
      "CSV");
  cmd_gen->callback([&] { run_generate(gen); });

  InitArgs init;
  auto* cmd_init =
      app.add_subcommand("init", "Feasible initialization via SDP");
  env(cmd_init->add_option("--out", init.out, "Output directory")->required(),
      "OUT");
  env(cmd_init->add_option("--mode", init.mode, "gensec or stdsec"), "MODE");
  env(cmd_init->add_option("--n", init.n, "State dimension"), "N");
  env(cmd_init->add_option("--r", init.r, "Input dimension"), "R");
  env(cmd_init->add_option("--e", init.e, "Output dimension"), "E");
  env(cmd_init->add_option("--m", init.m, "Nonlinearity channels"), "M");
  env(cmd_init->add_option("--delta", init.delta, "Input bound"), "DELTA");
  env(cmd_init->add_option("--beta", init.beta,
                           "Region must contain this ball (0: off)"),
      "BETA");
  env(cmd_init->add_option("--seed", init.seed, "RNG seed"), "SEED");
  cmd_init->callback([&] { run_init(init); });

  TrainArgs tr;
  auto* cmd_train = app.add_subcommand("train", "Train a model on a dataset");
  std::vector<CLI::Option*> train_opts;
  env(cmd_train->add_option("--dataset", tr.dataset_path, "Dataset JSON"),
      "DATASET");
  env(cmd_train->add_option("--out", tr.out, "Run directory")->required(),
      "OUT");
  env(cmd_train->add_option("--config", tr.config_path,
                            "Reproduce a previous run's config.json"),
      "CONFIG");
  train_opts.push_back(
      env(cmd_train->add_option("--mode", tr.mode, "gensec, stdsec or nosec"),
          "MODE"));
  env(cmd_train->add_option("--init-model", tr.init_model,
                            "Warm-start model.json"),
      "INIT_MODEL");
  env(cmd_train->add_option("--init-cert", tr.init_cert,
                            "Warm-start certificate.json"),
      "INIT_CERT");
  add_train_config_flags(cmd_train, tr.config, train_opts);
  cmd_train->callback([&] { run_train(tr, train_opts); });

  AnalyzeArgs an;
  auto* cmd_analyze = app.add_subcommand(
      "analyze", "Maximize and export the certified region of a model");
  env(cmd_analyze->add_option("--model", an.model_path, "model.json")
          ->required(),
      "MODEL");
  env(cmd_analyze->add_option("--out", an.out, "Output directory")->required(),
      "OUT");
  env(cmd_analyze->add_option("--alpha", an.alpha, "Contraction rate"),
      "ALPHA");
  env(cmd_analyze->add_option("--delta", an.delta, "Input bound"), "DELTA");
  env(cmd_analyze->add_option("--boundary-points", an.boundary_points,
                              "Ellipse boundary sample count"),
      "BOUNDARY_POINTS");
  cmd_analyze->callback([&] { run_analyze(an); });

  EvalArgs ev;
  auto* cmd_eval =
      app.add_subcommand("eval", "Evaluate a model on a test dataset");
  env(cmd_eval->add_option("--model", ev.model_path, "model.json")->required(),
      "MODEL");
  env(cmd_eval->add_option("--certificate", ev.cert_path,
                           "certificate.json (optional)"),
      "CERTIFICATE");
  env(cmd_eval->add_option("--dataset", ev.dataset_path, "Test dataset JSON")
          ->required(),
      "DATASET");
  env(cmd_eval->add_option("--out", ev.out, "Output directory")->required(),
      "OUT");
  env(cmd_eval->add_option("--mode", ev.mode, "Label recorded in the report"),
      "MODE");
  env(cmd_eval->add_option("--delta", ev.delta,
                           "Input bound (default: dataset delta)"),
      "DELTA");
  env(cmd_eval->add_option("--div-threshold", ev.rule.threshold,
                           "Output magnitude counted as divergence"),
      "DIV_THRESHOLD");
  env(cmd_eval->add_option("--div-tail", ev.rule.tail_fraction,
                           "Trailing fraction inspected for divergence"),
      "DIV_TAIL");
  cmd_eval->callback([&] { run_eval(ev); });

  CompareArgs cmp;
  auto* cmd_compare = app.add_subcommand(
      "compare", "Train gensec/stdsec/nosec on one dataset and summarize");
  std::vector<CLI::Option*> compare_opts;
  env(cmd_compare->add_option("--dataset", cmp.dataset_path, "Dataset JSON")
          ->required(),
      "DATASET");
  env(cmd_compare->add_option("--test", cmp.test_path,
                              "Test dataset JSON (default: derived 10% set)"),
      "TEST");
  env(cmd_compare->add_option("--out", cmp.out, "Output directory")->required(),
      "OUT");
  add_train_config_flags(cmd_compare, cmp.config, compare_opts);
  cmd_compare->callback([&] { run_compare(cmp); });

  try {
    app.parse(argc, argv);
    return 0;
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  } catch (const luresid::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const luresid::InfeasibleError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const luresid::NumericalError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const luresid::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  }
}
