#include "luresid/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "luresid/io.hpp"
#include "luresid/rng.hpp"
#include "luresid/sdp/pipeline.hpp"
#include "luresid/version.hpp"

namespace luresid {

void GenConfig::validate() const {
  if (n_sin < 0 || n_noise < 0 || n_sin_zero < 0 || n_noise_zero < 0) {
    throw ConfigError("GenConfig: trajectory counts must be >= 0");
  }
  if (total() < 1) throw ConfigError("GenConfig: no trajectories requested");
  if (length < 1) throw ConfigError("GenConfig: length must be >= 1");
  if (!(dt > 0.0)) throw ConfigError("GenConfig: dt must be positive");
  if (!(x0_range >= 0.0)) throw ConfigError("GenConfig: x0_range must be >= 0");
  if (!(alpha_true > 0.0 && alpha_true < 1.0)) {
    throw ConfigError("GenConfig: alpha_true must lie in (0, 1)");
  }
}

double Dataset::recompute_delta() const {
  double d = 0.0;
  for (const auto& traj : trajectories) {
    for (const auto& uk : traj.u) {
      if (uk.size() > 0) d = std::max(d, uk.cwiseAbs().maxCoeff());
    }
  }
  return d;
}

Index Dataset::num_points() const {
  Index points = 0;
  for (const auto& traj : trajectories) points += traj.length();
  return points;
}

void Dataset::validate() const {
  config.validate();
  dims.validate();
  if (static_cast<Index>(trajectories.size()) != config.total()) {
    throw ConfigError("Dataset: trajectory count does not match config");
  }
  for (const auto& traj : trajectories) {
    if (traj.u.size() != traj.y.size()) {
      throw ConfigError("Dataset: trajectory input/output lengths differ");
    }
    for (const auto& uk : traj.u) {
      if (uk.size() != dims.r) {
        throw ConfigError("Dataset: input channel count mismatch");
      }
    }
    for (const auto& yk : traj.y) {
      if (yk.size() != dims.e) {
        throw ConfigError("Dataset: output channel count mismatch");
      }
    }
  }
  if (delta != recompute_delta()) {
    throw ConfigError("Dataset: stored delta does not equal max |u|");
  }
}

ModelParams true_system() {
  Dimensions dims{2, 1, 1, 2};
  ModelParams p = ModelParams::zero(dims);
  p.A << 0.998, 0.096, -0.048, 0.921;
  p.B << 0.0049, 0.096;
  p.B2 << 0.4191, 0.4191, 0.3744, 0.3744;
  p.C << 1.0, 0.0;
  p.D << 0.0;
  p.D12 << 1.0, 1.0;
  p.C2 << 0.18, 0.0, 0.0, 0.18;
  p.D21 << 1.0, 1.0;
  return p;
}

double true_region_scale(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw ConfigError("true_region_scale: alpha must lie in (0, 1)");
  }
  const auto result = sdp::post_process(true_system(), alpha, /*delta=*/0.0);
  if (result.status != sdp::SdpStatus::optimal || !result.certificate) {
    throw InfeasibleError(
        "true_region_scale: post-processing SDP failed at alpha = " +
        std::to_string(alpha) + " (" + result.info.message + ")");
  }
  return result.certificate->s;
}

namespace {

// Families in a fixed order; the trajectory's global index seeds its RNG
// substream, so any one trajectory can be regenerated in isolation.
enum class Family { sin_random, noise_random, sin_zero, noise_zero };

Trajectory make_trajectory(const ModelParams& system, const GenConfig& config,
                           double amplitude, Family family,
                           std::uint64_t traj_index) {
  CounterRng rng(config.seed, traj_index);
  const Index n = system.dims.n;
  const Index r = system.dims.r;

  Vec x0 = Vec::Zero(n);
  if (family == Family::sin_random || family == Family::noise_random) {
    for (Index i = 0; i < n; ++i) {
      x0[i] = rng.uniform(-config.x0_range, config.x0_range);
    }
  }

  const bool sinusoid =
      family == Family::sin_random || family == Family::sin_zero;
  std::vector<Vec> u(static_cast<std::size_t>(config.length));
  for (Index k = 0; k < config.length; ++k) {
    Vec uk(r);
    if (sinusoid) {
      uk.setConstant(amplitude *
                     std::sin(static_cast<double>(k) * config.dt));
    } else {
      for (Index i = 0; i < r; ++i) {
        uk[i] = rng.uniform(-amplitude, amplitude);
      }
    }
    u[static_cast<std::size_t>(k)] = uk;
  }
  return simulate(system, x0, u);
}

}  // namespace

Dataset generate(const GenConfig& config) {
  config.validate();
  Dataset dataset;
  dataset.config = config;
  if (!(dataset.config.s_true > 0.0)) {
    dataset.config.s_true = true_region_scale(config.alpha_true);
  }
  const ModelParams system = true_system();
  dataset.dims = system.dims;

  const double a = dataset.config.alpha_true;
  const double amplitude =
      std::sqrt(dataset.config.s_true * dataset.config.s_true * (1.0 - a * a));

  const Index counts[] = {config.n_sin, config.n_noise, config.n_sin_zero,
                          config.n_noise_zero};
  const Family families[] = {Family::sin_random, Family::noise_random,
                             Family::sin_zero, Family::noise_zero};
  dataset.trajectories.reserve(static_cast<std::size_t>(config.total()));
  std::uint64_t traj_index = 0;
  for (int f = 0; f < 4; ++f) {
    for (Index t = 0; t < counts[f]; ++t) {
      dataset.trajectories.push_back(make_trajectory(
          system, dataset.config, amplitude, families[f], traj_index));
      ++traj_index;
    }
  }
  dataset.delta = dataset.recompute_delta();
  return dataset;
}

GenConfig make_test_config(const GenConfig& train) {
  const auto scaled = [](Index count) -> Index {
    if (count == 0) return 0;
    return std::max<Index>(
        1, static_cast<Index>(std::llround(0.1 * static_cast<double>(count))));
  };
  GenConfig test = train;
  test.n_sin = scaled(train.n_sin);
  test.n_noise = scaled(train.n_noise);
  test.n_sin_zero = scaled(train.n_sin_zero);
  test.n_noise_zero = scaled(train.n_noise_zero);
  test.seed = train.seed + 1000003;  // prime offset, distinct substreams
  return test;
}

namespace {

Json vector_to_json(const Vec& v) {
  Mat m(1, v.size());
  m.row(0) = v.transpose();
  return matrix_to_json(m).at(0);
}

Vec vector_from_json(const Json& j, const std::string& key) {
  Json wrapped = Json::array({j});
  const Mat m = matrix_from_json(wrapped, key);
  return m.row(0).transpose();
}

Json sequence_to_json(const std::vector<Vec>& seq) {
  Json arr = Json::array();
  for (const auto& v : seq) arr.push_back(vector_to_json(v));
  return arr;
}

std::vector<Vec> sequence_from_json(const Json& j, const std::string& key) {
  if (!j.is_array()) throw ParseError("dataset: " + key + " must be an array");
  std::vector<Vec> seq;
  seq.reserve(j.size());
  for (const auto& item : j) seq.push_back(vector_from_json(item, key));
  return seq;
}

}  // namespace

void save_dataset(const Dataset& dataset, const std::string& path) {
  dataset.validate();
  Json meta{{"n_sin", dataset.config.n_sin},
            {"n_noise", dataset.config.n_noise},
            {"n_sin_zero", dataset.config.n_sin_zero},
            {"n_noise_zero", dataset.config.n_noise_zero},
            {"length", dataset.config.length},
            {"dt", dataset.config.dt},
            {"x0_range", dataset.config.x0_range},
            {"alpha_true", dataset.config.alpha_true},
            {"s_true", dataset.config.s_true},
            {"seed", dataset.config.seed},
            {"delta", dataset.delta},
            {"generator", std::string("luresid ") + kVersion}};
  Json dims{{"n", dataset.dims.n},
            {"r", dataset.dims.r},
            {"e", dataset.dims.e},
            {"m", dataset.dims.m}};
  Json trajs = Json::array();
  for (const auto& traj : dataset.trajectories) {
    Json t{{"x0", vector_to_json(traj.x0)},
           {"u", sequence_to_json(traj.u)},
           {"y", sequence_to_json(traj.y)},
           {"diverged", traj.diverged}};
    if (traj.truncated_at) t["truncated_at"] = *traj.truncated_at;
    trajs.push_back(std::move(t));
  }
  Json j{{"schema_version", kDatasetSchemaVersion},
         {"meta", std::move(meta)},
         {"dims", std::move(dims)},
         {"trajectories", std::move(trajs)}};
  save_json_file(j, path);
}

Dataset load_dataset(const std::string& path) {
  const Json j = load_json_file(path);
  if (!j.is_object() || !j.contains("schema_version")) {
    throw ParseError(path + ": not a dataset file (no schema_version)");
  }
  if (j.at("schema_version").get<int>() != kDatasetSchemaVersion) {
    throw ParseError(path + ": unsupported dataset schema_version " +
                     j.at("schema_version").dump());
  }
  Dataset dataset;
  try {
    const Json& meta = j.at("meta");
    dataset.config.n_sin = meta.at("n_sin").get<Index>();
    dataset.config.n_noise = meta.at("n_noise").get<Index>();
    dataset.config.n_sin_zero = meta.at("n_sin_zero").get<Index>();
    dataset.config.n_noise_zero = meta.at("n_noise_zero").get<Index>();
    dataset.config.length = meta.at("length").get<Index>();
    dataset.config.dt = meta.at("dt").get<double>();
    dataset.config.x0_range = meta.at("x0_range").get<double>();
    dataset.config.alpha_true = meta.at("alpha_true").get<double>();
    dataset.config.s_true = meta.at("s_true").get<double>();
    dataset.config.seed = meta.at("seed").get<std::uint64_t>();
    dataset.delta = meta.at("delta").get<double>();
    const Json& dims = j.at("dims");
    dataset.dims = Dimensions{dims.at("n").get<Index>(),
                              dims.at("r").get<Index>(),
                              dims.at("e").get<Index>(),
                              dims.at("m").get<Index>()};
    for (const auto& t : j.at("trajectories")) {
      Trajectory traj;
      traj.x0 = vector_from_json(t.at("x0"), "x0");
      traj.u = sequence_from_json(t.at("u"), "u");
      traj.y = sequence_from_json(t.at("y"), "y");
      traj.diverged = t.at("diverged").get<bool>();
      if (t.contains("truncated_at")) {
        traj.truncated_at = t.at("truncated_at").get<Index>();
      }
      dataset.trajectories.push_back(std::move(traj));
    }
  } catch (const Json::exception& e) {
    throw ParseError(path + ": malformed dataset: " + e.what());
  }
  try {
    dataset.validate();
  } catch (const ConfigError& e) {
    throw ParseError(path + ": dataset fails validation: " + e.what());
  }
  return dataset;
}

void write_trajectory_csv(const Trajectory& traj, const std::string& path) {
  std::ostringstream out;
  out.precision(17);
  const Index r = traj.u.empty() ? 0 : traj.u.front().size();
  const Index e = traj.y.empty() ? 0 : traj.y.front().size();
  out << "k";
  for (Index i = 0; i < r; ++i) out << ",u" << (i + 1);
  for (Index i = 0; i < e; ++i) out << ",y" << (i + 1);
  out << "\n";
  for (Index k = 0; k < traj.length(); ++k) {
    out << k;
    const auto idx = static_cast<std::size_t>(k);
    for (Index i = 0; i < r; ++i) out << "," << traj.u[idx][i];
    for (Index i = 0; i < e; ++i) out << "," << traj.y[idx][i];
    out << "\n";
  }
  write_text_file(path, out.str());
}

}  // namespace luresid
