#include "randaccess/config.hpp"

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <limits>
#include <sstream>

#include "json.hpp"
#include "randaccess/errors.hpp"

namespace randaccess {

namespace {

using nlohmann::json;

std::string child(const std::string& path, std::string_view key) {
  return path.empty() ? std::string(key) : path + "." + std::string(key);
}

std::string element(const std::string& path, std::size_t i) {
  return path + "[" + std::to_string(i) + "]";
}

const json& require_object(const json& j, const std::string& path,
                           std::initializer_list<std::string_view> allowed) {
  if (!j.is_object()) throw ConfigError(path.empty() ? "(document)" : path, "expected an object");
  for (const auto& item : j.items()) {
    bool known = false;
    for (std::string_view k : allowed) known = known || item.key() == k;
    if (!known) throw ConfigError(child(path, item.key()), "unknown key");
  }
  return j;
}

double as_number(const json& j, const std::string& path) {
  if (!j.is_number()) throw ConfigError(path, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw ConfigError(path, "expected a finite number");
  return v;
}

long as_integer(const json& j, const std::string& path) {
  if (j.is_number_integer()) return j.get<long>();
  const double v = as_number(j, path);
  if (v != std::floor(v) || std::abs(v) > 9e15) throw ConfigError(path, "expected an integer");
  return static_cast<long>(v);
}

std::uint64_t as_seed(const json& j, const std::string& path) {
  if (j.is_number_unsigned()) return j.get<std::uint64_t>();
  const long v = as_integer(j, path);
  if (v < 0) throw ConfigError(path, "seed must be non-negative");
  return static_cast<std::uint64_t>(v);
}

std::string as_string(const json& j, const std::string& path) {
  if (!j.is_string()) throw ConfigError(path, "expected a string");
  return j.get<std::string>();
}

// A bare number is a 1x1 matrix and a flat array is a single row.
Matrix as_matrix(const json& j, const std::string& path) {
  if (j.is_number()) return Matrix::Constant(1, 1, as_number(j, path));
  if (!j.is_array() || j.empty()) throw ConfigError(path, "expected a number or a non-empty array of rows");
  if (!j.front().is_array()) {
    Matrix m(1, static_cast<Eigen::Index>(j.size()));
    for (std::size_t c = 0; c < j.size(); ++c) m(0, static_cast<Eigen::Index>(c)) = as_number(j[c], element(path, c));
    return m;
  }
  const std::size_t cols = j.front().size();
  if (cols == 0) throw ConfigError(element(path, 0), "empty row");
  Matrix m(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < j.size(); ++r) {
    const std::string row_path = element(path, r);
    if (!j[r].is_array() || j[r].size() != cols) throw ConfigError(row_path, "rows must have equal length");
    for (std::size_t c = 0; c < cols; ++c)
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = as_number(j[r][c], element(row_path, c));
  }
  return m;
}

const json& field(const json& obj, std::string_view key, const std::string& path) {
  auto it = obj.find(key);
  if (it == obj.end()) throw ConfigError(child(path, key), "missing required field");
  return *it;
}

double number_or(const json& obj, std::string_view key, const std::string& path, double fallback) {
  auto it = obj.find(key);
  return it == obj.end() ? fallback : as_number(*it, child(path, key));
}

long integer_or(const json& obj, std::string_view key, const std::string& path, long fallback) {
  auto it = obj.find(key);
  return it == obj.end() ? fallback : as_integer(*it, child(path, key));
}

void require(bool ok, const std::string& path, const std::string& message) {
  if (!ok) throw ConfigError(path, message);
}

double decay_rate_field(const json& obj, const std::string& path) {
  const std::string p = child(path, "decay_rate");
  const double rho = as_number(field(obj, "decay_rate", path), p);
  if (!(rho > 0.0 && rho < 1.0)) {
    std::ostringstream os;
    os << "decay_rate must lie in (0, 1), got " << rho;
    throw ConfigError(p, os.str());
  }
  return rho;
}

// Model constructors report the offending field as the first word of their message.
[[noreturn]] void rethrow_model_error(const std::invalid_argument& e, const std::string& path,
                                      std::initializer_list<std::string_view> fields) {
  const std::string msg = e.what();
  const std::string first = msg.substr(0, msg.find(' '));
  for (std::string_view f : fields)
    if (first == f) throw ConfigError(child(path, f), msg);
  throw ConfigError(path, msg);
}

SwitchedSystem parse_system(const json& j, const std::string& path) {
  if (j.is_object() && j.contains("plant_controller")) {
    require_object(j, path, {"plant_controller", "lyap_matrix", "decay_rate", "noise_mode"});
    const std::string pc_path = child(path, "plant_controller");
    const json& pj = require_object(j.at("plant_controller"), pc_path,
                                    {"plant_a", "plant_b", "plant_c", "ctrl_f", "ctrl_fc", "ctrl_g", "ctrl_k",
                                     "ctrl_kc", "ctrl_l", "process_noise_cov", "meas_noise_cov"});
    auto mat = [&](std::string_view key) { return as_matrix(field(pj, key, pc_path), child(pc_path, key)); };
    PlantControllerPair pc{mat("plant_a"), mat("plant_b"), mat("plant_c"), mat("ctrl_f"),
                           mat("ctrl_fc"), mat("ctrl_g"),  mat("ctrl_k"),  mat("ctrl_kc"),
                           mat("ctrl_l"),  mat("process_noise_cov"), mat("meas_noise_cov")};
    LyapunovContract contract{as_matrix(field(j, "lyap_matrix", path), child(path, "lyap_matrix")),
                              decay_rate_field(j, path)};
    NoiseModel model = NoiseModel::kClosedMode;
    if (auto it = j.find("noise_mode"); it != j.end()) {
      const std::string mode = as_string(*it, child(path, "noise_mode"));
      if (mode == "max_trace") model = NoiseModel::kLargerTrace;
      else require(mode == "closed", child(path, "noise_mode"), "expected \"closed\" or \"max_trace\"");
    }
    try {
      return assemble_example_loop(pc, contract, model).system;
    } catch (const std::invalid_argument& e) {
      rethrow_model_error(e, pc_path,
                          {"plant_a", "plant_b", "plant_c", "ctrl_f", "ctrl_fc", "ctrl_g", "ctrl_k", "ctrl_kc",
                           "ctrl_l", "process_noise_cov", "meas_noise_cov"});
    }
  }
  require_object(j, path, {"a_closed", "a_open", "noise_cov", "lyap_matrix", "decay_rate"});
  auto mat = [&](std::string_view key) { return as_matrix(field(j, key, path), child(path, key)); };
  Matrix a_closed = mat("a_closed");
  Matrix a_open = mat("a_open");
  Matrix noise_cov = mat("noise_cov");
  Matrix lyap = mat("lyap_matrix");
  const double rho = decay_rate_field(j, path);
  try {
    return SwitchedSystem(std::move(a_closed), std::move(a_open), std::move(noise_cov), std::move(lyap), rho);
  } catch (const std::invalid_argument& e) {
    rethrow_model_error(e, path, {"a_closed", "a_open", "noise_cov", "lyap_matrix", "decay_rate"});
  }
}

FadingChannel parse_channel(const json& j, const std::string& path) {
  require_object(j, path, {"distribution", "success_curve"});
  FadingDistribution dist = ExponentialFading{};
  SuccessCurve curve = SaturatingCurve{};

  if (auto it = j.find("distribution"); it != j.end()) {
    const std::string p = child(path, "distribution");
    const std::string family = as_string(field(*it, "family", p), child(p, "family"));
    if (family == "exponential") {
      require_object(*it, p, {"family", "mean"});
      const double mean = number_or(*it, "mean", p, 1.0);
      require(mean > 0.0, child(p, "mean"), "mean must be positive");
      dist = ExponentialFading{mean};
    } else if (family == "uniform") {
      require_object(*it, p, {"family", "low", "high"});
      const double low = as_number(field(*it, "low", p), child(p, "low"));
      const double high = as_number(field(*it, "high", p), child(p, "high"));
      require(low >= 0.0, child(p, "low"), "low must be non-negative");
      require(high > low, child(p, "high"), "high must exceed low");
      dist = UniformFading{low, high};
    } else {
      throw ConfigError(child(p, "family"), "expected \"exponential\" or \"uniform\"");
    }
  }

  if (auto it = j.find("success_curve"); it != j.end()) {
    const std::string p = child(path, "success_curve");
    const std::string family = as_string(field(*it, "family", p), child(p, "family"));
    if (family == "saturating") {
      require_object(*it, p, {"family", "kappa", "gain"});
      SaturatingCurve c{number_or(*it, "kappa", p, 1.5), number_or(*it, "gain", p, 1.0)};
      require(c.kappa > 0.0, child(p, "kappa"), "kappa must be positive");
      require(c.gain > 0.0, child(p, "gain"), "gain must be positive");
      curve = c;
    } else if (family == "logistic_db") {
      require_object(*it, p, {"family", "slope", "midpoint_db", "gain"});
      LogisticDbCurve c{number_or(*it, "slope", p, 1.0), number_or(*it, "midpoint_db", p, 0.0),
                        number_or(*it, "gain", p, 1.0)};
      require(c.slope > 0.0, child(p, "slope"), "slope must be positive");
      require(c.gain > 0.0, child(p, "gain"), "gain must be positive");
      curve = c;
    } else {
      throw ConfigError(child(p, "family"), "expected \"saturating\" or \"logistic_db\"");
    }
  }

  try {
    return FadingChannel(dist, curve);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(path, e.what());
  }
}

OptimizerSettings parse_optimizer(const json& j, const std::string& path, MonteCarlo& mc) {
  require_object(j, path,
                 {"step_a", "step_b", "beta_min", "beta_max", "slack_tol", "dual_change_tol", "window",
                  "max_periods", "mode", "samples_per_period", "seed", "divergence_bound"});
  OptimizerSettings s;
  s.schedule.a = number_or(j, "step_a", path, s.schedule.a);
  s.schedule.b = number_or(j, "step_b", path, s.schedule.b);
  require(s.schedule.a > 0.0, child(path, "step_a"), "step_a must be positive");
  require(s.schedule.b > 0.0, child(path, "step_b"), "step_b must be positive");

  s.box.lower = number_or(j, "beta_min", path, s.box.lower);
  s.box.upper = number_or(j, "beta_max", path, s.box.upper);
  require(s.box.lower > 0.0 && s.box.lower < 1.0, child(path, "beta_min"), "beta_min must lie in (0, 1)");
  require(s.box.upper > s.box.lower && s.box.upper < 1.0, child(path, "beta_max"),
          "beta_max must lie in (beta_min, 1)");

  s.stop.slack_tol = number_or(j, "slack_tol", path, s.stop.slack_tol);
  s.stop.dual_change_tol = number_or(j, "dual_change_tol", path, s.stop.dual_change_tol);
  s.stop.window = integer_or(j, "window", path, s.stop.window);
  s.stop.max_periods = integer_or(j, "max_periods", path, s.stop.max_periods);
  s.stop.divergence_bound = number_or(j, "divergence_bound", path, s.stop.divergence_bound);
  require(s.stop.slack_tol > 0.0, child(path, "slack_tol"), "slack_tol must be positive");
  require(s.stop.dual_change_tol > 0.0, child(path, "dual_change_tol"), "dual_change_tol must be positive");
  require(s.stop.window >= 1, child(path, "window"), "window must be at least 1");
  require(s.stop.max_periods >= 0, child(path, "max_periods"), "max_periods must be non-negative");
  require(s.stop.divergence_bound > 0.0, child(path, "divergence_bound"), "divergence_bound must be positive");

  const long samples = integer_or(j, "samples_per_period", path, static_cast<long>(mc.samples));
  require(samples >= 1, child(path, "samples_per_period"), "samples_per_period must be at least 1");
  mc.samples = static_cast<std::size_t>(samples);
  if (auto it = j.find("seed"); it != j.end()) mc.seed = as_seed(*it, child(path, "seed"));

  std::string mode = "quadrature";
  if (auto it = j.find("mode"); it != j.end()) mode = as_string(*it, child(path, "mode"));
  if (mode == "monte_carlo" || mode == "mc") s.mode = mc;
  else if (mode == "quadrature") s.mode = Quadrature{};
  else throw ConfigError(child(path, "mode"), "expected \"quadrature\" or \"monte_carlo\"");
  return s;
}

SimulationSettings parse_simulation(const json& j, const std::string& path) {
  require_object(j, path, {"horizon", "seed", "burn_in", "trajectory_stride", "noise_family"});
  SimulationSettings s;
  s.horizon = integer_or(j, "horizon", path, s.horizon);
  require(s.horizon >= 1, child(path, "horizon"), "horizon must be at least 1");
  s.burn_in = integer_or(j, "burn_in", path, s.horizon / 10);
  require(s.burn_in >= 0 && s.burn_in < s.horizon, child(path, "burn_in"), "burn_in must lie in [0, horizon)");
  s.trajectory_stride = integer_or(j, "trajectory_stride", path, 0);
  require(s.trajectory_stride >= 0, child(path, "trajectory_stride"), "trajectory_stride must be non-negative");
  if (auto it = j.find("seed"); it != j.end()) s.seed = as_seed(*it, child(path, "seed"));
  if (auto it = j.find("noise_family"); it != j.end()) {
    const std::string family = as_string(*it, child(path, "noise_family"));
    if (family == "uniform") s.noise = NoiseFamily::kUniform;
    else require(family == "gaussian", child(path, "noise_family"), "expected \"gaussian\" or \"uniform\"");
  }
  return s;
}

ExperimentConfig parse_document(const json& root) {
  require_object(root, "",
                 {"schema_version", "description", "systems", "channels", "collision", "tx_powers", "rate_tol",
                  "optimizer", "simulation", "output_dir"});
  const long version = as_integer(field(root, "schema_version", ""), "schema_version");
  require(version == kSchemaVersion, "schema_version",
          "unsupported schema version " + std::to_string(version) + " (expected " +
              std::to_string(kSchemaVersion) + ")");
  if (auto it = root.find("description"); it != root.end()) as_string(*it, "description");

  ExperimentConfig cfg;
  const json& systems = field(root, "systems", "");
  require(systems.is_array() && !systems.empty(), "systems", "expected a non-empty array");
  for (std::size_t i = 0; i < systems.size(); ++i) cfg.systems.push_back(parse_system(systems[i], element("systems", i)));
  const auto m = static_cast<std::size_t>(cfg.size());

  if (auto it = root.find("channels"); it != root.end()) {
    require(it->is_array() && it->size() == m, "channels", "expected one channel per system");
    for (std::size_t i = 0; i < m; ++i) cfg.channels.push_back(parse_channel((*it)[i], element("channels", i)));
  } else {
    cfg.channels.assign(m, FadingChannel{});
  }

  if (auto it = root.find("collision"); it != root.end()) {
    Matrix q = as_matrix(*it, "collision");
    require(q.rows() == static_cast<Eigen::Index>(m) && q.cols() == static_cast<Eigen::Index>(m), "collision",
            "expected an m x m matrix with m = " + std::to_string(m));
    for (Eigen::Index r = 0; r < q.rows(); ++r)
      for (Eigen::Index c = 0; c < q.cols(); ++c)
        require(q(r, c) >= 0.0 && q(r, c) <= 1.0,
                element(element("collision", static_cast<std::size_t>(r)), static_cast<std::size_t>(c)),
                "collision probabilities must lie in [0, 1]");
    cfg.collision = CollisionMatrix(q);
  } else {
    require(m == 1, "collision", "missing required field (only optional with a single system)");
    cfg.collision = CollisionMatrix::none(1);
  }

  cfg.tx_powers = Vector::Ones(static_cast<Eigen::Index>(m));
  if (auto it = root.find("tx_powers"); it != root.end()) {
    require(it->is_array() && it->size() == m, "tx_powers", "expected one power per system");
    for (std::size_t i = 0; i < m; ++i) {
      const double p = as_number((*it)[i], element("tx_powers", i));
      require(p > 0.0, element("tx_powers", i), "transmit power must be positive");
      cfg.tx_powers(static_cast<Eigen::Index>(i)) = p;
    }
  }

  cfg.rate_tol = number_or(root, "rate_tol", "", cfg.rate_tol);
  require(cfg.rate_tol > 0.0 && cfg.rate_tol < 0.1, "rate_tol", "rate_tol must lie in (0, 0.1)");

  cfg.optimizer = parse_optimizer(root.contains("optimizer") ? root.at("optimizer") : json::object(), "optimizer",
                                  cfg.monte_carlo);
  cfg.simulation =
      parse_simulation(root.contains("simulation") ? root.at("simulation") : json::object(), "simulation");
  if (auto it = root.find("output_dir"); it != root.end()) {
    cfg.output_dir = as_string(*it, "output_dir");
    require(!cfg.output_dir.empty(), "output_dir", "must not be empty");
  }
  return cfg;
}

}  // namespace

ExperimentConfig parse_config_text(std::string_view text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("(document)", e.what());
  }
  return parse_document(root);
}

ExperimentConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

}  // namespace randaccess
