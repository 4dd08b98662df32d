#include "randaccess/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "json.hpp"
#include "randaccess/channel.hpp"
#include "randaccess/errors.hpp"

namespace randaccess {

namespace {

using nlohmann::json;

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path + " for writing");
  return out;
}

void finish(std::ofstream& out, const std::string& path) {
  out.flush();
  if (!out) throw IoError("failed writing " + path);
}

json number_or_tag(double v) {
  if (std::isfinite(v)) return v;
  return format_double(v);
}

double read_number(const json& j, const std::string& path) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
  }
  throw ConfigError(path, "expected a number or \"inf\"");
}

std::string idx(const std::string& base, std::size_t i) { return base + "[" + std::to_string(i) + "]"; }

void put_row(std::ostream& out, const std::vector<std::string>& cells) {
  for (std::size_t k = 0; k < cells.size(); ++k) {
    if (k) out << ',';
    out << cells[k];
  }
  out << '\n';
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

PolicyFile policy_file_from(const OptimizationResult& result) {
  PolicyFile f;
  f.policies = result.policies;
  f.lambda = result.final_state.lambda;
  f.nu = result.final_state.nu;
  f.converged = result.converged;
  f.periods = static_cast<long>(result.trace.size());
  return f;
}

void write_policy_file(const std::string& path, const PolicyFile& file) {
  json doc;
  doc["schema_version"] = 1;
  doc["converged"] = file.converged;
  doc["periods"] = file.periods;
  json policies = json::array();
  for (const AccessPolicy& p : file.policies) {
    if (p.is_threshold()) policies.push_back({{"kind", "threshold"}, {"h_bar", number_or_tag(p.threshold_value())}});
    else policies.push_back({{"kind", "constant"}, {"rate", p.rate()}});
  }
  doc["policies"] = policies;
  json lambda = json::array();
  for (Eigen::Index i = 0; i < file.lambda.size(); ++i) lambda.push_back(file.lambda(i));
  doc["lambda"] = lambda;
  json nu = json::array();
  for (Eigen::Index r = 0; r < file.nu.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < file.nu.cols(); ++c) row.push_back(file.nu(r, c));
    nu.push_back(row);
  }
  doc["nu"] = nu;

  std::ofstream out = open_output(path);
  out << doc.dump(2) << '\n';
  finish(out, path);
}

PolicyFile read_policy_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open policy file " + path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("(document)", e.what());
  }
  if (!doc.is_object()) throw ConfigError("(document)", "expected an object");
  for (const auto& item : doc.items()) {
    const std::string& k = item.key();
    if (k != "schema_version" && k != "converged" && k != "periods" && k != "policies" && k != "lambda" && k != "nu")
      throw ConfigError(k, "unknown key");
  }

  PolicyFile f;
  if (!doc.contains("policies") || !doc["policies"].is_array() || doc["policies"].empty())
    throw ConfigError("policies", "expected a non-empty array");
  const json& policies = doc["policies"];
  for (std::size_t i = 0; i < policies.size(); ++i) {
    const json& p = policies[i];
    const std::string path_i = idx("policies", i);
    if (!p.is_object() || !p.contains("kind") || !p["kind"].is_string())
      throw ConfigError(path_i + ".kind", "missing policy kind");
    const std::string kind = p["kind"].get<std::string>();
    try {
      if (kind == "threshold") {
        if (!p.contains("h_bar")) throw ConfigError(path_i + ".h_bar", "missing required field");
        f.policies.push_back(AccessPolicy::threshold(read_number(p["h_bar"], path_i + ".h_bar")));
      } else if (kind == "constant") {
        if (!p.contains("rate")) throw ConfigError(path_i + ".rate", "missing required field");
        f.policies.push_back(AccessPolicy::constant(read_number(p["rate"], path_i + ".rate")));
      } else {
        throw ConfigError(path_i + ".kind", "expected \"threshold\" or \"constant\"");
      }
    } catch (const std::invalid_argument& e) {
      throw ConfigError(path_i, e.what());
    }
  }
  const auto m = static_cast<Eigen::Index>(f.policies.size());
  f.lambda = Vector::Zero(m);
  f.nu = Matrix::Zero(m, m);
  if (doc.contains("lambda")) {
    const json& l = doc["lambda"];
    if (!l.is_array() || static_cast<Eigen::Index>(l.size()) != m)
      throw ConfigError("lambda", "expected one multiplier per policy");
    for (Eigen::Index i = 0; i < m; ++i)
      f.lambda(i) = read_number(l[static_cast<std::size_t>(i)], idx("lambda", static_cast<std::size_t>(i)));
  }
  if (doc.contains("nu")) {
    const json& n = doc["nu"];
    if (!n.is_array() || static_cast<Eigen::Index>(n.size()) != m) throw ConfigError("nu", "expected an m x m array");
    for (Eigen::Index r = 0; r < m; ++r) {
      const json& row = n[static_cast<std::size_t>(r)];
      const std::string rp = idx("nu", static_cast<std::size_t>(r));
      if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != m) throw ConfigError(rp, "expected m entries");
      for (Eigen::Index c = 0; c < m; ++c)
        f.nu(r, c) = read_number(row[static_cast<std::size_t>(c)], idx(rp, static_cast<std::size_t>(c)));
    }
  }
  if (doc.contains("converged")) {
    if (!doc["converged"].is_boolean()) throw ConfigError("converged", "expected a boolean");
    f.converged = doc["converged"].get<bool>();
  }
  if (doc.contains("periods")) {
    if (!doc["periods"].is_number_integer()) throw ConfigError("periods", "expected an integer");
    f.periods = doc["periods"].get<long>();
  }
  return f;
}

void write_rates_csv(const std::string& path, const Vector& requirements) {
  std::ofstream out = open_output(path);
  out << "system,requirement\n";
  for (Eigen::Index i = 0; i < requirements.size(); ++i) out << i << ',' << format_double(requirements(i)) << '\n';
  finish(out, path);
}

void write_trace_csv(const std::string& path, const IterationTrace& trace) {
  std::ofstream out = open_output(path);
  if (trace.empty()) {
    out << "t,eps,objective,dual_value\n";
    finish(out, path);
    return;
  }
  const Eigen::Index m = trace.back().lambda.size();
  std::vector<std::string> header{"t", "eps"};
  for (Eigen::Index i = 0; i < m; ++i) header.push_back("lambda_" + std::to_string(i));
  for (const char* name : {"nu", "beta"})
    for (Eigen::Index r = 0; r < m; ++r)
      for (Eigen::Index c = 0; c < m; ++c)
        header.push_back(std::string(name) + "_" + std::to_string(r) + "_" + std::to_string(c));
  for (const char* name : {"threshold", "rate", "success", "link", "violation"})
    for (Eigen::Index i = 0; i < m; ++i) header.push_back(std::string(name) + "_" + std::to_string(i));
  header.push_back("objective");
  header.push_back("dual_value");
  put_row(out, header);

  std::vector<std::string> row;
  for (const IterationRecord& rec : trace.records()) {
    row.clear();
    row.push_back(std::to_string(rec.t));
    row.push_back(format_double(rec.eps));
    for (Eigen::Index i = 0; i < m; ++i) row.push_back(format_double(rec.lambda(i)));
    for (const Matrix* mat : {&rec.nu, &rec.beta})
      for (Eigen::Index r = 0; r < m; ++r)
        for (Eigen::Index c = 0; c < m; ++c) row.push_back(format_double((*mat)(r, c)));
    for (const Vector* vec : {&rec.thresholds, &rec.rate, &rec.success, &rec.link, &rec.violation})
      for (Eigen::Index i = 0; i < m; ++i) row.push_back(format_double((*vec)(i)));
    row.push_back(format_double(rec.objective));
    row.push_back(format_double(rec.dual_value));
    put_row(out, row);
  }
  finish(out, path);
}

void write_metrics_csv(const std::string& path, const SimMetrics& metrics, const ProblemInstance& inst,
                       const std::vector<AccessPolicy>& policies) {
  std::ofstream out = open_output(path);
  out << "system,requirement,analytic_tx_rate,analytic_link,empirical_tx_rate,empirical_success_rate,"
         "empirical_cost,cost_bound,slots_averaged\n";
  for (int i = 0; i < inst.size(); ++i) {
    const auto k = static_cast<std::size_t>(i);
    const double rate = expected_policy_rate(policies[k], inst.channels[k], Quadrature{});
    const double link = link_success_probability(policies, inst.channels, inst.collision, i, Quadrature{});
    put_row(out, {std::to_string(i), format_double(inst.success_targets(i)), format_double(rate),
                  format_double(link), format_double(metrics.empirical_tx_rate(i)),
                  format_double(metrics.empirical_success_rate(i)), format_double(metrics.empirical_cost(i)),
                  format_double(steady_state_cost_bound(inst.systems[k])), std::to_string(metrics.slots_averaged)});
  }
  finish(out, path);
}

void write_trajectory_csv(const std::string& path, const SimMetrics& metrics) {
  std::ofstream out = open_output(path);
  out << "slot,system,lyapunov,tx,gamma\n";
  for (const TrajectorySample& s : metrics.trajectory)
    out << s.slot << ',' << s.system << ',' << format_double(s.lyapunov) << ',' << s.tx << ',' << s.gamma << '\n';
  finish(out, path);
}

}  // namespace randaccess
