#include "emshs/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include "emshs/errors.hpp"

namespace emshs {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

bool parse_number(std::string_view field, double& out) {
  field = trim(field);
  if (field.empty()) return false;
  if (field.front() == '+') field.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), out);
  return ec == std::errc() && ptr == field.data() + field.size() && std::isfinite(out);
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    fields.push_back(line.substr(start, comma == std::string_view::npos ? line.npos : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return fields;
}

}  // namespace

Eigen::MatrixXd parse_csv(std::string_view text) {
  std::vector<double> values;
  std::size_t cols = 0;
  std::size_t rows = 0;
  std::size_t line_no = 0;
  bool first_content = true;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? text.npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_fields(line);
    std::vector<double> row(fields.size());
    bool numeric = true;
    for (std::size_t i = 0; i < fields.size() && numeric; ++i) numeric = parse_number(fields[i], row[i]);
    if (first_content) {
      first_content = false;
      cols = fields.size();
      if (!numeric) continue;
    }
    if (!numeric) throw FormatError("line " + std::to_string(line_no) + ": non-numeric field");
    if (fields.size() != cols) {
      throw FormatError("line " + std::to_string(line_no) + ": expected " + std::to_string(cols) +
                        " fields, found " + std::to_string(fields.size()));
    }
    values.insert(values.end(), row.begin(), row.end());
    ++rows;
  }
  if (rows == 0) throw FormatError("no data rows");
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = values[i * cols + j];
    }
  }
  return m;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  out << text;
  if (!out) throw DataError("write failed: " + path);
}

Eigen::MatrixXd read_csv_file(const std::string& path) {
  try {
    return parse_csv(read_text_file(path));
  } catch (const FormatError& e) {
    throw FormatError(path + ": " + e.what());
  }
}

Eigen::VectorXd read_vector_file(const std::string& path) {
  Eigen::MatrixXd m = read_csv_file(path);
  if (m.cols() != 1) throw FormatError(path + ": expected a single column");
  return m.col(0);
}

void write_csv_file(const std::string& path, const Eigen::MatrixXd& m,
                    const std::vector<std::string>& header) {
  std::ostringstream out;
  out << std::setprecision(17);
  for (std::size_t j = 0; j < header.size(); ++j) out << (j ? "," : "") << header[j];
  if (!header.empty()) out << "\n";
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) out << (j ? "," : "") << m(i, j);
    out << "\n";
  }
  write_text_file(path, out.str());
}

json read_json_file(const std::string& path) {
  const std::string text = read_text_file(path);
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw FormatError(path + ": " + e.what());
  }
}

void write_json_file(const std::string& path, const json& doc) {
  write_text_file(path, doc.dump(2) + "\n");
}

namespace {

void reject_unknown(const json& doc, const std::set<std::string>& allowed, const std::string& what) {
  if (!doc.is_object()) throw ConfigError(what + " must be a JSON object");
  for (const auto& [key, value] : doc.items()) {
    if (!allowed.contains(key)) throw ConfigError(what + ": unknown key '" + key + "'");
  }
}

double number_at(const json& doc, const std::string& key) {
  const json& v = doc.at(key);
  if (!v.is_number()) throw ConfigError("'" + key + "' must be a number");
  return v.get<double>();
}

std::uint64_t count_at(const json& doc, const std::string& key) {
  const json& v = doc.at(key);
  if (!v.is_number_integer() || v.get<std::int64_t>() < 0) {
    throw ConfigError("'" + key + "' must be a non-negative integer");
  }
  return v.get<std::uint64_t>();
}

std::vector<double> numbers_at(const json& doc, const std::string& key) {
  const json& v = doc.at(key);
  if (v.is_number()) return {v.get<double>()};
  if (!v.is_array() || v.empty()) throw ConfigError("'" + key + "' must be a number or nonempty array");
  std::vector<double> out;
  for (const auto& x : v) {
    if (!x.is_number()) throw ConfigError("'" + key + "' entries must be numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

json vector_json(const Eigen::VectorXd& v) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

Eigen::VectorXd vector_from(const json& arr, const std::string& key) {
  if (!arr.is_array()) throw FormatError("'" + key + "' must be an array");
  Eigen::VectorXd v(static_cast<Eigen::Index>(arr.size()));
  for (std::size_t i = 0; i < arr.size(); ++i) {
    if (!arr[i].is_number()) throw FormatError("'" + key + "' entries must be numbers");
    v[static_cast<Eigen::Index>(i)] = arr[i].get<double>();
  }
  return v;
}

}  // namespace

RunConfig parse_run_config(const json& doc) {
  reject_unknown(doc,
                 {"mu", "mu_grid", "nu", "a_omega", "b_omega", "a_sigma", "b_sigma", "epsilon_tol",
                  "max_iter", "newton_inner", "dense_newton_threshold", "seed", "workers"},
                 "config");
  RunConfig cfg;
  Hyperparameters& h = cfg.hyper;
  if (doc.contains("mu")) h.mu = numbers_at(doc, "mu");
  if (doc.contains("mu_grid")) cfg.mu_grid = numbers_at(doc, "mu_grid");
  if (doc.contains("nu")) h.nu = number_at(doc, "nu");
  if (doc.contains("a_omega")) h.a_omega = number_at(doc, "a_omega");
  if (doc.contains("b_omega")) h.b_omega = number_at(doc, "b_omega");
  if (doc.contains("a_sigma")) h.a_sigma = number_at(doc, "a_sigma");
  if (doc.contains("b_sigma")) h.b_sigma = number_at(doc, "b_sigma");
  if (doc.contains("epsilon_tol")) h.epsilon_tol = number_at(doc, "epsilon_tol");
  if (doc.contains("max_iter")) h.max_iter = count_at(doc, "max_iter");
  if (doc.contains("newton_inner")) h.newton_inner = count_at(doc, "newton_inner");
  if (doc.contains("dense_newton_threshold")) {
    h.dense_newton_threshold = count_at(doc, "dense_newton_threshold");
  }
  if (doc.contains("seed")) h.seed = count_at(doc, "seed");
  if (doc.contains("workers")) cfg.workers = count_at(doc, "workers");
  if (cfg.workers < 1) throw ConfigError("workers must be >= 1");
  if (cfg.mu_grid) {
    for (double m : *cfg.mu_grid) {
      if (!std::isfinite(m)) throw ConfigError("mu_grid entries must be finite");
    }
  }
  // Length of a per-coordinate mu is checked once p is known.
  h.validate(h.mu.size());
  return cfg;
}

ScenarioSpec parse_scenario_spec(const json& doc) {
  reject_unknown(doc,
                 {"p", "n", "q", "g_pathways", "mu_path", "nb_dispersion", "p1", "scenario",
                  "independent_tail", "sigma_eps", "seed"},
                 "scenario spec");
  ScenarioSpec s;
  if (doc.contains("p")) s.p = count_at(doc, "p");
  if (doc.contains("n")) s.n = count_at(doc, "n");
  if (doc.contains("q")) s.q = count_at(doc, "q");
  if (doc.contains("g_pathways")) s.g_pathways = count_at(doc, "g_pathways");
  if (doc.contains("mu_path")) s.mu_path = number_at(doc, "mu_path");
  if (doc.contains("nb_dispersion")) s.nb_dispersion = number_at(doc, "nb_dispersion");
  if (doc.contains("p1")) s.p1 = number_at(doc, "p1");
  if (doc.contains("scenario")) s.scenario = static_cast<int>(count_at(doc, "scenario"));
  if (doc.contains("independent_tail")) s.independent_tail = count_at(doc, "independent_tail");
  if (doc.contains("sigma_eps")) s.sigma_eps = number_at(doc, "sigma_eps");
  if (doc.contains("seed")) s.seed = count_at(doc, "seed");
  s.validate();
  return s;
}

json scenario_spec_to_json(const ScenarioSpec& s) {
  return json{{"p", s.p},
              {"n", s.n},
              {"q", s.q},
              {"g_pathways", s.g_pathways},
              {"mu_path", s.mu_path},
              {"nb_dispersion", s.nb_dispersion},
              {"p1", s.p1},
              {"scenario", s.scenario},
              {"independent_tail", s.independent_tail},
              {"sigma_eps", s.sigma_eps},
              {"seed", s.seed}};
}

json fit_to_json(const FitResult& fit, bool original_scale) {
  const Standardization& st = fit.standardization;
  json beta = json::array();
  double intercept = st.y_mean;
  for (Eigen::Index j = 0; j < fit.beta.size(); ++j) {
    if (fit.beta[j] == 0.0) continue;
    double value = fit.beta[j];
    if (original_scale) {
      value /= st.column_scales[j];
      intercept -= value * st.column_means[j];
    }
    beta.push_back(json::array({j + 1, value}));
  }
  json selected = json::array();
  for (std::size_t j : fit.selected) selected.push_back(j + 1);
  json trace = json::array();
  for (const auto& t : fit.trace) trace.push_back(json::array({t.q, t.logpost}));

  json doc{{"p", fit.beta.size()},
           {"beta", beta},
           {"alpha", vector_json(fit.alpha)},
           {"sigma2", fit.sigma2},
           {"selected", selected},
           {"iterations", fit.iterations},
           {"converged", fit.converged},
           {"trace", trace},
           {"wall_time_s", fit.wall_time},
           {"scale", original_scale ? "original" : "standardized"},
           {"standardization",
            {{"column_means", vector_json(st.column_means)},
             {"column_scales", vector_json(st.column_scales)},
             {"y_mean", st.y_mean}}}};
  if (original_scale) doc["intercept"] = intercept;
  return doc;
}

FitResult fit_from_json(const json& doc) {
  try {
    FitResult fit;
    const json& st = doc.at("standardization");
    fit.standardization.column_means = vector_from(st.at("column_means"), "column_means");
    fit.standardization.column_scales = vector_from(st.at("column_scales"), "column_scales");
    fit.standardization.y_mean = st.at("y_mean").get<double>();
    const Eigen::Index p = fit.standardization.column_means.size();
    if (fit.standardization.column_scales.size() != p) {
      throw FormatError("standardization vectors differ in length");
    }
    const bool original = doc.value("scale", std::string("standardized")) == "original";
    fit.beta = Eigen::VectorXd::Zero(p);
    for (const auto& pair : doc.at("beta")) {
      if (!pair.is_array() || pair.size() != 2) throw FormatError("beta entries must be [index, value]");
      const auto j = pair[0].get<std::int64_t>();
      if (j < 1 || j > p) throw IndexError("beta index " + std::to_string(j) + " out of range");
      double value = pair[1].get<double>();
      if (original) value *= fit.standardization.column_scales[j - 1];
      fit.beta[j - 1] = value;
    }
    fit.alpha = vector_from(doc.at("alpha"), "alpha");
    fit.sigma2 = doc.at("sigma2").get<double>();
    for (const auto& j : doc.at("selected")) fit.selected.push_back(j.get<std::size_t>() - 1);
    fit.iterations = doc.at("iterations").get<std::size_t>();
    fit.converged = doc.at("converged").get<bool>();
    return fit;
  } catch (const json::exception& e) {
    throw FormatError(std::string("fit document: ") + e.what());
  }
}

json tuning_to_json(const TuningResult& result) {
  json per_mu = json::array();
  for (const auto& pt : result.per_mu) {
    per_mu.push_back({{"mu", pt.mu},
                      {"mspe", std::isfinite(pt.mspe) ? json(pt.mspe) : json(nullptr)},
                      {"converged", pt.converged},
                      {"iterations", pt.iterations},
                      {"selected", pt.selected}});
  }
  return json{{"mu_grid", result.mu_grid},
              {"per_mu", per_mu},
              {"best_mu", result.best_mu},
              {"best_fit", fit_to_json(result.best_fit)}};
}

json truth_to_json(const SyntheticTruth& truth, const ScenarioSpec& spec) {
  json support = json::array();
  for (std::size_t j : truth.support()) support.push_back(j + 1);
  return json{{"beta0_indices", support},
              {"scenario", truth.scenario},
              {"seed", spec.seed},
              {"spec", scenario_spec_to_json(spec)}};
}

json summary_to_json(const BenchmarkSummary& summary, bool with_timing) {
  auto estimate = [](const Estimate& e) { return json{{"mean", e.mean}, {"se", e.se}}; };
  json methods = json::array();
  for (const auto& m : summary.methods) {
    json entry{{"method", method_name(m.method)},
               {"mspe", estimate(m.mspe)},
               {"fp", estimate(m.fp)},
               {"fn", estimate(m.fn)},
               {"replicates", m.replicates},
               {"failures", m.failures}};
    if (with_timing) entry["time_per_value_s"] = m.time_per_value;
    methods.push_back(entry);
  }
  json records = json::array();
  for (const auto& r : summary.records) {
    json entry{{"replicate", r.replicate}, {"method", method_name(r.method)}, {"ok", r.ok}};
    if (r.ok) {
      entry["mspe"] = r.metrics.mspe;
      entry["fp"] = r.metrics.fp;
      entry["fn"] = r.metrics.fn;
      entry["best_mu"] = r.best_mu;
    } else {
      entry["failure"] = r.failure;
    }
    if (with_timing) entry["time_per_value_s"] = r.time_per_value;
    records.push_back(entry);
  }
  return json{{"spec", scenario_spec_to_json(summary.spec)},
              {"replicates", summary.replicates},
              {"methods", methods},
              {"records", records}};
}

}  // namespace emshs
