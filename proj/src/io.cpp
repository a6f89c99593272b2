#include "sparselab/io.hpp"

#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

namespace sparselab {

namespace {

void check_keys(const json& j, std::initializer_list<const char*> allowed,
                const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* k : allowed)
      if (it.key() == k) {
        ok = true;
        break;
      }
    if (!ok)
      throw std::invalid_argument("unknown config field: " + where + "." +
                                  it.key());
  }
}

json bound_to_json(const BoundValue& b) {
  switch (b.tag) {
    case BoundValue::Tag::finite: return b.value;
    case BoundValue::Tag::unbounded: return "unbounded";
    default: return "inapplicable";
  }
}

json num_or_unbounded(double v) {
  if (std::isinf(v)) return "unbounded";
  return v;
}

json vec_to_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

Eigen::VectorXd vec_from_json(const json& a) {
  Eigen::VectorXd v(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) v[i] = a[i].get<double>();
  return v;
}

double parse_double(const std::string& cell, int line) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(cell, &pos);
    if (pos != cell.size()) throw std::invalid_argument(cell);
    return v;
  } catch (const std::exception&) {
    throw CsvError("malformed numeric cell '" + cell + "'", line);
  }
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> cells;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      cells.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  cells.push_back(cur);
  return cells;
}

} // namespace

json model_to_json(const DictionaryModel& model) {
  json j;
  j["N"] = model.n_funcs;
  json params = json::object();
  switch (model.kind) {
    case DictKind::gaussian: {
      j["kind"] = "gaussian";
      bool ident = model.covariance.isIdentity(0.0);
      if (ident) {
        params["covariance"] = "identity";
      } else {
        json rows = json::array();
        for (int i = 0; i < model.n_funcs; ++i)
          for (int k = 0; k < model.n_funcs; ++k)
            rows.push_back(model.covariance(i, k));
        params["covariance"] = rows;
      }
      break;
    }
    case DictKind::rademacher: j["kind"] = "rademacher"; break;
    case DictKind::orthogonal_scaled: {
      j["kind"] = "orthogonal_scaled";
      params["taus"] = json::array();
      for (int i = 0; i < model.n_funcs; ++i)
        params["taus"].push_back(model.taus[i]);
      break;
    }
    case DictKind::grouped: {
      j["kind"] = "grouped";
      json part = json::array();
      for (const auto& b : model.blocks) {
        json blk = json::array();
        for (int idx : b) blk.push_back(idx + 1); // 1-based externally
        part.push_back(blk);
      }
      params["partition"] = part;
      break;
    }
  }
  j["params"] = params;
  return j;
}

DictionaryModel model_from_json(const json& j) {
  check_keys(j, {"kind", "N", "params"}, "model");
  const std::string kind = j.at("kind").get<std::string>();
  const int N = j.at("N").get<int>();
  const json params = j.value("params", json::object());

  if (kind == "gaussian") {
    check_keys(params, {"covariance"}, "model.params");
    const json& cov = params.at("covariance");
    if (cov.is_string() && cov.get<std::string>() == "identity")
      return make_gaussian(Eigen::MatrixXd::Identity(N, N));
    if (!cov.is_array() || static_cast<int>(cov.size()) != N * N)
      throw std::invalid_argument("covariance must be an N*N row-major array");
    Eigen::MatrixXd C(N, N);
    for (int i = 0; i < N; ++i)
      for (int k = 0; k < N; ++k) C(i, k) = cov[i * N + k].get<double>();
    return make_gaussian(C);
  }
  if (kind == "rademacher") {
    check_keys(params, {}, "model.params");
    return make_rademacher(N);
  }
  if (kind == "orthogonal_scaled") {
    check_keys(params, {"taus"}, "model.params");
    return make_orthogonal_scaled(vec_from_json(params.at("taus")));
  }
  if (kind == "grouped") {
    check_keys(params, {"partition"}, "model.params");
    std::vector<std::vector<int>> blocks;
    for (const auto& blk : params.at("partition")) {
      std::vector<int> b;
      for (const auto& idx : blk) b.push_back(idx.get<int>() - 1);
      blocks.push_back(std::move(b));
    }
    auto m = make_grouped(blocks);
    if (m.n_funcs != N)
      throw std::invalid_argument("partition size does not match N");
    return m;
  }
  throw std::invalid_argument("unknown model kind: " + kind);
}

json gram_to_json(const Eigen::MatrixXd& gram) {
  json j;
  j["N"] = gram.rows();
  json entries = json::array();
  for (int i = 0; i < gram.rows(); ++i)
    for (int k = 0; k < gram.cols(); ++k) entries.push_back(gram(i, k));
  j["entries"] = entries;
  return j;
}

Eigen::MatrixXd gram_from_json(const json& j) {
  check_keys(j, {"N", "entries"}, "gram");
  const int N = j.at("N").get<int>();
  const json& e = j.at("entries");
  if (static_cast<int>(e.size()) != N * N)
    throw std::invalid_argument("gram entries must be an N*N row-major array");
  Eigen::MatrixXd G(N, N);
  for (int i = 0; i < N; ++i)
    for (int k = 0; k < N; ++k) G(i, k) = e[i * N + k].get<double>();
  if (!G.isApprox(G.transpose(), 1e-10))
    throw std::invalid_argument("gram matrix must be symmetric");
  return G;
}

void write_design_csv(std::ostream& os, const Eigen::MatrixXd& H) {
  os.precision(17);
  for (int k = 0; k < H.cols(); ++k)
    os << "h" << (k + 1) << (k + 1 < H.cols() ? "," : "\n");
  for (int i = 0; i < H.rows(); ++i)
    for (int k = 0; k < H.cols(); ++k)
      os << H(i, k) << (k + 1 < H.cols() ? "," : "\n");
}

Eigen::MatrixXd read_design_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw CsvError("empty design file", 1);
  const auto header = split_csv(line);
  const int N = static_cast<int>(header.size());
  if (N == 0 || header[0].empty() || header[0][0] != 'h')
    throw CsvError("expected header h1..hN", 1);

  std::vector<double> data;
  int line_no = 1, rows = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto cells = split_csv(line);
    if (static_cast<int>(cells.size()) != N)
      throw CsvError("expected " + std::to_string(N) + " columns, found " +
                         std::to_string(cells.size()),
                     line_no);
    for (const auto& c : cells) data.push_back(parse_double(c, line_no));
    ++rows;
  }
  if (rows == 0) throw CsvError("design has no data rows", line_no);
  Eigen::MatrixXd H(rows, N);
  for (int i = 0; i < rows; ++i)
    for (int k = 0; k < N; ++k) H(i, k) = data[i * N + k];
  return H;
}

void write_response_csv(std::ostream& os, const Eigen::VectorXd& y) {
  os.precision(17);
  os << "y\n";
  for (int i = 0; i < y.size(); ++i) os << y[i] << "\n";
}

Eigen::VectorXd read_response_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw CsvError("empty response file", 1);
  if (split_csv(line)[0] != "y") throw CsvError("expected header y", 1);
  std::vector<double> data;
  int line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto cells = split_csv(line);
    if (cells.size() != 1) throw CsvError("expected a single column", line_no);
    data.push_back(parse_double(cells[0], line_no));
  }
  Eigen::VectorXd y(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) y[i] = data[i];
  return y;
}

json selector_result_to_json(const SelectorResult& r) {
  json j;
  j["lambda_hat"] = vec_to_json(r.lambda_hat);
  j["feasible"] = r.feasible;
  j["residual_correlations"] = vec_to_json(r.residual_correlations);
  j["l1_norm"] = r.l1_norm;
  j["solver"] = r.solver;
  j["duality_gap"] = r.duality_gap;
  return j;
}

json geometry_report_to_json(const GeometryReport& rep) {
  json j;
  json jj = json::array();
  for (int idx : rep.J) jj.push_back(idx + 1);
  j["J"] = jj;
  j["kappa"] = rep.kappa;
  j["rho"] = rep.rho;
  j["beta2_estimate"] = bound_to_json(rep.beta2_est);
  j["beta2_bound_kr"] = bound_to_json(rep.beta2_bound_kr);
  j["beta2_bound_lem2"] = bound_to_json(rep.beta2_bound_lem2);
  j["beta2_bound_p3"] = bound_to_json(rep.beta2_bound_p3);
  j["beta2_bound_p3_s"] = rep.beta2_bound_p3_s;
  j["beta_estimate"] = bound_to_json(rep.beta_est);
  j["beta_bound"] = bound_to_json(rep.beta_bound);
  j["B"] = rep.B;
  j["d_tilde"] = bound_to_json(rep.dtilde);
  j["m"] = rep.m;
  j["M"] = rep.M;
  j["delta"] = rep.delta;
  j["rho_d"] = rep.rho_sparse;
  json diag = json::array();
  for (double v : rep.rho_delta_diag) diag.push_back(num_or_unbounded(v));
  j["rho_d_delta_bound"] = diag;
  return j;
}

ExperimentConfig config_from_json(const json& j) {
  check_keys(j,
             {"version", "model", "n", "d_star", "coef_profile",
              "coef_magnitude", "coef_decay", "sigma", "gamma", "epsilon_rule",
              "reps", "seed", "A", "D", "bound_suite"},
             "config");
  if (j.value("version", 1) != 1)
    throw std::invalid_argument("unsupported config version");

  ExperimentConfig c;
  c.model = model_from_json(j.at("model"));
  c.n = j.at("n").get<int>();
  c.d_star = j.value("d_star", 1);
  const std::string profile = j.value("coef_profile", std::string("sparse"));
  if (profile == "sparse")
    c.coef_profile = CoefProfile::sparse;
  else if (profile == "geometric")
    c.coef_profile = CoefProfile::geometric;
  else
    throw std::invalid_argument("unknown config field value: coef_profile=" +
                                profile);
  c.coef_magnitude = j.value("coef_magnitude", 1.0);
  c.coef_decay = j.value("coef_decay", 0.75);
  c.sigma = j.value("sigma", 0.0);
  c.gamma = j.value("gamma", 0.0);

  const json er = j.at("epsilon_rule");
  check_keys(er, {"mode", "value", "C", "A", "sigma", "norm_source"},
             "config.epsilon_rule");
  const std::string mode = er.at("mode").get<std::string>();
  if (mode == "explicit") {
    c.epsilon_rule.mode = EpsilonRule::Mode::explicit_value;
    c.epsilon_rule.value = er.at("value").get<double>();
  } else if (mode == "calibrated") {
    c.epsilon_rule.mode = EpsilonRule::Mode::calibrated;
    c.epsilon_rule.C = er.value("C", 2.0);
    c.epsilon_rule.A = er.value("A", 1.0);
    c.epsilon_rule.sigma = er.value("sigma", c.sigma);
    const std::string src =
        er.value("norm_source", std::string("population"));
    if (src == "population")
      c.epsilon_rule.norm_source = NormSource::population;
    else if (src == "empirical")
      c.epsilon_rule.norm_source = NormSource::empirical;
    else
      throw std::invalid_argument("unknown config field value: norm_source=" +
                                  src);
  } else {
    throw std::invalid_argument("unknown config field value: mode=" + mode);
  }

  c.reps = j.at("reps").get<int>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.A = j.value("A", c.epsilon_rule.A);
  c.D = j.value("D", 8.0);
  for (const auto& s : j.value("bound_suite", json::array()))
    c.bound_suite.push_back(s.get<std::string>());
  validate_config(c);
  return c;
}

json config_to_json(const ExperimentConfig& c) {
  json j;
  j["version"] = 1;
  j["model"] = model_to_json(c.model);
  j["n"] = c.n;
  j["d_star"] = c.d_star;
  j["coef_profile"] =
      c.coef_profile == CoefProfile::sparse ? "sparse" : "geometric";
  j["coef_magnitude"] = c.coef_magnitude;
  j["coef_decay"] = c.coef_decay;
  j["sigma"] = c.sigma;
  j["gamma"] = c.gamma;
  json er;
  if (c.epsilon_rule.mode == EpsilonRule::Mode::explicit_value) {
    er["mode"] = "explicit";
    er["value"] = c.epsilon_rule.value;
  } else {
    er["mode"] = "calibrated";
    er["C"] = c.epsilon_rule.C;
    er["A"] = c.epsilon_rule.A;
    er["sigma"] = c.epsilon_rule.sigma;
    er["norm_source"] = c.epsilon_rule.norm_source == NormSource::population
                            ? "population"
                            : "empirical";
  }
  j["epsilon_rule"] = er;
  j["reps"] = c.reps;
  j["seed"] = c.seed;
  j["A"] = c.A;
  j["D"] = c.D;
  j["bound_suite"] = c.bound_suite;
  return j;
}

json summary_to_json(const ExperimentSummary& s) {
  json j;
  j["reps"] = s.reps;
  json metrics;
  for (const auto& [name, st] : s.metrics) {
    json m;
    m["mean"] = std::isnan(st.mean) ? json(nullptr) : json(st.mean);
    m["median"] = std::isnan(st.median) ? json(nullptr) : json(st.median);
    m["q95"] = std::isnan(st.q95) ? json(nullptr) : json(st.q95);
    m["count"] = st.count;
    metrics[name] = m;
  }
  j["metrics"] = metrics;
  j["recovery_rate"] = s.recovery_rate;
  j["feasibility_rate"] = s.feasibility_rate;
  j["bound_hold_rates"] = s.bound_hold_rates;
  j["slope_fits"] = s.slope_fits;
  return j;
}

void write_trial_csv_header(std::ostream& os) {
  os << "seed,feasible_star,err_l1,err_l2,err_L1_pop,err_L2_pop,err_L2_emp,"
        "exact_recovery,support_recovered,epsilon_used,runtime_ms\n";
}

void write_trial_csv_row(std::ostream& os, const TrialRecord& r) {
  os.precision(17);
  os << r.seed << ',' << (r.feasible_star ? 1 : 0) << ',' << r.err_l1 << ','
     << r.err_l2 << ',' << r.err_L1_pop << ',' << r.err_L2_pop << ','
     << r.err_L2_emp << ',' << (r.exact_recovery ? 1 : 0) << ','
     << (r.support_recovered ? 1 : 0) << ',' << r.epsilon_used << ','
     << r.runtime_ms << '\n';
}

std::vector<TrialRecord> read_trial_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw CsvError("empty trial file", 1);
  std::vector<TrialRecord> out;
  int line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto c = split_csv(line);
    if (c.size() != 11) throw CsvError("expected 11 columns", line_no);
    TrialRecord r;
    r.seed = static_cast<std::uint64_t>(std::stoull(c[0]));
    r.feasible_star = parse_double(c[1], line_no) != 0.0;
    r.err_l1 = parse_double(c[2], line_no);
    r.err_l2 = parse_double(c[3], line_no);
    r.err_L1_pop = parse_double(c[4], line_no);
    r.err_L2_pop = parse_double(c[5], line_no);
    r.err_L2_emp = parse_double(c[6], line_no);
    r.exact_recovery = parse_double(c[7], line_no) != 0.0;
    r.support_recovered = parse_double(c[8], line_no) != 0.0;
    r.epsilon_used = parse_double(c[9], line_no);
    r.runtime_ms = parse_double(c[10], line_no);
    out.push_back(r);
  }
  return out;
}

void write_bound_csv_header(std::ostream& os) {
  os << "suite,bound_id,lhs,rhs,holds\n";
}

void write_bound_csv_row(std::ostream& os, const BoundCheck& b) {
  os.precision(17);
  os << b.suite << ',' << b.bound_id << ',' << b.lhs << ',';
  if (b.rhs.is_finite())
    os << b.rhs.value;
  else
    os << (b.rhs.is_unbounded() ? "unbounded" : "inapplicable");
  os << ',' << (b.holds ? 1 : 0) << '\n';
}

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  std::ostringstream os;
  os << std::hex << h;
  return os.str();
}

} // namespace sparselab
