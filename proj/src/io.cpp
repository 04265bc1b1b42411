#include "dmlm/io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace dmlm::io {

namespace {

constexpr int kSchemaVersion = 1;
constexpr const char* kVersion = "1.0.0";

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  return out;
}

std::string format_real(double v) {
  char buf[32];
  const int len = std::snprintf(buf, sizeof buf, "%.17g", v);
  return std::string(buf, len);
}

void write_header(std::ostream& out, const std::vector<std::string>& header) {
  for (std::size_t k = 0; k < header.size(); ++k) out << (k ? "," : "") << header[k];
  out << '\n';
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

// Reads a rectangular table of fields, header excluded; reports 1-based
// data rows and columns in errors.
template <typename T, typename Parse>
Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic> read_table(const fs::path& path, std::vector<std::string>* header,
                                                           Parse parse) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw ParseError(path.string() + ": missing header row");
  std::vector<std::string> head = split(trim(line));
  for (auto& h : head) h = trim(h);
  const std::size_t cols = head.size();
  std::vector<T> values;
  long rows = 0;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty()) continue;
    ++rows;
    const auto fields = split(line);
    if (fields.size() != cols) {
      throw ParseError(path.string() + ": row " + std::to_string(rows) + " has " + std::to_string(fields.size()) +
                       " fields, expected " + std::to_string(cols));
    }
    for (std::size_t c = 0; c < cols; ++c) {
      const std::string f = trim(fields[c]);
      T v{};
      if (!parse(f, v)) {
        throw ParseError(path.string() + ": row " + std::to_string(rows) + ", column " + std::to_string(c + 1) +
                         ": bad value '" + f + "'");
      }
      values.push_back(v);
    }
  }
  if (header) *header = head;
  Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic> out(rows, static_cast<Eigen::Index>(cols));
  for (long r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) out(r, static_cast<Eigen::Index>(c)) = values[r * cols + c];
  }
  return out;
}

bool parse_real(const std::string& s, double& v) {
  if (s.empty()) return false;
  char* end = nullptr;
  v = std::strtod(s.c_str(), &end);
  return end == s.c_str() + s.size();
}

bool parse_int(const std::string& s, int& v) {
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  return ec == std::errc() && ptr == s.data() + s.size();
}

Matrix samples_to_rows(const std::vector<Vector>& samples) {
  if (samples.empty()) return {};
  Matrix out(samples.size(), samples.front().size());
  for (std::size_t s = 0; s < samples.size(); ++s) out.row(s) = samples[s].transpose();
  return out;
}

IntMatrix samples_to_rows(const std::vector<IntVector>& samples) {
  if (samples.empty()) return {};
  IntMatrix out(samples.size(), samples.front().size());
  for (std::size_t s = 0; s < samples.size(); ++s) out.row(s) = samples[s].transpose();
  return out;
}

json rates(const MoveCounters& c) {
  auto one = [](const MoveCounter& m) { return json{{"attempts", m.attempts}, {"accepts", m.accepts}, {"rate", m.rate()}}; };
  return json{{"alpha", one(c.alpha)},           {"zeta_add", one(c.zeta_add)}, {"zeta_delete", one(c.zeta_delete)},
              {"phi_within", one(c.phi_within)}, {"xi_add", one(c.xi_add)},     {"xi_delete", one(c.xi_delete)}};
}

MoveCounters counters_from_json(const json& j) {
  MoveCounters c;
  auto one = [&j](const char* key, MoveCounter& m) {
    if (!j.contains(key)) return;
    m.attempts = j.at(key).at("attempts").get<long>();
    m.accepts = j.at(key).at("accepts").get<long>();
  };
  one("alpha", c.alpha);
  one("zeta_add", c.zeta_add);
  one("zeta_delete", c.zeta_delete);
  one("phi_within", c.phi_within);
  one("xi_add", c.xi_add);
  one("xi_delete", c.xi_delete);
  return c;
}

template <typename T>
void maybe(const json& j, const char* key, T& field) {
  if (j.contains(key)) field = j.at(key).get<T>();
}

}  // namespace

std::vector<std::string> indexed_header(const std::string& prefix, Eigen::Index count) {
  std::vector<std::string> out;
  out.reserve(count);
  for (Eigen::Index k = 1; k <= count; ++k) out.push_back(prefix + std::to_string(k));
  return out;
}

void write_csv(const fs::path& path, const Matrix& values, const std::vector<std::string>& header) {
  if (static_cast<Eigen::Index>(header.size()) != values.cols()) throw DimensionError("header width mismatch");
  auto out = open_out(path);
  write_header(out, header);
  for (Eigen::Index i = 0; i < values.rows(); ++i) {
    for (Eigen::Index j = 0; j < values.cols(); ++j) out << (j ? "," : "") << format_real(values(i, j));
    out << '\n';
  }
}

void write_csv(const fs::path& path, const IntMatrix& values, const std::vector<std::string>& header) {
  if (static_cast<Eigen::Index>(header.size()) != values.cols()) throw DimensionError("header width mismatch");
  auto out = open_out(path);
  write_header(out, header);
  for (Eigen::Index i = 0; i < values.rows(); ++i) {
    for (Eigen::Index j = 0; j < values.cols(); ++j) out << (j ? "," : "") << values(i, j);
    out << '\n';
  }
}

Matrix read_real_csv(const fs::path& path, std::vector<std::string>* header) {
  return read_table<double>(path, header, parse_real);
}

IntMatrix read_int_csv(const fs::path& path, std::vector<std::string>* header) {
  return read_table<int>(path, header, parse_int);
}

void write_vector(const fs::path& path, const Vector& values, const std::string& name) {
  write_csv(path, Matrix(values), {name});
}

Vector read_vector(const fs::path& path) {
  const Matrix m = read_real_csv(path);
  if (m.cols() != 1) throw ParseError(path.string() + ": expected a single column");
  return m.col(0);
}

void write_dataset(const fs::path& dir, const Dataset& data) {
  write_vector(dir / "Y.csv", data.Y, "y");
  write_csv(dir / "Z.csv", data.Z, indexed_header("taxon_", data.j()));
  write_csv(dir / "X.csv", data.X, indexed_header("x_", data.p()));
}

Dataset read_dataset(const fs::path& dir) {
  return Dataset::make(read_vector(dir / "Y.csv"), read_int_csv(dir / "Z.csv"), read_real_csv(dir / "X.csv"));
}

void write_test_set(const fs::path& dir, const TestSet& test) {
  if (test.Y) write_vector(dir / "Y.csv", *test.Y, "y");
  write_csv(dir / "Z.csv", test.Z, indexed_header("taxon_", test.Z.cols()));
  write_csv(dir / "X.csv", test.X, indexed_header("x_", test.X.cols()));
}

TestSet read_test_set(const fs::path& dir) {
  TestSet t;
  t.Z = read_int_csv(dir / "Z.csv");
  t.X = read_real_csv(dir / "X.csv");
  if (fs::exists(dir / "Y.csv")) t.Y = read_vector(dir / "Y.csv");
  t.validate(t.Z.cols(), t.X.cols());
  return t;
}

void write_truth(const fs::path& dir, const GroundTruth& truth) {
  write_csv(dir / "zeta.csv", truth.zeta, indexed_header("x_", truth.zeta.cols()));
  write_csv(dir / "phi.csv", truth.phi, indexed_header("x_", truth.phi.cols()));
  write_vector(dir / "alpha.csv", truth.alpha, "alpha");
  write_csv(dir / "xi.csv", IntMatrix(truth.xi), {"xi"});
  write_vector(dir / "beta.csv", truth.beta, "beta");
  write_csv(dir / "psi_star.csv", truth.psi_star, indexed_header("taxon_", truth.psi_star.cols()));
}

GroundTruth read_truth(const fs::path& dir) {
  if (!fs::exists(dir / "zeta.csv") || !fs::exists(dir / "xi.csv")) {
    throw ParseError("no ground truth in " + dir.string());
  }
  GroundTruth t;
  t.zeta = read_int_csv(dir / "zeta.csv");
  t.phi = read_real_csv(dir / "phi.csv");
  t.alpha = read_vector(dir / "alpha.csv");
  t.xi = read_int_csv(dir / "xi.csv").col(0);
  t.beta = read_vector(dir / "beta.csv");
  if (fs::exists(dir / "psi_star.csv")) t.psi_star = read_real_csv(dir / "psi_star.csv");
  return t;
}

void write_replicate(const fs::path& dir, const Replicate& rep) {
  write_dataset(dir / "train", rep.train);
  write_test_set(dir / "test", rep.test);
  write_truth(dir / "truth", rep.truth);
}

json to_json(const Hyperparams& h) {
  return json{{"h_alpha0", h.h_alpha0}, {"h_beta", h.h_beta}, {"a0", h.a0},
              {"b0", h.b0},             {"r2", h.r2},         {"sigma_alpha2", h.sigma_alpha2},
              {"a", h.a},               {"b", h.b},           {"a_m", h.a_m},
              {"b_m", h.b_m},           {"proposal_sd", h.proposal_sd}, {"delta", h.delta}};
}

Hyperparams hyperparams_from_json(const json& j, Hyperparams h) {
  maybe(j, "h_alpha0", h.h_alpha0);
  maybe(j, "h_beta", h.h_beta);
  maybe(j, "a0", h.a0);
  maybe(j, "b0", h.b0);
  maybe(j, "r2", h.r2);
  maybe(j, "sigma_alpha2", h.sigma_alpha2);
  maybe(j, "a", h.a);
  maybe(j, "b", h.b);
  maybe(j, "a_m", h.a_m);
  maybe(j, "b_m", h.b_m);
  maybe(j, "proposal_sd", h.proposal_sd);
  maybe(j, "delta", h.delta);
  return h;
}

json to_json(const SamplerConfig& c) {
  return json{{"iterations", c.iterations},
              {"burn_in", c.burn_in},
              {"thin", c.thin},
              {"seed", c.seed},
              {"init_zeta_frac", c.init_zeta_frac},
              {"init_xi_frac", c.init_xi_frac},
              {"between_moves_per_iter", c.between_moves_per_iter},
              {"mode", to_string(c.mode)},
              {"standardize_balances", c.standardize_balances}};
}

SamplerConfig sampler_config_from_json(const json& j, SamplerConfig c) {
  maybe(j, "iterations", c.iterations);
  maybe(j, "burn_in", c.burn_in);
  maybe(j, "thin", c.thin);
  maybe(j, "seed", c.seed);
  maybe(j, "init_zeta_frac", c.init_zeta_frac);
  maybe(j, "init_xi_frac", c.init_xi_frac);
  maybe(j, "between_moves_per_iter", c.between_moves_per_iter);
  maybe(j, "standardize_balances", c.standardize_balances);
  if (j.contains("mode")) c.mode = parse_mode(j.at("mode").get<std::string>());
  return c;
}

json to_json(const SimConfig& c) {
  return json{{"N", c.N},
              {"P", c.P},
              {"J", c.J},
              {"omega", c.omega},
              {"n_true_cov", c.n_true_cov},
              {"phi_range", {c.phi_lo, c.phi_hi}},
              {"alpha_range", {c.alpha_lo, c.alpha_hi}},
              {"d", c.d},
              {"zdot_range", {c.zdot_lo, c.zdot_hi}},
              {"n_true_bal", c.n_true_bal},
              {"beta_range", {c.beta_lo, c.beta_hi}},
              {"sigma_eps", c.sigma_eps},
              {"delta", c.delta},
              {"seed", c.seed}};
}

SimConfig sim_config_from_json(const json& j, SimConfig c) {
  maybe(j, "N", c.N);
  maybe(j, "P", c.P);
  maybe(j, "J", c.J);
  maybe(j, "omega", c.omega);
  maybe(j, "n_true_cov", c.n_true_cov);
  maybe(j, "d", c.d);
  maybe(j, "n_true_bal", c.n_true_bal);
  maybe(j, "sigma_eps", c.sigma_eps);
  maybe(j, "delta", c.delta);
  maybe(j, "seed", c.seed);
  auto range = [&j](const char* key, auto& lo, auto& hi) {
    if (!j.contains(key)) return;
    const auto& r = j.at(key);
    if (!r.is_array() || r.size() != 2) throw ConfigError(std::string(key) + " must be a two-element array");
    r.at(0).get_to(lo);
    r.at(1).get_to(hi);
  };
  range("phi_range", c.phi_lo, c.phi_hi);
  range("alpha_range", c.alpha_lo, c.alpha_hi);
  range("zdot_range", c.zdot_lo, c.zdot_hi);
  range("beta_range", c.beta_lo, c.beta_hi);
  return c;
}

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

void write_json(const fs::path& path, const json& value) {
  auto out = open_out(path);
  out << value.dump(2) << '\n';
}

void write_chain(const fs::path& dir, const ChainOutput& chain, const Eigen::Index J, const Eigen::Index P) {
  fs::create_directories(dir);
  const int S = chain.num_samples();
  json summary{{"mode", to_string(chain.config.mode)},
               {"config", to_json(chain.config)},
               {"hyperparams", to_json(chain.hyper)},
               {"seed", chain.config.seed},
               {"num_samples", S},
               {"num_taxa", J},
               {"num_covariates", P},
               {"acceptance", rates(chain.counters)}};

  {
    auto out = open_out(dir / "log_posterior.csv");
    out << "iteration,log_posterior\n";
    for (std::size_t t = 0; t < chain.log_posterior.size(); ++t) {
      out << t + 1 << ',' << format_real(chain.log_posterior[t]) << '\n';
    }
  }

  if (!chain.alpha.empty()) {
    write_csv(dir / "alpha.csv", samples_to_rows(chain.alpha), indexed_header("alpha_", J));
    write_csv(dir / "u.csv", samples_to_rows(chain.u), indexed_header("u_", chain.u.front().size()));
    // Sparse: only included (taxon, covariate) pairs appear.
    auto out = open_out(dir / "phi.csv");
    out << "sample,taxon,covariate,phi\n";
    for (int s = 0; s < S; ++s) {
      const auto& zeta = chain.zeta[s];
      for (Eigen::Index p = 0; p < zeta.cols(); ++p) {
        for (Eigen::Index j = 0; j < zeta.rows(); ++j) {
          if (zeta(j, p)) out << s + 1 << ',' << j + 1 << ',' << p + 1 << ',' << format_real(chain.phi[s](j, p)) << '\n';
        }
      }
    }
    write_csv(dir / "mppi_zeta.csv", chain.mppi_zeta, indexed_header("x_", P));
    auto sel = open_out(dir / "selected_zeta.csv");
    sel << "taxon,covariate,mppi\n";
    long count = 0;
    for (Eigen::Index p = 0; p < chain.mppi_zeta.cols(); ++p) {
      for (Eigen::Index j = 0; j < chain.mppi_zeta.rows(); ++j) {
        if (chain.mppi_zeta(j, p) >= 0.5) {
          sel << j + 1 << ',' << p + 1 << ',' << format_real(chain.mppi_zeta(j, p)) << '\n';
          ++count;
        }
      }
    }
    summary["selected_covariates"] = count;
  }

  if (!chain.xi.empty()) {
    write_csv(dir / "xi.csv", samples_to_rows(chain.xi), indexed_header("xi_", chain.xi.front().size()));
    write_vector(dir / "mppi_xi.csv", chain.mppi_xi, "mppi");
    auto sel = open_out(dir / "selected_xi.csv");
    sel << "balance,mppi\n";
    long count = 0;
    for (Eigen::Index m = 0; m < chain.mppi_xi.size(); ++m) {
      if (chain.mppi_xi(m) >= 0.5) {
        sel << m + 1 << ',' << format_real(chain.mppi_xi(m)) << '\n';
        ++count;
      }
    }
    summary["selected_balances"] = count;
  }
  write_json(dir / "summary.json", summary);
}

ChainOutput read_chain(const fs::path& dir) {
  const json summary = read_json(dir / "summary.json");
  ChainOutput chain;
  chain.config = sampler_config_from_json(summary.at("config"));
  chain.hyper = hyperparams_from_json(summary.at("hyperparams"));
  chain.counters = counters_from_json(summary.at("acceptance"));
  const int S = summary.at("num_samples").get<int>();
  const auto J = summary.at("num_taxa").get<Eigen::Index>();
  const auto P = summary.at("num_covariates").get<Eigen::Index>();

  const Matrix lp = read_real_csv(dir / "log_posterior.csv");
  chain.log_posterior.assign(lp.col(1).data(), lp.col(1).data() + lp.rows());

  if (fs::exists(dir / "alpha.csv")) {
    const Matrix alpha = read_real_csv(dir / "alpha.csv");
    const Matrix u = read_real_csv(dir / "u.csv");
    if (alpha.rows() != S || alpha.cols() != J) throw ParseError((dir / "alpha.csv").string() + ": unexpected shape");
    for (int s = 0; s < S; ++s) {
      chain.alpha.push_back(alpha.row(s).transpose());
      chain.u.push_back(u.row(s).transpose());
      chain.phi.push_back(Matrix::Zero(J, P));
      chain.zeta.push_back(IntMatrix::Zero(J, P));
    }
    const Matrix phi = read_real_csv(dir / "phi.csv");
    for (Eigen::Index r = 0; r < phi.rows(); ++r) {
      const auto s = static_cast<long>(phi(r, 0)) - 1;
      const auto j = static_cast<Eigen::Index>(phi(r, 1)) - 1;
      const auto p = static_cast<Eigen::Index>(phi(r, 2)) - 1;
      if (s < 0 || s >= S || j < 0 || j >= J || p < 0 || p >= P) {
        throw ParseError((dir / "phi.csv").string() + ": row " + std::to_string(r + 1) + " indexes outside the chain");
      }
      chain.phi[s](j, p) = phi(r, 3);
      chain.zeta[s](j, p) = 1;
    }
    chain.mppi_zeta = mppi(chain.zeta);
  }
  if (fs::exists(dir / "xi.csv")) {
    const IntMatrix xi = read_int_csv(dir / "xi.csv");
    for (Eigen::Index s = 0; s < xi.rows(); ++s) chain.xi.push_back(xi.row(s).transpose());
    chain.mppi_xi = mppi(chain.xi);
  }
  return chain;
}

void write_predictor(const fs::path& path, const BalancePredictor& pred) {
  const int S = pred.num_samples();
  const int M = pred.num_balances();
  std::vector<std::string> header{"sample", "alpha0", "standardize", "sigma2"};
  for (const auto* prefix : {"mean_", "sd_", "beta_"}) {
    auto h = indexed_header(prefix, M);
    header.insert(header.end(), h.begin(), h.end());
  }
  Matrix table(S, 4 + 3 * M);
  for (int s = 0; s < S; ++s) {
    table(s, 0) = s + 1;
    table(s, 1) = pred.alpha0;
    table(s, 2) = pred.standardize ? 1.0 : 0.0;
    table(s, 3) = pred.sigma2(s);
    table.block(s, 4, 1, M) = pred.mean.row(s);
    table.block(s, 4 + M, 1, M) = pred.sd.row(s);
    table.block(s, 4 + 2 * M, 1, M) = pred.beta.row(s);
  }
  write_csv(path, table, header);
}

BalancePredictor read_predictor(const fs::path& path) {
  const Matrix t = read_real_csv(path);
  if (t.rows() < 1 || t.cols() < 7 || (t.cols() - 4) % 3 != 0) throw ParseError(path.string() + ": malformed predictor");
  const auto M = (t.cols() - 4) / 3;
  BalancePredictor pred;
  pred.alpha0 = t(0, 1);
  pred.standardize = t(0, 2) != 0.0;
  pred.sigma2 = t.col(3);
  pred.mean = t.middleCols(4, M);
  pred.sd = t.middleCols(4 + M, M);
  pred.beta = t.middleCols(4 + 2 * M, M);
  return pred;
}

json RunManifest::to_json() const {
  return json{{"command", command}, {"schema_version", kSchemaVersion}, {"code_version", kVersion},
              {"config", config},   {"seed", seed},                     {"inputs", inputs},
              {"outputs", outputs}, {"wall_seconds", seconds}};
}

void write_manifest(const fs::path& dir, const RunManifest& manifest) {
  write_json(dir / "manifest.json", manifest.to_json());
}

}  // namespace dmlm::io
