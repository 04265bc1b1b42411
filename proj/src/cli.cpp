#include "dmlm/cli.hpp"

#include "dmlm/baselines.hpp"
#include "dmlm/io.hpp"
#include "dmlm/metrics.hpp"
#include "dmlm/prediction.hpp"
#include "dmlm/preprocess.hpp"
#include "dmlm/random.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

namespace dmlm::cli {

namespace {

using io::json;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// Runs task(0..count-1) on up to `jobs` threads. Tasks write to disjoint
// outputs, so the results do not depend on scheduling. Rethrows the first failure.
void parallel_for(int count, int jobs, const std::function<void(int)>& task) {
  jobs = std::max(1, std::min(jobs, count));
  if (jobs == 1) {
    for (int k = 0; k < count; ++k) task(k);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (int w = 0; w < jobs; ++w) {
    pool.emplace_back([&] {
      for (int k = next++; k < count; k = next++) {
        try {
          task(k);
        } catch (...) {
          std::lock_guard<std::mutex> lock(failure_mutex);
          if (!failure) failure = std::current_exception();
          next = count;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

std::string replicate_name(int r) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "rep_%03d", r + 1);
  return buf;
}

std::vector<fs::path> list_replicates(const fs::path& data) {
  if (fs::exists(data / "train")) return {data};
  std::vector<fs::path> reps;
  if (fs::is_directory(data)) {
    for (const auto& entry : fs::directory_iterator(data)) {
      if (entry.is_directory() && fs::exists(entry.path() / "train")) reps.push_back(entry.path());
    }
  }
  std::sort(reps.begin(), reps.end());
  if (reps.empty()) throw ParseError("no dataset found under " + data.string() + " (expected train/ or rep_*/train/)");
  return reps;
}

std::string format_b0(double b0) {
  std::ostringstream s;
  s << b0;
  return s.str();
}

json standardizer_json(const Standardizer& st) {
  return json{{"y_mean", st.y_mean},
              {"x_mean", std::vector<double>(st.x_mean.data(), st.x_mean.data() + st.x_mean.size())},
              {"x_sd", std::vector<double>(st.x_sd.data(), st.x_sd.data() + st.x_sd.size())}};
}

Standardizer standardizer_from_json(const json& j) {
  Standardizer st;
  st.y_mean = j.at("y_mean").get<double>();
  const auto mean = j.at("x_mean").get<std::vector<double>>();
  const auto sd = j.at("x_sd").get<std::vector<double>>();
  st.x_mean = Eigen::Map<const Vector>(mean.data(), static_cast<Eigen::Index>(mean.size()));
  st.x_sd = Eigen::Map<const Vector>(sd.data(), static_cast<Eigen::Index>(sd.size()));
  return st;
}

PartitionSpec load_partition(const fs::path& file, int J) {
  return file.empty() ? PartitionSpec::pivot(J) : PartitionSpec::read_file(file.string(), J);
}

void write_predictions(const fs::path& path, const Vector& yhat, const std::optional<Vector>& y) {
  if (y) {
    Matrix table(yhat.size(), 2);
    table.col(0) = *y;
    table.col(1) = yhat;
    io::write_csv(path, table, {"y", "y_hat"});
  } else {
    io::write_vector(path, yhat, "y_hat");
  }
}

struct FitSummary {
  std::string name;
  long covariates = -1;
  long balances = -1;
  double seconds = 0.0;
};

FitSummary fit_replicate(const fs::path& rep, const fs::path& out, const FitOptions& opts, const Hyperparams& hyper,
                         std::uint64_t seed) {
  const auto start = Clock::now();
  const Dataset raw = io::read_dataset(rep / "train");
  const Standardizer st = Standardizer::fit(raw);
  const Dataset train = st.apply(raw);
  const PartitionSpec spec = load_partition(opts.partition, static_cast<int>(train.j()));
  SamplerConfig config = opts.sampler;
  config.seed = seed;

  fs::create_directories(out);
  io::write_json(out / "standardizer.json", standardizer_json(st));

  FitSummary summary;
  summary.name = rep.filename().string();
  const ChainOutput* response = nullptr;
  ChainOutput joint;
  TwoStepOutput two;
  if (opts.model == "joint") {
    config.mode = SamplerMode::joint;
    joint = run_chain(train, hyper, spec, config);
    io::write_chain(out, joint, train.j(), train.p());
    response = &joint;
    summary.covariates = median_model(joint.mppi_zeta).sum();
  } else {
    two = run_two_step(train, hyper, spec, config);
    io::write_chain(out / "stage1", two.stage1, train.j(), train.p());
    io::write_chain(out / "stage2", two.stage2, train.j(), train.p());
    io::write_csv(out / "psi_bar.csv", two.psi_bar, io::indexed_header("taxon_", train.j()));
    response = &two.stage2;
    summary.covariates = median_model(two.stage1.mppi_zeta).sum();
  }
  summary.balances = median_model(response->mppi_xi).sum();

  const BalancePredictor pred = build_predictor(*response, train, spec, hyper);
  io::write_predictor(out / "predictor.csv", pred);
  const Matrix loglik = pointwise_loglik(*response, train, spec, hyper);
  io::write_csv(out / "pointwise_loglik.csv", loglik, io::indexed_header("sample_", loglik.cols()));
  const Vector fitted = fitted_y(*response, train, spec, hyper).array() + st.y_mean;
  write_predictions(out / "fitted.csv", fitted, raw.Y);

  if (fs::exists(rep / "test" / "Z.csv")) {
    const TestSet raw_test = io::read_test_set(rep / "test");
    const TestSet test = st.apply(raw_test);
    test.validate(train.j(), train.p());
    const ChainOutput& counts = opts.model == "joint" ? joint : two.stage1;
    const Matrix psi_test = estimate_psi_test(estimate_lambda_test(counts, test.X), test.Z);
    const Vector yhat = apply_predictor(pred, psi_test, spec, hyper.delta).array() + st.y_mean;
    write_predictions(out / "predictions.csv", yhat, raw_test.Y);
  }

  summary.seconds = seconds_since(start);
  json record{{"model", opts.model},
              {"data_dir", fs::absolute(rep).lexically_normal().string()},
              {"replicate", summary.name},
              {"seed", seed},
              {"hyperparams", io::to_json(hyper)},
              {"sampler", io::to_json(config)},
              {"partition", opts.partition.empty() ? std::string("pivot") : fs::absolute(opts.partition).string()},
              {"selected_covariates", summary.covariates},
              {"selected_balances", summary.balances},
              {"wall_seconds", summary.seconds}};
  if (fs::exists(rep / "truth" / "zeta.csv")) {
    record["truth_dir"] = fs::absolute(rep / "truth").lexically_normal().string();
  }
  io::write_json(out / "fit.json", record);
  return summary;
}

// --- evaluation -------------------------------------------------------------

struct EvalRow {
  std::string group;
  std::string replicate;
  double b0 = 0.0;
  ConfusionSummary cov;
  ConfusionSummary bal;
  std::optional<SquaredError> mse;
  std::optional<SquaredError> pmse;
};

void find_fits(const fs::path& dir, std::vector<fs::path>& found) {
  if (fs::exists(dir / "fit.json")) {
    found.push_back(dir);
    return;
  }
  if (!fs::is_directory(dir)) return;
  std::vector<fs::path> children;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_directory()) children.push_back(entry.path());
  }
  std::sort(children.begin(), children.end());
  for (const auto& c : children) find_fits(c, found);
}

std::optional<SquaredError> error_from(const fs::path& file) {
  if (!fs::exists(file)) return std::nullopt;
  std::vector<std::string> header;
  const Matrix t = io::read_real_csv(file, &header);
  if (t.cols() != 2 || header[0] != "y") return std::nullopt;
  return squared_error(t.col(0), t.col(1));
}

EvalRow evaluate_run(const fs::path& run, const fs::path& truth_override) {
  const json fit = io::read_json(run / "fit.json");
  fs::path truth_dir = truth_override;
  if (truth_dir.empty()) {
    if (!fit.contains("truth_dir")) throw ParseError("no ground truth recorded for " + run.string() + "; pass --truth");
    truth_dir = fit.at("truth_dir").get<std::string>();
  }
  const GroundTruth truth = io::read_truth(truth_dir);
  const std::string model = fit.at("model").get<std::string>();
  const Hyperparams h = io::hyperparams_from_json(fit.at("hyperparams"));
  const fs::path count_dir = model == "joint" ? run : run / "stage1";
  const fs::path resp_dir = model == "joint" ? run : run / "stage2";

  EvalRow row;
  std::ostringstream g;
  g << model << " a=" << h.a << " b=" << h.b << " a_m=" << h.a_m << " b_m=" << h.b_m << " b0=" << h.b0;
  row.group = g.str();
  row.replicate = fit.value("replicate", run.filename().string());
  row.b0 = h.b0;
  const Matrix mz = io::read_real_csv(count_dir / "mppi_zeta.csv");
  row.cov = confusion(median_model(mz), truth.zeta);
  const Vector mx = io::read_vector(resp_dir / "mppi_xi.csv");
  row.bal = confusion(median_model(mx), truth.xi);
  row.mse = error_from(run / "fitted.csv");
  row.pmse = error_from(run / "predictions.csv");
  return row;
}

const std::vector<std::string>& metric_names() {
  static const std::vector<std::string> names{"cov_selected", "cov_sens", "cov_spec", "cov_mcc",
                                              "bal_selected", "bal_sens", "bal_spec", "bal_mcc",
                                              "mse",          "pmse",     "mse_mean", "pmse_mean"};
  return names;
}

std::vector<double> metric_values(const EvalRow& r) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  return {static_cast<double>(r.cov.selected()),
          r.cov.sensitivity,
          r.cov.specificity,
          r.cov.mcc,
          static_cast<double>(r.bal.selected()),
          r.bal.sensitivity,
          r.bal.specificity,
          r.bal.mcc,
          r.mse ? r.mse->sum : nan,
          r.pmse ? r.pmse->sum : nan,
          r.mse ? r.mse->mean : nan,
          r.pmse ? r.pmse->mean : nan};
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_rows(const fs::path& path, const std::vector<EvalRow>& rows) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << "group,replicate";
  for (const auto& n : metric_names()) out << ',' << n;
  out << '\n';
  for (const auto& r : rows) {
    out << '"' << r.group << "\"," << r.replicate;
    for (double v : metric_values(r)) out << ',' << fmt(v);
    out << '\n';
  }
}

struct GroupStats {
  std::string group;
  double b0 = 0.0;
  int replicates = 0;
  std::vector<MeanSd> stats;
};

std::vector<GroupStats> aggregate(const std::vector<EvalRow>& rows) {
  std::vector<GroupStats> out;
  std::map<std::string, std::vector<const EvalRow*>> groups;
  std::vector<std::string> order;
  for (const auto& r : rows) {
    if (!groups.count(r.group)) order.push_back(r.group);
    groups[r.group].push_back(&r);
  }
  for (const auto& name : order) {
    const auto& members = groups[name];
    GroupStats gs;
    gs.group = name;
    gs.b0 = members.front()->b0;
    gs.replicates = static_cast<int>(members.size());
    for (std::size_t k = 0; k < metric_names().size(); ++k) {
      std::vector<double> vals;
      for (const auto* r : members) {
        const double v = metric_values(*r)[k];
        if (!std::isnan(v)) vals.push_back(v);
      }
      gs.stats.push_back(vals.empty() ? MeanSd{std::numeric_limits<double>::quiet_NaN(), 0.0} : mean_sd(vals));
    }
    out.push_back(std::move(gs));
  }
  return out;
}

void write_aggregate(const fs::path& path, const std::vector<GroupStats>& groups) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << "group,replicates";
  for (const auto& n : metric_names()) out << ',' << n << "_mean," << n << "_sd";
  out << '\n';
  for (const auto& g : groups) {
    out << '"' << g.group << "\"," << g.replicates;
    for (const auto& s : g.stats) out << ',' << fmt(s.mean) << ',' << fmt(s.sd);
    out << '\n';
  }
}

void print_table(std::ostream& os, const std::vector<GroupStats>& groups) {
  char line[512];
  std::snprintf(line, sizeof line, "%-40s %5s  %-14s %-12s %-12s %-12s  %-14s %-12s %-12s %-12s  %-18s %-18s\n", "group",
                "reps", "cov #", "cov sens", "cov spec", "cov MCC", "bal #", "bal sens", "bal spec", "bal MCC", "MSE",
                "PMSE");
  os << line;
  for (const auto& g : groups) {
    auto cell = [&g](int k, int prec) {
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.*f (%.*f)", prec, g.stats[k].mean, prec, g.stats[k].sd);
      return std::string(buf);
    };
    std::snprintf(line, sizeof line, "%-40s %5d  %-14s %-12s %-12s %-12s  %-14s %-12s %-12s %-12s  %-18s %-18s\n",
                  g.group.c_str(), g.replicates, cell(0, 2).c_str(), cell(1, 2).c_str(), cell(2, 2).c_str(),
                  cell(3, 2).c_str(), cell(4, 2).c_str(), cell(5, 2).c_str(), cell(6, 2).c_str(), cell(7, 2).c_str(),
                  cell(8, 2).c_str(), cell(9, 2).c_str());
    os << line;
  }
}

std::vector<std::string> path_strings(const std::vector<fs::path>& paths) {
  std::vector<std::string> out;
  for (const auto& p : paths) out.push_back(p.string());
  return out;
}

}  // namespace

// --- commands -----------------------------------------------------------------

int cmd_simulate(const SimulateOptions& opts) {
  const auto start = Clock::now();
  opts.sim.validate();
  if (opts.replicates < 1) throw ConfigError("--replicates must be >= 1");
  fs::create_directories(opts.out);
  parallel_for(opts.replicates, opts.jobs, [&](int r) {
    SimConfig cfg = opts.sim;
    cfg.seed = derive_seed(opts.sim.seed, static_cast<std::uint64_t>(r));
    const fs::path dir = opts.out / replicate_name(r);
    io::write_replicate(dir, gen_replicate(cfg));
    io::write_json(dir / "simulation.json", io::to_json(cfg));
  });
  io::RunManifest m;
  m.command = "simulate";
  m.config = io::to_json(opts.sim);
  m.config["replicates"] = opts.replicates;
  m.seed = opts.sim.seed;
  m.outputs = {opts.out.string()};
  m.seconds = seconds_since(start);
  io::write_manifest(opts.out, m);
  std::cout << "wrote " << opts.replicates << " replicate(s) to " << opts.out.string() << "\n";
  return kOk;
}

int cmd_fit(const FitOptions& opts) {
  const auto start = Clock::now();
  if (opts.model != "joint" && opts.model != "dmlm-bayes") {
    throw ConfigError("unknown model '" + opts.model + "' (expected joint or dmlm-bayes)");
  }
  opts.hyper.validate();
  opts.sampler.validate();
  const auto reps = list_replicates(opts.data);
  const bool single = reps.size() == 1 && reps.front() == opts.data;
  std::vector<double> b0s = opts.sweep_b0;
  if (b0s.empty()) b0s.push_back(opts.hyper.b0);

  struct Job {
    fs::path rep, out;
    Hyperparams hyper;
    std::uint64_t seed;
  };
  std::vector<Job> jobs;
  for (std::size_t r = 0; r < reps.size(); ++r) {
    for (double b0 : b0s) {
      Job job;
      job.rep = reps[r];
      job.out = opts.out;
      if (!opts.sweep_b0.empty()) job.out /= "b0_" + format_b0(b0);
      if (!single) job.out /= reps[r].filename();
      job.hyper = opts.hyper;
      job.hyper.b0 = b0;
      job.hyper.validate();
      job.seed = single ? opts.sampler.seed : derive_seed(opts.sampler.seed, r);
      jobs.push_back(job);
    }
  }
  std::mutex print_mutex;
  parallel_for(static_cast<int>(jobs.size()), opts.jobs, [&](int k) {
    const auto& job = jobs[k];
    const FitSummary s = fit_replicate(job.rep, job.out, opts, job.hyper, job.seed);
    if (!opts.quiet) {
      std::lock_guard<std::mutex> lock(print_mutex);
      std::cout << job.out.string() << ": " << s.covariates << " covariate-taxon pairs and " << s.balances
                << " balances with MPPI >= 0.5 (" << s.seconds << " s)\n";
    }
  });

  io::RunManifest m;
  m.command = "fit";
  m.config = json{{"model", opts.model},
                  {"hyperparams", io::to_json(opts.hyper)},
                  {"sampler", io::to_json(opts.sampler)},
                  {"partition", opts.partition.empty() ? std::string("pivot") : opts.partition.string()},
                  {"sweep_b0", opts.sweep_b0},
                  {"jobs", opts.jobs}};
  m.seed = opts.sampler.seed;
  m.inputs = path_strings(reps);
  m.outputs = {opts.out.string()};
  m.seconds = seconds_since(start);
  io::write_manifest(opts.out, m);
  return kOk;
}

int cmd_predict(const PredictOptions& opts) {
  const auto start = Clock::now();
  const json fit = io::read_json(opts.run / "fit.json");
  const std::string model = fit.at("model").get<std::string>();
  const Hyperparams hyper = io::hyperparams_from_json(fit.at("hyperparams"));
  const Standardizer st = standardizer_from_json(io::read_json(opts.run / "standardizer.json"));
  const ChainOutput counts = io::read_chain(model == "joint" ? opts.run : opts.run / "stage1");
  const BalancePredictor pred = io::read_predictor(opts.run / "predictor.csv");
  const auto J = counts.alpha.front().size();
  const auto P = counts.phi.front().cols();
  const std::string partition = fit.value("partition", std::string("pivot"));
  const PartitionSpec spec = load_partition(partition == "pivot" ? fs::path() : fs::path(partition), static_cast<int>(J));

  TestSet raw = io::read_test_set(opts.test);
  raw.validate(J, P);
  const TestSet test = st.apply(raw);
  const Matrix psi_test = estimate_psi_test(estimate_lambda_test(counts, test.X), test.Z);
  const Vector yhat = apply_predictor(pred, psi_test, spec, hyper.delta).array() + st.y_mean;
  fs::create_directories(opts.out);
  write_predictions(opts.out / "predictions.csv", yhat, raw.Y);
  if (test.Y) {
    const Matrix ll = predictor_loglik(pred, psi_test, *test.Y, spec, hyper.delta);
    io::write_csv(opts.out / "pointwise_loglik.csv", ll, io::indexed_header("sample_", ll.cols()));
  }

  io::RunManifest m;
  m.command = "predict";
  m.config = json{{"model", model}, {"hyperparams", io::to_json(hyper)}};
  m.seed = fit.value("seed", std::uint64_t{0});
  m.inputs = {opts.run.string(), opts.test.string()};
  m.outputs = {opts.out.string()};
  m.seconds = seconds_since(start);
  io::write_manifest(opts.out, m);
  std::cout << "wrote " << yhat.size() << " predictions to " << (opts.out / "predictions.csv").string() << "\n";
  return kOk;
}

int cmd_evaluate(const EvaluateOptions& opts) {
  const auto start = Clock::now();
  std::vector<fs::path> fits;
  for (const auto& r : opts.runs) {
    if (!fs::exists(r)) throw ParseError("run directory " + r.string() + " does not exist");
    find_fits(r, fits);
  }
  if (fits.empty()) throw ParseError("no fitted runs (fit.json) found");
  std::vector<EvalRow> rows;
  for (const auto& f : fits) rows.push_back(evaluate_run(f, opts.truth));

  fs::create_directories(opts.out);
  write_rows(opts.out / "report.csv", rows);
  auto groups = aggregate(rows);
  write_aggregate(opts.out / "summary.csv", groups);
  if (!opts.sweep_b0.empty()) {
    std::vector<GroupStats> sweep;
    for (double b0 : opts.sweep_b0) {
      std::vector<GroupStats> matching;
      for (const auto& g : groups) {
        if (g.b0 == b0) matching.push_back(g);
      }
      if (matching.size() != 1) {
        throw ParseError("b0 sweep: expected exactly one configuration with b0=" + format_b0(b0) + ", found " +
                         std::to_string(matching.size()));
      }
      sweep.push_back(matching.front());
    }
    write_aggregate(opts.out / "sweep_b0.csv", sweep);
    groups = sweep;
  }
  print_table(std::cout, groups);

  io::RunManifest m;
  m.command = "evaluate";
  m.config = json{{"truth", opts.truth.string()}, {"sweep_b0", opts.sweep_b0}};
  m.inputs = path_strings(fits);
  m.outputs = {opts.out.string()};
  m.seconds = seconds_since(start);
  io::write_manifest(opts.out, m);
  return kOk;
}

// --- argument parsing ------------------------------------------------------------

namespace {

// Values given on the command line; unset ones fall back to the config file,
// then to the built-in defaults.
struct ModelFlags {
  std::optional<double> h_alpha0, h_beta, a0, b0, r2, sigma_alpha2, a, b, a_m, b_m, proposal_sd, delta;
  std::optional<int> iterations, burn_in, thin, moves;
  std::optional<std::uint64_t> seed;
  std::optional<double> init_zeta, init_xi;
  std::optional<std::string> mode;

  void add(CLI::App& app) {
    app.add_option("--h-alpha0", h_alpha0, "Prior scale of the response intercept");
    app.add_option("--h-beta", h_beta, "Prior scale of the balance coefficients");
    app.add_option("--a0", a0, "Inverse-gamma shape for the residual variance");
    app.add_option("--b0", b0, "Inverse-gamma scale for the residual variance");
    app.add_option("--r2", r2, "Slab variance of the covariate effects");
    app.add_option("--sigma-alpha2", sigma_alpha2, "Prior variance of the taxon intercepts");
    app.add_option("--a", a, "Beta-binomial a for covariate inclusion");
    app.add_option("--b", b, "Beta-binomial b for covariate inclusion");
    app.add_option("--a-m", a_m, "Beta-binomial a for balance inclusion");
    app.add_option("--b-m", b_m, "Beta-binomial b for balance inclusion");
    app.add_option("--proposal-sd", proposal_sd, "Random-walk proposal standard deviation");
    app.add_option("--delta", delta, "Zero-replacement pseudovalue");
    app.add_option("--iterations", iterations, "MCMC iterations");
    app.add_option("--burn-in", burn_in, "Iterations discarded before thinning");
    app.add_option("--thin", thin, "Keep every thin-th post-burn-in iteration");
    app.add_option("--seed", seed, "Master seed");
    app.add_option("--moves", moves, "Between-model proposals per iteration, for both zeta and xi");
    app.add_option("--init-zeta-frac", init_zeta, "Fraction of covariate indicators active at start");
    app.add_option("--init-xi-frac", init_xi, "Fraction of balance indicators active at start");
    app.add_option("--mode", mode, "Sampler mode: joint, dm_only or lm_only");
  }

  void apply(Hyperparams& h, SamplerConfig& c) const {
    auto set = [](auto& field, const auto& flag) {
      if (flag) field = *flag;
    };
    set(h.h_alpha0, h_alpha0);
    set(h.h_beta, h_beta);
    set(h.a0, a0);
    set(h.b0, b0);
    set(h.r2, r2);
    set(h.sigma_alpha2, sigma_alpha2);
    set(h.a, a);
    set(h.b, b);
    set(h.a_m, a_m);
    set(h.b_m, b_m);
    set(h.proposal_sd, proposal_sd);
    set(h.delta, delta);
    set(c.iterations, iterations);
    set(c.burn_in, burn_in);
    set(c.thin, thin);
    set(c.seed, seed);
    set(c.between_moves_per_iter, moves);
    set(c.init_zeta_frac, init_zeta);
    set(c.init_xi_frac, init_xi);
    if (mode) c.mode = parse_mode(*mode);
  }
};

}  // namespace

int run(int argc, char** argv) {
  CLI::App app{"Joint Dirichlet-multinomial and balance-regression model: simulate, fit, predict, evaluate"};
  app.require_subcommand(1);

  SimulateOptions sim;
  std::string sim_config;
  std::optional<std::uint64_t> sim_seed;
  std::optional<int> sim_n, sim_p, sim_j, sim_true_cov, sim_true_bal;
  std::optional<double> sim_omega, sim_d;
  auto* simulate = app.add_subcommand("simulate", "Generate synthetic replicates with ground truth");
  simulate->add_option("-o,--out", sim.out, "Output directory")->required();
  simulate->add_option("--replicates", sim.replicates, "Number of replicates")->check(CLI::PositiveNumber);
  simulate->add_option("--jobs", sim.jobs, "Worker threads")->check(CLI::PositiveNumber);
  simulate->add_option("--config", sim_config, "JSON file with a \"simulation\" object");
  simulate->add_option("--seed", sim_seed, "Master seed");
  simulate->add_option("--n", sim_n, "Subjects per train/test set");
  simulate->add_option("--p", sim_p, "Covariates");
  simulate->add_option("--j", sim_j, "Taxa");
  simulate->add_option("--omega", sim_omega, "AR(1) covariate correlation");
  simulate->add_option("--d", sim_d, "Overdispersion");
  simulate->add_option("--true-cov", sim_true_cov, "Number of true covariate-taxon effects");
  simulate->add_option("--true-bal", sim_true_bal, "Number of true balance effects");

  FitOptions fit;
  std::string fit_config;
  ModelFlags fit_flags;
  auto* fitc = app.add_subcommand("fit", "Fit the joint model or the two-step comparator");
  fitc->add_option("-d,--data", fit.data, "Replicate directory or directory of replicates")->required();
  fitc->add_option("-o,--out", fit.out, "Output directory")->required();
  fitc->add_option("--model", fit.model, "joint or dmlm-bayes")->check(CLI::IsMember({"joint", "dmlm-bayes"}));
  fitc->add_option("--partition", fit.partition, "Partition file ('plus | minus' lines, 1-based)");
  fitc->add_option("--sweep-b0", fit.sweep_b0, "Fit once per b0 value")->delimiter(',');
  fitc->add_option("--jobs", fit.jobs, "Worker threads")->check(CLI::PositiveNumber);
  fitc->add_option("--config", fit_config, "JSON file with \"hyperparams\" and \"sampler\" objects");
  fitc->add_flag("--quiet", fit.quiet, "Suppress per-replicate summaries");
  fit_flags.add(*fitc);

  PredictOptions pred;
  auto* predict = app.add_subcommand("predict", "Predict responses for held-out subjects");
  predict->add_option("-r,--run", pred.run, "Fitted replicate directory")->required();
  predict->add_option("-t,--test", pred.test, "Directory with Z.csv, X.csv and optional Y.csv")->required();
  predict->add_option("-o,--out", pred.out, "Output directory")->required();

  EvaluateOptions eval;
  auto* evaluate = app.add_subcommand("evaluate", "Score selections and predictions against ground truth");
  evaluate->add_option("runs", eval.runs, "Fit output directories")->required();
  evaluate->add_option("--truth", eval.truth, "Truth directory overriding the one recorded at fit time");
  evaluate->add_option("-o,--out", eval.out, "Report directory")->required();
  evaluate->add_option("--sweep-b0", eval.sweep_b0, "Report one row per b0 value")->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsageError;
  }

  try {
    if (simulate->parsed()) {
      if (!sim_config.empty()) {
        const json j = io::read_json(sim_config);
        if (j.contains("simulation")) sim.sim = io::sim_config_from_json(j.at("simulation"), sim.sim);
      }
      if (sim_seed) sim.sim.seed = *sim_seed;
      if (sim_n) sim.sim.N = *sim_n;
      if (sim_p) sim.sim.P = *sim_p;
      if (sim_j) sim.sim.J = *sim_j;
      if (sim_omega) sim.sim.omega = *sim_omega;
      if (sim_d) sim.sim.d = *sim_d;
      if (sim_true_cov) sim.sim.n_true_cov = *sim_true_cov;
      if (sim_true_bal) sim.sim.n_true_bal = *sim_true_bal;
      return cmd_simulate(sim);
    }
    if (fitc->parsed()) {
      if (!fit_config.empty()) {
        const json j = io::read_json(fit_config);
        if (j.contains("hyperparams")) fit.hyper = io::hyperparams_from_json(j.at("hyperparams"), fit.hyper);
        if (j.contains("sampler")) fit.sampler = io::sampler_config_from_json(j.at("sampler"), fit.sampler);
      }
      fit_flags.apply(fit.hyper, fit.sampler);
      return cmd_fit(fit);
    }
    if (predict->parsed()) return cmd_predict(pred);
    if (evaluate->parsed()) return cmd_evaluate(eval);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsageError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRuntimeFailure;
  }
  return kUsageError;
}

}  // namespace dmlm::cli
