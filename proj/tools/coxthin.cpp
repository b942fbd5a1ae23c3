// coxthin: simulation and Bayesian inference for thinning-defined point
// processes (sigmoidal Gaussian Cox process, its multitype extension, Matern
// type III), plus the verification experiments behind them.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

#include "coxthin/io.hpp"
#include "coxthin/parallel.hpp"
#include "coxthin/version.hpp"

namespace fs = std::filesystem;
using coxthin::io::json;

namespace {

struct CommonOpts {
  std::string config_path;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::string out_dir;
  long iters = -1, burn = -1;
  int chains = -1;
  bool rescale = false;
  std::string data_path;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--config", opts.config_path, "JSON config file");
  cmd->add_option("--seed", opts.seed, "RNG seed (overrides config)")
      ->each([&](const std::string&) { opts.seed_set = true; });
  cmd->add_option("--out", opts.out_dir, "output directory");
  cmd->add_option("--iters", opts.iters, "kept iterations per chain");
  cmd->add_option("--burn", opts.burn, "burn-in iterations");
  cmd->add_option("--chains", opts.chains, "number of chains");
  cmd->add_flag("--rescale", opts.rescale,
                "rescale data coordinates onto the domain");
  cmd->add_option("--data", opts.data_path, "observed-pattern CSV");
}

json default_config(const std::string& model) {
  if (model == "sgcp") {
    return json{{"seed", 1},
                {"model",
                 {{"type", "sgcp"},
                  {"lambda", 5.0},
                  {"kernel", {{"rho", 2.0}, {"variance", 1.0}}}}}};
  }
  if (model == "mtsgcp") {
    return json{{"seed", 1},
                {"model",
                 {{"type", "mtsgcp"},
                  {"lambda", 60.0},
                  {"lmc",
                   {{"A", {{0.8, 0.0}, {0.4, 0.7}}},
                    {"rho", {4.0, 2.0}},
                    {"mu", {-0.5, -0.5}}}}}}};
  }
  return json{{"seed", 1},
              {"model",
               {{"type", "matern3"},
                {"lambda", 20.0},
                {"shadow", {{"kind", "deterministic"}, {"radius", 0.1}}}}}};
}

coxthin::io::Config resolve_config(const CommonOpts& opts,
                                   const std::string& model) {
  coxthin::io::Config cfg;
  if (!opts.config_path.empty()) {
    cfg = coxthin::io::load_config(opts.config_path);
    coxthin::require(cfg.model == model, coxthin::ErrorKind::kIo,
                     "config is for model '" + cfg.model + "', command needs '" +
                         model + "'");
  } else {
    json def = default_config(model);
    coxthin::require(opts.seed_set, coxthin::ErrorKind::kIo,
                     "seed is mandatory: pass --seed or a config file");
    cfg = coxthin::io::parse_config(def);
  }
  if (opts.seed_set) {
    cfg.seed = opts.seed;
    cfg.echo["seed"] = opts.seed;
  }
  if (!opts.out_dir.empty()) cfg.out_dir = opts.out_dir;
  if (opts.iters >= 0) cfg.iters = opts.iters;
  if (opts.burn >= 0) cfg.burn = opts.burn;
  if (opts.chains >= 1) cfg.chains = opts.chains;
  if (opts.rescale) cfg.rescale = true;
  if (!opts.data_path.empty()) cfg.data_path = opts.data_path;
  fs::create_directories(cfg.out_dir);
  return cfg;
}

std::string out_path(const coxthin::io::Config& cfg, const std::string& name) {
  return (fs::path(cfg.out_dir) / name).string();
}

// ---------------------------------------------------------------------------

int run_simulate(const std::string& model, const CommonOpts& opts) {
  coxthin::io::Config cfg = resolve_config(opts, model);
  coxthin::Rng rng(cfg.seed);
  json meta = coxthin::io::meta_header(cfg.echo, cfg.seed);
  const int dim = cfg.domain().dim();
  if (model == "sgcp") {
    auto sim = coxthin::sgcp::simulate_sgcp(rng, cfg.sgcp_params);
    coxthin::io::write_pattern_csv(out_path(cfg, "thinned.csv"), sim.thinned,
                                   dim, meta);
    coxthin::io::write_pattern_csv(out_path(cfg, "observed.csv"), sim.observed,
                                   dim, meta);
    std::cout << "sgcp simulation: " << sim.observed.size() << " observed, "
              << sim.thinned.size() << " thinned -> " << cfg.out_dir << "\n";
  } else if (model == "mtsgcp") {
    auto sim = coxthin::mtsgcp::simulate_mtsgcp(rng, cfg.mt_params);
    coxthin::io::write_pattern_csv(out_path(cfg, "thinned.csv"), sim.thinned,
                                   dim, meta);
    for (size_t j = 0; j < sim.observed.size(); ++j) {
      coxthin::io::write_pattern_csv(
          out_path(cfg, "type_" + std::to_string(j + 1) + ".csv"),
          sim.observed[j], dim, meta);
      std::cout << "type " << j + 1 << ": " << sim.observed[j].size()
                << " points\n";
    }
    // combined observed file in the layout `fit` ingests
    {
      std::ofstream out(out_path(cfg, "observed_combined.csv"));
      out << "# " << meta.dump() << "\n";
      out << (dim == 2 ? "x,y,type\n" : "x,type\n");
      for (size_t j = 0; j < sim.observed.size(); ++j) {
        const auto& pat = sim.observed[j];
        for (int i = 0; i < pat.size(); ++i) {
          for (int c = 0; c < dim; ++c) {
            out << coxthin::io::format_double(pat.locations()(i, c)) << ",";
          }
          out << "type" << j + 1 << "\n";
        }
      }
    }
    std::cout << "thinned: " << sim.thinned.size() << " -> " << cfg.out_dir
              << "\n";
  } else {
    auto sim = coxthin::matern3::simulate_matern3(rng, cfg.domain(),
                                                  cfg.m3_lambda, cfg.shadow);
    coxthin::io::write_pattern_csv(out_path(cfg, "thinned.csv"), sim.thinned,
                                   dim, meta);
    coxthin::io::write_pattern_csv(out_path(cfg, "observed.csv"), sim.observed,
                                   dim, meta);
    std::cout << "matern3 simulation: " << sim.observed.size() << " observed, "
              << sim.thinned.size() << " thinned -> " << cfg.out_dir << "\n";
  }
  return 0;
}

int run_fit(const std::string& model, const CommonOpts& opts,
            const std::string& type_column) {
  coxthin::io::Config cfg = resolve_config(opts, model);
  coxthin::require(!cfg.data_path.empty(), coxthin::ErrorKind::kIo,
                   "fit needs --data (or data.path in the config)");
  coxthin::io::Dataset data = coxthin::io::load_csv(
      cfg.data_path, cfg.domain(),
      type_column.empty() ? cfg.data_type_column : type_column, cfg.rescale);
  for (int j = 0; j < data.n_types(); ++j) {
    std::cout << "loaded type '" << data.type_names[j] << "': "
              << data.patterns[j].size() << " points\n";
  }

  coxthin::mtsgcp::MtsgcpParams initial;
  if (model == "sgcp") {
    coxthin::require(data.n_types() == 1, coxthin::ErrorKind::kIo,
                     "sgcp fit expects single-type data");
    const auto& sp = cfg.sgcp_params;
    initial.dom = sp.dom;
    Eigen::MatrixXd a(1, 1);
    a(0, 0) = std::sqrt(sp.kernel.variance);
    initial.lmc = coxthin::LMCParams(a, Eigen::VectorXd::Constant(1, sp.kernel.rho),
                                     Eigen::VectorXd::Constant(1, sp.gp_mean));
    initial.lambda = sp.lambda;
  } else {
    initial = cfg.mt_params;
    const int p = data.n_types();
    if (initial.lmc.p() == 0) {
      initial.lmc = coxthin::LMCParams(Eigen::MatrixXd::Identity(p, p),
                                       Eigen::VectorXd::Constant(p, 2.0),
                                       Eigen::VectorXd::Zero(p));
    }
    coxthin::require(initial.lmc.p() == p, coxthin::ErrorKind::kIo,
                     "lmc dimension does not match the number of types");
    long total = 0;
    for (const auto& pat : data.patterns) total += pat.size();
    if (!cfg.echo.at("model").contains("lambda")) {
      initial.lambda = 2.0 * std::max<long>(1, total) / initial.dom.volume();
    }
  }
  if (model == "sgcp" && initial.lambda <= 0) initial.lambda = 1.0;

  json meta = coxthin::io::meta_header(cfg.echo, cfg.seed);
  const int n_chains = std::max(1, cfg.chains);
  std::vector<coxthin::mtsgcp::Trace> traces(n_chains);
  coxthin::Rng rng(cfg.seed);
  coxthin::parallel_reps(n_chains, [&](std::int64_t chain) {
    coxthin::Rng chain_rng = rng.substream(static_cast<std::uint64_t>(chain));
    traces[chain] = coxthin::mtsgcp::fit(chain_rng, data.patterns, initial,
                                         cfg.priors, cfg.controls, cfg.iters,
                                         cfg.burn);
  });
  for (int c = 0; c < n_chains; ++c) {
    std::string name = "trace_chain" + std::to_string(c + 1) + ".jsonl";
    coxthin::io::write_trace_jsonl(out_path(cfg, name), traces[c], meta);
    std::cout << "chain " << c + 1 << ": " << traces[c].records.size()
              << " records -> " << name << "\n";
    if (traces[c].grid_res > 0) {
      for (int j = 0; j < traces[c].p; ++j) {
        std::string gname = "intensity_chain" + std::to_string(c + 1) + "_type" +
                            std::to_string(j + 1) + ".csv";
        coxthin::io::write_matrix_csv(out_path(cfg, gname),
                                      traces[c].intensity_grids[j], meta);
      }
    }
  }
  return 0;
}

int run_pcf(const CommonOpts& opts, const std::vector<std::string>& trace_paths,
            double r_max, int n_r, long n_mc, long max_draws) {
  coxthin::require(!trace_paths.empty(), coxthin::ErrorKind::kIo,
                   "pcf needs at least one --trace");
  std::vector<coxthin::LMCParams> draws;
  for (const auto& path : trace_paths) {
    coxthin::mtsgcp::Trace trace = coxthin::io::read_trace_jsonl(path);
    for (const auto& rec : trace.records) {
      draws.emplace_back(rec.A, rec.rho, rec.mu);
    }
  }
  coxthin::require(!draws.empty(), coxthin::ErrorKind::kIo,
                   "traces contain no records");
  if (max_draws > 0 && static_cast<long>(draws.size()) > max_draws) {
    std::vector<coxthin::LMCParams> kept;
    const double stride = static_cast<double>(draws.size()) / max_draws;
    for (long i = 0; i < max_draws; ++i) {
      kept.push_back(draws[static_cast<size_t>(i * stride)]);
    }
    draws = std::move(kept);
  }
  std::vector<double> r_values;
  for (int i = 1; i <= n_r; ++i) r_values.push_back(r_max * i / n_r);

  CommonOpts o = opts;
  if (o.out_dir.empty()) o.out_dir = ".";
  fs::create_directories(o.out_dir);
  coxthin::require(o.seed_set, coxthin::ErrorKind::kIo, "pcf needs --seed");
  coxthin::Rng rng(o.seed);
  coxthin::mtsgcp::PcfTable table =
      coxthin::mtsgcp::pcf(rng, draws, r_values, n_mc);
  json meta = coxthin::io::meta_header(
      json{{"traces", trace_paths}, {"n_mc", n_mc}, {"draws", draws.size()}},
      o.seed);
  std::string path = (fs::path(o.out_dir) / "pcf.csv").string();
  coxthin::io::write_pcf_csv(path, table, meta);
  std::cout << "pcf over " << draws.size() << " parameter draws -> " << path
            << "\n";
  return 0;
}

int run_intensity_grid(const CommonOpts& opts, const std::string& trace_path,
                       int res) {
  coxthin::mtsgcp::Trace trace = coxthin::io::read_trace_jsonl(trace_path);
  CommonOpts o = opts;
  if (o.out_dir.empty()) o.out_dir = ".";
  fs::create_directories(o.out_dir);
  coxthin::require(o.seed_set, coxthin::ErrorKind::kIo,
                   "intensity-grid needs --seed");
  coxthin::Rng rng(o.seed);
  auto grids = coxthin::mtsgcp::posterior_intensity_grid(rng, trace, res);
  json meta = coxthin::io::meta_header(
      json{{"trace", trace_path}, {"res", res}}, o.seed);
  for (size_t j = 0; j < grids.size(); ++j) {
    std::string path =
        (fs::path(o.out_dir) / ("intensity_type" + std::to_string(j + 1) + ".csv"))
            .string();
    coxthin::io::write_matrix_csv(path, grids[j], meta);
    std::cout << "type " << j + 1 << " grid -> " << path << "\n";
  }
  return 0;
}

// defaults for the geweke verification instance: tight priors on a unit
// square keep the point counts small
coxthin::mtsgcp::Priors geweke_priors() {
  coxthin::mtsgcp::Priors pr;
  pr.a_lambda = 50.0;
  pr.b_lambda = 5.0;
  pr.s_A = 0.5;
  pr.a_rho = 8.0;
  pr.b_rho = 2.0;
  pr.m_mu = -0.3;
  pr.s_mu = 0.5;
  return pr;
}

coxthin::mtsgcp::GibbsControls geweke_controls() {
  coxthin::mtsgcp::GibbsControls ct;
  ct.bdm_steps = 10;
  ct.hmc_eps = 0.2;
  ct.hmc_leapfrog = 10;
  ct.hmc_autotune = false;
  return ct;
}

int run_verify(const std::string& what, const CommonOpts& opts, long reps,
               int grid_res) {
  CommonOpts o = opts;
  if (o.out_dir.empty()) o.out_dir = ".";
  fs::create_directories(o.out_dir);
  coxthin::require(o.seed_set || !o.config_path.empty(),
                   coxthin::ErrorKind::kIo, "verify needs --seed or --config");

  bool pass = true;
  json report;
  if (what == "colouring") {
    auto checks = coxthin::colouring::verification_suite();
    report = coxthin::io::to_json(checks);
    for (const auto& c : checks) {
      bool ok = c.max_abs_err < 1e-10 && std::abs(c.total_mass - 1.0) < 1e-10;
      pass = pass && ok;
      std::cout << (ok ? "ok   " : "FAIL ") << c.model
                << "  max|err|=" << c.max_abs_err << "  classes=" << c.n_classes
                << "\n";
    }
  } else if (what == "appendix-b") {
    coxthin::io::Config cfg = resolve_config(o, "sgcp");
    coxthin::Rng rng(cfg.seed);
    auto rep = coxthin::sgcp::verify_appendix_b(
        rng, cfg.sgcp_params, reps > 0 ? reps : 100000,
        grid_res > 0 ? grid_res : 128);
    report = coxthin::io::to_json(rep);
    pass = rep.count_chisq_p > 0.01;
    std::cout << (pass ? "ok   " : "FAIL ")
              << "count two-sample p=" << rep.count_chisq_p << "\n";
  } else if (what == "appendix-c") {
    coxthin::io::Config cfg = resolve_config(o, "sgcp");
    coxthin::Rng rng(cfg.seed);
    coxthin::sgcp::AppendixCConfig ac;
    if (reps > 0) ac.n_gp_draws = reps;
    if (grid_res > 0) ac.grid_res = grid_res;
    auto rep = coxthin::sgcp::verify_appendix_c(rng, cfg.sgcp_params, ac);
    report = coxthin::io::to_json(rep);
    bool identity_ok = std::abs(rep.identity_gap_in_se) < 3.0;
    bool jensen_ok = rep.jensen_gap_in_se > 3.0;
    bool cond_ok = rep.diff_in_se > 3.0;
    pass = identity_ok && jensen_ok && cond_ok;
    std::cout << (identity_ok ? "ok   " : "FAIL ") << "identity gap "
              << rep.identity_gap_in_se << " SE\n"
              << (jensen_ok ? "ok   " : "FAIL ") << "jensen gap "
              << rep.jensen_gap_in_se << " SE\n"
              << (cond_ok ? "ok   " : "FAIL ") << "empty-prob separation "
              << rep.diff_in_se << " SE\n";
  } else if (what == "matern3") {
    coxthin::require(o.seed_set, coxthin::ErrorKind::kIo, "verify needs --seed");
    coxthin::Rng rng(o.seed);
    coxthin::matern3::VerifyConfig vc;
    if (reps > 0) {
      vc.n_configs = reps;
      vc.n_hardcore_sims = reps * 100;
      vc.n_cond_draws = reps * 1000;
    }
    auto rep = coxthin::matern3::verify_matern3(rng, coxthin::Domain::unit_square(), vc);
    report = json{{"n_configs", rep.n_configs},
                  {"chain_max_abs_err", rep.chain_max_abs_err},
                  {"n_hardcore_sims", rep.n_hardcore_sims},
                  {"hardcore_violations", rep.hardcore_violations},
                  {"n_cond_draws", rep.n_cond_draws},
                  {"cond_count_mean", rep.cond_count_mean},
                  {"cond_count_chisq_p", rep.cond_count_chisq_p},
                  {"seed", rep.seed}};
    bool chain_ok = rep.chain_max_abs_err < 1e-10;
    bool hc_ok = rep.hardcore_violations == 0;
    bool count_ok = rep.cond_count_chisq_p > 0.01;
    pass = chain_ok && hc_ok && count_ok;
    std::cout << (chain_ok ? "ok   " : "FAIL ") << "density chain max|err| "
              << rep.chain_max_abs_err << "\n"
              << (hc_ok ? "ok   " : "FAIL ") << "hard-core violations "
              << rep.hardcore_violations << "/" << rep.n_hardcore_sims << "\n"
              << (count_ok ? "ok   " : "FAIL ") << "conditional count p "
              << rep.cond_count_chisq_p << "\n";
  } else if (what == "geweke") {
    coxthin::require(o.seed_set, coxthin::ErrorKind::kIo, "verify needs --seed");
    coxthin::Rng rng(o.seed);
    coxthin::mtsgcp::GewekeConfig gc;
    gc.base.dom = coxthin::Domain::unit_square();
    gc.base.lmc = coxthin::LMCParams(Eigen::MatrixXd::Identity(2, 2),
                                     Eigen::VectorXd::Constant(2, 1.0),
                                     Eigen::VectorXd::Zero(2));
    gc.priors = geweke_priors();
    gc.controls = geweke_controls();
    if (reps > 0) gc.n_samples = reps;
    auto rep = coxthin::mtsgcp::geweke_test(rng, gc);
    report = coxthin::io::to_json(rep);
    pass = rep.p_lambda > 0.005 && rep.p_ntotal > 0.005 && rep.p_aat11 > 0.005;
    std::cout << (pass ? "ok   " : "FAIL ") << "p(lambda)=" << rep.p_lambda
              << " p(n)=" << rep.p_ntotal << " p(AAt11)=" << rep.p_aat11 << "\n";
  } else {
    throw coxthin::Error(coxthin::ErrorKind::kIo,
                         "unknown verification: " + what);
  }
  report["meta"] = coxthin::io::meta_header(
      json{{"command", "verify " + what}, {"reps", reps}, {"grid_res", grid_res}},
      o.seed_set ? o.seed : 0);
  std::string path =
      (fs::path(o.out_dir) / ("verify_" + what + ".json")).string();
  coxthin::io::write_json(path, report);
  std::cout << "report -> " << path << "\n";
  return pass ? 0 : 1;
}

int run_compare_samplers(const CommonOpts& opts, const std::string& observed,
                         long draws) {
  coxthin::require(observed == "empty", coxthin::ErrorKind::kIo,
                   "only --observed empty is implemented (the diagnostic "
                   "instance from the empty-set counterexample)");
  CommonOpts o = opts;
  if (o.out_dir.empty()) o.out_dir = ".";
  fs::create_directories(o.out_dir);
  coxthin::io::Config cfg = resolve_config(o, "sgcp");
  coxthin::Rng rng(cfg.seed);
  auto rep = coxthin::sgcp::compare_samplers_empty(
      rng, cfg.sgcp_params, draws, draws, std::max<long>(200, draws / 10), 5);
  bool separated = rep.diff_in_se > 3.0;
  bool rao_marginal = rep.rao_vs_marginal_count_p > 0.01;
  bool gonc_rejected = rep.gonc_vs_bdm_count_p < 0.01;
  json report{{"n_draws", rep.n_draws},
              {"n_bdm_sweeps", rep.n_bdm_sweeps},
              {"bdm_empty_prob", rep.bdm_empty_prob},
              {"bdm_empty_se", rep.bdm_empty_se},
              {"rao_empty_prob", rep.rao_empty_prob},
              {"rao_empty_se", rep.rao_empty_se},
              {"diff_in_se", rep.diff_in_se},
              {"separation_significant", separated},
              {"rao_vs_marginal_count_p", rep.rao_vs_marginal_count_p},
              {"rao_matches_marginal", rao_marginal},
              {"gonc_vs_poisson_gof_p", rep.gonc_vs_poisson_gof_p},
              {"gonc_vs_bdm_count_p", rep.gonc_vs_bdm_count_p},
              {"gonc_rejected_vs_bdm", gonc_rejected},
              {"mean_counts",
               {{"bdm", rep.bdm_mean_count},
                {"rao", rep.rao_mean_count},
                {"goncalves", rep.gonc_mean_count}}},
              {"seed", rep.seed},
              {"meta", coxthin::io::meta_header(
                           json{{"command", "compare-samplers"},
                                {"observed", observed},
                                {"draws", draws}},
                           cfg.seed)}};
  std::string path = (fs::path(o.out_dir) / "compare_samplers.json").string();
  coxthin::io::write_json(path, report);
  std::cout << (separated ? "ok   " : "FAIL ")
            << "P(empty): bdm=" << rep.bdm_empty_prob
            << " rao=" << rep.rao_empty_prob << " (" << rep.diff_in_se
            << " SE)\n"
            << (rao_marginal ? "ok   " : "FAIL ")
            << "rao matches thinned marginal (p=" << rep.rao_vs_marginal_count_p
            << ")\n"
            << (gonc_rejected ? "ok   " : "FAIL ")
            << "goncalves rejected vs bdm (p=" << rep.gonc_vs_bdm_count_p
            << ")\nreport -> " << path << "\n";
  return (separated && rao_marginal && gonc_rejected) ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"thinning-defined point processes: simulation and inference"};
  app.set_version_flag("--version", coxthin::kGitRevision);
  app.require_subcommand(1);

  CommonOpts sim_opts, fit_opts, pcf_opts, grid_opts, verify_opts, cmp_opts;
  std::string sim_model, fit_model, verify_what;
  std::string fit_type_column;
  std::vector<std::string> pcf_traces;
  double pcf_r_max = 0.5;
  int pcf_n_r = 25;
  long pcf_n_mc = 100000;
  long pcf_max_draws = 200;
  std::string grid_trace;
  int grid_res = 64;
  long verify_reps = 0;
  int verify_grid_res = 0;
  std::string cmp_observed = "empty";
  long cmp_draws = 100000;

  CLI::App* sim = app.add_subcommand("simulate", "draw one realization");
  sim->add_option("model", sim_model, "sgcp | mtsgcp | matern3")->required();
  add_common(sim, sim_opts);

  CLI::App* fit = app.add_subcommand("fit", "MCMC posterior sampling");
  fit->add_option("model", fit_model, "sgcp | mtsgcp")->required();
  fit->add_option("--type-column", fit_type_column, "CSV type column name");
  add_common(fit, fit_opts);

  CLI::App* pcf_cmd =
      app.add_subcommand("pcf", "cross pair correlation from trace draws");
  pcf_cmd->add_option("--trace", pcf_traces, "trace JSONL (repeatable)")
      ->required();
  pcf_cmd->add_option("--r-max", pcf_r_max, "largest separation");
  pcf_cmd->add_option("--n-r", pcf_n_r, "number of separations");
  pcf_cmd->add_option("--n-mc", pcf_n_mc, "Monte Carlo draws per point");
  pcf_cmd->add_option("--max-draws", pcf_max_draws, "parameter draws used");
  add_common(pcf_cmd, pcf_opts);

  CLI::App* grid_cmd = app.add_subcommand(
      "intensity-grid", "posterior mean intensity from a stored trace");
  grid_cmd->add_option("--trace", grid_trace, "trace JSONL")->required();
  grid_cmd->add_option("--res", grid_res, "pixels per axis");
  add_common(grid_cmd, grid_opts);

  CLI::App* verify = app.add_subcommand("verify", "verification experiments");
  verify
      ->add_option("what", verify_what,
                   "colouring | appendix-b | appendix-c | matern3 | geweke")
      ->required();
  verify->add_option("--reps", verify_reps, "replication count override");
  verify->add_option("--grid-res", verify_grid_res, "grid resolution override");
  add_common(verify, verify_opts);

  CLI::App* cmp = app.add_subcommand(
      "compare-samplers", "correct vs flawed conditional samplers");
  cmp->add_option("--observed", cmp_observed, "'empty' (diagnostic instance)");
  cmp->add_option("--draws", cmp_draws, "draws / sweeps per sampler");
  add_common(cmp, cmp_opts);

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim->parsed()) return run_simulate(sim_model, sim_opts);
    if (fit->parsed()) return run_fit(fit_model, fit_opts, fit_type_column);
    if (pcf_cmd->parsed()) {
      return run_pcf(pcf_opts, pcf_traces, pcf_r_max, pcf_n_r, pcf_n_mc,
                     pcf_max_draws);
    }
    if (grid_cmd->parsed()) {
      return run_intensity_grid(grid_opts, grid_trace, grid_res);
    }
    if (verify->parsed()) {
      return run_verify(verify_what, verify_opts, verify_reps, verify_grid_res);
    }
    if (cmp->parsed()) {
      return run_compare_samplers(cmp_opts, cmp_observed, cmp_draws);
    }
  } catch (const coxthin::Error& e) {
    std::cerr << json{{"error", {{"kind", e.kind_name()}, {"message", e.what()}}}}
                     .dump()
              << std::endl;
    return 1;
  } catch (const std::exception& e) {
    std::cerr << json{{"error", {{"kind", "internal"}, {"message", e.what()}}}}
                     .dump()
              << std::endl;
    return 1;
  }
  return 0;
}
