#include "coxthin/io.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "coxthin/version.hpp"

namespace coxthin::io {

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

json meta_header(const json& config_echo, std::uint64_t seed) {
  json meta;
  meta["tool"] = "coxthin";
  meta["git"] = kGitRevision;
  meta["seed"] = seed;
  meta["config"] = config_echo;
  return meta;
}

namespace {

json vec_to_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (long i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

json mat_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (long i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (long j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::VectorXd vec_from_json(const json& a) {
  Eigen::VectorXd v(a.size());
  for (size_t i = 0; i < a.size(); ++i) v[static_cast<long>(i)] = a[i].get<double>();
  return v;
}

Eigen::MatrixXd mat_from_json(const json& rows) {
  if (rows.empty()) return Eigen::MatrixXd(0, 0);
  Eigen::MatrixXd m(rows.size(), rows[0].size());
  for (size_t i = 0; i < rows.size(); ++i) {
    for (size_t j = 0; j < rows[i].size(); ++j) {
      m(static_cast<long>(i), static_cast<long>(j)) = rows[i][j].get<double>();
    }
  }
  return m;
}

json pattern_to_json(const MarkedPattern& p) {
  json j;
  j["locations"] = mat_to_json(p.locations());
  if (p.has_times()) j["t"] = vec_to_json(p.times());
  if (p.has_gp_marks()) j["g"] = mat_to_json(p.gp_marks());
  if (p.has_colours()) {
    json c = json::array();
    for (int i = 0; i < p.size(); ++i) c.push_back(p.colours()[i]);
    j["colour"] = c;
  }
  return j;
}

MarkedPattern pattern_from_json(const json& j, int dim) {
  Eigen::MatrixXd locs = mat_from_json(j.at("locations"));
  if (locs.rows() == 0) locs.resize(0, dim);
  std::optional<Eigen::VectorXd> times;
  std::optional<Eigen::MatrixXd> marks;
  std::optional<Eigen::VectorXi> colours;
  if (j.contains("t")) times = vec_from_json(j["t"]);
  if (j.contains("g")) {
    Eigen::MatrixXd g = mat_from_json(j["g"]);
    if (g.rows() == 0 && j["g"].empty()) g.resize(0, 1);
    marks = g;
  }
  if (j.contains("colour")) {
    Eigen::VectorXi c(j["colour"].size());
    for (size_t i = 0; i < j["colour"].size(); ++i) {
      c[static_cast<long>(i)] = j["colour"][i].get<int>();
    }
    colours = c;
  }
  return MarkedPattern(std::move(locs), std::move(times), std::move(marks),
                       std::move(colours));
}

void write_meta_lines(std::ofstream& out, const json& meta) {
  out << "# " << meta.dump() << "\n";
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  require(out.good(), ErrorKind::kIo, "cannot open for writing: " + path);
  return out;
}

}  // namespace

void write_pattern_csv(const std::string& path, const MarkedPattern& pattern,
                       int dim, const json& meta) {
  std::ofstream out = open_out(path);
  write_meta_lines(out, meta);
  std::vector<std::string> cols;
  cols.push_back("x");
  if (dim == 2) cols.push_back("y");
  if (pattern.has_times()) cols.push_back("t");
  int p = pattern.has_gp_marks() ? static_cast<int>(pattern.gp_marks().cols()) : 0;
  for (int j = 0; j < p; ++j) cols.push_back("g" + std::to_string(j + 1));
  if (pattern.has_colours()) cols.push_back("colour");
  for (size_t c = 0; c < cols.size(); ++c) {
    out << cols[c] << (c + 1 < cols.size() ? "," : "\n");
  }
  for (int i = 0; i < pattern.size(); ++i) {
    std::vector<std::string> fields;
    for (int c = 0; c < dim; ++c) {
      fields.push_back(format_double(pattern.locations()(i, c)));
    }
    if (pattern.has_times()) fields.push_back(format_double(pattern.times()[i]));
    for (int j = 0; j < p; ++j) {
      fields.push_back(format_double(pattern.gp_marks()(i, j)));
    }
    if (pattern.has_colours()) {
      fields.push_back(std::to_string(pattern.colours()[i]));
    }
    for (size_t c = 0; c < fields.size(); ++c) {
      out << fields[c] << (c + 1 < fields.size() ? "," : "\n");
    }
  }
  require(out.good(), ErrorKind::kIo, "write failed: " + path);
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur += ch;
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace

MarkedPattern read_pattern_csv(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), ErrorKind::kIo, "cannot open: " + path);
  std::string line;
  std::vector<std::string> header;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    header = split_csv(line);
    break;
  }
  require(!header.empty(), ErrorKind::kIo, "empty csv: " + path);
  int dim = 0, t_col = -1, colour_col = -1;
  std::vector<int> g_cols;
  for (size_t c = 0; c < header.size(); ++c) {
    if (header[c] == "x" || header[c] == "y") ++dim;
    if (header[c] == "t") t_col = static_cast<int>(c);
    if (header[c] == "colour") colour_col = static_cast<int>(c);
    if (header[c].size() >= 2 && header[c][0] == 'g') {
      g_cols.push_back(static_cast<int>(c));
    }
  }
  require(dim >= 1 && dim <= 2, ErrorKind::kIo,
          "csv header must contain x[,y]: " + path);
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> fields = split_csv(line);
    require(fields.size() == header.size(), ErrorKind::kIo,
            path + ": malformed row at line " + std::to_string(line_no));
    std::vector<double> row;
    for (const auto& f : fields) {
      try {
        row.push_back(std::stod(f));
      } catch (...) {
        throw Error(ErrorKind::kIo,
                    path + ": bad number at line " + std::to_string(line_no));
      }
    }
    rows.push_back(std::move(row));
  }
  const int n = static_cast<int>(rows.size());
  Eigen::MatrixXd locs(n, dim);
  std::optional<Eigen::VectorXd> times;
  std::optional<Eigen::MatrixXd> marks;
  std::optional<Eigen::VectorXi> colours;
  if (t_col >= 0) times = Eigen::VectorXd(n);
  if (!g_cols.empty()) marks = Eigen::MatrixXd(n, static_cast<int>(g_cols.size()));
  if (colour_col >= 0) colours = Eigen::VectorXi(n);
  for (int i = 0; i < n; ++i) {
    locs(i, 0) = rows[i][0];
    if (dim == 2) locs(i, 1) = rows[i][1];
    if (t_col >= 0) (*times)[i] = rows[i][t_col];
    for (size_t q = 0; q < g_cols.size(); ++q) {
      (*marks)(i, static_cast<int>(q)) = rows[i][g_cols[q]];
    }
    if (colour_col >= 0) (*colours)[i] = static_cast<int>(rows[i][colour_col]);
  }
  return MarkedPattern(std::move(locs), std::move(times), std::move(marks),
                       std::move(colours));
}

Dataset load_csv(const std::string& path, const Domain& dom,
                 const std::string& type_column, bool rescale) {
  std::ifstream in(path);
  require(in.good(), ErrorKind::kIo, "cannot open: " + path);
  std::string line;
  std::vector<std::string> header;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    header = split_csv(line);
    break;
  }
  require(!header.empty(), ErrorKind::kIo, "empty csv: " + path);
  int x_col = -1, y_col = -1, t_col = -1;
  for (size_t c = 0; c < header.size(); ++c) {
    if (header[c] == "x") x_col = static_cast<int>(c);
    if (header[c] == "y") y_col = static_cast<int>(c);
    if (header[c] == type_column) t_col = static_cast<int>(c);
  }
  require(x_col >= 0, ErrorKind::kIo, "csv needs an x column: " + path);
  require(dom.dim() == (y_col >= 0 ? 2 : 1), ErrorKind::kIo,
          "csv dimensionality does not match the domain");

  std::vector<Eigen::VectorXd> pts;
  std::vector<std::string> labels;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> fields = split_csv(line);
    require(fields.size() == header.size(), ErrorKind::kIo,
            path + ": malformed row at line " + std::to_string(line_no));
    Eigen::VectorXd x(dom.dim());
    try {
      x[0] = std::stod(fields[x_col]);
      if (y_col >= 0) x[1] = std::stod(fields[y_col]);
    } catch (...) {
      throw Error(ErrorKind::kIo,
                  path + ": bad coordinate at line " + std::to_string(line_no));
    }
    pts.push_back(std::move(x));
    labels.push_back(t_col >= 0 ? fields[t_col] : "points");
  }

  if (rescale && !pts.empty()) {
    Eigen::VectorXd lo = pts[0], hi = pts[0];
    for (const auto& x : pts) {
      lo = lo.cwiseMin(x);
      hi = hi.cwiseMax(x);
    }
    for (auto& x : pts) {
      for (int c = 0; c < dom.dim(); ++c) {
        double span = hi[c] - lo[c];
        double unit = span > 0 ? (x[c] - lo[c]) / span : 0.5;
        x[c] = dom.lower()[c] + unit * (dom.upper()[c] - dom.lower()[c]);
      }
    }
  }
  for (size_t i = 0; i < pts.size(); ++i) {
    require(dom.contains(pts[i]), ErrorKind::kDomain,
            path + ": point outside the declared domain (use --rescale?)");
  }

  std::set<std::string> names(labels.begin(), labels.end());
  Dataset ds;
  ds.dom = dom;
  ds.type_names.assign(names.begin(), names.end());  // sorted, deterministic
  if (ds.type_names.empty()) ds.type_names.push_back("points");
  for (const std::string& name : ds.type_names) {
    std::vector<int> rows;
    for (size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] == name) rows.push_back(static_cast<int>(i));
    }
    Eigen::MatrixXd m(static_cast<int>(rows.size()), dom.dim());
    for (size_t q = 0; q < rows.size(); ++q) {
      m.row(static_cast<long>(q)) = pts[rows[q]].transpose();
    }
    ds.patterns.emplace_back(std::move(m));
  }
  return ds;
}

// ---------------------------------------------------------------------------

namespace {

void check_keys(const json& obj, const std::set<std::string>& allowed,
                const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    require(allowed.count(it.key()) > 0, ErrorKind::kIo,
            "unknown config key '" + it.key() + "' in " + where);
  }
}

Domain parse_domain(const json& j) {
  check_keys(j, {"lower", "upper"}, "model.domain");
  return Domain(vec_from_json(j.at("lower")), vec_from_json(j.at("upper")));
}

}  // namespace

Config parse_config(const json& j) {
  check_keys(j, {"seed", "model", "priors", "controls", "run", "data", "output"},
             "config");
  Config cfg;
  cfg.echo = j;
  require(j.contains("seed"), ErrorKind::kIo, "config: seed is mandatory");
  cfg.seed = j.at("seed").get<std::uint64_t>();

  const json& model = j.at("model");
  check_keys(model,
             {"type", "lambda", "domain", "kernel", "gp_mean", "lmc", "shadow"},
             "model");
  cfg.model = model.at("type").get<std::string>();
  require(cfg.model == "sgcp" || cfg.model == "mtsgcp" || cfg.model == "matern3",
          ErrorKind::kIo, "model.type must be sgcp, mtsgcp or matern3");
  Domain dom = model.contains("domain") ? parse_domain(model.at("domain"))
                                        : Domain::unit_square();
  double lambda = model.value("lambda", 1.0);

  if (cfg.model == "sgcp") {
    cfg.sgcp_params.dom = dom;
    cfg.sgcp_params.lambda = lambda;
    if (model.contains("kernel")) {
      const json& k = model.at("kernel");
      check_keys(k, {"rho", "variance"}, "model.kernel");
      cfg.sgcp_params.kernel = Kernel(k.at("rho").get<double>(),
                                      k.value("variance", 1.0));
    }
    cfg.sgcp_params.gp_mean = model.value("gp_mean", 0.0);
  } else if (cfg.model == "mtsgcp") {
    cfg.mt_params.dom = dom;
    cfg.mt_params.lambda = lambda;
    const json& lmc = model.at("lmc");
    check_keys(lmc, {"A", "rho", "mu"}, "model.lmc");
    cfg.mt_params.lmc = LMCParams(mat_from_json(lmc.at("A")),
                                  vec_from_json(lmc.at("rho")),
                                  vec_from_json(lmc.at("mu")));
  } else {
    cfg.sgcp_params.dom = dom;
    cfg.m3_lambda = lambda;
    const json& sh = model.at("shadow");
    check_keys(sh, {"kind", "radius", "kappa", "ell"}, "model.shadow");
    std::string kind = sh.at("kind").get<std::string>();
    if (kind == "deterministic") {
      cfg.shadow = matern3::Shadow::deterministic(sh.at("radius").get<double>());
    } else if (kind == "probabilistic") {
      cfg.shadow = matern3::Shadow::gaussian_bump(sh.at("kappa").get<double>(),
                                                  sh.at("ell").get<double>());
    } else {
      throw Error(ErrorKind::kIo, "shadow.kind must be deterministic or probabilistic");
    }
  }

  if (j.contains("priors")) {
    const json& pr = j.at("priors");
    check_keys(pr,
               {"a_lambda", "b_lambda", "s_A", "a_rho", "b_rho", "m_mu", "s_mu"},
               "priors");
    cfg.priors = mtsgcp::Priors::default_for(dom);
    cfg.priors.a_lambda = pr.value("a_lambda", cfg.priors.a_lambda);
    cfg.priors.b_lambda = pr.value("b_lambda", cfg.priors.b_lambda);
    cfg.priors.s_A = pr.value("s_A", cfg.priors.s_A);
    cfg.priors.a_rho = pr.value("a_rho", cfg.priors.a_rho);
    cfg.priors.b_rho = pr.value("b_rho", cfg.priors.b_rho);
    cfg.priors.m_mu = pr.value("m_mu", cfg.priors.m_mu);
    cfg.priors.s_mu = pr.value("s_mu", cfg.priors.s_mu);
  } else {
    cfg.priors = mtsgcp::Priors::default_for(dom);
  }

  if (j.contains("controls")) {
    const json& ct = j.at("controls");
    check_keys(ct,
               {"bdm_steps", "move_scale_frac", "hmc_eps", "hmc_leapfrog",
                "hmc_autotune", "rw_scale_A", "rw_scale_log_rho", "rho_every",
                "thin", "store_thinned", "grid_res", "grid_every"},
               "controls");
    cfg.controls.bdm_steps = ct.value("bdm_steps", cfg.controls.bdm_steps);
    cfg.controls.move_scale_frac =
        ct.value("move_scale_frac", cfg.controls.move_scale_frac);
    cfg.controls.hmc_eps = ct.value("hmc_eps", cfg.controls.hmc_eps);
    cfg.controls.hmc_leapfrog = ct.value("hmc_leapfrog", cfg.controls.hmc_leapfrog);
    cfg.controls.hmc_autotune = ct.value("hmc_autotune", cfg.controls.hmc_autotune);
    cfg.controls.rw_scale_A = ct.value("rw_scale_A", cfg.controls.rw_scale_A);
    cfg.controls.rw_scale_log_rho =
        ct.value("rw_scale_log_rho", cfg.controls.rw_scale_log_rho);
    cfg.controls.rho_every = ct.value("rho_every", cfg.controls.rho_every);
    cfg.controls.thin = ct.value("thin", cfg.controls.thin);
    cfg.controls.store_thinned = ct.value("store_thinned", cfg.controls.store_thinned);
    cfg.controls.grid_res = ct.value("grid_res", cfg.controls.grid_res);
    cfg.controls.grid_every = ct.value("grid_every", cfg.controls.grid_every);
  }

  if (j.contains("run")) {
    const json& run = j.at("run");
    check_keys(run, {"iters", "burn", "chains"}, "run");
    cfg.iters = run.value("iters", cfg.iters);
    cfg.burn = run.value("burn", cfg.burn);
    cfg.chains = run.value("chains", cfg.chains);
  }
  if (j.contains("data")) {
    const json& d = j.at("data");
    check_keys(d, {"path", "type_column", "rescale"}, "data");
    cfg.data_path = d.value("path", "");
    cfg.data_type_column = d.value("type_column", "type");
    cfg.rescale = d.value("rescale", false);
  }
  if (j.contains("output")) {
    const json& o = j.at("output");
    check_keys(o, {"dir"}, "output");
    cfg.out_dir = o.value("dir", ".");
  }
  return cfg;
}

Config load_config(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), ErrorKind::kIo, "cannot open config: " + path);
  json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw Error(ErrorKind::kIo, std::string("config parse error: ") + e.what());
  }
  return parse_config(j);
}

// ---------------------------------------------------------------------------

void write_trace_jsonl(const std::string& path, const mtsgcp::Trace& trace,
                       const json& meta) {
  std::ofstream out = open_out(path);
  json head = meta;
  head["type"] = "meta";
  head["p"] = trace.p;
  head["domain"] = {{"lower", vec_to_json(trace.dom.lower())},
                    {"upper", vec_to_json(trace.dom.upper())}};
  head["trace_seed"] = trace.seed;
  json obs = json::array();
  for (const auto& pat : trace.observed) obs.push_back(pattern_to_json(pat));
  head["observed"] = obs;
  out << head.dump() << "\n";
  for (const auto& rec : trace.records) {
    json r;
    r["type"] = "rec";
    r["iter"] = rec.iter;
    r["lambda"] = rec.lambda;
    r["A"] = mat_to_json(rec.A);
    r["rho"] = vec_to_json(rec.rho);
    r["mu"] = vec_to_json(rec.mu);
    r["n_thinned"] = rec.n_thinned;
    r["log_joint"] = rec.log_joint;
    if (rec.thinned) r["thinned"] = pattern_to_json(*rec.thinned);
    if (rec.observed_g) r["observed_g"] = mat_to_json(*rec.observed_g);
    out << r.dump() << "\n";
  }
  if (trace.grid_res > 0 && trace.grid_samples > 0) {
    json g;
    g["type"] = "grids";
    g["res"] = trace.grid_res;
    g["samples"] = trace.grid_samples;
    json arr = json::array();
    for (const auto& grid : trace.intensity_grids) arr.push_back(mat_to_json(grid));
    g["grids"] = arr;
    out << g.dump() << "\n";
  }
  require(out.good(), ErrorKind::kIo, "write failed: " + path);
}

mtsgcp::Trace read_trace_jsonl(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), ErrorKind::kIo, "cannot open: " + path);
  mtsgcp::Trace trace;
  std::string line;
  bool have_meta = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json j = json::parse(line);
    const std::string type = j.value("type", "rec");
    if (type == "meta") {
      have_meta = true;
      trace.p = j.at("p").get<int>();
      trace.dom = parse_domain(j.at("domain"));
      trace.seed = j.value("trace_seed", 0ULL);
      for (const auto& pj : j.at("observed")) {
        trace.observed.push_back(pattern_from_json(pj, trace.dom.dim()));
      }
    } else if (type == "rec") {
      mtsgcp::TraceRecord rec;
      rec.iter = j.at("iter").get<long>();
      rec.lambda = j.at("lambda").get<double>();
      rec.A = mat_from_json(j.at("A"));
      rec.rho = vec_from_json(j.at("rho"));
      rec.mu = vec_from_json(j.at("mu"));
      rec.n_thinned = j.at("n_thinned").get<int>();
      rec.log_joint = j.at("log_joint").get<double>();
      if (j.contains("thinned")) {
        rec.thinned = pattern_from_json(j.at("thinned"), trace.dom.dim());
      }
      if (j.contains("observed_g")) {
        rec.observed_g = mat_from_json(j.at("observed_g"));
        if (rec.observed_g->rows() == 0) rec.observed_g->resize(0, trace.p);
      }
      trace.records.push_back(std::move(rec));
    } else if (type == "grids") {
      trace.grid_res = j.at("res").get<int>();
      trace.grid_samples = j.at("samples").get<long>();
      for (const auto& gj : j.at("grids")) {
        trace.intensity_grids.push_back(mat_from_json(gj));
      }
    }
  }
  require(have_meta, ErrorKind::kIo, "trace has no meta line: " + path);
  return trace;
}

void write_matrix_csv(const std::string& path, const Eigen::MatrixXd& m,
                      const json& meta) {
  std::ofstream out = open_out(path);
  write_meta_lines(out, meta);
  for (long i = 0; i < m.rows(); ++i) {
    for (long j = 0; j < m.cols(); ++j) {
      out << format_double(m(i, j)) << (j + 1 < m.cols() ? "," : "\n");
    }
  }
  require(out.good(), ErrorKind::kIo, "write failed: " + path);
}

void write_pcf_csv(const std::string& path, const mtsgcp::PcfTable& table,
                   const json& meta) {
  std::ofstream out = open_out(path);
  write_meta_lines(out, meta);
  out << "r,pair,mean,lo95,hi95\n";
  for (const auto& curve : table.curves) {
    for (size_t q = 0; q < table.r.size(); ++q) {
      out << format_double(table.r[q]) << ",g" << curve.k << curve.l << ","
          << format_double(curve.mean[q]) << "," << format_double(curve.lo95[q])
          << "," << format_double(curve.hi95[q]) << "\n";
    }
  }
  require(out.good(), ErrorKind::kIo, "write failed: " + path);
}

void write_json(const std::string& path, const json& j) {
  std::ofstream out = open_out(path);
  out << j.dump(2) << "\n";
  require(out.good(), ErrorKind::kIo, "write failed: " + path);
}

json to_json(const sgcp::AppendixBReport& r) {
  json j;
  j["n_reps"] = r.n_reps;
  j["grid_res"] = r.grid_res;
  j["lambda_vol"] = r.lambda_vol;
  j["clipped_spectral_mass"] = r.clipped_spectral_mass;
  j["count_mean_alg1"] = r.count_mean_alg1;
  j["count_mean_grid"] = r.count_mean_grid;
  j["count_chisq_p"] = r.count_chisq_p;
  j["k_radii"] = r.k_radii;
  j["k_ks_p"] = r.k_ks_p;
  j["seed"] = r.seed;
  return j;
}

json to_json(const sgcp::AppendixCReport& r) {
  json j;
  j["n_gp_draws"] = r.n_gp_draws;
  j["grid_res"] = r.grid_res;
  j["lambda_vol"] = r.lambda_vol;
  j["jensen"] = {{"mean_exp_neg", r.mean_exp_neg},
                 {"se", r.se_exp_neg},
                 {"bound", r.jensen_bound},
                 {"gap_in_se", r.jensen_gap_in_se}};
  j["identity"] = {{"mean_neg_integral", r.mean_neg_integral},
                   {"se", r.se_neg_integral},
                   {"target", r.identity_target},
                   {"gap_in_se", r.identity_gap_in_se}};
  j["empty_given_empty"] = {{"n_bdm_sweeps", r.n_bdm_sweeps},
                            {"n_rao_draws", r.n_rao_draws},
                            {"bdm_prob", r.bdm_empty_prob},
                            {"bdm_se", r.bdm_empty_se},
                            {"rao_prob", r.rao_empty_prob},
                            {"rao_se", r.rao_empty_se},
                            {"diff_in_se", r.diff_in_se}};
  j["seed"] = r.seed;
  return j;
}

json to_json(const mtsgcp::GewekeReport& r) {
  json j;
  j["n_samples"] = r.n_samples;
  j["p_lambda"] = r.p_lambda;
  j["p_ntotal"] = r.p_ntotal;
  j["p_aat11"] = r.p_aat11;
  j["forward_means"] = {{"lambda", r.fwd_mean_lambda},
                        {"n_total", r.fwd_mean_ntotal},
                        {"aat11", r.fwd_mean_aat11}};
  j["successive_means"] = {{"lambda", r.sc_mean_lambda},
                           {"n_total", r.sc_mean_ntotal},
                           {"aat11", r.sc_mean_aat11}};
  j["seed"] = r.seed;
  return j;
}

json to_json(const std::vector<colouring::ColouringCheck>& checks) {
  json arr = json::array();
  for (const auto& c : checks) {
    arr.push_back({{"model", c.model},
                   {"n_classes", c.n_classes},
                   {"max_abs_err", c.max_abs_err},
                   {"total_mass", c.total_mass}});
  }
  return json{{"models", arr}};
}

}  // namespace coxthin::io
