#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "coxthin/colouring.hpp"
#include "coxthin/matern3.hpp"
#include "coxthin/mtsgcp.hpp"
#include "coxthin/sgcp.hpp"

namespace coxthin::io {

using nlohmann::json;

// 17 significant digits: doubles survive a write/read round trip exactly.
std::string format_double(double x);

// Provenance header embedded in every output file: config echo, seed, git
// revision. Deliberately no wall-clock fields so reruns are byte-identical.
json meta_header(const json& config_echo, std::uint64_t seed);

// Pattern CSV: '#'-prefixed meta lines, then a header row out of
// x[,y][,t][,g1..gp][,colour] followed by one row per point.
void write_pattern_csv(const std::string& path, const MarkedPattern& pattern,
                       int dim, const json& meta);
MarkedPattern read_pattern_csv(const std::string& path);

struct Dataset {
  Domain dom = Domain::unit_square();
  std::vector<std::string> type_names;
  std::vector<PointPattern> patterns;

  int n_types() const { return static_cast<int>(patterns.size()); }
};

// Observed-data ingestion: CSV with x,y columns and an optional type column.
// Without rescaling, points outside the declared domain are an error; with
// it, the data bounding box is mapped affinely onto the domain.
Dataset load_csv(const std::string& path, const Domain& dom,
                 const std::string& type_column, bool rescale);

// ---------------------------------------------------------------------------
// Config files: strict JSON schema; unknown keys are rejected and the seed is
// mandatory.

struct Config {
  std::uint64_t seed = 0;
  std::string model;  // sgcp | mtsgcp | matern3
  sgcp::SgcpParams sgcp_params;
  mtsgcp::MtsgcpParams mt_params;
  double m3_lambda = 1.0;
  matern3::Shadow shadow;
  mtsgcp::Priors priors;
  mtsgcp::GibbsControls controls;
  long iters = 1000;
  long burn = 200;
  int chains = 1;
  std::string out_dir = ".";
  std::string data_path;
  std::string data_type_column = "type";
  bool rescale = false;
  json echo;

  const Domain& domain() const {
    if (model == "mtsgcp") return mt_params.dom;
    return sgcp_params.dom;
  }
};

Config parse_config(const json& j);
Config load_config(const std::string& path);

// ---------------------------------------------------------------------------
// Trace and table persistence

// JSON-lines: first line is the meta header, then one record per kept
// iteration.
void write_trace_jsonl(const std::string& path, const mtsgcp::Trace& trace,
                       const json& meta);
mtsgcp::Trace read_trace_jsonl(const std::string& path);

void write_matrix_csv(const std::string& path, const Eigen::MatrixXd& m,
                      const json& meta);

// PCF table: r,pair,mean,lo95,hi95 rows.
void write_pcf_csv(const std::string& path, const mtsgcp::PcfTable& table,
                   const json& meta);

void write_json(const std::string& path, const json& j);

json to_json(const sgcp::AppendixBReport& r);
json to_json(const sgcp::AppendixCReport& r);
json to_json(const mtsgcp::GewekeReport& r);
json to_json(const std::vector<colouring::ColouringCheck>& checks);

}  // namespace coxthin::io
