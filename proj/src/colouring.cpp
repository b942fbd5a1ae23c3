#include "coxthin/colouring.hpp"

#include <algorithm>
#include <cmath>

namespace coxthin::colouring {

namespace {

MarkedPattern take_rows(const MarkedPattern& base, const std::vector<int>& rows,
                        bool strip_colour) {
  const int n = static_cast<int>(rows.size());
  Eigen::MatrixXd locs(n, base.dim());
  std::optional<Eigen::VectorXd> times;
  std::optional<Eigen::MatrixXd> marks;
  std::optional<Eigen::VectorXi> colours;
  if (base.has_times()) times = Eigen::VectorXd(n);
  if (base.has_gp_marks()) marks = Eigen::MatrixXd(n, base.gp_marks().cols());
  if (base.has_colours() && !strip_colour) colours = Eigen::VectorXi(n);
  for (int i = 0; i < n; ++i) {
    locs.row(i) = base.locations().row(rows[i]);
    if (times) (*times)[i] = base.times()[rows[i]];
    if (marks) marks->row(i) = base.gp_marks().row(rows[i]);
    if (colours) (*colours)[i] = base.colours()[rows[i]];
  }
  return MarkedPattern(std::move(locs), std::move(times), std::move(marks),
                       std::move(colours));
}

}  // namespace

ColouredSplit split_by_colour(const MarkedPattern& base, int n_colours) {
  require(base.empty() || base.has_colours(), ErrorKind::kStructural,
          "split_by_colour: pattern has no colour labels");
  int max_label = -1;
  for (int i = 0; i < base.size(); ++i) {
    max_label = std::max(max_label, base.colours()[i]);
  }
  if (n_colours == 0) n_colours = max_label + 1;
  if (n_colours < 1) n_colours = 1;
  require(max_label < n_colours, ErrorKind::kStructural,
          "colour label out of range");
  ColouredSplit split;
  split.patterns.reserve(n_colours);
  for (int k = 0; k < n_colours; ++k) {
    std::vector<int> rows;
    for (int i = 0; i < base.size(); ++i) {
      if (base.colours()[i] == k) rows.push_back(i);
    }
    split.patterns.push_back(take_rows(base, rows, /*strip_colour=*/true));
  }
  return split;
}

MarkedPattern merge(const ColouredSplit& split) {
  require(!split.patterns.empty(), ErrorKind::kStructural, "empty split");
  const int n = split.total_points();
  int dim = 0;
  bool any_times = false, any_marks = false;
  int mark_cols = 0;
  for (const auto& p : split.patterns) {
    if (p.size() > 0) {
      dim = p.dim();
      any_times = p.has_times();
      any_marks = p.has_gp_marks();
      if (any_marks) mark_cols = static_cast<int>(p.gp_marks().cols());
    }
  }
  Eigen::MatrixXd locs(n, dim);
  std::optional<Eigen::VectorXd> times;
  std::optional<Eigen::MatrixXd> marks;
  Eigen::VectorXi colours(n);
  if (any_times) times = Eigen::VectorXd(n);
  if (any_marks) marks = Eigen::MatrixXd(n, mark_cols);
  int row = 0;
  for (int k = 0; k < split.n_colours(); ++k) {
    const MarkedPattern& p = split.patterns[k];
    for (int i = 0; i < p.size(); ++i, ++row) {
      locs.row(row) = p.locations().row(i);
      if (times) (*times)[row] = p.times()[i];
      if (marks) marks->row(row) = p.gp_marks().row(i);
      colours[row] = k;
    }
  }
  return MarkedPattern(std::move(locs), std::move(times), std::move(marks),
                       colours);
}

double log_joint_density_from_marked(
    const ColouredSplit& split,
    const std::function<double(const MarkedPattern&)>& log_marked_density) {
  std::vector<int> sizes;
  sizes.reserve(split.patterns.size());
  for (const auto& p : split.patterns) sizes.push_back(p.size());
  return log_multinomial_coeff(sizes) + log_marked_density(merge(split));
}

// ---------------------------------------------------------------------------

namespace {

SplitConfig config_of(const DiscreteModel& model, const std::vector<int>& cells,
                      const std::vector<int>& colours) {
  SplitConfig cfg(static_cast<size_t>(model.K + 1) * model.m, 0);
  for (size_t i = 0; i < cells.size(); ++i) {
    cfg[static_cast<size_t>(colours[i]) * model.m + cells[i]] += 1;
  }
  return cfg;
}

bool advance_odometer(std::vector<int>& digits, int base) {
  for (size_t i = 0; i < digits.size(); ++i) {
    if (++digits[i] < base) return true;
    digits[i] = 0;
  }
  return false;
}

}  // namespace

EnumeratedJoint enumerate_joint_oracle(const DiscreteModel& model) {
  require(model.m >= 1 && model.K >= 1 && model.n_max >= 0,
          ErrorKind::kParameter, "bad discrete model dimensions");
  double planned = 0.0;
  for (int n = 0; n <= model.n_max; ++n) {
    planned += std::pow(static_cast<double>(model.m) * (model.K + 1), n);
  }
  require(planned <= 1e7, ErrorKind::kSize,
          "enumeration oracle: configuration count exceeds 1e7");

  EnumeratedJoint out;
  const double w = model.cell_width();
  for (int n = 0; n <= model.n_max; ++n) {
    const double p_n = model.count_pmf(n);
    if (n == 0) {
      SplitConfig empty(static_cast<size_t>(model.K + 1) * model.m, 0);
      out.pmf[empty] += p_n;
      out.total += p_n;
      out.n_terms += 1;
      continue;
    }
    const double wn = std::pow(w, n);
    std::vector<int> cells(n, 0);
    do {
      const double loc_dens = model.location_density(cells);
      std::vector<int> cols(n, 0);
      do {
        double prob = p_n * loc_dens * model.colour_pmf(cells, cols) * wn;
        out.pmf[config_of(model, cells, cols)] += prob;
        out.total += prob;
        out.n_terms += 1;
      } while (advance_odometer(cols, model.K + 1));
    } while (advance_odometer(cells, model.m));
  }
  return out;
}

double theorem1_class_prob(const DiscreteModel& model, const SplitConfig& config) {
  require(config.size() == static_cast<size_t>(model.K + 1) * model.m,
          ErrorKind::kParameter, "split configuration size mismatch");
  const double w = model.cell_width();

  // representative pattern: occupants sit at distinct offsets inside their
  // cell (distinct across colours too); the density is cell-wise constant so
  // the offsets are immaterial
  ColouredSplit split;
  int n = 0;
  double log_tuple_counts = 0.0;  // per colour: n_k! / prod_c occ!
  int offset_counter = 0;
  for (int k = 0; k <= model.K; ++k) {
    std::vector<double> xs;
    int n_k = 0;
    for (int c = 0; c < model.m; ++c) {
      const int occ = config[static_cast<size_t>(k) * model.m + c];
      n_k += occ;
      for (int j = 0; j < occ; ++j) {
        xs.push_back((c + 0.5) * w + (++offset_counter) * 1e-6 * w);
      }
      log_tuple_counts -= log_factorial(occ);
    }
    log_tuple_counts += log_factorial(n_k);
    n += n_k;
    Eigen::MatrixXd locs(static_cast<int>(xs.size()), 1);
    for (size_t i = 0; i < xs.size(); ++i) locs(static_cast<int>(i), 0) = xs[i];
    split.patterns.emplace_back(std::move(locs));
  }

  auto log_marked = [&model](const MarkedPattern& merged) {
    std::vector<int> cells(merged.size()), cols(merged.size());
    for (int i = 0; i < merged.size(); ++i) {
      int c = static_cast<int>(merged.locations()(i, 0) * model.m);
      cells[i] = std::clamp(c, 0, model.m - 1);
      cols[i] = merged.colours()[i];
    }
    double p_n = model.count_pmf(merged.size());
    double loc = merged.size() > 0 ? model.location_density(cells) : 1.0;
    double col = merged.size() > 0 ? model.colour_pmf(cells, cols) : 1.0;
    return std::log(p_n) + std::log(loc) + std::log(col);
  };

  double log_joint = log_joint_density_from_marked(split, log_marked);
  double log_prob = log_joint + n * std::log(w) + log_tuple_counts;
  return std::isfinite(log_prob) ? std::exp(log_prob) : 0.0;
}

// ---------------------------------------------------------------------------

namespace {

std::function<double(int)> truncated_poisson(double mean, int n_max) {
  std::vector<double> pmf(n_max + 1);
  double total = 0.0;
  for (int n = 0; n <= n_max; ++n) {
    pmf[n] = std::exp(-mean + n * std::log(mean) - std::lgamma(n + 1.0));
    total += pmf[n];
  }
  for (auto& p : pmf) p /= total;
  return [pmf](int n) {
    return (n >= 0 && n < static_cast<int>(pmf.size())) ? pmf[n] : 0.0;
  };
}

int same_cell_count(const std::vector<int>& cells, size_t i) {
  int c = 0;
  for (int cell : cells) {
    if (cell == cells[i]) ++c;
  }
  return c;
}

}  // namespace

std::vector<DiscreteModel> standard_models() {
  std::vector<DiscreteModel> models;

  {
    DiscreteModel m;
    m.name = "independent-colouring";
    m.m = 3;
    m.K = 1;
    m.n_max = 4;
    m.count_pmf = truncated_poisson(1.2, m.n_max);
    m.location_density = [](const std::vector<int>&) { return 1.0; };
    m.colour_pmf = [](const std::vector<int>&, const std::vector<int>& cols) {
      double p = 1.0;
      for (int c : cols) p *= c == 1 ? 0.3 : 0.7;
      return p;
    };
    models.push_back(std::move(m));
  }

  {
    DiscreteModel m;
    m.name = "cell-dependent-three-colour";
    m.m = 2;
    m.K = 2;
    m.n_max = 3;
    m.count_pmf = [](int n) {  // Binomial(3, 0.4)
      static const double pmf[4] = {0.216, 0.432, 0.288, 0.064};
      return (n >= 0 && n <= 3) ? pmf[n] : 0.0;
    };
    m.location_density = [m_cells = m.m](const std::vector<int>& cells) {
      double d = 1.0;
      for (int c : cells) d *= (c == 0 ? 0.7 : 0.3) * m_cells;
      return d;
    };
    m.colour_pmf = [](const std::vector<int>& cells, const std::vector<int>& cols) {
      static const double probs[2][3] = {{0.5, 0.3, 0.2}, {0.2, 0.3, 0.5}};
      double p = 1.0;
      for (size_t i = 0; i < cols.size(); ++i) p *= probs[cells[i]][cols[i]];
      return p;
    };
    models.push_back(std::move(m));
  }

  {
    DiscreteModel m;
    m.name = "crowding-dependent-colouring";
    m.m = 4;
    m.K = 1;
    m.n_max = 4;
    m.count_pmf = truncated_poisson(1.5, m.n_max);
    m.location_density = [](const std::vector<int>&) { return 1.0; };
    // colour of a point depends on how many other points share its cell
    m.colour_pmf = [](const std::vector<int>& cells, const std::vector<int>& cols) {
      double p = 1.0;
      for (size_t i = 0; i < cols.size(); ++i) {
        double z = -0.4 + 0.9 * (same_cell_count(cells, i) - 1);
        double q = 1.0 / (1.0 + std::exp(-z));
        p *= cols[i] == 1 ? q : 1.0 - q;
      }
      return p;
    };
    models.push_back(std::move(m));
  }

  {
    DiscreteModel m;
    m.name = "repulsive-scatter";
    m.m = 3;
    m.K = 1;
    m.n_max = 4;
    std::vector<double> counts = {0.30, 0.30, 0.20, 0.15, 0.05};
    m.count_pmf = [counts](int n) {
      return (n >= 0 && n < static_cast<int>(counts.size())) ? counts[n] : 0.0;
    };
    // pairwise same-cell penalty, normalized per n by direct summation
    const double theta = 0.5;
    auto raw = [theta](const std::vector<int>& cells) {
      double v = 1.0;
      for (size_t i = 0; i < cells.size(); ++i) {
        for (size_t j = i + 1; j < cells.size(); ++j) {
          if (cells[i] == cells[j]) v *= theta;
        }
      }
      return v;
    };
    std::vector<double> normalizer(m.n_max + 1, 1.0);
    const double w = m.cell_width();
    for (int n = 1; n <= m.n_max; ++n) {
      double total = 0.0;
      std::vector<int> cells(n, 0);
      do {
        total += raw(cells) * std::pow(w, n);
      } while (advance_odometer(cells, m.m));
      normalizer[n] = total;
    }
    m.location_density = [raw, normalizer](const std::vector<int>& cells) {
      return raw(cells) / normalizer[cells.size()];
    };
    m.colour_pmf = [](const std::vector<int>&, const std::vector<int>& cols) {
      double p = 1.0;
      for (int c : cols) p *= c == 1 ? 0.4 : 0.6;
      return p;
    };
    models.push_back(std::move(m));
  }

  {
    DiscreteModel m;
    m.name = "excluded-colour";
    m.m = 2;
    m.K = 2;
    m.n_max = 4;
    m.count_pmf = truncated_poisson(1.0, m.n_max);
    m.location_density = [](const std::vector<int>&) { return 1.0; };
    m.colour_pmf = [](const std::vector<int>& cells, const std::vector<int>& cols) {
      static const double probs[2][3] = {{0.6, 0.4, 0.0}, {0.2, 0.3, 0.5}};
      double p = 1.0;
      for (size_t i = 0; i < cols.size(); ++i) p *= probs[cells[i]][cols[i]];
      return p;
    };
    models.push_back(std::move(m));
  }

  return models;
}

std::vector<ColouringCheck> verification_suite() {
  std::vector<ColouringCheck> checks;
  for (const DiscreteModel& model : standard_models()) {
    EnumeratedJoint oracle = enumerate_joint_oracle(model);
    ColouringCheck check;
    check.model = model.name;
    check.n_classes = static_cast<long>(oracle.pmf.size());
    check.total_mass = oracle.total;
    for (const auto& [config, prob] : oracle.pmf) {
      double t1 = theorem1_class_prob(model, config);
      check.max_abs_err = std::max(check.max_abs_err, std::abs(t1 - prob));
    }
    checks.push_back(std::move(check));
  }
  return checks;
}

}  // namespace coxthin::colouring
