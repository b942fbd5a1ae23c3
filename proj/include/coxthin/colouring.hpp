#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "coxthin/pattern.hpp"

namespace coxthin::colouring {

// A base coloured pattern split into its per-colour components S_0..S_K
// (colour labels stripped; all other marks retained).
struct ColouredSplit {
  std::vector<MarkedPattern> patterns;
  int n_colours() const { return static_cast<int>(patterns.size()); }
  int total_points() const {
    int n = 0;
    for (const auto& p : patterns) n += p.size();
    return n;
  }
};

// n_colours == 0 infers K from the largest label present.
ColouredSplit split_by_colour(const MarkedPattern& base, int n_colours = 0);

// Reassemble the base coloured pattern; inverse of split_by_colour up to
// point order.
MarkedPattern merge(const ColouredSplit& split);

// The colouring identity: joint density of (X_0,...,X_K) against the product
// counting-scattering measure equals the multinomial coefficient
// (n; n_0,...,n_K) times the density of the coloured base process.
// log_marked_density must follow the counting-scattering convention (the
// 1/n! lives inside the density, never the n! p_n pi_n form).
double log_joint_density_from_marked(
    const ColouredSplit& split,
    const std::function<double(const MarkedPattern&)>& log_marked_density);

// ---------------------------------------------------------------------------
// Exhaustive enumeration oracle on a discretized space: m uniform cells on
// [0,1], colours {0..K}, at most n_max points. The base model factorizes as
// count_pmf(n) * location_density(cells) * colour_pmf(colours | cells); the
// two density callbacks must be symmetric under index permutation.
// location_density is taken against (cell measure)^n and colour_pmf is a
// conditional PMF summing to 1 over {0..K}^n.

struct DiscreteModel {
  std::string name;
  int m = 2;
  int K = 1;
  int n_max = 3;
  std::function<double(int)> count_pmf;
  std::function<double(const std::vector<int>&)> location_density;
  std::function<double(const std::vector<int>&, const std::vector<int>&)>
      colour_pmf;

  double cell_width() const { return 1.0 / m; }
};

// Occupancy of each (colour, cell) pair, flattened colour-major:
// config[k*m + c] = number of colour-k points in cell c.
using SplitConfig = std::vector<int>;

struct EnumeratedJoint {
  std::map<SplitConfig, double> pmf;
  double total = 0.0;   // sums to 1 when count_pmf is normalized on 0..n_max
  long n_terms = 0;
};

// Exact joint PMF over split configurations by summing the base model over
// every ordered (cell, colour) assignment. Guards against blow-up past 1e7
// terms.
EnumeratedJoint enumerate_joint_oracle(const DiscreteModel& model);

// Probability of the same split configuration via Theorem-1 machinery:
// a representative pattern at cell centers is pushed through
// log_joint_density_from_marked and converted to a class probability with
// the cell measure and per-colour tuple counts.
double theorem1_class_prob(const DiscreteModel& model, const SplitConfig& config);

// named small models + comparison of both routes; used by unit tests, the
// CLI `verify colouring` command and the acceptance suite
struct ColouringCheck {
  std::string model;
  long n_classes = 0;
  double max_abs_err = 0.0;   // max |enumerated - theorem1| over classes
  double total_mass = 0.0;    // enumerated total probability
};

std::vector<DiscreteModel> standard_models();
std::vector<ColouringCheck> verification_suite();

}  // namespace coxthin::colouring
