#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "dynq/dynamics.hpp"
#include "dynq/quantization.hpp"
#include "dynq/region.hpp"

namespace dynq {

/// Desired precision epsilon together with the stability bound beta and tau.
struct PrecisionBudget {
  double epsilon = 0.0;
  StabilityBound beta;
  double tau = 0.0;

  void validate() const;
};

struct PrecisionCheck {
  bool ok = false;
  double lhs = 0.0;
  double margin = 0.0;  // epsilon - lhs
};

/// beta(eps, tau) + Lambda eta_i + 0.5 Lambda mu_i <= eps.
PrecisionCheck precision_ok(const PrecisionBudget& budget, double lambda_max, double eta_i,
                            double mu_i);

/// beta(eps, tau) + Omega_in^p Omega_out^(i-p) (Lambda eta0 + Lambda mu0 / 2) <= eps.
PrecisionCheck precision_ok_geometric(const PrecisionBudget& budget, double lambda_max, double eta0,
                                      double mu0, double omega_in, double omega_out, int p, int i);

/// Finite abstraction built from a sequence of regions. States are lattice
/// points, transitions are q' = Q_mu(x(tau, q, u)) under the owning region.
class AbstractSystem {
 public:
  struct Transition {
    std::size_t input;
    std::size_t successor;
  };

  std::size_t state_dim = 0;
  std::size_t input_dim = 0;
  double tau = 0.0;
  double epsilon = 0.0;
  ZoomQuantizer quantizer;  // Lambda, M, Lambda0; mu comes from the regions
  std::vector<Region> regions;
  std::vector<LatticePoint> states;
  std::vector<std::size_t> initial;
  std::vector<Vec> inputs;
  /// Per state, sorted by input index; at most one entry per input.
  std::vector<std::vector<Transition>> transitions;

  std::size_t num_states() const { return states.size(); }
  std::size_t num_inputs() const { return inputs.size(); }
  std::size_t num_transitions() const;
  std::optional<std::size_t> successor(std::size_t state, std::size_t input) const;
  std::vector<std::size_t> enabled_inputs(std::size_t state) const;
  std::optional<std::size_t> find_state(int region_id, std::span<const int> k) const;
  std::optional<std::size_t> find_input(std::span<const double> u) const;
  const Region& region(int id) const;

  /// Rebuilds lookup tables after the public members were filled in.
  void reindex();

 private:
  std::map<std::pair<int, std::vector<int>>, std::size_t> state_index_;
  std::map<Vec, std::size_t> input_index_;
  std::map<int, std::size_t> region_index_;
};

struct BuildOptions {
  /// Merge states of overlapping regions that share coordinates, keeping the
  /// younger region's id. Off keeps every region's full lattice.
  bool dedup_overlaps = true;
};

/// Throws PrecisionBreachError if a region breaks the precision budget.
AbstractSystem build_abstraction(const SampledSystem& sys, const std::vector<Region>& regions,
                                 const ZoomQuantizer& qz, const PrecisionBudget& budget,
                                 const BuildOptions& options = {});

/// Index of the most recently generated region whose box contains x.
std::optional<std::size_t> owning_region(const std::vector<Region>& regions,
                                         std::span<const double> x);

struct RegionComplexity {
  int region_id = 0;
  std::size_t states = 0;
  double theta = 0.0;
};

struct ComplexityReport {
  std::vector<RegionComplexity> per_region;
  std::size_t total_states = 0;
  std::size_t uniform_baseline = 0;
  double ratio() const {
    return uniform_baseline ? static_cast<double>(total_states) / uniform_baseline : 0.0;
  }
};

ComplexityReport complexity_report(const AbstractSystem& abs, const Box& full_box);

/// Line-oriented text format; identical systems serialize to identical bytes.
void write_abstraction(std::ostream& os, const AbstractSystem& abs);
AbstractSystem read_abstraction(std::istream& is);

}  // namespace dynq
