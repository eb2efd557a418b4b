#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dynq/abstraction.hpp"
#include "dynq/types.hpp"

namespace dynq {

/// Finite metric transition system; outputs are compared in the infinity norm.
/// Transitions may be non-deterministic.
struct FiniteTS {
  struct Edge {
    std::size_t input;
    std::size_t successor;
    friend bool operator<(const Edge& a, const Edge& b) {
      return a.input != b.input ? a.input < b.input : a.successor < b.successor;
    }
    friend bool operator==(const Edge&, const Edge&) = default;
  };

  std::size_t num_inputs = 0;
  std::vector<std::size_t> initial;
  std::vector<Vec> outputs;
  /// Per state, sorted by (input, successor) once finalize() ran.
  std::vector<std::vector<Edge>> edges;
  /// Optional input vectors; when both systems carry them they must agree.
  std::vector<Vec> input_labels;

  std::size_t num_states() const { return outputs.size(); }
  std::size_t add_state(Vec output);
  void add_transition(std::size_t from, std::size_t input, std::size_t to);
  /// Sorts and deduplicates edges and checks that they reference declared
  /// states and inputs.
  void finalize();
  std::span<const Edge> successors(std::size_t state, std::size_t input) const;
  std::vector<std::size_t> enabled(std::size_t state) const;
};

FiniteTS to_finite_ts(const AbstractSystem& abs);

/// Sorted set of (state of T1, state of T2) pairs.
class Relation {
 public:
  Relation() = default;
  explicit Relation(std::vector<std::pair<std::size_t, std::size_t>> pairs);

  void insert(std::size_t a, std::size_t b);
  bool contains(std::size_t a, std::size_t b) const;
  std::size_t size() const { return pairs_.size(); }
  const std::vector<std::pair<std::size_t, std::size_t>>& pairs() const { return pairs_; }
  Relation inverse() const;
  static Relation identity(std::size_t n);
  /// All pairs whose outputs are within eps.
  static Relation within(const FiniteTS& t1, const FiniteTS& t2, double eps);

 private:
  std::vector<std::pair<std::size_t, std::size_t>> pairs_;
};

enum class Condition {
  output_distance,    // (i)
  forward_match,      // (ii) a move of T1 has no related answer in T2
  backward_match,     // (iii) a move of T2 has no related answer in T1
  left_total,         // some state of T1 is unrelated
  right_total,        // some state of T2 is unrelated
};
std::string to_string(Condition c);

struct Witness {
  std::size_t x1 = 0;
  std::size_t x2 = 0;
  std::optional<std::size_t> input;
  std::optional<std::size_t> successor;  // the unmatched successor
  Condition condition = Condition::output_distance;
  double distance = 0.0;
};

struct Verdict {
  bool holds = true;
  /// First violation in iteration order (pairs ascending, inputs ascending).
  std::optional<Witness> witness;
  /// Smallest bound-minus-distance over outputs of related pairs and over the
  /// closest answer to every successor.
  double worst_slack = 0.0;
  std::size_t triples_checked = 0;
};

struct CheckOptions {
  /// Decides whether two successors are related; defaults to membership in R.
  std::function<bool(std::size_t s1, std::size_t s2)> successor_related;
  /// Added to eps when measuring successor slack under a relaxed predicate.
  double successor_tolerance = 0.0;
};

/// Conditions (i) and (ii) for every pair of R and every input of the shared
/// alphabet. Throws InputMismatchError if the alphabets differ.
Verdict check_simulation(const FiniteTS& t1, const FiniteTS& t2, const Relation& r, double eps,
                         const CheckOptions& options = {});
/// Conditions (i)-(iii) plus R(X1) = X2 and R^-1(X2) = X1.
Verdict check_bisimulation(const FiniteTS& t1, const FiniteTS& t2, const Relation& r, double eps,
                           const CheckOptions& options = {});

void write_verdict(std::ostream& os, const Verdict& v);

struct HarnessReport {
  Verdict verdict;
  std::size_t concrete_states = 0;
  std::size_t abstract_states = 0;
  std::size_t inputs = 0;
  std::size_t pairs = 0;
  double grid_pitch = 0.0;
  double epsilon = 0.0;
  /// Smallest precision-budget margin over all regions.
  double precision_margin = 0.0;
  /// eps minus the largest distance between an exact concrete endpoint and
  /// the abstract successor of a related state under the same input.
  double endpoint_slack = 0.0;
};

/// Concrete system sampled on the grid k * grid_pitch inside the regions,
/// checked against the abstraction under R = {(x, q) : |x - q| <= eps}.
/// Concrete successors are snapped to the grid, so they are matched up to
/// grid_pitch / 2. Throws PrecisionBreachError before building anything if a
/// region breaks the budget.
HarnessReport theorem1_harness(const SampledSystem& sys, const std::vector<Region>& regions,
                               const ZoomQuantizer& qz, const PrecisionBudget& budget,
                               double grid_pitch);
/// Same against a given (possibly deserialized) abstraction.
HarnessReport theorem1_harness(const SampledSystem& sys, const AbstractSystem& abs,
                               const PrecisionBudget& budget, double grid_pitch);

void write_harness_report(std::ostream& os, const HarnessReport& rep);

}  // namespace dynq
