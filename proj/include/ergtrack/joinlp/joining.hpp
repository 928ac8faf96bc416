#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "ergtrack/core/cost.hpp"
#include "ergtrack/core/source.hpp"
#include "ergtrack/core/system.hpp"
#include "ergtrack/joinlp/simplex.hpp"

namespace ergtrack::joinlp {

/// Exact value of a double: the shortest decimal that round-trips, read as a fraction.
/// 0.9 becomes 9/10 rather than its binary expansion, so stochastic rows stay stochastic.
Rational to_rational(double value);
std::string to_string(const Rational& value);

/// Stationary probabilities of the blocks of one fixed length.
struct BlockDistribution {
  std::size_t length = 0;
  std::size_t alphabet = 0;
  std::map<Word, Rational> probs;  ///< positive entries only
};

/// Exact block law of an i.i.d. binary or stationary Markov source. Other kinds are refused.
BlockDistribution block_distribution(const ObservationSource& source, std::size_t length);

/// Throws ConfigError naming the first violated equation: negative or non-normalised
/// entries, or left and right (length-1)-marginals that disagree.
void check_shift_consistent(const BlockDistribution& blocks);

/// Block-measure relaxation of the joining problem at block length k+1.
///
/// Variables are weights on pairs (x-block, y-block) of length k+1 with x-block a word
/// of the SFT and y-block of positive probability. Rows: y-marginal, total mass,
/// then one shift-invariance row per pair of k-blocks. Objective: expected cost of the
/// first coordinate pair.
struct JoiningLPInstance {
  SubshiftSFT x_graph = SubshiftSFT::golden_mean();
  BlockDistribution y_blocks;
  std::vector<std::vector<Rational>> cost_table;
  std::size_t k = 1;

  std::vector<Word> x_blocks;
  std::vector<Word> y_words;
  std::vector<std::pair<std::size_t, std::size_t>> variables;  ///< (x index, y index)
  LinearProgram<Rational> lp;
  std::size_t marginal_rows = 0;  ///< rows [0, marginal_rows) are the y-marginal
  std::size_t mass_row = 0;
  std::vector<std::string> row_labels;

  std::size_t variable_count() const noexcept { return variables.size(); }
};

inline constexpr std::size_t kDefaultVariableCap = 4096;

JoiningLPInstance build_instance(const SubshiftSFT& x_sft, const BlockDistribution& y_blocks,
                                 const TabulatedCost& cost, std::size_t k,
                                 std::size_t variable_cap = kDefaultVariableCap);

enum class SolveMode { rational, floating };

struct JoiningLPResult {
  LpStatus status = LpStatus::infeasible;
  SolveMode mode = SolveMode::rational;
  Rational value;  ///< exact in rational mode; the float value converted in floating mode
  double value_float = 0.0;
  std::vector<Rational> measure;  ///< empty in floating mode
  std::vector<double> measure_float;
  double stationarity_residual = 0.0;
  double marginal_residual = 0.0;
  Rational product_value;  ///< objective of the product witness mu x nu
  std::size_t pivots = 0;
};

/// Feasible product measure: a periodic orbit of the SFT times the y-blocks.
std::vector<Rational> product_witness(const JoiningLPInstance& instance);

JoiningLPResult solve(const JoiningLPInstance& instance, SolveMode mode = SolveMode::rational);

/// Max |A x - b| split into the y-marginal/mass rows and the stationarity rows.
std::pair<Rational, Rational> residuals(const JoiningLPInstance& instance, const std::vector<Rational>& x);
Rational objective(const JoiningLPInstance& instance, const std::vector<Rational>& x);

using BlockFamily = std::function<BlockDistribution(std::size_t length)>;

/// Optimal values C_1..C_{k_max}, each solved exactly. Throws CapacityError with the
/// variable count when a level exceeds the cap.
std::vector<Rational> relaxation_ladder(const SubshiftSFT& x_sft, const BlockFamily& y_blocks,
                                        const TabulatedCost& cost, std::size_t k_max,
                                        std::size_t variable_cap = kDefaultVariableCap);

struct FaceReport {
  std::vector<std::vector<Rational>> vertices;
  std::size_t midpoints_checked = 0;
  bool convex = true;
  Rational worst_gap;  ///< largest |objective(midpoint) - optimum| or constraint residual seen
  std::string summary;
  bool singleton() const noexcept { return vertices.size() <= 1; }
};

/// Collects up to n_vertices distinct optimal basic solutions by minimising seeded random
/// objectives over the optimal face, then checks every pairwise midpoint is feasible and optimal.
FaceReport optimal_face_probe(const JoiningLPInstance& instance, const JoiningLPResult& solved,
                              std::size_t n_vertices, std::uint64_t seed = 1);

}  // namespace ergtrack::joinlp
