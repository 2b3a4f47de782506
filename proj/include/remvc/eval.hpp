#pragma once

// Downstream evaluation: k-means with clustering metrics against land-use
// labels, and cross-validated Lasso regression for popularity.

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "remvc/core_types.hpp"

namespace remvc {

struct KMeansResult {
  std::vector<int> labels;
  double inertia = 0.0;
  Dense centroids;
  std::vector<double> inertia_trace;  // per Lloyd iteration of the returned run
  std::size_t iterations = 0;
};

/// Lloyd's algorithm from k-means++ seeds; best inertia over `restarts`.
KMeansResult kmeans(const Dense& x, std::size_t k, std::uint64_t seed, std::size_t restarts = 10,
                    std::size_t max_iter = 300);

struct PairCounts {
  std::uint64_t tp = 0;  // together in both
  std::uint64_t fp = 0;  // together in b only
  std::uint64_t fn = 0;  // together in a only
  std::uint64_t tn = 0;  // apart in both
};

PairCounts pair_counts(std::span<const int> a, std::span<const int> b);

/// Mutual information over the arithmetic mean of the two entropies.
double nmi(std::span<const int> a, std::span<const int> b);

/// Adjusted Rand index, contingency-table form.
double ari(std::span<const int> a, std::span<const int> b);

/// Pair-counting F-measure; `truth` is the reference partition.
double f_measure(std::span<const int> truth, std::span<const int> predicted, double lambda = 0.5);

struct LassoFit {
  std::vector<double> weights;  // original feature scale
  double intercept = 0.0;
  std::size_t sweeps = 0;
  bool converged = false;
  std::vector<double> objective_trace;  // after each sweep, standardized problem
};

/// Cyclic coordinate descent on 1/(2n) ||y - Xw - b||^2 + penalty ||w||_1 with
/// columns standardized internally. Constant columns get weight 0.
LassoFit lasso_fit(const Dense& x, std::span<const double> y, double penalty, std::size_t max_iter = 10000,
                   double tol = 1e-7);

std::vector<double> lasso_predict(const LassoFit& fit, const Dense& x);

struct RegressionMetrics {
  double mae = 0.0;
  double rmse = 0.0;
  double r2 = 0.0;
};

RegressionMetrics regression_metrics(std::span<const double> y, std::span<const double> predicted);

struct EvalReport {
  std::string task;  // "clustering" or "popularity"
  std::map<std::string, double> metrics;
  nlohmann::json config;
};

nlohmann::json to_json(const EvalReport& report);

EvalReport evaluate_clustering(const Dense& embeddings, std::span<const int> truth, std::size_t k,
                               std::uint64_t seed);

/// Out-of-fold predictions over a seeded shuffled split, metrics over all
/// of them at once.
EvalReport cross_validate_popularity(const Dense& embeddings, std::span<const double> y, std::size_t folds,
                                     std::uint64_t seed, double penalty = 0.1);

/// tf = category ratio, idf = ln(L / (1 + regions containing the category)).
Dense tfidf_baseline(const PoiCounts& counts);

}  // namespace remvc
