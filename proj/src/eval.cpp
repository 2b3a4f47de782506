#include "remvc/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "remvc/errors.hpp"
#include "remvc/rng.hpp"

namespace remvc {

using nlohmann::json;

// ---------------------------------------------------------------------------
// k-means

namespace {

double sq_dist(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

Dense seed_plus_plus(const Dense& x, std::size_t k, Rng& rng) {
  const std::size_t n = x.rows;
  Dense c(k, x.cols);
  std::vector<bool> chosen(n, false);
  std::size_t first = std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
  std::copy(x.row(first).begin(), x.row(first).end(), c.row(0).begin());
  chosen[first] = true;
  std::vector<double> d2(n);
  for (std::size_t i = 0; i < n; ++i) d2[i] = sq_dist(x.row(i), c.row(0));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (std::size_t j = 1; j < k; ++j) {
    const double total = std::accumulate(d2.begin(), d2.end(), 0.0);
    std::size_t pick = n;
    if (total > 0.0) {
      const double u = unit(rng) * total;
      double acc = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (d2[i] <= 0.0) continue;
        acc += d2[i];
        pick = i;
        if (u < acc) break;
      }
    } else {
      for (std::size_t i = 0; i < n; ++i)
        if (!chosen[i]) {
          pick = i;
          break;
        }
    }
    chosen[pick] = true;
    std::copy(x.row(pick).begin(), x.row(pick).end(), c.row(j).begin());
    for (std::size_t i = 0; i < n; ++i) d2[i] = std::min(d2[i], sq_dist(x.row(i), c.row(j)));
  }
  return c;
}

KMeansResult lloyd(const Dense& x, Dense centroids, std::size_t max_iter) {
  const std::size_t n = x.rows, k = centroids.rows, d = x.cols;
  KMeansResult r;
  r.labels.assign(n, -1);
  std::vector<double> dist(n);
  for (std::size_t it = 0; it < max_iter; ++it) {
    bool changed = false;
    double inertia = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      int best = 0;
      double bd = sq_dist(x.row(i), centroids.row(0));
      for (std::size_t j = 1; j < k; ++j) {
        const double dj = sq_dist(x.row(i), centroids.row(j));
        if (dj < bd) {
          bd = dj;
          best = static_cast<int>(j);
        }
      }
      changed |= r.labels[i] != best;
      r.labels[i] = best;
      dist[i] = bd;
      inertia += bd;
    }
    r.inertia_trace.push_back(inertia);
    r.inertia = inertia;
    r.iterations = it + 1;
    if (!changed && it > 0) break;

    Dense sums(k, d);
    std::vector<std::size_t> sizes(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      const auto j = static_cast<std::size_t>(r.labels[i]);
      ++sizes[j];
      for (std::size_t c = 0; c < d; ++c) sums(j, c) += x(i, c);
    }
    for (std::size_t j = 0; j < k; ++j) {
      if (sizes[j] == 0) continue;
      for (std::size_t c = 0; c < d; ++c) centroids(j, c) = sums(j, c) / static_cast<double>(sizes[j]);
    }
    // Empty clusters move to the point farthest from its centroid.
    for (std::size_t j = 0; j < k; ++j) {
      if (sizes[j] != 0) continue;
      std::size_t far = n;
      double fd = 0.0;
      for (std::size_t i = 0; i < n; ++i)
        if (dist[i] > fd) {
          fd = dist[i];
          far = i;
        }
      if (far == n) continue;
      std::copy(x.row(far).begin(), x.row(far).end(), centroids.row(j).begin());
      dist[far] = 0.0;
    }
  }
  r.centroids = std::move(centroids);
  return r;
}

}  // namespace

KMeansResult kmeans(const Dense& x, std::size_t k, std::uint64_t seed, std::size_t restarts,
                    std::size_t max_iter) {
  if (k < 1) throw RequestError("kmeans: k must be >= 1");
  if (x.rows < k)
    throw RequestError("kmeans: " + std::to_string(x.rows) + " points cannot form " + std::to_string(k) +
                       " clusters");
  restarts = std::max<std::size_t>(1, restarts);
  KMeansResult best;
  best.inertia = std::numeric_limits<double>::infinity();
  for (std::size_t run = 0; run < restarts; ++run) {
    Rng rng = substream(seed, "kmeans", run);
    auto r = lloyd(x, seed_plus_plus(x, k, rng), max_iter);
    if (r.inertia < best.inertia) best = std::move(r);
  }
  return best;
}

// ---------------------------------------------------------------------------
// Clustering metrics

namespace {

struct Contingency {
  std::size_t n = 0;
  std::vector<std::vector<std::uint64_t>> table;  // [class of a][class of b]
  std::vector<std::uint64_t> rows, cols;
};

std::vector<std::size_t> dense_ids(std::span<const int> v, std::size_t& classes) {
  std::vector<int> sorted(v.begin(), v.end());
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  classes = sorted.size();
  std::vector<std::size_t> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i)
    out[i] = static_cast<std::size_t>(std::lower_bound(sorted.begin(), sorted.end(), v[i]) - sorted.begin());
  return out;
}

Contingency contingency(std::span<const int> a, std::span<const int> b) {
  if (a.size() != b.size())
    throw ShapeError("label vectors differ in length: " + std::to_string(a.size()) + " vs " +
                     std::to_string(b.size()));
  std::size_t ka = 0, kb = 0;
  const auto ia = dense_ids(a, ka);
  const auto ib = dense_ids(b, kb);
  Contingency c;
  c.n = a.size();
  c.table.assign(ka, std::vector<std::uint64_t>(kb, 0));
  c.rows.assign(ka, 0);
  c.cols.assign(kb, 0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    ++c.table[ia[i]][ib[i]];
    ++c.rows[ia[i]];
    ++c.cols[ib[i]];
  }
  return c;
}

double choose2(std::uint64_t m) { return 0.5 * static_cast<double>(m) * static_cast<double>(m > 0 ? m - 1 : 0); }
std::uint64_t choose2_int(std::uint64_t m) { return m * (m > 0 ? m - 1 : 0) / 2; }

}  // namespace

PairCounts pair_counts(std::span<const int> a, std::span<const int> b) {
  const Contingency c = contingency(a, b);
  std::uint64_t together = 0, same_a = 0, same_b = 0;
  for (const auto& row : c.table)
    for (auto v : row) together += choose2_int(v);
  for (auto v : c.rows) same_a += choose2_int(v);
  for (auto v : c.cols) same_b += choose2_int(v);
  PairCounts p;
  p.tp = together;
  p.fp = same_b - together;
  p.fn = same_a - together;
  p.tn = choose2_int(c.n) - p.tp - p.fp - p.fn;
  return p;
}

double nmi(std::span<const int> a, std::span<const int> b) {
  const Contingency c = contingency(a, b);
  if (c.n == 0) throw RequestError("nmi: empty labelings");
  const double n = static_cast<double>(c.n);
  auto entropy = [&](const std::vector<std::uint64_t>& counts) {
    double h = 0.0;
    for (auto v : counts)
      if (v > 0) {
        const double p = static_cast<double>(v) / n;
        h -= p * std::log(p);
      }
    return h;
  };
  const double ha = entropy(c.rows), hb = entropy(c.cols);
  if (ha + hb == 0.0) return 1.0;  // both single-class: identical partitions
  double mi = 0.0;
  for (std::size_t i = 0; i < c.rows.size(); ++i)
    for (std::size_t j = 0; j < c.cols.size(); ++j) {
      const auto v = c.table[i][j];
      if (v == 0) continue;
      const double pij = static_cast<double>(v) / n;
      mi += pij * std::log(n * static_cast<double>(v) / (static_cast<double>(c.rows[i]) * static_cast<double>(c.cols[j])));
    }
  return std::clamp(mi / (0.5 * (ha + hb)), 0.0, 1.0);
}

double ari(std::span<const int> a, std::span<const int> b) {
  const Contingency c = contingency(a, b);
  double index = 0.0, sa = 0.0, sb = 0.0;
  for (const auto& row : c.table)
    for (auto v : row) index += choose2(v);
  for (auto v : c.rows) sa += choose2(v);
  for (auto v : c.cols) sb += choose2(v);
  const double total = choose2(c.n);
  if (total == 0.0) return 1.0;
  // Scaled by the pair total so every term stays an integer (exact for
  // moderate n) instead of dividing for the expected index first.
  const double num = index * total - sa * sb;
  const double den = 0.5 * (sa + sb) * total - sa * sb;
  if (den == 0.0) return 1.0;  // both trivial partitions
  return num / den;
}

double f_measure(std::span<const int> truth, std::span<const int> predicted, double lambda) {
  const PairCounts p = pair_counts(truth, predicted);
  if (p.tp == 0) return 0.0;
  const double precision = static_cast<double>(p.tp) / static_cast<double>(p.tp + p.fp);
  const double recall = static_cast<double>(p.tp) / static_cast<double>(p.tp + p.fn);
  const double l2 = lambda * lambda;
  return (l2 + 1.0) * precision * recall / (l2 * precision + recall);
}

// ---------------------------------------------------------------------------
// Lasso

LassoFit lasso_fit(const Dense& x, std::span<const double> y, double penalty, std::size_t max_iter, double tol) {
  const std::size_t n = x.rows, d = x.cols;
  if (n < 2) throw RequestError("lasso_fit: need at least 2 samples");
  if (y.size() != n) throw ShapeError("lasso_fit: target length mismatch");
  if (!(penalty >= 0.0)) throw ConfigError("lasso_fit: penalty must be >= 0");
  for (double v : x.data)
    if (!std::isfinite(v)) throw NumericError("lasso_fit: non-finite feature");
  for (double v : y)
    if (!std::isfinite(v)) throw NumericError("lasso_fit: non-finite target");

  const double nd = static_cast<double>(n);
  std::vector<double> mean(d, 0.0), sd(d, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) mean[j] += x(i, j);
  for (auto& m : mean) m /= nd;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) sd[j] += (x(i, j) - mean[j]) * (x(i, j) - mean[j]);
  for (auto& s : sd) s = std::sqrt(s / nd);
  const double ymean = std::accumulate(y.begin(), y.end(), 0.0) / nd;

  // Column-major standardized design for cache-friendly coordinate updates.
  std::vector<bool> active(d);
  std::vector<std::vector<double>> z(d);
  for (std::size_t j = 0; j < d; ++j) {
    active[j] = sd[j] > 1e-12 * std::max(1.0, std::abs(mean[j]));
    if (!active[j]) continue;
    z[j].resize(n);
    for (std::size_t i = 0; i < n; ++i) z[j][i] = (x(i, j) - mean[j]) / sd[j];
  }
  std::vector<double> r(n), beta(d, 0.0);
  for (std::size_t i = 0; i < n; ++i) r[i] = y[i] - ymean;

  auto objective = [&] {
    double s = 0.0;
    for (double v : r) s += v * v;
    double l1 = 0.0;
    for (double b : beta) l1 += std::abs(b);
    return 0.5 * s / nd + penalty * l1;
  };

  LassoFit fit;
  for (std::size_t sweep = 0; sweep < max_iter; ++sweep) {
    double max_change = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      if (!active[j]) continue;
      const double rho = dot(z[j], r) / nd + beta[j];
      const double updated = std::copysign(std::max(std::abs(rho) - penalty, 0.0), rho);
      const double delta = updated - beta[j];
      if (delta != 0.0) {
        for (std::size_t i = 0; i < n; ++i) r[i] -= delta * z[j][i];
        beta[j] = updated;
      }
      max_change = std::max(max_change, std::abs(delta));
    }
    fit.objective_trace.push_back(objective());
    fit.sweeps = sweep + 1;
    if (max_change < tol) {
      fit.converged = true;
      break;
    }
  }
  fit.weights.assign(d, 0.0);
  fit.intercept = ymean;
  for (std::size_t j = 0; j < d; ++j) {
    if (!active[j]) continue;
    fit.weights[j] = beta[j] / sd[j];
    fit.intercept -= fit.weights[j] * mean[j];
  }
  return fit;
}

std::vector<double> lasso_predict(const LassoFit& fit, const Dense& x) {
  if (x.cols != fit.weights.size()) throw ShapeError("lasso_predict: feature width mismatch");
  std::vector<double> out(x.rows);
  for (std::size_t i = 0; i < x.rows; ++i) out[i] = fit.intercept + dot(x.row(i), fit.weights);
  return out;
}

RegressionMetrics regression_metrics(std::span<const double> y, std::span<const double> predicted) {
  if (y.size() != predicted.size()) throw ShapeError("regression_metrics: length mismatch");
  if (y.empty()) throw RequestError("regression_metrics: no samples");
  const double n = static_cast<double>(y.size());
  const double ymean = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double abs_err = 0.0, ss_res = 0.0, ss_tot = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double e = y[i] - predicted[i];
    abs_err += std::abs(e);
    ss_res += e * e;
    ss_tot += (y[i] - ymean) * (y[i] - ymean);
  }
  RegressionMetrics m;
  m.mae = abs_err / n;
  m.rmse = std::sqrt(ss_res / n);
  m.r2 = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : (ss_res == 0.0 ? 1.0 : 0.0);
  return m;
}

json to_json(const EvalReport& r) { return json{{"task", r.task}, {"metrics", r.metrics}, {"config", r.config}}; }

EvalReport evaluate_clustering(const Dense& embeddings, std::span<const int> truth, std::size_t k,
                               std::uint64_t seed) {
  if (truth.size() != embeddings.rows)
    throw ShapeError("evaluate_clustering: " + std::to_string(truth.size()) + " labels for " +
                     std::to_string(embeddings.rows) + " embeddings");
  const auto km = kmeans(embeddings, k, seed);
  EvalReport r;
  r.task = "clustering";
  r.metrics["NMI"] = nmi(truth, km.labels);
  r.metrics["ARI"] = ari(truth, km.labels);
  r.metrics["F"] = f_measure(truth, km.labels);
  r.config = json{{"seed", seed}, {"k", k}, {"restarts", 10}};
  return r;
}

EvalReport cross_validate_popularity(const Dense& embeddings, std::span<const double> y, std::size_t folds,
                                     std::uint64_t seed, double penalty) {
  const std::size_t n = embeddings.rows;
  if (y.size() != n)
    throw ShapeError("cross_validate_popularity: " + std::to_string(y.size()) + " targets for " +
                     std::to_string(n) + " embeddings");
  if (folds < 2 || folds > n)
    throw RequestError("cross_validate_popularity: folds must be in [2, " + std::to_string(n) + "]");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng = substream(seed, "cv-folds");
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<std::size_t> fold_of(n);
  for (std::size_t pos = 0; pos < n; ++pos) fold_of[order[pos]] = pos % folds;

  std::vector<double> predicted(n, 0.0);
  for (std::size_t f = 0; f < folds; ++f) {
    std::vector<std::size_t> train, test;
    for (std::size_t i = 0; i < n; ++i) (fold_of[i] == f ? test : train).push_back(i);
    Dense xt(train.size(), embeddings.cols), xs(test.size(), embeddings.cols);
    std::vector<double> yt(train.size());
    for (std::size_t i = 0; i < train.size(); ++i) {
      std::copy(embeddings.row(train[i]).begin(), embeddings.row(train[i]).end(), xt.row(i).begin());
      yt[i] = y[train[i]];
    }
    for (std::size_t i = 0; i < test.size(); ++i)
      std::copy(embeddings.row(test[i]).begin(), embeddings.row(test[i]).end(), xs.row(i).begin());
    const auto fit = lasso_fit(xt, yt, penalty);
    const auto p = lasso_predict(fit, xs);
    for (std::size_t i = 0; i < test.size(); ++i) predicted[test[i]] = p[i];
  }
  const auto m = regression_metrics(y, predicted);
  EvalReport r;
  r.task = "popularity";
  r.metrics["MAE"] = m.mae;
  r.metrics["RMSE"] = m.rmse;
  r.metrics["R2"] = m.r2;
  r.config = json{{"seed", seed}, {"folds", folds}, {"penalty", penalty}};
  return r;
}

Dense tfidf_baseline(const PoiCounts& counts) {
  const std::size_t L = counts.regions, F = counts.categories;
  std::vector<std::size_t> df(F, 0);
  for (std::size_t k = 0; k < L; ++k)
    for (std::size_t c = 0; c < F; ++c) df[c] += counts.at(k, c) > 0;
  Dense out(L, F);
  for (std::size_t k = 0; k < L; ++k) {
    const auto tf = poi_ratios(counts, k);
    for (std::size_t c = 0; c < F; ++c)
      out(k, c) = tf[c] * std::log(static_cast<double>(L) / (1.0 + static_cast<double>(df[c])));
  }
  return out;
}

}  // namespace remvc
