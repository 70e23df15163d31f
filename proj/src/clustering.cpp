#include "clustertune/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "clustertune/errors.hpp"
#include "clustertune/random.hpp"

namespace clustertune {

std::string_view to_string(Algorithm a) noexcept {
  switch (a) {
    case Algorithm::kmeans:
      return "kmeans";
    case Algorithm::ahc:
      return "ahc";
    case Algorithm::nmf:
      return "nmf";
  }
  return "kmeans";
}

std::string_view to_string(Linkage l) noexcept {
  switch (l) {
    case Linkage::ward:
      return "ward";
    case Linkage::complete:
      return "complete";
    case Linkage::average:
      return "average";
    case Linkage::single:
      return "single";
  }
  return "ward";
}

std::optional<Algorithm> parse_algorithm(std::string_view s) noexcept {
  for (const auto a : {Algorithm::kmeans, Algorithm::ahc, Algorithm::nmf}) {
    if (to_string(a) == s) return a;
  }
  return std::nullopt;
}

std::optional<Linkage> parse_linkage(std::string_view s) noexcept {
  for (const auto l : {Linkage::ward, Linkage::complete, Linkage::average, Linkage::single}) {
    if (to_string(l) == s) return l;
  }
  return std::nullopt;
}

std::vector<std::size_t> ClusterAssignment::cluster_sizes() const {
  std::vector<std::size_t> sizes(static_cast<std::size_t>(std::max(k, 0)), 0);
  for (const int l : labels) ++sizes[static_cast<std::size_t>(l)];
  return sizes;
}

bool ClusterAssignment::has_empty_cluster() const {
  const auto sizes = cluster_sizes();
  return std::find(sizes.begin(), sizes.end(), std::size_t{0}) != sizes.end();
}

namespace {

void check_cluster_count(const Matrix& data, int k, const char* what) {
  if (k < 1) throw ParameterError(std::string(what) + " must be >= 1, got " + std::to_string(k));
  if (static_cast<std::size_t>(k) > data.rows()) {
    throw ParameterError(std::string(what) + " = " + std::to_string(k) + " exceeds row count " +
                         std::to_string(data.rows()));
  }
}

// ---------------------------------------------------------------------------
// k-means

Matrix kmeanspp_seeds(const Matrix& data, int k, UniformSource& rng) {
  const std::size_t n = data.rows();
  Matrix centers(static_cast<std::size_t>(k), data.cols());
  std::vector<bool> chosen(n, false);

  auto first = static_cast<std::size_t>(rng.next() * static_cast<double>(n));
  first = std::min(first, n - 1);
  chosen[first] = true;
  std::copy(data.row(first).begin(), data.row(first).end(), centers.row(0).begin());

  std::vector<double> d2(n);
  for (std::size_t i = 0; i < n; ++i) d2[i] = squared_distance(data.row(i), centers.row(0));

  for (int c = 1; c < k; ++c) {
    double total = 0.0;
    for (const double v : d2) total += v;

    std::size_t pick = n;
    if (total > 0.0) {
      const double target = rng.next() * total;
      double acc = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (d2[i] <= 0.0) continue;
        acc += d2[i];
        pick = i;
        if (acc > target) break;
      }
    } else {
      // Every point coincides with a center already; take the next unused row.
      for (std::size_t i = 0; i < n && pick == n; ++i) {
        if (!chosen[i]) pick = i;
      }
    }
    chosen[pick] = true;
    auto dst = centers.row(static_cast<std::size_t>(c));
    std::copy(data.row(pick).begin(), data.row(pick).end(), dst.begin());
    for (std::size_t i = 0; i < n; ++i) {
      d2[i] = std::min(d2[i], squared_distance(data.row(i), dst));
    }
  }
  return centers;
}

// Nearest center per row (lowest index on ties); returns total squared distance.
double assign_nearest(const Matrix& data, const Matrix& centers, std::vector<int>& labels,
                      std::vector<double>& dist) {
  double inertia = 0.0;
  for (std::size_t i = 0; i < data.rows(); ++i) {
    int best = 0;
    double best_d = squared_distance(data.row(i), centers.row(0));
    for (std::size_t c = 1; c < centers.rows(); ++c) {
      const double d = squared_distance(data.row(i), centers.row(c));
      if (d < best_d) {
        best_d = d;
        best = static_cast<int>(c);
      }
    }
    labels[i] = best;
    dist[i] = best_d;
    inertia += best_d;
  }
  return inertia;
}

struct LloydRun {
  std::vector<int> labels;
  double inertia = 0.0;
  std::vector<double> trace;
  int iterations = 0;
};

// Single-point moves after Lloyd converges: move x from A to B whenever
// n_B/(n_B+1) |x-c_B|^2 < n_A/(n_A-1) |x-c_A|^2. Every move strictly lowers
// inertia, and a point nearer another centroid always qualifies, so the
// result is still a Lloyd fixed point.
void hartigan_refine(const Matrix& data, int k, int max_passes, LloydRun& run) {
  const std::size_t n = data.rows();
  const std::size_t dims = data.cols();
  const auto kk = static_cast<std::size_t>(k);
  Matrix centers(kk, dims);
  std::vector<std::size_t> counts(kk, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto c = static_cast<std::size_t>(run.labels[i]);
    ++counts[c];
    for (std::size_t d = 0; d < dims; ++d) centers(c, d) += data(i, d);
  }
  for (std::size_t c = 0; c < kk; ++c) {
    if (counts[c] == 0) return;
    for (auto& v : centers.row(c)) v /= static_cast<double>(counts[c]);
  }

  for (int pass = 0; pass < max_passes; ++pass) {
    bool moved = false;
    for (std::size_t i = 0; i < n; ++i) {
      const auto from = static_cast<std::size_t>(run.labels[i]);
      const double n_from = static_cast<double>(counts[from]);
      if (counts[from] < 2) continue;
      const auto x = data.row(i);
      const double leave = n_from / (n_from - 1.0) * squared_distance(x, centers.row(from));
      std::size_t to = from;
      double best = leave * (1.0 - 1e-12);
      for (std::size_t c = 0; c < kk; ++c) {
        if (c == from) continue;
        const double n_to = static_cast<double>(counts[c]);
        const double join = n_to / (n_to + 1.0) * squared_distance(x, centers.row(c));
        if (join < best) {
          best = join;
          to = c;
        }
      }
      if (to == from) continue;
      const double n_to = static_cast<double>(counts[to]);
      for (std::size_t d = 0; d < dims; ++d) {
        centers(from, d) = (n_from * centers(from, d) - x[d]) / (n_from - 1.0);
        centers(to, d) = (n_to * centers(to, d) + x[d]) / (n_to + 1.0);
      }
      --counts[from];
      ++counts[to];
      run.labels[i] = static_cast<int>(to);
      moved = true;
    }
    if (!moved) break;

    // Recompute exactly to keep incremental rounding out of the objective.
    std::fill(centers.values().begin(), centers.values().end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t d = 0; d < dims; ++d) centers(static_cast<std::size_t>(run.labels[i]), d) += data(i, d);
    }
    for (std::size_t c = 0; c < kk; ++c) {
      for (auto& v : centers.row(c)) v /= static_cast<double>(counts[c]);
    }
    double inertia = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      inertia += squared_distance(data.row(i), centers.row(static_cast<std::size_t>(run.labels[i])));
    }
    run.inertia = inertia;
    run.trace.push_back(inertia);
  }
}

LloydRun lloyd(const Matrix& data, int k, int max_iter, double tol, UniformSource& rng) {
  const std::size_t n = data.rows();
  const std::size_t dims = data.cols();
  const auto kk = static_cast<std::size_t>(k);

  Matrix centers = kmeanspp_seeds(data, k, rng);
  LloydRun run;
  run.labels.assign(n, 0);
  std::vector<double> dist(n);
  run.inertia = assign_nearest(data, centers, run.labels, dist);
  run.trace.push_back(run.inertia);

  Matrix next(kk, dims);
  std::vector<std::size_t> counts(kk);
  for (int it = 0; it < max_iter; ++it) {
    std::fill(next.values().begin(), next.values().end(), 0.0);
    std::fill(counts.begin(), counts.end(), 0);
    for (std::size_t i = 0; i < n; ++i) {
      const auto c = static_cast<std::size_t>(run.labels[i]);
      ++counts[c];
      auto dst = next.row(c);
      const auto src = data.row(i);
      for (std::size_t d = 0; d < dims; ++d) dst[d] += src[d];
    }
    for (std::size_t c = 0; c < kk; ++c) {
      if (counts[c] == 0) continue;
      for (auto& v : next.row(c)) v /= static_cast<double>(counts[c]);
    }

    // Empty clusters restart at the point farthest from its own (updated) centroid.
    if (std::find(counts.begin(), counts.end(), std::size_t{0}) != counts.end()) {
      for (std::size_t i = 0; i < n; ++i) {
        dist[i] = squared_distance(data.row(i), next.row(static_cast<std::size_t>(run.labels[i])));
      }
      for (std::size_t c = 0; c < kk; ++c) {
        if (counts[c] != 0) continue;
        const auto far = static_cast<std::size_t>(
            std::max_element(dist.begin(), dist.end()) - dist.begin());
        std::copy(data.row(far).begin(), data.row(far).end(), next.row(c).begin());
        dist[far] = 0.0;
      }
    }

    double shift = 0.0;
    for (std::size_t c = 0; c < kk; ++c) {
      shift = std::max(shift, std::sqrt(squared_distance(centers.row(c), next.row(c))));
    }
    std::swap(centers, next);
    run.inertia = assign_nearest(data, centers, run.labels, dist);
    run.trace.push_back(run.inertia);
    run.iterations = it + 1;
    if (shift <= tol) break;
  }
  hartigan_refine(data, k, max_iter, run);
  return run;
}

// ---------------------------------------------------------------------------
// Agglomerative

// Lance-Williams update of d(i u j, m). Ward operates on squared distances.
double lance_williams(Linkage linkage, double d_im, double d_jm, double d_ij, double n_i,
                      double n_j, double n_m) {
  switch (linkage) {
    case Linkage::single:
      return std::min(d_im, d_jm);
    case Linkage::complete:
      return std::max(d_im, d_jm);
    case Linkage::average:
      return (n_i * d_im + n_j * d_jm) / (n_i + n_j);
    case Linkage::ward:
      return ((n_i + n_m) * d_im + (n_j + n_m) * d_jm - n_m * d_ij) / (n_i + n_j + n_m);
  }
  return 0.0;
}

// ---------------------------------------------------------------------------
// NMF

double reconstruction_error(const Matrix& v, const Matrix& w, const Matrix& h) {
  const std::size_t rank = w.cols();
  double err = 0.0;
  for (std::size_t i = 0; i < v.rows(); ++i) {
    for (std::size_t j = 0; j < v.cols(); ++j) {
      double approx = 0.0;
      for (std::size_t a = 0; a < rank; ++a) approx += w(i, a) * h(a, j);
      const double d = v(i, j) - approx;
      err += d * d;
    }
  }
  return err;
}

// Denominator zero implies the entry cannot affect the objective; keep it.
void multiplicative_step(double& value, double numer, double denom) {
  if (denom > 0.0) value *= numer / denom;
}

}  // namespace

ClusterAssignment kmeans(const Matrix& data, const KMeansParams& params) {
  check_cluster_count(data, params.k, "k");
  if (params.n_init < 1) throw ParameterError("n_init must be >= 1");
  if (params.max_iter < 1) throw ParameterError("max_iter must be >= 1");
  if (!(params.tol >= 0.0)) throw ParameterError("tol must be >= 0");

  ClusterAssignment best;
  best.algorithm = Algorithm::kmeans;
  best.k = params.k;
  best.objective = std::numeric_limits<double>::infinity();
  for (int restart = 0; restart < params.n_init; ++restart) {
    UniformSource rng(derive_seed(params.seed, static_cast<std::uint64_t>(restart)));
    LloydRun run = lloyd(data, params.k, params.max_iter, params.tol, rng);
    best.restart_objectives.push_back(run.inertia);
    if (run.inertia < best.objective) {
      best.objective = run.inertia;
      best.labels = std::move(run.labels);
      best.trace = std::move(run.trace);
      best.iterations = run.iterations;
    }
  }
  return best;
}

ClusterAssignment agglomerative(const Matrix& data, int k, Linkage linkage) {
  check_cluster_count(data, k, "k");
  const std::size_t n = data.rows();
  const bool squared = linkage == Linkage::ward;

  std::vector<double> dist(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d2 = squared_distance(data.row(i), data.row(j));
      dist[i * n + j] = dist[j * n + i] = squared ? d2 : std::sqrt(d2);
    }
  }

  std::vector<std::size_t> active(n);
  for (std::size_t i = 0; i < n; ++i) active[i] = i;
  std::vector<double> size(n, 1.0);
  std::vector<std::size_t> slot(n);
  for (std::size_t i = 0; i < n; ++i) slot[i] = i;

  ClusterAssignment out;
  out.algorithm = Algorithm::ahc;
  out.k = k;

  while (active.size() > static_cast<std::size_t>(k)) {
    // active is sorted, so the first strict minimum is the lowest (i, j) pair.
    std::size_t bi = 0;
    std::size_t bj = 1;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < active.size(); ++a) {
      const double* row = dist.data() + active[a] * n;
      for (std::size_t b = a + 1; b < active.size(); ++b) {
        if (row[active[b]] < best) {
          best = row[active[b]];
          bi = a;
          bj = b;
        }
      }
    }
    const std::size_t i = active[bi];
    const std::size_t j = active[bj];
    const double d_ij = dist[i * n + j];
    for (const std::size_t m : active) {
      if (m == i || m == j) continue;
      const double updated =
          lance_williams(linkage, dist[i * n + m], dist[j * n + m], d_ij, size[i], size[j], size[m]);
      dist[i * n + m] = dist[m * n + i] = updated;
    }
    size[i] += size[j];
    for (auto& s : slot) {
      if (s == j) s = i;
    }
    active.erase(active.begin() + static_cast<std::ptrdiff_t>(bj));

    const double height = squared ? std::sqrt(std::max(d_ij, 0.0)) : d_ij;
    out.trace.push_back(height);
    out.objective = height;
    ++out.iterations;
  }

  std::vector<int> relabel(n, -1);
  int next_label = 0;
  out.labels.resize(n);
  for (std::size_t r = 0; r < n; ++r) {
    auto& l = relabel[slot[r]];
    if (l < 0) l = next_label++;
    out.labels[r] = l;
  }
  return out;
}

ClusterAssignment nmf(const Matrix& data, const NmfParams& params, NmfFactors* factors) {
  const std::size_t n = data.rows();
  const std::size_t m = data.cols();
  if (params.rank < 1 || static_cast<std::size_t>(params.rank) > std::min(n, m)) {
    throw ParameterError("rank must be in [1, " + std::to_string(std::min(n, m)) + "], got " +
                         std::to_string(params.rank));
  }
  if (params.max_iter < 1) throw ParameterError("max_iter must be >= 1");
  if (!(params.tol >= 0.0)) throw ParameterError("tol must be >= 0");
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      if (data(i, j) < 0.0) {
        throw DomainError("NMF input has a negative cell at row " + std::to_string(i) +
                          ", column " + std::to_string(j));
      }
    }
  }

  const auto r = static_cast<std::size_t>(params.rank);
  UniformSource rng(params.seed);
  Matrix w(n, r);
  Matrix h(r, m);
  for (auto& v : w.values()) v = rng.next_open_low();
  for (auto& v : h.values()) v = rng.next_open_low();

  ClusterAssignment out;
  out.algorithm = Algorithm::nmf;
  out.k = params.rank;
  double prev = reconstruction_error(data, w, h);
  out.trace.push_back(prev);

  Matrix wtv(r, m), wtw(r, r), vht(n, r), hht(r, r);
  std::vector<double> row_denom(r);
  for (int it = 0; it < params.max_iter; ++it) {
    // H <- H * (W'V) / (W'WH)
    for (std::size_t a = 0; a < r; ++a) {
      for (std::size_t j = 0; j < m; ++j) {
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) acc += w(i, a) * data(i, j);
        wtv(a, j) = acc;
      }
      for (std::size_t b = 0; b < r; ++b) {
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) acc += w(i, a) * w(i, b);
        wtw(a, b) = acc;
      }
    }
    for (std::size_t a = 0; a < r; ++a) {
      for (std::size_t j = 0; j < m; ++j) {
        double denom = 0.0;
        for (std::size_t b = 0; b < r; ++b) denom += wtw(a, b) * h(b, j);
        multiplicative_step(h(a, j), wtv(a, j), denom);
      }
    }

    // W <- W * (VH') / (WHH')
    for (std::size_t a = 0; a < r; ++a) {
      for (std::size_t b = 0; b < r; ++b) {
        double acc = 0.0;
        for (std::size_t j = 0; j < m; ++j) acc += h(a, j) * h(b, j);
        hht(a, b) = acc;
      }
    }
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t a = 0; a < r; ++a) {
        double acc = 0.0;
        for (std::size_t j = 0; j < m; ++j) acc += data(i, j) * h(a, j);
        vht(i, a) = acc;
      }
    }
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t a = 0; a < r; ++a) {
        double acc = 0.0;
        for (std::size_t b = 0; b < r; ++b) acc += w(i, b) * hht(b, a);
        row_denom[a] = acc;
      }
      for (std::size_t a = 0; a < r; ++a) multiplicative_step(w(i, a), vht(i, a), row_denom[a]);
    }

    const double err = reconstruction_error(data, w, h);
    out.trace.push_back(err);
    out.iterations = it + 1;
    const bool stop = prev <= 0.0 || (prev - err) / prev <= params.tol;
    prev = err;
    if (stop) break;
  }
  out.objective = prev;

  out.labels.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = w.row(i);
    out.labels[i] = static_cast<int>(std::max_element(row.begin(), row.end()) - row.begin());
  }
  if (factors != nullptr) *factors = NmfFactors{std::move(w), std::move(h)};
  return out;
}

}  // namespace clustertune
