#include "aex/attribution.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <sstream>

#include "aex/errors.h"

namespace aex {

namespace {

// Rows per target evaluation when expanding coalitions over the background.
constexpr Eigen::Index kEvalChunkRows = 1 << 15;
constexpr std::size_t kDefaultExhaustiveArity = 13;
constexpr std::size_t kMaxExhaustiveArity = 20;
constexpr std::size_t kMaxExactArity = 15;
constexpr double kMaxRelativeRidge = 1e-3;

double binomial(std::size_t n, std::size_t k) {
  if (k > n) return 0.0;
  k = std::min(k, n - k);
  double r = 1.0;
  for (std::size_t i = 1; i <= k; ++i) {
    r = r * static_cast<double>(n - k + i) / static_cast<double>(i);
  }
  return r;
}

using Mask = std::vector<std::uint8_t>;

struct Coalition {
  Mask mask;  // over the varying features
  double weight;
};

// Background rows that differ on the absent columns, with multiplicities.
// Rows agreeing there produce identical masked rows.
struct DistinctRows {
  std::vector<Eigen::Index> rows;
  std::vector<double> counts;
};

DistinctRows distinct_on(const Matrix& bg, const std::vector<Eigen::Index>& absent) {
  std::vector<Eigen::Index> order(static_cast<std::size_t>(bg.rows()));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  auto less = [&](Eigen::Index a, Eigen::Index b) {
    for (Eigen::Index c : absent) {
      if (bg(a, c) != bg(b, c)) return bg(a, c) < bg(b, c);
    }
    return a < b;
  };
  std::sort(order.begin(), order.end(), less);
  DistinctRows out;
  for (Eigen::Index r : order) {
    const bool same = !out.rows.empty() && std::all_of(absent.begin(), absent.end(), [&](Eigen::Index c) {
      return bg(out.rows.back(), c) == bg(r, c);
    });
    if (same) {
      out.counts.back() += 1.0;
    } else {
      out.rows.push_back(r);
      out.counts.push_back(1.0);
    }
  }
  return out;
}

// Mean target values over the background for each coalition (one row per
// coalition, one column per output). Masked rows are evaluated in chunks so
// that large budgets never materialize at once.
Matrix coalition_values(const MultiTarget& t, const Vector& x, const Matrix& bg,
                        const std::vector<std::size_t>& varying, const std::vector<Coalition>& coalitions) {
  const auto n_out = static_cast<Eigen::Index>(t.n_outputs);
  const double nb = static_cast<double>(bg.rows());
  Matrix values(static_cast<Eigen::Index>(coalitions.size()), n_out);
  std::vector<DistinctRows> pending;
  std::size_t first = 0;
  Eigen::Index pending_rows = 0;
  auto flush = [&]() {
    if (pending.empty()) return;
    Matrix block(pending_rows, bg.cols());
    Eigen::Index offset = 0;
    for (std::size_t k = 0; k < pending.size(); ++k) {
      const Mask& mask = coalitions[first + k].mask;
      for (Eigen::Index r : pending[k].rows) {
        block.row(offset) = bg.row(r);
        for (std::size_t v = 0; v < varying.size(); ++v) {
          if (mask[v]) block(offset, static_cast<Eigen::Index>(varying[v])) = x[static_cast<Eigen::Index>(varying[v])];
        }
        ++offset;
      }
    }
    const Matrix y = t.batch(block);
    Require(y.rows() == block.rows() && y.cols() == n_out, "kernel_shap: batch function returned wrong shape");
    offset = 0;
    for (std::size_t k = 0; k < pending.size(); ++k) {
      Eigen::RowVectorXd acc = Eigen::RowVectorXd::Zero(n_out);
      for (double count : pending[k].counts) acc += count * y.row(offset++);
      values.row(static_cast<Eigen::Index>(first + k)) = acc / nb;
    }
    first += pending.size();
    pending.clear();
    pending_rows = 0;
  };
  std::vector<Eigen::Index> absent;
  for (const Coalition& c : coalitions) {
    absent.clear();
    for (std::size_t v = 0; v < varying.size(); ++v) {
      if (!c.mask[v]) absent.push_back(static_cast<Eigen::Index>(varying[v]));
    }
    pending.push_back(distinct_on(bg, absent));
    pending_rows += static_cast<Eigen::Index>(pending.back().rows.size());
    if (pending_rows >= kEvalChunkRows) flush();
  }
  flush();
  return values;
}

// Every non-empty proper subset, weighted by the Shapley kernel.
std::vector<Coalition> enumerate_coalitions(std::size_t M) {
  Require(M <= kMaxExhaustiveArity, "kernel_shap: exhaustive enumeration needs arity <= 20, got " +
                                        std::to_string(M));
  std::vector<Coalition> out;
  const std::uint64_t total = std::uint64_t{1} << M;
  out.reserve(static_cast<std::size_t>(total - 2));
  for (std::uint64_t bits = 1; bits + 1 < total; ++bits) {
    Mask mask(M);
    std::size_t s = 0;
    for (std::size_t j = 0; j < M; ++j) {
      mask[j] = static_cast<std::uint8_t>((bits >> j) & 1U);
      s += mask[j];
    }
    out.push_back({std::move(mask), shapley_kernel_weight(M, s)});
  }
  return out;
}

// Calls fn(mask) for every subset of {0..M-1} with exactly s members, in
// lexicographic order of member indices.
template <typename Fn>
void for_each_subset_of_size(std::size_t M, std::size_t s, Fn&& fn) {
  std::vector<std::size_t> idx(s);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  while (true) {
    Mask mask(M, 0);
    for (std::size_t i : idx) mask[i] = 1;
    fn(mask);
    std::size_t pos = s;
    while (pos > 0 && idx[pos - 1] == M - s + pos - 1) --pos;
    if (pos == 0) return;
    ++idx[pos - 1];
    for (std::size_t i = pos; i < s; ++i) idx[i] = idx[i - 1] + 1;
  }
}

// Budgeted coalition design: subset sizes (paired with their complements)
// whose full enumeration fits the remaining budget are enumerated with
// exact kernel weights, smallest first; the rest of the budget is spent on
// kernel-proportional random draws with complement pairing.
std::vector<Coalition> sample_coalitions(std::size_t M, std::size_t budget, std::uint64_t seed) {
  const std::size_t n_sizes = (M - 1 + 1) / 2;       // ceil((M - 1) / 2)
  const std::size_t n_paired_sizes = (M - 1) / 2;    // floor((M - 1) / 2)
  std::vector<double> size_weight(n_sizes);
  for (std::size_t i = 0; i < n_sizes; ++i) {
    const double s = static_cast<double>(i + 1);
    size_weight[i] = static_cast<double>(M - 1) / (s * (static_cast<double>(M) - s));
    if (i < n_paired_sizes) size_weight[i] *= 2.0;
  }
  const double weight_sum = std::accumulate(size_weight.begin(), size_weight.end(), 0.0);
  for (double& w : size_weight) w /= weight_sum;

  std::vector<Coalition> out;
  std::size_t n_full_sizes = 0;
  double samples_left = static_cast<double>(budget);
  std::vector<double> remaining = size_weight;
  for (std::size_t s = 1; s <= n_sizes; ++s) {
    const bool paired = s <= n_paired_sizes;
    double n_subsets = binomial(M, s) * (paired ? 2.0 : 1.0);
    if (samples_left * remaining[s - 1] / n_subsets < 1.0 - 1e-8) break;
    ++n_full_sizes;
    samples_left -= n_subsets;
    if (remaining[s - 1] < 1.0) {
      const double denom = 1.0 - remaining[s - 1];
      for (double& w : remaining) w /= denom;
    }
    double w = size_weight[s - 1] / binomial(M, s);
    if (paired) w /= 2.0;
    for_each_subset_of_size(M, s, [&](const Mask& mask) {
      out.push_back({mask, w});
      if (paired) {
        Mask complement(M);
        for (std::size_t j = 0; j < M; ++j) complement[j] = static_cast<std::uint8_t>(1 - mask[j]);
        out.push_back({std::move(complement), w});
      }
    });
  }
  const std::size_t n_fixed = out.size();
  auto left = static_cast<std::ptrdiff_t>(samples_left);
  if (n_full_sizes == n_sizes || left <= 0) return out;

  std::vector<double> draw_weight(size_weight.begin() + static_cast<std::ptrdiff_t>(n_full_sizes),
                                  size_weight.end());
  for (std::size_t i = 0; i < draw_weight.size(); ++i) {
    if (i + n_full_sizes < n_paired_sizes) draw_weight[i] /= 2.0;
  }
  std::mt19937_64 rng(seed);
  std::discrete_distribution<std::size_t> pick_size(draw_weight.begin(), draw_weight.end());
  std::map<Mask, std::size_t> seen;
  std::vector<std::size_t> perm(M);
  auto add = [&](Mask mask) {
    auto [it, inserted] = seen.try_emplace(mask, out.size());
    if (inserted) {
      out.push_back({std::move(mask), 1.0});
      --left;
    } else {
      out[it->second].weight += 1.0;
    }
  };
  std::size_t attempts = 4 * static_cast<std::size_t>(left);
  while (left > 0 && attempts-- > 0) {
    const std::size_t s = pick_size(rng) + n_full_sizes + 1;
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    Mask mask(M, 0);
    for (std::size_t i = 0; i < s; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, M - 1);
      std::swap(perm[i], perm[pick(rng)]);
      mask[perm[i]] = 1;
    }
    Mask complement(M);
    for (std::size_t j = 0; j < M; ++j) complement[j] = static_cast<std::uint8_t>(1 - mask[j]);
    add(std::move(mask));
    if (left > 0 && s <= n_paired_sizes) add(std::move(complement));
  }
  double sampled_total = 0;
  for (std::size_t i = n_fixed; i < out.size(); ++i) sampled_total += out[i].weight;
  const double weight_left =
      std::accumulate(size_weight.begin() + static_cast<std::ptrdiff_t>(n_full_sizes), size_weight.end(), 0.0);
  if (sampled_total > 0) {
    for (std::size_t i = n_fixed; i < out.size(); ++i) out[i].weight *= weight_left / sampled_total;
  }
  return out;
}

std::string condition_diagnostic(const Matrix& design, const Vector& w) {
  Matrix gram = design.transpose() * w.asDiagonal() * design;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(gram, Eigen::EigenvaluesOnly);
  std::ostringstream os;
  if (eig.info() == Eigen::Success && eig.eigenvalues().size() > 0) {
    os << "eigenvalues of the weighted normal matrix span [" << eig.eigenvalues().minCoeff()
       << ", " << eig.eigenvalues().maxCoeff() << "]";
  } else {
    os << "eigen decomposition of the normal matrix failed";
  }
  return os.str();
}

}  // namespace

ScalarTarget::ScalarTarget(std::size_t arity, BatchFn batch) : arity_(arity), batch_(std::move(batch)) {
  Require(arity_ >= 1, "scalar target: arity must be >= 1");
  Require(static_cast<bool>(batch_), "scalar target: empty function");
}

ScalarTarget ScalarTarget::from_point(std::size_t arity, PointFn fn) {
  return ScalarTarget(arity, [fn = std::move(fn)](const Matrix& rows) {
    Vector out(rows.rows());
    for (Eigen::Index i = 0; i < rows.rows(); ++i) out[i] = fn(rows.row(i).transpose());
    return out;
  });
}

double ScalarTarget::operator()(const Vector& x) const {
  Require(static_cast<std::size_t>(x.size()) == arity_, "scalar target: width mismatch");
  Matrix one(1, x.size());
  one.row(0) = x.transpose();
  return batch_(one)[0];
}

Vector ScalarTarget::evaluate(const Matrix& rows) const {
  Require(static_cast<std::size_t>(rows.cols()) == arity_, "scalar target: width mismatch");
  Vector y = batch_(rows);
  Require(y.size() == rows.rows(), "scalar target: batch function returned wrong length");
  return y;
}

void to_json(nlohmann::json& j, const Attribution& a) {
  j = nlohmann::json{
      {"target", a.target_feature == kTotalErrorTarget ? nlohmann::json("TOTAL")
                                                       : nlohmann::json(a.target_feature)},
      {"base", a.base},
      {"phi", std::vector<double>(a.phi.data(), a.phi.data() + a.phi.size())},
      {"n_samples", a.n_samples_used}};
}

double shapley_kernel_weight(std::size_t M, std::size_t s) {
  Require(s > 0 && s < M, "shapley_kernel_weight: coalition size must lie strictly between 0 and M");
  return static_cast<double>(M - 1) /
         (binomial(M, s) * static_cast<double>(s) * static_cast<double>(M - s));
}

Vector mask_instance(const Vector& x, const std::vector<bool>& coalition, const Vector& background) {
  Require(x.size() == background.size() && static_cast<std::size_t>(x.size()) == coalition.size(),
          "mask_instance: width mismatch");
  Vector out = background;
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    if (coalition[static_cast<std::size_t>(j)]) out[j] = x[j];
  }
  return out;
}

Vector weighted_least_squares(const Matrix& design, const Vector& y, const Vector& w, double ridge) {
  Require(design.rows() == y.size() && y.size() == w.size(),
          "weighted_least_squares: inconsistent dimensions");
  Require(ridge >= 0, "weighted_least_squares: ridge must be >= 0");
  Require((w.array() >= 0).all(), "weighted_least_squares: negative weight");
  Matrix normal = design.transpose() * w.asDiagonal() * design;
  normal.diagonal().array() += ridge;
  const Vector rhs = design.transpose() * w.asDiagonal() * y;
  Eigen::LLT<Matrix> llt(normal);
  if (llt.info() != Eigen::Success) {
    throw NumericalError("weighted_least_squares: normal matrix not positive definite (" +
                         condition_diagnostic(design, w) + ", ridge " + format_double(ridge) + ")");
  }
  Vector beta = llt.solve(rhs);
  if (!beta.allFinite()) {
    throw NumericalError("weighted_least_squares: non-finite solution (" +
                         condition_diagnostic(design, w) + ")");
  }
  return beta;
}

namespace {

KernelShapObserver& observer() {
  static KernelShapObserver fn;
  return fn;
}

std::vector<Attribution> kernel_shap_multi_impl(const MultiTarget& t, const Vector& x, const BackgroundSet& bg,
                                                const ShapConfig& cfg) {
  const std::size_t arity = t.arity;
  Require(arity >= 1 && t.n_outputs >= 1 && static_cast<bool>(t.batch), "kernel_shap: empty target");
  Require(static_cast<std::size_t>(x.size()) == arity, "kernel_shap: instance width mismatch");
  Require(bg.size() >= 1, "kernel_shap: empty background");
  Require(bg.n_features() == arity, "kernel_shap: background width mismatch");
  Require(cfg.regularization >= 0, "kernel_shap: regularization must be >= 0");
  const auto n_out = static_cast<Eigen::Index>(t.n_outputs);

  Matrix at_x(1, x.size());
  at_x.row(0) = x.transpose();
  const Matrix fx = t.batch(at_x);
  const Matrix fb = t.batch(bg.rows);
  Require(fx.rows() == 1 && fx.cols() == n_out && fb.rows() == bg.rows.rows() && fb.cols() == n_out,
          "kernel_shap: batch function returned wrong shape");
  const Eigen::RowVectorXd base = fb.colwise().mean();

  std::vector<Attribution> out(t.n_outputs);
  for (Eigen::Index k = 0; k < n_out; ++k) {
    out[static_cast<std::size_t>(k)].phi = Vector::Zero(static_cast<Eigen::Index>(arity));
    out[static_cast<std::size_t>(k)].target_value = fx(0, k);
    out[static_cast<std::size_t>(k)].base = base[k];
  }

  std::vector<std::size_t> varying;
  for (std::size_t j = 0; j < arity; ++j) {
    const auto col = static_cast<Eigen::Index>(j);
    if ((bg.rows.col(col).array() != x[col]).any()) varying.push_back(j);
  }
  const std::size_t M = varying.size();
  if (M == 0) return out;
  if (M == 1) {
    for (auto& a : out) a.phi[static_cast<Eigen::Index>(varying[0])] = a.target_value - a.base;
    return out;
  }

  std::vector<Coalition> coalitions;
  const bool exhaustive = cfg.exhaustive || (!cfg.n_coalitions && M <= kDefaultExhaustiveArity);
  if (exhaustive) {
    coalitions = enumerate_coalitions(M);
  } else {
    const std::size_t budget = cfg.n_coalitions.value_or(2 * M + 2048);
    Require(budget >= 1, "kernel_shap: coalition budget must be >= 1");
    const bool fits = M < 63 && static_cast<double>(budget) >= std::ldexp(1.0, static_cast<int>(M)) - 2;
    coalitions = fits ? enumerate_coalitions(M) : sample_coalitions(M, budget, cfg.seed);
  }
  for (auto& a : out) a.n_samples_used = coalitions.size();

  const Matrix values = coalition_values(t, x, bg.rows, varying, coalitions);

  // Eliminate the last varying feature through the efficiency constraint
  // sum(phi) = f(x) - base, leaving an unconstrained weighted regression.
  const auto n = static_cast<Eigen::Index>(coalitions.size());
  const auto p = static_cast<Eigen::Index>(M - 1);
  Matrix design(n, p);
  Vector last(n);
  Vector w(n);
  for (Eigen::Index r = 0; r < n; ++r) {
    const Mask& mask = coalitions[static_cast<std::size_t>(r)].mask;
    last[r] = mask[M - 1];
    for (Eigen::Index j = 0; j < p; ++j) design(r, j) = mask[static_cast<std::size_t>(j)] - last[r];
    w[r] = coalitions[static_cast<std::size_t>(r)].weight;
  }
  w /= w.sum();
  const Matrix gram = design.transpose() * w.asDiagonal() * design;
  const double scale = std::max(gram.diagonal().mean(), 1e-300);

  for (Eigen::Index k = 0; k < n_out; ++k) {
    Attribution& a = out[static_cast<std::size_t>(k)];
    const double gap = a.target_value - a.base;
    const Vector y = (values.col(k).array() - a.base).matrix() - last * gap;
    Vector beta;
    for (double relative = cfg.regularization;; relative = relative == 0 ? 1e-12 : relative * 100) {
      try {
        beta = weighted_least_squares(design, y, w, relative * scale);
        break;
      } catch (const NumericalError& e) {
        if (relative >= kMaxRelativeRidge) {
          throw NumericalError(std::string("kernel_shap: singular coalition system after regularization: ") +
                               e.what());
        }
      }
    }
    double assigned = 0;
    for (Eigen::Index j = 0; j < p; ++j) {
      a.phi[static_cast<Eigen::Index>(varying[static_cast<std::size_t>(j)])] = beta[j];
      assigned += beta[j];
    }
    a.phi[static_cast<Eigen::Index>(varying[M - 1])] = gap - assigned;
  }
  return out;
}

}  // namespace

void set_kernel_shap_observer(KernelShapObserver fn) { observer() = std::move(fn); }

std::vector<Attribution> kernel_shap_multi(const MultiTarget& t, const Vector& x, const BackgroundSet& bg,
                                           const ShapConfig& cfg) {
  std::vector<Attribution> out = kernel_shap_multi_impl(t, x, bg, cfg);
  if (observer()) {
    for (const auto& a : out) observer()(a);
  }
  return out;
}

Attribution kernel_shap(const ScalarTarget& t, const Vector& x, const BackgroundSet& bg,
                        const ShapConfig& cfg) {
  const MultiTarget multi{t.arity(), 1, [&t](const Matrix& rows) -> Matrix { return t.evaluate(rows); }};
  return std::move(kernel_shap_multi(multi, x, bg, cfg).front());
}

Vector exact_shapley(const ScalarTarget& t, const Vector& x, const BackgroundSet& bg) {
  const std::size_t M = t.arity();
  Require(M <= kMaxExactArity, "exact_shapley: arity " + std::to_string(M) + " exceeds 15");
  Require(static_cast<std::size_t>(x.size()) == M, "exact_shapley: instance width mismatch");
  Require(bg.size() >= 1 && bg.n_features() == M, "exact_shapley: background width mismatch");

  const std::uint64_t n_subsets = std::uint64_t{1} << M;
  Vector value(static_cast<Eigen::Index>(n_subsets));
  Matrix masked(bg.rows.rows(), bg.rows.cols());
  for (std::uint64_t s = 0; s < n_subsets; ++s) {
    masked = bg.rows;
    for (std::size_t j = 0; j < M; ++j) {
      if ((s >> j) & 1U) masked.col(static_cast<Eigen::Index>(j)).setConstant(x[static_cast<Eigen::Index>(j)]);
    }
    value[static_cast<Eigen::Index>(s)] = t.evaluate(masked).mean();
  }

  // |S|! (M - |S| - 1)! / M!
  std::vector<double> subset_weight(M);
  for (std::size_t s = 0; s < M; ++s) subset_weight[s] = 1.0 / (static_cast<double>(M) * binomial(M - 1, s));

  Vector phi = Vector::Zero(static_cast<Eigen::Index>(M));
  for (std::size_t j = 0; j < M; ++j) {
    const std::uint64_t bit = std::uint64_t{1} << j;
    double acc = 0;
    for (std::uint64_t s = 0; s < n_subsets; ++s) {
      if (s & bit) continue;
      const auto size = static_cast<std::size_t>(std::popcount(s));
      acc += subset_weight[size] *
             (value[static_cast<Eigen::Index>(s | bit)] - value[static_cast<Eigen::Index>(s)]);
    }
    phi[static_cast<Eigen::Index>(j)] = acc;
  }
  return phi;
}

LimeSurrogate lime_surrogate(const ScalarTarget& t, const Vector& x, const BackgroundSet& bg,
                             const LimeConfig& cfg) {
  const std::size_t arity = t.arity();
  Require(static_cast<std::size_t>(x.size()) == arity, "lime_explain: instance width mismatch");
  Require(bg.size() >= 1 && bg.n_features() == arity, "lime_explain: background width mismatch");
  Require(cfg.n_samples >= 2, "lime_explain: need at least 2 samples");
  Require(cfg.ridge >= 0, "lime_explain: ridge must be >= 0");

  const Vector mean = bg.rows.colwise().mean().transpose();
  const Vector sd = ((bg.rows.rowwise() - mean.transpose()).array().square().colwise().mean().sqrt())
                        .matrix()
                        .transpose();
  std::vector<std::size_t> active;
  for (std::size_t j = 0; j < arity; ++j) {
    if (sd[static_cast<Eigen::Index>(j)] > 0) active.push_back(j);
  }
  const double width = cfg.kernel_width.value_or(0.75 * std::sqrt(static_cast<double>(arity)));
  Require(width > 0, "lime_explain: kernel width must be > 0");

  const auto n = static_cast<Eigen::Index>(cfg.n_samples);
  const auto p = static_cast<Eigen::Index>(active.size());
  Matrix samples = x.transpose().replicate(n, 1);
  Matrix standardized = Matrix::Zero(n, p);  // (z - mean) / sd
  Vector weights(n);
  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (Eigen::Index i = 0; i < n; ++i) {
    double dist2 = 0;
    for (Eigen::Index k = 0; k < p; ++k) {
      const auto j = static_cast<Eigen::Index>(active[static_cast<std::size_t>(k)]);
      // The first sample is the instance itself.
      const double eps = i == 0 ? 0.0 : normal(rng);
      samples(i, j) = x[j] + eps * sd[j];
      standardized(i, k) = (samples(i, j) - mean[j]) / sd[j];
      dist2 += eps * eps;
    }
    weights[i] = std::exp(-dist2 / (width * width));
  }
  const Vector y = t.evaluate(samples);

  LimeSurrogate out;
  out.slopes = Vector::Zero(static_cast<Eigen::Index>(arity));
  out.background_mean = mean;
  out.target_value = y[0];
  out.n_samples = cfg.n_samples;
  const double wsum = weights.sum();
  const double y_bar = weights.dot(y) / wsum;
  if (p == 0) {
    out.intercept = y_bar;
    return out;
  }
  // Centering by the weighted means leaves the intercept unpenalized.
  const Vector col_bar = (standardized.transpose() * weights) / wsum;
  const Matrix centered = standardized.rowwise() - col_bar.transpose();
  const Vector gamma = weighted_least_squares(centered, (y.array() - y_bar).matrix(), weights, cfg.ridge);
  out.intercept = y_bar - col_bar.dot(gamma);
  for (Eigen::Index k = 0; k < p; ++k) {
    const auto j = static_cast<Eigen::Index>(active[static_cast<std::size_t>(k)]);
    out.slopes[j] = gamma[k] / sd[j];
  }
  return out;
}

Attribution lime_explain(const ScalarTarget& t, const Vector& x, const BackgroundSet& bg,
                         const LimeConfig& cfg) {
  const LimeSurrogate fit = lime_surrogate(t, x, bg, cfg);
  Attribution out;
  out.phi = fit.slopes.cwiseProduct(x - fit.background_mean);
  out.base = fit.intercept;
  out.target_value = fit.target_value;
  out.n_samples_used = fit.n_samples;
  return out;
}

}  // namespace aex
