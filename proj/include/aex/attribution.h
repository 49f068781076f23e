#ifndef AEX_ATTRIBUTION_H_
#define AEX_ATTRIBUTION_H_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>

#include "aex/dataset.h"
#include "json.hpp"

namespace aex {

// A deterministic scalar function of a full feature vector, evaluated in
// batches (one output per row).
class ScalarTarget {
 public:
  using BatchFn = std::function<Vector(const Matrix&)>;
  using PointFn = std::function<double(const Vector&)>;

  ScalarTarget(std::size_t arity, BatchFn batch);
  static ScalarTarget from_point(std::size_t arity, PointFn fn);

  std::size_t arity() const { return arity_; }
  double operator()(const Vector& x) const;
  Vector evaluate(const Matrix& rows) const;

 private:
  std::size_t arity_;
  BatchFn batch_;
};

// Target index used when the attribution explains the total reconstruction
// error instead of one output feature.
inline constexpr std::ptrdiff_t kTotalErrorTarget = -1;

struct Attribution {
  Vector phi;
  double base = 0;
  // Output feature being explained, or kTotalErrorTarget.
  std::ptrdiff_t target_feature = kTotalErrorTarget;
  std::size_t n_samples_used = 0;
  // Target value at the explained instance.
  double target_value = 0;
};

void to_json(nlohmann::json& j, const Attribution& a);

struct ShapConfig {
  // Number of coalitions; nullopt picks exhaustive enumeration for arity <=
  // 13 and 2 * arity + 2048 sampled coalitions otherwise.
  std::optional<std::size_t> n_coalitions;
  bool exhaustive = false;
  std::uint64_t seed = 0;
  double regularization = 0;
};

struct LimeConfig {
  std::size_t n_samples = 5000;
  // Kernel width; nullopt means 0.75 * sqrt(arity).
  std::optional<double> kernel_width;
  double ridge = 1.0;
  std::uint64_t seed = 0;
};

// Shapley kernel (M - 1) / (C(M, s) * s * (M - s)), 0 < s < M.
double shapley_kernel_weight(std::size_t M, std::size_t s);

// Feature j from x where the coalition bit is set, from `background` otherwise.
Vector mask_instance(const Vector& x, const std::vector<bool>& coalition, const Vector& background);

// Kernel SHAP with background-substitution masking. Features whose value in
// x equals every background row get phi = 0 and are left out of the game.
Attribution kernel_shap(const ScalarTarget& t, const Vector& x, const BackgroundSet& bg,
                        const ShapConfig& cfg = {});

// Several scalar outputs of one function: `batch` maps (rows x arity) to
// (rows x n_outputs).
struct MultiTarget {
  using BatchFn = std::function<Matrix(const Matrix&)>;
  std::size_t arity = 0;
  std::size_t n_outputs = 0;
  BatchFn batch;
};

// kernel_shap of every output over one shared coalition design, so each
// masked row is evaluated once. Result k equals kernel_shap on output k with
// the same config.
std::vector<Attribution> kernel_shap_multi(const MultiTarget& t, const Vector& x, const BackgroundSet& bg,
                                           const ShapConfig& cfg = {});

// Called with every Kernel SHAP result before it is returned; empty by
// default. Not synchronized: install it before any attribution work starts.
using KernelShapObserver = std::function<void(const Attribution&)>;
void set_kernel_shap_observer(KernelShapObserver fn);

// Brute-force Shapley values of the background-averaged masking game.
// Arity at most 15.
Vector exact_shapley(const ScalarTarget& t, const Vector& x, const BackgroundSet& bg);

// LIME-style surrogate: Gaussian perturbations around x scaled by the
// background standard deviation, exponential proximity kernel, weighted
// ridge fit. phi_j = slope_j * (x_j - background mean_j), base = surrogate
// value at the background mean.
Attribution lime_explain(const ScalarTarget& t, const Vector& x, const BackgroundSet& bg,
                         const LimeConfig& cfg = {});

// The fitted surrogate behind lime_explain: value(z) = intercept +
// slopes . (z - background_mean), slopes in raw feature units.
struct LimeSurrogate {
  double intercept = 0;
  Vector slopes;
  Vector background_mean;
  double target_value = 0;
  std::size_t n_samples = 0;
};
LimeSurrogate lime_surrogate(const ScalarTarget& t, const Vector& x, const BackgroundSet& bg,
                             const LimeConfig& cfg = {});

// argmin_b sum_i w_i (y_i - design_i . b)^2 + ridge * |b|^2 via Cholesky of
// the normal equations. Throws NumericalError when not positive definite.
Vector weighted_least_squares(const Matrix& design, const Vector& y, const Vector& w, double ridge);

}  // namespace aex

#endif  // AEX_ATTRIBUTION_H_
