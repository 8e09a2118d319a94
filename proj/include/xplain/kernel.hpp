#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include <Eigen/Core>

#include "xplain/explanation.hpp"

namespace xplain {

/// ξ = (x, z, y): context, explanation, label. `features` caches
/// vectorize(explanation) so real-valued explanation kernels do not redo it.
struct Triple {
  Eigen::VectorXd instance;
  Explanation explanation;
  Eigen::VectorXd features;
  int label = 0;
};

Triple make_triple(Eigen::VectorXd instance, Explanation explanation, int label,
                   const ConditionVocabulary* vocabulary = nullptr);

/// Dimensions and variant that must agree across triples fed to one kernel.
struct TripleShape {
  Eigen::Index instance_dim = 0;
  Variant variant = Variant::Relevance;
  Eigen::Index explanation_dim = 0;
  friend bool operator==(const TripleShape&, const TripleShape&) = default;
};

TripleShape shape_of(const Triple& t);

// Base kernels -------------------------------------------------------------

double eval_rbf(std::span<const double> u, std::span<const double> v, double gamma);
double eval_linear(std::span<const double> u, std::span<const double> v);
double eval_kendall(std::span<const int> a, std::span<const int> b);

template <class T>
double eval_set_jaccard(const std::vector<T>& a, const std::vector<T>& b) {
  return jaccard(a, b);
}

// Kernel expressions --------------------------------------------------------

enum class Part { Instance = 1, Explanation = 2, Label = 4 };
enum class BaseKind { Rbf, Linear, Jaccard, Kendall };

std::string part_name(Part p);

/// Immutable expression tree of base kernels over parts of a triple,
/// combined by direct sum and tensor product. Cheap to copy.
class KernelExpr {
 public:
  /// `gamma` unset means 1/d, d the dimension of the selected vectors.
  static KernelExpr rbf(Part part, std::optional<double> gamma = std::nullopt);
  static KernelExpr linear(Part part);
  /// Set kernel on relevance masks (set of active features) or trace conditions.
  static KernelExpr jaccard();
  /// Kendall similarity on ranking explanations.
  static KernelExpr kendall();

  double operator()(const Triple& a, const Triple& b) const;

  /// Bitmask of Part values selected by the leaves.
  unsigned parts() const;
  std::string to_string() const;

  struct Node;

 private:
  friend KernelExpr compose_sum(const KernelExpr&, const KernelExpr&);
  friend KernelExpr compose_product(const KernelExpr&, const KernelExpr&);
  explicit KernelExpr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  std::shared_ptr<const Node> node_;
};

/// Direct sum. Throws InputError when the operands share a part.
KernelExpr compose_sum(const KernelExpr& k, const KernelExpr& k2);
/// Tensor product. Throws InputError when the operands share a part.
KernelExpr compose_product(const KernelExpr& k, const KernelExpr& k2);

/// k_X ⊗ k_Z ⊗ k_Y with RBF leaves.
KernelExpr prod_kernel();
/// (k_X ⊕ k_Z) ⊗ k_Y with RBF leaves.
KernelExpr sum_kernel();

/// Parses e.g. "product(sum(rbf@instance, rbf@explanation[gamma=0.5]), rbf@label)".
/// `product`/`sum` accept two or more arguments and fold left.
/// Throws InputError with the offending position on malformed input.
KernelExpr parse_kernel(std::string_view text);

/// Entry (i, j) = kernel(triples[i], triples[j]). Throws InputError on an
/// empty list or mixed explanation variants.
Eigen::MatrixXd gram(const KernelExpr& kernel, std::span<const Triple> triples);

}  // namespace xplain
