#include "xplain/kernel.hpp"

#include <cctype>
#include <cmath>
#include <variant>

#include "xplain/error.hpp"
#include "xplain/format.hpp"

namespace xplain {

Triple make_triple(Eigen::VectorXd instance, Explanation explanation, int label,
                   const ConditionVocabulary* vocabulary) {
  Triple t;
  t.features = vectorize(explanation, vocabulary);
  t.instance = std::move(instance);
  t.explanation = std::move(explanation);
  t.label = label;
  return t;
}

TripleShape shape_of(const Triple& t) {
  return {t.instance.size(), variant_of(t.explanation), t.features.size()};
}

double eval_rbf(std::span<const double> u, std::span<const double> v, double gamma) {
  if (u.size() != v.size()) throw InputError("rbf kernel: dimension mismatch");
  if (!(gamma > 0.0)) throw InputError("rbf kernel: gamma must be positive");
  double d2 = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double diff = u[i] - v[i];
    d2 += diff * diff;
  }
  return std::exp(-gamma * d2);
}

double eval_linear(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) throw InputError("linear kernel: dimension mismatch");
  double dot = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) dot += u[i] * v[i];
  return dot;
}

double eval_kendall(std::span<const int> a, std::span<const int> b) {
  return kendall_similarity(a, b);
}

std::string part_name(Part p) {
  switch (p) {
    case Part::Instance: return "instance";
    case Part::Explanation: return "explanation";
    case Part::Label: return "label";
  }
  return "?";
}

// ---------------------------------------------------------------------------

struct KernelExpr::Node {
  struct Leaf {
    BaseKind kind;
    Part part;
    std::optional<double> gamma;
  };
  struct Composite {
    bool sum;
    std::shared_ptr<const Node> lhs;
    std::shared_ptr<const Node> rhs;
  };

  std::variant<Leaf, Composite> body;
  unsigned parts = 0;

  double eval(const Triple& a, const Triple& b) const;
  std::string str() const;
};

namespace {

std::span<const double> view(const Eigen::VectorXd& v) {
  return {v.data(), static_cast<std::size_t>(v.size())};
}

double eval_leaf(const KernelExpr::Node::Leaf& leaf, const Triple& a, const Triple& b) {
  switch (leaf.part) {
    case Part::Instance:
    case Part::Explanation: {
      if (leaf.part == Part::Explanation && (leaf.kind == BaseKind::Jaccard || leaf.kind == BaseKind::Kendall)) {
        if (leaf.kind == BaseKind::Kendall) {
          const auto* ra = std::get_if<Ranking>(&a.explanation);
          const auto* rb = std::get_if<Ranking>(&b.explanation);
          if (ra == nullptr || rb == nullptr) throw InputError("kendall kernel: needs rankings");
          return eval_kendall(ra->positions, rb->positions);
        }
        if (const auto* ta = std::get_if<Trace>(&a.explanation)) {
          const auto* tb = std::get_if<Trace>(&b.explanation);
          if (tb == nullptr) throw InputError("jaccard kernel: mixed explanation variants");
          return eval_set_jaccard(ta->conditions, tb->conditions);
        }
        const auto* ra = std::get_if<Relevance>(&a.explanation);
        const auto* rb = std::get_if<Relevance>(&b.explanation);
        if (ra == nullptr || rb == nullptr) {
          throw InputError("jaccard kernel: needs relevance or trace explanations");
        }
        if (ra->mask.size() != rb->mask.size()) throw InputError("jaccard kernel: dimension mismatch");
        std::size_t common = 0, either = 0;
        for (std::size_t i = 0; i < ra->mask.size(); ++i) {
          common += ra->mask[i] && rb->mask[i];
          either += ra->mask[i] || rb->mask[i];
        }
        return either == 0 ? 1.0 : static_cast<double>(common) / static_cast<double>(either);
      }
      const auto& u = leaf.part == Part::Instance ? a.instance : a.features;
      const auto& v = leaf.part == Part::Instance ? b.instance : b.features;
      if (leaf.kind == BaseKind::Linear) return eval_linear(view(u), view(v));
      const double gamma = leaf.gamma ? *leaf.gamma : 1.0 / static_cast<double>(std::max<Eigen::Index>(u.size(), 1));
      return eval_rbf(view(u), view(v), gamma);
    }
    case Part::Label: {
      const double ya = a.label, yb = b.label;
      if (leaf.kind == BaseKind::Linear) return ya * yb;
      const double gamma = leaf.gamma.value_or(1.0);
      return std::exp(-gamma * (ya - yb) * (ya - yb));
    }
  }
  throw InputError("unknown kernel part");
}

}  // namespace

double KernelExpr::Node::eval(const Triple& a, const Triple& b) const {
  if (const auto* leaf = std::get_if<Leaf>(&body)) return eval_leaf(*leaf, a, b);
  const auto& c = std::get<Composite>(body);
  const double l = c.lhs->eval(a, b);
  const double r = c.rhs->eval(a, b);
  return c.sum ? l + r : l * r;
}

std::string KernelExpr::Node::str() const {
  if (const auto* leaf = std::get_if<Leaf>(&body)) {
    static const char* kinds[] = {"rbf", "linear", "jaccard", "kendall"};
    std::string s = std::string(kinds[static_cast<int>(leaf->kind)]) + "@" + part_name(leaf->part);
    if (leaf->gamma) s += "[gamma=" + format_double(*leaf->gamma) + "]";
    return s;
  }
  const auto& c = std::get<Composite>(body);
  return std::string(c.sum ? "sum(" : "product(") + c.lhs->str() + ", " + c.rhs->str() + ")";
}

namespace {

std::shared_ptr<const KernelExpr::Node> make_leaf(BaseKind kind, Part part, std::optional<double> gamma) {
  if (gamma && !(*gamma > 0.0 && std::isfinite(*gamma))) {
    throw InputError("kernel gamma must be positive and finite");
  }
  if ((kind == BaseKind::Jaccard || kind == BaseKind::Kendall) && part != Part::Explanation) {
    throw InputError("set and Kendall kernels apply to explanations only");
  }
  auto node = std::make_shared<KernelExpr::Node>();
  node->body = KernelExpr::Node::Leaf{kind, part, gamma};
  node->parts = static_cast<unsigned>(part);
  return node;
}

}  // namespace

KernelExpr KernelExpr::rbf(Part part, std::optional<double> gamma) {
  return KernelExpr(make_leaf(BaseKind::Rbf, part, gamma));
}
KernelExpr KernelExpr::linear(Part part) { return KernelExpr(make_leaf(BaseKind::Linear, part, {})); }
KernelExpr KernelExpr::jaccard() { return KernelExpr(make_leaf(BaseKind::Jaccard, Part::Explanation, {})); }
KernelExpr KernelExpr::kendall() { return KernelExpr(make_leaf(BaseKind::Kendall, Part::Explanation, {})); }

double KernelExpr::operator()(const Triple& a, const Triple& b) const { return node_->eval(a, b); }
unsigned KernelExpr::parts() const { return node_->parts; }
std::string KernelExpr::to_string() const { return node_->str(); }

namespace {

KernelExpr::Node combine(const KernelExpr::Node& l, const KernelExpr::Node& r, bool sum,
                         std::shared_ptr<const KernelExpr::Node> lp,
                         std::shared_ptr<const KernelExpr::Node> rp) {
  if ((l.parts & r.parts) != 0) {
    throw InputError(std::string(sum ? "direct sum" : "tensor product") +
                     ": operands select overlapping parts of the triple");
  }
  KernelExpr::Node node;
  node.body = KernelExpr::Node::Composite{sum, std::move(lp), std::move(rp)};
  node.parts = l.parts | r.parts;
  return node;
}

}  // namespace

KernelExpr compose_sum(const KernelExpr& k, const KernelExpr& k2) {
  return KernelExpr(std::make_shared<const KernelExpr::Node>(combine(*k.node_, *k2.node_, true, k.node_, k2.node_)));
}

KernelExpr compose_product(const KernelExpr& k, const KernelExpr& k2) {
  return KernelExpr(std::make_shared<const KernelExpr::Node>(combine(*k.node_, *k2.node_, false, k.node_, k2.node_)));
}

KernelExpr prod_kernel() {
  return compose_product(compose_product(KernelExpr::rbf(Part::Instance), KernelExpr::rbf(Part::Explanation)),
                         KernelExpr::rbf(Part::Label));
}

KernelExpr sum_kernel() {
  return compose_product(compose_sum(KernelExpr::rbf(Part::Instance), KernelExpr::rbf(Part::Explanation)),
                         KernelExpr::rbf(Part::Label));
}

// ---------------------------------------------------------------------------
// Expression grammar

namespace {

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  KernelExpr parse() {
    KernelExpr e = expr();
    skip_ws();
    if (pos_ != text_.size()) fail("trailing input");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw InputError("kernel expression '" + std::string(text_) + "': " + what + " at offset " +
                     std::to_string(pos_));
  }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) fail(std::string("expected '") + c + "'");
  }

  std::string ident() {
    skip_ws();
    const auto start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
      ++pos_;
    }
    if (start == pos_) fail("expected a name");
    return std::string(text_.substr(start, pos_ - start));
  }

  double number() {
    skip_ws();
    const auto start = pos_;
    while (pos_ < text_.size() && (std::isdigit(static_cast<unsigned char>(text_[pos_])) ||
                                   std::string_view(".eE+-").find(text_[pos_]) != std::string_view::npos)) {
      ++pos_;
    }
    try {
      return parse_double(text_.substr(start, pos_ - start), "gamma");
    } catch (const InputError&) {
      fail("expected a number");
    }
  }

  KernelExpr expr() {
    const std::string name = ident();
    if (name == "sum" || name == "product") {
      expect('(');
      KernelExpr acc = expr();
      int args = 1;
      while (accept(',')) {
        KernelExpr next = expr();
        acc = name == "sum" ? compose_sum(acc, next) : compose_product(acc, next);
        ++args;
      }
      expect(')');
      if (args < 2) fail(name + " needs at least two operands");
      return acc;
    }
    BaseKind kind;
    if (name == "rbf") kind = BaseKind::Rbf;
    else if (name == "linear") kind = BaseKind::Linear;
    else if (name == "jaccard") kind = BaseKind::Jaccard;
    else if (name == "kendall") kind = BaseKind::Kendall;
    else fail("unknown kernel '" + name + "'");
    expect('@');
    const std::string part_text = ident();
    Part part;
    if (part_text == "instance") part = Part::Instance;
    else if (part_text == "explanation") part = Part::Explanation;
    else if (part_text == "label") part = Part::Label;
    else fail("unknown part '" + part_text + "'");
    std::optional<double> gamma;
    if (accept('[')) {
      if (ident() != "gamma") fail("only 'gamma' is a recognised hyperparameter");
      expect('=');
      gamma = number();
      expect(']');
      if (kind != BaseKind::Rbf) fail("gamma applies to rbf leaves only");
    }
    switch (kind) {
      case BaseKind::Rbf: return KernelExpr::rbf(part, gamma);
      case BaseKind::Linear: return KernelExpr::linear(part);
      case BaseKind::Jaccard:
      case BaseKind::Kendall:
        if (part != Part::Explanation) fail(name + " applies to the explanation part only");
        return kind == BaseKind::Jaccard ? KernelExpr::jaccard() : KernelExpr::kendall();
    }
    fail("unreachable");
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace

KernelExpr parse_kernel(std::string_view text) { return Parser(text).parse(); }

Eigen::MatrixXd gram(const KernelExpr& kernel, std::span<const Triple> triples) {
  if (triples.empty()) throw InputError("gram: empty triple list");
  const auto variant = variant_of(triples.front().explanation);
  for (const auto& t : triples) {
    if (variant_of(t.explanation) != variant) throw InputError("gram: mixed explanation variants");
  }
  const auto n = static_cast<Eigen::Index>(triples.size());
  Eigen::MatrixXd k(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) {
      const double v = kernel(triples[static_cast<std::size_t>(i)], triples[static_cast<std::size_t>(j)]);
      k(i, j) = v;
      k(j, i) = v;
    }
  }
  return k;
}

}  // namespace xplain
