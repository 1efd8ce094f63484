#include "thermoform/cocycle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace thermoform {

MatrixCocycle::MatrixCocycle(std::vector<Eigen::MatrixXd> matrices) : matrices_(std::move(matrices)) {
  if (matrices_.size() < 2) throw InvalidArgument("cocycle needs one matrix per symbol (at least two)");
  dimension_ = static_cast<std::size_t>(matrices_.front().rows());
  if (dimension_ == 0) throw InvalidArgument("matrix dimension must be >= 1");
  bool any_nonzero = false;
  for (const auto& m : matrices_) {
    if (static_cast<std::size_t>(m.rows()) != dimension_ || static_cast<std::size_t>(m.cols()) != dimension_)
      throw InvalidArgument("all cocycle matrices must be d x d");
    if (!m.allFinite()) throw InvalidArgument("cocycle matrices must have finite entries");
    any_nonzero = any_nonzero || !m.isZero(0.0);
  }
  if (!any_nonzero) throw InvalidArgument("degenerate cocycle: all matrices are zero");
}

Eigen::MatrixXd MatrixCocycle::product(std::span<const Symbol> word) const {
  const auto d = static_cast<Eigen::Index>(dimension_);
  Eigen::MatrixXd p = Eigen::MatrixXd::Identity(d, d);
  for (Symbol s : word) p = p * matrices_.at(s);
  return p;
}

namespace {

constexpr double kLn2 = std::numbers::ln2;

/// Value of the product functional given the singular values of the scaled
/// product and the power-of-two scale exponent carried alongside it.
ExtReal singular_log_sum(const auto& sv, std::size_t rank, long exponent) {
  const double top = sv(0);
  if (top == 0.0) return ExtReal::neg_infinity();
  const double floor = top * static_cast<double>(sv.size()) * std::numeric_limits<double>::epsilon();
  double acc = 0.0;
  for (std::size_t i = 0; i < rank; ++i) {
    const double s = sv(static_cast<Eigen::Index>(i));
    if (i > 0 && s <= floor) return ExtReal::neg_infinity();
    acc += std::log(s);
  }
  return acc + static_cast<double>(rank) * static_cast<double>(exponent) * kLn2;
}

template <int D>
using Mat = Eigen::Matrix<double, D, D>;

template <int D>
ExtReal evaluate_product(const Mat<D>& m, std::size_t rank, long exponent) {
  if (m.isZero(0.0)) return ExtReal::neg_infinity();
  if constexpr (D == 1) {
    return std::log(std::abs(m(0, 0))) + static_cast<double>(exponent) * kLn2;
  } else {
    Eigen::JacobiSVD<Mat<D>> svd(m);
    return singular_log_sum(svd.singularValues(), rank, exponent);
  }
}

/// Keeps the product entries within [2^-256, 2^256] in magnitude by exact
/// power-of-two rescaling; the exponent is added back in log space.
template <int D>
void rebalance(Mat<D>& m, long& exponent) {
  const double mx = m.cwiseAbs().maxCoeff();
  if (mx == 0.0) return;
  const int e = std::ilogb(mx);
  if (e > 256 || e < -256) {
    m *= std::ldexp(1.0, -e);
    exponent += e;
  }
}

template <int D>
class ProductModel final : public PotentialModel {
 public:
  ProductModel(const MatrixCocycle& c, std::size_t rank) : rank_(rank) {
    for (const auto& m : c.matrices()) mats_.push_back(m);
    dim_ = static_cast<Eigen::Index>(c.dimension());
  }

  ExtReal evaluate(std::span<const Symbol> word) const override {
    Mat<D> p = Mat<D>::Identity(dim_, dim_);
    long exponent = 0;
    for (Symbol s : word) {
      p = (p * mats_.at(s)).eval();
      rebalance<D>(p, exponent);
    }
    return evaluate_product<D>(p, rank_, exponent);
  }

  std::unique_ptr<PotentialCursor> cursor() const override;

  std::vector<Mat<D>, Eigen::aligned_allocator<Mat<D>>> mats_;
  Eigen::Index dim_ = D;
  std::size_t rank_;
};

/// Reuses prefix products along the DFS.
template <int D>
class ProductCursor final : public PotentialCursor {
 public:
  explicit ProductCursor(const ProductModel<D>& model) : model_(model) {
    stack_.push_back(Mat<D>::Identity(model.dim_, model.dim_));
    exponents_.push_back(0);
  }
  void push(Symbol s) override {
    Mat<D> next = stack_.back() * model_.mats_[s];
    long e = exponents_.back();
    rebalance<D>(next, e);
    stack_.push_back(std::move(next));
    exponents_.push_back(e);
  }
  void pop() override {
    stack_.pop_back();
    exponents_.pop_back();
  }
  ExtReal value() const override { return evaluate_product<D>(stack_.back(), model_.rank_, exponents_.back()); }

 private:
  const ProductModel<D>& model_;
  std::vector<Mat<D>, Eigen::aligned_allocator<Mat<D>>> stack_;
  std::vector<long> exponents_;
};

template <int D>
std::unique_ptr<PotentialCursor> ProductModel<D>::cursor() const {
  return std::make_unique<ProductCursor<D>>(*this);
}

std::shared_ptr<const PotentialModel> make_product_model(const MatrixCocycle& c, std::size_t rank) {
  switch (c.dimension()) {
    case 1: return std::make_shared<ProductModel<1>>(c, rank);
    case 2: return std::make_shared<ProductModel<2>>(c, rank);
    case 3: return std::make_shared<ProductModel<3>>(c, rank);
    case 4: return std::make_shared<ProductModel<4>>(c, rank);
    default: return std::make_shared<ProductModel<Eigen::Dynamic>>(c, rank);
  }
}

}  // namespace

WordPotential norm_potential(const MatrixCocycle& cocycle) {
  return WordPotential(make_product_model(cocycle, 1), Structure::SubAdditive,
                       "log operator norm of matrix products (d=" + std::to_string(cocycle.dimension()) + ")");
}

WordPotential singular_value_potential(const MatrixCocycle& cocycle, std::size_t j) {
  if (j < 1 || j > cocycle.dimension()) throw InvalidArgument("singular value rank must be in 1..d");
  return WordPotential(make_product_model(cocycle, j), Structure::SubAdditive,
                       "log product of top " + std::to_string(j) + " singular values");
}

// ---------------------------------------------------------------------------
// Irreducibility

namespace {

constexpr double kRankTolerance = 1e-10;

/// Orthonormal basis of the column span, numerical rank relative to the
/// largest singular value.
Eigen::MatrixXd orthonormal_span(const Eigen::MatrixXd& columns) {
  if (columns.cols() == 0) return Eigen::MatrixXd(columns.rows(), 0);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(columns, Eigen::ComputeThinU);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0 || sv(0) == 0.0) return Eigen::MatrixXd(columns.rows(), 0);
  Eigen::Index r = 0;
  while (r < sv.size() && sv(r) > kRankTolerance * sv(0)) ++r;
  return svd.matrixU().leftCols(r);
}

Eigen::MatrixXd orbit_span(const std::vector<Eigen::MatrixXd>& mats, const Eigen::MatrixXd& start) {
  Eigen::MatrixXd q = orthonormal_span(start);
  const Eigen::Index d = start.rows();
  while (q.cols() > 0 && q.cols() < d) {
    Eigen::MatrixXd cand(d, q.cols() * static_cast<Eigen::Index>(mats.size() + 1));
    cand.leftCols(q.cols()) = q;
    for (std::size_t i = 0; i < mats.size(); ++i)
      cand.middleCols(q.cols() * static_cast<Eigen::Index>(i + 1), q.cols()) = mats[i] * q;
    Eigen::MatrixXd grown = orthonormal_span(cand);
    if (grown.cols() == q.cols()) break;
    q = std::move(grown);
  }
  return q;
}

std::vector<Eigen::MatrixXd> start_subspaces(const std::vector<Eigen::MatrixXd>& mats) {
  const Eigen::Index d = mats.front().rows();
  std::vector<Eigen::MatrixXd> starts;
  for (Eigen::Index i = 0; i < d; ++i) starts.push_back(Eigen::MatrixXd::Identity(d, d).col(i));
  for (const auto& m : mats) {
    Eigen::EigenSolver<Eigen::MatrixXd> es(m);
    if (es.info() != Eigen::Success) continue;
    const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    for (Eigen::Index k = 0; k < d; ++k) {
      const auto lambda = es.eigenvalues()(k);
      const Eigen::VectorXcd v = es.eigenvectors().col(k);
      if (std::abs(lambda.imag()) <= 1e-12 * scale) {
        starts.push_back(v.real());
      } else if (lambda.imag() > 0.0) {
        Eigen::MatrixXd plane(d, 2);
        plane.col(0) = v.real();
        plane.col(1) = v.imag();
        starts.push_back(plane);
      }
    }
  }
  return starts;
}

std::optional<Eigen::MatrixXd> find_invariant(const std::vector<Eigen::MatrixXd>& mats) {
  const Eigen::Index d = mats.front().rows();
  std::optional<Eigen::MatrixXd> best;
  for (const auto& start : start_subspaces(mats)) {
    Eigen::MatrixXd q = orbit_span(mats, start);
    if (q.cols() > 0 && q.cols() < d && (!best || q.cols() < best->cols())) best = std::move(q);
  }
  return best;
}

Eigen::MatrixXd orthogonal_complement(const Eigen::MatrixXd& q) {
  const Eigen::Index d = q.rows();
  Eigen::MatrixXd proj = Eigen::MatrixXd::Identity(d, d) - q * q.transpose();
  return orthonormal_span(proj);
}

}  // namespace

IrreducibilityVerdict check_irreducibility(const MatrixCocycle& cocycle) {
  const auto& mats = cocycle.matrices();
  if (std::all_of(mats.begin(), mats.end(), [](const auto& m) { return m.isZero(0.0); }))
    throw InvalidArgument("degenerate cocycle: all matrices are zero");
  if (auto w = find_invariant(mats)) return {false, std::move(*w)};
  std::vector<Eigen::MatrixXd> transposed;
  for (const auto& m : mats) transposed.push_back(m.transpose());
  if (auto w = find_invariant(transposed)) return {false, orthogonal_complement(*w)};
  return {true, Eigen::MatrixXd()};
}

double invariance_defect(const MatrixCocycle& cocycle, const Eigen::MatrixXd& basis) {
  const Eigen::Index d = basis.rows();
  const Eigen::MatrixXd proj = Eigen::MatrixXd::Identity(d, d) - basis * basis.transpose();
  double worst = 0.0;
  for (const auto& m : cocycle.matrices()) worst = std::max(worst, (proj * m * basis).norm());
  return worst;
}

// ---------------------------------------------------------------------------
// (H1) and (H2)

namespace {

/// Values of phi on all admissible words of lengths 1..n_max, indexed by
/// length and base-m word index.
class WordTable {
 public:
  WordTable(const ShiftSpace& space, const WordPotential& phi, std::size_t n_max)
      : m_(space.alphabet_size()), values_(n_max + 1) {
    std::size_t slots = 1;
    for (std::size_t len = 1; len <= n_max; ++len) {
      space.check_budget(len);
      slots *= m_;
      if (slots > 4 * space.word_budget()) throw BudgetExceeded("word table exceeds budget");
      values_[len].assign(slots, ExtReal::neg_infinity());
      for_each_word(space, len, [&](std::span<const Symbol> w) { values_[len][index(w)] = phi(w); });
    }
  }
  ExtReal at(std::span<const Symbol> w) const { return values_[w.size()][index(w)]; }

 private:
  std::size_t index(std::span<const Symbol> w) const {
    std::size_t i = 0;
    for (Symbol s : w) i = i * m_ + s;
    return i;
  }
  std::size_t m_;
  std::vector<std::vector<ExtReal>> values_;
};

}  // namespace

H1Report check_h1(const ShiftSpace& space, const WordPotential& phi, std::size_t n_max) {
  if (n_max < 2) throw InvalidArgument("n_max must be >= 2");
  const WordTable table(space, phi, n_max);
  H1Report report;
  for (std::size_t len = 2; len <= n_max; ++len) {
    for_each_word(space, len, [&](std::span<const Symbol> w) {
      const ExtReal whole = table.at(w);
      for (std::size_t cut = 1; cut < len; ++cut) {
        ++report.pairs_checked;
        if (!whole.is_finite()) continue;
        const ExtReal parts = table.at(w.first(cut)) + table.at(w.subspan(cut));
        double defect;
        if (!parts.is_finite()) {
          defect = std::numeric_limits<double>::infinity();
        } else {
          defect = whole.value() - parts.value();
          const double slack = kH1RoundingSlack * std::max({1.0, std::abs(whole.value()), std::abs(parts.value())});
          if (defect <= slack) continue;
        }
        report.holds = false;
        if (defect > report.max_violation) {
          report.max_violation = defect;
          report.worst_prefix.assign(w.begin(), w.begin() + static_cast<std::ptrdiff_t>(cut));
          report.worst_suffix.assign(w.begin() + static_cast<std::ptrdiff_t>(cut), w.end());
        }
      }
    });
  }
  return report;
}

std::optional<H2Certificate> search_h2(const ShiftSpace& space, const WordPotential& phi, std::size_t n,
                                       std::size_t t_max) {
  if (n < 1) throw InvalidArgument("base length must be >= 1");
  space.check_budget(n);
  std::vector<std::pair<Word, double>> bases;
  for_each_word(space, n, [&](std::span<const Symbol> w) {
    const ExtReal v = phi(w);
    if (v.is_finite()) bases.push_back({Word(w.begin(), w.end()), v.value()});
  });
  if (bases.empty()) return std::nullopt;

  std::vector<Word> bridges{Word{}};
  for (std::size_t t = 1; t <= t_max; ++t) {
    space.check_budget(t);
    auto words = space.enumerate_words(t);
    bridges.insert(bridges.end(), words.begin(), words.end());
  }
  const double work = static_cast<double>(bases.size()) * static_cast<double>(bases.size()) *
                      static_cast<double>(bridges.size());
  if (work > static_cast<double>(space.word_budget())) throw BudgetExceeded("(H2) search exceeds word budget");

  H2Certificate cert;
  cert.n = n;
  double worst = std::numeric_limits<double>::infinity();
  std::vector<H2Witness> per_pair;
  Word joined;
  for (const auto& [left, lv] : bases) {
    for (const auto& [right, rv] : bases) {
      std::optional<H2Witness> best;
      for (const Word& k : bridges) {
        joined = left;
        joined.insert(joined.end(), k.begin(), k.end());
        joined.insert(joined.end(), right.begin(), right.end());
        if (!space.is_admissible(joined)) continue;
        const ExtReal v = phi(joined);
        if (!v.is_finite()) continue;
        const double ratio = v.value() - lv - rv;
        if (!best || ratio > best->log_ratio) best = H2Witness{left, k, right, ratio};
      }
      if (!best) return std::nullopt;
      cert.t_n = std::max(cert.t_n, best->bridge.size());
      worst = std::min(worst, best->log_ratio);
      per_pair.push_back(std::move(*best));
    }
  }
  cert.c_n = std::exp(worst);
  if (!(cert.c_n > 0.0)) return std::nullopt;
  std::stable_sort(per_pair.begin(), per_pair.end(),
                   [](const H2Witness& a, const H2Witness& b) { return a.log_ratio < b.log_ratio; });
  per_pair.resize(std::min<std::size_t>(per_pair.size(), 16));
  cert.witnesses = std::move(per_pair);
  return cert;
}

}  // namespace thermoform
