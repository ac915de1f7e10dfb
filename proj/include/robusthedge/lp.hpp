#pragma once

#include "robusthedge/errors.hpp"

#include <Eigen/Dense>
#include <boost/multiprecision/cpp_int.hpp>
#include <boost/multiprecision/eigen.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace robusthedge {

using Rational = boost::multiprecision::cpp_rational;

enum class Sense { le, ge, eq };
enum class Objective { minimize, maximize };
enum class LpStatus { optimal, infeasible, unbounded, iteration_limit, residual_failure };

std::string to_string(LpStatus status);

/// optimize c.x subject to A x (senses) b and lower <= x <= upper. A missing
/// bound is infinite; the default is x >= 0.
template <typename Scalar>
struct DenseLP {
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  Objective objective = Objective::minimize;
  Vector c;
  Matrix A;
  Vector b;
  std::vector<Sense> senses;
  std::vector<std::optional<Scalar>> lower;
  std::vector<std::optional<Scalar>> upper;

  Eigen::Index variables() const { return c.size(); }
  Eigen::Index constraints() const { return A.rows(); }

  /// Resizes to n variables (x >= 0) and no constraints.
  void reset(Eigen::Index n) {
    c = Vector::Zero(n);
    A = Matrix::Zero(0, n);
    b = Vector::Zero(0);
    senses.clear();
    lower.assign(static_cast<std::size_t>(n), Scalar{0});
    upper.assign(static_cast<std::size_t>(n), std::nullopt);
  }

  void set_free(Eigen::Index j) {
    lower[static_cast<std::size_t>(j)].reset();
    upper[static_cast<std::size_t>(j)].reset();
  }

  /// Appends one constraint row.
  void add_row(const Vector& row, Sense sense, const Scalar& rhs) {
    if (row.size() != variables()) throw DomainError("constraint row has the wrong length");
    A.conservativeResize(A.rows() + 1, Eigen::NoChange);
    A.row(A.rows() - 1) = row.transpose();
    b.conservativeResize(b.size() + 1);
    b(b.size() - 1) = rhs;
    senses.push_back(sense);
  }

  void validate() const;
};

template <typename Scalar>
struct LpResult {
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  LpStatus status = LpStatus::infeasible;
  Scalar value{0};
  Vector x;
  /// Row multipliers y with c = A^T y + reduced costs (in the caller's objective sense).
  Vector duals;
  Eigen::Index iterations = 0;
  Scalar max_residual{0};
  /// Constraint rows dropped as redundant after phase one.
  std::vector<Eigen::Index> redundant_rows;

  bool optimal() const { return status == LpStatus::optimal; }
};

/// Basic feasible solution seen by the simplex, mapped back to the caller's variables.
template <typename Scalar>
struct SimplexIterate {
  int phase = 1;
  Eigen::Index iteration = 0;
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> x;
  Scalar objective{0};
};

template <typename Scalar>
struct SimplexOptions {
  /// Pivot and reduced-cost tolerance; zero for exact arithmetic.
  Scalar tolerance = std::is_floating_point_v<Scalar> ? Scalar(1e-10) : Scalar(0);
  /// Residual certificate: every constraint holds to residual_tolerance * scale.
  Scalar residual_tolerance = std::is_floating_point_v<Scalar> ? Scalar(1e-9) : Scalar(0);
  Eigen::Index max_iterations = 200000;
  std::function<void(const SimplexIterate<Scalar>&)> on_iterate;
};

/// Two-phase dense tableau simplex with Bland's rule.
template <typename Scalar>
LpResult<Scalar> solve(const DenseLP<Scalar>& lp, const SimplexOptions<Scalar>& options = {});

/// LP with the same feasible set and objective in exact rational arithmetic.
DenseLP<Rational> to_rational(const DenseLP<double>& lp);

/// Exact solve for LPs with at most max_variables variables; the value is
/// converted back to double.
LpResult<double> solve_exact(const DenseLP<double>& lp, Eigen::Index max_variables = 200);

namespace detail {

template <typename Scalar>
Scalar abs_value(const Scalar& x) {
  return x < Scalar{0} ? Scalar{-x} : x;
}

// Standard form: min c.z, M z = r with r >= 0, z >= 0, plus the map back to x.
template <typename Scalar>
struct StandardForm {
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  Matrix M;
  Vector r;
  Vector cost;
  Scalar cost_offset{0};
  // x_j = offset_j + sum_k coef * z_k
  std::vector<std::vector<std::pair<Eigen::Index, Scalar>>> x_terms;
  Vector x_offset;
  // Row sign flips (+1/-1) and original row index of each standard row.
  std::vector<int> row_sign;
  std::vector<Eigen::Index> row_origin;
  // Columns whose unit vector starts the basis (slacks of <= rows), -1 if none.
  std::vector<Eigen::Index> initial_basic;
};

template <typename Scalar>
StandardForm<Scalar> standardize(const DenseLP<Scalar>& lp) {
  using Vector = typename StandardForm<Scalar>::Vector;
  const Eigen::Index n = lp.variables();
  const Eigen::Index m0 = lp.constraints();
  StandardForm<Scalar> sf;
  sf.x_terms.resize(static_cast<std::size_t>(n));
  sf.x_offset = Vector::Zero(n);

  // Structural columns.
  Eigen::Index z = 0;
  struct ExtraRow {
    Eigen::Index column;
    Scalar rhs;
  };
  std::vector<ExtraRow> bound_rows;
  for (Eigen::Index j = 0; j < n; ++j) {
    const auto& lo = lp.lower[static_cast<std::size_t>(j)];
    const auto& hi = lp.upper[static_cast<std::size_t>(j)];
    auto& terms = sf.x_terms[static_cast<std::size_t>(j)];
    if (lo) {
      sf.x_offset(j) = *lo;
      terms.emplace_back(z, Scalar{1});
      if (hi) bound_rows.push_back({z, Scalar(*hi - *lo)});
      ++z;
    } else if (hi) {
      sf.x_offset(j) = *hi;
      terms.emplace_back(z++, Scalar{-1});
    } else {
      terms.emplace_back(z++, Scalar{1});
      terms.emplace_back(z++, Scalar{-1});
    }
  }
  const Eigen::Index structural = z;
  const Eigen::Index m = m0 + static_cast<Eigen::Index>(bound_rows.size());

  // Row data in structural variables.
  typename StandardForm<Scalar>::Matrix rows = StandardForm<Scalar>::Matrix::Zero(m, structural);
  Vector rhs(m);
  std::vector<Sense> senses(static_cast<std::size_t>(m));
  for (Eigen::Index i = 0; i < m0; ++i) {
    Scalar shift{0};
    for (Eigen::Index j = 0; j < n; ++j) {
      const Scalar a = lp.A(i, j);
      if (a == Scalar{0}) continue;
      shift += a * sf.x_offset(j);
      for (const auto& [col, coef] : sf.x_terms[static_cast<std::size_t>(j)]) rows(i, col) += a * coef;
    }
    rhs(i) = lp.b(i) - shift;
    senses[static_cast<std::size_t>(i)] = lp.senses[static_cast<std::size_t>(i)];
  }
  for (std::size_t e = 0; e < bound_rows.size(); ++e) {
    const Eigen::Index i = m0 + static_cast<Eigen::Index>(e);
    rows(i, bound_rows[e].column) = Scalar{1};
    rhs(i) = bound_rows[e].rhs;
    senses[static_cast<std::size_t>(i)] = Sense::le;
  }

  // Flip rows to r >= 0, then add slack or surplus columns.
  sf.row_sign.assign(static_cast<std::size_t>(m), 1);
  sf.row_origin.resize(static_cast<std::size_t>(m));
  Eigen::Index slacks = 0;
  for (Eigen::Index i = 0; i < m; ++i) {
    sf.row_origin[static_cast<std::size_t>(i)] = i < m0 ? i : -1;
    if (rhs(i) < Scalar{0}) {
      sf.row_sign[static_cast<std::size_t>(i)] = -1;
      rows.row(i) = -rows.row(i);
      rhs(i) = -rhs(i);
      auto& s = senses[static_cast<std::size_t>(i)];
      if (s == Sense::le) {
        s = Sense::ge;
      } else if (s == Sense::ge) {
        s = Sense::le;
      }
    }
    if (senses[static_cast<std::size_t>(i)] != Sense::eq) ++slacks;
  }
  sf.M = StandardForm<Scalar>::Matrix::Zero(m, structural + slacks);
  sf.M.leftCols(structural) = rows;
  sf.r = rhs;
  sf.initial_basic.assign(static_cast<std::size_t>(m), -1);
  Eigen::Index col = structural;
  for (Eigen::Index i = 0; i < m; ++i) {
    const auto s = senses[static_cast<std::size_t>(i)];
    if (s == Sense::eq) continue;
    sf.M(i, col) = s == Sense::le ? Scalar{1} : Scalar{-1};
    if (s == Sense::le) sf.initial_basic[static_cast<std::size_t>(i)] = col;
    ++col;
  }

  // Objective in z, always minimized.
  const Scalar sign = lp.objective == Objective::minimize ? Scalar{1} : Scalar{-1};
  sf.cost = Vector::Zero(sf.M.cols());
  for (Eigen::Index j = 0; j < n; ++j) {
    sf.cost_offset += lp.c(j) * sf.x_offset(j);
    for (const auto& [zc, coef] : sf.x_terms[static_cast<std::size_t>(j)]) sf.cost(zc) += sign * lp.c(j) * coef;
  }
  return sf;
}

template <typename Scalar>
class Tableau {
 public:
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  // Columns: z (n), artificials (m), then an m-column block tracking B^{-1}.
  Tableau(const StandardForm<Scalar>& sf, const Scalar& tol) : tol_(tol) {
    m_ = sf.M.rows();
    n_ = sf.M.cols();
    width_ = n_ + 2 * m_ + 1;
    data_.assign(static_cast<std::size_t>((m_ + 1) * width_), Scalar{0});
    basis_.resize(static_cast<std::size_t>(m_));
    active_.assign(static_cast<std::size_t>(m_), true);
    for (Eigen::Index i = 0; i < m_; ++i) {
      for (Eigen::Index j = 0; j < n_; ++j) at(i, j) = sf.M(i, j);
      at(i, rhs_col()) = sf.r(i);
      at(i, inverse_col(i)) = Scalar{1};
      const Eigen::Index slack = sf.initial_basic[static_cast<std::size_t>(i)];
      if (slack >= 0) {
        basis_[static_cast<std::size_t>(i)] = slack;
      } else {
        at(i, n_ + i) = Scalar{1};
        basis_[static_cast<std::size_t>(i)] = n_ + i;
      }
    }
  }

  Eigen::Index rows() const { return m_; }
  Eigen::Index structural() const { return n_; }
  bool is_artificial(Eigen::Index col) const { return col >= n_ && col < n_ + m_; }
  Scalar& at(Eigen::Index i, Eigen::Index j) { return data_[static_cast<std::size_t>(i * width_ + j)]; }
  const Scalar& at(Eigen::Index i, Eigen::Index j) const { return data_[static_cast<std::size_t>(i * width_ + j)]; }
  Eigen::Index rhs_col() const { return width_ - 1; }
  Eigen::Index inverse_col(Eigen::Index i) const { return n_ + m_ + i; }
  Eigen::Index basic(Eigen::Index i) const { return basis_[static_cast<std::size_t>(i)]; }
  bool active(Eigen::Index i) const { return active_[static_cast<std::size_t>(i)]; }
  void deactivate(Eigen::Index i) { active_[static_cast<std::size_t>(i)] = false; }

  // Objective row m_ holds reduced costs for the given cost vector over all columns.
  void set_objective(const Vector& cost) {
    for (Eigen::Index j = 0; j < width_; ++j) at(m_, j) = Scalar{0};
    for (Eigen::Index j = 0; j < n_ + m_; ++j) at(m_, j) = cost(j);
    for (Eigen::Index i = 0; i < m_; ++i) {
      if (!active(i)) continue;
      const Scalar cb = cost(basic(i));
      if (cb == Scalar{0}) continue;
      for (Eigen::Index j = 0; j < width_; ++j) at(m_, j) -= cb * at(i, j);
    }
  }

  void pivot(Eigen::Index r, Eigen::Index c) {
    const Scalar p = at(r, c);
    for (Eigen::Index j = 0; j < width_; ++j) at(r, j) /= p;
    for (Eigen::Index i = 0; i <= m_; ++i) {
      if (i == r || (i < m_ && !active(i))) continue;
      const Scalar f = at(i, c);
      if (f == Scalar{0}) continue;
      for (Eigen::Index j = 0; j < width_; ++j) at(i, j) -= f * at(r, j);
    }
    basis_[static_cast<std::size_t>(r)] = c;
  }

  // Bland's rule. Returns optimal / unbounded / iteration_limit.
  template <typename Allowed, typename Visit>
  LpStatus run(Allowed allowed, Eigen::Index& iterations, Eigen::Index max_iterations, Visit visit) {
    visit();
    while (true) {
      Eigen::Index entering = -1;
      for (Eigen::Index j = 0; j < n_ + m_; ++j) {
        if (allowed(j) && at(m_, j) < -tol_) {
          entering = j;
          break;
        }
      }
      if (entering < 0) return LpStatus::optimal;
      if (iterations >= max_iterations) return LpStatus::iteration_limit;
      Eigen::Index leaving = -1;
      Scalar best_ratio{0};
      for (Eigen::Index i = 0; i < m_; ++i) {
        if (!active(i) || !(at(i, entering) > tol_)) continue;
        const Scalar ratio = at(i, rhs_col()) / at(i, entering);
        if (leaving < 0 || ratio < best_ratio || (ratio == best_ratio && basic(i) < basic(leaving))) {
          leaving = i;
          best_ratio = ratio;
        }
      }
      if (leaving < 0) return LpStatus::unbounded;
      pivot(leaving, entering);
      ++iterations;
      visit();
    }
  }

  Vector solution() const {
    Vector z = Vector::Zero(n_);
    for (Eigen::Index i = 0; i < m_; ++i) {
      if (active(i) && basic(i) < n_) z(basic(i)) = at(i, rhs_col());
    }
    return z;
  }

  // Minimized objective value of the current basis for the cost vector.
  Scalar objective(const Vector& cost) const {
    Scalar v{0};
    for (Eigen::Index i = 0; i < m_; ++i) {
      if (active(i)) v += cost(basic(i)) * at(i, rhs_col());
    }
    return v;
  }

  // y = c_B B^{-1} in standard-form row space.
  Vector row_duals(const Vector& cost) const {
    Vector y = Vector::Zero(m_);
    for (Eigen::Index i = 0; i < m_; ++i) {
      if (!active(i)) continue;
      const Scalar cb = cost(basic(i));
      if (cb == Scalar{0}) continue;
      for (Eigen::Index r = 0; r < m_; ++r) y(r) += cb * at(i, inverse_col(r));
    }
    return y;
  }

 private:
  Scalar tol_;
  Eigen::Index m_ = 0;
  Eigen::Index n_ = 0;
  Eigen::Index width_ = 0;
  std::vector<Scalar> data_;
  std::vector<Eigen::Index> basis_;
  std::vector<bool> active_;
};

template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> recover_x(const StandardForm<Scalar>& sf,
                                                   const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& z) {
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> x = sf.x_offset;
  for (std::size_t j = 0; j < sf.x_terms.size(); ++j) {
    for (const auto& [col, coef] : sf.x_terms[j]) x(static_cast<Eigen::Index>(j)) += coef * z(col);
  }
  return x;
}

}  // namespace detail

template <typename Scalar>
void DenseLP<Scalar>::validate() const {
  const Eigen::Index n = variables();
  if (A.cols() != n || A.rows() != b.size() || static_cast<Eigen::Index>(senses.size()) != b.size() ||
      static_cast<Eigen::Index>(lower.size()) != n || static_cast<Eigen::Index>(upper.size()) != n) {
    throw DomainError("LP dimensions are inconsistent");
  }
  if constexpr (std::is_floating_point_v<Scalar>) {
    if (!A.allFinite() || !b.allFinite() || !c.allFinite()) throw DomainError("LP has non-finite entries");
  }
  for (Eigen::Index j = 0; j < n; ++j) {
    const auto& lo = lower[static_cast<std::size_t>(j)];
    const auto& hi = upper[static_cast<std::size_t>(j)];
    if (lo && hi && *hi < *lo) throw DomainError("LP variable has crossing bounds");
  }
}

template <typename Scalar>
LpResult<Scalar> solve(const DenseLP<Scalar>& lp, const SimplexOptions<Scalar>& options) {
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  LpResult<Scalar> result;
  // Contradictory bounds make the problem infeasible rather than malformed.
  for (Eigen::Index j = 0; j < lp.variables(); ++j) {
    const auto& lo = lp.lower[static_cast<std::size_t>(j)];
    const auto& hi = lp.upper[static_cast<std::size_t>(j)];
    if (lo && hi && *hi < *lo) {
      result.status = LpStatus::infeasible;
      return result;
    }
  }
  lp.validate();
  const auto sf = detail::standardize(lp);
  detail::Tableau<Scalar> t(sf, options.tolerance);
  const Eigen::Index n = t.structural();
  const Eigen::Index m = t.rows();
  const Scalar sign = lp.objective == Objective::minimize ? Scalar{1} : Scalar{-1};

  auto report = [&](int phase, Eigen::Index iteration) {
    if (!options.on_iterate) return;
    SimplexIterate<Scalar> it;
    it.phase = phase;
    it.iteration = iteration;
    it.x = detail::recover_x(sf, t.solution());
    it.objective = lp.c.dot(it.x);
    options.on_iterate(it);
  };

  // Phase one: minimize the sum of artificials.
  Vector phase1 = Vector::Zero(n + m);
  bool any_artificial = false;
  for (Eigen::Index i = 0; i < m; ++i) {
    if (t.is_artificial(t.basic(i))) {
      phase1(n + i) = Scalar{1};
      any_artificial = true;
    }
  }
  Eigen::Index iterations = 0;
  if (any_artificial) {
    t.set_objective(phase1);
    const auto status = t.run([](Eigen::Index) { return true; }, iterations, options.max_iterations,
                              [&] { report(1, iterations); });
    if (status == LpStatus::iteration_limit) {
      result.status = status;
      result.iterations = iterations;
      return result;
    }
    Scalar scale{1};
    for (Eigen::Index i = 0; i < m; ++i) scale = std::max(scale, detail::abs_value(sf.r(i)));
    if (t.objective(phase1) > options.tolerance * scale * Scalar(m + 1)) {
      result.status = LpStatus::infeasible;
      result.iterations = iterations;
      return result;
    }
    // Drive remaining artificials out of the basis; rows without a pivot are redundant.
    for (Eigen::Index i = 0; i < m; ++i) {
      if (!t.is_artificial(t.basic(i))) continue;
      Eigen::Index col = -1;
      for (Eigen::Index j = 0; j < n; ++j) {
        if (detail::abs_value(t.at(i, j)) > options.tolerance) {
          col = j;
          break;
        }
      }
      if (col >= 0) {
        t.pivot(i, col);
      } else {
        t.deactivate(i);
        if (sf.row_origin[static_cast<std::size_t>(i)] >= 0) {
          result.redundant_rows.push_back(sf.row_origin[static_cast<std::size_t>(i)]);
        }
      }
    }
  }

  // Phase two on the structural columns.
  Vector cost = Vector::Zero(n + m);
  cost.head(n) = sf.cost;
  t.set_objective(cost);
  const auto status = t.run([n](Eigen::Index j) { return j < n; }, iterations, options.max_iterations,
                            [&] { report(2, iterations); });
  result.iterations = iterations;
  if (status != LpStatus::optimal) {
    result.status = status;
    return result;
  }
  const Vector z = t.solution();
  result.x = detail::recover_x(sf, z);
  result.value = lp.c.dot(result.x);

  // Duals mapped to the caller's rows and objective sense.
  const Vector y_std = t.row_duals(cost);
  result.duals = Vector::Zero(lp.constraints());
  for (Eigen::Index i = 0; i < m; ++i) {
    const auto origin = sf.row_origin[static_cast<std::size_t>(i)];
    if (origin < 0) continue;
    result.duals(origin) = sign * Scalar(sf.row_sign[static_cast<std::size_t>(i)]) * y_std(i);
  }

  // Residual certificate.
  Scalar worst{0};
  Scalar scale{1};
  for (Eigen::Index i = 0; i < lp.constraints(); ++i) {
    Scalar lhs{0};
    Scalar row_scale = detail::abs_value(lp.b(i));
    for (Eigen::Index j = 0; j < lp.variables(); ++j) {
      lhs += lp.A(i, j) * result.x(j);
      row_scale = std::max(row_scale, Scalar(detail::abs_value(lp.A(i, j)) * detail::abs_value(result.x(j))));
    }
    scale = std::max(scale, row_scale);
    Scalar violation{0};
    switch (lp.senses[static_cast<std::size_t>(i)]) {
      case Sense::le:
        violation = lhs - lp.b(i);
        break;
      case Sense::ge:
        violation = lp.b(i) - lhs;
        break;
      case Sense::eq:
        violation = detail::abs_value(Scalar(lhs - lp.b(i)));
        break;
    }
    worst = std::max(worst, violation);
  }
  for (Eigen::Index j = 0; j < lp.variables(); ++j) {
    if (const auto& lo = lp.lower[static_cast<std::size_t>(j)]) worst = std::max(worst, Scalar(*lo - result.x(j)));
    if (const auto& hi = lp.upper[static_cast<std::size_t>(j)]) worst = std::max(worst, Scalar(result.x(j) - *hi));
  }
  result.max_residual = worst;
  result.status = worst <= options.residual_tolerance * scale ? LpStatus::optimal : LpStatus::residual_failure;
  return result;
}

}  // namespace robusthedge
