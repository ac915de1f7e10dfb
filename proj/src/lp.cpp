#include "robusthedge/lp.hpp"

namespace robusthedge {

std::string to_string(LpStatus status) {
  switch (status) {
    case LpStatus::optimal:
      return "optimal";
    case LpStatus::infeasible:
      return "infeasible";
    case LpStatus::unbounded:
      return "unbounded";
    case LpStatus::iteration_limit:
      return "iteration_limit";
    case LpStatus::residual_failure:
      return "residual_failure";
  }
  return "unknown";
}

DenseLP<Rational> to_rational(const DenseLP<double>& lp) {
  lp.validate();
  auto q = [](double x) { return Rational(x); };
  DenseLP<Rational> out;
  out.objective = lp.objective;
  out.c = lp.c.unaryExpr(q);
  out.A = lp.A.unaryExpr(q);
  out.b = lp.b.unaryExpr(q);
  out.senses = lp.senses;
  for (const auto& lo : lp.lower) out.lower.push_back(lo ? std::optional<Rational>(q(*lo)) : std::nullopt);
  for (const auto& hi : lp.upper) out.upper.push_back(hi ? std::optional<Rational>(q(*hi)) : std::nullopt);
  return out;
}

LpResult<double> solve_exact(const DenseLP<double>& lp, Eigen::Index max_variables) {
  if (lp.variables() > max_variables) throw CapExceeded("exact LP mode is limited to small instances");
  const auto exact = solve(to_rational(lp));
  auto d = [](const Rational& x) { return x.convert_to<double>(); };
  LpResult<double> out;
  out.status = exact.status;
  out.iterations = exact.iterations;
  out.redundant_rows = exact.redundant_rows;
  if (exact.optimal()) {
    out.value = d(exact.value);
    out.x = exact.x.unaryExpr(d);
    out.duals = exact.duals.unaryExpr(d);
    out.max_residual = d(exact.max_residual);
  }
  return out;
}

template LpResult<double> solve(const DenseLP<double>&, const SimplexOptions<double>&);
template LpResult<Rational> solve(const DenseLP<Rational>&, const SimplexOptions<Rational>&);

}  // namespace robusthedge
