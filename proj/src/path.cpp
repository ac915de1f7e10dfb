#include "robusthedge/path.hpp"

#include "robusthedge/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace robusthedge {

TimeGrid::TimeGrid(Eigen::VectorXd knots) : knots_(std::move(knots)) {
  if (knots_.size() < 2) throw DomainError("time grid needs at least two knots");
  if (knots_(0) != 0.0) throw DomainError("time grid must start at 0");
  for (Eigen::Index k = 1; k < knots_.size(); ++k) {
    if (!(knots_(k) > knots_(k - 1))) throw DomainError("time grid must be strictly increasing");
  }
}

TimeGrid TimeGrid::uniform(double horizon, Eigen::Index steps) {
  if (steps < 1 || !(horizon > 0.0)) throw DomainError("uniform grid needs steps >= 1, horizon > 0");
  return TimeGrid(Eigen::VectorXd::LinSpaced(steps + 1, 0.0, horizon));
}

Eigen::Index TimeGrid::segment(double s) const {
  if (!contains(s)) throw DomainError("time outside [0, T]");
  if (s >= horizon()) return steps();
  auto begin = knots_.data();
  auto end = knots_.data() + knots_.size();
  auto it = std::upper_bound(begin, end, s);
  return static_cast<Eigen::Index>(it - begin) - 1;
}

std::optional<Eigen::Index> TimeGrid::knot_index(double t) const {
  const double tol = 1e-12 * std::max(1.0, horizon());
  for (Eigen::Index k = 0; k < knots_.size(); ++k) {
    if (std::abs(knots_(k) - t) <= tol) return k;
  }
  return std::nullopt;
}

bool DomainE::contains(const Eigen::Ref<const Eigen::VectorXd>& y) const {
  if (y.size() != dim) return false;
  if (!y.allFinite()) return false;
  return kind == DomainKind::full_space || (y.array() >= 0.0).all();
}

CadlagPath::CadlagPath(TimeGrid grid, Eigen::MatrixXd values, DomainE domain)
    : grid_(std::move(grid)), values_(std::move(values)), domain_(domain) {
  if (values_.cols() != grid_.steps() + 1) throw DomainError("path needs one value per knot");
  if (values_.rows() != domain_.dim) throw DomainError("path dimension does not match domain");
  for (Eigen::Index k = 0; k < values_.cols(); ++k) {
    if (!domain_.contains(values_.col(k))) throw DomainError("path value outside E");
  }
}

CadlagPath CadlagPath::scalar(TimeGrid grid, const Eigen::VectorXd& values, DomainE domain) {
  domain.dim = 1;
  return CadlagPath(std::move(grid), values.transpose(), domain);
}

Eigen::VectorXd CadlagPath::at(double s) const { return values_.col(grid_.segment(s)); }

Eigen::VectorXd CadlagPath::left_limit(double t) const {
  if (!(t > 0.0) || t > grid_.horizon()) throw DomainError("left limit needs t in (0, T]");
  if (auto k = grid_.knot_index(t)) return values_.col(*k - 1);
  return values_.col(grid_.segment(t));
}

CadlagPath stop(const CadlagPath& path, double t) {
  const Eigen::Index j = path.grid().segment(t);
  Eigen::MatrixXd v = path.values();
  for (Eigen::Index k = j + 1; k < v.cols(); ++k) v.col(k) = path.values().col(j);
  return CadlagPath(path.grid(), std::move(v), path.domain());
}

CadlagPath predictable_stop(const CadlagPath& path, double t) {
  const Eigen::VectorXd frozen = path.left_limit(t);
  Eigen::MatrixXd v = path.values();
  const auto& knots = path.grid().knots();
  for (Eigen::Index k = 0; k < v.cols(); ++k) {
    if (knots(k) >= t || path.grid().knot_index(t) == k) v.col(k) = frozen;
  }
  return CadlagPath(path.grid(), std::move(v), path.domain());
}

CadlagPath splice(const CadlagPath& path, double t, const Eigen::VectorXd& y) {
  const auto k = path.grid().knot_index(t);
  if (!k) throw DomainError("splice time must be a grid knot");
  if (!path.domain().contains(y)) throw DomainError("splice value outside E");
  Eigen::MatrixXd v = path.values();
  v.rightCols(v.cols() - *k).colwise() = y;
  return CadlagPath(path.grid(), std::move(v), path.domain());
}

CadlagPath splice(const CadlagPath& path, double t, double y) {
  return splice(path, t, Eigen::VectorXd::Constant(1, y));
}

double sup_distance(const CadlagPath& a, const CadlagPath& b) {
  if (!(a.grid() == b.grid()) || a.dim() != b.dim()) throw DomainError("paths live on different grids");
  return (a.values() - b.values()).cwiseAbs().maxCoeff();
}

nlohmann::json to_json(const CadlagPath& path) {
  nlohmann::json j;
  const auto& knots = path.grid().knots();
  j["grid"] = std::vector<double>(knots.data(), knots.data() + knots.size());
  nlohmann::json values = nlohmann::json::array();
  for (Eigen::Index k = 0; k < path.values().cols(); ++k) {
    if (path.dim() == 1) {
      values.push_back(path.values()(0, k));
    } else {
      Eigen::VectorXd col = path.values().col(k);
      values.push_back(std::vector<double>(col.data(), col.data() + col.size()));
    }
  }
  j["values"] = std::move(values);
  return j;
}

CadlagPath path_from_json(const nlohmann::json& j, DomainE domain) {
  for (const auto& [key, _] : j.items()) {
    if (key != "grid" && key != "values") throw DomainError("unknown path field: " + key);
  }
  const auto knots = j.at("grid").get<std::vector<double>>();
  const auto& values = j.at("values");
  if (values.size() != knots.size()) throw DomainError("path needs one value per knot");
  const bool scalar = !values.empty() && values.front().is_number();
  const Eigen::Index d = scalar ? 1 : static_cast<Eigen::Index>(values.front().size());
  Eigen::MatrixXd v(d, static_cast<Eigen::Index>(values.size()));
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (scalar) {
      v(0, static_cast<Eigen::Index>(k)) = values[k].get<double>();
    } else {
      const auto col = values[k].get<std::vector<double>>();
      if (static_cast<Eigen::Index>(col.size()) != d) throw DomainError("ragged path values");
      for (Eigen::Index i = 0; i < d; ++i) v(i, static_cast<Eigen::Index>(k)) = col[static_cast<std::size_t>(i)];
    }
  }
  domain.dim = d;
  return CadlagPath(TimeGrid(Eigen::Map<const Eigen::VectorXd>(knots.data(), static_cast<Eigen::Index>(knots.size()))),
                    std::move(v), domain);
}

std::string to_csv(const CadlagPath& path) {
  std::ostringstream out;
  out.precision(17);
  out << "t";
  for (Eigen::Index i = 0; i < path.dim(); ++i) out << ",value" << i;
  out << '\n';
  for (Eigen::Index k = 0; k < path.values().cols(); ++k) {
    out << path.grid()[k];
    for (Eigen::Index i = 0; i < path.dim(); ++i) out << ',' << path.values()(i, k);
    out << '\n';
  }
  return out.str();
}

}  // namespace robusthedge
