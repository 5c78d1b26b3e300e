#pragma once

// Support enumeration for two-player normal-form games. Finds every
// equilibrium of a nondegenerate game; for degenerate games it returns the
// equilibria whose supports have equal size and uniquely determine the
// strategies.

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <vector>

namespace frontguard {

struct BimatrixEquilibrium {
  Eigen::VectorXd row;
  Eigen::VectorXd col;
  double row_payoff = 0.0;
  double col_payoff = 0.0;
};

namespace detail {

// Calls visit(indices) for every size-k subset of {0..n-1} in lexicographic order.
template <class Visit>
void for_each_combination(std::size_t n, std::size_t k, Visit&& visit) {
  if (k == 0 || k > n) return;
  std::vector<std::size_t> idx(k);
  for (std::size_t i = 0; i < k; ++i) idx[i] = i;
  while (true) {
    visit(idx);
    std::size_t i = k;
    while (i > 0 && idx[i - 1] == n - k + (i - 1)) --i;
    if (i == 0) return;
    ++idx[i - 1];
    for (std::size_t j = i; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
}

// Mixed strategy over `support` that makes the opponent indifferent across
// its own support. `payoff(i, j)` is the opponent's payoff when the opponent
// plays its_support[i] and we play support[j]. Returns false if singular.
template <class Payoff>
bool indifference_strategy(std::size_t k, Payoff&& payoff, Eigen::VectorXd& strategy, double& value) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(k + 1, k + 1);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(k + 1);
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < k; ++j) m(i, j) = payoff(i, j);
    m(i, k) = -1.0;
  }
  for (std::size_t j = 0; j < k; ++j) m(k, j) = 1.0;
  rhs(k) = 1.0;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(m);
  if (!lu.isInvertible()) return false;
  Eigen::VectorXd sol = lu.solve(rhs);
  strategy = sol.head(k);
  value = sol(k);
  return true;
}

}  // namespace detail

inline std::vector<BimatrixEquilibrium> support_enumeration(const Eigen::MatrixXd& row_payoff,
                                                            const Eigen::MatrixXd& col_payoff,
                                                            double tol = 1e-9) {
  const std::size_t m = static_cast<std::size_t>(row_payoff.rows());
  const std::size_t n = static_cast<std::size_t>(row_payoff.cols());
  std::vector<BimatrixEquilibrium> found;

  auto duplicate = [&](const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
    for (const auto& e : found)
      if ((e.row - x).cwiseAbs().maxCoeff() < 1e-7 && (e.col - y).cwiseAbs().maxCoeff() < 1e-7) return true;
    return false;
  };

  for (std::size_t k = 1; k <= std::min(m, n); ++k) {
    detail::for_each_combination(m, k, [&](const std::vector<std::size_t>& rows) {
      detail::for_each_combination(n, k, [&](const std::vector<std::size_t>& cols) {
        Eigen::VectorXd y_s, x_s;
        double v = 0.0, u = 0.0;
        // Column mix makes the row player indifferent across `rows`.
        if (!detail::indifference_strategy(
                k, [&](std::size_t i, std::size_t j) { return row_payoff(rows[i], cols[j]); }, y_s, v))
          return;
        if (!detail::indifference_strategy(
                k, [&](std::size_t i, std::size_t j) { return col_payoff(rows[j], cols[i]); }, x_s, u))
          return;
        if (y_s.minCoeff() < -tol || x_s.minCoeff() < -tol) return;

        Eigen::VectorXd x = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m));
        Eigen::VectorXd y = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
        for (std::size_t i = 0; i < k; ++i) x(rows[i]) = std::max(0.0, x_s(i));
        for (std::size_t j = 0; j < k; ++j) y(cols[j]) = std::max(0.0, y_s(j));
        x /= x.sum();
        y /= y.sum();

        const Eigen::VectorXd row_values = row_payoff * y;
        const Eigen::VectorXd col_values = col_payoff.transpose() * x;
        const double row_value = x.dot(row_values);
        const double col_value = y.dot(col_values);
        if (row_values.maxCoeff() > row_value + tol) return;
        if (col_values.maxCoeff() > col_value + tol) return;
        if (duplicate(x, y)) return;
        found.push_back({x, y, row_value, col_value});
      });
    });
  }
  return found;
}

}  // namespace frontguard
