#pragma once

// Brute-force reference solvers used to check the closed forms:
// backward induction on an explicit game tree, and fictitious play on a
// discretized spending contest.

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "frontguard/contest.hpp"
#include "frontguard/error.hpp"
#include "frontguard/game.hpp"

namespace frontguard {

// Two-player perfect-information tree. Node 0 is the root.
struct GameTree {
  struct Node {
    int player = -1;  // 0 = A, 1 = B, -1 = leaf
    std::vector<std::size_t> children;
    std::vector<Action> moves;  // label of the edge to each child
    double payoff[2] = {0.0, 0.0};
  };
  std::vector<Node> nodes;

  std::size_t add_leaf(double a, double b) {
    Node n;
    n.payoff[0] = a;
    n.payoff[1] = b;
    nodes.push_back(n);
    return nodes.size() - 1;
  }
  std::size_t add_decision(int player) {
    Node n;
    n.player = player;
    nodes.push_back(n);
    return nodes.size() - 1;
  }
  void connect(std::size_t parent, Action move, std::size_t child) {
    nodes[parent].children.push_back(child);
    nodes[parent].moves.push_back(move);
  }
};

// Mover picks the child with the strictly highest own payoff; the first child wins ties.
struct TreeSolution {
  std::vector<std::size_t> choice;  // per node, index into children
  std::vector<std::array<double, 2>> value;
};

inline TreeSolution backward_induction(const GameTree& tree) {
  TreeSolution sol;
  sol.choice.assign(tree.nodes.size(), 0);
  sol.value.assign(tree.nodes.size(), {0.0, 0.0});
  // Children are always created after their parent, so reverse index order is a valid post-order.
  for (std::size_t k = tree.nodes.size(); k-- > 0;) {
    const auto& node = tree.nodes[k];
    if (node.player < 0) {
      sol.value[k] = {node.payoff[0], node.payoff[1]};
      continue;
    }
    std::size_t best = 0;
    for (std::size_t j = 1; j < node.children.size(); ++j)
      if (sol.value[node.children[j]][node.player] > sol.value[node.children[best]][node.player]) best = j;
    sol.choice[k] = best;
    sol.value[k] = sol.value[node.children[best]];
  }
  return sol;
}

// Tree for one state: A sends nothing or her best message; after seeing a
// message B sends nothing or any fast counter.
inline GameTree benchmark_tree(const GameSpec& spec, StateIndex s) {
  const auto& k = spec.costs();
  GameTree tree;
  const std::size_t root = tree.add_decision(0);
  tree.connect(root, std::nullopt, tree.add_leaf(0.0, 0.0));
  const MessageIndex a = honest_message(spec, s);
  const double benefit = spec.payoff_a(a, s);
  const std::size_t b_node = tree.add_decision(1);
  tree.connect(root, a, b_node);
  tree.connect(b_node, std::nullopt, tree.add_leaf(benefit - k.c, 0.0));
  for (MessageIndex b = 0; b < spec.num_messages(); ++b) {
    // Chance node (front-run lands with probability q) folded into its expectation.
    const double ua = (1.0 - k.q) * benefit - k.c;
    const double ub = k.q * spec.payoff_b(b, a, s) - k.f;
    tree.connect(b_node, b, tree.add_leaf(ua, ub));
  }
  return tree;
}

inline EquilibriumOutcome oracle_backward_induction(const GameSpec& spec) {
  if (spec.num_states() > 8 || spec.num_messages() > 8)
    throw SizeLimit("backward-induction oracle is limited to 8 states and 8 messages");
  EquilibriumOutcome out;
  const std::size_t ns = spec.num_states();
  out.a_action.resize(ns);
  out.b_action.resize(ns);
  out.per_state_payoffs.resize(ns);
  for (StateIndex s = 0; s < ns; ++s) {
    const GameTree tree = benchmark_tree(spec, s);
    const TreeSolution sol = backward_induction(tree);
    const auto& root = tree.nodes[0];
    const std::size_t a_pick = sol.choice[0];
    out.a_action[s] = root.moves[a_pick];
    if (out.a_action[s]) {
      const std::size_t b_node = root.children[a_pick];
      out.b_action[s] = tree.nodes[b_node].moves[sol.choice[b_node]];
    }
    out.per_state_payoffs[s] = {sol.value[0][0], sol.value[0][1]};
  }
  out.classification = classify_interaction(spec);
  return out;
}

struct FictitiousPlayResult {
  std::vector<double> grid;
  Eigen::VectorXd mix1;  // empirical frequency of each grid spend
  Eigen::VectorXd mix2;
  double payoff1 = 0.0;
  double payoff2 = 0.0;
  double mean_spend1 = 0.0;
  double mean_spend2 = 0.0;
  bool non_convergence = false;
};

// Fictitious play on the grid [0, 1.1 * max f_upper]. The higher spender
// wins the right to attack; equal spends split it evenly. Payoffs are those
// of the empirical mixtures played against each other.
inline FictitiousPlayResult oracle_fictitious_play(const ContestSpec& spec, std::size_t grid_points = 60,
                                                   std::size_t rounds = 200000) {
  if (grid_points < 2) throw Error("fictitious play needs at least two grid points");
  validate_contest(spec);
  const double top = 1.1 * std::max(f_upper(spec, 1), f_upper(spec, 2));
  FictitiousPlayResult out;
  const auto n = static_cast<Eigen::Index>(grid_points);
  out.grid.resize(grid_points);
  for (std::size_t i = 0; i < grid_points; ++i)
    out.grid[i] = top * static_cast<double>(i) / static_cast<double>(grid_points - 1);

  Eigen::MatrixXd u1(n, n), u2(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const double x = out.grid[i], y = out.grid[j];
      const double win = x > y ? 1.0 : (x == y ? 0.5 : 0.0);
      u1(i, j) = win * spec.prize * spec.gamma1 * spec.curve(x) - x;
      u2(i, j) = (1.0 - win) * spec.prize * spec.gamma2 * spec.curve(y) - y;  // row i = attacker 1's spend
    }
  }

  Eigen::VectorXd count1 = Eigen::VectorXd::Zero(n), count2 = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd score1 = Eigen::VectorXd::Zero(n);  // sum over history of u1(., opponent move)
  Eigen::VectorXd score2 = Eigen::VectorXd::Zero(n);  // sum over history of u2(opponent move, .)
  Eigen::Index move1 = 0, move2 = 0;
  auto mixture_payoffs = [&](double& p1, double& p2) {
    const Eigen::VectorXd m1 = count1 / count1.sum();
    const Eigen::VectorXd m2 = count2 / count2.sum();
    p1 = m1.dot(u1 * m2);
    p2 = m1.dot(u2 * m2);
  };
  const std::size_t checkpoint = rounds - rounds / 10;
  double early1 = 0.0, early2 = 0.0;
  for (std::size_t t = 0; t < rounds; ++t) {
    count1(move1) += 1.0;
    count2(move2) += 1.0;
    score1 += u1.col(move2);
    score2 += u2.row(move1).transpose();
    score1.maxCoeff(&move1);
    score2.maxCoeff(&move2);
    if (t + 1 == checkpoint) mixture_payoffs(early1, early2);
  }
  mixture_payoffs(out.payoff1, out.payoff2);
  out.mix1 = count1 / count1.sum();
  out.mix2 = count2 / count2.sum();
  for (Eigen::Index i = 0; i < n; ++i) {
    out.mean_spend1 += out.mix1(i) * out.grid[i];
    out.mean_spend2 += out.mix2(i) * out.grid[i];
  }
  const double scale = std::max(std::abs(out.payoff1), 0.01 * spec.prize);
  out.non_convergence = std::abs(out.payoff1 - early1) > 0.01 * scale || std::abs(out.payoff2 - early2) > 0.01 * scale;
  return out;
}

}  // namespace frontguard
