#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace cbsae {

struct SimilarityEntry {
  std::size_t i;
  std::size_t j;
  double q;
};

/// Sparse symmetric similarity matrix Q with nonnegative entries. Entries are
/// validated on construction; diagonal entries are accepted and dropped since
/// self-similarity cannot contribute to the penalty.
class SimilaritySpec {
 public:
  SimilaritySpec() = default;

  /// Both (i, j) and (j, i) must be present with equal values when either is
  /// nonzero. Throws ValidationError naming the offending pair otherwise.
  SimilaritySpec(std::size_t size, std::vector<SimilarityEntry> entries);

  /// Builds a symmetric spec from an upper (or lower) triangle: each listed
  /// edge is mirrored.
  static SimilaritySpec from_edges(std::size_t size,
                                   const std::vector<SimilarityEntry>& edges);

  static SimilaritySpec from_dense(const Eigen::MatrixXd& q);

  std::size_t size() const { return size_; }
  const std::vector<SimilarityEntry>& entries() const { return entries_; }

  Eigen::MatrixXd dense() const;

  std::size_t nonzero_count() const { return entries_.size(); }

 private:
  std::size_t size_ = 0;
  std::vector<SimilarityEntry> entries_;  // off-diagonal, both orientations
};

/// Penalty matrix Omega with delta' Omega delta = sum_{i,i'} (d_i - d_i')^2 q_ii'.
class SmoothnessMatrix {
 public:
  SmoothnessMatrix() = default;
  explicit SmoothnessMatrix(Eigen::MatrixXd omega);

  static SmoothnessMatrix zero(std::size_t m);

  std::size_t size() const { return static_cast<std::size_t>(omega_.rows()); }
  const Eigen::MatrixXd& matrix() const { return omega_; }

  double quadratic_form(const Eigen::VectorXd& delta) const;

 private:
  Eigen::MatrixXd omega_;
};

/// Omega = Q_row + Q_col - 2Q, where Q_row and Q_col are the diagonal matrices
/// of row and column sums. For a 0/1 adjacency matrix this is twice the graph
/// Laplacian.
SmoothnessMatrix build_omega(const SimilaritySpec& spec);

struct Edge {
  std::string from;
  std::string to;
  double weight = 1.0;
};

/// Maps labelled edges onto indices fixed by the order of `labels`.
/// Errors: unknown label, duplicate edge (in either orientation), negative
/// weight, self-loop.
SimilaritySpec load_adjacency(const std::vector<Edge>& edges,
                              const std::vector<std::string>& labels);

/// Components of the positive-weight graph, each sorted ascending, ordered by
/// smallest member. Isolated areas form singletons.
std::vector<std::vector<std::size_t>> connected_components(
    const SimilaritySpec& spec);

}  // namespace cbsae
