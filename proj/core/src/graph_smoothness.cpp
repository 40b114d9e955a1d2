#include "cbsae/graph_smoothness.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include "cbsae/error.hpp"

namespace cbsae {

namespace {

std::string pair_str(std::size_t i, std::size_t j) {
  std::ostringstream os;
  os << "(" << i << "," << j << ")";
  return os.str();
}

}  // namespace

SimilaritySpec::SimilaritySpec(std::size_t size,
                               std::vector<SimilarityEntry> entries)
    : size_(size) {
  std::map<std::pair<std::size_t, std::size_t>, double> cells;
  for (const auto& e : entries) {
    if (e.i >= size || e.j >= size) {
      throw ValidationError("similarity index out of range at " +
                            pair_str(e.i, e.j));
    }
    if (!std::isfinite(e.q) || e.q < 0.0) {
      throw ValidationError("negative or non-finite similarity at " +
                            pair_str(e.i, e.j));
    }
    if (e.i == e.j) continue;
    auto [it, inserted] = cells.emplace(std::make_pair(e.i, e.j), e.q);
    if (!inserted) {
      throw ValidationError("duplicate similarity entry at " +
                            pair_str(e.i, e.j));
    }
  }
  for (const auto& [key, q] : cells) {
    if (q == 0.0) continue;
    const auto mirror = cells.find({key.second, key.first});
    const double back = mirror == cells.end() ? 0.0 : mirror->second;
    if (back != q) {
      const auto lo = std::min(key.first, key.second);
      const auto hi = std::max(key.first, key.second);
      throw ValidationError("asymmetric similarity at " + pair_str(lo, hi));
    }
    entries_.push_back({key.first, key.second, q});
  }
}

SimilaritySpec SimilaritySpec::from_edges(
    std::size_t size, const std::vector<SimilarityEntry>& edges) {
  std::vector<SimilarityEntry> both;
  both.reserve(2 * edges.size());
  for (const auto& e : edges) {
    both.push_back(e);
    if (e.i != e.j) both.push_back({e.j, e.i, e.q});
  }
  return SimilaritySpec(size, std::move(both));
}

SimilaritySpec SimilaritySpec::from_dense(const Eigen::MatrixXd& q) {
  if (q.rows() != q.cols()) {
    throw ValidationError("similarity matrix must be square");
  }
  std::vector<SimilarityEntry> entries;
  for (Eigen::Index i = 0; i < q.rows(); ++i) {
    for (Eigen::Index j = 0; j < q.cols(); ++j) {
      if (q(i, j) != 0.0) {
        entries.push_back({static_cast<std::size_t>(i),
                           static_cast<std::size_t>(j), q(i, j)});
      }
    }
  }
  return SimilaritySpec(static_cast<std::size_t>(q.rows()), std::move(entries));
}

Eigen::MatrixXd SimilaritySpec::dense() const {
  const auto m = static_cast<Eigen::Index>(size_);
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(m, m);
  for (const auto& e : entries_) {
    q(static_cast<Eigen::Index>(e.i), static_cast<Eigen::Index>(e.j)) = e.q;
  }
  return q;
}

SmoothnessMatrix::SmoothnessMatrix(Eigen::MatrixXd omega)
    : omega_(std::move(omega)) {
  if (omega_.rows() != omega_.cols()) {
    throw ValidationError("smoothness matrix must be square");
  }
  if (!omega_.allFinite()) {
    throw ValidationError("smoothness matrix has non-finite entries");
  }
  const double scale = omega_.size() == 0 ? 0.0 : omega_.cwiseAbs().maxCoeff();
  if ((omega_ - omega_.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale &&
      omega_.size() > 0) {
    throw ValidationError("smoothness matrix must be symmetric");
  }
}

SmoothnessMatrix SmoothnessMatrix::zero(std::size_t m) {
  const auto n = static_cast<Eigen::Index>(m);
  return SmoothnessMatrix(Eigen::MatrixXd::Zero(n, n));
}

double SmoothnessMatrix::quadratic_form(const Eigen::VectorXd& delta) const {
  if (delta.size() != omega_.rows()) {
    throw ValidationError("quadratic_form: dimension mismatch");
  }
  return delta.dot(omega_ * delta);
}

SmoothnessMatrix build_omega(const SimilaritySpec& spec) {
  const auto m = static_cast<Eigen::Index>(spec.size());
  Eigen::MatrixXd omega = Eigen::MatrixXd::Zero(m, m);
  // Row sums and column sums each land on the diagonal; Q is symmetric so the
  // two contributions coincide, but both are accumulated as written.
  for (const auto& e : spec.entries()) {
    const auto i = static_cast<Eigen::Index>(e.i);
    const auto j = static_cast<Eigen::Index>(e.j);
    omega(i, i) += e.q;  // Q_row
    omega(j, j) += e.q;  // Q_col
    omega(i, j) -= 2.0 * e.q;
  }
  return SmoothnessMatrix(std::move(omega));
}

SimilaritySpec load_adjacency(const std::vector<Edge>& edges,
                              const std::vector<std::string>& labels) {
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t k = 0; k < labels.size(); ++k) {
    if (!index.emplace(labels[k], k).second) {
      throw ValidationError("duplicate area label " + labels[k]);
    }
  }
  std::map<std::pair<std::size_t, std::size_t>, bool> seen;
  std::vector<SimilarityEntry> upper;
  for (const auto& e : edges) {
    const auto a = index.find(e.from);
    if (a == index.end()) throw ValidationError("unknown label " + e.from);
    const auto b = index.find(e.to);
    if (b == index.end()) throw ValidationError("unknown label " + e.to);
    if (!std::isfinite(e.weight) || e.weight < 0.0) {
      throw ValidationError("negative weight on edge " + e.from + "–" + e.to);
    }
    if (a->second == b->second) {
      throw ValidationError("self-loop on " + e.from);
    }
    const auto key = std::minmax(a->second, b->second);
    if (!seen.emplace(std::make_pair(key.first, key.second), true).second) {
      // Report in label order of the first occurrence.
      const auto& lo = labels[key.first];
      const auto& hi = labels[key.second];
      throw ValidationError("duplicate edge " + lo + "–" + hi);
    }
    upper.push_back({a->second, b->second, e.weight});
  }
  return SimilaritySpec::from_edges(labels.size(), upper);
}

std::vector<std::vector<std::size_t>> connected_components(
    const SimilaritySpec& spec) {
  const std::size_t m = spec.size();
  std::vector<std::size_t> parent(m);
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  auto find = [&](std::size_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  };
  for (const auto& e : spec.entries()) {
    if (e.q <= 0.0) continue;
    const auto ra = find(e.i);
    const auto rb = find(e.j);
    if (ra != rb) parent[std::max(ra, rb)] = std::min(ra, rb);
  }
  std::map<std::size_t, std::vector<std::size_t>> groups;
  for (std::size_t k = 0; k < m; ++k) groups[find(k)].push_back(k);
  std::vector<std::vector<std::size_t>> out;
  out.reserve(groups.size());
  for (auto& [root, members] : groups) out.push_back(std::move(members));
  return out;
}

}  // namespace cbsae
