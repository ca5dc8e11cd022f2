#include "dfskit/decompose.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <sstream>

#include "dfskit/errors.hpp"
#include "dfskit/linalg.hpp"

namespace dfskit {

namespace {

// Upper bound on stored algebra basis entries (complex numbers).
constexpr double kAlgebraBudget = 4.0e7;

cplx hs_dot(const Matrix& a, const Matrix& b) { return (a.conjugate().cwiseProduct(b)).sum(); }

// Hilbert-Schmidt orthonormal algebra basis stored as columns of length d^2.
struct Algebra {
  Eigen::Index d = 0;
  Matrix cols;
  Eigen::Index size = 0;
  std::vector<Matrix> gens;  // generators closed under adjoint

  Eigen::Map<const Matrix> element(Eigen::Index k) const { return Eigen::Map<const Matrix>(cols.col(k).data(), d, d); }

  // Adds the part of m orthogonal to the current basis when its norm exceeds
  // tol * scale.
  bool add(const Matrix& m, double scale, double tol) {
    Vector v = Eigen::Map<const Vector>(m.data(), m.size());
    if (v.norm() <= tol * scale) return false;
    for (int pass = 0; pass < 2; ++pass) {
      if (size == 0) break;
      const Vector c = cols.leftCols(size).adjoint() * v;
      v.noalias() -= cols.leftCols(size) * c;
    }
    const double n = v.norm();
    if (n <= tol * scale) return false;
    if (size == cols.cols()) {
      const double dd = static_cast<double>(d) * static_cast<double>(d);
      Eigen::Index cap = std::min<Eigen::Index>(d * d, std::max<Eigen::Index>(16, 2 * cols.cols()));
      cap = std::min<Eigen::Index>(cap, static_cast<Eigen::Index>(kAlgebraBudget / dd));
      if (cap <= size) throw NumericalError("decompose_algebra: generated algebra exceeds the memory budget");
      cols.conservativeResize(d * d, cap);
    }
    cols.col(size++) = v / n;
    return true;
  }
};

bool add_orthogonalized(std::vector<Matrix>& basis, Matrix m, double tol, double scale = -1.0) {
  const double original = scale > 0.0 ? scale : m.norm();
  if (m.norm() <= tol * original || original == 0.0) return false;
  for (int pass = 0; pass < 2; ++pass) {
    for (const auto& e : basis) m -= hs_dot(e, m) * e;
  }
  const double n = m.norm();
  if (n <= tol * original) return false;
  basis.push_back(m / n);
  return true;
}

Algebra build_algebra(const std::vector<Operator>& generators) {
  const Eigen::Index d = generators.front().dim();
  Algebra alg;
  alg.d = d;
  std::vector<Matrix> candidates;
  for (const auto& g : generators) {
    candidates.push_back(g.matrix());
    candidates.push_back(g.matrix().adjoint());
  }
  // Deduplicate the closed generator set itself.
  std::vector<Matrix> gbasis;
  for (const auto& c : candidates) {
    std::vector<Matrix> trial = gbasis;
    if (add_orthogonalized(trial, c, 1e-10)) {
      gbasis = std::move(trial);
      alg.gens.push_back(c);
    }
  }
  alg.add(Matrix::Identity(d, d) / std::sqrt(static_cast<double>(d)), 1.0, 1e-9);
  for (const auto& g : alg.gens) alg.add(g, g.norm(), 1e-9);

  std::vector<Eigen::SparseMatrix<cplx>> sparse;
  std::vector<double> gnorm;
  for (const auto& g : alg.gens) {
    sparse.push_back(g.sparseView());
    gnorm.push_back(g.norm());
  }
  // Every product of basis elements is reached by right multiplication with
  // generators, so one sweep over the growing basis closes it.
  for (Eigen::Index i = 0; i < alg.size && alg.size < d * d; ++i) {
    for (std::size_t k = 0; k < sparse.size(); ++k) {
      const Matrix prod = alg.element(i) * sparse[k];
      alg.add(prod, gnorm[k], 1e-9);
      if (alg.size >= d * d) break;
    }
  }
  return alg;
}

// Projection onto the commutant: sum_k E_k X E_k^dag.
Matrix commutant_projection(const Algebra& alg, const Matrix& x) {
  Matrix acc = Matrix::Zero(x.rows(), x.cols());
  Matrix tmp(x.rows(), x.cols());
  for (Eigen::Index k = 0; k < alg.size; ++k) {
    const auto e = alg.element(k);
    tmp.noalias() = e * x;
    acc.noalias() += tmp * e.adjoint();
  }
  return acc;
}

Matrix polar_unitary(const Matrix& t, double& spread) {
  Eigen::JacobiSVD<Matrix> svd(t, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const RealVector& s = svd.singularValues();
  spread = s.size() == 0 ? 0.0 : (s(0) - s(s.size() - 1)) / std::max(s(0), 1e-300);
  return svd.matrixU() * svd.matrixV().adjoint();
}

double block_residual(const Algebra& alg, const SubsystemBlock& b) {
  double worst = 0.0;
  const Matrix& basis = b.basis;
  for (const auto& g : alg.gens) {
    const Matrix gb = g * basis;
    const Matrix m = basis.adjoint() * gb;
    worst = std::max(worst, (gb - basis * m).norm() / std::max(1.0, g.norm()));
    const Eigen::Index dj = b.block_dim;
    const Matrix m0 = m.block(0, 0, dj, dj);
    for (Eigen::Index l = 0; l < b.multiplicity; ++l) {
      for (Eigen::Index k = 0; k < b.multiplicity; ++k) {
        const Matrix mk = m.block(l * dj, k * dj, dj, dj);
        const double dev = l == k ? (mk - m0).norm() : mk.norm();
        worst = std::max(worst, dev / std::max(1.0, g.norm()));
      }
    }
  }
  return worst;
}

struct Attempt {
  std::vector<SubsystemBlock> blocks;
  double residual = 0.0;
  std::string failure;
};

Attempt try_decompose(const Algebra& alg, Eigen::Index d, std::uint64_t seed, double tol) {
  Attempt out;
  linalg::Rng rng(seed);
  const Matrix y = commutant_projection(alg, linalg::random_hermitian(d, rng));
  const Matrix z = commutant_projection(alg, linalg::random_hermitian(d, rng));

  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (y + y.adjoint()));
  const double yscale = std::max(1e-300, es.eigenvalues().cwiseAbs().maxCoeff());
  const auto clusters = linalg::cluster_values(es.eigenvalues().cast<cplx>(), 1e-9 * yscale);
  std::vector<Matrix> frames;
  for (const auto& cl : clusters) {
    Matrix f(d, static_cast<Eigen::Index>(cl.size()));
    for (std::size_t j = 0; j < cl.size(); ++j) f.col(static_cast<Eigen::Index>(j)) = es.eigenvectors().col(cl[j]);
    frames.push_back(std::move(f));
  }

  // Clusters belonging to the same block are linked by a generic commutant
  // element; clusters of different blocks are not.
  const std::size_t nc = frames.size();
  const double zscale = std::max(1e-300, z.norm());
  std::vector<Eigen::Index> offset(nc + 1, 0);
  for (std::size_t a = 0; a < nc; ++a) offset[a + 1] = offset[a] + frames[a].cols();
  Matrix all(d, offset[nc]);
  for (std::size_t a = 0; a < nc; ++a) all.middleCols(offset[a], frames[a].cols()) = frames[a];
  const Matrix w = all.adjoint() * z * all;
  auto coupling = [&](std::size_t a, std::size_t b) {
    return w.block(offset[a], offset[b], frames[a].cols(), frames[b].cols());
  };
  std::vector<std::size_t> parent(nc);
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  Eigen::MatrixXd strength = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(nc), static_cast<Eigen::Index>(nc));
  for (std::size_t a = 0; a < nc; ++a) {
    for (std::size_t b = 0; b < nc; ++b) {
      if (a == b) continue;
      const double s = coupling(a, b).norm() / zscale;
      strength(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = s;
      if (s > 1e-7) parent[find(a)] = find(b);
    }
  }
  std::vector<std::vector<std::size_t>> groups;
  std::vector<long> slot(nc, -1);
  for (std::size_t a = 0; a < nc; ++a) {
    const std::size_t r = find(a);
    if (slot[r] < 0) {
      slot[r] = static_cast<long>(groups.size());
      groups.emplace_back();
    }
    groups[static_cast<std::size_t>(slot[r])].push_back(a);
  }

  for (const auto& group : groups) {
    const Eigen::Index dj = frames[group.front()].cols();
    for (std::size_t a : group) {
      if (frames[a].cols() != dj) {
        out.failure = "copies of one block have different sizes";
        return out;
      }
    }
    // Align every copy to the first through a spanning tree of strong links.
    const std::size_t n = group.size();
    std::vector<Matrix> aligned(n), rot(n);
    std::vector<bool> done(n, false);
    aligned[0] = frames[group[0]];
    rot[0] = Matrix::Identity(dj, dj);
    done[0] = true;
    std::queue<std::size_t> q;
    q.push(0);
    while (!q.empty()) {
      const std::size_t p = q.front();
      q.pop();
      for (std::size_t l = 0; l < n; ++l) {
        if (done[l]) continue;
        const double s = strength(static_cast<Eigen::Index>(group[l]), static_cast<Eigen::Index>(group[p]));
        if (s <= 1e-7) continue;
        const Matrix t = coupling(group[l], group[p]) * rot[p];
        double spread = 0.0;
        rot[l] = polar_unitary(t, spread);
        if (spread > 1e-6) {
          out.failure = "intertwiner between copies is not proportional to a unitary";
          return out;
        }
        aligned[l] = frames[group[l]] * rot[l];
        done[l] = true;
        q.push(l);
      }
    }
    if (std::find(done.begin(), done.end(), false) != done.end()) {
      out.failure = "copies of one block could not be aligned";
      return out;
    }
    SubsystemBlock block;
    block.multiplicity = static_cast<Eigen::Index>(n);
    block.block_dim = dj;
    block.basis.resize(d, static_cast<Eigen::Index>(n) * dj);
    for (std::size_t l = 0; l < n; ++l) block.basis.middleCols(static_cast<Eigen::Index>(l) * dj, dj) = aligned[l];

    // The algebra must be all of M(d_J) on one copy.
    std::vector<Matrix> restricted;
    const Matrix b0 = aligned[0];
    for (Eigen::Index k = 0; k < alg.size; ++k) {
      add_orthogonalized(restricted, b0.adjoint() * alg.element(k) * b0, 1e-8, 1.0);
      if (static_cast<Eigen::Index>(restricted.size()) == dj * dj) break;
    }
    if (static_cast<Eigen::Index>(restricted.size()) != dj * dj) {
      out.failure = "algebra is reducible on a block copy";
      return out;
    }
    block.residual = block_residual(alg, block);
    out.residual = std::max(out.residual, block.residual);
    out.blocks.push_back(std::move(block));
  }
  if (out.residual > tol) out.failure = "block structure residual above tolerance";
  return out;
}

Eigen::Index leading_row(const Matrix& basis) {
  for (Eigen::Index i = 0; i < basis.rows(); ++i) {
    if (basis.row(i).norm() > 1e-8) return i;
  }
  return basis.rows();
}

} // namespace

Eigen::Index SubsystemDecomposition::covered_dim() const {
  Eigen::Index total = 0;
  for (const auto& b : blocks) total += b.multiplicity * b.block_dim;
  return total;
}

Matrix SubsystemDecomposition::full_basis() const {
  Matrix out(static_cast<Eigen::Index>(space.dim()), covered_dim());
  Eigen::Index col = 0;
  for (const auto& b : blocks) {
    out.middleCols(col, b.basis.cols()) = b.basis;
    col += b.basis.cols();
  }
  return out;
}

SubsystemDecomposition decompose_algebra(const std::vector<Operator>& generators, const DecomposeOptions& opts) {
  if (generators.empty()) throw ValidationError("decompose_algebra: no generators");
  const HilbertSpace& space = generators.front().space();
  for (const auto& g : generators) {
    if (!(g.space() == space)) throw ValidationError("decompose_algebra: generators live on different spaces");
  }
  require_working_dim(space.dim(), "decompose_algebra");
  const Algebra alg = build_algebra(generators);
  const auto d = static_cast<Eigen::Index>(space.dim());

  Attempt best;
  best.residual = std::numeric_limits<double>::infinity();
  for (std::uint64_t attempt = 0; attempt < 4; ++attempt) {
    Attempt a = try_decompose(alg, d, opts.seed + attempt, opts.tol);
    if (a.failure.empty()) {
      best = std::move(a);
      break;
    }
    if (a.blocks.size() > 0 && a.residual < best.residual) best = std::move(a);
    if (attempt == 3) {
      std::ostringstream os;
      os << "decompose_algebra: block structure did not converge (" << a.failure << ", residual "
         << (best.residual == std::numeric_limits<double>::infinity() ? a.residual : best.residual) << ")";
      throw NumericalError(os.str());
    }
  }

  std::sort(best.blocks.begin(), best.blocks.end(), [](const SubsystemBlock& a, const SubsystemBlock& b) {
    if (a.block_dim != b.block_dim) return a.block_dim > b.block_dim;
    if (a.multiplicity != b.multiplicity) return a.multiplicity > b.multiplicity;
    return leading_row(a.basis) < leading_row(b.basis);
  });
  SubsystemDecomposition out{space, std::move(best.blocks)};
  for (std::size_t i = 0; i < out.blocks.size(); ++i) {
    std::ostringstream os;
    os << "block" << i << "(d=" << out.blocks[i].block_dim << ",n=" << out.blocks[i].multiplicity << ")";
    out.blocks[i].label = os.str();
  }
  return out;
}

void label_angular_momentum(SubsystemDecomposition& decomp) {
  for (auto& b : decomp.blocks) {
    const int two_j = static_cast<int>(b.block_dim) - 1;
    b.two_j = two_j;
    b.label = two_j % 2 == 0 ? "J=" + std::to_string(two_j / 2) : "J=" + std::to_string(two_j) + "/2";
  }
}

SubsystemReport verify_subsystem_condition(const SubsystemDecomposition& decomp, const std::vector<Operator>& ops,
                                           double tol) {
  SubsystemReport report;
  for (const auto& op : ops) {
    if (!(op.space() == decomp.space)) throw ValidationError("verify_subsystem_condition: space mismatch");
  }
  for (const auto& b : decomp.blocks) {
    if (b.basis.rows() != static_cast<Eigen::Index>(decomp.space.dim()) ||
        b.basis.cols() != b.multiplicity * b.block_dim) {
      throw ValidationError("verify_subsystem_condition: block basis has the wrong shape");
    }
    const Eigen::Index dj = b.block_dim;
    for (std::size_t a = 0; a < ops.size(); ++a) {
      const Matrix sb = ops[a].matrix() * b.basis;
      const Matrix m = b.basis.adjoint() * sb;
      BlockCheck c;
      c.label = b.label;
      c.op_index = a;
      c.leakage = (sb - b.basis * m).norm();
      const Matrix m0 = m.block(0, 0, dj, dj);
      for (Eigen::Index l = 0; l < b.multiplicity; ++l) {
        for (Eigen::Index k = 0; k < b.multiplicity; ++k) {
          const Matrix mk = m.block(l * dj, k * dj, dj, dj);
          c.lambda_deviation = std::max(c.lambda_deviation, l == k ? (mk - m0).norm() : mk.norm());
        }
      }
      report.max_deviation = std::max({report.max_deviation, c.lambda_deviation, c.leakage});
      report.checks.push_back(c);
    }
  }
  report.pass = report.max_deviation <= tol;
  return report;
}

SubsystemReport verify_subsystem_condition(const SubsystemDecomposition& decomp, const ErrorModel& model,
                                           double tol) {
  if (!(model.space == decomp.space)) throw ValidationError("verify_subsystem_condition: space mismatch");
  return verify_subsystem_condition(decomp, model.ops, tol);
}

} // namespace dfskit
