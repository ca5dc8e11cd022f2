#include "dfskit/finder.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "dfskit/errors.hpp"
#include "dfskit/linalg.hpp"

namespace dfskit {

namespace {

Vector vec(const Matrix& m) { return Eigen::Map<const Vector>(m.data(), m.size()); }

// Orthonormal Hilbert-Schmidt basis of the op span, as columns.
Matrix hs_basis(const std::vector<Operator>& ops, double tol) {
  if (ops.empty()) return Matrix();
  Matrix cols(ops.front().matrix().size(), static_cast<Eigen::Index>(ops.size()));
  for (std::size_t i = 0; i < ops.size(); ++i) cols.col(static_cast<Eigen::Index>(i)) = vec(ops[i].matrix());
  return linalg::orthonormal_span(cols, tol);
}

double snap(double x) {
  const double r = std::round(x);
  if (std::abs(x - r) <= 1e-10 * std::max(1.0, std::abs(r))) x = r;
  return x == 0.0 ? 0.0 : x;
}

cplx snap(cplx c) { return {snap(c.real()), snap(c.imag())}; }

bool tuple_less(const std::vector<cplx>& a, const std::vector<cplx>& b) {
  for (std::size_t i = 0; i < std::min(a.size(), b.size()); ++i) {
    if (a[i].real() != b[i].real()) return a[i].real() < b[i].real();
    if (a[i].imag() != b[i].imag()) return a[i].imag() < b[i].imag();
  }
  return a.size() < b.size();
}

struct Prepared {
  std::size_t index;
  double scale;  // max(1, ||S||_F)
  bool hermitian;
  bool normal;
  bool diagonal;
};

struct Branch {
  Matrix q;
  std::vector<cplx> tuple;       // one entry per op processed so far
  std::vector<Eigen::Index> coords;  // set when q selects basis vectors
  bool coordinate = false;
};

Matrix selection(Eigen::Index d, const std::vector<Eigen::Index>& idx) {
  Matrix q = Matrix::Zero(d, static_cast<Eigen::Index>(idx.size()));
  for (std::size_t j = 0; j < idx.size(); ++j) q(idx[j], static_cast<Eigen::Index>(j)) = 1.0;
  return q;
}

void split_branch(const Branch& b, const Operator& op, const Prepared& p, const linalg::OpAction& act,
                  const FinderOptions& opts, std::vector<Branch>& out) {
  const Eigen::Index d = op.dim();
  const double ctol = opts.cluster_tol * p.scale;
  const double ntol = opts.null_tol * p.scale;

  if (b.coordinate && p.diagonal) {
    Vector values(static_cast<Eigen::Index>(b.coords.size()));
    for (std::size_t j = 0; j < b.coords.size(); ++j) {
      values(static_cast<Eigen::Index>(j)) = op.matrix()(b.coords[j], b.coords[j]);
    }
    for (const auto& cluster : linalg::cluster_values(values, ctol)) {
      Branch nb;
      cplx mean = 0.0;
      for (Eigen::Index j : cluster) {
        nb.coords.push_back(b.coords[static_cast<std::size_t>(j)]);
        mean += values(j);
      }
      mean /= static_cast<double>(cluster.size());
      nb.coordinate = true;
      nb.q = selection(d, nb.coords);
      nb.tuple = b.tuple;
      nb.tuple.push_back(mean);
      out.push_back(std::move(nb));
    }
    return;
  }

  const Eigen::Index k = b.q.cols();
  const Matrix sq = act.apply(b.q);
  if (sq.norm() <= ntol) {
    Branch nb = b;
    nb.tuple.push_back(0.0);
    out.push_back(std::move(nb));
    return;
  }
  const Matrix c = b.q.adjoint() * sq;
  const bool c_hermitian = (c - c.adjoint()).cwiseAbs().maxCoeff() <= 1e-12 * p.scale;

  Vector ev(k);
  Matrix evec;
  if (c_hermitian) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (c + c.adjoint()));
    ev = es.eigenvalues().cast<cplx>();
    evec = es.eigenvectors();
  } else {
    Eigen::ComplexEigenSolver<Matrix> es(c, false);
    ev = es.eigenvalues();
  }

  std::vector<bool> used(static_cast<std::size_t>(k), false);
  std::vector<cplx> accepted;
  // Defective (Jordan) structure spreads eigenvalues of the compression, so
  // clusters that find no null vector are retried at looser scales.
  for (double rel : {opts.cluster_tol, 1e-6, 1e-4, 1e-2, 1e-1}) {
    std::vector<Eigen::Index> open;
    for (Eigen::Index i = 0; i < k; ++i) {
      if (!used[static_cast<std::size_t>(i)]) open.push_back(i);
    }
    if (open.empty()) break;
    Vector vals(static_cast<Eigen::Index>(open.size()));
    for (std::size_t i = 0; i < open.size(); ++i) vals(static_cast<Eigen::Index>(i)) = ev(open[i]);
    for (const auto& cl : linalg::cluster_values(vals, std::max(rel, opts.cluster_tol) * p.scale)) {
      std::vector<Eigen::Index> members;
      cplx mean = 0.0;
      for (Eigen::Index j : cl) {
        members.push_back(open[static_cast<std::size_t>(j)]);
        mean += vals(j);
      }
      mean /= static_cast<double>(members.size());
      auto mark = [&] {
        for (Eigen::Index m : members) used[static_cast<std::size_t>(m)] = true;
      };
      if (std::any_of(accepted.begin(), accepted.end(), [&](cplx a) { return std::abs(a - mean) <= ctol; })) {
        mark();
        continue;
      }
      Matrix nvec;
      if (c_hermitian && evec.size() > 0 && rel == opts.cluster_tol) {
        Matrix v(k, static_cast<Eigen::Index>(members.size()));
        for (std::size_t j = 0; j < members.size(); ++j) v.col(static_cast<Eigen::Index>(j)) = evec.col(members[j]);
        const Matrix r = sq * v - mean * (b.q * v);
        if (r.norm() <= ntol) nvec = v;
      }
      if (nvec.size() == 0) nvec = linalg::null_space(sq - mean * b.q, ntol);
      if (nvec.cols() == 0) continue;
      const cplx refined = (nvec.adjoint() * c * nvec).trace() / static_cast<double>(nvec.cols());
      accepted.push_back(refined);
      mark();
      Branch nb;
      nb.q = b.q * nvec;
      nb.tuple = b.tuple;
      nb.tuple.push_back(refined);
      out.push_back(std::move(nb));
    }
  }
}

double relative_residual(const Operator& op, const Matrix& frame, cplx c) {
  const double n = op.norm();
  const double r = (op.matrix() * frame - c * frame).norm();
  return n > 0.0 ? r / n : r;
}

std::vector<Prepared> prepare(const std::vector<Operator>& ops, const std::vector<std::size_t>& kept) {
  std::vector<Prepared> prepared;
  for (std::size_t idx : kept) {
    const Operator& op = ops[idx];
    const Matrix& m = op.matrix();
    Prepared p{idx, std::max(1.0, op.norm()), op.is_hermitian(1e-12), false, linalg::is_diagonal(m, 0.0)};
    if (p.hermitian || p.diagonal) {
      p.normal = true;
    } else if (m.rows() <= 512) {
      const Matrix comm = m * m.adjoint() - m.adjoint() * m;
      p.normal = comm.norm() <= 1e-10 * p.scale * p.scale;
    }
    prepared.push_back(p);
  }
  // Normal operators first: their spectra are well conditioned and they shrink
  // the running intersection before any non-normal op is compressed.
  auto rank = [](const Prepared& p) { return p.diagonal ? 0 : p.hermitian ? 1 : p.normal ? 2 : 3; };
  std::stable_sort(prepared.begin(), prepared.end(),
                   [&](const Prepared& a, const Prepared& b) { return rank(a) < rank(b); });
  return prepared;
}

struct Dedup {
  std::vector<std::size_t> kept;
  // For dropped op j: coefficients over `kept`.
  std::vector<std::pair<std::size_t, Vector>> dropped;
};

Dedup deduplicate(const std::vector<Operator>& ops, const FinderOptions& opts) {
  Dedup out;
  std::vector<Vector> basis;
  for (std::size_t j = 0; j < ops.size(); ++j) {
    Vector v = vec(ops[j].matrix());
    const double original = v.norm();
    for (int pass = 0; pass < 2; ++pass) {
      for (const auto& e : basis) v -= e * e.dot(v);
    }
    if (v.norm() > 1e-10 * original && original > 0.0) {
      basis.push_back(v / v.norm());
      out.kept.push_back(j);
      continue;
    }
    const auto r = static_cast<Eigen::Index>(out.kept.size());
    Vector coeffs = Vector::Zero(r);
    if (r > 0 && original > 0.0) {
      Matrix gram(r, r);
      Vector rhs(r);
      for (Eigen::Index a = 0; a < r; ++a) {
        const Matrix& ma = ops[out.kept[static_cast<std::size_t>(a)]].matrix();
        rhs(a) = vec(ma).dot(vec(ops[j].matrix()));
        for (Eigen::Index b = 0; b < r; ++b) {
          gram(a, b) = vec(ma).dot(vec(ops[out.kept[static_cast<std::size_t>(b)]].matrix()));
        }
      }
      coeffs = gram.fullPivLu().solve(rhs);
    }
    out.dropped.emplace_back(j, coeffs);
    if (opts.log) {
      std::ostringstream os;
      os << "error operator " << j << " is linearly dependent on earlier operators; dropped before search";
      opts.log(os.str());
    }
  }
  return out;
}

std::vector<Subspace> run_search(const ErrorModel& model, const FinderOptions& opts, bool null_only) {
  if (model.ops.empty()) throw ValidationError("finder: error model has no operators");
  model.validate();
  require_working_dim(model.space.dim(), "finder");
  const Eigen::Index d = static_cast<Eigen::Index>(model.space.dim());
  const Dedup dedup = deduplicate(model.ops, opts);
  const std::vector<Prepared> prepared = prepare(model.ops, dedup.kept);

  Branch root;
  root.coordinate = true;
  root.coords.resize(static_cast<std::size_t>(d));
  for (Eigen::Index i = 0; i < d; ++i) root.coords[static_cast<std::size_t>(i)] = i;
  root.q = Matrix::Identity(d, d);
  std::vector<Branch> branches{root};

  for (const Prepared& p : prepared) {
    const Operator& op = model.ops[p.index];
    const linalg::OpAction act(op.matrix());
    std::vector<Branch> next;
    for (const Branch& b : branches) {
      if (null_only) {
        Branch nb;
        if (b.coordinate && p.diagonal) {
          nb.coordinate = true;
          for (Eigen::Index i : b.coords) {
            if (std::abs(op.matrix()(i, i)) <= opts.cluster_tol * p.scale) nb.coords.push_back(i);
          }
          nb.q = selection(d, nb.coords);
        } else {
          nb.q = b.q * linalg::null_space(act.apply(b.q), opts.null_tol * p.scale);
        }
        nb.tuple = b.tuple;
        nb.tuple.push_back(0.0);
        if (nb.q.cols() > 0) next.push_back(std::move(nb));
      } else {
        split_branch(b, op, p, act, opts, next);
      }
    }
    branches = std::move(next);
    if (branches.empty()) break;
  }

  std::vector<Subspace> found;
  for (Branch& b : branches) {
    if (b.q.cols() == 0) continue;
    std::vector<cplx> tuple(model.ops.size(), 0.0);
    for (std::size_t i = 0; i < prepared.size(); ++i) tuple[prepared[i].index] = b.tuple[i];
    for (const auto& [j, coeffs] : dedup.dropped) {
      cplx c = 0.0;
      for (Eigen::Index a = 0; a < coeffs.size(); ++a) c += coeffs(a) * tuple[dedup.kept[static_cast<std::size_t>(a)]];
      tuple[j] = c;
    }
    for (auto& c : tuple) c = snap(c);
    Subspace s(model.space, linalg::canonical_frame(linalg::orthonormal_span(b.q, 1e-8)), tuple);
    found.push_back(std::move(s));
  }

  std::sort(found.begin(), found.end(),
            [](const Subspace& a, const Subspace& b) { return tuple_less(*a.eigen_tuple, *b.eigen_tuple); });
  // Merge neighbours whose tuples agree within the clustering tolerance.
  std::vector<Subspace> merged;
  for (auto& s : found) {
    if (!merged.empty()) {
      auto& last = merged.back();
      bool same = true;
      for (std::size_t a = 0; a < model.ops.size(); ++a) {
        const double tol = opts.cluster_tol * std::max(1.0, model.ops[a].norm());
        same = same && std::abs((*last.eigen_tuple)[a] - (*s.eigen_tuple)[a]) <= tol;
      }
      if (same) {
        Matrix both(last.frame.rows(), last.frame.cols() + s.frame.cols());
        both << last.frame, s.frame;
        last.frame = linalg::canonical_frame(linalg::orthonormal_span(both, 1e-8));
        continue;
      }
    }
    merged.push_back(std::move(s));
  }
  for (auto& s : merged) {
    double worst = 0.0;
    for (std::size_t a = 0; a < model.ops.size(); ++a) {
      worst = std::max(worst, relative_residual(model.ops[a], s.frame, (*s.eigen_tuple)[a]));
    }
    s.residual = worst;
  }
  return merged;
}

} // namespace

void ErrorModel::validate() const {
  for (const auto& op : ops) {
    if (!(op.space() == space)) throw ValidationError("ErrorModel: operator space does not match the model space");
  }
  if (!op_labels.empty() && op_labels.size() != ops.size()) {
    throw ValidationError("ErrorModel: label count does not match operator count");
  }
  if (coeff_matrix) {
    const Matrix& a = *coeff_matrix;
    const auto n = static_cast<Eigen::Index>(ops.size());
    if (a.rows() != n || a.cols() != n) throw ValidationError("ErrorModel: coefficient matrix has the wrong size");
    if (n > 0) {
      if ((a - a.adjoint()).cwiseAbs().maxCoeff() > 1e-12) {
        throw ValidationError("ErrorModel: coefficient matrix is not Hermitian");
      }
      if (linalg::min_eigenvalue_hermitian(a) < -1e-10) {
        throw ValidationError("ErrorModel: coefficient matrix is not positive semidefinite");
      }
    }
  }
  if (system_hamiltonian) {
    if (!(system_hamiltonian->space() == space)) {
      throw ValidationError("ErrorModel: system Hamiltonian space does not match");
    }
    if (!system_hamiltonian->is_hermitian(1e-12)) throw ValidationError("ErrorModel: system Hamiltonian is not Hermitian");
  }
  if (hermitian_closed && !ops.empty()) {
    const Matrix basis = hs_basis(ops, 1e-10);
    for (const auto& op : ops) {
      Vector v = vec(op.matrix().adjoint());
      const double n = v.norm();
      v -= basis * (basis.adjoint() * v);
      if (v.norm() > 1e-10 * std::max(1.0, n)) {
        throw ValidationError("ErrorModel: operator span is not closed under adjoint");
      }
    }
  }
}

Subspace::Subspace(HilbertSpace sp, Matrix f, std::optional<std::vector<cplx>> tuple)
    : space(std::move(sp)), frame(std::move(f)), eigen_tuple(std::move(tuple)) {
  if (static_cast<std::size_t>(frame.rows()) != space.dim()) {
    throw ValidationError("Subspace: frame row count does not match the space");
  }
  if (linalg::orthonormality_error(frame) > 1e-10) throw ValidationError("Subspace: frame is not orthonormal");
}

std::vector<Subspace> find_df_subspaces(const ErrorModel& model, const FinderOptions& opts) {
  return run_search(model, opts, false);
}

Subspace find_semisimple_null_dfs(const ErrorModel& model, const FinderOptions& opts) {
  auto found = run_search(model, opts, true);
  if (found.empty()) {
    return Subspace(model.space, Matrix(static_cast<Eigen::Index>(model.space.dim()), 0),
                    std::vector<cplx>(model.ops.size(), 0.0));
  }
  return std::move(found.front());
}

std::vector<Subspace> abelian_group_dfs(const std::vector<Operator>& generators, const FinderOptions& opts) {
  if (generators.empty()) throw ValidationError("abelian_group_dfs: no generators");
  const HilbertSpace& space = generators.front().space();
  std::vector<linalg::OpAction> actions;
  actions.reserve(generators.size());
  for (const auto& g : generators) {
    if (!(g.space() == space)) throw ValidationError("abelian_group_dfs: generators live on different spaces");
    actions.emplace_back(g.matrix());
  }
  for (std::size_t i = 0; i < generators.size(); ++i) {
    for (std::size_t j = i + 1; j < generators.size(); ++j) {
      const Matrix comm = actions[i].apply(generators[j].matrix()) - actions[j].apply(generators[i].matrix());
      const double scale = std::max(1.0, generators[i].norm() * generators[j].norm());
      if (comm.norm() > 1e-12 * scale) {
        std::ostringstream os;
        os << "abelian_group_dfs: generators " << i << " and " << j << " do not commute";
        throw ValidationError(os.str());
      }
    }
  }
  return find_df_subspaces(ErrorModel(space, generators), opts);
}

double containment_residual(const std::vector<Subspace>& found, const Matrix& known_frame) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& s : found) {
    if (s.frame.rows() != known_frame.rows()) continue;
    const Matrix r = known_frame - s.frame * (s.frame.adjoint() * known_frame);
    best = std::min(best, r.norm());
  }
  return best;
}

} // namespace dfskit
