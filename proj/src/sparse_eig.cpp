#include "pairclust/sparse_eig.hpp"

#include "pairclust/error.hpp"
#include "pairclust/rng.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace pairclust {

LinearMap LinearMap::from_dense(Eigen::MatrixXd matrix)
{
  if (matrix.rows() != matrix.cols())
    throw Error(ErrorCode::dimension_mismatch, "linear map needs a square matrix");
  auto m = std::make_shared<const Eigen::MatrixXd>(std::move(matrix));
  return LinearMap(m->rows(),
                   [m](const Eigen::Ref<const Eigen::VectorXd>& x, Eigen::Ref<Eigen::VectorXd> y) {
                     y.noalias() = (*m) * x;
                   });
}

LinearMap LinearMap::from_sparse(Eigen::SparseMatrix<double> matrix)
{
  if (matrix.rows() != matrix.cols())
    throw Error(ErrorCode::dimension_mismatch, "linear map needs a square matrix");
  auto m = std::make_shared<const Eigen::SparseMatrix<double>>(std::move(matrix));
  return LinearMap(m->rows(),
                   [m](const Eigen::Ref<const Eigen::VectorXd>& x, Eigen::Ref<Eigen::VectorXd> y) {
                     y.noalias() = (*m) * x;
                   });
}

void LinearMap::apply(const Eigen::Ref<const Eigen::VectorXd>& x, Eigen::Ref<Eigen::VectorXd> y) const
{
  if (x.size() != dimension_ || y.size() != dimension_)
    throw Error(ErrorCode::dimension_mismatch,
                "linear map of dimension " + std::to_string(dimension_) +
                  " applied to vector of size " + std::to_string(x.size()));
  apply_(x, y);
}

Eigen::VectorXd LinearMap::operator()(const Eigen::Ref<const Eigen::VectorXd>& x) const
{
  Eigen::VectorXd y(dimension_);
  apply(x, y);
  return y;
}

bool EigenPair::is_real(double rel) const
{
  return std::abs(value.imag()) <= rel * (1.0 + std::abs(value));
}

Eigen::VectorXd EigenPair::real_vector() const
{
  if (vector.size() == 0)
    return {};
  // rotate the phase so the largest-magnitude entry is real
  Eigen::Index idx = 0;
  vector.cwiseAbs().maxCoeff(&idx);
  std::complex<double> phase = std::conj(vector(idx)) / std::abs(vector(idx));
  Eigen::VectorXd v = (vector * phase).real();
  double norm = v.norm();
  return norm > 0.0 ? Eigen::VectorXd(v / norm) : v;
}

double residual_norm(const LinearMap& map, std::complex<double> value, const Eigen::VectorXcd& v)
{
  double norm = v.norm();
  if (norm == 0.0)
    return 0.0;
  Eigen::VectorXd re = v.real() / norm;
  Eigen::VectorXd im = v.imag() / norm;
  Eigen::VectorXd mre = map(re);
  Eigen::VectorXd mim = map(im);
  // (M - lambda)(re + i im) with lambda = a + i b
  double a = value.real(), b = value.imag();
  Eigen::VectorXd rr = mre - a * re + b * im;
  Eigen::VectorXd ri = mim - a * im - b * re;
  return std::sqrt(rr.squaredNorm() + ri.squaredNorm());
}

namespace {

enum class Target
{
  largest_modulus,
  smallest_symmetric,
  largest_symmetric
};

Eigen::VectorXd random_unit(Eigen::Index n, Rng& rng)
{
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i)
    v(i) = g(rng);
  return v / v.norm();
}

// Two-pass classical Gram-Schmidt against the first `cols` columns of V.
Eigen::VectorXd orthogonalize(const Eigen::MatrixXd& V, Eigen::Index cols, Eigen::VectorXd& w)
{
  auto basis = V.leftCols(cols);
  Eigen::VectorXd h = basis.transpose() * w;
  w.noalias() -= basis * h;
  Eigen::VectorXd h2 = basis.transpose() * w;
  w.noalias() -= basis * h2;
  return h + h2;
}

// Krylov decomposition  M V_m = V_m H_m + V(:,m) H(m,0:m).
struct Decomposition
{
  Eigen::MatrixXd V;
  Eigen::MatrixXd H;
  bool exhausted = false;
  int matvecs = 0;
};

void expand(const LinearMap& map,
            Decomposition& d,
            Eigen::Index from,
            Eigen::Index to,
            Rng& rng,
            const Eigen::MatrixXd& locked)
{
  const Eigen::Index n = d.V.rows() - locked.cols();
  Eigen::VectorXd w(d.V.rows());
  for (Eigen::Index j = from; j < to; ++j) {
    map.apply(d.V.col(j), w);
    ++d.matvecs;
    double w0 = w.norm();
    if (locked.cols() > 0)
      orthogonalize(locked, locked.cols(), w);
    Eigen::VectorXd h = orthogonalize(d.V, j + 1, w);
    // purge again last: V carries tiny locked components that 1/beta would amplify
    if (locked.cols() > 0)
      orthogonalize(locked, locked.cols(), w);
    d.H.col(j).setZero();
    d.H.col(j).head(j + 1) = h;
    double beta = w.norm();

    if (j + 1 >= n) {
      d.H(j + 1, j) = 0.0;
      d.V.col(j + 1).setZero();
      d.exhausted = true;
      return;
    }
    if (beta > 1e-12 * w0 && beta > 0.0) {
      d.H(j + 1, j) = beta;
      d.V.col(j + 1) = w / beta;
      continue;
    }
    // invariant subspace found: continue from a fresh orthogonal direction
    d.H(j + 1, j) = 0.0;
    Eigen::VectorXd r;
    for (int attempt = 0; attempt < 8; ++attempt) {
      r = random_unit(d.V.rows(), rng);
      if (locked.cols() > 0)
        orthogonalize(locked, locked.cols(), r);
      orthogonalize(d.V, j + 1, r);
      if (locked.cols() > 0)
        orthogonalize(locked, locked.cols(), r);
      if (r.norm() > 1e-6)
        break;
    }
    if (!(r.norm() > 1e-6))
      throw Error(ErrorCode::solver_failure, "Krylov breakdown: no new direction found");
    d.V.col(j + 1) = r / r.norm();
  }
}

struct RitzSet
{
  Eigen::VectorXcd values;
  Eigen::MatrixXcd vectors;
  std::vector<Eigen::Index> order;
  std::vector<double> estimates;
};

RitzSet ritz(const Eigen::MatrixXd& Hm, const Eigen::RowVectorXd& b, Target target)
{
  RitzSet r;
  const Eigen::Index m = Hm.rows();
  if (target == Target::largest_modulus) {
    Eigen::EigenSolver<Eigen::MatrixXd> es(Hm, true);
    if (es.info() != Eigen::Success)
      throw Error(ErrorCode::solver_failure, "projected eigenproblem failed");
    r.values = es.eigenvalues();
    r.vectors = es.eigenvectors();
  } else {
    Eigen::MatrixXd T = 0.5 * (Hm + Hm.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
    if (es.info() != Eigen::Success)
      throw Error(ErrorCode::solver_failure, "projected eigenproblem failed");
    r.values = es.eigenvalues().cast<std::complex<double>>();
    r.vectors = es.eigenvectors().cast<std::complex<double>>();
  }

  r.order.resize(static_cast<std::size_t>(m));
  std::iota(r.order.begin(), r.order.end(), 0);
  const auto& vals = r.values;
  switch (target) {
    case Target::largest_modulus:
      std::stable_sort(r.order.begin(), r.order.end(), [&](Eigen::Index a, Eigen::Index c) {
        double ma = std::abs(vals(a)), mc = std::abs(vals(c));
        if (ma != mc)
          return ma > mc;
        if (vals(a).real() != vals(c).real())
          return vals(a).real() > vals(c).real();
        return vals(a).imag() > vals(c).imag();
      });
      break;
    case Target::smallest_symmetric:
      std::stable_sort(r.order.begin(), r.order.end(), [&](Eigen::Index a, Eigen::Index c) {
        return vals(a).real() < vals(c).real();
      });
      break;
    case Target::largest_symmetric:
      std::stable_sort(r.order.begin(), r.order.end(), [&](Eigen::Index a, Eigen::Index c) {
        return vals(a).real() > vals(c).real();
      });
      break;
  }

  r.estimates.resize(static_cast<std::size_t>(m));
  for (Eigen::Index i = 0; i < m; ++i)
    r.estimates[static_cast<std::size_t>(i)] =
      std::abs((b.cast<std::complex<double>>() * r.vectors.col(i))(0));
  return r;
}

bool conjugate_pair(const Eigen::VectorXcd& vals, Eigen::Index a, Eigen::Index b)
{
  return vals(a).imag() != 0.0 && vals(a) == std::conj(vals(b));
}

double threshold(double tol, std::complex<double> value)
{
  return tol * std::max(1.0, std::abs(value));
}

// Orthonormal basis of the invariant subspace of Hm for the first p Ritz
// values in `order`; conjugate pairs contribute their real and imaginary parts.
Eigen::MatrixXd invariant_basis(const RitzSet& r, Eigen::Index p, bool symmetric)
{
  const Eigen::Index m = r.vectors.rows();
  if (symmetric) {
    Eigen::MatrixXd Q(m, p);
    for (Eigen::Index i = 0; i < p; ++i)
      Q.col(i) = r.vectors.col(r.order[static_cast<std::size_t>(i)]).real();
    return Q;
  }
  std::vector<Eigen::VectorXd> cols;
  for (Eigen::Index i = 0; i < p; ++i) {
    Eigen::Index idx = r.order[static_cast<std::size_t>(i)];
    if (r.values(idx).imag() == 0.0) {
      cols.push_back(r.vectors.col(idx).real());
    } else {
      cols.push_back(r.vectors.col(idx).real());
      cols.push_back(r.vectors.col(idx).imag());
      if (i + 1 < p && conjugate_pair(r.values, idx, r.order[static_cast<std::size_t>(i + 1)]))
        ++i;
    }
  }
  Eigen::MatrixXd Z(m, static_cast<Eigen::Index>(cols.size()));
  for (std::size_t c = 0; c < cols.size(); ++c)
    Z.col(static_cast<Eigen::Index>(c)) = cols[c];
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(Z);
  qr.setThreshold(1e-10);
  Eigen::Index rank = std::max<Eigen::Index>(1, qr.rank());
  Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(m, rank);
  return Q;
}

EigenReport krylov_schur(const LinearMap& map,
                         int want_in,
                         double tol,
                         int max_iter,
                         std::uint64_t seed,
                         int subspace,
                         Target target,
                         const Eigen::MatrixXd& locked = Eigen::MatrixXd())
{
  if (want_in < 1)
    throw Error(ErrorCode::invalid_argument, "eigensolver: want must be >= 1");
  if (!(tol > 0.0))
    throw Error(ErrorCode::invalid_argument, "eigensolver: tol must be positive");
  if (max_iter < 1)
    throw Error(ErrorCode::invalid_argument, "eigensolver: max_iter must be >= 1");

  EigenReport report;
  // with locked vectors the search runs in their orthogonal complement
  const Eigen::Index n = map.dimension() - locked.cols();
  if (n <= 0) {
    report.converged = true;
    return report;
  }
  const bool symmetric = target != Target::largest_modulus;
  const Eigen::Index want = std::min<Eigen::Index>(want_in, n);
  Eigen::Index m = subspace > 0 ? subspace : std::max<Eigen::Index>(2 * want + 20, 40);
  m = std::max(m, want + 2);
  m = std::min(m, n);

  Rng rng = make_rng(seed, stream::eigensolver);
  Decomposition d;
  d.V = Eigen::MatrixXd::Zero(map.dimension(), m + 1);
  d.H = Eigen::MatrixXd::Zero(m + 1, m);
  Eigen::VectorXd start = random_unit(map.dimension(), rng);
  if (locked.cols() > 0) {
    orthogonalize(locked, locked.cols(), start);
    start.normalize();
  }
  d.V.col(0) = start;

  Eigen::Index kept = 0;
  RitzSet r;
  Eigen::Index eff_want = want;
  std::vector<double> true_residual;

  for (int iter = 1; iter <= max_iter; ++iter) {
    expand(map, d, kept, m, rng, locked);
    report.iterations = iter;

    Eigen::MatrixXd Hm = d.H.topLeftCorner(m, m);
    Eigen::RowVectorXd b = d.H.row(m).head(m);
    r = ritz(Hm, b, target);

    eff_want = want;
    if (!symmetric && eff_want < m &&
        conjugate_pair(r.values, r.order[static_cast<std::size_t>(eff_want - 1)],
                       r.order[static_cast<std::size_t>(eff_want)]))
      ++eff_want;

    bool estimated = true;
    for (Eigen::Index i = 0; i < eff_want; ++i) {
      Eigen::Index idx = r.order[static_cast<std::size_t>(i)];
      if (r.estimates[static_cast<std::size_t>(idx)] > threshold(tol, r.values(idx)))
        estimated = false;
    }

    if (estimated || d.exhausted || iter == max_iter) {
      // confirm with explicit residuals before stopping
      bool confirmed = true;
      true_residual.assign(static_cast<std::size_t>(eff_want), 0.0);
      for (Eigen::Index i = 0; i < eff_want; ++i) {
        Eigen::Index idx = r.order[static_cast<std::size_t>(i)];
        Eigen::VectorXcd x = d.V.leftCols(m).cast<std::complex<double>>() * r.vectors.col(idx);
        double res = residual_norm(map, r.values(idx), x);
        report.matvecs += 2;
        true_residual[static_cast<std::size_t>(i)] = res;
        if (res > threshold(tol, r.values(idx)))
          confirmed = false;
      }
      if (confirmed || d.exhausted || iter == max_iter) {
        report.converged = confirmed;
        break;
      }
    }

    // thick restart keeping the leading p Ritz directions
    Eigen::Index p = std::min(m - 1, eff_want + (m - eff_want) / 2);
    if (!symmetric && p < m &&
        conjugate_pair(r.values, r.order[static_cast<std::size_t>(p - 1)],
                       r.order[static_cast<std::size_t>(p)]))
      p = (p + 1 <= m - 1) ? p + 1 : p - 1;
    p = std::max<Eigen::Index>(p, 1);

    Eigen::MatrixXd Q = invariant_basis(r, p, symmetric);
    const Eigen::Index kp = Q.cols();
    Eigen::MatrixXd S = Q.transpose() * Hm * Q;
    Eigen::RowVectorXd bq = b * Q;
    Eigen::MatrixXd Vk = d.V.leftCols(m) * Q;
    Eigen::VectorXd last = d.V.col(m);
    d.V.leftCols(kp) = Vk;
    d.V.col(kp) = last;
    d.H.setZero();
    d.H.topLeftCorner(kp, kp) = S;
    d.H.row(kp).head(kp) = bq;
    kept = kp;
  }
  report.matvecs += d.matvecs;

  for (Eigen::Index i = 0; i < eff_want; ++i) {
    Eigen::Index idx = r.order[static_cast<std::size_t>(i)];
    EigenPair pair;
    pair.value = r.values(idx);
    if (symmetric)
      pair.value = { pair.value.real(), 0.0 };
    Eigen::VectorXcd x = d.V.leftCols(m).cast<std::complex<double>>() * r.vectors.col(idx);
    double norm = x.norm();
    pair.vector = norm > 0.0 ? Eigen::VectorXcd(x / norm) : x;
    pair.residual = true_residual.size() > static_cast<std::size_t>(i)
                      ? true_residual[static_cast<std::size_t>(i)]
                      : residual_norm(map, pair.value, pair.vector);
    pair.converged = pair.residual <= threshold(tol, pair.value);
    report.pairs.push_back(std::move(pair));
  }
  return report;
}

} // namespace

EigenReport krylov_nonsymmetric(const LinearMap& map,
                                int want,
                                double tol,
                                int max_iter,
                                std::uint64_t seed,
                                int subspace)
{
  return krylov_schur(map, want, tol, max_iter, seed, subspace, Target::largest_modulus);
}

EigenReport lanczos_symmetric_extremal(const LinearMap& map,
                                       Side side,
                                       int want,
                                       double tol,
                                       int max_iter,
                                       std::uint64_t seed,
                                       int subspace)
{
  const Target target = side == Side::smallest ? Target::smallest_symmetric : Target::largest_symmetric;
  EigenReport report = krylov_schur(map, want, tol, max_iter, seed, subspace, target);

  // A single Krylov sequence sees one direction per repeated eigenvalue. Rerun in
  // the complement of the converged vectors until no further wanted value appears.
  auto before = [side](const EigenPair& a, const EigenPair& b) {
    return side == Side::smallest ? a.value.real() < b.value.real() : a.value.real() > b.value.real();
  };
  const auto cap = static_cast<std::size_t>(std::min<Eigen::Index>(want, map.dimension()));
  for (int pass = 1; report.converged && report.pairs.size() == cap && pass <= want; ++pass) {
    Eigen::MatrixXd locked(map.dimension(), static_cast<Eigen::Index>(report.pairs.size()));
    for (std::size_t i = 0; i < report.pairs.size(); ++i)
      locked.col(static_cast<Eigen::Index>(i)) = report.pairs[i].real_vector();
    // re-orthonormalize; converged vectors of a symmetric map are nearly orthogonal already
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(locked);
    locked = qr.householderQ() * Eigen::MatrixXd::Identity(locked.rows(), locked.cols());

    EigenReport extra = krylov_schur(map, want, tol, max_iter, seed + static_cast<std::uint64_t>(pass),
                                     subspace, target, locked);
    report.iterations += extra.iterations;
    report.matvecs += extra.matvecs;
    const EigenPair& last = report.pairs.back();
    bool improved = false;
    for (auto& pair : extra.pairs) {
      if (!pair.converged || !before(pair, last) ||
          std::abs(pair.value.real() - last.value.real()) <= threshold(tol, last.value))
        continue;
      report.pairs.push_back(std::move(pair));
      improved = true;
    }
    if (!improved)
      break;
    std::stable_sort(report.pairs.begin(), report.pairs.end(), before);
    report.pairs.resize(cap);
  }
  return report;
}

EigenReport dense_eig_oracle(const Eigen::MatrixXd& matrix, bool symmetric)
{
  if (matrix.rows() != matrix.cols())
    throw Error(ErrorCode::dimension_mismatch, "dense oracle needs a square matrix");
  if (matrix.rows() > kDenseOracleLimit)
    throw Error(ErrorCode::size_limit,
                "dense oracle limited to n <= " + std::to_string(kDenseOracleLimit));

  EigenReport report;
  report.iterations = 1;
  report.converged = true;
  const Eigen::Index n = matrix.rows();
  if (n == 0)
    return report;

  if (symmetric) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(matrix);
    if (es.info() != Eigen::Success)
      throw Error(ErrorCode::solver_failure, "dense symmetric eigensolver failed");
    const Eigen::MatrixXd R =
      matrix * es.eigenvectors() - es.eigenvectors() * es.eigenvalues().asDiagonal();
    for (Eigen::Index i = 0; i < n; ++i) {
      EigenPair pair;
      pair.value = es.eigenvalues()(i);
      pair.vector = es.eigenvectors().col(i).cast<std::complex<double>>();
      pair.residual = R.col(i).norm();
      pair.converged = true;
      report.pairs.push_back(std::move(pair));
    }
    return report;
  }

  Eigen::EigenSolver<Eigen::MatrixXd> es(matrix, true);
  if (es.info() != Eigen::Success)
    throw Error(ErrorCode::solver_failure, "dense eigensolver failed");
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  const Eigen::VectorXcd vals = es.eigenvalues();
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index c) {
    double ma = std::abs(vals(a)), mc = std::abs(vals(c));
    if (ma != mc)
      return ma > mc;
    if (vals(a).real() != vals(c).real())
      return vals(a).real() > vals(c).real();
    return vals(a).imag() > vals(c).imag();
  });
  const Eigen::MatrixXcd vecs = es.eigenvectors();
  const Eigen::MatrixXd re = vecs.real();
  const Eigen::MatrixXd im = vecs.imag();
  const Eigen::MatrixXd Mre = matrix * re;
  const Eigen::MatrixXd Mim = matrix * im;
  for (Eigen::Index idx : order) {
    EigenPair pair;
    pair.value = vals(idx);
    Eigen::VectorXcd v = vecs.col(idx);
    double norm = v.norm();
    pair.vector = norm > 0.0 ? Eigen::VectorXcd(v / norm) : v;
    Eigen::VectorXcd Mv(n);
    Mv.real() = Mre.col(idx);
    Mv.imag() = Mim.col(idx);
    pair.residual = norm > 0.0 ? (Mv - vals(idx) * v).norm() / norm : 0.0;
    pair.converged = true;
    report.pairs.push_back(std::move(pair));
  }
  return report;
}

} // namespace pairclust
