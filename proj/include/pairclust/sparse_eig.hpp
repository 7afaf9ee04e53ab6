#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <complex>
#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

namespace pairclust {

//! Abstract square linear operator given by its matvec.
class LinearMap
{
public:
  using Apply = std::function<void(const Eigen::Ref<const Eigen::VectorXd>&,
                                   Eigen::Ref<Eigen::VectorXd>)>;

  LinearMap(Eigen::Index dimension, Apply apply)
    : dimension_(dimension)
    , apply_(std::move(apply))
  {}

  static LinearMap from_dense(Eigen::MatrixXd matrix);
  static LinearMap from_sparse(Eigen::SparseMatrix<double> matrix);

  Eigen::Index dimension() const noexcept { return dimension_; }

  //! y = M x; throws dimension_mismatch on wrong sizes.
  void apply(const Eigen::Ref<const Eigen::VectorXd>& x, Eigen::Ref<Eigen::VectorXd> y) const;
  Eigen::VectorXd operator()(const Eigen::Ref<const Eigen::VectorXd>& x) const;

private:
  Eigen::Index dimension_;
  Apply apply_;
};

struct EigenPair
{
  std::complex<double> value;
  Eigen::VectorXcd vector; // unit norm
  double residual = 0.0;   // ||M v - value v|| for the unit vector
  bool converged = false;

  //! |Im value| <= rel (1 + |value|).
  bool is_real(double rel = 1e-6) const;
  //! Real representative of the eigenvector (phase rotated, unit norm).
  Eigen::VectorXd real_vector() const;
};

struct EigenReport
{
  std::vector<EigenPair> pairs;
  int iterations = 0;
  int matvecs = 0;
  bool converged = false;
};

//! ||M v - lambda v|| recomputed from scratch, v normalized first.
double residual_norm(const LinearMap& map, std::complex<double> value, const Eigen::VectorXcd& v);

//! Largest-modulus eigenpairs of a general real operator by a thick-restarted
//! Arnoldi (Krylov-Schur style) iteration with full reorthogonalization.
//! A pair is converged when its residual is <= tol * max(1, |lambda|).
//! Pairs come sorted by decreasing modulus; non-convergence after max_iter
//! restarts is flagged in the report and the current Ritz pairs returned.
//! `subspace` = 0 picks a Krylov dimension from `want`.
EigenReport krylov_nonsymmetric(const LinearMap& map,
                                int want,
                                double tol,
                                int max_iter,
                                std::uint64_t seed,
                                int subspace = 0);

enum class Side
{
  smallest,
  largest
};

//! Extremal eigenpairs of a symmetric operator by thick-restart Lanczos with
//! full reorthogonalization. Sorted increasing for Side::smallest and
//! decreasing for Side::largest.
EigenReport lanczos_symmetric_extremal(const LinearMap& map,
                                       Side side,
                                       int want,
                                       double tol,
                                       int max_iter,
                                       std::uint64_t seed,
                                       int subspace = 0);

//! Full spectrum by dense reduction (n <= 2000). Symmetric spectra come sorted
//! increasing, general spectra by decreasing modulus.
EigenReport dense_eig_oracle(const Eigen::MatrixXd& matrix, bool symmetric);

inline constexpr Eigen::Index kDenseOracleLimit = 2000;

} // namespace pairclust
