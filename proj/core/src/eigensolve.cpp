#include "specpart/eigensolve.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <random>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/IterativeLinearSolvers>
#include <Eigen/QR>
#include <Eigen/SparseCholesky>

#ifdef SPECPART_HAVE_CHOLMOD
#include <Eigen/CholmodSupport>
#endif

namespace specpart {
namespace {

constexpr Index kDenseLimit = 160;

// Solves (A - tau B) X = R for a fixed shift.
class ShiftedSolver {
 public:
  virtual ~ShiftedSolver() = default;
  /// False when the shifted matrix is not positive definite (or the
  /// preconditioner cannot be built).
  virtual bool factor(const SparseOperator& s) = 0;
  virtual bool solve(const Eigen::MatrixXd& rhs, const Eigen::MatrixXd& guess, Eigen::MatrixXd& out) = 0;
};

class DirectSolver final : public ShiftedSolver {
 public:
  bool factor(const SparseOperator& s) override {
#ifdef SPECPART_HAVE_CHOLMOD
    llt_ = std::make_unique<Eigen::CholmodSupernodalLLT<SparseOperator, Eigen::Lower>>();
    llt_->cholmod().print = 0;
    llt_->compute(s);
    return llt_->info() == Eigen::Success;
#else
    ldlt_.compute(s);
    if (ldlt_.info() != Eigen::Success) return false;
    return (ldlt_.vectorD().array() > 0.0).all();
#endif
  }

  bool solve(const Eigen::MatrixXd& rhs, const Eigen::MatrixXd&, Eigen::MatrixXd& out) override {
#ifdef SPECPART_HAVE_CHOLMOD
    out = llt_->solve(rhs);
    return llt_->info() == Eigen::Success;
#else
    out = ldlt_.solve(rhs);
    return ldlt_.info() == Eigen::Success;
#endif
  }

 private:
#ifdef SPECPART_HAVE_CHOLMOD
  std::unique_ptr<Eigen::CholmodSupernodalLLT<SparseOperator, Eigen::Lower>> llt_;
#else
  Eigen::SimplicialLDLT<SparseOperator, Eigen::Lower, Eigen::AMDOrdering<int>> ldlt_;
#endif
};

class IterativeSolver final : public ShiftedSolver {
 public:
  explicit IterativeSolver(double tol) { cg_.setTolerance(tol); }

  bool factor(const SparseOperator& s) override {
    cg_.setMaxIterations(std::max<Index>(200, 4 * static_cast<Index>(std::sqrt(double(s.rows()))) * 10));
    cg_.compute(s);
    return cg_.info() == Eigen::Success;
  }

  bool solve(const Eigen::MatrixXd& rhs, const Eigen::MatrixXd& guess, Eigen::MatrixXd& out) override {
    out.resize(rhs.rows(), rhs.cols());
    for (Index j = 0; j < rhs.cols(); ++j) {
      out.col(j) = cg_.solveWithGuess(rhs.col(j), guess.col(j));
      if (cg_.info() != Eigen::Success) return false;
    }
    return true;
  }

 private:
  Eigen::ConjugateGradient<SparseOperator, Eigen::Lower | Eigen::Upper,
                           Eigen::IncompleteCholesky<double, Eigen::Lower, Eigen::AMDOrdering<int>>>
      cg_;
};

double max_abs_diagonal(const SparseOperator& a) {
  double m = 0.0;
  for (Index j = 0; j < a.outerSize(); ++j) m = std::max(m, std::abs(a.coeff(j, j)));
  return m;
}

void fix_signs(Eigen::MatrixXd& vectors) {
  for (Index j = 0; j < vectors.cols(); ++j) {
    Index arg = 0;
    vectors.col(j).cwiseAbs().maxCoeff(&arg);
    if (vectors(arg, j) < 0.0) vectors.col(j) *= -1.0;
  }
}

Eigen::MatrixXd initial_block(Index n, Index p, const Eigen::VectorXd& initial) {
  Eigen::MatrixXd x(n, p);
  std::mt19937_64 rng(0x5eedULL + static_cast<std::uint64_t>(n));
  std::uniform_real_distribution<double> uniform(-1.0, 1.0);
  for (Index j = 0; j < p; ++j) {
    for (Index i = 0; i < n; ++i) x(i, j) = uniform(rng);
  }
  if (initial.size() == n && initial.norm() > 0.0) {
    x.col(0) = initial;
  } else {
    x.col(0).setOnes();
  }
  return x;
}

struct ResidualCheck {
  double max_relative = 0.0;
  double max_absolute = 0.0;  // ||r|| / ||x||
};

ResidualCheck residuals(const Eigen::MatrixXd& ax, const Eigen::MatrixXd& bx, const Eigen::MatrixXd& x,
                        const Eigen::VectorXd& theta, int k, double floor) {
  ResidualCheck out;
  for (int i = 0; i < k; ++i) {
    const double r = (ax.col(i) - theta[i] * bx.col(i)).norm();
    const double xn = x.col(i).norm();
    const double scale = std::abs(theta[i]) * bx.col(i).norm() + floor * xn;
    out.max_relative = std::max(out.max_relative, scale > 0.0 ? r / scale : r);
    out.max_absolute = std::max(out.max_absolute, xn > 0.0 ? r / xn : r);
  }
  return out;
}

EigSpectrum dense_modes(const SparseOperator& a, const SparseOperator* b, int k) {
  const Eigen::MatrixXd ad = Eigen::MatrixXd(a);
  Eigen::VectorXd values;
  Eigen::MatrixXd vectors;
  if (b != nullptr) {
    const Eigen::MatrixXd bd = Eigen::MatrixXd(*b);
    Eigen::LLT<Eigen::MatrixXd> check(bd);
    if (check.info() != Eigen::Success) throw EigenSolveError("mass matrix is not positive definite", 0.0);
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(ad, bd);
    if (es.info() != Eigen::Success) throw EigenSolveError("dense generalized eigensolver failed", 0.0);
    values = es.eigenvalues();
    vectors = es.eigenvectors();
  } else {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(ad);
    if (es.info() != Eigen::Success) throw EigenSolveError("dense eigensolver failed", 0.0);
    values = es.eigenvalues();
    vectors = es.eigenvectors();
  }
  EigSpectrum out;
  out.values = values.head(k);
  out.vectors = vectors.leftCols(k);
  fix_signs(out.vectors);
  const Eigen::MatrixXd ax = ad * out.vectors;
  const Eigen::MatrixXd bx = b ? Eigen::MatrixXd(Eigen::MatrixXd(*b) * out.vectors) : out.vectors;
  out.max_residual = residuals(ax, bx, out.vectors, out.values, k, 0.0).max_absolute;
  out.iterations = 1;
  return out;
}

// Shift-and-invert block subspace iteration with Rayleigh-Ritz projection.
// The shift tau is raised toward the lowest Ritz value while A - tau B stays
// positive definite, which a successful Cholesky factorization certifies.
EigSpectrum subspace_iteration(const SparseOperator& a, const SparseOperator* b, int k, const EigOptions& opt,
                               const Eigen::VectorXd& initial) {
  const Index n = a.rows();
  const Index p = std::min<Index>(n, k + std::max(opt.guard, 1));
  const int max_iter = opt.max_iter > 0 ? opt.max_iter
                                        : std::max(30, static_cast<int>(10.0 * std::sqrt(static_cast<double>(n))));
  const bool direct = opt.backend == EigBackend::kDirect ||
                      (opt.backend == EigBackend::kAuto && n <= opt.direct_limit);

  SparseOperator identity;
  if (b == nullptr) {
    identity.resize(n, n);
    identity.setIdentity();
  }
  const SparseOperator& bmat = b ? *b : identity;

  auto make_solver = [&]() -> std::unique_ptr<ShiftedSolver> {
    if (direct) return std::make_unique<DirectSolver>();
    return std::make_unique<IterativeSolver>(opt.inner_tol);
  };
  auto shifted = [&](double tau) -> SparseOperator {
    if (tau == 0.0) return a;
    return SparseOperator(a - tau * bmat);
  };

  const double anorm = max_abs_diagonal(a);
  double tau = 0.0;
  auto solver = make_solver();
  if (!solver->factor(a)) {
    // Semidefinite A (e.g. stiffness with constants in its kernel): shift down.
    const double bnorm = max_abs_diagonal(bmat);
    tau = -1e-4 * (bnorm > 0.0 ? anorm / bnorm : 1.0) - 1e-12;
    solver = make_solver();
    if (!solver->factor(shifted(tau))) {
      throw EigenSolveError("matrix is not positive semidefinite", std::numeric_limits<double>::infinity());
    }
  }

  const double floor = 1e-7 * anorm;
  Eigen::MatrixXd x = initial_block(n, p, initial);
  Eigen::MatrixXd guess = x;
  Eigen::MatrixXd y;
  Eigen::VectorXd theta;
  double best = std::numeric_limits<double>::infinity();

  for (int it = 1; it <= max_iter; ++it) {
    const Eigen::MatrixXd bx_in = b ? Eigen::MatrixXd(bmat * x) : x;
    if (!solver->solve(bx_in, guess, y)) {
      throw EigenSolveError("inner linear solve failed", best);
    }

    Eigen::HouseholderQR<Eigen::MatrixXd> qr(y);
    const Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(n, p);
    const Eigen::MatrixXd aq = a * q;
    const Eigen::MatrixXd bq = b ? Eigen::MatrixXd(bmat * q) : q;
    Eigen::MatrixXd ga = q.transpose() * aq;
    ga = 0.5 * (ga + ga.transpose()).eval();

    Eigen::MatrixXd v;
    if (b != nullptr) {
      Eigen::MatrixXd gb = q.transpose() * bq;
      gb = 0.5 * (gb + gb.transpose()).eval();
      Eigen::LLT<Eigen::MatrixXd> check(gb);
      if (check.info() != Eigen::Success) throw EigenSolveError("mass matrix is not positive definite", best);
      Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(ga, gb);
      theta = es.eigenvalues();
      v = es.eigenvectors();
    } else {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(ga);
      theta = es.eigenvalues();
      v = es.eigenvectors();
    }
    x = q * v;
    const Eigen::MatrixXd ax = aq * v;
    const Eigen::MatrixXd bx = b ? Eigen::MatrixXd(bq * v) : x;

    const ResidualCheck check = residuals(ax, bx, x, theta, k, floor);
    best = std::min(best, check.max_absolute);
    if (check.max_relative <= opt.tol) {
      EigSpectrum out;
      out.values = theta.head(k);
      out.vectors = x.leftCols(k);
      fix_signs(out.vectors);
      out.max_residual = check.max_absolute;
      out.iterations = it;
      return out;
    }

    // Raise the shift when the lowest mode converges slowly.
    const double rate = (theta[0] - tau) / std::max(theta[p - 1] - tau, 1e-300);
    if (direct && rate > 0.2) {
      const double r0 = (ax.col(0) - theta[0] * bx.col(0)).norm() / std::max(bx.col(0).norm(), 1e-300);
      double candidate = theta[0] - 2.0 * r0;
      for (int attempt = 0; attempt < 3 && candidate > tau + 0.5 * (theta[0] - tau); ++attempt) {
        auto trial = make_solver();
        if (trial->factor(shifted(candidate))) {
          solver = std::move(trial);
          tau = candidate;
          break;
        }
        candidate = 0.5 * (candidate + tau);
      }
    }

    guess = x;
    for (Index j = 0; j < p; ++j) {
      const double denom = theta[j] - tau;
      guess.col(j) /= (std::abs(denom) > 1e-300 ? denom : 1.0);
    }
  }
  throw EigenSolveError("eigensolver did not converge (best residual " + std::to_string(best) + ")", best);
}

EigSpectrum lowest_modes(const SparseOperator& a, const SparseOperator* b, int k, const EigOptions& opt,
                         const Eigen::VectorXd& initial) {
  const Index n = a.rows();
  if (a.cols() != n) throw std::invalid_argument("eigensolver needs a square matrix");
  if (b != nullptr && (b->rows() != n || b->cols() != n)) {
    throw std::invalid_argument("mass matrix size does not match");
  }
  if (n == 0) throw std::invalid_argument("eigensolver called on an empty matrix");
  if (k < 1 || k > n) throw std::invalid_argument("requested mode count out of range");
  if (n <= kDenseLimit) return dense_modes(a, b, k);
  return subspace_iteration(a, b, k, opt, initial);
}

EigResult first_pair(const EigSpectrum& spectrum, Index order) {
  EigResult out;
  out.eigenvalue = spectrum.values[0];
  out.vector = spectrum.vectors.col(0);
  out.residual = spectrum.max_residual;
  out.iterations = spectrum.iterations;
  out.order = order;
  return out;
}

}  // namespace

EigResult smallest_eigpair(const SparseOperator& a, const EigOptions& options, const Eigen::VectorXd& initial) {
  return first_pair(lowest_modes(a, nullptr, 1, options, initial), a.rows());
}

EigResult smallest_eigpair_generalized(const SparseOperator& a, const SparseOperator& m, const EigOptions& options,
                                       const Eigen::VectorXd& initial) {
  return first_pair(lowest_modes(a, &m, 1, options, initial), a.rows());
}

EigSpectrum smallest_eigpairs(const SparseOperator& a, const SparseOperator* m, int k, const EigOptions& options,
                              const Eigen::VectorXd& initial) {
  return lowest_modes(a, m, k, options, initial);
}

EigResult penalized_eigenvalue(const SparseOperator& base, const SparseOperator* mass,
                               const Eigen::Ref<const Eigen::VectorXd>& phi, double penalty,
                               const Neighborhood& neighborhood, const PenaltyOptions& options) {
  if (neighborhood.empty()) throw std::invalid_argument("empty computational neighborhood");
  if (!(penalty > 0.0)) throw std::invalid_argument("penalty C must be positive");
  if (phi.size() != base.rows()) throw std::invalid_argument("density size does not match operator");
  const Index m = neighborhood.size();

  Eigen::VectorXd defect(m);  // 1 - phi, with masked-out nodes fully penalized
  Eigen::VectorXd start(m);
  for (Index i = 0; i < m; ++i) {
    const Index g = neighborhood.global(i);
    const bool inside = options.mask.empty() || options.mask[g] != 0;
    const double value = inside ? phi[g] : 0.0;
    defect[i] = 1.0 - value;
    start[i] = std::clamp(value, 0.0, 1.0) + 1e-3;
  }

  SparseOperator a = restrict_operator(base, neighborhood);
  EigResult result;
  if (mass == nullptr) {
    for (Index i = 0; i < m; ++i) a.coeffRef(i, i) += penalty * defect[i];
    result = smallest_eigpair(a, options.eig, start);
    result.vector /= std::sqrt(options.node_weight * result.vector.squaredNorm());
  } else {
    const SparseOperator mr = restrict_operator(*mass, neighborhood);
    // penalty against the lumped (full row-sum) mass
    for (Index i = 0; i < m; ++i) {
      const double lumped = mass->col(neighborhood.global(i)).sum();
      a.coeffRef(i, i) += penalty * defect[i] * lumped;
    }
    result = smallest_eigpair_generalized(a, mr, options.eig, start);
  }
  result.order = m;
  result.vector = neighborhood.extend_vector(result.vector, phi.size());
  return result;
}

}  // namespace specpart
