// Copyright (c) the afem project contributors.
// SPDX-License-Identifier: Apache-2.0

#include "afem/eigensolver.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <random>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "afem/errors.hpp"

namespace afem
{

using SpMatC = Eigen::SparseMatrix<Complex>;

struct ShiftedFactor
{
  Complex sigma;
  SpMatC shifted; // A - sigma M
  Eigen::SparseLU<SpMatC> lu;
};

Complex form_value(const SpMat& a, const VecC& u)
{
  return u.dot(mul_real(a, u));
}

namespace
{

constexpr int kDenseThreshold = 800;
constexpr double kResidualTol = 1e-9;

VecC start_vector(int n, unsigned seed)
{
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  VecC v(n);
  for (int i = 0; i < n; i++)
  {
    double re = dist(rng);
    double im = dist(rng);
    v[i] = Complex(re, im);
  }
  return v / v.norm();
}

std::shared_ptr<ShiftedFactor> factor_shifted(const OperatorPencil& p, Complex sigma)
{
  SpMatC ac = p.A.cast<Complex>();
  SpMatC mc = p.M.cast<Complex>();
  for (int attempt = 0; attempt < 4; attempt++)
  {
    auto f = std::make_shared<ShiftedFactor>();
    f->sigma = sigma;
    f->shifted = ac - sigma * mc;
    f->shifted.makeCompressed();
    f->lu.compute(f->shifted);
    if (f->lu.info() == Eigen::Success)
      return f;
    // the shift hit an eigenvalue; nudge it off the spectrum and retry
    sigma += Complex(0.013, 0.007) * std::max(1.0, std::abs(sigma));
  }
  throw NumericalError("solve_cluster: shifted operator singular at every attempted shift");
}

// Unitary similarity swapping the diagonal entries i, i+1 of the upper
// triangular T; the rotation is accumulated into the columns of U.
void schur_swap(MatC& T, MatC& U, int i)
{
  const Complex t11 = T(i, i), t22 = T(i + 1, i + 1), t12 = T(i, i + 1);
  const Complex c = t12, s = t22 - t11;
  const double r = std::hypot(std::abs(c), std::abs(s));
  if (r <= 0.0)
    return; // equal entries, nothing to move
  // first column of Q is the unit eigenvector of [[t11,t12],[0,t22]] for t22
  const Complex q11 = c / r, q21 = s / r;
  const Complex q12 = -std::conj(q21), q22 = std::conj(q11);
  for (int col = 0; col < T.cols(); col++)
  {
    const Complex a = T(i, col), b = T(i + 1, col);
    T(i, col) = std::conj(q11) * a + std::conj(q21) * b;
    T(i + 1, col) = std::conj(q12) * a + std::conj(q22) * b;
  }
  for (int row = 0; row < T.rows(); row++)
  {
    const Complex a = T(row, i), b = T(row, i + 1);
    T(row, i) = a * q11 + b * q21;
    T(row, i + 1) = a * q12 + b * q22;
  }
  for (int row = 0; row < U.rows(); row++)
  {
    const Complex a = U(row, i), b = U(row, i + 1);
    U(row, i) = a * q11 + b * q21;
    U(row, i + 1) = a * q12 + b * q22;
  }
  // the 2x2 core is known exactly; pin it to avoid drift over many passes
  T(i, i) = t22;
  T(i + 1, i + 1) = t11;
  T(i + 1, i) = 0.0;
}

void reorder_descending(MatC& T, MatC& U)
{
  const int mm = static_cast<int>(T.rows());
  for (int pass = 0; pass < mm; pass++)
  {
    bool swapped = false;
    for (int i = 0; i + 1 < mm; i++)
      if (std::abs(T(i + 1, i + 1)) > std::abs(T(i, i)))
      {
        schur_swap(T, U, i);
        swapped = true;
      }
    if (!swapped)
      break;
  }
}

// Deterministic replacement direction after an exact Arnoldi breakdown.
VecC replacement_vector(const MatC& V, int jcols)
{
  VecC v = start_vector(static_cast<int>(V.rows()), 1000003u * static_cast<unsigned>(jcols) + 17u);
  for (int pass = 0; pass < 2; pass++)
    for (int i = 0; i < jcols; i++)
      v -= V.col(i).dot(v) * V.col(i);
  const double nrm = v.norm();
  if (nrm < 1e-10)
    throw NumericalError("solve_cluster: Krylov basis exhausted the space");
  return v / nrm;
}

// Krylov-Schur iteration for the nev dominant eigenvalues of op; returns a
// 2-norm orthonormal basis of the converged invariant subspace.
MatC krylov_schur(const std::function<VecC(const VecC&)>& op, int n, int nev, int m,
                  double tol, int max_restarts)
{
  // invariant: op V(:,0..j-1) = V(:,0..j-1) H(0..j-1,0..j-1) + V(:,j) H(j,0..j-1)
  MatC V = MatC::Zero(n, m + 1);
  MatC H = MatC::Zero(m + 1, m);
  V.col(0) = start_vector(n, 0x5eedu);
  int k = 0;
  for (int restart = 0; restart <= max_restarts; restart++)
  {
    int mcur = m;
    for (int j = k; j < m; j++)
    {
      VecC w = op(V.col(j));
      const double norm0 = w.norm();
      for (int pass = 0; pass < 2; pass++)
        for (int i = 0; i <= j; i++)
        {
          const Complex h = V.col(i).dot(w);
          w -= h * V.col(i);
          H(i, j) += h;
        }
      const double beta = w.norm();
      if (beta > 1e-12 * std::max(norm0, 1e-300))
      {
        H(j + 1, j) = beta;
        V.col(j + 1) = w / beta;
        continue;
      }
      H(j + 1, j) = 0.0;
      if (j + 1 >= nev)
      {
        mcur = j + 1; // exact invariant subspace covering the request
        break;
      }
      V.col(j + 1) = replacement_vector(V, j + 1);
    }

    Eigen::ComplexSchur<MatC> schur(H.topLeftCorner(mcur, mcur));
    if (schur.info() != Eigen::Success)
      throw NumericalError("solve_cluster: Schur factorization failed during restart");
    MatC T = schur.matrixT();
    MatC U = schur.matrixU();
    reorder_descending(T, U);
    const Complex betac = H(mcur, mcur - 1);

    int conv = 0;
    const int want = std::min(nev, mcur);
    while (conv < want && std::abs(betac) * std::abs(U(mcur - 1, conv)) <=
                              tol * std::max(std::abs(T(conv, conv)), 1e-30))
      conv++;
    if (conv >= nev)
      return V.leftCols(mcur) * U.leftCols(nev);
    if (restart == max_restarts)
      throw NumericalError("solve_cluster: eigensolver did not converge within the restart limit");

    const int knew = std::min(mcur - 1, nev + (mcur - nev) / 2);
    const MatC vnew = V.leftCols(mcur) * U.leftCols(knew);
    V.leftCols(knew) = vnew;
    V.col(knew) = V.col(mcur);
    H.setZero();
    H.topLeftCorner(knew, knew) = T.topLeftCorner(knew, knew);
    for (int i = 0; i < knew; i++)
      H(knew, i) = betac * U(mcur - 1, i);
    k = knew;
  }
  throw NumericalError("solve_cluster: unreachable restart exit");
}

// Rayleigh-Ritz extraction of the pencil (A, M) on the span of W. The
// projected mass block is Hermitian positive definite, so a Cholesky reduction
// turns the small problem into an ordinary eigensolve.
void rayleigh_ritz(const SpMat& A, const SpMat& M, const MatC& W, VecC& lam, MatC& U)
{
  const int q = static_cast<int>(W.cols());
  const int n = static_cast<int>(W.rows());
  MatC aw(n, q), mw(n, q);
  for (int j = 0; j < q; j++)
  {
    aw.col(j) = mul_real(A, W.col(j));
    mw.col(j) = mul_real(M, W.col(j));
  }
  const MatC aq = W.adjoint() * aw;
  const MatC mq = W.adjoint() * mw;
  Eigen::LLT<MatC> llt(mq);
  if (llt.info() != Eigen::Success)
    throw NumericalError("solve_cluster: projected mass matrix not positive definite");
  const MatC L = llt.matrixL();
  MatC B = L.triangularView<Eigen::Lower>().solve(aq);
  const MatC bt = L.triangularView<Eigen::Lower>().solve(B.adjoint());
  B = bt.adjoint();
  Eigen::ComplexEigenSolver<MatC> ces(B);
  if (ces.info() != Eigen::Success)
    throw NumericalError("solve_cluster: projected eigensolve failed");
  lam = ces.eigenvalues();
  const MatC Y = L.adjoint().triangularView<Eigen::Upper>().solve(ces.eigenvectors());
  U = W * Y;
  for (int j = 0; j < q; j++)
    U.col(j) /= U.col(j).norm();
}

// Full dense solve of the pencil through a Cholesky reduction of M.
void dense_eigensolve(const SpMat& A, const SpMat& M, VecC& lam, MatC& U)
{
  const Eigen::MatrixXd ad(A), md(M);
  Eigen::LLT<Eigen::MatrixXd> llt(md);
  if (llt.info() != Eigen::Success)
    throw NumericalError("solve_cluster: mass matrix not positive definite");
  const Eigen::MatrixXd L = llt.matrixL();
  Eigen::MatrixXd B = L.triangularView<Eigen::Lower>().solve(ad);
  const Eigen::MatrixXd bt = L.triangularView<Eigen::Lower>().solve(B.transpose());
  B = bt.transpose();
  Eigen::EigenSolver<Eigen::MatrixXd> es(B);
  if (es.info() != Eigen::Success)
    throw NumericalError("solve_cluster: dense eigensolver failed");
  lam = es.eigenvalues();
  const MatC lc = L.cast<Complex>();
  U = lc.adjoint().triangularView<Eigen::Upper>().solve(es.eigenvectors());
  for (int j = 0; j < U.cols(); j++)
    U.col(j) /= U.col(j).norm();
}

std::vector<int> sorted_order(const VecC& lam)
{
  std::vector<int> idx(lam.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](int a, int b)
  {
    const double ma = std::abs(lam[a]), mb = std::abs(lam[b]);
    if (ma != mb)
      return ma < mb;
    const double aa = std::arg(lam[a]), ab = std::arg(lam[b]);
    if (aa != ab)
      return aa < ab;
    return a < b;
  });
  return idx;
}

double pencil_residual(const SpMat& A, const SpMat& M, Complex lam, const VecC& u)
{
  const VecC au = mul_real(A, u);
  const double den = au.norm();
  const double num = (au - lam * mul_real(M, u)).norm();
  return den > 0.0 ? num / den : num;
}

// Inverse iteration with the pair's own shift; only invoked when the
// subspace-extracted pair misses the residual contract.
void polish_pair(const SpMat& A, const SpMat& M, Complex& lam, VecC& u)
{
  SpMatC ac = A.cast<Complex>();
  SpMatC mc = M.cast<Complex>();
  for (int it = 0; it < 3 && pencil_residual(A, M, lam, u) > kResidualTol; it++)
  {
    Complex sigma = lam;
    Eigen::SparseLU<SpMatC> lu;
    for (int attempt = 0; attempt < 3; attempt++)
    {
      SpMatC c = ac - sigma * mc;
      c.makeCompressed();
      lu.compute(c);
      if (lu.info() == Eigen::Success)
        break;
      sigma += Complex(1e-8, 1e-8) * std::max(1.0, std::abs(sigma));
    }
    if (lu.info() != Eigen::Success)
      return; // leave the pair as is; the caller re-checks the residual
    VecC x = lu.solve(mul_real(M, u));
    x /= x.norm();
    lam = x.dot(mul_real(A, x)) / x.dot(mul_real(M, x));
    u = x;
  }
}

void normalize_pair(const SpMat& A, EigenPair& pr)
{
  const Complex fv = form_value(A, pr.u);
  const double s = std::abs(fv);
  if (!(s > 0.0) || !std::isfinite(s))
    throw NumericalError("solve_cluster: eigenvector with vanishing form value");
  pr.u /= std::sqrt(s);
  int k = 0;
  double best = -1.0;
  for (int i = 0; i < pr.u.size(); i++)
    if (std::abs(pr.u[i]) > best)
    {
      best = std::abs(pr.u[i]);
      k = i;
    }
  const Complex phase = pr.u[k];
  if (std::abs(phase) > 0.0)
    pr.u *= std::conj(phase) / std::abs(phase); // largest entry becomes real positive
}

// Cut the (n, N) window from the candidates sorted by (|lambda|, arg, index),
// certify the upper cluster boundary, and finalize the pairs.
std::vector<EigenPair> cut_window(const SpMat& A, const SpMat& M, const VecC& lam,
                                  const MatC& U, int n, int N, int keep,
                                  std::vector<Complex>* nearby, double* separation)
{
  const std::vector<int> order = sorted_order(lam);
  const int q = static_cast<int>(order.size());
  if (q < n + N)
    throw NumericalError("solve_cluster: fewer certified eigenvalues than the window needs");

  if (q > n + N)
  {
    const Complex a = lam[order[n + N - 1]];
    const Complex b = lam[order[n + N]];
    const double gap = std::abs(b) - std::abs(a);
    const double scale = std::max({std::abs(a), std::abs(b), 1e-300});
    if (gap <= 1e-10 * scale && std::abs(a - b) > 1e-10 * scale)
      throw NumericalError("solve_cluster: cluster boundary splits two eigenvalues of equal modulus");
    if (separation)
      *separation = gap;
  }
  else if (separation)
    *separation = std::numeric_limits<double>::infinity();

  if (nearby)
  {
    nearby->clear();
    for (int i = 0; i < std::min(q, keep); i++)
      nearby->push_back(lam[order[i]]);
  }

  std::vector<EigenPair> pairs;
  pairs.reserve(N);
  for (int j = n; j < n + N; j++)
  {
    EigenPair pr;
    pr.lambda = lam[order[j]];
    pr.u = U.col(order[j]);
    if (pencil_residual(A, M, pr.lambda, pr.u) > kResidualTol)
      polish_pair(A, M, pr.lambda, pr.u);
    normalize_pair(A, pr);
    pr.residual = pencil_residual(A, M, pr.lambda, pr.u);
    if (pr.residual > kResidualTol)
      throw NumericalError("solve_cluster: eigenpair residual above 1e-9 after polishing");
    pairs.push_back(std::move(pr));
  }
  return pairs;
}

int subspace_dim(int n, int N, int nfree)
{
  return std::min(std::max(2 * (n + N) + 10, 40), nfree);
}

} // namespace

bool cluster_is_real(const Cluster& c)
{
  auto real_vec = [](const VecC& u)
  {
    const double re = u.real().cwiseAbs().maxCoeff();
    const double im = u.imag().cwiseAbs().maxCoeff();
    return im <= 1e-10 * re;
  };
  for (const EigenPair& pr : c.pairs)
    if (!real_vec(pr.u))
      return false;
  for (const EigenPair& pr : c.adjoint)
    if (!real_vec(pr.u))
      return false;
  return true;
}

Complex cluster_mean(const Cluster& c)
{
  Complex sum = 0.0;
  for (const EigenPair& pr : c.pairs)
    sum += pr.lambda;
  return sum / static_cast<double>(c.pairs.size());
}

Cluster solve_cluster(const OperatorPencil& p, const ClusterOptions& opt)
{
  if (opt.n < 0 || opt.N < 1)
    throw ConfigError("solve_cluster: window needs n >= 0 and N >= 1");
  if (opt.n + opt.N > p.n)
    throw ConfigError("solve_cluster: window exceeds the number of free dofs");

  const bool dense = opt.path == EigenPath::Dense ||
                     (opt.path == EigenPath::Auto && p.n < kDenseThreshold);
  const int keep = std::min(opt.n + opt.N + std::max(opt.extra, 1), p.n);

  Cluster c;
  c.n = opt.n;
  c.N = opt.N;
  c.shift = opt.shift;

  VecC lam;
  MatC U;
  if (dense)
  {
    dense_eigensolve(p.A, p.M, lam, U);
  }
  else
  {
    c.factor = factor_shifted(p, opt.shift);
    auto op = [&](const VecC& x) { return VecC(c.factor->lu.solve(mul_real(p.M, x))); };
    const MatC W = krylov_schur(op, p.n, keep, subspace_dim(opt.n, opt.N, p.n), opt.tol,
                                opt.max_restarts);
    rayleigh_ritz(p.A, p.M, W, lam, U);
  }
  c.pairs = cut_window(p.A, p.M, lam, U, opt.n, opt.N, keep, &c.nearby, &c.separation);
  return c;
}

void solve_adjoint_cluster(const OperatorPencil& p, Cluster& c)
{
  if (c.pairs.empty())
    throw Error("solve_adjoint_cluster: primal cluster not solved");
  SpMat at = p.A.transpose();
  at.makeCompressed();
  const int keep = std::max(c.n + c.N, static_cast<int>(c.nearby.size()));

  VecC lam;
  MatC U;
  if (!c.factor)
  {
    dense_eigensolve(at, p.M, lam, U);
  }
  else
  {
    // (A - sigma M)^H = A^T - conj(sigma) M, so the primal factorization also
    // drives the adjoint shift-invert iteration
    auto op = [&](const VecC& x) { return VecC(c.factor->lu.adjoint().solve(mul_real(p.M, x))); };
    const MatC W =
        krylov_schur(op, p.n, keep, subspace_dim(c.n, c.N, p.n), 1e-12, 80);
    rayleigh_ritz(at, p.M, W, lam, U);
  }
  std::vector<EigenPair> cand = cut_window(at, p.M, lam, U, c.n, c.N, keep, nullptr, nullptr);

  // greedy assignment on the full distance matrix |lambda_j - conj(lambda*_k)|
  const int N = c.N;
  std::vector<int> match(N, -1);
  std::vector<char> used(N, 0);
  double worst = 0.0;
  for (int round = 0; round < N; round++)
  {
    int bj = -1, bk = -1;
    double bd = std::numeric_limits<double>::infinity();
    for (int j = 0; j < N; j++)
    {
      if (match[j] >= 0)
        continue;
      for (int k = 0; k < N; k++)
      {
        if (used[k])
          continue;
        const double d = std::abs(c.pairs[j].lambda - std::conj(cand[k].lambda));
        if (d < bd)
        {
          bd = d;
          bj = j;
          bk = k;
        }
      }
    }
    match[bj] = bk;
    used[bk] = 1;
    worst = std::max(worst, bd / std::max(std::abs(c.pairs[bj].lambda), 1e-300));
  }
  c.adjoint_mismatch = worst;
  if (worst > 1e-8)
    throw NumericalError("solve_adjoint_cluster: adjoint eigenvalues do not match the primal cluster");
  c.adjoint.resize(N);
  for (int j = 0; j < N; j++)
    c.adjoint[j] = std::move(cand[match[j]]);
}

namespace
{

// Modified Gram-Schmidt in the inner product of the SPD matrix G, one
// reorthogonalization pass.
MatC mgs_orthonormalize(const SpMat& G, MatC X, double rank_tol)
{
  for (int j = 0; j < X.cols(); j++)
  {
    VecC v = X.col(j);
    for (int pass = 0; pass < 2; pass++)
      for (int i = 0; i < j; i++)
        v -= X.col(i).dot(mul_real(G, v)) * X.col(i);
    const double nrm = std::sqrt(std::max(0.0, v.dot(mul_real(G, v)).real()));
    if (nrm < rank_tol)
      throw NumericalError("orthonormalize: rank-deficient basis (defective or duplicated vector)");
    X.col(j) = v / nrm;
  }
  return X;
}

double gram_defect(const SpMat& G, const MatC& Q)
{
  MatC gq(Q.rows(), Q.cols());
  for (int j = 0; j < Q.cols(); j++)
    gq.col(j) = mul_real(G, Q.col(j));
  MatC gram = Q.adjoint() * gq;
  gram -= MatC::Identity(Q.cols(), Q.cols());
  return gram.cwiseAbs().maxCoeff();
}

} // namespace

void orthonormalize_cluster(const OperatorPencil& p, Cluster& c)
{
  if (c.pairs.empty())
    throw Error("orthonormalize_cluster: cluster not solved");
  MatC X(p.n, c.N);
  for (int j = 0; j < c.N; j++)
    X.col(j) = c.pairs[j].u;
  c.basis = mgs_orthonormalize(p.M, X, 1e-10);
  c.gram_error = gram_defect(p.M, c.basis);
  if (!c.adjoint.empty())
  {
    MatC Y(p.n, c.N);
    for (int j = 0; j < c.N; j++)
      Y.col(j) = c.adjoint[j].u;
    c.adjoint_basis = mgs_orthonormalize(p.M, Y, 1e-10);
    c.gram_error = std::max(c.gram_error, gram_defect(p.M, c.adjoint_basis));
  }
}

double subspace_gap(const MatC& u, const MatC& w, const SpMat& g)
{
  if (u.cols() == 0 || w.cols() == 0)
    throw Error("subspace_gap: empty basis");
  const MatC qu = mgs_orthonormalize(g, u, 1e-12);
  const MatC qw = mgs_orthonormalize(g, w, 1e-12);
  MatC gw(qw.rows(), qw.cols());
  for (int j = 0; j < qw.cols(); j++)
    gw.col(j) = mul_real(g, qw.col(j));
  const MatC cmat = qu.adjoint() * gw;
  Eigen::JacobiSVD<MatC> svd(cmat);
  const double smin = svd.singularValues()(svd.singularValues().size() - 1);
  const double sine = std::sqrt(std::max(0.0, 1.0 - smin * smin));
  const double d_uw = u.cols() > w.cols() ? 1.0 : sine;
  const double d_wu = w.cols() > u.cols() ? 1.0 : sine;
  return std::max(d_uw, d_wu);
}

} // namespace afem
