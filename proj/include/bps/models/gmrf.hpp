#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "bps/factor_graph.hpp"
#include "bps/rng.hpp"

namespace bps {

// Chain-shaped Gaussian Markov random field realized as pair factors in
// penalty form rho/2 (x_k - x_{k+1})^2 plus node factors, so the summed
// factor energies equal x' P x / 2.
//
// Two precision parameterizations are supported. Penalty keeps plain unit
// node factors, giving P = I + rho L for the chain Laplacian L; it is
// positive definite for every rho >= 0 and keeps marginal variances and
// mixing times bounded as the chain grows. UnitDiagonal folds the diagonal
// contribution of the pair factors back into the node factors so that P has
// unit diagonal and -rho off the diagonal; it approaches singularity as
// rho -> 1/(2 cos(pi/(d+1))) and is rejected beyond it.
enum class ChainForm { Penalty, UnitDiagonal };

Eigen::SparseMatrix<double> chain_precision(int dimension, double rho,
                                            ChainForm form = ChainForm::Penalty);
FactorGraph build_chain_gmrf(int dimension, double rho, ChainForm form = ChainForm::Penalty);

// Grid-shaped latent field with the same pairwise penalty factors; the latent
// precision is I + rho L for the grid Laplacian L, which is positive definite
// for any rho >= 0. Cell (i, j) observes a Poisson count with rate
// exp(x_{i,j}); the likelihood contributes one factor exp(x) - y x per cell.
Eigen::SparseMatrix<double> grid_precision(int side, double rho);
FactorGraph build_grid_poisson_gmrf(int side, const Eigen::MatrixXi& counts, double rho = 0.5);

// Synthetic counts drawn from the grid model itself.
Eigen::MatrixXi sample_grid_counts(int side, double rho, RngStream& rng);

}  // namespace bps
