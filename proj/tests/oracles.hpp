// Test-only independent oracles. None of these call the implementation path
// they are used to check.
#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "mftb/prompt_params.hpp"
#include "mftb/rng.hpp"

namespace oracles {

inline Eigen::VectorXd gaussian(mftb::CounterRng& rng, Eigen::Index dim) {
  Eigen::VectorXd v(dim);
  for (Eigen::Index i = 0; i < dim; ++i) {
    v(i) = rng.next_normal();
  }
  return v;
}

inline Eigen::VectorXd random_unit(mftb::CounterRng& rng, Eigen::Index dim) {
  while (true) {
    Eigen::VectorXd v = gaussian(rng, dim);
    double norm = v.norm();
    if (norm > 1e-6) {
      return v / norm;
    }
  }
}

inline Eigen::MatrixXd random_unit_rows(mftb::CounterRng& rng, Eigen::Index n,
                                        Eigen::Index dim) {
  Eigen::MatrixXd rows(n, dim);
  for (Eigen::Index i = 0; i < n; ++i) {
    rows.row(i) = random_unit(rng, dim).transpose();
  }
  return rows;
}

/// Central finite difference of a scalar function of the prompt parameters,
/// taken entry by entry with the given step.
inline mftb::PromptParams finite_difference_gradient(
    const std::function<double(const mftb::PromptParams&)>& loss,
    const mftb::PromptParams& at, double step) {
  mftb::PromptParams grad = mftb::PromptParams::zeros(at.dim());
  auto central = [&](auto bump) {
    mftb::PromptParams plus = at;
    mftb::PromptParams minus = at;
    bump(plus, step);
    bump(minus, -step);
    return (loss(plus) - loss(minus)) / (2.0 * step);
  };
  const Eigen::Index d = at.dim();
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) {
      grad.vis_map(i, j) = central(
          [&](mftb::PromptParams& p, double h) { p.vis_map(i, j) += h; });
      grad.txt_map(i, j) = central(
          [&](mftb::PromptParams& p, double h) { p.txt_map(i, j) += h; });
    }
    grad.vis_bias(i) = central(
        [&](mftb::PromptParams& p, double h) { p.vis_bias(i) += h; });
    grad.txt_bias(i) = central(
        [&](mftb::PromptParams& p, double h) { p.txt_bias(i) += h; });
  }
  return grad;
}

inline double relative_gradient_error(const mftb::PromptParams& analytic,
                                      const mftb::PromptParams& numeric) {
  double err_sq = 0.0;
  double ref_sq = 0.0;
  auto accumulate = [&](const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    err_sq += (a - b).squaredNorm();
    ref_sq += b.squaredNorm();
  };
  accumulate(analytic.vis_map, numeric.vis_map);
  accumulate(analytic.txt_map, numeric.txt_map);
  accumulate(analytic.vis_bias, numeric.vis_bias);
  accumulate(analytic.txt_bias, numeric.txt_bias);
  return std::sqrt(err_sq) / std::max(std::sqrt(ref_sq), 1e-8);
}

/// Full singular spectrum of the centered cloud via Jacobi SVD; independent
/// of the Gram-matrix route used by the subspace fit.
inline Eigen::VectorXd centered_spectrum(const Eigen::MatrixXd& rows) {
  Eigen::MatrixXd centered = rows.rowwise() - rows.colwise().mean();
  return Eigen::JacobiSVD<Eigen::MatrixXd>(centered).singularValues();
}

/// The rank-sweep fixture: two axis-aligned clouds whose exact spectra are
/// chosen so the off-manifold drift strictly decreases across the rank grid
/// {8, 16, 32, 64, 128}. Rows are +/- sqrt(energy_j) e_j, so the centered
/// Gram matrices are diagonal with known entries.
inline void monotone_sweep_clouds(Eigen::MatrixXd* pretrained,
                                  Eigen::MatrixXd* tuned) {
  const Eigen::Index d = 128;
  pretrained->setZero(2 * d, d);
  tuned->setZero(2 * d, d);
  for (Eigen::Index j = 0; j < d; ++j) {
    double steep = std::pow(2.0, -static_cast<double>(j + 1) / 2.0);
    double flat = std::pow(2.0, -static_cast<double>(j + 1) / 16.0);
    (*pretrained)(2 * j, j) = std::sqrt(steep);
    (*pretrained)(2 * j + 1, j) = -std::sqrt(steep);
    (*tuned)(2 * j, j) = std::sqrt(flat);
    (*tuned)(2 * j + 1, j) = -std::sqrt(flat);
  }
}

}  // namespace oracles
