#pragma once

#include <functional>
#include <string>

#include <Eigen/Dense>

namespace afc {

/// Residual vector r(p); the optimizer minimizes |r|^2.
using ResidualFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

struct LmOptions {
    int max_iterations = 400;
    double ftol = 1e-15;   // relative cost reduction
    double xtol = 1e-13;   // relative step size
    double gtol = 1e-14;   // scaled gradient
    double lambda0 = 1e-3;
};

struct LmResult {
    Eigen::VectorXd params;
    Eigen::MatrixXd jacobian;  // at params
    double cost = 0.0;         // sum of squared residuals
    int iterations = 0;
    bool converged = false;
    std::string message;
};

/// Central-difference Jacobian.
Eigen::MatrixXd numeric_jacobian(const ResidualFn& f, const Eigen::VectorXd& p);

/// Damped Gauss-Newton with Marquardt diagonal scaling and numeric Jacobians.
LmResult levenberg_marquardt(const ResidualFn& f, const Eigen::VectorXd& start, const LmOptions& opts = {});

/// (J^T J)^{-1}; returns false when J^T J is numerically singular.
bool normal_covariance(const Eigen::MatrixXd& jacobian, Eigen::MatrixXd& cov);

} // namespace afc
