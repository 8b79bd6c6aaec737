#include "afc/levmar.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace afc {

namespace {

bool finite(const Eigen::VectorXd& v) { return v.allFinite(); }

} // namespace

Eigen::MatrixXd numeric_jacobian(const ResidualFn& f, const Eigen::VectorXd& p) {
    const Eigen::VectorXd r0 = f(p);
    Eigen::MatrixXd jac(r0.size(), p.size());
    Eigen::VectorXd q = p;
    for (Eigen::Index j = 0; j < p.size(); ++j) {
        const double h = 1e-6 * (1.0 + std::abs(p[j]));
        q[j] = p[j] + h;
        const Eigen::VectorXd up = f(q);
        q[j] = p[j] - h;
        const Eigen::VectorXd down = f(q);
        q[j] = p[j];
        jac.col(j) = (up - down) / (2.0 * h);
    }
    return jac;
}

LmResult levenberg_marquardt(const ResidualFn& f, const Eigen::VectorXd& start, const LmOptions& opts) {
    LmResult res;
    res.params = start;
    Eigen::VectorXd r = f(start);
    if (!finite(r)) {
        res.message = "non-finite residuals at start";
        res.cost = std::numeric_limits<double>::infinity();
        return res;
    }
    res.cost = r.squaredNorm();
    double lambda = opts.lambda0;

    for (int it = 0; it < opts.max_iterations; ++it) {
        res.iterations = it + 1;
        const Eigen::MatrixXd jac = numeric_jacobian(f, res.params);
        const Eigen::MatrixXd jtj = jac.transpose() * jac;
        const Eigen::VectorXd grad = jac.transpose() * r;
        Eigen::VectorXd diag = jtj.diagonal().cwiseMax(1e-12 * std::max(1.0, jtj.diagonal().maxCoeff()));

        if (res.cost < 1e-30 ||
            (grad.array().abs() / diag.array().sqrt()).maxCoeff() <= opts.gtol * std::sqrt(std::max(res.cost, 1e-300))) {
            res.converged = true;
            res.message = "gradient below tolerance";
            break;
        }

        bool accepted = false;
        for (int inner = 0; inner < 30; ++inner) {
            Eigen::MatrixXd a = jtj;
            a.diagonal() += lambda * diag;
            const Eigen::VectorXd step = a.ldlt().solve(-grad);
            const Eigen::VectorXd trial = res.params + step;
            const Eigen::VectorXd rt = f(trial);
            const double cost = finite(rt) ? rt.squaredNorm() : std::numeric_limits<double>::infinity();
            if (cost < res.cost) {
                const double reduction = (res.cost - cost) / res.cost;
                const double step_rel = step.norm() / (res.params.norm() + 1e-12);
                res.params = trial;
                r = rt;
                res.cost = cost;
                lambda = std::max(lambda / 10.0, 1e-12);
                accepted = true;
                if (reduction < opts.ftol || step_rel < opts.xtol) {
                    res.converged = true;
                    res.message = "relative reduction below tolerance";
                }
                break;
            }
            lambda *= 10.0;
            if (lambda > 1e16) break;
        }
        if (!accepted) {
            // no downhill step at any damping: a (possibly flat) minimum
            res.converged = true;
            res.message = "no further reduction";
            break;
        }
        if (res.converged) break;
    }
    if (!res.converged) res.message = "iteration limit reached";
    res.jacobian = numeric_jacobian(f, res.params);
    return res;
}

bool normal_covariance(const Eigen::MatrixXd& jacobian, Eigen::MatrixXd& cov) {
    const Eigen::MatrixXd jtj = jacobian.transpose() * jacobian;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(jtj, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const auto& s = svd.singularValues();
    if (s.size() == 0 || !(s[s.size() - 1] > 1e-14 * s[0])) return false;
    cov = svd.matrixV() * s.cwiseInverse().asDiagonal() * svd.matrixU().transpose();
    return true;
}

} // namespace afc
