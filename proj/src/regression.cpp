#include "mdag/regression.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace mdag {

double logistic_cdf(double x) {
    if (x >= 0) {
        double e = std::exp(-x);
        return 1.0 / (1.0 + e);
    }
    double e = std::exp(x);
    return e / (1.0 + e);
}

double RegressionModel::predict_linear(const Eigen::VectorXd& x) const {
    return coef.col(0).dot(x);
}

double RegressionModel::predict_prob(const Eigen::VectorXd& x) const {
    return logistic_cdf(predict_linear(x));
}

std::vector<double> RegressionModel::predict_multinomial(const Eigen::VectorXd& x) const {
    int km1 = static_cast<int>(coef.cols());
    std::vector<double> out(km1 + 1);
    double denom = 1.0;
    for (int k = 0; k < km1; ++k) {
        out[k + 1] = std::exp(std::min(30.0, coef.col(k).dot(x)));
        denom += out[k + 1];
    }
    out[0] = 1.0;
    for (auto& p : out) p /= denom;
    return out;
}

namespace {

// Removes constant columns (keeping column 0, the intercept) and, if the
// cross-product is still singular, greedily removes collinear columns.
struct Reduction {
    Eigen::MatrixXd X;
    std::vector<int> kept;
    std::vector<int> dropped;
};

Reduction reduce_design(const Eigen::MatrixXd& X) {
    Reduction r;
    const auto n = X.rows();
    std::vector<int> kept;
    for (int c = 0; c < X.cols(); ++c) {
        if (c == 0) {
            kept.push_back(c);
            continue;
        }
        double mean = X.col(c).mean();
        double var = (X.col(c).array() - mean).square().sum() / std::max<double>(1, n - 1);
        if (var < 1e-14)
            r.dropped.push_back(c);
        else
            kept.push_back(c);
    }
    // greedy collinearity pass via rank-revealing QR
    Eigen::MatrixXd sub(n, kept.size());
    for (size_t i = 0; i < kept.size(); ++i) sub.col(i) = X.col(kept[i]);
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(sub);
    qr.setThreshold(1e-10);
    if (qr.rank() < sub.cols()) {
        // drop the least-pivoted columns
        std::vector<char> keep_flag(kept.size(), 0);
        for (int i = 0; i < qr.rank(); ++i) keep_flag[qr.colsPermutation().indices()[i]] = 1;
        keep_flag[0] = 1;  // never drop the intercept
        std::vector<int> kept2;
        for (size_t i = 0; i < kept.size(); ++i) {
            if (keep_flag[i])
                kept2.push_back(kept[i]);
            else
                r.dropped.push_back(kept[i]);
        }
        kept = kept2;
    }
    std::sort(r.dropped.begin(), r.dropped.end());
    r.X.resize(n, kept.size());
    for (size_t i = 0; i < kept.size(); ++i) r.X.col(i) = X.col(kept[i]);
    r.kept = kept;
    return r;
}

// Scatters reduced-space coefficients back to full-width vectors (dropped
// columns get coefficient 0).
Eigen::MatrixXd scatter(const Eigen::MatrixXd& reduced, const std::vector<int>& kept, int p) {
    Eigen::MatrixXd full = Eigen::MatrixXd::Zero(p, reduced.cols());
    for (size_t i = 0; i < kept.size(); ++i) full.row(kept[i]) = reduced.row(i);
    return full;
}

RegressionModel fit_linear(const Eigen::MatrixXd& X0, const Eigen::VectorXd& y) {
    Reduction r = reduce_design(X0);
    const auto n = r.X.rows();
    const auto p = r.X.cols();
    Eigen::MatrixXd xtx = r.X.transpose() * r.X;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(xtx);
    if (ldlt.info() != Eigen::Success) throw RankDeficient("linear solve failed");
    Eigen::VectorXd beta = ldlt.solve(r.X.transpose() * y);

    RegressionModel m;
    m.family = ModelFamily::Linear;
    m.n_rows = static_cast<int>(n);
    m.dropped = r.dropped;
    Eigen::VectorXd resid = y - r.X * beta;
    double dof = std::max<double>(1.0, static_cast<double>(n - p));
    double s2 = resid.squaredNorm() / dof;
    m.sigma = std::sqrt(s2);
    Eigen::MatrixXd cov = ldlt.solve(Eigen::MatrixXd::Identity(p, p)) * s2;
    m.coef = scatter(beta, r.kept, static_cast<int>(X0.cols()));
    m.coef_cov = scatter(scatter(cov, r.kept, static_cast<int>(X0.cols())).transpose(), r.kept,
                         static_cast<int>(X0.cols()));
    m.converged = true;
    return m;
}

RegressionModel fit_logistic(const Eigen::MatrixXd& X0, const Eigen::VectorXd& y) {
    Reduction r = reduce_design(X0);
    const auto n = r.X.rows();
    const auto p = r.X.cols();

    Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
    // intercept warm start at the logit of the outcome mean
    double ybar = std::clamp(y.mean(), 1e-6, 1.0 - 1e-6);
    beta(0) = std::log(ybar / (1.0 - ybar));

    Eigen::MatrixXd xtwx(p, p);
    Eigen::VectorXd mu(n), w(n);
    RegressionModel m;
    m.family = ModelFamily::Logistic;
    m.n_rows = static_cast<int>(n);
    m.dropped = r.dropped;

    constexpr double kTol = 1e-8;
    constexpr int kMaxIter = 50;
    bool converged = false;
    int iter = 0;
    for (; iter < kMaxIter; ++iter) {
        for (Eigen::Index i = 0; i < n; ++i) {
            double eta = r.X.row(i).dot(beta);
            double pr = logistic_cdf(eta);
            mu(i) = pr;
            w(i) = std::max(pr * (1.0 - pr), 1e-10);
        }
        xtwx = r.X.transpose() * w.asDiagonal() * r.X;
        Eigen::VectorXd grad = r.X.transpose() * (y - mu);
        Eigen::LDLT<Eigen::MatrixXd> ldlt(xtwx);
        if (ldlt.info() != Eigen::Success) throw RankDeficient("IRLS weighted solve failed");
        Eigen::VectorXd step = ldlt.solve(grad);
        if (!step.allFinite()) throw RankDeficient("IRLS produced non-finite step");
        beta += step;
        if (step.cwiseAbs().maxCoeff() < kTol) {
            converged = true;
            ++iter;
            break;
        }
    }
    m.iterations = iter;
    m.converged = converged;
    // runaway coefficients signal (near-)separation; the clamped weights
    // keep the fit finite so it remains usable for prediction
    if (!converged || beta.cwiseAbs().maxCoeff() > 30.0) m.separation = true;

    Eigen::LDLT<Eigen::MatrixXd> ldlt(xtwx);
    Eigen::MatrixXd cov = ldlt.solve(Eigen::MatrixXd::Identity(p, p));
    m.coef = scatter(beta, r.kept, static_cast<int>(X0.cols()));
    m.coef_cov = scatter(scatter(cov, r.kept, static_cast<int>(X0.cols())).transpose(), r.kept,
                         static_cast<int>(X0.cols()));
    return m;
}

RegressionModel fit_multinomial(const Eigen::MatrixXd& X0, const Eigen::VectorXd& y) {
    Reduction r = reduce_design(X0);
    const auto n = r.X.rows();
    const auto p = r.X.cols();

    std::set<double> levels(y.data(), y.data() + y.size());
    std::vector<double> cats(levels.begin(), levels.end());
    int K = static_cast<int>(cats.size());
    if (K < 2) throw InsufficientRows("multinomial outcome has a single level");
    int km1 = K - 1;

    // Newton steps on the stacked (p · km1) coefficient vector
    Eigen::MatrixXd beta = Eigen::MatrixXd::Zero(p, km1);
    std::vector<int> yk(n);
    for (Eigen::Index i = 0; i < n; ++i)
        yk[i] = static_cast<int>(std::lower_bound(cats.begin(), cats.end(), y(i) - 1e-9) -
                                 cats.begin());

    RegressionModel m;
    m.family = ModelFamily::MultinomialLogit;
    m.n_rows = static_cast<int>(n);
    m.dropped = r.dropped;
    m.categories = cats;

    constexpr int kMaxIter = 60;
    bool converged = false;
    for (int iter = 0; iter < kMaxIter; ++iter) {
        Eigen::VectorXd grad = Eigen::VectorXd::Zero(p * km1);
        Eigen::MatrixXd hess = Eigen::MatrixXd::Zero(p * km1, p * km1);
        for (Eigen::Index i = 0; i < n; ++i) {
            Eigen::VectorXd eta = beta.transpose() * r.X.row(i).transpose();
            double denom = 1.0;
            Eigen::VectorXd pr(km1);
            for (int k = 0; k < km1; ++k) {
                pr(k) = std::exp(std::min(30.0, eta(k)));
                denom += pr(k);
            }
            pr /= denom;
            for (int k = 0; k < km1; ++k) {
                double ind = yk[i] == k + 1 ? 1.0 : 0.0;
                grad.segment(k * p, p) += (ind - pr(k)) * r.X.row(i).transpose();
                for (int l = 0; l < km1; ++l) {
                    double wkl = pr(k) * ((k == l ? 1.0 : 0.0) - pr(l));
                    hess.block(k * p, l * p, p, p) +=
                        wkl * r.X.row(i).transpose() * r.X.row(i);
                }
            }
        }
        hess += 1e-10 * Eigen::MatrixXd::Identity(p * km1, p * km1);
        Eigen::LDLT<Eigen::MatrixXd> ldlt(hess);
        Eigen::VectorXd step = ldlt.solve(grad);
        if (!step.allFinite()) throw RankDeficient("multinomial step not finite");
        for (int k = 0; k < km1; ++k) beta.col(k) += step.segment(k * p, p);
        if (step.cwiseAbs().maxCoeff() < 1e-8) {
            converged = true;
            break;
        }
    }
    m.converged = converged;
    if (!converged || beta.cwiseAbs().maxCoeff() > 30.0) m.separation = true;
    m.coef = Eigen::MatrixXd::Zero(X0.cols(), km1);
    for (size_t i = 0; i < r.kept.size(); ++i) m.coef.row(r.kept[i]) = beta.row(i);
    return m;
}

}  // namespace

RegressionModel fit(ModelFamily family, const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
    if (X.rows() != y.size()) throw InvalidSpec("design/response size mismatch");
    if (X.rows() < X.cols() + 1)
        throw InsufficientRows("need at least p+1 rows, have " + std::to_string(X.rows()));
    switch (family) {
        case ModelFamily::Linear: return fit_linear(X, y);
        case ModelFamily::Logistic: return fit_logistic(X, y);
        case ModelFamily::MultinomialLogit: return fit_multinomial(X, y);
    }
    throw InvalidSpec("unknown model family");
}

Eigen::VectorXd draw_coefficients(const RegressionModel& m, Rng& rng) {
    const auto p = m.coef.rows();
    Eigen::VectorXd z(p);
    for (Eigen::Index i = 0; i < p; ++i) z(i) = rng.normal(0.0, 1.0);
    // covariance may be rank-deficient where columns were dropped;
    // LDLT-based square root handles the PSD case
    Eigen::MatrixXd cov = m.coef_cov;
    if (cov.rows() != p) return m.coef.col(0);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (cov + cov.transpose()));
    Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return m.coef.col(0) + es.eigenvectors() * ev.asDiagonal() * z;
}

}  // namespace mdag
