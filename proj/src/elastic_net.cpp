/*
 * @file elastic_net.cpp
 *
 * This file is part of adrrefine
 *
 * Copyright 2026 The adrrefine Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#include "adrrefine/elastic_net.hpp"

#include "adrrefine/cox_model.hpp"
#include "adrrefine/random.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace adrrefine {

std::vector<double> CoxFitPath::coefficients_at(std::size_t k) const {
    std::vector<double> out(static_cast<std::size_t>(coefficients.rows()));
    for (Eigen::Index j = 0; j < coefficients.rows(); ++j) out[static_cast<std::size_t>(j)] = coefficients(j, static_cast<Eigen::Index>(k));
    return out;
}

ColumnScaling column_scaling(const SurvivalData &d) {
    ColumnScaling s;
    const double n = static_cast<double>(d.n());
    for (std::size_t j = 0; j < d.p(); ++j) {
        const auto &col = d.column(j);
        double sum = 0.0;
        for (double v : col.values) sum += v;
        const double mean = sum / n;
        double ss = 0.0;
        for (double v : col.values) ss += (v - mean) * (v - mean);
        ss += static_cast<double>(d.n() - col.nnz()) * mean * mean;
        const double sd = std::sqrt(ss / n);
        s.mean.push_back(mean);
        // relative cut-off so rounding noise on a constant column is not mistaken for spread
        s.sd.push_back(sd > 1e-10 * std::max(1.0, std::abs(mean)) ? sd : 0.0);
    }
    return s;
}

namespace {

/// -log PL at `eta`; optionally the per-row gradient g and diagonal Hessian h
/// with respect to eta.
double cox_working(std::span<const double> eta, const SurvivalData &d, std::vector<double> *g, std::vector<double> *h) {
    const std::size_t n = d.n();
    const auto &order = d.time_order();
    const auto &time = d.time();
    const auto &event = d.event();
    const double shift = *std::max_element(eta.begin(), eta.end());

    std::vector<double> w(n);
    for (std::size_t i = 0; i < n; ++i) w[i] = std::exp(eta[i] - shift);

    // group boundaries in ascending time
    std::vector<std::size_t> starts;
    for (std::size_t k = 0; k < n; ++k) {
        if (k == 0 || time[order[k]] != time[order[k - 1]]) starts.push_back(k);
    }
    starts.push_back(n);
    const std::size_t n_groups = starts.size() - 1;

    std::vector<double> s0(n_groups, 0.0);
    std::vector<double> events(n_groups, 0.0);
    double value = 0.0;
    double running = 0.0;
    for (std::size_t gi = n_groups; gi-- > 0;) {
        double eta_events = 0.0;
        for (std::size_t k = starts[gi]; k < starts[gi + 1]; ++k) {
            const auto i = order[k];
            running += w[i];
            if (event[i]) {
                events[gi] += 1.0;
                eta_events += eta[i];
            }
        }
        s0[gi] = running;
        if (events[gi] > 0.0) value += events[gi] * (std::log(running) + shift) - eta_events;
    }
    if (!g) return value;

    g->assign(n, 0.0);
    if (h) h->assign(n, 0.0);
    double a = 0.0;
    double b = 0.0;
    for (std::size_t gi = 0; gi < n_groups; ++gi) {
        if (events[gi] > 0.0) {
            a += events[gi] / s0[gi];
            b += events[gi] / (s0[gi] * s0[gi]);
        }
        for (std::size_t k = starts[gi]; k < starts[gi + 1]; ++k) {
            const auto i = order[k];
            const double wa = w[i] * a;
            (*g)[i] = wa - event[i];
            if (h) (*h)[i] = wa - w[i] * w[i] * b;
        }
    }
    return value;
}

double soft_threshold(double z, double gamma) {
    // ties at the threshold (duplicated columns) must not leak rounding noise into the active set
    if (std::abs(z) <= gamma * (1.0 + 1e-9)) return 0.0;
    if (z > gamma) return z - gamma;
    if (z < -gamma) return z + gamma;
    return 0.0;
}

/// Coordinate descent on successive quadratic expansions of the partial
/// likelihood. Standardization is implicit: column j enters as (x_j - mean_j)/sd_j.
/// The Gram matrix of the standardized columns under the curvature weights is
/// built row-wise (cost follows the row sparsity) and the sweeps run in
/// covariance mode at O(p) per update. Once the signs settle, the quadratic is
/// minimized exactly on the active set; a plain sweep still decides convergence.
class Solver {
public:
    Solver(const SurvivalData &d, double alpha, const ElasticNetOptions &options)
        : d_{d}, n_{d.n()}, p_{d.p()}, alpha_{alpha}, options_{options}, scaling_{column_scaling(d)},
          beta_(p_, 0.0) {
        pf_ = options.penalty_factor.empty() ? std::vector<double>(p_, 1.0) : options.penalty_factor;
        if (pf_.size() != p_) throw std::invalid_argument("penalty_factor length does not match column count");
        for (double f : pf_) {
            if (!(f >= 0.0) || !std::isfinite(f)) throw std::invalid_argument("penalty factors must be finite and >= 0");
        }
        for (std::size_t j = 0; j < p_; ++j) {
            if (scaling_.sd[j] > 0.0) cols_.push_back(j);
        }
        // row-major copy of the non-constant columns, indexed by position in cols_
        row_start_.assign(n_ + 1, 0);
        for (auto j : cols_) {
            for (auto r : d_.column(j).rows) ++row_start_[r + 1];
        }
        for (std::size_t i = 0; i < n_; ++i) row_start_[i + 1] += row_start_[i];
        row_col_.resize(row_start_[n_]);
        row_val_.resize(row_start_[n_]);
        std::vector<std::size_t> fill(row_start_.begin(), row_start_.end() - 1);
        for (std::size_t m = 0; m < cols_.size(); ++m) {
            const auto &col = d_.column(cols_[m]);
            for (std::size_t k = 0; k < col.nnz(); ++k) {
                const auto at = fill[col.rows[k]]++;
                row_col_[at] = m;
                row_val_[at] = col.values[k];
            }
        }
    }

    const ColumnScaling &scaling() const noexcept { return scaling_; }
    const std::vector<double> &penalty_factor() const noexcept { return pf_; }

    /// Returns the number of coordinate sweeps used.
    std::size_t solve(double lambda) {
        std::size_t passes = 0;
        for (std::size_t outer = 0; outer < options_.max_outer; ++outer) {
            const std::vector<double> start = beta_;
            const auto eta = linear_predictor(start);
            // the cheap diagonal curvature serves while the expansions converge
            // quickly; a lambda that needs more switches to the full Hessian
            const bool full = outer >= kDiagonalExpansions;
            const double loss = cox_working(eta, d_, &g_, full ? nullptr : &h_);
            const double f_start = loss / static_cast<double>(n_) + penalty(start, lambda);
            if (outer == 0 || full) build_gram(eta, full);
            refresh_residual();
            passes += coordinate_descent(lambda, passes);
            if (max_change(start) <= options_.tolerance) return passes;

            double f_new = objective(beta_, lambda);
            for (int halving = 0; f_new > f_start + 1e-12 * std::abs(f_start) && halving < 30; ++halving) {
                for (std::size_t j = 0; j < p_; ++j) beta_[j] = 0.5 * (beta_[j] + start[j]);
                f_new = objective(beta_, lambda);
            }
            if (max_change(start) <= options_.tolerance) return passes;
        }
        std::ostringstream msg;
        msg << "elastic net did not converge at lambda=" << lambda << " after " << options_.max_outer
            << " quadratic expansions (" << passes << " coordinate sweeps)";
        throw std::runtime_error(msg.str());
    }

    /// Gradient of (1/n)(-log PL) on the standardized scale at the current coefficients.
    std::vector<double> standardized_gradient() {
        const auto eta = linear_predictor(beta_);
        cox_working(eta, d_, &g_, nullptr);
        const auto gs = standardized(g_);
        std::vector<double> out(p_, 0.0);
        for (std::size_t m = 0; m < cols_.size(); ++m) out[cols_[m]] = gs[m];
        return out;
    }

    std::vector<double> original_coefficients() const {
        std::vector<double> out(p_, 0.0);
        for (auto j : cols_) out[j] = beta_[j] / scaling_.sd[j];
        return out;
    }

    const std::vector<std::size_t> &columns() const noexcept { return cols_; }

private:
    std::vector<double> linear_predictor(const std::vector<double> &beta) const {
        std::vector<double> eta(n_, 0.0);
        for (auto j : cols_) {
            if (beta[j] == 0.0) continue;
            const double b = beta[j] / scaling_.sd[j];
            const auto &col = d_.column(j);
            for (std::size_t k = 0; k < col.nnz(); ++k) eta[col.rows[k]] += b * col.values[k];
        }
        return eta;
    }

    /// X~' v / n for the non-constant columns, by position in cols_.
    std::vector<double> standardized(const std::vector<double> &v) const {
        double vsum = 0.0;
        for (double x : v) vsum += x;
        std::vector<double> out(cols_.size(), 0.0);
        for (std::size_t m = 0; m < cols_.size(); ++m) {
            const auto j = cols_[m];
            const auto &col = d_.column(j);
            double s = 0.0;
            for (std::size_t k = 0; k < col.nnz(); ++k) s += v[col.rows[k]] * col.values[k];
            out[m] = (s - scaling_.mean[j] * vsum) / (static_cast<double>(n_) * scaling_.sd[j]);
        }
        return out;
    }

    double penalty(const std::vector<double> &beta, double lambda) const {
        double s = 0.0;
        for (auto j : cols_) {
            if (beta[j] == 0.0 || pf_[j] == 0.0) continue;
            s += pf_[j] * (alpha_ * std::abs(beta[j]) + 0.5 * (1.0 - alpha_) * beta[j] * beta[j]);
        }
        return lambda * s;
    }

    double objective(const std::vector<double> &beta, double lambda) const {
        const auto eta = linear_predictor(beta);
        return cox_working(eta, d_, nullptr, nullptr) / static_cast<double>(n_) + penalty(beta, lambda);
    }

    double max_change(const std::vector<double> &start) const {
        double m = 0.0;
        for (auto j : cols_) m = std::max(m, std::abs(beta_[j] - start[j]));
        return m;
    }

    static constexpr std::size_t kDiagonalExpansions = 10;

    /// Q = X~' H X~ / n. With `full`, H is the Hessian of -log PL in eta (per event
    /// time, the weighted covariance of the risk set); otherwise only its diagonal,
    /// which converges linearly near quasi-separation.
    void build_gram(const std::vector<double> &eta, bool full) {
        const std::size_t q = cols_.size();
        const auto &event = d_.event();
        std::vector<double> mu(q);
        for (std::size_t m = 0; m < q; ++m) mu[m] = scaling_.mean[cols_[m]];

        // sum_i c_i x_i x_i' with c the diagonal weights, or for the full Hessian
        // w_i * (sum of e/S over the risk sets holding i), which is g_i + event_i
        Eigen::MatrixXd raw = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(q), static_cast<Eigen::Index>(q));
        std::vector<double> hx(q, 0.0);
        double h_total = 0.0;
        for (std::size_t i = 0; i < n_; ++i) {
            const double ci = full ? g_[i] + event[i] : h_[i];
            h_total += ci;
            if (ci == 0.0) continue;
            for (auto a = row_start_[i]; a < row_start_[i + 1]; ++a) {
                const double va = ci * row_val_[a];
                const auto ca = static_cast<Eigen::Index>(row_col_[a]);
                hx[row_col_[a]] += va;
                for (auto b = a; b < row_start_[i + 1]; ++b) raw(ca, static_cast<Eigen::Index>(row_col_[b])) += va * row_val_[b];
            }
        }
        const Eigen::MatrixXd between = full ? risk_set_spread(eta, mu)
                                             : Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(q), static_cast<Eigen::Index>(q));

        q_.resize(static_cast<Eigen::Index>(q), static_cast<Eigen::Index>(q));
        const double n = static_cast<double>(n_);
        for (std::size_t a = 0; a < q; ++a) {
            const double sd_a = scaling_.sd[cols_[a]];
            for (std::size_t b = a; b < q; ++b) {
                const double sd_b = scaling_.sd[cols_[b]];
                const auto ia = static_cast<Eigen::Index>(a);
                const auto ib = static_cast<Eigen::Index>(b);
                const double within = raw(ia, ib) - mu[b] * hx[a] - mu[a] * hx[b] + mu[a] * mu[b] * h_total;
                const double v = (within - between(ia, ib)) / (n * sd_a * sd_b);
                q_(ia, ib) = v;
                q_(ib, ia) = v;
            }
        }
    }

    /// sum over event times of e * (m - mu)(m - mu)', m the weighted risk-set mean.
    Eigen::MatrixXd risk_set_spread(const std::vector<double> &eta, const std::vector<double> &mu) const {
        const std::size_t q = cols_.size();
        const auto &order = d_.time_order();
        const auto &time = d_.time();
        const auto &event = d_.event();
        const double shift = *std::max_element(eta.begin(), eta.end());

        std::vector<std::size_t> starts;
        for (std::size_t k = 0; k < n_; ++k) {
            if (k == 0 || time[order[k]] != time[order[k - 1]]) starts.push_back(k);
        }
        starts.push_back(n_);
        std::size_t event_times = 0;
        for (std::size_t gi = 0; gi + 1 < starts.size(); ++gi) {
            for (std::size_t k = starts[gi]; k < starts[gi + 1]; ++k) {
                if (event[order[k]]) {
                    ++event_times;
                    break;
                }
            }
        }

        Eigen::MatrixXd means(static_cast<Eigen::Index>(event_times), static_cast<Eigen::Index>(q));
        std::vector<double> u(q, 0.0);
        double s0 = 0.0;
        Eigen::Index row = 0;
        for (std::size_t gi = starts.size() - 1; gi-- > 0;) {
            double e = 0.0;
            for (std::size_t k = starts[gi]; k < starts[gi + 1]; ++k) {
                const auto i = order[k];
                const double w = std::exp(eta[i] - shift);
                s0 += w;
                e += event[i];
                for (auto a = row_start_[i]; a < row_start_[i + 1]; ++a) u[row_col_[a]] += w * row_val_[a];
            }
            if (e == 0.0) continue;
            const double f = std::sqrt(e);
            for (std::size_t m = 0; m < q; ++m) means(row, static_cast<Eigen::Index>(m)) = f * (u[m] / s0 - mu[m]);
            ++row;
        }
        Eigen::MatrixXd out = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(q), static_cast<Eigen::Index>(q));
        out.selfadjointView<Eigen::Lower>().rankUpdate(means.transpose());
        return out.selfadjointView<Eigen::Lower>();
    }

    /// r = -gradient of the quadratic at the expansion point.
    void refresh_residual() {
        const std::size_t q = cols_.size();
        const auto gs = standardized(g_);
        r_.resize(q);
        for (std::size_t m = 0; m < q; ++m) r_[m] = -gs[m];
    }

    double update(std::size_t m, double lambda) {
        const auto j = cols_[m];
        const auto im = static_cast<Eigen::Index>(m);
        const double curv = q_(im, im);
        const double denom = curv + lambda * (1.0 - alpha_) * pf_[j];
        const double z = curv * beta_[j] + r_[m];
        const double next = denom > 0.0 ? soft_threshold(z, lambda * alpha_ * pf_[j]) / denom : 0.0;
        const double delta = next - beta_[j];
        if (delta == 0.0) return 0.0;
        shift_residual(m, delta);
        beta_[j] = next;
        return std::abs(delta);
    }

    void shift_residual(std::size_t m, double delta) {
        const double *col = q_.col(static_cast<Eigen::Index>(m)).data();
        for (std::size_t k = 0; k < r_.size(); ++k) r_[k] -= col[k] * delta;
    }

    /// Active-set passes: each solves the fixed-sign quadratic on the set and is
    /// cut short where a coefficient reaches zero, which then leaves the set.
    bool solve_active(std::vector<std::size_t> active, double lambda) {
        constexpr int kMaxDrops = 20;
        bool moved = false;
        for (int round = 0; round <= kMaxDrops && !active.empty(); ++round) {
            const auto dropped = active_set_step(active, lambda);
            if (dropped == kStepFailed) return moved;
            moved = true;
            if (dropped == kStepFull) return true;
            active.erase(active.begin() + dropped);
        }
        return moved;
    }

    static constexpr Eigen::Index kStepFailed = -2;
    static constexpr Eigen::Index kStepFull = -1;

    /// One move toward the minimizer of the quadratic over `active` with the
    /// current signs held fixed. Returns the position of the coefficient that hit
    /// zero first, kStepFull when the minimizer was reached, or kStepFailed.
    Eigen::Index active_set_step(const std::vector<std::size_t> &active, double lambda) {
        const auto na = static_cast<Eigen::Index>(active.size());
        Eigen::MatrixXd a(na, na);
        Eigen::VectorXd rhs(na);
        Eigen::VectorXd b0(na);
        for (Eigen::Index x = 0; x < na; ++x) {
            const auto mx = static_cast<Eigen::Index>(active[static_cast<std::size_t>(x)]);
            for (Eigen::Index y = 0; y < na; ++y) a(x, y) = q_(mx, static_cast<Eigen::Index>(active[static_cast<std::size_t>(y)]));
            b0(x) = beta_[cols_[static_cast<std::size_t>(mx)]];
        }
        const Eigen::VectorXd qb = a * b0;
        for (Eigen::Index x = 0; x < na; ++x) {
            const auto mx = active[static_cast<std::size_t>(x)];
            const auto jx = cols_[mx];
            a(x, x) += lambda * (1.0 - alpha_) * pf_[jx];
            const double b = b0(x);
            rhs(x) = r_[mx] + qb(x) - lambda * alpha_ * pf_[jx] * (b > 0.0 ? 1.0 : (b < 0.0 ? -1.0 : 0.0));
        }
        // exactly collinear active columns leave a singular block; a trace-relative
        // jitter picks one of the minimizers and the descent check below guards it
        Eigen::MatrixXd jittered = a;
        jittered.diagonal().array() += 1e-10 * std::max(1.0, a.diagonal().maxCoeff());
        const Eigen::LDLT<Eigen::MatrixXd> ldlt(jittered);
        if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) return kStepFailed;
        const Eigen::VectorXd sol = ldlt.solve(rhs);
        if (!sol.allFinite()) return kStepFailed;
        const Eigen::VectorXd dir = sol - b0;

        double t = 1.0;
        Eigen::Index stop = -1;
        if (alpha_ > 0.0) {
            for (Eigen::Index x = 0; x < na; ++x) {
                const auto jx = cols_[active[static_cast<std::size_t>(x)]];
                if (pf_[jx] == 0.0 || sol(x) * b0(x) > 0.0) continue;
                const double tx = b0(x) / (b0(x) - sol(x));
                if (tx < t) {
                    t = tx;
                    stop = x;
                }
            }
        }
        // the fixed-sign quadratic must go down along the step
        const double slope = (a * b0 - rhs).dot(dir);
        const double gain = t * slope + 0.5 * t * t * dir.dot(a * dir);
        if (!(gain < 0.0)) return kStepFailed;

        for (Eigen::Index x = 0; x < na; ++x) {
            const auto mx = active[static_cast<std::size_t>(x)];
            const double next = x == stop ? 0.0 : b0(x) + t * dir(x);
            const double delta = next - beta_[cols_[mx]];
            if (delta == 0.0) continue;
            shift_residual(mx, delta);
            beta_[cols_[mx]] = next;
        }
        return stop < 0 ? kStepFull : stop;
    }

    std::size_t coordinate_descent(double lambda, std::size_t used) {
        std::size_t passes = 0;
        auto count_pass = [&] {
            if (++passes + used > options_.max_passes) {
                std::ostringstream msg;
                msg << "elastic net did not converge at lambda=" << lambda << " after " << options_.max_passes
                    << " coordinate sweeps";
                throw std::runtime_error(msg.str());
            }
        };
        std::vector<std::size_t> active;
        std::vector<std::size_t> previous;
        for (;;) {
            double max_delta = 0.0;
            for (std::size_t m = 0; m < cols_.size(); ++m) max_delta = std::max(max_delta, update(m, lambda));
            count_pass();
            if (max_delta <= options_.tolerance) return passes;
            active.clear();
            for (std::size_t m = 0; m < cols_.size(); ++m) {
                if (beta_[cols_[m]] != 0.0) active.push_back(m);
            }
            // the exact step pays off once the active set stops changing; failed
            // attempts (a sign flips) back off geometrically
            std::size_t stable = 0;
            std::size_t wait = 1;
            for (std::size_t sweep = 0;; ++sweep) {
                stable = sweep > 0 && active == previous ? stable + 1 : 0;
                if (stable >= wait) {
                    if (!solve_active(active, lambda)) wait *= 2;
                    stable = 0;
                }
                previous = active;
                double d = 0.0;
                for (auto m : active) d = std::max(d, update(m, lambda));
                count_pass();
                if (d <= options_.tolerance) break;
                active.erase(std::remove_if(active.begin(), active.end(), [&](std::size_t m) { return beta_[cols_[m]] == 0.0; }),
                             active.end());
            }
        }
    }

    const SurvivalData &d_;
    std::size_t n_;
    std::size_t p_;
    double alpha_;
    const ElasticNetOptions &options_;
    ColumnScaling scaling_;
    std::vector<double> pf_;
    std::vector<std::size_t> cols_;
    std::vector<double> beta_; ///< standardized scale

    std::vector<std::size_t> row_start_;
    std::vector<std::size_t> row_col_;
    std::vector<double> row_val_;

    std::vector<double> g_;
    std::vector<double> h_;
    Eigen::MatrixXd q_;
    std::vector<double> r_; ///< minus the gradient of the current quadratic, by position in cols_
};

void check_inputs(const SurvivalData &d, double alpha) {
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw std::invalid_argument("alpha must lie in [0, 1]");
    if (d.n_events() == 0) throw std::invalid_argument("elastic net needs at least one event");
    if (d.p() == 0) throw std::invalid_argument("elastic net needs at least one covariate");
}

constexpr double kHugeLambda = 1e300;

double lambda_max_from(Solver &solver, double alpha) {
    solver.solve(kHugeLambda); // fits only the exempt columns
    const auto grad = solver.standardized_gradient();
    const auto &pf = solver.penalty_factor();
    const double a = std::max(alpha, 1e-3);
    double best = 0.0;
    bool any = false;
    for (auto j : solver.columns()) {
        if (pf[j] == 0.0) continue;
        any = true;
        best = std::max(best, std::abs(grad[j]) / (a * pf[j]));
    }
    if (!any) throw std::invalid_argument("no penalized non-constant column");
    if (!(best > 0.0)) throw std::runtime_error("lambda_max is zero: the gradient vanishes at the null model");
    // slack for the tolerance of the exempt-column solve, so the first grid point is exactly null
    return best * (1.0 + 1e-6);
}

} // namespace

std::vector<double> eta_gradient(std::span<const double> eta, const SurvivalData &d) {
    if (eta.size() != d.n()) throw std::invalid_argument("linear predictor length does not match rows");
    std::vector<double> g;
    cox_working(eta, d, &g, nullptr);
    return g;
}

double lambda_max(const SurvivalData &d, double alpha, const ElasticNetOptions &options) {
    check_inputs(d, alpha);
    Solver solver(d, alpha, options);
    return lambda_max_from(solver, alpha);
}

std::vector<double> lambda_grid(double lambda_max, std::size_t n, double min_ratio) {
    if (!(lambda_max > 0.0) || n < 1 || !(min_ratio > 0.0 && min_ratio < 1.0)) {
        throw std::invalid_argument("invalid lambda grid parameters");
    }
    std::vector<double> grid(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double frac = n == 1 ? 0.0 : static_cast<double>(k) / static_cast<double>(n - 1);
        grid[k] = lambda_max * std::pow(min_ratio, frac);
    }
    return grid;
}

CoxFitPath fit_elastic_net_path(const SurvivalData &d, double alpha, const ElasticNetOptions &options) {
    check_inputs(d, alpha);
    Solver solver(d, alpha, options);
    CoxFitPath path;
    path.alpha = alpha;
    path.names = d.names();
    for (std::size_t j = 0; j < d.p(); ++j) {
        if (solver.scaling().sd[j] == 0.0) path.warnings.push_back("constant column '" + d.names()[j] + "' dropped");
    }
    if (options.lambdas.empty()) {
        path.lambdas = lambda_grid(lambda_max_from(solver, alpha), options.n_lambda, options.lambda_min_ratio);
    } else {
        path.lambdas = options.lambdas;
        for (std::size_t k = 0; k < path.lambdas.size(); ++k) {
            if (!(path.lambdas[k] > 0.0) || (k > 0 && !(path.lambdas[k] < path.lambdas[k - 1]))) {
                throw std::invalid_argument("lambda grid must be positive and strictly descending");
            }
        }
    }
    const auto L = static_cast<Eigen::Index>(path.lambdas.size());
    path.coefficients = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(d.p()), L);
    for (Eigen::Index k = 0; k < L; ++k) {
        path.passes.push_back(solver.solve(path.lambdas[static_cast<std::size_t>(k)]));
        const auto b = solver.original_coefficients();
        std::size_t nz = 0;
        for (std::size_t j = 0; j < b.size(); ++j) {
            path.coefficients(static_cast<Eigen::Index>(j), k) = b[j];
            nz += b[j] != 0.0;
        }
        path.nonzero.push_back(nz);
    }
    return path;
}

std::vector<std::size_t> stratified_folds(const std::vector<int> &event, std::size_t folds, std::uint64_t seed) {
    if (folds < 2) throw std::invalid_argument("need at least 2 folds");
    std::vector<std::size_t> out(event.size(), 0);
    Rng rng(seed);
    for (int stratum : {1, 0}) {
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < event.size(); ++i) {
            if (event[i] == stratum) idx.push_back(i);
        }
        rng.shuffle(idx);
        for (std::size_t k = 0; k < idx.size(); ++k) out[idx[k]] = k % folds;
    }
    return out;
}

std::size_t cv_min_index(const std::vector<double> &cv_mean) {
    if (cv_mean.empty()) throw std::invalid_argument("empty CV curve");
    std::size_t best = 0;
    for (std::size_t k = 1; k < cv_mean.size(); ++k) {
        if (cv_mean[k] < cv_mean[best]) best = k;
    }
    return best;
}

std::size_t one_se_index(const std::vector<double> &cv_mean, const std::vector<double> &cv_se) {
    if (cv_mean.size() != cv_se.size()) throw std::invalid_argument("CV mean and SE lengths differ");
    const std::size_t m = cv_min_index(cv_mean);
    const double bound = cv_mean[m] + cv_se[m];
    for (std::size_t k = 0; k < cv_mean.size(); ++k) {
        if (cv_mean[k] <= bound) return k;
    }
    return m;
}

CoxFitPath cross_validate(const SurvivalData &d, double alpha, const CvOptions &options) {
    check_inputs(d, alpha);
    const std::size_t K = options.folds;
    const auto fold = stratified_folds(d.event(), K, options.seed);
    std::vector<std::size_t> fold_events(K, 0);
    for (std::size_t i = 0; i < d.n(); ++i) fold_events[fold[i]] += static_cast<std::size_t>(d.event()[i]);
    for (std::size_t k = 0; k < K; ++k) {
        if (fold_events[k] == 0) {
            throw std::invalid_argument("CV fold " + std::to_string(k) + " has no events; use fewer folds");
        }
    }

    CoxFitPath path = fit_elastic_net_path(d, alpha, options.path);
    ElasticNetOptions fold_options = options.path;
    fold_options.lambdas = path.lambdas;
    const std::size_t L = path.lambdas.size();

    std::vector<std::vector<double>> deviance(K, std::vector<double>(L, 0.0));
    auto run_fold = [&](std::size_t k) {
        std::vector<std::size_t> train;
        for (std::size_t i = 0; i < d.n(); ++i) {
            if (fold[i] != k) train.push_back(i);
        }
        const SurvivalData dt = d.subset(train);
        const CoxFitPath fp = fit_elastic_net_path(dt, alpha, fold_options);
        for (std::size_t l = 0; l < L; ++l) {
            const auto b = fp.coefficients_at(l);
            const double full = neg_log_partial_likelihood(d.linear_predictor(b), d);
            const double part = neg_log_partial_likelihood(dt.linear_predictor(b), dt);
            deviance[k][l] = 2.0 * (full - part) / static_cast<double>(fold_events[k]);
        }
    };

    const std::size_t threads = std::max<std::size_t>(1, std::min(options.path.threads, K));
    if (threads == 1) {
        for (std::size_t k = 0; k < K; ++k) run_fold(k);
    } else {
        std::vector<std::exception_ptr> errors(K);
        std::vector<std::thread> pool;
        std::atomic<std::size_t> next{0};
        for (std::size_t t = 0; t < threads; ++t) {
            pool.emplace_back([&] {
                for (std::size_t k; (k = next++) < K;) {
                    try {
                        run_fold(k);
                    } catch (...) {
                        errors[k] = std::current_exception();
                    }
                }
            });
        }
        for (auto &th : pool) th.join();
        for (auto &e : errors) {
            if (e) std::rethrow_exception(e);
        }
    }

    path.folds = K;
    path.cv_mean.assign(L, 0.0);
    path.cv_se.assign(L, 0.0);
    for (std::size_t l = 0; l < L; ++l) {
        double mean = 0.0;
        for (std::size_t k = 0; k < K; ++k) mean += deviance[k][l];
        mean /= static_cast<double>(K);
        double ss = 0.0;
        for (std::size_t k = 0; k < K; ++k) ss += (deviance[k][l] - mean) * (deviance[k][l] - mean);
        path.cv_mean[l] = mean;
        path.cv_se[l] = std::sqrt(ss / static_cast<double>(K - 1)) / std::sqrt(static_cast<double>(K));
    }
    path.index_min = cv_min_index(path.cv_mean);
    path.index_star = one_se_index(path.cv_mean, path.cv_se);
    return path;
}

double kkt_max_violation(const SurvivalData &d, const CoxFitPath &path, std::size_t k, const ElasticNetOptions &options) {
    const auto scaling = column_scaling(d);
    const auto b = path.coefficients_at(k);
    const auto eta = d.linear_predictor(b);
    const auto g = eta_gradient(eta, d);
    double gsum = 0.0;
    for (double v : g) gsum += v;
    const double lambda = path.lambdas.at(k);
    const double alpha = path.alpha;
    double worst = 0.0;
    for (std::size_t j = 0; j < d.p(); ++j) {
        if (scaling.sd[j] == 0.0) continue;
        const double pf = options.penalty_factor.empty() ? 1.0 : options.penalty_factor[j];
        const auto &col = d.column(j);
        double s = 0.0;
        for (std::size_t m = 0; m < col.nnz(); ++m) s += g[col.rows[m]] * col.values[m];
        const double grad = (s - scaling.mean[j] * gsum) / (static_cast<double>(d.n()) * scaling.sd[j]);
        const double beta = b[j] * scaling.sd[j];
        double r;
        if (beta != 0.0) {
            r = std::abs(grad + lambda * (1.0 - alpha) * pf * beta + lambda * alpha * pf * (beta > 0 ? 1.0 : -1.0));
        } else {
            r = std::max(0.0, std::abs(grad) - lambda * alpha * pf);
        }
        worst = std::max(worst, r);
    }
    return worst;
}

} // namespace adrrefine
