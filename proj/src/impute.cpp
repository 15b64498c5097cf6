#include "mdag/impute.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "mdag/regression.hpp"

namespace mdag {

namespace {

struct ImputeColumn {
    int column = -1;
    bool binary = false;
    std::vector<int> predictor_cols;
    std::vector<double> predictor_dummy;  // NaN = numeric term
    std::vector<size_t> missing_rows, observed_rows;
    const std::pair<double, double>* bound = nullptr;
};

bool column_is_binary(const std::vector<double>& values, const std::vector<uint8_t>& missing) {
    for (size_t i = 0; i < values.size(); ++i) {
        if (!missing.empty() && missing[i]) continue;
        if (values[i] != 0.0 && values[i] != 1.0) return false;
    }
    return true;
}

}  // namespace

MiResult impute_mi(const Dataset& d, const MDag& g, uint64_t seed, const MiOptions& opts) {
    MiResult result;

    // substantive columns only; indicators and auxiliaries never predict
    std::vector<int> substantive;
    std::set<int> times_set;
    for (size_t c = 0; c < d.columns.size(); ++c) {
        auto v = g.find(d.columns[c]);
        if (!v) continue;
        NodeRole r = g.role(*v);
        if (r == NodeRole::Observed || r == NodeRole::Partial) {
            substantive.push_back(static_cast<int>(c));
            if (d.columns[c].time) times_set.insert(*d.columns[c].time);
        }
    }
    std::vector<int> times(times_set.begin(), times_set.end());
    auto time_pos = [&](int t) {
        return static_cast<int>(std::lower_bound(times.begin(), times.end(), t) - times.begin());
    };

    std::vector<ImputeColumn> plan;
    for (int c : substantive) {
        if (d.missing_count(c) == 0) continue;
        ImputeColumn ic;
        ic.column = c;
        ic.binary = column_is_binary(d.values[c], d.missing[c]);
        const NodeId& id = d.columns[c];
        int t = id.time.value_or(times.empty() ? 0 : times.front());
        for (int p : substantive) {
            if (p == c) continue;
            const NodeId& pid = d.columns[p];
            bool keep = !pid.time ||
                        std::abs(time_pos(pid.time.value_or(t)) - time_pos(t)) <=
                            opts.max_lag_steps;
            if (!keep) continue;
            // small categorical predictors get dummy columns
            std::set<double> levels;
            for (size_t i = 0; i < d.n && levels.size() <= 6; ++i)
                if (!d.is_missing(p, i)) levels.insert(d.values[p][i]);
            bool small_cat = levels.size() >= 3 && levels.size() <= 6 &&
                             std::all_of(levels.begin(), levels.end(), [](double v) {
                                 return std::abs(v - std::round(v)) < 1e-9;
                             });
            if (small_cat) {
                bool first = true;
                for (double lv : levels) {
                    if (first) {
                        first = false;
                        continue;
                    }
                    ic.predictor_cols.push_back(p);
                    ic.predictor_dummy.push_back(lv);
                }
            } else {
                ic.predictor_cols.push_back(p);
                ic.predictor_dummy.push_back(std::numeric_limits<double>::quiet_NaN());
            }
        }
        for (size_t i = 0; i < d.n; ++i)
            (d.is_missing(c, i) ? ic.missing_rows : ic.observed_rows).push_back(i);
        auto b = opts.bounds.find(id.name);
        if (b != opts.bounds.end()) ic.bound = &b->second;
        plan.push_back(std::move(ic));
    }

    if (plan.empty()) {
        for (int k = 0; k < opts.m; ++k) result.completed.push_back(d);
        return result;
    }

    for (int k = 0; k < opts.m; ++k) {
        Dataset imp = d;
        std::string imp_tag = "mi" + std::to_string(k);
        // hot-deck initialization from each column's observed values
        for (const auto& ic : plan) {
            Rng rng = Rng::substream(seed, stream_tag({imp_tag, "init",
                                                       d.columns[ic.column].token()}));
            for (size_t row : ic.missing_rows)
                imp.values[ic.column][row] =
                    d.values[ic.column][ic.observed_rows[rng.index(ic.observed_rows.size())]];
        }

        for (int sweep = 0; sweep < opts.sweeps; ++sweep) {
            for (const auto& ic : plan) {
                Rng rng = Rng::substream(
                    seed, stream_tag({imp_tag, "sweep" + std::to_string(sweep),
                                      d.columns[ic.column].token()}));
                const size_t p = ic.predictor_cols.size() + 1;
                Eigen::MatrixXd X(ic.observed_rows.size(), p);
                Eigen::VectorXd y(ic.observed_rows.size());
                Eigen::RowVectorXd scratch(p);
                auto fill_row = [&](size_t row, Eigen::RowVectorXd& out) {
                    out(0) = 1.0;
                    for (size_t j = 0; j < ic.predictor_cols.size(); ++j) {
                        double v = imp.values[ic.predictor_cols[j]][row];
                        out(j + 1) = std::isnan(ic.predictor_dummy[j])
                                         ? v
                                         : (std::abs(v - ic.predictor_dummy[j]) < 1e-9 ? 1.0
                                                                                       : 0.0);
                    }
                };
                for (size_t r = 0; r < ic.observed_rows.size(); ++r) {
                    fill_row(ic.observed_rows[r], scratch);
                    X.row(r) = scratch;
                    y(r) = imp.values[ic.column][ic.observed_rows[r]];
                }
                RegressionModel model;
                try {
                    model = fit(ic.binary ? ModelFamily::Logistic : ModelFamily::Linear, X, y);
                } catch (const MdagError&) {
                    ++result.failed_fits;
                    continue;  // keep current imputations for this sweep
                }
                if (!model.converged) result.converged = false;

                Eigen::VectorXd beta = draw_coefficients(model, rng);
                Eigen::RowVectorXd xr(p);
                for (size_t row : ic.missing_rows) {
                    fill_row(row, xr);
                    double eta = xr.dot(beta);
                    double v;
                    if (ic.binary) {
                        v = rng.bernoulli(logistic_cdf(eta)) ? 1.0 : 0.0;
                    } else {
                        v = eta + rng.normal(0.0, model.sigma);
                        if (ic.bound) {
                            int tries = 0;
                            while ((v < ic.bound->first || v > ic.bound->second) &&
                                   tries++ < opts.max_redraws)
                                v = eta + rng.normal(0.0, model.sigma);
                            v = std::clamp(v, ic.bound->first, ic.bound->second);
                        }
                    }
                    imp.values[ic.column][row] = v;
                }
            }
        }

        // completed dataset: clear the masks for the imputed columns
        for (const auto& ic : plan) imp.missing[ic.column].clear();
        imp.scenario = d.scenario + "+mi";
        result.completed.push_back(std::move(imp));
    }
    return result;
}

}  // namespace mdag
