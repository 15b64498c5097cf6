#include "mdag/estimate.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <set>
#include <thread>

namespace mdag {

std::vector<double> default_grid() {
    std::vector<double> g;
    for (int i = 0; i <= 20; ++i) g.push_back(0.5 * i);
    return g;
}

CcrcEstimate pool(const std::vector<CcrcEstimate>& estimates) {
    if (estimates.empty()) throw GridMismatch("pooling requires at least one estimate");
    CcrcEstimate out;
    out.grid = estimates.front().grid;
    out.method = estimates.front().method;
    out.replications = static_cast<int>(estimates.size());
    out.value.assign(out.grid.size(), 0.0);
    for (const auto& e : estimates) {
        if (e.grid != out.grid) throw GridMismatch("estimates use different grids");
        for (size_t i = 0; i < out.value.size(); ++i) out.value[i] += e.value[i];
    }
    for (auto& v : out.value) v /= static_cast<double>(estimates.size());
    return out;
}

McInterval mc_interval(const std::vector<CcrcEstimate>& per_replication,
                       const CcrcEstimate& truth) {
    if (per_replication.size() < 2)
        throw GridMismatch("Monte-Carlo intervals need at least two replications");
    const auto& grid = truth.grid;
    McInterval out;
    out.grid = grid;
    size_t R = per_replication.size();
    for (size_t g = 0; g < grid.size(); ++g) {
        double mean = 0.0;
        for (const auto& e : per_replication) {
            if (e.grid != grid) throw GridMismatch("replication grid mismatch");
            mean += e.value[g] - truth.value[g];
        }
        mean /= static_cast<double>(R);
        double ss = 0.0;
        for (const auto& e : per_replication) {
            double d = e.value[g] - truth.value[g] - mean;
            ss += d * d;
        }
        double sd = std::sqrt(ss / static_cast<double>(R - 1));
        double half = 2.0 * sd / std::sqrt(static_cast<double>(R));
        out.mean_diff.push_back(mean);
        out.lower.push_back(mean - half);
        out.upper.push_back(mean + half);
    }
    return out;
}

// ---------------------------------------------------------------------------
// gcompute

namespace {

struct ColumnKind {
    bool binary = false;
    bool categorical = false;
    std::vector<double> levels;
};

ColumnKind classify_column(const std::vector<double>& values,
                           const std::vector<uint8_t>& missing) {
    std::set<double> levels;
    for (size_t i = 0; i < values.size(); ++i) {
        if (!missing.empty() && missing[i]) continue;
        levels.insert(values[i]);
        if (levels.size() > 8) break;
    }
    ColumnKind k;
    k.levels.assign(levels.begin(), levels.end());
    bool all_int = std::all_of(k.levels.begin(), k.levels.end(), [](double v) {
        return std::abs(v - std::round(v)) < 1e-9;
    });
    if (k.levels.size() <= 2 && all_int) {
        bool zero_one = true;
        for (double v : k.levels)
            if (v != 0.0 && v != 1.0) zero_one = false;
        if (zero_one) {
            k.binary = true;
            return k;
        }
    }
    if (all_int && k.levels.size() >= 3 && k.levels.size() <= 6) k.categorical = true;
    return k;
}

// One fitted conditional factor in the forward simulation.
struct FactorModel {
    NodeId target;
    ModelFamily family = ModelFamily::Linear;
    RegressionModel model;
    // design columns: (dataset column, dummy level or NaN, sqrt flag)
    struct Term {
        int column = -1;
        double dummy_level = std::numeric_limits<double>::quiet_NaN();
        bool sqrt_scale = false;
        bool is_dummy() const { return !std::isnan(dummy_level); }
    };
    std::vector<Term> terms;  // excluding intercept
    int target_column = -1;
    bool target_is_exposure_scaled = false;
};

struct SimPlan {
    std::vector<NodeId> baseline_vars;  // resampled jointly
    std::vector<int> baseline_cols;
    std::vector<size_t> baseline_rows;  // pool of usable rows
    std::vector<FactorModel> factors;   // temporal order
    FactorModel outcome;                // predicted, not drawn
    std::vector<NodeId> exposures;
};

bool is_exposure(const NodeId& id, const std::vector<NodeId>& exposures) {
    for (const auto& e : exposures)
        if (e.name == id.name) return true;
    return false;
}

}  // namespace

CcrcEstimate gcompute(const Dataset& d, const ExprPtr& factorization, const CausalQuery& query,
                      const GcomputeOptions& opts) {
    if (contains_quotient(factorization))
        throw InvalidSpec("g-computation needs a quotient-free factorization");

    std::vector<double> grid = opts.grid.empty() ? default_grid() : opts.grid;
    std::vector<NodeId> exposures;
    for (const auto& [id, value] : query.interventions) exposures.push_back(id);

    // --- partition leaves: baseline block vs per-time conditionals ---
    std::vector<ExprPtr> leaves = leaf_factors(factorization);
    std::reverse(leaves.begin(), leaves.end());  // emission was outcome-side first

    // the factorization's time grid, for lag-window arithmetic
    std::set<int> times_set;
    for (const auto& id : all_vars(factorization))
        if (id.time) times_set.insert(*id.time);
    std::vector<int> times(times_set.begin(), times_set.end());
    auto time_pos = [&](int t) {
        return static_cast<int>(std::lower_bound(times.begin(), times.end(), t) - times.begin());
    };

    int first_treat_time = std::numeric_limits<int>::max();
    for (const auto& e : exposures)
        if (e.time) first_treat_time = std::min(first_treat_time, *e.time);

    SimPlan plan;
    plan.exposures = exposures;

    auto is_baseline_var = [&](const NodeId& id) {
        return !id.time || *id.time < first_treat_time;
    };

    std::vector<ExprPtr> conditional_leaves;
    for (const auto& f : leaves) {
        std::vector<NodeId> vars;
        for (const auto& t : f->targets) vars.push_back(t.id);
        for (const auto& t : f->target_fixed) vars.push_back(t.id);
        bool baseline_factor = !vars.empty() && std::all_of(vars.begin(), vars.end(),
                                                            is_baseline_var);
        if (baseline_factor) {
            for (const auto& v : vars) plan.baseline_vars.push_back(v);
            for (const auto& gterm : f->given)
                if (is_baseline_var(gterm.id)) plan.baseline_vars.push_back(gterm.id);
        } else {
            conditional_leaves.push_back(f);
        }
    }
    {
        std::sort(plan.baseline_vars.begin(), plan.baseline_vars.end());
        plan.baseline_vars.erase(
            std::unique(plan.baseline_vars.begin(), plan.baseline_vars.end()),
            plan.baseline_vars.end());
    }
    if (plan.baseline_vars.empty()) throw InvalidSpec("factorization has no baseline block");

    // temporal order of the conditional factors (stable: keeps the
    // within-slice emission order)
    std::stable_sort(conditional_leaves.begin(), conditional_leaves.end(),
                     [&](const ExprPtr& a, const ExprPtr& b) {
                         auto t = [](const ExprPtr& e) {
                             int tt = 0;
                             for (const auto& v : e->targets)
                                 if (v.id.time) tt = std::max(tt, *v.id.time);
                             for (const auto& v : e->target_fixed)
                                 if (v.id.time) tt = std::max(tt, *v.id.time);
                             return tt;
                         };
                         return t(a) < t(b);
                     });

    // --- build the factor models ---
    auto build_factor = [&](const ExprPtr& f) {
        FactorModel fm;
        std::vector<NodeId> targets;
        for (const auto& t : f->targets) targets.push_back(t.id);
        for (const auto& t : f->target_fixed) targets.push_back(t.id);
        if (targets.size() != 1)
            throw InvalidSpec("each non-baseline factor must have a single target, got " +
                              pretty_print(f));
        fm.target = targets[0];
        fm.target_column = d.column_index(fm.target);
        int target_time = fm.target.time.value_or(0);

        std::vector<NodeId> cond;
        for (const auto& gterm : f->given) cond.push_back(gterm.id);
        for (const auto& gterm : f->given_fixed)
            if (!gterm.is_m0) cond.push_back(gterm.id);

        for (const auto& c : cond) {
            if (c == fm.target) continue;
            bool keep = !c.time || *c.time < first_treat_time ||
                        time_pos(target_time) - time_pos(*c.time) <= opts.max_lag_steps;
            if (!keep) continue;
            int col = d.column_index(c);
            ColumnKind kind = classify_column(d.values[col], d.missing[col]);
            bool exposure = is_exposure(c, exposures);
            if (kind.categorical && !exposure) {
                for (size_t l = 1; l < kind.levels.size(); ++l)
                    fm.terms.push_back({col, kind.levels[l], false});
            } else {
                fm.terms.push_back({col, std::numeric_limits<double>::quiet_NaN(),
                                    exposure && opts.sqrt_exposure});
            }
        }

        ColumnKind tk = classify_column(d.values[fm.target_column], d.missing[fm.target_column]);
        fm.family = tk.binary ? ModelFamily::Logistic
                              : (tk.categorical ? ModelFamily::MultinomialLogit
                                                : ModelFamily::Linear);
        return fm;
    };

    if (conditional_leaves.empty()) throw InvalidSpec("factorization has no outcome factor");
    for (size_t i = 0; i + 1 < conditional_leaves.size(); ++i)
        plan.factors.push_back(build_factor(conditional_leaves[i]));
    plan.outcome = build_factor(conditional_leaves.back());
    if (!(plan.outcome.target == query.outcome))
        throw InvalidSpec("last factor does not target the query outcome");

    // --- row pools and fits ---
    auto rows_available = [&](const FactorModel& fm) {
        std::vector<size_t> rows;
        rows.reserve(d.n);
        for (size_t i = 0; i < d.n; ++i) {
            if (d.is_missing(fm.target_column, i)) continue;
            bool ok = true;
            for (const auto& term : fm.terms)
                if (d.is_missing(term.column, i)) {
                    ok = false;
                    break;
                }
            if (ok) rows.push_back(i);
        }
        return rows;
    };

    auto design_row = [&](const FactorModel& fm, const std::vector<double>& row_values,
                          Eigen::VectorXd& x) {
        x(0) = 1.0;
        for (size_t t = 0; t < fm.terms.size(); ++t) {
            const auto& term = fm.terms[t];
            double v = row_values[term.column];
            if (term.is_dummy())
                x(t + 1) = std::abs(v - term.dummy_level) < 1e-9 ? 1.0 : 0.0;
            else if (term.sqrt_scale)
                x(t + 1) = std::sqrt(std::max(0.0, v));
            else
                x(t + 1) = v;
        }
    };

    auto fit_factor = [&](FactorModel& fm) {
        // complete mode expects no missing cells; either way rows with a
        // missing target or covariate never enter a fit
        std::vector<size_t> rows = rows_available(fm);
        if (static_cast<int>(rows.size()) < opts.min_rows)
            throw InsufficientRows("factor for " + fm.target.display() + " has only " +
                                   std::to_string(rows.size()) + " usable rows");
        int p = static_cast<int>(fm.terms.size()) + 1;
        Eigen::MatrixXd X(rows.size(), p);
        Eigen::VectorXd y(rows.size());
        Eigen::VectorXd xr(p);
        std::vector<double> row_values(d.columns.size());
        for (size_t r = 0; r < rows.size(); ++r) {
            for (size_t c = 0; c < d.columns.size(); ++c) row_values[c] = d.values[c][rows[r]];
            design_row(fm, row_values, xr);
            X.row(r) = xr;
            y(r) = d.values[fm.target_column][rows[r]];
        }
        fm.model = fit(fm.family, X, y);
    };

    // baseline pool
    for (const auto& v : plan.baseline_vars) plan.baseline_cols.push_back(d.column_index(v));
    for (size_t i = 0; i < d.n; ++i) {
        bool ok = true;
        for (int c : plan.baseline_cols)
            if (d.is_missing(c, i)) {
                ok = false;
                break;
            }
        if (ok) plan.baseline_rows.push_back(i);
    }
    if (static_cast<int>(plan.baseline_rows.size()) < opts.min_rows)
        throw InsufficientRows("baseline pool has only " +
                               std::to_string(plan.baseline_rows.size()) + " rows");

    for (auto& fm : plan.factors) fit_factor(fm);
    fit_factor(plan.outcome);

    // --- forward simulation ---
    std::vector<int> exposure_cols;
    for (const auto& id : d.columns)
        if (is_exposure(id, exposures)) exposure_cols.push_back(d.column_index(id));

    CcrcEstimate out;
    out.grid = grid;
    out.method = opts.mode == GcomputeOptions::Mode::AvailableCase ? "available" : "complete";
    out.value.assign(grid.size(), 0.0);

    int max_terms = static_cast<int>(plan.outcome.terms.size());
    for (const auto& fm : plan.factors)
        max_terms = std::max(max_terms, static_cast<int>(fm.terms.size()));
    Eigen::VectorXd x(max_terms + 1);

    for (size_t gi = 0; gi < grid.size(); ++gi) {
        double a = grid[gi];
        Rng rng = Rng::substream(opts.seed,
                                 stream_tag({"gcompute", opts.salt, out.method,
                                             std::to_string(gi)}));
        std::vector<double> row(d.columns.size(), 0.0);
        double acc = 0.0;
        for (int draw = 0; draw < opts.mc_draws; ++draw) {
            size_t base = plan.baseline_rows[rng.index(plan.baseline_rows.size())];
            for (int c : plan.baseline_cols) row[c] = d.values[c][base];
            for (int c : exposure_cols) row[c] = a;
            for (const auto& fm : plan.factors) {
                Eigen::Map<Eigen::VectorXd> xv(x.data(), fm.terms.size() + 1);
                design_row(fm, row, x);
                double v;
                switch (fm.family) {
                    case ModelFamily::Logistic: {
                        double p = logistic_cdf(fm.model.coef.col(0).head(xv.size()).dot(xv));
                        v = rng.bernoulli(p) ? 1.0 : 0.0;
                        break;
                    }
                    case ModelFamily::Linear:
                        v = fm.model.coef.col(0).head(xv.size()).dot(xv) +
                            rng.normal(0.0, fm.model.sigma);
                        break;
                    case ModelFamily::MultinomialLogit: {
                        Eigen::VectorXd xe = xv;
                        auto probs = fm.model.predict_multinomial(xe);
                        int k = rng.categorical(probs);
                        v = fm.model.categories[k];
                        break;
                    }
                    default: throw InvalidSpec("unexpected family");
                }
                row[fm.target_column] = v;
            }
            {
                const auto& fm = plan.outcome;
                Eigen::Map<Eigen::VectorXd> xv(x.data(), fm.terms.size() + 1);
                design_row(fm, row, x);
                double eta = fm.model.coef.col(0).head(xv.size()).dot(xv);
                acc += fm.family == ModelFamily::Logistic ? logistic_cdf(eta) : eta;
            }
        }
        out.value[gi] = acc / static_cast<double>(opts.mc_draws);
    }
    return out;
}

CcrcEstimate simulate_truth(const ScmSpec& spec, const CausalQuery& query,
                            const std::vector<double>& grid, size_t n, uint64_t seed,
                            int jobs) {
    CcrcEstimate out;
    out.grid = grid.empty() ? default_grid() : grid;
    out.method = "truth";
    out.value.assign(out.grid.size(), 0.0);

    double outcome_level = 1.0;
    if (query.outcome_value && std::holds_alternative<double>(*query.outcome_value))
        outcome_level = std::get<double>(*query.outcome_value);

    std::atomic<size_t> next{0};
    auto worker = [&]() {
        while (true) {
            size_t gi = next.fetch_add(1);
            if (gi >= out.grid.size()) return;
            std::vector<std::pair<NodeId, double>> dos;
            for (const auto& [id, value] : query.interventions) dos.push_back({id, out.grid[gi]});
            Dataset d = sample_interventional(spec, dos, n, seed,
                                              "truth" + std::to_string(gi));
            int col = d.column_index(query.outcome);
            double acc = 0.0;
            for (size_t i = 0; i < d.n; ++i)
                acc += std::abs(d.values[col][i] - outcome_level) < 1e-9 ? 1.0 : 0.0;
            out.value[gi] = acc / static_cast<double>(d.n);
        }
    };
    int workers = jobs > 0 ? jobs : static_cast<int>(std::thread::hardware_concurrency());
    workers = std::max(1, std::min<int>(workers, static_cast<int>(out.grid.size())));
    std::vector<std::thread> pool_threads;
    for (int t = 0; t < workers; ++t) pool_threads.emplace_back(worker);
    for (auto& t : pool_threads) t.join();
    return out;
}

}  // namespace mdag
