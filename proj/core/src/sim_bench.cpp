#include "chicglm/sim_bench.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "chicglm/glm.hpp"
#include "chicglm/parallel.hpp"

namespace chicglm {

namespace {

constexpr double kBaseBlock[5] = {2.0, -1.0, -1.0, 0.5, -0.5};
constexpr double kBaseIntercept = -0.5;
constexpr double kPoissonScale = 0.2;  // "one fifth", intercept included
constexpr double kMuClamp = 1e-12;

double family_scale(FamilyKind family) {
  return family == FamilyKind::poisson_log ? kPoissonScale : 1.0;
}

bool block_active(ScenarioKind kind, int block) {
  switch (kind) {
    case ScenarioKind::null_model:
      return false;
    case ScenarioKind::sparse:
      return block == 0;
    case ScenarioKind::medium:
      return block == 0 || block == 2;
    case ScenarioKind::full:
      return true;
  }
  return false;
}

void check_scenario(const Scenario& sc) {
  if (sc.p < 1 || sc.p > 64) throw validation_error("scenario needs 1 <= p <= 64");
  if (sc.n < 1) throw validation_error("scenario needs n >= 1");
  if (!(sc.corr_r >= 0.0 && sc.corr_r < 1.0))
    throw validation_error("design correlation must lie in [0, 1)");
}

Eigen::VectorXd clamp_unit(const Eigen::VectorXd& mu) {
  return mu.array().max(kMuClamp).min(1.0 - kMuClamp);
}

}  // namespace

ScenarioKind parse_scenario_kind(const std::string& name) {
  if (name == "null") return ScenarioKind::null_model;
  if (name == "sparse") return ScenarioKind::sparse;
  if (name == "medium") return ScenarioKind::medium;
  if (name == "full") return ScenarioKind::full;
  throw validation_error("unknown scenario '" + name + "' (null, sparse, medium, full)");
}

std::string scenario_name(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::null_model: return "null";
    case ScenarioKind::sparse: return "sparse";
    case ScenarioKind::medium: return "medium";
    case ScenarioKind::full: return "full";
  }
  return "?";
}

double true_intercept(const Scenario& sc) {
  return kBaseIntercept * family_scale(sc.family);
}

Eigen::VectorXd true_coefficients(const Scenario& sc) {
  check_scenario(sc);
  const double scale = family_scale(sc.family);
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(sc.p);
  for (int j = 0; j < sc.p; ++j)
    if (block_active(sc.kind, j / 5)) beta(j) = scale * kBaseBlock[j % 5];
  return beta;
}

ModelId true_model(const Scenario& sc) {
  const Eigen::VectorXd beta = true_coefficients(sc);
  ModelId m = ModelId::null_model(sc.p);
  for (int j = 0; j < sc.p; ++j)
    if (beta(j) != 0.0) m = m.with_flipped(j);
  return m;
}

Eigen::MatrixXd gen_design(int n, int p, double corr_r, CounterRng& rng) {
  if (!(corr_r >= 0.0 && corr_r < 1.0))
    throw validation_error("design correlation must lie in [0, 1)");
  Eigen::MatrixXd X(n, p);
  const double innov = std::sqrt(1.0 - corr_r * corr_r);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < p; ++j) {
      const double z = rng.normal();
      X(i, j) = j == 0 ? z : corr_r * X(i, j - 1) + innov * z;
    }
  }
  return X;
}

std::uint64_t draw_poisson(CounterRng& rng, double mean) {
  if (!(mean >= 0.0)) throw validation_error("poisson mean must be nonnegative");
  std::uint64_t total = 0;
  // split large means into <= 30 chunks so the product method stays exact
  while (mean > 30.0) {
    const double half = mean * 0.5;
    total += draw_poisson(rng, half);
    mean -= half;
  }
  const double limit = std::exp(-mean);
  double prod = rng.uniform_pos();
  while (prod > limit) {
    ++total;
    prod *= rng.uniform_pos();
  }
  return total;
}

Dataset simulate_dataset(const Scenario& sc, CounterRng& rng) {
  check_scenario(sc);
  Dataset data;
  data.X = gen_design(sc.n, sc.p, sc.corr_r, rng);
  data.column_names.reserve(sc.p);
  for (int j = 0; j < sc.p; ++j) data.column_names.push_back("x" + std::to_string(j + 1));

  const Eigen::VectorXd beta = true_coefficients(sc);
  const Eigen::VectorXd eta =
      (data.X * beta).array() + true_intercept(sc);
  data.y.resize(sc.n);
  for (int i = 0; i < sc.n; ++i) {
    switch (sc.family) {
      case FamilyKind::binomial_logit:
        data.y(i) = rng.uniform() < 1.0 / (1.0 + std::exp(-eta(i))) ? 1.0 : 0.0;
        break;
      case FamilyKind::binomial_probit:
        data.y(i) = rng.uniform() < std::exp(log_normal_cdf(eta(i))) ? 1.0 : 0.0;
        break;
      case FamilyKind::poisson_log:
        data.y(i) = static_cast<double>(draw_poisson(rng, std::exp(eta(i))));
        break;
      case FamilyKind::gaussian_identity:
        data.y(i) = eta(i) + rng.normal();
        break;
    }
  }
  return data;
}

Eigen::VectorXd method_coefficients(const HyperRule& rule, const ModelPosterior& post,
                                    const FitMap& fits, const Family& family) {
  if (rule.kind != RuleKind::aic && rule.kind != RuleKind::bic)
    return bma_coefficients(post, fits, rule, family);
  const ModelId map = post.map_model();
  auto it = fits.find(map.bits);
  if (it == fits.end())
    throw validation_error("fit table is missing model " + map.bitstring());
  Eigen::VectorXd coef = Eigen::VectorXd::Zero(post.p + 1);
  coef(0) = it->second.alpha_hat;
  int k = 0;
  for (int j = 0; j < post.p; ++j)
    if (map.includes(j)) coef(1 + j) = it->second.beta_hat(k++);
  return coef;
}

Eigen::VectorXd method_predict(const HyperRule& rule, const ModelPosterior& post,
                               const FitMap& fits, const Family& family,
                               const Eigen::MatrixXd& new_X) {
  if (rule.kind != RuleKind::aic && rule.kind != RuleKind::bic)
    return bma_predict(post, fits, rule, family, new_X);
  if (static_cast<int>(new_X.cols()) != post.p)
    throw validation_error("prediction matrix has " + std::to_string(new_X.cols()) +
                           " columns, expected " + std::to_string(post.p));
  const Eigen::VectorXd coef = method_coefficients(rule, post, fits, family);
  const Eigen::VectorXd eta = (new_X * coef.tail(post.p)).array() + coef(0);
  return linkinv(family.kind, eta);
}

std::vector<MetricsReport> run_selection_experiment(const Scenario& sc,
                                                    const std::vector<HyperRule>& methods,
                                                    int replicates,
                                                    const SearchOptions& options) {
  check_scenario(sc);
  if (methods.empty()) throw validation_error("selection experiment needs at least one method");
  if (replicates < 1) throw validation_error("selection experiment needs replicates >= 1");

  const std::size_t m = methods.size();
  const Family family = make_family(sc.family);
  const ModelId truth = true_model(sc);
  Eigen::VectorXd target(sc.p + 1);
  target(0) = true_intercept(sc);
  target.tail(sc.p) = true_coefficients(sc);

  struct RepRow {
    std::vector<char> ok, hit;
    std::vector<int> size;
    std::vector<double> sse;
  };
  std::vector<RepRow> rows(replicates);
  const CounterRng master(sc.seed);

  parallel_for(static_cast<std::size_t>(replicates), options.threads,
               [&](std::size_t rb, std::size_t re, int) {
    for (std::size_t rep = rb; rep < re; ++rep) {
      RepRow& row = rows[rep];
      row.ok.assign(m, 0);
      row.hit.assign(m, 0);
      row.size.assign(m, 0);
      row.sse.assign(m, 0.0);

      const CounterRng rep_rng = master.split(rep);
      CounterRng data_rng = rep_rng.split(0);
      const Dataset data = simulate_dataset(sc, data_rng);

      auto score_method = [&](std::size_t r, const ModelPosterior& post, const FitMap& fits) {
        const ModelId map = post.map_model();
        const Eigen::VectorXd coef = method_coefficients(methods[r], post, fits, family);
        row.ok[r] = 1;
        row.hit[r] = map == truth ? 1 : 0;
        row.size[r] = map.size();
        row.sse[r] = (coef - target).squaredNorm();
      };

      if (sc.p <= options.enum_limit) {
        try {
          FitMap fits;
          const std::vector<ModelPosterior> posts =
              enumerate_models_many(family, data, methods, options.model_prior, &fits, 1);
          for (std::size_t r = 0; r < m; ++r) score_method(r, posts[r], fits);
        } catch (const numeric_error&) {
        }
      } else {
        for (std::size_t r = 0; r < m; ++r) {
          try {
            FitMap fits;
            const ModelPosterior post =
                mcmc_search(family, data, methods[r], options.model_prior,
                            options.mcmc_iterations, rep_rng.split(1 + r).seed(), &fits);
            score_method(r, post, fits);
          } catch (const numeric_error&) {
          }
        }
      }
    }
  });

  std::vector<MetricsReport> out(m);
  for (std::size_t r = 0; r < m; ++r) {
    MetricsReport& rep = out[r];
    rep.method = rule_name(methods[r]);
    double size_sum = 0.0, sse_sum = 0.0;
    for (int i = 0; i < replicates; ++i) {
      if (!rows[i].ok[r]) {
        ++rep.failures;
        continue;
      }
      ++rep.replicates;
      rep.selection_hits += rows[i].hit[r];
      size_sum += rows[i].size[r];
      sse_sum += rows[i].sse[r];
    }
    if (rep.replicates > 0) {
      rep.avg_model_size = size_sum / rep.replicates;
      rep.sse = sse_sum / rep.replicates;
    }
  }
  return out;
}

double auc_score(const Eigen::VectorXd& y, const Eigen::VectorXd& mu) {
  const int n = static_cast<int>(y.size());
  if (mu.size() != n) throw validation_error("auc needs y and mu of equal length");
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) { return mu(a) < mu(b); });

  double pos_rank_sum = 0.0;
  int n1 = 0;
  int i = 0;
  while (i < n) {
    int j = i;
    while (j < n && mu(order[j]) == mu(order[i])) ++j;
    const double midrank = 0.5 * (i + 1 + j);  // ranks are 1-based
    for (int k = i; k < j; ++k) {
      if (y(order[k]) == 1.0) {
        pos_rank_sum += midrank;
        ++n1;
      }
    }
    i = j;
  }
  const int n0 = n - n1;
  if (n1 == 0 || n0 == 0) return std::numeric_limits<double>::quiet_NaN();
  return (pos_rank_sum - 0.5 * n1 * (n1 + 1.0)) / (static_cast<double>(n1) * n0);
}

namespace {

// slope of the logistic recalibration y ~ a + b * logit(mu)
double calibration_slope(const Eigen::VectorXd& y, const Eigen::VectorXd& mu) {
  Dataset refit;
  refit.y = y;
  const Eigen::ArrayXd mc = clamp_unit(mu).array();
  refit.X = (mc / (1.0 - mc)).log().matrix();
  refit.column_names = {"logit_mu"};
  const Family logit_fam = make_family(FamilyKind::binomial_logit);
  try {
    const GlmFit fit = fit_mle(logit_fam, refit, ModelId::full_model(1));
    return fit.beta_hat(0);
  } catch (const validation_error&) {
    return std::numeric_limits<double>::quiet_NaN();
  } catch (const numeric_error&) {
    return std::numeric_limits<double>::quiet_NaN();
  }
}

}  // namespace

std::vector<MetricsReport> bootstrap_cv(const Family& family, const Dataset& data,
                                        const std::vector<HyperRule>& methods,
                                        const BootstrapOptions& options) {
  if (methods.empty()) throw validation_error("bootstrap needs at least one method");
  if (options.B < 1) throw validation_error("bootstrap needs B >= 1");
  if (!family.is_binomial())
    throw validation_error("bootstrap prediction metrics are defined for binary responses");
  if (family.trials_or_weights.size() > 0)
    throw validation_error("bootstrap prediction metrics need single-trial 0/1 responses");
  data.validate();
  for (int i = 0; i < data.n(); ++i)
    if (data.y(i) != 0.0 && data.y(i) != 1.0)
      throw validation_error("bootstrap prediction metrics need 0/1 responses");

  const int n = data.n();
  const int p = data.p();
  const std::size_t m = methods.size();

  struct BootRow {
    std::vector<char> ok;
    std::vector<double> auc, cs, ls, brier;
    int oob = 0;
    int redraws = 0;
  };
  std::vector<BootRow> rows(options.B);
  const CounterRng master(options.seed);

  parallel_for(static_cast<std::size_t>(options.B), options.threads,
               [&](std::size_t bb, std::size_t be, int) {
    std::vector<int> counts(n);
    Dataset resample;
    resample.column_names = data.column_names;
    for (std::size_t b = bb; b < be; ++b) {
      BootRow& row = rows[b];
      row.ok.assign(m, 0);
      row.auc.assign(m, 0.0);
      row.cs.assign(m, 0.0);
      row.ls.assign(m, 0.0);
      row.brier.assign(m, 0.0);

      CounterRng rng = master.split(b);

      // redraw until the resample is usable: nonempty two-class out-of-bag
      // rows and no predictor collapsed to a constant
      std::vector<int> oob_rows;
      bool usable = false;
      for (int attempt = 0; attempt < 1000 && !usable; ++attempt) {
        std::fill(counts.begin(), counts.end(), 0);
        for (int i = 0; i < n; ++i) ++counts[rng.below(static_cast<std::uint64_t>(n))];
        oob_rows.clear();
        for (int i = 0; i < n; ++i)
          if (counts[i] == 0) oob_rows.push_back(i);

        bool saw0 = false, saw1 = false;
        for (int i : oob_rows) (data.y(i) == 1.0 ? saw1 : saw0) = true;
        if (oob_rows.empty() || !saw0 || !saw1) {
          ++row.redraws;
          continue;
        }

        resample.y.resize(n);
        resample.X.resize(n, p);
        if (data.has_offset()) resample.offset.resize(n);
        int out = 0;
        for (int i = 0; i < n; ++i) {
          for (int c = 0; c < counts[i]; ++c) {
            resample.y(out) = data.y(i);
            resample.X.row(out) = data.X.row(i);
            if (data.has_offset()) resample.offset(out) = data.offset(i);
            ++out;
          }
        }
        usable = true;
        for (int j = 0; j < p && usable; ++j)
          if (resample.X.col(j).maxCoeff() == resample.X.col(j).minCoeff()) usable = false;
        if (!usable) ++row.redraws;
      }
      if (!usable)
        throw numeric_error("bootstrap could not draw a usable resample in 1000 attempts");
      row.oob = static_cast<int>(oob_rows.size());

      Eigen::VectorXd y_oob(row.oob);
      Eigen::MatrixXd X_oob(row.oob, p);
      for (int i = 0; i < row.oob; ++i) {
        y_oob(i) = data.y(oob_rows[i]);
        X_oob.row(i) = data.X.row(oob_rows[i]);
      }

      auto score_method = [&](std::size_t r, const ModelPosterior& post, const FitMap& fits) {
        const Eigen::VectorXd mu =
            method_predict(methods[r], post, fits, family, X_oob);
        const Eigen::VectorXd mc = clamp_unit(mu);
        row.ok[r] = 1;
        row.auc[r] = auc_score(y_oob, mu);
        row.cs[r] = calibration_slope(y_oob, mu);
        row.brier[r] = (mu - y_oob).squaredNorm() / row.oob;
        double ls = 0.0;
        for (int i = 0; i < row.oob; ++i)
          ls -= y_oob(i) == 1.0 ? std::log(mc(i)) : std::log1p(-mc(i));
        row.ls[r] = ls / row.oob;
      };

      if (p <= options.enum_limit) {
        try {
          FitMap fits;
          const std::vector<ModelPosterior> posts =
              enumerate_models_many(family, resample, methods, options.model_prior, &fits, 1);
          for (std::size_t r = 0; r < m; ++r) score_method(r, posts[r], fits);
        } catch (const numeric_error&) {
        }
      } else {
        for (std::size_t r = 0; r < m; ++r) {
          try {
            FitMap fits;
            const ModelPosterior post =
                mcmc_search(family, resample, methods[r], options.model_prior,
                            options.mcmc_iterations, rng.split(100 + r).seed(), &fits);
            score_method(r, post, fits);
          } catch (const numeric_error&) {
          }
        }
      }
    }
  });

  std::vector<MetricsReport> out(m);
  for (std::size_t r = 0; r < m; ++r) {
    MetricsReport& rep = out[r];
    rep.method = rule_name(methods[r]);
    double auc = 0.0, cs = 0.0, ls = 0.0, brier = 0.0, oob = 0.0;
    int cs_defined = 0;
    for (int b = 0; b < options.B; ++b) {
      rep.redraws += rows[b].redraws;
      if (!rows[b].ok[r]) {
        ++rep.failures;
        continue;
      }
      ++rep.replicates;
      auc += rows[b].auc[r];
      ls += rows[b].ls[r];
      brier += rows[b].brier[r];
      oob += rows[b].oob;
      if (std::isfinite(rows[b].cs[r])) {
        cs += rows[b].cs[r];
        ++cs_defined;
      }
    }
    if (rep.replicates > 0) {
      rep.auc = auc / rep.replicates;
      rep.log_score = ls / rep.replicates;
      rep.brier = brier / rep.replicates;
      rep.avg_oob = oob / rep.replicates;
    }
    if (cs_defined > 0) rep.calib_slope = cs / cs_defined;
  }
  return out;
}

}  // namespace chicglm
