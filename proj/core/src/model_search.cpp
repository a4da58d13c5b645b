#include "chicglm/model_search.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>

#include "chicglm/parallel.hpp"
#include "chicglm/rng.hpp"
#include "chicglm/special_functions.hpp"

namespace chicglm {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr std::uint64_t kChunk = 4096;  // warm starts reset here, so results
                                        // do not depend on the thread count

// configuration problems surface before any model is fit
void preflight_rule(const HyperRule& rule, const Family& family, int n, int p) {
  if (rule.kind == RuleKind::jeffreys)
    throw validation_error(
        "the jeffreys mixing prior is improper and the null model is always in the "
        "candidate set; its Bayes factors against the null are indeterminate");
  if (rule_is_tcch(rule.kind)) resolve_prior(rule, n, p, p);  // worst case p_M = p
  if (family.gaussian_unknown_variance() && n <= p + 1)
    throw validation_error("unknown-variance Gaussian evidence needs n > p + 1");
}

void normalize_entries(std::vector<ModelEntry>& entries) {
  // a perfect-fit model can carry +inf log evidence; those split all the mass
  std::size_t saturated = 0;
  for (const auto& e : entries)
    if (std::isinf(e.log_evidence) && e.log_evidence > 0.0) ++saturated;
  if (saturated > 0) {
    for (auto& e : entries)
      e.prob = (std::isinf(e.log_evidence) && e.log_evidence > 0.0)
                   ? 1.0 / static_cast<double>(saturated)
                   : 0.0;
    return;
  }
  double mx = kNegInf;
  for (const auto& e : entries) mx = std::max(mx, e.log_evidence + e.log_prior);
  double total = 0.0;
  for (const auto& e : entries) total += std::exp(e.log_evidence + e.log_prior - mx);
  for (auto& e : entries) e.prob = std::exp(e.log_evidence + e.log_prior - mx) / total;
}

}  // namespace

double posterior_shrink(const HyperRule& rule, const FitStats& stats, const Family& family,
                        int p_total) {
  Evidence ev;
  ev.model = stats.model;
  if (rule_is_tcch(rule.kind) && !family.gaussian_unknown_variance() &&
      !stats.model.is_null()) {
    const TcchParams prior = resolve_prior(rule, stats.n, stats.rank, p_total);
    ev.u_posterior = posterior_update(prior, stats.rank, stats.q);
  }
  return method_shrink(rule, ev, stats, family, p_total);
}

ModelPrior ModelPrior::beta_binomial(double a, double b) {
  if (!(a > 0.0) || !(b > 0.0))
    throw validation_error("beta-binomial model prior needs a > 0 and b > 0");
  return {Kind::beta_binomial, a, b};
}

double model_log_prior(const ModelId& model, const ModelPrior& prior, int p) {
  if (model.p != p) throw validation_error("model and prior disagree on p");
  if (prior.kind == ModelPrior::Kind::uniform) return -p * std::log(2.0);
  const double k = model.size();
  return sf::lbeta(k + prior.a, p - k + prior.b) - sf::lbeta(prior.a, prior.b);
}

const ModelEntry* ModelPosterior::find(const ModelId& model) const {
  auto it = std::lower_bound(entries.begin(), entries.end(), model.bits,
                             [](const ModelEntry& e, std::uint64_t b) { return e.model.bits < b; });
  if (it == entries.end() || it->model.bits != model.bits) return nullptr;
  return &*it;
}

ModelId ModelPosterior::map_model() const {
  if (entries.empty()) throw validation_error("posterior holds no models");
  const ModelEntry* best = &entries.front();
  for (const auto& e : entries) {
    if (e.prob > best->prob ||
        (e.prob == best->prob && e.model.size() < best->model.size()))
      best = &e;
  }
  return best->model;
}

std::vector<ModelPosterior> enumerate_models_many(const Family& family, const Dataset& data,
                                                  const std::vector<HyperRule>& rules,
                                                  const ModelPrior& prior, FitMap* fits,
                                                  int threads) {
  data.validate();
  const int p = data.p();
  const int n = data.n();
  if (p > 25)
    throw validation_error("exhaustive enumeration is capped at p <= 25 predictors; "
                           "use mcmc_search for larger candidate sets");
  for (const auto& rule : rules) preflight_rule(rule, family, n, p);
  if (rules.empty()) return {};

  const GlmFit null_fit = fit_mle(family, data, ModelId::null_model(p));
  const FitStats null_stats = to_stats(null_fit);
  FitOptions opts;
  opts.null_loglik = null_fit.loglik;
  opts.validate_inputs = false;

  const std::uint64_t count = std::uint64_t{1} << p;
  const std::size_t nrules = rules.size();
  std::vector<std::vector<double>> log_ev(nrules, std::vector<double>(count));
  std::vector<char> fit_ok(count, 0);
  std::vector<char> geninv(count, 0);
  // 2^p ModelFit slots dominate memory near the p = 25 cap; skip when unwanted
  std::vector<ModelFit> slots(fits ? count : 0);

  const std::uint64_t nchunks = (count + kChunk - 1) / kChunk;
  parallel_for(nchunks, threads, [&](std::size_t cb, std::size_t ce, int) {
    FitWorkspace ws;
    for (std::size_t c = cb; c < ce; ++c) {
      ws.warm_valid = false;
      const std::uint64_t lo = c * kChunk, hi = std::min(count, (c + 1) * kChunk);
      for (std::uint64_t i = lo; i < hi; ++i) {
        const std::uint64_t bits = i ^ (i >> 1);  // Gray order: one bit per step
        const ModelId model(bits, p);
        FitStats stats;
        try {
          GlmFit fit = bits == 0 ? null_fit : fit_mle(family, data, model, opts, &ws);
          stats = to_stats(fit);
          if (fits) {
            ModelFit& slot = slots[bits];
            slot.stats = stats;
            slot.alpha_hat = fit.alpha_hat;
            slot.beta_hat = std::move(fit.beta_hat);
          }
          fit_ok[bits] = 1;
          geninv[bits] = fit.used_generalized_inverse ? 1 : 0;
        } catch (const numeric_error&) {
          for (std::size_t r = 0; r < nrules; ++r) log_ev[r][bits] = kNegInf;
          continue;
        }
        for (std::size_t r = 0; r < nrules; ++r) {
          try {
            const Evidence ev = evidence_for(rules[r], family, stats, null_stats, p);
            log_ev[r][bits] = ev.valid ? ev.log_bf_vs_null : kNegInf;
          } catch (const numeric_error&) {
            log_ev[r][bits] = kNegInf;
          }
        }
      }
    }
  });

  std::vector<ModelPosterior> out(nrules);
  for (std::size_t r = 0; r < nrules; ++r) {
    ModelPosterior& post = out[r];
    post.coverage = ModelPosterior::Coverage::exact_enumeration;
    post.p = p;
    post.entries.reserve(count);
    for (std::uint64_t bits = 0; bits < count; ++bits) {
      const ModelId model(bits, p);
      const double lev = log_ev[r][bits];
      if (std::isnan(lev) || lev == kNegInf) {
        post.excluded.push_back(model);
        continue;
      }
      ModelEntry e;
      e.model = model;
      e.log_evidence = lev;
      e.log_prior = model_log_prior(model, prior, p);
      post.entries.push_back(std::move(e));
      if (geninv[bits]) ++post.rank_deficient;
    }
    if (post.entries.empty())
      throw numeric_error("every model was excluded; no posterior can be formed");
    normalize_entries(post.entries);
  }

  if (fits) {
    fits->clear();
    for (std::uint64_t bits = 0; bits < count; ++bits)
      if (fit_ok[bits]) (*fits)[bits] = std::move(slots[bits]);
  }
  return out;
}

ModelPosterior enumerate_models(const Family& family, const Dataset& data,
                                const HyperRule& rule, const ModelPrior& prior,
                                FitMap* fits, int threads) {
  return std::move(
      enumerate_models_many(family, data, {rule}, prior, fits, threads).front());
}

MhTrace mh_sample_models(int p, std::uint64_t iterations, std::uint64_t seed,
                         const std::function<double(std::uint64_t)>& log_mass) {
  if (iterations < 1) throw validation_error("stochastic search needs iterations >= 1");
  if (p < 0 || p > 64) throw validation_error("model space supports 0..64 predictors");
  MhTrace trace;
  CounterRng rng(seed);
  std::uint64_t cur = 0;
  double cur_mass = log_mass(cur);
  ++trace.visit_counts[cur];
  const std::uint64_t full = p == 64 ? ~std::uint64_t{0} : ((std::uint64_t{1} << p) - 1);
  for (std::uint64_t it = 0; it < iterations; ++it) {
    std::uint64_t prop = cur;
    if (p > 0) {
      if (rng.uniform() < 0.9) {
        prop = cur ^ (std::uint64_t{1} << rng.below(static_cast<std::uint64_t>(p)));
      } else if (cur != 0 && cur != full) {
        // index the k-th set bit of cur and of its complement; the swap kernel
        // is symmetric since both models have the same size
        const int k = std::popcount(cur);
        std::uint64_t drop = rng.below(static_cast<std::uint64_t>(k));
        std::uint64_t add = rng.below(static_cast<std::uint64_t>(p - k));
        std::uint64_t in_bit = 0, out_bit = 0;
        for (int j = 0; j < p; ++j) {
          if ((cur >> j) & 1u) {
            if (drop-- == 0) in_bit = std::uint64_t{1} << j;
          } else {
            if (add-- == 0) out_bit = std::uint64_t{1} << j;
          }
        }
        prop = (cur ^ in_bit) | out_bit;
      }
    }
    if (prop != cur) {
      const double pm = log_mass(prop);
      if (std::log(rng.uniform_pos()) < pm - cur_mass) {
        cur = prop;
        cur_mass = pm;
        ++trace.accepted;
      }
    }
    ++trace.visit_counts[cur];
  }
  return trace;
}

ModelPosterior mcmc_search(const Family& family, const Dataset& data, const HyperRule& rule,
                           const ModelPrior& prior, std::uint64_t iterations,
                           std::uint64_t seed, FitMap* fits) {
  data.validate();
  const int p = data.p();
  const int n = data.n();
  preflight_rule(rule, family, n, p);

  const GlmFit null_fit = fit_mle(family, data, ModelId::null_model(p));
  const FitStats null_stats = to_stats(null_fit);
  FitOptions opts;
  opts.null_loglik = null_fit.loglik;
  opts.validate_inputs = false;

  ModelPosterior post;
  post.coverage = ModelPosterior::Coverage::mcmc;
  post.p = p;
  post.iterations = iterations;
  post.seed = seed;

  if (fits) fits->clear();
  FitWorkspace ws;
  std::unordered_map<std::uint64_t, double> mass_cache;
  std::unordered_map<std::uint64_t, double> ev_cache;
  auto log_mass = [&](std::uint64_t bits) {
    auto it = mass_cache.find(bits);
    if (it != mass_cache.end()) return it->second;
    const ModelId model(bits, p);
    double lev = kNegInf;
    try {
      ws.warm_valid = false;  // proposals jump around, stale starts mislead
      GlmFit fit = bits == 0 ? null_fit : fit_mle(family, data, model, opts, &ws);
      FitStats stats = to_stats(fit);
      const Evidence ev = evidence_for(rule, family, stats, null_stats, p);
      if (ev.valid) {
        lev = ev.log_bf_vs_null;
        if (fits) (*fits)[bits] = ModelFit{std::move(stats), fit.alpha_hat, std::move(fit.beta_hat)};
        if (fit.used_generalized_inverse) ++post.rank_deficient;
      }
    } catch (const numeric_error&) {
    }
    if (lev == kNegInf) post.excluded.push_back(model);
    ev_cache[bits] = lev;
    const double lm = lev == kNegInf ? kNegInf : lev + model_log_prior(model, prior, p);
    mass_cache[bits] = lm;
    return lm;
  };

  const MhTrace trace = mh_sample_models(p, iterations, seed, log_mass);
  for (const auto& [bits, visits] : trace.visit_counts) {
    const double lev = ev_cache.at(bits);
    if (lev == kNegInf) continue;
    ModelEntry e;
    e.model = ModelId(bits, p);
    e.log_evidence = lev;
    e.log_prior = model_log_prior(e.model, prior, p);
    e.visits = visits;
    post.entries.push_back(std::move(e));
  }
  if (post.entries.empty())
    throw numeric_error("every visited model was excluded; no posterior can be formed");
  normalize_entries(post.entries);
  return post;
}

Eigen::VectorXd inclusion_probabilities(const ModelPosterior& post) {
  Eigen::VectorXd pip = Eigen::VectorXd::Zero(post.p);
  for (const auto& e : post.entries)
    for (int j = 0; j < post.p; ++j)
      if (e.model.includes(j)) pip(j) += e.prob;
  return pip;
}

Eigen::VectorXd bma_coefficients(const ModelPosterior& post, const FitMap& fits,
                                 const HyperRule& rule, const Family& family) {
  Eigen::VectorXd coef = Eigen::VectorXd::Zero(post.p + 1);
  for (const auto& e : post.entries) {
    auto it = fits.find(e.model.bits);
    if (it == fits.end())
      throw validation_error("fit table is missing model " + e.model.bitstring());
    const ModelFit& mf = it->second;
    coef(0) += e.prob * mf.alpha_hat;
    if (e.model.is_null()) continue;
    const double shrink = posterior_shrink(rule, mf.stats, family, post.p);
    int k = 0;
    for (int j = 0; j < post.p; ++j)
      if (e.model.includes(j)) coef(1 + j) += e.prob * shrink * mf.beta_hat(k++);
  }
  return coef;
}

Eigen::VectorXd bma_predict(const ModelPosterior& post, const FitMap& fits,
                            const HyperRule& rule, const Family& family,
                            const Eigen::MatrixXd& new_X) {
  if (static_cast<int>(new_X.cols()) != post.p)
    throw validation_error("prediction matrix has " + std::to_string(new_X.cols()) +
                           " columns, expected " + std::to_string(post.p));
  const Eigen::Index m = new_X.rows();
  Eigen::VectorXd out = Eigen::VectorXd::Zero(m);
  Eigen::VectorXd eta(m);
  for (const auto& e : post.entries) {
    auto it = fits.find(e.model.bits);
    if (it == fits.end())
      throw validation_error("fit table is missing model " + e.model.bitstring());
    const ModelFit& mf = it->second;
    eta.setConstant(mf.alpha_hat);
    if (!e.model.is_null()) {
      const double shrink = posterior_shrink(rule, mf.stats, family, post.p);
      int k = 0;
      for (int j = 0; j < post.p; ++j)
        if (e.model.includes(j)) eta += (shrink * mf.beta_hat(k++)) * new_X.col(j);
    }
    out += e.prob * linkinv(family.kind, eta);
  }
  return out;
}

}  // namespace chicglm
