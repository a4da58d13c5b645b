#include "chicglm/hyper_rules.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>

#include "chicglm/errors.hpp"

namespace chicglm {

HyperRule HyperRule::CH(double a, double b, double s) {
  HyperRule r;
  r.kind = RuleKind::ch;
  r.a = a;
  r.b = b;
  r.s = s;
  return r;
}
HyperRule HyperRule::hyper_g(double a_h) {
  HyperRule r;
  r.kind = RuleKind::hyper_g;
  r.a_h = a_h;
  return r;
}
HyperRule HyperRule::uniform() {
  HyperRule r;
  r.kind = RuleKind::uniform_u;
  return r;
}
HyperRule HyperRule::jeffreys() {
  HyperRule r;
  r.kind = RuleKind::jeffreys;
  return r;
}
HyperRule HyperRule::beta_prime() {
  HyperRule r;
  r.kind = RuleKind::beta_prime;
  return r;
}
HyperRule HyperRule::benchmark(double c) {
  HyperRule r;
  r.kind = RuleKind::benchmark;
  r.c = c;
  return r;
}
HyperRule HyperRule::zs_adapted() {
  HyperRule r;
  r.kind = RuleKind::zs_adapted;
  return r;
}
HyperRule HyperRule::robust() {
  HyperRule r;
  r.kind = RuleKind::robust;
  return r;
}
HyperRule HyperRule::hyper_g_over_n(double a_h) {
  HyperRule r;
  r.kind = RuleKind::hyper_g_over_n;
  r.a_h = a_h;
  return r;
}
HyperRule HyperRule::intrinsic() {
  HyperRule r;
  r.kind = RuleKind::intrinsic;
  return r;
}
HyperRule HyperRule::fixed_g_n() {
  HyperRule r;
  r.kind = RuleKind::fixed_g;
  r.g_is_n = true;
  return r;
}
HyperRule HyperRule::fixed_g(double g) {
  HyperRule r;
  r.kind = RuleKind::fixed_g;
  r.g = g;
  r.g_is_n = false;
  return r;
}
HyperRule HyperRule::tbf_g_n() {
  HyperRule r;
  r.kind = RuleKind::tbf_fixed_g;
  r.g_is_n = true;
  return r;
}
HyperRule HyperRule::tbf(double g) {
  HyperRule r;
  r.kind = RuleKind::tbf_fixed_g;
  r.g = g;
  r.g_is_n = false;
  return r;
}
HyperRule HyperRule::local_eb() {
  HyperRule r;
  r.kind = RuleKind::local_eb;
  return r;
}
HyperRule HyperRule::aic() {
  HyperRule r;
  r.kind = RuleKind::aic;
  return r;
}
HyperRule HyperRule::bic() {
  HyperRule r;
  r.kind = RuleKind::bic;
  return r;
}

bool rule_is_tcch(RuleKind kind) {
  switch (kind) {
    case RuleKind::ch:
    case RuleKind::hyper_g:
    case RuleKind::uniform_u:
    case RuleKind::jeffreys:
    case RuleKind::beta_prime:
    case RuleKind::benchmark:
    case RuleKind::zs_adapted:
    case RuleKind::robust:
    case RuleKind::hyper_g_over_n:
    case RuleKind::intrinsic:
      return true;
    default:
      return false;
  }
}

TcchParams resolve_prior(const HyperRule& rule, int n, int p_m, int p_total) {
  if (n < 1) throw validation_error("resolve_prior: n must be >= 1");
  if (p_m < 0) throw validation_error("resolve_prior: p_m must be >= 0");
  TcchParams p;
  switch (rule.kind) {
    case RuleKind::ch:
      if (!(rule.a > 0.0) || !(rule.b > 0.0))
        throw validation_error("CH prior requires a > 0 and b > 0");
      p = {rule.a, rule.b, 0.0, rule.s, 1.0, 1.0};
      return p;
    case RuleKind::hyper_g:
      if (!(rule.a_h > 2.0)) throw validation_error("hyper-g requires a_h > 2");
      p = {rule.a_h - 2.0, 2.0, 0.0, 0.0, 1.0, 1.0};
      return p;
    case RuleKind::uniform_u:
      p = {2.0, 2.0, 0.0, 0.0, 1.0, 1.0};
      return p;
    case RuleKind::jeffreys:
      // improper u^{-1} kernel; evidence drops the prior normalizer and the
      // search layer rejects candidate sets containing the null model
      p = {0.0, 2.0, 0.0, 0.0, 1.0, 1.0};
      return p;
    case RuleKind::beta_prime: {
      const double b = n - p_m - 1.5;
      if (!(b > 0.0))
        throw validation_error("beta-prime prior needs n > p_m + 1.5 (n = " +
                               std::to_string(n) + ", p_m = " + std::to_string(p_m) + ")");
      p = {0.5, b, 0.0, 0.0, 1.0, 1.0};
      return p;
    }
    case RuleKind::benchmark: {
      if (!(rule.c > 0.0)) throw validation_error("benchmark prior requires c > 0");
      const double np2 = std::max(static_cast<double>(n),
                                  static_cast<double>(p_total) * p_total);
      p = {2.0 * rule.c, 2.0 * rule.c * np2, 0.0, 0.0, 1.0, 1.0};
      return p;
    }
    case RuleKind::zs_adapted:
      p = {1.0, 2.0, 0.0, static_cast<double>(n) + 3.0, 1.0, 1.0};
      return p;
    case RuleKind::robust:
      p = {1.0, 2.0, 1.5, 0.0, (n + 1.0) / (p_m + 1.0), 1.0};
      return p;
    case RuleKind::hyper_g_over_n:
      if (!(rule.a_h > 2.0)) throw validation_error("hyper-g/n requires a_h > 2");
      p = {rule.a_h - 2.0, 2.0, 0.5 * rule.a_h, 0.0, 1.0, 1.0 / n};
      return p;
    case RuleKind::intrinsic:
      p = {1.0, 1.0, 1.0, 0.0, (n + p_m + 1.0) / (p_m + 1.0), (n + p_m + 1.0) / n};
      return p;
    default:
      throw validation_error("rule " + rule_name(rule) + " has no tCCH representation");
  }
}

double fixed_g_value(const HyperRule& rule, int n) {
  if (rule.kind != RuleKind::fixed_g && rule.kind != RuleKind::tbf_fixed_g)
    throw validation_error("fixed_g_value applies to fixed-g rules only");
  if (rule.g_is_n) return static_cast<double>(n);
  if (!(rule.g >= 0.0)) throw validation_error("fixed g must be >= 0");
  return rule.g;
}

namespace {

std::string trim_num(double x) {
  std::ostringstream os;
  os << x;
  return os.str();
}

}  // namespace

std::string rule_name(const HyperRule& rule) {
  switch (rule.kind) {
    case RuleKind::ch:
      return "ch(" + trim_num(rule.a) + "," + trim_num(rule.b) + "," + trim_num(rule.s) + ")";
    case RuleKind::hyper_g:
      return "hyper-g(" + trim_num(rule.a_h) + ")";
    case RuleKind::uniform_u:
      return "uniform";
    case RuleKind::jeffreys:
      return "jeffreys";
    case RuleKind::beta_prime:
      return "beta-prime";
    case RuleKind::benchmark:
      return "benchmark(" + trim_num(rule.c) + ")";
    case RuleKind::zs_adapted:
      return "zs-adapted";
    case RuleKind::robust:
      return "robust";
    case RuleKind::hyper_g_over_n:
      return "hyper-g/n(" + trim_num(rule.a_h) + ")";
    case RuleKind::intrinsic:
      return "intrinsic";
    case RuleKind::fixed_g:
      return rule.g_is_n ? "g-prior(g=n)" : "g-prior(" + trim_num(rule.g) + ")";
    case RuleKind::tbf_fixed_g:
      return rule.g_is_n ? "tbf(g=n)" : "tbf(" + trim_num(rule.g) + ")";
    case RuleKind::local_eb:
      return "local-eb";
    case RuleKind::aic:
      return "aic";
    case RuleKind::bic:
      return "bic";
  }
  return "?";
}

HyperRule parse_rule(const std::string& name, std::optional<double> arg) {
  std::string key;
  key.reserve(name.size());
  for (char ch : name)
    key.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));

  // an argument embedded as "name(x)" wins over the separate arg
  std::optional<double> a2 = arg;
  if (auto pos = key.find('('); pos != std::string::npos) {
    const auto close = key.find(')', pos);
    if (close == std::string::npos)
      throw validation_error("malformed prior name: " + name);
    const std::string inner = key.substr(pos + 1, close - pos - 1);
    key = key.substr(0, pos);
    if (!inner.empty() && inner != "g=n") {
      try {
        a2 = std::stod(inner);
      } catch (const std::exception&) {
        throw validation_error("malformed prior argument in: " + name);
      }
    }
  }

  if (key == "ch") {
    // ch wants (a, b, s); a single argument sets a with b = 2, s = 0
    HyperRule r = HyperRule::CH(1.0, 2.0, 0.0);
    if (a2) r.a = *a2;
    return r;
  }
  if (key == "hyper-g" || key == "hyperg" || key == "hyper_g")
    return HyperRule::hyper_g(a2.value_or(3.0));
  if (key == "uniform") return HyperRule::uniform();
  if (key == "jeffreys") return HyperRule::jeffreys();
  if (key == "beta-prime" || key == "betaprime" || key == "beta_prime")
    return HyperRule::beta_prime();
  if (key == "benchmark") return HyperRule::benchmark(a2.value_or(0.01));
  if (key == "zs-adapted" || key == "zs_adapted" || key == "zsadapted")
    return HyperRule::zs_adapted();
  if (key == "robust") return HyperRule::robust();
  if (key == "hyper-g/n" || key == "hyper_g_n" || key == "hyper-g-n")
    return HyperRule::hyper_g_over_n(a2.value_or(4.0));
  if (key == "intrinsic") return HyperRule::intrinsic();
  if (key == "g-prior" || key == "fixed-g" || key == "fixed_g" || key == "dbf")
    return a2 ? HyperRule::fixed_g(*a2) : HyperRule::fixed_g_n();
  if (key == "tbf") return a2 ? HyperRule::tbf(*a2) : HyperRule::tbf_g_n();
  if (key == "local-eb" || key == "local_eb" || key == "leb") return HyperRule::local_eb();
  if (key == "aic") return HyperRule::aic();
  if (key == "bic") return HyperRule::bic();
  throw validation_error("unknown prior or method: " + name);
}

}  // namespace chicglm
