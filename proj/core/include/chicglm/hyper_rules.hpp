#pragma once

#include <optional>
#include <string>

#include "chicglm/tcch.hpp"

namespace chicglm {

// Evidence methods.  The first group are tCCH mixtures resolved per model;
// the rest are plug-in or information-criterion scores sharing the same
// selection machinery.
enum class RuleKind {
  ch,
  hyper_g,
  uniform_u,
  jeffreys,
  beta_prime,
  benchmark,
  zs_adapted,
  robust,
  hyper_g_over_n,
  intrinsic,
  fixed_g,
  tbf_fixed_g,
  local_eb,
  aic,
  bic,
};

struct HyperRule {
  RuleKind kind = RuleKind::robust;
  double a = 1.0, b = 2.0, s = 0.0;  // ch
  double a_h = 3.0;                  // hyper_g, hyper_g_over_n
  double c = 0.01;                   // benchmark
  double g = 0.0;                    // fixed_g, tbf_fixed_g; g_is_n => unit information g = n
  bool g_is_n = true;

  static HyperRule CH(double a, double b, double s);
  static HyperRule hyper_g(double a_h = 3.0);
  static HyperRule uniform();
  static HyperRule jeffreys();
  static HyperRule beta_prime();
  static HyperRule benchmark(double c = 0.01);
  static HyperRule zs_adapted();
  static HyperRule robust();
  static HyperRule hyper_g_over_n(double a_h = 4.0);
  static HyperRule intrinsic();
  static HyperRule fixed_g_n();
  static HyperRule fixed_g(double g);
  static HyperRule tbf_g_n();
  static HyperRule tbf(double g);
  static HyperRule local_eb();
  static HyperRule aic();
  static HyperRule bic();
};

bool rule_is_tcch(RuleKind kind);

// table lookup of tCCH parameters; model-size-dependent rows use p_m, the
// benchmark row also needs the total candidate count
TcchParams resolve_prior(const HyperRule& rule, int n, int p_m, int p_total);

double fixed_g_value(const HyperRule& rule, int n);

// canonical label, e.g. "hyper-g(3)"; parse accepts these labels
// case-insensitively with an optional numeric argument
std::string rule_name(const HyperRule& rule);
HyperRule parse_rule(const std::string& name, std::optional<double> arg = std::nullopt);

}  // namespace chicglm
