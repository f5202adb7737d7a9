#pragma once

// Spectrum-based suspiciousness formulas. Each formula maps a Tally to a
// nonnegative score; degenerate denominators produce defined values, never
// NaN. Ranking consumers should only feed tallies with cf >= 1 (suspicious
// statements), but every function here is total.

#include <cmath>
#include <cstdio>
#include <functional>
#include <stdexcept>
#include <string>

#include "hybridfl/core.hpp"

namespace hybridfl {

// DStar score when uf + cp == 0 and cf >= 1. Large enough to rank such
// statements first among DStar scores on any realistic spectrum.
inline constexpr double kDStarCap = 1e9;

class FormulaId {
 public:
  enum class Kind { Tarantula, Jaccard, Ochiai, DStar, Barinel };

  static FormulaId tarantula() { return FormulaId(Kind::Tarantula); }
  static FormulaId jaccard() { return FormulaId(Kind::Jaccard); }
  static FormulaId ochiai() { return FormulaId(Kind::Ochiai); }
  static FormulaId barinel() { return FormulaId(Kind::Barinel); }

  static FormulaId dstar(double exponent = 2.0) {
    if (!(exponent >= 1.0))
      throw std::invalid_argument("dstar exponent must be >= 1");
    FormulaId f(Kind::DStar);
    f.exponent_ = exponent;
    return f;
  }

  Kind kind() const { return kind_; }
  double exponent() const { return exponent_; }

  // Canonical CLI/config form: "tarantula", "jaccard", "ochiai",
  // "dstar:<exp>", "barinel". Bare "dstar" means exponent 2.
  static FormulaId parse(const std::string& text) {
    if (text == "tarantula") return tarantula();
    if (text == "jaccard") return jaccard();
    if (text == "ochiai") return ochiai();
    if (text == "barinel") return barinel();
    if (text == "dstar") return dstar();
    if (text.rfind("dstar:", 0) == 0) {
      const std::string arg = text.substr(6);
      std::size_t used = 0;
      double exp = 0.0;
      try {
        exp = std::stod(arg, &used);
      } catch (const std::exception&) {
        throw std::invalid_argument("bad dstar exponent: " + arg);
      }
      if (used != arg.size())
        throw std::invalid_argument("bad dstar exponent: " + arg);
      return dstar(exp);
    }
    throw std::invalid_argument("unknown formula: " + text);
  }

  std::string to_string() const {
    switch (kind_) {
      case Kind::Tarantula: return "tarantula";
      case Kind::Jaccard: return "jaccard";
      case Kind::Ochiai: return "ochiai";
      case Kind::Barinel: return "barinel";
      case Kind::DStar: {
        char buf[48];
        std::snprintf(buf, sizeof(buf), "dstar:%g", exponent_);
        return buf;
      }
    }
    return "?";
  }

  friend bool operator==(const FormulaId&, const FormulaId&) = default;

 private:
  explicit FormulaId(Kind kind) : kind_(kind) {}
  Kind kind_;
  double exponent_ = 2.0;
};

using TallyScoreFn = std::function<double(const Tally&)>;

// Barinel as shipped: 1 - CP/(CP+CF). Callers needing a different Barinel
// variant pass their own function through the score() overload below.
inline double barinel_score(const Tally& t) {
  if (t.cf == 0) return 0.0;
  const double cf = static_cast<double>(t.cf);
  const double cp = static_cast<double>(t.cp);
  return 1.0 - cp / (cp + cf);
}

inline double score(const FormulaId& formula, const Tally& t,
                    const TallyScoreFn& barinel_override) {
  const double cf = static_cast<double>(t.cf);
  const double cp = static_cast<double>(t.cp);
  const double uf = static_cast<double>(t.uf);
  const double up = static_cast<double>(t.up);

  switch (formula.kind()) {
    case FormulaId::Kind::Tarantula: {
      const double fail_rate = (t.cf + t.uf) == 0 ? 0.0 : cf / (cf + uf);
      if (fail_rate == 0.0) return 0.0;
      const double pass_rate = (t.cp + t.up) == 0 ? 0.0 : cp / (cp + up);
      return fail_rate / (fail_rate + pass_rate);
    }
    case FormulaId::Kind::Jaccard:
      if (t.cf == 0) return 0.0;
      return cf / (cf + cp + uf);
    case FormulaId::Kind::Ochiai:
      if (t.cf == 0) return 0.0;
      return cf / std::sqrt((cf + uf) * (cf + cp));
    case FormulaId::Kind::DStar: {
      if (t.cf == 0) return 0.0;
      if (t.uf + t.cp == 0) return kDStarCap;
      const double raw = std::pow(cf, formula.exponent()) / (uf + cp);
      return raw > kDStarCap ? kDStarCap : raw;  // overflow joins the cap
    }
    case FormulaId::Kind::Barinel:
      if (barinel_override) return barinel_override(t);
      return barinel_score(t);
  }
  return 0.0;  // unreachable
}

inline double score(const FormulaId& formula, const Tally& t) {
  return score(formula, t, TallyScoreFn{});
}

}  // namespace hybridfl
