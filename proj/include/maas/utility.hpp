#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "maas/core.hpp"
#include "maas/errors.hpp"

namespace maas {

// Multi-attribute expected-utility scoring of contracts. Continuous attributes
// are min-max normalized to [0,1] before the quadratic is evaluated; curve
// outputs are clamped to [0,1].

inline double clamp01(double x) { return std::min(1.0, std::max(0.0, x)); }

inline double normalize(double x, double lo, double hi) {
  if (lo >= hi) throw InvalidRangeError("normalize: lo >= hi");
  return clamp01((x - lo) / (hi - lo));
}

enum class CurveKind { Quadratic, Categorical, MonotoneTable };

struct UtilityCurve {
  CurveKind kind = CurveKind::Quadratic;
  // quadratic: a*x^2 + b*x + c over normalized x
  double a = 0.0, b = 0.0, c = 0.0;
  double lo = 0.0, hi = 1.0;  // input range in native units (continuous kinds)
  std::map<std::string, double> categories;
  // monotone table: (normalized x, value) points, linearly interpolated
  std::vector<std::pair<double, double>> table;
};

inline UtilityCurve quadratic_curve(double a, double b, double c, double lo, double hi) {
  UtilityCurve u;
  u.kind = CurveKind::Quadratic;
  u.a = a;
  u.b = b;
  u.c = c;
  u.lo = lo;
  u.hi = hi;
  return u;
}

inline UtilityCurve categorical_curve(std::map<std::string, double> categories) {
  UtilityCurve u;
  u.kind = CurveKind::Categorical;
  u.categories = std::move(categories);
  return u;
}

inline UtilityCurve table_curve(std::vector<std::pair<double, double>> pts, double lo,
                                double hi) {
  UtilityCurve u;
  u.kind = CurveKind::MonotoneTable;
  u.table = std::move(pts);
  u.lo = lo;
  u.hi = hi;
  return u;
}

inline double eval_curve(const UtilityCurve& curve, double raw) {
  if (curve.kind == CurveKind::Categorical)
    throw UnknownLabelError("categorical curve evaluated with a numeric value");
  const double x = normalize(raw, curve.lo, curve.hi);
  if (curve.kind == CurveKind::Quadratic)
    return clamp01(curve.a * x * x + curve.b * x + curve.c);
  // piecewise linear over the table
  if (curve.table.empty()) return 0.0;
  if (x <= curve.table.front().first) return clamp01(curve.table.front().second);
  for (std::size_t i = 1; i < curve.table.size(); ++i) {
    const auto& [x1, y1] = curve.table[i];
    const auto& [x0, y0] = curve.table[i - 1];
    if (x <= x1) {
      const double t = (x1 == x0) ? 0.0 : (x - x0) / (x1 - x0);
      return clamp01(y0 + t * (y1 - y0));
    }
  }
  return clamp01(curve.table.back().second);
}

inline double eval_curve(const UtilityCurve& curve, const std::string& label) {
  if (curve.kind != CurveKind::Categorical)
    throw UnknownLabelError("continuous curve evaluated with a label");
  auto it = curve.categories.find(label);
  if (it == curve.categories.end()) throw UnknownLabelError("unknown label: " + label);
  return clamp01(it->second);
}

// Attributes a profile can select. Values are supplied per contract through
// AttributeContext by whatever is quantifying the contract.
enum class Attribute {
  Distance,       // order side, miles
  SupplierSize,   // order side, label
  SupplierRating, // order side
  Price,          // order side
  Material,       // supplier side, label ("in_stock" / "not_in_stock")
  Urgency,        // supplier side, periods until due
  Revenue,        // supplier side, contract price
  CapacityLevel,  // supplier side, available hours
};

using AttributeValue = std::variant<double, std::string>;

struct AttributeContext {
  std::map<Attribute, AttributeValue> values;

  AttributeContext& set(Attribute k, double v) {
    values[k] = v;
    return *this;
  }
  AttributeContext& set(Attribute k, std::string v) {
    values[k] = std::move(v);
    return *this;
  }
};

struct WeightedCurve {
  double weight = 0.0;
  UtilityCurve curve;
  Attribute attribute = Attribute::Price;
};

struct UtilityProfile {
  std::vector<WeightedCurve> terms;
};

inline void validate(const UtilityProfile& p) {
  double total = 0.0;
  for (const auto& t : p.terms) {
    if (t.weight < 0.0) throw ConfigError("negative utility weight");
    total += t.weight;
  }
  if (std::fabs(total - 1.0) > 1e-9) throw ConfigError("utility weights must sum to 1");
}

inline double contract_utility(const UtilityProfile& profile, const AttributeContext& ctx) {
  double total = 0.0;
  for (const auto& term : profile.terms) {
    auto it = ctx.values.find(term.attribute);
    if (it == ctx.values.end())
      throw MissingAttributeError("attribute missing from context");
    double u = std::holds_alternative<double>(it->second)
                   ? eval_curve(term.curve, std::get<double>(it->second))
                   : eval_curve(term.curve, std::get<std::string>(it->second));
    total += term.weight * u;
  }
  return total;
}

// Great-circle distance in miles.
inline double haversine_miles(const GeoPoint& p, const GeoPoint& q) {
  constexpr double kEarthRadiusMiles = 3958.8;
  constexpr double kDegToRad = 3.14159265358979323846 / 180.0;
  const double lat1 = p.lat * kDegToRad, lat2 = q.lat * kDegToRad;
  const double dlat = (q.lat - p.lat) * kDegToRad;
  const double dlon = (q.lon - p.lon) * kDegToRad;
  const double s = std::sin(dlat / 2) * std::sin(dlat / 2) +
                   std::cos(lat1) * std::cos(lat2) * std::sin(dlon / 2) * std::sin(dlon / 2);
  return 2.0 * kEarthRadiusMiles * std::asin(std::min(1.0, std::sqrt(s)));
}

// Descending by utility; ties broken by (order id, supplier id, price) so the
// ranking is deterministic and idempotent.
template <typename C>
inline std::vector<std::pair<C, double>> rank_contracts(std::vector<std::pair<C, double>> in) {
  std::stable_sort(in.begin(), in.end(), [](const auto& x, const auto& y) {
    if (x.second != y.second) return x.second > y.second;
    const auto& a = x.first.terms;
    const auto& b = y.first.terms;
    if (a.order_id != b.order_id) return a.order_id < b.order_id;
    if (a.supplier_id != b.supplier_id) return a.supplier_id < b.supplier_id;
    return a.price < b.price;
  });
  return in;
}

}  // namespace maas
