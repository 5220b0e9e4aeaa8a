#include "hjbi/catalog.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace hjbi {

namespace {

[[noreturn]] void fail(const std::string& context, const std::string& what) {
  throw ConfigError(context + ": " + what);
}

double get_number(const json& obj, const char* key, double fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_number()) throw ConfigError(std::string(key) + " must be a number");
  return obj[key].get<double>();
}

// Accepts a scalar (broadcast) or an array of the exact size.
Vec get_vec(const json& obj, const char* key, int size, double fallback,
            const std::string& context) {
  if (!obj.contains(key)) return Vec(size, fallback);
  const json& v = obj[key];
  if (v.is_number()) return Vec(size, v.get<double>());
  if (!v.is_array() || static_cast<int>(v.size()) != size)
    fail(context, std::string(key) + " must be a number or an array of length " +
                      std::to_string(size));
  Vec out(size);
  for (int i = 0; i < size; ++i) out[i] = v[i].get<double>();
  return out;
}

std::string family_of(const json& spec, const std::string& context) {
  if (!spec.is_object() || !spec.contains("family") || !spec["family"].is_string())
    throw ConfigError(context + ": expected an object with a \"family\" string");
  return spec["family"].get<std::string>();
}

double dot(const Vec& a, const Vec& b) {
  double s = 0.0;
  const std::size_t n = std::min(a.size(), b.size());
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

void ensure_keys(const json& obj, std::initializer_list<const char*> allowed,
                 const std::string& context) {
  if (!obj.is_object()) return;
  std::set<std::string> ok(allowed.begin(), allowed.end());
  std::vector<std::string> unknown;
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!ok.count(it.key())) unknown.push_back(it.key());
  if (!unknown.empty()) {
    std::ostringstream msg;
    msg << "unknown key" << (unknown.size() > 1 ? "s" : "") << " in " << context << ":";
    for (const auto& k : unknown) msg << " \"" << k << "\"";
    throw ConfigError(msg.str());
  }
}

VectorFn make_vector_function(const json& spec, int state_dim, int control_dim,
                              const std::string& context) {
  const std::string family = family_of(spec, context);
  const int n = state_dim, l = control_dim;

  if (family == "zero") {
    ensure_keys(spec, {"family"}, context);
    return [n](double, const Vec&, const Vec&) { return Vec(n, 0.0); };
  }
  if (family == "constant") {
    ensure_keys(spec, {"family", "value"}, context);
    Vec value = get_vec(spec, "value", n, 0.0, context);
    return [value](double, const Vec&, const Vec&) { return value; };
  }
  if (family == "control") {
    ensure_keys(spec, {"family", "scale"}, context);
    if (l != n) fail(context, "control family needs control dimension == state dimension");
    const double scale = get_number(spec, "scale", 1.0);
    return [n, scale](double, const Vec&, const Vec& u) {
      Vec out(n);
      for (int i = 0; i < n; ++i) out[i] = scale * u[i];
      return out;
    };
  }
  if (family == "affine") {
    ensure_keys(spec, {"family", "c0", "s_coef", "y_coef", "u_coef"}, context);
    Vec c0 = get_vec(spec, "c0", n, 0.0, context);
    Vec sc = get_vec(spec, "s_coef", n, 0.0, context);
    Vec yc = get_vec(spec, "y_coef", n * n, 0.0, context);
    Vec uc = get_vec(spec, "u_coef", n * l, 0.0, context);
    return [n, l, c0, sc, yc, uc](double s, const Vec& y, const Vec& u) {
      Vec out(n);
      for (int i = 0; i < n; ++i) {
        double v = c0[i] + sc[i] * s;
        for (int j = 0; j < n; ++j) v += yc[i * n + j] * y[j];
        for (int k = 0; k < l && k < static_cast<int>(u.size()); ++k) v += uc[i * l + k] * u[k];
        out[i] = v;
      }
      return out;
    };
  }
  if (family == "saturating") {
    ensure_keys(spec, {"family", "amp", "bias", "s_coef", "y_coef", "u_coef"}, context);
    Vec amp = get_vec(spec, "amp", n, 1.0, context);
    Vec bias = get_vec(spec, "bias", n, 0.0, context);
    Vec sc = get_vec(spec, "s_coef", n, 0.0, context);
    Vec yc = get_vec(spec, "y_coef", n * n, 0.0, context);
    Vec uc = get_vec(spec, "u_coef", n * l, 0.0, context);
    return [n, l, amp, bias, sc, yc, uc](double s, const Vec& y, const Vec& u) {
      Vec out(n);
      for (int i = 0; i < n; ++i) {
        double arg = bias[i] + sc[i] * s;
        for (int j = 0; j < n; ++j) arg += yc[i * n + j] * y[j];
        for (int k = 0; k < l && k < static_cast<int>(u.size()); ++k) arg += uc[i * l + k] * u[k];
        out[i] = amp[i] * std::tanh(arg);
      }
      return out;
    };
  }
  fail(context, "unknown vector function family \"" + family + "\"");
}

ScalarFn make_scalar_function(const json& spec, int state_dim, int control_dim,
                              const std::string& context) {
  const std::string family = family_of(spec, context);
  const int n = state_dim, l = control_dim;

  if (family == "zero") {
    ensure_keys(spec, {"family"}, context);
    return [](double, const Vec&, const Vec&) { return 0.0; };
  }
  if (family == "constant") {
    ensure_keys(spec, {"family", "value"}, context);
    const double value = get_number(spec, "value", 0.0);
    return [value](double, const Vec&, const Vec&) { return value; };
  }
  if (family == "affine") {
    ensure_keys(spec, {"family", "c0", "s_coef", "y_coef", "u_coef"}, context);
    const double c0 = get_number(spec, "c0", 0.0);
    const double sc = get_number(spec, "s_coef", 0.0);
    Vec yc = get_vec(spec, "y_coef", n, 0.0, context);
    Vec uc = get_vec(spec, "u_coef", l, 0.0, context);
    return [c0, sc, yc, uc](double s, const Vec& y, const Vec& u) {
      return c0 + sc * s + dot(yc, y) + dot(uc, u);
    };
  }
  if (family == "quadratic") {
    ensure_keys(spec, {"family", "c0", "s_coef", "y_lin", "u_lin", "y_quad", "u_quad"}, context);
    const double c0 = get_number(spec, "c0", 0.0);
    const double sc = get_number(spec, "s_coef", 0.0);
    Vec yl = get_vec(spec, "y_lin", n, 0.0, context);
    Vec ul = get_vec(spec, "u_lin", l, 0.0, context);
    Vec yq = get_vec(spec, "y_quad", n, 0.0, context);
    Vec uq = get_vec(spec, "u_quad", l, 0.0, context);
    return [c0, sc, yl, ul, yq, uq](double s, const Vec& y, const Vec& u) {
      double v = c0 + sc * s + dot(yl, y) + dot(ul, u);
      for (std::size_t i = 0; i < y.size() && i < yq.size(); ++i) v += yq[i] * y[i] * y[i];
      for (std::size_t i = 0; i < u.size() && i < uq.size(); ++i) v += uq[i] * u[i] * u[i];
      return v;
    };
  }
  if (family == "fixed_plus_proportional") {
    ensure_keys(spec, {"family", "fixed", "proportional"}, context);
    const double fixed = get_number(spec, "fixed", 0.0);
    const double prop = get_number(spec, "proportional", 0.0);
    return [fixed, prop](double, const Vec& y, const Vec&) {
      double abs_sum = 0.0;
      for (double x : y) abs_sum += std::abs(x);
      return fixed + prop * abs_sum;
    };
  }
  if (family == "norm_cost") {
    ensure_keys(spec, {"family", "base", "coef"}, context);
    const double base = get_number(spec, "base", 0.0);
    const double coef = get_number(spec, "coef", 1.0);
    return [base, coef](double, const Vec&, const Vec& u) {
      double sq = 0.0;
      for (double x : u) sq += x * x;
      return base + coef * std::sqrt(sq);
    };
  }
  if (family == "saturating") {
    ensure_keys(spec, {"family", "amp", "bias", "s_coef", "y_coef", "u_coef"}, context);
    const double amp = get_number(spec, "amp", 1.0);
    const double bias = get_number(spec, "bias", 0.0);
    const double sc = get_number(spec, "s_coef", 0.0);
    Vec yc = get_vec(spec, "y_coef", n, 0.0, context);
    Vec uc = get_vec(spec, "u_coef", l, 0.0, context);
    return [amp, bias, sc, yc, uc](double s, const Vec& y, const Vec& u) {
      return amp * std::tanh(bias + sc * s + dot(yc, y) + dot(uc, u));
    };
  }
  if (family == "time_table") {
    ensure_keys(spec, {"family", "times", "values"}, context);
    auto table = make_time_function(spec, context);
    return [table](double s, const Vec&, const Vec&) { return table(s); };
  }
  fail(context, "unknown scalar function family \"" + family + "\"");
}

TerminalFn make_terminal_function(const json& spec, int state_dim, const std::string& context) {
  ScalarFn fn = make_scalar_function(spec, state_dim, 0, context);
  const double t_eval = 0.0;  // terminal gain families must not depend on s or u
  return [fn, t_eval](const Vec& y) { return fn(t_eval, y, Vec{}); };
}

DampingFn make_damping_function(const json& spec, double lambda, const std::string& context) {
  if (spec.is_null())
    return [lambda](double h) { return std::exp(-lambda * h); };
  const std::string family = family_of(spec, context);
  if (family == "exp") {
    ensure_keys(spec, {"family"}, context);
    return [lambda](double h) { return std::exp(-lambda * h); };
  }
  if (family == "inverse") {
    ensure_keys(spec, {"family"}, context);
    return [lambda](double h) { return 1.0 / (1.0 + lambda * h); };
  }
  if (family == "constant") {
    ensure_keys(spec, {"family", "value"}, context);
    const double value = get_number(spec, "value", 0.9);
    return [value](double) { return value; };
  }
  fail(context, "unknown damping family \"" + family + "\"");
}

std::function<double(double)> make_time_function(const json& spec, const std::string& context) {
  const std::string family = family_of(spec, context);
  if (family == "constant") {
    ensure_keys(spec, {"family", "value"}, context);
    const double value = get_number(spec, "value", 0.0);
    return [value](double) { return value; };
  }
  if (family == "affine") {
    ensure_keys(spec, {"family", "c0", "s_coef"}, context);
    const double c0 = get_number(spec, "c0", 0.0);
    const double sc = get_number(spec, "s_coef", 0.0);
    return [c0, sc](double s) { return c0 + sc * s; };
  }
  if (family == "time_table") {
    ensure_keys(spec, {"family", "times", "values"}, context);
    if (!spec.contains("times") || !spec.contains("values"))
      fail(context, "time_table needs times and values arrays");
    Vec times = spec["times"].get<Vec>();
    Vec values = spec["values"].get<Vec>();
    if (times.size() != values.size() || times.size() < 2)
      fail(context, "time_table needs matching times/values with at least 2 entries");
    if (!std::is_sorted(times.begin(), times.end()))
      fail(context, "time_table times must be sorted");
    return [times, values](double s) {
      if (s <= times.front()) return values.front();
      if (s >= times.back()) return values.back();
      const auto it = std::upper_bound(times.begin(), times.end(), s);
      const std::size_t k = static_cast<std::size_t>(std::distance(times.begin(), it)) - 1;
      const double w = (s - times[k]) / (times[k + 1] - times[k]);
      return (1.0 - w) * values[k] + w * values[k + 1];
    };
  }
  fail(context, "unknown time function family \"" + family + "\"");
}

}  // namespace hjbi
