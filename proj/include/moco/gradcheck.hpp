#pragma once

#include <cmath>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "moco/tensor.hpp"

namespace moco::tensor {

// Builds a scalar loss from parameter variables on a fresh 64-bit tape.
using ScalarNet = std::function<Var(Tape<double>&, std::span<const Var>)>;

struct GradCheckEntry {
  std::string name;
  double max_rel_error = 0.0;
  std::size_t worst_index = 0;
  double analytic_at_worst = 0.0;
  double numeric_at_worst = 0.0;
  bool finite = true;
};

struct GradCheckReport {
  std::vector<GradCheckEntry> entries;
  double max_rel_error = 0.0;
  bool passed = false;
};

struct GradCheckOptions {
  double step = 1e-3;
  // Denominator floor: |a - n| / max(|a|, |n|, floor).
  double floor = 1e-6;
  // 0 checks every coordinate; otherwise an evenly strided subset per tensor.
  std::size_t max_coords_per_tensor = 0;
};

inline double evaluate_net(const ScalarNet& net, std::span<const Array<double>> params) {
  Tape<double> tape(false);
  std::vector<Var> vars;
  vars.reserve(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) vars.push_back(tape.parameter(static_cast<int>(i), params[i]));
  return tape.value(net(tape, vars)).item();
}

inline std::vector<Array<double>> analytic_gradients(const ScalarNet& net, std::span<const Array<double>> params) {
  Tape<double> tape;
  std::vector<Var> vars;
  std::vector<Shape> shapes;
  for (std::size_t i = 0; i < params.size(); ++i) {
    vars.push_back(tape.parameter(static_cast<int>(i), params[i]));
    shapes.push_back(params[i].shape);
  }
  tape.backward(net(tape, vars));
  return tape.slot_gradients(shapes);
}

inline GradCheckReport compare_gradients(const ScalarNet& net, std::vector<Array<double>> params,
                                         std::span<const Array<double>> analytic,
                                         std::span<const std::string> names, double tol,
                                         const GradCheckOptions& opt = {}) {
  GradCheckReport report;
  report.passed = true;
  for (std::size_t p = 0; p < params.size(); ++p) {
    GradCheckEntry e;
    e.name = p < names.size() ? names[p] : "param" + std::to_string(p);
    const std::size_t count = params[p].size();
    std::size_t stride = 1;
    if (opt.max_coords_per_tensor && count > opt.max_coords_per_tensor)
      stride = (count + opt.max_coords_per_tensor - 1) / opt.max_coords_per_tensor;
    for (std::size_t j = 0; j < count; j += stride) {
      const double a = analytic[p].data[j];
      if (!std::isfinite(a)) {
        e.finite = false;
        e.max_rel_error = INFINITY;
        e.worst_index = j;
        break;
      }
      const double saved = params[p].data[j];
      params[p].data[j] = saved + opt.step;
      const double fp = evaluate_net(net, params);
      params[p].data[j] = saved - opt.step;
      const double fm = evaluate_net(net, params);
      params[p].data[j] = saved;
      const double num = (fp - fm) / (2.0 * opt.step);
      const double rel = std::abs(a - num) / std::max({std::abs(a), std::abs(num), opt.floor});
      if (rel > e.max_rel_error || !std::isfinite(rel)) {
        e.max_rel_error = std::isfinite(rel) ? rel : INFINITY;
        e.worst_index = j;
        e.analytic_at_worst = a;
        e.numeric_at_worst = num;
      }
    }
    report.max_rel_error = std::max(report.max_rel_error, e.max_rel_error);
    if (!e.finite || !(e.max_rel_error < tol)) report.passed = false;
    report.entries.push_back(std::move(e));
  }
  return report;
}

inline GradCheckReport gradient_check(const ScalarNet& net, std::vector<Array<double>> params,
                                      std::span<const std::string> names, double tol,
                                      const GradCheckOptions& opt = {}) {
  const auto analytic = analytic_gradients(net, params);
  return compare_gradients(net, std::move(params), analytic, names, tol, opt);
}

}  // namespace moco::tensor
