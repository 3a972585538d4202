#pragma once

#include <array>
#include <string_view>
#include <vector>

namespace wyflow {

/// One monitored sample of a flow run.
struct TraceRow {
  double t = 0.0;
  double r = 0.0;
  double volume_raw = 0.0;
  double min_R = 0.0;
  double max_R = 0.0;
  double min_w = 0.0;
  double max_w = 0.0;
  double sup_dev = 0.0;  // sup |R - r|
  double energy = 0.0;
  double lambda_p = 0.0;  // ∫ (R + σ)^{p-1} e^{-φ} dV_g
  double harnack_ratio_min = 1.0;
  double harnack_ratio_max = 1.0;
  double dphi_dt_min = 0.0;
};

inline constexpr std::array<std::string_view, 13> kTraceColumns{
    "t",     "r",        "volume_raw",        "min_R",             "max_R",      "min_w", "max_w",
    "sup_abs_R_minus_r", "E", "lambda_p", "harnack_ratio_min", "harnack_ratio_max", "dphi_dt_min"};

struct FlowTrace {
  std::vector<TraceRow> rows;
};

}  // namespace wyflow
