#pragma once

#include <string>

#include "swarm/common.hpp"

namespace swarm::link {

// Searched range for min_elements_for_power.
inline constexpr long kMaxElements = 1'000'000'000;

struct LinkBudgetParams {
  double frequency_hz = 2.0e9;
  double distance_m = 500e3;        // slant range
  double element_power_w = 1.0;
  double element_gain_dbi = 5.0;
  long n_elements = 1;
  double ue_gain_dbi = 0.0;
  double misc_losses_db = 3.0;      // polarization, pointing, atmosphere
  double ue_sensitivity_dbm = -100.0;

  void validate() const;
};

struct LinkBudgetResult {
  double fspl_db = 0.0;
  double eirp_dbm = 0.0;
  double p_rx_dbm = 0.0;
  double margin_db = 0.0;
};

/// 20log10(4 pi d f / c).
double fspl(double distance_m, double frequency_hz);

/// Coherent array EIRP: 10log10(P_el / 1 mW) + G_el + 20log10(N).
double array_eirp(long n_elements, double element_power_w, double element_gain_dbi);

LinkBudgetResult received_power(const LinkBudgetParams& params);

/// Smallest N with received_power(N) >= target; params.n_elements is ignored.
long min_elements_for_power(LinkBudgetParams params, double target_p_rx_dbm);

std::string result_json(const LinkBudgetParams& params, const LinkBudgetResult& result);

}  // namespace swarm::link
