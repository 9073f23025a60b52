#include "swarm/linkbudget.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "json.hpp"

namespace swarm::link {

void LinkBudgetParams::validate() const {
  if (!(frequency_hz > 0)) throw DomainError("link frequency must be > 0 [Hz]");
  if (!(distance_m > 0)) throw DomainError("link distance must be > 0 [m]");
  if (!(element_power_w > 0)) throw DomainError("per-element power must be > 0 [W]");
  if (n_elements < 1) throw DomainError("n_elements must be >= 1");
  if (misc_losses_db < 0) throw DomainError("misc_losses_db must be >= 0 [dB]");
}

double fspl(double distance_m, double frequency_hz) {
  if (!(distance_m > 0) || !(frequency_hz > 0)) throw DomainError("fspl needs distance > 0 and frequency > 0");
  return db20(4.0 * kPi * distance_m * frequency_hz / kSpeedOfLight);
}

double array_eirp(long n_elements, double element_power_w, double element_gain_dbi) {
  if (n_elements < 1) throw DomainError("array_eirp needs n >= 1");
  if (!(element_power_w > 0)) throw DomainError("array_eirp needs power > 0");
  return db10(element_power_w * 1000.0) + element_gain_dbi + db20(static_cast<double>(n_elements));
}

LinkBudgetResult received_power(const LinkBudgetParams& params) {
  params.validate();
  LinkBudgetResult r;
  r.fspl_db = fspl(params.distance_m, params.frequency_hz);
  r.eirp_dbm = array_eirp(params.n_elements, params.element_power_w, params.element_gain_dbi);
  r.p_rx_dbm = r.eirp_dbm - r.fspl_db - params.misc_losses_db + params.ue_gain_dbi;
  r.margin_db = r.p_rx_dbm - params.ue_sensitivity_dbm;
  return r;
}

long min_elements_for_power(LinkBudgetParams params, double target_p_rx_dbm) {
  auto p_rx = [&](long n) {
    params.n_elements = n;
    return received_power(params).p_rx_dbm;
  };
  const double at_max = p_rx(kMaxElements);
  if (at_max < target_p_rx_dbm) {
    std::ostringstream os;
    os << "target " << target_p_rx_dbm << " dBm unreachable: N = " << kMaxElements << " falls short by "
       << (target_p_rx_dbm - at_max) << " dB";
    throw InfeasibleError(os.str());
  }
  // Closed-form guess from the 20log10(N) law, then settle on the exact integer bracket.
  const double base = p_rx(1);
  const double guess = std::pow(10.0, (target_p_rx_dbm - base) / 20.0);
  long n = std::clamp<long>(static_cast<long>(std::ceil(guess)), 1, kMaxElements);
  while (n > 1 && p_rx(n - 1) >= target_p_rx_dbm) --n;
  while (p_rx(n) < target_p_rx_dbm) ++n;
  return n;
}

std::string result_json(const LinkBudgetParams& params, const LinkBudgetResult& result) {
  nlohmann::ordered_json j;
  j["fspl_db"] = result.fspl_db;
  j["eirp_dbm"] = result.eirp_dbm;
  j["p_rx_dbm"] = result.p_rx_dbm;
  j["margin_db"] = result.margin_db;
  j["params"] = {{"frequency_hz", params.frequency_hz},
                 {"distance_m", params.distance_m},
                 {"element_power_w", params.element_power_w},
                 {"element_gain_dbi", params.element_gain_dbi},
                 {"n_elements", params.n_elements},
                 {"ue_gain_dbi", params.ue_gain_dbi},
                 {"misc_losses_db", params.misc_losses_db},
                 {"ue_sensitivity_dbm", params.ue_sensitivity_dbm}};
  return j.dump(2) + "\n";
}

}  // namespace swarm::link
