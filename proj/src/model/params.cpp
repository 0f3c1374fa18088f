#include "duphist/model/params.hpp"

#include <numeric>

#include "duphist/core/errors.hpp"

namespace duphist {

void HkyParams::validate() const {
  double sum = std::accumulate(pi.begin(), pi.end(), 0.0);
  if (std::abs(sum - 1.0) > 1e-12) throw DomainError("HKY base frequencies must sum to 1");
  for (double p : pi) {
    if (!(p > 0.0)) throw DomainError("HKY base frequencies must be positive");
  }
  if (!(kappa > 0.0)) throw DomainError("HKY kappa must be positive");
}

void ModelParams::validate() const {
  auto prob = [](double p, const char* name) {
    if (!(p >= 0.0 && p <= 1.0)) throw DomainError(std::string(name) + " must lie in [0,1]");
  };
  prob(p_inversion, "p_inversion");
  prob(p_deletion, "p_deletion");
  if (!(mean_dup_length >= 1.0) || !(mean_dup_distance >= 1.0) || !(mean_del_length >= 1.0)) {
    throw DomainError("geometric means must be >= 1");
  }
  if (!(lambda > 0.0)) throw DomainError("lambda must be positive");
  if (!(root_branch_length >= 0.0)) throw DomainError("root_branch_length must be >= 0");
  if (heats.empty()) throw DomainError("heat schedule is empty");
  for (double h : heats) {
    if (!(h > 0.0)) throw DomainError("heats must be positive");
  }
  hky.validate();
}

void ChainConfig::validate() const {
  if (chains < 1) throw DomainError("chains must be >= 1");
  if (iterations < 0 || burn_in < 0) throw DomainError("iterations and burn_in must be >= 0");
  if (iterations > 0 && burn_in >= iterations) throw DomainError("burn_in must be smaller than iterations");
}

}  // namespace duphist
