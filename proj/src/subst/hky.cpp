#include "duphist/subst/hky.hpp"

#include <cmath>

#include "duphist/core/errors.hpp"

namespace duphist {

Matrix4 hky_transition(const HkyParams& params, double t) {
  if (t < 0.0) throw DomainError("branch length must be >= 0");
  const auto& pi = params.pi;
  const double kappa = params.kappa;
  const double pur = pi[0] + pi[2];
  const double pyr = pi[1] + pi[3];
  const double beta = 1.0 / (2.0 * pur * pyr + 2.0 * kappa * (pi[0] * pi[2] + pi[1] * pi[3]));
  const double e1 = std::exp(-beta * t);
  auto is_purine = [](int i) { return i == 0 || i == 2; };
  Matrix4 p{};
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      const double pj = pi[static_cast<std::size_t>(j)];
      if (is_purine(i) != is_purine(j)) {
        p[i][j] = pj * (1.0 - e1);
        continue;
      }
      const double big = is_purine(j) ? pur : pyr;
      const double e2 = std::exp(-beta * t * (1.0 + big * (kappa - 1.0)));
      if (i == j) {
        p[i][j] = pj + pj * (1.0 / big - 1.0) * e1 + ((big - pj) / big) * e2;
      } else {
        p[i][j] = pj + pj * (1.0 / big - 1.0) * e1 - (pj / big) * e2;
      }
    }
  }
  return p;
}

int nucleotide_code(char c) {
  switch (c) {
    case 'A': case 'a': return 0;
    case 'C': case 'c': return 1;
    case 'G': case 'g': return 2;
    case 'T': case 't': return 3;
    default: return -1;
  }
}

char nucleotide_char(int code) { return code >= 0 && code < 4 ? "ACGT"[code] : 'N'; }

std::string reverse_complement(std::string_view s) {
  std::string out(s.rbegin(), s.rend());
  for (auto& c : out) {
    switch (c) {
      case 'A': c = 'T'; break;
      case 'C': c = 'G'; break;
      case 'G': c = 'C'; break;
      case 'T': c = 'A'; break;
      case 'a': c = 't'; break;
      case 'c': c = 'g'; break;
      case 'g': c = 'c'; break;
      case 't': c = 'a'; break;
      default: break;
    }
  }
  return out;
}

}  // namespace duphist
