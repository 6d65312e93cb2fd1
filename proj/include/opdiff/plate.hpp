#pragma once

// Operators of the hinged plate on an elastic foundation:
//   d2w/dt2 + A*A w + B w = 0,  A = five-point Laplacian,  B = gamma1 I + gamma2 A.

#include <string>
#include <string_view>
#include <vector>

#include "opdiff/error.hpp"
#include "opdiff/lattice.hpp"
#include "opdiff/linear_map.hpp"
#include "opdiff/operators.hpp"

namespace opdiff {

/// Which fourth-order operator the problem carries.
enum class ProblemForm {
  biharmonic,   // A*A with A = A1 + A2
  directional,  // A1*A1 + A2*A2, the exact target of the A*_a A_a splitting
};

inline std::string_view to_string(ProblemForm f) {
  return f == ProblemForm::biharmonic ? "biharmonic" : "directional";
}

struct PlateOperators {
  GridSpec grid;
  PlateCoefficients coeffs;
  ProblemForm form;
  LinearMap a;                    // A
  std::vector<LinearMap> a_parts; // A1, A2 with A = A1 + A2
  LinearMap b;                    // B = gamma1 I + gamma2 A
  std::vector<LinearMap> b_parts; // nonzero terms among gamma1 I, gamma2 A
  LinearMap fourth;               // A*A, or A1*A1 + A2*A2 for the directional form
  LinearMap q;                    // fourth + B
};

inline PlateOperators make_plate_operators(const GridSpec& grid, const PlateCoefficients& coeffs,
                                           ProblemForm form = ProblemForm::biharmonic) {
  coeffs.validate();
  LinearMap a = laplacian(grid);
  std::vector<LinearMap> a_parts{laplacian_directional(grid, 1), laplacian_directional(grid, 2)};
  LinearMap b = foundation_operator(a, coeffs);

  std::vector<LinearMap> b_parts;
  if (coeffs.gamma1 > 0.0) b_parts.push_back(scaled(coeffs.gamma1, identity(grid)));
  if (coeffs.gamma2 > 0.0) b_parts.push_back(scaled(coeffs.gamma2, a));
  if (b_parts.empty()) b_parts.push_back(zero_map(grid));

  LinearMap fourth = form == ProblemForm::biharmonic
                         ? compose({a.adjoint(), a})
                         : sum({compose({a_parts[0].adjoint(), a_parts[0]}),
                                compose({a_parts[1].adjoint(), a_parts[1]})});
  LinearMap q = sum({fourth, b});
  return PlateOperators{grid, coeffs, form, a, a_parts, b, b_parts, fourth, q};
}

/// w0(x) = x1^2 (1 - x1) x2^2 (1 - x2), scaled to the rectangle.
inline Field plate_initial_deflection(const GridSpec& grid) {
  const double l1 = grid.l1();
  const double l2 = grid.l2();
  return Field::sample(grid, [l1, l2](double x1, double x2) {
    const double s1 = x1 / l1;
    const double s2 = x2 / l2;
    return s1 * s1 * (1.0 - s1) * s2 * s2 * (1.0 - s2);
  });
}

}  // namespace opdiff
