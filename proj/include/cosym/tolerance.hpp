#pragma once

namespace cosym {

// Every numeric threshold the library checks against. Scenario files may
// override any field by name (see ScenarioFile "tolerances").
struct ToleranceConfig {
  double closed = 1e-8;              // max |d omega|, max |d eta|
  double volume_det = 1e-10;         // min |det(Omega + eta eta^T)|
  double reeb_residual = 1e-9;       // |Z^T Omega|, |eta(Z) - 1|
  double eta_pairing = 1e-9;         // |eta(X_f)|, |eta(Y_f) - 1|
  double field_residual = 1e-8;      // |X_f^T Omega - (df - Z(f) eta)|
  double bracket_agreement = 1e-9;   // {f,g} via gradients vs via X_f, X_g
  double first_integral = 1e-8;      // |Z(f) + {f,H}|
  double commuting = 1e-8;           // |{f_i, f_j}| on the commuting prefix
  double rank_relative = 1e-10;      // singular values below sigma_max * this are zero
  double lie_bracket = 1e-5;         // brackets built from difference Jacobians
  double fiber_equal = 1e-9;         // two points share a fiber
  double closure = 1e-7;             // a_ij constant on a fiber
  double lemma = 1e-5;               // bracket-of-integrals residual
  double casimir = 1e-8;             // |{G_k, f_i}|
  double tangency = 1e-8;            // |<df_j, V>| for symmetry fields V
  double lattice_return = 1e-6;      // return residual of a lattice vector
  double path_independence = 1e-5;   // same action from two base points
  double primitive = 1e-8;           // |-d lambda - omega|
  double cond_max = 1e8;             // largest admissible cond(b)
  double frequency_mismatch = 1e-3;  // solved vs empirical frequencies
  double linear_fit = 1e-3;          // residual of the unwrapped angle fit
};

}  // namespace cosym
