//! Sign, normalization and branch conventions used throughout the crate.

/// Plain-text conventions sheet. CSV outputs carry a hash of this text, so any
/// edit changes the version stamp of emitted datasets.
pub const CONVENTIONS: &str = "\
Conventions sheet, version 1

Frequency and drive
  omega(t)^2 = omega0^2 + eps(t), eps real, sup|eps| < omega0^2
  eta(t) = eps(t) / (2 omega0)
  eps(t) = 0 outside the window [t_min, t_max]

Fourier transforms
  f~(nu) = int_{t_min}^{t_max} f(t) e^{-i nu t} dt
  f~_ret(nu, t) = int_{t_min}^{t} f(s) e^{-i nu s} ds  (zero for t <= t_min)
  real f: f~(-nu) = conj f~(nu)

Evolution
  phase-space amplitudes (a, a^dagger); i dU/dt = H U, U(t_i, t_i) = I
  H = omega0 diag(1, -1) + eta [[1, 1], [-1, -1]]
  U0(t) = diag(e^{-i omega0 t}, e^{i omega0 t})
  interaction picture U_I(t_f, t_i) = U0(t_f)^{-1} U U0(t_i)
  H'_I = eta [[1, e^{2 i omega0 t}], [-e^{-2 i omega0 t}, -1]]
  det U = 1 exactly; U_I = [[alpha, conj beta], [beta, conj alpha]]

Magnus expansion
  U_I = exp(A1 + A2 + A3 + ...)
  A1 = [[-i eta~(0), -i eta~(-2 omega0)], [i eta~(2 omega0), i eta~(0)]]
  A2 = -1/2 int_{t1>t2} [H'_I(t1), H'_I(t2)]
  A3 = i/6 int_{t1>t2>t3} ([H1, [H2, H3]] + [H3, [H2, H1]])

Bogoliubov coefficients and in-out action
  alpha = conj [U_I]_22, beta = [U_I]_21, |alpha|^2 - |beta|^2 = 1
  squeeze parameter z = i eta~(-2 omega0)
  Gamma = (i/2) log [U_I]_22
  Im Gamma = 1/2 log |[U_I]_22|; persistence |<0_out|0_in>|^2 = e^{-2 Im Gamma} = 1/|alpha|
  Re Gamma = -1/2 arg [U_I]_22, branch continued in lambda from lambda eps = 0
  Gamma^(2) (Euclidean) = 1/2 int dnu/2pi kernel(nu) |eps~(nu)|^2,
    kernel(nu) = -1 / (2 omega0 (nu^2 + 4 omega0^2))
  Im Gamma^(2) = 1/4 (|eps~(2 omega0)| / (2 omega0))^2

Closed-time-path action
  Gamma_CTP = (i/2) log(alpha_- conj alpha_+ - beta_- conj beta_+)
  first order: alpha = cosh x - i eta~(0) sinh(x)/x, beta = i eta~(2 omega0) sinh(x)/x
  x^2 = |eta~(2 omega0)|^2 - |eta~(0)|^2; x = sqrt(x^2) >= 0, or +i sqrt(-x^2)
  only even functions of x enter, so the square-root branch is immaterial
  log branch: principal, continued in lambda from (eta_+, eta_-) = 0; winding recorded

Equation-of-motion source
  S(t) = delta Gamma_CTP / delta eta_+(t) at eta_+ = eta_- (per unit eta, not eps;
    delta/delta eps = S / (2 omega0))
  S(t) = -1/2 (|a|^2 + |b|^2) - Re(e^{2 i omega0 t} b conj a),
    a = [U1]_11, b = [U1]_21, U1 = exp(A1 built from eta~_ret(., t))
  drive-independent baseline S = -1/2 (reported, not subtracted)

Determinant ratio
  det(K)/det(K0) = [U_I]_22 (rotated-contour boundary conditions)
";
