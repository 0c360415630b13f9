//! Explicit Runge-Kutta integrators for small complex linear systems.
//!
//! [`Dop853`] is the Dormand-Prince 8(5,3) embedded pair with Hairer's error
//! norm and step control; [`rk4_fixed`] is a classical fixed-step scheme
//! kept as an independent cross-check.

// Published coefficient tables keep their full printed digits.
#![allow(clippy::excessive_precision)]

use crate::error::{Error, Result};
use crate::linalg::C64;
use nalgebra::SMatrix;

pub type State<const R: usize, const C: usize> = SMatrix<C64, R, C>;

#[inline]
fn s(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// Tolerances and limits for the adaptive integrator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dop853 {
    pub rtol: f64,
    pub atol: f64,
    /// Upper bound on the step size.
    pub h_max: f64,
    pub max_steps: usize,
}

/// Accepted step record: state at `t` and the step size that led there.
#[derive(Debug, Clone)]
pub struct Solution<const R: usize, const C: usize> {
    pub times: Vec<f64>,
    pub states: Vec<State<R, C>>,
    pub accepted: usize,
    pub rejected: usize,
}

impl<const R: usize, const C: usize> Solution<R, C> {
    pub fn last(&self) -> (f64, State<R, C>) {
        let n = self.times.len() - 1;
        (self.times[n], self.states[n])
    }
}

const A21: f64 = 5.26001519587677318785587544488E-2;
const A31: f64 = 1.97250569845378994544595329183E-2;
const A32: f64 = 5.91751709536136983633785987549E-2;
const A41: f64 = 2.95875854768068491816892993775E-2;
const A43: f64 = 8.87627564304205475450678981324E-2;
const A51: f64 = 2.41365134159266685502369798665E-1;
const A53: f64 = -8.84549479328286085344864962717E-1;
const A54: f64 = 9.24834003261792003115737966543E-1;
const A61: f64 = 3.7037037037037037037037037037E-2;
const A64: f64 = 1.70828608729473871279604482173E-1;
const A65: f64 = 1.25467687566822425016691814123E-1;
const A71: f64 = 3.7109375E-2;
const A74: f64 = 1.70252211019544039314978060272E-1;
const A75: f64 = 6.02165389804559606850219397283E-2;
const A76: f64 = -1.7578125E-2;
const A81: f64 = 3.70920001185047927108779319836E-2;
const A84: f64 = 1.70383925712239993810214054705E-1;
const A85: f64 = 1.07262030446373284651809199168E-1;
const A86: f64 = -1.53194377486244017527936158236E-2;
const A87: f64 = 8.27378916381402288758473766002E-3;
const A91: f64 = 6.24110958716075717114429577812E-1;
const A94: f64 = -3.36089262944694129406857109825E0;
const A95: f64 = -8.68219346841726006818189891453E-1;
const A96: f64 = 2.75920996994467083049415600797E1;
const A97: f64 = 2.01540675504778934086186788979E1;
const A98: f64 = -4.34898841810699588477366255144E1;
const A101: f64 = 4.77662536438264365890433908527E-1;
const A104: f64 = -2.48811461997166764192642586468E0;
const A105: f64 = -5.90290826836842996371446475743E-1;
const A106: f64 = 2.12300514481811942347288949897E1;
const A107: f64 = 1.52792336328824235832596922938E1;
const A108: f64 = -3.32882109689848629194453265587E1;
const A109: f64 = -2.03312017085086261358222928593E-2;
const A111: f64 = -9.3714243008598732571704021658E-1;
const A114: f64 = 5.18637242884406370830023853209E0;
const A115: f64 = 1.09143734899672957818500254654E0;
const A116: f64 = -8.14978701074692612513997267357E0;
const A117: f64 = -1.85200656599969598641566180701E1;
const A118: f64 = 2.27394870993505042818970056734E1;
const A119: f64 = 2.49360555267965238987089396762E0;
const A1110: f64 = -3.0467644718982195003823669022E0;
const A121: f64 = 2.27331014751653820792359768449E0;
const A124: f64 = -1.05344954667372501984066689879E1;
const A125: f64 = -2.00087205822486249909675718444E0;
const A126: f64 = -1.79589318631187989172765950534E1;
const A127: f64 = 2.79488845294199600508499808837E1;
const A128: f64 = -2.85899827713502369474065508674E0;
const A129: f64 = -8.87285693353062954433549289258E0;
const A1210: f64 = 1.23605671757943030647266201528E1;
const A1211: f64 = 6.43392746015763530355970484046E-1;
const B1: f64 = 5.42937341165687622380535766363E-2;
const B6: f64 = 4.45031289275240888144113950566E0;
const B7: f64 = 1.89151789931450038304281599044E0;
const B8: f64 = -5.8012039600105847814672114227E0;
const B9: f64 = 3.1116436695781989440891606237E-1;
const B10: f64 = -1.52160949662516078556178806805E-1;
const B11: f64 = 2.01365400804030348374776537501E-1;
const B12: f64 = 4.47106157277725905176885569043E-2;
const BHH1: f64 = 0.244094488188976377952755905512E+00;
const BHH2: f64 = 0.733846688281611857341361741547E+00;
const BHH3: f64 = 0.220588235294117647058823529412E-01;
const C2: f64 = 0.526001519587677318785587544488E-01;
const C3: f64 = 0.789002279381515978178381316732E-01;
const C4: f64 = 0.118350341907227396726757197510E+00;
const C5: f64 = 0.281649658092772603273242802490E+00;
const C6: f64 = 0.333333333333333333333333333333E+00;
const C7: f64 = 0.25E+00;
const C8: f64 = 0.307692307692307692307692307692E+00;
const C9: f64 = 0.651282051282051282051282051282E+00;
const C10: f64 = 0.6E+00;
const C11: f64 = 0.857142857142857142857142857142E+00;
const ER1: f64 = 0.1312004499419488073250102996E-01;
const ER6: f64 = -0.1225156446376204440720569753E+01;
const ER7: f64 = -0.4957589496572501915214079952E+00;
const ER8: f64 = 0.1664377182454986536961530415E+01;
const ER9: f64 = -0.3503288487499736816886487290E+00;
const ER10: f64 = 0.3341791187130174790297318841E+00;
const ER11: f64 = 0.8192320648511571246570742613E-01;
const ER12: f64 = -0.2235530786388629525884427845E-01;

impl Dop853 {
    pub fn new(tol: f64) -> Self {
        Self { rtol: tol, atol: tol, h_max: f64::INFINITY, max_steps: 5_000_000 }
    }

    pub fn with_h_max(mut self, h_max: f64) -> Self {
        self.h_max = h_max;
        self
    }

    /// One DOP853 step of size `h`; returns the new state and the two
    /// embedded error vectors (5th and 3rd order).
    pub fn step<const R: usize, const C: usize, F>(
        f: &F,
        t: f64,
        y: &State<R, C>,
        k1: &State<R, C>,
        h: f64,
    ) -> (State<R, C>, State<R, C>, State<R, C>, State<R, C>)
    where
        F: Fn(f64, &State<R, C>) -> State<R, C>,
    {
        let hs = s(h);
        let k2 = f(t + C2 * h, &(y + k1 * s(A21) * hs));
        let k3 = f(t + C3 * h, &(y + (k1 * s(A31) + k2 * s(A32)) * hs));
        let k4 = f(t + C4 * h, &(y + (k1 * s(A41) + k3 * s(A43)) * hs));
        let k5 = f(t + C5 * h, &(y + (k1 * s(A51) + k3 * s(A53) + k4 * s(A54)) * hs));
        let k6 = f(t + C6 * h, &(y + (k1 * s(A61) + k4 * s(A64) + k5 * s(A65)) * hs));
        let k7 = f(t + C7 * h, &(y + (k1 * s(A71) + k4 * s(A74) + k5 * s(A75) + k6 * s(A76)) * hs));
        let k8 = f(t + C8 * h, &(y + (k1 * s(A81) + k4 * s(A84) + k5 * s(A85) + k6 * s(A86) + k7 * s(A87)) * hs));
        let k9 = f(
            t + C9 * h,
            &(y + (k1 * s(A91) + k4 * s(A94) + k5 * s(A95) + k6 * s(A96) + k7 * s(A97) + k8 * s(A98)) * hs),
        );
        let k10 = f(
            t + C10 * h,
            &(y + (k1 * s(A101)
                + k4 * s(A104)
                + k5 * s(A105)
                + k6 * s(A106)
                + k7 * s(A107)
                + k8 * s(A108)
                + k9 * s(A109))
                * hs),
        );
        let k11 = f(
            t + C11 * h,
            &(y + (k1 * s(A111)
                + k4 * s(A114)
                + k5 * s(A115)
                + k6 * s(A116)
                + k7 * s(A117)
                + k8 * s(A118)
                + k9 * s(A119)
                + k10 * s(A1110))
                * hs),
        );
        let k12 = f(
            t + h,
            &(y + (k1 * s(A121)
                + k4 * s(A124)
                + k5 * s(A125)
                + k6 * s(A126)
                + k7 * s(A127)
                + k8 * s(A128)
                + k9 * s(A129)
                + k10 * s(A1210)
                + k11 * s(A1211))
                * hs),
        );
        let incr =
            k1 * s(B1) + k6 * s(B6) + k7 * s(B7) + k8 * s(B8) + k9 * s(B9) + k10 * s(B10) + k11 * s(B11) + k12 * s(B12);
        let y_new = y + incr * hs;
        let err5 = k1 * s(ER1)
            + k6 * s(ER6)
            + k7 * s(ER7)
            + k8 * s(ER8)
            + k9 * s(ER9)
            + k10 * s(ER10)
            + k11 * s(ER11)
            + k12 * s(ER12);
        let err3 = incr - k1 * s(BHH1) - k9 * s(BHH2) - k12 * s(BHH3);
        (y_new, err5, err3, k12)
    }

    fn error_norm<const R: usize, const C: usize>(
        &self,
        h: f64,
        y: &State<R, C>,
        y_new: &State<R, C>,
        err5: &State<R, C>,
        err3: &State<R, C>,
    ) -> f64 {
        let mut e5 = 0.0;
        let mut e3 = 0.0;
        let mut n = 0usize;
        for i in 0..(R * C) {
            for part in [|z: C64| z.re, |z: C64| z.im] {
                let sk = self.atol + self.rtol * part(y[i]).abs().max(part(y_new[i]).abs());
                e5 += (part(err5[i]) / sk).powi(2);
                e3 += (part(err3[i]) / sk).powi(2);
                n += 1;
            }
        }
        let mut deno = e5 + 0.01 * e3;
        if deno <= 0.0 {
            deno = 1.0;
        }
        h.abs() * e5 * (1.0 / (deno * n as f64)).sqrt()
    }

    /// Integrate `y' = f(t, y)` from `t0` to `t1 >= t0`, recording every
    /// accepted step.
    pub fn solve<const R: usize, const C: usize, F>(
        &self,
        f: F,
        t0: f64,
        t1: f64,
        y0: State<R, C>,
        h_init: f64,
    ) -> Result<Solution<R, C>>
    where
        F: Fn(f64, &State<R, C>) -> State<R, C>,
    {
        let mut sol = Solution { times: vec![t0], states: vec![y0], accepted: 0, rejected: 0 };
        if t1 <= t0 {
            return Ok(sol);
        }
        let span = t1 - t0;
        let h_max = self.h_max.min(span);
        let mut h = h_init.min(h_max).max(span * 1e-12);
        let mut t = t0;
        let mut y = y0;
        let mut k1 = f(t, &y);
        let mut last_rejected = false;
        while t < t1 {
            if sol.accepted + sol.rejected >= self.max_steps {
                return Err(Error::Stiffness { t, h });
            }
            let last = t + h >= t1 - 1e-14 * span;
            if last {
                h = t1 - t;
            }
            if h <= 1e-14 * t.abs().max(1.0) {
                return Err(Error::Stiffness { t, h });
            }
            let (y_new, err5, err3, _) = Self::step(&f, t, &y, &k1, h);
            let err = self.error_norm(h, &y, &y_new, &err5, &err3);
            let fac11 = err.powf(0.125);
            let fac = (fac11 / 0.9).clamp(1.0 / 6.0, 3.0);
            if err <= 1.0 {
                t = if last { t1 } else { t + h };
                y = y_new;
                k1 = f(t, &y);
                sol.times.push(t);
                sol.states.push(y);
                sol.accepted += 1;
                let mut h_new = (h / fac).min(h_max);
                if last_rejected {
                    h_new = h_new.min(h);
                }
                last_rejected = false;
                h = h_new;
            } else {
                h /= (fac11 / 0.9).min(3.0);
                sol.rejected += 1;
                last_rejected = true;
            }
        }
        Ok(sol)
    }
}

/// Classical fixed-step RK4 with `steps` equal steps on `[t0, t1]`.
pub fn rk4_fixed<const R: usize, const C: usize, F>(
    f: F,
    t0: f64,
    t1: f64,
    y0: State<R, C>,
    steps: usize,
) -> State<R, C>
where
    F: Fn(f64, &State<R, C>) -> State<R, C>,
{
    let h = (t1 - t0) / steps as f64;
    let hs = s(h);
    let half = s(0.5 * h);
    let sixth = s(h / 6.0);
    let mut y = y0;
    for n in 0..steps {
        let t = t0 + h * n as f64;
        let k1 = f(t, &y);
        let k2 = f(t + 0.5 * h, &(y + k1 * half));
        let k3 = f(t + 0.5 * h, &(y + k2 * half));
        let k4 = f(t + h, &(y + k3 * hs));
        y += (k1 + (k2 + k3) * s(2.0) + k4) * sixth;
    }
    y
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::Vector2;

    fn oscillator(t: f64, y: &State<2, 1>) -> State<2, 1> {
        let w2 = 1.0 + 0.3 * (1.7 * t).cos();
        Vector2::new(y[1], -y[0] * w2)
    }

    #[test]
    fn dop853_harmonic_oscillator() {
        let y0 = Vector2::new(C64::new(1.0, 0.0), C64::new(0.0, 0.0));
        let sol =
            Dop853::new(1e-12).solve(|_, y: &State<2, 1>| Vector2::new(y[1], -y[0]), 0.0, 10.0, y0, 0.01).unwrap();
        let (t, y) = sol.last();
        assert_eq!(t, 10.0);
        assert!((y[0].re - 10f64.cos()).abs() < 1e-11);
        assert!((y[1].re + 10f64.sin()).abs() < 1e-11);
    }

    #[test]
    fn dop853_converges_at_high_order() {
        // Error against a tight reference must shrink much faster than the tolerance.
        let y0 = Vector2::new(C64::new(1.0, 0.0), C64::new(0.0, 0.5));
        let reference = Dop853::new(1e-14).solve(oscillator, 0.0, 20.0, y0, 0.01).unwrap().last().1;
        let coarse = Dop853::new(1e-8).solve(oscillator, 0.0, 20.0, y0, 0.01).unwrap();
        let err = (coarse.last().1 - reference).norm();
        assert!(err < 1e-6, "err = {err}");
        let rk = rk4_fixed(oscillator, 0.0, 20.0, y0, 20_000);
        assert!((rk - reference).norm() < 1e-10);
    }

    #[test]
    fn tiny_step_budget_reports_stiffness() {
        let y0 = Vector2::new(C64::new(1.0, 0.0), C64::new(0.0, 0.0));
        let mut opts = Dop853::new(1e-12);
        opts.max_steps = 3;
        let err = opts.solve(oscillator, 0.0, 100.0, y0, 0.01).unwrap_err();
        assert!(matches!(err, Error::Stiffness { .. }));
    }
}
