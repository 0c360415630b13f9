//! Small complex 2x2 helpers shared by the propagator and Magnus code.

use nalgebra::Matrix2;
use num_complex::Complex64;

pub type C64 = Complex64;
pub type CMat2 = Matrix2<Complex64>;

pub const I: C64 = C64 { re: 0.0, im: 1.0 };

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[inline]
pub fn identity() -> CMat2 {
    CMat2::identity()
}

#[inline]
pub fn det(m: &CMat2) -> C64 {
    m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)]
}

#[inline]
pub fn trace(m: &CMat2) -> C64 {
    m[(0, 0)] + m[(1, 1)]
}

/// Inverse of a matrix with unit determinant (adjugate).
#[inline]
pub fn inverse_unimodular(m: &CMat2) -> CMat2 {
    CMat2::new(m[(1, 1)], -m[(0, 1)], -m[(1, 0)], m[(0, 0)])
}

#[inline]
pub fn commutator(a: &CMat2, b: &CMat2) -> CMat2 {
    a * b - b * a
}

/// Largest absolute entry.
pub fn max_abs(m: &CMat2) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Frobenius norm.
pub fn frobenius(m: &CMat2) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Deviation from the structure `[[a, conj b], [b, conj a]]`.
pub fn pseudo_reality_defect(m: &CMat2) -> f64 {
    let d1 = (m[(1, 1)] - m[(0, 0)].conj()).norm();
    let d2 = (m[(1, 0)] - m[(0, 1)].conj()).norm();
    d1.max(d2)
}

/// Neumaier compensated accumulator for complex sums.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    re: f64,
    re_c: f64,
    im: f64,
    im_c: f64,
}

#[inline]
fn neumaier(sum: &mut f64, comp: &mut f64, x: f64) {
    let t = *sum + x;
    if sum.abs() >= x.abs() {
        *comp += (*sum - t) + x;
    } else {
        *comp += (x - t) + *sum;
    }
    *sum = t;
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, z: C64) {
        neumaier(&mut self.re, &mut self.re_c, z.re);
        neumaier(&mut self.im, &mut self.im_c, z.im);
    }

    #[inline]
    pub fn value(&self) -> C64 {
        C64::new(self.re + self.re_c, self.im + self.im_c)
    }
}

impl std::iter::FromIterator<C64> for CompensatedSum {
    fn from_iter<T: IntoIterator<Item = C64>>(iter: T) -> Self {
        let mut s = CompensatedSum::new();
        for z in iter {
            s.add(z);
        }
        s
    }
}
