//! Real roots of `a x³ + b x² + c x + d`.
//!
//! Three real roots use the trigonometric form, one real root uses Cardano's
//! formula. When the discriminant of the monic cubic is within
//! [`DISCRIMINANT_EPS`] of zero the closed forms lose accuracy (nearly
//! coincident roots), so roots are instead bracketed between the critical
//! points and bisected. Every root is finished with a guarded Newton polish
//! on the original coefficients.

use std::f64::consts::PI;

/// Below this magnitude the monic discriminant is treated as zero.
pub const DISCRIMINANT_EPS: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cubic {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl Cubic {
    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Self {
        Self { a, b, c, d }
    }

    pub fn eval(&self, x: f64) -> f64 {
        ((self.a * x + self.b) * x + self.c) * x + self.d
    }

    pub fn derivative(&self, x: f64) -> f64 {
        (3.0 * self.a * x + 2.0 * self.b) * x + self.c
    }

    /// Discriminant of the monic form `x³ + (b/a)x² + (c/a)x + d/a`.
    pub fn monic_discriminant(&self) -> f64 {
        let (p, q) = self.depressed();
        -(4.0 * p * p * p + 27.0 * q * q)
    }

    fn depressed(&self) -> (f64, f64) {
        let b = self.b / self.a;
        let c = self.c / self.a;
        let d = self.d / self.a;
        let p = c - b * b / 3.0;
        let q = 2.0 * b * b * b / 27.0 - b * c / 3.0 + d;
        (p, q)
    }

    /// All real roots in ascending order. Repeated roots are reported once.
    pub fn real_roots(&self) -> Vec<f64> {
        let mut roots = if self.a == 0.0 {
            quadratic_roots(self.b, self.c, self.d)
        } else if self.monic_discriminant().abs() < DISCRIMINANT_EPS {
            self.bracketed_roots()
        } else {
            self.closed_form_roots()
        };
        for r in roots.iter_mut() {
            *r = self.polish(*r);
        }
        roots.sort_by(f64::total_cmp);
        roots.dedup_by(|x, y| (*x - *y).abs() <= 1e-12 * (1.0 + y.abs()));
        roots
    }

    fn closed_form_roots(&self) -> Vec<f64> {
        let shift = self.b / (3.0 * self.a);
        let (p, q) = self.depressed();
        if self.monic_discriminant() > 0.0 {
            // three distinct real roots, p < 0
            let m = 2.0 * (-p / 3.0).sqrt();
            let arg = (3.0 * q / (p * m)).clamp(-1.0, 1.0);
            let phi = arg.acos() / 3.0;
            (0..3).map(|k| m * (phi - 2.0 * PI * k as f64 / 3.0).cos() - shift).collect()
        } else {
            let s = (q * q / 4.0 + p * p * p / 27.0).max(0.0).sqrt();
            let u = (-q / 2.0 - q.signum() * s).cbrt();
            let t = if u == 0.0 { 0.0 } else { u - p / (3.0 * u) };
            vec![t - shift]
        }
    }

    /// Bisection between the critical points.
    fn bracketed_roots(&self) -> Vec<f64> {
        let bound = 1.0 + [self.b, self.c, self.d].iter().map(|v| (v / self.a).abs()).fold(0.0, f64::max);
        let mut knots = vec![-bound];
        let mut crit = quadratic_roots(3.0 * self.a, 2.0 * self.b, self.c);
        crit.sort_by(f64::total_cmp);
        knots.extend(crit.iter().copied().filter(|x| x.abs() < bound));
        knots.push(bound);

        let scale = self.a.abs().max(self.b.abs()).max(self.c.abs()).max(self.d.abs());
        let mut roots = Vec::new();
        for w in knots.windows(2) {
            let (lo, hi) = (w[0], w[1]);
            let (flo, fhi) = (self.eval(lo), self.eval(hi));
            if flo == 0.0 {
                roots.push(lo);
            } else if flo.signum() != fhi.signum() && fhi != 0.0 {
                roots.push(bisect(|x| self.eval(x), lo, hi, 200));
            }
        }
        if self.eval(bound) == 0.0 {
            roots.push(bound);
        }
        // double roots sit on a critical point without a sign change
        for x in crit {
            if self.eval(x).abs() <= 1e-13 * scale {
                roots.push(x);
            }
        }
        roots
    }

    fn polish(&self, mut x: f64) -> f64 {
        let mut fx = self.eval(x);
        for _ in 0..4 {
            let d = self.derivative(x);
            if d == 0.0 || fx == 0.0 {
                break;
            }
            let next = x - fx / d;
            let fnext = self.eval(next);
            if fnext.abs() >= fx.abs() {
                break;
            }
            x = next;
            fx = fnext;
        }
        x
    }
}

fn quadratic_roots(a: f64, b: f64, c: f64) -> Vec<f64> {
    if a == 0.0 {
        return if b == 0.0 { vec![] } else { vec![-c / b] };
    }
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return vec![];
    }
    let s = disc.sqrt();
    let q = -0.5 * (b + b.signum() * s);
    if q == 0.0 {
        return vec![0.0];
    }
    vec![q / a, c / q]
}

/// Bisection on a bracketing interval `f(lo)·f(hi) ≤ 0`.
pub fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, max_iter: usize) -> f64 {
    let mut flo = f(lo);
    for _ in 0..max_iter {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Convenience wrapper for [`Cubic::real_roots`].
pub fn real_roots(a: f64, b: f64, c: f64, d: f64) -> Vec<f64> {
    Cubic::new(a, b, c, d).real_roots()
}
