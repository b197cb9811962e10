//! Cyclotomic elements with machine-word numerators over a common
//! denominator, for the inner loop of the state sum. Every operation
//! reports overflow as `None` rather than wrapping.

use num_integer::Integer;

use crate::scalars::{ring, Cyclo};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Fixed<const P: usize> {
    num: [i64; P],
    den: i64,
}

impl<const P: usize> Fixed<P> {
    pub fn is_zero(&self) -> bool {
        self.num.iter().all(|&x| x == 0)
    }
}

/// Reduction data for `Q(ζ_m)` with `φ(m) <= P`.
#[derive(Debug, Clone)]
pub struct FixedRing<const P: usize> {
    m: u32,
    phi: usize,
    /// `high[k]` is `ζ^{φ+k}` in the power basis.
    high: Vec<[i64; P]>,
}

fn gcd128(a: i128, b: i128) -> i128 {
    a.unsigned_abs().gcd(&b.unsigned_abs()) as i128
}

impl<const P: usize> FixedRing<P> {
    pub fn new(m: u32) -> Option<FixedRing<P>> {
        let r = ring(m);
        let phi = r.degree();
        if phi > P {
            return None;
        }
        let high = (0..phi.saturating_sub(1))
            .map(|k| {
                let mut row = [0i64; P];
                row[..phi].copy_from_slice(r.power_row(phi + k));
                row
            })
            .collect();
        Some(FixedRing { m, phi, high })
    }

    pub fn zero(&self) -> Fixed<P> {
        Fixed { num: [0; P], den: 1 }
    }

    pub fn one(&self) -> Fixed<P> {
        let mut num = [0; P];
        num[0] = 1;
        Fixed { num, den: 1 }
    }

    pub fn lift(&self, c: &Cyclo) -> Option<Fixed<P>> {
        if c.conductor() != self.m {
            return self.lift(&c.promote(self.m));
        }
        let (v, den) = c.to_i64_parts()?;
        let mut num = [0; P];
        num[..v.len()].copy_from_slice(&v);
        Some(Fixed { num, den })
    }

    pub fn lower(&self, x: &Fixed<P>) -> Cyclo {
        Cyclo::from_i64_parts(self.m, &x.num[..self.phi], x.den)
    }

    fn finish(&self, wide: &[i128], den: i128) -> Option<Fixed<P>> {
        let mut g = den;
        for &w in &wide[..self.phi] {
            if g == 1 {
                break;
            }
            if w != 0 {
                g = gcd128(g, w);
            }
        }
        let g = if den < 0 { -g } else { g };
        let mut num = [0i64; P];
        for (n, &w) in num.iter_mut().zip(&wide[..self.phi]) {
            *n = i64::try_from(w / g).ok()?;
        }
        if num.iter().all(|&x| x == 0) {
            return Some(self.zero());
        }
        Some(Fixed { num, den: i64::try_from(den / g).ok()? })
    }

    pub fn add(&self, a: &Fixed<P>, b: &Fixed<P>) -> Option<Fixed<P>> {
        if b.is_zero() {
            return Some(*a);
        }
        if a.is_zero() {
            return Some(*b);
        }
        if a.den == b.den {
            let mut num = [0i64; P];
            for i in 0..self.phi {
                num[i] = a.num[i].checked_add(b.num[i])?;
            }
            if a.den == 1 {
                return Some(Fixed { num, den: 1 });
            }
            let wide: Vec<i128> = num.iter().map(|&x| x as i128).collect();
            return self.finish(&wide, a.den as i128);
        }
        let g = gcd128(a.den as i128, b.den as i128);
        let fa = b.den as i128 / g;
        let fb = a.den as i128 / g;
        let den = (a.den as i128).checked_mul(fa)?;
        let mut wide = [0i128; P];
        for i in 0..self.phi {
            wide[i] = (a.num[i] as i128).checked_mul(fa)?.checked_add((b.num[i] as i128).checked_mul(fb)?)?;
        }
        self.finish(&wide, den)
    }

    pub fn mul(&self, a: &Fixed<P>, b: &Fixed<P>) -> Option<Fixed<P>> {
        if a.is_zero() || b.is_zero() {
            return Some(self.zero());
        }
        let phi = self.phi;
        let mut wide = vec![0i128; 2 * phi - 1];
        for i in 0..phi {
            let x = a.num[i] as i128;
            if x == 0 {
                continue;
            }
            for j in 0..phi {
                let y = b.num[j] as i128;
                if y != 0 {
                    wide[i + j] = wide[i + j].checked_add(x * y)?;
                }
            }
        }
        for k in (0..phi - 1).rev() {
            let c = wide[phi + k];
            if c == 0 {
                continue;
            }
            for (j, &r) in self.high[k].iter().enumerate().take(phi) {
                if r != 0 {
                    wide[j] = wide[j].checked_add(c.checked_mul(r as i128)?)?;
                }
            }
        }
        let den = (a.den as i128).checked_mul(b.den as i128)?;
        self.finish(&wide[..phi], den)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn agrees_with_cyclo() {
        let m = 20;
        let f = FixedRing::<8>::new(m).unwrap();
        let xs: Vec<Cyclo> = (0..6)
            .map(|k| Cyclo::zeta_pow(m, k * 3 + 1).scale(k - 2) + Cyclo::from_int(m, 3 - k) * Cyclo::zeta_pow(m, 7 * k).inv().unwrap())
            .chain([Cyclo::from_int(m, 2).inv().unwrap(), Cyclo::zeta_pow(m, 3).scale(3).inv().unwrap()])
            .collect();
        for a in &xs {
            for b in &xs {
                let (fa, fb) = (f.lift(a).unwrap(), f.lift(b).unwrap());
                assert_eq!(f.lower(&f.mul(&fa, &fb).unwrap()), a * b);
                assert_eq!(f.lower(&f.add(&fa, &fb).unwrap()), a + b);
            }
        }
        assert!(FixedRing::<4>::new(20).is_none());
    }

    #[test]
    fn overflow_is_reported() {
        let f = FixedRing::<4>::new(12).unwrap();
        let big = f.lift(&Cyclo::from_int(12, i64::MAX)).unwrap();
        assert!(f.add(&big, &big).is_none());
        assert!(f.mul(&big, &big).is_none());
    }
}
