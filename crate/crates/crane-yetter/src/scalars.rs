//! Exact arithmetic in cyclotomic rings `Q(ζ_m)` and the float embedding used
//! for reporting.
//!
//! An element is stored in the power basis `1, ζ, …, ζ^{φ(m)-1}` modulo the
//! `m`-th cyclotomic polynomial, as integer numerators over one shared positive
//! denominator. The representation is kept reduced (gcd of all numerators and
//! the denominator is 1), so structural equality is value equality.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, MulAssign, Neg, Sub, SubAssign};
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Double precision complex value used for reporting and phase extraction.
pub type ComplexF = Complex64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScalarError {
    #[error("value {0} is not of unit modulus")]
    NotUnitModulus(String),
    #[error("malformed cyclotomic serialization: {0}")]
    Malformed(String),
}

/// Per-conductor reduction data, shared by every element of that ring.
#[derive(Debug)]
pub struct Ring {
    m: u32,
    phi: usize,
    /// `rows[k]` holds `ζ^k` reduced modulo `Φ_m`, for `0 <= k < m`.
    rows: Vec<Vec<i64>>,
    roots: Vec<Complex64>,
}

fn poly_div_exact(num: &[i64], den: &[i64]) -> Vec<i64> {
    // Both monic up to sign; den has leading coefficient 1.
    let mut rem = num.to_vec();
    let dn = den.len() - 1;
    let mut q = vec![0i64; num.len() - dn];
    for k in (0..q.len()).rev() {
        let c = rem[k + dn];
        q[k] = c;
        if c != 0 {
            for (j, d) in den.iter().enumerate() {
                rem[k + j] -= c * d;
            }
        }
    }
    debug_assert!(rem.iter().all(|&x| x == 0));
    q
}

/// Integer coefficients of `Φ_m`, lowest degree first.
pub fn cyclotomic_polynomial(m: u32) -> Vec<i64> {
    let mut p = vec![0i64; m as usize + 1];
    p[0] = -1;
    p[m as usize] = 1;
    for d in 1..m {
        if m.is_multiple_of(d) {
            p = poly_div_exact(&p, &cyclotomic_polynomial(d));
        }
    }
    p
}

impl Ring {
    fn build(m: u32) -> Ring {
        assert!(m >= 1, "conductor must be positive");
        let phi_poly = cyclotomic_polynomial(m);
        let phi = phi_poly.len() - 1;
        let mut rows = Vec::with_capacity(m as usize);
        let mut cur = vec![0i64; phi];
        cur[0] = 1;
        for _ in 0..m {
            rows.push(cur.clone());
            // multiply by x and reduce
            let top = cur[phi - 1];
            for j in (1..phi).rev() {
                cur[j] = cur[j - 1];
            }
            cur[0] = 0;
            if top != 0 {
                for j in 0..phi {
                    cur[j] -= top * phi_poly[j];
                }
            }
        }
        let roots = (0..m)
            .map(|k| Complex64::from_polar(1.0, 2.0 * PI * k as f64 / m as f64))
            .collect();
        Ring { m, phi, rows, roots }
    }

    pub fn conductor(&self) -> u32 {
        self.m
    }

    pub fn degree(&self) -> usize {
        self.phi
    }

    /// Coefficients of `ζ^k` in the power basis.
    pub fn power_row(&self, k: usize) -> &[i64] {
        &self.rows[k % self.m as usize]
    }
}

/// Shared ring data for conductor `m`.
pub fn ring(m: u32) -> Arc<Ring> {
    static CACHE: OnceLock<Mutex<HashMap<u32, Arc<Ring>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut g = cache.lock().expect("ring cache poisoned");
    g.entry(m).or_insert_with(|| Arc::new(Ring::build(m))).clone()
}

/// An exact element of `Q(ζ_m)`.
#[derive(Clone)]
pub struct Cyclo {
    ring: Arc<Ring>,
    num: Vec<BigInt>,
    den: BigInt,
}

impl PartialEq for Cyclo {
    fn eq(&self, other: &Self) -> bool {
        if self.ring.m == other.ring.m {
            return self.den == other.den && self.num == other.num;
        }
        let m = lcm(self.ring.m, other.ring.m);
        let a = self.promote(m);
        let b = other.promote(m);
        a.den == b.den && a.num == b.num
    }
}

impl Eq for Cyclo {}

fn lcm(a: u32, b: u32) -> u32 {
    a / a.gcd(&b) * b
}

impl Cyclo {
    pub fn zero(m: u32) -> Cyclo {
        let ring = ring(m);
        let phi = ring.phi;
        Cyclo { ring, num: vec![BigInt::zero(); phi], den: BigInt::one() }
    }

    pub fn one(m: u32) -> Cyclo {
        Cyclo::from_int(m, 1)
    }

    pub fn from_int(m: u32, v: i64) -> Cyclo {
        let mut z = Cyclo::zero(m);
        z.num[0] = BigInt::from(v);
        z.normalize();
        z
    }

    pub fn from_rational(m: u32, v: &BigRational) -> Cyclo {
        let mut z = Cyclo::zero(m);
        z.num[0] = v.numer().clone();
        z.den = v.denom().clone();
        z.normalize();
        z
    }

    /// `ζ_m^k` for any integer `k`.
    pub fn zeta_pow(m: u32, k: i64) -> Cyclo {
        let ring = ring(m);
        let e = k.rem_euclid(m as i64) as usize;
        let num = ring.rows[e].iter().map(|&c| BigInt::from(c)).collect();
        Cyclo { ring, num, den: BigInt::one() }
    }

    /// Build from power-basis coefficients of arbitrary length; terms of
    /// degree `>= φ(m)` are reduced.
    pub fn from_coeffs(m: u32, coeffs: &[BigRational]) -> Cyclo {
        let ring = ring(m);
        let mut den = BigInt::one();
        for c in coeffs {
            den = den.lcm(c.denom());
        }
        let mut num = vec![BigInt::zero(); ring.phi];
        for (k, c) in coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let scaled = c.numer() * (&den / c.denom());
            let row = &ring.rows[k % ring.m as usize];
            for (j, &r) in row.iter().enumerate() {
                if r != 0 {
                    num[j] += &scaled * r;
                }
            }
        }
        let mut z = Cyclo { ring, num, den };
        z.normalize();
        z
    }

    pub fn conductor(&self) -> u32 {
        self.ring.m
    }

    /// Power-basis coefficients as reduced rationals.
    pub fn coeffs(&self) -> Vec<BigRational> {
        self.num
            .iter()
            .map(|n| BigRational::new(n.clone(), self.den.clone()))
            .collect()
    }

    /// Numerator coefficients and denominator, when all fit in an `i64`.
    pub fn to_i64_parts(&self) -> Option<(Vec<i64>, i64)> {
        let num = self.num.iter().map(|n| n.to_i64()).collect::<Option<Vec<_>>>()?;
        Some((num, self.den.to_i64()?))
    }

    /// Inverse of [`Cyclo::to_i64_parts`].
    pub fn from_i64_parts(m: u32, num: &[i64], den: i64) -> Cyclo {
        let ring = ring(m);
        assert!(den != 0 && num.len() <= ring.phi);
        let mut v: Vec<BigInt> = num.iter().map(|&x| BigInt::from(x)).collect();
        v.resize(ring.phi, BigInt::zero());
        let mut z = Cyclo { ring, num: v, den: BigInt::from(den) };
        z.normalize();
        z
    }

    pub fn is_zero(&self) -> bool {
        self.num.iter().all(|n| n.is_zero())
    }

    pub fn is_one(&self) -> bool {
        self.den.is_one() && self.num[0].is_one() && self.num[1..].iter().all(|n| n.is_zero())
    }

    /// Rational value if the element lies in `Q`.
    pub fn as_rational(&self) -> Option<BigRational> {
        if self.num[1..].iter().all(|n| n.is_zero()) {
            Some(BigRational::new(self.num[0].clone(), self.den.clone()))
        } else {
            None
        }
    }

    fn normalize(&mut self) {
        if self.is_zero() {
            self.den = BigInt::one();
            return;
        }
        let mut g = self.den.clone();
        for n in &self.num {
            if g.is_one() {
                break;
            }
            if !n.is_zero() {
                g = g.gcd(n);
            }
        }
        if !g.is_one() {
            for n in &mut self.num {
                *n /= &g;
            }
            self.den /= &g;
        }
        if self.den.is_negative() {
            self.den = -std::mem::take(&mut self.den);
            for n in &mut self.num {
                *n = -std::mem::take(n);
            }
        }
    }

    /// Re-express in a larger conductor `m` with `self.conductor() | m`.
    pub fn promote(&self, m: u32) -> Cyclo {
        if m == self.ring.m {
            return self.clone();
        }
        assert!(m.is_multiple_of(self.ring.m), "conductor {} does not divide {}", self.ring.m, m);
        let step = (m / self.ring.m) as usize;
        let target = ring(m);
        let mut num = vec![BigInt::zero(); target.phi];
        for (k, c) in self.num.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let row = &target.rows[(k * step) % m as usize];
            for (j, &r) in row.iter().enumerate() {
                if r != 0 {
                    num[j] += c * r;
                }
            }
        }
        let mut z = Cyclo { ring: target, num, den: self.den.clone() };
        z.normalize();
        z
    }

    fn align<'a>(a: &'a Cyclo, b: &'a Cyclo) -> (std::borrow::Cow<'a, Cyclo>, std::borrow::Cow<'a, Cyclo>) {
        use std::borrow::Cow;
        if a.ring.m == b.ring.m {
            (Cow::Borrowed(a), Cow::Borrowed(b))
        } else {
            let m = lcm(a.ring.m, b.ring.m);
            (Cow::Owned(a.promote(m)), Cow::Owned(b.promote(m)))
        }
    }

    fn add_impl(&self, other: &Cyclo, sign: i64) -> Cyclo {
        let (a, b) = Cyclo::align(self, other);
        let (a, b) = (a.as_ref(), b.as_ref());
        let num: Vec<BigInt> = if a.den == b.den {
            a.num
                .iter()
                .zip(&b.num)
                .map(|(x, y)| if sign > 0 { x + y } else { x - y })
                .collect()
        } else {
            a.num
                .iter()
                .zip(&b.num)
                .map(|(x, y)| {
                    let l = x * &b.den;
                    let r = y * &a.den;
                    if sign > 0 {
                        l + r
                    } else {
                        l - r
                    }
                })
                .collect()
        };
        let den = if a.den == b.den { a.den.clone() } else { &a.den * &b.den };
        let mut z = Cyclo { ring: a.ring.clone(), num, den };
        z.normalize();
        z
    }

    fn mul_impl(&self, other: &Cyclo) -> Cyclo {
        let (a, b) = Cyclo::align(self, other);
        let (a, b) = (a.as_ref(), b.as_ref());
        let phi = a.ring.phi;
        let mut wide = vec![BigInt::zero(); 2 * phi - 1];
        for (i, x) in a.num.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in b.num.iter().enumerate() {
                if !y.is_zero() {
                    wide[i + j] += x * y;
                }
            }
        }
        let mut num: Vec<BigInt> = wide.drain(..phi).collect();
        for (k, c) in wide.into_iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let row = &a.ring.rows[(k + phi) % a.ring.m as usize];
            for (j, &r) in row.iter().enumerate() {
                if r != 0 {
                    num[j] += &c * r;
                }
            }
        }
        let mut z = Cyclo { ring: a.ring.clone(), num, den: &a.den * &b.den };
        z.normalize();
        z
    }

    pub fn scale(&self, k: i64) -> Cyclo {
        let mut z = self.clone();
        for n in &mut z.num {
            *n *= k;
        }
        z.normalize();
        z
    }

    /// Galois conjugation `ζ ↦ ζ^{-1}`; equals complex conjugation under the
    /// standard embedding.
    pub fn conj(&self) -> Cyclo {
        let ring = &self.ring;
        let m = ring.m as usize;
        let mut num = vec![BigInt::zero(); ring.phi];
        for (k, c) in self.num.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let row = &ring.rows[(m - k) % m];
            for (j, &r) in row.iter().enumerate() {
                if r != 0 {
                    num[j] += c * r;
                }
            }
        }
        let mut z = Cyclo { ring: ring.clone(), num, den: self.den.clone() };
        z.normalize();
        z
    }

    /// Multiplicative inverse, `None` for zero.
    pub fn inv(&self) -> Option<Cyclo> {
        if self.is_zero() {
            return None;
        }
        let phi = self.ring.phi;
        let m = self.ring.m;
        // Columns of the multiplication-by-self matrix are self * ζ^j.
        let mut mat: Vec<Vec<BigRational>> = vec![vec![BigRational::zero(); phi + 1]; phi];
        for j in 0..phi {
            let col = self.mul_impl(&Cyclo::zeta_pow(m, j as i64));
            for (i, c) in col.coeffs().into_iter().enumerate() {
                mat[i][j] = c;
            }
        }
        mat[0][phi] = BigRational::one();
        for col in 0..phi {
            let piv = (col..phi).find(|&r| !mat[r][col].is_zero())?;
            mat.swap(col, piv);
            let p = mat[col][col].clone();
            for v in mat[col].iter_mut() {
                *v /= &p;
            }
            for r in 0..phi {
                if r != col && !mat[r][col].is_zero() {
                    let f = mat[r][col].clone();
                    for c in col..=phi {
                        let t = &mat[col][c] * &f;
                        mat[r][c] -= t;
                    }
                }
            }
        }
        let sol: Vec<BigRational> = mat.into_iter().map(|row| row[phi].clone()).collect();
        Some(Cyclo::from_coeffs(m, &sol))
    }

    /// Integer power; negative exponents need an invertible (nonzero) base.
    pub fn pow(&self, e: i64) -> Cyclo {
        let base = if e < 0 {
            self.inv().expect("negative power of zero")
        } else {
            self.clone()
        };
        let mut k = e.unsigned_abs();
        let mut acc = Cyclo::one(self.ring.m);
        let mut sq = base;
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul_impl(&sq);
            }
            k >>= 1;
            if k > 0 {
                sq = sq.mul_impl(&sq);
            }
        }
        acc
    }

    pub fn to_complex(&self) -> ComplexF {
        let den = big_to_f64(&self.den);
        let mut acc = Complex64::new(0.0, 0.0);
        for (k, n) in self.num.iter().enumerate() {
            if !n.is_zero() {
                acc += self.ring.roots[k] * (big_to_f64(n) / den);
            }
        }
        acc
    }

    /// Serialized form: conductor plus `"n/d"` strings in power-basis order.
    pub fn to_serial(&self) -> CycloSerial {
        CycloSerial {
            conductor: self.ring.m,
            coeffs: self.coeffs().iter().map(|c| format!("{}/{}", c.numer(), c.denom())).collect(),
        }
    }

    pub fn from_serial(s: &CycloSerial) -> Result<Cyclo, ScalarError> {
        if s.conductor == 0 || s.conductor > MAX_SERIAL_CONDUCTOR {
            return Err(ScalarError::Malformed(format!("conductor {}", s.conductor)));
        }
        let mut cs = Vec::with_capacity(s.coeffs.len());
        for t in &s.coeffs {
            let (n, d) = t.split_once('/').unwrap_or((t.as_str(), "1"));
            let n: BigInt = n.trim().parse().map_err(|_| ScalarError::Malformed(t.clone()))?;
            let d: BigInt = d.trim().parse().map_err(|_| ScalarError::Malformed(t.clone()))?;
            if d.is_zero() {
                return Err(ScalarError::Malformed(t.clone()));
            }
            cs.push(BigRational::new(n, d));
        }
        Ok(Cyclo::from_coeffs(s.conductor, &cs))
    }
}

fn big_to_f64(x: &BigInt) -> f64 {
    x.to_f64().unwrap_or_else(|| if x.is_negative() { f64::NEG_INFINITY } else { f64::INFINITY })
}

/// Largest conductor accepted when decoding.
pub const MAX_SERIAL_CONDUCTOR: u32 = 1 << 10;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CycloSerial {
    pub conductor: u32,
    pub coeffs: Vec<String>,
}

macro_rules! binop {
    ($tr:ident, $f:ident, $body:expr) => {
        impl $tr<&Cyclo> for &Cyclo {
            type Output = Cyclo;
            fn $f(self, rhs: &Cyclo) -> Cyclo {
                $body(self, rhs)
            }
        }
        impl $tr<Cyclo> for Cyclo {
            type Output = Cyclo;
            fn $f(self, rhs: Cyclo) -> Cyclo {
                $body(&self, &rhs)
            }
        }
        impl $tr<&Cyclo> for Cyclo {
            type Output = Cyclo;
            fn $f(self, rhs: &Cyclo) -> Cyclo {
                $body(&self, rhs)
            }
        }
        impl $tr<Cyclo> for &Cyclo {
            type Output = Cyclo;
            fn $f(self, rhs: Cyclo) -> Cyclo {
                $body(self, &rhs)
            }
        }
    };
}

binop!(Add, add, |a: &Cyclo, b: &Cyclo| a.add_impl(b, 1));
binop!(Sub, sub, |a: &Cyclo, b: &Cyclo| a.add_impl(b, -1));
binop!(Mul, mul, |a: &Cyclo, b: &Cyclo| a.mul_impl(b));

impl AddAssign<&Cyclo> for Cyclo {
    fn add_assign(&mut self, rhs: &Cyclo) {
        *self = self.add_impl(rhs, 1);
    }
}

impl SubAssign<&Cyclo> for Cyclo {
    fn sub_assign(&mut self, rhs: &Cyclo) {
        *self = self.add_impl(rhs, -1);
    }
}

impl MulAssign<&Cyclo> for Cyclo {
    fn mul_assign(&mut self, rhs: &Cyclo) {
        *self = self.mul_impl(rhs);
    }
}

impl Neg for &Cyclo {
    type Output = Cyclo;
    fn neg(self) -> Cyclo {
        let mut z = self.clone();
        for n in &mut z.num {
            *n = -std::mem::take(n);
        }
        z
    }
}

impl Neg for Cyclo {
    type Output = Cyclo;
    fn neg(self) -> Cyclo {
        -&self
    }
}

impl fmt::Debug for Cyclo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl fmt::Display for Cyclo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut terms = Vec::new();
        for (k, c) in self.coeffs().iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            terms.push(match k {
                0 => format!("{}", c),
                1 => format!("({})z", c),
                _ => format!("({})z^{}", c, k),
            });
        }
        if terms.is_empty() {
            terms.push("0".into());
        }
        write!(f, "[{}] z=e^(2pi i/{})", terms.join(" + "), self.ring.m)
    }
}

/// Principal square root of a unit-modulus complex number, argument in
/// `(-π/2, π/2]`.
pub fn sqrt_unit(u: ComplexF) -> Result<ComplexF, ScalarError> {
    if !u.re.is_finite() || !u.im.is_finite() || (u.norm() - 1.0).abs() > 1e-9 {
        return Err(ScalarError::NotUnitModulus(format!("{}", u)));
    }
    let mut arg = u.im.atan2(u.re);
    if arg <= -PI + 1e-15 {
        arg = PI;
    }
    Ok(Complex64::from_polar(1.0, arg / 2.0))
}
