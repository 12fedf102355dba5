//! Prime-field arithmetic and univariate polynomials over it.
//!
//! Elements carry their modulus so that they can be used with the ordinary
//! arithmetic operators. Products are reduced through `u128`, which keeps the
//! arithmetic exact for any modulus below 2^63.

use std::collections::HashSet;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, MulAssign, Neg, Sub, SubAssign};

use rand::Rng;

use crate::error::{Error, Result};

/// 2^31 - 1.
pub const DEFAULT_MODULUS: u64 = 2_147_483_647;

/// The field F_p, used as a factory for elements.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PrimeField {
    modulus: u64,
}

impl Default for PrimeField {
    fn default() -> Self {
        Self {
            modulus: DEFAULT_MODULUS,
        }
    }
}

impl PrimeField {
    pub fn new(modulus: u64) -> Result<Self> {
        if !(3..1 << 63).contains(&modulus) || !is_prime(modulus) {
            return Err(Error::BadModulus(modulus));
        }
        Ok(Self { modulus })
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn elem(&self, value: u64) -> Fp {
        Fp {
            value: value % self.modulus,
            modulus: self.modulus,
        }
    }

    /// Maps a signed integer to its residue, so `from_i64(-1) == p - 1`.
    pub fn from_i64(&self, value: i64) -> Fp {
        let v = value.rem_euclid(self.modulus as i64) as u64;
        self.elem(v)
    }

    pub fn zero(&self) -> Fp {
        self.elem(0)
    }

    pub fn one(&self) -> Fp {
        self.elem(1)
    }

    pub fn random<R: Rng + ?Sized>(&self, rng: &mut R) -> Fp {
        self.elem(rng.gen_range(0..self.modulus))
    }
}

/// An element of F_p.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Fp {
    value: u64,
    modulus: u64,
}

impl Fp {
    pub fn value(self) -> u64 {
        self.value
    }

    pub fn modulus(self) -> u64 {
        self.modulus
    }

    pub fn field(self) -> PrimeField {
        PrimeField {
            modulus: self.modulus,
        }
    }

    pub fn is_zero(self) -> bool {
        self.value == 0
    }

    pub fn inv(self) -> Result<Fp> {
        fp_inv(self)
    }

    pub fn pow(self, mut exp: u64) -> Fp {
        let mut base = self;
        let mut acc = self.field().one();
        while exp > 0 {
            if exp & 1 == 1 {
                acc *= base;
            }
            base *= base;
            exp >>= 1;
        }
        acc
    }

    #[inline]
    fn check(self, other: Fp) {
        debug_assert_eq!(self.modulus, other.modulus, "field modulus mismatch");
    }
}

impl fmt::Debug for Fp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}_{}", self.value, self.modulus)
    }
}

impl fmt::Display for Fp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

impl Add for Fp {
    type Output = Fp;

    fn add(self, rhs: Fp) -> Fp {
        self.check(rhs);
        let s = self.value + rhs.value;
        let value = if s >= self.modulus {
            s - self.modulus
        } else {
            s
        };
        Fp { value, ..self }
    }
}

impl Sub for Fp {
    type Output = Fp;

    fn sub(self, rhs: Fp) -> Fp {
        self.check(rhs);
        let value = if self.value >= rhs.value {
            self.value - rhs.value
        } else {
            self.modulus - (rhs.value - self.value)
        };
        Fp { value, ..self }
    }
}

impl Mul for Fp {
    type Output = Fp;

    fn mul(self, rhs: Fp) -> Fp {
        self.check(rhs);
        let value = (self.value as u128 * rhs.value as u128 % self.modulus as u128) as u64;
        Fp { value, ..self }
    }
}

impl Neg for Fp {
    type Output = Fp;

    fn neg(self) -> Fp {
        let value = if self.value == 0 {
            0
        } else {
            self.modulus - self.value
        };
        Fp { value, ..self }
    }
}

impl AddAssign for Fp {
    fn add_assign(&mut self, rhs: Fp) {
        *self = *self + rhs;
    }
}

impl SubAssign for Fp {
    fn sub_assign(&mut self, rhs: Fp) {
        *self = *self - rhs;
    }
}

impl MulAssign for Fp {
    fn mul_assign(&mut self, rhs: Fp) {
        *self = *self * rhs;
    }
}

/// Multiplicative inverse by the extended Euclidean algorithm.
pub fn fp_inv(a: Fp) -> Result<Fp> {
    if a.value == 0 {
        return Err(Error::NoInverse);
    }
    let (mut old_r, mut r) = (a.value as i128, a.modulus as i128);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
    }
    debug_assert_eq!(old_r, 1);
    let value = old_s.rem_euclid(a.modulus as i128) as u64;
    Ok(Fp { value, ..a })
}

/// Deterministic Miller-Rabin; the base set is exact for all 64-bit inputs.
fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    const BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    for &b in &BASES {
        if n.is_multiple_of(b) {
            return n == b;
        }
    }
    let mulmod = |a: u64, b: u64| (a as u128 * b as u128 % n as u128) as u64;
    let powmod = |mut base: u64, mut exp: u64| {
        let mut acc = 1u64;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = mulmod(acc, base);
            }
            base = mulmod(base, base);
            exp >>= 1;
        }
        acc
    };
    let mut d = n - 1;
    let mut s = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        s += 1;
    }
    'witness: for &a in &BASES {
        let mut x = powmod(a, d);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mulmod(x, x);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// A polynomial over F_p, coefficients stored low degree first.
///
/// The coefficient list never ends in a zero, so the zero polynomial has no
/// coefficients at all.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldPolynomial {
    field: PrimeField,
    coeffs: Vec<Fp>,
}

impl FieldPolynomial {
    pub fn new(field: PrimeField, coeffs: Vec<Fp>) -> Self {
        let mut poly = Self { field, coeffs };
        poly.trim();
        poly
    }

    pub fn zero(field: PrimeField) -> Self {
        Self {
            field,
            coeffs: Vec::new(),
        }
    }

    fn trim(&mut self) {
        while self.coeffs.last().is_some_and(|c| c.is_zero()) {
            self.coeffs.pop();
        }
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    pub fn coefficients(&self) -> &[Fp] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, with the zero polynomial reported as degree 0.
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    /// Coefficient of `z^i`, zero past the degree.
    pub fn coeff(&self, i: usize) -> Fp {
        self.coeffs.get(i).copied().unwrap_or(self.field.zero())
    }

    pub fn eval(&self, z: Fp) -> Fp {
        poly_eval(self, z)
    }
}

/// Horner evaluation.
pub fn poly_eval(poly: &FieldPolynomial, z: Fp) -> Fp {
    poly.coeffs
        .iter()
        .rev()
        .fold(poly.field.zero(), |acc, &c| acc * z + c)
}

/// Classical O(m^2) Lagrange interpolation.
///
/// Builds `M(z) = prod (z - x_i)` once, then adds `y_i / M_i(x_i) * M_i(z)`
/// for each node, where `M_i = M / (z - x_i)` comes from synthetic division.
pub fn lagrange_interpolate(points: &[(Fp, Fp)]) -> Result<FieldPolynomial> {
    let Some(&(x0, _)) = points.first() else {
        return Err(Error::NoPoints);
    };
    let field = x0.field();
    let mut seen = HashSet::with_capacity(points.len());
    for &(x, y) in points {
        if x.modulus() != field.modulus() || y.modulus() != field.modulus() {
            return Err(Error::ModulusMismatch(field.modulus(), x.modulus()));
        }
        if !seen.insert(x.value()) {
            return Err(Error::RepeatedNode(x.value()));
        }
    }

    let m = points.len();
    // master[i] is the coefficient of z^i in prod (z - x_j).
    let mut master = vec![field.zero(); m + 1];
    master[0] = field.one();
    for (deg, &(x, _)) in points.iter().enumerate() {
        for i in (1..=deg + 1).rev() {
            master[i] = master[i - 1] - x * master[i];
        }
        master[0] = -(x * master[0]);
    }

    let mut acc = vec![field.zero(); m];
    let mut quotient = vec![field.zero(); m];
    for &(x, y) in points {
        // master / (z - x), highest coefficient first.
        let mut carry = field.zero();
        for i in (0..m).rev() {
            carry = master[i + 1] + carry * x;
            quotient[i] = carry;
        }
        let denom = quotient.iter().rev().fold(field.zero(), |a, &c| a * x + c);
        let scale = y * fp_inv(denom)?;
        for (a, &q) in acc.iter_mut().zip(&quotient) {
            *a += scale * q;
        }
    }
    Ok(FieldPolynomial::new(field, acc))
}
