//! Exact arithmetic in GF(p) and GF(2^m).
//!
//! A [`Field`] is a cheap, clonable handle describing one finite field. Symbols
//! are plain `u32` values in `[0, q)`; for GF(2^m) the value is the bit pattern
//! of the polynomial coefficients with the least significant bit holding the
//! constant term, so GF(4) with `g(x) = x^2 + x + 1` has elements `0..=3` where
//! `2 = x` and `3 = x + 1`.
//!
//! [`FieldElement`] pairs a value with its field for the checked, spec-level
//! operations; the matrix code works on raw symbols through the `Field`
//! methods for speed.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use thiserror::Error;

/// Largest supported extension degree for GF(2^m).
pub const MAX_BINARY_DEGREE: u32 = 16;
/// Primes must stay below this bound so that products fit in `u32`.
pub const MAX_PRIME: u32 = 1 << 16;
/// Fields up to this order get precomputed multiplication and inverse tables.
const TABLE_LIMIT: u32 = 256;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FieldError {
    #[error("{0} is not prime")]
    NotPrime(u32),
    #[error("prime {0} is outside the supported range (2..{MAX_PRIME})")]
    PrimeOutOfRange(u32),
    #[error("extension degree {0} is outside the supported range (1..={MAX_BINARY_DEGREE})")]
    DegreeOutOfRange(u32),
    #[error("generator polynomial {poly:#b} does not have degree {degree}")]
    WrongDegree { poly: u32, degree: u32 },
    #[error("generator polynomial {0:#b} is reducible over GF(2)")]
    Reducible(u32),
    #[error("no supported finite field has order {0}")]
    UnsupportedOrder(u32),
    #[error("field mismatch: {left} vs {right}")]
    Mismatch { left: String, right: String },
    #[error("division by zero")]
    DivisionByZero,
    #[error("value {value} is not an element of a field of order {order}")]
    OutOfRange { value: u32, order: u32 },
    #[error("invalid field descriptor {0:?}")]
    BadDescriptor(String),
    #[error("inverse table disagrees with extended Euclid at {0}")]
    InverseTable(u32),
}

/// How the field is defined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FieldKind {
    /// Integers modulo a prime `p`.
    Prime { p: u32 },
    /// Polynomials over GF(2) modulo an irreducible `poly` of degree `m`
    /// (bit `i` of `poly` is the coefficient of `x^i`, leading term included).
    Binary { m: u32, poly: u32 },
}

struct Tables {
    mul: Vec<u16>,
    inv: Vec<u16>,
}

struct Inner {
    kind: FieldKind,
    order: u32,
    tables: Option<Tables>,
}

/// A finite field GF(p) or GF(2^m).
#[derive(Clone)]
pub struct Field {
    inner: Arc<Inner>,
}

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner) || self.inner.kind == other.inner.kind
    }
}

impl Eq for Field {}

impl std::hash::Hash for Field {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.inner.kind.hash(state)
    }
}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Field({})", self.descriptor())
    }
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.descriptor())
    }
}

pub fn is_prime(n: u32) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u32;
    while d.saturating_mul(d) <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

fn poly_degree(p: u32) -> Option<u32> {
    if p == 0 {
        None
    } else {
        Some(31 - p.leading_zeros())
    }
}

/// Remainder of `a` divided by `b` over GF(2)[x].
fn poly_rem(mut a: u32, b: u32) -> u32 {
    let db = poly_degree(b).expect("nonzero divisor");
    while let Some(da) = poly_degree(a) {
        if da < db {
            break;
        }
        a ^= b << (da - db);
    }
    a
}

/// Exhaustive factor search: no polynomial of degree `1..=m/2` divides `poly`.
pub fn is_irreducible(poly: u32) -> bool {
    let Some(m) = poly_degree(poly) else {
        return false;
    };
    if m == 0 {
        return false;
    }
    for deg in 1..=m / 2 {
        for low in 0..(1u32 << deg) {
            if poly_rem(poly, (1 << deg) | low) == 0 {
                return false;
            }
        }
    }
    true
}

/// Smallest irreducible polynomial of degree `m` in numeric order.
pub fn default_polynomial(m: u32) -> Result<u32, FieldError> {
    if m == 0 || m > MAX_BINARY_DEGREE {
        return Err(FieldError::DegreeOutOfRange(m));
    }
    ((1u32 << m)..(1u32 << (m + 1)))
        .find(|&p| is_irreducible(p))
        .ok_or(FieldError::DegreeOutOfRange(m))
}

fn binary_mul_raw(mut a: u32, mut b: u32, m: u32, poly: u32) -> u32 {
    let mut acc = 0u32;
    while b != 0 {
        if b & 1 == 1 {
            acc ^= a;
        }
        b >>= 1;
        a <<= 1;
        if a >> m & 1 == 1 {
            a ^= poly;
        }
    }
    acc
}

fn prime_inv_euclid(a: u32, p: u32) -> u32 {
    let (mut r0, mut r1) = (p as i64, a as i64);
    let (mut t0, mut t1) = (0i64, 1i64);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    t0.rem_euclid(p as i64) as u32
}

/// Carry-less product without reduction.
fn clmul(a: u32, b: u32) -> u32 {
    let mut acc = 0u32;
    for i in 0..32 {
        if b >> i & 1 == 1 {
            acc ^= a << i;
        }
    }
    acc
}

fn binary_inv_euclid(a: u32, poly: u32) -> u32 {
    // invariants: r0 = t0 * a (mod poly), r1 = t1 * a (mod poly)
    let (mut r0, mut r1) = (poly, a);
    let (mut t0, mut t1) = (0u32, 1u32);
    while r1 != 0 {
        let mut q = 0u32;
        let mut r = r0;
        let d1 = poly_degree(r1).unwrap();
        while let Some(dr) = poly_degree(r) {
            if dr < d1 {
                break;
            }
            q |= 1 << (dr - d1);
            r ^= r1 << (dr - d1);
        }
        (r0, r1) = (r1, r);
        let next = t0 ^ clmul(q, t1);
        (t0, t1) = (t1, next);
    }
    poly_rem(t0, poly)
}

impl Field {
    fn build(kind: FieldKind, order: u32) -> Result<Self, FieldError> {
        let mut field = Field {
            inner: Arc::new(Inner {
                kind,
                order,
                tables: None,
            }),
        };
        if order <= TABLE_LIMIT {
            let q = order as usize;
            let mut mul = vec![0u16; q * q];
            for a in 0..order {
                for b in 0..order {
                    mul[a as usize * q + b as usize] = field.mul_direct(a, b) as u16;
                }
            }
            let mut inv = vec![0u16; q];
            for a in 1..order {
                // a^(q-2) cross-checked against the Euclid path
                let by_pow = field.pow(a, u64::from(order) - 2);
                if by_pow != field.inv_euclid(a) {
                    return Err(FieldError::InverseTable(a));
                }
                inv[a as usize] = by_pow as u16;
            }
            field = Field {
                inner: Arc::new(Inner {
                    kind,
                    order,
                    tables: Some(Tables { mul, inv }),
                }),
            };
        }
        Ok(field)
    }

    /// GF(p) for a prime `p`.
    pub fn prime(p: u32) -> Result<Self, FieldError> {
        if !(2..MAX_PRIME).contains(&p) {
            return Err(FieldError::PrimeOutOfRange(p));
        }
        if !is_prime(p) {
            return Err(FieldError::NotPrime(p));
        }
        Self::build(FieldKind::Prime { p }, p)
    }

    /// GF(2^m) defined by `poly` (leading term included).
    pub fn binary(m: u32, poly: u32) -> Result<Self, FieldError> {
        if m == 0 || m > MAX_BINARY_DEGREE {
            return Err(FieldError::DegreeOutOfRange(m));
        }
        if poly_degree(poly) != Some(m) {
            return Err(FieldError::WrongDegree { poly, degree: m });
        }
        if !is_irreducible(poly) {
            return Err(FieldError::Reducible(poly));
        }
        Self::build(FieldKind::Binary { m, poly }, 1 << m)
    }

    /// GF(2^m) with the smallest irreducible generator polynomial.
    pub fn binary_default(m: u32) -> Result<Self, FieldError> {
        Self::binary(m, default_polynomial(m)?)
    }

    /// The field of order `q`, if `q` is a supported prime or power of two.
    /// GF(2) is treated as the prime field.
    pub fn with_order(q: u32) -> Result<Self, FieldError> {
        if is_prime(q) {
            return Self::prime(q);
        }
        if q.is_power_of_two() && q > 2 {
            return Self::binary_default(q.trailing_zeros());
        }
        Err(FieldError::UnsupportedOrder(q))
    }

    /// Whether `q` is an order this module can build.
    pub fn is_supported_order(q: u32) -> bool {
        (is_prime(q) && q < MAX_PRIME)
            || (q.is_power_of_two() && q > 2 && q.trailing_zeros() <= MAX_BINARY_DEGREE)
    }

    pub fn kind(&self) -> FieldKind {
        self.inner.kind
    }

    pub fn order(&self) -> u32 {
        self.inner.order
    }

    pub fn characteristic(&self) -> u32 {
        match self.inner.kind {
            FieldKind::Prime { p } => p,
            FieldKind::Binary { .. } => 2,
        }
    }

    /// Bits needed to hold one symbol.
    pub fn symbol_bits(&self) -> u32 {
        32 - (self.order() - 1).leading_zeros()
    }

    /// Textual descriptor: `gf(5)` or `gf(4,0b111)`.
    pub fn descriptor(&self) -> String {
        match self.inner.kind {
            FieldKind::Prime { p } => format!("gf({p})"),
            FieldKind::Binary { m, poly } => format!("gf({},{:#b})", 1u32 << m, poly),
        }
    }

    pub fn contains(&self, value: u32) -> bool {
        value < self.order()
    }

    pub fn element(&self, value: u32) -> Result<FieldElement, FieldError> {
        if !self.contains(value) {
            return Err(FieldError::OutOfRange {
                value,
                order: self.order(),
            });
        }
        Ok(FieldElement {
            value,
            field: self.clone(),
        })
    }

    /// All elements `0..q` in canonical order.
    pub fn elements(&self) -> impl Iterator<Item = u32> {
        0..self.order()
    }

    #[inline]
    pub fn add(&self, a: u32, b: u32) -> u32 {
        debug_assert!(a < self.order() && b < self.order());
        match self.inner.kind {
            FieldKind::Prime { p } => {
                let s = a + b;
                if s >= p {
                    s - p
                } else {
                    s
                }
            }
            FieldKind::Binary { .. } => a ^ b,
        }
    }

    #[inline]
    pub fn neg(&self, a: u32) -> u32 {
        match self.inner.kind {
            FieldKind::Prime { p } => {
                if a == 0 {
                    0
                } else {
                    p - a
                }
            }
            FieldKind::Binary { .. } => a,
        }
    }

    #[inline]
    pub fn sub(&self, a: u32, b: u32) -> u32 {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: u32, b: u32) -> u32 {
        debug_assert!(a < self.order() && b < self.order());
        match &self.inner.tables {
            Some(t) => t.mul[a as usize * self.order() as usize + b as usize] as u32,
            None => self.mul_direct(a, b),
        }
    }

    fn mul_direct(&self, a: u32, b: u32) -> u32 {
        match self.inner.kind {
            FieldKind::Prime { p } => ((u64::from(a) * u64::from(b)) % u64::from(p)) as u32,
            FieldKind::Binary { m, poly } => binary_mul_raw(a, b, m, poly),
        }
    }

    fn inv_euclid(&self, a: u32) -> u32 {
        match self.inner.kind {
            FieldKind::Prime { p } => prime_inv_euclid(a, p),
            FieldKind::Binary { poly, .. } => binary_inv_euclid(a, poly),
        }
    }

    /// Multiplicative inverse; `None` for zero.
    #[inline]
    pub fn inv(&self, a: u32) -> Option<u32> {
        if a == 0 {
            return None;
        }
        Some(match &self.inner.tables {
            Some(t) => t.inv[a as usize] as u32,
            None => self.inv_euclid(a),
        })
    }

    pub fn div(&self, a: u32, b: u32) -> Option<u32> {
        self.inv(b).map(|ib| self.mul(a, ib))
    }

    /// Square-and-multiply.
    pub fn pow(&self, base: u32, mut exp: u64) -> u32 {
        let mut acc = 1u32;
        let mut b = base;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul_direct(acc, b);
            }
            b = self.mul_direct(b, b);
            exp >>= 1;
        }
        acc
    }

    /// Smallest `kappa` in scan order `1, 2, ...` with `kappa != 0` and
    /// `1 - kappa^2 != 0`. `None` for GF(2) and GF(3).
    pub fn default_kappa(&self) -> Option<u32> {
        (1..self.order()).find(|&k| self.kappa_admissible(k))
    }

    pub fn kappa_admissible(&self, kappa: u32) -> bool {
        kappa != 0 && kappa < self.order() && self.sub(1, self.mul(kappa, kappa)) != 0
    }
}

impl FromStr for Field {
    type Err = FieldError;

    /// Accepts `gf(p)`, `gf(2^m)` shorthand such as `gf(8)` (smallest
    /// irreducible polynomial), and `gf(q,0b...)` / `gf(q,0x...)` / `gf(q,N)`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || FieldError::BadDescriptor(s.to_string());
        let body = s
            .trim()
            .strip_prefix("gf(")
            .or_else(|| s.trim().strip_prefix("GF("))
            .and_then(|r| r.strip_suffix(')'))
            .ok_or_else(bad)?;
        let mut parts = body.split(',').map(str::trim);
        let q: u32 = parts.next().ok_or_else(bad)?.parse().map_err(|_| bad())?;
        let poly = parts.next().map(parse_int).transpose().map_err(|_| bad())?;
        if parts.next().is_some() {
            return Err(bad());
        }
        match poly {
            None => Field::with_order(q),
            Some(poly) => {
                if !q.is_power_of_two() || q < 4 {
                    return Err(bad());
                }
                Field::binary(q.trailing_zeros(), poly)
            }
        }
    }
}

fn parse_int(s: &str) -> Result<u32, std::num::ParseIntError> {
    if let Some(b) = s.strip_prefix("0b") {
        u32::from_str_radix(b, 2)
    } else if let Some(h) = s.strip_prefix("0x") {
        u32::from_str_radix(h, 16)
    } else {
        s.parse()
    }
}

/// A value tied to its field.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct FieldElement {
    value: u32,
    field: Field,
}

impl fmt::Debug for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}@{}", self.value, self.field.descriptor())
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

impl FieldElement {
    pub fn value(&self) -> u32 {
        self.value
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn is_zero(&self) -> bool {
        self.value == 0
    }

    fn same_field(&self, other: &Self) -> Result<(), FieldError> {
        if self.field != other.field {
            return Err(FieldError::Mismatch {
                left: self.field.descriptor(),
                right: other.field.descriptor(),
            });
        }
        Ok(())
    }

    fn with(&self, value: u32) -> Self {
        FieldElement {
            value,
            field: self.field.clone(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self, FieldError> {
        self.same_field(other)?;
        Ok(self.with(self.field.add(self.value, other.value)))
    }

    pub fn sub(&self, other: &Self) -> Result<Self, FieldError> {
        self.same_field(other)?;
        Ok(self.with(self.field.sub(self.value, other.value)))
    }

    pub fn mul(&self, other: &Self) -> Result<Self, FieldError> {
        self.same_field(other)?;
        Ok(self.with(self.field.mul(self.value, other.value)))
    }

    pub fn div(&self, other: &Self) -> Result<Self, FieldError> {
        self.same_field(other)?;
        let inv = other.inv()?;
        Ok(self.with(self.field.mul(self.value, inv.value)))
    }

    pub fn neg(&self) -> Self {
        self.with(self.field.neg(self.value))
    }

    pub fn inv(&self) -> Result<Self, FieldError> {
        self.field
            .inv(self.value)
            .map(|v| self.with(v))
            .ok_or(FieldError::DivisionByZero)
    }

    pub fn pow(&self, exp: u64) -> Self {
        self.with(self.field.pow(self.value, exp))
    }
}
