//! Arithmetic in the binary extension field GF(2^m), 2 <= m <= 32.
//!
//! Elements are stored as their polynomial-basis bit pattern. Addition is XOR;
//! multiplication is carry-less shift-and-add followed by reduction modulo an
//! irreducible polynomial of degree `m`.
//!
//! When no modulus is supplied, [`Field::new`] uses the lexicographically
//! least irreducible polynomial of the requested degree (see
//! [`DEFAULT_MODULI`]), so every computation is reproducible bit-for-bit.

use std::fmt;
use std::ops::{Add, AddAssign, Sub, SubAssign};

use rand::Rng;
use schemars::gen::SchemaGenerator;
use schemars::schema::{InstanceType, Schema, SchemaObject, StringValidation};
use schemars::JsonSchema;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

pub const MIN_DEGREE: u32 = 2;
pub const MAX_DEGREE: u32 = 32;

/// Lexicographically least irreducible polynomial of each degree 2..=32,
/// written as a bit pattern including the leading `z^m` term.
pub const DEFAULT_MODULI: [u64; 31] = [
    0x7,
    0xb,
    0x13,
    0x25,
    0x43,
    0x83,
    0x11b,
    0x203,
    0x409,
    0x805,
    0x1009,
    0x201b,
    0x4021,
    0x8003,
    0x1002b,
    0x20009,
    0x40009,
    0x80027,
    0x100009,
    0x200005,
    0x400003,
    0x800021,
    0x100001b,
    0x2000009,
    0x400001b,
    0x8000027,
    0x10000003,
    0x20000005,
    0x40000003,
    0x80000009,
    0x10000008d,
];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FieldError {
    #[error("field degree m = {0} out of range ({MIN_DEGREE}..={MAX_DEGREE})")]
    DegreeOutOfRange(u32),
    #[error("modulus {modulus:#x} has degree {got:?}, expected {expected}")]
    WrongModulusDegree {
        modulus: u64,
        expected: u32,
        got: Option<u32>,
    },
    #[error("modulus {0:#x} is reducible over GF(2)")]
    ReducibleModulus(u64),
    #[error("value {value:#x} is not an element of GF(2^{m})")]
    NotAnElement { value: u64, m: u32 },
    #[error("division by zero in GF(2^m)")]
    DivisionByZero,
}

/// An element of some GF(2^m). Which field it belongs to is carried by the
/// [`Field`] passed to the multiplicative operations.
#[derive(Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FieldElement(u32);

impl FieldElement {
    pub const ZERO: FieldElement = FieldElement(0);
    pub const ONE: FieldElement = FieldElement(1);

    pub const fn bits(self) -> u32 {
        self.0
    }

    pub const fn is_zero(self) -> bool {
        self.0 == 0
    }

    /// Builds an element without checking it against a field; callers that
    /// accept untrusted values should go through [`Field::element`].
    pub const fn from_bits_unchecked(bits: u32) -> Self {
        FieldElement(bits)
    }

    pub fn to_hex(self) -> String {
        format!("{:#x}", self.0)
    }

    pub fn from_hex(s: &str) -> Option<Self> {
        let digits = s.strip_prefix("0x").or_else(|| s.strip_prefix("0X"))?;
        u32::from_str_radix(digits, 16).ok().map(FieldElement)
    }
}

impl fmt::Debug for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:#x}", self.0)
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:#x}", self.0)
    }
}

impl Add for FieldElement {
    type Output = FieldElement;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn add(self, rhs: FieldElement) -> FieldElement {
        FieldElement(self.0 ^ rhs.0)
    }
}

impl AddAssign for FieldElement {
    #[allow(clippy::suspicious_op_assign_impl)]
    fn add_assign(&mut self, rhs: FieldElement) {
        self.0 ^= rhs.0;
    }
}

// Characteristic 2: subtraction is addition.
impl Sub for FieldElement {
    type Output = FieldElement;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn sub(self, rhs: FieldElement) -> FieldElement {
        FieldElement(self.0 ^ rhs.0)
    }
}

impl SubAssign for FieldElement {
    #[allow(clippy::suspicious_op_assign_impl)]
    fn sub_assign(&mut self, rhs: FieldElement) {
        self.0 ^= rhs.0;
    }
}

impl std::iter::Sum for FieldElement {
    fn sum<I: Iterator<Item = FieldElement>>(iter: I) -> FieldElement {
        iter.fold(FieldElement::ZERO, |acc, x| acc + x)
    }
}

fn hex_string_schema(pattern: &str) -> Schema {
    SchemaObject {
        instance_type: Some(InstanceType::String.into()),
        string: Some(Box::new(StringValidation {
            pattern: Some(pattern.to_string()),
            ..Default::default()
        })),
        ..Default::default()
    }
    .into()
}

impl JsonSchema for FieldElement {
    fn schema_name() -> String {
        "FieldElement".to_string()
    }

    fn json_schema(_: &mut SchemaGenerator) -> Schema {
        hex_string_schema("^0x[0-9a-f]+$")
    }
}

impl Serialize for FieldElement {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_hex())
    }
}

impl<'de> Deserialize<'de> for FieldElement {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        FieldElement::from_hex(&s)
            .ok_or_else(|| serde::de::Error::custom(format!("invalid hex field element {s:?}")))
    }
}

/// GF(2^m) arithmetic context.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "FieldRepr", into = "FieldRepr")]
pub struct Field {
    m: u32,
    modulus: u64,
}

#[derive(Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
#[schemars(rename = "Field")]
struct FieldRepr {
    m: u32,
    modulus: String,
}

impl JsonSchema for Field {
    fn schema_name() -> String {
        "Field".to_string()
    }

    fn json_schema(gen: &mut SchemaGenerator) -> Schema {
        FieldRepr::json_schema(gen)
    }
}

impl From<Field> for FieldRepr {
    fn from(f: Field) -> Self {
        FieldRepr {
            m: f.m,
            modulus: format!("{:#x}", f.modulus),
        }
    }
}

impl TryFrom<FieldRepr> for Field {
    type Error = String;
    fn try_from(r: FieldRepr) -> Result<Self, String> {
        let digits = r.modulus.trim_start_matches("0x");
        let modulus = u64::from_str_radix(digits, 16)
            .map_err(|e| format!("bad modulus {:?}: {e}", r.modulus))?;
        Field::with_modulus(r.m, modulus).map_err(|e| e.to_string())
    }
}

impl Field {
    /// GF(2^m) with the default modulus for `m`.
    pub fn new(m: u32) -> Result<Field, FieldError> {
        check_degree(m)?;
        Ok(Field {
            m,
            modulus: DEFAULT_MODULI[(m - MIN_DEGREE) as usize],
        })
    }

    /// GF(2^m) with an explicit modulus, verified irreducible by trial division.
    pub fn with_modulus(m: u32, modulus: u64) -> Result<Field, FieldError> {
        check_degree(m)?;
        let got = poly_degree(modulus);
        if got != Some(m) {
            return Err(FieldError::WrongModulusDegree {
                modulus,
                expected: m,
                got,
            });
        }
        if !is_irreducible(modulus) {
            return Err(FieldError::ReducibleModulus(modulus));
        }
        Ok(Field { m, modulus })
    }

    pub const fn m(&self) -> u32 {
        self.m
    }

    pub const fn modulus(&self) -> u64 {
        self.modulus
    }

    /// Number of elements, 2^m.
    pub const fn size(&self) -> u64 {
        1u64 << self.m
    }

    fn mask(&self) -> u64 {
        self.size() - 1
    }

    pub fn element(&self, value: u64) -> Result<FieldElement, FieldError> {
        if value > self.mask() {
            return Err(FieldError::NotAnElement { value, m: self.m });
        }
        Ok(FieldElement(value as u32))
    }

    pub fn contains(&self, a: FieldElement) -> bool {
        u64::from(a.0) <= self.mask()
    }

    /// Iterates over every element; intended for small fields.
    pub fn elements(&self) -> impl Iterator<Item = FieldElement> {
        (0..self.size()).map(|v| FieldElement(v as u32))
    }

    pub fn mul(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        let product = clmul(u64::from(a.0), u64::from(b.0));
        FieldElement(reduce(product, self.modulus, self.m) as u32)
    }

    pub fn square(&self, a: FieldElement) -> FieldElement {
        self.mul(a, a)
    }

    pub fn pow(&self, a: FieldElement, mut e: u64) -> FieldElement {
        let mut base = a;
        let mut acc = FieldElement::ONE;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.square(base);
            e >>= 1;
        }
        acc
    }

    /// Multiplicative inverse via the extended Euclidean algorithm over GF(2)[z].
    pub fn inv(&self, a: FieldElement) -> Result<FieldElement, FieldError> {
        if a.is_zero() {
            return Err(FieldError::DivisionByZero);
        }
        // Invariant: g1 * a == u and g2 * a == v (mod modulus).
        let (mut u, mut v) = (u64::from(a.0), self.modulus);
        let (mut g1, mut g2) = (1u64, 0u64);
        while u != 1 {
            if u.ilog2() < v.ilog2() {
                std::mem::swap(&mut u, &mut v);
                std::mem::swap(&mut g1, &mut g2);
            }
            let shift = u.ilog2() - v.ilog2();
            u ^= v << shift;
            g1 ^= g2 << shift;
        }
        Ok(FieldElement(reduce(g1, self.modulus, self.m) as u32))
    }

    pub fn div(&self, a: FieldElement, b: FieldElement) -> Result<FieldElement, FieldError> {
        Ok(self.mul(a, self.inv(b)?))
    }

    /// Uniform draw from all 2^m elements, zero included.
    pub fn random<R: Rng + ?Sized>(&self, rng: &mut R) -> FieldElement {
        FieldElement(rng.gen_range(0..=self.mask()) as u32)
    }

    pub fn random_nonzero<R: Rng + ?Sized>(&self, rng: &mut R) -> FieldElement {
        FieldElement(rng.gen_range(1..=self.mask()) as u32)
    }

    /// Probability that a nonzero polynomial whose terms are products of
    /// three transfer functions vanishes at one uniform point, for paths of at
    /// most `max_distance` edges: `1 - (1 - 3/2^m)^max_distance`.
    pub fn vanishing_bound(&self, max_distance: usize) -> f64 {
        let q = self.size() as f64;
        1.0 - (1.0 - 3.0 / q).powi(max_distance as i32)
    }
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GF(2^{}) mod {:#x}", self.m, self.modulus)
    }
}

fn check_degree(m: u32) -> Result<(), FieldError> {
    if (MIN_DEGREE..=MAX_DEGREE).contains(&m) {
        Ok(())
    } else {
        Err(FieldError::DegreeOutOfRange(m))
    }
}

fn poly_degree(p: u64) -> Option<u32> {
    (p != 0).then(|| p.ilog2())
}

/// Carry-less multiplication of two polynomials of degree < 32.
fn clmul(a: u64, b: u64) -> u64 {
    let mut acc = 0u64;
    let mut a = a;
    let mut b = b;
    while b != 0 {
        if b & 1 == 1 {
            acc ^= a;
        }
        a <<= 1;
        b >>= 1;
    }
    acc
}

/// Remainder of `p` modulo `modulus` (degree `m`).
fn reduce(mut p: u64, modulus: u64, m: u32) -> u64 {
    while p != 0 {
        let d = p.ilog2();
        if d < m {
            break;
        }
        p ^= modulus << (d - m);
    }
    p
}

fn poly_rem(p: u64, divisor: u64) -> u64 {
    reduce(p, divisor, divisor.ilog2())
}

/// Trial division by every polynomial of degree 1..=deg/2.
pub fn is_irreducible(p: u64) -> bool {
    let Some(deg) = poly_degree(p) else {
        return false;
    };
    if deg == 0 {
        return false;
    }
    let half = deg / 2;
    (2u64..(1u64 << (half + 1))).all(|d| poly_rem(p, d) != 0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn gf4() -> (Field, FieldElement) {
        (Field::new(2).unwrap(), FieldElement(0b10))
    }

    #[test]
    fn gf4_default_modulus_is_z2_z_1() {
        let f = Field::new(2).unwrap();
        assert_eq!(f.modulus(), 0b111);
        assert_eq!(f.size(), 4);
    }

    #[test]
    fn degree_out_of_range() {
        assert_eq!(Field::new(1), Err(FieldError::DegreeOutOfRange(1)));
        assert_eq!(Field::new(33), Err(FieldError::DegreeOutOfRange(33)));
    }

    #[test]
    fn explicit_moduli() {
        assert!(Field::with_modulus(3, 0b1011).is_ok());
        // z^3 + z^2 + z + 1 = (z + 1)^3
        assert_eq!(
            Field::with_modulus(3, 0b1111),
            Err(FieldError::ReducibleModulus(0b1111))
        );
        assert!(matches!(
            Field::with_modulus(4, 0b1011),
            Err(FieldError::WrongModulusDegree { .. })
        ));
    }

    #[test]
    fn irreducibility_by_root_and_divisor_search() {
        // Independent check for degree 3: a cubic is reducible iff it has a root in GF(2).
        for p in 0b1000u64..0b10000 {
            let has_root = (p & 1 == 0) || (p.count_ones() % 2 == 0);
            assert_eq!(is_irreducible(p), !has_root, "{p:#b}");
        }
    }

    #[test]
    fn default_moduli_are_least_irreducible() {
        for m in MIN_DEGREE..=16 {
            let chosen = DEFAULT_MODULI[(m - MIN_DEGREE) as usize];
            assert_eq!(poly_degree(chosen), Some(m));
            assert!(is_irreducible(chosen));
            let lo = 1u64 << m;
            assert!((lo..chosen).all(|c| !is_irreducible(c)), "m = {m}");
        }
        for m in 17..=MAX_DEGREE {
            let chosen = DEFAULT_MODULI[(m - MIN_DEGREE) as usize];
            assert!(is_irreducible(chosen), "m = {m}");
        }
    }

    #[test]
    fn gf4_alpha_arithmetic() {
        let (f, alpha) = gf4();
        let alpha2 = f.mul(alpha, alpha);
        assert_eq!(alpha2, alpha + FieldElement::ONE);
        assert_eq!(f.mul(alpha, alpha2), FieldElement::ONE);
        assert_eq!(f.inv(alpha).unwrap(), alpha2);
        assert_eq!(f.inv(FieldElement::ONE).unwrap(), FieldElement::ONE);
        assert_eq!(f.inv(FieldElement::ZERO), Err(FieldError::DivisionByZero));
    }

    #[test]
    fn identity_multiplication() {
        let f = Field::new(8).unwrap();
        for x in f.elements() {
            assert_eq!(f.mul(FieldElement::ONE, x), x);
        }
    }

    #[test]
    fn field_axioms_exhaustive_small() {
        for m in [2, 3, 4] {
            let f = Field::new(m).unwrap();
            for a in f.elements() {
                assert_eq!(a + a, FieldElement::ZERO);
                for b in f.elements() {
                    assert_eq!(f.mul(a, b), f.mul(b, a));
                    for c in f.elements() {
                        assert_eq!((a + b) + c, a + (b + c));
                        assert_eq!(f.mul(a, b + c), f.mul(a, b) + f.mul(a, c));
                        assert_eq!(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
                    }
                }
            }
        }
    }

    #[test]
    fn distributivity_exhaustive_gf256_pairs() {
        let f = Field::new(8).unwrap();
        let c = FieldElement(0x53);
        for a in f.elements() {
            for b in f.elements() {
                assert_eq!(f.mul(a, b + c), f.mul(a, b) + f.mul(a, c));
            }
        }
    }

    #[test]
    fn inverse_and_order_exhaustive() {
        for m in 2..=8 {
            let f = Field::new(m).unwrap();
            for a in f.elements().skip(1) {
                assert_eq!(f.mul(a, f.inv(a).unwrap()), FieldElement::ONE);
                assert_eq!(f.pow(a, f.size() - 1), FieldElement::ONE);
            }
        }
    }

    #[test]
    fn randomized_axioms_large_fields() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for m in [16, 24, 31, 32] {
            let f = Field::new(m).unwrap();
            for _ in 0..2000 {
                let (a, b, c) = (f.random(&mut rng), f.random(&mut rng), f.random(&mut rng));
                assert!(f.contains(a));
                assert_eq!(f.mul(a, b + c), f.mul(a, b) + f.mul(a, c));
                assert_eq!(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
                if !a.is_zero() {
                    assert_eq!(f.mul(a, f.inv(a).unwrap()), FieldElement::ONE);
                }
            }
        }
    }

    #[test]
    fn hex_round_trip() {
        let x = FieldElement(0xbeef);
        assert_eq!(FieldElement::from_hex(&x.to_hex()), Some(x));
        let f = Field::new(16).unwrap();
        let json = serde_json::to_string(&f).unwrap();
        assert_eq!(serde_json::from_str::<Field>(&json).unwrap(), f);
    }
}
