//! Arithmetic in GF(p^e) for orders up to 128.
//!
//! An element `c_0 + c_1 x + ... + c_{e-1} x^{e-1}` (with `0 <= c_i < p`) is
//! encoded as the integer `sum c_i p^i`, so encodings are exactly `0..q`.
//! Every field is built once from a fixed modulus table and shared as a
//! `&'static Field`, which keeps matrix files reproducible across runs.

use std::fmt;
use std::sync::{Mutex, OnceLock};

use crate::error::{Error, Result};

pub const MAX_ORDER: u32 = 128;

/// Fixed irreducible moduli, coefficients from the constant term upwards
/// (the leading 1 included).
const MODULI: &[(u32, u32, &[u8])] = &[
    (2, 2, &[1, 1, 1]),
    (2, 3, &[1, 1, 0, 1]),
    (3, 2, &[1, 0, 1]),
    (2, 4, &[1, 1, 0, 0, 1]),
    (5, 2, &[1, 1, 1]),
    (3, 3, &[1, 2, 0, 1]),
];

pub struct Field {
    p: u32,
    e: u32,
    q: usize,
    modulus: Vec<u8>,
    add: Vec<u8>,
    mul: Vec<u8>,
    neg: Vec<u8>,
    inv: Vec<u8>,
}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GF({})", self.q)
    }
}

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        self.p == other.p && self.e == other.e
    }
}

impl Eq for Field {}

fn is_prime(p: u32) -> bool {
    p >= 2 && (2..p).take_while(|d| d * d <= p).all(|d| p % d != 0)
}

/// Returns the field GF(p^e), building its tables on first use.
pub fn make_field(p: u32, e: u32) -> Result<&'static Field> {
    static FIELDS: OnceLock<Mutex<Vec<&'static Field>>> = OnceLock::new();

    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    if e == 0 {
        return Err(Error::ZeroDegree);
    }
    if p.checked_pow(e).is_none_or(|q| q > MAX_ORDER) {
        return Err(Error::FieldTooLarge { p, e });
    }

    let registry = FIELDS.get_or_init(|| Mutex::new(Vec::new()));
    let mut fields = registry.lock().expect("field registry poisoned");
    if let Some(f) = fields.iter().find(|f| f.p == p && f.e == e) {
        return Ok(f);
    }
    let field: &'static Field = Box::leak(Box::new(Field::build(p, e)?));
    fields.push(field);
    Ok(field)
}

/// Looks up the field of order `q` (a prime power).
pub fn field_of_order(q: u32) -> Result<&'static Field> {
    for p in 2..=q {
        if q % p == 0 {
            let mut e = 0;
            let mut rest = q;
            while rest % p == 0 {
                rest /= p;
                e += 1;
            }
            if rest != 1 {
                return Err(Error::InvalidParameters(format!("{q} is not a prime power")));
            }
            return make_field(p, e);
        }
    }
    Err(Error::InvalidParameters(format!("{q} is not a prime power")))
}

// Polynomials over GF(p) as coefficient vectors, constant term first.

fn poly_trim(mut a: Vec<u32>) -> Vec<u32> {
    while a.last() == Some(&0) {
        a.pop();
    }
    a
}

fn poly_rem(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
    let b = poly_trim(b.to_vec());
    let mut r = poly_trim(a.to_vec());
    let lead = *b.last().expect("division by zero polynomial");
    let lead_inv = (1..p).find(|x| x * lead % p == 1).expect("p prime");
    while r.len() >= b.len() {
        let shift = r.len() - b.len();
        let factor = r[r.len() - 1] * lead_inv % p;
        for (i, &bc) in b.iter().enumerate() {
            r[shift + i] = (r[shift + i] + p * p - factor * bc % p) % p;
        }
        r = poly_trim(r);
    }
    r
}

fn is_irreducible(modulus: &[u8], p: u32) -> bool {
    let m: Vec<u32> = modulus.iter().map(|&c| c as u32).collect();
    let deg = m.len() - 1;
    if deg <= 3 {
        // A reducible polynomial of degree <= 3 has a linear factor.
        return (0..p).all(|x| {
            let value = m.iter().rev().fold(0, |acc, &c| (acc * x + c) % p);
            value != 0
        });
    }
    // Trial division by every monic polynomial of degree 1..=deg/2.
    for d in 1..=deg / 2 {
        let count = p.pow(d as u32);
        for low in 0..count {
            let mut divisor: Vec<u32> = (0..d).map(|i| low / p.pow(i as u32) % p).collect();
            divisor.push(1);
            if poly_rem(&m, &divisor, p).is_empty() {
                return false;
            }
        }
    }
    true
}

impl Field {
    fn build(p: u32, e: u32) -> Result<Field> {
        let q = p.pow(e) as usize;
        let modulus: Vec<u8> = if e == 1 {
            Vec::new()
        } else {
            let entry = MODULI
                .iter()
                .find(|(mp, me, _)| *mp == p && *me == e)
                .ok_or(Error::NoModulus { p, e })?;
            entry.2.to_vec()
        };
        if e > 1 && !is_irreducible(&modulus, p) {
            return Err(Error::ReducibleModulus { p, e });
        }

        let digits = |a: usize| -> Vec<u32> {
            (0..e).map(|i| (a as u32 / p.pow(i)) % p).collect()
        };
        let encode = |c: &[u32]| -> u8 {
            c.iter().rev().fold(0u32, |acc, &d| acc * p + d) as u8
        };

        let mut add = vec![0u8; q * q];
        let mut mul = vec![0u8; q * q];
        let mut neg = vec![0u8; q];
        for a in 0..q {
            let da = digits(a);
            neg[a] = encode(&da.iter().map(|&x| (p - x) % p).collect::<Vec<_>>());
            for b in 0..q {
                let db = digits(b);
                let sum: Vec<u32> = da.iter().zip(&db).map(|(x, y)| (x + y) % p).collect();
                add[a * q + b] = encode(&sum);

                let mut prod = vec![0u32; 2 * e as usize - 1];
                for (i, x) in da.iter().enumerate() {
                    for (j, y) in db.iter().enumerate() {
                        prod[i + j] = (prod[i + j] + x * y) % p;
                    }
                }
                let reduced = if e == 1 {
                    prod
                } else {
                    let m: Vec<u32> = modulus.iter().map(|&c| c as u32).collect();
                    poly_rem(&prod, &m, p)
                };
                let mut fixed = reduced;
                fixed.resize(e as usize, 0);
                mul[a * q + b] = encode(&fixed);
            }
        }
        let mut inv = vec![0u8; q];
        for a in 1..q {
            inv[a] = (1..q)
                .find(|&b| mul[a * q + b] == 1)
                .expect("nonzero element without inverse: modulus not irreducible") as u8;
        }

        Ok(Field { p, e, q, modulus, add, mul, neg, inv })
    }

    pub fn characteristic(&self) -> u32 {
        self.p
    }

    pub fn degree(&self) -> u32 {
        self.e
    }

    pub fn order(&self) -> usize {
        self.q
    }

    /// Coefficients of the modulus, constant term first; empty for prime fields.
    pub fn modulus(&self) -> &[u8] {
        &self.modulus
    }

    #[inline]
    pub fn add(&self, a: u8, b: u8) -> u8 {
        self.add[a as usize * self.q + b as usize]
    }

    #[inline]
    pub fn sub(&self, a: u8, b: u8) -> u8 {
        self.add(a, self.neg[b as usize])
    }

    #[inline]
    pub fn mul(&self, a: u8, b: u8) -> u8 {
        self.mul[a as usize * self.q + b as usize]
    }

    #[inline]
    pub fn neg(&self, a: u8) -> u8 {
        self.neg[a as usize]
    }

    /// Multiplicative inverse. Panics on zero; use [`Field::checked_inv`] when
    /// the operand is not known to be nonzero.
    #[inline]
    pub fn inv(&self, a: u8) -> u8 {
        assert!(a != 0, "inversion of zero in {self:?}");
        self.inv[a as usize]
    }

    pub fn checked_inv(&self, a: u8) -> Result<u8> {
        if a == 0 {
            Err(Error::InverseOfZero)
        } else {
            Ok(self.inv[a as usize])
        }
    }

    /// The element -1 (equal to 1 only in characteristic 2).
    pub fn minus_one(&self) -> u8 {
        self.neg(1)
    }

    pub fn contains(&self, value: u32) -> bool {
        (value as usize) < self.q
    }

    pub fn element(&'static self, value: u32) -> Result<FieldElement> {
        if !self.contains(value) {
            return Err(Error::InvalidElement { value, q: self.q });
        }
        Ok(FieldElement { value: value as u8, field: self })
    }

    pub fn elements(&'static self) -> impl Iterator<Item = FieldElement> {
        (0..self.q as u8).map(move |value| FieldElement { value, field: self })
    }
}

/// A field element tied to its field, for callers that want mismatch checks.
#[derive(Clone, Copy)]
pub struct FieldElement {
    value: u8,
    field: &'static Field,
}

impl fmt::Debug for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}@{:?}", self.value, self.field)
    }
}

impl PartialEq for FieldElement {
    fn eq(&self, other: &Self) -> bool {
        self.value == other.value && self.field == other.field
    }
}

impl Eq for FieldElement {}

impl FieldElement {
    pub fn value(self) -> u8 {
        self.value
    }

    pub fn field(self) -> &'static Field {
        self.field
    }

    pub fn is_zero(self) -> bool {
        self.value == 0
    }

    fn same_field(self, other: FieldElement) -> Result<&'static Field> {
        if self.field == other.field {
            Ok(self.field)
        } else {
            Err(Error::FieldMismatch)
        }
    }

    pub fn add(self, other: FieldElement) -> Result<FieldElement> {
        let f = self.same_field(other)?;
        Ok(FieldElement { value: f.add(self.value, other.value), field: f })
    }

    pub fn sub(self, other: FieldElement) -> Result<FieldElement> {
        let f = self.same_field(other)?;
        Ok(FieldElement { value: f.sub(self.value, other.value), field: f })
    }

    pub fn mul(self, other: FieldElement) -> Result<FieldElement> {
        let f = self.same_field(other)?;
        Ok(FieldElement { value: f.mul(self.value, other.value), field: f })
    }

    pub fn neg(self) -> FieldElement {
        FieldElement { value: self.field.neg(self.value), field: self.field }
    }

    pub fn inv(self) -> Result<FieldElement> {
        let value = self.field.checked_inv(self.value)?;
        Ok(FieldElement { value, field: self.field })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SUPPORTED: &[(u32, u32)] = &[
        (2, 1), (3, 1), (5, 1), (7, 1), (2, 2), (2, 3), (3, 2), (2, 4), (5, 2), (3, 3),
    ];

    /// Schoolbook multiplication of encoded elements, reduced by long division;
    /// independent of the table builder.
    fn reference_mul(a: u32, b: u32, p: u32, modulus: &[u32]) -> u32 {
        let e = modulus.len() - 1;
        let da: Vec<u32> = (0..e).map(|i| a / p.pow(i as u32) % p).collect();
        let db: Vec<u32> = (0..e).map(|i| b / p.pow(i as u32) % p).collect();
        let mut prod = vec![0u32; 2 * e];
        for i in 0..e {
            for j in 0..e {
                prod[i + j] = (prod[i + j] + da[i] * db[j]) % p;
            }
        }
        for deg in (e..2 * e).rev() {
            let c = prod[deg];
            if c != 0 {
                for (i, &m) in modulus.iter().enumerate() {
                    let pos = deg - e + i;
                    prod[pos] = (prod[pos] + p * p - c * m % p) % p;
                }
            }
        }
        (0..e).map(|i| prod[i] * p.pow(i as u32)).sum()
    }

    #[test]
    fn prime_field_basics() {
        let f = make_field(2, 1).unwrap();
        assert_eq!(f.order(), 2);
        assert_eq!(f.elements().map(|x| x.value()).collect::<Vec<_>>(), vec![0, 1]);
        assert_eq!(f.inv(1), 1);

        let f3 = make_field(3, 1).unwrap();
        assert_eq!(f3.add(2, 2), 1);
        assert_eq!(f3.minus_one(), 2);
    }

    #[test]
    fn extension_encodings() {
        let f9 = make_field(3, 2).unwrap();
        // 4 = 1*3 + 1 encodes x + 1
        assert_eq!(f9.add(3, 1), 4);
        // x * x = -1 under x^2 + 1
        assert_eq!(f9.mul(3, 3), 2);

        let f8 = make_field(2, 3).unwrap();
        assert_eq!(f8.mul(2, 2), 4);
        // x^3 = x + 1
        assert_eq!(f8.mul(4, 2), 3);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert_eq!(make_field(4, 1).unwrap_err(), Error::NotPrime(4));
        assert_eq!(make_field(2, 8).unwrap_err(), Error::FieldTooLarge { p: 2, e: 8 });
        assert_eq!(make_field(2, 5).unwrap_err(), Error::NoModulus { p: 2, e: 5 });
        assert_eq!(make_field(2, 0).unwrap_err(), Error::ZeroDegree);
        assert!(make_field(131, 1).is_err());
        assert!(make_field(127, 1).is_ok());
    }

    #[test]
    fn tables_match_reference_multiplication() {
        for &(p, e) in SUPPORTED.iter().filter(|(_, e)| *e > 1) {
            let f = make_field(p, e).unwrap();
            let m: Vec<u32> = f.modulus().iter().map(|&c| c as u32).collect();
            for a in 0..f.order() as u32 {
                for b in 0..f.order() as u32 {
                    assert_eq!(
                        f.mul(a as u8, b as u8) as u32,
                        reference_mul(a, b, p, &m),
                        "GF({p}^{e}) {a}*{b}"
                    );
                }
            }
        }
    }

    #[test]
    fn field_axioms_exhaustive() {
        for &(p, e) in SUPPORTED {
            let f = make_field(p, e).unwrap();
            let q = f.order() as u8;
            for a in 0..q {
                assert_eq!(f.add(a, 0), a);
                assert_eq!(f.mul(a, 1), a);
                assert_eq!(f.add(a, f.neg(a)), 0);
                if a != 0 {
                    assert_eq!(f.mul(a, f.inv(a)), 1);
                    let mut image: Vec<u8> = (0..q).map(|x| f.mul(x, a)).collect();
                    image.sort_unstable();
                    assert_eq!(image, (0..q).collect::<Vec<_>>());
                }
                for b in 0..q {
                    assert_eq!(f.add(a, b), f.add(b, a));
                    assert_eq!(f.mul(a, b), f.mul(b, a));
                    for c in 0..q {
                        assert_eq!(f.add(f.add(a, b), c), f.add(a, f.add(b, c)));
                        assert_eq!(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
                        assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
                    }
                }
            }
        }
    }

    #[test]
    fn field_axioms_sampled_large() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for &(p, e) in &[(5u32, 2u32), (3, 3), (127, 1), (31, 1)] {
            let f = make_field(p, e).unwrap();
            let q = f.order() as u8;
            for _ in 0..10_000 {
                let (a, b, c) = (rng.gen_range(0..q), rng.gen_range(0..q), rng.gen_range(0..q));
                assert_eq!(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
                assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
                assert_eq!(f.add(f.add(a, b), c), f.add(a, f.add(b, c)));
            }
        }
    }

    #[test]
    fn minus_one_is_characteristic_aware() {
        assert_eq!(make_field(2, 2).unwrap().minus_one(), 1);
        assert_eq!(make_field(3, 2).unwrap().minus_one(), 2);
        assert_eq!(make_field(5, 1).unwrap().minus_one(), 4);
    }

    #[test]
    fn element_wrappers_check_fields() {
        let f2 = make_field(2, 1).unwrap();
        let f3 = make_field(3, 1).unwrap();
        let one2 = f2.element(1).unwrap();
        let two3 = f3.element(2).unwrap();
        assert_eq!(one2.add(two3).unwrap_err(), Error::FieldMismatch);
        assert_eq!(f3.element(0).unwrap().inv().unwrap_err(), Error::InverseOfZero);
        assert_eq!(two3.add(two3).unwrap().value(), 1);
        assert_eq!(two3.inv().unwrap().value(), 2);
        assert!(f3.element(3).is_err());
    }

    #[test]
    fn irreducibility_check() {
        assert!(is_irreducible(&[1, 1, 0, 0, 1], 2));
        // x^4 + x^2 + 1 = (x^2 + x + 1)^2 has no roots but is reducible.
        assert!(!is_irreducible(&[1, 0, 1, 0, 1], 2));
        assert!(!is_irreducible(&[1, 0, 1], 2));
        assert!(is_irreducible(&[1, 2, 0, 1], 3));
    }

    #[test]
    fn order_lookup() {
        assert_eq!(field_of_order(9).unwrap().characteristic(), 3);
        assert_eq!(field_of_order(8).unwrap().degree(), 3);
        assert!(field_of_order(6).is_err());
    }
}
