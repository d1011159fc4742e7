//! Arithmetic in the prime field F_p for odd primes below 2^31.
//!
//! Residues are stored as canonical `u64` values in `[0, p)`. Because
//! `p < 2^31`, the product of two canonical residues fits in 62 bits and every
//! multiplication is a plain `u64` multiply followed by one remainder.

use std::fmt;

use crate::error::{Error, Result};

/// Exclusive upper bound on supported moduli.
pub const MODULUS_LIMIT: u64 = 1 << 31;

/// An odd prime `p` with `3 <= p < 2^31`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PrimeModulus {
    p: u64,
}

/// Canonical representative in `[0, p)` of an element of F_p.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Residue(u64);

impl Residue {
    pub const ZERO: Residue = Residue(0);

    #[inline]
    pub fn value(self) -> u64 {
        self.0
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

impl fmt::Display for Residue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Deterministic trial division; adequate below 2^31.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n.is_multiple_of(2) {
        return n == 2;
    }
    let mut d = 3;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

impl PrimeModulus {
    pub fn new(p: u64) -> Result<Self> {
        if p >= MODULUS_LIMIT {
            return Err(Error::ModulusOutOfRange(p));
        }
        if p == 2 || !is_prime(p) {
            return Err(Error::NotOddPrime(p));
        }
        Ok(PrimeModulus { p })
    }

    #[inline]
    pub fn p(self) -> u64 {
        self.p
    }

    /// Reduces an arbitrary integer into a residue.
    #[inline]
    pub fn residue(self, value: u64) -> Residue {
        Residue(value % self.p)
    }

    #[inline]
    pub fn residue_i64(self, value: i64) -> Residue {
        Residue(value.rem_euclid(self.p as i64) as u64)
    }

    /// Accepts only values already in `[0, p)`.
    pub fn canonical(self, value: u64) -> Result<Residue> {
        if value < self.p {
            Ok(Residue(value))
        } else {
            Err(Error::NotCanonical { value, p: self.p })
        }
    }

    /// Number of elements in the field, i.e. `p` as a `usize`.
    #[inline]
    pub fn order(self) -> usize {
        self.p as usize
    }

    /// Iterates over every element of F_p in increasing order.
    pub fn elements(self) -> impl Iterator<Item = Residue> {
        (0..self.p).map(Residue)
    }

    #[inline]
    pub fn add(self, a: Residue, b: Residue) -> Residue {
        let s = a.0 + b.0;
        Residue(if s >= self.p { s - self.p } else { s })
    }

    #[inline]
    pub fn sub(self, a: Residue, b: Residue) -> Residue {
        Residue(if a.0 >= b.0 { a.0 - b.0 } else { a.0 + self.p - b.0 })
    }

    #[inline]
    pub fn neg(self, a: Residue) -> Residue {
        Residue(if a.0 == 0 { 0 } else { self.p - a.0 })
    }

    #[inline]
    pub fn mul(self, a: Residue, b: Residue) -> Residue {
        Residue(a.0 * b.0 % self.p)
    }

    #[inline]
    pub fn square(self, a: Residue) -> Residue {
        self.mul(a, a)
    }

    #[inline]
    pub fn double(self, a: Residue) -> Residue {
        self.add(a, a)
    }

    pub fn pow(self, base: Residue, mut exp: u64) -> Residue {
        let mut result = Residue(1 % self.p);
        let mut b = base;
        while exp > 0 {
            if exp & 1 == 1 {
                result = self.mul(result, b);
            }
            b = self.mul(b, b);
            exp >>= 1;
        }
        result
    }

    /// Multiplicative inverse by Fermat; `None` for zero.
    pub fn inv(self, a: Residue) -> Option<Residue> {
        if a.is_zero() {
            None
        } else {
            Some(self.pow(a, self.p - 2))
        }
    }

    #[inline]
    pub fn is_one_mod_four(self) -> bool {
        self.p % 4 == 1
    }
}

impl fmt::Display for PrimeModulus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.p.fmt(f)
    }
}

/// Euler's criterion: `a^((p-1)/2)` decoded to `-1`, `0` or `1`.
pub fn legendre_symbol(a: Residue, m: PrimeModulus) -> i8 {
    if a.is_zero() {
        return 0;
    }
    let e = m.pow(a, (m.p() - 1) / 2);
    if e.value() == 1 {
        1
    } else {
        debug_assert_eq!(e.value(), m.p() - 1);
        -1
    }
}

/// Square roots of `a`, smaller root first.
///
/// Returns `(0, 0)` for zero, `(r, p - r)` with `r < p - r` for a nonzero
/// quadratic residue, and `None` otherwise. Tonelli–Shanks with the smallest
/// quadratic non-residue as the auxiliary generator, so the result is fully
/// deterministic.
pub fn sqrt_mod(a: Residue, m: PrimeModulus) -> Option<(Residue, Residue)> {
    if a.is_zero() {
        return Some((Residue::ZERO, Residue::ZERO));
    }
    if legendre_symbol(a, m) != 1 {
        return None;
    }
    let p = m.p();
    let root = if p % 4 == 3 {
        m.pow(a, (p + 1) / 4)
    } else {
        // p - 1 = q * 2^s with q odd
        let s = (p - 1).trailing_zeros();
        let q = (p - 1) >> s;
        let z = (2..p)
            .map(|z| m.residue(z))
            .find(|&z| legendre_symbol(z, m) == -1)
            .expect("odd prime has a non-residue");
        let mut order = s;
        let mut c = m.pow(z, q);
        let mut t = m.pow(a, q);
        let mut r = m.pow(a, q.div_ceil(2));
        while t.value() != 1 {
            let mut i = 0;
            let mut t2 = t;
            while t2.value() != 1 {
                t2 = m.square(t2);
                i += 1;
            }
            let b = m.pow(c, 1 << (order - i - 1));
            order = i;
            c = m.square(b);
            t = m.mul(t, c);
            r = m.mul(r, b);
        }
        r
    };
    let other = m.neg(root);
    Some(if root <= other {
        (root, other)
    } else {
        (other, root)
    })
}

/// True iff `dx^2 + dy^2 = 0` in F_p, i.e. the direction is self-orthogonal.
pub fn is_isotropic_direction(dx: Residue, dy: Residue, m: PrimeModulus) -> Result<bool> {
    if dx.is_zero() && dy.is_zero() {
        return Err(Error::ZeroDirection);
    }
    Ok(m.add(m.square(dx), m.square(dy)).is_zero())
}

/// The square root of `-1` with the smaller canonical value, when it exists.
pub fn imaginary_unit(m: PrimeModulus) -> Option<Residue> {
    sqrt_mod(m.residue(m.p() - 1), m).map(|(r, _)| r)
}

/// Table of `x^2 mod p` for every `x`, for small moduli.
#[derive(Clone, Debug)]
pub(crate) struct SquareTable {
    squares: Vec<u32>,
}

impl SquareTable {
    pub(crate) fn new(m: PrimeModulus) -> Self {
        let p = m.p();
        SquareTable {
            squares: (0..p).map(|x| (x * x % p) as u32).collect(),
        }
    }

    #[inline]
    pub(crate) fn get(&self, x: u64) -> u64 {
        self.squares[x as usize] as u64
    }
}

/// Table of multiplicative inverses for every nonzero `x`, for small moduli.
#[derive(Clone, Debug)]
pub(crate) struct InverseTable {
    inverses: Vec<u32>,
}

impl InverseTable {
    pub(crate) fn new(m: PrimeModulus) -> Self {
        let p = m.p();
        let mut inverses = vec![0u32; p as usize];
        if p > 1 {
            inverses[1] = 1;
        }
        for i in 2..p {
            // inv(i) = -(p / i) * inv(p mod i)
            let prev = inverses[(p % i) as usize] as u64;
            inverses[i as usize] = ((p - (p / i) % p) * prev % p) as u32;
        }
        InverseTable { inverses }
    }

    #[inline]
    pub(crate) fn get(&self, x: Residue) -> Residue {
        Residue(self.inverses[x.value() as usize] as u64)
    }
}
