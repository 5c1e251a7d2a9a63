//! Finite fields `F_{p^e}` with a canonical modulus choice.
//!
//! An element is stored as its canonical index: the base-`p` encoding of its
//! coefficient vector, so index 0 is always zero and index 1 is always one.
//! For `e >= 2` the residue ring is taken modulo the monic irreducible
//! polynomial of degree `e` whose coefficient encoding is smallest, found by
//! exhaustive search; for `e = 1` arithmetic is plain `Z/p`.  Multiplication
//! and inversion run on discrete-log tables built over the least
//! multiplicative generator, addition works digit-wise on the encoding.

use crate::{Error, Result};

/// Largest supported field order (`2^16`).
pub const MAX_FIELD_ORDER: u64 = 1 << 16;

/// An element of a finite field, tagged with its field order so that
/// cross-field operations can be rejected.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, PartialOrd, Ord)]
pub struct FieldElem {
    q: u32,
    idx: u32,
}

impl FieldElem {
    /// Canonical index in `[0, q)`: base-`p` encoding of the coefficients.
    pub fn index(self) -> u32 {
        self.idx
    }

    pub fn field_order(self) -> u32 {
        self.q
    }

    pub fn is_zero(self) -> bool {
        self.idx == 0
    }

    pub fn is_one(self) -> bool {
        self.idx == 1
    }
}

/// The field `F_{p^e}` together with its arithmetic tables.
#[derive(Clone, Debug)]
pub struct FiniteField {
    p: u32,
    e: u32,
    q: u32,
    /// Monic modulus, little-endian coefficients, length `e + 1`.
    /// For `e = 1` this is the polynomial `x`, which never enters arithmetic.
    modulus: Vec<u32>,
    /// `exp[i]` = index of `g^i` for the least generator `g`, `i < q - 1`.
    exp: Vec<u32>,
    /// `log[idx]` for `idx >= 1`; `log[exp[i]] = i`.  `log[0]` is unused.
    log: Vec<u32>,
    least_gen: u32,
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n % 2 == 0 {
        return n == 2;
    }
    let mut d = 3u64;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

/// Splits a prime power `q = p^e`; errors if `q` is not a prime power.
pub fn prime_power_parts(q: u64) -> Result<(u64, u32)> {
    if q < 2 {
        return Err(Error::NotPrimePower(q));
    }
    let mut p = 2u64;
    while p * p <= q {
        if q % p == 0 {
            let mut rest = q;
            let mut e = 0u32;
            while rest % p == 0 {
                rest /= p;
                e += 1;
            }
            return if rest == 1 {
                Ok((p, e))
            } else {
                Err(Error::NotPrimePower(q))
            };
        }
        p += 1;
    }
    Ok((q, 1))
}

/// Builds `F_{p^e}`.  `p` must be prime, `e >= 1`, and `p^e <= 2^16`.
pub fn make_field(p: u64, e: u32) -> Result<FiniteField> {
    if e == 0 {
        return Err(Error::ZeroDegree);
    }
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    let mut q: u64 = 1;
    for _ in 0..e {
        q = q.saturating_mul(p);
        if q > MAX_FIELD_ORDER {
            return Err(Error::FieldOrderCap {
                q,
                max: MAX_FIELD_ORDER,
            });
        }
    }
    let p = p as u32;
    let q = q as u32;
    let modulus = if e == 1 {
        vec![0, 1]
    } else {
        least_irreducible(p, e)
    };
    let mut field = FiniteField {
        p,
        e,
        q,
        modulus,
        exp: Vec::new(),
        log: Vec::new(),
        least_gen: 0,
    };
    field.build_log_tables();
    Ok(field)
}

/// Builds the field of order `q` from its prime power decomposition.
pub fn field_of_order(q: u64) -> Result<FiniteField> {
    let (p, e) = prime_power_parts(q)?;
    make_field(p, e)
}

/// Coefficients of the monic irreducible polynomial of degree `e` over
/// `F_p` with the smallest base-`p` encoding of its lower coefficients.
fn least_irreducible(p: u32, e: u32) -> Vec<u32> {
    let mut tail = vec![0u32; e as usize];
    loop {
        let mut poly = tail.clone();
        poly.push(1);
        if poly_is_irreducible(p, &poly) {
            return poly;
        }
        // Increment the base-p counter over the non-leading coefficients.
        let mut i = 0;
        loop {
            tail[i] += 1;
            if tail[i] < p {
                break;
            }
            tail[i] = 0;
            i += 1;
            assert!(i < e as usize, "no irreducible polynomial found");
        }
    }
}

/// Trial division by every monic polynomial of degree `1..=deg/2`.
fn poly_is_irreducible(p: u32, poly: &[u32]) -> bool {
    let deg = poly.len() - 1;
    for d in 1..=deg / 2 {
        // All monic divisor candidates of degree d, by counter.
        let mut tail = vec![0u32; d];
        loop {
            let mut div = tail.clone();
            div.push(1);
            if poly_rem_is_zero(p, poly, &div) {
                return false;
            }
            let mut i = 0;
            loop {
                tail[i] += 1;
                if tail[i] < p {
                    break;
                }
                tail[i] = 0;
                i += 1;
                if i == d {
                    break;
                }
            }
            if tail.iter().all(|&c| c == 0) {
                break;
            }
        }
    }
    true
}

/// Whether the monic `div` divides `poly` over `F_p`.
fn poly_rem_is_zero(p: u32, poly: &[u32], div: &[u32]) -> bool {
    let p64 = p as u64;
    let mut rem: Vec<u64> = poly.iter().map(|&c| c as u64).collect();
    let dd = div.len() - 1;
    while rem.len() > dd {
        let lead = *rem.last().unwrap() % p64;
        let shift = rem.len() - 1 - dd;
        if lead != 0 {
            for (i, &dc) in div.iter().enumerate() {
                let sub = lead * dc as u64 % p64;
                let slot = &mut rem[shift + i];
                *slot = (*slot + p64 - sub) % p64;
            }
        }
        rem.pop();
    }
    rem.iter().all(|&c| c % p64 == 0)
}

impl FiniteField {
    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn e(&self) -> u32 {
        self.e
    }

    /// Field order `q = p^e`.
    pub fn order(&self) -> u32 {
        self.q
    }

    /// Monic modulus coefficients, little-endian, length `e + 1`.
    pub fn modulus_coeffs(&self) -> &[u32] {
        &self.modulus
    }

    pub fn zero(&self) -> FieldElem {
        FieldElem { q: self.q, idx: 0 }
    }

    pub fn one(&self) -> FieldElem {
        FieldElem { q: self.q, idx: 1 }
    }

    /// The least multiplicative generator, by canonical index.
    pub fn least_generator(&self) -> FieldElem {
        FieldElem {
            q: self.q,
            idx: self.least_gen,
        }
    }

    fn check(&self, a: FieldElem) -> Result<()> {
        if a.q != self.q {
            return Err(Error::FieldMismatch(a.q, self.q));
        }
        debug_assert!(a.idx < self.q);
        Ok(())
    }

    pub fn elem_from_index(&self, idx: u64) -> Result<FieldElem> {
        if idx >= self.q as u64 {
            return Err(Error::IndexRange { idx, q: self.q });
        }
        Ok(FieldElem {
            q: self.q,
            idx: idx as u32,
        })
    }

    /// Element from residue coefficients (little-endian, length `e`).
    pub fn elem_from_coeffs(&self, coeffs: &[u32]) -> Result<FieldElem> {
        if coeffs.len() != self.e as usize || coeffs.iter().any(|&c| c >= self.p) {
            return Err(Error::BadCoefficients);
        }
        let mut idx = 0u64;
        for &c in coeffs.iter().rev() {
            idx = idx * self.p as u64 + c as u64;
        }
        self.elem_from_index(idx)
    }

    /// Residue coefficients of an element, little-endian, length `e`.
    pub fn coeffs(&self, a: FieldElem) -> Result<Vec<u32>> {
        self.check(a)?;
        let mut out = Vec::with_capacity(self.e as usize);
        let mut idx = a.idx;
        for _ in 0..self.e {
            out.push(idx % self.p);
            idx /= self.p;
        }
        Ok(out)
    }

    pub fn elements(&self) -> impl Iterator<Item = FieldElem> + '_ {
        (0..self.q).map(|idx| FieldElem { q: self.q, idx })
    }

    /// All nonzero elements, ascending by canonical index.
    pub fn units(&self) -> impl Iterator<Item = FieldElem> + '_ {
        (1..self.q).map(|idx| FieldElem { q: self.q, idx })
    }

    pub fn add(&self, a: FieldElem, b: FieldElem) -> Result<FieldElem> {
        self.check(a)?;
        self.check(b)?;
        Ok(FieldElem {
            q: self.q,
            idx: self.add_idx(a.idx, b.idx),
        })
    }

    pub fn neg(&self, a: FieldElem) -> Result<FieldElem> {
        self.check(a)?;
        Ok(FieldElem {
            q: self.q,
            idx: self.neg_idx(a.idx),
        })
    }

    pub fn sub(&self, a: FieldElem, b: FieldElem) -> Result<FieldElem> {
        self.check(a)?;
        self.check(b)?;
        Ok(FieldElem {
            q: self.q,
            idx: self.add_idx(a.idx, self.neg_idx(b.idx)),
        })
    }

    pub fn mul(&self, a: FieldElem, b: FieldElem) -> Result<FieldElem> {
        self.check(a)?;
        self.check(b)?;
        Ok(FieldElem {
            q: self.q,
            idx: self.mul_idx(a.idx, b.idx),
        })
    }

    /// Multiplicative inverse; zero is rejected.
    pub fn inv(&self, a: FieldElem) -> Result<FieldElem> {
        self.check(a)?;
        if a.idx == 0 {
            return Err(Error::ZeroInversion);
        }
        Ok(FieldElem {
            q: self.q,
            idx: self.inv_idx(a.idx),
        })
    }

    /// `a^n` for signed exponents; negative exponents require `a != 0`.
    pub fn pow(&self, a: FieldElem, n: i64) -> Result<FieldElem> {
        self.check(a)?;
        if a.idx == 0 {
            if n < 0 {
                return Err(Error::ZeroInversion);
            }
            return Ok(if n == 0 { self.one() } else { self.zero() });
        }
        let m = self.q as i64 - 1;
        let r = ((n % m) + m) % m;
        let l = self.log[a.idx as usize] as u64 * r as u64 % m as u64;
        Ok(FieldElem {
            q: self.q,
            idx: self.exp[l as usize],
        })
    }

    /// Order of `a` in the multiplicative group; zero is rejected.
    pub fn multiplicative_order(&self, a: FieldElem) -> Result<u64> {
        self.check(a)?;
        if a.idx == 0 {
            return Err(Error::ZeroInversion);
        }
        let m = self.q as u64 - 1;
        let l = self.log[a.idx as usize] as u64;
        Ok(m / gcd(m, l))
    }

    pub fn is_generator(&self, a: FieldElem) -> Result<bool> {
        Ok(self.multiplicative_order(a)? == self.q as u64 - 1)
    }

    // ---- index-level arithmetic (crate-internal fast path) ----

    pub(crate) fn add_idx(&self, a: u32, b: u32) -> u32 {
        if self.e == 1 {
            return ((a as u64 + b as u64) % self.p as u64) as u32;
        }
        let mut out = 0u32;
        let mut pw = 1u32;
        let (mut x, mut y) = (a, b);
        for _ in 0..self.e {
            let d = (x % self.p + y % self.p) % self.p;
            out += d * pw;
            pw *= self.p;
            x /= self.p;
            y /= self.p;
        }
        out
    }

    pub(crate) fn neg_idx(&self, a: u32) -> u32 {
        if self.e == 1 {
            return if a == 0 { 0 } else { self.p - a };
        }
        let mut out = 0u32;
        let mut pw = 1u32;
        let mut x = a;
        for _ in 0..self.e {
            let d = x % self.p;
            out += if d == 0 { 0 } else { self.p - d } * pw;
            pw *= self.p;
            x /= self.p;
        }
        out
    }

    pub(crate) fn mul_idx(&self, a: u32, b: u32) -> u32 {
        if a == 0 || b == 0 {
            return 0;
        }
        let m = self.q as u64 - 1;
        let l = (self.log[a as usize] as u64 + self.log[b as usize] as u64) % m;
        self.exp[l as usize]
    }

    pub(crate) fn inv_idx(&self, a: u32) -> u32 {
        debug_assert!(a != 0);
        let m = self.q - 1;
        let l = (m - self.log[a as usize]) % m;
        self.exp[l as usize]
    }

    // ---- table construction ----

    /// Product of two residues by polynomial multiplication modulo the
    /// modulus; used only while the log tables are being built.
    fn poly_mul_idx(&self, a: u32, b: u32) -> u32 {
        if self.e == 1 {
            return (a as u64 * b as u64 % self.p as u64) as u32;
        }
        let e = self.e as usize;
        let p = self.p as u64;
        let da = self.digits(a);
        let db = self.digits(b);
        let mut prod = vec![0u64; 2 * e - 1];
        for (i, &x) in da.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in db.iter().enumerate() {
                prod[i + j] = (prod[i + j] + x as u64 * y as u64) % p;
            }
        }
        // Reduce modulo the monic modulus.
        for i in (e..prod.len()).rev() {
            let c = prod[i];
            if c != 0 {
                prod[i] = 0;
                for (j, &mc) in self.modulus.iter().take(e).enumerate() {
                    let slot = i - e + j;
                    prod[slot] = (prod[slot] + p - c * mc as u64 % p) % p;
                }
            }
        }
        let mut idx = 0u64;
        for &c in prod[..e].iter().rev() {
            idx = idx * p + c;
        }
        idx as u32
    }

    fn digits(&self, a: u32) -> Vec<u32> {
        let mut out = Vec::with_capacity(self.e as usize);
        let mut x = a;
        for _ in 0..self.e {
            out.push(x % self.p);
            x /= self.p;
        }
        out
    }

    fn poly_pow_idx(&self, a: u32, mut n: u64) -> u32 {
        let mut base = a;
        let mut acc = 1u32;
        while n > 0 {
            if n & 1 == 1 {
                acc = self.poly_mul_idx(acc, base);
            }
            base = self.poly_mul_idx(base, base);
            n >>= 1;
        }
        acc
    }

    fn build_log_tables(&mut self) {
        let m = self.q as u64 - 1;
        let prime_factors = distinct_prime_factors(m);
        // Least generator: first index whose order is exactly q - 1.
        let mut gen = 0u32;
        'search: for cand in 2..self.q.max(2) {
            for &f in &prime_factors {
                if self.poly_pow_idx(cand, m / f) == 1 {
                    continue 'search;
                }
            }
            gen = cand;
            break;
        }
        if m == 1 {
            // F_2: the unit group is trivial and 1 generates it.
            gen = 1;
        }
        assert!(gen != 0, "multiplicative group must be cyclic");
        self.least_gen = gen;
        self.exp = vec![0; m as usize];
        self.log = vec![0; self.q as usize];
        let mut acc = 1u32;
        for i in 0..m {
            self.exp[i as usize] = acc;
            self.log[acc as usize] = i as u32;
            acc = self.poly_mul_idx(acc, gen);
        }
        assert_eq!(acc, 1, "generator order must divide q - 1");
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn distinct_prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            out.push(d);
            while n % d == 0 {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// All prime powers in `[lo, hi]`, ascending.
pub fn prime_powers_in(lo: u64, hi: u64) -> Vec<u64> {
    (lo..=hi)
        .filter(|&q| prime_power_parts(q).is_ok())
        .collect()
}
