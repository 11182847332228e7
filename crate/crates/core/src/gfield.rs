//! Finite fields GF(p^k) for odd primes `p`, with the quadratic character.
//!
//! Elements are stored as coefficient vectors in the root of the modulus
//! polynomial (index 0 is the constant term). The canonical ordering of
//! elements reads the coefficient vector from the top degree down, which
//! is the same as ordering by the integer `Σ cᵢ pⁱ`. The element with that
//! integer value is referred to as the element's *index*.

use thiserror::Error;

/// Largest field order supported.
pub const MAX_FIELD_ORDER: u64 = 1 << 20;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FieldError {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("characteristic 2 is not supported")]
    EvenCharacteristic,
    #[error("extension degree must be at least 1")]
    ZeroDegree,
    #[error("field order {p}^{k} exceeds the supported maximum {max}")]
    TooLarge { p: u64, k: u32, max: u64 },
    #[error("{0} is not an odd prime power")]
    NotOddPrimePower(u64),
}

/// Coefficient vector of a field element, constant term first.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FieldElement {
    pub coeffs: Vec<u32>,
}

#[derive(Debug, Clone)]
pub struct FiniteField {
    p: u32,
    k: u32,
    q: usize,
    /// Monic modulus, constant term first, length `k + 1`.
    modulus: Vec<u32>,
    /// `chi[i]` is the quadratic character of the element with index `i`.
    chi: Vec<i8>,
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Splits `q` as `p^k` with `p` prime, if possible.
pub fn prime_power(q: u64) -> Option<(u64, u32)> {
    if q < 2 {
        return None;
    }
    let mut p = 2;
    while p * p <= q && !q.is_multiple_of(p) {
        p += 1;
    }
    if !q.is_multiple_of(p) {
        p = q;
    }
    let mut rest = q;
    let mut k = 0;
    while rest.is_multiple_of(p) {
        rest /= p;
        k += 1;
    }
    (rest == 1).then_some((p, k))
}

/// Splits an odd prime power, or returns `None`.
pub fn odd_prime_power(q: u64) -> Option<(u64, u32)> {
    prime_power(q).filter(|&(p, _)| p != 2)
}

impl FiniteField {
    /// GF(p^k) with the least monic irreducible modulus of degree `k`.
    pub fn new(p: u64, k: u32) -> Result<Self, FieldError> {
        if p == 2 {
            return Err(FieldError::EvenCharacteristic);
        }
        if !is_prime(p) {
            return Err(FieldError::NotPrime(p));
        }
        if k == 0 {
            return Err(FieldError::ZeroDegree);
        }
        let q = p
            .checked_pow(k)
            .filter(|&q| q <= MAX_FIELD_ORDER)
            .ok_or(FieldError::TooLarge {
                p,
                k,
                max: MAX_FIELD_ORDER,
            })?;
        let p32 = p as u32;
        let modulus = smallest_irreducible(p32, k as usize);
        let mut field = FiniteField {
            p: p32,
            k,
            q: q as usize,
            modulus,
            chi: Vec::new(),
        };
        field.chi = field.build_character_table();
        Ok(field)
    }

    /// GF(q) for an odd prime power `q`.
    pub fn of_order(q: u64) -> Result<Self, FieldError> {
        let (p, k) = odd_prime_power(q).ok_or(FieldError::NotOddPrimePower(q))?;
        Self::new(p, k)
    }

    pub fn characteristic(&self) -> u32 {
        self.p
    }

    pub fn degree(&self) -> u32 {
        self.k
    }

    pub fn order(&self) -> usize {
        self.q
    }

    pub fn modulus(&self) -> &[u32] {
        &self.modulus
    }

    /// All elements in canonical order; zero first.
    pub fn elements(&self) -> Vec<FieldElement> {
        (0..self.q).map(|i| self.element(i)).collect()
    }

    pub fn element(&self, index: usize) -> FieldElement {
        assert!(index < self.q, "element index out of range");
        let mut coeffs = Vec::with_capacity(self.k as usize);
        let mut rest = index as u64;
        for _ in 0..self.k {
            coeffs.push((rest % self.p as u64) as u32);
            rest /= self.p as u64;
        }
        FieldElement { coeffs }
    }

    pub fn index_of(&self, x: &FieldElement) -> usize {
        x.coeffs
            .iter()
            .rev()
            .fold(0usize, |acc, &c| acc * self.p as usize + c as usize)
    }

    pub fn zero(&self) -> FieldElement {
        self.element(0)
    }

    pub fn one(&self) -> FieldElement {
        self.element(1)
    }

    pub fn contains(&self, x: &FieldElement) -> bool {
        x.coeffs.len() == self.k as usize && x.coeffs.iter().all(|&c| c < self.p)
    }

    pub fn add(&self, x: &FieldElement, y: &FieldElement) -> FieldElement {
        let coeffs = x
            .coeffs
            .iter()
            .zip(&y.coeffs)
            .map(|(&a, &b)| (a + b) % self.p)
            .collect();
        FieldElement { coeffs }
    }

    pub fn neg(&self, x: &FieldElement) -> FieldElement {
        let coeffs = x.coeffs.iter().map(|&a| (self.p - a) % self.p).collect();
        FieldElement { coeffs }
    }

    pub fn sub(&self, x: &FieldElement, y: &FieldElement) -> FieldElement {
        self.add(x, &self.neg(y))
    }

    pub fn mul(&self, x: &FieldElement, y: &FieldElement) -> FieldElement {
        let p = self.p as u64;
        let k = self.k as usize;
        let mut prod = vec![0u64; 2 * k - 1];
        for (i, &a) in x.coeffs.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in y.coeffs.iter().enumerate() {
                prod[i + j] = (prod[i + j] + a as u64 * b as u64) % p;
            }
        }
        // reduce using x^k = -(m_0 + m_1 x + ... + m_{k-1} x^{k-1})
        for d in (k..prod.len()).rev() {
            let lead = prod[d];
            if lead == 0 {
                continue;
            }
            prod[d] = 0;
            for (i, &m) in self.modulus[..k].iter().enumerate() {
                let sub = lead * m as u64 % p;
                prod[d - k + i] = (prod[d - k + i] + p - sub) % p;
            }
        }
        FieldElement {
            coeffs: prod[..k].iter().map(|&c| c as u32).collect(),
        }
    }

    /// Index of `x_i - x_j` computed digitwise on indices.
    pub fn sub_index(&self, i: usize, j: usize) -> usize {
        let p = self.p as usize;
        let (mut a, mut b) = (i, j);
        let mut out = 0;
        let mut place = 1;
        for _ in 0..self.k {
            let d = (a % p + p - b % p) % p;
            out += d * place;
            place *= p;
            a /= p;
            b /= p;
        }
        out
    }

    /// Quadratic character: 0 at zero, +1 on nonzero squares, -1 otherwise.
    pub fn chi(&self, x: &FieldElement) -> i8 {
        self.chi[self.index_of(x)]
    }

    pub fn chi_index(&self, index: usize) -> i8 {
        self.chi[index]
    }

    fn build_character_table(&self) -> Vec<i8> {
        let mut table = vec![-1i8; self.q];
        table[0] = 0;
        for i in 1..self.q {
            let x = self.element(i);
            let sq = self.mul(&x, &x);
            table[self.index_of(&sq)] = 1;
        }
        table
    }
}

/// Polynomial remainder over GF(p); both inputs constant term first, divisor monic.
fn poly_rem(p: u32, num: &[u32], monic_div: &[u32]) -> Vec<u32> {
    let p = p as u64;
    let mut r: Vec<u64> = num.iter().map(|&c| c as u64).collect();
    let dd = monic_div.len() - 1;
    if r.len() <= dd {
        return r.into_iter().map(|c| c as u32).collect();
    }
    for d in (dd..r.len()).rev() {
        let lead = r[d];
        if lead == 0 {
            continue;
        }
        for (i, &m) in monic_div.iter().enumerate() {
            let idx = d - dd + i;
            r[idx] = (r[idx] + p - lead * m as u64 % p) % p;
        }
    }
    r.truncate(dd);
    r.into_iter().map(|c| c as u32).collect()
}

/// Monic polynomials of degree `deg` in canonical order, constant term first.
fn monic_polys(p: u32, deg: usize) -> impl Iterator<Item = Vec<u32>> {
    let count = (p as u64).pow(deg as u32);
    (0..count).map(move |mut code| {
        let mut coeffs = Vec::with_capacity(deg + 1);
        for _ in 0..deg {
            coeffs.push((code % p as u64) as u32);
            code /= p as u64;
        }
        coeffs.push(1);
        coeffs
    })
}

fn has_root(p: u32, poly: &[u32]) -> bool {
    (0..p as u64).any(|x| {
        let v = poly
            .iter()
            .rev()
            .fold(0u64, |acc, &c| (acc * x + c as u64) % p as u64);
        v == 0
    })
}

/// Root test, plus a brute-force factor search over monic divisors of
/// degree 2..=k/2 when `k ≥ 4`.
pub fn is_irreducible(p: u32, poly: &[u32]) -> bool {
    let k = poly.len() - 1;
    if k == 0 {
        return false;
    }
    if k == 1 {
        return true;
    }
    if has_root(p, poly) {
        return false;
    }
    for d in 2..=k / 2 {
        for f in monic_polys(p, d) {
            if poly_rem(p, poly, &f).iter().all(|&c| c == 0) {
                return false;
            }
        }
    }
    true
}

fn smallest_irreducible(p: u32, k: usize) -> Vec<u32> {
    if k == 1 {
        return vec![0, 1];
    }
    monic_polys(p, k)
        .find(|f| is_irreducible(p, f))
        .expect("an irreducible polynomial exists in every degree")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_parameters() {
        assert_eq!(
            FiniteField::new(2, 1).unwrap_err(),
            FieldError::EvenCharacteristic
        );
        assert_eq!(FiniteField::new(9, 1).unwrap_err(), FieldError::NotPrime(9));
        assert_eq!(FiniteField::new(3, 0).unwrap_err(), FieldError::ZeroDegree);
        assert!(matches!(
            FiniteField::new(3, 13),
            Err(FieldError::TooLarge { .. })
        ));
        assert_eq!(
            FiniteField::of_order(8).unwrap_err(),
            FieldError::NotOddPrimePower(8)
        );
        assert_eq!(
            FiniteField::of_order(15).unwrap_err(),
            FieldError::NotOddPrimePower(15)
        );
    }

    #[test]
    fn gf9_uses_x2_plus_1() {
        let f = FiniteField::new(3, 2).unwrap();
        assert_eq!(f.modulus(), &[1, 0, 1]);
        let e = f.elements();
        assert_eq!(e.len(), 9);
        assert_eq!(e[0], f.zero());
    }

    #[test]
    fn gf9_modulus_precedes_other_irreducibles() {
        // the three monic irreducible quadratics over GF(3)
        let irr: Vec<Vec<u32>> = monic_polys(3, 2).filter(|f| is_irreducible(3, f)).collect();
        assert_eq!(irr, vec![vec![1, 0, 1], vec![2, 1, 1], vec![2, 2, 1]]);
    }

    #[test]
    fn prime_fields_list_elements_in_order() {
        for p in [3u64, 5, 7] {
            let f = FiniteField::new(p, 1).unwrap();
            let got: Vec<u32> = f.elements().iter().map(|e| e.coeffs[0]).collect();
            assert_eq!(got, (0..p as u32).collect::<Vec<_>>());
        }
    }

    #[test]
    fn character_values() {
        let f5 = FiniteField::new(5, 1).unwrap();
        assert_eq!(f5.chi(&f5.element(1)), 1);
        assert_eq!(f5.chi(&f5.element(2)), -1);
        assert_eq!(f5.chi(&f5.zero()), 0);
        let f7 = FiniteField::new(7, 1).unwrap();
        assert_eq!(f7.chi(&f7.element(4)), 1);
        let squares: Vec<usize> = (1..7).filter(|&i| f7.chi_index(i) == 1).collect();
        assert_eq!(squares, vec![1, 2, 4]);
    }

    #[test]
    fn degree_four_modulus_has_no_quadratic_factor() {
        let f = FiniteField::new(3, 4).unwrap();
        let m = f.modulus().to_vec();
        assert!(!has_root(3, &m));
        for d in monic_polys(3, 2) {
            assert!(poly_rem(3, &m, &d).iter().any(|&c| c != 0));
        }
        // (x^2+1)^2 = x^4 + 2x^2 + 1 has no roots but is reducible
        assert!(!is_irreducible(3, &[1, 0, 2, 0, 1]));
    }

    #[test]
    fn sub_index_matches_element_arithmetic() {
        let f = FiniteField::new(3, 3).unwrap();
        for i in 0..f.order() {
            for j in 0..f.order() {
                let d = f.sub(&f.element(i), &f.element(j));
                assert_eq!(f.sub_index(i, j), f.index_of(&d));
            }
        }
    }

    #[test]
    fn prime_power_splitting() {
        assert_eq!(prime_power(27), Some((3, 3)));
        assert_eq!(prime_power(7), Some((7, 1)));
        assert_eq!(prime_power(1), None);
        assert_eq!(prime_power(12), None);
        assert_eq!(prime_power(32), Some((2, 5)));
        assert_eq!(odd_prime_power(32), None);
    }
}
