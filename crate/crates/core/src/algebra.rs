//! Exact coordinate algebras: prime fields, the rationals, dual numbers and
//! the Cayley–Dickson tower.
//!
//! An [`Algebra`] is a runtime descriptor; elements are plain [`Elem`] values
//! and every operation goes through the descriptor. Nothing is ever
//! reassociated: `mul(mul(a, b), c)` and `mul(a, mul(b, c))` are computed
//! exactly as written, which matters from the octonions on.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::exec::Exec;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AlgebraError {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("{0} is not invertible")]
    NotInvertible(String),
    #[error("algebra {0} is infinite")]
    Infinite(String),
    #[error("algebra {0} has no conjugation to double")]
    NoConjugation(String),
    #[error("bad algebra descriptor `{0}`")]
    BadDescriptor(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Algebra {
    /// `F_p`, elements `0..p`.
    Prime(u64),
    Rational,
    /// `A[ε]` with `ε² = 0`; elements `Pair(a, b)` stand for `a + εb`.
    Dual(Box<Algebra>),
    /// One Cayley–Dickson doubling; elements `Pair(a, b)`.
    CayleyDickson(Box<Algebra>),
}

/// An element of some [`Algebra`]. The derived order is the canonical total
/// order used for enumeration and for choosing least representatives.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Elem {
    Mod(u64),
    Rat(BigRational),
    Pair(Box<Elem>, Box<Elem>),
}

/// A point of `A^n`.
pub type Point = Vec<Elem>;

impl Elem {
    pub fn pair(a: Elem, b: Elem) -> Elem {
        Elem::Pair(Box::new(a), Box::new(b))
    }

    pub fn rat(n: i64, d: i64) -> Elem {
        Elem::Rat(BigRational::new(BigInt::from(n), BigInt::from(d)))
    }

    /// Components of a pair; panics on scalars.
    pub fn halves(&self) -> (&Elem, &Elem) {
        match self {
            Elem::Pair(a, b) => (a, b),
            _ => panic!("scalar element has no halves"),
        }
    }
}

impl fmt::Display for Elem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Elem::Mod(v) => write!(f, "{v}"),
            Elem::Rat(r) => write!(f, "{r}"),
            Elem::Pair(a, b) => write!(f, "[{a},{b}]"),
        }
    }
}

/// Formats a point as `(a, b, ...)`.
pub fn fmt_point(p: &[Elem]) -> String {
    let parts: Vec<String> = p.iter().map(|e| e.to_string()).collect();
    format!("({})", parts.join(","))
}

fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2u64;
    while d.saturating_mul(d) <= p {
        if p.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Multiplicative inverse in `F_p` by the extended Euclidean algorithm.
pub fn field_inv(x: u64, p: u64) -> Result<u64, AlgebraError> {
    let x = x % p;
    if x == 0 {
        return Err(AlgebraError::NotInvertible(format!("0 mod {p}")));
    }
    let (mut r0, mut r1) = (p as i128, x as i128);
    let (mut t0, mut t1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    Ok(t0.rem_euclid(p as i128) as u64)
}

impl Algebra {
    pub fn prime(p: u64) -> Result<Self, AlgebraError> {
        if is_prime(p) {
            Ok(Algebra::Prime(p))
        } else {
            Err(AlgebraError::NotPrime(p))
        }
    }

    pub fn dual(base: Algebra) -> Self {
        Algebra::Dual(Box::new(base))
    }

    /// One Cayley–Dickson doubling. The base must carry a conjugation
    /// (a prime field, the rationals, or an earlier doubling).
    pub fn cd_double(base: Algebra) -> Result<Self, AlgebraError> {
        if base.has_conjugation() {
            Ok(Algebra::CayleyDickson(Box::new(base)))
        } else {
            Err(AlgebraError::NoConjugation(base.to_string()))
        }
    }

    /// `levels` doublings of `base`; `cd_tower(Q, 3)` is the octonions.
    pub fn cd_tower(base: Algebra, levels: u32) -> Result<Self, AlgebraError> {
        (0..levels).try_fold(base, |a, _| Algebra::cd_double(a))
    }

    pub fn octonions() -> Self {
        Algebra::cd_tower(Algebra::Rational, 3).expect("Q has a conjugation")
    }

    pub fn sedenions() -> Self {
        Algebra::cd_tower(Algebra::Rational, 4).expect("Q has a conjugation")
    }

    fn has_conjugation(&self) -> bool {
        !matches!(self, Algebra::Dual(_))
    }

    /// Number of Cayley–Dickson doublings above the scalar field, looking
    /// through dual extensions.
    pub fn cd_level(&self) -> u32 {
        match self {
            Algebra::Prime(_) | Algebra::Rational => 0,
            Algebra::Dual(a) => a.cd_level(),
            Algebra::CayleyDickson(a) => a.cd_level() + 1,
        }
    }

    pub fn is_commutative(&self) -> bool {
        self.cd_level() <= 1
    }

    pub fn is_associative(&self) -> bool {
        self.cd_level() <= 2
    }

    pub fn is_alternative(&self) -> bool {
        self.cd_level() <= 3
    }

    pub fn is_finite(&self) -> bool {
        match self {
            Algebra::Prime(_) => true,
            Algebra::Rational => false,
            Algebra::Dual(a) | Algebra::CayleyDickson(a) => a.is_finite(),
        }
    }

    /// Number of elements, if finite.
    pub fn cardinality(&self) -> Option<u128> {
        match self {
            Algebra::Prime(p) => Some(*p as u128),
            Algebra::Rational => None,
            Algebra::Dual(a) | Algebra::CayleyDickson(a) => a.cardinality().map(|c| c * c),
        }
    }

    /// Characteristic of the scalar field (`0` for `Q`).
    pub fn characteristic(&self) -> u64 {
        match self {
            Algebra::Prime(p) => *p,
            Algebra::Rational => 0,
            Algebra::Dual(a) | Algebra::CayleyDickson(a) => a.characteristic(),
        }
    }

    pub fn zero(&self) -> Elem {
        match self {
            Algebra::Prime(_) => Elem::Mod(0),
            Algebra::Rational => Elem::Rat(BigRational::zero()),
            Algebra::Dual(a) | Algebra::CayleyDickson(a) => Elem::pair(a.zero(), a.zero()),
        }
    }

    pub fn one(&self) -> Elem {
        match self {
            Algebra::Prime(p) => Elem::Mod(1 % p),
            Algebra::Rational => Elem::Rat(BigRational::one()),
            Algebra::Dual(a) | Algebra::CayleyDickson(a) => Elem::pair(a.one(), a.zero()),
        }
    }

    pub fn from_integer(&self, n: i64) -> Elem {
        match self {
            Algebra::Prime(p) => Elem::Mod((n as i128).rem_euclid(*p as i128) as u64),
            Algebra::Rational => Elem::Rat(BigRational::from_integer(BigInt::from(n))),
            Algebra::Dual(a) | Algebra::CayleyDickson(a) => Elem::pair(a.from_integer(n), a.zero()),
        }
    }

    /// Whether `x` is a well-formed element of this algebra.
    pub fn contains(&self, x: &Elem) -> bool {
        match (self, x) {
            (Algebra::Prime(p), Elem::Mod(v)) => v < p,
            (Algebra::Rational, Elem::Rat(_)) => true,
            (Algebra::Dual(a) | Algebra::CayleyDickson(a), Elem::Pair(l, r)) => a.contains(l) && a.contains(r),
            _ => false,
        }
    }

    pub fn is_zero(&self, x: &Elem) -> bool {
        *x == self.zero()
    }

    pub fn add(&self, x: &Elem, y: &Elem) -> Elem {
        match (self, x, y) {
            (Algebra::Prime(p), Elem::Mod(a), Elem::Mod(b)) => Elem::Mod(((*a as u128 + *b as u128) % *p as u128) as u64),
            (Algebra::Rational, Elem::Rat(a), Elem::Rat(b)) => Elem::Rat(a + b),
            (Algebra::Dual(s) | Algebra::CayleyDickson(s), Elem::Pair(a, b), Elem::Pair(c, d)) => {
                Elem::pair(s.add(a, c), s.add(b, d))
            }
            _ => panic!("element shape does not match {self}"),
        }
    }

    pub fn neg(&self, x: &Elem) -> Elem {
        match (self, x) {
            (Algebra::Prime(p), Elem::Mod(a)) => Elem::Mod((p - a) % p),
            (Algebra::Rational, Elem::Rat(a)) => Elem::Rat(-a),
            (Algebra::Dual(s) | Algebra::CayleyDickson(s), Elem::Pair(a, b)) => Elem::pair(s.neg(a), s.neg(b)),
            _ => panic!("element shape does not match {self}"),
        }
    }

    pub fn sub(&self, x: &Elem, y: &Elem) -> Elem {
        self.add(x, &self.neg(y))
    }

    pub fn mul(&self, x: &Elem, y: &Elem) -> Elem {
        match (self, x, y) {
            (Algebra::Prime(p), Elem::Mod(a), Elem::Mod(b)) => Elem::Mod(((*a as u128 * *b as u128) % *p as u128) as u64),
            (Algebra::Rational, Elem::Rat(a), Elem::Rat(b)) => Elem::Rat(a * b),
            // (a + εb)(c + εd) = ac + ε(ad + bc)
            (Algebra::Dual(s), Elem::Pair(a, b), Elem::Pair(c, d)) => {
                Elem::pair(s.mul(a, c), s.add(&s.mul(a, d), &s.mul(b, c)))
            }
            // (a, b)(c, d) = (ac - d̄b, da + bc̄)
            (Algebra::CayleyDickson(s), Elem::Pair(a, b), Elem::Pair(c, d)) => {
                let left = s.sub(&s.mul(a, c), &s.mul(&s.conj(d), b));
                let right = s.add(&s.mul(d, a), &s.mul(b, &s.conj(c)));
                Elem::pair(left, right)
            }
            _ => panic!("element shape does not match {self}"),
        }
    }

    /// Conjugation: trivial on scalars, `(a, b) ↦ (ā, -b)` per doubling and
    /// componentwise on dual numbers.
    pub fn conj(&self, x: &Elem) -> Elem {
        match (self, x) {
            (Algebra::Prime(_) | Algebra::Rational, _) => x.clone(),
            (Algebra::CayleyDickson(s), Elem::Pair(a, b)) => Elem::pair(s.conj(a), s.neg(b)),
            (Algebra::Dual(s), Elem::Pair(a, b)) => Elem::pair(s.conj(a), s.conj(b)),
            _ => panic!("element shape does not match {self}"),
        }
    }

    /// The innermost scalar field.
    pub fn scalars(&self) -> &Algebra {
        match self {
            Algebra::Prime(_) | Algebra::Rational => self,
            Algebra::Dual(a) | Algebra::CayleyDickson(a) => a.scalars(),
        }
    }

    /// `x x̄` as a scalar, for algebras without a dual layer.
    fn norm(&self, x: &Elem) -> Elem {
        match (self, x) {
            (Algebra::Prime(_) | Algebra::Rational, _) => self.mul(x, x),
            (Algebra::CayleyDickson(s), Elem::Pair(a, b)) => {
                let k = self.scalars();
                k.add(&s.norm(a), &s.norm(b))
            }
            _ => panic!("norm is only defined on Cayley–Dickson algebras"),
        }
    }

    fn scale(&self, x: &Elem, k: &Elem) -> Elem {
        match (self, x) {
            (Algebra::Prime(_) | Algebra::Rational, _) => self.mul(x, k),
            (Algebra::Dual(s) | Algebra::CayleyDickson(s), Elem::Pair(a, b)) => Elem::pair(s.scale(a, k), s.scale(b, k)),
            _ => panic!("element shape does not match {self}"),
        }
    }

    pub fn is_invertible(&self, x: &Elem) -> bool {
        match (self, x) {
            (Algebra::Prime(_) | Algebra::Rational, _) => !self.is_zero(x),
            (Algebra::Dual(s), Elem::Pair(a, _)) => s.is_invertible(a),
            (Algebra::CayleyDickson(_), _) => !self.scalars().is_zero(&self.norm(x)),
            _ => false,
        }
    }

    /// Two-sided inverse. Dual numbers use `a⁻¹ − ε (a⁻¹ b) a⁻¹`; doublings
    /// use `x̄ · N(x)⁻¹`.
    pub fn inv(&self, x: &Elem) -> Result<Elem, AlgebraError> {
        match (self, x) {
            (Algebra::Prime(p), Elem::Mod(a)) => field_inv(*a, *p).map(Elem::Mod),
            (Algebra::Rational, Elem::Rat(a)) => {
                if a.is_zero() {
                    Err(AlgebraError::NotInvertible("0".into()))
                } else {
                    Ok(Elem::Rat(a.recip()))
                }
            }
            (Algebra::Dual(s), Elem::Pair(a, b)) => {
                let ai = s.inv(a).map_err(|_| AlgebraError::NotInvertible(x.to_string()))?;
                let eps = s.neg(&s.mul(&s.mul(&ai, b), &ai));
                Ok(Elem::pair(ai, eps))
            }
            (Algebra::CayleyDickson(_), _) => {
                let k = self.scalars();
                let n = k
                    .inv(&self.norm(x))
                    .map_err(|_| AlgebraError::NotInvertible(x.to_string()))?;
                Ok(self.scale(&self.conj(x), &n))
            }
            _ => Err(AlgebraError::NotInvertible(x.to_string())),
        }
    }

    /// Every element exactly once, in ascending [`Elem`] order.
    pub fn enumerate(&self) -> Result<Vec<Elem>, AlgebraError> {
        match self {
            Algebra::Prime(p) => Ok((0..*p).map(Elem::Mod).collect()),
            Algebra::Rational => Err(AlgebraError::Infinite(self.to_string())),
            Algebra::Dual(a) | Algebra::CayleyDickson(a) => {
                let base = a.enumerate()?;
                let mut out = Vec::with_capacity(base.len() * base.len());
                for x in &base {
                    for y in &base {
                        out.push(Elem::pair(x.clone(), y.clone()));
                    }
                }
                Ok(out)
            }
        }
    }

    /// All points of `A^dim` in lexicographic order.
    pub fn enumerate_points(&self, dim: usize) -> Result<Vec<Point>, AlgebraError> {
        let elems = self.enumerate()?;
        let mut points: Vec<Point> = vec![Vec::new()];
        for _ in 0..dim {
            let mut next = Vec::with_capacity(points.len() * elems.len());
            for p in &points {
                for e in &elems {
                    let mut q = p.clone();
                    q.push(e.clone());
                    next.push(q);
                }
            }
            points = next;
        }
        Ok(points)
    }

    /// A random element; rationals have numerator in `[-3, 3]` and
    /// denominator in `[1, 3]`.
    pub fn sample<R: Rng>(&self, rng: &mut R) -> Elem {
        match self {
            Algebra::Prime(p) => Elem::Mod(rng.random_range(0..*p)),
            Algebra::Rational => Elem::rat(rng.random_range(-3..=3), rng.random_range(1..=3)),
            Algebra::Dual(a) | Algebra::CayleyDickson(a) => {
                let x = a.sample(rng);
                Elem::pair(x, a.sample(rng))
            }
        }
    }
}

impl fmt::Display for Algebra {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Algebra::Prime(p) => write!(f, "Fp:{p}"),
            Algebra::Rational => write!(f, "Q"),
            Algebra::Dual(a) => write!(f, "dual:{a}"),
            Algebra::CayleyDickson(_) => {
                let mut levels = 0;
                let mut base = self;
                while let Algebra::CayleyDickson(a) = base {
                    levels += 1;
                    base = a;
                }
                write!(f, "cd:{base}:{levels}")
            }
        }
    }
}

impl FromStr for Algebra {
    type Err = AlgebraError;

    /// Parses `Fp:<p>`, `Q`, `dual:<desc>` and `cd:<desc>:<levels>`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || AlgebraError::BadDescriptor(s.to_string());
        let s = s.trim();
        if s == "Q" {
            Ok(Algebra::Rational)
        } else if let Some(p) = s.strip_prefix("Fp:") {
            Algebra::prime(p.parse().map_err(|_| bad())?)
        } else if let Some(rest) = s.strip_prefix("dual:") {
            Ok(Algebra::dual(rest.parse()?))
        } else if let Some(rest) = s.strip_prefix("cd:") {
            let (base, levels) = rest.rsplit_once(':').ok_or_else(bad)?;
            let levels: u32 = levels.parse().map_err(|_| bad())?;
            Algebra::cd_tower(base.parse()?, levels)
        } else {
            Err(bad())
        }
    }
}

/// Per-sample generator: the sample index selects the ChaCha stream, so the
/// sequence drawn for a sample does not depend on execution order.
pub fn sample_rng(seed: u64, sample: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(sample);
    rng
}

/// Draws an invertible element, giving up after 64 attempts.
pub fn sample_invertible<R: Rng>(alg: &Algebra, rng: &mut R) -> Option<Elem> {
    (0..64).map(|_| alg.sample(rng)).find(|x| alg.is_invertible(x))
}

pub const IDENTITIES: [&str; 3] = ["(x^-1)^-1 = x", "x(x^-1 y) = y", "(xy)^-1 x = y^-1"];

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IdentityFailure {
    pub identity: &'static str,
    pub sample: usize,
    pub x: Elem,
    pub y: Elem,
}

impl fmt::Display for IdentityFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} fails at sample {}: x = {}, y = {}", self.identity, self.sample, self.x, self.y)
    }
}

/// Outcome of a seeded run of the alternative-law battery.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IdentityReport {
    pub algebra: String,
    pub seed: u64,
    pub samples: usize,
    /// Pairs with both components invertible.
    pub checked: usize,
    /// Failures per identity, in [`IDENTITIES`] order.
    pub failures: [usize; 3],
    /// First counterexample per identity.
    pub counterexamples: Vec<IdentityFailure>,
}

impl IdentityReport {
    pub fn holds(&self) -> bool {
        self.failures.iter().all(|&n| n == 0)
    }
}

impl fmt::Display for IdentityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "algebra {} seed {} samples {} checked {}",
            self.algebra, self.seed, self.samples, self.checked
        )?;
        for (k, name) in IDENTITIES.iter().enumerate() {
            match self.failures[k] {
                0 => writeln!(f, "{name}: pass")?,
                n => writeln!(f, "{name}: fail ({n} samples)")?,
            }
        }
        for c in &self.counterexamples {
            writeln!(f, "# {c}")?;
        }
        Ok(())
    }
}

/// Evaluates the three identities on one pair, returning which fail.
pub fn identity_failures(alg: &Algebra, x: &Elem, y: &Elem) -> [bool; 3] {
    let xi = alg.inv(x).expect("x invertible");
    let yi = alg.inv(y).expect("y invertible");
    let first = alg.inv(&xi).map(|v| v != *x).unwrap_or(true);
    let second = alg.mul(x, &alg.mul(&xi, y)) != *y;
    let xy = alg.mul(x, y);
    let third = match alg.inv(&xy) {
        Ok(xyi) => alg.mul(&xyi, x) != yi,
        Err(_) => true,
    };
    [first, second, third]
}

fn draw_pair(alg: &Algebra, seed: u64, i: usize) -> Option<(Elem, Elem)> {
    let mut rng = sample_rng(seed, i as u64);
    let x = sample_invertible(alg, &mut rng)?;
    let y = sample_invertible(alg, &mut rng)?;
    Some((x, y))
}

pub fn alternative_battery(alg: &Algebra, samples: usize, seed: u64) -> IdentityReport {
    alternative_battery_with(alg, samples, seed, Exec::default())
}

/// Checks `(x⁻¹)⁻¹ = x`, `x(x⁻¹y) = y` and `(xy)⁻¹x = y⁻¹` on `samples`
/// seeded random pairs of invertible elements.
pub fn alternative_battery_with(alg: &Algebra, samples: usize, seed: u64, exec: Exec) -> IdentityReport {
    let results = exec.map_range(samples, |i| {
        draw_pair(alg, seed, i).map(|(x, y)| {
            let fails = identity_failures(alg, &x, &y);
            (x, y, fails)
        })
    });
    let mut report = IdentityReport {
        algebra: alg.to_string(),
        seed,
        samples,
        checked: 0,
        failures: [0; 3],
        counterexamples: Vec::new(),
    };
    for (i, r) in results.into_iter().enumerate() {
        let Some((x, y, fails)) = r else { continue };
        report.checked += 1;
        for k in 0..3 {
            if fails[k] {
                if report.failures[k] == 0 {
                    report.counterexamples.push(IdentityFailure {
                        identity: IDENTITIES[k],
                        sample: i,
                        x: x.clone(),
                        y: y.clone(),
                    });
                }
                report.failures[k] += 1;
            }
        }
    }
    report
}

/// The lowest-index sample (below `max_samples`) violating one of the three
/// identities.
pub fn find_counterexample(alg: &Algebra, max_samples: usize, seed: u64, exec: Exec) -> Option<IdentityFailure> {
    exec.find_first(max_samples, |i| {
        let (x, y) = draw_pair(alg, seed, i)?;
        let fails = identity_failures(alg, &x, &y);
        let k = fails.iter().position(|&f| f)?;
        Some(IdentityFailure {
            identity: IDENTITIES[k],
            sample: i,
            x,
            y,
        })
    })
}

/// Rational numbers with bounded height, exposed for parsers and tests.
pub fn rational(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Reduces a rational modulo `p`; `None` when the denominator is divisible by `p`.
pub fn reduce_mod(r: &BigRational, p: u64) -> Option<u64> {
    let pb = BigInt::from(p);
    let num = ((r.numer() % &pb) + &pb) % &pb;
    let den = ((r.denom() % &pb) + &pb) % &pb;
    let to_u64 = |b: &BigInt| -> u64 { b.abs().to_string().parse().expect("fits") };
    let d = to_u64(&den);
    let di = field_inv(d, p).ok()?;
    Some(((to_u64(&num) as u128 * di as u128) % p as u128) as u64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prime_field_inverse() {
        assert_eq!(field_inv(2, 5).unwrap(), 3);
        assert_eq!(field_inv(1, 5).unwrap(), 1);
        assert!(field_inv(0, 5).is_err());
        for x in 1..7 {
            assert_eq!(x * field_inv(x, 7).unwrap() % 7, 1);
        }
    }

    #[test]
    fn descriptors_round_trip() {
        for d in ["Fp:5", "Q", "dual:Fp:3", "cd:Q:3", "dual:cd:Q:3"] {
            let a: Algebra = d.parse().unwrap();
            assert_eq!(a.to_string(), d);
        }
        assert_eq!("cd:cd:Q:2:1".parse::<Algebra>().unwrap(), Algebra::octonions());
        assert!("Fp:4".parse::<Algebra>().is_err());
        assert!("cd:dual:Q:1".parse::<Algebra>().is_err());
    }

    #[test]
    fn enumeration_sizes() {
        assert_eq!(Algebra::Prime(5).enumerate().unwrap().len(), 5);
        assert_eq!(Algebra::dual(Algebra::Prime(3)).enumerate().unwrap().len(), 9);
        assert!(Algebra::Rational.enumerate().is_err());
        assert_eq!(Algebra::Prime(3).enumerate_points(2).unwrap().len(), 9);
    }

    #[test]
    fn octonion_flags() {
        let o = Algebra::octonions();
        assert!(!o.is_commutative());
        assert!(!o.is_associative());
        assert!(o.is_alternative());
        let h = Algebra::cd_tower(Algebra::Rational, 2).unwrap();
        assert!(h.is_associative() && !h.is_commutative());
        assert!(!Algebra::sedenions().is_alternative());
    }

    #[test]
    fn octonion_unit_law() {
        let o = Algebra::octonions();
        let mut rng = sample_rng(7, 0);
        for _ in 0..100 {
            let x = o.sample(&mut rng);
            assert_eq!(o.mul(&o.one(), &x), x);
            assert_eq!(o.mul(&x, &o.one()), x);
        }
    }

    #[test]
    fn quaternions_associate() {
        let h = Algebra::cd_tower(Algebra::Rational, 2).unwrap();
        let mut rng = sample_rng(11, 0);
        for _ in 0..100 {
            let (x, y, z) = (h.sample(&mut rng), h.sample(&mut rng), h.sample(&mut rng));
            assert_eq!(h.mul(&h.mul(&x, &y), &z), h.mul(&x, &h.mul(&y, &z)));
        }
    }

    #[test]
    fn octonions_do_not_associate() {
        let o = Algebra::octonions();
        let mut rng = sample_rng(3, 0);
        let found = (0..50).any(|_| {
            let (x, y, z) = (o.sample(&mut rng), o.sample(&mut rng), o.sample(&mut rng));
            o.mul(&o.mul(&x, &y), &z) != o.mul(&x, &o.mul(&y, &z))
        });
        assert!(found);
    }

    #[test]
    fn octonion_norm_multiplicative() {
        let o = Algebra::octonions();
        let mut rng = sample_rng(5, 0);
        for _ in 0..50 {
            let (x, y) = (o.sample(&mut rng), o.sample(&mut rng));
            let k = o.scalars();
            assert_eq!(o.norm(&o.mul(&x, &y)), k.mul(&o.norm(&x), &o.norm(&y)));
        }
    }

    #[test]
    fn conjugation_is_involutive() {
        let o = Algebra::sedenions();
        let mut rng = sample_rng(9, 0);
        let x = o.sample(&mut rng);
        assert_eq!(o.conj(&o.conj(&x)), x);
    }

    #[test]
    fn dual_inverse_law_exhaustive() {
        for p in [2, 3, 5] {
            let d = Algebra::dual(Algebra::Prime(p));
            for x in d.enumerate().unwrap() {
                if d.is_invertible(&x) {
                    let xi = d.inv(&x).unwrap();
                    assert_eq!(d.mul(&x, &xi), d.one());
                    assert_eq!(d.mul(&xi, &x), d.one());
                } else {
                    assert!(d.inv(&x).is_err());
                }
            }
        }
    }

    #[test]
    fn trivial_identity_pair() {
        let o = Algebra::octonions();
        let mut rng = sample_rng(1, 0);
        let y = sample_invertible(&o, &mut rng).unwrap();
        assert_eq!(identity_failures(&o, &o.one(), &y), [false; 3]);
    }

    #[test]
    fn battery_is_mode_independent() {
        let o = Algebra::octonions();
        let a = alternative_battery_with(&o, 40, 17, Exec::Sequential);
        let b = alternative_battery_with(&o, 40, 17, Exec::Parallel);
        assert_eq!(a, b);
        assert!(a.holds());
    }

    #[test]
    fn sedenions_fail_quickly() {
        let s = Algebra::sedenions();
        let c = find_counterexample(&s, 1000, 2024, Exec::default()).expect("counterexample");
        assert!(c.sample < 1000);
    }

    #[test]
    fn reduction_mod_p() {
        assert_eq!(reduce_mod(&rational(1, 2), 5), Some(3));
        assert_eq!(reduce_mod(&rational(-1, 1), 5), Some(4));
        assert_eq!(reduce_mod(&rational(1, 5), 5), None);
    }

    proptest::proptest! {
        #[test]
        fn from_integer_is_a_ring_homomorphism(m in -50i64..50, n in -50i64..50, d in 0usize..4) {
            let algs = [Algebra::Prime(7), Algebra::Rational, Algebra::dual(Algebra::Prime(5)), Algebra::octonions()];
            let a = &algs[d];
            proptest::prop_assert_eq!(a.from_integer(m + n), a.add(&a.from_integer(m), &a.from_integer(n)));
            proptest::prop_assert_eq!(a.from_integer(m * n), a.mul(&a.from_integer(m), &a.from_integer(n)));
            proptest::prop_assert_eq!(a.from_integer(1), a.one());
        }
    }
}
