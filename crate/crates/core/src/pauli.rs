//! Sparse algebra of multi-site Pauli operators.
//!
//! A [`PauliString`] is a tensor product of single-site Pauli matrices with an
//! implicit unit coefficient; a [`SpinOperator`] is a complex-weighted sum of
//! strings kept in canonical form (each string at most once, dust pruned).
//!
//! Basis convention for dense and state-vector work: site 0 is the leftmost
//! tensor factor (most significant bit of the basis index) and `|0>` is spin up,
//! the +1 eigenstate of `Z`.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{FloquetError, Result};

/// Coefficients below this fraction of the largest coefficient are pruned.
pub const DROP_TOLERANCE: f64 = 1e-14;

/// Default site cap for [`SpinOperator::to_dense`] (4096-dimensional).
pub const DEFAULT_DENSE_CAP: usize = 12;

const HERMITICITY_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    /// 1, 2, 3 for x, y, z.
    pub fn index(self) -> usize {
        match self {
            Axis::X => 1,
            Axis::Y => 2,
            Axis::Z => 3,
        }
    }

    pub fn from_index(index: usize) -> Option<Self> {
        match index {
            1 => Some(Axis::X),
            2 => Some(Axis::Y),
            3 => Some(Axis::Z),
            _ => None,
        }
    }

    /// The remaining axis when `self != other`.
    pub fn third(self, other: Axis) -> Option<Axis> {
        if self == other {
            return None;
        }
        Axis::from_index(6 - self.index() - other.index())
    }

    /// Single-site product `self * other = phase * result` (`None` is identity).
    pub fn product(self, other: Axis) -> (Phase, Option<Axis>) {
        if self == other {
            return (Phase::ONE, None);
        }
        let third = self.third(other);
        // x y = i z and cyclic permutations
        if (other.index() + 3 - self.index()) % 3 == 1 {
            (Phase::I, third)
        } else {
            (Phase::MINUS_I, third)
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Axis::X => 'X',
            Axis::Y => 'Y',
            Axis::Z => 'Z',
        }
    }
}

impl FromStr for Axis {
    type Err = FloquetError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "x" | "1" => Ok(Axis::X),
            "y" | "2" => Ok(Axis::Y),
            "z" | "3" => Ok(Axis::Z),
            other => Err(FloquetError::Parse(format!("unknown axis '{other}'"))),
        }
    }
}

/// A power of `i`: one of `1, i, -1, -i`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Phase(u8);

impl Phase {
    pub const ONE: Phase = Phase(0);
    pub const I: Phase = Phase(1);
    pub const MINUS_ONE: Phase = Phase(2);
    pub const MINUS_I: Phase = Phase(3);

    pub fn exponent(self) -> u8 {
        self.0
    }

    pub fn to_complex(self) -> Complex64 {
        match self.0 {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        }
    }
}

impl Mul for Phase {
    type Output = Phase;

    fn mul(self, rhs: Phase) -> Phase {
        Phase((self.0 + rhs.0) % 4)
    }
}

/// Tensor product of Pauli matrices; absent sites carry the identity.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliString(BTreeMap<usize, Axis>);

impl PauliString {
    pub fn identity() -> Self {
        Self::default()
    }

    pub fn single(site: usize, axis: Axis) -> Self {
        Self(BTreeMap::from([(site, axis)]))
    }

    pub fn pair(a: (usize, Axis), b: (usize, Axis)) -> Self {
        Self::from_sites([a, b])
    }

    /// Builds a string from `(site, axis)` pairs; a repeated site keeps the last axis.
    pub fn from_sites(sites: impl IntoIterator<Item = (usize, Axis)>) -> Self {
        Self(sites.into_iter().collect())
    }

    pub fn is_identity(&self) -> bool {
        self.0.is_empty()
    }

    pub fn axis_at(&self, site: usize) -> Option<Axis> {
        self.0.get(&site).copied()
    }

    pub fn weight(&self) -> usize {
        self.0.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, Axis)> + '_ {
        self.0.iter().map(|(&s, &a)| (s, a))
    }

    pub fn max_site(&self) -> Option<usize> {
        self.0.keys().next_back().copied()
    }

    /// True when the strings commute: they overlap with differing non-identity
    /// axes on an even number of sites.
    pub fn commutes_with(&self, other: &PauliString) -> bool {
        let clashes = self
            .0
            .iter()
            .filter(|(site, axis)| other.0.get(site).is_some_and(|b| b != *axis))
            .count();
        clashes % 2 == 0
    }

    /// Conjugation by `Z` on every site of `sites` flips the sign of each `X`/`Y` there.
    pub(crate) fn count_xy_on(&self, sites: &std::collections::BTreeSet<usize>) -> usize {
        self.0
            .iter()
            .filter(|(s, a)| sites.contains(s) && **a != Axis::Z)
            .count()
    }

    /// Bit masks for the action on basis states of an `n_sites` register:
    /// (flip mask, sign mask, number of `Y` factors).
    fn masks(&self, n_sites: usize) -> (usize, usize, u32) {
        let mut flip = 0usize;
        let mut sign = 0usize;
        let mut n_y = 0u32;
        for (&site, &axis) in &self.0 {
            let bit = 1usize << (n_sites - 1 - site);
            match axis {
                Axis::X => flip |= bit,
                Axis::Y => {
                    flip |= bit;
                    sign |= bit;
                    n_y += 1;
                }
                Axis::Z => sign |= bit,
            }
        }
        (flip, sign, n_y)
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "I");
        }
        let mut first = true;
        for (site, axis) in &self.0 {
            if !first {
                write!(f, " ")?;
            }
            write!(f, "{}{}", axis.symbol(), site)?;
            first = false;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = FloquetError;

    /// Parses whitespace-separated factors such as `"X0 Z1"`; `"I"` or `""` is the identity.
    fn from_str(s: &str) -> Result<Self> {
        let mut out = BTreeMap::new();
        for token in s.split_whitespace() {
            if token.eq_ignore_ascii_case("i") {
                continue;
            }
            let (head, tail) = token.split_at(1);
            let axis: Axis = head.parse()?;
            let site: usize = tail
                .parse()
                .map_err(|_| FloquetError::Parse(format!("bad Pauli factor '{token}'")))?;
            if out.insert(site, axis).is_some() {
                return Err(FloquetError::Parse(format!(
                    "site {site} repeated in '{s}'"
                )));
            }
        }
        Ok(Self(out))
    }
}

/// Product of two strings: `a * b = phase * product`.
pub fn multiply(a: &PauliString, b: &PauliString) -> (Phase, PauliString) {
    let mut phase = Phase::ONE;
    let mut out = a.0.clone();
    for (&site, &bx) in &b.0 {
        match out.get(&site).copied() {
            None => {
                out.insert(site, bx);
            }
            Some(ax) => {
                let (p, r) = ax.product(bx);
                phase = phase * p;
                match r {
                    Some(r) => {
                        out.insert(site, r);
                    }
                    None => {
                        out.remove(&site);
                    }
                }
            }
        }
    }
    (phase, PauliString(out))
}

/// Complex-weighted sum of Pauli strings in canonical form.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SpinOperator {
    terms: BTreeMap<PauliString, Complex64>,
}

impl SpinOperator {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn identity() -> Self {
        Self::from_term(PauliString::identity(), Complex64::new(1.0, 0.0))
    }

    pub fn from_term(string: PauliString, coefficient: Complex64) -> Self {
        let mut op = Self::zero();
        op.add_term(string, coefficient);
        op
    }

    pub fn single(site: usize, axis: Axis) -> Self {
        Self::from_term(PauliString::single(site, axis), Complex64::new(1.0, 0.0))
    }

    /// `sum_k sigma^axis_k` over `sites`.
    pub fn collective(axis: Axis, sites: impl IntoIterator<Item = usize>) -> Self {
        let mut op = Self::zero();
        for site in sites {
            op.add_term(PauliString::single(site, axis), Complex64::new(1.0, 0.0));
        }
        op
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (PauliString, Complex64)>) -> Self {
        let mut op = Self::zero();
        for (s, c) in terms {
            op.add_term(s, c);
        }
        op.canonicalize()
    }

    /// Accumulates without pruning; call [`canonicalize`](Self::canonicalize) afterwards.
    pub fn add_term(&mut self, string: PauliString, coefficient: Complex64) {
        *self.terms.entry(string).or_insert(Complex64::new(0.0, 0.0)) += coefficient;
    }

    /// Removes exact zeros and coefficients below `DROP_TOLERANCE * max|c|`.
    pub fn canonicalize(mut self) -> Self {
        let max = self.max_abs();
        if max == 0.0 {
            self.terms.clear();
            return self;
        }
        let cut = DROP_TOLERANCE * max;
        self.terms.retain(|_, c| c.norm() >= cut && c.norm() > 0.0);
        self
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_empty(&self) -> bool {
        self.is_zero()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&PauliString, &Complex64)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, string: &PauliString) -> Complex64 {
        self.terms.get(string).copied().unwrap_or_default()
    }

    pub fn max_abs(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Sum of coefficient magnitudes; an upper bound on the operator norm.
    pub fn l1_norm(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).sum()
    }

    pub fn max_site(&self) -> Option<usize> {
        self.terms.keys().filter_map(PauliString::max_site).max()
    }

    /// Every coefficient real (to a relative 1e-12).
    pub fn is_hermitian(&self) -> bool {
        let max = self.max_abs();
        self.terms
            .values()
            .all(|c| c.im.abs() <= HERMITICITY_TOLERANCE * max.max(f64::MIN_POSITIVE))
    }

    pub fn adjoint(&self) -> Self {
        Self {
            terms: self
                .terms
                .iter()
                .map(|(s, c)| (s.clone(), c.conj()))
                .collect(),
        }
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self {
            terms: self
                .terms
                .iter()
                .map(|(s, c)| (s.clone(), c * factor))
                .collect(),
        }
        .canonicalize()
    }

    pub fn scale_real(&self, factor: f64) -> Self {
        self.scale(Complex64::new(factor, 0.0))
    }

    /// Operator product `self * other`.
    pub fn product(&self, other: &SpinOperator) -> SpinOperator {
        let mut out = SpinOperator::zero();
        for (a, ca) in &self.terms {
            for (b, cb) in &other.terms {
                let (phase, s) = multiply(a, b);
                out.add_term(s, ca * cb * phase.to_complex());
            }
        }
        out.canonicalize()
    }

    /// L1 distance between coefficient vectors.
    pub fn distance(&self, other: &SpinOperator) -> f64 {
        let mut keys: Vec<&PauliString> = self.terms.keys().collect();
        keys.extend(other.terms.keys());
        keys.sort();
        keys.dedup();
        keys.into_iter()
            .map(|k| (self.coefficient(k) - other.coefficient(k)).norm())
            .sum()
    }

    /// Dense matrix with the default cap of [`DEFAULT_DENSE_CAP`] sites.
    pub fn to_dense(&self, n_sites: usize) -> Result<DMatrix<Complex64>> {
        self.to_dense_capped(n_sites, DEFAULT_DENSE_CAP)
    }

    pub fn to_dense_capped(&self, n_sites: usize, cap: usize) -> Result<DMatrix<Complex64>> {
        if n_sites > cap {
            return Err(FloquetError::DenseCapExceeded { n_sites, cap });
        }
        self.check_sites(n_sites)?;
        let dim = 1usize << n_sites;
        let mut m = DMatrix::<Complex64>::zeros(dim, dim);
        for (s, c) in &self.terms {
            let (flip, sign, n_y) = s.masks(n_sites);
            let base = c * Phase((n_y % 4) as u8).to_complex();
            for col in 0..dim {
                let v = if (col & sign).count_ones() % 2 == 0 {
                    base
                } else {
                    -base
                };
                m[(col ^ flip, col)] += v;
            }
        }
        Ok(m)
    }

    /// `self |psi>` for a state on `log2(psi.len())` sites.
    pub fn apply(&self, psi: &[Complex64]) -> Result<Vec<Complex64>> {
        let n_sites = register_sites(psi.len())?;
        self.check_sites(n_sites)?;
        let mut out = vec![Complex64::new(0.0, 0.0); psi.len()];
        for (s, c) in &self.terms {
            let (flip, sign, n_y) = s.masks(n_sites);
            let base = c * Phase((n_y % 4) as u8).to_complex();
            for (b, amp) in psi.iter().enumerate() {
                let v = if (b & sign).count_ones() % 2 == 0 {
                    base
                } else {
                    -base
                };
                out[b ^ flip] += v * amp;
            }
        }
        Ok(out)
    }

    /// `<psi| self |psi>`.
    pub fn expectation(&self, psi: &[Complex64]) -> Result<Complex64> {
        let applied = self.apply(psi)?;
        Ok(psi.iter().zip(&applied).map(|(a, b)| a.conj() * b).sum())
    }

    fn check_sites(&self, n_sites: usize) -> Result<()> {
        match self.max_site() {
            Some(site) if site >= n_sites => Err(FloquetError::SiteOutOfRange { site, n_sites }),
            _ => Ok(()),
        }
    }
}

fn register_sites(len: usize) -> Result<usize> {
    if len == 0 || !len.is_power_of_two() {
        return Err(FloquetError::InvalidArgument(format!(
            "state length {len} is not a power of two"
        )));
    }
    Ok(len.trailing_zeros() as usize)
}

/// `ab - ba`, expanded term by term.
pub fn commutator(a: &SpinOperator, b: &SpinOperator) -> SpinOperator {
    let mut out = SpinOperator::zero();
    let two = Complex64::new(2.0, 0.0);
    for (sa, ca) in &a.terms {
        for (sb, cb) in &b.terms {
            if sa.commutes_with(sb) {
                continue;
            }
            // anticommuting strings: ab - ba = 2ab
            let (phase, s) = multiply(sa, sb);
            out.add_term(s, two * ca * cb * phase.to_complex());
        }
    }
    out.canonicalize()
}

/// `[a, [a, ... [a, b]]]` with `depth` commutators; depth 0 returns `b`.
pub fn nested_commutator(a: &SpinOperator, b: &SpinOperator, depth: usize) -> SpinOperator {
    (0..depth).fold(b.clone(), |acc, _| commutator(a, &acc))
}

impl fmt::Display for SpinOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (s, c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            if c.im == 0.0 {
                write!(f, "{}*{}", c.re, s)?;
            } else {
                write!(f, "({}{:+}i)*{}", c.re, c.im, s)?;
            }
            first = false;
        }
        Ok(())
    }
}

impl Add for &SpinOperator {
    type Output = SpinOperator;

    fn add(self, rhs: &SpinOperator) -> SpinOperator {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Add for SpinOperator {
    type Output = SpinOperator;

    fn add(self, rhs: SpinOperator) -> SpinOperator {
        &self + &rhs
    }
}

impl AddAssign<&SpinOperator> for SpinOperator {
    fn add_assign(&mut self, rhs: &SpinOperator) {
        for (s, c) in &rhs.terms {
            self.add_term(s.clone(), *c);
        }
        *self = std::mem::take(self).canonicalize();
    }
}

impl Sub for &SpinOperator {
    type Output = SpinOperator;

    fn sub(self, rhs: &SpinOperator) -> SpinOperator {
        let mut out = self.clone();
        for (s, c) in &rhs.terms {
            out.add_term(s.clone(), -c);
        }
        out.canonicalize()
    }
}

impl Sub for SpinOperator {
    type Output = SpinOperator;

    fn sub(self, rhs: SpinOperator) -> SpinOperator {
        &self - &rhs
    }
}

impl Neg for &SpinOperator {
    type Output = SpinOperator;

    fn neg(self) -> SpinOperator {
        self.scale_real(-1.0)
    }
}

impl Mul<f64> for &SpinOperator {
    type Output = SpinOperator;

    fn mul(self, rhs: f64) -> SpinOperator {
        self.scale_real(rhs)
    }
}

impl Mul<Complex64> for &SpinOperator {
    type Output = SpinOperator;

    fn mul(self, rhs: Complex64) -> SpinOperator {
        self.scale(rhs)
    }
}
