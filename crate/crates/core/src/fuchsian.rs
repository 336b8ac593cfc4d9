//! Genus-2 surface group words and representations into SO⁺(2,1).

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use nalgebra::Matrix3;
use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, IsometryKind, Result};
use crate::dd::{Dd, DdMat3};
use crate::lorentz::{self, group_inv, GroupElem, LieAlg};
use crate::tol;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Gen {
    A1,
    B1,
    A2,
    B2,
}

impl Gen {
    pub const ALL: [Gen; 4] = [Gen::A1, Gen::B1, Gen::A2, Gen::B2];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Gen::A1 => "a1",
            Gen::B1 => "b1",
            Gen::A2 => "a2",
            Gen::B2 => "b2",
        }
    }
}

impl FromStr for Gen {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "a1" => Ok(Gen::A1),
            "b1" => Ok(Gen::B1),
            "a2" => Ok(Gen::A2),
            "b2" => Ok(Gen::B2),
            _ => Err(Error::ParseWord(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Letter {
    pub gen: Gen,
    pub inv: bool,
}

impl Letter {
    pub fn new(gen: Gen, inv: bool) -> Self {
        Self { gen, inv }
    }

    pub fn inverse(self) -> Self {
        Self {
            gen: self.gen,
            inv: !self.inv,
        }
    }

    /// 0..8, generators first then their inverses interleaved.
    pub fn code(self) -> usize {
        2 * self.gen.index() + self.inv as usize
    }

    pub fn from_code(c: usize) -> Self {
        Self {
            gen: Gen::ALL[c / 2],
            inv: c % 2 == 1,
        }
    }
}

/// A freely reduced word in a1, b1, a2, b2 and their inverses.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct Word(Vec<Letter>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    /// Builds a word, cancelling adjacent inverse pairs.
    pub fn new(letters: impl IntoIterator<Item = Letter>) -> Self {
        let mut out: Vec<Letter> = Vec::new();
        for l in letters {
            if out.last() == Some(&l.inverse()) {
                out.pop();
            } else {
                out.push(l);
            }
        }
        Word(out)
    }

    pub fn gen(g: Gen) -> Self {
        Word(vec![Letter::new(g, false)])
    }

    /// [a1,b1][a2,b2] with [x,y] = x y x⁻¹ y⁻¹.
    pub fn relator() -> Self {
        "a1 b1 A1 B1 a2 b2 A2 B2".parse().unwrap()
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn inverse(&self) -> Self {
        Word(self.0.iter().rev().map(|l| l.inverse()).collect())
    }

    pub fn concat(&self, other: &Word) -> Self {
        Word::new(self.0.iter().chain(other.0.iter()).copied())
    }

    pub fn split_at(&self, k: usize) -> (Word, Word) {
        let (a, b) = self.0.split_at(k);
        (Word(a.to_vec()), Word(b.to_vec()))
    }

    pub fn is_cyclically_reduced(&self) -> bool {
        match (self.0.first(), self.0.last()) {
            (Some(f), Some(l)) => self.0.len() == 1 || *f != l.inverse(),
            _ => true,
        }
    }

    pub fn cyclic_reduce(&self) -> Self {
        let mut s = &self.0[..];
        while s.len() >= 2 && s[0] == s[s.len() - 1].inverse() {
            s = &s[1..s.len() - 1];
        }
        Word(s.to_vec())
    }

    /// Whether the two words are conjugate in the free group.
    pub fn free_conjugate(&self, other: &Word) -> bool {
        let a = self.cyclic_reduce();
        let b = other.cyclic_reduce();
        if a.len() != b.len() {
            return false;
        }
        if a.is_empty() {
            return true;
        }
        let n = a.len();
        (0..n).any(|r| (0..n).all(|i| a.0[(i + r) % n] == b.0[i]))
    }
}

impl fmt::Display for Word {
    /// Lower case for generators, upper case for inverses, space separated; `1` for the empty word.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        for (i, l) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            let n = l.gen.name();
            if l.inv {
                write!(f, "{}", n.to_ascii_uppercase())?;
            } else {
                write!(f, "{n}")?;
            }
        }
        Ok(())
    }
}

impl FromStr for Word {
    type Err = Error;

    /// Accepts `a1 b1^-1 A2`, `a1.B1`, `a1*b1` or `a1B1`; `A1` is the inverse of `a1`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::ParseWord(s.to_string());
        let chars: Vec<char> = s.chars().collect();
        let mut letters = Vec::new();
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            if c.is_whitespace() || c == '.' || c == '*' || (c == '1' && letters.is_empty() && chars.len() == 1) {
                i += 1;
                continue;
            }
            if i + 1 >= chars.len() {
                return Err(bad());
            }
            let name: String = [c, chars[i + 1]].iter().collect();
            let gen: Gen = name.parse().map_err(|_| bad())?;
            let mut inv = c.is_ascii_uppercase();
            i += 2;
            let rest: String = chars[i..].iter().collect();
            if rest.starts_with("^-1") {
                inv = !inv;
                i += 3;
            } else if rest.starts_with("^1") {
                i += 2;
            }
            letters.push(Letter::new(gen, inv));
        }
        Ok(Word::new(letters))
    }
}

impl Serialize for Word {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Word {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A representation of the genus-2 surface group, given on a1, b1, a2, b2.
///
/// Generators and their inverses are stored in double-double precision; `evaluate`
/// multiplies in that precision and rounds the product once.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceGroupRep {
    gens_dd: [DdMat3; 4],
    invs_dd: [DdMat3; 4],
    gens: [GroupElem; 4],
    invs: [GroupElem; 4],
    pub label: String,
}

impl SurfaceGroupRep {
    /// Validates group membership, hyperbolicity of the generators and the relator.
    pub fn new(gens: [GroupElem; 4], label: impl Into<String>) -> Result<Self> {
        Self::new_unchecked(gens, label).validated()
    }

    pub fn new_unchecked(gens: [GroupElem; 4], label: impl Into<String>) -> Self {
        Self::from_dd(gens.map(|g| DdMat3::from_f64(&g)), label)
    }

    /// Builds from extended precision generators; inverses by the adjugate.
    pub fn from_dd(gens: [DdMat3; 4], label: impl Into<String>) -> Self {
        let invs = gens.map(|g| g.inverse());
        Self::from_dd_pairs(gens, invs, label)
    }

    pub(crate) fn from_dd_pairs(gens_dd: [DdMat3; 4], invs_dd: [DdMat3; 4], label: impl Into<String>) -> Self {
        Self {
            gens: gens_dd.map(|g| g.to_f64()),
            invs: invs_dd.map(|g| g.to_f64()),
            gens_dd,
            invs_dd,
            label: label.into(),
        }
    }

    /// Checks the invariants and returns self.
    pub fn validated(self) -> Result<Self> {
        for g in &self.gens {
            lorentz::check_group_elem(g)?;
            translation_length(g)?;
        }
        let r = self.relator_residual();
        if r > tol::RELATOR {
            return Err(Error::Relator(r));
        }
        Ok(self)
    }

    pub fn generators(&self) -> &[GroupElem; 4] {
        &self.gens
    }

    pub fn generator(&self, g: Gen) -> &GroupElem {
        &self.gens[g.index()]
    }

    pub fn generator_dd(&self, g: Gen) -> &DdMat3 {
        &self.gens_dd[g.index()]
    }

    pub fn generator_inv_dd(&self, g: Gen) -> &DdMat3 {
        &self.invs_dd[g.index()]
    }

    pub fn letter(&self, l: Letter) -> &GroupElem {
        if l.inv {
            &self.invs[l.gen.index()]
        } else {
            &self.gens[l.gen.index()]
        }
    }

    pub fn letter_dd(&self, l: Letter) -> &DdMat3 {
        if l.inv {
            &self.invs_dd[l.gen.index()]
        } else {
            &self.gens_dd[l.gen.index()]
        }
    }

    /// Replaces one generator (and its inverse), keeping the rest.
    pub fn with_generator_dd(&self, g: Gen, value: DdMat3, inverse: DdMat3) -> Self {
        let mut gens = self.gens_dd;
        let mut invs = self.invs_dd;
        gens[g.index()] = value;
        invs[g.index()] = inverse;
        Self::from_dd_pairs(gens, invs, self.label.clone())
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn evaluate(&self, w: &Word) -> GroupElem {
        self.evaluate_dd(w).to_f64()
    }

    pub fn evaluate_dd(&self, w: &Word) -> DdMat3 {
        w.letters()
            .iter()
            .fold(DdMat3::identity(), |acc, l| acc * *self.letter_dd(*l))
    }

    /// ‖σ([a1,b1][a2,b2]) − I‖_F.
    pub fn relator_residual(&self) -> f64 {
        (self.evaluate_dd(&Word::relator()) - DdMat3::identity()).frobenius()
    }

    /// Conjugate every generator by h, i.e. g ↦ h g h⁻¹.
    pub fn conjugate(&self, h: &GroupElem) -> Self {
        self.conjugate_dd(&DdMat3::from_f64(h))
    }

    pub fn conjugate_dd(&self, h: &DdMat3) -> Self {
        let hi = h.inverse();
        Self::from_dd_pairs(
            self.gens_dd.map(|g| *h * g * hi),
            self.invs_dd.map(|g| *h * g * hi),
            self.label.clone(),
        )
    }

    /// Entrywise agreement of generators.
    pub fn same_as(&self, other: &SurfaceGroupRep, tol: f64) -> bool {
        self.gens
            .iter()
            .zip(other.gens.iter())
            .all(|(a, b)| (a - b).norm() <= tol * (1.0 + a.norm()))
    }
}

pub fn evaluate(w: &Word, rep: &SurfaceGroupRep) -> GroupElem {
    rep.evaluate(w)
}

/// Serialized form: four row-major 3×3 generator matrices and a label. The optional
/// `generators_lo` holds the rounding remainders so that a file reproduces the
/// representation exactly.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RepFile {
    pub generators: Vec<[[f64; 3]; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generators_lo: Option<Vec<[[f64; 3]; 3]>>,
    pub label: String,
}

fn rows(m: &Matrix3<f64>) -> [[f64; 3]; 3] {
    [0, 1, 2].map(|i| [0, 1, 2].map(|j| m[(i, j)]))
}

fn from_rows(a: &[[f64; 3]; 3]) -> Matrix3<f64> {
    Matrix3::from_fn(|i, j| a[i][j])
}

impl From<&SurfaceGroupRep> for RepFile {
    fn from(rep: &SurfaceGroupRep) -> Self {
        RepFile {
            generators: rep.gens.iter().map(rows).collect(),
            generators_lo: Some(rep.gens_dd.iter().map(|g| rows(&g.lo_part())).collect()),
            label: rep.label.clone(),
        }
    }
}

impl TryFrom<RepFile> for SurfaceGroupRep {
    type Error = Error;
    fn try_from(f: RepFile) -> Result<Self> {
        if f.generators.len() != 4 {
            return Err(Error::Config(format!(
                "expected 4 generators, found {}",
                f.generators.len()
            )));
        }
        let lo = match &f.generators_lo {
            Some(lo) if lo.len() == 4 => lo.iter().map(from_rows).collect(),
            Some(lo) => {
                return Err(Error::Config(format!(
                    "expected 4 low-order generator parts, found {}",
                    lo.len()
                )))
            }
            None => vec![Matrix3::zeros(); 4],
        };
        let gens: [DdMat3; 4] = std::array::from_fn(|k| DdMat3::from_parts(&from_rows(&f.generators[k]), &lo[k]));
        SurfaceGroupRep::from_dd(gens, f.label).validated()
    }
}

impl Serialize for SurfaceGroupRep {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        RepFile::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for SurfaceGroupRep {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let f = RepFile::deserialize(d)?;
        SurfaceGroupRep::try_from(f).map_err(serde::de::Error::custom)
    }
}

/// Side length ℓ₈ = 2 arccosh(1 + √2) of the pairing translations of the regular octagon
/// with interior angle π/4.
pub fn octagon_length() -> f64 {
    2.0 * (1.0 + 2f64.sqrt()).acosh()
}

/// Rotation by θ about the base point, counterclockwise in the xy-plane.
pub fn rotation(theta: f64) -> GroupElem {
    let (s, c) = theta.sin_cos();
    Matrix3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0)
}

fn octagon_side_pairings_dd() -> [DdMat3; 4] {
    let r2 = Dd::new(2.0).sqrt();
    let half = r2.ldexp(-1);
    // cosh ℓ₈ = 2 cosh²(ℓ₈/2) − 1 = 5 + 4√2, sinh ℓ₈ = √(56 + 40√2).
    let c = Dd::new(5.0) + Dd::new(4.0) * r2;
    let s = (Dd::new(56.0) + Dd::new(40.0) * r2).sqrt();
    let z = Dd::ZERO;
    let o = Dd::ONE;
    let t = DdMat3([[c, z, s], [z, o, z], [s, z, c]]);
    let cs = [(o, z), (half, half), (z, o), (-half, half)];
    cs.map(|(co, si)| {
        let r = DdMat3([[co, -si, z], [si, co, z], [z, z, o]]);
        r * t * r.transpose()
    })
}

/// The side pairings g_k = R_k T R_k⁻¹ of the regular octagon centred at the base point,
/// k = 0..4, with R_k the rotation by kπ/4 and T the translation by ℓ₈ along the x axis.
/// g_k maps the side facing direction kπ/4 + π onto the side facing kπ/4.
pub fn octagon_side_pairings() -> [GroupElem; 4] {
    octagon_side_pairings_dd().map(|g| g.to_f64())
}

/// Side pairings g0..g3 written in the standard generators.
pub fn side_pairing_words() -> [Word; 4] {
    [
        "B1".parse().unwrap(),
        "a1".parse().unwrap(),
        "A2 b1 a1".parse().unwrap(),
        "B2 A2 b1 a1".parse().unwrap(),
    ]
}

/// The Fuchsian representation of the regular octagon surface.
///
/// With g_k the side pairings, a1 = g1, b1 = g0⁻¹, a2 = g0⁻¹ g1 g2⁻¹, b2 = g2 g3⁻¹.
/// Every generator translates by ℓ₈.
pub fn octagon_representation() -> SurfaceGroupRep {
    let g = octagon_side_pairings_dd();
    let gi = g.map(|x| x.inverse());
    let gens = [g[1], gi[0], gi[0] * g[1] * gi[2], g[2] * gi[3]];
    SurfaceGroupRep::from_dd(gens, "sigma")
        .validated()
        .expect("octagon representation must satisfy the relator")
}

pub fn classify(g: &GroupElem) -> IsometryKind {
    let tr = g.trace();
    if (tr - 3.0).abs() <= tol::HYPERBOLIC {
        IsometryKind::Parabolic
    } else if tr < 3.0 {
        IsometryKind::Elliptic
    } else {
        IsometryKind::Hyperbolic
    }
}

/// Translation length from Tr g = 1 + 2 cosh l.
pub fn translation_length(g: &GroupElem) -> Result<f64> {
    let tr = g.trace();
    match classify(g) {
        IsometryKind::Hyperbolic => Ok((0.5 * (tr - 1.0)).acosh()),
        kind => Err(Error::NotHyperbolic { kind, trace: tr }),
    }
}

/// The unit generator B of the one-parameter group through g, with exp(l B) = g.
pub fn axis_generator(g: &GroupElem) -> Result<LieAlg> {
    let l = translation_length(g)?;
    Ok((g - group_inv(g)) / (2.0 * l.sinh()))
}

/// l_ρ(w) / l_σ(w).
pub fn stretch_ratio(w: &Word, sigma: &SurfaceGroupRep, rho: &SurfaceGroupRep) -> Result<f64> {
    let ls = translation_length(&sigma.evaluate(w))?;
    let lr = translation_length(&rho.evaluate(w))?;
    Ok(lr / ls)
}

/// Largest stretch ratio over the list. Words that are not hyperbolic in either
/// representation are skipped with a warning. Returns 0 for an empty list.
pub fn k_lower_bound(words: &[Word], sigma: &SurfaceGroupRep, rho: &SurfaceGroupRep) -> f64 {
    words
        .par_iter()
        .filter_map(|w| match stretch_ratio(w, sigma, rho) {
            Ok(r) => Some(r),
            Err(e) => {
                log::warn!("skipping {w}: {e}");
                None
            }
        })
        .reduce(|| 0.0, f64::max)
}

/// All freely reduced words of length 1..=max_len.
pub fn reduced_words(max_len: usize) -> Vec<Word> {
    let mut out = Vec::new();
    let mut frontier: Vec<Word> = vec![Word::empty()];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for w in &frontier {
            for c in 0..8 {
                let l = Letter::from_code(c);
                if w.letters().last() == Some(&l.inverse()) {
                    continue;
                }
                let mut v = w.0.clone();
                v.push(l);
                next.push(Word(v));
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

/// Result of an enumerated K lower bound.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KBound {
    pub value: f64,
    pub word: Option<Word>,
    pub max_len: usize,
    /// Number of cyclically reduced words visited.
    pub visited: usize,
    /// Number of distinct (Tr σ, Tr ρ) buckets, a proxy for conjugacy classes.
    pub classes: usize,
}

fn bucket(tr: f64) -> i64 {
    (tr * 1e8).round() as i64
}

/// K lower bound over all cyclically reduced words up to `max_len`, sharded by first letter.
pub fn k_bound_enumerated(max_len: usize, sigma: &SurfaceGroupRep, rho: &SurfaceGroupRep) -> KBound {
    struct Shard {
        best: f64,
        word: Option<Vec<Letter>>,
        visited: usize,
        keys: HashSet<(i64, i64)>,
    }

    fn dfs(
        path: &mut Vec<Letter>,
        ms: GroupElem,
        mr: GroupElem,
        max_len: usize,
        sigma: &SurfaceGroupRep,
        rho: &SurfaceGroupRep,
        sh: &mut Shard,
    ) {
        let first = path[0];
        let last = *path.last().unwrap();
        if path.len() == 1 || last != first.inverse() {
            let (ts, tr) = (ms.trace(), mr.trace());
            sh.visited += 1;
            if sh.keys.insert((bucket(ts), bucket(tr))) {
                if let (Ok(ls), Ok(lr)) = (translation_length(&ms), translation_length(&mr)) {
                    let r = lr / ls;
                    if r > sh.best {
                        sh.best = r;
                        sh.word = Some(path.clone());
                    }
                }
            }
        }
        if path.len() == max_len {
            return;
        }
        for c in 0..8 {
            let l = Letter::from_code(c);
            if l == last.inverse() {
                continue;
            }
            path.push(l);
            dfs(path, ms * sigma.letter(l), mr * rho.letter(l), max_len, sigma, rho, sh);
            path.pop();
        }
    }

    if max_len == 0 {
        return KBound {
            value: 0.0,
            word: None,
            max_len,
            visited: 0,
            classes: 0,
        };
    }
    let shards: Vec<Shard> = (0..8)
        .into_par_iter()
        .map(|c| {
            let l = Letter::from_code(c);
            let mut sh = Shard {
                best: 0.0,
                word: None,
                visited: 0,
                keys: HashSet::new(),
            };
            let mut path = vec![l];
            dfs(&mut path, *sigma.letter(l), *rho.letter(l), max_len, sigma, rho, &mut sh);
            sh
        })
        .collect();

    let mut keys = HashSet::new();
    let mut best = 0.0;
    let mut word = None;
    let mut visited = 0;
    for sh in shards {
        visited += sh.visited;
        keys.extend(sh.keys);
        if sh.best > best {
            best = sh.best;
            word = sh.word.map(Word);
        }
    }
    KBound {
        value: best,
        word,
        max_len,
        visited,
        classes: keys.len(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lorentz::{ad, b_perp_std, b_std, exp_so21, killing, n_hat_std};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn w(s: &str) -> Word {
        s.parse().unwrap()
    }

    #[test]
    fn word_parsing_and_reduction() {
        assert_eq!(w("a1 A1"), Word::empty());
        assert_eq!(w("a1^-1"), w("A1"));
        assert_eq!(w("a1B1a2"), w("a1 b1^-1 a2"));
        assert_eq!(w("a1 b1 B1 a2").to_string(), "a1 a2");
        assert_eq!(Word::relator().len(), 8);
        assert!(w("a1 b1 A1").cyclic_reduce() == w("b1"));
        assert!(w("a1 b1 a2").free_conjugate(&w("a2 a1 b1")));
        assert!(!w("a1 b1").free_conjugate(&w("b1 b1")));
        assert!("x3".parse::<Word>().is_err());
        assert_eq!(w("1"), Word::empty());
        let json = serde_json::to_string(&w("a1 B2")).unwrap();
        assert_eq!(serde_json::from_str::<Word>(&json).unwrap(), w("a1 B2"));
    }

    #[test]
    fn octagon_relator_and_lengths() {
        let rep = octagon_representation();
        assert!(rep.relator_residual() <= 1e-9);
        let l8 = octagon_length();
        assert_abs_diff_eq!(l8, 3.057141839, epsilon = 1e-8);
        for g in Gen::ALL {
            let l = translation_length(rep.generator(g)).unwrap();
            assert_abs_diff_eq!(l, l8, epsilon = 1e-9);
        }
        let c = rep.evaluate(&w("a1 a2 A1 A2"));
        assert!((c - Matrix3::identity()).norm() > 0.1);
    }

    #[test]
    fn side_pairing_words_match() {
        let rep = octagon_representation();
        for (g, word) in octagon_side_pairings().iter().zip(side_pairing_words().iter()) {
            assert_abs_diff_eq!(rep.evaluate(word), *g, epsilon = 1e-9);
        }
    }

    #[test]
    fn evaluate_trivial_words() {
        let rep = octagon_representation();
        assert_eq!(rep.evaluate(&Word::empty()), Matrix3::identity());
        assert_eq!(rep.evaluate(&w("a1 A1")), Matrix3::identity());
    }

    #[test]
    fn translation_length_examples() {
        let g = exp_so21(&(b_std() * 2.5));
        assert_abs_diff_eq!(translation_length(&g).unwrap(), 2.5, epsilon = 1e-12);
        assert!(matches!(
            translation_length(&Matrix3::identity()),
            Err(Error::NotHyperbolic { kind: IsometryKind::Parabolic, .. })
        ));
        assert!(matches!(
            translation_length(&exp_so21(&n_hat_std())),
            Err(Error::NotHyperbolic { kind: IsometryKind::Elliptic, .. })
        ));
    }

    #[test]
    fn axis_generator_examples() {
        let g = exp_so21(&(b_std() * 3.0));
        assert_abs_diff_eq!(axis_generator(&g).unwrap(), b_std(), epsilon = 1e-12);
        let rep = octagon_representation();
        for g in rep.generators() {
            let b = axis_generator(g).unwrap();
            assert_abs_diff_eq!(killing(&b, &b), 2.0, epsilon = 1e-12);
            let l = translation_length(g).unwrap();
            assert!((exp_so21(&(b * l)) - g).norm() <= 1e-9 * g.norm());
            assert!((ad(g, &b) - b).norm() <= 1e-9 * g.norm());
        }
    }

    #[test]
    fn rep_json_round_trip_validates() {
        let rep = octagon_representation();
        let s = serde_json::to_string(&rep).unwrap();
        let back: SurfaceGroupRep = serde_json::from_str(&s).unwrap();
        assert!(back.same_as(&rep, 1e-15));
        let mut f = RepFile::from(&rep);
        f.generators[0][0][1] += 0.1;
        assert!(SurfaceGroupRep::try_from(f).is_err());
    }

    #[test]
    fn k_bound_identity_is_one() {
        let rep = octagon_representation();
        let words = reduced_words(3);
        assert_eq!(k_lower_bound(&words, &rep, &rep), 1.0);
        let kb = k_bound_enumerated(4, &rep, &rep);
        assert_abs_diff_eq!(kb.value, 1.0, epsilon = 1e-12);
        assert!(kb.classes < kb.visited);
    }

    #[test]
    fn reduced_word_counts() {
        // 8 + 8·7 + 8·7²
        assert_eq!(reduced_words(3).len(), 8 + 56 + 392);
    }

    fn arb_word(max: usize) -> impl Strategy<Value = Word> {
        prop::collection::vec(0usize..8, 0..max).prop_map(|v| Word::new(v.into_iter().map(Letter::from_code)))
    }

    fn arb_lie() -> impl Strategy<Value = LieAlg> {
        (-1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64)
            .prop_map(|(b, a, z)| b_std() * b + b_perp_std() * a + n_hat_std() * z)
    }

    proptest! {
        #[test]
        fn evaluate_is_homomorphism(u in arb_word(6), v in arb_word(6)) {
            let rep = octagon_representation();
            let lhs = rep.evaluate(&u.concat(&v));
            let (gu, gv) = (rep.evaluate(&u), rep.evaluate(&v));
            let rhs = gu * gv;
            // f64 product error scales with the factors, not with the (possibly cancelled) result
            prop_assert!((lhs - rhs).norm() <= 1e-14 * (1.0 + lhs.norm() + gu.norm() * gv.norm()));
        }

        #[test]
        fn length_of_exp(t in 0.1..5.0f64, a in arb_lie()) {
            let h = exp_so21(&a);
            let g = exp_so21(&(ad(&h, &b_std()) * t));
            prop_assert!((translation_length(&g).unwrap() - t).abs() <= 1e-9);
        }

        #[test]
        fn axis_generator_equivariant(a in arb_lie(), k in 0usize..4) {
            let rep = octagon_representation();
            let h = exp_so21(&a);
            let g = rep.generators()[k];
            let lhs = axis_generator(&(h * g * group_inv(&h))).unwrap();
            let rhs = ad(&h, &axis_generator(&g).unwrap());
            prop_assert!((lhs - rhs).norm() <= 1e-9 * (1.0 + rhs.norm()));
        }
    }
}
