//! Torus bundles over the torus with zero Euler class: monodromy pairs, their
//! classification, the lattice `Gamma` acting on the cover `R^4`, the fiber
//! period `omega(x)` and the left-invariant coframe.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// 2x2 integer matrix, row-major.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct IntMat2(pub [[i64; 2]; 2]);

impl IntMat2 {
    pub const IDENTITY: Self = Self([[1, 0], [0, 1]]);
    pub const NEG_IDENTITY: Self = Self([[-1, 0], [0, -1]]);

    pub const fn new(alpha: i64, beta: i64, gamma: i64, delta: i64) -> Self {
        Self([[alpha, beta], [gamma, delta]])
    }

    pub fn alpha(&self) -> i64 {
        self.0[0][0]
    }
    pub fn beta(&self) -> i64 {
        self.0[0][1]
    }
    pub fn gamma(&self) -> i64 {
        self.0[1][0]
    }
    pub fn delta(&self) -> i64 {
        self.0[1][1]
    }

    pub fn det(&self) -> i64 {
        self.alpha() * self.delta() - self.beta() * self.gamma()
    }

    pub fn trace(&self) -> i64 {
        self.alpha() + self.delta()
    }

    pub fn mul(&self, other: &Self) -> Self {
        let (a, b) = (self.0, other.0);
        Self([
            [a[0][0] * b[0][0] + a[0][1] * b[1][0], a[0][0] * b[0][1] + a[0][1] * b[1][1]],
            [a[1][0] * b[0][0] + a[1][1] * b[1][0], a[1][0] * b[0][1] + a[1][1] * b[1][1]],
        ])
    }

    /// Inverse of a determinant-one matrix.
    pub fn inverse_sl2(&self) -> Self {
        Self::new(self.delta(), -self.beta(), -self.gamma(), self.alpha())
    }

    pub fn pow(&self, n: i64) -> Self {
        let base = if n < 0 { self.inverse_sl2() } else { *self };
        (0..n.unsigned_abs()).fold(Self::IDENTITY, |acc, _| acc.mul(&base))
    }

    pub fn apply_int(&self, v: (i64, i64)) -> (i64, i64) {
        (self.alpha() * v.0 + self.beta() * v.1, self.gamma() * v.0 + self.delta() * v.1)
    }

    pub fn apply<T: Real>(&self, s: T, t: T) -> (T, T) {
        let m = |v: i64| T::from_int(v);
        (m(self.alpha()) * s + m(self.beta()) * t, m(self.gamma()) * s + m(self.delta()) * t)
    }
}

impl fmt::Display for IntMat2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}; {}, {})", self.alpha(), self.beta(), self.gamma(), self.delta())
    }
}

/// Commuting pair `{A, B}` in `SL(2, Z)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MonodromyPair {
    #[serde(rename = "A")]
    a: IntMat2,
    #[serde(rename = "B")]
    b: IntMat2,
}

impl MonodromyPair {
    pub fn new(a: IntMat2, b: IntMat2) -> Result<Self> {
        if a.det() != 1 || b.det() != 1 {
            return Err(Error::InvalidPair(format!("det A = {}, det B = {}; both must be 1", a.det(), b.det())));
        }
        if a.mul(&b) != b.mul(&a) {
            return Err(Error::InvalidPair(format!("A = {a} and B = {b} do not commute")));
        }
        Ok(Self { a, b })
    }

    pub fn a(&self) -> IntMat2 {
        self.a
    }

    pub fn b(&self) -> IntMat2 {
        self.b
    }
}

/// Row of the classification table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BundleTag {
    A,
    B1,
    B2,
    B3,
    B4,
    C,
    D,
    E,
    F,
    G,
}

impl BundleTag {
    pub const ALL: [BundleTag; 10] = [
        BundleTag::A,
        BundleTag::B1,
        BundleTag::B2,
        BundleTag::B3,
        BundleTag::B4,
        BundleTag::C,
        BundleTag::D,
        BundleTag::E,
        BundleTag::F,
        BundleTag::G,
    ];

    /// Rows C, D, E carry an integer parameter.
    pub fn has_parameter(self) -> bool {
        matches!(self, BundleTag::C | BundleTag::D | BundleTag::E)
    }
}

impl fmt::Display for BundleTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

impl FromStr for BundleTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        BundleTag::ALL
            .into_iter()
            .find(|tag| tag.to_string().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Unclassified(format!("unknown bundle type {s:?}")))
    }
}

const B1_MATRIX: IntMat2 = IntMat2::new(0, -1, 1, -1);
const B2_MATRIX: IntMat2 = IntMat2::new(0, -1, 1, 0);
const B3_MATRIX: IntMat2 = IntMat2::new(1, -1, 1, 0);
const HYPERBOLIC_REPRESENTATIVE: IntMat2 = IntMat2::new(2, 1, 1, 1);

/// Eigen-data of a hyperbolic `A`, used by the F and G rows of the period table.
///
/// With `sigma = sign(tr A)`: `sigma A^T (u+, v+) = lambda (u+, v+)`,
/// `sigma A^T (u-, v-) = lambda^{-1} (u-, v-)`, `lambda > 1` and
/// `u+ v- - u- v+ = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HyperbolicData<T> {
    pub lambda: T,
    pub u_plus: T,
    pub v_plus: T,
    pub u_minus: T,
    pub v_minus: T,
    /// Sign of the trace; eigen-data belongs to `sign * A`.
    pub sign: i64,
}

impl<T: Real> HyperbolicData<T> {
    fn from_matrix(a: IntMat2) -> Self {
        let sign = a.trace().signum();
        let tr = T::from_int(a.trace().abs());
        let two = T::lit(2.0);
        let lambda = (tr + (tr * tr - T::lit(4.0)).sqrt()) / two;
        let sa = T::from_int(sign * a.alpha());
        let sg = T::from_int(sign * a.gamma());
        // gamma != 0 for every hyperbolic matrix: gamma = 0 forces alpha = delta = +-1
        let u_plus = sg;
        let v_plus = lambda - sa;
        let scale = T::one() / (sg * (lambda.recip() - lambda));
        let u_minus = sg * scale;
        let v_minus = (lambda.recip() - sa) * scale;
        Self { lambda, u_plus, v_plus, u_minus, v_minus, sign }
    }
}

/// A classified bundle: its table row, parameter, monodromy and derived data.
#[derive(Debug, Clone, PartialEq)]
pub struct BundleType<T> {
    tag: BundleTag,
    parameter: Option<i64>,
    pair: MonodromyPair,
    hyperbolic: Option<HyperbolicData<T>>,
}

/// Classifies a pair against the table. Elliptic rows are matched by their
/// exact normal forms, parabolic rows by the upper-triangular normal forms and
/// hyperbolic rows by the trace.
pub fn classify<T: Real>(pair: MonodromyPair) -> Result<BundleType<T>> {
    let a = pair.a();
    let b = pair.b();
    let upper = |diag: i64| a.alpha() == diag && a.delta() == diag && a.gamma() == 0 && a.beta() != 0;
    let found = if b == IntMat2::IDENTITY {
        if a == IntMat2::IDENTITY {
            Some((BundleTag::A, None))
        } else if a == IntMat2::NEG_IDENTITY {
            Some((BundleTag::B4, None))
        } else if a == B1_MATRIX {
            Some((BundleTag::B1, None))
        } else if a == B2_MATRIX {
            Some((BundleTag::B2, None))
        } else if a == B3_MATRIX {
            Some((BundleTag::B3, None))
        } else if upper(1) {
            Some((BundleTag::C, Some(a.beta())))
        } else if upper(-1) {
            Some((BundleTag::D, Some(a.beta())))
        } else if a.trace().abs() > 2 {
            Some((BundleTag::F, None))
        } else {
            None
        }
    } else if b == IntMat2::NEG_IDENTITY {
        if upper(1) {
            Some((BundleTag::E, Some(a.beta())))
        } else if a.trace() > 2 {
            Some((BundleTag::G, None))
        } else {
            None
        }
    } else {
        None
    };
    let (tag, parameter) =
        found.ok_or_else(|| Error::Unclassified(format!("A = {a}, B = {b} is not a normal form of the table")))?;
    let hyperbolic = matches!(tag, BundleTag::F | BundleTag::G).then(|| HyperbolicData::from_matrix(a));
    Ok(BundleType { tag, parameter, pair, hyperbolic })
}

/// Coordinates `(x, y, s, t)` on the universal cover.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct TotalPoint<T> {
    pub x: T,
    pub y: T,
    pub s: T,
    pub t: T,
}

impl<T: Real> TotalPoint<T> {
    pub fn new(x: T, y: T, s: T, t: T) -> Self {
        Self { x, y, s, t }
    }

    pub fn from_array(c: [T; 4]) -> Self {
        Self::new(c[0], c[1], c[2], c[3])
    }

    pub fn to_array(self) -> [T; 4] {
        [self.x, self.y, self.s, self.t]
    }

    /// Moves coordinate `axis` (0..4 for x, y, s, t) by `h`.
    pub fn shifted(self, axis: usize, h: T) -> Self {
        let mut c = self.to_array();
        c[axis] += h;
        Self::from_array(c)
    }

    pub fn max_abs_diff(self, other: Self) -> T {
        let (a, b) = (self.to_array(), other.to_array());
        (0..4).map(|i| (a[i] - b[i]).abs()).fold(T::zero(), T::max)
    }
}

/// Generators of `Gamma`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Gen {
    A,
    B,
    C,
    D,
}

impl Gen {
    pub const ALL: [Gen; 4] = [Gen::A, Gen::B, Gen::C, Gen::D];
}

impl fmt::Display for Gen {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Gen::A => "a",
            Gen::B => "b",
            Gen::C => "c",
            Gen::D => "d",
        })
    }
}

impl FromStr for Gen {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "a" | "A" => Ok(Gen::A),
            "b" | "B" => Ok(Gen::B),
            "c" | "C" => Ok(Gen::C),
            "d" | "D" => Ok(Gen::D),
            _ => Err(Error::InvalidArgument(format!("unknown generator {s:?}"))),
        }
    }
}

/// One letter `gen^power` of a word.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Letter {
    pub gen: Gen,
    pub power: i64,
}

impl Letter {
    pub fn new(gen: Gen, power: i64) -> Self {
        Self { gen, power }
    }
}

/// Product of letters, read left to right; it acts on points right to left.
pub type Word = Vec<Letter>;

/// Element `a^na b^nb c^nc d^nd` of `Gamma`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct GroupElement {
    pub na: i64,
    pub nb: i64,
    pub nc: i64,
    pub nd: i64,
}

impl GroupElement {
    pub const IDENTITY: Self = Self { na: 0, nb: 0, nc: 0, nd: 0 };

    pub fn new(na: i64, nb: i64, nc: i64, nd: i64) -> Self {
        Self { na, nb, nc, nd }
    }

    pub fn generator(gen: Gen) -> Self {
        Self::power(gen, 1)
    }

    pub fn power(gen: Gen, n: i64) -> Self {
        match gen {
            Gen::A => Self::new(n, 0, 0, 0),
            Gen::B => Self::new(0, n, 0, 0),
            Gen::C => Self::new(0, 0, n, 0),
            Gen::D => Self::new(0, 0, 0, n),
        }
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::IDENTITY
    }

    /// The normal form as a word; empty letters are dropped.
    pub fn word(&self) -> Word {
        [(Gen::A, self.na), (Gen::B, self.nb), (Gen::C, self.nc), (Gen::D, self.nd)]
            .into_iter()
            .filter(|&(_, n)| n != 0)
            .map(|(g, n)| Letter::new(g, n))
            .collect()
    }
}

impl<T: Real> BundleType<T> {
    /// Table representative. `parameter` is required for C, D, E and ignored otherwise.
    pub fn representative(tag: BundleTag, parameter: Option<i64>) -> Result<Self> {
        let k = match (tag.has_parameter(), parameter) {
            (true, Some(0)) | (true, None) => {
                return Err(Error::Unclassified(format!("type {tag} needs a nonzero integer parameter")))
            }
            (true, Some(k)) => k,
            (false, _) => 0,
        };
        let (a, b) = match tag {
            BundleTag::A => (IntMat2::IDENTITY, IntMat2::IDENTITY),
            BundleTag::B1 => (B1_MATRIX, IntMat2::IDENTITY),
            BundleTag::B2 => (B2_MATRIX, IntMat2::IDENTITY),
            BundleTag::B3 => (B3_MATRIX, IntMat2::IDENTITY),
            BundleTag::B4 => (IntMat2::NEG_IDENTITY, IntMat2::IDENTITY),
            BundleTag::C => (IntMat2::new(1, k, 0, 1), IntMat2::IDENTITY),
            BundleTag::D => (IntMat2::new(-1, k, 0, -1), IntMat2::IDENTITY),
            BundleTag::E => (IntMat2::new(1, k, 0, 1), IntMat2::NEG_IDENTITY),
            BundleTag::F => (HYPERBOLIC_REPRESENTATIVE, IntMat2::IDENTITY),
            BundleTag::G => (HYPERBOLIC_REPRESENTATIVE, IntMat2::NEG_IDENTITY),
        };
        classify(MonodromyPair::new(a, b)?)
    }

    /// One representative per table row; parametrised rows use `k = 1`.
    pub fn table_representatives() -> Vec<Self> {
        BundleTag::ALL
            .into_iter()
            .map(|tag| Self::representative(tag, Some(1)).expect("table representatives are valid"))
            .collect()
    }

    pub fn tag(&self) -> BundleTag {
        self.tag
    }

    pub fn parameter(&self) -> Option<i64> {
        self.parameter
    }

    pub fn pair(&self) -> MonodromyPair {
        self.pair
    }

    pub fn hyperbolic(&self) -> Option<&HyperbolicData<T>> {
        self.hyperbolic.as_ref()
    }

    /// `+1` when `B = I`, `-1` when `B = -I`.
    pub fn b_sign(&self) -> i64 {
        self.pair.b().alpha()
    }

    /// Short label such as `C(k=1)` or `F`.
    pub fn label(&self) -> String {
        match self.parameter {
            Some(k) => format!("{}(k={k})", self.tag),
            None => self.tag.to_string(),
        }
    }

    /// Fiber period `omega(x)`; `Im omega > 0` everywhere. The torus row uses `i`.
    pub fn omega(&self, x: T) -> Complex<T> {
        let i = Complex::new(T::zero(), T::one());
        match self.tag {
            BundleTag::A | BundleTag::B2 | BundleTag::B4 => i,
            BundleTag::B1 | BundleTag::B3 => Complex::new(T::lit(-0.5), T::lit(3f64.sqrt() / 2.0)),
            BundleTag::C | BundleTag::E => {
                Complex::new(-T::from_int(self.parameter.unwrap_or_default()) * x, T::one())
            }
            BundleTag::D => Complex::new(T::from_int(self.parameter.unwrap_or_default()) * x, T::one()),
            BundleTag::F | BundleTag::G => {
                let h = self.hyperbolic.expect("hyperbolic rows carry eigen-data");
                let down = h.lambda.powf(-x);
                let up = h.lambda.powf(x);
                let num = Complex::new(down * h.v_plus, up * h.v_minus);
                let den = Complex::new(down * h.u_plus, up * h.u_minus);
                num / den
            }
        }
    }

    /// Acts by a single generator power `gen^n`.
    pub fn act_letter(&self, letter: Letter, p: TotalPoint<T>) -> TotalPoint<T> {
        let n = letter.power;
        let nt = T::from_int(n);
        match letter.gen {
            Gen::A => {
                let (s, t) = self.pair.a().pow(n).apply(p.s, p.t);
                TotalPoint::new(p.x + nt, p.y, s, t)
            }
            Gen::B => {
                let (s, t) = self.pair.b().pow(n).apply(p.s, p.t);
                TotalPoint::new(p.x, p.y + nt, s, t)
            }
            Gen::C => TotalPoint::new(p.x, p.y, p.s + nt, p.t),
            Gen::D => TotalPoint::new(p.x, p.y, p.s, p.t + nt),
        }
    }

    /// `g . p` for an element in normal form.
    pub fn act(&self, g: &GroupElement, p: TotalPoint<T>) -> TotalPoint<T> {
        self.apply_word(&g.word(), p)
    }

    /// Applies a word letter by letter, rightmost first.
    pub fn apply_word(&self, word: &[Letter], p: TotalPoint<T>) -> TotalPoint<T> {
        word.iter().rev().fold(p, |q, &letter| self.act_letter(letter, q))
    }

    fn linear_part(&self, g: &GroupElement) -> IntMat2 {
        self.pair.a().pow(g.na).mul(&self.pair.b().pow(g.nb))
    }

    /// Group law: `compose(g1, g2) . p = g1 . (g2 . p)`.
    pub fn compose(&self, g1: &GroupElement, g2: &GroupElement) -> GroupElement {
        let back = self.linear_part(g2).inverse_sl2();
        let (c, d) = back.apply_int((g1.nc, g1.nd));
        GroupElement::new(g1.na + g2.na, g1.nb + g2.nb, g2.nc + c, g2.nd + d)
    }

    pub fn inverse(&self, g: &GroupElement) -> GroupElement {
        let (c, d) = self.linear_part(g).apply_int((g.nc, g.nd));
        GroupElement::new(-g.na, -g.nb, -c, -d)
    }

    /// Reduces a word to normal form with the group law.
    pub fn element_of_word(&self, word: &[Letter]) -> GroupElement {
        word.iter()
            .fold(GroupElement::IDENTITY, |acc, l| self.compose(&acc, &GroupElement::power(l.gen, l.power)))
    }

    pub fn commute(&self, g1: &GroupElement, g2: &GroupElement) -> bool {
        self.compose(g1, g2) == self.compose(g2, g1)
    }

    /// Relators `[g,h] * nf([g,h])^{-1}` for every pair of generators, with the
    /// commutator `[g,h] = g^{-1} h^{-1} g h`. Each acts trivially on `R^4`.
    pub fn relator_words(&self) -> Vec<(String, Word)> {
        let mut out = Vec::new();
        for (i, &g) in Gen::ALL.iter().enumerate() {
            for &h in &Gen::ALL[i + 1..] {
                let commutator =
                    vec![Letter::new(g, -1), Letter::new(h, -1), Letter::new(g, 1), Letter::new(h, 1)];
                let reduced = self.element_of_word(&commutator);
                let mut word = commutator;
                word.extend(self.inverse(&reduced).word());
                out.push((format!("[{g},{h}]"), word));
            }
        }
        out
    }

    /// `A^{-x} B^{-y}` as a real matrix, row-major.
    ///
    /// Integer exponents are exact. Otherwise `A` must be the identity, unipotent
    /// (`A^{-x} = I - x (A - I)`) or hyperbolic with positive trace, and `B` the identity.
    pub fn left_invariant_coframe(&self, x: T, y: T) -> Result<[[T; 2]; 2]> {
        let a_part = real_power(self.pair.a(), -x, "A")?;
        let b_part = real_power(self.pair.b(), -y, "B")?;
        Ok(mat_mul(a_part, b_part))
    }

    /// Residuals of `omega(x+1) = (alpha omega - beta)/(-gamma omega + delta)` and
    /// of the matching transformation of the fiber coordinate `s + omega t`.
    pub fn omega_transform_check(&self, p: TotalPoint<T>) -> OmegaTransformResidual<T> {
        let a = self.pair.a();
        let lift = |v: i64| Complex::new(T::from_int(v), T::zero());
        let w = self.omega(p.x);
        let w_next = self.omega(p.x + T::one());
        let den = -lift(a.gamma()) * w + lift(a.delta());
        let mobius = (lift(a.alpha()) * w - lift(a.beta())) / den;
        let (s1, t1) = a.apply(p.s, p.t);
        let z = w * p.t + p.s;
        let z_next = w_next * t1 + s1;
        OmegaTransformResidual { residual_omega: (w_next - mobius).norm(), residual_z: (z_next - z / den).norm() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OmegaTransformResidual<T> {
    pub residual_omega: T,
    pub residual_z: T,
}

fn mat_mul<T: Real>(a: [[T; 2]; 2], b: [[T; 2]; 2]) -> [[T; 2]; 2] {
    [
        [a[0][0] * b[0][0] + a[0][1] * b[1][0], a[0][0] * b[0][1] + a[0][1] * b[1][1]],
        [a[1][0] * b[0][0] + a[1][1] * b[1][0], a[1][0] * b[0][1] + a[1][1] * b[1][1]],
    ]
}

fn to_real<T: Real>(m: IntMat2) -> [[T; 2]; 2] {
    let f = |v: i64| T::from_int(v);
    [[f(m.alpha()), f(m.beta())], [f(m.gamma()), f(m.delta())]]
}

fn real_power<T: Real>(m: IntMat2, exponent: T, name: &'static str) -> Result<[[T; 2]; 2]> {
    if exponent == exponent.round() {
        let n = exponent.to_i64().ok_or(Error::NonRealPower { matrix: name, exponent: exponent.as_f64() })?;
        return Ok(to_real(m.pow(n)));
    }
    if m == IntMat2::IDENTITY {
        return Ok(to_real(m));
    }
    let one = T::one();
    let e = exponent;
    if m.trace() == 2 {
        // (A - I)^2 = 0
        let r = to_real::<T>(m);
        return Ok([[one + e * (r[0][0] - one), e * r[0][1]], [e * r[1][0], one + e * (r[1][1] - one)]]);
    }
    if m.trace() > 2 {
        // Cayley-Hamilton: A^e = [(l^e - l^-e) A - (l^(e-1) - l^(1-e)) I] / (l - 1/l)
        let h = HyperbolicData::<T>::from_matrix(m);
        let l = h.lambda;
        let c1 = (l.powf(e) - l.powf(-e)) / (l - l.recip());
        let c0 = (l.powf(e - one) - l.powf(one - e)) / (l - l.recip());
        let r = to_real::<T>(m);
        return Ok([[c1 * r[0][0] - c0, c1 * r[0][1]], [c1 * r[1][0], c1 * r[1][1] - c0]]);
    }
    Err(Error::NonRealPower { matrix: name, exponent: exponent.as_f64() })
}

/// Contents of a bundle specification file: explicit matrices or a table row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BundleSpec {
    Matrices {
        #[serde(rename = "A")]
        a: [[i64; 2]; 2],
        #[serde(rename = "B")]
        b: [[i64; 2]; 2],
    },
    Row {
        #[serde(rename = "type")]
        tag: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        k: Option<i64>,
    },
}

impl BundleSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::BundleFile(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::BundleFile(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Validates against the table and builds the bundle.
    pub fn resolve<T: Real>(&self) -> Result<BundleType<T>> {
        match self {
            BundleSpec::Matrices { a, b } => classify(MonodromyPair::new(IntMat2(*a), IntMat2(*b))?),
            BundleSpec::Row { tag, k } => BundleType::representative(tag.parse()?, *k),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rep(tag: BundleTag, k: i64) -> BundleType<f64> {
        BundleType::representative(tag, Some(k)).unwrap()
    }

    #[test]
    fn classifies_table_examples() {
        let pair = |a, b| MonodromyPair::new(a, b).unwrap();
        let t: BundleType<f64> = classify(pair(IntMat2::IDENTITY, IntMat2::IDENTITY)).unwrap();
        assert_eq!(t.tag(), BundleTag::A);
        let t: BundleType<f64> = classify(pair(IntMat2::new(1, 1, 0, 1), IntMat2::IDENTITY)).unwrap();
        assert_eq!((t.tag(), t.parameter()), (BundleTag::C, Some(1)));
        let t: BundleType<f64> = classify(pair(IntMat2::new(2, 1, 1, 1), IntMat2::IDENTITY)).unwrap();
        assert_eq!(t.tag(), BundleTag::F);
        let t: BundleType<f64> = classify(pair(IntMat2::new(-3, 1, -1, 0), IntMat2::IDENTITY)).unwrap();
        assert_eq!(t.tag(), BundleTag::F);
    }

    #[test]
    fn rejects_pairs_outside_the_table() {
        let bad = MonodromyPair::new(IntMat2::IDENTITY, IntMat2::new(1, 1, 0, 1)).unwrap();
        assert!(matches!(classify::<f64>(bad), Err(Error::Unclassified(_))));
        let elliptic_conjugate = MonodromyPair::new(IntMat2::new(0, 1, -1, 0), IntMat2::IDENTITY).unwrap();
        assert!(classify::<f64>(elliptic_conjugate).is_err());
        assert!(MonodromyPair::new(IntMat2::new(2, 0, 0, 1), IntMat2::IDENTITY).is_err());
        assert!(MonodromyPair::new(IntMat2::new(1, 1, 0, 1), IntMat2::new(1, 0, 1, 1)).is_err());
        assert!(BundleType::<f64>::representative(BundleTag::C, Some(0)).is_err());
    }

    #[test]
    fn representatives_round_trip() {
        for b in BundleType::<f64>::table_representatives() {
            let again: BundleType<f64> = classify(b.pair()).unwrap();
            assert_eq!(again.tag(), b.tag());
            assert_eq!(again.parameter(), b.parameter());
        }
    }

    #[test]
    fn generator_actions() {
        let kt = rep(BundleTag::C, 1);
        let p = TotalPoint::new(0.0, 0.0, 0.2, 0.5);
        assert_eq!(kt.act(&GroupElement::IDENTITY, p), p);
        let q = kt.act(&GroupElement::generator(Gen::A), p);
        assert!(q.max_abs_diff(TotalPoint::new(1.0, 0.0, 0.7, 0.5)) < 1e-15);
        let q = kt.act(&GroupElement::generator(Gen::C), p);
        assert_eq!(q, TotalPoint::new(0.0, 0.0, 1.2, 0.5));
        let e = rep(BundleTag::E, 1);
        let q = e.act(&GroupElement::generator(Gen::B), p);
        assert_eq!(q, TotalPoint::new(0.0, 1.0, -0.2, -0.5));
    }

    #[test]
    fn commutator_normal_forms() {
        for b in BundleType::<f64>::table_representatives() {
            let a = b.pair().a();
            let w = |g, h| {
                b.element_of_word(&[Letter::new(g, -1), Letter::new(h, -1), Letter::new(g, 1), Letter::new(h, 1)])
            };
            assert_eq!(w(Gen::A, Gen::C), GroupElement::new(0, 0, 1 - a.delta(), a.gamma()), "{}", b.label());
            assert_eq!(w(Gen::A, Gen::D), GroupElement::new(0, 0, a.beta(), 1 - a.alpha()), "{}", b.label());
        }
    }

    #[test]
    fn inverse_and_identity() {
        let b = rep(BundleTag::F, 1);
        let g = GroupElement::new(1, -1, 2, -3);
        assert!(b.compose(&g, &b.inverse(&g)).is_identity());
        assert!(b.compose(&b.inverse(&g), &g).is_identity());
    }

    #[test]
    fn omega_table_values() {
        assert_eq!(rep(BundleTag::B2, 1).omega(0.7), Complex::new(0.0, 1.0));
        let c2 = rep(BundleTag::C, 2).omega(0.5);
        assert!((c2 - Complex::new(-1.0, 1.0)).norm() < 1e-15);
        let d = rep(BundleTag::D, 3).omega(0.5);
        assert!((d - Complex::new(1.5, 1.0)).norm() < 1e-15);
    }

    #[test]
    fn hyperbolic_data_invariants() {
        for a in [IntMat2::new(2, 1, 1, 1), IntMat2::new(3, 2, 1, 1), IntMat2::new(-3, 1, -1, 0)] {
            let h = HyperbolicData::<f64>::from_matrix(a);
            let sa = |u: f64, v: f64| {
                let s = h.sign as f64;
                (s * (a.alpha() as f64 * u + a.gamma() as f64 * v), s * (a.beta() as f64 * u + a.delta() as f64 * v))
            };
            let (p0, p1) = sa(h.u_plus, h.v_plus);
            assert!((p0 - h.lambda * h.u_plus).abs() < 1e-12 && (p1 - h.lambda * h.v_plus).abs() < 1e-12);
            let (m0, m1) = sa(h.u_minus, h.v_minus);
            assert!((m0 - h.u_minus / h.lambda).abs() < 1e-12 && (m1 - h.v_minus / h.lambda).abs() < 1e-12);
            assert!((h.u_plus * h.v_minus - h.u_minus * h.v_plus - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn omega_mobius_on_samples() {
        let p = TotalPoint::new(0.3, 0.0, 0.2, 0.5);
        let r = rep(BundleTag::C, 1).omega_transform_check(p);
        assert!(r.residual_omega < 1e-12 && r.residual_z < 1e-12);
        let r = rep(BundleTag::B2, 1).omega_transform_check(TotalPoint::new(0.0, 0.0, 0.1, 0.7));
        assert!(r.residual_omega < 1e-12 && r.residual_z < 1e-12);
    }

    #[test]
    fn coframe_examples() {
        for b in BundleType::<f64>::table_representatives() {
            assert_eq!(b.left_invariant_coframe(0.0, 0.0).unwrap(), [[1.0, 0.0], [0.0, 1.0]]);
        }
        let m = rep(BundleTag::C, 3).left_invariant_coframe(0.4, 0.3).unwrap();
        assert!((m[0][1] + 1.2).abs() < 1e-15 && m[0][0] == 1.0 && m[1][0] == 0.0 && m[1][1] == 1.0);
        let m = rep(BundleTag::F, 1).left_invariant_coframe(1.0, 0.0).unwrap();
        assert_eq!(m, [[1.0, -1.0], [-1.0, 2.0]]);
        assert!(matches!(
            rep(BundleTag::D, 1).left_invariant_coframe(0.5, 0.0),
            Err(Error::NonRealPower { .. })
        ));
        assert!(matches!(
            rep(BundleTag::E, 1).left_invariant_coframe(0.0, 0.5),
            Err(Error::NonRealPower { .. })
        ));
    }

    #[test]
    fn bundle_spec_files() {
        let s = BundleSpec::from_json(r#"{"type": "C", "k": 1}"#).unwrap();
        assert_eq!(s.resolve::<f64>().unwrap().tag(), BundleTag::C);
        let s = BundleSpec::from_json(r#"{"A": [[0,-1],[1,0]], "B": [[1,0],[0,1]]}"#).unwrap();
        assert_eq!(s.resolve::<f64>().unwrap().tag(), BundleTag::B2);
        let s = BundleSpec::from_json(r#"{"A": [[1,1],[1,1]], "B": [[1,0],[0,1]]}"#).unwrap();
        assert!(matches!(s.resolve::<f64>(), Err(Error::InvalidPair(_))));
        assert!(BundleSpec::from_json("{\"nope\": 1}").is_err());
    }
}
