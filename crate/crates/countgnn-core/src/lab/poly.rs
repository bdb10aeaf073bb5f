//! Nice and co-nice polynomials and the numerical probes around them.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use num_traits::{One, Signed, Zero};

use super::LabError;
use crate::rational::{self, Q};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Orientation {
    /// Monomial i is `X^⌊i/2⌋ Y^⌈i/2⌉`.
    Nice,
    /// Monomial i is `X^⌈i/2⌉ Y^⌊i/2⌋`.
    CoNice,
}

impl Orientation {
    pub fn flipped(self) -> Orientation {
        match self {
            Orientation::Nice => Orientation::CoNice,
            Orientation::CoNice => Orientation::Nice,
        }
    }

    /// Exponents of X and Y in monomial `i`.
    pub fn exponents(self, i: usize) -> (u32, u32) {
        let (lo, hi) = ((i / 2) as u32, i.div_ceil(2) as u32);
        match self {
            Orientation::Nice => (lo, hi),
            Orientation::CoNice => (hi, lo),
        }
    }
}

/// General bivariate polynomial, `(x exponent, y exponent) -> coefficient`.
pub type Poly2 = BTreeMap<(u32, u32), Q>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NicePolynomial {
    coeffs: Vec<Q>,
    orientation: Orientation,
}

impl NicePolynomial {
    pub fn new(coeffs: Vec<Q>, orientation: Orientation) -> Self {
        let mut p = NicePolynomial { coeffs, orientation };
        p.trim();
        p
    }

    /// Reads `a₀..a_k` from integers.
    pub fn from_ints(coeffs: &[i64], orientation: Orientation) -> Self {
        NicePolynomial::new(coeffs.iter().map(|&c| rational::int(c)).collect(), orientation)
    }

    /// The polynomial if its monomials fit the given orientation.
    pub fn from_poly(p: &Poly2, orientation: Orientation) -> Option<Self> {
        let mut coeffs = Vec::new();
        for (&(ex, ey), c) in p {
            if c.is_zero() {
                continue;
            }
            let i = (ex + ey) as usize;
            if orientation.exponents(i) != (ex, ey) {
                return None;
            }
            if coeffs.len() <= i {
                coeffs.resize(i + 1, Q::zero());
            }
            coeffs[i] = c.clone();
        }
        Some(NicePolynomial::new(coeffs, orientation))
    }

    fn trim(&mut self) {
        while self.coeffs.last().is_some_and(Zero::is_zero) {
            self.coeffs.pop();
        }
    }

    pub fn coeffs(&self) -> &[Q] {
        &self.coeffs
    }

    pub fn orientation(&self) -> Orientation {
        self.orientation
    }

    pub fn to_poly(&self) -> Poly2 {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, c)| (self.orientation.exponents(i), c.clone()))
            .collect()
    }

    /// `a_i` for the largest `i` with `a_i ≠ 0`, or 0.
    pub fn leading_coefficient(&self) -> Q {
        self.coeffs.last().cloned().unwrap_or_else(Q::zero)
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.len() <= 1
    }

    pub fn eval(&self, m: &Q, n: &Q) -> Q {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, c)| {
                let (ex, ey) = self.orientation.exponents(i);
                c * num_traits::pow(m.clone(), ex as usize) * num_traits::pow(n.clone(), ey as usize)
            })
            .sum()
    }

    pub fn eval_at(&self, m: u64, n: u64) -> Q {
        self.eval(&Q::from_integer(m.into()), &Q::from_integer(n.into()))
    }

    /// `X·p` for nice `p`, or `Y·p` for co-nice `p`: the index shifts by one
    /// and the orientation flips.
    pub fn shift_multiply(&self) -> NicePolynomial {
        let mut coeffs = Vec::with_capacity(self.coeffs.len() + 1);
        coeffs.push(Q::zero());
        coeffs.extend(self.coeffs.iter().cloned());
        NicePolynomial::new(coeffs, self.orientation.flipped())
    }

    /// `p(Y, X)`.
    pub fn transpose(&self) -> NicePolynomial {
        NicePolynomial::new(self.coeffs.clone(), self.orientation.flipped())
    }
}

pub fn is_nice(p: &Poly2) -> bool {
    NicePolynomial::from_poly(p, Orientation::Nice).is_some()
}

pub fn is_co_nice(p: &Poly2) -> bool {
    NicePolynomial::from_poly(p, Orientation::CoNice).is_some()
}

/// `Σ c_j p_j`. Constants belong to both classes; any other mix of
/// orientations is rejected.
pub fn nice_combine(terms: &[(Q, NicePolynomial)]) -> Result<NicePolynomial, LabError> {
    let mut orientation = None;
    for (_, p) in terms {
        if p.is_constant() {
            continue;
        }
        match orientation {
            None => orientation = Some(p.orientation),
            Some(o) if o != p.orientation => return Err(LabError::MixedOrientation),
            Some(_) => {}
        }
    }
    let orientation = orientation.unwrap_or(Orientation::Nice);
    let len = terms.iter().map(|(_, p)| p.coeffs.len()).max().unwrap_or(0);
    let mut coeffs = alloc::vec![Q::zero(); len];
    for (c, p) in terms {
        for (i, a) in p.coeffs.iter().enumerate() {
            coeffs[i] += c * a;
        }
    }
    Ok(NicePolynomial::new(coeffs, orientation))
}

fn sign(q: &Q) -> i8 {
    if q.is_positive() {
        1
    } else if q.is_negative() {
        -1
    } else {
        0
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignProbe {
    /// Smallest n₀ such that the sign and growth conditions hold for every
    /// n in `n₀..=n_max`; valid on the tested range only.
    pub n0: Option<u64>,
    pub sign: i8,
    pub n_max: u64,
}

/// Checks `sign p(n±1, n) = sign a` and `|p(n±1, n)| ≥ (|a|/2)·n` for
/// n = 1..=n_max, reporting where the conditions start to hold for good.
pub fn sign_stability_probe(p: &NicePolynomial, n_max: u64) -> Result<SignProbe, LabError> {
    if p.is_constant() {
        return Err(LabError::ConstantPolynomial);
    }
    let a = p.leading_coefficient();
    let s = sign(&a);
    let half = a.abs() / rational::int(2);
    let mut n0 = None;
    for n in (1..=n_max).rev() {
        let nq = Q::from_integer(n.into());
        let ok = [n - 1, n + 1].iter().all(|&m| {
            let v = p.eval_at(m, n);
            sign(&v) == s && v.abs() >= &half * &nq
        });
        if !ok {
            break;
        }
        n0 = Some(n);
    }
    Ok(SignProbe { n0, sign: s, n_max })
}

/// `|f(m, n) - p(m, n)| ≤ n^-r` for every n in the range and m ∈ {n-1, n+1}.
/// A necessary condition checked on a finite range, not a proof.
pub fn fast_convergence_probe<F>(f: F, p: &NicePolynomial, r: u32, n_range: core::ops::RangeInclusive<u64>) -> bool
where
    F: Fn(u64, u64) -> Q,
{
    n_range.filter(|&n| n > 0).all(|n| {
        let bound = Q::one() / Q::from_integer(num_bigint::BigInt::from(n).pow(r));
        [n - 1, n + 1].iter().all(|&m| (f(m, n) - p.eval_at(m, n)).abs() <= bound)
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LogisticCase {
    /// Non-constant, positive leading coefficient: the limit is 1.
    Positive,
    /// Non-constant, negative leading coefficient: the limit is 0.
    Negative,
    /// Constant polynomial `a`: the limit is σ(a).
    Constant,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LogisticProbe {
    pub case: LogisticCase,
    pub limit: f64,
    /// Smallest n from which `|σ(f(n±1, n)) - limit| ≤ n^-r` holds up to the
    /// end of the range, with slack for floating-point error.
    pub tail_start: Option<u64>,
}

const ULP: f64 = f64::EPSILON;

fn sigma(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + libm::exp(-x))
    } else {
        let e = libm::exp(x);
        e / (1.0 + e)
    }
}

/// Distance of σ(x) from the case limit and a bound on its rounding error.
fn logistic_gap(case: LogisticCase, x: &Q, limit: f64) -> (f64, f64) {
    let xf = rational::to_f64(x);
    // converting x to f64 perturbs the exponent by up to |x|·ulp
    let input_err = xf.abs() * ULP;
    match case {
        LogisticCase::Positive => {
            // 1 - σ(x) = e^-x / (1 + e^-x), computed without cancellation
            let e = libm::exp(-xf);
            let gap = e / (1.0 + e);
            (gap, gap * (input_err + 4.0 * ULP))
        }
        LogisticCase::Negative => {
            let e = libm::exp(xf);
            let gap = e / (1.0 + e);
            (gap, gap * (input_err + 4.0 * ULP))
        }
        LogisticCase::Constant => {
            let gap = (sigma(xf) - limit).abs();
            (gap, input_err.min(1.0) + 8.0 * ULP)
        }
    }
}

/// Checks that σ∘f approaches the limit predicted by the leading
/// coefficient of `p` at rate `n^-r` along m ∈ {n-1, n+1}. The bound only
/// counts where it holds with more slack than the accumulated rounding
/// error.
pub fn logistic_probe<F>(f: F, p: &NicePolynomial, n_range: core::ops::RangeInclusive<u64>, r: i32) -> LogisticProbe
where
    F: Fn(u64, u64) -> Q,
{
    let a = p.leading_coefficient();
    let case = if p.is_constant() {
        LogisticCase::Constant
    } else if a.is_positive() {
        LogisticCase::Positive
    } else {
        LogisticCase::Negative
    };
    let limit = match case {
        LogisticCase::Positive => 1.0,
        LogisticCase::Negative => 0.0,
        LogisticCase::Constant => sigma(rational::to_f64(&a)),
    };
    let ns: Vec<u64> = n_range.filter(|&n| n > 0).collect();
    let mut tail_start = None;
    for &n in ns.iter().rev() {
        let bound = libm::pow(n as f64, -(r as f64));
        let ok = [n - 1, n + 1].iter().all(|&m| {
            let (gap, err) = logistic_gap(case, &f(m, n), limit);
            gap + err <= bound && err < bound
        });
        if !ok {
            break;
        }
        tail_start = Some(n);
    }
    LogisticProbe { case, limit, tail_start }
}

/// relu∘f together with the polynomial it should track: `p` itself when the
/// leading coefficient is positive, 0 when it is negative, `relu(a)` for a
/// constant `a`.
pub fn relu_target(p: &NicePolynomial) -> NicePolynomial {
    let a = p.leading_coefficient();
    if p.is_constant() {
        NicePolynomial::new(alloc::vec![rational::relu(&a)], p.orientation)
    } else if a.is_positive() {
        p.clone()
    } else {
        NicePolynomial::new(Vec::new(), p.orientation)
    }
}
