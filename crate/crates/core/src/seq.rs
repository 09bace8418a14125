//! Sequence carriers shared by every module.
//!
//! [`NonnegSeq`] is a finite sample of a function on a lattice
//! `{origin, origin + step, ...}`. [`GeomTail`] is an infinite one-sided
//! sequence stored as a finite head plus an optional geometric continuation,
//! which is how every law with an unbounded support is represented here.

use serde::{Deserialize, Serialize};

use crate::error::{input, Result};

/// Finite list of nonnegative reals indexed from `origin` with lattice spacing `step`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SeqRepr")]
pub struct NonnegSeq {
    pub origin: i64,
    pub step: f64,
    pub values: Vec<f64>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum SeqRepr {
    Bare(Vec<f64>),
    Wrapped {
        #[serde(default)]
        origin: i64,
        #[serde(default = "unit_step")]
        step: f64,
        values: Vec<f64>,
    },
}

fn unit_step() -> f64 {
    1.0
}

impl TryFrom<SeqRepr> for NonnegSeq {
    type Error = crate::Error;

    fn try_from(repr: SeqRepr) -> Result<Self> {
        match repr {
            SeqRepr::Bare(values) => NonnegSeq::new(values),
            SeqRepr::Wrapped {
                origin,
                step,
                values,
            } => NonnegSeq::with_lattice(origin, step, values),
        }
    }
}

impl NonnegSeq {
    /// Sequence on `{0, 1, 2, ...}`.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        Self::with_lattice(0, 1.0, values)
    }

    pub fn with_lattice(origin: i64, step: f64, values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return input("sequence must be nonempty");
        }
        if !(step > 0.0 && step.is_finite()) {
            return input(format!("lattice step must be positive, got {step}"));
        }
        if let Some((i, v)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !(v.is_finite() && **v >= 0.0))
        {
            return input(format!(
                "element {i} is {v}; sequences must be finite and nonnegative"
            ));
        }
        Ok(Self {
            origin,
            step,
            values,
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    /// Lattice label of the `i`-th stored element.
    pub fn index_of(&self, i: usize) -> i64 {
        self.origin + i as i64
    }

    pub fn is_all_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }
}

impl std::ops::Index<usize> for NonnegSeq {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.values[i]
    }
}

/// One-sided infinite sequence `a_1, a_2, ...` given by a finite head and an
/// optional geometric continuation `a_{L+m} = a_L * ratio^m`.
///
/// Without a ratio the sequence is zero beyond the head.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TailRepr")]
pub struct GeomTail {
    pub values: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ratio: Option<f64>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum TailRepr {
    Bare(Vec<f64>),
    Wrapped {
        values: Vec<f64>,
        #[serde(default)]
        ratio: Option<f64>,
    },
}

impl TryFrom<TailRepr> for GeomTail {
    type Error = crate::Error;

    fn try_from(repr: TailRepr) -> Result<Self> {
        match repr {
            TailRepr::Bare(values) => GeomTail::finite(values),
            TailRepr::Wrapped { values, ratio } => GeomTail::new(values, ratio),
        }
    }
}

impl GeomTail {
    pub fn new(values: Vec<f64>, ratio: Option<f64>) -> Result<Self> {
        if let Some((i, v)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !(v.is_finite() && **v >= 0.0))
        {
            return input(format!(
                "tail element {i} is {v}; must be finite and nonnegative"
            ));
        }
        if let Some(r) = ratio {
            if !(0.0..1.0).contains(&r) {
                return input(format!(
                    "geometric continuation ratio must lie in [0, 1), got {r}"
                ));
            }
            if values.is_empty() {
                return input("a geometric continuation needs a nonempty head");
            }
        }
        Ok(Self { values, ratio })
    }

    /// Head only, zero beyond.
    pub fn finite(values: Vec<f64>) -> Result<Self> {
        Self::new(values, None)
    }

    pub fn zero() -> Self {
        Self {
            values: Vec::new(),
            ratio: None,
        }
    }

    /// Head continued with the ratio of its last two elements.
    pub fn continued(values: Vec<f64>) -> Result<Self> {
        let n = values.len();
        if n < 2 || values[n - 2] <= 0.0 {
            return Self::finite(values);
        }
        let r = values[n - 1] / values[n - 2];
        Self::new(values, Some(r))
    }

    pub fn head_len(&self) -> usize {
        self.values.len()
    }

    /// Ratio of the continuation; zero when the sequence is finite.
    pub fn ratio_or_zero(&self) -> f64 {
        self.ratio.unwrap_or(0.0)
    }

    /// Element with 0-based position `i` (the head's first element is position 0).
    pub fn get(&self, i: usize) -> f64 {
        let n = self.values.len();
        if i < n {
            self.values[i]
        } else {
            match self.ratio {
                Some(r) if n > 0 => self.values[n - 1] * r.powi((i + 1 - n) as i32),
                _ => 0.0,
            }
        }
    }

    /// `sum_{j >= i} a_j` in closed form.
    pub fn sum_from(&self, i: usize) -> f64 {
        let n = self.values.len();
        let head: f64 = if i < n {
            self.values[i..].iter().sum()
        } else {
            0.0
        };
        match self.ratio {
            Some(r) if n > 0 => {
                let first_cont = i.max(n);
                let start = self.values[n - 1] * r.powi((first_cont + 1 - n) as i32);
                head + start / (1.0 - r)
            }
            _ => head,
        }
    }

    pub fn total(&self) -> f64 {
        self.sum_from(0)
    }

    /// Mass of the geometric continuation alone.
    pub fn continuation_mass(&self) -> f64 {
        self.sum_from(self.values.len())
    }

    /// First `len` elements, continuation included.
    pub fn materialize(&self, len: usize) -> Vec<f64> {
        (0..len).map(|i| self.get(i)).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    /// True when every element (continuation included) is strictly positive.
    pub fn is_strictly_positive(&self) -> bool {
        !self.values.is_empty()
            && self.values.iter().all(|&v| v > 0.0)
            && self.ratio.is_some_and(|r| r > 0.0)
    }

    /// Length after which the remaining mass is below `eps`.
    pub fn effective_len(&self, eps: f64) -> usize {
        let n = self.values.len();
        match self.ratio {
            Some(r) if r > 0.0 && n > 0 => {
                let last = self.values[n - 1];
                if last <= eps {
                    return n;
                }
                let m = ((eps * (1.0 - r) / last).ln() / r.ln()).ceil().max(0.0) as usize;
                n + m
            }
            _ => n,
        }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            values: self.values.iter().map(|v| v * factor).collect(),
            ratio: self.ratio,
        }
    }

    /// Drops head elements that the continuation already reproduces (relative
    /// tolerance `rel`) and trailing zeros of a finite head.
    pub fn compact(mut self, rel: f64) -> Self {
        match self.ratio {
            Some(r) => {
                while self.values.len() >= 2 {
                    let n = self.values.len();
                    let (prev, last) = (self.values[n - 2], self.values[n - 1]);
                    if (last - r * prev).abs() <= rel * prev {
                        self.values.pop();
                    } else {
                        break;
                    }
                }
            }
            None => {
                while self.values.last() == Some(&0.0) {
                    self.values.pop();
                }
            }
        }
        self
    }

    /// Tail sums `b_i = sum_{j >= start + i} a_j` as a sequence of the same kind.
    pub fn tail_sums(&self, start: usize) -> Self {
        let n = self.values.len();
        match self.ratio {
            Some(r) if n > 0 => {
                let head = n.saturating_sub(1).saturating_sub(start) + 1;
                Self {
                    values: (0..head).map(|i| self.sum_from(start + i)).collect(),
                    ratio: Some(r),
                }
            }
            _ => Self {
                values: (start..n).map(|i| self.sum_from(i)).collect(),
                ratio: None,
            }
            .compact(0.0),
        }
    }

    /// First differences `d_i = a_i - a_{i+1}`.
    pub fn differences(&self) -> Self {
        let n = self.values.len();
        Self {
            values: (0..n).map(|i| self.get(i) - self.get(i + 1)).collect(),
            ratio: if n > 0 { self.ratio } else { None },
        }
    }

    /// `sum_i a_i s^(i + offset)` in closed form.
    pub fn transform(&self, s: f64, offset: i32) -> Result<f64> {
        let n = self.values.len();
        let mut acc = 0.0;
        let mut pw = s.powi(offset);
        for &a in &self.values {
            acc += a * pw;
            pw *= s;
        }
        if let Some(r) = self.ratio {
            if n > 0 && r > 0.0 {
                let q = r * s;
                if q >= 1.0 {
                    return Err(crate::Error::Domain(format!(
                        "transform diverges at s = {s} for continuation ratio {r}"
                    )));
                }
                acc += self.values[n - 1] * s.powi(n as i32 - 1 + offset) * q / (1.0 - q);
            }
        }
        Ok(acc)
    }

    /// `sum_i a_i (exp(t (i + offset)) - 1)`, free of the cancellation in the naive form.
    pub fn expm1_transform(&self, t: f64, offset: i32) -> Result<f64> {
        let n = self.values.len();
        let mut acc = 0.0;
        for (i, &a) in self.values.iter().enumerate() {
            acc += a * (t * (i as i32 + offset) as f64).exp_m1();
        }
        if let Some(r) = self.ratio {
            if n > 0 && r > 0.0 {
                let q = r * t.exp();
                if q >= 1.0 {
                    return Err(crate::Error::Domain(format!(
                        "transform diverges at t = {t} for continuation ratio {r}"
                    )));
                }
                let big_n = (n as i32 - 1 + offset) as f64;
                let num = (t * (big_n + 1.0)).exp_m1() - q * (t * big_n).exp_m1();
                acc += self.values[n - 1] * r * num / ((1.0 - q) * (1.0 - r));
            }
        }
        Ok(acc)
    }

    /// The sequence as one long log-convexity test vector: head, a few continuation
    /// terms, and a trailing zero when the sequence is finite.
    pub fn probe(&self, extra: usize) -> Vec<f64> {
        let n = self.values.len();
        match self.ratio {
            Some(_) => self.materialize(n + extra),
            None => {
                let mut v = self.values.clone();
                v.extend(std::iter::repeat_n(0.0, 2));
                v
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_bare_and_wrapped_sequences() {
        let a: NonnegSeq = serde_json::from_str("[1, 0.5, 0.25]").unwrap();
        assert_eq!(a.origin, 0);
        assert_eq!(a.step, 1.0);
        let b: NonnegSeq =
            serde_json::from_str(r#"{"origin": 3, "step": 0.5, "values": [1, 2]}"#).unwrap();
        assert_eq!(b.origin, 3);
        assert_eq!(b.index_of(1), 4);
        assert!(serde_json::from_str::<NonnegSeq>("[]").is_err());
        assert!(serde_json::from_str::<NonnegSeq>("[1, -0.5]").is_err());
    }

    #[test]
    fn geometric_tail_sums_match_closed_form() {
        let t = GeomTail::new(vec![0.5, 0.25], Some(0.5)).unwrap();
        assert!((t.total() - 1.0).abs() < 1e-15);
        assert!((t.sum_from(3) - 0.125).abs() < 1e-15);
        assert!((t.get(4) - 1.0 / 32.0).abs() < 1e-15);
        let brute: f64 = t.materialize(200).iter().skip(5).sum();
        assert!((t.sum_from(5) - brute).abs() < 1e-15);
    }

    #[test]
    fn finite_tail_is_zero_beyond_head() {
        let t = GeomTail::finite(vec![0.3]).unwrap();
        assert_eq!(t.get(1), 0.0);
        assert_eq!(t.total(), 0.3);
        assert_eq!(t.probe(4), vec![0.3, 0.0, 0.0]);
    }

    #[test]
    fn tail_sums_and_differences_invert() {
        let t = GeomTail::new(vec![0.4, 0.2, 0.15], Some(0.6)).unwrap();
        let s = t.tail_sums(0);
        for i in 0..40 {
            assert!((s.get(i) - t.sum_from(i)).abs() < 1e-15, "i = {i}");
        }
        let d = s.differences();
        for i in 0..40 {
            assert!((d.get(i) - t.get(i)).abs() < 1e-15, "i = {i}");
        }
        let f = GeomTail::finite(vec![0.5, 0.3]).unwrap().tail_sums(1);
        assert_eq!(f.values, vec![0.3]);
    }

    #[test]
    fn transforms_match_direct_sums() {
        let t = GeomTail::new(vec![0.3, 0.2, 0.1], Some(0.5)).unwrap();
        let s: f64 = 1.3;
        let direct: f64 = (0..400).map(|i| t.get(i) * s.powi(i as i32 + 1)).sum();
        assert!((t.transform(s, 1).unwrap() - direct).abs() < 1e-13);
        let x: f64 = 0.01;
        let direct: f64 = (0..400)
            .map(|i| t.get(i) * (x * (i + 1) as f64).exp_m1())
            .sum();
        assert!((t.expm1_transform(x, 1).unwrap() - direct).abs() < 1e-15);
        assert!(t.transform(2.5, 0).is_err());
    }

    #[test]
    fn compact_drops_redundant_head() {
        let t = GeomTail::new(vec![1.0, 0.5, 0.25, 0.125], Some(0.5))
            .unwrap()
            .compact(1e-14);
        assert_eq!(t.values, vec![1.0]);
        let f = GeomTail::finite(vec![1.0, 0.0, 0.0])
            .unwrap()
            .compact(1e-14);
        assert_eq!(f.values, vec![1.0]);
    }

    #[test]
    fn rejects_bad_ratio() {
        assert!(GeomTail::new(vec![1.0], Some(1.0)).is_err());
        assert!(GeomTail::new(vec![], Some(0.5)).is_err());
    }
}
