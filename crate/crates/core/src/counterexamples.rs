//! Executable counterexamples. Each `run_example*` recomputes the quantities that
//! make a construction fail (or succeed) and reports them as signed witnesses.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::contdens::{bump_h, bump_h_prime, integrate, integrate_pieces, FnHandle, QuadConfig};
use crate::decompose::{certify_id_nonneg, levy_coeffs, LatticePmf, Verdict, REFUTE_TOL};
use crate::error::{input, Result};
use crate::seq::{GeomTail, NonnegSeq};
use crate::seqcheck::{is_completely_monotone, is_kaluza, is_log_convex, log_convex_slice};
use crate::series::series_log;
use crate::walkfactor::TwoSidedPmf;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExampleId {
    #[serde(rename = "Ex1_g0")]
    Ex1G0,
    #[serde(rename = "Ex2_WX")]
    Ex2Wx,
    #[serde(rename = "Ex3_kaluza_tail")]
    Ex3KaluzaTail,
    #[serde(rename = "Ex4_two_sided")]
    Ex4TwoSided,
    #[serde(rename = "Ex5_continuous")]
    Ex5Continuous,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExampleVerdict {
    Reproduced,
    Failed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    Less,
    Greater,
    Equal,
}

/// A computed quantity and the bar it has to clear: `value < bound - slack`,
/// `value > bound + slack`, or `|value - bound| <= slack`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub value: f64,
    pub relation: Relation,
    pub bound: f64,
    pub slack: f64,
    pub holds: bool,
}

impl Witness {
    pub fn new(value: f64, relation: Relation, bound: f64, slack: f64) -> Self {
        let holds = match relation {
            Relation::Less => value < bound - slack,
            Relation::Greater => value > bound + slack,
            Relation::Equal => (value - bound).abs() <= slack,
        };
        Self {
            value,
            relation,
            bound,
            slack,
            holds,
        }
    }

    pub fn less(value: f64, bound: f64, slack: f64) -> Self {
        Self::new(value, Relation::Less, bound, slack)
    }

    pub fn greater(value: f64, bound: f64, slack: f64) -> Self {
        Self::new(value, Relation::Greater, bound, slack)
    }

    pub fn equal(value: f64, bound: f64, slack: f64) -> Self {
        Self::new(value, Relation::Equal, bound, slack)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExampleResult {
    pub example_id: ExampleId,
    pub verdict: ExampleVerdict,
    pub params: BTreeMap<String, f64>,
    pub witnesses: BTreeMap<String, Witness>,
    /// Supporting values that carry no pass/fail bar.
    pub info: BTreeMap<String, Value>,
}

impl ExampleResult {
    fn new(example_id: ExampleId) -> Self {
        Self {
            example_id,
            verdict: ExampleVerdict::Failed,
            params: BTreeMap::new(),
            witnesses: BTreeMap::new(),
            info: BTreeMap::new(),
        }
    }

    fn param(&mut self, k: &str, v: f64) {
        self.params.insert(k.into(), v);
    }

    fn witness(&mut self, k: &str, w: Witness) {
        self.witnesses.insert(k.into(), w);
    }

    fn info(&mut self, k: &str, v: Value) {
        self.info.insert(k.into(), v);
    }

    /// Reproduced iff every witness holds.
    fn finish(mut self) -> Self {
        self.verdict = if self.witnesses.values().all(|w| w.holds) {
            ExampleVerdict::Reproduced
        } else {
            ExampleVerdict::Failed
        };
        self
    }

    pub fn reproduced(&self) -> bool {
        self.verdict == ExampleVerdict::Reproduced
    }
}

/// Witness bars are ten times the refutation tolerance.
const BAR: f64 = 10.0 * REFUTE_TOL;

/// Grid for the first example: step and number of points for the log-convexity scans.
pub const EX1_GRID_STEP: f64 = 0.01;
const EX1_GRID_POINTS: usize = 1000;
/// Length of the two sequences sampled from `g`.
pub const EX1_SEQ_LEN: usize = 40;

/// `v_0 = e`, `v_n = g(n / 2)`.
pub fn example1_sequence(len: usize) -> Vec<f64> {
    let g = FnHandle::bump_exponential(1.0, 1.0).expect("fixed parameters");
    (0..len)
        .map(|n| {
            if n == 0 {
                std::f64::consts::E
            } else {
                g.eval(n as f64 / 2.0)
            }
        })
        .collect()
}

/// `T_n = sum_{k >= n} v_k` for the sequence of [`example1_sequence`].
pub fn example1_tail_sums(len: usize) -> Vec<f64> {
    // v_k = e^{-k/2} for k >= 2, so the tail from k >= 2 is geometric.
    let r = (-0.5f64).exp();
    let v = example1_sequence(2);
    (0..len)
        .map(|n| {
            let from = n.max(2);
            let geo = r.powi(from as i32) / (1.0 - r);
            geo + (n..2).map(|k| v[k]).sum::<f64>()
        })
        .collect()
}

/// `g(x) = e^{-x + h(x)}` and its tail integral are log-convex; neither sampled
/// sequence is completely monotone.
pub fn run_example1() -> Result<ExampleResult> {
    let mut r = ExampleResult::new(ExampleId::Ex1G0);
    r.param("grid_step", EX1_GRID_STEP);
    r.param("sequence_length", EX1_SEQ_LEN as f64);
    let g = FnHandle::bump_exponential(1.0, 1.0)?;
    let lc = g.grid_log_convexity(EX1_GRID_STEP, EX1_GRID_STEP, EX1_GRID_POINTS, REFUTE_TOL)?;
    r.witness(
        "g_log_convex_margin",
        Witness::greater(lc.margin, -REFUTE_TOL, 0.0),
    );

    let cfg = QuadConfig::default();
    let tails: Vec<f64> = (1..=EX1_GRID_POINTS)
        .map(|i| g.tail_integral(i as f64 * EX1_GRID_STEP, &cfg))
        .collect::<Result<_>>()?;
    let tl = is_log_convex(&NonnegSeq::new(tails)?, REFUTE_TOL)?;
    r.witness(
        "tail_integral_log_convex_margin",
        Witness::greater(tl.margin, -REFUTE_TOL, 0.0),
    );

    let v = NonnegSeq::new(example1_sequence(EX1_SEQ_LEN))?;
    let t = NonnegSeq::new(example1_tail_sums(EX1_SEQ_LEN))?;
    for (name, s) in [("sequence", &v), ("tail_sums", &t)] {
        let lc = is_log_convex(s, REFUTE_TOL)?;
        r.witness(
            &format!("{name}_log_convex_margin"),
            Witness::greater(lc.margin, -REFUTE_TOL, 0.0),
        );
        let cm = is_completely_monotone(s, s.len() - 1, REFUTE_TOL)?;
        r.witness(
            &format!("{name}_cm_margin"),
            Witness::less(cm.margin, -REFUTE_TOL, BAR),
        );
        r.info(&format!("{name}_cm_failing_order"), json!(cm.failing_order));
        r.info(
            &format!("{name}_cm_first_violation"),
            json!(cm.first_violation),
        );
    }
    // e v_3 - 2 e^{1/2} v_2 + v_1 must vanish for a completely monotone extension.
    let e = std::f64::consts::E;
    for (name, s) in [("sequence", &v), ("tail_sums", &t)] {
        let crit = e * s[3] - 2.0 * e.sqrt() * s[2] + s[1];
        r.info(&format!("{name}_hausdorff_criterion"), json!(crit));
        r.witness(
            &format!("{name}_hausdorff_criterion_abs"),
            Witness::greater(crit.abs(), 0.0, BAR),
        );
    }
    Ok(r.finish())
}

/// Pmf of `W X` on `{0, ..., len - 1}` with `X` geometric(`rho`) and `W` in `{2, 3}`
/// with weights `w`.
pub fn example2_pmf(rho: f64, w: (f64, f64), len: usize) -> Result<LatticePmf> {
    if !(rho > 0.0 && rho < 1.0) {
        return input(format!("rho must lie in (0, 1), got {rho}"));
    }
    if !(w.0 >= 0.0 && w.1 >= 0.0 && ((w.0 + w.1) - 1.0).abs() < 1e-12) {
        return input(format!(
            "weights of W must be nonnegative and sum to 1, got {w:?}"
        ));
    }
    let mut p = vec![0.0; len];
    for (scale, weight) in [(2usize, w.0), (3usize, w.1)] {
        let mut k = 0;
        while k * scale < len {
            p[k * scale] += weight * (1.0 - rho) * rho.powi(k as i32);
            k += 1;
        }
    }
    let deficit = (1.0 - p.iter().sum::<f64>()).max(0.0);
    LatticePmf::new(p, deficit)
}

const EX2_LEN: usize = 64;
const EX2_ORDER: usize = 40;

/// The law of `W X` has no mass at 5 although 2 and 3 carry mass, so `q_5 < 0`.
pub fn run_example2(rho: f64, w: (f64, f64)) -> Result<ExampleResult> {
    let mut r = ExampleResult::new(ExampleId::Ex2Wx);
    r.param("rho", rho);
    r.param("w2", w.0);
    r.param("w3", w.1);
    let p = example2_pmf(rho, w, EX2_LEN)?;
    r.witness("p5", Witness::equal(p.probs[5], 0.0, 0.0));
    r.witness("p2", Witness::greater(p.probs[2], 0.0, BAR));
    r.witness("p3", Witness::greater(p.probs[3], 0.0, BAR));
    let cert = certify_id_nonneg(&p, EX2_ORDER, REFUTE_TOL)?;
    let q5 = cert.levy.jump_q.get(4).copied().unwrap_or(f64::NAN);
    r.witness("q5", Witness::less(q5, 0.0, BAR));
    r.witness(
        "refuted_at",
        Witness::equal(cert.refuted_at.map_or(f64::NAN, |x| x as f64), 5.0, 0.0),
    );
    r.info("certificate_verdict", json!(cert.verdict));
    r.info("min_q", json!(cert.min_q));
    Ok(r.finish())
}

/// `u_x = b^x` for `x = 0, 1` and `b^2 c^{x-2}` beyond; `p_x = u_x - u_{x+1}`.
pub fn example3_u(b: f64, c: f64, len: usize) -> Result<Vec<f64>> {
    if !(b > 0.0 && b <= c && c < 1.0) {
        return input(format!("need 0 < b <= c < 1, got b = {b}, c = {c}"));
    }
    Ok((0..len)
        .map(|x| {
            if x < 2 {
                b.powi(x as i32)
            } else {
                b * b * c.powi(x as i32 - 2)
            }
        })
        .collect())
}

pub fn example3_pmf(b: f64, c: f64, len: usize) -> Result<LatticePmf> {
    let u = example3_u(b, c, len + 1)?;
    let p: Vec<f64> = u.windows(2).map(|w| w[0] - w[1]).collect();
    LatticePmf::new(p, u[len])
}

/// `q_2 = p_2 / p_0 - (p_1 / p_0)^2 / 2`, half the second derivative of `ln f` at 0.
pub fn example3_q2(b: f64, c: f64) -> Result<f64> {
    let p = example3_pmf(b, c, 3)?;
    let (p0, p1, p2) = (p.probs[0], p.probs[1], p.probs[2]);
    Ok(p2 / p0 - 0.5 * (p1 / p0).powi(2))
}

/// Smallest `c` on the grid `{b, b + step, ...} < 1` (rounded to the grid) with `q_2 < -1e-8`.
pub fn example3_scan(b: f64, step: f64) -> Result<Option<f64>> {
    if !(step > 0.0) {
        return input("scan step must be positive");
    }
    let k0 = (b / step).ceil() as i64;
    let mut k = k0;
    loop {
        let c = k as f64 * step;
        if c >= 1.0 {
            return Ok(None);
        }
        if c >= b && example3_q2(b, c)? < -1e-8 {
            return Ok(Some(c));
        }
        k += 1;
    }
}

const EX3_LEN: usize = 64;
const EX3_ORDER: usize = 40;
/// Grid step of the `c` scan.
pub const EX3_SCAN_STEP: f64 = 0.01;

/// `u` is a Kaluza sequence, yet for `c` close to 1 the law `p` has `q_2 < 0`.
pub fn run_example3(b: f64, c: f64) -> Result<ExampleResult> {
    let mut r = ExampleResult::new(ExampleId::Ex3KaluzaTail);
    r.param("b", b);
    r.param("c", c);
    let u = NonnegSeq::new(example3_u(b, c, EX3_LEN)?)?;
    let k = is_kaluza(&u, REFUTE_TOL)?;
    r.witness(
        "kaluza_margin",
        Witness::greater(k.margin, -REFUTE_TOL, 0.0),
    );
    let p = example3_pmf(b, c, EX3_LEN)?;
    let levy = levy_coeffs(&p, EX3_ORDER)?;
    let q2 = levy.jump_q[1];
    r.witness("q2", Witness::less(q2, 0.0, BAR));
    let (p0, p1, p2) = (p.probs[0], p.probs[1], p.probs[2]);
    let second = 2.0 * p2 / p0 - (p1 / p0).powi(2);
    r.witness("log_pgf_second_derivative", Witness::less(second, 0.0, BAR));
    r.info("q2_closed_form", json!(example3_q2(b, c)?));
    r.info("scan_threshold_c", json!(example3_scan(b, EX3_SCAN_STEP)?));
    r.info("scan_step", json!(EX3_SCAN_STEP));
    let cert = certify_id_nonneg(&p, EX3_ORDER, REFUTE_TOL)?;
    r.info("certificate_verdict", json!(cert.verdict));
    Ok(r.finish())
}

/// Parameters of the two-sided example.
pub const EX4_B: f64 = 1.0 / 3.0;
pub const EX4_C: f64 = 8.0 / 9.0;
/// Order of the positive-side series logarithm.
pub const EX4_ORDER: usize = 50;

/// `K p_x = c^{|x|}` for `x <= 0`, `b` at 1 and `b^2 c^{x-2}` beyond; returns `(p, K)`.
pub fn example4_law(b: f64, c: f64) -> Result<(TwoSidedPmf, f64)> {
    if !(b > 0.0 && b <= c && c < 1.0) {
        return input(format!("need 0 < b <= c < 1, got b = {b}, c = {c}"));
    }
    let k = 1.0 / (1.0 - c) + b + b * b / (1.0 - c);
    let p = TwoSidedPmf::new(
        GeomTail::new(vec![c / k], Some(c))?,
        1.0 / k,
        GeomTail::new(vec![b / k, b * b / k], Some(c))?,
        0.0,
    )?;
    Ok((p, k))
}

/// Coefficients of `g(s) = 1 + b s + b^2 s^2 (1 - c^2) / ((1 - b c)(1 - c s))` up to `s^n`.
pub fn example4_g(b: f64, c: f64, n: usize) -> Vec<f64> {
    let big = b * b * (1.0 - c * c) / (1.0 - b * c);
    (0..=n)
        .map(|k| match k {
            0 => 1.0,
            1 => b,
            _ => big * c.powi(k as i32 - 2),
        })
        .collect()
}

/// `(1 - b c) g(e^t) / (1 - c e^{-t})`, the closed form of `K E e^{tX}`.
pub fn example4_mgf_closed(b: f64, c: f64, t: f64) -> f64 {
    let s = t.exp();
    let big = b * b * (1.0 - c * c) / (1.0 - b * c);
    let g = 1.0 + b * s + big * s * s / (1.0 - c * s);
    (1.0 - b * c) * g / (1.0 - c / s)
}

/// Driver whose tail sums reproduce the two-sided law; its positive tail is
/// not log-convex at `(1, 2, 3)` when `b < c`.
pub fn example4_driver(b: f64, c: f64) -> (GeomTail, GeomTail) {
    let neg = GeomTail {
        values: vec![1.0 - c],
        ratio: Some(c),
    };
    let pos = GeomTail {
        values: vec![1.0 - b, b * (1.0 - b), b * b * (1.0 - c)],
        ratio: Some(c),
    };
    (neg, pos)
}

/// The law satisfies both parameter conditions, yet `ln g` has `q_2 < 0`.
pub fn run_example4(b: f64, c: f64) -> Result<ExampleResult> {
    let mut r = ExampleResult::new(ExampleId::Ex4TwoSided);
    r.param("b", b);
    r.param("c", c);
    let (p, k) = example4_law(b, c)?;
    let cond1 = b + b * b * (1.0 + c) / (1.0 - b * c);
    let cond2 = (1.0 - c * c) / (1.0 - b * c);
    r.witness("condition_1", Witness::less(cond1, 1.0, BAR));
    r.witness("condition_2", Witness::less(cond2, 0.5, BAR));

    let q = series_log(&example4_g(b, c, EX4_ORDER), EX4_ORDER)?;
    r.witness("q0", Witness::equal(q[0], 0.0, 1e-15));
    r.witness("q2", Witness::less(q[2], 0.0, BAR));
    let tail_abs: f64 = q[2..].iter().map(|x| x.abs()).sum();
    let ratio = (q[EX4_ORDER] / q[EX4_ORDER - 1]).abs();
    r.witness("q_decay_ratio", Witness::less(ratio, 1.0, BAR));
    r.info("sum_abs_q_from_2", json!(tail_abs));
    r.info("q_positive", json!(q));
    let q_neg: Vec<f64> = (1..=5).map(|x| c.powi(x) / x as f64).collect();
    r.witness("q_minus_1", Witness::equal(q_neg[0], c, 0.0));
    r.info("q_negative_head", json!(q_neg));

    // Direct mgf against the closed form on a grid inside (ln c, -ln c).
    let edge = -0.95 * c.ln();
    let mut worst = 0.0f64;
    for i in 0..=20 {
        let t = -edge + 2.0 * edge * i as f64 / 20.0;
        let direct = k * p.mgf(t)?;
        let closed = example4_mgf_closed(b, c, t);
        worst = worst.max(((direct - closed) / closed).abs());
    }
    r.witness("mgf_route_rel_error", Witness::less(worst, 1e-8, 0.0));

    let (_, pos) = example4_driver(b, c);
    let report = log_convex_slice(&pos.probe(4), 1, 1e-12);
    r.info(
        "driver_positive_tail_violation",
        json!(report.first_violation),
    );
    r.info("constant_k", json!(k));
    Ok(r.finish())
}

/// Default small parameter of the continuous example.
pub const EX5_ALPHA: f64 = 0.05;
/// Grid step of the discretized `G`.
pub const EX5_GRID: f64 = 1e-3;
const EX5_TERM_CUTOFF: f64 = 1e-12;

/// Pieces of the continuous example computed from `alpha`, with `delta = alpha^2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Example5Parts {
    pub alpha: f64,
    pub delta: f64,
    /// `alpha / (1 - alpha e)`.
    pub c_alpha: f64,
    /// `g*(0) - 1`.
    pub theta: f64,
    /// `c_alpha (delta (e - 1) + e + 1)`.
    pub theta_bound: f64,
    /// `int_0^1 (e^{h(1-y)} - 1) e^{h(y)} h'(y) dy`.
    pub core_integral: f64,
    /// `nu((1, 2])` from the convolution series.
    pub nu_1_2: f64,
    /// Number of series terms used.
    pub terms: usize,
}

/// `e^{-delta x + h(x)} (2 delta - h'(x))`, proportional to the density of `G`.
fn ex5_psi(delta: f64, x: f64) -> f64 {
    (-delta * x + bump_h(x)).exp() * (2.0 * delta - bump_h_prime(x))
}

/// `int_lo^hi psi`, closed form beyond 1.
fn ex5_psi_integral(delta: f64, lo: f64, hi: f64, cfg: &QuadConfig) -> Result<f64> {
    if lo >= 1.0 {
        return Ok(2.0 * ((-delta * lo).exp() - (-delta * hi).exp()));
    }
    if hi > 1.0 {
        return Ok(ex5_psi_integral(delta, lo, 1.0, cfg)? + ex5_psi_integral(delta, 1.0, hi, cfg)?);
    }
    integrate(|x| ex5_psi(delta, x), lo, hi, cfg)
}

/// Computes the core integral, `g*(0) - 1` and `nu((1, 2])` by the convolution series
/// over a grid of step `grid`.
pub fn example5_parts(alpha: f64, grid: f64) -> Result<Example5Parts> {
    let e = std::f64::consts::E;
    if !(alpha > 0.0 && alpha < 1.0 / e) {
        return input(format!("alpha must lie in (0, 1/e), got {alpha}"));
    }
    let c_alpha = alpha / (1.0 - alpha * e);
    if c_alpha >= 0.25 {
        return input(format!(
            "alpha / (1 - alpha e) = {c_alpha} must be below 1/4"
        ));
    }
    if !(grid > 0.0 && grid <= 0.1) {
        return input(format!("grid step must lie in (0, 0.1], got {grid}"));
    }
    let delta = alpha * alpha;
    let cfg = QuadConfig::default();
    let core_integral = integrate(
        |y| ((bump_h(1.0 - y)).exp() - 1.0) * bump_h(y).exp() * bump_h_prime(y),
        0.0,
        1.0,
        &cfg,
    )?;
    let theta = c_alpha * (ex5_psi_integral(delta, 0.0, 1.0, &cfg)? + 2.0 * (-delta).exp());
    let theta_bound = c_alpha * (delta * (e - 1.0) + e + 1.0);

    // Cell masses of G on [0, 2]; mass of cell k sits at its midpoint.
    let cells = (2.0 / grid).round() as usize;
    let masses: Vec<f64> = (0..cells)
        .map(|k| {
            let (lo, hi) = (k as f64 * grid, (k + 1) as f64 * grid);
            Ok(c_alpha * ex5_psi_integral(delta, lo, hi, &cfg)? / theta)
        })
        .collect::<Result<_>>()?;
    let cdf_at = |conv: &[f64], n: usize, x: f64| -> f64 {
        // Atom K of the n-fold sum sits at (K + n/2) grid.
        let last = (x / grid - n as f64 / 2.0 + 1e-9).floor();
        if last < 0.0 {
            return 0.0;
        }
        conv.iter().take(last as usize + 1).sum()
    };
    let mut conv = masses.clone();
    let mut nu = 0.0;
    let mut n = 1;
    loop {
        let coef = theta.powi(n as i32) / n as f64;
        if coef < EX5_TERM_CUTOFF {
            break;
        }
        let sign = if n % 2 == 1 { 1.0 } else { -1.0 };
        nu += sign * coef * (cdf_at(&conv, n, 2.0) - cdf_at(&conv, n, 1.0));
        let mut next = vec![0.0; cells];
        for (i, &a) in conv.iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            for (j, &m) in masses.iter().enumerate().take(cells - i) {
                next[i + j] += a * m;
            }
        }
        conv = next;
        n += 1;
    }
    Ok(Example5Parts {
        alpha,
        delta,
        c_alpha,
        theta,
        theta_bound,
        core_integral,
        nu_1_2: nu,
        terms: n - 1,
    })
}

/// The density with `v(|x|)` in place of tail integrals gives `nu((1, 2]) < 0`.
pub fn run_example5(alpha: f64) -> Result<ExampleResult> {
    let mut r = ExampleResult::new(ExampleId::Ex5Continuous);
    r.param("alpha", alpha);
    r.param("grid", EX5_GRID);
    let parts = example5_parts(alpha, EX5_GRID)?;
    r.witness(
        "core_integral",
        Witness::less(parts.core_integral, 0.0, BAR),
    );
    r.witness("nu_1_2", Witness::less(parts.nu_1_2, 0.0, BAR));
    r.witness("theta_positive", Witness::greater(parts.theta, 0.0, BAR));
    r.witness(
        "theta_below_bound",
        Witness::less(parts.theta, parts.theta_bound, BAR),
    );
    r.witness(
        "bound_below_one",
        Witness::less(parts.theta_bound, 1.0, BAR),
    );
    r.info("delta", json!(parts.delta));
    r.info("series_terms", json!(parts.terms));
    r.info(
        "leading_order_nu_1_2",
        json!(0.5 * alpha * alpha * parts.core_integral),
    );
    // Pointwise sign of the core integrand on a grid.
    let worst = integrate_pieces(
        |y| (((bump_h(1.0 - y)).exp() - 1.0) * bump_h(y).exp() * bump_h_prime(y)).max(0.0),
        &[0.0, 0.5, 1.0],
        &QuadConfig::default(),
    )?;
    r.info("positive_part_of_integrand", json!(worst));
    Ok(r.finish())
}

/// Runs an example by its command-line name with default or overridden parameters.
pub fn run_by_name(name: &str, params: &BTreeMap<String, f64>) -> Result<ExampleResult> {
    let get = |k: &str, d: f64| params.get(k).copied().unwrap_or(d);
    let known: &[&str] = match name {
        "ex1" => &[],
        "ex2" => &["rho", "w2"],
        "ex3" => &["b", "c"],
        "ex4" => &["b", "c"],
        "ex5" => &["alpha"],
        _ => return input(format!("unknown example '{name}'; expected ex1 to ex5")),
    };
    if let Some(k) = params.keys().find(|k| !known.contains(&k.as_str())) {
        return input(format!("example {name} has no parameter '{k}'"));
    }
    match name {
        "ex1" => run_example1(),
        "ex2" => {
            let w2 = get("w2", 0.5);
            run_example2(get("rho", 0.5), (w2, 1.0 - w2))
        }
        "ex3" => run_example3(get("b", 0.3), get("c", 0.95)),
        "ex4" => run_example4(get("b", EX4_B), get("c", EX4_C)),
        _ => run_example5(get("alpha", EX5_ALPHA)),
    }
}

/// Whether the plain nonnegative-lattice certificate accepts the law.
pub fn certified(p: &LatticePmf, order: usize) -> Result<bool> {
    Ok(certify_id_nonneg(p, order, REFUTE_TOL)?.verdict == Verdict::Certified)
}
