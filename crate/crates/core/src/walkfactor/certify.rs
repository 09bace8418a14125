use serde::{Deserialize, Serialize};

use super::ladder::{factor_tails, FactorTails, LadderFactor};
use super::law::{tv_distance, TwoSidedPmf};
use super::vspec::{
    build_p_from_v, build_w, check_telescoping, geometric_tail, normalize_v, VSpec,
};
use super::wh::wiener_hopf_factor;
use crate::decompose::{
    compound_geometric, levy_coeffs, CompoundGeometricRep, LatticePmf, LevyRep, REFUTE_TOL,
};
use crate::error::{input, Error, Result};
use crate::seq::{GeomTail, NonnegSeq};
use crate::seqcheck::{is_kaluza, log_convex_slice, CheckReport};

/// Relative errors of the three routes to `K M(t)` on a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactorizationCheck {
    pub grid: Vec<f64>,
    /// Upper end of the mgf domain used for the grid.
    pub c: f64,
    /// `(1 - M*(t)) / ((1 - e^-t)(1 - e^t))`.
    pub increment_route: f64,
    /// Product of the two ladder-height factors.
    pub ladder_route: f64,
    /// Product of the two tail-sequence transforms.
    pub tail_route: f64,
    pub residual: f64,
}

/// `n` log-spaced points in `[0.9c * 1e-3, 0.9c]`.
pub fn default_grid(c: f64, n: usize) -> Vec<f64> {
    let hi = 0.9 * c;
    let lo = hi * 1e-3;
    if n == 1 {
        return vec![hi];
    }
    (0..n)
        .map(|i| lo * (hi / lo).powf(i as f64 / (n - 1) as f64))
        .collect()
}

/// Upper end `c = -ln(ratio)` of the mgf domain on the positive side; 1 when
/// the positive side is finite.
pub fn mgf_domain(p: &TwoSidedPmf) -> f64 {
    match p.pos.ratio {
        Some(r) if r > 0.0 => -r.ln(),
        _ => 1.0,
    }
}

/// Compares `K M(t)` against the increment, ladder and tail routes on `grid`.
pub fn verify_factorization(
    p: &TwoSidedPmf,
    k: f64,
    w: &TwoSidedPmf,
    lf: &LadderFactor,
    tails: &FactorTails,
    grid: &[f64],
) -> Result<FactorizationCheck> {
    let c = mgf_domain(p);
    if let Some(&t) = grid.iter().find(|&&t| !(t > 0.0 && t < c)) {
        return Err(Error::Domain(format!("grid point {t} outside (0, {c})")));
    }
    let rel = |a: f64, b: f64| ((a - b) / b).abs();
    let (mut e1, mut e2, mut e3) = (0.0f64, 0.0f64, 0.0f64);
    for &t in grid {
        let direct = k * p.mgf(t)?;
        let denom = (-t).exp_m1() * t.exp_m1();
        // 1 - M*(t) = -sum_x w_x (e^{tx} - 1) for a law of total mass 1.
        let one_minus_w = -w.mgf_minus_mass(t)?;
        let route1 = one_minus_w / denom;
        let one_minus_desc = (1.0 - lf.desc_weak.total()) - lf.desc_weak.expm1_transform(-t, 0)?;
        let one_minus_asc = (1.0 - lf.asc_strict.total()) - lf.asc_strict.expm1_transform(t, 1)?;
        let route2 = (one_minus_desc / -(-t).exp_m1()) * (one_minus_asc / -t.exp_m1());
        let route3 = tails.tails1.transform((-t).exp(), 0)? * tails.tails2.transform(t.exp(), 0)?;
        e1 = e1.max(rel(route1, direct));
        e2 = e2.max(rel(route2, direct));
        e3 = e3.max(rel(route3, direct));
    }
    Ok(FactorizationCheck {
        grid: grid.to_vec(),
        c,
        increment_route: e1,
        ladder_route: e2,
        tail_route: e3,
        residual: e1.max(e2).max(e3),
    })
}

/// Pipeline stage at which certification stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Normalization,
    GeometricTail,
    Increments,
    Telescoping,
    Factorization,
    FactorTails,
    CompoundGeometric,
    Mgf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Route {
    /// Both tails of `v` vanish: the law is the point mass at 0.
    Degenerate,
    /// One side of the law is empty: the reflected law is log-convex on `{0, 1, ...}`.
    OneSided,
    /// Full Wiener-Hopf factorization.
    Factorization,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CertifyConfig {
    /// Geometric truncation index; `None` keeps the tail as given.
    pub k: Option<usize>,
    pub tol: f64,
    pub grid_points: usize,
    /// Largest admissible ladder-mass deficit.
    pub max_deficit: f64,
    pub residual_tol: f64,
    pub log_convex_tol: f64,
}

impl Default for CertifyConfig {
    fn default() -> Self {
        Self {
            k: Some(16),
            tol: REFUTE_TOL,
            grid_points: 20,
            max_deficit: 1e-6,
            residual_tol: 1e-6,
            log_convex_tol: 1e-8,
        }
    }
}

/// Two-sided infinite-divisibility certificate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoSidedCertificate {
    pub certified: bool,
    pub route: Route,
    pub failed_stage: Option<Stage>,
    pub detail: Option<String>,
    pub k: Option<usize>,
    /// Total-variation distance between the input law and the law that was factorized.
    pub truncation_tv: f64,
    /// Constant of the normalized driver.
    pub k_constant: f64,
    pub telescoping_residual: Option<f64>,
    pub ladder: Option<LadderFactor>,
    pub tails: Option<FactorTails>,
    pub tails_log_convex: Vec<CheckReport>,
    pub compound: Vec<CompoundGeometricRep>,
    pub factorization: Option<FactorizationCheck>,
    /// Canonical coefficients: `jump_q` from the ascending factor, `jump_q_neg`
    /// from the descending one.
    pub levy: Option<LevyRep>,
}

impl TwoSidedCertificate {
    fn new(route: Route, k_constant: f64) -> Self {
        Self {
            certified: false,
            route,
            failed_stage: None,
            detail: None,
            k: None,
            truncation_tv: 0.0,
            k_constant,
            telescoping_residual: None,
            ladder: None,
            tails: None,
            tails_log_convex: Vec::new(),
            compound: Vec::new(),
            factorization: None,
            levy: None,
        }
    }

    fn fail(mut self, stage: Stage, detail: impl Into<String>) -> Self {
        self.certified = false;
        self.failed_stage = Some(stage);
        self.detail = Some(detail.into());
        self
    }
}

/// Probability law proportional to a summable nonnegative sequence, kept until
/// the remaining mass falls below `1e-17` of the total.
pub fn normalized_lattice(t: &GeomTail) -> Result<LatticePmf> {
    let total = t.total();
    if !(total > 0.0) {
        return input("cannot normalize a zero sequence");
    }
    let len = t
        .effective_len(1e-17 * total)
        .clamp(t.head_len().clamp(2, 50_000), 50_000);
    let probs: Vec<f64> = t.materialize(len).iter().map(|x| x / total).collect();
    let deficit = (1.0 - probs.iter().sum::<f64>()).max(0.0);
    LatticePmf::new(probs, deficit)
}

/// Runs normalization, geometric truncation, the increment law, the ladder
/// factorization and the factor certificates on `v`.
pub fn certify_id_two_sided(v: &VSpec, cfg: &CertifyConfig) -> Result<TwoSidedCertificate> {
    if cfg.grid_points == 0 {
        return input("the mgf grid needs at least one point");
    }
    let (p, k_in) = match build_p_from_v(v) {
        Ok(x) => x,
        Err(Error::Degenerate(_)) => {
            let mut cert = TwoSidedCertificate::new(Route::Degenerate, 0.0);
            cert.certified = true;
            cert.detail = Some("point mass at 0".into());
            cert.levy = Some(LevyRep {
                shift: 0,
                rate: 0.0,
                jump_q: Vec::new(),
                jump_q_neg: Vec::new(),
            });
            return Ok(cert);
        }
        Err(e) => return Err(e),
    };
    if p.pos.is_zero() || p.neg.is_zero() {
        return one_sided(&p, k_in, cfg);
    }

    let mut cert = TwoSidedCertificate::new(Route::Factorization, k_in);
    let nv = match normalize_v(v) {
        Ok(x) => x,
        Err(e) => return Ok(cert.fail(Stage::Normalization, e.to_string())),
    };
    let truncated = match cfg.k {
        Some(k) => match geometric_tail(&nv, k).and_then(|g| normalize_v(&g)) {
            Ok(g) => g,
            Err(e) => return Ok(cert.fail(Stage::GeometricTail, e.to_string())),
        },
        None => nv,
    };
    cert.k = cfg.k;
    let (pk, k) = build_p_from_v(&truncated)?;
    cert.k_constant = k;
    cert.truncation_tv = tv_distance(&p, &pk);

    let w = match build_w(&truncated) {
        Ok(w) => w,
        Err(e) => return Ok(cert.fail(Stage::Increments, e.to_string())),
    };
    let tel = check_telescoping(&pk, &w, k)?;
    cert.telescoping_residual = Some(tel);
    if tel > 1e-10 {
        return Ok(cert.fail(
            Stage::Telescoping,
            format!("telescoping residual {tel:.3e}"),
        ));
    }

    let lf = match wiener_hopf_factor(&w) {
        Ok(lf) => lf,
        Err(e) => return Ok(cert.fail(Stage::Factorization, e.to_string())),
    };
    let tails = match factor_tails(&lf, cfg.max_deficit) {
        Ok(t) => t,
        Err(e) => {
            cert.ladder = Some(lf);
            return Ok(cert.fail(Stage::FactorTails, e.to_string()));
        }
    };
    cert.ladder = Some(lf.clone());
    cert.tails = Some(tails.clone());
    let grid = default_grid(mgf_domain(&pk), cfg.grid_points);
    let fc = verify_factorization(&pk, k, &w, &lf, &tails, &grid)?;
    let fc_residual = fc.residual;
    cert.factorization = Some(fc);

    for t in [&tails.tails1, &tails.tails2] {
        cert.tails_log_convex
            .push(log_convex_slice(&t.probe(4), 0, cfg.log_convex_tol));
    }
    if let Some(i) = cert.tails_log_convex.iter().position(|r| !r.verdict) {
        let name = if i == 0 { "descending" } else { "ascending" };
        return Ok(cert.fail(
            Stage::FactorTails,
            format!("{name} tail sequence is not log-convex"),
        ));
    }
    for t in [&tails.tails1, &tails.tails2] {
        let lead = t.get(0);
        let seq = NonnegSeq::new(
            t.materialize(t.head_len() + 4)
                .iter()
                .map(|x| x / lead)
                .collect(),
        )?;
        if !is_kaluza(&seq, cfg.log_convex_tol)?.verdict {
            return Ok(cert.fail(Stage::FactorTails, "normalized tail sequence is not Kaluza"));
        }
    }

    let mut levy = LevyRep {
        shift: 0,
        rate: 0.0,
        jump_q: Vec::new(),
        jump_q_neg: Vec::new(),
    };
    for (side, t) in [&tails.tails1, &tails.tails2].into_iter().enumerate() {
        let pmf = normalized_lattice(t)?;
        let cg = compound_geometric(&pmf, cfg.tol)?;
        let ok = cg.valid;
        cert.compound.push(cg);
        if !ok {
            return Ok(cert.fail(
                Stage::CompoundGeometric,
                "a factor has a negative compound-geometric jump",
            ));
        }
        let l = levy_coeffs(&pmf, pmf.len() - 1)?;
        levy.rate += l.rate;
        if side == 0 {
            levy.jump_q_neg = l.jump_q;
        } else {
            levy.jump_q = l.jump_q;
        }
    }
    cert.levy = Some(levy);

    if lf.residual > cfg.residual_tol {
        return Ok(cert.fail(
            Stage::Factorization,
            format!("factor residual {:.3e}", lf.residual),
        ));
    }
    if fc_residual > cfg.residual_tol {
        return Ok(cert.fail(Stage::Mgf, format!("mgf residual {fc_residual:.3e}")));
    }
    cert.certified = true;
    Ok(cert)
}

fn one_sided(p: &TwoSidedPmf, k: f64, cfg: &CertifyConfig) -> Result<TwoSidedCertificate> {
    let mut cert = TwoSidedCertificate::new(Route::OneSided, k);
    let flip = !p.pos.is_zero();
    let side = if flip { &p.pos } else { &p.neg };
    let mut vals = vec![p.zero];
    vals.extend(side.values.iter().copied());
    let ratio = side.ratio.filter(|_| !side.values.is_empty());
    let seq = GeomTail::new(vals, ratio)?;
    let report = log_convex_slice(&seq.probe(4), 0, cfg.log_convex_tol);
    cert.tails_log_convex.push(report);
    let pmf = normalized_lattice(&seq)?;
    let cg = compound_geometric(&pmf, cfg.tol)?;
    let ok = cg.valid;
    cert.compound.push(cg);
    if !ok {
        return Ok(cert.fail(Stage::CompoundGeometric, "negative compound-geometric jump"));
    }
    let l = levy_coeffs(&pmf, pmf.len() - 1)?;
    cert.levy = Some(if flip {
        l
    } else {
        LevyRep {
            shift: 0,
            rate: l.rate,
            jump_q: Vec::new(),
            jump_q_neg: l.jump_q,
        }
    });
    cert.certified = true;
    Ok(cert)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetric_geometric_is_certified() {
        let v = VSpec::symmetric_geometric(0.5).unwrap();
        let cert = certify_id_two_sided(&v, &CertifyConfig::default()).unwrap();
        assert!(cert.certified, "{:?}", cert.detail);
        let fc = cert.factorization.unwrap();
        assert!(fc.residual < 1e-6);
        assert!(cert.telescoping_residual.unwrap() < 1e-12);
        assert!(cert.levy.unwrap().min_coefficient().unwrap().1 >= -1e-9);
    }

    #[test]
    fn factorization_anchor_near_zero() {
        let v = normalize_v(&VSpec::symmetric_geometric(0.3).unwrap()).unwrap();
        let (p, k) = build_p_from_v(&v).unwrap();
        let w = build_w(&v).unwrap();
        let lf = wiener_hopf_factor(&w).unwrap();
        let tails = factor_tails(&lf, 1e-6).unwrap();
        let fc = verify_factorization(&p, k, &w, &lf, &tails, &[1e-6]).unwrap();
        assert!(fc.residual < 1e-6);
        // K M(t) -> K as t -> 0.
        assert!((k * p.mgf(1e-9).unwrap() - k).abs() < 1e-7 * k);
        let c = fc.c;
        assert!(verify_factorization(&p, k, &w, &lf, &tails, &[c]).is_err());
    }

    #[test]
    fn one_sided_and_degenerate_routes() {
        let v = VSpec::new(
            GeomTail::new(vec![0.5], Some(0.4)).unwrap(),
            GeomTail::zero(),
            0.0,
        )
        .unwrap();
        let cert = certify_id_two_sided(&v, &CertifyConfig::default()).unwrap();
        assert_eq!(cert.route, Route::OneSided);
        assert!(cert.certified);
        let z = VSpec::new(GeomTail::zero(), GeomTail::zero(), 0.0).unwrap();
        let cert = certify_id_two_sided(&z, &CertifyConfig::default()).unwrap();
        assert_eq!(cert.route, Route::Degenerate);
        assert!(cert.certified);
    }

    #[test]
    fn grid_is_log_spaced() {
        let g = default_grid(1.0, 20);
        assert_eq!(g.len(), 20);
        assert!((g[0] - 9e-4).abs() < 1e-15 && (g[19] - 0.9).abs() < 1e-15);
    }
}
