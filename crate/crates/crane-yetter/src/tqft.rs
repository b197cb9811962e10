//! Closed-form predictions, the BF correspondence and agreement reports
//! between them and the state sum.

use std::f64::consts::PI;
use std::time::Instant;

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::homology::{betti_numbers, signature};
use crate::qcategory::{CategoryError, QuantumData};
use crate::scalars::ComplexF;
use crate::simplicial::{Triangulation, TriangulationError};
use crate::statesum::{crane_yetter_state_sum, plan_contraction, StateSumError, StateSumOptions};

/// Relative tolerance for comparisons between complex values.
pub const TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TqftError {
    #[error("the cosmological constant must be nonzero")]
    ZeroLambda,
    #[error("y = 1 has no finite cosmological constant")]
    ZeroPhase,
    #[error(transparent)]
    Category(#[from] CategoryError),
    #[error(transparent)]
    Triangulation(#[from] TriangulationError),
    #[error(transparent)]
    StateSum(#[from] StateSumError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BFParams {
    lambda: [f64; 2],
    /// Logarithm branch used to produce Λ, when it came from `lambda_for_y`.
    pub branch: i64,
}

impl BFParams {
    pub fn new(lambda: ComplexF) -> Result<BFParams, TqftError> {
        if lambda.norm() == 0.0 || !lambda.is_finite() {
            return Err(TqftError::ZeroLambda);
        }
        Ok(BFParams { lambda: [lambda.re, lambda.im], branch: 0 })
    }

    pub fn lambda(&self) -> ComplexF {
        Complex64::new(self.lambda[0], self.lambda[1])
    }
}

/// `N^{χ/2} y^σ` with the positive real root of `N`.
pub fn predict_from_topology(chi: i64, sigma: i64, q: &QuantumData) -> ComplexF {
    predict_with(chi, sigma, q.global_dimension().to_complex().re, q.y())
}

/// The same formula for arbitrary constants.
pub fn predict_with(chi: i64, sigma: i64, n: f64, y: ComplexF) -> ComplexF {
    Complex64::new(n.powf(chi as f64 / 2.0), 0.0) * y.powi(sigma as i32)
}

/// `exp(−36π² i σ / Λ)`.
pub fn bf_correspondence(sigma: i64, p: &BFParams) -> ComplexF {
    (Complex64::new(0.0, -36.0 * PI * PI * sigma as f64) / p.lambda()).exp()
}

/// `Λ = −36π² i / (log y + 2πik)` on branch `k`, so that
/// `exp(−36π² i / Λ) = y`.
pub fn lambda_for_y_on_branch(q: &QuantumData, branch: i64) -> Result<BFParams, TqftError> {
    let log_y = q.y().ln() + Complex64::new(0.0, 2.0 * PI * branch as f64);
    if log_y.norm() < 1e-15 {
        return Err(TqftError::ZeroPhase);
    }
    let mut p = BFParams::new(Complex64::new(0.0, -36.0 * PI * PI) / log_y)?;
    p.branch = branch;
    Ok(p)
}

/// The principal-branch solution of `exp(−36π² i / Λ) = y`.
pub fn lambda_for_y(q: &QuantumData) -> Result<BFParams, TqftError> {
    lambda_for_y_on_branch(q, 0)
}

/// `|a − b| / max(|a|, |b|)`, zero when both vanish.
pub fn relative_error(a: ComplexF, b: ComplexF) -> f64 {
    let scale = a.norm().max(b.norm());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).norm() / scale
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Comparison {
    pub name: String,
    pub lhs: [f64; 2],
    pub rhs: [f64; 2],
    pub relative_error: f64,
    pub passed: bool,
}

impl Comparison {
    pub fn new(name: &str, lhs: ComplexF, rhs: ComplexF) -> Comparison {
        let e = relative_error(lhs, rhs);
        Comparison { name: name.into(), lhs: [lhs.re + 0.0, lhs.im + 0.0], rhs: [rhs.re + 0.0, rhs.im + 0.0], relative_error: e, passed: e <= TOLERANCE }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExactValue {
    pub exact: String,
    pub complex: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InvariantReport {
    pub file: String,
    pub r: u32,
    pub chi: i64,
    pub sigma: i64,
    pub betti: [usize; 5],
    pub state_sum: Option<ExactValue>,
    /// `log_N |Z_CY| − χ/2`; zero when the normalization agrees.
    pub n_power_offset: Option<f64>,
    pub predicted: [f64; 2],
    pub normalized: Option<[f64; 2]>,
    pub bf: Option<[f64; 2]>,
    pub lambda: Option<BFParams>,
    pub comparisons: Vec<Comparison>,
    pub passed: bool,
    pub seconds: Option<f64>,
}

#[derive(Debug, Clone, Default)]
pub struct VerifyOptions {
    pub predict_only: bool,
    pub state_sum: StateSumOptions,
}

pub fn verify_manifold(t: &Triangulation, file: &str, r: u32, opts: &VerifyOptions) -> Result<InvariantReport, TqftError> {
    let q = QuantumData::build(r)?;
    verify_against(t, file, &q, opts, |chi, sigma| predict_from_topology(chi, sigma, &q))
}

/// [`verify_manifold`] with a caller-supplied prediction `(χ, σ) ↦ Z`.
pub fn verify_against(
    t: &Triangulation,
    file: &str,
    q: &QuantumData,
    opts: &VerifyOptions,
    predict: impl Fn(i64, i64) -> ComplexF,
) -> Result<InvariantReport, TqftError> {
    let start = Instant::now();
    if !t.is_closed() {
        return Err(StateSumError::NotClosed.into());
    }
    if !t.is_simplicial() {
        return Err(StateSumError::DeltaComplexUnsupported.into());
    }
    let t = t.require_closed_oriented()?;
    let chi = t.euler_characteristic();
    let sigma = signature(&t)?;
    let betti = betti_numbers(&t);
    let predicted = predict(chi, sigma);
    let n = q.global_dimension().to_complex().re;
    let root = Complex64::new(n.powf(chi as f64 / 2.0), 0.0);
    let mut comparisons = Vec::new();

    let lambda = lambda_for_y(q).ok();
    let bf = lambda.map(|p| bf_correspondence(sigma, &p));
    if let Some(b) = bf {
        comparisons.push(Comparison::new("bf_vs_framing_anomaly", b, q.y().powi(sigma as i32)));
        comparisons.push(Comparison::new("bf_vs_prediction", b * root, predicted));
    }

    let (state_sum, n_power_offset, normalized) = if opts.predict_only {
        (None, None, None)
    } else {
        let plan = plan_contraction(&t);
        let z = crane_yetter_state_sum(&t, q, &plan, &opts.state_sum)?;
        let zc = z.to_complex();
        comparisons.push(Comparison::new("state_sum_vs_prediction", zc, predicted));
        let normalized = zc / root;
        comparisons.push(Comparison::new("unit_modulus", Complex64::new(normalized.norm(), 0.0), Complex64::new(1.0, 0.0)));
        let offset = zc.norm().ln() / n.ln() - chi as f64 / 2.0;
        (Some(ExactValue { exact: z.to_string(), complex: [zc.re, zc.im] }), Some(offset), Some([normalized.re, normalized.im]))
    };
    let passed = comparisons.iter().all(|c| c.passed);
    Ok(InvariantReport {
        file: file.into(),
        r: q.r(),
        chi,
        sigma,
        betti,
        state_sum,
        n_power_offset,
        predicted: [predicted.re, predicted.im],
        normalized,
        bf: bf.map(|b| [b.re + 0.0, b.im + 0.0]),
        lambda,
        comparisons,
        passed,
        seconds: Some(start.elapsed().as_secs_f64()),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MultiplicativityEntry {
    pub check: String,
    /// `"prediction"` when the values come from the homology path, `"state_sum"` otherwise.
    pub via: String,
    pub comparison: Comparison,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MultiplicativityReport {
    pub r: u32,
    pub entries: Vec<MultiplicativityEntry>,
    pub passed: bool,
}

#[derive(Debug, Clone)]
pub struct MultiplicativityOptions {
    /// Also run the state sum on composites with at most this many top
    /// simplices.
    pub state_sum_max_simplices: usize,
    pub state_sum: StateSumOptions,
}

impl Default for MultiplicativityOptions {
    fn default() -> Self {
        MultiplicativityOptions { state_sum_max_simplices: 12, state_sum: StateSumOptions::default() }
    }
}

fn z_prime_oracle(t: &Triangulation, q: &QuantumData) -> Result<ComplexF, TqftError> {
    Ok(q.y().powi(signature(t)? as i32))
}

fn z_prime_state_sum(t: &Triangulation, q: &QuantumData, opts: &StateSumOptions) -> Result<ComplexF, TqftError> {
    let z = crane_yetter_state_sum(t, q, &plan_contraction(t), opts)?.to_complex();
    let n = q.global_dimension().to_complex().re;
    Ok(z / n.powf(t.euler_characteristic() as f64 / 2.0))
}

/// Gluing and duality consequences on named closed oriented inputs:
/// `Z′(M₁ ⊔ M₂) = Z′(M₁)Z′(M₂)` for every pair, `Z′(M # M̄) = Z′(M)Z′(M̄) = 1`
/// for every input, and `Z′(M) = 1` whenever `χ = σ = 0`.
pub fn multiplicativity_check(
    inputs: &[(String, Triangulation)],
    q: &QuantumData,
    opts: &MultiplicativityOptions,
) -> Result<MultiplicativityReport, TqftError> {
    let inputs: Vec<(String, Triangulation)> =
        inputs.iter().map(|(n, t)| Ok((n.clone(), t.require_closed_oriented()?))).collect::<Result<_, TriangulationError>>()?;
    let one = Complex64::new(1.0, 0.0);
    let mut entries = Vec::new();
    let mut push = |check: String, via: &str, lhs: ComplexF, rhs: ComplexF| {
        entries.push(MultiplicativityEntry { check: check.clone(), via: via.into(), comparison: Comparison::new(&check, lhs, rhs) });
    };
    let small = |t: &Triangulation| t.cells(4).len() <= opts.state_sum_max_simplices;
    let oracle: Vec<ComplexF> = inputs.iter().map(|(_, t)| z_prime_oracle(t, q)).collect::<Result<_, _>>()?;
    for i in 0..inputs.len() {
        for j in i..inputs.len() {
            let (a, b) = (&inputs[i], &inputs[j]);
            let u = a.1.disjoint_union(&b.1);
            let name = format!("disjoint_union({}, {})", a.0, b.0);
            push(name.clone(), "prediction", z_prime_oracle(&u, q)?, oracle[i] * oracle[j]);
            if small(&u) {
                let lhs = z_prime_state_sum(&u, q, &opts.state_sum)?;
                let rhs = z_prime_state_sum(&a.1, q, &opts.state_sum)? * z_prime_state_sum(&b.1, q, &opts.state_sum)?;
                push(name, "state_sum", lhs, rhs);
            }
        }
    }
    for (k, (name, t)) in inputs.iter().enumerate() {
        let mirror = t.reverse_orientation();
        let sum = t.connected_sum(t, true)?;
        let check = format!("connected_sum({0}, reversed {0})", name);
        let zs = z_prime_oracle(&sum, q)?;
        push(check.clone(), "prediction", zs, oracle[k] * z_prime_oracle(&mirror, q)?);
        push(format!("{} is trivial", check), "prediction", zs, one);
        if small(&sum) {
            push(check, "state_sum", z_prime_state_sum(&sum, q, &opts.state_sum)?, one);
        }
        if t.euler_characteristic() == 0 && signature(t)? == 0 {
            let check = format!("{} has one-dimensional state spaces", name);
            push(check.clone(), "prediction", oracle[k], one);
            if small(t) {
                push(check, "state_sum", z_prime_state_sum(t, q, &opts.state_sum)?, one);
            }
        }
    }
    let passed = entries.iter().all(|e| e.comparison.passed);
    Ok(MultiplicativityReport { r: q.r(), entries, passed })
}
