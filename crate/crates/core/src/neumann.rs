//! Neumann-series solution of `f_zbar = mu f_z`.
//!
//! With `S` the Beurling transform, the series
//! `omega = sum_n (mu S)^n mu` solves `omega = mu + mu S omega`, so
//! `f = z + cauchy(omega)` has `f_zbar = omega` and
//! `f_z = 1 + S omega`. Terms are built by the recursion
//! `psi_{n+1} = mu S psi_n`, one Beurling transform per step, and the
//! partial sums of `psi` and `S psi` are carried along so no transform is
//! ever repeated.
//!
//! For `|mu| <= k < 1` the terms decay like `k^n` and the truncation error
//! after `N` terms is `k^{N+1} sqrt(pi) / (1-k)` in L2. In the degenerate
//! regime `|mu| -> 1` only power-law decay `(n+1)^{-beta/2}` of the term
//! norms survives, which is what [`decay_report`] quantifies; the partial
//! sums may then converge slowly or not at all, and [`solve`] reports a
//! stall instead of erroring.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::coefficients::BeltramiCoefficient;
use crate::error::{Error, Result};
use crate::field::{ComplexField, RealField, RegionMask};
use crate::report::ReportTable;
use crate::transforms::SpectralPlan;

/// Sequential state of the series: current term, partial sums, term norms.
pub struct NeumannRun {
    coefficient: BeltramiCoefficient,
    terms_computed: usize,
    psi: ComplexField,
    s_psi: ComplexField,
    sigma: ComplexField,
    s_sigma: ComplexField,
    norms: Vec<f64>,
}

impl NeumannRun {
    /// Start the series at `psi_0 = mu`.
    pub fn new(mu: BeltramiCoefficient, plan: &SpectralPlan) -> Result<Self> {
        if mu.grid() != plan.grid() {
            return Err(Error::GridMismatch);
        }
        let psi = mu.field().clone();
        let s_psi = plan.beurling(&psi)?;
        let sigma = psi.clone();
        let s_sigma = s_psi.clone();
        let norms = vec![psi.l2_norm()];
        Ok(NeumannRun {
            coefficient: mu,
            terms_computed: 1,
            psi,
            s_psi,
            sigma,
            s_sigma,
            norms,
        })
    }

    /// Append the next term `psi_{n+1} = mu S psi_n`.
    pub fn step(&mut self, plan: &SpectralPlan) -> Result<()> {
        let next = self.coefficient.field().mul(&self.s_psi)?;
        self.sigma.add_assign(&next)?;
        self.norms.push(next.l2_norm());
        self.psi = next;
        self.s_psi = plan.beurling(&self.psi)?;
        self.s_sigma.add_assign(&self.s_psi)?;
        self.terms_computed += 1;
        Ok(())
    }

    /// Step until `n_terms` terms (including `psi_0`) have been computed.
    pub fn run_to(&mut self, plan: &SpectralPlan, n_terms: usize) -> Result<()> {
        while self.terms_computed < n_terms {
            self.step(plan)?;
        }
        Ok(())
    }

    #[inline]
    pub fn coefficient(&self) -> &BeltramiCoefficient {
        &self.coefficient
    }

    #[inline]
    pub fn terms_computed(&self) -> usize {
        self.terms_computed
    }

    /// The most recent term `psi_n`.
    #[inline]
    pub fn psi(&self) -> &ComplexField {
        &self.psi
    }

    /// Partial sum `sum psi_k = f_zbar` of the truncated series.
    #[inline]
    pub fn sigma(&self) -> &ComplexField {
        &self.sigma
    }

    /// Partial sum `sum S psi_k = f_z - 1`.
    #[inline]
    pub fn s_sigma(&self) -> &ComplexField {
        &self.s_sigma
    }

    /// L2 norms of every computed term.
    #[inline]
    pub fn norms(&self) -> &[f64] {
        &self.norms
    }

    /// True when the term norms failed to decrease over 8 consecutive
    /// steps. Exactly vanished series (elliptic inputs that terminate) do
    /// not count as stalled.
    pub fn stalled(&self) -> bool {
        let mut streak = 0;
        for w in self.norms.windows(2) {
            if w[1] >= w[0] && w[1] > 1e-300 {
                streak += 1;
                if streak >= 8 {
                    return true;
                }
            } else {
                streak = 0;
            }
        }
        false
    }

    /// Assemble the principal solution from the current partial sums.
    pub fn into_solution(self, plan: &SpectralPlan) -> Result<PrincipalSolution> {
        let non_convergent = self.stalled();
        let fzbar = self.sigma;
        let fz = self.s_sigma.add_scalar(Complex64::new(1.0, 0.0));
        let displacement = plan.cauchy(&fzbar)?;
        let jacobian = RealField::from_samples(
            fzbar.grid(),
            fz.samples()
                .iter()
                .zip(fzbar.samples())
                .map(|(a, b)| a.norm_sqr() - b.norm_sqr())
                .collect(),
        )?;
        Ok(PrincipalSolution {
            displacement,
            fz,
            fzbar,
            jacobian,
            terms_used: self.terms_computed,
            non_convergent,
        })
    }
}

/// A truncated-series principal solution `f = z + cauchy(omega)`.
///
/// `displacement` is `f(z) - z` and has zero mean (the periodic stand-in
/// for the decay `f(z) - z -> 0` at infinity).
pub struct PrincipalSolution {
    displacement: ComplexField,
    fz: ComplexField,
    fzbar: ComplexField,
    jacobian: RealField,
    terms_used: usize,
    non_convergent: bool,
}

impl PrincipalSolution {
    #[inline]
    pub fn displacement(&self) -> &ComplexField {
        &self.displacement
    }

    #[inline]
    pub fn fz(&self) -> &ComplexField {
        &self.fz
    }

    #[inline]
    pub fn fzbar(&self) -> &ComplexField {
        &self.fzbar
    }

    /// `|f_z|^2 - |f_zbar|^2`.
    #[inline]
    pub fn jacobian(&self) -> &RealField {
        &self.jacobian
    }

    #[inline]
    pub fn terms_used(&self) -> usize {
        self.terms_used
    }

    /// Set when the term norms stalled for 8 consecutive steps.
    #[inline]
    pub fn non_convergent(&self) -> bool {
        self.non_convergent
    }

    /// The map itself, `f(z) = z + displacement(z)`.
    pub fn map(&self) -> ComplexField {
        let mut f = ComplexField::from_fn(self.displacement.grid(), |z| z);
        f.add_assign(&self.displacement).expect("same grid");
        f
    }

    /// Relative L2 residual of the equation: for an `N`-term partial sum
    /// this equals `norm(psi_{N+1}) / norm(f_zbar)` exactly.
    pub fn beltrami_residual(&self, mu: &BeltramiCoefficient) -> Result<f64> {
        let mu_fz = mu.field().mul(&self.fz)?;
        let res = self.fzbar.sub(&mu_fz)?.l2_norm();
        let denom = self.fzbar.l2_norm();
        Ok(if denom == 0.0 { res } else { res / denom })
    }

    /// Measure of `f(E)` through the Jacobian.
    pub fn image_measure(&self, region: &RegionMask) -> Result<f64> {
        crate::field::image_measure(&self.jacobian, region)
    }
}

/// Run the series to `n_terms` terms and assemble the solution.
pub fn solve(
    mu: &BeltramiCoefficient,
    plan: &SpectralPlan,
    n_terms: usize,
) -> Result<PrincipalSolution> {
    if n_terms < 1 {
        return Err(Error::InvalidParameter("solve needs n_terms >= 1".to_string()));
    }
    let mut run = NeumannRun::new(mu.clone(), plan)?;
    run.run_to(plan, n_terms)?;
    run.into_solution(plan)
}

/// Solve `f_zbar = lambda mu f_z` for a holomorphic parameter `|lambda| < 1`.
pub fn solve_lambda(
    mu: &BeltramiCoefficient,
    plan: &SpectralPlan,
    lambda: Complex64,
    n_terms: usize,
) -> Result<PrincipalSolution> {
    if !(lambda.norm() < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "solve_lambda needs |lambda| < 1, got {}",
            lambda.norm()
        )));
    }
    solve(&mu.scaled(lambda)?, plan, n_terms)
}

/// Extract the series term `(mu S)^n mu` on `E` by a contour integral in
/// the holomorphic parameter.
///
/// Evaluates the trapezoid approximation of
/// `(1/2 pi i) \oint_{|lambda|=rho} lambda^{-(n+2)} f^lambda_zbar dlambda`
/// restricted to `E`. Since `f^lambda_zbar = sum_k lambda^{k+1} psi_k`,
/// the `nodes`-point rule returns `psi_n` plus an aliasing error
/// `sum_{m>=1} rho^{m nodes} psi_{n + m nodes}`, negligible at the default
/// `rho = 1/2`. The per-node series are independent solver runs and are
/// executed concurrently, then summed in node order so the result is
/// deterministic.
pub fn contour_term(
    mu: &BeltramiCoefficient,
    plan: &SpectralPlan,
    n: usize,
    region: &RegionMask,
    rho: f64,
    nodes: usize,
) -> Result<ComplexField> {
    if nodes < 16 {
        return Err(Error::InvalidParameter(format!(
            "contour_term needs >= 16 nodes, got {nodes}"
        )));
    }
    if !(rho > 0.0 && rho < 1.0) {
        return Err(Error::InvalidParameter(format!("contour radius {rho}")));
    }
    if region.grid() != mu.grid() || plan.grid() != mu.grid() {
        return Err(Error::GridMismatch);
    }
    // Enough terms that the per-node truncation tail rho^{inner+1}/(1-rho)
    // drops below ~1e-14 (the term norms themselves are bounded by sqrt(pi)).
    let inner = ((1e-14f64.ln() / rho.ln()).ceil() as usize)
        .max(n + 9)
        .min(512);
    let grid = mu.grid();
    let mut acc = ComplexField::zeros(grid);
    let all: Vec<usize> = (0..nodes).collect();
    for chunk in all.chunks(8) {
        let parts: Vec<ComplexField> = chunk
            .par_iter()
            .map(|&j| -> Result<ComplexField> {
                let theta = 2.0 * std::f64::consts::PI * j as f64 / nodes as f64;
                let lambda = Complex64::from_polar(rho, theta);
                let mut run = NeumannRun::new(mu.scaled(lambda)?, plan)?;
                run.run_to(plan, inner)?;
                // Weight lambda^{-(n+1)} / nodes, phase reduced mod 2 pi.
                let k = (j * (n + 1)) % nodes;
                let w = Complex64::from_polar(
                    rho.powi(-(n as i32 + 1)),
                    -2.0 * std::f64::consts::PI * k as f64 / nodes as f64,
                ) / nodes as f64;
                Ok(run.sigma().scale(w))
            })
            .collect::<Result<Vec<_>>>()?;
        for p in parts {
            acc.add_assign(&p)?;
        }
    }
    acc.restrict(region)
}

/// Tabulate term norms against the envelope `(n+1)^{beta/2} norm(psi_n)`
/// and fit the tail decay exponent.
///
/// Columns `n, norm, envelope`. The fitted `dhat` is the negative
/// least-squares slope of `log norm(psi_n)` against `log n` over the tail
/// half of the run, so `dhat > 1/2` is the square-summability border. The
/// `envelope_non_growing` check compares the envelope maximum on the tail
/// half against 1.1 times the maximum on the first half; growth beyond
/// that factor means the decay rate `beta` is not attained.
pub fn decay_report(run: &NeumannRun, beta: f64, p: f64) -> Result<ReportTable> {
    if run.terms_computed() < 16 {
        return Err(Error::InvalidParameter(format!(
            "decay_report needs >= 16 terms, got {}",
            run.terms_computed()
        )));
    }
    if !(beta > 0.0) || !(p > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "decay_report(beta={beta}, p={p})"
        )));
    }
    let norms = run.norms();
    let n_total = norms.len();
    let mut table = ReportTable::new(
        format!("series decay, beta={beta}, p={p}"),
        &["n", "norm", "envelope"],
    );
    for (n, &norm) in norms.iter().enumerate() {
        let envelope = (n as f64 + 1.0).powf(0.5 * beta) * norm;
        table.push_row(vec![n as f64, norm, envelope]);
    }

    let half = n_total / 2;
    let mut early_max = 0.0f64;
    let mut late_max = 0.0f64;
    for (n, &norm) in norms.iter().enumerate().skip(1) {
        let envelope = (n as f64 + 1.0).powf(0.5 * beta) * norm;
        if n <= half {
            early_max = early_max.max(envelope);
        }
        if n >= half {
            late_max = late_max.max(envelope);
        }
    }
    let growing = late_max > 1.1 * early_max;

    // Tail power-law fit log norm = c - dhat log n.
    let pts: Vec<(f64, f64)> = (half..n_total)
        .filter(|&n| norms[n] > 1e-300)
        .map(|n| ((n as f64).ln(), norms[n].ln()))
        .collect();
    let dhat = if pts.len() < 2 {
        f64::INFINITY
    } else {
        let m = pts.len() as f64;
        let sx: f64 = pts.iter().map(|p| p.0).sum();
        let sy: f64 = pts.iter().map(|p| p.1).sum();
        let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
        let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
        -((m * sxy - sx * sy) / (m * sxx - sx * sx))
    };

    table.add_meta("beta", beta);
    table.add_meta("p", p);
    table.add_meta("dhat", dhat);
    table.add_meta("envelope_early_max", early_max);
    table.add_meta("envelope_late_max", late_max);
    let e_int = run.coefficient().distortion(p)?.exp_integral(p);
    table.add_meta("exp_integral", e_int);
    table.add_check("envelope_non_growing", !growing, late_max, 1.1 * early_max);
    Ok(table)
}
