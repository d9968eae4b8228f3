//! Lowest eigenpairs of sparse Hermitian operators.
//!
//! The workhorse is a Lanczos iteration with full reorthogonalization and a
//! deterministic seeded start vector. Operators that are exactly real (the
//! half-flux sweet spot) run on a real symmetric fast path. Small problems,
//! and iterations that fail their residual contract, fall back to a dense
//! solve. All paths end with the same post-processing: ascending sort,
//! re-orthonormalization inside degenerate clusters, and a deterministic
//! phase convention, so results are reproducible bit for bit.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;
use std::collections::HashMap;

use crate::basis::{ChargeBasis, MAX_CUTOFF};
use crate::hamiltonian::build_hamiltonian;
use crate::operator::SparseHermitianOperator;
use crate::spec::FluxQubitSpec;
use crate::{Error, Result};

/// Eigenvalues closer than this (GHz) are treated as one degenerate cluster
/// when orthonormalizing and phase-fixing.
const DEGENERACY_GAP: f64 = 1e-9;

/// Solver knobs. The defaults suit charge-basis Hamiltonians up to a few
/// tens of thousands of states.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenOptions {
    /// Internal residual target as a fraction of the operator norm.
    pub residual_rel_tol: f64,
    /// Hard acceptance bound: ||H v - E v|| must end below this fraction of
    /// the operator norm or the solve is rejected.
    pub contract_rel_tol: f64,
    /// Krylov subspace cap.
    pub max_subspace: usize,
    /// Dimensions at or below this solve densely from the start.
    pub dense_cutover: usize,
    /// Largest dimension allowed to fall back to a dense solve after a
    /// failed iteration.
    pub dense_fallback_max: usize,
    /// Seed for the deterministic start vector.
    pub seed: u64,
}

impl Default for EigenOptions {
    fn default() -> Self {
        EigenOptions {
            residual_rel_tol: 1e-10,
            contract_rel_tol: 1e-8,
            max_subspace: 700,
            dense_cutover: 400,
            dense_fallback_max: 4000,
            seed: 0x5eed_cafe_f00d_0001,
        }
    }
}

/// One eigenvalue with its normalized eigenvector.
#[derive(Debug, Clone)]
pub struct EigenPair {
    pub value: f64,
    pub vector: Vec<Complex64>,
}

/// The `k` lowest eigenpairs of a Hermitian operator, ascending.
///
/// Eigenvectors are orthonormal; within clusters degenerate to 1e-9 they are
/// explicitly re-orthonormalized. Each vector is phased so its largest
/// component is real and positive.
pub fn lowest_eigenpairs(
    op: &SparseHermitianOperator,
    k: usize,
    opts: &EigenOptions,
) -> Result<Vec<EigenPair>> {
    let dim = op.dimension();
    if k == 0 {
        return Ok(Vec::new());
    }
    if k > dim {
        return Err(Error::domain(format!(
            "requested {k} eigenpairs of a dimension-{dim} operator"
        )));
    }
    let scale = op.norm_inf().max(1.0);

    let mut pairs = if dim <= opts.dense_cutover || 4 * k >= dim {
        dense_lowest(op, k)
    } else {
        match lanczos_lowest(op, k, opts, scale) {
            Some(pairs) => pairs,
            None => {
                if dim <= opts.dense_fallback_max {
                    dense_lowest(op, k)
                } else {
                    return Err(Error::SolverNoConvergence {
                        residual: f64::NAN,
                        target: opts.contract_rel_tol * scale,
                        iterations: opts.max_subspace,
                    });
                }
            }
        }
    };

    postprocess(&mut pairs);

    // Final contract: true residuals against the operator norm.
    let target = opts.contract_rel_tol * scale;
    let mut worst = 0.0f64;
    let mut work = vec![Complex64::ZERO; dim];
    for p in &pairs {
        op.matvec(&p.vector, &mut work);
        let mut r2 = 0.0;
        for (w, v) in work.iter().zip(p.vector.iter()) {
            r2 += (w - p.value * v).norm_sqr();
        }
        worst = worst.max(r2.sqrt());
    }
    if worst > target {
        return Err(Error::SolverNoConvergence {
            residual: worst,
            target,
            iterations: opts.max_subspace,
        });
    }
    Ok(pairs)
}

fn postprocess(pairs: &mut [EigenPair]) {
    pairs.sort_by(|a, b| a.value.total_cmp(&b.value));
    // Re-orthonormalize degenerate clusters so the basis inside them does
    // not depend on solver round-off, then fix every phase.
    let mut start = 0;
    while start < pairs.len() {
        let mut end = start + 1;
        while end < pairs.len() && pairs[end].value - pairs[end - 1].value < DEGENERACY_GAP {
            end += 1;
        }
        for i in start..end {
            for j in start..i {
                let (head, tail) = pairs.split_at_mut(i);
                let vj = &head[j].vector;
                let vi = &mut tail[0].vector;
                let proj: Complex64 = vj.iter().zip(vi.iter()).map(|(a, b)| a.conj() * b).sum();
                for (a, b) in vi.iter_mut().zip(vj.iter()) {
                    *a -= proj * b;
                }
            }
            let norm: f64 = pairs[i].vector.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
            if norm > 0.0 {
                for v in pairs[i].vector.iter_mut() {
                    *v /= norm;
                }
            }
        }
        start = end;
    }
    for p in pairs.iter_mut() {
        fix_phase(&mut p.vector);
    }
}

/// Rotates a vector so its largest-magnitude component (first such index on
/// ties) is real and positive.
fn fix_phase(v: &mut [Complex64]) {
    let mut best = 0;
    let mut best_norm = -1.0f64;
    for (i, c) in v.iter().enumerate() {
        let n = c.norm_sqr();
        if n > best_norm {
            best_norm = n;
            best = i;
        }
    }
    let c = v[best];
    let norm = c.norm();
    if norm > 0.0 {
        let rot = c.conj() / norm;
        for x in v.iter_mut() {
            *x *= rot;
        }
    }
}

fn dense_lowest(op: &SparseHermitianOperator, k: usize) -> Vec<EigenPair> {
    let dim = op.dimension();
    if op.is_real() {
        let mut m = DMatrix::zeros(dim, dim);
        for (r, c, v) in op.entries() {
            m[(r, c)] = v.re;
        }
        let eig = nalgebra::SymmetricEigen::new(m);
        let mut order: Vec<usize> = (0..dim).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        order
            .into_iter()
            .take(k)
            .map(|i| EigenPair {
                value: eig.eigenvalues[i],
                vector: eig
                    .eigenvectors
                    .column(i)
                    .iter()
                    .map(|&x| Complex64::new(x, 0.0))
                    .collect(),
            })
            .collect()
    } else {
        let eig = nalgebra::SymmetricEigen::new(op.to_dense());
        let mut order: Vec<usize> = (0..dim).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        order
            .into_iter()
            .take(k)
            .map(|i| EigenPair {
                value: eig.eigenvalues[i],
                vector: eig.eigenvectors.column(i).iter().copied().collect(),
            })
            .collect()
    }
}

/// Lanczos with full reorthogonalization. Returns `None` when the residual
/// target is not met within the subspace cap; the caller decides about
/// fallback.
fn lanczos_lowest(
    op: &SparseHermitianOperator,
    k: usize,
    opts: &EigenOptions,
    scale: f64,
) -> Option<Vec<EigenPair>> {
    if op.is_real() {
        lanczos_real(op, k, opts, scale)
    } else {
        lanczos_complex(op, k, opts, scale)
    }
}

/// Ritz data of a tridiagonal section: ascending eigenvalues with their
/// subspace coordinates and residual estimates |beta_m s_m|.
struct RitzSection {
    values: Vec<f64>,
    coords: Vec<Vec<f64>>,
    residuals: Vec<f64>,
}

fn ritz_section(alpha: &[f64], beta: &[f64], k: usize, beta_next: f64) -> RitzSection {
    let m = alpha.len();
    let mut t = DMatrix::zeros(m, m);
    for i in 0..m {
        t[(i, i)] = alpha[i];
        if i + 1 < m {
            t[(i, i + 1)] = beta[i];
            t[(i + 1, i)] = beta[i];
        }
    }
    let eig = nalgebra::SymmetricEigen::new(t);
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let take = k.min(m);
    let mut values = Vec::with_capacity(take);
    let mut coords = Vec::with_capacity(take);
    let mut residuals = Vec::with_capacity(take);
    for &i in order.iter().take(take) {
        values.push(eig.eigenvalues[i]);
        let col: Vec<f64> = eig.eigenvectors.column(i).iter().copied().collect();
        residuals.push(beta_next.abs() * col[m - 1].abs());
        coords.push(col);
    }
    RitzSection {
        values,
        coords,
        residuals,
    }
}

macro_rules! lanczos_impl {
    ($name:ident, $scalar:ty, $zero:expr, $matvec:ident, $rand:ident, $dotc:ident, $re:expr, $to_complex:expr) => {
        fn $name(
            op: &SparseHermitianOperator,
            k: usize,
            opts: &EigenOptions,
            scale: f64,
        ) -> Option<Vec<EigenPair>> {
            let dim = op.dimension();
            let m_cap = opts.max_subspace.min(dim);
            let tol = opts.residual_rel_tol * scale;
            let check_every = 24usize;

            let mut basis: Vec<Vec<$scalar>> = Vec::with_capacity(m_cap);
            let mut alpha: Vec<f64> = Vec::with_capacity(m_cap);
            let mut beta: Vec<f64> = Vec::with_capacity(m_cap);
            let mut rng = SplitMix64::new(opts.seed ^ (dim as u64).wrapping_mul(0x9e37_79b9));

            basis.push($rand(&mut rng, dim));
            let mut w: Vec<$scalar> = vec![$zero; dim];
            let mut section: Option<RitzSection> = None;

            loop {
                let j = alpha.len();
                if j == m_cap {
                    break;
                }
                op.$matvec(&basis[j], &mut w);
                if j > 0 {
                    let b = beta[j - 1];
                    let prev = &basis[j - 1];
                    for (wi, pi) in w.iter_mut().zip(prev.iter()) {
                        *wi -= *pi * b;
                    }
                }
                // The diagonal recurrence coefficient is mathematically
                // real; only round-off leaks into the imaginary part.
                let a = $re($dotc(&basis[j], &w));
                alpha.push(a);
                {
                    let cur = &basis[j];
                    for (wi, ci) in w.iter_mut().zip(cur.iter()) {
                        *wi -= *ci * a;
                    }
                }
                // Full reorthogonalization, two passes.
                for _ in 0..2 {
                    for v in basis.iter() {
                        let proj = $dotc(v, &w);
                        if proj != $zero {
                            for (wi, vi) in w.iter_mut().zip(v.iter()) {
                                *wi -= *vi * proj;
                            }
                        }
                    }
                }
                let nb = norm2(&w);
                if nb <= 1e-13 * scale {
                    // Invariant subspace. Restart with a fresh direction if
                    // more vectors are still needed.
                    if alpha.len() >= k {
                        beta.push(0.0);
                        section = Some(ritz_section(&alpha, &beta[..alpha.len() - 1], k, 0.0));
                        break;
                    }
                    let mut fresh = $rand(&mut rng, dim);
                    for _ in 0..2 {
                        for v in basis.iter() {
                            let proj = $dotc(v, &fresh);
                            for (fi, vi) in fresh.iter_mut().zip(v.iter()) {
                                *fi -= *vi * proj;
                            }
                        }
                    }
                    let nf = norm2(&fresh);
                    if nf <= 1e-13 {
                        break;
                    }
                    for f in fresh.iter_mut() {
                        *f /= nf;
                    }
                    beta.push(0.0);
                    basis.push(fresh);
                    continue;
                }
                beta.push(nb);
                for wi in w.iter_mut() {
                    *wi /= nb;
                }
                basis.push(std::mem::replace(&mut w, vec![$zero; dim]));

                let steps = alpha.len();
                if steps >= k + 2 && (steps % check_every == 0 || steps == m_cap) {
                    let s = ritz_section(&alpha, &beta[..steps - 1], k, beta[steps - 1]);
                    let converged = s.residuals.len() >= k && s.residuals.iter().all(|&r| r <= tol);
                    section = Some(s);
                    if converged {
                        break;
                    }
                }
            }

            let section = match section {
                Some(s) if s.values.len() >= k => s,
                _ => {
                    if alpha.is_empty() {
                        return None;
                    }
                    let steps = alpha.len();
                    let bn = if beta.len() >= steps { beta[steps - 1] } else { 0.0 };
                    let s = ritz_section(&alpha, &beta[..steps - 1], k, bn);
                    if s.values.len() < k {
                        return None;
                    }
                    s
                }
            };
            if !section.residuals.iter().take(k).all(|&r| r <= tol) {
                return None;
            }

            // Assemble Ritz vectors in the original space.
            let mut out = Vec::with_capacity(k);
            for i in 0..k {
                let mut vec = vec![$zero; dim];
                for (j, &c) in section.coords[i].iter().enumerate() {
                    if j >= basis.len() {
                        break;
                    }
                    for (vi, bi) in vec.iter_mut().zip(basis[j].iter()) {
                        *vi += *bi * c;
                    }
                }
                let n = norm2(&vec);
                if n > 0.0 {
                    for v in vec.iter_mut() {
                        *v /= n;
                    }
                }
                out.push(EigenPair {
                    value: section.values[i],
                    vector: vec.into_iter().map($to_complex).collect(),
                });
            }
            Some(out)
        }
    };
}

lanczos_impl!(
    lanczos_real,
    f64,
    0.0f64,
    matvec_real,
    rand_real,
    dot_real,
    |x: f64| x,
    |x: f64| Complex64::new(x, 0.0)
);
lanczos_impl!(
    lanczos_complex,
    Complex64,
    Complex64::ZERO,
    matvec,
    rand_complex,
    dot_complex,
    |x: Complex64| x.re,
    |x: Complex64| x
);

trait Norm2 {
    fn abs2(&self) -> f64;
}
impl Norm2 for f64 {
    fn abs2(&self) -> f64 {
        self * self
    }
}
impl Norm2 for Complex64 {
    fn abs2(&self) -> f64 {
        self.norm_sqr()
    }
}

fn norm2<T: Norm2>(v: &[T]) -> f64 {
    v.iter().map(|x| x.abs2()).sum::<f64>().sqrt()
}

fn dot_real(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}

/// <a|b>; the Lanczos recurrence only consumes this through terms where the
/// mathematical value is real, but the complex projection is needed for
/// reorthogonalization.
fn dot_complex(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }

    fn next_f64(&mut self) -> f64 {
        // Uniform in [-0.5, 0.5).
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64 - 0.5
    }
}

fn rand_real(rng: &mut SplitMix64, dim: usize) -> Vec<f64> {
    let mut v: Vec<f64> = (0..dim).map(|_| rng.next_f64()).collect();
    let n = norm2(&v);
    for x in v.iter_mut() {
        *x /= n;
    }
    v
}

fn rand_complex(rng: &mut SplitMix64, dim: usize) -> Vec<Complex64> {
    let mut v: Vec<Complex64> = (0..dim)
        .map(|_| Complex64::new(rng.next_f64(), rng.next_f64()))
        .collect();
    let n = norm2(&v);
    for x in v.iter_mut() {
        *x /= n;
    }
    v
}

// --- Charge-cutoff convergence ------------------------------------------

/// One probe of the cutoff search: how far the lowest `k` energies move when
/// the cutoff grows from `nc` to `nc + 2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CutoffStep {
    pub nc: u32,
    pub max_shift_ghz: f64,
    pub accepted: bool,
}

/// Reproducible record of a cutoff search: the certified cutoff, every probe
/// made on the way, and the energies at the certified cutoff.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CutoffCertificate {
    pub nc: u32,
    pub k: usize,
    pub tol_ghz: f64,
    pub steps: Vec<CutoffStep>,
    pub energies_ghz: Vec<f64>,
}

/// Smallest cutoff (at least 3) where all `k` lowest energies move less than
/// `tol_ghz` when the cutoff grows by 2.
///
/// The search doubles the cutoff until the criterion holds, then bisects
/// back, which leans on the empirical monotonicity of charge-basis
/// convergence. An infinite tolerance accepts the smallest cutoff without
/// solving anything.
pub fn converge_cutoff(
    spec: &FluxQubitSpec,
    k: usize,
    tol_ghz: f64,
    opts: &EigenOptions,
) -> Result<CutoffCertificate> {
    const NC_MIN: u32 = 3;
    const NC_SEARCH_MAX: u32 = MAX_CUTOFF - 2;
    let spec = spec.clone().validated()?;
    if k == 0 {
        return Err(Error::domain("cutoff search needs k >= 1"));
    }
    if !(tol_ghz > 0.0) {
        return Err(Error::domain(format!(
            "cutoff tolerance must be positive, got {tol_ghz}"
        )));
    }
    if tol_ghz.is_infinite() {
        return Ok(CutoffCertificate {
            nc: NC_MIN,
            k,
            tol_ghz,
            steps: Vec::new(),
            energies_ghz: Vec::new(),
        });
    }

    let mut energy_memo: HashMap<u32, Vec<f64>> = HashMap::new();
    let mut solve = |nc: u32| -> Result<Vec<f64>> {
        if let Some(e) = energy_memo.get(&nc) {
            return Ok(e.clone());
        }
        let basis = ChargeBasis::new(nc)?;
        let h = build_hamiltonian(&spec, &basis)?;
        let pairs = lowest_eigenpairs(&h, k, opts)?;
        let e: Vec<f64> = pairs.iter().map(|p| p.value).collect();
        energy_memo.insert(nc, e.clone());
        Ok(e)
    };

    let mut steps: Vec<CutoffStep> = Vec::new();
    let mut probe = |nc: u32, steps: &mut Vec<CutoffStep>| -> Result<bool> {
        let lo = solve(nc)?;
        let hi = solve(nc + 2)?;
        let shift = lo
            .iter()
            .zip(hi.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        let accepted = shift < tol_ghz;
        steps.push(CutoffStep {
            nc,
            max_shift_ghz: shift,
            accepted,
        });
        Ok(accepted)
    };

    // Doubling phase.
    let mut lo_fail: Option<u32> = None;
    let mut nc = NC_MIN;
    let mut hi = loop {
        if probe(nc, &mut steps)? {
            break nc;
        }
        lo_fail = Some(nc);
        if nc == NC_SEARCH_MAX {
            let shift = steps.last().map(|s| s.max_shift_ghz).unwrap_or(f64::NAN);
            return Err(Error::CutoffExhausted {
                cap: NC_SEARCH_MAX,
                shift,
            });
        }
        nc = (nc * 2).min(NC_SEARCH_MAX);
    };

    // Bisection back toward the smallest accepted cutoff.
    if let Some(mut lo) = lo_fail {
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if probe(mid, &mut steps)? {
                hi = mid;
            } else {
                lo = mid;
            }
        }
    }

    let energies = solve(hi)?;
    Ok(CutoffCertificate {
        nc: hi,
        k,
        tol_ghz,
        steps,
        energies_ghz: energies,
    })
}
