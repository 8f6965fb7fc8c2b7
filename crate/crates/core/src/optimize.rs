//! Maximization of smooth objectives over products of boxes and weighted
//! probability simplices.
//!
//! Each component is mapped from an unconstrained vector `z`:
//!
//! - `Box { lo, hi }`: `x = lo + (hi - lo) σ(z)`, clipped to `[lo + ε, hi - ε]`.
//! - `Simplex { weights }`: `x_i = e^{z_i} / Σ_j w_j e^{z_j}`, so that
//!   `Σ w_i x_i = 1` and every `x_i > 0`.
//!
//! L-BFGS then runs on `z`. Gradients come from the objective when it provides
//! them and from central differences in `z` otherwise. Starting points are a
//! randomly shifted Halton sequence, so a run is a pure function of the seed and
//! start index. Starts are independent; [`merge`] keeps the best value and breaks
//! ties by the lowest start index.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::math::{abs, exp, ln};
use crate::{Error, Result};

pub const BOX_EPSILON: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub enum Component {
    Box { lo: f64, hi: f64 },
    Simplex { weights: Vec<f64> },
}

impl Component {
    pub fn dim(&self) -> usize {
        match self {
            Component::Box { .. } => 1,
            Component::Simplex { weights } => weights.len(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Domain {
    components: Vec<Component>,
}

impl Domain {
    pub fn new(components: Vec<Component>) -> Result<Self> {
        for c in &components {
            match c {
                Component::Box { lo, hi } => {
                    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
                        return Err(Error::Invalid("box bounds must satisfy lo < hi".into()));
                    }
                }
                Component::Simplex { weights } => {
                    if weights.is_empty() || weights.iter().any(|&w| !(w > 0.0) || !w.is_finite()) {
                        return Err(Error::Invalid("simplex weights must be positive".into()));
                    }
                }
            }
        }
        Ok(Domain { components })
    }

    /// `k` unit boxes `[0, 1]`.
    pub fn unit_boxes(k: usize) -> Self {
        Domain { components: vec![Component::Box { lo: 0.0, hi: 1.0 }; k] }
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn dim(&self) -> usize {
        self.components.iter().map(Component::dim).sum()
    }

    pub fn to_point(&self, z: &[f64], x: &mut [f64]) {
        let mut off = 0;
        for c in &self.components {
            match c {
                Component::Box { lo, hi } => {
                    let s = sigmoid(z[off]);
                    x[off] = (lo + (hi - lo) * s).clamp(lo + BOX_EPSILON, hi - BOX_EPSILON);
                    off += 1;
                }
                Component::Simplex { weights } => {
                    let k = weights.len();
                    let zs = &z[off..off + k];
                    let zmax = zs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                    let mut norm = 0.0;
                    for i in 0..k {
                        let e = exp(zs[i] - zmax);
                        x[off + i] = e;
                        norm += weights[i] * e;
                    }
                    for xi in &mut x[off..off + k] {
                        *xi /= norm;
                    }
                    off += k;
                }
            }
        }
    }

    /// Inverse of [`Domain::to_point`] for feasible points with positive
    /// simplex entries (entries are floored at `1e-300`).
    pub fn from_point(&self, x: &[f64]) -> Vec<f64> {
        let mut z = vec![0.0; x.len()];
        let mut off = 0;
        for c in &self.components {
            match c {
                Component::Box { lo, hi } => {
                    let t = ((x[off] - lo) / (hi - lo)).clamp(1e-15, 1.0 - 1e-15);
                    z[off] = ln(t) - ln(1.0 - t);
                    off += 1;
                }
                Component::Simplex { weights } => {
                    for i in 0..weights.len() {
                        z[off + i] = ln(x[off + i].max(1e-300));
                    }
                    off += weights.len();
                }
            }
        }
        z
    }

    /// Chain rule: gradient in `x` to gradient in `z`.
    fn pull_back(&self, x: &[f64], z: &[f64], gx: &[f64], gz: &mut [f64]) {
        let mut off = 0;
        for c in &self.components {
            match c {
                Component::Box { lo, hi } => {
                    let s = sigmoid(z[off]);
                    gz[off] = gx[off] * (hi - lo) * s * (1.0 - s);
                    off += 1;
                }
                Component::Simplex { weights } => {
                    let k = weights.len();
                    let lambda: f64 = (0..k).map(|i| gx[off + i] * x[off + i]).sum();
                    for j in 0..k {
                        gz[off + j] = x[off + j] * (gx[off + j] - weights[j] * lambda);
                    }
                    off += k;
                }
            }
        }
    }

    /// Largest violation of the domain constraints at `x`.
    pub fn violation(&self, x: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        let mut off = 0;
        for c in &self.components {
            match c {
                Component::Box { lo, hi } => {
                    worst = worst.max(lo - x[off]).max(x[off] - hi);
                    off += 1;
                }
                Component::Simplex { weights } => {
                    let k = weights.len();
                    let s: f64 = (0..k).map(|i| weights[i] * x[off + i]).sum();
                    worst = worst.max(abs(s - 1.0));
                    for i in 0..k {
                        worst = worst.max(-x[off + i]);
                    }
                    off += k;
                }
            }
        }
        worst
    }

    /// Gradient projected onto the tangent space of the domain at `x`; box
    /// coordinates sitting on a bound keep only the inward component.
    pub fn project_gradient(&self, x: &[f64], gx: &[f64]) -> Vec<f64> {
        let mut out = gx.to_vec();
        let mut off = 0;
        for c in &self.components {
            match c {
                Component::Box { lo, hi } => {
                    let at_lo = x[off] <= lo + 2.0 * BOX_EPSILON && gx[off] < 0.0;
                    let at_hi = x[off] >= hi - 2.0 * BOX_EPSILON && gx[off] > 0.0;
                    if at_lo || at_hi {
                        out[off] = 0.0;
                    }
                    off += 1;
                }
                Component::Simplex { weights } => {
                    let k = weights.len();
                    let gw: f64 = (0..k).map(|i| gx[off + i] * weights[i]).sum();
                    let ww: f64 = weights.iter().map(|w| w * w).sum();
                    for i in 0..k {
                        out[off + i] -= gw / ww * weights[i];
                    }
                    off += k;
                }
            }
        }
        out
    }
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + exp(-z))
    } else {
        let e = exp(z);
        e / (1.0 + e)
    }
}

/// A function to maximize. `gradient` returns `false` when no analytic
/// gradient is available.
pub trait Objective {
    fn value(&self, x: &[f64]) -> f64;

    fn gradient(&self, _x: &[f64], _g: &mut [f64]) -> bool {
        false
    }
}

impl<F: Fn(&[f64]) -> f64> Objective for F {
    fn value(&self, x: &[f64]) -> f64 {
        self(x)
    }
}

/// Pairs a value closure with an analytic gradient closure.
pub struct WithGradient<F, G> {
    pub value: F,
    pub gradient: G,
}

impl<F, G> Objective for WithGradient<F, G>
where
    F: Fn(&[f64]) -> f64,
    G: Fn(&[f64], &mut [f64]),
{
    fn value(&self, x: &[f64]) -> f64 {
        (self.value)(x)
    }

    fn gradient(&self, x: &[f64], g: &mut [f64]) -> bool {
        (self.gradient)(x, g);
        true
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// L-BFGS, with a Nelder-Mead pass if it stalls short of the gradient tolerance.
    QuasiNewton,
    NelderMead,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    /// Relative change in the objective below which a run is considered stalled.
    pub ftol: f64,
    /// Convergence threshold on the reparameterized gradient (max norm).
    pub gtol: f64,
    pub max_iter: usize,
    pub seed: u64,
    pub starts: usize,
    pub method: Method,
    pub memory: usize,
}

impl Default for Settings {
    fn default() -> Self {
        Settings {
            ftol: 1e-10,
            gtol: 1e-7,
            max_iter: 5000,
            seed: 0,
            starts: 16,
            method: Method::QuasiNewton,
            memory: 12,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StartResult {
    pub start: usize,
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
    pub gradient_norm: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizationResult {
    pub argmax: Vec<f64>,
    pub value: f64,
    /// Iterations used by the winning start.
    pub iterations: usize,
    pub total_iterations: usize,
    pub starts_used: usize,
    pub best_start: usize,
    pub converged: bool,
    /// Max norm of the gradient in the unconstrained coordinates at the argmax.
    pub gradient_norm_at_solution: f64,
}

/// Combines per-start results: best value wins, ties go to the lowest start.
pub fn merge(mut results: Vec<StartResult>) -> Result<OptimizationResult> {
    if results.is_empty() {
        return Err(Error::Invalid("no optimization starts".into()));
    }
    results.sort_by_key(|r| r.start);
    let total_iterations = results.iter().map(|r| r.iterations).sum();
    let starts_used = results.len();
    let mut best = 0;
    for (i, r) in results.iter().enumerate() {
        if r.value > results[best].value {
            best = i;
        }
    }
    let b = results.swap_remove(best);
    Ok(OptimizationResult {
        argmax: b.x,
        value: b.value,
        iterations: b.iterations,
        total_iterations,
        starts_used,
        best_start: b.start,
        converged: b.converged,
        gradient_norm_at_solution: b.gradient_norm,
    })
}

/// Multistart maximization; runs `settings.starts` starts sequentially.
pub fn maximize<O: Objective + ?Sized>(
    objective: &O,
    domain: &Domain,
    settings: &Settings,
) -> Result<OptimizationResult> {
    let runs = (0..settings.starts.max(1))
        .map(|i| run_start(objective, domain, settings, i))
        .collect::<Result<Vec<_>>>()?;
    merge(runs)
}

/// Single run from a feasible starting point.
pub fn maximize_from<O: Objective + ?Sized>(
    objective: &O,
    domain: &Domain,
    settings: &Settings,
    x0: &[f64],
) -> Result<OptimizationResult> {
    if x0.len() != domain.dim() {
        return Err(Error::Arity { expected: domain.dim(), got: x0.len() });
    }
    let z0 = domain.from_point(x0);
    merge(vec![run_from(objective, domain, settings, 0, z0)?])
}

/// One start of the multistart; the starting point depends only on
/// `(settings.seed, start)`.
pub fn run_start<O: Objective + ?Sized>(
    objective: &O,
    domain: &Domain,
    settings: &Settings,
    start: usize,
) -> Result<StartResult> {
    let z0 = start_point(domain, settings.seed, start);
    run_from(objective, domain, settings, start, z0)
}

fn run_from<O: Objective + ?Sized>(
    objective: &O,
    domain: &Domain,
    settings: &Settings,
    start: usize,
    z0: Vec<f64>,
) -> Result<StartResult> {
    let mut problem = Problem::new(objective, domain);
    let (z, iterations) = match settings.method {
        Method::QuasiNewton => {
            let (z, mut it, ok) = lbfgs(&mut problem, z0, settings)?;
            if ok {
                (z, it)
            } else {
                let (z, it2) = nelder_mead(&mut problem, z, settings)?;
                let (z, it3, _) = lbfgs(&mut problem, z, settings)?;
                it += it2 + it3;
                (z, it)
            }
        }
        Method::NelderMead => nelder_mead(&mut problem, z0, settings)?,
    };
    let (f, g) = problem.eval_with_gradient(&z)?;
    let gradient_norm = inf_norm(&g);
    let mut x = vec![0.0; z.len()];
    domain.to_point(&z, &mut x);
    Ok(StartResult {
        start,
        x,
        value: -f,
        iterations,
        converged: gradient_norm <= settings.gtol,
        gradient_norm,
    })
}

/// Max-norm of the domain-projected gradient of `objective` at `x`, using the
/// analytic gradient when available and central differences with step `h`
/// otherwise.
pub fn projected_gradient_norm<O: Objective + ?Sized>(
    objective: &O,
    domain: &Domain,
    x: &[f64],
    h: f64,
) -> f64 {
    let mut g = vec![0.0; x.len()];
    if !objective.gradient(x, &mut g) {
        g = central_difference(objective, x, h);
    }
    inf_norm(&domain.project_gradient(x, &g))
}

/// Compares an objective's analytic gradient against central differences with
/// step `h`; returns the largest relative error (0 when both vanish).
pub fn finite_difference_gradient_check<O: Objective + ?Sized>(
    objective: &O,
    point: &[f64],
    h: f64,
) -> Result<f64> {
    let mut g = vec![0.0; point.len()];
    if !objective.gradient(point, &mut g) {
        return Err(Error::Invalid("objective has no analytic gradient".into()));
    }
    let fd = central_difference(objective, point, h);
    Ok(g.iter()
        .zip(&fd)
        .map(|(&a, &b)| {
            let scale = abs(a).max(abs(b));
            if scale < 1e-300 {
                0.0
            } else {
                abs(a - b) / scale
            }
        })
        .fold(0.0, f64::max))
}

pub fn central_difference<O: Objective + ?Sized>(objective: &O, x: &[f64], h: f64) -> Vec<f64> {
    let mut probe = x.to_vec();
    (0..x.len())
        .map(|i| {
            probe[i] = x[i] + h;
            let up = objective.value(&probe);
            probe[i] = x[i] - h;
            let down = objective.value(&probe);
            probe[i] = x[i];
            (up - down) / (2.0 * h)
        })
        .collect()
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, &a| m.max(abs(a)))
}

/// The minimization problem `F(z) = -f(x(z))`.
struct Problem<'a, O: ?Sized> {
    objective: &'a O,
    domain: &'a Domain,
    x: Vec<f64>,
    gx: Vec<f64>,
}

impl<'a, O: Objective + ?Sized> Problem<'a, O> {
    fn new(objective: &'a O, domain: &'a Domain) -> Self {
        let d = domain.dim();
        Problem { objective, domain, x: vec![0.0; d], gx: vec![0.0; d] }
    }

    fn eval(&mut self, z: &[f64]) -> Result<f64> {
        self.domain.to_point(z, &mut self.x);
        let f = self.objective.value(&self.x);
        if !f.is_finite() {
            return Err(Error::NonFinite { point: self.x.clone() });
        }
        Ok(-f)
    }

    fn eval_with_gradient(&mut self, z: &[f64]) -> Result<(f64, Vec<f64>)> {
        let f = self.eval(z)?;
        let mut gz = vec![0.0; z.len()];
        if self.objective.gradient(&self.x, &mut self.gx) {
            if self.gx.iter().any(|g| !g.is_finite()) {
                return Err(Error::NonFinite { point: self.x.clone() });
            }
            self.domain.pull_back(&self.x, z, &self.gx, &mut gz);
            for g in &mut gz {
                *g = -*g;
            }
        } else {
            let mut probe = z.to_vec();
            for i in 0..z.len() {
                let h = 1e-5 * z[i].abs().max(1.0);
                probe[i] = z[i] + h;
                let up = self.eval(&probe)?;
                probe[i] = z[i] - h;
                let down = self.eval(&probe)?;
                probe[i] = z[i];
                gz[i] = (up - down) / (2.0 * h);
            }
        }
        Ok((f, gz))
    }
}

fn lbfgs<O: Objective + ?Sized>(
    problem: &mut Problem<'_, O>,
    mut z: Vec<f64>,
    settings: &Settings,
) -> Result<(Vec<f64>, usize, bool)> {
    let n = z.len();
    let (mut f, mut g) = problem.eval_with_gradient(&z)?;
    let mut history: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::new();
    let mut stalled = 0;
    let mut iter = 0;
    while iter < settings.max_iter {
        if inf_norm(&g) <= settings.gtol {
            return Ok((z, iter, true));
        }
        iter += 1;
        let mut d = two_loop(&g, &history);
        let mut slope = dot(&d, &g);
        if !(slope < 0.0) {
            history.clear();
            d = g.iter().map(|v| -v).collect();
            slope = dot(&d, &g);
        }
        let mut step = if history.is_empty() { 1.0 / inf_norm(&g).max(1.0) } else { 1.0 };
        let mut accepted = None;
        for _ in 0..60 {
            let trial: Vec<f64> = (0..n).map(|i| z[i] + step * d[i]).collect();
            let ft = problem.eval(&trial)?;
            if ft <= f + 1e-4 * step * slope {
                accepted = Some(trial);
                break;
            }
            step *= 0.5;
        }
        let Some(z_new) = accepted else {
            if history.is_empty() {
                return Ok((z, iter, false));
            }
            history.clear();
            continue;
        };
        let (f_new, g_new) = problem.eval_with_gradient(&z_new)?;
        let s: Vec<f64> = (0..n).map(|i| z_new[i] - z[i]).collect();
        let y: Vec<f64> = (0..n).map(|i| g_new[i] - g[i]).collect();
        let sy = dot(&s, &y);
        if sy > 1e-16 * dot(&s, &s).clamp(1e-300, 1.0) && sy > 0.0 {
            if history.len() == settings.memory {
                history.pop_front();
            }
            history.push_back((s, y, 1.0 / sy));
        }
        let change = abs(f - f_new);
        if change <= settings.ftol * abs(f_new).max(1.0) {
            stalled += 1;
        } else {
            stalled = 0;
        }
        z = z_new;
        f = f_new;
        g = g_new;
        if stalled >= 5 {
            break;
        }
    }
    let ok = inf_norm(&g) <= settings.gtol;
    Ok((z, iter, ok))
}

fn two_loop(g: &[f64], history: &VecDeque<(Vec<f64>, Vec<f64>, f64)>) -> Vec<f64> {
    let mut q: Vec<f64> = g.to_vec();
    let mut alphas = Vec::with_capacity(history.len());
    for (s, y, rho) in history.iter().rev() {
        let a = rho * dot(s, &q);
        for (qi, yi) in q.iter_mut().zip(y) {
            *qi -= a * yi;
        }
        alphas.push(a);
    }
    if let Some((s, y, _)) = history.back() {
        let gamma = dot(s, y) / dot(y, y);
        for qi in &mut q {
            *qi *= gamma;
        }
    }
    for ((s, y, rho), a) in history.iter().zip(alphas.into_iter().rev()) {
        let b = rho * dot(y, &q);
        for (qi, si) in q.iter_mut().zip(s) {
            *qi += (a - b) * si;
        }
    }
    q.iter().map(|v| -v).collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn nelder_mead<O: Objective + ?Sized>(
    problem: &mut Problem<'_, O>,
    z0: Vec<f64>,
    settings: &Settings,
) -> Result<(Vec<f64>, usize)> {
    let n = z0.len();
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    let f0 = problem.eval(&z0)?;
    simplex.push((z0.clone(), f0));
    for i in 0..n {
        let mut v = z0.clone();
        v[i] += 0.5;
        let f = problem.eval(&v)?;
        simplex.push((v, f));
    }
    let budget = settings.max_iter.max(200 * n);
    let mut iter = 0;
    while iter < budget {
        iter += 1;
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let spread = simplex[n].1 - simplex[0].1;
        if spread <= settings.ftol * abs(simplex[0].1).max(1.0) {
            break;
        }
        let mut centroid = vec![0.0; n];
        for (v, _) in &simplex[..n] {
            for i in 0..n {
                centroid[i] += v[i] / n as f64;
            }
        }
        let along = |t: f64| -> Vec<f64> {
            (0..n).map(|i| centroid[i] + t * (simplex[n].0[i] - centroid[i])).collect()
        };
        let reflected = along(-1.0);
        let fr = problem.eval(&reflected)?;
        if fr < simplex[0].1 {
            let expanded = along(-2.0);
            let fe = problem.eval(&expanded)?;
            simplex[n] = if fe < fr { (expanded, fe) } else { (reflected, fr) };
        } else if fr < simplex[n - 1].1 {
            simplex[n] = (reflected, fr);
        } else {
            let contracted = if fr < simplex[n].1 { along(-0.5) } else { along(0.5) };
            let fc = problem.eval(&contracted)?;
            if fc < simplex[n].1.min(fr) {
                simplex[n] = (contracted, fc);
            } else {
                let best = simplex[0].0.clone();
                for (v, f) in simplex.iter_mut().skip(1) {
                    for i in 0..n {
                        v[i] = best[i] + 0.5 * (v[i] - best[i]);
                    }
                    *f = problem.eval(v)?;
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    Ok((simplex.swap_remove(0).0, iter))
}

/// Starting point `start` in unconstrained coordinates: a Halton point shifted
/// by a seeded uniform vector, mapped uniformly onto each component (Dirichlet(1)
/// in mass coordinates for simplices).
pub fn start_point(domain: &Domain, seed: u64, start: usize) -> Vec<f64> {
    let d = domain.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let primes = first_primes(d);
    let u: Vec<f64> = (0..d)
        .map(|i| {
            let shift: f64 = rng.random();
            let v = radical_inverse(start as u64 + 1, primes[i]) + shift;
            (v - libm::floor(v)).clamp(1e-9, 1.0 - 1e-9)
        })
        .collect();
    let mut z = vec![0.0; d];
    let mut off = 0;
    for c in domain.components() {
        match c {
            Component::Box { .. } => {
                z[off] = ln(u[off]) - ln(1.0 - u[off]);
                off += 1;
            }
            Component::Simplex { weights } => {
                for (i, w) in weights.iter().enumerate() {
                    z[off + i] = ln(-ln(u[off + i])) - ln(*w);
                }
                off += weights.len();
            }
        }
    }
    z
}

fn radical_inverse(mut index: u64, base: u64) -> f64 {
    let mut result = 0.0;
    let mut f = 1.0 / base as f64;
    while index > 0 {
        result += f * (index % base) as f64;
        index /= base;
        f /= base as f64;
    }
    result
}

fn first_primes(count: usize) -> Vec<u64> {
    let mut primes: Vec<u64> = Vec::with_capacity(count);
    let mut candidate = 2u64;
    while primes.len() < count {
        if primes.iter().take_while(|&&p| p * p <= candidate).all(|&p| !candidate.is_multiple_of(p)) {
            primes.push(candidate);
        }
        candidate += 1;
    }
    primes
}
