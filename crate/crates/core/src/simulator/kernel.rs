//! Hamiltonian and gradient contractions.
//!
//! `H(σ) = N^{-(p-1)/2} Σ J_{i_1…i_p} σ_{i_1}⋯σ_{i_p}` over all index tuples.

use crate::error::{Error, Result};
use crate::simulator::disorder::DisorderTensor;
use crate::simulator::spin::{dot, SpinConfiguration};

/// Largest degree for which the symmetrised kernel is built.
const MAX_SYMMETRISED_DEGREE: u32 = 7;

fn scale(n: usize, p: u32) -> f64 {
    (n as f64).powf(-0.5 * (p as f64 - 1.0))
}

/// `out[m] = Σ_i src[m·n + i] σ_i`.
fn contract_last(src: &[f64], sigma: &[f64], out: &mut Vec<f64>) {
    let n = sigma.len();
    out.clear();
    out.extend(src.chunks_exact(n).map(|row| dot(row, sigma)));
}

/// `out[m] = Σ_i σ_i src[i·M + m]` with `M = src.len() / n`.
fn contract_first(src: &[f64], sigma: &[f64], out: &mut Vec<f64>) {
    let m = src.len() / sigma.len();
    out.clear();
    out.resize(m, 0.0);
    for (row, &s) in src.chunks_exact(m).zip(sigma) {
        for (o, &v) in out.iter_mut().zip(row) {
            *o += s * v;
        }
    }
}

/// Contracts the trailing `count` indices of `src`, leaving the result in `a`.
fn contract_trailing(src: &[f64], sigma: &[f64], count: u32, a: &mut Vec<f64>, b: &mut Vec<f64>) {
    if count == 0 {
        a.clear();
        a.extend_from_slice(src);
        return;
    }
    contract_last(src, sigma, a);
    for _ in 1..count {
        contract_last(a, sigma, b);
        std::mem::swap(a, b);
    }
}

fn check_dims(j: &DisorderTensor, sigma: &[f64]) -> Result<()> {
    if sigma.len() != j.n() {
        return Err(Error::DimensionMismatch { expected: j.n(), got: sigma.len() });
    }
    Ok(())
}

/// Reusable scratch space for repeated contractions of one tensor.
#[derive(Debug, Default, Clone)]
pub struct Workspace {
    a: Vec<f64>,
    b: Vec<f64>,
}

impl Workspace {
    pub fn energy(&mut self, j: &DisorderTensor, sigma: &[f64]) -> f64 {
        contract_trailing(j.entries(), sigma, j.p(), &mut self.a, &mut self.b);
        self.a[0] * scale(j.n(), j.p())
    }
}

pub fn hamiltonian(j: &DisorderTensor, sigma: &SpinConfiguration) -> Result<f64> {
    check_dims(j, sigma.coords())?;
    Ok(Workspace::default().energy(j, sigma.coords()))
}

/// Hamiltonian at an arbitrary point of `R^N` (not necessarily on the sphere).
pub fn hamiltonian_at(j: &DisorderTensor, x: &[f64]) -> Result<f64> {
    check_dims(j, x)?;
    Ok(Workspace::default().energy(j, x))
}

/// Euclidean gradient of `H`, summing the contribution of every index slot.
pub fn gradient(j: &DisorderTensor, sigma: &SpinConfiguration) -> Result<Vec<f64>> {
    gradient_at(j, sigma.coords())
}

pub fn gradient_at(j: &DisorderTensor, x: &[f64]) -> Result<Vec<f64>> {
    check_dims(j, x)?;
    let (n, p) = (j.n(), j.p());
    let mut total = vec![0.0; n];
    let (mut a, mut b) = (Vec::new(), Vec::new());
    for slot in 0..p {
        // Leaves indices (i_1, …, i_slot, j) uncontracted.
        contract_trailing(j.entries(), x, p - 1 - slot, &mut a, &mut b);
        for _ in 0..slot {
            contract_first(&a, x, &mut b);
            std::mem::swap(&mut a, &mut b);
        }
        total.iter_mut().zip(&a).for_each(|(t, v)| *t += v);
    }
    let s = scale(n, p);
    total.iter_mut().for_each(|t| *t *= s);
    Ok(total)
}

/// Permutations of `0..p` by Heap's algorithm.
fn permutations(p: usize) -> Vec<Vec<usize>> {
    let mut perm: Vec<usize> = (0..p).collect();
    let mut out = vec![perm.clone()];
    let mut c = vec![0; p];
    let mut i = 0;
    while i < p {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            out.push(perm.clone());
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    out
}

/// The field `H` through its symmetrised, pre-scaled coupling tensor.
///
/// With `S` symmetric, `∇H(σ) = p · S[·, σ, …, σ]` costs one pass over `S`
/// and `H(σ) = σ·∇H(σ)/p`.
#[derive(Debug, Clone)]
pub struct SymmetricKernel {
    n: usize,
    p: u32,
    entries: Vec<f64>,
}

impl SymmetricKernel {
    pub fn new(j: &DisorderTensor) -> Option<Self> {
        let (n, p) = (j.n(), j.p());
        if p > MAX_SYMMETRISED_DEGREE {
            return None;
        }
        let perms = permutations(p as usize);
        let strides: Vec<usize> = (0..p as usize).map(|k| n.pow(p - 1 - k as u32)).collect();
        let weight = scale(n, p) / perms.len() as f64;
        let src = j.entries();
        let mut index = vec![0usize; p as usize];
        let mut entries = Vec::with_capacity(src.len());
        for _ in 0..src.len() {
            let sum: f64 = perms
                .iter()
                .map(|perm| src[perm.iter().zip(&strides).map(|(&k, s)| index[k] * s).sum::<usize>()])
                .sum();
            entries.push(sum * weight);
            for slot in (0..p as usize).rev() {
                index[slot] += 1;
                if index[slot] < n {
                    break;
                }
                index[slot] = 0;
            }
        }
        Some(Self { n, p, entries })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Fills `grad` with `∇H(x)` and returns `H(x)`.
    pub fn energy_gradient(&self, x: &[f64], grad: &mut Vec<f64>, ws: &mut Workspace) -> f64 {
        contract_trailing(&self.entries, x, self.p - 1, &mut ws.a, &mut ws.b);
        grad.clear();
        grad.extend(ws.a.iter().map(|v| v * self.p as f64));
        dot(grad, x) / self.p as f64
    }

    pub fn energy(&self, x: &[f64], ws: &mut Workspace) -> f64 {
        contract_trailing(&self.entries, x, self.p, &mut ws.a, &mut ws.b);
        ws.a[0]
    }
}
