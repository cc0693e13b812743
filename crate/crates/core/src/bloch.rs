//! Witness bounds over product states of a separability class.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::OnceLock;

use nalgebra::Matrix4;
use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::pauli::{
    string_matrix, CMat, CharTensor, DensityMatrix, Partition, PauliAction, PauliString, SeparabilityClass, C64,
};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BlochVector {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl BlochVector {
    /// Normalizes the input; a zero vector maps to +z.
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        let r = (x * x + y * y + z * z).sqrt();
        if r < 1e-300 {
            return BlochVector { x: 0.0, y: 0.0, z: 1.0 };
        }
        BlochVector { x: x / r, y: y / r, z: z / r }
    }

    pub fn from_angles(theta: f64, phi: f64) -> Self {
        BlochVector { x: theta.sin() * phi.cos(), y: theta.sin() * phi.sin(), z: theta.cos() }
    }

    pub fn expectations(&self) -> [f64; 4] {
        [1.0, self.x, self.y, self.z]
    }

    /// A pure-state vector with this Bloch vector.
    pub fn amplitudes(&self) -> [C64; 2] {
        let half = 0.5 * self.z.clamp(-1.0, 1.0).acos();
        [C64::new(half.cos(), 0.0), C64::from_polar(half.sin(), self.y.atan2(self.x))]
    }

    pub fn density(&self) -> DensityMatrix {
        let h = C64::new(0.5, 0.0);
        let m = CMat::from_row_slice(
            2,
            2,
            &[
                h * (1.0 + self.z),
                C64::new(self.x, -self.y) * 0.5,
                C64::new(self.x, self.y) * 0.5,
                h * (1.0 - self.z),
            ],
        );
        DensityMatrix::new(m).expect("2x2")
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TwoQubitPure {
    amps: [C64; 4],
}

fn pair_actions() -> &'static [PauliAction; 16] {
    static A: OnceLock<[PauliAction; 16]> = OnceLock::new();
    A.get_or_init(|| std::array::from_fn(|j| PauliAction::from_codes([j >> 2, j & 3].into_iter())))
}

fn pair_matrices() -> &'static [Matrix4<C64>; 16] {
    static M: OnceLock<[Matrix4<C64>; 16]> = OnceLock::new();
    M.get_or_init(|| {
        std::array::from_fn(|j| {
            let s = PauliString::from_index(j, 2);
            let m = string_matrix(&s);
            Matrix4::from_fn(|r, c| m[(r, c)])
        })
    })
}

impl TwoQubitPure {
    pub fn new(amps: [C64; 4]) -> Self {
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        let amps = if norm < 1e-300 {
            [C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0)]
        } else {
            amps.map(|a| a / norm)
        };
        TwoQubitPure { amps }
    }

    pub fn amplitudes(&self) -> [C64; 4] {
        self.amps
    }

    /// T[4a+b] = ⟨ψ|σ_a⊗σ_b|ψ⟩.
    pub fn correlations(&self) -> [f64; 16] {
        let acts = pair_actions();
        std::array::from_fn(|j| acts[j].expectation(&self.amps))
    }

    pub fn density(&self) -> DensityMatrix {
        DensityMatrix::from_pure(&self.amps).expect("dimension 4")
    }
}

/// Largest eigenpair of Σ_j c_j σ_{j>>2}⊗σ_{j&3}.
pub fn pair_operator(c: &[f64; 16]) -> Matrix4<C64> {
    let mats = pair_matrices();
    let mut m = Matrix4::<C64>::zeros();
    for (j, &v) in c.iter().enumerate() {
        if v != 0.0 {
            m += mats[j] * C64::new(v, 0.0);
        }
    }
    m
}

pub fn pair_max(c: &[f64; 16]) -> (f64, TwoQubitPure) {
    let eig = pair_operator(c).symmetric_eigen();
    let mut k = 0;
    for j in 1..4 {
        if eig.eigenvalues[j] > eig.eigenvalues[k] {
            k = j;
        }
    }
    let v = eig.eigenvectors.column(k);
    (eig.eigenvalues[k], TwoQubitPure::new([v[0], v[1], v[2], v[3]]))
}

pub fn pair_max_value(c: &[f64; 16]) -> f64 {
    pair_operator(c).symmetric_eigenvalues().max()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum BlockFactor {
    Single(BlochVector),
    Pair(TwoQubitPure),
}

impl BlockFactor {
    fn expectations(&self) -> Vec<f64> {
        match self {
            BlockFactor::Single(b) => b.expectations().to_vec(),
            BlockFactor::Pair(p) => p.correlations().to_vec(),
        }
    }

    pub fn density(&self) -> DensityMatrix {
        match self {
            BlockFactor::Single(b) => b.density(),
            BlockFactor::Pair(p) => p.density(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProductAssignment {
    pub partition: Partition,
    pub factors: Vec<BlockFactor>,
}

impl ProductAssignment {
    pub fn new(partition: Partition, factors: Vec<BlockFactor>) -> Result<Self> {
        if factors.len() != partition.len() {
            return Err(Error::PartitionShape("one factor per block required".into()));
        }
        for (b, f) in partition.blocks().iter().zip(&factors) {
            match (b.len(), f) {
                (1, BlockFactor::Single(_)) | (2, BlockFactor::Pair(_)) => {}
                (k, _) if k > 2 => return Err(Error::Arity(k)),
                _ => return Err(Error::PartitionShape("factor arity does not match block".into())),
            }
        }
        Ok(ProductAssignment { partition, factors })
    }
}

impl fmt::Display for ProductAssignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} [", self.partition)?;
        for (i, (b, fac)) in self.partition.blocks().iter().zip(&self.factors).enumerate() {
            if i > 0 {
                write!(f, "; ")?;
            }
            let label: String = b.iter().map(|q| q.to_string()).collect();
            match fac {
                BlockFactor::Single(v) => write!(f, "{label}: ({:.6}, {:.6}, {:.6})", v.x, v.y, v.z)?,
                BlockFactor::Pair(p) => {
                    write!(f, "{label}: (")?;
                    for (k, a) in p.amplitudes().iter().enumerate() {
                        if k > 0 {
                            write!(f, ", ")?;
                        }
                        write!(f, "{:.6}{:+.6}i", a.re, a.im)?;
                    }
                    write!(f, ")")?;
                }
            }
        }
        write!(f, "]")
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct WitnessSpec {
    n: usize,
    terms: BTreeMap<PauliString, f64>,
    pub constant: Option<f64>,
}

impl WitnessSpec {
    pub fn new(n: usize, terms: Vec<(PauliString, f64)>, constant: Option<f64>) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (s, v) in terms {
            if s.n() != n {
                return Err(Error::DimensionMismatch(format!("{s} on {n} qubits")));
            }
            if s.is_identity() {
                return Err(Error::Input("identity string belongs in the constant slot".into()));
            }
            if !v.is_finite() {
                return Err(Error::Input(format!("coefficient of {s} is not finite")));
            }
            *map.entry(s).or_insert(0.0) += v;
        }
        Ok(WitnessSpec { n, terms: map, constant })
    }

    /// Terms given as `("XZII", coeff)`.
    pub fn from_strs(n: usize, terms: &[(&str, f64)]) -> Result<Self> {
        let t = terms.iter().map(|(s, v)| Ok((PauliString::parse(s)?, *v))).collect::<Result<Vec<_>>>()?;
        WitnessSpec::new(n, t, None)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> impl Iterator<Item = (&PauliString, f64)> {
        self.terms.iter().map(|(s, &v)| (s, v))
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn get(&self, s: &PauliString) -> f64 {
        self.terms.get(s).copied().unwrap_or(0.0)
    }

    pub fn inner(&self, r: &CharTensor) -> f64 {
        self.terms().map(|(s, v)| v * r.get(s)).sum()
    }

    pub fn scaled(&self, c: f64) -> WitnessSpec {
        WitnessSpec {
            n: self.n,
            terms: self.terms.iter().map(|(s, v)| (s.clone(), v * c)).collect(),
            constant: self.constant.map(|k| k * c),
        }
    }

    pub fn permuted(&self, perm: &[usize]) -> WitnessSpec {
        WitnessSpec {
            n: self.n,
            terms: self.terms.iter().map(|(s, v)| (s.permuted(perm), *v)).collect(),
            constant: self.constant,
        }
    }
}

/// A witness restricted to one partition: per term, the local Pauli index on
/// each block (0..4 for a singleton, 0..16 for a pair).
#[derive(Clone, Debug)]
struct Compiled {
    sizes: Vec<usize>,
    coeffs: Vec<f64>,
    locals: Vec<Vec<usize>>,
}

impl Compiled {
    fn new(m: &WitnessSpec, p: &Partition) -> Result<Self> {
        if m.n() != p.n() {
            return Err(Error::DimensionMismatch(format!("witness on {} qubits, partition on {}", m.n(), p.n())));
        }
        if p.max_block() > 2 {
            return Err(Error::Arity(p.max_block()));
        }
        let sizes = p.blocks().iter().map(|b| b.len()).collect();
        let mut coeffs = Vec::new();
        let mut locals = Vec::new();
        for (s, v) in m.terms() {
            if v == 0.0 {
                continue;
            }
            coeffs.push(v);
            locals.push(p.blocks().iter().map(|b| b.iter().fold(0, |acc, &q| acc * 4 + s.get(q).code())).collect());
        }
        Ok(Compiled { sizes, coeffs, locals })
    }

    fn value(&self, e: &[Vec<f64>]) -> f64 {
        self.coeffs
            .iter()
            .zip(&self.locals)
            .map(|(c, loc)| c * loc.iter().enumerate().map(|(b, &j)| e[b][j]).product::<f64>())
            .sum()
    }

    /// Linear coefficients of the form in block `b` given the other blocks.
    fn block_coeffs(&self, e: &[Vec<f64>], b: usize, out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
        for (c, loc) in self.coeffs.iter().zip(&self.locals) {
            let mut w = *c;
            for (k, &j) in loc.iter().enumerate() {
                if k != b {
                    w *= e[k][j];
                }
            }
            out[loc[b]] += w;
        }
    }
}

pub fn product_expectation(m: &WitnessSpec, a: &ProductAssignment) -> Result<f64> {
    let c = Compiled::new(m, &a.partition)?;
    let e: Vec<Vec<f64>> = a.factors.iter().map(|f| f.expectations()).collect();
    Ok(c.value(&e))
}

#[derive(Clone, Debug, PartialEq)]
pub struct OptimizerOptions {
    pub starts: usize,
    pub tol: f64,
    pub max_sweeps: usize,
    pub seed: u64,
}

impl Default for OptimizerOptions {
    fn default() -> Self {
        OptimizerOptions { starts: 32, tol: 1e-10, max_sweeps: 500, seed: 0 }
    }
}

#[derive(Clone, Debug)]
pub struct BoundResult {
    pub bound: f64,
    pub argmax: ProductAssignment,
    pub per_partition: Vec<(Partition, f64)>,
    pub per_partition_argmax: Vec<ProductAssignment>,
    pub starts_used: usize,
    pub converged: bool,
}

impl BoundResult {
    /// The witness constant M_{0...0}.
    pub fn constant(&self) -> f64 {
        -self.bound
    }
}

const AXES: [[f64; 3]; 6] =
    [[0.0, 0.0, 1.0], [0.0, 0.0, -1.0], [1.0, 0.0, 0.0], [-1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, -1.0, 0.0]];

fn start_factors(sizes: &[usize], k: usize, rng: &mut ChaCha8Rng) -> Vec<BlockFactor> {
    let mut single = 0;
    sizes
        .iter()
        .map(|&s| {
            if s == 1 {
                let i = single;
                single += 1;
                let v = if k < 6 {
                    AXES[k]
                } else if k == 6 {
                    AXES[(2 * i) % 6]
                } else if k == 7 {
                    AXES[(2 * i + 2) % 6]
                } else {
                    [rng.sample(StandardNormal), rng.sample(StandardNormal), rng.sample(StandardNormal)]
                };
                BlockFactor::Single(BlochVector::new(v[0], v[1], v[2]))
            } else {
                let amps = if k < 8 {
                    let mut a = [C64::new(0.0, 0.0); 4];
                    a[k % 4] = C64::new(1.0, 0.0);
                    a
                } else {
                    std::array::from_fn(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
                };
                BlockFactor::Pair(TwoQubitPure::new(amps))
            }
        })
        .collect()
}

struct Ascent {
    value: f64,
    factors: Vec<BlockFactor>,
    converged: bool,
}

fn ascend(c: &Compiled, mut factors: Vec<BlockFactor>, opts: &OptimizerOptions) -> Ascent {
    let nb = c.sizes.len();
    let mut e: Vec<Vec<f64>> = factors.iter().map(|f| f.expectations()).collect();
    // pairs first, then singletons
    let order: Vec<usize> = (0..nb).filter(|&b| c.sizes[b] == 2).chain((0..nb).filter(|&b| c.sizes[b] == 1)).collect();
    let mut prev = c.value(&e);
    let mut buf = [0.0f64; 16];
    let mut converged = false;
    for _ in 0..opts.max_sweeps {
        for &b in &order {
            if c.sizes[b] == 1 {
                c.block_coeffs(&e, b, &mut buf[..4]);
                let r = (buf[1] * buf[1] + buf[2] * buf[2] + buf[3] * buf[3]).sqrt();
                if r > 1e-300 {
                    let v = BlochVector { x: buf[1] / r, y: buf[2] / r, z: buf[3] / r };
                    factors[b] = BlockFactor::Single(v);
                    e[b].copy_from_slice(&v.expectations());
                }
            } else {
                c.block_coeffs(&e, b, &mut buf);
                let (_, psi) = pair_max(&buf);
                factors[b] = BlockFactor::Pair(psi);
                e[b].copy_from_slice(&psi.correlations());
            }
        }
        let value = c.value(&e);
        if (value - prev).abs() < opts.tol {
            converged = true;
            break;
        }
        prev = value;
    }
    Ascent { value: c.value(&e), factors, converged }
}

fn maximize_partition(
    c: &Compiled,
    p: &Partition,
    opts: &OptimizerOptions,
    extra: Vec<Vec<BlockFactor>>,
) -> (f64, ProductAssignment, bool, usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ partition_salt(p).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    let mut best: Option<Ascent> = None;
    let mut all_converged = true;
    let mut used = 0;
    let mut try_start = |factors: Vec<BlockFactor>, best: &mut Option<Ascent>| {
        let a = ascend(c, factors, opts);
        all_converged &= a.converged;
        if best.as_ref().is_none_or(|b| a.value > b.value) {
            *best = Some(a);
        }
    };
    for f in extra {
        try_start(f, &mut best);
        used += 1;
    }
    for k in 0..opts.starts {
        let f = start_factors(&c.sizes, k, &mut rng);
        try_start(f, &mut best);
        used += 1;
    }
    let best = best.unwrap_or_else(|| ascend(c, start_factors(&c.sizes, 0, &mut rng), opts));
    (best.value, ProductAssignment { partition: p.clone(), factors: best.factors }, all_converged, used)
}

/// Seed salt from the partition label, so a partition gets the same starts in
/// every class (FNV-1a).
fn partition_salt(p: &Partition) -> u64 {
    p.to_string().bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| (h ^ b as u64).wrapping_mul(0x0100_0000_01b3))
}

/// The full-split assignment `fine` read as factors of the coarser `p`.
fn lift_full_split(fine: &ProductAssignment, p: &Partition) -> Vec<BlockFactor> {
    let bloch = |q: usize| match fine.factors[q - 1] {
        BlockFactor::Single(b) => b,
        BlockFactor::Pair(_) => unreachable!("full split has no pairs"),
    };
    p.blocks()
        .iter()
        .map(|b| match b.as_slice() {
            [q] => BlockFactor::Single(bloch(*q)),
            [q, r] => {
                let (u, v) = (bloch(*q).amplitudes(), bloch(*r).amplitudes());
                BlockFactor::Pair(TwoQubitPure::new([u[0] * v[0], u[0] * v[1], u[1] * v[0], u[1] * v[1]]))
            }
            _ => unreachable!("blocks are checked on compilation"),
        })
        .collect()
}

/// Alternating ascent from a given assignment.
pub fn refine_assignment(m: &WitnessSpec, a: &ProductAssignment, opts: &OptimizerOptions) -> Result<(f64, ProductAssignment, bool)> {
    let c = Compiled::new(m, &a.partition)?;
    let r = ascend(&c, a.factors.clone(), opts);
    Ok((r.value, ProductAssignment { partition: a.partition.clone(), factors: r.factors }, r.converged))
}

pub fn max_over_class(m: &WitnessSpec, class: &SeparabilityClass, opts: &OptimizerOptions) -> Result<BoundResult> {
    max_over_class_warm(m, class, opts, None)
}

/// As `max_over_class`, with an extra start per partition taken from a
/// previous result.
pub fn max_over_class_warm(
    m: &WitnessSpec,
    class: &SeparabilityClass,
    opts: &OptimizerOptions,
    warm: Option<&BoundResult>,
) -> Result<BoundResult> {
    let compiled = class.partitions().iter().map(|p| Compiled::new(m, p)).collect::<Result<Vec<_>>>()?;
    let mut per_partition = Vec::new();
    let mut per_partition_argmax = Vec::new();
    let mut converged = true;
    let mut starts_used = 0;
    // product states of the full split are states of every partition, so its
    // maximizer seeds the coarser ones
    let full = Partition::full_split(m.n());
    let fine = if class.partitions().iter().any(|p| p.max_block() > 1) {
        let warm_full = warm.and_then(|w| w.per_partition_argmax.iter().find(|a| a.partition == full)).map(|a| a.factors.clone());
        let (_, a, conv, used) = maximize_partition(&Compiled::new(m, &full)?, &full, opts, warm_full.into_iter().collect());
        converged &= conv;
        starts_used += used;
        Some(a)
    } else {
        None
    };
    let mut best: Option<(f64, ProductAssignment)> = None;
    for (c, p) in compiled.iter().zip(class.partitions()) {
        let mut extra: Vec<Vec<BlockFactor>> = Vec::new();
        if let Some(w) = warm.and_then(|w| w.per_partition_argmax.iter().find(|a| &a.partition == p)) {
            extra.push(w.factors.clone());
        }
        if let Some(f) = fine.as_ref().filter(|_| p.max_block() > 1) {
            extra.push(lift_full_split(f, p));
        }
        let (v, a, conv, used) = maximize_partition(c, p, opts, extra);
        converged &= conv;
        starts_used += used;
        per_partition.push((p.clone(), v));
        per_partition_argmax.push(a.clone());
        if best.as_ref().is_none_or(|(bv, _)| v > *bv) {
            best = Some((v, a));
        }
    }
    let (bound, argmax) = best.expect("class is nonempty");
    Ok(BoundResult { bound, argmax, per_partition, per_partition_argmax, starts_used, converged })
}

/// Sphere grid with spacing 2π/resolution in both angles; poles appear once.
pub fn sphere_grid(resolution: usize) -> Vec<BlochVector> {
    let nphi = resolution;
    let ntheta = resolution / 2;
    let mut pts = vec![BlochVector::from_angles(0.0, 0.0)];
    for i in 1..ntheta {
        let th = std::f64::consts::PI * i as f64 / ntheta as f64;
        for j in 0..nphi {
            pts.push(BlochVector::from_angles(th, 2.0 * std::f64::consts::PI * j as f64 / nphi as f64));
        }
    }
    pts.push(BlochVector::from_angles(std::f64::consts::PI, 0.0));
    pts
}

/// Brute-force lower bound on the maximum over one partition. Every
/// singleton is gridded except one block that is solved exactly: the pair
/// block when there is one, otherwise the last singleton.
pub fn grid_oracle(m: &WitnessSpec, p: &Partition, resolution: usize) -> Result<f64> {
    if resolution < 8 {
        return Err(Error::Range(format!("resolution {resolution} < 8")));
    }
    let c = Compiled::new(m, p)?;
    let pairs: Vec<usize> = (0..c.sizes.len()).filter(|&b| c.sizes[b] == 2).collect();
    if pairs.len() > 1 {
        return Err(Error::PartitionShape("grid oracle supports at most one pair block".into()));
    }
    let exact = pairs.first().copied().unwrap_or(c.sizes.len() - 1);
    let gridded: Vec<usize> = (0..c.sizes.len()).filter(|&b| b != exact).collect();
    let grid = sphere_grid(resolution);
    let mut e: Vec<Vec<f64>> = c.sizes.iter().map(|&s| if s == 1 { vec![1.0, 0.0, 0.0, 1.0] } else { vec![0.0; 16] }).collect();
    let mut idx = vec![0usize; gridded.len()];
    let mut best = f64::NEG_INFINITY;
    let mut buf = [0.0f64; 16];
    loop {
        for (g, &b) in gridded.iter().enumerate() {
            e[b].copy_from_slice(&grid[idx[g]].expectations());
        }
        let v = if c.sizes[exact] == 2 {
            c.block_coeffs(&e, exact, &mut buf);
            pair_max_value(&buf)
        } else {
            c.block_coeffs(&e, exact, &mut buf[..4]);
            buf[0] + (buf[1] * buf[1] + buf[2] * buf[2] + buf[3] * buf[3]).sqrt()
        };
        best = best.max(v);
        let mut k = 0;
        loop {
            if k == idx.len() {
                return Ok(best);
            }
            idx[k] += 1;
            if idx[k] < grid.len() {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

pub fn noise_threshold(m: &WitnessSpec, pure: &CharTensor, class: &SeparabilityClass, opts: &OptimizerOptions) -> Result<f64> {
    let inner = m.inner(pure);
    if inner <= 0.0 {
        return Err(Error::NonPositiveInner(inner));
    }
    Ok(max_over_class(m, class, opts)?.bound / inner)
}

/// Exact p* = bound/inner once both are confirmed integral: the inner
/// product within 1e-9 and the numeric bound within 1e-6.
pub fn rational_threshold(bound: f64, inner: f64) -> Result<Ratio<i64>> {
    let (b, i) = (bound.round(), inner.round());
    if (inner - i).abs() > 1e-9 || (bound - b).abs() > 1e-6 {
        return Err(Error::Precondition(format!("bound {bound} or inner {inner} is not integral")));
    }
    if i <= 0.0 {
        return Err(Error::NonPositiveInner(inner));
    }
    Ok(Ratio::new(b as i64, i as i64))
}

#[derive(Clone, Debug, PartialEq)]
pub struct SearchOptions {
    pub restarts: usize,
    /// Optimizer used while searching; the winner is re-bounded with `final_optimizer`.
    pub optimizer: OptimizerOptions,
    pub final_optimizer: OptimizerOptions,
    pub line_tol: f64,
    pub max_passes: usize,
    pub seed: u64,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            restarts: 16,
            optimizer: OptimizerOptions { starts: 8, ..OptimizerOptions::default() },
            final_optimizer: OptimizerOptions::default(),
            line_tol: 1e-6,
            max_passes: 40,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug)]
pub struct MatchedWitness {
    pub witness: WitnessSpec,
    pub p: f64,
    pub bound: f64,
    pub inner: f64,
    pub evaluations: usize,
}

struct Objective<'a> {
    support: &'a [PauliString],
    r: Vec<f64>,
    class: &'a SeparabilityClass,
    opts: &'a OptimizerOptions,
    n: usize,
    evals: usize,
    warm: Option<BoundResult>,
}

impl Objective<'_> {
    fn spec(&self, m: &[f64]) -> WitnessSpec {
        WitnessSpec {
            n: self.n,
            terms: self.support.iter().cloned().zip(m.iter().copied()).collect(),
            constant: None,
        }
    }

    fn eval(&mut self, m: &[f64]) -> f64 {
        let inner: f64 = m.iter().zip(&self.r).map(|(a, b)| a * b).sum();
        if inner <= 1e-14 {
            return f64::INFINITY;
        }
        self.evals += 1;
        let spec = self.spec(m);
        let res = max_over_class_warm(&spec, self.class, self.opts, self.warm.as_ref()).expect("compiled class");
        let v = res.bound / inner;
        self.warm = Some(res);
        v
    }

    /// Golden-section search of t ↦ f(m + t·d) on [lo, hi]; returns the best
    /// point seen including t = 0.
    fn line(&mut self, m: &[f64], d: &[f64], lo: f64, hi: f64, f0: f64, tol: f64) -> (f64, f64) {
        let g = (5f64.sqrt() - 1.0) / 2.0;
        let at = |t: f64| -> Vec<f64> { m.iter().zip(d).map(|(a, b)| a + t * b).collect() };
        let (mut a, mut b) = (lo, hi);
        let mut x1 = b - g * (b - a);
        let mut x2 = a + g * (b - a);
        let mut f1 = self.eval(&at(x1));
        let mut f2 = self.eval(&at(x2));
        let (mut best_t, mut best_f) = (0.0, f0);
        for (t, f) in [(x1, f1), (x2, f2)] {
            if f < best_f {
                best_t = t;
                best_f = f;
            }
        }
        while b - a > tol {
            if f1 <= f2 {
                b = x2;
                x2 = x1;
                f2 = f1;
                x1 = b - g * (b - a);
                f1 = self.eval(&at(x1));
                if f1 < best_f {
                    best_t = x1;
                    best_f = f1;
                }
            } else {
                a = x1;
                x1 = x2;
                f1 = f2;
                x2 = a + g * (b - a);
                f2 = self.eval(&at(x2));
                if f2 < best_f {
                    best_t = x2;
                    best_f = f2;
                }
            }
        }
        (best_t, best_f)
    }
}

fn normalize_box(m: &mut [f64]) {
    let s = m.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if s > 0.0 {
        m.iter_mut().for_each(|v| *v /= s);
    }
}

/// Minimizes bound(M)/Σ M_s R_s over witnesses supported on `support`,
/// normalized to max|M_s| = 1.
pub fn matched_witness_search(
    r: &CharTensor,
    support: &[PauliString],
    class: &SeparabilityClass,
    opts: &SearchOptions,
) -> Result<MatchedWitness> {
    if support.is_empty() {
        return Err(Error::EmptySupport);
    }
    for s in support {
        if s.n() != r.n() || s.is_identity() {
            return Err(Error::Input(format!("support string {s} is invalid for this state")));
        }
    }
    let k = support.len();
    let mut obj = Objective {
        support,
        r: support.iter().map(|s| r.get(s)).collect(),
        class,
        opts: &opts.optimizer,
        n: r.n(),
        evals: 0,
        warm: None,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut best: Option<(f64, Vec<f64>)> = None;
    for restart in 0..opts.restarts.max(1) {
        let mut m: Vec<f64> = if restart == 0 {
            obj.r.iter().map(|v| if *v > 0.0 { 1.0 } else if *v < 0.0 { -1.0 } else { 0.0 }).collect()
        } else {
            (0..k).map(|_| rng.random_range(-1.0..1.0)).collect()
        };
        normalize_box(&mut m);
        obj.warm = None;
        let mut f = obj.eval(&m);
        if !f.is_finite() {
            continue;
        }
        for _ in 0..opts.max_passes {
            let start_f = f;
            for i in 0..k {
                let mut d = vec![0.0; k];
                d[i] = 1.0;
                let (t, fv) = obj.line(&m, &d, -1.0 - m[i], 1.0 - m[i], f, opts.line_tol);
                if fv < f {
                    m[i] += t;
                    f = fv;
                }
            }
            if f < start_f - 1e-12 {
                normalize_box(&mut m);
                continue;
            }
            // coordinate moves stalled: try diagonal directions
            for i in 0..k {
                for j in (i + 1)..k {
                    for sgn in [1.0, -1.0] {
                        let mut d = vec![0.0; k];
                        d[i] = 1.0;
                        d[j] = sgn;
                        let (t, fv) = obj.line(&m, &d, -1.0, 1.0, f, opts.line_tol);
                        if fv < f - 1e-12 {
                            for (a, b) in m.iter_mut().zip(&d) {
                                *a += t * b;
                            }
                            normalize_box(&mut m);
                            f = obj.eval(&m);
                        }
                    }
                }
            }
            if f >= start_f - 1e-12 {
                break;
            }
            normalize_box(&mut m);
        }
        if best.as_ref().is_none_or(|(bf, _)| f < *bf) {
            best = Some((f, m));
        }
    }
    let Some((_, m)) = best else { return Err(Error::DegenerateObjective) };
    let witness = obj.spec(&m);
    let inner = witness.inner(r);
    let bound = max_over_class(&witness, class, &opts.final_optimizer)?.bound;
    Ok(MatchedWitness { witness, p: bound / inner, bound, inner, evaluations: obj.evals })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_x_product() {
        let m = WitnessSpec::from_strs(4, &[("XXXX", 1.0)]).unwrap();
        let x = BlockFactor::Single(BlochVector::new(1.0, 0.0, 0.0));
        let a = ProductAssignment::new(Partition::full_split(4), vec![x; 4]).unwrap();
        assert!((product_expectation(&m, &a).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn arity_is_checked() {
        let m = WitnessSpec::from_strs(3, &[("XXX", 1.0)]).unwrap();
        let p = Partition::parse("123", 3).unwrap();
        assert!(matches!(max_over_class(&m, &SeparabilityClass::single(p), &OptimizerOptions::default()), Err(Error::Arity(3))));
    }

    #[test]
    fn single_string_full_split() {
        let m = WitnessSpec::from_strs(3, &[("XXX", 1.0)]).unwrap();
        let r = max_over_class(&m, &SeparabilityClass::full(3), &OptimizerOptions::default()).unwrap();
        assert!((r.bound - 1.0).abs() < 1e-12);
        assert!(grid_oracle(&m, &Partition::full_split(3), 64).unwrap() >= 0.998);
    }

    #[test]
    fn pair_correlations_of_bell_state() {
        let h = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let t = TwoQubitPure::new([h, C64::new(0.0, 0.0), C64::new(0.0, 0.0), h]).correlations();
        assert!((t[5] - 1.0).abs() < 1e-15);
        assert!((t[10] + 1.0).abs() < 1e-15);
        assert!((t[15] - 1.0).abs() < 1e-15);
        assert!((t[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rational_threshold_requires_integers() {
        assert_eq!(rational_threshold(2.0000001, 10.0).unwrap(), Ratio::new(1, 5));
        assert!(rational_threshold(2.1, 10.0).is_err());
    }

    #[test]
    fn lifted_full_split_keeps_its_value() {
        let w = WitnessSpec::from_strs(4, &[("XZYX", 0.4), ("YYIX", 0.6), ("YZZI", -0.9), ("IYYI", 0.3)]).unwrap();
        let full = Partition::full_split(4);
        let a = ProductAssignment::new(
            full.clone(),
            vec![
                BlockFactor::Single(BlochVector::new(0.3, -0.5, 0.2)),
                BlockFactor::Single(BlochVector::new(-0.1, 0.7, 0.4)),
                BlockFactor::Single(BlochVector::new(0.9, 0.1, -0.3)),
                BlockFactor::Single(BlochVector::new(0.0, -0.2, 0.8)),
            ],
        )
        .unwrap();
        let v = product_expectation(&w, &a).unwrap();
        for label in ["13|2|4", "12|34", "1|24|3"] {
            let p = Partition::parse(label, 4).unwrap();
            let lifted = ProductAssignment::new(p.clone(), lift_full_split(&a, &p)).unwrap();
            assert!((product_expectation(&w, &lifted).unwrap() - v).abs() < 1e-14, "{label}");
        }
    }
}
