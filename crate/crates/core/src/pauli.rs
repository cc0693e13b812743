//! Pauli strings, density matrices, characteristic tensors and partitions.
//!
//! Qubit 1 is the leftmost tensor factor and the most significant bit of a
//! basis index. Pauli codes are I=0, X=1, Y=2, Z=3, and a string's index is
//! its base-4 number with qubit 1 as the leading digit.

use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;

pub const DEFAULT_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];

    pub fn code(self) -> usize {
        self as usize
    }

    pub fn from_code(c: usize) -> Pauli {
        Self::ALL[c & 3]
    }

    pub fn from_char(c: char) -> Option<Pauli> {
        match c {
            'I' | '0' => Some(Pauli::I),
            'X' | '1' => Some(Pauli::X),
            'Y' | '2' => Some(Pauli::Y),
            'Z' | '3' => Some(Pauli::Z),
            _ => None,
        }
    }

    pub fn symbol(self) -> char {
        ['I', 'X', 'Y', 'Z'][self.code()]
    }

    pub fn matrix(self) -> [[C64; 2]; 2] {
        let o = C64::new(0.0, 0.0);
        let l = C64::new(1.0, 0.0);
        let i = C64::new(0.0, 1.0);
        match self {
            Pauli::I => [[l, o], [o, l]],
            Pauli::X => [[o, l], [l, o]],
            Pauli::Y => [[o, -i], [i, o]],
            Pauli::Z => [[l, o], [o, -l]],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliString(Vec<Pauli>);

impl PauliString {
    pub fn new(symbols: Vec<Pauli>) -> Result<Self> {
        if symbols.is_empty() {
            return Err(Error::Parse("empty string".into()));
        }
        Ok(PauliString(symbols))
    }

    /// Accepts letters (`XZII`) or digit codes (`1300`).
    pub fn parse(s: &str) -> Result<Self> {
        let syms: Option<Vec<Pauli>> = s.trim().chars().map(Pauli::from_char).collect();
        match syms {
            Some(v) if !v.is_empty() => Ok(PauliString(v)),
            _ => Err(Error::Parse(s.to_string())),
        }
    }

    pub fn identity(n: usize) -> Self {
        PauliString(vec![Pauli::I; n])
    }

    pub fn from_index(mut idx: usize, n: usize) -> Self {
        let mut v = vec![Pauli::I; n];
        for k in (0..n).rev() {
            v[k] = Pauli::from_code(idx & 3);
            idx >>= 2;
        }
        PauliString(v)
    }

    pub fn n(&self) -> usize {
        self.0.len()
    }

    pub fn symbols(&self) -> &[Pauli] {
        &self.0
    }

    pub fn get(&self, qubit: usize) -> Pauli {
        self.0[qubit - 1]
    }

    pub fn index(&self) -> usize {
        self.0.iter().fold(0, |acc, p| acc * 4 + p.code())
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().all(|&p| p == Pauli::I)
    }

    pub fn weight(&self) -> usize {
        self.0.iter().filter(|&&p| p != Pauli::I).count()
    }

    pub fn action(&self) -> PauliAction {
        PauliAction::from_codes(self.0.iter().map(|p| p.code()))
    }

    /// Symplectic commutation test.
    pub fn commutes_with(&self, other: &PauliString) -> bool {
        let anti = self
            .0
            .iter()
            .zip(&other.0)
            .filter(|(a, b)| **a != Pauli::I && **b != Pauli::I && a != b)
            .count();
        anti % 2 == 0
    }

    /// Relabels qubits: qubit q of `self` moves to `perm[q-1]`.
    pub fn permuted(&self, perm: &[usize]) -> PauliString {
        let mut v = vec![Pauli::I; self.n()];
        for (q, &p) in self.0.iter().enumerate() {
            v[perm[q] - 1] = p;
        }
        PauliString(v)
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in &self.0 {
            write!(f, "{}", p.symbol())?;
        }
        Ok(())
    }
}

impl std::str::FromStr for PauliString {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        PauliString::parse(s)
    }
}

/// A Pauli string as a phased permutation: column `c` goes to row `c ^ xmask`
/// with phase `i^ny * (-1)^popcount(c & zmask)`.
#[derive(Clone, Copy, Debug)]
pub struct PauliAction {
    pub xmask: usize,
    pub zmask: usize,
    pub ny: u32,
}

impl PauliAction {
    pub fn from_codes(codes: impl Iterator<Item = usize>) -> Self {
        let codes: Vec<usize> = codes.collect();
        let n = codes.len();
        let (mut xmask, mut zmask, mut ny) = (0, 0, 0);
        for (k, &c) in codes.iter().enumerate() {
            let bit = 1 << (n - 1 - k);
            match c {
                1 => xmask |= bit,
                2 => {
                    xmask |= bit;
                    zmask |= bit;
                    ny += 1;
                }
                3 => zmask |= bit,
                _ => {}
            }
        }
        PauliAction { xmask, zmask, ny }
    }

    #[inline]
    pub fn phase(&self, c: usize) -> C64 {
        let sign = if (c & self.zmask).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
        match self.ny % 4 {
            0 => C64::new(sign, 0.0),
            1 => C64::new(0.0, sign),
            2 => C64::new(-sign, 0.0),
            _ => C64::new(0.0, -sign),
        }
    }

    /// tr(m σ).
    pub fn trace_with(&self, m: &CMat) -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        for c in 0..m.nrows() {
            acc += m[(c, c ^ self.xmask)] * self.phase(c);
        }
        acc
    }

    /// ⟨ψ|σ|ψ⟩ for a state vector.
    pub fn expectation(&self, psi: &[C64]) -> f64 {
        let mut acc = C64::new(0.0, 0.0);
        for (c, a) in psi.iter().enumerate() {
            acc += psi[c ^ self.xmask].conj() * self.phase(c) * a;
        }
        acc.re
    }
}

pub fn string_matrix(s: &PauliString) -> CMat {
    let d = 1usize << s.n();
    let act = s.action();
    let mut m = CMat::zeros(d, d);
    for c in 0..d {
        m[(c ^ act.xmask, c)] = act.phase(c);
    }
    m
}

pub fn dim_to_qubits(d: usize) -> Result<usize> {
    if d == 0 || !d.is_power_of_two() {
        return Err(Error::Dimension(d));
    }
    Ok(d.trailing_zeros() as usize)
}

#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    n: usize,
    m: CMat,
}

impl DensityMatrix {
    /// Wraps a square matrix of power-of-two size; validity is not checked.
    pub fn new(m: CMat) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::DimensionMismatch(format!("{}x{}", m.nrows(), m.ncols())));
        }
        let n = dim_to_qubits(m.nrows())?;
        Ok(DensityMatrix { n, m })
    }

    pub fn from_pure(psi: &[C64]) -> Result<Self> {
        let n = dim_to_qubits(psi.len())?;
        let d = psi.len();
        let m = CMat::from_fn(d, d, |r, c| psi[r] * psi[c].conj());
        Ok(DensityMatrix { n, m })
    }

    pub fn maximally_mixed(n: usize) -> Self {
        let d = 1 << n;
        DensityMatrix { n, m: CMat::identity(d, d) * C64::new(1.0 / d as f64, 0.0) }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    pub fn matrix(&self) -> &CMat {
        &self.m
    }

    pub fn into_matrix(self) -> CMat {
        self.m
    }

    pub fn validate(&self, tol: f64) -> ValidityReport {
        validate_state(&self.m, tol).expect("dimension checked on construction")
    }

    pub fn max_abs_diff(&self, other: &DensityMatrix) -> f64 {
        max_abs_diff(&self.m, &other.m)
    }
}

pub fn max_abs_diff(a: &CMat, b: &CMat) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

#[derive(Clone, Debug, PartialEq)]
pub struct CharTensor {
    n: usize,
    values: Vec<f64>,
}

impl CharTensor {
    pub fn new(n: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != 1 << (2 * n) {
            return Err(Error::DimensionMismatch(format!(
                "{} values for {} qubits",
                values.len(),
                n
            )));
        }
        Ok(CharTensor { n, values })
    }

    pub fn zeros(n: usize) -> Self {
        CharTensor { n, values: vec![0.0; 1 << (2 * n)] }
    }

    pub fn from_terms(n: usize, terms: &[(PauliString, f64)]) -> Result<Self> {
        let mut t = CharTensor::zeros(n);
        for (s, v) in terms {
            if s.n() != n {
                return Err(Error::DimensionMismatch(format!("{s} on {n} qubits")));
            }
            t.values[s.index()] += v;
        }
        Ok(t)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, s: &PauliString) -> f64 {
        self.values[s.index()]
    }

    pub fn at(&self, s: &str) -> f64 {
        self.get(&PauliString::parse(s).expect("valid Pauli string"))
    }

    pub fn set(&mut self, s: &PauliString, v: f64) {
        self.values[s.index()] = v;
    }

    /// Entries with |value| > tol, in index order.
    pub fn nonzero(&self, tol: f64) -> Vec<(PauliString, f64)> {
        self.values
            .iter()
            .enumerate()
            .filter(|(_, v)| v.abs() > tol)
            .map(|(i, &v)| (PauliString::from_index(i, self.n), v))
            .collect()
    }
}

pub fn char_from_density(rho: &DensityMatrix) -> Result<CharTensor> {
    char_from_matrix(rho.matrix(), DEFAULT_TOL)
}

pub fn char_from_matrix(m: &CMat, tol: f64) -> Result<CharTensor> {
    let n = dim_to_qubits(m.nrows())?;
    let count = 1usize << (2 * n);
    let mut values = Vec::with_capacity(count);
    for idx in 0..count {
        let act = PauliAction::from_codes((0..n).map(|k| (idx >> (2 * (n - 1 - k))) & 3));
        let t = act.trace_with(m);
        if t.im.abs() > tol {
            return Err(Error::NonHermitianInput(t.im.abs()));
        }
        values.push(t.re);
    }
    Ok(CharTensor { n, values })
}

pub fn density_from_char(r: &CharTensor) -> DensityMatrix {
    let n = r.n;
    let d = 1usize << n;
    let scale = 1.0 / d as f64;
    let mut m = CMat::zeros(d, d);
    for (idx, &v) in r.values.iter().enumerate() {
        if v == 0.0 {
            continue;
        }
        let act = PauliAction::from_codes((0..n).map(|k| (idx >> (2 * (n - 1 - k))) & 3));
        for c in 0..d {
            m[(c ^ act.xmask, c)] += act.phase(c) * (v * scale);
        }
    }
    DensityMatrix { n, m }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ValidityReport {
    pub hermiticity_defect: f64,
    pub trace_defect: f64,
    pub min_eigenvalue: f64,
    pub valid: bool,
}

pub fn hermiticity_defect(m: &CMat) -> f64 {
    let mut worst = 0.0f64;
    for r in 0..m.nrows() {
        for c in r..m.ncols() {
            worst = worst.max((m[(r, c)] - m[(c, r)].conj()).norm());
        }
    }
    worst
}

pub fn validate_state(m: &CMat, tol: f64) -> Result<ValidityReport> {
    if m.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch(format!("{}x{}", m.nrows(), m.ncols())));
    }
    dim_to_qubits(m.nrows())?;
    let herm = hermiticity_defect(m);
    let trace_defect = (m.trace() - C64::new(1.0, 0.0)).norm();
    let sym = (m + m.adjoint()) * C64::new(0.5, 0.0);
    let min_eigenvalue = sym.symmetric_eigenvalues().iter().cloned().fold(f64::INFINITY, f64::min);
    let valid = herm <= tol && trace_defect <= tol && min_eigenvalue >= -tol;
    Ok(ValidityReport { hermiticity_defect: herm, trace_defect, min_eigenvalue, valid })
}

#[derive(Clone, Debug)]
pub struct EigenSystem {
    pub eigenvalues: Vec<f64>,
    /// Orthonormal eigenvectors as columns, in eigenvalue order.
    pub eigenvectors: CMat,
}

impl EigenSystem {
    pub fn reconstruct(&self) -> CMat {
        let d = self.eigenvalues.len();
        let mut diag = CMat::zeros(d, d);
        for (k, &l) in self.eigenvalues.iter().enumerate() {
            diag[(k, k)] = C64::new(l, 0.0);
        }
        &self.eigenvectors * diag * self.eigenvectors.adjoint()
    }

    pub fn max(&self) -> (f64, Vec<C64>) {
        let k = self.eigenvalues.len() - 1;
        (self.eigenvalues[k], self.eigenvectors.column(k).iter().cloned().collect())
    }
}

pub fn hermitian_eigensystem(m: &CMat) -> Result<EigenSystem> {
    let scale = m.iter().map(|z| z.norm()).fold(1.0, f64::max);
    let defect = hermiticity_defect(m);
    if defect > DEFAULT_TOL * scale {
        return Err(Error::NonHermitianInput(defect));
    }
    let sym = (m + m.adjoint()) * C64::new(0.5, 0.0);
    let eig = sym.symmetric_eigen();
    let mut order: Vec<usize> = (0..m.nrows()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let eigenvalues = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let eigenvectors = CMat::from_fn(m.nrows(), m.ncols(), |r, c| eig.eigenvectors[(r, order[c])]);
    Ok(EigenSystem { eigenvalues, eigenvectors })
}

/// Set partition of qubits {1..n}. Blocks are sorted and ordered by their
/// smallest element.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Partition {
    n: usize,
    blocks: Vec<Vec<usize>>,
}

impl Partition {
    pub fn new(n: usize, blocks: Vec<Vec<usize>>) -> Result<Self> {
        let mut seen = vec![false; n + 1];
        let mut blocks: Vec<Vec<usize>> = blocks
            .into_iter()
            .map(|mut b| {
                b.sort_unstable();
                b
            })
            .collect();
        for b in &blocks {
            if b.is_empty() {
                return Err(Error::PartitionShape("empty block".into()));
            }
            for &q in b {
                if q == 0 || q > n || seen[q] {
                    return Err(Error::PartitionShape(format!("qubit {q} invalid or repeated")));
                }
                seen[q] = true;
            }
        }
        if seen[1..].iter().any(|s| !s) {
            return Err(Error::PartitionShape("blocks do not cover all qubits".into()));
        }
        blocks.sort_by_key(|b| b[0]);
        Ok(Partition { n, blocks })
    }

    /// Parses `12|3|4`.
    pub fn parse(s: &str, n: usize) -> Result<Self> {
        let blocks: Option<Vec<Vec<usize>>> = s
            .split('|')
            .map(|b| b.trim().chars().map(|c| c.to_digit(10).map(|d| d as usize)).collect())
            .collect();
        Partition::new(n, blocks.ok_or_else(|| Error::PartitionShape(s.to_string()))?)
    }

    pub fn full_split(n: usize) -> Self {
        Partition { n, blocks: (1..=n).map(|q| vec![q]).collect() }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn max_block(&self) -> usize {
        self.blocks.iter().map(|b| b.len()).max().unwrap_or(0)
    }

    pub fn block_of(&self, q: usize) -> usize {
        self.blocks.iter().position(|b| b.contains(&q)).expect("qubit in partition")
    }

    /// True when every block of `self` lies inside a block of `coarser`.
    pub fn refines(&self, coarser: &Partition) -> bool {
        self.n == coarser.n
            && self.blocks.iter().all(|b| {
                let k = coarser.block_of(b[0]);
                b.iter().all(|q| coarser.blocks[k].contains(q))
            })
    }

    pub fn permuted(&self, perm: &[usize]) -> Partition {
        let blocks = self.blocks.iter().map(|b| b.iter().map(|&q| perm[q - 1]).collect()).collect();
        Partition::new(self.n, blocks).expect("permutation of a valid partition")
    }

    pub fn block_labels(&self) -> Vec<String> {
        self.blocks.iter().map(|b| b.iter().map(|q| q.to_string()).collect()).collect()
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.block_labels().join("|"))
    }
}

/// Set partitions of {1..n} into exactly k blocks, in lexicographic order of
/// their restricted growth strings.
pub fn enumerate_partitions(n: usize, k: usize) -> Result<Vec<Partition>> {
    if k < 1 || k > n {
        return Err(Error::Range(format!("k = {k} with n = {n}")));
    }
    let mut out = Vec::new();
    let mut rgs = vec![0usize; n];
    fn rec(pos: usize, maxv: usize, n: usize, k: usize, rgs: &mut Vec<usize>, out: &mut Vec<Partition>) {
        if pos == n {
            if maxv + 1 == k {
                let mut blocks = vec![Vec::new(); k];
                for (q, &b) in rgs.iter().enumerate() {
                    blocks[b].push(q + 1);
                }
                out.push(Partition::new(n, blocks).expect("valid"));
            }
            return;
        }
        // not enough positions left to open the remaining blocks
        if maxv + 1 + (n - pos) < k {
            return;
        }
        for v in 0..=(maxv + 1).min(k - 1) {
            rgs[pos] = v;
            rec(pos + 1, maxv.max(v), n, k, rgs, out);
        }
    }
    rgs[0] = 0;
    rec(1, 0, n, k, &mut rgs, &mut out);
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SeparabilityClass {
    n: usize,
    partitions: Vec<Partition>,
}

impl SeparabilityClass {
    pub fn new(n: usize, partitions: Vec<Partition>) -> Result<Self> {
        if partitions.is_empty() {
            return Err(Error::PartitionShape("class has no partitions".into()));
        }
        for (i, p) in partitions.iter().enumerate() {
            if p.n() != n {
                return Err(Error::PartitionShape(format!("{p} is not over {n} qubits")));
            }
            if partitions[..i].contains(p) {
                return Err(Error::PartitionShape(format!("duplicate partition {p}")));
            }
        }
        Ok(SeparabilityClass { n, partitions })
    }

    pub fn full(n: usize) -> Self {
        SeparabilityClass { n, partitions: vec![Partition::full_split(n)] }
    }

    pub fn with_parts(n: usize, k: usize) -> Result<Self> {
        SeparabilityClass::new(n, enumerate_partitions(n, k)?)
    }

    /// "full", "tri", "bi", or a `|`-separated partition list joined by commas.
    pub fn parse(s: &str, n: usize) -> Result<Self> {
        match s.trim() {
            "full" => Ok(SeparabilityClass::full(n)),
            "tri" => SeparabilityClass::with_parts(n, 3),
            "bi" => SeparabilityClass::with_parts(n, 2),
            other => {
                let parts = other.split(',').map(|p| Partition::parse(p, n)).collect::<Result<Vec<_>>>()?;
                SeparabilityClass::new(n, parts)
            }
        }
    }

    pub fn single(p: Partition) -> Self {
        SeparabilityClass { n: p.n(), partitions: vec![p] }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn partitions(&self) -> &[Partition] {
        &self.partitions
    }

    /// A product state over `p` belongs to the class when `p` refines a member.
    pub fn admits(&self, p: &Partition) -> bool {
        self.partitions.iter().any(|c| p.refines(c))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zz_is_diagonal() {
        let m = string_matrix(&PauliString::parse("ZZ").unwrap());
        let d: Vec<f64> = (0..4).map(|k| m[(k, k)].re).collect();
        assert_eq!(d, vec![1.0, -1.0, -1.0, 1.0]);
    }

    #[test]
    fn yy_matches_kronecker() {
        let y = Pauli::Y.matrix();
        let m = string_matrix(&PauliString::parse("YY").unwrap());
        for r in 0..4 {
            for c in 0..4 {
                let k = y[r >> 1][c >> 1] * y[r & 1][c & 1];
                assert!((m[(r, c)] - k).norm() < 1e-15);
            }
        }
        let anti: Vec<f64> = (0..4).map(|k| m[(k, 3 - k)].re).collect();
        assert_eq!(anti, vec![-1.0, 1.0, 1.0, -1.0]);
    }

    #[test]
    fn xxxx_is_antidiagonal_ones() {
        let m = string_matrix(&PauliString::parse("XXXX").unwrap());
        for r in 0..16 {
            for c in 0..16 {
                let want = if r + c == 15 { 1.0 } else { 0.0 };
                assert_eq!(m[(r, c)], C64::new(want, 0.0));
            }
        }
    }

    #[test]
    fn index_roundtrip() {
        let s = PauliString::parse("XZII").unwrap();
        assert_eq!(s.index(), 1 * 64 + 3 * 16);
        assert_eq!(PauliString::from_index(s.index(), 4), s);
        assert_eq!(PauliString::parse("1300").unwrap(), s);
    }

    #[test]
    fn mixed_state_char() {
        let r = char_from_density(&DensityMatrix::maximally_mixed(3)).unwrap();
        assert_eq!(r.nonzero(1e-15), vec![(PauliString::identity(3), 1.0)]);
    }

    #[test]
    fn vertex_state_from_char() {
        let r = CharTensor::from_terms(
            3,
            &[(PauliString::identity(3), 1.0), (PauliString::parse("XXX").unwrap(), 1.0)],
        )
        .unwrap();
        let rho = density_from_char(&r);
        for k in 0..8 {
            assert!((rho.matrix()[(k, k)].re - 0.125).abs() < 1e-15);
            assert!((rho.matrix()[(k, 7 - k)].re - 0.125).abs() < 1e-15);
        }
    }

    #[test]
    fn validation_flags_bad_coherence() {
        let mut m = CMat::zeros(8, 8);
        m[(0, 0)] = C64::new(0.25, 0.0);
        m[(7, 7)] = C64::new(0.25, 0.0);
        for k in 1..7 {
            m[(k, k)] = C64::new(0.5 / 6.0, 0.0);
        }
        m[(0, 7)] = C64::new(0.3, 0.0);
        m[(7, 0)] = C64::new(0.3, 0.0);
        let rep = validate_state(&m, 1e-9).unwrap();
        assert!(!rep.valid);
        assert!(rep.min_eigenvalue < 0.0);
        assert!(matches!(validate_state(&CMat::zeros(3, 3), 1e-9), Err(Error::Dimension(3))));
    }

    #[test]
    fn eigensystem_sorted() {
        let mut m = CMat::zeros(4, 4);
        for (k, v) in [1.0, -3.0, -3.0, 5.0].iter().enumerate() {
            m[(k, k)] = C64::new(*v, 0.0);
        }
        let e = hermitian_eigensystem(&m).unwrap();
        assert_eq!(e.eigenvalues, vec![-3.0, -3.0, 1.0, 5.0]);
    }

    #[test]
    fn partition_counts_and_order() {
        let p43: Vec<String> = enumerate_partitions(4, 3).unwrap().iter().map(|p| p.to_string()).collect();
        assert_eq!(p43, vec!["12|3|4", "13|2|4", "1|23|4", "14|2|3", "1|24|3", "1|2|34"]);
        assert_eq!(enumerate_partitions(3, 3).unwrap().len(), 1);
        assert_eq!(enumerate_partitions(4, 2).unwrap().len(), 7);
        assert!(enumerate_partitions(3, 4).is_err());
        assert!(enumerate_partitions(3, 0).is_err());
    }

    #[test]
    fn class_admits_refinements() {
        let tri = SeparabilityClass::with_parts(4, 3).unwrap();
        assert!(tri.admits(&Partition::full_split(4)));
        assert!(!tri.admits(&Partition::parse("12|34", 4).unwrap()));
        assert_eq!(Partition::parse("3|24|1", 4).unwrap().to_string(), "1|24|3");
    }
}
