//! Reference stabilizer states and white-noise mixtures.

use crate::error::{Error, Result};
use crate::pauli::{string_matrix, CMat, DensityMatrix, PauliString, C64};

#[derive(Clone, Debug, PartialEq)]
pub struct SignedPauli {
    pub sign: i8,
    pub string: PauliString,
}

impl SignedPauli {
    pub fn new(sign: i8, string: PauliString) -> Self {
        SignedPauli { sign, string }
    }

    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        match s.strip_prefix('-') {
            Some(rest) => Ok(SignedPauli::new(-1, PauliString::parse(rest)?)),
            None => Ok(SignedPauli::new(1, PauliString::parse(s.trim_start_matches('+'))?)),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StabilizerSet {
    generators: Vec<SignedPauli>,
}

impl StabilizerSet {
    pub fn new(generators: Vec<SignedPauli>) -> Result<Self> {
        for (i, a) in generators.iter().enumerate() {
            if a.sign != 1 && a.sign != -1 {
                return Err(Error::Input(format!("sign {} must be +1 or -1", a.sign)));
            }
            for b in &generators[..i] {
                if a.string.n() != b.string.n() {
                    return Err(Error::DimensionMismatch(format!("{} vs {}", a.string, b.string)));
                }
                if !a.string.commutes_with(&b.string) {
                    return Err(Error::NonCommuting(a.string.to_string(), b.string.to_string()));
                }
            }
        }
        Ok(StabilizerSet { generators })
    }

    pub fn from_strs(gens: &[&str]) -> Result<Self> {
        StabilizerSet::new(gens.iter().map(|g| SignedPauli::parse(g)).collect::<Result<_>>()?)
    }

    pub fn generators(&self) -> &[SignedPauli] {
        &self.generators
    }

    /// Rank of the generators as binary symplectic vectors.
    pub fn symplectic_rank(&self) -> usize {
        let mut rows: Vec<u64> = self
            .generators
            .iter()
            .map(|g| {
                let a = g.string.action();
                ((a.xmask as u64) << 32) | a.zmask as u64
            })
            .collect();
        let mut rank = 0;
        for bit in (0..64).rev() {
            let Some(piv) = (rank..rows.len()).find(|&r| rows[r] >> bit & 1 == 1) else { continue };
            rows.swap(rank, piv);
            for r in 0..rows.len() {
                if r != rank && rows[r] >> bit & 1 == 1 {
                    rows[r] ^= rows[rank];
                }
            }
            rank += 1;
        }
        rank
    }
}

#[derive(Clone, Debug)]
pub struct StabilizerState {
    pub state: DensityMatrix,
    /// Fewer than n generators: the output is a mixed stabilizer state.
    pub rank_deficient: bool,
}

pub fn from_stabilizers(s: &StabilizerSet, n: usize) -> Result<StabilizerState> {
    if s.generators.iter().any(|g| g.string.n() != n) {
        return Err(Error::DimensionMismatch(format!("generators are not on {n} qubits")));
    }
    if s.generators.len() > n || s.symplectic_rank() < s.generators.len() {
        return Err(Error::DependentGenerators);
    }
    let d = 1usize << n;
    let id = CMat::identity(d, d);
    let mut m = id.clone() * C64::new(1.0 / d as f64, 0.0);
    for g in &s.generators {
        let k = string_matrix(&g.string) * C64::new(g.sign as f64, 0.0);
        m = m * (&id + k);
    }
    Ok(StabilizerState { state: DensityMatrix::new(m)?, rank_deficient: s.generators.len() < n })
}

pub fn named_stabilizers(id: &str) -> Result<(StabilizerSet, usize)> {
    match id {
        "ghz3" => Ok((StabilizerSet::from_strs(&["XXX", "ZZI", "IZZ"])?, 3)),
        "ghz4" => Ok((StabilizerSet::from_strs(&["XXXX", "ZZII", "ZIZI", "ZIIZ"])?, 4)),
        "cluster4" => Ok((StabilizerSet::from_strs(&["XZII", "ZXZI", "IZXZ", "IIZX"])?, 4)),
        other => Err(Error::UnknownId(other.to_string())),
    }
}

pub fn named_pure_state(id: &str) -> Result<DensityMatrix> {
    let (s, n) = named_stabilizers(id)?;
    Ok(from_stabilizers(&s, n)?.state)
}

pub fn noisy_mix(pure: &DensityMatrix, p: f64) -> Result<DensityMatrix> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Range(format!("p = {p} outside [0, 1]")));
    }
    let d = pure.dim();
    let m = pure.matrix() * C64::new(p, 0.0) + CMat::identity(d, d) * C64::new((1.0 - p) / d as f64, 0.0);
    DensityMatrix::new(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::char_from_density;

    #[test]
    fn two_qubit_zero_state() {
        let s = StabilizerSet::from_strs(&["ZI", "IZ"]).unwrap();
        let rho = from_stabilizers(&s, 2).unwrap().state;
        assert!((rho.matrix()[(0, 0)].re - 1.0).abs() < 1e-15);
        assert!(rho.matrix().iter().skip(1).all(|z| z.norm() < 1e-15));
    }

    #[test]
    fn ghz3_entries() {
        let rho = named_pure_state("ghz3").unwrap();
        let m = rho.matrix();
        for (r, c) in [(0, 0), (7, 7), (0, 7), (7, 0)] {
            assert!((m[(r, c)].re - 0.5).abs() < 1e-15);
        }
    }

    #[test]
    fn named_char_values() {
        let g = char_from_density(&named_pure_state("ghz4").unwrap()).unwrap();
        assert!((g.at("ZZZZ") - 1.0).abs() < 1e-12);
        assert!((g.at("XXXX") - 1.0).abs() < 1e-12);
        assert!((g.at("YYXX") + 1.0).abs() < 1e-12);
        let c = char_from_density(&named_pure_state("cluster4").unwrap()).unwrap();
        assert!((c.at("XZZX") - 1.0).abs() < 1e-12);
        assert_eq!(c.nonzero(1e-12).len(), 16);
        assert!(named_pure_state("w4").is_err());
    }

    #[test]
    fn rejects_bad_generators() {
        assert!(matches!(StabilizerSet::from_strs(&["XI", "ZI"]), Err(Error::NonCommuting(..))));
        let dup = StabilizerSet::from_strs(&["ZZ", "ZZ"]).unwrap();
        assert!(matches!(from_stabilizers(&dup, 2), Err(Error::DependentGenerators)));
        let partial = StabilizerSet::from_strs(&["ZZ"]).unwrap();
        assert!(from_stabilizers(&partial, 2).unwrap().rank_deficient);
    }

    #[test]
    fn noise_endpoints() {
        let g = named_pure_state("ghz4").unwrap();
        assert!(noisy_mix(&g, 0.0).unwrap().max_abs_diff(&DensityMatrix::maximally_mixed(4)) < 1e-15);
        assert!(noisy_mix(&g, 1.0).unwrap().max_abs_diff(&g) < 1e-15);
        assert!(noisy_mix(&g, 1.5).is_err());
    }
}
