//! JSON file formats.

use serde::{Deserialize, Serialize};

use crate::bloch::WitnessSpec;
use crate::decomp::{DecompComponent, SeparableDecomposition};
use crate::error::{Error, Result};
use crate::graph::{SignedPauli, StabilizerSet};
use crate::pauli::{char_from_density, density_from_char, CMat, CharTensor, DensityMatrix, Partition, PauliString, SeparabilityClass, C64};
use crate::xstate::XState;

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct PauliTerm {
    pub string: String,
    pub coeff: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct StateFile {
    pub n: usize,
    pub format: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dense: Option<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pauli: Option<Vec<PauliTerm>>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct WitnessFile {
    pub n: usize,
    pub terms: Vec<PauliTerm>,
    #[serde(default)]
    pub constant: Option<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum ClassFile {
    Shorthand(String),
    Explicit { n: usize, partitions: Vec<Vec<String>> },
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct XStateFile {
    pub diag: [f64; 8],
    pub anti: [f64; 4],
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct GeneratorEntry {
    pub sign: i8,
    pub string: String,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct StabilizerFile {
    pub n: usize,
    pub generators: Vec<GeneratorEntry>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ComponentEntry {
    pub weight: f64,
    pub partition: Vec<String>,
    pub factors: Vec<StateFile>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct DecompFile {
    pub components: Vec<ComponentEntry>,
}

fn parse<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Input(e.to_string()))
}

fn render<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("plain data serializes")
}

impl StateFile {
    pub fn to_state(&self) -> Result<DensityMatrix> {
        match self.format.as_str() {
            "dense" => {
                let entries = self.dense.as_ref().ok_or_else(|| Error::Input("dense format without \"dense\"".into()))?;
                let d = 1usize << self.n;
                if entries.len() != d * d {
                    return Err(Error::DimensionMismatch(format!("{} entries for n = {}", entries.len(), self.n)));
                }
                DensityMatrix::new(CMat::from_fn(d, d, |r, c| {
                    let [re, im] = entries[r * d + c];
                    C64::new(re, im)
                }))
            }
            "pauli" => {
                let terms = self.pauli.as_ref().ok_or_else(|| Error::Input("pauli format without \"pauli\"".into()))?;
                let mut r = CharTensor::zeros(self.n);
                for t in terms {
                    let s = PauliString::parse(&t.string)?;
                    if s.n() != self.n {
                        return Err(Error::DimensionMismatch(format!("{} on {} qubits", t.string, self.n)));
                    }
                    r.set(&s, r.get(&s) + t.coeff);
                }
                Ok(density_from_char(&r))
            }
            other => Err(Error::Input(format!("unknown state format {other}"))),
        }
    }

    pub fn dense(rho: &DensityMatrix) -> Self {
        let d = rho.dim();
        let m = rho.matrix();
        let dense = (0..d * d).map(|k| [m[(k / d, k % d)].re, m[(k / d, k % d)].im]).collect();
        StateFile { n: rho.n(), format: "dense".into(), dense: Some(dense), pauli: None }
    }

    pub fn pauli(rho: &DensityMatrix, tol: f64) -> Result<Self> {
        let r = char_from_density(rho)?;
        let pauli = r.nonzero(tol).into_iter().map(|(s, v)| PauliTerm { string: s.to_string(), coeff: v }).collect();
        Ok(StateFile { n: rho.n(), format: "pauli".into(), dense: None, pauli: Some(pauli) })
    }
}

pub fn state_from_json(text: &str) -> Result<DensityMatrix> {
    parse::<StateFile>(text)?.to_state()
}

pub fn state_to_json(rho: &DensityMatrix) -> String {
    render(&StateFile::dense(rho))
}

pub fn witness_from_json(text: &str) -> Result<WitnessSpec> {
    let f: WitnessFile = parse(text)?;
    let terms = f.terms.iter().map(|t| Ok((PauliString::parse(&t.string)?, t.coeff))).collect::<Result<Vec<_>>>()?;
    if let Some((s, _)) = terms.iter().find(|(s, _)| s.n() != f.n) {
        return Err(Error::DimensionMismatch(format!("{s} on {} qubits", f.n)));
    }
    WitnessSpec::new(f.n, terms, f.constant)
}

pub fn witness_to_json(w: &WitnessSpec) -> String {
    let terms = w.terms().map(|(s, v)| PauliTerm { string: s.to_string(), coeff: v }).collect();
    render(&WitnessFile { n: w.n(), terms, constant: w.constant })
}

fn partition_from_blocks(blocks: &[String], n: usize) -> Result<Partition> {
    Partition::parse(&blocks.join("|"), n)
}

fn partition_blocks(p: &Partition) -> Vec<String> {
    p.blocks().iter().map(|b| b.iter().map(|q| q.to_string()).collect()).collect()
}

/// Accepts a JSON class file, a bare shorthand ("full" | "tri" | "bi"), or a
/// partition list such as "12|3|4,1|23|4".
pub fn class_from_str(text: &str, n: usize) -> Result<SeparabilityClass> {
    let t = text.trim();
    if !t.starts_with('{') && !t.starts_with('"') {
        return SeparabilityClass::parse(t, n);
    }
    match parse::<ClassFile>(t)? {
        ClassFile::Shorthand(s) => SeparabilityClass::parse(&s, n),
        ClassFile::Explicit { n: m, partitions } => {
            if m != n {
                return Err(Error::DimensionMismatch(format!("class on {m} qubits, expected {n}")));
            }
            let ps = partitions.iter().map(|b| partition_from_blocks(b, n)).collect::<Result<Vec<_>>>()?;
            SeparabilityClass::new(n, ps)
        }
    }
}

pub fn class_to_json(c: &SeparabilityClass) -> String {
    render(&ClassFile::Explicit { n: c.n(), partitions: c.partitions().iter().map(partition_blocks).collect() })
}

pub fn xstate_from_json(text: &str) -> Result<XState> {
    let f: XStateFile = parse(text)?;
    XState::new(f.diag, f.anti)
}

pub fn xstate_to_json(x: &XState) -> String {
    render(&XStateFile { diag: x.diag, anti: x.anti })
}

pub fn stabilizers_from_json(text: &str) -> Result<(StabilizerSet, usize)> {
    let f: StabilizerFile = parse(text)?;
    let gens = f
        .generators
        .iter()
        .map(|g| {
            if g.sign != 1 && g.sign != -1 {
                return Err(Error::Input(format!("sign {} must be +1 or -1", g.sign)));
            }
            Ok(SignedPauli::new(g.sign, PauliString::parse(&g.string)?))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((StabilizerSet::new(gens)?, f.n))
}

pub fn decomposition_from_json(text: &str, n: usize) -> Result<SeparableDecomposition> {
    let f: DecompFile = parse(text)?;
    let comps = f
        .components
        .iter()
        .map(|c| {
            let p = partition_from_blocks(&c.partition, n)?;
            let states = c.factors.iter().map(|s| s.to_state()).collect::<Result<Vec<_>>>()?;
            DecompComponent::new(c.weight, p, states)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SeparableDecomposition::new(comps))
}

pub fn decomposition_to_json(d: &SeparableDecomposition) -> String {
    let components = d
        .components
        .iter()
        .map(|c| ComponentEntry {
            weight: c.weight,
            partition: partition_blocks(&c.partition),
            factors: c.factors.iter().map(|f| StateFile::dense(&f.state)).collect(),
        })
        .collect();
    render(&DecompFile { components })
}
