//! Separable decompositions: data model, verifier, and the built-in
//! decompositions of the noisy GHZ4 and cluster states at their thresholds.

use crate::bank::named_witness;
use crate::bank::reduced_pair_operator;
use crate::bloch::BlochVector;
use crate::error::{Error, Result};
use crate::graph::{named_pure_state, noisy_mix};
use crate::pauli::{
    hermitian_eigensystem, max_abs_diff, string_matrix, validate_state, CMat, DensityMatrix, Partition, Pauli,
    PauliString, SeparabilityClass, C64,
};

#[derive(Clone, Debug, PartialEq)]
pub struct ProductFactor {
    pub block: Vec<usize>,
    pub state: DensityMatrix,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DecompComponent {
    pub weight: f64,
    pub partition: Partition,
    pub factors: Vec<ProductFactor>,
}

impl DecompComponent {
    pub fn new(weight: f64, partition: Partition, states: Vec<DensityMatrix>) -> Result<Self> {
        if states.len() != partition.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} factors for partition {partition}",
                states.len()
            )));
        }
        let factors = partition
            .blocks()
            .iter()
            .zip(states)
            .map(|(b, s)| {
                if s.n() != b.len() {
                    return Err(Error::DimensionMismatch(format!("factor on {} qubits for block {:?}", s.n(), b)));
                }
                Ok(ProductFactor { block: b.clone(), state: s })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(DecompComponent { weight, partition, factors })
    }

    /// ⊗ of the factors placed on their qubits.
    pub fn product_matrix(&self) -> CMat {
        let n = self.partition.n();
        let d = 1usize << n;
        let local = |idx: usize, block: &[usize]| block.iter().fold(0, |acc, &q| (acc << 1) | ((idx >> (n - q)) & 1));
        CMat::from_fn(d, d, |r, c| {
            self.factors.iter().fold(C64::new(1.0, 0.0), |acc, f| {
                acc * f.state.matrix()[(local(r, &f.block), local(c, &f.block))]
            })
        })
    }
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct SeparableDecomposition {
    pub components: Vec<DecompComponent>,
}

impl SeparableDecomposition {
    pub fn new(components: Vec<DecompComponent>) -> Self {
        SeparableDecomposition { components }
    }

    pub fn total_weight(&self) -> f64 {
        self.components.iter().map(|c| c.weight).sum()
    }

    pub fn n(&self) -> Option<usize> {
        self.components.first().map(|c| c.partition.n())
    }

    pub fn matrix(&self) -> Option<CMat> {
        let n = self.n()?;
        let d = 1usize << n;
        let mut m = CMat::zeros(d, d);
        for c in &self.components {
            m += c.product_matrix() * C64::new(c.weight, 0.0);
        }
        Some(m)
    }

    /// Appends `other` with all its weights multiplied by `w`.
    pub fn extend_scaled(&mut self, other: &SeparableDecomposition, w: f64) {
        for c in &other.components {
            let mut c = c.clone();
            c.weight *= w;
            self.components.push(c);
        }
    }

    pub fn partitions(&self) -> Vec<Partition> {
        let mut out: Vec<Partition> = Vec::new();
        for c in &self.components {
            if !out.contains(&c.partition) {
                out.push(c.partition.clone());
            }
        }
        out
    }
}

#[derive(Clone, Debug)]
pub struct VerifyReport {
    /// Smallest factor eigenvalue (PSD margin).
    pub min_factor_eigenvalue: f64,
    pub max_factor_trace_defect: f64,
    pub min_weight: f64,
    pub weight_sum_defect: f64,
    pub partitions_in_class: bool,
    pub max_abs_error: f64,
    pub factors_ok: bool,
    pub class_ok: bool,
    pub equality_ok: bool,
    pub pass: bool,
}

pub fn verify_decomposition(
    d: &SeparableDecomposition,
    target: &DensityMatrix,
    class: &SeparabilityClass,
    tol: f64,
) -> Result<VerifyReport> {
    let n = target.n();
    if class.n() != n {
        return Err(Error::DimensionMismatch(format!("class on {} qubits, target on {n}", class.n())));
    }
    let mut min_eig = f64::INFINITY;
    let mut trace_defect = 0.0f64;
    let mut herm_ok = true;
    let mut partitions_in_class = true;
    let mut min_weight = f64::INFINITY;
    for c in &d.components {
        if c.partition.n() != n {
            return Err(Error::DimensionMismatch(format!("component on {} qubits", c.partition.n())));
        }
        partitions_in_class &= class.admits(&c.partition);
        min_weight = min_weight.min(c.weight);
        for f in &c.factors {
            let rep = validate_state(f.state.matrix(), tol)?;
            min_eig = min_eig.min(rep.min_eigenvalue);
            trace_defect = trace_defect.max(rep.trace_defect);
            herm_ok &= rep.hermiticity_defect <= tol;
        }
    }
    let weight_sum_defect = (d.total_weight() - 1.0).abs();
    let max_abs_error = match d.matrix() {
        Some(m) => max_abs_diff(&m, target.matrix()),
        None => f64::INFINITY,
    };
    let factors_ok = herm_ok && min_eig >= -tol && trace_defect <= tol && min_weight >= -tol;
    let class_ok = partitions_in_class;
    let equality_ok = max_abs_error <= tol && weight_sum_defect <= tol.max(1e-12);
    Ok(VerifyReport {
        min_factor_eigenvalue: min_eig,
        max_factor_trace_defect: trace_defect,
        min_weight,
        weight_sum_defect,
        partitions_in_class,
        max_abs_error,
        factors_ok,
        class_ok,
        equality_ok,
        pass: factors_ok && class_ok && equality_ok,
    })
}

/// scale · Σ sign·σ_s; the identity string must be among the terms.
pub fn pauli_sum_state(terms: &[(f64, PauliString)], scale: f64) -> Result<DensityMatrix> {
    let n = terms.first().map(|(_, s)| s.n()).ok_or(Error::MissingIdentityTerm)?;
    if !terms.iter().any(|(_, s)| s.is_identity()) {
        return Err(Error::MissingIdentityTerm);
    }
    let d = 1usize << n;
    let mut m = CMat::zeros(d, d);
    for (sign, s) in terms {
        if s.n() != n {
            return Err(Error::DimensionMismatch(format!("{s} on {n} qubits")));
        }
        m += string_matrix(s) * C64::new(sign * scale, 0.0);
    }
    DensityMatrix::new(m)
}

/// Parses `"+IIII -XZII +XZZX"`-style signed term lists.
pub fn signed_terms(spec: &str) -> Result<Vec<(f64, PauliString)>> {
    spec.split_whitespace()
        .map(|t| {
            let (sign, body) = match t.as_bytes()[0] {
                b'-' => (-1.0, &t[1..]),
                b'+' => (1.0, &t[1..]),
                _ => (1.0, t),
            };
            Ok((sign, PauliString::parse(body)?))
        })
        .collect()
}

/// Single-qubit state (I + x X + y Y + z Z)/2.
pub fn qubit_state(x: f64, y: f64, z: f64) -> DensityMatrix {
    let m = CMat::from_row_slice(
        2,
        2,
        &[C64::new((1.0 + z) / 2.0, 0.0), C64::new(x / 2.0, -y / 2.0), C64::new(x / 2.0, y / 2.0), C64::new((1.0 - z) / 2.0, 0.0)],
    );
    DensityMatrix::new(m).expect("2x2")
}


/// Builds a component from (block, state) pairs in any order.
pub fn component(weight: f64, n: usize, mut parts: Vec<(Vec<usize>, DensityMatrix)>) -> Result<DecompComponent> {
    parts.sort_by_key(|(b, _)| b.iter().copied().min());
    let partition = Partition::new(n, parts.iter().map(|(b, _)| b.clone()).collect())?;
    DecompComponent::new(weight, partition, parts.into_iter().map(|(_, s)| s).collect())
}

fn single(p: Pauli, s: f64) -> DensityMatrix {
    match p {
        Pauli::X => qubit_state(s, 0.0, 0.0),
        Pauli::Y => qubit_state(0.0, s, 0.0),
        Pauli::Z => qubit_state(0.0, 0.0, s),
        Pauli::I => qubit_state(0.0, 0.0, 0.0),
    }
}

fn bloch_state(b: &BlochVector) -> DensityMatrix {
    qubit_state(b.x, b.y, b.z)
}

/// Resolves scale·Σ sign·σ_s into fully product states when every qubit
/// carries a single Pauli axis: the uniform mixture of Π (I + s_q σ_q)/2 over
/// all s ∈ {±1}^n matching every term's sign.
pub fn sign_resolved(terms: &[(f64, PauliString)], scale: f64) -> Result<SeparableDecomposition> {
    let target = pauli_sum_state(terms, scale)?;
    let n = target.n();
    let mut axis = vec![Pauli::I; n];
    for (_, s) in terms {
        for q in 1..=n {
            let p = s.get(q);
            if p != Pauli::I {
                if axis[q - 1] != Pauli::I && axis[q - 1] != p {
                    return Err(Error::Input(format!("qubit {q} carries both {} and {}", axis[q - 1].symbol(), p.symbol())));
                }
                axis[q - 1] = p;
            }
        }
    }
    let solutions: Vec<u32> = (0..1u32 << n)
        .filter(|bits| {
            terms.iter().filter(|(_, s)| !s.is_identity()).all(|(sign, s)| {
                let prod: f64 = (1..=n)
                    .filter(|&q| s.get(q) != Pauli::I)
                    .map(|q| if bits >> (q - 1) & 1 == 1 { -1.0 } else { 1.0 })
                    .product();
                prod == sign.signum()
            })
        })
        .collect();
    if solutions.is_empty() {
        return Err(Error::ConstructionFailure { residual: 1.0, reason: "no sign assignment".into() });
    }
    let w = 1.0 / solutions.len() as f64;
    let axis: Vec<Pauli> = axis.into_iter().map(|p| if p == Pauli::I { Pauli::Z } else { p }).collect();
    let comps = solutions
        .iter()
        .map(|bits| {
            let states = (1..=n).map(|q| single(axis[q - 1], if bits >> (q - 1) & 1 == 1 { -1.0 } else { 1.0 })).collect();
            DecompComponent::new(w, Partition::full_split(n), states)
        })
        .collect::<Result<Vec<_>>>()?;
    let d = SeparableDecomposition::new(comps);
    let err = max_abs_diff(&d.matrix().expect("nonempty"), target.matrix());
    if err > 1e-12 {
        return Err(Error::ConstructionFailure { residual: err, reason: "sign mixture differs from the bracket".into() });
    }
    Ok(d)
}

/// (1/16)[IIII + ZZ + C ⊗ σ_kσ_l] with ZZ and C on `pair`:
/// ½ ρ₊ ⊗ (II + σσ)/4 + ½ ρ₋ ⊗ (II − σσ)/4 with ρ± = (II + ZZ ± C)/4 and
/// (II ± σσ) = ½(I+σ)(I±σ) + ½(I−σ)(I∓σ).
fn pair_bracket(pair: [usize; 2], c: &str, singles: [(usize, Pauli); 2]) -> Result<SeparableDecomposition> {
    let mut out = Vec::new();
    for sc in [1.0, -1.0] {
        let mut terms = signed_terms("II ZZ")?;
        for (s, p) in signed_terms(c)? {
            terms.push((sc * s, p));
        }
        let rho = pauli_sum_state(&terms, 0.25)?;
        for sk in [1.0, -1.0] {
            let parts = vec![
                (pair.to_vec(), rho.clone()),
                (vec![singles[0].0], single(singles[0].1, sk)),
                (vec![singles[1].0], single(singles[1].1, sc * sk)),
            ];
            out.push(component(0.25, 4, parts)?);
        }
    }
    Ok(SeparableDecomposition::new(out))
}

fn ghz4_brackets() -> Result<Vec<SeparableDecomposition>> {
    use Pauli::{X, Y};
    Ok(vec![
        pair_bracket([1, 2], "XX -YY", [(3, X), (4, X)])?,
        pair_bracket([2, 4], "YY -XX", [(1, Y), (3, Y)])?,
        pair_bracket([1, 3], "-YX -XY", [(2, X), (4, Y)])?,
        pair_bracket([3, 4], "-YX -XY", [(1, X), (2, Y)])?,
        sign_resolved(&signed_terms("IIII ZIIZ IZZI ZZZZ")?, 1.0 / 16.0)?,
    ])
}

pub const CLUSTER_FULLSEP_BRACKETS: [&str; 9] = [
    "IIII +ZYYZ",
    "IIII +YXXY",
    "IIII -YXYZ",
    "IIII -ZYXY",
    "IIII +ZXZI +ZXIX +IIZX",
    "IIII +YYZI +YYIX +IIZX",
    "IIII +IZXZ +XIXZ +XZII",
    "IIII +IZYY +XIYY +XZII",
    "IIII -IIZX -XZII +XZZX",
];

/// Product state of `singles` with the pair block in the top eigenvector of
/// the cluster tri-separability witness reduced over the singles.
pub fn touching_component(weight: f64, p: &Partition, singles: &[(usize, BlochVector)]) -> Result<DecompComponent> {
    let q = named_witness("cluster4-trisep")?.spec;
    let red = reduced_pair_operator(&q, p, singles)?;
    let m = CMat::from_fn(4, 4, |r, c| red.entries[(r, c)]);
    let eig = hermitian_eigensystem(&m)?;
    let top = eig.eigenvalues[3];
    if top - eig.eigenvalues[2] < 1e-9 {
        return Err(Error::ConstructionFailure { residual: top - eig.eigenvalues[2], reason: "degenerate top eigenvalue".into() });
    }
    let pair_block = p.blocks().iter().find(|b| b.len() == 2).expect("checked by reduced_pair_operator").clone();
    let mut parts = vec![(pair_block, DensityMatrix::from_pure(&eig.max().1)?)];
    parts.extend(singles.iter().map(|(qb, b)| (vec![*qb], bloch_state(b))));
    component(weight, 4, parts)
}

fn odd_quarter_angles() -> [f64; 4] {
    [1.0, 3.0, 5.0, 7.0].map(|k| k * std::f64::consts::FRAC_PI_4)
}

fn yz(t: f64) -> BlochVector {
    BlochVector::new(0.0, t.sin(), t.cos())
}

fn xy(t: f64) -> BlochVector {
    BlochVector::new(t.cos(), t.sin(), 0.0)
}

/// Named pieces of the cluster tri-separable mixture: "rho0".."rho3",
/// "family-1|23|4", "family-14|2|3", "family-13|2|4", "family-1|24|3"
/// (θ-averaged touching families) and "varrho5".."varrho8".
pub fn cluster_trisep_piece(name: &str) -> Result<SeparableDecomposition> {
    let part = |s: &str| Partition::parse(s, 4);
    let family = |p: &str, fa: fn(f64) -> BlochVector, qa: usize, fb: fn(f64) -> BlochVector, qb: usize| {
        let p = part(p)?;
        let mut comps = Vec::new();
        for ta in odd_quarter_angles() {
            for tb in odd_quarter_angles() {
                comps.push(touching_component(1.0 / 16.0, &p, &[(qa, fa(ta)), (qb, fb(tb))])?);
            }
        }
        Ok::<_, Error>(SeparableDecomposition::new(comps))
    };
    let half = |a: SeparableDecomposition, b: SeparableDecomposition| {
        let mut d = SeparableDecomposition::default();
        d.extend_scaled(&a, 0.5);
        d.extend_scaled(&b, 0.5);
        d
    };
    let ax = |x: f64, y: f64, z: f64| BlochVector::new(x, y, z);
    match name {
        "rho0" => {
            let p = part("1|23|4")?;
            let mut comps = Vec::new();
            for x1 in [1.0, -1.0] {
                for x4 in [1.0, -1.0] {
                    comps.push(touching_component(0.25, &p, &[(1, ax(x1, 0.0, 0.0)), (4, ax(x4, 0.0, 0.0))])?);
                }
            }
            Ok(SeparableDecomposition::new(comps))
        }
        "family-1|23|4" => family("1|23|4", yz, 1, yz, 4),
        "family-14|2|3" => family("14|2|3", xy, 2, xy, 3),
        "family-13|2|4" => family("13|2|4", xy, 2, yz, 4),
        "family-1|24|3" => family("1|24|3", yz, 1, xy, 3),
        "rho1" => Ok(half(cluster_trisep_piece("family-1|23|4")?, cluster_trisep_piece("family-14|2|3")?)),
        "varrho5" | "varrho6" => {
            let (p, a, b) = if name == "varrho5" { ("12|3|4", 3, 4) } else { ("1|2|34", 2, 1) };
            let p = part(p)?;
            let comps = [1.0, -1.0]
                .iter()
                .map(|&s| touching_component(0.5, &p, &[(a, ax(0.0, 0.0, s)), (b, ax(s, 0.0, 0.0))]))
                .collect::<Result<Vec<_>>>()?;
            Ok(SeparableDecomposition::new(comps))
        }
        "varrho7" | "varrho8" => {
            let (p, a, b) = if name == "varrho7" { ("12|3|4", 3, 4) } else { ("1|2|34", 2, 1) };
            let p = part(p)?;
            let mut comps = Vec::new();
            for t in odd_quarter_angles() {
                for s in [1.0, -1.0] {
                    let sb = ax(0.0, s * t.cos(), -s * t.sin());
                    comps.push(touching_component(1.0 / 8.0, &p, &[(a, xy(t)), (b, sb)])?);
                }
            }
            Ok(SeparableDecomposition::new(comps))
        }
        "rho2" => Ok(half(cluster_trisep_piece("varrho5")?, cluster_trisep_piece("varrho6")?)),
        "rho3" => Ok(half(cluster_trisep_piece("varrho7")?, cluster_trisep_piece("varrho8")?)),
        other => Err(Error::UnknownId(other.into())),
    }
}

#[derive(Clone, Debug)]
pub struct Builtin {
    pub id: String,
    pub decomposition: SeparableDecomposition,
    pub target: DensityMatrix,
    pub class: SeparabilityClass,
    /// Named groups and their weights before product resolution.
    pub groups: Vec<(String, f64)>,
}

pub const BUILTIN_IDS: [&str; 3] = ["ghz4-trisep", "cluster4-fullsep", "cluster4-trisep"];

pub fn builtin_decomposition(id: &str) -> Result<Builtin> {
    let mut d = SeparableDecomposition::default();
    let mut groups = Vec::new();
    let (state, p, class) = match id {
        "ghz4-trisep" => {
            for (k, b) in ghz4_brackets()?.iter().enumerate() {
                d.extend_scaled(b, 0.2);
                groups.push((format!("bracket{}", k + 1), 0.2));
            }
            ("ghz4", 0.2, SeparabilityClass::with_parts(4, 3)?)
        }
        "cluster4-fullsep" => {
            for (k, b) in CLUSTER_FULLSEP_BRACKETS.iter().enumerate() {
                d.extend_scaled(&sign_resolved(&signed_terms(b)?, 1.0 / 16.0)?, 1.0 / 9.0);
                groups.push((format!("bracket{}", k + 1), 1.0 / 9.0));
            }
            ("cluster4", 1.0 / 9.0, SeparabilityClass::full(4))
        }
        "cluster4-trisep" => {
            for (name, w) in [("rho0", 1.0), ("rho1", 12.0), ("rho2", 4.0), ("rho3", 4.0)] {
                d.extend_scaled(&cluster_trisep_piece(name)?, w / 21.0);
                groups.push((name.to_string(), w / 21.0));
            }
            ("cluster4", 5.0 / 21.0, SeparabilityClass::with_parts(4, 3)?)
        }
        other => return Err(Error::UnknownId(other.into())),
    };
    Ok(Builtin { id: id.into(), decomposition: d, target: noisy_mix(&named_pure_state(state)?, p)?, class, groups })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn maximally_mixed_from_singles() {
        let p = Partition::full_split(3);
        let half = DensityMatrix::maximally_mixed(1);
        let d = SeparableDecomposition::new(vec![DecompComponent::new(1.0, p, vec![half.clone(); 3]).unwrap()]);
        let rep = verify_decomposition(&d, &DensityMatrix::maximally_mixed(3), &SeparabilityClass::full(3), 1e-12).unwrap();
        assert!(rep.pass);
    }

    #[test]
    fn product_matrix_places_noncontiguous_blocks() {
        // |0> on qubit 2, |1> on qubits 1 and 3 via a pair block {1,3}
        let p = Partition::parse("13|2", 3).unwrap();
        let mut pair = CMat::zeros(4, 4);
        pair[(3, 3)] = C64::new(1.0, 0.0);
        let c = DecompComponent::new(1.0, p, vec![DensityMatrix::new(pair).unwrap(), qubit_state(0.0, 0.0, 1.0)]).unwrap();
        let m = c.product_matrix();
        assert!((m[(0b101, 0b101)].re - 1.0).abs() < 1e-15);
        assert!((m.trace().re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn bracket_needs_identity() {
        assert!(matches!(pauli_sum_state(&signed_terms("XXX").unwrap(), 0.125), Err(Error::MissingIdentityTerm)));
        let v = pauli_sum_state(&signed_terms("III +XXX").unwrap(), 0.125).unwrap();
        assert!((v.matrix()[(0, 7)].re - 0.125).abs() < 1e-15);
        let mixed = pauli_sum_state(&signed_terms("IIII").unwrap(), 1.0 / 16.0).unwrap();
        assert!(mixed.max_abs_diff(&DensityMatrix::maximally_mixed(4)) < 1e-15);
    }

    fn pauli_close(d: &SeparableDecomposition, terms: &str, scale: f64) -> f64 {
        let want = pauli_sum_state(&signed_terms(terms).unwrap(), scale).unwrap();
        max_abs_diff(&d.matrix().unwrap(), want.matrix())
    }

    #[test]
    fn sign_bracket_has_eight_solutions() {
        let d = sign_resolved(&signed_terms("IIII ZYYZ").unwrap(), 1.0 / 16.0).unwrap();
        assert_eq!(d.components.len(), 8);
        assert!(sign_resolved(&signed_terms("II XI ZI").unwrap(), 0.25).is_err());
    }

    #[test]
    fn xx_identity() {
        for sign in [1.0, -1.0] {
            let lhs = pauli_sum_state(&[(1.0, PauliString::parse("II").unwrap()), (sign, PauliString::parse("XX").unwrap())], 0.25).unwrap();
            let d = sign_resolved(&[(1.0, PauliString::parse("II").unwrap()), (sign, PauliString::parse("XX").unwrap())], 0.25).unwrap();
            assert_eq!(d.components.len(), 2);
            assert!(max_abs_diff(&d.matrix().unwrap(), lhs.matrix()) < 1e-15);
        }
    }

    #[test]
    fn builtins_verify() {
        for id in BUILTIN_IDS {
            let b = builtin_decomposition(id).unwrap();
            let rep = verify_decomposition(&b.decomposition, &b.target, &b.class, 1e-12).unwrap();
            assert!(rep.pass, "{id}: {rep:?}");
        }
    }

    #[test]
    fn ghz4_bracket_partitions() {
        let b = builtin_decomposition("ghz4-trisep").unwrap();
        let mut got: Vec<String> = b.decomposition.partitions().iter().map(|p| p.to_string()).collect();
        got.sort();
        let mut want = vec!["12|3|4", "13|2|4", "1|24|3", "1|2|34", "1|2|3|4"];
        want.sort();
        assert_eq!(got, want);
    }

    #[test]
    fn cluster_trisep_groups() {
        let b = builtin_decomposition("cluster4-trisep").unwrap();
        let w: Vec<f64> = b.groups.iter().map(|g| g.1 * 21.0).collect();
        assert_eq!(w, vec![1.0, 12.0, 4.0, 4.0]);
        let rep = verify_decomposition(&b.decomposition, &noisy_mix(&named_pure_state("cluster4").unwrap(), 0.3).unwrap(), &b.class, 1e-12).unwrap();
        assert!(!rep.equality_ok && rep.max_abs_error > 1e-3);
    }

    #[test]
    fn cluster_pieces_closed_forms() {
        let xi = "IIII YXXY -YXYZ ZYYZ -ZYXY";
        let close = |name: &str, extra: &str| {
            let d = cluster_trisep_piece(name).unwrap();
            let mut terms = signed_terms("IIII").unwrap();
            terms[0].0 = 4.0;
            for (s, p) in signed_terms(&xi[5..]).unwrap() {
                terms.push((s, p));
            }
            for (s, p) in signed_terms(extra).unwrap() {
                terms.push((2.0 * s, p));
            }
            let want = pauli_sum_state(&terms, 1.0 / 64.0).unwrap();
            max_abs_diff(&d.matrix().unwrap(), want.matrix())
        };
        assert!(close("family-1|23|4", "IZXZ IZYY YYZI ZXZI") < 1e-12);
        assert!(close("family-14|2|3", "XIXZ XIYY YYIX ZXIX") < 1e-12);
        assert!(close("family-13|2|4", "ZXZI XIYY YYZI XIXZ") < 1e-12);
        assert!(close("family-1|24|3", "IZXZ YYIX IZYY ZXIX") < 1e-12);
        let r1 = cluster_trisep_piece("rho1").unwrap().matrix().unwrap();
        let mut alt = SeparableDecomposition::default();
        alt.extend_scaled(&cluster_trisep_piece("family-13|2|4").unwrap(), 0.5);
        alt.extend_scaled(&cluster_trisep_piece("family-1|24|3").unwrap(), 0.5);
        assert!(max_abs_diff(&r1, &alt.matrix().unwrap()) < 1e-12);

        let d = cluster_trisep_piece("rho0").unwrap();
        assert!(pauli_close(&d, "IIII -XZII -IIZX XZZX", 1.0 / 16.0) < 1e-12);
        let d = cluster_trisep_piece("varrho5").unwrap();
        assert!(pauli_close(&d, "IIII XZII IIZX XZZX ZXZI YYZI ZXIX YYIX", 1.0 / 16.0) < 1e-12);
        let d = cluster_trisep_piece("varrho6").unwrap();
        assert!(pauli_close(&d, "IIII XZII IIZX XZZX IZXZ IZYY XIXZ XIYY", 1.0 / 16.0) < 1e-12);
    }

    #[test]
    fn varrho7_normalization() {
        // (1/16)(II+XZ)II + (1/32)(YX-ZY)(XY-YZ)
        let want = "2IIII 2XZII YXXY -YXYZ -ZYXY ZYYZ";
        let terms: Vec<(f64, PauliString)> = want
            .split_whitespace()
            .map(|t| {
                let (k, body) = if let Some(b) = t.strip_prefix('2') { (2.0, b) } else { (1.0, t) };
                let (s, body) = if let Some(b) = body.strip_prefix('-') { (-1.0, b) } else { (1.0, body) };
                (k * s, PauliString::parse(body).unwrap())
            })
            .collect();
        let want = pauli_sum_state(&terms, 1.0 / 32.0).unwrap();
        let d = cluster_trisep_piece("varrho7").unwrap();
        assert!(max_abs_diff(&d.matrix().unwrap(), want.matrix()) < 1e-12);
        let d8 = cluster_trisep_piece("varrho8").unwrap();
        assert!(pauli_close(&d8, "IIII IIZX", 1.0 / 16.0) > 1e-3);
    }
}
