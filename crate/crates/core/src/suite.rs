//! Reproduction suite: every acceptance check with measured and reference
//! values.

use std::f64::consts::SQRT_2;

use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::bank::{factorized_roots, named_witness_variant, normal_form_13_2_4, t_value, trisep_eigen_scan, verify_bound, VerifyOptions, BANK_IDS};
use crate::bloch::{max_over_class, matched_witness_search, noise_threshold, rational_threshold, OptimizerOptions, SearchOptions};
use crate::decomp::{builtin_decomposition, verify_decomposition, BUILTIN_IDS};
use crate::graph::{named_pure_state, noisy_mix};
use crate::pauli::{char_from_density, density_from_char, hermitian_eigensystem, CMat, DensityMatrix, Partition, PauliString, SeparabilityClass, C64};
use crate::xstate::{case_ii_bound, decompose_xstate, gm_closed_form, gm_oracle, theorem1_evaluate, theorem2_verdict, CaseIIParams, XState, XWitnessParams};

/// Strings of the GHZ4 matched-witness search support.
pub const GHZ4_SUPPORT: [&str; 9] = ["XXXX", "YYYY", "ZZZZ", "XXYY", "XYXY", "XYYX", "YXXY", "YXYX", "YYXX"];

#[derive(Clone, Debug, PartialEq)]
pub struct SuiteOptions {
    pub resolution: usize,
    pub starts: usize,
    pub seed: u64,
    /// Use the mirror-symmetric cluster tri-sep witness.
    pub repair: bool,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        SuiteOptions { resolution: 48, starts: 32, seed: 0, repair: true }
    }
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct CheckRow {
    pub criterion: u8,
    pub check: String,
    pub measured: String,
    pub expected: String,
    pub tolerance: String,
    pub pass: bool,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct SuiteReport {
    pub resolution: usize,
    pub starts: usize,
    pub seed: u64,
    pub repair: bool,
    pub rows: Vec<CheckRow>,
    pub pass: bool,
}

impl SuiteReport {
    pub fn criterion_pass(&self, c: u8) -> bool {
        let rows: Vec<&CheckRow> = self.rows.iter().filter(|r| r.criterion == c).collect();
        !rows.is_empty() && rows.iter().all(|r| r.pass)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data serializes")
    }

    pub fn to_table(&self) -> String {
        let mut out = format!(
            "{:<3} {:<44} {:<26} {:<18} {:<10} {}\n",
            "#", "check", "measured", "expected", "tol", "status"
        );
        for r in &self.rows {
            out.push_str(&format!(
                "{:<3} {:<44} {:<26} {:<18} {:<10} {}\n",
                r.criterion,
                r.check,
                r.measured,
                r.expected,
                r.tolerance,
                if r.pass { "PASS" } else { "FAIL" }
            ));
            for n in &r.notes {
                out.push_str(&format!("      {n}\n"));
            }
        }
        out.push_str(if self.pass { "all checks pass\n" } else { "some checks FAIL\n" });
        out
    }
}

struct Rows(Vec<CheckRow>);

impl Rows {
    fn push(&mut self, criterion: u8, check: impl Into<String>, measured: String, expected: impl Into<String>, tol: &str, pass: bool) -> &mut CheckRow {
        self.0.push(CheckRow {
            criterion,
            check: check.into(),
            measured,
            expected: expected.into(),
            tolerance: tol.into(),
            pass,
            notes: Vec::new(),
        });
        self.0.last_mut().expect("just pushed")
    }

    fn error(&mut self, criterion: u8, check: impl Into<String>, e: impl std::fmt::Display) {
        self.push(criterion, check, "error".into(), "-", "-", false).notes.push(e.to_string());
    }
}

fn optimizer(opts: &SuiteOptions) -> OptimizerOptions {
    OptimizerOptions { starts: opts.starts, seed: opts.seed, ..OptimizerOptions::default() }
}

const BANK_BOUNDS: [f64; 3] = [2.0, 2.0, 5.0];
const BANK_THRESHOLDS: [(i64, i64); 3] = [(1, 5), (1, 9), (5, 21)];
const BANK_INNERS: [f64; 3] = [10.0, 18.0, 21.0];
const BANK_STATES: [&str; 3] = ["ghz4", "cluster4", "cluster4"];

fn bounds_and_thresholds(opts: &SuiteOptions, rows: &mut Rows) {
    let vopts = VerifyOptions { optimizer: optimizer(opts), resolution: opts.resolution, ..VerifyOptions::default() };
    for (k, id) in BANK_IDS.iter().enumerate() {
        let w = match named_witness_variant(id, opts.repair) {
            Ok(w) => w,
            Err(e) => return rows.error(1, *id, e),
        };
        let rep = match verify_bound(&w, &vopts, &[]) {
            Ok(r) => r,
            Err(e) => return rows.error(1, format!("{id} bound"), e),
        };
        let optimizer_ok = (rep.bound - BANK_BOUNDS[k]).abs() <= 1e-6 && rep.optimizer_pass;
        let row = rows.push(1, format!("{id} bound"), format!("{:.9}", rep.bound), format!("{}", BANK_BOUNDS[k]), "1e-6", optimizer_ok && rep.pass());
        if *id == "cluster4-trisep" {
            for (p, v) in &rep.per_partition {
                row.notes.push(format!("{p}: {v:.9}"));
            }
        }
        let worst = rep.oracle.iter().map(|o| o.2).fold(f64::INFINITY, f64::min);
        let res = rep.oracle.iter().map(|o| o.1).collect::<Vec<_>>();
        row.notes.push(format!("grid oracle min {worst:.6} (gap allowance 5e-3, resolutions {res:?}){}", if rep.oracle_pass { "" } else { " DEGRADED" }));
        if opts.resolution < 48 {
            row.notes.push(format!("resolution {} is below 48: the 5e-3 gap allowance is not guaranteed", opts.resolution));
        }
        if !rep.converged {
            row.notes.push("optimizer reported a start without convergence".into());
        }
        if !rep.closed_form.is_empty() {
            let cf = rep.closed_form.iter().map(|c| c.1).fold(f64::NEG_INFINITY, f64::max);
            row.notes.push(format!("closed-form candidates max {cf:.9}"));
        }

        let pure = match named_pure_state(BANK_STATES[k]).and_then(|r| char_from_density(&r)) {
            Ok(r) => r,
            Err(e) => return rows.error(2, *id, e),
        };
        let inner = w.spec.inner(&pure);
        rows.push(2, format!("{id} inner product"), format!("{inner:.12}"), format!("{}", BANK_INNERS[k]), "1e-9", (inner - BANK_INNERS[k]).abs() <= 1e-9);
        let expected = Ratio::new(BANK_THRESHOLDS[k].0, BANK_THRESHOLDS[k].1);
        match rational_threshold(rep.bound, inner) {
            Ok(t) => {
                rows.push(2, format!("{id} threshold"), t.to_string(), expected.to_string(), "exact", t == expected);
            }
            Err(e) => rows.error(2, format!("{id} threshold"), e),
        }
    }
}

fn decompositions(rows: &mut Rows) {
    for id in BUILTIN_IDS {
        match builtin_decomposition(id).and_then(|b| verify_decomposition(&b.decomposition, &b.target, &b.class, 1e-12)) {
            Ok(r) => {
                let ok = r.pass && r.max_abs_error <= 1e-12 && r.min_factor_eigenvalue >= -1e-12;
                rows.push(3, format!("{id} decomposition"), format!("{:.3e}", r.max_abs_error), "0", "1e-12", ok)
                    .notes
                    .push(format!("min factor eigenvalue {:.3e}, class ok {}", r.min_factor_eigenvalue, r.class_ok));
            }
            Err(e) => rows.error(3, format!("{id} decomposition"), e),
        }
    }
}

fn lemma(opts: &SuiteOptions, rows: &mut Rows) {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0x4c31);
    let mut worst: f64 = 0.0;
    let mut failure = None;
    for _ in 0..500 {
        let p = XWitnessParams::new([0; 4].map(|_| rng.random_range(-2.0..2.0)));
        match gm_oracle(&p, opts.resolution) {
            Ok(o) => worst = worst.max((gm_closed_form(&p).value - o).abs()),
            Err(e) => {
                failure = Some(format!("degraded: {e}"));
                break;
            }
        }
    }
    match failure {
        None => {
            rows.push(4, "closed form vs oracle, 500 draws", format!("{worst:.3e}"), "0", "1e-6", worst <= 1e-6);
        }
        Some(e) => rows.error(4, "closed form vs oracle, 500 draws", e),
    }
    for (m, want, label) in [([1.0; 4], SQRT_2, "sqrt 2"), ([2.0, 1.0, 1.0, 1.0], 2.0, "2")] {
        let v = gm_closed_form(&XWitnessParams::new(m)).value;
        rows.push(4, format!("g_m{m:?}"), format!("{v:.12}"), label, "1e-6", (v - want).abs() <= 1e-6);
    }
}

fn theorem1(rows: &mut Rows) {
    for (anti, want, label) in [([0.125; 4], 1.0, "1"), ([0.125, 0.125, 0.125, -0.125], SQRT_2, "sqrt 2")] {
        match XState::new([0.125; 8], anti) {
            Ok(x) => {
                let c = theorem1_evaluate(&x);
                let parity = if anti.iter().filter(|v| **v < 0.0).count() % 2 == 0 { "even" } else { "odd" };
                rows.push(5, format!("Rvalue at {parity} vertex"), format!("{:.15}", c.rvalue), label, "1e-12", (c.rvalue - want).abs() <= 1e-12)
                    .notes
                    .push(format!("branch {}, verdict {:?}", c.branch.name(), theorem2_verdict(&x).verdict));
            }
            Err(e) => rows.error(5, "vertex state", e),
        }
    }
}

fn ghz3(rows: &mut Rows) {
    let margin = |p: f64| XState::noisy_ghz3(p).map(|x| theorem2_verdict(&x).margin);
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        match margin(mid) {
            Ok(m) if m >= 0.0 => lo = mid,
            Ok(_) => hi = mid,
            Err(e) => return rows.error(6, "noisy GHZ3 boundary", e),
        }
    }
    let p = 0.5 * (lo + hi);
    rows.push(6, "noisy GHZ3 boundary", format!("{p:.12}"), "0.2", "1e-9", (p - 0.2).abs() <= 1e-9);
    for p in [0.15, 0.19] {
        match XState::noisy_ghz3(p).and_then(|x| decompose_xstate(&x)) {
            Ok(d) => {
                rows.push(6, format!("decompose noisy GHZ3 p = {p}"), format!("{:.3e}", d.residual), "0", "1e-9", d.residual <= 1e-9)
                    .notes
                    .push(format!("{} product components", d.decomposition.components.len()));
            }
            Err(e) => rows.error(6, format!("decompose noisy GHZ3 p = {p}"), e),
        }
    }
}

fn eigen_structure(opts: &SuiteOptions, rows: &mut Rows) {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0x6531);
    let mut worst: f64 = 0.0;
    let mut lambda_m: f64 = f64::NEG_INFINITY;
    for _ in 0..1000 {
        let (z2, x4): (f64, f64) = (rng.random_range(-1.0..=1.0), rng.random_range(-1.0..=1.0));
        let nf = normal_form_13_2_4(z2, x4);
        let m = CMat::from_fn(4, 4, |r, c| C64::new(nf[r][c], 0.0));
        let mut ev = match hermitian_eigensystem(&m) {
            Ok(e) => e.eigenvalues,
            Err(e) => return rows.error(7, "eigenequation roots", e),
        };
        ev.sort_by(f64::total_cmp);
        let roots = factorized_roots(t_value(z2, x4));
        worst = ev.iter().zip(roots).map(|(a, b)| (a - b).abs()).fold(worst, f64::max);
        lambda_m = lambda_m.max(roots[3]);
    }
    rows.push(7, "eigenvalues vs factorized roots, 1000 points", format!("{worst:.3e}"), "0", "1e-9", worst <= 1e-9);
    rows.push(7, "lambda_m over the square", format!("{lambda_m:.12}"), "<= 5", "0", lambda_m <= 5.0);
    let q = match named_witness_variant("cluster4-trisep", opts.repair) {
        Ok(w) => w.spec,
        Err(e) => return rows.error(7, "eigen scan", e),
    };
    for p in ["12|3|4", "13|2|4", "14|2|3", "1|23|4"] {
        match Partition::parse(p, 4).and_then(|part| trisep_eigen_scan(&q, &part, opts.resolution)) {
            Ok(s) => {
                let row = rows.push(7, format!("eigen scan {p}"), format!("{:.9}", s.refined_max), "5", "1e-6", (s.refined_max - 5.0).abs() <= 1e-6);
                row.notes.push(format!("grid max {:.9}, closed form {:.9}", s.grid_max, s.closed_form_max));
                if !s.conditions.is_empty() {
                    row.notes.push(format!("achieved at {}", s.conditions.join("; ")));
                }
            }
            Err(e) => rows.error(7, format!("eigen scan {p}"), e),
        }
    }
}

fn appendix_b(opts: &SuiteOptions, rows: &mut Rows) {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0x4142);
    let (mut gap, mut stat, mut curv): (f64, f64, f64) = (0.0, 0.0, f64::NEG_INFINITY);
    for _ in 0..50 {
        let m: [f64; 3] = [0; 3].map(|_| rng.random_range(-1.0..=1.0));
        let m0 = -10.0 * (1.0 + m.iter().map(|v| v.abs()).sum::<f64>());
        match case_ii_bound(&CaseIIParams::new(m0, m[0], m[1], m[2]), 200) {
            Ok(r) => {
                gap = gap.max((r.bound + m0).abs());
                stat = stat.max(r.stationarity);
                curv = curv.max(r.second_derivative);
            }
            Err(e) => return rows.error(8, "case (ii) draws", e),
        }
    }
    rows.push(8, "max F2 vs -M0, 50 draws", format!("{gap:.3e}"), "0", "1e-6", gap <= 1e-6);
    rows.push(8, "stationarity at x0", format!("{stat:.3e}"), "0", "1e-4", stat <= 1e-4);
    rows.push(8, "largest curvature at x0", format!("{curv:.6}"), "< 0", "0", curv < 0.0);
}

fn ghz4_search(opts: &SuiteOptions, rows: &mut Rows) {
    let support: Vec<PauliString> = GHZ4_SUPPORT.iter().map(|s| PauliString::parse(s).expect("valid literal")).collect();
    let class = SeparabilityClass::with_parts(4, 3).expect("tri class");
    let sopts = SearchOptions {
        seed: opts.seed,
        optimizer: OptimizerOptions { starts: 8, seed: opts.seed, ..OptimizerOptions::default() },
        final_optimizer: optimizer(opts),
        ..SearchOptions::default()
    };
    for (p, entangled) in [(0.25, true), (0.19, false)] {
        let r = named_pure_state("ghz4").and_then(|g| noisy_mix(&g, p)).and_then(|rho| char_from_density(&rho));
        match r.and_then(|r| matched_witness_search(&r, &support, &class, &sopts)) {
            Ok(w) => {
                let ok = if entangled { w.p < 1.0 } else { w.p >= 1.0 };
                rows.push(9, format!("matched search p = {p}"), format!("{:.6}", w.p), if entangled { "< 1" } else { ">= 1" }, "0", ok)
                    .notes
                    .push(format!("bound {:.6}, inner {:.6}", w.bound, w.inner));
            }
            Err(e) => rows.error(9, format!("matched search p = {p}"), e),
        }
    }
}

/// Random mixed state from a complex Gaussian matrix.
pub fn random_state(n: usize, rng: &mut impl Rng) -> DensityMatrix {
    let d = 1usize << n;
    let g = CMat::from_fn(d, d, |_, _| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)));
    let m = &g * g.adjoint();
    let tr = m.trace().re;
    DensityMatrix::new(m / C64::new(tr, 0.0)).expect("Gram matrix is a state")
}

fn properties(opts: &SuiteOptions, rows: &mut Rows) {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0x5072);
    let mut worst: f64 = 0.0;
    for k in 0..40 {
        let rho = random_state(1 + k % 4, &mut rng);
        match char_from_density(&rho) {
            Ok(r) => worst = worst.max(density_from_char(&r).max_abs_diff(&rho)),
            Err(e) => return rows.error(10, "char round trip", e),
        }
    }
    rows.push(10, "char round trip, 40 random states", format!("{worst:.3e}"), "0", "1e-12", worst <= 1e-12);

    let w = match named_witness_variant("ghz4-trisep", true) {
        Ok(w) => w,
        Err(e) => return rows.error(10, "bank witness", e),
    };
    let o = optimizer(opts);
    let classes = [
        ("1|2|3|4", SeparabilityClass::full(4)),
        ("12|3|4", SeparabilityClass::single(Partition::parse("12|3|4", 4).expect("literal"))),
        ("tri", SeparabilityClass::with_parts(4, 3).expect("tri")),
    ];
    let mut bounds = Vec::new();
    for (label, c) in &classes {
        match max_over_class(&w.spec, c, &o) {
            Ok(b) => bounds.push((*label, b.bound)),
            Err(e) => return rows.error(10, "class monotonicity", e),
        }
    }
    let mono = bounds.windows(2).all(|p| p[0].1 <= p[1].1 + 1e-9);
    let shown: Vec<String> = bounds.iter().map(|(l, b)| format!("{l} {b:.6}")).collect();
    rows.push(10, "bound monotone in class", shown.join(", "), "non-decreasing", "1e-9", mono);

    let pure = match named_pure_state("ghz4").and_then(|r| char_from_density(&r)) {
        Ok(r) => r,
        Err(e) => return rows.error(10, "scale invariance", e),
    };
    let mut worst: f64 = 0.0;
    let mut exact = true;
    let base = match noise_threshold(&w.spec, &pure, &w.class, &o) {
        Ok(t) => t,
        Err(e) => return rows.error(10, "scale invariance", e),
    };
    for c in [0.5, 3.0, 7.25] {
        match noise_threshold(&w.spec.scaled(c), &pure, &w.class, &o) {
            Ok(t) => worst = worst.max((t - base).abs()),
            Err(e) => return rows.error(10, "scale invariance", e),
        }
    }
    for c in [2.0, 3.0] {
        let s = w.spec.scaled(c);
        let t = max_over_class(&s, &w.class, &o).and_then(|b| rational_threshold(b.bound, s.inner(&pure)));
        exact &= t.is_ok_and(|t| t == Ratio::new(1, 5));
    }
    rows.push(10, "threshold scale invariance", format!("{worst:.3e}"), "0", "1e-12", worst <= 1e-12 && exact);

    let a = max_over_class(&w.spec, &w.class, &o);
    let b = max_over_class(&w.spec, &w.class, &o);
    let same = match (&a, &b) {
        (Ok(a), Ok(b)) => a.bound.to_bits() == b.bound.to_bits() && a.argmax.to_string() == b.argmax.to_string(),
        _ => false,
    };
    rows.push(10, "repeat run bit-identical", format!("{same}"), "true", "exact", same);
}

pub fn paper_suite(opts: &SuiteOptions) -> SuiteReport {
    let mut rows = Rows(Vec::new());
    bounds_and_thresholds(opts, &mut rows);
    decompositions(&mut rows);
    lemma(opts, &mut rows);
    theorem1(&mut rows);
    ghz3(&mut rows);
    eigen_structure(opts, &mut rows);
    appendix_b(opts, &mut rows);
    ghz4_search(opts, &mut rows);
    properties(opts, &mut rows);
    let mut rows = rows.0;
    rows.sort_by_key(|r| r.criterion);
    let pass = (1..=10).all(|c| rows.iter().any(|r| r.criterion == c)) && rows.iter().all(|r| r.pass);
    SuiteReport { resolution: opts.resolution, starts: opts.starts, seed: opts.seed, repair: opts.repair, rows, pass }
}
