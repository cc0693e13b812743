//! Three-qubit X states with real anti-diagonal: closed-form maxima,
//! full-separability test and explicit separable decompositions.

use nalgebra::{Matrix3, Matrix4, Vector3, Vector4};

use crate::decomp::{qubit_state, verify_decomposition, DecompComponent, SeparableDecomposition};
use crate::error::{Error, Result};
use crate::pauli::{CMat, DensityMatrix, Partition, SeparabilityClass, C64};

const STATE_TOL: f64 = 1e-12;

/// Γ: diagonal −1, off-diagonal +1.
pub fn gamma() -> Matrix4<f64> {
    Matrix4::from_fn(|r, c| if r == c { -1.0 } else { 1.0 })
}

#[derive(Clone, Debug, PartialEq)]
pub struct XState {
    pub diag: [f64; 8],
    /// ρ07, ρ16, ρ25, ρ34
    pub anti: [f64; 4],
}

impl XState {
    pub fn new(diag: [f64; 8], anti: [f64; 4]) -> Result<Self> {
        let x = XState { diag, anti };
        x.validate()?;
        Ok(x)
    }

    pub fn validate(&self) -> Result<()> {
        if self.diag.iter().chain(&self.anti).any(|v| !v.is_finite()) {
            return Err(Error::Range("non-finite entry".into()));
        }
        if let Some(v) = self.diag.iter().find(|&&v| v < 0.0) {
            return Err(Error::Range(format!("negative diagonal entry {v}")));
        }
        let s: f64 = self.diag.iter().sum();
        if (s - 1.0).abs() > STATE_TOL {
            return Err(Error::Range(format!("diagonal sums to {s}")));
        }
        for i in 0..4 {
            let lim = (self.diag[i] * self.diag[7 - i]).sqrt();
            if self.anti[i].abs() > lim + STATE_TOL {
                return Err(Error::Range(format!("|ρ{}{}| = {} exceeds {lim}", i, 7 - i, self.anti[i].abs())));
            }
        }
        Ok(())
    }

    pub fn to_density(&self) -> DensityMatrix {
        let mut m = CMat::zeros(8, 8);
        for i in 0..8 {
            m[(i, i)] = C64::new(self.diag[i], 0.0);
        }
        for i in 0..4 {
            m[(i, 7 - i)] = C64::new(self.anti[i], 0.0);
            m[(7 - i, i)] = C64::new(self.anti[i], 0.0);
        }
        DensityMatrix::new(m).expect("8x8")
    }

    /// Reads an X state off an 8×8 matrix; entries outside the X pattern and
    /// imaginary anti-diagonal parts must vanish within `tol`.
    pub fn from_density(rho: &DensityMatrix, tol: f64) -> Result<Self> {
        if rho.n() != 3 {
            return Err(Error::DimensionMismatch(format!("X states have 3 qubits, got {}", rho.n())));
        }
        let m = rho.matrix();
        for r in 0..8 {
            for c in 0..8 {
                if r != c && r + c != 7 && m[(r, c)].norm() > tol {
                    return Err(Error::Input(format!("entry ({r},{c}) outside the X pattern")));
                }
            }
        }
        let mut diag = [0.0; 8];
        for (i, d) in diag.iter_mut().enumerate() {
            if m[(i, i)].im.abs() > tol {
                return Err(Error::NonHermitianInput(m[(i, i)].im.abs()));
            }
            *d = m[(i, i)].re;
        }
        let mut anti = [0.0; 4];
        for (i, a) in anti.iter_mut().enumerate() {
            let (u, l) = (m[(i, 7 - i)], m[(7 - i, i)]);
            if (u - l.conj()).norm() > tol {
                return Err(Error::NonHermitianInput((u - l.conj()).norm()));
            }
            if u.im.abs() > tol {
                return Err(Error::Input("complex anti-diagonal entries are unsupported".into()));
            }
            *a = u.re;
        }
        XState::new(diag, anti)
    }

    pub fn noisy_ghz3(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::Range(format!("p = {p} outside [0, 1]")));
        }
        let mut diag = [(1.0 - p) / 8.0; 8];
        diag[0] += p / 2.0;
        diag[7] += p / 2.0;
        XState::new(diag, [p / 2.0, 0.0, 0.0, 0.0])
    }
}

/// Nonzero characteristic values (R_111, R_122, R_212, R_221) of the
/// anti-diagonal sector, with 1 = X, 2 = Y.
pub fn xstate_char(x: &XState) -> [f64; 4] {
    anti_char(&x.anti)
}

fn anti_char(a: &[f64; 4]) -> [f64; 4] {
    [
        2.0 * (a[0] + a[1] + a[2] + a[3]),
        2.0 * (-a[0] + a[1] + a[2] - a[3]),
        2.0 * (-a[0] + a[1] - a[2] + a[3]),
        2.0 * (-a[0] - a[1] + a[2] + a[3]),
    ]
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Branch {
    FirstLine,
    MaxAbs,
}

impl Branch {
    pub fn name(self) -> &'static str {
        match self {
            Branch::FirstLine => "first-line",
            Branch::MaxAbs => "max-abs",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct XWitnessParams {
    pub m111: f64,
    pub m122: f64,
    pub m212: f64,
    pub m221: f64,
}

impl XWitnessParams {
    pub fn new(m: [f64; 4]) -> Self {
        XWitnessParams { m111: m[0], m122: m[1], m212: m[2], m221: m[3] }
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.m111, self.m122, self.m212, self.m221]
    }

    /// (δ, α, β, γ)
    pub fn dabg(&self) -> [f64; 4] {
        let v = gamma() * Vector4::from(self.as_array()) * 0.25;
        [v[0], v[1], v[2], v[3]]
    }

    pub fn q_vector(&self) -> [f64; 4] {
        let [d, a, b, g] = self.dabg();
        let v = gamma() * Vector4::new(a * b * g, d * b * g, d * a * g, d * a * b);
        [v[0], v[1], v[2], v[3]]
    }

    pub fn q(&self) -> f64 {
        self.q_vector().iter().product()
    }

    /// g(φ) = M111 c1c2c3 + M122 c1s2s3 + M212 s1c2s3 + M221 s1s2c3.
    pub fn g(&self, phi: &[f64; 3]) -> f64 {
        let (c, s): (Vec<f64>, Vec<f64>) = phi.iter().map(|p| (p.cos(), p.sin())).unzip();
        self.m111 * c[0] * c[1] * c[2]
            + self.m122 * c[0] * s[1] * s[2]
            + self.m212 * s[0] * c[1] * s[2]
            + self.m221 * s[0] * s[1] * c[2]
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GmResult {
    pub value: f64,
    pub branch: Branch,
    /// q = 0 within 1e-12 while δαβγ > 0: the inclusive boundary case.
    pub q_boundary: bool,
}

pub fn gm_closed_form(p: &XWitnessParams) -> GmResult {
    let m = p.as_array();
    let c1 = m.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    let [d, a, b, g] = p.dabg();
    let prod = d * a * b * g;
    let q = p.q();
    let scale = m.iter().fold(0.0f64, |acc, v| acc.max(v.abs())).powi(12).max(f64::MIN_POSITIVE);
    let q_boundary = prod > 0.0 && q.abs() <= 1e-12 * scale;
    if prod > 0.0 && q > 0.0 {
        let c2 = ((d * a + b * g) * (d * b + a * g) * (d * g + a * b) / prod).sqrt();
        if c2 > c1 {
            return GmResult { value: c2, branch: Branch::FirstLine, q_boundary };
        }
    }
    GmResult { value: c1, branch: Branch::MaxAbs, q_boundary }
}

// term patterns: false = cos, true = sin, per angle
const G_PATTERNS: [[bool; 3]; 4] = [[false, false, false], [false, true, true], [true, false, true], [true, true, false]];

fn trig(sin: bool, x: f64, order: u8) -> f64 {
    // d^k/dx^k of cos or sin
    let shift = if sin { 1 } else { 0 } + order;
    match shift % 4 {
        0 => x.cos(),
        1 => x.sin(),
        2 => -x.cos(),
        _ => -x.sin(),
    }
}

fn g_derivs(m: &[f64; 4], phi: &[f64; 3]) -> (f64, Vector3<f64>, Matrix3<f64>) {
    let mut val = 0.0;
    let mut grad = Vector3::zeros();
    let mut hess = Matrix3::zeros();
    for (t, pat) in G_PATTERNS.iter().enumerate() {
        let term = |o: [u8; 3]| -> f64 { (0..3).map(|i| trig(pat[i], phi[i], o[i])).product::<f64>() * m[t] };
        val += term([0, 0, 0]);
        for i in 0..3 {
            let mut o = [0u8; 3];
            o[i] = 1;
            grad[i] += term(o);
            for j in 0..3 {
                let mut o = [0u8; 3];
                o[i] += 1;
                o[j] += 1;
                hess[(i, j)] += term(o);
            }
        }
    }
    (val, grad, hess)
}

/// Exact coordinate ascent (each angle enters as A cosφ + B sinφ) followed by
/// Newton steps on the analytic Hessian.
fn ascend_g(p: &XWitnessParams, mut phi: [f64; 3]) -> (f64, [f64; 3]) {
    let m = p.as_array();
    let mut val = p.g(&phi);
    for _ in 0..5000 {
        for i in 0..3 {
            let mut pc = phi;
            pc[i] = 0.0;
            let a = p.g(&pc);
            pc[i] = std::f64::consts::FRAC_PI_2;
            let b = p.g(&pc);
            if a != 0.0 || b != 0.0 {
                phi[i] = b.atan2(a);
            }
        }
        let next = p.g(&phi);
        let done = (next - val).abs() <= 1e-15 * (1.0 + val.abs());
        val = next;
        if done {
            break;
        }
    }
    for _ in 0..50 {
        let (v, grad, hess) = g_derivs(&m, &phi);
        if grad.norm() < 1e-13 {
            break;
        }
        let Some(inv) = hess.try_inverse() else { break };
        let step = -(inv * grad);
        let cand = [phi[0] + step[0], phi[1] + step[1], phi[2] + step[2]];
        let cv = p.g(&cand);
        if cv + 1e-15 < v {
            break;
        }
        phi = cand;
        val = cv;
    }
    (val.max(p.g(&phi)), phi)
}

/// Ascent that leaves saddle points along the direction of positive
/// curvature. Coordinate ascent stops at points that are maximal in each
/// angle separately, which near q = 0 are saddles next to a narrow ridge.
fn refine_g(p: &XWitnessParams, phi: [f64; 3]) -> (f64, [f64; 3]) {
    let m = p.as_array();
    let (mut val, mut phi) = ascend_g(p, phi);
    for _ in 0..40 {
        let (_, _, hess) = g_derivs(&m, &phi);
        let eig = hess.symmetric_eigen();
        let (k, lam) = eig.eigenvalues.iter().enumerate().fold((0, f64::NEG_INFINITY), |b, (i, v)| if *v > b.1 { (i, *v) } else { b });
        if lam <= 1e-14 {
            break;
        }
        let dir = eig.eigenvectors.column(k);
        let mut best: Option<(f64, [f64; 3])> = None;
        for e in 1..=30 {
            let t = 0.5f64.powi(e);
            for sgn in [1.0, -1.0] {
                let cand = [phi[0] + sgn * t * dir[0], phi[1] + sgn * t * dir[1], phi[2] + sgn * t * dir[2]];
                let cv = p.g(&cand);
                if cv > val && best.is_none_or(|(bv, _)| cv > bv) {
                    best = Some((cv, cand));
                }
            }
        }
        let Some((_, start)) = best else { break };
        let (nv, np) = ascend_g(p, start);
        if nv <= val {
            break;
        }
        (val, phi) = (nv, np);
    }
    (val, phi)
}

/// Grid maximum of g over [0, 2π)³ refined from the discrete local maxima.
pub fn gm_oracle(p: &XWitnessParams, resolution: usize) -> Result<f64> {
    Ok(gm_oracle_detail(p, resolution)?.0)
}

/// (refined max, raw grid max)
pub fn gm_oracle_detail(p: &XWitnessParams, resolution: usize) -> Result<(f64, f64)> {
    if resolution < 16 {
        return Err(Error::Range(format!("resolution {resolution} < 16")));
    }
    let m = p.as_array();
    if m.iter().all(|v| *v == 0.0) {
        return Ok((0.0, 0.0));
    }
    let n = resolution;
    let step = 2.0 * std::f64::consts::PI / n as f64;
    let cs: Vec<(f64, f64)> = (0..n).map(|k| ((k as f64 * step).cos(), (k as f64 * step).sin())).collect();
    let slice = |i: usize| -> Vec<f64> {
        let (c1, s1) = cs[i];
        let mut out = Vec::with_capacity(n * n);
        for &(c2, s2) in &cs {
            let (a0, a1, a2, a3) = (m[0] * c1 * c2, m[1] * c1 * s2, m[2] * s1 * c2, m[3] * s1 * s2);
            for &(c3, s3) in &cs {
                out.push(a0 * c3 + a1 * s3 + a2 * s3 + a3 * c3);
            }
        }
        out
    };
    let first = slice(0);
    let mut prev = slice(n - 1);
    let mut cur = first.clone();
    let mut grid_max = f64::NEG_INFINITY;
    let mut seeds: Vec<(f64, [usize; 3])> = Vec::new();
    for i in 0..n {
        let next = if i + 1 == n { first.clone() } else { slice(i + 1) };
        for j in 0..n {
            for k in 0..n {
                let v = cur[j * n + k];
                grid_max = grid_max.max(v);
                let mut is_max = true;
                'nb: for (di, sl) in [(0usize, &prev), (1, &cur), (2, &next)] {
                    for dj in 0..3 {
                        for dk in 0..3 {
                            if di == 1 && dj == 1 && dk == 1 {
                                continue;
                            }
                            let jj = (j + n + dj - 1) % n;
                            let kk = (k + n + dk - 1) % n;
                            if sl[jj * n + kk] > v {
                                is_max = false;
                                break 'nb;
                            }
                        }
                    }
                }
                if is_max {
                    seeds.push((v, [i, j, k]));
                }
            }
        }
        prev = std::mem::replace(&mut cur, next);
    }
    seeds.sort_by(|a, b| b.0.total_cmp(&a.0));
    seeds.truncate(256);
    let mut best = grid_max;
    for (_, [i, j, k]) in seeds {
        let (v, _) = refine_g(p, [i as f64 * step, j as f64 * step, k as f64 * step]);
        best = best.max(v);
    }
    Ok((best, grid_max))
}

#[derive(Clone, Debug, PartialEq)]
pub struct Theorem1Certificate {
    /// R_111, R_122, R_212, R_221
    pub r_char: [f64; 4],
    pub q: f64,
    pub r_vector: [f64; 4],
    pub r: f64,
    pub rvalue: f64,
    pub branch: Branch,
}

pub fn theorem1_evaluate(x: &XState) -> Theorem1Certificate {
    rvalue_of_anti(&x.anti)
}

/// Theorem 1 certificate for anti-diagonal entries `a` alone.
pub fn rvalue_of_anti(a: &[f64; 4]) -> Theorem1Certificate {
    let rc = anti_char(a);
    let [r0, r1, r2, r3] = rc;
    let q = r0 * r1 * r2 * r3;
    let rv = gamma() * Vector4::new(r1 * r2 * r3, r0 * r2 * r3, r0 * r1 * r3, r0 * r1 * r2);
    let r_vector = [rv[0], rv[1], rv[2], rv[3]];
    let r: f64 = r_vector.iter().product();
    let max_abs = 8.0 * a.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    let (rvalue, branch) = if q > 0.0 && r > 0.0 {
        let first = ((r0 * r1 + r2 * r3) * (r0 * r2 + r1 * r3) * (r0 * r3 + r1 * r2) / q).sqrt();
        if first >= max_abs {
            (first, Branch::FirstLine)
        } else {
            (max_abs, Branch::MaxAbs)
        }
    } else {
        (max_abs, Branch::MaxAbs)
    };
    Theorem1Certificate { r_char: rc, q, r_vector, r, rvalue, branch }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Separable,
    Entangled,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Theorem2Verdict {
    pub verdict: Verdict,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub certificate: Theorem1Certificate,
}

/// Margins within this distance below zero count as the boundary.
pub const VERDICT_TOL: f64 = 1e-12;

pub fn theorem2_lhs(d: &[f64; 8]) -> f64 {
    let g1 = (d[0] * d[3] * d[5] * d[6]).powf(0.25);
    let g2 = (d[1] * d[2] * d[4] * d[7]).powf(0.25);
    (0..4).map(|i| (d[i] * d[7 - i]).sqrt()).fold(g1.min(g2), f64::min)
}

pub fn theorem2_verdict(x: &XState) -> Theorem2Verdict {
    let certificate = theorem1_evaluate(x);
    let lhs = theorem2_lhs(&x.diag);
    let rhs = certificate.rvalue / 8.0;
    let margin = lhs - rhs;
    let verdict = if margin >= -VERDICT_TOL { Verdict::Separable } else { Verdict::Entangled };
    Theorem2Verdict { verdict, lhs, rhs, margin, certificate }
}

/// Left side of the case (i) witness inequality; positive values detect entanglement.
pub fn case_i_violation(x: &XState, r: f64, eta: f64) -> f64 {
    let (d0, d7) = (x.diag[0], x.diag[7]);
    4.0 * eta.sin() * (d0 - d7) + r * eta.cos() - 4.0 * (d0 + d7)
}

/// max over η of [`case_i_violation`].
pub fn case_i_max(x: &XState, r: f64) -> f64 {
    let (d0, d7) = (x.diag[0], x.diag[7]);
    (16.0 * (d0 - d7).powi(2) + r * r).sqrt() - 4.0 * (d0 + d7)
}

pub fn hadamard4() -> Matrix4<f64> {
    Matrix4::new(1., 1., 1., 1., 1., -1., 1., -1., 1., 1., -1., -1., 1., -1., -1., 1.)
}

#[derive(Clone, Debug, PartialEq)]
pub struct CaseIIParams {
    pub m0: f64,
    pub m1: f64,
    pub m2: f64,
    pub m3: f64,
}

impl CaseIIParams {
    pub fn new(m0: f64, m1: f64, m2: f64, m3: f64) -> Self {
        CaseIIParams { m0, m1, m2, m3 }
    }

    pub fn m_vector(&self) -> [f64; 4] {
        let v = hadamard4() * Vector4::new(self.m0, self.m2, self.m1, self.m3) * -0.5;
        [v[0], v[1], v[2], v[3]]
    }

    pub fn gm(&self) -> f64 {
        self.m_vector().iter().product::<f64>().powf(0.25)
    }

    /// Weight multiplying s1 in e. The anti-diagonal sector contributes two
    /// Lemma 1 terms (B and B' orientations), hence 2·g_m.
    pub fn anti_weight(&self) -> f64 {
        2.0 * self.gm()
    }

    pub fn coefficients(&self, theta1: f64) -> F2Coefficients {
        let (c1, s1) = (theta1.cos(), theta1.sin());
        F2Coefficients {
            a: self.m1 * c1,
            b: self.m2 + self.m3 * c1,
            c: self.m3 + self.m2 * c1,
            d: self.m1 + self.m0 * c1,
            e: self.anti_weight() * s1.abs(),
        }
    }

    fn coefficients_x(&self, x: f64) -> F2Coefficients {
        F2Coefficients {
            a: self.m1 * x,
            b: self.m2 + self.m3 * x,
            c: self.m3 + self.m2 * x,
            d: self.m1 + self.m0 * x,
            e: self.anti_weight() * (1.0 - x * x).max(0.0).sqrt(),
        }
    }

    pub fn f2(&self, theta1: f64, theta2: f64) -> f64 {
        self.coefficients(theta1).f2(theta2)
    }

    /// (A, B) of the stationarity equation and its root x0 = cos θ1.
    pub fn stationary_point(&self) -> (f64, f64, f64) {
        let (m0, m1, m2, m3) = (self.m0, self.m1, self.m2, self.m3);
        let a = m0 * m0 + m1 * m1 - m2 * m2 - m3 * m3;
        let b = 2.0 * (m0 * m1 - m2 * m3);
        (a, b, (-a + (a * a - b * b).sqrt()) / b)
    }

    /// Branch maxima over θ2 as functions of x = cos θ1.
    pub fn wave1(&self, x: f64) -> f64 {
        let k = self.coefficients_x(x);
        k.a + k.b + (k.c + k.d).abs()
    }

    pub fn wave3(&self, x: f64) -> f64 {
        let k = self.coefficients_x(x);
        let e2 = k.e * k.e;
        let sgn = (k.b * k.b + e2 - k.d * k.d).signum();
        let root = (e2 * (k.c * k.c + e2 - k.d * k.d) * (k.b * k.b + e2 - k.d * k.d)).max(0.0).sqrt();
        k.a + (k.b * k.c * k.d + sgn * root) / (e2 - k.d * k.d)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct F2Coefficients {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub e: f64,
}

impl F2Coefficients {
    pub fn f2(&self, theta2: f64) -> f64 {
        let (c2, s2) = (theta2.cos(), theta2.sin());
        self.a + self.b * c2 + ((self.c + self.d * c2).powi(2) + (self.e * s2).powi(2)).sqrt()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CaseIIReport {
    pub bound: f64,
    pub argmax: (f64, f64),
    pub m: [f64; 4],
    pub gm: f64,
    pub a: f64,
    pub b: f64,
    pub x0: f64,
    pub wave1_at_x0: f64,
    pub wave3_at_x0: f64,
    /// |dh/dx − M1| with h = a − F3, i.e. |dF3/dx| at x0.
    pub stationarity: f64,
    pub second_derivative: f64,
}

pub fn case_ii_bound(p: &CaseIIParams, resolution: usize) -> Result<CaseIIReport> {
    let m = p.m_vector();
    if let Some(v) = m.iter().find(|v| **v <= 0.0) {
        return Err(Error::Precondition(format!("m-vector entry {v} is not positive")));
    }
    if -p.m0 <= p.m1.abs() {
        return Err(Error::Precondition("need -M0 > |M1|".into()));
    }
    let n = resolution.max(8);
    let pi = std::f64::consts::PI;
    let h = pi / n as f64;
    let mut best = (f64::NEG_INFINITY, 0.0, 0.0);
    for i in 0..=n {
        let k = p.coefficients(i as f64 * h);
        for j in 0..=n {
            let v = k.f2(j as f64 * h);
            if v > best.0 {
                best = (v, i as f64 * h, j as f64 * h);
            }
        }
    }
    // coordinate golden-section refinement inside one grid cell
    let (mut t1, mut t2, mut val) = (best.1, best.2, best.0);
    for _ in 0..30 {
        let prev = val;
        let (lo, hi) = ((t1 - h).max(0.0), (t1 + h).min(pi));
        t1 = golden_max(|t| p.f2(t, t2), lo, hi, t1);
        let (lo, hi) = ((t2 - h).max(0.0), (t2 + h).min(pi));
        t2 = golden_max(|t| p.f2(t1, t), lo, hi, t2);
        val = val.max(p.f2(t1, t2));
        if val - prev < 1e-15 {
            break;
        }
    }
    let (a, b, x0) = p.stationary_point();
    let dx = 1e-4;
    let f3 = |x: f64| p.wave3(x);
    let d1 = (f3(x0 + dx) - f3(x0 - dx)) / (2.0 * dx);
    let d2 = (f3(x0 + dx) - 2.0 * f3(x0) + f3(x0 - dx)) / (dx * dx);
    Ok(CaseIIReport {
        bound: val,
        argmax: (t1, t2),
        m,
        gm: p.gm(),
        a,
        b,
        x0,
        wave1_at_x0: p.wave1(x0),
        wave3_at_x0: f3(x0),
        stationarity: d1.abs(),
        second_derivative: d2,
    })
}

/// Golden-section maximization on [lo, hi]; returns the better of the
/// located point and `start`.
fn golden_max(f: impl Fn(f64) -> f64, lo: f64, hi: f64, start: f64) -> f64 {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut x1 = b - r * (b - a);
    let mut x2 = a + r * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..100 {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + r * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - r * (b - a);
            f1 = f(x1);
        }
        if b - a < 1e-15 {
            break;
        }
    }
    let x = (a + b) / 2.0;
    [x, lo, hi, start].into_iter().fold(start, |acc, c| if f(c) > f(acc) { c } else { acc })
}

#[derive(Clone, Debug)]
pub struct PhiState {
    pub state: XState,
    pub decomposition: SeparableDecomposition,
}

/// Anti-diagonal of ϱ(θ, φ) divided by S/8 with S = Π sinθ_i.
pub fn cos_vector(u: &[f64; 3]) -> [f64; 4] {
    [(u[0] + u[1] + u[2]).cos(), u[0].cos(), u[1].cos(), u[2].cos()]
}

pub fn phi_to_u(phi: &[f64; 3]) -> [f64; 3] {
    [phi[0] + phi[1] - phi[2], phi[0] - phi[1] + phi[2], -phi[0] + phi[1] + phi[2]]
}

pub fn u_to_phi(u: &[f64; 3]) -> [f64; 3] {
    [(u[0] + u[1]) / 2.0, (u[0] + u[2]) / 2.0, (u[1] + u[2]) / 2.0]
}

/// Diagonal of ϱ(θ, ·): Π (1 ± cos θ_i)/2 with + for bit 0.
pub fn theta_diagonal(theta: &[f64; 3]) -> [f64; 8] {
    let mut d = [0.0; 8];
    for (l, v) in d.iter_mut().enumerate() {
        *v = (0..3)
            .map(|i| {
                let eps = if (l >> (2 - i)) & 1 == 0 { 1.0 } else { -1.0 };
                (1.0 + eps * theta[i].cos()) / 2.0
            })
            .product();
    }
    d
}

fn phi_components(theta: &[f64; 3], phi: &[f64; 3], weight: f64) -> Vec<DecompComponent> {
    let part = Partition::full_split(3);
    let mut out = Vec::with_capacity(8);
    for mirror in [1.0, -1.0] {
        for signs in [[1.0, 1.0, 1.0], [1.0, -1.0, -1.0], [-1.0, 1.0, -1.0], [-1.0, -1.0, 1.0]] {
            let factors = (0..3)
                .map(|i| {
                    let (st, ct) = (theta[i].sin(), theta[i].cos());
                    let ph = mirror * phi[i];
                    qubit_state(signs[i] * st * ph.cos(), signs[i] * st * ph.sin(), ct)
                })
                .collect();
            out.push(DecompComponent::new(weight / 8.0, part.clone(), factors).expect("three qubits"));
        }
    }
    out
}

/// ϱ = (2·A1A2A3 + B1B2B3 + B'1B'2B'3)/16 as an X state plus its eight-term
/// product mixture.
pub fn construct_phi_state(theta: [f64; 3], phi: [f64; 3]) -> PhiState {
    let s: f64 = theta.iter().map(|t| t.sin()).product();
    let cv = cos_vector(&phi_to_u(&phi));
    let state = XState { diag: theta_diagonal(&theta), anti: cv.map(|c| s * c / 8.0) };
    PhiState { state, decomposition: SeparableDecomposition::new(phi_components(&theta, &phi, 1.0)) }
}

#[derive(Clone, Debug)]
pub struct XDecomposition {
    pub kappa: f64,
    pub theta: [f64; 3],
    /// Convex weights and φ angles of the ϱ(θ, φ) pieces.
    pub phis: Vec<(f64, [f64; 3])>,
    pub remainder: [f64; 8],
    pub decomposition: SeparableDecomposition,
    pub residual: f64,
}

/// Largest V with V ≤ d_l·e^{ε(l)·t} for all l, over t ∈ ℝ³ (log-linear program).
/// Returns (V, t).
pub fn diagonal_capacity(d: &[f64; 8]) -> Option<(f64, [f64; 3])> {
    if d.iter().any(|v| *v <= 0.0) {
        return None;
    }
    let eps = |l: usize, i: usize| if (l >> (2 - i)) & 1 == 0 { 1.0 } else { -1.0 };
    let rows: Vec<[f64; 4]> = (0..8).map(|l| [1.0, -eps(l, 0), -eps(l, 1), -eps(l, 2)]).collect();
    let rhs: Vec<f64> = d.iter().map(|v| v.ln()).collect();
    let mut best: Option<(f64, [f64; 3])> = None;
    for a in 0..8 {
        for b in a + 1..8 {
            for c in b + 1..8 {
                for e in c + 1..8 {
                    let idx = [a, b, c, e];
                    let m = Matrix4::from_fn(|r, k| rows[idx[r]][k]);
                    let Some(inv) = m.try_inverse() else { continue };
                    let x = inv * Vector4::new(rhs[a], rhs[b], rhs[c], rhs[e]);
                    let feasible = (0..8).all(|l| {
                        let lhs: f64 = (0..4).map(|k| rows[l][k] * x[k]).sum();
                        lhs <= rhs[l] + 1e-9 * (1.0 + rhs[l].abs())
                    });
                    if feasible && best.is_none_or(|(z, _)| x[0] > z) {
                        best = Some((x[0], [x[1], x[2], x[3]]));
                    }
                }
            }
        }
    }
    best.map(|(z, t)| (z.exp(), t))
}

const EVEN_VERTICES: [([f64; 4], [f64; 3]); 8] = {
    use std::f64::consts::PI;
    [
        ([1., 1., 1., 1.], [0., 0., 0.]),
        ([-1., -1., 1., 1.], [PI, 0., 0.]),
        ([-1., 1., -1., 1.], [0., PI, 0.]),
        ([-1., 1., 1., -1.], [0., 0., PI]),
        ([1., -1., -1., 1.], [PI, PI, 0.]),
        ([1., -1., 1., -1.], [PI, 0., PI]),
        ([1., 1., -1., -1.], [0., PI, PI]),
        ([-1., -1., -1., -1.], [PI, PI, PI]),
    ]
};

/// Best u with cos_vector(u) ≈ p, from the 8 sign choices of ±acos.
fn solve_cos(p: &[f64; 4]) -> (f64, [f64; 3]) {
    let ac: Vec<f64> = p[1..].iter().map(|v| v.clamp(-1.0, 1.0).acos()).collect();
    let mut best = (f64::INFINITY, [0.0; 3]);
    for s in 0..8 {
        let u = [0, 1, 2].map(|i| if (s >> i) & 1 == 1 { -ac[i] } else { ac[i] });
        let r = ((u[0] + u[1] + u[2]).cos() - p[0]).abs();
        if r < best.0 {
            best = (r, u);
        }
    }
    best
}

/// The gauge has a square-root profile at the curved boundary, so bisection
/// only locates it to ~1e-8. Refines s by a secant solve of
/// cos(±u1 ± u2 ± u3) = p0 on the sign branch chosen at the bisection point.
fn snap_to_cos(at: &impl Fn(f64) -> [f64; 4], s0: f64) -> f64 {
    let (res0, u0) = solve_cos(&at(s0));
    if res0 <= 1e-15 {
        return s0;
    }
    let sign = u0.map(|u| if u < 0.0 { -1.0 } else { 1.0 });
    let f = |s: f64| {
        let q = at(s);
        let sum: f64 = (0..3).map(|i| sign[i] * q[i + 1].clamp(-1.0, 1.0).acos()).sum();
        sum.cos() - q[0]
    };
    let (mut a, mut b) = (s0 * (1.0 - 1e-7), s0);
    let (mut fa, mut fb) = (f(a), f(b));
    for _ in 0..60 {
        if fb == fa || fb.abs() <= 1e-16 {
            break;
        }
        let c = b - fb * (b - a) / (fb - fa);
        (a, fa) = (b, fb);
        b = c;
        fb = f(b);
    }
    let improved = fb.abs() < res0 && (b - s0).abs() <= 1e-6 * s0 && gauge(&at(b)) <= 1.0 + 1e-9;
    if improved {
        b
    } else {
        s0
    }
}

fn gauge(p: &[f64; 4]) -> f64 {
    rvalue_of_anti(&p.map(|v| v / 8.0)).rvalue
}

/// Writes p (gauge ≤ 1) as a convex combination of cos-vectors: rays from an
/// even vertex through p end on a cube facet or on the curved boundary, whose
/// points are cos-vectors.
fn cos_hull(p: [f64; 4], depth: usize) -> Result<Vec<(f64, [f64; 3])>> {
    let (res, u) = solve_cos(&p);
    if res <= 1e-11 || (depth > 0 && res <= 1e-9 && gauge(&p) > 1.0 - 1e-9) {
        return Ok(vec![(1.0, u)]);
    }
    if depth >= 8 {
        return Err(Error::ConstructionFailure { residual: res, reason: "hull recursion did not close".into() });
    }
    let mut p = p;
    let mut active = [false; 4];
    for k in 0..4 {
        if p[k].abs() >= 1.0 - 1e-12 {
            active[k] = true;
            p[k] = p[k].signum();
        }
    }
    let dist = |v: &[f64; 4]| (0..4).map(|k| (v[k] - p[k]).powi(2)).sum::<f64>().sqrt();
    let (v, uv) = EVEN_VERTICES
        .iter()
        .filter(|(v, _)| (0..4).all(|k| !active[k] || v[k] == p[k]))
        .max_by(|a, b| dist(&a.0).total_cmp(&dist(&b.0)))
        .copied()
        .ok_or(Error::ConstructionFailure { residual: res, reason: "no vertex on the active face".into() })?;
    if dist(&v) < 1e-12 {
        return Ok(vec![(1.0, uv)]);
    }
    let d = [0, 1, 2, 3].map(|k| p[k] - v[k]);
    let at = |s: f64| [0, 1, 2, 3].map(|k| if active[k] { p[k] } else { v[k] + s * d[k] });
    let s_cube = (0..4)
        .filter(|&k| !active[k] && d[k].abs() > 1e-15)
        .map(|k| (d[k].signum() - v[k]) / d[k])
        .fold(f64::INFINITY, f64::min);
    let s = if gauge(&at(s_cube)) <= 1.0 + 1e-13 {
        s_cube
    } else {
        let (mut lo, mut hi) = (1.0, s_cube);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if gauge(&at(mid)) <= 1.0 {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-16 * hi {
                break;
            }
        }
        snap_to_cos(&at, lo)
    };
    if s <= 1.0 + 1e-14 {
        return Err(Error::ConstructionFailure { residual: res, reason: "point is on the boundary but not a cos-vector".into() });
    }
    let mut out = vec![(1.0 - 1.0 / s, uv)];
    for (w, u) in cos_hull(at(s), depth + 1)? {
        out.push((w / s, u));
    }
    Ok(out)
}

/// x = (1−κ)ρ_d + κ Σ_j w_j ϱ(θ, φ_j) with ρ_d diagonal, expanded into
/// product states and verified.
pub fn decompose_xstate(x: &XState) -> Result<XDecomposition> {
    x.validate()?;
    let part = Partition::full_split(3);
    let basis = |l: usize| -> Vec<DensityMatrix> {
        (0..3).map(|i| qubit_state(0.0, 0.0, if (l >> (2 - i)) & 1 == 0 { 1.0 } else { -1.0 })).collect()
    };
    let diagonal_part = |r: &[f64; 8]| -> Vec<DecompComponent> {
        (0..8)
            .filter(|&l| r[l] > 0.0)
            .map(|l| DecompComponent::new(r[l], part.clone(), basis(l)).expect("three qubits"))
            .collect()
    };
    let anti_zero = x.anti.iter().all(|a| *a == 0.0);
    let (kappa, theta, phis, remainder, comps) = if anti_zero {
        (0.0, [0.0; 3], Vec::new(), x.diag, diagonal_part(&x.diag))
    } else {
        let verdict = theorem2_verdict(x);
        if verdict.verdict == Verdict::Entangled {
            return Err(Error::Precondition(format!("state is entangled (margin {:.3e})", verdict.margin)));
        }
        let (v, t) = diagonal_capacity(&x.diag).ok_or_else(|| Error::ConstructionFailure {
            residual: verdict.rhs,
            reason: "zero diagonal entry with nonzero anti-diagonal".into(),
        })?;
        let theta = t.map(|ti| (-ti.tanh()).acos());
        let pth = theta_diagonal(&theta);
        let kappa = (0..8).map(|l| x.diag[l] / pth[l]).fold(f64::INFINITY, f64::min).min(1.0);
        let mut p = x.anti.map(|a| a / v);
        let g = gauge(&p);
        if g > 1.0 + 1e-9 {
            return Err(Error::ConstructionFailure {
                residual: g - 1.0,
                reason: "anti-diagonal exceeds the diagonal capacity".into(),
            });
        }
        if g > 1.0 {
            p = p.map(|c| c / g);
        }
        // κ·S/8 = V, so the anti-diagonal of κ ϱ(θ, φ_j) is V·cv(u_j)
        let hull = cos_hull(p, 0)?;
        let remainder = [0, 1, 2, 3, 4, 5, 6, 7].map(|l| {
            let r = x.diag[l] - kappa * pth[l];
            if r < 0.0 && r > -1e-12 {
                0.0
            } else {
                r
            }
        });
        if let Some(r) = remainder.iter().find(|r| **r < 0.0) {
            return Err(Error::ConstructionFailure { residual: -r, reason: "negative diagonal remainder".into() });
        }
        let phis: Vec<(f64, [f64; 3])> = hull.iter().map(|(w, u)| (*w, u_to_phi(u))).collect();
        let mut comps = Vec::new();
        for (w, phi) in &phis {
            comps.extend(phi_components(&theta, phi, kappa * w));
        }
        comps.extend(diagonal_part(&remainder));
        (kappa, theta, phis, remainder, comps)
    };
    let decomposition = SeparableDecomposition::new(comps);
    let rep = verify_decomposition(&decomposition, &x.to_density(), &SeparabilityClass::full(3), 1e-9)?;
    if !rep.pass {
        return Err(Error::ConstructionFailure {
            residual: rep.max_abs_error.max(-rep.min_factor_eigenvalue),
            reason: "decomposition failed verification".into(),
        });
    }
    Ok(XDecomposition { kappa, theta, phis, remainder, decomposition, residual: rep.max_abs_error })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::char_from_density;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn uniform(anti: [f64; 4]) -> XState {
        XState::new([0.125; 8], anti).unwrap()
    }

    #[test]
    fn gamma_spectrum() {
        let mut ev: Vec<f64> = gamma().symmetric_eigenvalues().iter().cloned().collect();
        ev.sort_by(f64::total_cmp);
        for (a, b) in ev.iter().zip([-2.0, -2.0, -2.0, 2.0]) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!((gamma() * gamma() - Matrix4::identity() * 4.0).norm() < 1e-15);
    }

    #[test]
    fn char_sector_matches_density() {
        for anti in [[0.125; 4], [0.125, 0.125, 0.125, -0.125], [0.05, -0.02, 0.07, 0.01]] {
            let x = uniform(anti);
            let r = char_from_density(&x.to_density()).unwrap();
            let got = xstate_char(&x);
            for (s, v) in ["XXX", "XYY", "YXY", "YYX"].iter().zip(got) {
                assert!((r.at(s) - v).abs() < 1e-12, "{s}");
            }
        }
        assert_eq!(xstate_char(&uniform([0.125; 4])), [1.0, 0.0, 0.0, 0.0]);
        assert_eq!(xstate_char(&uniform([0.125, 0.125, 0.125, -0.125])), [0.5, 0.5, -0.5, -0.5]);
    }

    #[test]
    fn lemma_examples() {
        let r = gm_closed_form(&XWitnessParams::new([1.0, 0.0, 0.0, 0.0]));
        assert_eq!((r.value, r.branch), (1.0, Branch::MaxAbs));
        let r = gm_closed_form(&XWitnessParams::new([1.0, 1.0, 1.0, 1.0]));
        assert!((r.value - 2f64.sqrt()).abs() < 1e-12);
        let p = XWitnessParams::new([2.0, 1.0, 1.0, 1.0]);
        assert!((gm_closed_form(&p).value - 2.0).abs() < 1e-12);
        assert!(gm_closed_form(&p).q_boundary);
        assert!((gm_oracle(&p, 32).unwrap() - 2.0).abs() < 1e-8);
        assert!((gm_oracle(&XWitnessParams::new([1.0; 4]), 32).unwrap() - 2f64.sqrt()).abs() < 1e-8);
        assert_eq!(gm_oracle(&XWitnessParams::new([0.0; 4]), 16).unwrap(), 0.0);
        assert!(gm_oracle(&p, 8).is_err());
    }

    #[test]
    fn theorem1_vertices() {
        let c = theorem1_evaluate(&uniform([0.125; 4]));
        assert!((c.rvalue - 1.0).abs() < 1e-12);
        let c = theorem1_evaluate(&uniform([0.125, 0.125, 0.125, -0.125]));
        assert!((c.rvalue - 2f64.sqrt()).abs() < 1e-12);
        assert_eq!(c.branch, Branch::FirstLine);
        assert_eq!(theorem1_evaluate(&uniform([0.0; 4])).rvalue, 0.0);
    }

    #[test]
    fn ghz3_boundary() {
        let v = theorem2_verdict(&XState::noisy_ghz3(0.2).unwrap());
        assert!(v.margin.abs() < 1e-15 && v.verdict == Verdict::Separable);
        assert_eq!(theorem2_verdict(&XState::noisy_ghz3(0.21).unwrap()).verdict, Verdict::Entangled);
        let diag = XState::new([0.3, 0.1, 0.05, 0.05, 0.2, 0.1, 0.1, 0.1], [0.0; 4]).unwrap();
        let v = theorem2_verdict(&diag);
        assert!((v.margin - v.lhs).abs() < 1e-15);
    }

    #[test]
    fn capacity_matches_theorem2_lhs() {
        let d = [0.3, 0.1, 0.05, 0.05, 0.2, 0.1, 0.1, 0.1];
        let (v, _) = diagonal_capacity(&d).unwrap();
        assert!((v - theorem2_lhs(&d)).abs() < 1e-12);
    }

    #[test]
    fn phi_state_vertex() {
        let ps = construct_phi_state([FRAC_PI_2; 3], [0.0; 3]);
        assert_eq!(ps.state.diag.map(|d| (d * 8.0).round()), [1.0; 8]);
        for a in ps.state.anti {
            assert!((a - 0.125).abs() < 1e-15);
        }
        let m = ps.decomposition.matrix().unwrap();
        assert!(crate::pauli::max_abs_diff(&m, ps.state.to_density().matrix()) < 1e-15);
        let ps = construct_phi_state([0.0; 3], [0.3, 0.2, 0.1]);
        assert_eq!(ps.state.anti, [0.0; 4]);
    }

    #[test]
    fn phi_state_matches_product_mixture() {
        let ps = construct_phi_state([0.7, 1.9, 2.4], [0.3, -1.1, 2.5]);
        let m = ps.decomposition.matrix().unwrap();
        assert!(crate::pauli::max_abs_diff(&m, ps.state.to_density().matrix()) < 1e-12);
    }

    #[test]
    fn decompose_vertex_and_diagonal() {
        let d = decompose_xstate(&uniform([0.125; 4])).unwrap();
        assert!((d.kappa - 1.0).abs() < 1e-12);
        assert!(d.theta.iter().all(|t| (t - FRAC_PI_2).abs() < 1e-12));
        assert_eq!(d.phis.len(), 1);
        // acos near 1 turns O(1e-16) rounding into O(1e-8) angles
        assert!(d.phis[0].1.iter().all(|p| p.abs() < 1e-6));
        let d = decompose_xstate(&uniform([0.0; 4])).unwrap();
        assert_eq!(d.kappa, 0.0);
        assert_eq!(d.remainder, [0.125; 8]);
    }

    #[test]
    fn decompose_noisy_ghz3() {
        for p in [0.05, 0.15, 0.19, 0.2] {
            let d = decompose_xstate(&XState::noisy_ghz3(p).unwrap()).unwrap();
            assert!(d.residual <= 1e-9, "p = {p}: {}", d.residual);
        }
        assert!(decompose_xstate(&XState::noisy_ghz3(0.21).unwrap()).is_err());
    }

    #[test]
    fn decompose_facet_point() {
        // odd-pattern anti-diagonal scaled onto the boundary
        let a = [0.125, 0.125, 0.125, -0.125].map(|v| v / 2f64.sqrt());
        let d = decompose_xstate(&uniform(a)).unwrap();
        assert!(d.residual <= 1e-9);
        let a = [0.125, 0.0, 0.0, 0.0];
        assert!(decompose_xstate(&uniform(a)).unwrap().residual <= 1e-9);
        let _ = PI;
    }

    #[test]
    fn case_ii_example() {
        let p = CaseIIParams::new(-10.0, 1.0, 1.0, 1.0);
        assert_eq!(p.m_vector(), [3.5, 5.5, 5.5, 5.5]);
        assert!((p.gm() - (3.5 * 5.5f64.powi(3)).powf(0.25)).abs() < 1e-12);
        let r = case_ii_bound(&p, 200).unwrap();
        assert!((r.bound - 10.0).abs() < 1e-6);
        assert!(r.stationarity <= 1e-4 && r.second_derivative < 0.0);
        assert!(case_ii_bound(&CaseIIParams::new(1.0, 0.0, 0.0, 0.0), 50).is_err());
    }

    #[test]
    fn case_i_closed_max() {
        for x in [XState::noisy_ghz3(0.3).unwrap(), uniform([0.125, 0.125, 0.125, -0.125])] {
            let r = theorem1_evaluate(&x).rvalue;
            let grid = (0..3600).map(|k| case_i_violation(&x, r, k as f64 * PI / 1800.0)).fold(f64::MIN, f64::max);
            assert!((grid - case_i_max(&x, r)).abs() < 1e-5);
            assert_eq!(case_i_max(&x, r) > 0.0, r / 8.0 > (x.diag[0] * x.diag[7]).sqrt());
        }
    }
}
