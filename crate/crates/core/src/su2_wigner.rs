//! SU(2) phase space: the Stratonovich kernel on the Bloch sphere,
//! spin-1/2 Wigner functions, and the map back from distributions to states.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{domain, Result};
use crate::quadrature::{integrate_sphere, IntegrationSpec};

const SQRT3: f64 = 1.732_050_807_568_877_2;

/// A half-integer quantum number, stored as twice its value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct HalfInteger(i32);

impl HalfInteger {
    pub const fn from_twice(twice: i32) -> Self {
        Self(twice)
    }

    pub fn from_f64(x: f64) -> Result<Self> {
        let twice = 2.0 * x;
        if !twice.is_finite() || (twice - twice.round()).abs() > 1e-9 {
            return Err(domain(format!("{x} is not a half-integer")));
        }
        Ok(Self(twice.round() as i32))
    }

    pub fn twice(self) -> i32 {
        self.0
    }

    pub fn value(self) -> f64 {
        f64::from(self.0) / 2.0
    }
}

impl fmt::Display for HalfInteger {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0 % 2 == 0 {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}/2", self.0)
        }
    }
}

/// A point on the Bloch sphere, θ ∈ [0, π], φ ∈ [0, 2π).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochPoint {
    theta: f64,
    phi: f64,
}

impl BlochPoint {
    /// `phi` is reduced into [0, 2π); `theta` must already lie in [0, π].
    pub fn new(theta: f64, phi: f64) -> Result<Self> {
        if !(0.0..=PI).contains(&theta) {
            return Err(domain(format!("theta = {theta} outside [0, π]")));
        }
        if !phi.is_finite() {
            return Err(domain("phi must be finite"));
        }
        let mut phi = phi.rem_euclid(2.0 * PI);
        if phi >= 2.0 * PI {
            phi = 0.0;
        }
        Ok(Self { theta, phi })
    }

    /// Quadrature nodes are interior points of the coordinate ranges.
    pub(crate) fn from_quadrature(theta: f64, phi: f64) -> Self {
        Self { theta, phi }
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    /// Ω = (sinθ cosφ, sinθ sinφ, cosθ).
    pub fn unit_vector(&self) -> [f64; 3] {
        let (st, ct) = self.theta.sin_cos();
        let (sp, cp) = self.phi.sin_cos();
        [st * cp, st * sp, ct]
    }
}

/// Bloch vector of a two-level density matrix ρ = (1 + s·σ)/2.
///
/// The basis is ordered (|e⟩, |g⟩) with |e⟩ the +z eigenstate, so that
/// σ_z = |e⟩⟨e| − |g⟩⟨g|.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpinHalfState {
    s: [f64; 3],
}

impl SpinHalfState {
    pub fn new(s: [f64; 3]) -> Result<Self> {
        let n = norm3(s);
        if !n.is_finite() || n > 1.0 + 1e-12 {
            return Err(domain(format!("Bloch vector length {n} exceeds 1")));
        }
        Ok(Self { s })
    }

    pub fn ground() -> Self {
        Self { s: [0.0, 0.0, -1.0] }
    }

    pub fn excited() -> Self {
        Self { s: [0.0, 0.0, 1.0] }
    }

    /// (|e⟩ + |g⟩)/√2, the equatorial phase state.
    pub fn phase() -> Self {
        Self { s: [1.0, 0.0, 0.0] }
    }

    pub fn maximally_mixed() -> Self {
        Self { s: [0.0; 3] }
    }

    /// Pure state c_e|e⟩ + c_g|g⟩ (normalized internally).
    pub fn from_amplitudes(c_e: Complex64, c_g: Complex64) -> Result<Self> {
        let n2 = c_e.norm_sqr() + c_g.norm_sqr();
        if !(n2 > 0.0) || !n2.is_finite() {
            return Err(domain("amplitudes must not both vanish"));
        }
        let coh = c_e.conj() * c_g / n2;
        Ok(Self {
            s: [2.0 * coh.re, 2.0 * coh.im, (c_e.norm_sqr() - c_g.norm_sqr()) / n2],
        })
    }

    /// Amplitudes (c_e, c_g) of the pure state with this Bloch vector, with
    /// c_e real and non-negative. Fails for mixed states.
    pub fn amplitudes(&self) -> Result<(Complex64, Complex64)> {
        let n = self.length();
        if (n - 1.0).abs() > 1e-9 {
            return Err(domain(format!("state is mixed (|s| = {n})")));
        }
        let [x, y, z] = self.s;
        let theta = (z / n).clamp(-1.0, 1.0).acos();
        let phi = y.atan2(x);
        Ok((
            Complex64::new((theta / 2.0).cos(), 0.0),
            Complex64::from_polar((theta / 2.0).sin(), phi),
        ))
    }

    pub fn bloch_vector(&self) -> [f64; 3] {
        self.s
    }

    pub fn length(&self) -> f64 {
        norm3(self.s)
    }

    pub fn density_matrix(&self) -> SpinMatrix {
        let [x, y, z] = self.s;
        SpinMatrix::from_rows(
            2,
            vec![
                Complex64::new((1.0 + z) / 2.0, 0.0),
                Complex64::new(x / 2.0, -y / 2.0),
                Complex64::new(x / 2.0, y / 2.0),
                Complex64::new((1.0 - z) / 2.0, 0.0),
            ],
        )
    }
}

fn norm3(v: [f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

/// Real function on the Bloch sphere.
#[derive(Clone)]
pub struct SphereFunction {
    eval: Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>,
    label: String,
}

impl SphereFunction {
    pub fn new(label: impl Into<String>, f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            eval: Arc::new(f),
            label: label.into(),
        }
    }

    pub fn evaluate(&self, p: &BlochPoint) -> f64 {
        (self.eval)(p.theta, p.phi)
    }

    /// Evaluation at raw angles; φ need not be reduced.
    pub fn evaluate_angles(&self, theta: f64, phi: f64) -> f64 {
        (self.eval)(theta, phi)
    }

    pub fn label(&self) -> &str {
        &self.label
    }
}

impl fmt::Debug for SphereFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SphereFunction").field("label", &self.label).finish()
    }
}

/// Dense complex square matrix in the |j, k⟩ basis, rows ordered k = j, j−1, …, −j.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl SpinMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![Complex64::new(0.0, 0.0); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_rows(dim: usize, data: Vec<Complex64>) -> Self {
        assert_eq!(data.len(), dim * dim, "matrix data has wrong length");
        Self { dim, data }
    }

    pub fn pauli() -> [SpinMatrix; 3] {
        let o = Complex64::new(0.0, 0.0);
        let one = Complex64::new(1.0, 0.0);
        let i = Complex64::new(0.0, 1.0);
        [
            Self::from_rows(2, vec![o, one, one, o]),
            Self::from_rows(2, vec![o, -i, i, o]),
            Self::from_rows(2, vec![one, o, o, -one]),
        ]
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.data[row * self.dim + col]
    }

    fn add_at(&mut self, row: usize, col: usize, z: Complex64) {
        self.data[row * self.dim + col] += z;
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    pub fn matmul(&self, other: &SpinMatrix) -> SpinMatrix {
        assert_eq!(self.dim, other.dim);
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.get(i, k);
                for j in 0..n {
                    out.data[i * n + j] += a * other.get(k, j);
                }
            }
        }
        out
    }

    /// tr(self · other) without forming the product.
    pub fn trace_product(&self, other: &SpinMatrix) -> Complex64 {
        let n = self.dim;
        let mut t = Complex64::new(0.0, 0.0);
        for i in 0..n {
            for k in 0..n {
                t += self.get(i, k) * other.get(k, i);
            }
        }
        t
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        (0..self.dim).all(|i| (0..self.dim).all(|j| (self.get(i, j) - self.get(j, i).conj()).norm() <= tol))
    }

    pub fn max_abs_diff(&self, other: &SpinMatrix) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

fn factorial(n: i32) -> f64 {
    debug_assert!(n >= 0);
    (1..=n).fold(1.0, |acc, k| acc * f64::from(k))
}

/// Clebsch–Gordan coefficient ⟨j1 m1; j2 m2 | j m⟩ in the Condon–Shortley
/// convention (Racah's closed formula).
pub fn clebsch_gordan(
    j1: HalfInteger,
    m1: HalfInteger,
    j2: HalfInteger,
    m2: HalfInteger,
    j: HalfInteger,
    m: HalfInteger,
) -> Result<f64> {
    for (jj, mm) in [(j1, m1), (j2, m2), (j, m)] {
        let (tj, tm) = (jj.twice(), mm.twice());
        if tj < 0 || tm.abs() > tj || (tj + tm) % 2 != 0 {
            return Err(domain(format!("invalid angular momentum pair j = {jj}, m = {mm}")));
        }
    }
    let (a, b, c) = (j1.twice(), j2.twice(), j.twice());
    if m1.twice() + m2.twice() != m.twice() {
        return Ok(0.0);
    }
    if c < (a - b).abs() || c > a + b || (a + b + c) % 2 != 0 {
        return Ok(0.0);
    }
    // all factorial arguments below are integers once halved
    let h = |x: i32| x / 2;
    let (tm1, tm2, tm) = (m1.twice(), m2.twice(), m.twice());
    let pre = (f64::from(c + 1) * factorial(h(c + a - b)) * factorial(h(c - a + b)) * factorial(h(a + b - c))
        / factorial(h(a + b + c) + 1))
    .sqrt();
    let pre2 = (factorial(h(c + tm))
        * factorial(h(c - tm))
        * factorial(h(a - tm1))
        * factorial(h(a + tm1))
        * factorial(h(b - tm2))
        * factorial(h(b + tm2)))
    .sqrt();
    let mut sum = 0.0;
    for k in 0..=h(a + b - c) {
        let args = [
            h(a + b - c) - k,
            h(a - tm1) - k,
            h(b + tm2) - k,
            h(c - b + tm1) + k,
            h(c - a - tm2) + k,
        ];
        if args.iter().any(|&x| x < 0) {
            continue;
        }
        let denom = factorial(k) * args.iter().map(|&x| factorial(x)).product::<f64>();
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        sum += sign / denom;
    }
    Ok(pre * pre2 * sum)
}

/// Orthonormal spherical harmonic Y_ℓm with the Condon–Shortley phase.
pub fn spherical_harmonic(l: u32, m: i32, p: &BlochPoint) -> Result<Complex64> {
    if m.unsigned_abs() > l {
        return Err(domain(format!("|m| = {} exceeds l = {l}", m.abs())));
    }
    let ma = m.unsigned_abs();
    let x = p.theta.cos();
    let plm = assoc_legendre(l, ma, x);
    let ratio = (l - ma + 1..=l + ma).fold(1.0, |acc, k| acc / f64::from(k));
    let norm = ((2 * l + 1) as f64 / (4.0 * PI) * ratio).sqrt();
    let y = Complex64::from_polar(norm * plm, f64::from(ma) * p.phi);
    if m >= 0 {
        Ok(y)
    } else if ma % 2 == 0 {
        Ok(y.conj())
    } else {
        Ok(-y.conj())
    }
}

/// P_ℓ^m(x) for m ≥ 0, including the (−1)^m Condon–Shortley factor.
fn assoc_legendre(l: u32, m: u32, x: f64) -> f64 {
    let s = (1.0 - x * x).max(0.0).sqrt();
    let mut pmm = 1.0;
    for k in 0..m {
        pmm *= -(2.0 * f64::from(k) + 1.0) * s;
    }
    if l == m {
        return pmm;
    }
    let mut pm1 = x * (2.0 * f64::from(m) + 1.0) * pmm;
    if l == m + 1 {
        return pm1;
    }
    let mut pm0 = pmm;
    for ll in m + 2..=l {
        let next = ((2.0 * f64::from(ll) - 1.0) * x * pm1 - f64::from(ll + m - 1) * pm0) / f64::from(ll - m);
        pm0 = pm1;
        pm1 = next;
    }
    pm1
}

/// Largest spin for which the kernel is provided.
pub const MAX_KERNEL_SPIN: HalfInteger = HalfInteger::from_twice(4);

/// Stratonovich kernel Λ(Ω) for spin `j`, assembled from its multipole
/// expansion in Clebsch–Gordan coefficients and spherical harmonics.
pub fn su2_kernel(j: HalfInteger, p: &BlochPoint) -> Result<SpinMatrix> {
    let tj = j.twice();
    if tj < 1 || j > MAX_KERNEL_SPIN {
        return Err(domain(format!("kernel implemented for 1/2 <= j <= 2, got j = {j}")));
    }
    let dim = (tj + 1) as usize;
    let mut lambda = SpinMatrix::zeros(dim);
    let index = |twice_k: i32| ((tj - twice_k) / 2) as usize;
    for l in 0..=tj as u32 {
        let weight = f64::from(2 * l + 1).sqrt() / (4.0 * PI).sqrt();
        for m in -(l as i32)..=(l as i32) {
            let y = spherical_harmonic(l, m, p)?;
            for tk in (-tj..=tj).step_by(2) {
                let tq = tk + 2 * m;
                if tq.abs() > tj {
                    continue;
                }
                let cg = clebsch_gordan(
                    j,
                    HalfInteger::from_twice(tk),
                    HalfInteger::from_twice(2 * l as i32),
                    HalfInteger::from_twice(2 * m),
                    j,
                    HalfInteger::from_twice(tq),
                )?;
                if cg != 0.0 {
                    lambda.add_at(index(tk), index(tq), y * (weight * cg));
                }
            }
        }
    }
    Ok(lambda)
}

/// Closed form of the j = 1/2 kernel, (1 + √3 Ω·σ)/(4π).
pub fn spin_half_kernel(p: &BlochPoint) -> SpinMatrix {
    let [x, y, z] = p.unit_vector();
    let c = 1.0 / (4.0 * PI);
    SpinMatrix::from_rows(
        2,
        vec![
            Complex64::new(c * (1.0 + SQRT3 * z), 0.0),
            Complex64::new(c * SQRT3 * x, -c * SQRT3 * y),
            Complex64::new(c * SQRT3 * x, c * SQRT3 * y),
            Complex64::new(c * (1.0 - SQRT3 * z), 0.0),
        ],
    )
}

/// W(Ω) = (1 + √3 Ω·s)/(4π).
pub fn spin_wigner(state: &SpinHalfState) -> SphereFunction {
    let [sx, sy, sz] = state.s;
    SphereFunction::new(format!("spin-1/2 Wigner s=({sx}, {sy}, {sz})"), move |theta, phi| {
        let (st, ct) = theta.sin_cos();
        let (sp, cp) = phi.sin_cos();
        (1.0 + SQRT3 * (sx * st * cp + sy * st * sp + sz * ct)) / (4.0 * PI)
    })
}

/// Inverse of [`spin_wigner`]: s_k = √3 ∫ Ω_k W(Ω) dΩ.
pub fn wigner_to_spin(w: &SphereFunction, spec: &IntegrationSpec) -> Result<SpinHalfState> {
    let r = integrate_sphere(
        |p| {
            let v = w.evaluate(p);
            let [x, y, z] = p.unit_vector();
            [Complex64::new(x * v, 0.0), Complex64::new(y * v, 0.0), Complex64::new(z * v, 0.0)]
        },
        spec,
    )?;
    SpinHalfState::new([SQRT3 * r.value[0].re, SQRT3 * r.value[1].re, SQRT3 * r.value[2].re])
}

/// tr(AB) = (4π/(2j+1)) ∫ W_A W_B dΩ.
pub fn su2_traciality(a: &SphereFunction, b: &SphereFunction, j: HalfInteger, spec: &IntegrationSpec) -> Result<f64> {
    if j.twice() < 1 {
        return Err(domain("spin must be positive"));
    }
    let r = integrate_sphere(|p| a.evaluate(p) * b.evaluate(p), spec)?;
    Ok(4.0 * PI / f64::from(j.twice() + 1) * r.value)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn half(x: f64) -> HalfInteger {
        HalfInteger::from_f64(x).unwrap()
    }

    #[test]
    fn clebsch_gordan_examples() {
        let h = half(0.5);
        assert!((clebsch_gordan(h, h, h, h, half(1.0), half(1.0)).unwrap() - 1.0).abs() < 1e-15);
        let v = clebsch_gordan(h, h, h, half(-0.5), half(0.0), half(0.0)).unwrap();
        assert!((v - 1.0 / 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(clebsch_gordan(h, h, h, h, half(0.0), half(0.0)).unwrap(), 0.0);
    }

    #[test]
    fn clebsch_gordan_table_values() {
        // j1 ⊗ 1 → j1 row of the standard table, j1 = 1/2
        let h = half(0.5);
        let v = clebsch_gordan(h, h, half(1.0), half(0.0), h, h).unwrap();
        assert!((v - 1.0 / 3f64.sqrt()).abs() < 1e-15);
        let v = clebsch_gordan(h, half(-0.5), half(1.0), half(1.0), h, h).unwrap();
        assert!((v + (2.0f64 / 3.0).sqrt()).abs() < 1e-15);
        // 1 ⊗ 1 → 0: ⟨1,1;1,-1|0,0⟩ = 1/√3
        let v = clebsch_gordan(half(1.0), half(1.0), half(1.0), half(-1.0), half(0.0), half(0.0)).unwrap();
        assert!((v - 1.0 / 3f64.sqrt()).abs() < 1e-15);
        // triangle violation
        assert_eq!(clebsch_gordan(h, h, h, half(-0.5), half(2.0), half(0.0)).unwrap(), 0.0);
    }

    #[test]
    fn clebsch_gordan_rejects_invalid() {
        let h = half(0.5);
        assert!(clebsch_gordan(h, half(1.5), h, h, half(1.0), half(1.0)).is_err());
        assert!(clebsch_gordan(h, half(1.0), h, h, half(1.0), half(1.0)).is_err());
        assert!(HalfInteger::from_f64(0.3).is_err());
    }

    #[test]
    fn clebsch_gordan_orthogonality() {
        // Σ_{m1,m2} ⟨j1 m1; j2 m2|j m⟩⟨j1 m1; j2 m2|j' m⟩ = δ_jj'
        let (j1, j2) = (half(1.0), half(1.5));
        for tj in [1, 3, 5] {
            for tjp in [1, 3, 5] {
                let tm = 1;
                let mut s = 0.0;
                for tm1 in (-2..=2).step_by(2) {
                    let tm2: i32 = tm - tm1;
                    if tm2.abs() > 3 {
                        continue;
                    }
                    let a = clebsch_gordan(j1, HalfInteger(tm1), j2, HalfInteger(tm2), HalfInteger(tj), HalfInteger(tm)).unwrap();
                    let b = clebsch_gordan(j1, HalfInteger(tm1), j2, HalfInteger(tm2), HalfInteger(tjp), HalfInteger(tm)).unwrap();
                    s += a * b;
                }
                let expect = if tj == tjp { 1.0 } else { 0.0 };
                assert!((s - expect).abs() < 1e-13, "j={tj}/2 j'={tjp}/2: {s}");
            }
        }
    }

    #[test]
    fn spherical_harmonic_examples() {
        let p = BlochPoint::new(0.7, 2.1).unwrap();
        let y00 = spherical_harmonic(0, 0, &p).unwrap();
        assert!((y00.re - 1.0 / (4.0 * PI).sqrt()).abs() < 1e-15 && y00.im == 0.0);
        let y10 = spherical_harmonic(1, 0, &p).unwrap();
        assert!((y10.re - (3.0 / (4.0 * PI)).sqrt() * 0.7f64.cos()).abs() < 1e-15);
        let y11 = spherical_harmonic(1, 1, &p).unwrap();
        let expect = Complex64::from_polar(-(3.0 / (8.0 * PI)).sqrt() * 0.7f64.sin(), 2.1);
        assert!((y11 - expect).norm() < 1e-15);
        let y1m1 = spherical_harmonic(1, -1, &p).unwrap();
        assert!((y1m1 + y11.conj()).norm() < 1e-15);
        assert!(spherical_harmonic(1, 2, &p).is_err());
    }

    #[test]
    fn spherical_harmonics_orthonormal() {
        let spec = IntegrationSpec::default();
        let r = integrate_sphere(|p| spherical_harmonic(1, 1, p).unwrap().norm_sqr(), &spec).unwrap();
        assert!((r.value - 1.0).abs() < 1e-10);
        let r = integrate_sphere(
            |p| spherical_harmonic(2, 1, p).unwrap().conj() * spherical_harmonic(3, 1, p).unwrap(),
            &spec,
        )
        .unwrap();
        assert!(r.value.norm() < 1e-10);
    }

    #[test]
    fn spin_half_kernel_examples() {
        let north = BlochPoint::new(0.0, 0.0).unwrap();
        let k = su2_kernel(half(0.5), &north).unwrap();
        let c = 1.0 / (4.0 * PI);
        assert!((k.get(0, 0).re - c * (1.0 + SQRT3)).abs() < 1e-15);
        assert!((k.get(1, 1).re - c * (1.0 - SQRT3)).abs() < 1e-15);
        assert!(k.get(0, 1).norm() < 1e-15 && k.get(1, 0).norm() < 1e-15);
        let p = BlochPoint::new(1.1, 4.0).unwrap();
        let k = su2_kernel(half(0.5), &p).unwrap();
        assert!((k.trace().re - 1.0 / (2.0 * PI)).abs() < 1e-15);
        assert!(k.max_abs_diff(&spin_half_kernel(&p)) < 1e-15);
    }

    #[test]
    fn higher_spin_kernels_are_hermitian_and_normalized() {
        let spec = IntegrationSpec::default();
        for tj in 2..=4 {
            let j = HalfInteger::from_twice(tj);
            let p = BlochPoint::new(0.9, 0.4).unwrap();
            let k = su2_kernel(j, &p).unwrap();
            assert!(k.is_hermitian(1e-14));
            let dim = (tj + 1) as f64;
            assert!((k.trace().re - dim / (4.0 * PI)).abs() < 1e-14);
            // ∫ Λ dΩ = 1 entrywise
            let n = (tj + 1) as usize;
            for (r, c) in [(0, 0), (0, 1), (n - 1, n - 1)] {
                let v = integrate_sphere(|q| su2_kernel(j, q).unwrap().get(r, c), &spec).unwrap().value;
                let expect = if r == c { 1.0 } else { 0.0 };
                assert!((v - Complex64::new(expect, 0.0)).norm() < 1e-10, "j={j} ({r},{c}) {v}");
            }
        }
        assert!(su2_kernel(half(2.5), &BlochPoint::new(0.1, 0.1).unwrap()).is_err());
        assert!(su2_kernel(half(0.0), &BlochPoint::new(0.1, 0.1).unwrap()).is_err());
    }

    #[test]
    fn spin_one_traciality_against_matrix_trace() {
        // general-j traciality constant 4π/(2j+1), checked with the kernel itself
        let spec = IntegrationSpec::new(1e-11, 1e-13, 1 << 16, 10.0).unwrap();
        let j = half(1.0);
        let c = |re: f64, im: f64| Complex64::new(re, im);
        let a = SpinMatrix::from_rows(3, vec![c(0.5, 0.), c(0.1, 0.2), c(0., -0.3), c(0.1, -0.2), c(0.3, 0.), c(0.05, 0.), c(0., 0.3), c(0.05, 0.), c(0.2, 0.)]);
        let b = SpinMatrix::from_rows(3, vec![c(0.2, 0.), c(0., 0.1), c(0.4, 0.), c(0., -0.1), c(0.7, 0.), c(0.1, 0.1), c(0.4, 0.), c(0.1, -0.1), c(0.1, 0.)]);
        let wa = {
            let a = a.clone();
            SphereFunction::new("A", move |t, p| su2_kernel(j, &BlochPoint::from_quadrature(t, p)).unwrap().trace_product(&a).re)
        };
        let wb = {
            let b = b.clone();
            SphereFunction::new("B", move |t, p| su2_kernel(j, &BlochPoint::from_quadrature(t, p)).unwrap().trace_product(&b).re)
        };
        let phase_space = su2_traciality(&wa, &wb, j, &spec).unwrap();
        let direct = a.trace_product(&b).re;
        assert!((phase_space - direct).abs() < 1e-9, "{phase_space} vs {direct}");
    }

    #[test]
    fn spin_wigner_examples() {
        let p = BlochPoint::new(0.4, 1.3).unwrap();
        let g = spin_wigner(&SpinHalfState::ground()).evaluate(&p);
        assert!((g - (1.0 - SQRT3 * 0.4f64.cos()) / (4.0 * PI)).abs() < 1e-16);
        let ph = spin_wigner(&SpinHalfState::phase()).evaluate(&p);
        assert!((ph - (1.0 + SQRT3 * 0.4f64.sin() * 1.3f64.cos()) / (4.0 * PI)).abs() < 1e-16);
        let mixed = spin_wigner(&SpinHalfState::maximally_mixed()).evaluate(&p);
        assert_eq!(mixed, 1.0 / (4.0 * PI));
        // negative around the north pole
        assert!(spin_wigner(&SpinHalfState::ground()).evaluate(&BlochPoint::new(0.0, 0.0).unwrap()) < 0.0);
    }

    #[test]
    fn spin_wigner_is_kernel_trace() {
        let st = SpinHalfState::new([0.3, -0.5, 0.6]).unwrap();
        let rho = st.density_matrix();
        let w = spin_wigner(&st);
        for &(t, ph) in &[(0.2, 0.1), (1.5, 3.0), (2.8, 5.9)] {
            let p = BlochPoint::new(t, ph).unwrap();
            let via_kernel = rho.trace_product(&spin_half_kernel(&p));
            assert!(via_kernel.im.abs() < 1e-16);
            assert!((via_kernel.re - w.evaluate(&p)).abs() < 1e-15);
        }
    }

    #[test]
    fn wigner_to_spin_examples() {
        let spec = IntegrationSpec::default();
        for s in [SpinHalfState::ground(), SpinHalfState::phase(), SpinHalfState::maximally_mixed()] {
            let back = wigner_to_spin(&spin_wigner(&s), &spec).unwrap();
            for k in 0..3 {
                assert!((back.bloch_vector()[k] - s.bloch_vector()[k]).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn traciality_examples() {
        let spec = IntegrationSpec::default();
        let j = half(0.5);
        let g = spin_wigner(&SpinHalfState::ground());
        let e = spin_wigner(&SpinHalfState::excited());
        let m = spin_wigner(&SpinHalfState::maximally_mixed());
        let ph = spin_wigner(&SpinHalfState::phase());
        assert!((su2_traciality(&ph, &ph, j, &spec).unwrap() - 1.0).abs() < 1e-10);
        assert!((su2_traciality(&m, &m, j, &spec).unwrap() - 0.5).abs() < 1e-10);
        assert!(su2_traciality(&g, &e, j, &spec).unwrap().abs() < 1e-10);
    }

    #[test]
    fn amplitude_mapping() {
        let s = SpinHalfState::from_amplitudes(Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)).unwrap();
        assert_eq!(s.bloch_vector(), [0.0, 0.0, 1.0]);
        let r = 1.0 / 2f64.sqrt();
        let s = SpinHalfState::from_amplitudes(Complex64::new(r, 0.0), Complex64::new(r, 0.0)).unwrap();
        assert!((s.bloch_vector()[0] - 1.0).abs() < 1e-15);
        // ρ built from amplitudes agrees with |ψ⟩⟨ψ|
        let (ce, cg) = (Complex64::new(0.6, 0.0), Complex64::from_polar(0.8, 0.9));
        let rho = SpinHalfState::from_amplitudes(ce, cg).unwrap().density_matrix();
        assert!((rho.get(0, 1) - ce * cg.conj()).norm() < 1e-15);
        let (ce2, cg2) = SpinHalfState::from_amplitudes(ce, cg).unwrap().amplitudes().unwrap();
        assert!((ce2 - ce).norm() < 1e-12 && (cg2 - cg).norm() < 1e-12);
        assert!(SpinHalfState::maximally_mixed().amplitudes().is_err());
        assert!(SpinHalfState::new([1.0, 0.5, 0.0]).is_err());
    }

    #[test]
    fn bloch_point_validation() {
        assert!(BlochPoint::new(-0.1, 0.0).is_err());
        assert!(BlochPoint::new(3.2, 0.0).is_err());
        let p = BlochPoint::new(1.0, -0.5).unwrap();
        assert!((p.phi() - (2.0 * PI - 0.5)).abs() < 1e-15);
        let v = p.unit_vector();
        assert!((v[0] * v[0] + v[1] * v[1] + v[2] * v[2] - 1.0).abs() < 1e-15);
    }
}
