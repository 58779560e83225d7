//! Adaptive Gauss–Kronrod integration over intervals, the unit sphere and
//! the complex plane.
//!
//! Every integral in the crate goes through [`adaptive`]: a globally adaptive
//! 7/15-point Gauss–Kronrod scheme that always bisects the panel with the
//! largest error estimate. The integrand may be real, complex, or a fixed-size
//! vector of complex values (see [`QuadValue`]); vector integrands let several
//! moments share one set of function evaluations.
//!
//! Sphere and plane integrals are iterated one-dimensional integrals. Inner
//! integrals may fail, so every routine has a `try_` form that accepts a
//! fallible integrand and propagates the first error.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{domain, Error, Result};
use crate::su2_wigner::BlochPoint;

/// Kronrod abscissae on [-1, 1] (positive half; the last entry is the centre).
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

/// Gauss weights for the odd-indexed Kronrod abscissae and the centre.
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Values that can be integrated: a vector space with a norm.
pub trait QuadValue: Copy {
    fn zero() -> Self;
    fn add(self, other: Self) -> Self;
    fn scale(self, k: f64) -> Self;
    fn norm(self) -> f64;
    fn components(self) -> Vec<Complex64>;

    fn sub(self, other: Self) -> Self {
        self.add(other.scale(-1.0))
    }
}

impl QuadValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn add(self, other: Self) -> Self {
        self + other
    }
    fn scale(self, k: f64) -> Self {
        self * k
    }
    fn norm(self) -> f64 {
        self.abs()
    }
    fn components(self) -> Vec<Complex64> {
        vec![Complex64::new(self, 0.0)]
    }
}

impl QuadValue for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn add(self, other: Self) -> Self {
        self + other
    }
    fn scale(self, k: f64) -> Self {
        self * k
    }
    fn norm(self) -> f64 {
        self.norm()
    }
    fn components(self) -> Vec<Complex64> {
        vec![self]
    }
}

impl<const N: usize> QuadValue for [Complex64; N] {
    fn zero() -> Self {
        [Complex64::new(0.0, 0.0); N]
    }
    fn add(mut self, other: Self) -> Self {
        for (x, y) in self.iter_mut().zip(other) {
            *x += y;
        }
        self
    }
    fn scale(mut self, k: f64) -> Self {
        for x in self.iter_mut() {
            *x *= k;
        }
        self
    }
    // max-norm, so the tolerance applies to every component
    fn norm(self) -> f64 {
        self.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
    fn components(self) -> Vec<Complex64> {
        self.to_vec()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrationSpec {
    relative_tolerance: f64,
    absolute_tolerance: f64,
    max_subdivisions: usize,
    radial_cutoff_sigmas: f64,
}

impl IntegrationSpec {
    pub fn new(
        relative_tolerance: f64,
        absolute_tolerance: f64,
        max_subdivisions: usize,
        radial_cutoff_sigmas: f64,
    ) -> Result<Self> {
        if !(relative_tolerance > 0.0) {
            return Err(domain("relative_tolerance must be > 0"));
        }
        if !(absolute_tolerance > 0.0) {
            return Err(domain("absolute_tolerance must be > 0"));
        }
        if max_subdivisions < 1 {
            return Err(domain("max_subdivisions must be >= 1"));
        }
        if !(radial_cutoff_sigmas >= 6.0) {
            return Err(domain("radial_cutoff_sigmas must be >= 6"));
        }
        Ok(Self {
            relative_tolerance,
            absolute_tolerance,
            max_subdivisions,
            radial_cutoff_sigmas,
        })
    }

    pub fn relative_tolerance(&self) -> f64 {
        self.relative_tolerance
    }

    pub fn absolute_tolerance(&self) -> f64 {
        self.absolute_tolerance
    }

    pub fn max_subdivisions(&self) -> usize {
        self.max_subdivisions
    }

    pub fn radial_cutoff_sigmas(&self) -> f64 {
        self.radial_cutoff_sigmas
    }

    fn tolerance_for(&self, value: f64) -> f64 {
        (self.relative_tolerance * value).max(self.absolute_tolerance)
    }
}

impl Default for IntegrationSpec {
    fn default() -> Self {
        Self {
            relative_tolerance: 1e-10,
            absolute_tolerance: 1e-12,
            max_subdivisions: 1 << 16,
            radial_cutoff_sigmas: 10.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrationResult<T> {
    pub value: T,
    pub error_estimate: f64,
    pub evaluations: usize,
}

struct Panel<T> {
    a: f64,
    b: f64,
    value: T,
    error: f64,
}

fn rescale_error(err: f64, res_abs: f64, res_asc: f64) -> f64 {
    let mut scaled = err.abs();
    if res_asc != 0.0 && scaled != 0.0 {
        let scale = (200.0 * scaled / res_asc).powf(1.5);
        scaled = if scale < 1.0 { res_asc * scale } else { res_asc };
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        scaled = scaled.max(50.0 * f64::EPSILON * res_abs);
    }
    scaled
}

fn gauss_kronrod<T, F>(f: &mut F, a: f64, b: f64) -> Result<Panel<T>>
where
    T: QuadValue,
    F: FnMut(f64) -> Result<T>,
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center)?;

    let mut fv = [(T::zero(), T::zero()); 7];
    let mut res_k = fc.scale(WGK[7]);
    let mut res_g = fc.scale(WG[3]);
    let mut res_abs = WGK[7] * fc.norm();
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx)?;
        let f2 = f(center + dx)?;
        let sum = f1.add(f2);
        res_k = res_k.add(sum.scale(WGK[j]));
        if j % 2 == 1 {
            res_g = res_g.add(sum.scale(WG[j / 2]));
        }
        res_abs += WGK[j] * (f1.norm() + f2.norm());
        fv[j] = (f1, f2);
    }
    let mean = res_k.scale(0.5);
    let mut res_asc = WGK[7] * fc.sub(mean).norm();
    for j in 0..7 {
        res_asc += WGK[j] * (fv[j].0.sub(mean).norm() + fv[j].1.sub(mean).norm());
    }
    let h = half.abs();
    let err = res_k.sub(res_g).scale(half).norm();
    Ok(Panel {
        a,
        b,
        value: res_k.scale(half),
        error: rescale_error(err, res_abs * h, res_asc * h),
    })
}

#[derive(PartialEq)]
struct Queued {
    error: f64,
    seq: usize,
}

impl Eq for Queued {}

impl Ord for Queued {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

impl PartialOrd for Queued {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

const EVALS_PER_PANEL: usize = 15;

/// Globally adaptive Gauss–Kronrod integration of `f` over `[a, b]`.
///
/// `breaks` are interior points where the integrand is known to change
/// character (peaks, kinks); they seed the initial panel set.
pub fn adaptive<T, F>(
    mut f: F,
    a: f64,
    b: f64,
    breaks: &[f64],
    spec: &IntegrationSpec,
) -> Result<IntegrationResult<T>>
where
    T: QuadValue,
    F: FnMut(f64) -> Result<T>,
{
    if !(a <= b) {
        return Err(domain(format!("interval [{a}, {b}] is reversed or not finite")));
    }
    if a == b {
        return Ok(IntegrationResult {
            value: T::zero(),
            error_estimate: 0.0,
            evaluations: 0,
        });
    }

    let mut edges = vec![a];
    let mut interior: Vec<f64> = breaks.iter().copied().filter(|x| *x > a && *x < b).collect();
    interior.sort_by(f64::total_cmp);
    interior.dedup();
    edges.extend(interior);
    edges.push(b);

    let mut panels: Vec<Panel<T>> = Vec::new();
    let mut queue = BinaryHeap::new();
    let mut total = T::zero();
    let mut total_err = 0.0;
    let mut frozen_err = 0.0;
    for w in edges.windows(2) {
        let p = gauss_kronrod(&mut f, w[0], w[1])?;
        total = total.add(p.value);
        total_err += p.error;
        queue.push(Queued { error: p.error, seq: panels.len() });
        panels.push(p);
    }
    let min_width = 64.0 * f64::EPSILON * a.abs().max(b.abs()).max(1.0);

    while total_err > spec.tolerance_for(total.norm()) {
        let Some(Queued { seq, .. }) = queue.pop() else {
            break;
        };
        if panels.len() + 1 > spec.max_subdivisions {
            queue.push(Queued { error: panels[seq].error, seq });
            break;
        }
        let (pa, pb) = (panels[seq].a, panels[seq].b);
        if pb - pa < min_width {
            // cannot be refined further in floating point
            frozen_err += panels[seq].error;
            continue;
        }
        let mid = 0.5 * (pa + pb);
        let left = gauss_kronrod(&mut f, pa, mid)?;
        let right = gauss_kronrod(&mut f, mid, pb)?;
        total = total.sub(panels[seq].value).add(left.value).add(right.value);
        total_err += left.error + right.error - panels[seq].error;
        panels[seq] = left;
        queue.push(Queued { error: panels[seq].error, seq });
        queue.push(Queued { error: right.error, seq: panels.len() });
        panels.push(right);
    }

    // Final sums in left-to-right order, independent of refinement history.
    let mut order: Vec<usize> = (0..panels.len()).collect();
    order.sort_by(|&i, &j| panels[i].a.total_cmp(&panels[j].a));
    let value = order.iter().fold(T::zero(), |acc, &i| acc.add(panels[i].value));
    let error_estimate: f64 = order.iter().map(|&i| panels[i].error).sum();
    let evaluations = EVALS_PER_PANEL * (2 * panels.len() - (edges.len() - 1));

    if error_estimate - frozen_err > spec.tolerance_for(value.norm()) {
        return Err(Error::NoConvergence {
            best: value.components(),
            error_estimate,
            subdivisions: panels.len(),
        });
    }
    Ok(IntegrationResult {
        value,
        error_estimate,
        evaluations,
    })
}

/// Trapezoid rule for a `period`-periodic integrand over one period starting
/// at `a`, doubling the node count from 16 until successive estimates agree.
/// Converges geometrically for analytic integrands and is exact for
/// trigonometric polynomials of degree below the node count.
pub fn periodic<T, F>(mut f: F, a: f64, period: f64, spec: &IntegrationSpec) -> Result<IntegrationResult<T>>
where
    T: QuadValue,
    F: FnMut(f64) -> Result<T>,
{
    if !(period > 0.0) || !period.is_finite() {
        return Err(domain(format!("period must be positive and finite, got {period}")));
    }
    let mut n = 16usize;
    let mut sum = T::zero();
    for k in 0..n {
        sum = sum.add(f(a + period * k as f64 / n as f64)?);
    }
    let mut estimate = sum.scale(period / n as f64);
    loop {
        // midpoints of the current grid
        let mut mid = T::zero();
        for k in 0..n {
            mid = mid.add(f(a + period * (k as f64 + 0.5) / n as f64)?);
        }
        sum = sum.add(mid);
        n *= 2;
        let next = sum.scale(period / n as f64);
        let change = next.sub(estimate).norm();
        estimate = next;
        if change <= spec.tolerance_for(estimate.norm()) {
            return Ok(IntegrationResult {
                value: estimate,
                error_estimate: change,
                evaluations: n,
            });
        }
        if n >= spec.max_subdivisions.max(16) * EVALS_PER_PANEL {
            return Err(Error::NoConvergence {
                best: estimate.components(),
                error_estimate: change,
                subdivisions: n,
            });
        }
    }
}

pub fn integrate_interval<T, F>(mut f: F, a: f64, b: f64, spec: &IntegrationSpec) -> Result<IntegrationResult<T>>
where
    T: QuadValue,
    F: FnMut(f64) -> T,
{
    adaptive(|x| Ok(f(x)), a, b, &[], spec)
}

pub fn try_integrate_interval<T, F>(f: F, a: f64, b: f64, spec: &IntegrationSpec) -> Result<IntegrationResult<T>>
where
    T: QuadValue,
    F: FnMut(f64) -> Result<T>,
{
    adaptive(f, a, b, &[], spec)
}

/// Iterated integral `∫ outer ∫ inner`, accumulating the inner error
/// estimates conservatively (outer measure times worst inner error).
fn nested<T, F>(
    mut f: F,
    outer: (f64, f64),
    inner: (f64, f64),
    spec: &IntegrationSpec,
) -> Result<IntegrationResult<T>>
where
    T: QuadValue,
    F: FnMut(f64, f64) -> Result<T>,
{
    let mut inner_evals = 0;
    let mut worst_inner = 0.0f64;
    let mut outer_res = adaptive(
        |x| {
            let r = adaptive(|y| f(x, y), inner.0, inner.1, &[], spec)?;
            inner_evals += r.evaluations;
            worst_inner = worst_inner.max(r.error_estimate);
            Ok(r.value)
        },
        outer.0,
        outer.1,
        &[],
        spec,
    )?;
    outer_res.error_estimate += (outer.1 - outer.0) * worst_inner;
    outer_res.evaluations = inner_evals;
    Ok(outer_res)
}

/// `∫ f(Ω) sinθ dθ dφ` over the whole sphere.
pub fn try_integrate_sphere<T, F>(mut f: F, spec: &IntegrationSpec) -> Result<IntegrationResult<T>>
where
    T: QuadValue,
    F: FnMut(&BlochPoint) -> Result<T>,
{
    nested(
        |theta, phi| Ok(f(&BlochPoint::from_quadrature(theta, phi))?.scale(theta.sin())),
        (0.0, PI),
        (0.0, 2.0 * PI),
        spec,
    )
}

pub fn integrate_sphere<T, F>(mut f: F, spec: &IntegrationSpec) -> Result<IntegrationResult<T>>
where
    T: QuadValue,
    F: FnMut(&BlochPoint) -> T,
{
    try_integrate_sphere(|p| Ok(f(p)), spec)
}

/// `∫ f(α) d²α` in polar coordinates about `center`, truncated at
/// `radial_cutoff_sigmas · width`.
pub fn try_integrate_plane<T, F>(
    mut f: F,
    center: Complex64,
    width: f64,
    spec: &IntegrationSpec,
) -> Result<IntegrationResult<T>>
where
    T: QuadValue,
    F: FnMut(Complex64) -> Result<T>,
{
    if !(width > 0.0) {
        return Err(domain("plane integration width must be > 0"));
    }
    let radius = spec.radial_cutoff_sigmas * width;
    nested(
        |r, phi| Ok(f(center + Complex64::from_polar(r, phi))?.scale(r)),
        (0.0, radius),
        (0.0, 2.0 * PI),
        spec,
    )
}

pub fn integrate_plane<T, F>(
    mut f: F,
    center: Complex64,
    width: f64,
    spec: &IntegrationSpec,
) -> Result<IntegrationResult<T>>
where
    T: QuadValue,
    F: FnMut(Complex64) -> T,
{
    try_integrate_plane(|z| Ok(f(z)), center, width, spec)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec() -> IntegrationSpec {
        IntegrationSpec::default()
    }

    #[test]
    fn interval_examples() {
        let r = integrate_interval(f64::sin, 0.0, PI, &spec()).unwrap();
        assert!((r.value - 2.0).abs() < 1e-12);
        assert!(r.error_estimate >= 0.0);
        let r = integrate_interval(|u| u, -1.0, 1.0, &spec()).unwrap();
        assert!(r.value.abs() < 1e-14);
        let r = integrate_interval(|u| (1.0 - 3f64.sqrt() * u) / 2.0, -1.0, 1.0, &spec()).unwrap();
        assert!((r.value - 1.0).abs() < 1e-14);
    }

    #[test]
    fn oscillatory_complex_integrand() {
        // ∫_{-1}^{1} e^{iκu} du = 2 sin κ / κ
        let k = 40.0;
        let r = integrate_interval(|u| Complex64::from_polar(1.0, k * u), -1.0, 1.0, &spec()).unwrap();
        assert!((r.value.re - 2.0 * f64::sin(k) / k).abs() < 1e-12);
        assert!(r.value.im.abs() < 1e-12);
    }

    #[test]
    fn periodic_examples() {
        // ∫₀^{2π} e^{c cos φ} dφ = 2π I₀(c); I₀(3) = 4.880792585865024
        let r = periodic(|p: f64| Ok((3.0 * p.cos()).exp()), 0.0, 2.0 * PI, &spec()).unwrap();
        assert!((r.value - 2.0 * PI * 4.880_792_585_865_024).abs() < 1e-11);
        let r = periodic(|p: f64| Ok(Complex64::from_polar(1.0 + p.cos(), -p)), 0.7, 2.0 * PI, &spec()).unwrap();
        assert!((r.value - Complex64::new(PI, 0.0)).norm() < 1e-14);
        assert_eq!(r.evaluations, 32);
        assert!(periodic(|_| Ok(1.0), 0.0, -1.0, &spec()).is_err());
    }

    #[test]
    fn breakpoints_find_narrow_peaks() {
        // a peak narrower than the node spacing is invisible unless its
        // support is bracketed
        let w: f64 = 1e-5;
        let g = |x: f64| (-(x - 0.3).powi(2) / (2.0 * w * w)).exp() / (w * (2.0 * PI).sqrt());
        let r = adaptive(|x| Ok(g(x)), -1.0, 1.0, &[0.3 - 8.0 * w, 0.3, 0.3 + 8.0 * w], &spec()).unwrap();
        assert!((r.value - 1.0).abs() < 1e-10);
    }

    #[test]
    fn reversed_interval_is_rejected() {
        assert!(matches!(integrate_interval(|x| x, 1.0, 0.0, &spec()), Err(Error::Domain(_))));
    }

    #[test]
    fn empty_interval() {
        let r = integrate_interval(|x| x, 2.0, 2.0, &spec()).unwrap();
        assert_eq!(r.value, 0.0);
    }

    #[test]
    fn no_convergence_carries_estimate() {
        let tight = IntegrationSpec::new(1e-15, 1e-300, 2, 10.0).unwrap();
        let err = integrate_interval(|x: f64| x.abs().sqrt() * (50.0 * x).sin(), -1.0, 1.3, &tight).unwrap_err();
        match err {
            Error::NoConvergence { best, subdivisions, .. } => {
                assert_eq!(best.len(), 1);
                assert!(best[0].re.is_finite());
                assert_eq!(subdivisions, 2);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn spec_validation() {
        assert!(IntegrationSpec::new(0.0, 1e-12, 10, 10.0).is_err());
        assert!(IntegrationSpec::new(1e-10, -1.0, 10, 10.0).is_err());
        assert!(IntegrationSpec::new(1e-10, 1e-12, 0, 10.0).is_err());
        assert!(IntegrationSpec::new(1e-10, 1e-12, 10, 5.0).is_err());
        let d = IntegrationSpec::default();
        assert_eq!(d.max_subdivisions(), 65536);
        assert_eq!(d.radial_cutoff_sigmas(), 10.0);
    }

    #[test]
    fn sphere_examples() {
        let r = integrate_sphere(|_| 1.0 / (4.0 * PI), &spec()).unwrap();
        assert!((r.value - 1.0).abs() < 1e-12);
        let r = integrate_sphere(|p| p.theta().cos() / (4.0 * PI), &spec()).unwrap();
        assert!(r.value.abs() < 1e-12);
        // ground-state spin Wigner function
        let r = integrate_sphere(|p| (1.0 - 3f64.sqrt() * p.theta().cos()) / (4.0 * PI), &spec()).unwrap();
        assert!((r.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn plane_gaussian_normalization() {
        for &(c, s) in &[(Complex64::new(0.0, 0.0), 1.0), (Complex64::new(2.0, -1.0), 0.3)] {
            let g = |z: Complex64| 2.0 / (PI * s * s) * (-2.0 * (z - c).norm_sqr() / (s * s)).exp();
            let r = integrate_plane(g, c, s, &spec()).unwrap();
            assert!((r.value - 1.0).abs() < 1e-10, "{}", r.value);
        }
    }

    #[test]
    fn vector_integrand_matches_components() {
        let k = 3.0;
        let r = integrate_interval(
            |u: f64| [Complex64::new(1.0, 0.0), Complex64::from_polar(1.0, k * u), Complex64::new(u * u, 0.0)],
            -1.0,
            1.0,
            &spec(),
        )
        .unwrap();
        assert!((r.value[0].re - 2.0).abs() < 1e-13);
        assert!((r.value[1].re - 2.0 * f64::sin(k) / k).abs() < 1e-13);
        assert!((r.value[2].re - 2.0 / 3.0).abs() < 1e-13);
    }

    #[test]
    fn inner_errors_propagate() {
        let r: Result<IntegrationResult<f64>> = try_integrate_interval(
            |x| if x > 0.5 { Err(Error::Domain("boom".into())) } else { Ok(x) },
            0.0,
            1.0,
            &spec(),
        );
        assert!(matches!(r, Err(Error::Domain(_))));
    }
}
