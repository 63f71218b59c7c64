//! Adaptive Gauss-Kronrod quadrature on finite intervals and half-lines.
//!
//! The core routine integrates a vector of integrands that share their
//! abscissae. All Hermite projection coefficients `h_0..h_N` come out of one
//! pass, and every component is held to its own tolerance. Scalar
//! integration is the one-component case.
//!
//! Half-lines are truncated where a caller-supplied Gaussian envelope falls
//! below `1e-18` of its largest value on the domain. The interval is then
//! handled like any finite interval.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

/// Envelope ratio at which half-line integrals are cut off.
pub const TAIL_CUTOFF: f64 = 1e-18;

#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.000_000_000_000_000_000_000_000_000_000_000,
];

#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

const NODES: usize = 21;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-14,
            max_subdivisions: 2000,
        }
    }
}

impl QuadratureSpec {
    pub fn new(rel_tol: f64, abs_tol: f64, max_subdivisions: usize) -> Result<Self> {
        let spec = Self {
            rel_tol,
            abs_tol,
            max_subdivisions,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.rel_tol.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "rel_tol must be positive (got {})",
                self.rel_tol
            )));
        }
        if !(self.abs_tol > 0.0 && self.abs_tol.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "abs_tol must be positive (got {})",
                self.abs_tol
            )));
        }
        if self.max_subdivisions < 1 {
            return Err(Error::InvalidParameter(
                "max_subdivisions must be at least 1".into(),
            ));
        }
        Ok(())
    }

    fn tolerance(&self, value: f64) -> f64 {
        self.abs_tol.max(self.rel_tol * value.abs())
    }
}

/// An integral together with its estimated absolute error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

/// Componentwise integrals and error estimates.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorEstimate {
    pub values: Vec<f64>,
    pub errors: Vec<f64>,
}

/// Gaussian decay envelope: `|f(x)| <= C exp(-rate (x - center)^2)` for some
/// constant `C`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianDecay {
    pub center: f64,
    pub rate: f64,
}

impl GaussianDecay {
    pub fn new(center: f64, rate: f64) -> Result<Self> {
        if !center.is_finite() || !(rate > 0.0 && rate.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "decay envelope needs a finite center and positive rate (got {center}, {rate})"
            )));
        }
        Ok(Self { center, rate })
    }

    fn reach(&self, anchor: f64) -> f64 {
        let d = anchor - self.center;
        (d * d + (1.0 / TAIL_CUTOFF).ln() / self.rate).sqrt()
    }

    /// Point above which the envelope is below `TAIL_CUTOFF` times its
    /// maximum over `[lower, inf)`.
    pub fn upper_cutoff(&self, lower: f64) -> f64 {
        self.center + self.reach(lower.max(self.center))
    }

    /// Mirror of [`upper_cutoff`](Self::upper_cutoff) for `(-inf, upper]`.
    pub fn lower_cutoff(&self, upper: f64) -> f64 {
        self.center - self.reach(upper.min(self.center))
    }
}

/// Adaptive integral of `f` over `[a, b]`.
pub fn integrate_interval<F>(f: F, a: f64, b: f64, spec: &QuadratureSpec) -> Result<Estimate>
where
    F: Fn(f64) -> f64,
{
    if !(a.is_finite() && b.is_finite()) || a >= b {
        return Err(Error::Usage(format!(
            "integration bounds must be finite with a < b (got [{a}, {b}])"
        )));
    }
    let est = integrate_vector(|x, out: &mut [f64]| out[0] = f(x), 1, &[a, b], spec)?;
    Ok(Estimate {
        value: est.values[0],
        error: est.errors[0],
    })
}

/// Adaptive integral of `f` over `[lower, inf)`; the upper limit comes from
/// `decay`.
pub fn integrate_halfline<F>(
    f: F,
    lower: f64,
    decay: GaussianDecay,
    spec: &QuadratureSpec,
) -> Result<Estimate>
where
    F: Fn(f64) -> f64,
{
    if !lower.is_finite() {
        return Err(Error::Usage(format!("lower limit must be finite (got {lower})")));
    }
    integrate_interval(f, lower, decay.upper_cutoff(lower), spec)
}

/// Adaptive integral of `f` over `(-inf, upper]`.
pub fn integrate_lower_halfline<F>(
    f: F,
    upper: f64,
    decay: GaussianDecay,
    spec: &QuadratureSpec,
) -> Result<Estimate>
where
    F: Fn(f64) -> f64,
{
    if !upper.is_finite() {
        return Err(Error::Usage(format!("upper limit must be finite (got {upper})")));
    }
    integrate_interval(f, decay.lower_cutoff(upper), upper, spec)
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    priority: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.priority.total_cmp(&other.priority) == Ordering::Equal
    }
}

impl Eq for Panel {}

impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.priority.total_cmp(&other.priority)
    }
}

/// Scratch space for one 21-point Gauss-Kronrod panel evaluation.
struct Kronrod {
    dim: usize,
    samples: Vec<f64>,
    kronrod: Vec<f64>,
    error: Vec<f64>,
    magnitude: Vec<f64>,
}

impl Kronrod {
    fn new(dim: usize) -> Self {
        Self {
            dim,
            samples: vec![0.0; NODES * dim],
            kronrod: vec![0.0; dim],
            error: vec![0.0; dim],
            magnitude: vec![0.0; dim],
        }
    }

    /// Fills `kronrod` and `error` for the panel `[a, b]`. The error uses the
    /// QUADPACK rescaling of `|K21 - G10|`.
    #[allow(clippy::needless_range_loop)]
    fn apply<F>(&mut self, f: &mut F, a: f64, b: f64)
    where
        F: FnMut(f64, &mut [f64]),
    {
        let dim = self.dim;
        let center = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        // Node layout: 0 = center, 1 + 2j / 2 + 2j = center -/+ half * XGK[j].
        f(center, &mut self.samples[..dim]);
        for j in 0..10 {
            let dx = half * XGK[j];
            let (lo, hi) = (1 + 2 * j, 2 + 2 * j);
            f(center - dx, &mut self.samples[lo * dim..(lo + 1) * dim]);
            f(center + dx, &mut self.samples[hi * dim..(hi + 1) * dim]);
        }
        let abs_half = half.abs();
        for c in 0..dim {
            let fc = self.samples[c];
            let mut res_k = WGK[10] * fc;
            let mut res_g = 0.0;
            let mut res_abs = WGK[10] * fc.abs();
            for j in 0..10 {
                let f1 = self.samples[(1 + 2 * j) * dim + c];
                let f2 = self.samples[(2 + 2 * j) * dim + c];
                res_k += WGK[j] * (f1 + f2);
                res_abs += WGK[j] * (f1.abs() + f2.abs());
                if j % 2 == 1 {
                    res_g += WG[j / 2] * (f1 + f2);
                }
            }
            let mean = 0.5 * res_k;
            let mut res_asc = WGK[10] * (fc - mean).abs();
            for j in 0..10 {
                let f1 = self.samples[(1 + 2 * j) * dim + c];
                let f2 = self.samples[(2 + 2 * j) * dim + c];
                res_asc += WGK[j] * ((f1 - mean).abs() + (f2 - mean).abs());
            }
            self.kronrod[c] = res_k * half;
            self.magnitude[c] = res_abs * abs_half;
            self.error[c] = rescale_error(
                ((res_k - res_g) * half).abs(),
                res_abs * abs_half,
                res_asc * abs_half,
            );
        }
    }
}

fn rescale_error(err: f64, res_abs: f64, res_asc: f64) -> f64 {
    let mut scaled = err;
    if res_asc != 0.0 && scaled != 0.0 {
        let scale = (200.0 * scaled / res_asc).powf(1.5);
        scaled = if scale < 1.0 { res_asc * scale } else { res_asc };
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        scaled = scaled.max(50.0 * f64::EPSILON * res_abs);
    }
    scaled
}

/// Globally adaptive integration of `dim` integrands at once.
///
/// `f(x, out)` writes all components at `x`. `breakpoints` is the initial
/// partition, strictly increasing with at least two entries. Integration
/// stops once every component satisfies
/// `error <= max(abs_tol, rel_tol * |value|, 50 eps integral |f|)`; the last
/// term is the rounding floor below which bisection cannot go. The panel with the largest
/// tolerance-relative error is bisected first. Exhausting
/// `max_subdivisions` panels gives [`Error::Convergence`] naming the worst
/// component.
pub fn integrate_vector<F>(
    mut f: F,
    dim: usize,
    breakpoints: &[f64],
    spec: &QuadratureSpec,
) -> Result<VectorEstimate>
where
    F: FnMut(f64, &mut [f64]),
{
    spec.validate()?;
    if dim == 0 {
        return Err(Error::Usage("vector integrand needs at least one component".into()));
    }
    if breakpoints.len() < 2
        || breakpoints.windows(2).any(|w| !(w[0] < w[1]))
        || breakpoints.iter().any(|x| !x.is_finite())
    {
        return Err(Error::Usage(
            "breakpoints must be finite and strictly increasing, at least two".into(),
        ));
    }

    let mut rule = Kronrod::new(dim);
    let mut values = vec![0.0; dim];
    let mut errors = vec![0.0; dim];
    let mut mass = vec![0.0; dim];
    let mut initial = Vec::with_capacity(breakpoints.len() - 1);
    for w in breakpoints.windows(2) {
        rule.apply(&mut f, w[0], w[1]);
        accumulate(&mut values, &mut errors, &mut mass, &rule, 1.0);
        initial.push((w[0], w[1], rule.error.clone()));
    }
    let mut heap: BinaryHeap<Panel> = initial
        .into_iter()
        .map(|(a, b, err)| Panel {
            a,
            b,
            priority: priority(&err, &values, &mass, spec),
        })
        .collect();
    let mut panel_count = heap.len();

    loop {
        if converged(&values, &errors, &mass, spec) {
            break;
        }
        if panel_count >= spec.max_subdivisions {
            return Err(failure(&values, &errors, &mass, spec));
        }
        let Some(top) = heap.pop() else {
            return Err(failure(&values, &errors, &mass, spec));
        };
        let mid = 0.5 * (top.a + top.b);
        if !(top.a < mid && mid < top.b) || top.priority <= 0.0 {
            // Cannot split further at f64 resolution; nothing left to gain.
            return Err(failure(&values, &errors, &mass, spec));
        }
        rule.apply(&mut f, top.a, top.b);
        accumulate(&mut values, &mut errors, &mut mass, &rule, -1.0);
        for (a, b) in [(top.a, mid), (mid, top.b)] {
            rule.apply(&mut f, a, b);
            accumulate(&mut values, &mut errors, &mut mass, &rule, 1.0);
            heap.push(Panel {
                a,
                b,
                priority: priority(&rule.error, &values, &mass, spec),
            });
        }
        panel_count += 1;
    }

    // Re-sum over the final partition so the add/subtract bookkeeping above
    // leaves no rounding residue in the result.
    let mut panels: Vec<Panel> = heap.into_vec();
    panels.sort_by(|p, q| p.a.total_cmp(&q.a));
    values.iter_mut().for_each(|v| *v = 0.0);
    errors.iter_mut().for_each(|e| *e = 0.0);
    mass.iter_mut().for_each(|m| *m = 0.0);
    for p in &panels {
        rule.apply(&mut f, p.a, p.b);
        accumulate(&mut values, &mut errors, &mut mass, &rule, 1.0);
    }
    Ok(VectorEstimate { values, errors })
}

fn accumulate(
    values: &mut [f64],
    errors: &mut [f64],
    mass: &mut [f64],
    rule: &Kronrod,
    sign: f64,
) {
    for c in 0..values.len() {
        values[c] += sign * rule.kronrod[c];
        errors[c] = (errors[c] + sign * rule.error[c]).max(0.0);
        mass[c] = (mass[c] + sign * rule.magnitude[c]).max(0.0);
    }
}

fn component_tolerance(value: f64, mass: f64, spec: &QuadratureSpec) -> f64 {
    spec.tolerance(value).max(50.0 * f64::EPSILON * mass)
}

fn priority(panel_errors: &[f64], values: &[f64], mass: &[f64], spec: &QuadratureSpec) -> f64 {
    panel_errors
        .iter()
        .zip(values.iter().zip(mass))
        .map(|(e, (v, m))| e / component_tolerance(*v, *m, spec))
        .fold(0.0, f64::max)
}

fn converged(values: &[f64], errors: &[f64], mass: &[f64], spec: &QuadratureSpec) -> bool {
    values
        .iter()
        .zip(errors.iter().zip(mass))
        .all(|(v, (e, m))| *e <= component_tolerance(*v, *m, spec))
}

fn failure(values: &[f64], errors: &[f64], mass: &[f64], spec: &QuadratureSpec) -> Error {
    let (worst, _) = values
        .iter()
        .zip(errors.iter().zip(mass))
        .map(|(v, (e, m))| e / component_tolerance(*v, *m, spec))
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (i, r)| if r > acc.1 { (i, r) } else { acc });
    Error::Convergence {
        component: (values.len() > 1).then_some(worst),
        value: values[worst],
        error: errors[worst],
    }
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;

    fn spec() -> QuadratureSpec {
        QuadratureSpec::default()
    }

    #[test]
    fn kronrod_rule_is_exact_for_high_degree_polynomials() {
        // K21 integrates degree 31 exactly; one panel must do.
        let est = integrate_interval(|x| x.powi(30), -1.0, 1.0, &spec()).unwrap();
        assert!((est.value - 2.0 / 31.0).abs() < 1e-15);
    }

    #[test]
    fn interval_examples() {
        let one = integrate_interval(|_| 1.0, 0.0, 1.0, &spec()).unwrap();
        assert!((one.value - 1.0).abs() < 1e-15);
        let sine = integrate_interval(f64::sin, 0.0, PI, &spec()).unwrap();
        assert!((sine.value - 2.0).abs() < 1e-12);
        let h3 = |x: f64| {
            let h = 8.0 * x * x * x - 12.0 * x;
            h * h * (-x * x).exp()
        };
        let est = integrate_interval(h3, -10.0, 10.0, &spec()).unwrap();
        assert!((est.value - 48.0 * PI.sqrt()).abs() < 1e-9, "{}", est.value);
    }

    #[test]
    fn halfline_examples() {
        let g = GaussianDecay::new(0.0, 1.0).unwrap();
        let full = integrate_halfline(|x| (-x * x).exp(), -10.0, g, &spec()).unwrap();
        assert!((full.value - PI.sqrt()).abs() < 1e-12);
        let half = integrate_halfline(|x| (-x * x).exp(), 0.0, g, &spec()).unwrap();
        assert!((half.value - 0.5 * PI.sqrt()).abs() < 1e-12);
        let first = integrate_halfline(|x| x * (-x * x).exp(), 0.0, g, &spec()).unwrap();
        assert!((first.value - 0.5).abs() < 1e-12);
        let lower = integrate_lower_halfline(|x| (-x * x).exp(), 0.0, g, &spec()).unwrap();
        assert!((lower.value - 0.5 * PI.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn cutoff_tracks_the_envelope_peak() {
        let g = GaussianDecay::new(2.0, 0.5).unwrap();
        let hi = g.upper_cutoff(-5.0);
        assert!(((-0.5 * (hi - 2.0f64).powi(2)).exp() - TAIL_CUTOFF).abs() < 1e-20);
        // Past the center the anchor is the lower limit itself.
        let hi = g.upper_cutoff(5.0);
        let ratio = (-0.5 * ((hi - 2.0f64).powi(2) - 9.0)).exp();
        assert!((ratio / TAIL_CUTOFF - 1.0).abs() < 1e-9);
        let reach = g.upper_cutoff(2.0) - 2.0;
        assert!((g.lower_cutoff(10.0) - (2.0 - reach)).abs() < 1e-12);
    }

    #[test]
    fn error_estimates_are_honest() {
        type Case = (fn(f64) -> f64, f64, f64, f64);
        let cases: [Case; 6] = [
            (f64::exp, 0.0, 1.0, std::f64::consts::E - 1.0),
            (|x| 1.0 / (1.0 + x * x), -3.0, 5.0, 5f64.atan() + 3f64.atan()),
            (|x| x.sqrt(), 0.0, 2.0, 2.0 / 3.0 * 2f64.powf(1.5)),
            (|x| (10.0 * x).cos(), 0.0, 3.0, (30f64).sin() / 10.0),
            (|x| x.abs(), -1.0, 2.0, 2.5),
            (|x| x * (-x).exp(), 0.0, 5.0, 1.0 - 6.0 * (-5f64).exp()),
        ];
        for (i, (f, a, b, exact)) in cases.iter().enumerate() {
            let loose = QuadratureSpec::new(1e-6, 1e-12, 2000).unwrap();
            for s in [spec(), loose] {
                let est = integrate_interval(f, *a, *b, &s).unwrap();
                let true_err = (est.value - exact).abs();
                assert!(
                    true_err <= 10.0 * est.error.max(f64::EPSILON),
                    "case {i}: true {true_err:e} vs reported {:e}",
                    est.error
                );
            }
        }
    }

    #[test]
    fn additivity() {
        let f = |x: f64| (x * x).sin() * (-0.1 * x).exp();
        let whole = integrate_interval(f, 0.0, 6.0, &spec()).unwrap();
        let left = integrate_interval(f, 0.0, 2.5, &spec()).unwrap();
        let right = integrate_interval(f, 2.5, 6.0, &spec()).unwrap();
        let tol = whole.error + left.error + right.error + 1e-10 * whole.value.abs();
        assert!((left.value + right.value - whole.value).abs() <= tol.max(1e-14));
    }

    #[test]
    fn vector_components_meet_their_own_tolerances() {
        let est = integrate_vector(
            |x, out: &mut [f64]| {
                out[0] = x.cos();
                out[1] = 1e-12 * x.sin();
                out[2] = (40.0 * x).cos();
            },
            3,
            &[0.0, 1.0, 2.0],
            &spec(),
        )
        .unwrap();
        assert!((est.values[0] - 2f64.sin()).abs() < 1e-13);
        assert!((est.values[1] - 1e-12 * (1.0 - 2f64.cos())).abs() < 1e-14);
        assert!((est.values[2] - (80f64).sin() / 40.0).abs() < 1e-11);
    }

    #[test]
    fn exhausted_budget_reports_best_estimate() {
        let tight = QuadratureSpec::new(1e-15, 1e-300, 3).unwrap();
        let err = integrate_interval(|x| (50.0 * x).sin().abs(), 0.0, 10.0, &tight).unwrap_err();
        match err {
            Error::Convergence { component, value, error } => {
                assert_eq!(component, None);
                assert!(value.is_finite() && error > 0.0);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_bad_specs_and_bounds() {
        assert!(QuadratureSpec::new(0.0, 1e-14, 10).is_err());
        assert!(QuadratureSpec::new(1e-10, -1.0, 10).is_err());
        assert!(QuadratureSpec::new(1e-10, 1e-14, 0).is_err());
        assert!(integrate_interval(|x| x, 1.0, 0.0, &spec()).is_err());
        assert!(GaussianDecay::new(0.0, 0.0).is_err());
    }
}
