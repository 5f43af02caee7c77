//! Globally adaptive Gauss–Kronrod (7/15) quadrature for vector-valued
//! integrands over a list of panels.
//!
//! Callers split the domain at every known discontinuity so that each panel
//! holds a smooth integrand; the adaptive loop then bisects whichever panel
//! carries the largest share of the error until every component meets
//! `max(abs_tol, rel_tol * |I|)`.

use rayon::prelude::*;

use crate::error::NumericError;

#[allow(clippy::excessive_precision)]
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

#[allow(clippy::excessive_precision)]
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

/// Gauss weights for the nodes `XGK[1], XGK[3], XGK[5], XGK[7]`.
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Upper bound on the number of live subintervals.
    pub max_intervals: usize,
    /// Evaluate batches of subintervals on the rayon pool.
    pub parallel: bool,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-6,
            abs_tol: 0.0,
            max_intervals: 4000,
            parallel: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuadResult {
    pub values: Vec<f64>,
    pub errors: Vec<f64>,
    pub evaluations: usize,
}

#[derive(Debug, Clone)]
struct Segment {
    a: f64,
    b: f64,
    value: Vec<f64>,
    error: Vec<f64>,
}

fn rescale_error(err: f64, res_abs: f64, res_asc: f64) -> f64 {
    let mut e = err.abs();
    if res_asc != 0.0 && e != 0.0 {
        let scale = (200.0 * e / res_asc).powf(1.5);
        e = if scale < 1.0 { res_asc * scale } else { res_asc };
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        e = e.max(50.0 * f64::EPSILON * res_abs);
    }
    e
}

/// One 15-point Kronrod evaluation on `[a, b]`.
fn gk15<F>(f: &F, a: f64, b: f64, dim: usize) -> Segment
where
    F: Fn(f64, &mut [f64]),
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut fc = vec![0.0; dim];
    f(center, &mut fc);
    let mut fv1 = vec![0.0; 7 * dim];
    let mut fv2 = vec![0.0; 7 * dim];
    for j in 0..7 {
        let dx = half * XGK[j];
        f(center - dx, &mut fv1[j * dim..(j + 1) * dim]);
        f(center + dx, &mut fv2[j * dim..(j + 1) * dim]);
    }
    let mut value = vec![0.0; dim];
    let mut error = vec![0.0; dim];
    for i in 0..dim {
        let mut res_k = fc[i] * WGK[7];
        let mut res_g = fc[i] * WG[3];
        let mut res_abs = res_k.abs();
        for j in 0..7 {
            let (l, r) = (fv1[j * dim + i], fv2[j * dim + i]);
            res_k += WGK[j] * (l + r);
            res_abs += WGK[j] * (l.abs() + r.abs());
            if j % 2 == 1 {
                res_g += WG[j / 2] * (l + r);
            }
        }
        let mean = res_k * 0.5;
        let mut res_asc = WGK[7] * (fc[i] - mean).abs();
        for j in 0..7 {
            res_asc += WGK[j] * ((fv1[j * dim + i] - mean).abs() + (fv2[j * dim + i] - mean).abs());
        }
        value[i] = res_k * half;
        error[i] = rescale_error((res_k - res_g) * half, res_abs * half.abs(), res_asc * half.abs());
    }
    Segment { a, b, value, error }
}

/// Integrates the `dim`-component integrand `f(x, out)` over the union of
/// `panels`. Empty or reversed panels are skipped.
pub fn integrate_panels<F>(f: F, panels: &[(f64, f64)], dim: usize, opts: &QuadOptions) -> Result<QuadResult, NumericError>
where
    F: Fn(f64, &mut [f64]) + Sync,
{
    let eval = |segs: Vec<(f64, f64)>| -> Vec<Segment> {
        if opts.parallel && segs.len() > 1 {
            segs.into_par_iter().map(|(a, b)| gk15(&f, a, b, dim)).collect()
        } else {
            segs.into_iter().map(|(a, b)| gk15(&f, a, b, dim)).collect()
        }
    };

    let initial: Vec<(f64, f64)> = panels.iter().copied().filter(|&(a, b)| b > a).collect();
    let mut segments = eval(initial);
    let mut evaluations = segments.len() * 15;

    loop {
        let (values, errors) = totals(&segments, dim);
        let tol: Vec<f64> = values.iter().map(|v| opts.abs_tol.max(opts.rel_tol * v.abs())).collect();
        let converged = errors.iter().zip(&tol).all(|(e, t)| e <= t);
        if converged {
            return Ok(finish(segments, dim, evaluations));
        }

        // normalized error of each segment; segments too short to split are frozen
        let score = |s: &Segment| -> f64 {
            if (s.b - s.a) <= 1e-12 * s.a.abs().max(s.b.abs()).max(1e-300) {
                return 0.0;
            }
            s.error
                .iter()
                .zip(&tol)
                .map(|(e, t)| if *t > 0.0 { e / t } else if *e > 0.0 { f64::INFINITY } else { 0.0 })
                .fold(0.0, f64::max)
        };
        let mut order: Vec<(usize, f64)> = segments.iter().enumerate().map(|(i, s)| (i, score(s))).collect();
        order.sort_by(|x, y| y.1.total_cmp(&x.1).then(x.0.cmp(&y.0)));
        if order.first().is_none_or(|&(_, sc)| sc == 0.0) {
            // nothing left to refine; accept if the remaining error is roundoff
            let worst = worst_ratio(&errors, &tol);
            if worst <= 10.0 {
                return Ok(finish(segments, dim, evaluations));
            }
            return Err(failure(&errors, &tol));
        }
        if segments.len() >= opts.max_intervals {
            return Err(failure(&errors, &tol));
        }

        let batch = if opts.parallel { 16 } else { 1 };
        let mut picked: Vec<usize> = order.iter().take(batch).filter(|x| x.1 > 0.0).map(|x| x.0).collect();
        picked.sort_unstable();
        let mut halves = Vec::with_capacity(picked.len() * 2);
        for &i in &picked {
            let s = &segments[i];
            let mid = 0.5 * (s.a + s.b);
            halves.push((s.a, mid));
            halves.push((mid, s.b));
        }
        for &i in picked.iter().rev() {
            segments.swap_remove(i);
        }
        evaluations += halves.len() * 15;
        segments.extend(eval(halves));
    }
}

fn totals(segments: &[Segment], dim: usize) -> (Vec<f64>, Vec<f64>) {
    let mut order: Vec<&Segment> = segments.iter().collect();
    order.sort_by(|x, y| x.a.total_cmp(&y.a));
    let mut v = vec![0.0; dim];
    let mut e = vec![0.0; dim];
    for s in order {
        for i in 0..dim {
            v[i] += s.value[i];
            e[i] += s.error[i];
        }
    }
    (v, e)
}

fn worst_ratio(errors: &[f64], tol: &[f64]) -> f64 {
    errors
        .iter()
        .zip(tol)
        .map(|(e, t)| if *t > 0.0 { e / t } else if *e > 0.0 { f64::INFINITY } else { 0.0 })
        .fold(0.0, f64::max)
}

fn failure(errors: &[f64], tol: &[f64]) -> NumericError {
    let (mut achieved, mut requested) = (0.0, 0.0);
    let mut worst = -1.0;
    for (e, t) in errors.iter().zip(tol) {
        let r = if *t > 0.0 { e / t } else { f64::INFINITY };
        if r > worst {
            worst = r;
            achieved = *e;
            requested = *t;
        }
    }
    NumericError::Quadrature { achieved, requested }
}

fn finish(segments: Vec<Segment>, dim: usize, evaluations: usize) -> QuadResult {
    let (values, errors) = totals(&segments, dim);
    QuadResult {
        values,
        errors,
        evaluations,
    }
}

/// Scalar convenience wrapper over [`integrate_panels`].
pub fn integrate<F>(f: F, a: f64, b: f64, opts: &QuadOptions) -> Result<f64, NumericError>
where
    F: Fn(f64) -> f64 + Sync,
{
    let r = integrate_panels(|x, out: &mut [f64]| out[0] = f(x), &[(a, b)], 1, opts)?;
    Ok(r.values[0])
}

/// Splits `[lo, hi]` at the sorted, deduplicated breakpoints strictly inside it.
pub fn split_at(lo: f64, hi: f64, breakpoints: &[f64]) -> Vec<(f64, f64)> {
    let mut cuts: Vec<f64> = breakpoints.iter().copied().filter(|&x| x > lo && x < hi).collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let mut out = Vec::with_capacity(cuts.len() + 1);
    let mut a = lo;
    for c in cuts {
        out.push((a, c));
        a = c;
    }
    if hi > a {
        out.push((a, hi));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_exact() {
        let opts = QuadOptions::default();
        let v = integrate(|x| x.powi(5) - 3.0 * x * x, 0.0, 2.0, &opts).unwrap();
        assert!((v - (64.0 / 6.0 - 8.0)).abs() < 1e-13);
    }

    #[test]
    fn smooth_and_peaked() {
        let opts = QuadOptions {
            rel_tol: 1e-10,
            ..Default::default()
        };
        let v = integrate(|x| (-x).exp(), 0.0, 50.0, &opts).unwrap();
        assert!((v - (1.0 - (-50f64).exp())).abs() < 1e-10);
        // narrow Lorentzian
        let eps = 1e-3;
        let v = integrate(|x| eps / (x * x + eps * eps), -1.0, 1.0, &opts).unwrap();
        assert!((v - 2.0 * (1.0 / eps).atan()).abs() < 1e-8);
    }

    #[test]
    fn discontinuity_handled_by_panels() {
        let opts = QuadOptions {
            rel_tol: 1e-12,
            ..Default::default()
        };
        let step = |x: f64| if x < 0.3 { 1.0 } else { 2.0 };
        let r = integrate_panels(|x, o: &mut [f64]| o[0] = step(x), &split_at(0.0, 1.0, &[0.3]), 1, &opts).unwrap();
        assert!((r.values[0] - 1.7).abs() < 1e-14);
        assert_eq!(r.evaluations, 30);
    }

    #[test]
    fn vector_components_converge_independently() {
        let opts = QuadOptions {
            rel_tol: 1e-9,
            parallel: true,
            ..Default::default()
        };
        let r = integrate_panels(
            |x, o: &mut [f64]| {
                o[0] = x.sin();
                o[1] = 1e-40 * x.sqrt();
                o[2] = 0.0;
            },
            &[(0.0, 3.0)],
            3,
            &opts,
        )
        .unwrap();
        assert!((r.values[0] - (1.0 - 3f64.cos())).abs() < 1e-12);
        assert!((r.values[1] / (1e-40 * 2.0 / 3.0 * 3f64.powf(1.5)) - 1.0).abs() < 1e-8);
        assert_eq!(r.values[2], 0.0);
    }

    #[test]
    fn parallel_is_deterministic() {
        let f = |x: f64, o: &mut [f64]| o[0] = (10.0 * x).sin().abs() + x.sqrt();
        let opts = QuadOptions {
            rel_tol: 1e-11,
            parallel: true,
            ..Default::default()
        };
        let a = integrate_panels(f, &[(0.0, 7.0)], 1, &opts).unwrap();
        let b = integrate_panels(f, &[(0.0, 7.0)], 1, &opts).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn reports_nonconvergence() {
        let opts = QuadOptions {
            rel_tol: 1e-14,
            max_intervals: 4,
            ..Default::default()
        };
        let err = integrate(|x| 1.0 / x.sqrt(), 0.0, 1.0, &opts).unwrap_err();
        assert!(matches!(err, NumericError::Quadrature { achieved, requested } if achieved > requested));
    }

    #[test]
    fn split_at_ignores_outside_points() {
        assert_eq!(split_at(0.0, 1.0, &[2.0, 0.5, -1.0, 0.5]), vec![(0.0, 0.5), (0.5, 1.0)]);
        assert_eq!(split_at(0.0, 1.0, &[]), vec![(0.0, 1.0)]);
    }
}
