use std::sync::Arc;

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::manifest::manifest;
use super::{CheckReport, Relation};
use crate::domain::Domain;
use crate::duality::{
    cameron_martin_subduality, duality_pairing, holder_evaluation_bound, lp_norm, min_kernel,
    SobolevFunction,
};
use crate::error::Result;
use crate::kernel::{
    basis_kernel, carleman_kernel, closed_form_kernel, gram, positivity_check, Basis, ClosedForm,
    FeatureFamily, KernelSpec, Verdict,
};
use crate::quadrature::{QuadratureConfig, QuadratureMeasure, QuadratureRule};
use crate::rkhs::{evaluation_bound, reproducing_check, RkhsFunction};

const ANCHOR_MIN: &str = "K(x,y) = min(x,y)";
const ANCHOR_POLY: &str = "K(x,y) = xᵀy+1";
const ANCHOR_GAUSS: &str = "K(x,y) = <Γ_x, Γ_y>, Gaussian Γ_x";

fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

fn uniform_points(rng: &mut ChaCha8Rng, n: usize, dim: usize, lo: f64, hi: f64) -> Vec<Vec<f64>> {
    (0..n)
        .map(|_| (0..dim).map(|_| rng.random_range(lo..hi)).collect())
        .collect()
}

fn unit_measure(nodes: usize) -> QuadratureMeasure {
    QuadratureMeasure::new(
        Domain::unit(),
        QuadratureConfig::new(QuadratureRule::GaussLegendre, nodes),
    )
    .expect("unit measure is valid")
}

fn gaussian_carleman(panels: usize, radius: f64) -> Result<KernelSpec> {
    let mu = QuadratureMeasure::new(
        Domain::real_line(),
        QuadratureConfig::new(QuadratureRule::GaussLegendreComposite, panels)
            .with_truncation_radius(radius),
    )?;
    carleman_kernel(FeatureFamily::Gaussian, mu)
}

/// Random expansion with 1 to 8 centers drawn from `[lo, hi]^dim`.
fn random_expansion(
    rng: &mut ChaCha8Rng,
    kernel: &Arc<KernelSpec>,
    dim: usize,
    lo: f64,
    hi: f64,
) -> Result<RkhsFunction> {
    let m = rng.random_range(1..=8usize);
    let centers = uniform_points(rng, m, dim, lo, hi);
    let coefficients = (0..m).map(|_| rng.random_range(-2.0..2.0)).collect();
    RkhsFunction::new(kernel.clone(), centers, coefficients)
}

/// The three closed forms reproduced by Carleman and basis constructions:
/// indicator features give `min`, affine features give `xᵀy + 1`, Gaussian
/// features give `exp(-(x-y)²/4)`.
pub fn verify_table1() -> Result<Vec<CheckReport>> {
    let m = &manifest().table1;
    let mut rng = rng(m.seed, 0);

    let cm = carleman_kernel(FeatureFamily::IndicatorBelow, unit_measure(8))?;
    let g = m.cameron_martin_grid;
    let mut worst = 0.0f64;
    for i in 0..g {
        for j in 0..g {
            let (x, y) = (i as f64 / (g - 1) as f64, j as f64 / (g - 1) as f64);
            worst = worst.max((cm.eval(&[x], &[y])? - x.min(y)).abs());
        }
    }
    let cameron_martin = CheckReport::new(
        "table1.cameron_martin",
        worst,
        Relation::AtMost,
        m.cameron_martin,
        ANCHOR_MIN,
    )
    .with_details(json!({ "grid": format!("{g}x{g}"), "at_0.3_0.7": cm.eval(&[0.3], &[0.7])? }));

    let mut worst = 0.0f64;
    for dim in [2usize, 5] {
        let k = basis_kernel(Basis::Affine { dim }, None)?;
        let origin = vec![0.0; dim];
        worst = worst.max((k.eval(&origin, &origin)? - 1.0).abs());
        for _ in 0..m.polynomial_pairs {
            let x: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
            let y: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
            let oracle = x.iter().zip(&y).map(|(a, b)| a * b).sum::<f64>() + 1.0;
            worst = worst.max((k.eval(&x, &y)? - oracle).abs());
        }
    }
    let polynomial = CheckReport::new(
        "table1.polynomial",
        worst,
        Relation::AtMost,
        m.polynomial,
        ANCHOR_POLY,
    )
    .with_details(json!({ "dims": [2, 5], "pairs_per_dim": m.polynomial_pairs }));

    let k = gaussian_carleman(m.gaussian_panels, m.gaussian_radius)?;
    let mut worst = 0.0f64;
    for i in 0..=8 {
        for j in 0..=8 {
            let (x, y) = (-2.0 + 0.5 * i as f64, -2.0 + 0.5 * j as f64);
            let oracle = (-(x - y) * (x - y) / 4.0).exp();
            worst = worst.max((k.eval(&[x], &[y])? - oracle).abs());
        }
    }
    let gaussian = CheckReport::new(
        "table1.gaussian",
        worst,
        Relation::AtMost,
        m.gaussian,
        ANCHOR_GAUSS,
    )
    .with_details(json!({ "panels": m.gaussian_panels, "radius": m.gaussian_radius }));

    Ok(vec![cameron_martin, polynomial, gaussian])
}

/// Rebuilds basis kernels as Carleman kernels of `Γ_x = Σ_j h_j(x) e_j` and
/// compares the two recipes.
pub fn verify_basis_roundtrip(seed: u64) -> Result<CheckReport> {
    let m = &manifest().basis_roundtrip;
    let mut rng = rng(seed, 1);
    let legendre = Basis::Legendre {
        order: 3,
        lo: 0.0,
        hi: 1.0,
    };
    let cases: [(&str, Basis, Basis, usize); 3] = [
        ("legendre3", legendre.clone(), legendre.clone(), 1),
        ("constant", Basis::Constant, Basis::Constant, 1),
        ("affine2", Basis::Affine { dim: 2 }, legendre, 2),
    ];
    let mut worst = 0.0f64;
    let mut per_case = serde_json::Map::new();
    for (name, point_basis, l2_basis, dim) in cases {
        let direct = basis_kernel(point_basis.clone(), None)?;
        let family = FeatureFamily::Expansion {
            point_basis,
            l2_basis,
        };
        let rebuilt = carleman_kernel(family, unit_measure(8))?;
        let mut case_worst = 0.0f64;
        for _ in 0..m.pairs {
            let x: Vec<f64> = (0..dim).map(|_| rng.random::<f64>()).collect();
            let y: Vec<f64> = (0..dim).map(|_| rng.random::<f64>()).collect();
            case_worst = case_worst.max((rebuilt.eval(&x, &y)? - direct.eval(&x, &y)?).abs());
        }
        per_case.insert(name.to_string(), json!(case_worst));
        worst = worst.max(case_worst);
    }
    Ok(CheckReport::new(
        "basis_roundtrip",
        worst,
        Relation::AtMost,
        m.max_abs,
        "Γ_x = Σ_j h_j(x) e_j gives K(x,y) = Σ_j h_j(x) h_j(y)",
    )
    .with_details(serde_json::Value::Object(per_case)))
}

fn psd_report(
    name: &str,
    kernel: &KernelSpec,
    points: &[Vec<f64>],
    anchor: &str,
) -> Result<CheckReport> {
    let tol = manifest().positivity.relative;
    let report = positivity_check(kernel, points, tol, false)?;
    let scale = report.threshold / tol;
    Ok(CheckReport::new(
        name,
        report.verdict.min_eigenvalue() / scale,
        Relation::AtLeast,
        -tol,
        anchor,
    )
    .with_details(
        json!({ "points": points.len(), "min_eigenvalue": report.verdict.min_eigenvalue() }),
    ))
}

/// A tanh kernel together with a point set on which its Gram matrix has a
/// negative eigenvalue.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TanhWitness {
    pub a: f64,
    pub b: f64,
    pub trial: usize,
    pub verdict: Verdict,
}

/// Randomized search over `(a, b)` and point sets in `[-2, 2]` for a Gram
/// matrix of `tanh(a·xy + b)` with `λ_min < witness_below`. Returns the
/// first witness with its eigenvalue, or `None` with the smallest
/// eigenvalue met when the budget runs out.
pub fn tanh_witness_search(
    seed: u64,
    budget: usize,
    witness_below: f64,
) -> Result<(Option<TanhWitness>, f64)> {
    let mut rng = rng(seed, 7);
    let mut lowest = f64::INFINITY;
    for trial in 0..budget {
        let a = rng.random_range(0.1..3.0);
        let b = rng.random_range(-2.0..2.0);
        let n = rng.random_range(2..=6usize);
        let points = uniform_points(&mut rng, n, 1, -2.0, 2.0);
        let kernel = closed_form_kernel(ClosedForm::Tanh { a, b })?;
        let report = positivity_check(&kernel, &points, manifest().positivity.relative, false)?;
        let value = report.verdict.min_eigenvalue();
        lowest = lowest.min(value);
        if !report.verdict.is_positive() && value < witness_below {
            return Ok((
                Some(TanhWitness {
                    a,
                    b,
                    trial,
                    verdict: report.verdict,
                }),
                value,
            ));
        }
    }
    Ok((None, lowest))
}

/// Sampled positivity of the standard kernels, plus a non-positivity
/// certificate for the tanh kernel.
pub fn verify_positivity_suite(seed: u64) -> Result<Vec<CheckReport>> {
    let n = manifest().positivity.points;
    let mut rng = rng(seed, 2);
    let mut reports = Vec::new();

    let min = closed_form_kernel(ClosedForm::Min)?;
    reports.push(psd_report(
        "positivity.min",
        &min,
        &uniform_points(&mut rng, n, 1, 0.0, 1.0),
        ANCHOR_MIN,
    )?);

    let gaussian = closed_form_kernel(ClosedForm::Gaussian { sigma: 1.0 })?;
    reports.push(psd_report(
        "positivity.gaussian",
        &gaussian,
        &uniform_points(&mut rng, n, 1, -3.0, 3.0),
        "exp(-|x-y|²/(2σ²))",
    )?);

    let poly = closed_form_kernel(ClosedForm::LinearPlusOne)?;
    reports.push(psd_report(
        "positivity.polynomial",
        &poly,
        &uniform_points(&mut rng, n, 2, -1.0, 1.0),
        ANCHOR_POLY,
    )?);

    let constant = basis_kernel(Basis::Constant, None)?;
    reports.push(psd_report(
        "positivity.constant",
        &constant,
        &uniform_points(&mut rng, n, 1, -5.0, 5.0),
        "K(.,.) ≡ 1",
    )?);

    let indicator = closed_form_kernel(ClosedForm::IndicatorEqual)?;
    let mut distinct: Vec<Vec<f64>> = (0..n)
        .map(|i| vec![i as f64 + rng.random::<f64>() * 0.5])
        .collect();
    distinct.reverse();
    let g = gram(&indicator, &distinct)?;
    let identity =
        (0..n).all(|i| (0..n).all(|j| g.entries[(i, j)] == if i == j { 1.0 } else { 0.0 }));
    let report = psd_report(
        "positivity.indicator_equal",
        &indicator,
        &distinct,
        "K(s,t) = 1_{s=t}",
    )?;
    let details =
        json!({ "points": n, "min_eigenvalue": report.measured, "gram_is_identity": identity });
    reports.push(report.with_details(details));

    let carleman = gaussian_carleman(64, 8.0)?;
    reports.push(psd_report(
        "positivity.carleman_gaussian",
        &carleman,
        &uniform_points(&mut rng, n, 1, -2.0, 2.0),
        ANCHOR_GAUSS,
    )?);

    let weights: Vec<f64> = (1..=8).map(|i| 0.5f64.powi(i)).collect();
    let schmidt = basis_kernel(Basis::Trigonometric { terms: 8 }, Some(weights))?;
    reports.push(psd_report(
        "positivity.weighted_basis",
        &schmidt,
        &uniform_points(&mut rng, n, 1, 0.0, 1.0),
        "Σ α_i² e_i(x) e_i(y)",
    )?);

    let t = &manifest().tanh_search;
    let (witness, lowest) = tanh_witness_search(t.seed, t.budget, t.witness_below)?;
    let details = match &witness {
        Some(w) => json!({ "budget": t.budget, "seed": t.seed, "witness": w }),
        None => json!({ "budget": t.budget, "seed": t.seed, "witness": null }),
    };
    reports.push(
        CheckReport::new(
            "positivity.tanh_witness",
            lowest,
            Relation::Below,
            t.witness_below,
            "tanh(wᵀx+w₀) is not a positive kernel",
        )
        .with_details(details),
    );
    Ok(reports)
}

fn random_sobolev_pair(rng: &mut ChaCha8Rng) -> Result<(RkhsFunction, SobolevFunction)> {
    let f = random_expansion(rng, &min_kernel(), 1, 0.0, 1.0)?;
    let s = SobolevFunction::from_rkhs(&f)?;
    Ok((f, s))
}

/// Pairing/kernel consistency, the `p = 2` collapse to the Hilbert case,
/// Hölder evaluation bounds and interconversion round trips.
pub fn verify_subduality_consistency() -> Result<Vec<CheckReport>> {
    let m = &manifest().subduality;
    let mut rng = rng(m.seed, 3);
    let cm = cameron_martin_subduality();

    let mut worst = 0.0f64;
    let mut pairs: Vec<(f64, f64)> = vec![(0.2, 0.8), (0.0, 0.6), (1.0, 1.0)];
    pairs.extend((0..m.pairs).map(|_| (rng.random::<f64>(), rng.random::<f64>())));
    for (x, y) in pairs {
        let pairing = duality_pairing(&SobolevFunction::section(x)?, &SobolevFunction::section(y)?);
        let kernel = cm.kernel.eval(&[x], &[y])?;
        worst = worst
            .max((pairing - x.min(y)).abs())
            .max((kernel - x.min(y)).abs());
    }
    let pairing = CheckReport::new(
        "subduality.pairing_kernel",
        worst,
        Relation::AtMost,
        m.pairing,
        "L(f,g) = ∫ f′g′, K(s,t) = min(s,t)",
    )
    .with_details(json!({ "pairs": m.pairs + 3 }));

    let mut worst = 0.0f64;
    for _ in 0..m.functions {
        let (f, fs) = random_sobolev_pair(&mut rng)?;
        let (g, gs) = random_sobolev_pair(&mut rng)?;
        let inner = f.inner_product(&g)?;
        worst = worst.max((duality_pairing(&fs, &gs) - inner).abs() / inner.abs().max(1.0));
        let norm2 = f.norm_squared()?;
        worst = worst.max((lp_norm(&fs, 2.0)?.powi(2) - norm2).abs() / norm2.max(1.0));
    }
    let collapse = CheckReport::new(
        "subduality.p2_collapse",
        worst,
        Relation::AtMost,
        m.p2_collapse,
        "⟨Σ α_i K(.,x_i), Σ β_j K(.,x_j)⟩",
    )
    .with_details(json!({ "functions": m.functions }));

    let mut worst = f64::NEG_INFINITY;
    let exponents = [1.0, 1.5, 2.0, 3.0, f64::INFINITY];
    let mut count = 0usize;
    for i in 0..=m.functions {
        let fs = if i == 0 {
            SobolevFunction::zero()
        } else {
            random_sobolev_pair(&mut rng)?.1
        };
        for _ in 0..10 {
            let x = rng.random::<f64>();
            for &p in &exponents {
                let h = holder_evaluation_bound(&fs, x, p)?;
                worst = worst.max(h.value.abs() - h.bound);
                count += 1;
            }
        }
    }
    let holder = CheckReport::new(
        "subduality.holder",
        worst,
        Relation::AtMost,
        m.holder,
        "|f(x)| ≤ M_x ‖f‖",
    )
    .with_details(json!({ "evaluations": count, "exponents": ["1", "1.5", "2", "3", "inf"] }));

    let mut worst = 0.0f64;
    for _ in 0..m.functions {
        let (f, fs) = random_sobolev_pair(&mut rng)?;
        let back = fs.to_rkhs(min_kernel())?;
        for _ in 0..100 {
            let x = rng.random::<f64>();
            let v = f.evaluate(&[x])?;
            worst = worst
                .max((fs.evaluate(x)? - v).abs())
                .max((back.evaluate(&[x])? - v).abs());
        }
    }
    let roundtrip = CheckReport::new(
        "subduality.roundtrip",
        worst,
        Relation::AtMost,
        m.roundtrip,
        "f(t) = ∫₀ᵗ f′(s) ds",
    )
    .with_details(json!({ "functions": m.functions, "points_per_function": 100 }));

    Ok(vec![pairing, collapse, holder, roundtrip])
}

/// `|⟨K(·,x), f⟩ − f(x)| / (1 + |f(x)|)` over random expansions of the min
/// and Gaussian kernels.
pub fn verify_reproducing(seed: u64) -> Result<CheckReport> {
    let m = &manifest().reproducing;
    let mut rng = rng(seed, 4);
    let kernels = [
        (min_kernel(), 0.0, 1.0),
        (
            Arc::new(closed_form_kernel(ClosedForm::Gaussian { sigma: 1.0 })?),
            -3.0,
            3.0,
        ),
    ];
    let mut worst = 0.0f64;
    for (kernel, lo, hi) in &kernels {
        for _ in 0..m.expansions {
            let f = random_expansion(&mut rng, kernel, 1, *lo, *hi)?;
            for _ in 0..m.points {
                let x = [rng.random_range(*lo..*hi)];
                worst = worst.max(reproducing_check(&f, &x)? / (1.0 + f.evaluate(&x)?.abs()));
            }
        }
    }
    Ok(CheckReport::new(
        "reproducing_identity",
        worst,
        Relation::AtMost,
        m.relative,
        "δ_x(f(.)) = ⟨K_x(.), f(.)⟩_H",
    )
    .with_details(
        json!({ "kernels": ["min", "gaussian"], "expansions": m.expansions, "points": m.points }),
    ))
}

/// `|f(x)| − √K(x,x)·‖f‖_H` over random `(f, x)` for several positive kernels.
pub fn verify_continuity(seed: u64) -> Result<CheckReport> {
    let m = &manifest().continuity;
    let mut rng = rng(seed, 5);
    let weights: Vec<f64> = (1..=8).map(|i| 0.5f64.powi(i)).collect();
    let kernels: Vec<(Arc<KernelSpec>, usize, f64, f64)> = vec![
        (min_kernel(), 1, 0.0, 1.0),
        (
            Arc::new(closed_form_kernel(ClosedForm::Gaussian { sigma: 0.7 })?),
            1,
            -3.0,
            3.0,
        ),
        (
            Arc::new(carleman_kernel(
                FeatureFamily::IndicatorBelow,
                unit_measure(8),
            )?),
            1,
            0.0,
            1.0,
        ),
        (
            Arc::new(basis_kernel(
                Basis::Trigonometric { terms: 8 },
                Some(weights),
            )?),
            1,
            0.0,
            1.0,
        ),
        (
            Arc::new(basis_kernel(Basis::Affine { dim: 3 }, None)?),
            3,
            -1.0,
            1.0,
        ),
    ];
    let mut worst = f64::NEG_INFINITY;
    for trial in 0..m.trials {
        let (kernel, dim, lo, hi) = &kernels[trial % kernels.len()];
        let f = random_expansion(&mut rng, kernel, *dim, *lo, *hi)?;
        let x: Vec<f64> = (0..*dim).map(|_| rng.random_range(*lo..*hi)).collect();
        let bound = evaluation_bound(kernel, &x)?;
        worst = worst.max(f.evaluate(&x)?.abs() - bound.m_x * f.norm()?);
    }
    Ok(CheckReport::new(
        "continuity_bound",
        worst,
        Relation::AtMost,
        m.slack,
        "|f(x) - t(x)| ≤ M_x, M_x = ‖Γ_x‖",
    )
    .with_details(json!({ "trials": m.trials, "kernels": 5 })))
}
