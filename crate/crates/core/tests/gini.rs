use proptest::prelude::*;
use zonogini::rng::{open_unit, stream, StreamRng};
use zonogini::{
    classical_gini_pairwise, empirical_lorenz_curve, generalized_gini, gini_volume, lorenz_curve,
    EmpiricalMeasure, Error, GiniMethod, LorenzCurve, ReferenceDistribution, VolumeMethod,
};

fn measure(rows: &[&[f64]]) -> EmpiricalMeasure<f64> {
    EmpiricalMeasure::from_rows(rows.iter().copied()).unwrap()
}

fn random_measure(rng: &mut StreamRng, n: usize, d: usize) -> EmpiricalMeasure<f64> {
    let coords = (0..n * d).map(|_| 0.01 + open_unit(rng) * 10.0).collect();
    EmpiricalMeasure::from_flat(coords, d).unwrap()
}

/// Classical Gini `1 - 2 int_0^1 L(t) dt / m = 1 - (2/m) int_0^1 (1 - s) Q(s) ds`,
/// midpoint rule.
fn gini_from_quantile(q: impl Fn(f64) -> f64, mean: f64) -> f64 {
    let steps = 2_000_000;
    let h = 1.0 / steps as f64;
    let integral: f64 = (0..steps)
        .map(|i| {
            let s = (i as f64 + 0.5) * h;
            (1.0 - s) * q(s)
        })
        .sum::<f64>()
        * h;
    1.0 - 2.0 * integral / mean
}

/// Quadratic-time definition of the classical Gini coefficient.
fn naive_pairwise_gini(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let sum: f64 = values
        .iter()
        .flat_map(|a| values.iter().map(move |b| (a - b).abs()))
        .sum();
    sum / (2.0 * n * n * mean)
}

fn assert_lorenz_shape(curve: &LorenzCurve<f64>) {
    assert_eq!(curve.nodes[0], (0.0, 0.0));
    let (t_end, v_end) = *curve.nodes.last().unwrap();
    assert_eq!(t_end, 1.0);
    assert!((v_end - curve.mean).abs() <= 1e-9 * curve.mean.max(1.0));
    assert!(curve
        .nodes
        .windows(2)
        .all(|w| w[0].0 < w[1].0 && w[0].1 <= w[1].1 + 1e-12));
    assert!(curve
        .nodes
        .windows(3)
        .all(|w| w[2].1 - 2.0 * w[1].1 + w[0].1 >= -1e-12));
}

#[test]
fn gini_volume_examples() {
    let axes = gini_volume(&measure(&[&[1.0, 0.0], &[0.0, 1.0]]), GiniMethod::Auto).unwrap();
    assert_eq!(axes.gini, 1.0);
    let line = gini_volume(
        &measure(&[&[1.0, 1.0], &[2.0, 2.0], &[5.0, 5.0]]),
        GiniMethod::Exact,
    )
    .unwrap();
    assert_eq!(line.gini, 0.0);
    let hex = gini_volume(
        &measure(&[&[1.0, 0.0], &[0.0, 1.0], &[1.0, 1.0]]),
        GiniMethod::Exact,
    )
    .unwrap();
    assert_eq!(
        (hex.gini, hex.zonotope_volume, hex.parallelotope_volume),
        (0.75, 3.0, 4.0)
    );
    assert_eq!(
        (hex.n_points, hex.dim, hex.method),
        (3, 2, VolumeMethod::ExactEnumeration)
    );
}

#[test]
fn degenerate_and_refused_inputs() {
    assert_eq!(
        gini_volume(&measure(&[&[0.0, 1.0], &[0.0, 2.0]]), GiniMethod::Auto),
        Err(Error::DegenerateParallelotope { axis: 0 })
    );
    let mut rng = stream(1, 0);
    let big = random_measure(&mut rng, 600, 3);
    assert!(matches!(
        gini_volume(&big, GiniMethod::Auto),
        Err(Error::CombinationOverflow { .. })
    ));
    let mc = gini_volume(
        &big,
        GiniMethod::MonteCarlo {
            tuples: 20_000,
            seed: 3,
        },
    )
    .unwrap();
    assert!(mc.gini > 0.0 && mc.gini < 1.0 && mc.stderr.is_some());
    assert_eq!(
        gini_volume(&measure(&[&[1.0, 2.0, 3.0]]), GiniMethod::Fast2d),
        Err(Error::NotTwoDimensional(3))
    );
}

#[test]
fn report_ratio_invariant() {
    let mut rng = stream(2, 0);
    for d in 1..=4 {
        let mu = random_measure(&mut rng, 12, d);
        let r = gini_volume(&mu, GiniMethod::Auto).unwrap();
        assert!(
            (r.gini * r.parallelotope_volume - r.zonotope_volume).abs() <= 1e-9 * r.zonotope_volume
        );
    }
}

#[test]
fn univariate_gini_volume_is_one() {
    let r = gini_volume(&measure(&[&[2.0], &[7.0], &[1.0]]), GiniMethod::Auto).unwrap();
    assert!((r.gini - 1.0).abs() < 1e-15);
}

#[test]
fn monte_carlo_gini_matches_exact() {
    let mut rng = stream(3, 0);
    let mu = random_measure(&mut rng, 15, 3);
    let exact = gini_volume(&mu, GiniMethod::Exact).unwrap();
    let mc = gini_volume(
        &mu,
        GiniMethod::MonteCarlo {
            tuples: 400_000,
            seed: 9,
        },
    )
    .unwrap();
    assert!((mc.gini - exact.gini).abs() <= 3.0 * mc.stderr.unwrap());
}

#[test]
fn generalized_gini_examples() {
    let dirac = ReferenceDistribution::dirac(vec![1.0, 1.0]).unwrap();
    assert_eq!(generalized_gini(&dirac, 1000, 1).unwrap().gini, 0.0);

    let exp_oracle = gini_from_quantile(|s| -(1.0 - s).ln(), 1.0);
    assert!((exp_oracle - 0.5).abs() < 1e-4);
    let exp: ReferenceDistribution = "lift:exp:1".parse().unwrap();
    let r = generalized_gini(&exp, 1_000_000, 17).unwrap();
    assert!(
        (r.gini - exp_oracle).abs() <= 3.0 * r.stderr.unwrap() + 1e-4,
        "{r:?}"
    );

    let unif_oracle = gini_from_quantile(|s| s, 0.5);
    assert!((unif_oracle - 1.0 / 3.0).abs() < 1e-9);
    let unif: ReferenceDistribution = "lift:unif:0:1".parse().unwrap();
    let r = generalized_gini(&unif, 1_000_000, 18).unwrap();
    assert!(
        (r.gini - unif_oracle).abs() <= 3.0 * r.stderr.unwrap(),
        "{r:?}"
    );

    let zero_mean = ReferenceDistribution::dirac(vec![1.0, 0.0]).unwrap();
    assert_eq!(
        generalized_gini(&zero_mean, 1000, 1),
        Err(Error::DegenerateMean { axis: 1 })
    );
}

#[test]
fn closed_form_ginis_match_lorenz_oracle() {
    for (text, q, mean) in [
        (
            "lift:exp:3",
            Box::new(|s: f64| -(1.0 - s).ln() / 3.0) as Box<dyn Fn(f64) -> f64>,
            1.0 / 3.0,
        ),
        ("lift:unif:1:4", Box::new(|s: f64| 1.0 + 3.0 * s), 2.5),
    ] {
        let dist: ReferenceDistribution = text.parse().unwrap();
        let oracle = gini_from_quantile(q, mean);
        assert!(
            (dist.closed_form_gini().unwrap() - oracle).abs() < 1e-4,
            "{text}"
        );
    }
    let lognormal: ReferenceDistribution = "lognorm:0.2:0.7".parse().unwrap();
    let oracle = gini_from_quantile(|s| lognormal.quantile(s).unwrap(), lognormal.mean()[0]);
    let lifted = ReferenceDistribution::lift(lognormal).unwrap();
    assert!((lifted.closed_form_gini().unwrap() - oracle).abs() < 1e-4);
}

#[test]
fn lorenz_examples() {
    let flat = empirical_lorenz_curve(&measure(&[&[1.0], &[1.0]]), 8).unwrap();
    assert!(flat.nodes.iter().all(|&(t, v)| (t - v).abs() < 1e-15));

    let two = empirical_lorenz_curve(&measure(&[&[1.0], &[3.0]]), 512).unwrap();
    assert_eq!(two.nodes[256], (0.5, 0.5));
    assert_eq!(two.nodes[512], (1.0, 2.0));

    let exp = lorenz_curve(&"exp:1".parse().unwrap(), 512).unwrap();
    let (t, v) = exp.nodes[256];
    assert_eq!(t, 0.5);
    // Midpoint rule on int_0^0.5 -ln(1 - s) ds.
    let steps = 100_000;
    let oracle: f64 = (0..steps)
        .map(|i| -(1.0 - (i as f64 + 0.5) * 0.5 / steps as f64).ln())
        .sum::<f64>()
        * 0.5
        / steps as f64;
    assert!(
        (v - oracle).abs() < 1e-9 && (v - 0.153426).abs() < 1e-6,
        "{v}"
    );

    let lifted: ReferenceDistribution = "lift:exp:1".parse().unwrap();
    assert_eq!(lorenz_curve(&lifted, 16), Err(Error::NotUnivariate(2)));
    assert!(lorenz_curve(&"exp:1".parse().unwrap(), 1).is_err());
}

#[test]
fn lorenz_dual_reflects_through_center() {
    let curve = empirical_lorenz_curve(&measure(&[&[1.0], &[2.0], &[6.0]]), 30).unwrap();
    let dual = curve.dual();
    for (&(t, v), &(td, vd)) in curve.nodes.iter().zip(dual.nodes.iter().rev()) {
        assert!((t + td - 1.0).abs() < 1e-15 && (v + vd - curve.mean).abs() < 1e-15);
    }
    assert!(curve
        .nodes
        .iter()
        .zip(&dual.nodes)
        .all(|(a, b)| a.1 <= b.1 + 1e-15));
}

#[test]
fn lorenz_curves_are_convex_and_end_at_mean() {
    for text in [
        "exp:1",
        "exp:0.2",
        "unif:0:1",
        "unif:2:3",
        "lognorm:0:1",
        "dirac:4",
        "prod:lognorm:1:0.3",
    ] {
        assert_lorenz_shape(&lorenz_curve(&text.parse().unwrap(), 512).unwrap());
    }
    let mut rng = stream(4, 0);
    for _ in 0..50 {
        let n = 1 + (open_unit(&mut rng) * 40.0) as usize;
        let grid = 2 + (open_unit(&mut rng) * 100.0) as usize;
        assert_lorenz_shape(
            &empirical_lorenz_curve(&random_measure(&mut rng, n, 1), grid).unwrap(),
        );
    }
}

#[test]
fn lorenz_area_reproduces_pairwise_gini() {
    // With a grid that is a multiple of N the trapezoid rule is exact.
    let values = [0.5, 2.0, 2.0, 7.0, 3.5];
    let mu = EmpiricalMeasure::from_flat(values.to_vec(), 1).unwrap();
    let curve = empirical_lorenz_curve(&mu, 5 * 40).unwrap();
    assert!((curve.gini() - naive_pairwise_gini(&values)).abs() < 1e-12);
    let exp = lorenz_curve(&"exp:1".parse().unwrap(), 100_000).unwrap();
    assert!((exp.gini() - 0.5).abs() < 1e-3);
}

#[test]
fn pairwise_examples_and_naive_oracle() {
    assert_eq!(classical_gini_pairwise(&[1.0, 1.0, 1.0]).unwrap(), 0.0);
    assert_eq!(classical_gini_pairwise(&[0.0, 1.0]).unwrap(), 0.5);
    assert_eq!(classical_gini_pairwise(&[1.0, 3.0]).unwrap(), 0.25);
    let mut rng = stream(5, 0);
    for _ in 0..100 {
        let n = 1 + (open_unit(&mut rng) * 50.0) as usize;
        let values: Vec<f64> = (0..n).map(|_| open_unit(&mut rng) * 10.0).collect();
        assert!(
            (classical_gini_pairwise(&values).unwrap() - naive_pairwise_gini(&values)).abs()
                < 1e-12
        );
    }
}

#[test]
fn lift_equivalence() {
    let mut rng = stream(6, 0);
    for _ in 0..200 {
        let n = 1 + (open_unit(&mut rng) * 64.0) as usize;
        let values: Vec<f64> = (0..n).map(|_| 10.0 * (1.0 - open_unit(&mut rng))).collect();
        let lifted = EmpiricalMeasure::from_flat(values.clone(), 1)
            .unwrap()
            .lift()
            .unwrap();
        let classical = classical_gini_pairwise(&values).unwrap();
        for method in [GiniMethod::Exact, GiniMethod::Fast2d] {
            let g = gini_volume(&lifted, method).unwrap().gini;
            assert!(
                (g - classical).abs() <= 1e-10,
                "{method:?}: {g} vs {classical}"
            );
        }
    }
}

#[test]
fn invariances() {
    let mut rng = stream(7, 0);
    for _ in 0..100 {
        let d = 1 + (open_unit(&mut rng) * 4.0) as usize;
        let n = 1 + (open_unit(&mut rng) * 30.0) as usize;
        let mu = random_measure(&mut rng, n, d);
        let g = gini_volume(&mu, GiniMethod::Auto).unwrap().gini;

        let scale: Vec<f64> = (0..d).map(|_| 0.01 + open_unit(&mut rng) * 100.0).collect();
        let rescaled: Vec<Vec<f64>> = mu
            .points()
            .map(|p| p.iter().zip(&scale).map(|(a, b)| a * b).collect())
            .collect();
        let g_units = gini_volume(
            &EmpiricalMeasure::from_rows(&rescaled).unwrap(),
            GiniMethod::Auto,
        )
        .unwrap()
        .gini;
        assert!((g_units - g).abs() <= 1e-10);

        let doubled: Vec<Vec<f64>> = mu
            .to_rows()
            .into_iter()
            .flat_map(|r| [r.clone(), r])
            .collect();
        let g_dup = gini_volume(
            &EmpiricalMeasure::from_rows(&doubled).unwrap(),
            GiniMethod::Auto,
        )
        .unwrap()
        .gini;
        assert!((g_dup - g).abs() <= 1e-10);

        let mut permuted = mu.to_rows();
        permuted.rotate_left(n / 2);
        permuted.reverse();
        let g_perm = gini_volume(
            &EmpiricalMeasure::from_rows(&permuted).unwrap(),
            GiniMethod::Auto,
        )
        .unwrap()
        .gini;
        assert!((g_perm - g).abs() <= 1e-10);
    }
}

#[test]
fn continuity_probe() {
    let base = measure(&[&[1.0, 0.0], &[0.0, 1.0], &[1.0, 1.0]]);
    let g = gini_volume(&base, GiniMethod::Exact).unwrap().gini;
    let mut rng = stream(8, 0);
    let eps = 1e-6;
    for _ in 0..100 {
        let perturbed: Vec<Vec<f64>> = base
            .points()
            .map(|p| {
                let dir = zonogini::zonotope::random_direction::<f64>(&mut rng, 2);
                p.iter()
                    .zip(dir.components())
                    .map(|(a, b)| (a + eps * b).abs())
                    .collect()
            })
            .collect();
        let gp = gini_volume(
            &EmpiricalMeasure::from_rows(&perturbed).unwrap(),
            GiniMethod::Exact,
        )
        .unwrap()
        .gini;
        assert!((gp - g).abs() <= 1e-3, "{gp}");
    }
}

#[test]
fn f32_gini_volume() {
    let mu = EmpiricalMeasure::<f32>::from_rows([[1.0f32, 0.0], [0.0, 1.0], [1.0, 1.0]]).unwrap();
    assert_eq!(gini_volume(&mu, GiniMethod::Exact).unwrap().gini, 0.75f32);
    assert_eq!(classical_gini_pairwise(&[1.0f32, 3.0]).unwrap(), 0.25f32);
}

proptest! {
    #[test]
    fn gini_is_bounded(
        d in 1usize..=4,
        values in prop::collection::vec(0.0f64..50.0, 1..120),
    ) {
        let n = values.len() / d;
        prop_assume!(n >= 1);
        let mu = EmpiricalMeasure::from_flat(values[..n * d].to_vec(), d).unwrap();
        match gini_volume(&mu, GiniMethod::Auto) {
            Ok(r) => prop_assert!(r.gini >= 0.0 && r.gini <= 1.0 + 1e-9, "{}", r.gini),
            Err(Error::DegenerateParallelotope { .. }) => {}
            Err(e) => prop_assert!(false, "{e}"),
        }
    }
}
