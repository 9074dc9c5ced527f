use proptest::prelude::*;
use wsphere_core::applications::{kaehler_point, ruled_point, KaehlerParams, RuledParams};
use wsphere_core::chain::{
    f_chain_at, hermitian_gram_schmidt, surface_at, AlphaChain, IntegrationConstants, DEFAULT_EPS_SINGULAR,
};
use wsphere_core::holo::{antiderivative, AntiderivativeMode, Domain, GridSpec, HoloExpr, RealExpr};
use wsphere_core::verify::frame_residuals;
use wsphere_core::{Complex64, ComplexVector};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn complex(r: f64) -> impl Strategy<Value = Complex64> {
    (-r..r, -r..r).prop_map(|(a, b)| c(a, b))
}

fn point() -> impl Strategy<Value = Complex64> {
    complex(0.9)
}

/// `a + b z` with `a` away from zero, written as an expression.
fn linear_beta() -> impl Strategy<Value = String> {
    (0.5..2.0f64, -3.0..3.0f64, complex(0.3)).prop_map(|(r, theta, b)| {
        let a = Complex64::from_polar(r, theta);
        format!("({} + {}*i) + ({} + {}*i)*z", a.re, a.im, b.re, b.im)
    })
}

fn constants(n: usize) -> impl Strategy<Value = IntegrationConstants> {
    let levels: Vec<_> = (0..n).map(|r| prop::collection::vec(complex(0.5), 2 * r + 1)).collect();
    levels.prop_map(IntegrationConstants)
}

fn random_chain() -> impl Strategy<Value = AlphaChain> {
    (1usize..=3)
        .prop_flat_map(|n| (prop::collection::vec(linear_beta(), n), constants(n)))
        .prop_map(|(betas, k)| {
            let refs: Vec<&str> = betas.iter().map(String::as_str).collect();
            AlphaChain::from_strs(&refs, k, Domain::centered_square(1.0).unwrap()).unwrap()
        })
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn frames_satisfy_the_chain_identities(chain in random_chain(), z in point()) {
        let sample = f_chain_at(&chain, z, DEFAULT_EPS_SINGULAR).unwrap();
        prop_assume!(!sample.singular);
        let r = frame_residuals(&sample);
        prop_assert!(r.isotropy <= 1e-9, "{r:?}");
        prop_assert!(r.hermitian_orthogonality <= 1e-9, "{r:?}");
        prop_assert!(r.collinearity <= 1e-9, "{r:?}");
    }

    #[test]
    fn surface_is_unit_and_orthogonal_to_the_isotropic_frames(chain in random_chain(), z in point()) {
        let sample = f_chain_at(&chain, z, DEFAULT_EPS_SINGULAR).unwrap();
        let Ok(g) = surface_at(&sample) else { return Ok(()) };
        prop_assert!((norm(&g) - 1.0).abs() <= 1e-12);
        // g is real and lies in span{F_(n+1), conj F_(n+1)}, so it is orthogonal to F_1 ... F_n
        let gc = ComplexVector::from_real(&g);
        for s in 1..=sample.n() {
            let f = sample.frame(s);
            let p: Complex64 = gc.entries().iter().zip(f.entries()).map(|(a, b)| a * b).sum();
            prop_assert!(p.norm() <= 1e-9 * f.norm(), "s = {s}: {p}");
        }
    }

    #[test]
    fn gram_schmidt_output_is_hermitian_orthogonal(
        cols in prop::collection::vec(prop::collection::vec(complex(1.0), 5), 1..=4),
    ) {
        let jets: Vec<ComplexVector> = cols.into_iter().map(ComplexVector::new).collect();
        let frames = hermitian_gram_schmidt(&jets);
        prop_assert_eq!(frames.len(), jets.len());
        for j in 0..frames.len() {
            for k in 0..j {
                let p: Complex64 = frames[j].entries().iter().zip(frames[k].entries()).map(|(a, b)| a * b.conj()).sum();
                prop_assert!(p.norm() <= 1e-10 * (1.0 + frames[j].norm() * frames[k].norm()), "{j} {k}: {p}");
            }
        }
    }

    #[test]
    fn polynomial_antiderivatives_are_exact(
        coeffs in prop::collection::vec(complex(2.0), 1..=4),
        k in complex(1.0),
        z in point(),
    ) {
        let text = coeffs
            .iter()
            .enumerate()
            .map(|(j, a)| format!("({} + {}*i)*z^{j}", a.re, a.im))
            .collect::<Vec<_>>()
            .join(" + ");
        let f = HoloExpr::parse(&text).unwrap();
        let d = Domain::centered_square(1.0).unwrap();
        let anti = antiderivative(&f, k, &d);
        prop_assert_eq!(anti.mode(), AntiderivativeMode::Symbolic);
        let exact: Complex64 = k + coeffs
            .iter()
            .enumerate()
            .map(|(j, a)| a * z.powu(j as u32 + 1) / (j as f64 + 1.0))
            .sum::<Complex64>();
        prop_assert!((anti.eval(z).unwrap() - exact).norm() <= 1e-12 * (1.0 + exact.norm()));
    }

    #[test]
    fn quadrature_antiderivative_of_exp(a in complex(1.5), k in complex(1.0), z in point()) {
        prop_assume!(a.norm() > 1e-3);
        let f = HoloExpr::parse(&format!("exp(({} + {}*i)*z)", a.re, a.im)).unwrap();
        let d = Domain::centered_square(1.0).unwrap();
        let anti = antiderivative(&f, k, &d);
        prop_assert_eq!(anti.mode(), AntiderivativeMode::Quadrature);
        let exact = k + ((a * z).exp() - 1.0) / a;
        let got = anti.eval(z).unwrap();
        prop_assert!((got - exact).norm() <= 1e-11 * (1.0 + exact.norm()), "{got} vs {exact}");
    }

    #[test]
    fn ruled_points_stay_on_the_sphere(
        z in point(),
        w in complex(4.0),
        betas in prop::collection::vec(linear_beta(), 3),
    ) {
        let refs: Vec<&str> = betas.iter().map(String::as_str).collect();
        let chain = AlphaChain::from_strs(&refs, IntegrationConstants::zeros(3), Domain::centered_square(1.0).unwrap()).unwrap();
        let Ok(p) = ruled_point(&chain, &RuledParams { w: vec![w] }, z) else { return Ok(()) };
        prop_assert!((norm(&p) - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn kaehler_map_is_affine_in_w(z in point(), w1 in complex(2.0), w2 in complex(2.0), t in -2.0..2.0f64) {
        let chain = AlphaChain::from_strs(&["1", "1"], IntegrationConstants::zeros(2), Domain::centered_square(1.0).unwrap()).unwrap();
        let gamma = RealExpr::parse("1 + x^2 + y^2").unwrap();
        let at = |w: Complex64| kaehler_point(&chain, &KaehlerParams::new(gamma.clone(), vec![w]), z).unwrap();
        let (p0, p1, p2) = (at(c(0.0, 0.0)), at(w1), at(w2));
        let mixed = at(w1 + w2 * t);
        for k in 0..p0.len() {
            let affine = p1[k] + t * (p2[k] - p0[k]);
            prop_assert!((mixed[k] - affine).abs() <= 1e-12 * (1.0 + affine.abs()));
        }
    }

    #[test]
    fn grid_points_are_row_major(rows in 2usize..8, cols in 2usize..8) {
        let g = GridSpec::new(rows, cols).unwrap();
        let pts = g.points(c(-1.0, -2.0), c(3.0, 2.0));
        prop_assert_eq!(pts.len(), rows * cols);
        prop_assert_eq!(pts[0], c(-1.0, -2.0));
        prop_assert_eq!(pts[cols - 1], c(3.0, -2.0));
        prop_assert_eq!(pts[rows * cols - 1], c(3.0, 2.0));
        for r in 0..rows {
            for k in 1..cols {
                prop_assert_eq!(pts[r * cols + k].im, pts[r * cols].im);
                prop_assert!(pts[r * cols + k].re > pts[r * cols + k - 1].re);
            }
        }
    }
}

#[test]
fn grids_below_two_by_two_are_rejected() {
    assert!(GridSpec::new(1, 5).is_err());
    assert!(GridSpec::new(5, 1).is_err());
    assert!(GridSpec::new(2, 2).is_ok());
}
