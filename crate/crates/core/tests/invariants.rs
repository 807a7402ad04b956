use gkquad::bounds::{
    basis_error_at_2n, basis_error_envelope, gh1d_bounds, gh_tensor_bounds, minimal_error_bounds_1d, minimal_error_bounds_d,
    tensor_basis_error,
};
use gkquad::hpcore::{HpReal, NumericContext};
use gkquad::optimal::{optimal_rule, wce_optimal, PowerFunction};
use gkquad::point_sets::{x_k, NBarRule};
use gkquad::rkhs::{basis_eval, basis_eval_1d, basis_integral, basis_integral_d, wce_closed_form};
use gkquad::scaled_rules::{scaled_gh_rule, scaled_gh_tensor_rule, KernelSpec, MeasureSpec, QuadratureRule};
use proptest::prelude::*;

fn ctx() -> NumericContext {
    NumericContext::new(100).unwrap()
}

// errors near 1e-65 at alpha/ell = 1/12, n = 30 need e^2 resolved to 1e-130
fn wide() -> NumericContext {
    NumericContext::new(200).unwrap()
}

fn grid(ctx: &NumericContext) -> Vec<(HpReal, HpReal)> {
    let vals = [ctx.ratio(1, 2), ctx.one(), ctx.real(2)];
    vals.iter().flat_map(|a| vals.iter().map(move |l| (a.clone(), l.clone()))).collect()
}

fn specs(a: &HpReal, l: &HpReal) -> (MeasureSpec, KernelSpec) {
    (MeasureSpec::new(vec![a.clone()]).unwrap(), KernelSpec::new(vec![l.clone()]).unwrap())
}

#[test]
fn error_on_higher_even_basis_functions_stays_below_envelope() {
    let ctx = ctx();
    for (a, l) in grid(&ctx) {
        for n in 1..=8usize {
            let rule = scaled_gh_rule(&a, &l, n, &ctx).unwrap();
            for q in n..=n + 6 {
                let m = 2 * q as u32;
                let err = (basis_integral(&a, &l, m, &ctx) - rule.apply(|x| basis_eval_1d(&l, m, &x[0], &ctx))).abs();
                assert!(err <= basis_error_envelope(&a, &l, q, &ctx).unwrap() + ctx.tolerance(90), "a={a} l={l} n={n} q={q}");
            }
        }
    }
}

#[test]
fn odd_basis_functions_integrate_exactly() {
    let ctx = ctx();
    for (a, l) in grid(&ctx) {
        let rule = scaled_gh_rule(&a, &l, 5, &ctx).unwrap();
        for m in (1..40u32).step_by(2) {
            let q = rule.apply(|x| basis_eval_1d(&l, m, &x[0], &ctx));
            assert!(q.abs() < ctx.tolerance(90));
        }
    }
}

#[test]
fn tensor_two_n_identity() {
    let ctx = ctx();
    let ma = MeasureSpec::new(vec![ctx.one(), ctx.ratio(1, 2)]).unwrap();
    let kl = KernelSpec::new(vec![ctx.ratio(1, 2), ctx.real(2)]).unwrap();
    for n1 in 1..=6usize {
        for n2 in 1..=6usize {
            let n = [n1, n2];
            let rule = scaled_gh_tensor_rule(&ma, &kl, &n, &ctx).unwrap();
            for i in 0..2 {
                let mut m = [0u32; 2];
                m[i] = 2 * n[i] as u32;
                let measured = basis_integral_d(&ma, &kl, &m, &ctx).unwrap()
                    - rule.apply(|x| basis_eval(&kl, &m, x, &ctx).unwrap());
                let predicted = tensor_basis_error(&ma, &kl, &n, i, &ctx).unwrap();
                assert!((measured - predicted).abs() < ctx.tolerance(75), "n = {n:?}, i = {i}");
            }
        }
    }
}

#[test]
fn tensor_sandwich_with_corrected_upper() {
    let ctx = ctx();
    let ma = MeasureSpec::new(vec![ctx.one(), ctx.ratio(1, 2)]).unwrap();
    let kl = KernelSpec::new(vec![ctx.one(), ctx.one()]).unwrap();
    for n1 in 1..=5usize {
        for n2 in 1..=5usize {
            let rule = scaled_gh_tensor_rule(&ma, &kl, &[n1, n2], &ctx).unwrap();
            let w = wce_closed_form(&rule, &ma, &kl, &ctx).unwrap().wce;
            let b = gh_tensor_bounds(&ma, &kl, &[n1, n2], &ctx).unwrap();
            assert!(b.lower <= w);
            assert!(w <= b.upper_corrected.unwrap());
        }
    }
}

#[test]
fn power_function_integral_dominates_optimal_error() {
    let ctx = NumericContext::new(120).unwrap();
    let one = ctx.one();
    let (ma, kl) = specs(&one, &one);
    let dense = gkquad::gauss_hermite::gauss_hermite_rule(120, &one, &ctx).unwrap();
    for k in 1..=5 {
        let pts = x_k(k, &NBarRule::Identity, &ctx).unwrap().as_vectors();
        let p = PowerFunction::new(&kl, &pts, &ctx).unwrap();
        let ip = dense.integrate(|x| p.eval(std::slice::from_ref(x), &ctx).unwrap());
        let rule = optimal_rule(&ma, &kl, &pts, &ctx).unwrap();
        let w = wce_optimal(&rule, &ma, &kl, &ctx).unwrap().wce;
        assert!(ip >= w, "k = {k}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn sandwich_holds_when_alpha_at_most_ell(an in 1u32..=8, extra in 0u32..=8, n in 2usize..=20) {
        let ctx = wide();
        let a = ctx.ratio(an as i64, 4);
        let l = ctx.ratio((an + extra) as i64, 4);
        let (ma, kl) = specs(&a, &l);
        let w = wce_closed_form(&scaled_gh_rule(&a, &l, n, &ctx).unwrap(), &ma, &kl, &ctx).unwrap().wce;
        let b = gh1d_bounds(&a, &l, n, &ctx).unwrap();
        prop_assert!(b.lower <= w);
        prop_assert!(w <= b.upper_paper);
    }

    #[test]
    fn corrected_sandwich_holds_everywhere(an in 1u32..=12, ln in 1u32..=12, n in 1usize..=20) {
        let ctx = wide();
        let a = ctx.ratio(an as i64, 4);
        let l = ctx.ratio(ln as i64, 4);
        let (ma, kl) = specs(&a, &l);
        let w = wce_closed_form(&scaled_gh_rule(&a, &l, n, &ctx).unwrap(), &ma, &kl, &ctx).unwrap().wce;
        let b = gh1d_bounds(&a, &l, n, &ctx).unwrap();
        prop_assert!(b.lower <= w.clone());
        prop_assert!(w <= b.upper_corrected.unwrap());
    }

    #[test]
    fn two_n_identity_matches_measurement(an in 1u32..=12, ln in 1u32..=12, n in 1usize..=15) {
        let ctx = ctx();
        let a = ctx.ratio(an as i64, 4);
        let l = ctx.ratio(ln as i64, 4);
        let rule = scaled_gh_rule(&a, &l, n, &ctx).unwrap();
        let m = 2 * n as u32;
        let measured = basis_integral(&a, &l, m, &ctx) - rule.apply(|x| basis_eval_1d(&l, m, &x[0], &ctx));
        let predicted = basis_error_at_2n(&a, &l, n, &ctx).unwrap();
        prop_assert!((measured - predicted).abs() < ctx.tolerance(75));
    }

    #[test]
    fn minimal_error_bounds_are_ordered(an in 1u32..=12, ln in 1u32..=12, n in 1usize..=30) {
        let ctx = wide();
        let a = ctx.ratio(an as i64, 4);
        let l = ctx.ratio(ln as i64, 4);
        let b = minimal_error_bounds_1d(&a, &l, n, &ctx).unwrap();
        prop_assert!(b.lower <= b.upper_corrected.unwrap());
        let (ma, kl) = specs(&a, &l);
        let w = wce_closed_form(&scaled_gh_rule(&a, &l, n, &ctx).unwrap(), &ma, &kl, &ctx).unwrap().wce;
        prop_assert!(b.lower <= w);
    }

    #[test]
    fn tensor_minimal_lower_below_tensor_rule(n1 in 1usize..=5, n2 in 1usize..=5, an in 1u32..=8, ln in 1u32..=8) {
        let ctx = wide();
        let ma = MeasureSpec::new(vec![ctx.ratio(an as i64, 4), ctx.one()]).unwrap();
        let kl = KernelSpec::new(vec![ctx.ratio(ln as i64, 4), ctx.one()]).unwrap();
        let rule = scaled_gh_tensor_rule(&ma, &kl, &[n1, n2], &ctx).unwrap();
        let w = wce_closed_form(&rule, &ma, &kl, &ctx).unwrap().wce;
        prop_assert!(minimal_error_bounds_d(&ma, &kl, &[n1, n2], &ctx).unwrap().lower <= w);
    }

    #[test]
    fn sets_are_nested(k in 1usize..=15) {
        let ctx = NumericContext::new(40).unwrap();
        let small = x_k(k, &NBarRule::Identity, &ctx).unwrap();
        let big = x_k(k + 1, &NBarRule::Identity, &ctx).unwrap();
        prop_assert!(small.points().iter().all(|p| big.contains(p)));
        prop_assert_eq!(big.len() - small.len(), 2 * (k + 1));
    }

    #[test]
    fn optimal_weights_beat_perturbed_weights(k in 1usize..=4, seed in 0u64..1000, scale in 1u32..=100) {
        let ctx = NumericContext::new(80).unwrap();
        let one = ctx.one();
        let (ma, kl) = specs(&one, &one);
        let pts = x_k(k, &NBarRule::Identity, &ctx).unwrap().as_vectors();
        let opt = optimal_rule(&ma, &kl, &pts, &ctx).unwrap();
        let best = wce_optimal(&opt, &ma, &kl, &ctx).unwrap().wce;
        let weights: Vec<HpReal> = opt
            .weights()
            .iter()
            .enumerate()
            .map(|(i, w)| {
                let sign = if (seed >> (i % 64)) & 1 == 1 { 1i64 } else { -1 };
                ctx.real(w) + ctx.ratio(sign, 1000 * scale as i64)
            })
            .collect();
        let other = QuadratureRule::new(opt.points().to_vec(), weights, gkquad::scaled_rules::Provenance::Custom).unwrap();
        let w = wce_closed_form(&other, &ma, &kl, &ctx).unwrap().wce;
        prop_assert!(best <= w);
    }
}
