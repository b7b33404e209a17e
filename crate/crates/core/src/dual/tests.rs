use approx::assert_abs_diff_eq;
use proptest::prelude::*;

use super::admm::admm_scaled_deviation;
use super::*;
use crate::delay::{DelayPolicy, Selection};
use crate::instances::{dense_rows, scalar_equality, sparse_rows, symmetric_two_block};
use crate::problem::{ComponentFunction, ConstraintSet};

fn v1(x: f64) -> Vector {
    Vector::from_element(1, x)
}

fn one_block(q: f64, a: f64, b: f64) -> SeparableProblem {
    let blk = Block::affine(
        ComponentFunction::quadratic(Matrix::from_element(1, 1, q), Vector::zeros(1), 0.0).unwrap(),
        ConstraintSet::Free,
        Matrix::from_element(1, 1, a),
        v1(b),
    )
    .unwrap();
    SeparableProblem::new(vec![blk], ConstraintKind::Equality).unwrap()
}

fn inner() -> InnerOptions {
    InnerOptions::default()
}

#[test]
fn dual_component_examples() {
    let p = one_block(1.0, 1.0, 1.0);
    let c = dual_component(&p, 0, &v1(0.0), &inner()).unwrap();
    assert_abs_diff_eq!(c.value, 0.0, epsilon = 1e-15);
    assert_abs_diff_eq!(c.gradient[0], -1.0, epsilon = 1e-15);
    assert_abs_diff_eq!(c.y[0], 0.0, epsilon = 1e-15);

    let c = dual_component(&p, 0, &v1(-1.0), &inner()).unwrap();
    assert_abs_diff_eq!(c.y[0], 1.0, epsilon = 1e-15);
    assert_abs_diff_eq!(c.gradient[0], 0.0, epsilon = 1e-15);
    // q(λ) = −½λ² − λ.
    assert_abs_diff_eq!(c.value, 0.5, epsilon = 1e-15);
}

#[test]
fn degenerate_block_has_zero_dual() {
    let blk = Block::affine(
        ComponentFunction::quadratic(Matrix::zeros(1, 1), Vector::zeros(1), 0.0).unwrap(),
        ConstraintSet::boxed(vec![0.0], vec![0.0]).unwrap(),
        Matrix::from_element(1, 1, 3.0),
        v1(0.0),
    )
    .unwrap();
    let p = SeparableProblem::new(vec![blk], ConstraintKind::Equality).unwrap();
    for lam in [-4.0, 0.0, 2.5] {
        let c = dual_component(&p, 0, &v1(lam), &inner()).unwrap();
        assert_eq!(c.value, 0.0);
        assert_eq!(c.gradient[0], 0.0);
    }
}

#[test]
fn unbounded_block_is_reported() {
    let blk = Block::affine(
        ComponentFunction::quadratic(Matrix::zeros(1, 1), Vector::zeros(1), 0.0).unwrap(),
        ConstraintSet::Free,
        Matrix::from_element(1, 1, 1.0),
        v1(0.0),
    )
    .unwrap();
    let p = SeparableProblem::new(vec![blk], ConstraintKind::Equality).unwrap();
    assert!(matches!(
        dual_component(&p, 0, &v1(1.0), &inner()),
        Err(Error::Unbounded { .. })
    ));
}

fn single_step(p: &SeparableProblem, algorithm: DualAlgorithm, alpha: f64) -> DualState {
    let solver = DualSolver::new(p, algorithm, DelaySchedule::last_update(), StepRule::Constant(alpha)).unwrap();
    let mut state = solver
        .start(&Vector::zeros(p.rows()), Some(vec![Vector::zeros(1); p.m()]))
        .unwrap();
    solver.step(&mut state).unwrap();
    state
}

#[test]
fn iadg_first_step() {
    let p = one_block(1.0, 1.0, 1.0);
    let s = single_step(&p, DualAlgorithm::Iadg, 0.5);
    assert_abs_diff_eq!(s.y[0][0], 0.0, epsilon = 1e-15);
    assert_abs_diff_eq!(s.lambda[0], -0.5, epsilon = 1e-15);
}

#[test]
fn ial_first_step() {
    let p = one_block(1.0, 1.0, 1.0);
    let s = single_step(&p, DualAlgorithm::Ial, 1.0);
    assert_abs_diff_eq!(s.y[0][0], 0.5, epsilon = 1e-15);
    assert_abs_diff_eq!(s.lambda[0], -0.5, epsilon = 1e-15);
}

#[test]
fn iaal_first_step_on_symmetric_instance() {
    let p = symmetric_two_block().unwrap();
    let s = single_step(&p, DualAlgorithm::Iaal, 0.25);
    assert_abs_diff_eq!(s.y[0][0], 2.0 / 9.0, epsilon = 1e-14);
    assert_abs_diff_eq!(s.y[1][0], 0.0, epsilon = 1e-15);
    assert_abs_diff_eq!(s.lambda[0], -4.0 / 9.0, epsilon = 1e-14);
}

#[test]
fn iaal_cycle_first_pass() {
    let p = symmetric_two_block().unwrap();
    let s = single_step(&p, DualAlgorithm::IaalCycle, 1.0);
    assert_abs_diff_eq!(s.y[0][0], 2.0 / 3.0, epsilon = 1e-14);
    assert_abs_diff_eq!(s.y[1][0], 4.0 / 9.0, epsilon = 1e-14);
    assert_abs_diff_eq!(s.lambda[0], -8.0 / 9.0, epsilon = 1e-14);
}

#[test]
fn kkt_point_is_fixed_for_every_method() {
    let p = symmetric_two_block().unwrap();
    let known = p.known().unwrap().clone();
    for a in [
        DualAlgorithm::Iadg,
        DualAlgorithm::Ial,
        DualAlgorithm::Iaal,
        DualAlgorithm::IaalCycle,
    ] {
        let solver = DualSolver::new(&p, a, DelaySchedule::last_update(), StepRule::Constant(0.3)).unwrap();
        let mut state = solver.start(&known.lambda, Some(known.y.clone())).unwrap();
        for _ in 0..6 {
            solver.step(&mut state).unwrap();
        }
        assert_abs_diff_eq!(state.lambda[0], -2.0, epsilon = 1e-14);
    }
    for variant in [AdmmVariant::Plain, AdmmVariant::Scaled] {
        let solver = AdmmSolver::new(&p, variant, 1.0).unwrap();
        let mut state = solver.start(&known.lambda, Some(known.y.clone())).unwrap();
        for _ in 0..6 {
            solver.step(&mut state).unwrap();
        }
        assert_abs_diff_eq!(state.lambda[0], -2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(state.y[0][0], 1.0, epsilon = 1e-14);
    }
}

#[test]
fn ial_and_iaal_coincide_for_one_block() {
    let p = one_block(1.5, 2.0, 0.7);
    let run = |a| {
        let solver = DualSolver::new(&p, a, DelaySchedule::last_update(), StepRule::Constant(0.4)).unwrap();
        let opts = DualRunOptions {
            max_iter: 30,
            tol: None,
            record_iterates: true,
            ..DualRunOptions::default()
        };
        solver.run(&v1(0.0), &opts).unwrap().iterates
    };
    let (ial, iaal, cycle) = (
        run(DualAlgorithm::Ial),
        run(DualAlgorithm::Iaal),
        run(DualAlgorithm::IaalCycle),
    );
    for ((a, b), c) in ial.iter().zip(&iaal).zip(&cycle) {
        assert!((a - b).amax() <= 1e-12);
        assert!((a - c).amax() <= 1e-12);
    }
}

#[test]
fn multiplier_moves_along_the_residual_used() {
    let p = dense_rows(3, 2, 2, 4).unwrap();
    for a in [
        DualAlgorithm::Ial,
        DualAlgorithm::Iaal,
        DualAlgorithm::IaalCycle,
        DualAlgorithm::Iadg,
    ] {
        let solver = DualSolver::new(&p, a, DelaySchedule::last_update(), StepRule::Constant(0.05)).unwrap();
        let mut state = solver.start(&Vector::zeros(2), None).unwrap();
        for _ in 0..20 {
            let before = state.lambda.clone();
            let info = solver.step(&mut state).unwrap();
            let expected = &before + &info.residual_used * info.alpha;
            assert_eq!(state.lambda, expected, "{a}");
        }
    }
}

#[test]
fn iaal_table_matches_stored_blocks() {
    let p = dense_rows(4, 2, 2, 8).unwrap();
    let solver = DualSolver::new(
        &p,
        DualAlgorithm::Iaal,
        DelaySchedule::last_update(),
        StepRule::Constant(0.05),
    )
    .unwrap();
    let mut state = solver.start(&Vector::zeros(2), None).unwrap();
    for _ in 0..25 {
        solver.step(&mut state).unwrap();
        // Under last-update every slot holds the current block.
        for (i, slot) in state.table_slots().unwrap().iter().enumerate() {
            assert!((slot - p.block(i).constraint_value(&state.y[i])).amax() <= 1e-12);
        }
    }
}

#[test]
fn symmetric_instance_converges_under_every_method() {
    let p = symmetric_two_block().unwrap();
    for a in [
        DualAlgorithm::Iadg,
        DualAlgorithm::Ial,
        DualAlgorithm::Iaal,
        DualAlgorithm::IaalCycle,
    ] {
        let solver = DualSolver::new(&p, a, DelaySchedule::last_update(), StepRule::Constant(0.1)).unwrap();
        let trace = solver.run(&v1(0.0), &DualRunOptions::default()).unwrap();
        let last = trace.last().unwrap();
        assert!(last.obj <= 1e-6 && last.err.unwrap() <= 1e-6, "{a}: {last:?}");
    }
}

#[test]
fn admm_converges_for_every_tested_stepsize() {
    let p = symmetric_two_block().unwrap();
    for alpha in [0.1, 1.0, 10.0] {
        let solver = AdmmSolver::new(&p, AdmmVariant::Plain, alpha).unwrap();
        let trace = solver.run(&v1(0.0), &DualRunOptions::default()).unwrap();
        let last = trace.last().unwrap();
        assert!(trace.iterations() < 50_000, "alpha {alpha}");
        assert!(last.obj <= 1e-6, "alpha {alpha}: {last:?}");
    }
}

#[test]
fn row_counts_on_sparse_instance() {
    let p = sparse_rows().unwrap();
    let solver = AdmmSolver::new(&p, AdmmVariant::Scaled, 1.0).unwrap();
    assert_eq!(solver.row_counts(), &[2, 1]);
    let trace = solver.run(&Vector::zeros(2), &DualRunOptions::default()).unwrap();
    assert!(trace.last().unwrap().obj <= 1e-6);
}

#[test]
fn scaled_admm_matches_plain_on_dense_rows() {
    let p = dense_rows(4, 3, 2, 21).unwrap();
    assert!(admm_scaled_deviation(&p, 1.0, 100).unwrap() <= 1e-10);
}

#[test]
fn scaled_admm_differs_when_rows_are_sparse() {
    let p = sparse_rows().unwrap();
    assert!(admm_scaled_deviation(&p, 1.0, 10).unwrap() > 1e-6);
}

#[test]
fn al_matches_dual_proximal_recursion() {
    let p = one_block(1.0, 1.0, 1.0);
    for alpha in [1.0, 0.1] {
        let c = prox_al_equivalence_check(&p, &v1(0.0), alpha, 10).unwrap();
        assert!(c.max_deviation <= 1e-9, "{c:?}");
        assert!(c.max_gradient_gap <= 1e-9, "{c:?}");
    }
    // Starting at λ* both sequences stay put.
    let c = prox_al_equivalence_check(&p, &v1(-1.0), 1.0, 10).unwrap();
    assert!(c.max_deviation <= 1e-15);
}

#[test]
fn al_first_step_matches_direct_dual_prox() {
    // argmax −½λ² − λ − ½λ² is −½.
    let p = one_block(1.0, 1.0, 1.0);
    let s = single_step(&p, DualAlgorithm::Ial, 1.0);
    assert_abs_diff_eq!(s.lambda[0], -0.5, epsilon = 1e-15);
}

#[test]
fn primal_recovery_matches_kkt() {
    let p = dense_rows(3, 2, 2, 5).unwrap();
    let known = p.known().unwrap().clone();
    let solver = AdmmSolver::new(&p, AdmmVariant::Plain, 1.0).unwrap();
    let mut state = solver.start(&Vector::zeros(2), None).unwrap();
    for _ in 0..50_000 {
        solver.step(&mut state).unwrap();
        if p.residual(&state.y).norm() <= 1e-8 && (&state.lambda - &known.lambda).norm() <= 1e-8 {
            break;
        }
    }
    assert!(p.residual(&state.y).norm() <= 1e-8);
    for (y, ys) in state.y.iter().zip(&known.y) {
        assert!((y - ys).amax() <= 1e-6);
    }
}

#[test]
fn iaal_is_forced_to_diminish_without_strong_concavity() {
    // Two rows and one scalar block: A Q⁻¹ A' is rank one.
    let blk = Block::affine(
        ComponentFunction::quadratic(Matrix::from_element(1, 1, 1.0), Vector::zeros(1), 0.0).unwrap(),
        ConstraintSet::Free,
        Matrix::from_column_slice(2, 1, &[1.0, 1.0]),
        Vector::from_column_slice(&[1.0, 1.0]),
    )
    .unwrap();
    let p = SeparableProblem::new(vec![blk], ConstraintKind::Equality).unwrap();
    let solver = DualSolver::new(
        &p,
        DualAlgorithm::Iaal,
        DelaySchedule::last_update(),
        StepRule::Constant(0.5),
    )
    .unwrap();
    assert_eq!(solver.rule(), &StepRule::Diminishing(0.5));
    let ial = DualSolver::new(
        &p,
        DualAlgorithm::Ial,
        DelaySchedule::last_update(),
        StepRule::Constant(0.5),
    )
    .unwrap();
    assert_eq!(ial.rule(), &StepRule::Constant(0.5));
}

#[test]
fn rescaled_row_tracks_unscaled_run() {
    // Row scaled by s with multiplier λ/s and stepsize α/s² reproduces the
    // unscaled multipliers after rescaling.
    let s = 3.0;
    let base = one_block(1.0, 1.0, 1.0);
    let scaled = one_block(1.0, s, s);
    let alpha = 0.7;
    let a = DualSolver::new(
        &base,
        DualAlgorithm::Iaal,
        DelaySchedule::last_update(),
        StepRule::Constant(alpha),
    )
    .unwrap();
    let b = DualSolver::new(
        &scaled,
        DualAlgorithm::Iaal,
        DelaySchedule::last_update(),
        StepRule::Constant(alpha / (s * s)),
    )
    .unwrap();
    let mut sa = a.start(&v1(0.4), None).unwrap();
    let mut sb = b.start(&v1(0.4 / s), None).unwrap();
    for _ in 0..20 {
        a.step(&mut sa).unwrap();
        b.step(&mut sb).unwrap();
        assert!((sa.lambda[0] - s * sb.lambda[0]).abs() <= 1e-8);
        assert!((sa.y[0][0] - sb.y[0][0]).abs() <= 1e-8);
    }
}

#[test]
fn iadg_staleness_respects_bound() {
    let p = dense_rows(5, 2, 2, 13).unwrap();
    let schedule = DelaySchedule::new(
        DelayPolicy::UniformRandom { bound: 3, seed: 5 },
        Selection::Random { seed: 9 },
    );
    let solver = DualSolver::new(&p, DualAlgorithm::Iadg, schedule, StepRule::Constant(0.02)).unwrap();
    let opts = DualRunOptions {
        max_iter: 300,
        tol: None,
        ..DualRunOptions::default()
    };
    let trace = solver.run(&Vector::zeros(2), &opts).unwrap();
    assert!(trace.max_staleness() <= 3);
}

#[test]
fn tuned_dual_stepsize_converges() {
    let p = symmetric_two_block().unwrap();
    let tuning = tune_dual_stepsize(&p, DualAlgorithm::Iaal, DelaySchedule::last_update()).unwrap();
    assert!(tuning.rho_hat < 1.0);
    let solver = DualSolver::new(
        &p,
        DualAlgorithm::Iaal,
        DelaySchedule::last_update(),
        StepRule::Constant(tuning.alpha),
    )
    .unwrap();
    let trace = solver.run(&v1(0.0), &DualRunOptions::default()).unwrap();
    assert!(trace.last().unwrap().err.unwrap() <= 1e-6);
}

#[test]
fn scalar_equality_reference() {
    let p = scalar_equality().unwrap();
    let solver = DualSolver::new(
        &p,
        DualAlgorithm::Ial,
        DelaySchedule::last_update(),
        StepRule::Constant(1.0),
    )
    .unwrap();
    let trace = solver.run(&v1(0.0), &DualRunOptions::default()).unwrap();
    assert!(trace.last().unwrap().err.unwrap() <= 1e-6);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn dual_gradient_is_a_supergradient(l1 in -5.0..5.0f64, l2 in -5.0..5.0f64, m1 in -5.0..5.0f64, m2 in -5.0..5.0f64) {
        let p = dense_rows(3, 2, 2, 17).unwrap();
        let lam = Vector::from_column_slice(&[l1, l2]);
        let other = Vector::from_column_slice(&[m1, m2]);
        let here = dual_function(&p, &lam, &inner()).unwrap();
        let there = dual_function(&p, &other, &inner()).unwrap();
        prop_assert!(there.value <= here.value + here.gradient.dot(&(&other - &lam)) + 1e-8);
    }

    #[test]
    fn boxed_blocks_keep_the_supergradient_inequality(l in -5.0..5.0f64, m in -5.0..5.0f64) {
        let blk = Block::affine(
            ComponentFunction::quadratic(Matrix::from_element(1, 1, 1.0), v1(-0.3), 0.0).unwrap(),
            ConstraintSet::boxed(vec![-1.0], vec![1.0]).unwrap(),
            Matrix::from_element(1, 1, 1.0),
            v1(0.2),
        )
        .unwrap();
        let p = SeparableProblem::new(vec![blk], ConstraintKind::Equality).unwrap();
        let here = dual_component(&p, 0, &v1(l), &inner()).unwrap();
        let there = dual_component(&p, 0, &v1(m), &inner()).unwrap();
        prop_assert!(there.value <= here.value + here.gradient[0] * (m - l) + 1e-8);
    }
}
