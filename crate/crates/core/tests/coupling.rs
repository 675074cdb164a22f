mod common;

use common::{default_lab, linear_lab, state};
use redmix::coupling::*;
use redmix::dynamics::{dist_h, CglParams, LinearizationConfig, SpectralState};
use redmix::noise::ForcingSpec;
use redmix::{Error, Lab};

fn burned(lab: &Lab) -> SpectralState {
    lab.burn_in(&SpectralState::zeros(lab.n_modes()).unwrap(), 0, 20).unwrap()
}

fn offset(lab: &Lab, u: &SpectralState, delta: f64) -> SpectralState {
    let mut v = u.clone();
    v.axpy(delta, &lab.random_direction(3).unwrap()).unwrap();
    v
}

fn loose_guard(lab: &Lab) -> Lab {
    lab.with_policy(CouplingPolicy { xi_max: 1e6, ..lab.policy().clone() }).unwrap()
}

#[test]
fn zero_rhs_gives_zero_phi() {
    let lab = default_lab();
    let u = burned(&lab);
    let f = lab.force(0, 0);
    let d = lab.solver().build_linearized_at(&u, &f, lab.linearization()).unwrap();
    let sol = solve_homological(d.matrix(), &vec![0.0; d.rows()], 1e-8).unwrap();
    assert!(sol.phi.iter().all(|&x| x == 0.0));
    assert_eq!(sol.residual, 0.0);
}

#[test]
fn linear_system_is_solved_exactly() {
    let lab = linear_lab();
    let u = burned(&lab);
    let f = lab.force(0, 0);
    let d = lab.solver().build_linearized_at(&u, &f, lab.linearization()).unwrap();
    let rhs = lab.random_direction(5).unwrap().resolved_components(16).unwrap();
    let sol = solve_homological(d.matrix(), &rhs, 0.0).unwrap();
    assert_eq!(sol.rank, 32);
    assert!(sol.residual <= 1e-10, "residual {}", sol.residual);
}

#[test]
fn unforced_target_is_unreachable() {
    let params = CglParams { nonlinear: false, ..CglParams::default() };
    let forcing = ForcingSpec::new(vec![0, 1], vec![0.3, 0.3], common::noise(6)).unwrap();
    let lab = Lab::new(params, forcing, 1, LinearizationConfig::default(), CouplingPolicy::default()).unwrap();
    let f = lab.force(0, 0);
    let d = lab.solver().build_linearized_at(&burned(&lab), &f, lab.linearization()).unwrap();
    let rhs = state(64, &[(5, 1.0, -2.0), (-4, 0.5, 0.0)]).resolved_components(16).unwrap();
    let sol = solve_homological(d.matrix(), &rhs, 0.0).unwrap();
    assert!((sol.residual - 1.0).abs() < 1e-12);
}

#[test]
fn far_pair_takes_independent_branch() {
    let lab = default_lab();
    let u = burned(&lab);
    let v = offset(&lab, &u, 2.0 * lab.policy().delta0);
    let (eta, indep) = (lab.force(0, 0), lab.independent_force(0, 0));
    let out = couple_step(&lab, 0, &u, &v, &eta, &indep).unwrap();
    assert_eq!(out.record.branch, Branch::Independent);
    assert!(out.record.residual.is_none() && out.draws.is_none());
    assert_eq!(out.u_next, lab.solver().shift(&u, &eta).unwrap());
    assert_eq!(out.v_next, lab.solver().shift(&v, &indep).unwrap());
}

#[test]
fn linear_homological_step_cancels_distance() {
    let lab = loose_guard(&linear_lab());
    let u = burned(&lab);
    let delta = 1e-3;
    let v = offset(&lab, &u, delta);
    let out = couple_step(&lab, 0, &u, &v, &lab.force(0, 0), &lab.independent_force(0, 0)).unwrap();
    assert_eq!(out.record.branch, Branch::Homological);
    let after = dist_h(&out.u_next, &out.v_next).unwrap();
    assert!(after <= 1e-8 * delta, "distance after step {after}");
}

#[test]
fn guard_rejects_large_perturbation() {
    let lab = loose_guard(&linear_lab());
    let u = burned(&lab);
    let v = offset(&lab, &u, 5e-3);
    let eta = lab.force(0, 0);
    let indep = lab.independent_force(0, 0);
    let (_, perturbed) = couple_step(&lab, 0, &u, &v, &eta, &indep).unwrap().draws.unwrap();
    let largest = perturbed.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let strict = lab.with_policy(CouplingPolicy { xi_max: 0.999 * largest, ..lab.policy().clone() }).unwrap();
    let out = couple_step(&strict, 0, &u, &v, &eta, &indep).unwrap();
    assert!(out.record.guard_violation);
    assert_eq!(out.record.branch, Branch::Trivial);
    assert!(out.draws.is_none());
    assert_eq!(out.v_next, lab.solver().shift(&v, &eta).unwrap());
}

#[test]
fn identical_states_stay_trivial() {
    let lab = default_lab();
    let u = burned(&lab);
    let run = run_coupling(&lab, &u, &u, 4, 10).unwrap();
    assert!(run.coalesced);
    assert_eq!(run.records.len(), 1);
    assert_eq!(run.records[0].branch, Branch::Trivial);
    assert_eq!(run.u_path, run.v_path);
}

#[test]
fn u_path_is_the_plain_simulation() {
    let lab = default_lab();
    let u = burned(&lab);
    let v = offset(&lab, &u, 5e-3);
    let run = run_coupling(&lab, &u, &v, 9, 8).unwrap();
    let mut plain = Vec::new();
    lab.simulate(&u, 9, 0, (run.u_path.len() - 1) as u64, |_, s| plain.push(s.clone())).unwrap();
    assert_eq!(run.u_path, plain);
}

#[test]
fn branches_follow_their_rules() {
    let lab = default_lab();
    let p = lab.policy().clone();
    for (i, delta) in [5e-3, 9e-3, 2e-2, 0.5].into_iter().enumerate() {
        let u = burned(&lab);
        let v = offset(&lab, &u, delta);
        let run = run_coupling(&lab, &u, &v, i as u64, 20).unwrap();
        for r in &run.records {
            assert_eq!(r.branch == Branch::Independent, r.delta > p.delta0);
            if r.branch == Branch::Homological {
                assert!(r.residual.unwrap() <= p.rho_max && !r.guard_violation);
            }
            if r.delta < p.coalesce_tol {
                assert_eq!(r.branch, Branch::Trivial);
            }
        }
        let d = run.distances();
        for (r, dk) in run.records.iter().zip(&d) {
            assert_eq!(r.delta, *dk);
        }
    }
}

#[test]
fn nearby_pair_coalesces() {
    let lab = default_lab();
    let u = burned(&lab);
    let v = offset(&lab, &u, 5e-3);
    let run = run_coupling(&lab, &u, &v, 0, 100).unwrap();
    assert!(run.coalesced);
    assert!(run.records.len() <= 10);
}

#[test]
fn s_delta_linear_closed_form() {
    let lab = linear_lab();
    let u = state(64, &[(0, 0.3, 0.0), (2, 0.1, 0.1)]);
    let v = state(64, &[(0, 0.3, 0.0), (2, 0.1, 0.1), (3, 0.0, 2e-3), (0, 0.0, 0.0)]);
    let sd = s_delta(lab.solver(), &u, &v, &lab.force(0, 0)).unwrap();
    let lam = lab.params().lambda(3);
    let got = sd.get(3).unwrap();
    assert!((got.im - (-lam).exp()).abs() < 1e-12 && got.re.abs() < 1e-12);
    assert!((sd.norm() - (-lam).exp()).abs() < 1e-12);
    assert!(matches!(s_delta(lab.solver(), &u, &u, &lab.force(0, 0)), Err(Error::Degenerate(_))));
}

#[test]
fn zero_phi_hook_keeps_draws() {
    let lab = default_lab();
    let u = burned(&lab);
    let v = offset(&lab, &u, 1e-3);
    let out = couple_step_with(&lab, 0, &u, &v, &lab.force(0, 0), &lab.independent_force(0, 0), StepOptions { zero_phi: true }).unwrap();
    assert_eq!(out.record.branch, Branch::Homological);
    let (a, b) = out.draws.unwrap();
    assert_eq!(a, b);
    assert_eq!(out.v_next, lab.solver().shift(&v, &lab.force(0, 0)).unwrap());
}

#[test]
fn coupling_is_deterministic() {
    let lab = default_lab();
    let u = burned(&lab);
    let v = offset(&lab, &u, 8e-3);
    let a = run_coupling(&lab, &u, &v, 2, 10).unwrap();
    let b = run_coupling(&lab, &u, &v, 2, 10).unwrap();
    assert_eq!(a.records, b.records);
    assert_eq!(a.v_path, b.v_path);
}

#[test]
fn policy_validation() {
    let bad = CouplingPolicy { rho_max: -1.0, ..CouplingPolicy::default() };
    assert!(matches!(default_lab().with_policy(bad), Err(Error::Config(_))));
    assert!(run_coupling(&default_lab(), &SpectralState::zeros(64).unwrap(), &SpectralState::zeros(64).unwrap(), 0, 0).is_err());
}
