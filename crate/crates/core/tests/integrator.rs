use retarded_core::integrator::Integrator;
use retarded_core::{
    run, ChargeSpec, CouplingForm, EventKind, Exec, HistoryOptions, PastSpec, RunConfig, RunError, Terminator,
    TrajectoryHistory, Vec3,
};

fn history(charges: &[(f64, f64)], pasts: Vec<PastSpec>) -> TrajectoryHistory {
    let specs = charges
        .iter()
        .enumerate()
        .map(|(i, &(q, m0))| ChargeSpec::new(format!("q{i}"), q, m0))
        .collect();
    TrajectoryHistory::make_initial(specs, pasts, HistoryOptions::new(1.0)).unwrap()
}

fn cfg(t_end: f64, window: f64, h: f64) -> RunConfig {
    RunConfig {
        t_end,
        window,
        inner_step: h,
        ..RunConfig::default()
    }
}

#[test]
fn free_particle_keeps_velocity() {
    let v0 = Vec3::new(0.5, 0.0, 0.0);
    let h = history(
        &[(1.0, 1.0)],
        vec![PastSpec::Uniform {
            r0: Vec3::zeros(),
            v: v0,
        }],
    );
    let res = run(h, &cfg(10.0, 0.5, 0.05)).unwrap();
    assert_eq!(res.terminator, Terminator::Completed);
    assert!((res.t_max - 10.0).abs() < 1e-12);
    for s in res.history.committed() {
        assert!((s.states[0].v - v0).norm() <= 1e-12);
    }
    let g2 = 1.0 / (1.0 - 0.25);
    for d in &res.steps {
        assert!((d.det_phi - g2).abs() <= 1e-12);
    }
}

#[test]
fn static_pair_starts_with_coulomb_acceleration() {
    let d = 2.0;
    let h = history(
        &[(0.1, 1.0), (0.1, 1.0)],
        vec![
            PastSpec::Rest { r0: Vec3::zeros() },
            PastSpec::Rest {
                r0: Vec3::new(d, 0.0, 0.0),
            },
        ],
    );
    let res = run(h, &cfg(0.1, 0.1, 0.01)).unwrap();
    let a0 = res.history.committed()[0].acc[0];
    let want = Vec3::new(-0.01 / (d * d), 0.0, 0.0);
    assert!((a0 - want).norm() <= 1e-12 * want.norm());
}

#[test]
fn weak_coupling_residuals_and_contraction() {
    let h = history(
        &[(0.03, 1.0), (-0.03, 1.0)],
        vec![
            PastSpec::Circular {
                center: Vec3::zeros(),
                radius: 0.3,
                omega: 0.5,
                phase: 0.0,
            },
            PastSpec::Uniform {
                r0: Vec3::new(2.0, 0.5, 0.0),
                v: Vec3::new(0.0, -0.1, 0.05),
            },
        ],
    );
    let res = run(h, &cfg(3.0, 1.0, 0.02)).unwrap();
    assert!(res.terminator.is_completed());
    assert!(res.max_lc_residual <= 1e-12, "{}", res.max_lc_residual);
    assert!(res.max_momentum_residual <= 1e-8, "{}", res.max_momentum_residual);
    for w in &res.windows {
        assert!(w.iterations <= 10, "{w:?}");
        for pair in w.distances.windows(2).skip(1) {
            assert!(pair[1] <= pair[0], "{w:?}");
        }
    }
}

#[test]
fn parallel_and_sequential_runs_are_identical() {
    let mk = || {
        history(
            &[(0.05, 1.0), (-0.04, 2.0), (0.03, 1.5)],
            vec![
                PastSpec::Rest { r0: Vec3::zeros() },
                PastSpec::Uniform {
                    r0: Vec3::new(1.5, 0.0, 0.0),
                    v: Vec3::new(0.0, 0.2, 0.0),
                },
                PastSpec::Circular {
                    center: Vec3::new(0.0, 2.0, 0.5),
                    radius: 0.2,
                    omega: 1.0,
                    phase: 0.3,
                },
            ],
        )
    };
    let mut a = cfg(1.0, 0.5, 0.05);
    a.exec = Exec::Sequential;
    let mut b = a.clone();
    b.exec = Exec::Parallel;
    let ra = run(mk(), &a).unwrap();
    let rb = run(mk(), &b).unwrap();
    assert_eq!(ra.history.committed(), rb.history.committed());
}

#[test]
fn singular_start_is_rejected() {
    // like charges at d = q²/m0 make det Φ vanish at t = 0
    let h = history(
        &[(1.0, 1.0), (1.0, 1.0)],
        vec![
            PastSpec::Rest { r0: Vec3::zeros() },
            PastSpec::Rest {
                r0: Vec3::new(1.0, 0.0, 0.0),
            },
        ],
    );
    let err = run(h, &cfg(1.0, 0.5, 0.05)).unwrap_err();
    assert!(matches!(err, RunError::InvalidInitial(_)), "{err:?}");
}

fn head_on(h: f64) -> retarded_core::RunResult {
    let q = 0.1_f64.sqrt();
    let hist = history(
        &[(q, 1.0), (-q, 1.0)],
        vec![
            PastSpec::Rest {
                r0: Vec3::new(-0.5, 0.0, 0.0),
            },
            PastSpec::Rest {
                r0: Vec3::new(0.5, 0.0, 0.0),
            },
        ],
    );
    let mut c = cfg(5.0, 50.0 * h, h);
    c.r_min = Some(0.1);
    run(hist, &c).unwrap()
}

#[test]
fn attractive_head_on_collides_at_stable_time() {
    let coarse = head_on(0.01);
    let fine = head_on(0.005);
    for res in [&coarse, &fine] {
        assert!(
            matches!(res.terminator, Terminator::Collision { j: 0, k: 1, .. }),
            "{:?}",
            res.terminator
        );
        assert!(res.t_max > 1.0 && res.t_max < 5.0);
        for d in &res.steps {
            assert!(d.speed < 1.0 && d.det_phi.abs() >= 1e-8);
        }
        assert_eq!(res.events.last().unwrap().kind, EventKind::Collision);
    }
    assert!((coarse.t_max - fine.t_max).abs() <= 0.01 * fine.t_max);
}

#[test]
fn config_must_align_with_grid() {
    let h = history(&[(1.0, 1.0)], vec![PastSpec::Rest { r0: Vec3::zeros() }]);
    assert!(matches!(
        Integrator::new(&h, &cfg(1.0, 0.33, 0.1)),
        Err(RunError::InvalidConfig(_))
    ));
    assert!(matches!(
        Integrator::new(&h, &cfg(1.05, 0.5, 0.1)),
        Err(RunError::InvalidConfig(_))
    ));
}

#[test]
fn paper_literal_form_runs_and_is_recorded() {
    let h = history(
        &[(0.05, 1.0), (-0.05, 1.0)],
        vec![
            PastSpec::Rest { r0: Vec3::zeros() },
            PastSpec::Uniform {
                r0: Vec3::new(2.0, 0.0, 0.0),
                v: Vec3::new(0.0, 0.3, 0.0),
            },
        ],
    );
    let mut c = cfg(0.5, 0.25, 0.05);
    c.coupling_form = CouplingForm::PaperLiteral;
    let res = run(h, &c).unwrap();
    assert_eq!(res.coupling_form, CouplingForm::PaperLiteral);
    assert!(res.history.eval_state(0, 0.5).is_ok());
}
