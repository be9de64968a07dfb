use stirap_core::analysis::{analyze, efficiency, emission_rate, fwhm, series_fwhm};
use stirap_core::fit::{fit_efficiency_exponent, REFERENCE_EXPONENT};
use stirap_core::model::{adiabaticity_margin, REFERENCE_OMEGA0, REFERENCE_RATIO};
use stirap_core::sweep::{exponent_for_ratio, run_sweep, Grid, SweepSpec, SweepVariable};
use stirap_core::{simulate, DensityState, Error, Level, PulseParams, ScheduleSpec, SystemParams, Trajectory};

/// Five times the default step: accurate to ~1e-9, five times cheaper.
fn coarse() -> ScheduleSpec {
    ScheduleSpec {
        step: 1e-5,
        record_stride: 20,
        ..ScheduleSpec::default()
    }
}

fn run(pulse: PulseParams, params: SystemParams) -> Trajectory {
    simulate(&pulse, &params, &coarse().resolve(&pulse), &DensityState::pure(Level::U0)).unwrap()
}

#[test]
fn emission_rate_and_population_share_the_same_width() {
    let traj = run(PulseParams::reference(), SystemParams::reference(2.5e4));
    let rate = emission_rate(&traj, 2.5e4).unwrap();
    let (t, p): (Vec<f64>, Vec<f64>) = rate.into_iter().unzip();
    let from_rate = series_fwhm(&t, &p).unwrap();
    let from_population = fwhm(&traj).unwrap();
    assert!((from_rate.delta_t - from_population.delta_t).abs() <= 1e-15 * from_population.delta_t);
    assert!((from_rate.t_minus - from_population.t_minus).abs() <= 1e-18);
}

#[test]
fn report_is_deterministic_and_consistent() {
    let traj = run(PulseParams::reference(), SystemParams::reference(2.5e4));
    let a = analyze(&traj, 2.5e4).unwrap();
    let b = analyze(&traj, 2.5e4).unwrap();
    assert_eq!(format!("{a:?}"), format!("{b:?}"));
    assert!(a.t_minus < a.t_max && a.t_max < a.t_plus);
    assert_eq!(a.delta_t, a.t_plus - a.t_minus);
    assert!(a.eta >= 0.0 && a.eta <= 1.0 + 1e-9);
    assert!((a.final_populations.iter().sum::<f64>() - 1.0).abs() <= 1e-9);
    assert!((a.eta - a.final_populations[3]).abs() <= 1e-6);

    // p(t±) = peak/2 up to the sample spacing.
    let near = |t0: f64| {
        traj.samples()
            .iter()
            .min_by(|x, y| (x.t - t0).abs().total_cmp(&(y.t - t0).abs()))
            .unwrap()
            .p_g1()
    };
    assert!((near(a.t_minus) / a.peak_p - 0.5).abs() < 1e-3);
    assert!((near(a.t_plus) / a.peak_p - 0.5).abs() < 1e-3);

    // Transmission enters linearly (up to summation rounding).
    let partial = efficiency(&traj, 0.9 * 2.5e4).unwrap();
    assert!((partial - 0.9 * a.eta).abs() <= 1e-12 * a.eta);
}

#[test]
fn no_decay_means_no_emission() {
    let traj = run(PulseParams::reference(), SystemParams::reference(0.0));
    let r = analyze(&traj, 0.0).unwrap();
    assert_eq!(r.eta, 0.0);
    assert_eq!(r.final_populations[3], 0.0);
    assert!(r.t_max.abs() < 1e-7);
}

#[test]
fn gamma_sweep_reproduces_reference_efficiencies() {
    let spec = SweepSpec::new(
        SweepVariable::Gamma,
        Grid::Values(vec![0.0, 2.5e4]),
        PulseParams::reference(),
        SystemParams::reference(0.0),
    );
    let table = run_sweep(&spec, &ScheduleSpec::default()).unwrap();
    assert_eq!(table.iter().map(|p| p.value).collect::<Vec<_>>(), vec![0.0, 2.5e4]);
    let eta: Vec<f64> = table.iter().map(|p| p.outcome.as_ref().unwrap().eta).collect();
    assert_eq!(eta[0], 0.0);
    assert!((eta[1] - 0.84720).abs() < 2e-4);
    assert!(table.iter().all(|p| p.is_adiabatic()));
}

#[test]
fn time_scale_sweep_has_constant_relative_width() {
    let spec = SweepSpec::new(
        SweepVariable::TimeScale,
        Grid::Values(vec![2.5e-5, 5e-5, 1e-4]),
        PulseParams::reference(),
        SystemParams::reference(0.0),
    );
    for point in run_sweep(&spec, &coarse()).unwrap() {
        let ratio = point.outcome.unwrap().delta_t / point.value;
        assert!((ratio - 1.8930).abs() < 5e-3 * 1.8930, "T = {}: {ratio}", point.value);
    }
}

#[test]
fn sweep_is_deterministic_across_thread_counts() {
    let spec = SweepSpec::new(
        SweepVariable::CouplingRatio,
        Grid::Values(vec![0.25, 0.5, 1.0]),
        PulseParams::reference(),
        SystemParams::reference(2e4),
    );
    let schedule = ScheduleSpec {
        step: 1e-4,
        ..ScheduleSpec::default()
    };
    let with = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| run_sweep(&spec, &schedule).unwrap())
    };
    let one = with(1);
    let four = with(4);
    assert_eq!(one, four);
    // Smaller ratio ⇒ earlier emission.
    let t_max: Vec<f64> = one.iter().map(|p| p.outcome.as_ref().unwrap().t_max).collect();
    assert!(t_max[0] < t_max[1] && t_max[1] < t_max[2], "{t_max:?}");
}

#[test]
fn failing_points_are_recorded_not_propagated() {
    // A window that cuts off before the peak makes analysis fail for every point.
    let spec = SweepSpec::new(
        SweepVariable::Gamma,
        Grid::Values(vec![1e4, 2e4]),
        PulseParams::reference(),
        SystemParams::reference(0.0),
    );
    let truncated = ScheduleSpec {
        start: -5.0,
        end: -3.0,
        step: 1e-4,
        record_stride: 10,
    };
    let table = run_sweep(&spec, &truncated).unwrap();
    assert_eq!(table.len(), 2);
    assert!(table.iter().all(|p| matches!(p.outcome, Err(Error::PeakAtBoundary { .. }))));
}

#[test]
fn non_adiabatic_points_are_flagged() {
    let spec = SweepSpec::new(
        SweepVariable::TimeScale,
        Grid::Values(vec![1e-9, 5e-5]),
        PulseParams::reference(),
        SystemParams::reference(0.0),
    );
    let table = run_sweep(&spec, &ScheduleSpec { step: 1e-4, ..ScheduleSpec::default() }).unwrap();
    assert!(!table[0].is_adiabatic());
    assert!(table[1].is_adiabatic());
    assert_eq!(
        table[0].adiabaticity_margin,
        adiabaticity_margin(&table[0].pulse, table[0].params.g)
    );
}

#[test]
fn degenerate_grid_is_rejected() {
    let spec = SweepSpec::new(
        SweepVariable::Gamma,
        Grid::linear(1e4, 1e4, 2),
        PulseParams::reference(),
        SystemParams::reference(0.0),
    );
    assert!(run_sweep(&spec, &coarse()).is_err());
}

fn small_gamma_grid() -> Grid {
    Grid::linear(0.0, 3.6e5, 7)
}

#[test]
fn exponent_decreases_with_coupling_ratio() {
    let a: Vec<f64> = [0.05, 0.25, 1.0]
        .iter()
        .map(|&r| exponent_for_ratio(r, 5e-5, REFERENCE_OMEGA0, &small_gamma_grid(), &coarse()).unwrap().parameters[0])
        .collect();
    assert!(a[0] > a[1] && a[1] > a[2], "{a:?}");
    assert!((a[1] - REFERENCE_EXPONENT).abs() < 0.01, "{}", a[1]);
}

#[test]
fn exponent_depends_only_on_ratio() {
    let base = exponent_for_ratio(REFERENCE_RATIO, 5e-5, REFERENCE_OMEGA0, &small_gamma_grid(), &coarse())
        .unwrap()
        .parameters[0];
    for (t, omega0) in [(2.5e-5, REFERENCE_OMEGA0), (5e-5, 1.5 * REFERENCE_OMEGA0), (5e-5, 0.5 * REFERENCE_OMEGA0)] {
        let a = exponent_for_ratio(REFERENCE_RATIO, t, omega0, &small_gamma_grid(), &coarse())
            .unwrap()
            .parameters[0];
        assert!(((a - base) / base).abs() < 0.01, "T = {t}, Ω₀ = {omega0}: {a} vs {base}");
    }
}

#[test]
fn efficiency_grows_with_pulse_length() {
    let eta: Vec<f64> = [2.5e-5, 5e-5, 1e-4]
        .iter()
        .map(|&t| {
            let traj = run(PulseParams::new(REFERENCE_OMEGA0, t).unwrap(), SystemParams::reference(2e4));
            analyze(&traj, 2e4).unwrap().eta
        })
        .collect();
    assert!(eta[0] <= eta[1] && eta[1] <= eta[2], "{eta:?}");
}

#[test]
fn single_gamma_is_unidentifiable() {
    let points = [(0.0, 0.0), (0.0, 0.0), (0.0, 0.0)];
    assert!(matches!(fit_efficiency_exponent(&points, 5e-5), Err(Error::Unidentifiable(_))));
}
