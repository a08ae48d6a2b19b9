use chrono::{Duration, NaiveDate, NaiveDateTime};
use proptest::prelude::*;
use roomsim::analyser::{discomfort, energy, pmv, robust_from_points, AcceptanceBox, ComfortBand, PmvCoefficients};
use roomsim::control::{mpc_plan, ControlContext, ControlStrategy, ControllerMemory, Forecast};
use roomsim::error_lab::{build_error_matrix, select_erroneous, ErrorMatrix, OccupancyString};
use roomsim::master_io::config::ControlMode;
use roomsim::master_io::series::{preprocess, slice, SignalKind, TimeSeries};
use roomsim::thermal::{stability_bound, step, BuildingPhysics, ControlInput, RoomState};

fn origin() -> NaiveDateTime {
    NaiveDate::from_ymd_opt(2015, 1, 1)
        .unwrap()
        .and_hms_opt(0, 0, 0)
        .unwrap()
}

fn strings(n: usize, len: usize) -> impl Strategy<Value = Vec<OccupancyString>> {
    prop::collection::vec(prop::collection::vec(any::<bool>(), len), n).prop_map(|rows| {
        rows.into_iter()
            .enumerate()
            .map(|(i, bits)| OccupancyString::new(origin().date() + Duration::days(i as i64), bits))
            .collect()
    })
}

fn string_sets() -> impl Strategy<Value = Vec<OccupancyString>> {
    (2usize..=20, 1usize..=288).prop_flat_map(|(n, len)| strings(n, len))
}

fn off_diagonal(m: &ErrorMatrix) -> Vec<usize> {
    let mut v: Vec<usize> = (0..m.len())
        .flat_map(|i| (0..m.len()).filter(move |&j| j != i).map(move |j| (i, j)))
        .map(|(i, j)| m.distance(i, j))
        .collect();
    v.sort_unstable();
    v
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn matrix_is_a_metric(set in string_sets()) {
        let m = build_error_matrix(&set).unwrap();
        let n = m.len();
        for i in 0..n {
            prop_assert_eq!(m.distance(i, i), 0);
            for j in 0..n {
                prop_assert_eq!(m.distance(i, j), m.distance(j, i));
                for k in 0..n {
                    prop_assert!(m.distance(i, k) <= m.distance(i, j) + m.distance(j, k));
                }
            }
        }
    }

    #[test]
    fn matrix_values_ignore_input_order(set in string_sets(), seed in any::<u64>()) {
        let mut shuffled = set.clone();
        let mut s = seed;
        for i in (1..shuffled.len()).rev() {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            shuffled.swap(i, (s >> 33) as usize % (i + 1));
        }
        let a = build_error_matrix(&set).unwrap();
        let b = build_error_matrix(&shuffled).unwrap();
        prop_assert_eq!(off_diagonal(&a), off_diagonal(&b));
    }

    #[test]
    fn erroneous_pick_respects_its_tolerance(
        set in string_sets(),
        pick in any::<prop::sample::Index>(),
        target in 0.0f64..=100.0,
        tolerance in 0.0f64..5.0,
        seed in any::<u64>(),
    ) {
        let m = build_error_matrix(&set).unwrap();
        let reference = &set[pick.index(set.len())];
        let pair = select_erroneous(reference, &m, target, tolerance, seed).unwrap();
        prop_assert!((pair.achieved_error - target).abs() <= pair.final_tolerance + 1e-9);
        let gap = (pair.erroneous.occupied_fraction() - reference.occupied_fraction()).abs();
        prop_assert!(gap <= pair.achieved_error / 100.0 + 1e-12);
        prop_assert_eq!(select_erroneous(reference, &m, target, tolerance, seed).unwrap(), pair);
    }

    #[test]
    fn matrix_csv_round_trips(set in string_sets()) {
        let m = build_error_matrix(&set).unwrap();
        prop_assert_eq!(ErrorMatrix::from_csv(&m.to_csv(), &set).unwrap(), m);
    }
}

fn gappy_series() -> impl Strategy<Value = (TimeSeries, i64)> {
    (
        prop::sample::select(vec![60i64, 300, 600, 900, 1800]),
        prop::collection::vec(prop::option::weighted(0.85, -20.0f64..40.0), 2..200),
        prop::sample::select(vec![300i64, 600, 1200, 3600]),
    )
        .prop_filter("needs a value", |(_, v, _)| v.iter().any(Option::is_some))
        .prop_map(|(step, values, target)| {
            (
                TimeSeries {
                    start: origin(),
                    step,
                    values,
                },
                target,
            )
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn preprocess_is_idempotent((series, target) in gappy_series(), binary in any::<bool>()) {
        let kind = if binary { SignalKind::Binary } else { SignalKind::Continuous };
        let series = if binary {
            TimeSeries { values: series.values.iter().map(|v| v.map(|x| f64::from(u8::from(x > 10.0)))).collect(), ..series }
        } else {
            series
        };
        if let Ok(once) = preprocess(&series, target, kind) {
            prop_assert_eq!(preprocess(&once, target, kind).unwrap(), once);
        }
    }

    #[test]
    fn nested_slices_equal_inner_slice(
        values in prop::collection::vec(-5.0f64..5.0, 10..300),
        cuts in prop::collection::vec(0i64..300, 4),
    ) {
        let series = TimeSeries::new(origin(), 600, values);
        let mut c = cuts.clone();
        c.sort_unstable();
        let at = |k: i64| origin() + Duration::seconds(600 * k);
        let (outer_a, inner_a, inner_b, outer_b) = (at(c[0]), at(c[1]), at(c[2]), at(c[3]));
        prop_assume!(c[1] < c[2] && c[0] < c[3]);
        let (Ok(outer), Ok(direct)) = (slice(&series, outer_a, outer_b), slice(&series, inner_a, inner_b)) else {
            return Ok(());
        };
        prop_assert_eq!(slice(&outer, inner_a, inner_b).unwrap(), direct);
    }
}

fn rooms_state() -> impl Strategy<Value = (Vec<f64>, Vec<f64>, Vec<bool>)> {
    (1usize..=5).prop_flat_map(|n| {
        (
            prop::collection::vec(10.0f64..35.0, n),
            prop::collection::vec(0.0f64..=1.0, n),
            prop::collection::vec(any::<bool>(), n),
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn one_step_is_a_contraction(
        (a, airflow, occupancy) in rooms_state(),
        shift in prop::collection::vec(-5.0f64..5.0, 5),
        outdoor in 0.0f64..40.0,
        supply in 10.0f64..40.0,
        frac in 0.01f64..0.99,
    ) {
        let p = BuildingPhysics::default();
        let b: Vec<f64> = a.iter().zip(&shift).map(|(x, s)| x + s).collect();
        let tau = frac * stability_bound(&p, a.len(), p.max_airflow);
        let u = ControlInput::new(supply, airflow, &p);
        let na = step(&RoomState { temperatures: a.clone() }, &u, outdoor, &occupancy, &p, tau).unwrap();
        let nb = step(&RoomState { temperatures: b.clone() }, &u, outdoor, &occupancy, &p, tau).unwrap();
        let before = a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        let after = na.temperatures.iter().zip(&nb.temperatures).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        prop_assert!(after <= before + 1e-12);
    }

    #[test]
    fn reversing_rooms_reverses_temperatures(
        (t, airflow, occupancy) in rooms_state(),
        outdoor in 0.0f64..40.0,
        supply in 10.0f64..40.0,
    ) {
        // Rooms sit in a row, so reversal is the symmetry that keeps neighbours.
        let p = BuildingPhysics::default();
        let rev = |v: &[f64]| v.iter().rev().copied().collect::<Vec<_>>();
        let forward = step(&RoomState { temperatures: t.clone() }, &ControlInput::new(supply, airflow.clone(), &p), outdoor, &occupancy, &p, 600.0).unwrap();
        let occ_rev: Vec<bool> = occupancy.iter().rev().copied().collect();
        let backward = step(&RoomState { temperatures: rev(&t) }, &ControlInput::new(supply, rev(&airflow), &p), outdoor, &occ_rev, &p, 600.0).unwrap();
        prop_assert_eq!(rev(&forward.temperatures), backward.temperatures);
    }

    #[test]
    fn energy_adds_over_concatenation(
        a in prop::collection::vec(0.0f64..50.0, 0..100),
        b in prop::collection::vec(0.0f64..50.0, 0..100),
    ) {
        let joined: Vec<f64> = a.iter().chain(&b).copied().collect();
        let whole = energy(&joined, 600.0);
        prop_assert!((whole - energy(&a, 600.0) - energy(&b, 600.0)).abs() <= 1e-9 * whole.max(1.0));
    }

    #[test]
    fn pmv_second_difference_is_constant(t in 10.0f64..35.0, v in 0.0f64..2.0, dv in 0.01f64..1.0) {
        let c = PmvCoefficients::default();
        let second = pmv(t, v + 2.0 * dv, &c) - 2.0 * pmv(t, v + dv, &c) + pmv(t, v, &c);
        prop_assert!((second - 2.0 * c.p3 * dv * dv).abs() < 1e-9);
    }

    #[test]
    fn discomfort_is_a_unit_slope_hinge(p in -5.0f64..5.0, h in 1e-3f64..0.1) {
        let band = ComfortBand::default();
        let d = discomfort(p, &band);
        prop_assert_eq!(d == 0.0, (band.lower..=band.upper).contains(&p));
        let slope = (discomfort(p + h, &band) - d) / h;
        prop_assert!((-1.0 - 1e-9..=1.0 + 1e-9).contains(&slope));
    }

    #[test]
    fn robust_ignores_order_and_grows_with_the_box(
        points in prop::collection::vec((0.0f64..100.0, 0.0f64..40.0), 1..30),
        e0 in 20.0f64..80.0,
        d0 in 5.0f64..30.0,
        grow in 0.0f64..10.0,
    ) {
        let b = AcceptanceBox::around(e0, d0);
        let mut reversed = points.clone();
        reversed.reverse();
        prop_assert_eq!(robust_from_points(&points, &b), robust_from_points(&reversed, &b));
        let wider = AcceptanceBox { energy_halfwidth_kwh: b.energy_halfwidth_kwh + grow, ..b };
        let taller = AcceptanceBox { discomfort_halfwidth: b.discomfort_halfwidth + grow, ..b };
        prop_assert!(robust_from_points(&points, &wider) >= robust_from_points(&points, &b));
        prop_assert!(robust_from_points(&points, &taller) >= robust_from_points(&points, &b));
    }
}

fn small_instance() -> impl Strategy<Value = (Vec<f64>, Vec<f64>, Vec<Vec<bool>>)> {
    (1usize..=2, 1usize..=3).prop_flat_map(|(rooms, steps)| {
        (
            prop::collection::vec(18.0f64..32.0, rooms),
            prop::collection::vec(15.0f64..38.0, steps),
            prop::collection::vec(prop::collection::vec(any::<bool>(), rooms), steps),
        )
    })
}

fn strategy(steps: usize, lambda: f64) -> ControlStrategy {
    ControlStrategy {
        mode: ControlMode::Mpc,
        horizon_steps: steps,
        hold_steps: 6,
        tsa_grid: vec![12.0, 16.0, 30.0],
        airflow_grid: vec![0.0, 0.25, 1.0],
        lambda,
        deadband: 0.1,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn planned_discomfort_falls_as_lambda_rises(
        (temps, outdoor, occupancy) in small_instance(),
        l1 in 0.0f64..3.0,
        dl in 0.0f64..3.0,
    ) {
        let physics = BuildingPhysics::default();
        let ctx = ControlContext { physics: &physics, pmv: PmvCoefficients::default(), comfort: ComfortBand::default(), time_step: 600.0 };
        let state = RoomState { temperatures: temps };
        let forecast = Forecast { outdoor: outdoor.clone(), occupancy };
        let memory = ControllerMemory::default();
        let low = mpc_plan(&state, &forecast, &ctx, &strategy(outdoor.len(), l1), 0, &memory).unwrap();
        let high = mpc_plan(&state, &forecast, &ctx, &strategy(outdoor.len(), l1 + dl), 0, &memory).unwrap();
        prop_assert!(high.discomfort <= low.discomfort + 1e-9);
    }

    #[test]
    fn zero_lambda_plans_no_airflow((temps, outdoor, occupancy) in small_instance()) {
        let physics = BuildingPhysics::default();
        let ctx = ControlContext { physics: &physics, pmv: PmvCoefficients::default(), comfort: ComfortBand::default(), time_step: 600.0 };
        let state = RoomState { temperatures: temps };
        let forecast = Forecast { outdoor: outdoor.clone(), occupancy };
        let plan = mpc_plan(&state, &forecast, &ctx, &strategy(outdoor.len(), 0.0), 0, &ControllerMemory::default()).unwrap();
        prop_assert!(plan.airflow.iter().flatten().all(|&a| a == 0.0));
    }
}

#[test]
fn idle_plans_repeat_under_a_constant_forecast() {
    let physics = BuildingPhysics::default();
    let ctx = ControlContext {
        physics: &physics,
        pmv: PmvCoefficients::default(),
        comfort: ComfortBand::default(),
        time_step: 600.0,
    };
    let strategy = ControlStrategy {
        horizon_steps: 24,
        ..strategy(24, 1.0)
    };
    let forecast = Forecast {
        outdoor: vec![24.0; 24],
        occupancy: vec![vec![false; 3]; 24],
    };
    let mut state = RoomState::uniform(3, 24.0);
    let mut memory = ControllerMemory::default();
    let mut inputs = Vec::new();
    for k in 0..8 {
        let plan = mpc_plan(&state, &forecast, &ctx, &strategy, k, &memory).unwrap();
        memory.held_supply = Some(plan.supply_air_temperature);
        memory.plan = Some(plan.airflow.clone());
        state = step(&state, &plan.input, 24.0, &[false; 3], &physics, 600.0).unwrap();
        inputs.push(plan.input);
    }
    assert!(inputs.windows(2).all(|w| w[0] == w[1]));
    assert_eq!(state, RoomState::uniform(3, 24.0));
}

#[test]
fn occupied_plans_repeat_once_the_state_settles() {
    let physics = BuildingPhysics::default();
    let ctx = ControlContext {
        physics: &physics,
        pmv: PmvCoefficients::default(),
        comfort: ComfortBand::default(),
        time_step: 600.0,
    };
    let strategy = strategy(2, 1.0);
    let forecast = Forecast {
        outdoor: vec![30.0; 2],
        occupancy: vec![vec![true; 2]; 2],
    };
    let mut state = RoomState::uniform(2, 30.0);
    let mut memory = ControllerMemory::default();
    let mut inputs = Vec::new();
    for k in 0..400 {
        let plan = mpc_plan(&state, &forecast, &ctx, &strategy, k, &memory).unwrap();
        memory.held_supply = Some(plan.supply_air_temperature);
        memory.plan = Some(plan.airflow.clone());
        state = step(&state, &plan.input, 30.0, &[true; 2], &physics, 600.0).unwrap();
        inputs.push(plan.input);
    }
    // Same planner, same forecast, same state: the same input.
    let again = mpc_plan(&state, &forecast, &ctx, &strategy, 400, &memory).unwrap();
    let settled = mpc_plan(&state, &forecast, &ctx, &strategy, 400, &memory).unwrap();
    assert_eq!(again, settled);
    // The closed loop ends in a repeating pattern of inputs.
    let tail = &inputs[inputs.len() - 60..];
    let period = (1..=30).find(|&p| tail.windows(p + 1).all(|w| w[0] == w[p]));
    assert!(period.is_some(), "no periodic regime in the last 60 inputs");
}
