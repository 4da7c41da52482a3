use proptest::prelude::*;

use uavdeploy::minmax::{check_feasibility, fptas_minmax, solve_common_origin_minmax};
use uavdeploy::minsum::{dp_minsum, dp_table, greedy_common_origin_minsum};
use uavdeploy::model::{coverage_gap, Placement};
use uavdeploy::oracle::{brute_force_minmax, continuous_minsum_ordered, grid_minsum_search};
use uavdeploy::planar::{check_feasibility_2d, fptas_minmax_2d, verify_planar_coverage};
use uavdeploy::{
    bounds, footprint_halfwidth, radius_from_snr, verify_coverage, Deployment, Instance, Metric,
    RadioParams, Uav,
};

/// Agents as `(x, r, h, v)`; `beta` is a fraction of the total footprint.
fn fleet(max_n: usize, min_h: f64) -> impl Strategy<Value = Instance> {
    (
        prop::collection::vec((-2.0..12.0f64, 0.3..2.5f64, min_h..1.5f64, 0.5..6.0f64), 1..=max_n),
        0.3..1.0f64,
        prop::bool::ANY,
    )
        .prop_map(|(agents, frac, manhattan)| {
            let span: f64 = agents.iter().map(|a| 2.0 * a.1).sum();
            let uavs = agents
                .iter()
                .enumerate()
                .map(|(id, &(x, r, h, v))| Uav::new(id, x, r, h, v))
                .collect();
            let metric = if manhattan { Metric::Manhattan } else { Metric::Euclidean };
            Instance::new((span * frac).max(0.1), 0.0, uavs, metric).unwrap()
        })
}

fn shared_origin_fleet(max_n: usize) -> impl Strategy<Value = Instance> {
    (
        prop::collection::vec((0.3..2.5f64, 0.0..1.5f64, 0.5..6.0f64), 1..=max_n),
        0.3..1.0f64,
        prop_oneof![-3.0..0.0f64, Just(0.0)],
        prop::bool::ANY,
    )
        .prop_map(|(agents, frac, x0, right)| {
            let span: f64 = agents.iter().map(|a| 2.0 * a.0).sum();
            let beta = (span * frac).max(0.1);
            let x = if right { beta - x0 } else { x0 };
            let uavs = agents
                .iter()
                .enumerate()
                .map(|(id, &(r, h, v))| Uav::new(id, x, r, h, v))
                .collect();
            Instance::new(beta, 0.0, uavs, Metric::Euclidean).unwrap()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn travel_time_minimised_over_own_abscissa(x in -5.0..5.0f64, h in 0.0..3.0f64, v in 0.1..10.0f64, y in -10.0..10.0f64) {
        let u = Uav::new(0, x, 1.0, h, v);
        let here = uavdeploy::travel_time(&u, x, Metric::Euclidean, false);
        prop_assert_eq!(here, h / v);
        prop_assert!(uavdeploy::travel_time(&u, y, Metric::Euclidean, false) >= here);
    }

    #[test]
    fn halfwidth_at_zero_width_is_radius(r in 0.01..100.0f64) {
        prop_assert_eq!(footprint_halfwidth(&Uav::new(0, 0.0, r, 1.0, 1.0), 0.0).unwrap(), r);
    }

    #[test]
    fn radio_footprint_shrinks_with_altitude(budget in 2.0..100.0f64, h1 in 0.0..1.0f64, dh in 0.01..0.3f64) {
        let radio = RadioParams { power: budget, xi: 1.0, sigma2: 1.0, gamma_th: 1.0 };
        let (a, b) = (radius_from_snr(&radio, h1).unwrap(), radius_from_snr(&radio, h1 + dh).unwrap());
        prop_assert!(b < a);
    }

    #[test]
    fn adding_a_placement_keeps_coverage(inst in fleet(6, 0.0), extra in -5.0..15.0f64) {
        let sol = fptas_minmax(&inst, 1e-2).unwrap();
        prop_assert!(verify_coverage(&inst, &sol.deployment));
        let unused = inst.uavs().iter().find(|u| !sol.deployment.per_delay.contains_key(&u.id));
        if let Some(u) = unused {
            let mut more = sol.deployment.placements.clone();
            more.push(Placement { id: u.id, y: extra, zp: None });
            let k = inst.position_of(u.id).unwrap();
            let mut pos: Vec<(usize, f64)> = more.iter().map(|p| (inst.position_of(p.id).unwrap(), p.y)).collect();
            pos.sort_by_key(|&(i, _)| i);
            let dep = Deployment::from_positions(&inst, &pos);
            prop_assert!(verify_coverage(&inst, &dep), "adding agent {} broke coverage", k);
        }
    }

    #[test]
    fn feasibility_is_monotone_and_order_preserving(inst in fleet(8, 0.0), ts in prop::collection::vec(0.0..8.0f64, 2..12)) {
        let mut ts = ts;
        ts.sort_by(f64::total_cmp);
        let mut seen_feasible = false;
        for t in ts {
            let out = check_feasibility(&inst, t);
            prop_assert!(!seen_feasible || out.feasible, "lost feasibility at {}", t);
            seen_feasible |= out.feasible;
            let ys: Vec<(usize, f64)> = out.placements.iter().map(|s| (s.index, s.y)).collect();
            prop_assert!(ys.windows(2).all(|w| w[0].0 < w[1].0 && w[0].1 <= w[1].1));
            if out.feasible {
                let dep = out.deployment(&inst);
                prop_assert!(coverage_gap(&inst, &dep).is_none());
                prop_assert!(dep.max_delay <= t * (1.0 + 1e-12) + 1e-15);
            }
        }
    }

    #[test]
    fn fptas_sandwich(inst in fleet(10, 0.05), eps in prop_oneof![Just(0.5), Just(1e-2), Just(1e-4)]) {
        let sol = fptas_minmax(&inst, eps).unwrap();
        let t = sol.deadline.unwrap();
        let unit = sol.grid_unit.unwrap();
        prop_assert!(check_feasibility(&inst, t).feasible);
        prop_assert!(!check_feasibility(&inst, t - unit).feasible);
        prop_assert!(sol.objective <= t * (1.0 + 1e-12));
        prop_assert!(verify_coverage(&inst, &sol.deployment));
    }

    #[test]
    fn finer_epsilon_never_worse_beyond_one_unit(inst in fleet(10, 0.05)) {
        let coarse = fptas_minmax(&inst, 0.5).unwrap();
        let fine = fptas_minmax(&inst, 1e-3).unwrap();
        prop_assert!(fine.deadline.unwrap() <= coarse.deadline.unwrap() + fine.grid_unit.unwrap());
    }

    #[test]
    fn dp_table_monotone_and_matches_pareto_search(inst in fleet(5, 0.0), steps in 10usize..60) {
        let unit = bounds(&inst).gamma_u / steps as f64;
        let table = dp_table(&inst, unit).unwrap();
        let n = inst.len();
        for i in 0..=n {
            for j in 0..=table.steps {
                if j < table.steps { prop_assert!(table.r(i, j) <= table.r(i, j + 1)); }
                if i < n { prop_assert!(table.r(i, j) <= table.r(i + 1, j)); }
            }
        }
        let search = grid_minsum_search(&inst, unit, table.steps);
        prop_assert_eq!(table.first_covering(&inst), search);
        let sol = dp_minsum(&inst, unit).unwrap();
        prop_assert!(verify_coverage(&inst, &sol.deployment));
        prop_assert!(sol.objective <= sol.grid_objective.unwrap() * (1.0 + 1e-12) + 1e-12);
    }

    #[test]
    fn dp_within_grid_slack_of_continuous(inst in fleet(4, 0.05), steps in 40usize..200) {
        prop_assume!(inst.metric() == Metric::Euclidean);
        let unit = bounds(&inst).gamma_u / steps as f64;
        let sol = dp_minsum(&inst, unit).unwrap();
        let (cont, _) = continuous_minsum_ordered(&inst).unwrap();
        let n = inst.len() as f64;
        prop_assert!(sol.objective >= cont * (1.0 - 1e-9) - 1e-12, "{} < {}", sol.objective, cont);
        prop_assert!(sol.objective <= cont + n * unit + 1e-9);
    }

    #[test]
    fn common_origin_matches_brute_force(inst in shared_origin_fleet(5)) {
        let exact = solve_common_origin_minmax(&inst).unwrap();
        let oracle = brute_force_minmax(&inst, 8).unwrap();
        prop_assert!(verify_coverage(&inst, &exact.deployment));
        let rel = (exact.objective - oracle.objective).abs() / oracle.objective.max(1e-300);
        prop_assert!(rel <= 1e-9 || (exact.objective - oracle.objective).abs() < 1e-12,
            "exact {} oracle {}", exact.objective, oracle.objective);
    }

    #[test]
    fn greedy_minsum_within_heterogeneity_factor(inst in shared_origin_fleet(5)) {
        prop_assume!(inst.uavs().iter().all(|u| u.h > 0.0));
        let g = greedy_common_origin_minsum(&inst).unwrap();
        prop_assert!(verify_coverage(&inst, &g.deployment));
        let b = bounds(&inst);
        let dp = dp_minsum(&inst, b.gamma_u / 400.0).unwrap();
        let slack = inst.len() as f64 * dp.grid_unit.unwrap();
        prop_assert!(g.objective <= b.kappa * b.tau * (dp.objective + slack) * (1.0 + 1e-12));
    }

    #[test]
    fn fptas_never_beats_unrestricted_optimum(inst in fleet(5, 0.05)) {
        let oracle = brute_force_minmax(&inst, 8).unwrap();
        let sol = fptas_minmax(&inst, 1e-3).unwrap();
        prop_assert!(sol.objective >= oracle.objective * (1.0 - 1e-9));
    }
}

fn planar_fleet() -> impl Strategy<Value = Instance> {
    (1usize..=3, 1usize..=3, prop::collection::vec((0.0..1.0f64, 0.0..1.0f64, 0.05..0.5f64, 1.0..5.0f64, 1.0..1.6f64), 9))
        .prop_map(|(p, q, agents)| {
            let side = std::f64::consts::SQRT_2;
            let (bx, bz) = (p as f64 * side, q as f64 * side);
            let uavs = agents
                .iter()
                .enumerate()
                .map(|(id, &(ux, uz, h, v, r))| Uav::new(id, ux * bx, r, h, v).with_z(uz * bz))
                .collect();
            Instance::grid(bx * 0.999, bz * 0.999, uavs, Metric::Euclidean).unwrap()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn planar_solutions_cover_and_keep_column_order(inst in planar_fleet()) {
        let sol = fptas_minmax_2d(&inst, 1e-2).unwrap();
        prop_assert!(verify_planar_coverage(&inst, &sol.deployment, &sol.plan));
        let segs = &sol.plan.assignments;
        prop_assert_eq!(segs.len(), sol.plan.p);
        prop_assert!(segs.windows(2).all(|w| w[0].start + w[0].len == w[1].start));
        prop_assert!(segs.iter().all(|s| s.len >= sol.plan.q));
        let out = check_feasibility_2d(&inst, sol.deadline, sol.plan.r_eff).unwrap();
        prop_assert!(out.feasible);
        for col in out.placements.chunk_by(|a, b| a.1 == b.1) {
            prop_assert!(col.windows(2).all(|w| w[0].0 < w[1].0 && w[0].2 <= w[1].2));
        }
    }

    #[test]
    fn planar_extra_agents_never_hurt(inst in planar_fleet()) {
        let base = fptas_minmax_2d(&inst, 1e-2).unwrap();
        let mut uavs = inst.uavs().to_vec();
        let far = uavs.iter().map(|u| u.x).fold(f64::MIN, f64::max) + 1.0;
        uavs.push(Uav::new(99, far, 1.5, 0.3, 1.0));
        let bigger = Instance::grid(inst.beta(), inst.d(), uavs, Metric::Euclidean).unwrap();
        let more = fptas_minmax_2d(&bigger, 1e-2).unwrap();
        prop_assert!(more.deadline <= base.deadline + more.grid_unit.max(base.grid_unit) * 2.0 + 1e-12);
    }
}
