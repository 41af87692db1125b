use fishtax::bio_model::{validate_community, AgentSpec, Community, GrowthModel, RevenueSpec};
use fishtax::cli_io::{GrowthConfig, ScenarioConfig};
use fishtax::convex_kit::{concave_hull, conjugate, GridFunction};
use fishtax::hjb::{solve_value, SolverOptions};
use proptest::prelude::*;

fn revenue() -> impl Strategy<Value = RevenueSpec> {
    prop_oneof![
        (0.2..2.0f64).prop_map(|slope| RevenueSpec::Linear { slope }),
        (1.0..3.0f64, 0.1..1.0f64).prop_map(|(a, b)| RevenueSpec::Quadratic { a, b }),
        (0.5..3.0f64, 0.5..2.0f64).prop_map(|(p, scale)| RevenueSpec::Power { p, scale }),
    ]
}

fn agent() -> impl Strategy<Value = AgentSpec> {
    (revenue(), 0.3..0.8f64).prop_map(|(revenue, alpha_max)| AgentSpec { revenue, alpha_max })
}

fn grid() -> impl Strategy<Value = GridFunction> {
    prop::collection::vec(-1.0..1.0f64, 2..65).prop_map(|mut v| {
        v[0] = 0.0;
        GridFunction::new(0.0, 1.0 / 64.0, v).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn hull_is_a_concave_majorant(f in grid()) {
        let h = concave_hull(&f);
        for k in 0..f.len() {
            prop_assert!(h.grid().value(k) >= f.value(k) - 1e-12);
        }
        prop_assert!(h.grid().is_concave(1e-9));
    }

    #[test]
    fn conjugate_dominates_every_tilt(f in grid(), z in -20.0..20.0f64) {
        let c = conjugate(&f);
        let best = (0..f.len()).map(|k| f.value(k) - z * f.node(k)).fold(f64::NEG_INFINITY, f64::max);
        prop_assert!((c.eval(z) - best).abs() <= 1e-12 * (1.0 + best.abs()));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    /// An extra agent never lowers the cooperative value.
    #[test]
    fn value_grows_with_the_community(agents in prop::collection::vec(agent(), 2..4), extra in agent()) {
        let model = GrowthModel::verhulst(1.0);
        let small = Community::new(agents, 0.05).with_resolution(512);
        let mut large = small.clone();
        large.agents.push(extra);
        let opts = SolverOptions { n_nodes: 513, ..SolverOptions::default() };
        let (Ok(a), Ok(b)) = (validate_community(&small, &model), validate_community(&large, &model)) else {
            return Ok(());
        };
        let (va, vb) = (solve_value(&a, &opts).unwrap(), solve_value(&b, &opts).unwrap());
        prop_assert_eq!(&va.xs, &vb.xs);
        for (x, (p, q)) in va.xs.iter().zip(va.v.iter().zip(&vb.v)) {
            prop_assert!(q >= &(p - 1e-9), "x={}: {} > {}", x, p, q);
        }
    }

    #[test]
    fn configs_round_trip(agents in prop::collection::vec(agent(), 1..4), r in 0.5..2.0f64, beta in 0.01..0.2f64) {
        let cfg = ScenarioConfig {
            growth: GrowthConfig { r },
            beta,
            agents,
            cells_per_unit: 256,
            solver: SolverOptions::default(),
            scenario: Default::default(),
        };
        let again = ScenarioConfig::from_json(&cfg.to_json()).unwrap();
        prop_assert_eq!(&cfg, &again);
    }
}
