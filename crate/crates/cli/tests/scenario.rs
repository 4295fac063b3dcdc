use proptest::prelude::*;
use volpres_cli::scenario::{parse_scenario, print_scenario, Case, ErrorKind, InitialSpec, SchemeName, DEFAULT_DT, DEFAULT_N};

#[test]
fn minimal_scenario_gets_case_defaults() {
    let s = parse_scenario("name = \"w\"\ncase = \"whip_curve\"\n").unwrap();
    assert_eq!(s.case, Case::WhipCurve);
    assert_eq!(s.grid.n, vec![DEFAULT_N]);
    assert_eq!(s.integrator.dt, DEFAULT_DT);
    assert_eq!(s.integrator.t_end, 1.0);
    assert_eq!(s.integrator.scheme, Some(SchemeName::Rk4));
    assert!(matches!(s.initial, Some(InitialSpec::CircleBump { .. })));

    let e = parse_scenario("name = \"e\"\ncase = \"euler_torus\"\n").unwrap();
    assert_eq!(e.grid.n, vec![DEFAULT_N, DEFAULT_N]);
    assert_eq!(e.integrator.scheme, Some(SchemeName::EulerRk4));

    let h1 = parse_scenario("name = \"h\"\ncase = \"whip_curve\"\n[metric]\norder = 1\n").unwrap();
    assert_eq!(h1.integrator.scheme, Some(SchemeName::DiscreteLagrangian));

    let p = parse_scenario("name = \"p\"\ncase = \"projection_study\"\n").unwrap();
    assert!(p.study.is_some());
}

#[test]
fn unknown_key_is_a_schema_error_naming_the_key() {
    let err = parse_scenario("name = \"w\"\ncase = \"whip_curve\"\n[integrator]\ndtt = 0.1\n").unwrap_err();
    assert_eq!(err.errors.len(), 1);
    let e = &err.errors[0];
    assert_eq!(e.kind, ErrorKind::Schema);
    assert!(e.to_string().contains("dtt"), "{e}");
    assert!(e.to_string().starts_with("SchemaError"), "{e}");

    let err = parse_scenario("name = \"w\"\ncase = \"whip_curve\"\n[initial]\nfamily = \"circle_bump\"\nampl = 1\n")
        .unwrap_err();
    assert!(err.to_string().contains("ampl"), "{err}");

    let err = parse_scenario("name = \"w\"\ncase = \"whip\"\n").unwrap_err();
    assert_eq!(err.errors[0].kind, ErrorKind::Schema);
    assert!(err.to_string().contains("case"), "{err}");
}

#[test]
fn negative_dt_is_a_range_error() {
    let err = parse_scenario("name = \"w\"\ncase = \"whip_curve\"\n[integrator]\ndt = -1.0\n").unwrap_err();
    assert!(err.errors.iter().all(|e| e.kind == ErrorKind::Range));
    assert!(err.errors.iter().any(|e| e.path == "integrator.dt"), "{err}");
    assert!(err.to_string().contains("RangeError at `integrator.dt`"), "{err}");
}

#[test]
fn range_errors_are_collected() {
    let text = "name = \"\"\ncase = \"euler_torus\"\n[grid]\nn = [16, 33]\n[integrator]\noutput_stride = 0\n";
    let err = parse_scenario(text).unwrap_err();
    let paths: Vec<&str> = err.errors.iter().map(|e| e.path.as_str()).collect();
    for p in ["name", "grid.n[0]", "grid.n[1]", "integrator.output_stride"] {
        assert!(paths.contains(&p), "{paths:?}");
    }
}

#[test]
fn incompatible_combinations_are_rejected() {
    let cases = [
        ("case = \"whip_curve\"\n[metric]\norder = 1\n[integrator]\nscheme = \"rattle\"\n", "integrator.scheme"),
        ("case = \"surface_l2\"\n[integrator]\nscheme = \"rk4\"\n", "integrator.scheme"),
        ("case = \"whip_curve\"\n[integrator]\ntrack_flow_map = true\n", "integrator.track_flow_map"),
        ("case = \"whip_curve\"\n[initial]\nfamily = \"shear_flow\"\n", "initial.family"),
        ("case = \"whip_curve\"\n[sweep]\ndt = [0.3, 0.1]\n", "sweep.dt"),
        ("case = \"euler_torus\"\n[study]\nsizes = [32]\n", "study"),
    ];
    for (body, path) in cases {
        let err = parse_scenario(&format!("name = \"x\"\n{body}")).unwrap_err();
        assert!(err.errors.iter().any(|e| e.path == path), "{body}: {err}");
    }
}

#[test]
fn example_scenarios_parse() {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios");
    let mut count = 0;
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        let s = parse_scenario(&std::fs::read_to_string(&path).unwrap()).unwrap_or_else(|e| panic!("{path:?}: {e}"));
        assert_eq!(parse_scenario(&print_scenario(&s)).unwrap(), s);
        count += 1;
    }
    assert!(count >= 5);
}

fn whip_text(n: usize, dt: f64, t_end: f64, stride: usize, order: u32, amp: f64, width: f64, seed: u64) -> String {
    format!(
        "name = \"p\"\ncase = \"whip_curve\"\nseed = {seed}\n[grid]\nn = [{n}]\n[metric]\norder = {order}\n\
         [integrator]\ndt = {dt:?}\nt_end = {t_end:?}\noutput_stride = {stride}\n\
         [initial]\nfamily = \"circle_bump\"\namp = {amp:?}\nwidth = {width:?}\n"
    )
}

proptest! {
    #[test]
    fn printing_round_trips(
        half in 4usize..512,
        dt in 1e-6f64..1.0,
        t_end in 0.0f64..10.0,
        stride in 1usize..1000,
        order in 0u32..=8,
        amp in -2.0f64..2.0,
        width in 0.01f64..1.0,
        seed in 0..=i64::MAX as u64,
    ) {
        let s = parse_scenario(&whip_text(2 * half, dt, t_end, stride, order, amp, width, seed)).unwrap();
        let printed = print_scenario(&s);
        prop_assert_eq!(parse_scenario(&printed).unwrap(), s.clone());
        prop_assert_eq!(print_scenario(&s), printed);
    }

    #[test]
    fn euler_round_trips(half in 16usize..256, kmax in 1i64..=16, mx in -1.0f64..1.0, my in -1.0f64..1.0, flow in any::<bool>()) {
        let text = format!(
            "name = \"e\"\ncase = \"euler_torus\"\n[grid]\nn = [{0}, {0}]\n[integrator]\ntrack_flow_map = {flow}\n\
             [initial]\nfamily = \"random_vorticity\"\nkmax = {kmax}\nmean_flow = [{mx:?}, {my:?}]\n",
            2 * half
        );
        let s = parse_scenario(&text).unwrap();
        prop_assert_eq!(parse_scenario(&print_scenario(&s)).unwrap(), s);
    }
}
