use jamgrip::contact::ContactParams;
use jamgrip::fit::{self, generate_sweep, linspace, ModelKind};
use jamgrip::io::logs::{read_samples, write_samples};
use jamgrip::io::record::{format_fit, format_outcome, parse_record};
use jamgrip::io::Config;
use jamgrip::jig::{run_grasp, GraspScenario, Plant};

#[test]
fn samples_survive_csv_at_full_precision() {
    let p = ContactParams::default();
    let xs = linspace(0.005, 0.035, 17);
    for (model, ds) in [(ModelKind::Air, vec![30.0, 45.0]), (ModelKind::Lumped, vec![])] {
        let samples = generate_sweep(&p, model, &xs, &ds, 0.05, 3).unwrap();
        let mut buf = Vec::new();
        write_samples(&mut buf, &samples).unwrap();
        let back = read_samples(buf.as_slice()).unwrap();
        assert_eq!(back, samples);

        let a = fit::fit_power_law(&samples, model).unwrap();
        let b = fit::fit_power_law(&back, model).unwrap();
        assert_eq!(a.coefficient.to_bits(), b.coefficient.to_bits());
    }
}

#[test]
fn fit_record_parses_back_exactly() {
    let p = ContactParams::default();
    let samples = generate_sweep(&p, ModelKind::Lumped, &linspace(0.001, 0.02, 30), &[], 0.1, 9).unwrap();
    let r = fit::fit_power_law(&samples, ModelKind::Lumped).unwrap();
    let rec = parse_record(&format_fit(&r)).unwrap();
    assert_eq!(rec["coefficient"].parse::<f64>().unwrap(), r.coefficient);
    assert_eq!(rec["exponent"].parse::<f64>().unwrap(), r.exponent);
}

#[test]
fn config_drives_the_same_grasp_as_code() {
    let cfg = Config::from_toml("[scenario]\nactivation_force_gf = 450.0\nfill_ratio = 0.9\n").unwrap();
    let scenario = GraspScenario {
        activation_force_gf: 450.0,
        fill_ratio: 0.9,
        ..GraspScenario::default()
    };
    let (a, _) = run_grasp(&cfg.scenario, &cfg.plant, 1e-3).unwrap();
    let (b, _) = run_grasp(&scenario, &Plant::default(), 1e-3).unwrap();
    assert_eq!(format_outcome(&a), format_outcome(&b));
    assert!(a.success);
    let rec = parse_record(&format_outcome(&a)).unwrap();
    let f_h: f64 = rec["F_h_N"].parse().unwrap();
    assert!((f_h - 7.66).abs() < 1e-9, "{f_h}");
}
