use uavsense::exec::Exec;
use uavsense::experiments::{export_maps, rows_to_csv, run_sweep, Preset, SimConfig, SweepSpec, TrialSetup};
use uavsense::geometry::GridKind;
use uavsense::localization::on_grid;
use uavsense::map_io::read_map;
use uavsense::overhead::Method;

fn tiny() -> SimConfig {
    let mut c = SimConfig::preset(Preset::Desk);
    c.scene.divisions = 4;
    c.scene.elements = 4;
    c.waveform.symbols = 2;
    c.waveform.subcarriers = 8;
    c.run.trials = 6;
    c
}

#[test]
fn sweep_rows_cover_every_point_and_method() {
    let cfg = tiny();
    let spec: SweepSpec = "U=1,4".parse().unwrap();
    let out = run_sweep(&cfg, Some(&spec), Exec::Parallel, &|_, _| {}).unwrap();
    assert_eq!(out.points.len(), 2);
    let thetas = cfg.localizer.thresholds.len();
    // U=1 has only the benchmark; U=4 has all four methods
    assert_eq!(out.rows.len(), thetas + 4 * thetas);
    assert!(out.rows.iter().all(|r| r.n == 6 && r.ci_low <= r.mean && r.mean <= r.ci_high));
    let csv = rows_to_csv(&out.rows).unwrap();
    assert!(csv.starts_with("parameter,value,method,grid,theta,n,mean,median,std,ci_low,ci_high,hit_rate\n"));
    assert_eq!(csv.lines().count(), out.rows.len() + 1);
}

#[test]
fn execution_mode_does_not_change_results() {
    let cfg = tiny();
    let a = run_sweep(&cfg, None, Exec::Sequential, &|_, _| {}).unwrap();
    let b = run_sweep(&cfg, None, Exec::Parallel, &|_, _| {}).unwrap();
    assert_eq!(rows_to_csv(&a.rows).unwrap(), rows_to_csv(&b.rows).unwrap());
}

#[test]
fn seed_changes_targets() {
    let mut cfg = tiny();
    let setup = TrialSetup::new(&cfg, GridKind::Mixed, Exec::Sequential).unwrap();
    let a = setup.target_position(0);
    cfg.run.seed = 2;
    let setup = TrialSetup::new(&cfg, GridKind::Mixed, Exec::Sequential).unwrap();
    assert_ne!(a, setup.target_position(0));
}

#[test]
fn noiseless_pinned_target_found_by_every_map() {
    let mut cfg = tiny();
    cfg.radio.noiseless = true;
    cfg.scene.ground_rcs = 0.0;
    cfg.run.pin_target = true;
    let setup = TrialSetup::new(&cfg, GridKind::Mixed, Exec::Sequential).unwrap();
    for t in 0..4 {
        let r = setup.run_trial(t, Exec::Sequential).unwrap();
        for m in [Method::Mimore, Method::Mure, Method::Benchmark] {
            let o = r.outcome(m, 1.0).unwrap();
            assert!(o.error < 1e-9, "trial {t} {m:?} error {}", o.error);
        }
    }
}

#[test]
fn exported_maps_reload_with_the_same_argmax() {
    let cfg = tiny();
    let dir = tempfile::tempdir().unwrap();
    let files = export_maps(&cfg, GridKind::Mixed, 1, dir.path(), Exec::Sequential).unwrap();
    let setup = TrialSetup::new(&cfg, GridKind::Mixed, Exec::Sequential).unwrap();
    let maps = setup.maps(1, Exec::Sequential).unwrap();
    let (header, mure) = read_map(&dir.path().join("mure.txt")).unwrap();
    assert_eq!(header.divisions, 4);
    assert_eq!(
        on_grid(&mure, &setup.grid).unwrap().cell,
        on_grid(maps.mure.as_ref().unwrap(), &setup.grid).unwrap().cell
    );
    assert!(files.iter().any(|f| f.ends_with("local-0.txt")));
}

#[test]
fn config_survives_toml_round_trip() {
    let mut cfg = SimConfig::preset(Preset::Paper);
    cfg.set("run.trials=17").unwrap();
    cfg.set("beamformer.loading=0.5").unwrap();
    let back = SimConfig::from_toml(&cfg.to_toml()).unwrap();
    assert_eq!(back, cfg);
    assert_eq!(back.hash(), cfg.hash());
}
