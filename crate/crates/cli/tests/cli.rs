use std::path::Path;
use std::process::{Command, Output};

use kitune::spin::{labeled_spectrum, transitions, TransitionKind};
use kitune::trace::read_trace_csv;
use kitune::SpinSystem;

fn kitune() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_kitune"));
    c.env_remove("KITUNE_OUT_DIR");
    c
}

fn run(args: &[&str], out: &Path) -> Output {
    kitune().args(args).arg("--out").arg(out).output().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn list_shows_every_figure_family() {
    let o = kitune().arg("list").output().unwrap();
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    for id in ["fig2a", "fig2f", "fig3b", "fig4a", "fig4e"] {
        assert!(text.contains(id), "{text}");
    }
    let m = kitune().args(["list", "--machine"]).output().unwrap();
    let ids: Vec<String> = String::from_utf8(m.stdout).unwrap().lines().map(str::to_string).collect();
    assert!(ids.len() >= 8);
    assert!(ids.iter().all(|l| !l.contains(' ')));
    let again = kitune().args(["list", "--machine"]).output().unwrap();
    assert_eq!(String::from_utf8(again.stdout).unwrap().lines().collect::<Vec<_>>(), ids);
}

#[test]
fn missing_config_exits_2_naming_the_path() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["run", "fig2e", "--config", "/no/such/kitune.toml"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("/no/such/kitune.toml"), "{}", stderr(&o));
}

#[test]
fn unknown_scenario_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["run", "fig9z"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("fig9z"));
}

#[test]
fn unknown_parameter_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["run", "fig2e", "--set", "pump.nope=1"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "[echo]\nt3 = 1.0\n").unwrap();
    let o = run(&["run", "fig2e", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}

#[test]
fn numerical_failure_exits_3() {
    // bias beyond the coupler's critical current
    let o = kitune().args(["quantize", "--ia", "0.02"]).output().unwrap();
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
}

#[test]
fn pump_delay_passes_through() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["run", "fig2f", "--pump-delay", "2e-6"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let files: Vec<String> = std::fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .filter(|n| n.ends_with(".csv"))
        .collect();
    assert_eq!(files, vec!["fig2f_delay_2000ns.csv".to_string()]);
    let tr = read_trace_csv(std::fs::File::open(dir.path().join(&files[0])).unwrap()).unwrap();
    let logs: Vec<f64> = tr.values.iter().map(|z| z.norm().ln()).collect();
    let curv = |i: usize| (logs[i + 1] - 2.0 * logs[i] + logs[i - 1]).abs();
    let k = (1..logs.len() - 1).max_by(|&i, &j| curv(i).partial_cmp(&curv(j)).unwrap()).unwrap();
    assert!((tr.axis[k] - 7e-6).abs() <= 10e-9 * 1.0001, "kink at {}", tr.axis[k]);
}

#[test]
fn fig3b_grid_follows_the_transition_catalogue() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["run", "fig3b"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let mut rdr = csv::Reader::from_path(dir.path().join("fig3b.csv")).unwrap();
    assert_eq!(rdr.headers().unwrap().iter().collect::<Vec<_>>(), ["f_Hz", "Bz_T", "dkappa_per_s"]);
    let rows: Vec<[f64; 3]> = rdr
        .records()
        .map(|r| {
            let r = r.unwrap();
            [0, 1, 2].map(|k| r[k].parse().unwrap())
        })
        .collect();
    let fields: std::collections::BTreeSet<u64> = rows.iter().map(|r| (r[1] * 1e7).round() as u64).collect();
    assert_eq!(fields.len(), 131);
    assert_eq!(*fields.iter().next_back().unwrap(), 650_000);
    let fmin = rows.iter().map(|r| r[0]).fold(f64::MAX, f64::min);
    let fmax = rows.iter().map(|r| r[0]).fold(f64::MIN, f64::max);
    assert!((fmin - 7.342e9).abs() < 1.0 && (fmax - 7.422e9).abs() < 1.0);

    // wherever a line sits well inside the window, the strongest pixel is on a catalogued line
    let sys = SpinSystem::bismuth();
    let mut checked = 0;
    for &key in &fields {
        let bz = key as f64 * 1e-7;
        let spec = labeled_spectrum(&sys, bz).unwrap();
        let lines = transitions(&sys, &spec, Some(TransitionKind::Esr)).unwrap();
        if !lines.iter().any(|t| t.frequency > 7.352e9 && t.frequency < 7.412e9) {
            continue;
        }
        let cut: Vec<&[f64; 3]> = rows.iter().filter(|r| (r[1] - bz).abs() < 1e-9).collect();
        let best = cut.iter().max_by(|a, b| a[2].partial_cmp(&b[2]).unwrap()).unwrap();
        let nearest = lines.iter().map(|t| (t.frequency - best[0]).abs()).fold(f64::MAX, f64::min);
        assert!(nearest <= 0.2e6, "{bz}: {nearest}");
        checked += 1;
    }
    assert!(checked > 3, "{checked}");
}

#[test]
fn sidecar_names_the_figure_and_env_sets_the_directory() {
    let dir = tempfile::tempdir().unwrap();
    let o = kitune()
        .args(["run", "fig4d", "--seed", "5"])
        .env("KITUNE_OUT_DIR", dir.path())
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    let meta: toml::Table = std::fs::read_to_string(dir.path().join("fig4d.meta.toml")).unwrap().parse().unwrap();
    assert_eq!(meta["figure"].as_str(), Some("Fig. 4d"));
    assert_eq!(meta["seed"].as_integer(), Some(5));
    assert_eq!(meta["files"].as_array().unwrap()[0].as_str(), Some("fig4d.csv"));
    assert!(dir.path().join("fig4d.csv").exists());
}

#[test]
fn overrides_change_the_output() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    assert!(run(&["run", "fig4c"], a.path()).status.success());
    assert!(run(&["run", "fig4c", "--set", "echo.t2=0.3"], b.path()).status.success());
    let fit = std::fs::read_to_string(b.path().join("fig4c_fit.txt")).unwrap();
    let t2: f64 = fit
        .lines()
        .find_map(|l| l.strip_prefix("time = "))
        .unwrap()
        .parse()
        .unwrap();
    assert!((t2 / 0.3 - 1.0).abs() < 0.02, "{t2}");
    assert_ne!(std::fs::read(a.path().join("fig4c.csv")).unwrap(), std::fs::read(b.path().join("fig4c.csv")).unwrap());
}

#[test]
fn s11_output_round_trips_through_fit() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("s11.csv");
    let o = kitune().args(["s11", "--g3wm", "1e6", "-o"]).arg(&trace).output().unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    let o = kitune().args(["fit", "resonance", "--input"]).arg(&trace).output().unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    let text = String::from_utf8(o.stdout).unwrap();
    let get = |k: &str| -> f64 {
        text.lines()
            .find_map(|l| l.strip_prefix(&format!("{k} = ")))
            .unwrap()
            .parse()
            .unwrap()
    };
    let kb = 2.6e7 + 5.7e6;
    let ki = 7.5e5 + 4.0 * 1e12 / kb;
    assert!((get("kappa_c") / 9.4e4 - 1.0).abs() < 1e-6, "{text}");
    assert!((get("kappa_i") / ki - 1.0).abs() < 1e-6, "{text}");
}

#[test]
fn clock_find_reports_the_branch() {
    let o = kitune().arg("clock-find").output().unwrap();
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    let field: f64 = text.lines().find_map(|l| l.strip_prefix("field = ")).unwrap().parse().unwrap();
    let freq: f64 = text.lines().find_map(|l| l.strip_prefix("frequency = ")).unwrap().parse().unwrap();
    assert!(field > 0.02 && field < 0.03);
    assert!((freq - 7.3382e9).abs() < 1e6);
}

#[test]
fn tune_and_fit_tuning_agree() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("tune.csv");
    assert!(kitune().args(["tune", "-o"]).arg(&data).output().unwrap().status.success());
    let o = kitune()
        .args(["fit", "tuning", "--sigma", "1e3", "--set", "circuit.istar_a=12e-3", "--input"])
        .arg(&data)
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    let text = String::from_utf8(o.stdout).unwrap();
    let istar: f64 = text.lines().find_map(|l| l.strip_prefix("istar = ")).unwrap().parse().unwrap();
    assert!((istar / 9.53e-3 - 1.0).abs() < 1e-6, "{text}");
}
