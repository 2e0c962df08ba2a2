//! Drives the command-line interface in-process: a run config, a subcommand
//! with `--check`, and a rejected config.

use horizonforge::cli::run_captured;

fn main() {
    let data = concat!(env!("CARGO_MANIFEST_DIR"), "/data");
    let dir = std::env::temp_dir().join("horizonforge-cli-example");
    std::fs::create_dir_all(&dir).expect("temp dir");

    let (code, out, _) = run_captured(&["lambda1", "--metric", &format!("{data}/round_s2.json"), "--k", "0.5"]);
    println!("lambda1 -> exit {code}\n{out}");

    let (code, out, _) = run_captured(&["glue", "--check", "--inner", &format!("{data}/inner_band.json"), "--outer", &format!("{data}/outer_band.json")]);
    println!("glue --check -> exit {code}\n{out}");

    let cfg = dir.join("bend.json");
    std::fs::write(&cfg, r#"{"command": "bend", "args": {"m1": 0.5, "m2": 0.55, "rho1": 1.2, "rho2": 2.5, "out": "bend.csv"}, "outputs": {"dir": "DIR"}}"#.replace("DIR", &dir.display().to_string()))
        .expect("write config");
    let (code, out, _) = run_captured(&["run", "--config", &cfg.display().to_string()]);
    println!("run bend.json -> exit {code}\n{out}wrote {}\n", dir.join("bend.csv").display());

    std::fs::write(&cfg, r#"{"command": "bend", "tolerance": {}}"#).expect("write config");
    let (code, _, err) = run_captured(&["run", "--config", &cfg.display().to_string()]);
    println!("malformed config -> exit {code}\n{err}");
}
