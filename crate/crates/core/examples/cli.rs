//! Drive the command-line front end in-process. Each command prints the
//! files it wrote.
//!
//! The same commands work with the `polymix` binary, e.g.
//! `polymix analyze --family rooms --N 2 --d 3 --out out/`.

use polymix::harness::run_cli;

fn main() {
    let out = std::env::temp_dir().join("polymix-cli-example");
    let out = out.to_str().expect("utf-8 temp dir");
    let commands: [&[&str]; 3] = [
        &["gen", "--family", "goal_grid", "--d", "3"],
        &["analyze", "--family", "rooms", "--N", "2", "--d", "3"],
        &["regret", "--family", "goal_grid", "--d", "3", "--algorithm", "rho_off_policy", "--steps", "2000", "--seeds", "2"],
    ];
    for args in commands {
        let mut argv = vec!["polymix"];
        argv.extend_from_slice(args);
        argv.extend(["--out", out]);
        let code = run_cli(argv);
        assert_eq!(code, 0, "command {args:?} failed");
    }
}
