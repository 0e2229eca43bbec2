//! Runs the `fig-resolution` preset through the experiment runner and prints
//! the summary line and the first rows of the CSV it writes.
use pekeris_refocus::runner::{execute, Command, Overrides, Preset};

fn run_example() -> std::io::Result<()> {
    let out = std::env::temp_dir().join(format!("pekeris-example-{}", std::process::id()));
    let o = Overrides { out: Some(out.clone()), ..Default::default() };
    let summary = execute(Command::Preset(Preset::Resolution), None, &o);
    println!("{}", summary.line());
    assert_eq!(summary.exit_code, 0);
    let csv = std::fs::read_to_string(out.join("resolution.csv"))?;
    for line in csv.lines().take(6) {
        println!("{line}");
    }
    std::fs::remove_dir_all(&out)
}

fn main() -> std::io::Result<()> {
    run_example()
}
