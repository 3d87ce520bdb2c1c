//! Loading a run configuration and writing reports, as the `mpfio` binary
//! does.

use mpfio::config::{Experiment, RunConfig};
use mpfio::runner::{execute, write_outputs};

const CONFIG: &str = r#"
seed = 11
experiments = ["partition-check", "orthogonality", "adjoint-tail"]

[partition-check]
samples = 2000

[orthogonality]
pairs = [[4, 1], [1, 5]]
nodes = 8
"#;

fn main() -> mpfio::Result<()> {
    let config = RunConfig::parse(CONFIG)?;
    let outputs = execute(&config, &config.selected(), |line| println!("{line}"))?;
    let dir = tempfile::tempdir()?;
    write_outputs(dir.path(), &config, &outputs)?;
    let mut names: Vec<String> = std::fs::read_dir(dir.path())?
        .map(|e| e.map(|e| e.file_name().to_string_lossy().into_owned()))
        .collect::<Result<_, _>>()?;
    names.sort();
    println!("wrote {}", names.join(", "));

    match RunConfig::parse("[problem]\nlayout = [1, 3]\n") {
        Err(e) => println!("rejected: {e}"),
        Ok(_) => unreachable!(),
    }
    println!("experiments: {}", Experiment::ALL.map(|e| e.name()).join(", "));
    Ok(())
}
