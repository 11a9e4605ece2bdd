//! Run a small sweep from an inline config and print the CSV table.
//! The same config format drives `sptmqc sweep --config`.

use sptmqc::sweep::{self, Format, SweepConfig};

const CONFIG: &str = r#"
mode = "all"
m_list = [0, 4, -1]

[grid.theta]
values = [1.5707963267948966]

[grid.phi]
min = 0.0
max = 3.141592653589793
count = 5
"#;

fn main() -> sptmqc::Result<()> {
    let cfg = SweepConfig::from_toml_str(CONFIG)?;
    let table = sweep::run_sweep(&cfg)?;
    let text = sweep::table_to_string(&table, &cfg, Format::Csv, false)?;
    print!("{text}");

    let rows = sweep::read_csv(&text)?;
    for p in sweep::fig2_predicates(&rows) {
        println!("{} {}", if p.passed { "ok  " } else { "FAIL" }, p.name);
    }
    Ok(())
}
