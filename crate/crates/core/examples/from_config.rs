//! Parse a config in the CLI's format, run it, and write the CSV and summary.

use lhs_sim::harness::{parse_config_str, run_single, write_run, Config};

fn main() -> lhs_sim::Result<()> {
    let dir = std::env::temp_dir().join("lhs_from_config");
    let text = format!(
        "d = 3\nN = 40\nkappa0 = 2.0\nt_final = 5.0\nseed = 4\nrecord_stride = 10\noutput_dir = {:?}\n",
        dir.display().to_string()
    );
    let Ok(Config::Run(cfg)) = parse_config_str(&text) else {
        panic!("not a run config");
    };
    print!("{}", cfg.echo());
    let out = run_single(&cfg)?;
    println!("wrote {} ({} rows)", write_run(&out)?.display(), out.rows.len());
    Ok(())
}
